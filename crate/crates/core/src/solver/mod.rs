//! Inner boundary value solves with the elongation frozen, the scalar
//! fixed-point problem for the elongation, and result post-processing.

mod banded;
mod collocation;
mod contraction;
mod extrema;
mod root;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bridge_model::{
    derive_geometry, scaled_from_geometry, BridgeParams, CableGeometry, LcMode, ScaledCoefficients,
};
use crate::error::{positive, MelanError, Result};
use crate::functionals::gamma_scaled;
use crate::grid::{sample_load, GridFunction, LoadProfile, LoadSamples, Mesh};

pub(crate) use collocation::Forcing;
use collocation::{newton, System};
pub use contraction::{contraction_solve, ContractionReport};
pub use extrema::{extremum_analysis, Extremum, ExtremumKind, ExtremumSummary};

/// Which right-hand side is used for the deck equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Slope-dependent cable coupling and the nonlocal elongation term.
    Full,
    /// Constant-coefficient truncation `a2 z'' + (ac z'' - aq) Gamma`.
    Simplified,
    /// Constant tension term `a2 z''` with the full nonlocal cable term.
    TimoshenkoYoung,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 3] = [
        ModelVariant::Full,
        ModelVariant::Simplified,
        ModelVariant::TimoshenkoYoung,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Full => "full",
            ModelVariant::Simplified => "simplified",
            ModelVariant::TimoshenkoYoung => "timoshenko-young",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = MelanError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "full" => Ok(ModelVariant::Full),
            "simplified" => Ok(ModelVariant::Simplified),
            "timoshenko-young" | "ty" => Ok(ModelVariant::TimoshenkoYoung),
            other => Err(MelanError::InvalidParameter {
                name: "variant",
                reason: format!("unknown variant `{other}` (expected full, simplified or timoshenko-young)"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Requested number of mesh intervals; raised slightly to align load jumps with nodes.
    pub n_intervals: usize,
    /// Relative Newton step tolerance.
    pub newton_tol: f64,
    /// Admissible relative collocation defect.
    pub bvp_tol: f64,
    pub max_newton: usize,
    /// Load steps tried when Newton fails from the zero initial guess.
    pub continuation_steps: usize,
    /// Starting bracket for the elongation (m); expanded when it holds no sign change.
    pub gamma_bracket: (f64, f64),
    /// Admissible `|Gamma_out - Gamma_in|` at the fixed point (m).
    pub gamma_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n_intervals: 2000,
            newton_tol: 1e-8,
            bvp_tol: 1e-6,
            max_newton: 30,
            continuation_steps: 4,
            gamma_bracket: (-0.5, 1.0),
            gamma_tol: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn with_intervals(mut self, n_intervals: usize) -> Self {
        self.n_intervals = n_intervals;
        self
    }

    pub fn validate(&self) -> Result<()> {
        Mesh::new(self.n_intervals)?;
        positive("newton_tol", self.newton_tol)?;
        positive("bvp_tol", self.bvp_tol)?;
        positive("gamma_tol", self.gamma_tol)?;
        if self.max_newton == 0 {
            return Err(MelanError::InvalidParameter {
                name: "max_newton",
                reason: "must be at least 1".into(),
            });
        }
        let (lo, hi) = self.gamma_bracket;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(MelanError::InvalidParameter {
                name: "gamma_bracket",
                reason: format!("need finite lo < hi, got ({lo}, {hi})"),
            });
        }
        Ok(())
    }
}

/// Solution of the boundary value problem for one frozen elongation.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub solution: GridFunction,
    pub newton_iterations: usize,
    /// Relative collocation defect.
    pub defect: f64,
}

/// Solves the hinged problem with the elongation frozen at `gamma`.
///
/// Starts Newton from zero; if that fails, ramps the load in
/// `continuation_steps` equal increments.
pub fn solve_inner(
    coeffs: &ScaledCoefficients,
    variant: ModelVariant,
    mesh: Mesh,
    load: &LoadSamples,
    gamma: f64,
    opts: &SolverOptions,
) -> Result<InnerSolution> {
    solve_system(coeffs, variant, mesh, load, gamma, None, opts)
}

fn solve_system(
    coeffs: &ScaledCoefficients,
    variant: ModelVariant,
    mesh: Mesh,
    load: &LoadSamples,
    gamma: f64,
    forcing: Option<&Forcing>,
    opts: &SolverOptions,
) -> Result<InnerSolution> {
    let size = 4 * mesh.len();
    let mut sys = System {
        coeffs,
        variant,
        gamma,
        load,
        load_factor: 1.0,
        forcing,
    };
    let first = newton(&sys, &mesh, vec![0.0; size], opts.newton_tol, opts.max_newton);
    match first {
        Ok(out) => {
            return Ok(InnerSolution {
                solution: GridFunction::from_state(mesh, &out.state),
                newton_iterations: out.iterations,
                defect: out.defect,
            })
        }
        Err(e) if opts.continuation_steps <= 1 || forcing.is_some() => return Err(e),
        Err(_) => {}
    }
    let steps = opts.continuation_steps;
    let mut state = vec![0.0; size];
    let mut total = 0;
    let mut last = 0.0;
    for k in 1..=steps {
        sys.load_factor = k as f64 / steps as f64;
        let out = newton(&sys, &mesh, state, opts.newton_tol, opts.max_newton)?;
        total += out.iterations;
        state = out.state;
        last = out.defect;
    }
    Ok(InnerSolution {
        solution: GridFunction::from_state(mesh, &state),
        newton_iterations: total,
        defect: last,
    })
}

/// Hinged solve of the linear operator `z'''' - a2 z''/d - a1 z'(0.5-s)/d^2 = ap p`.
pub(crate) fn solve_operator(coeffs: &ScaledCoefficients, mesh: Mesh, load: &LoadSamples) -> Result<GridFunction> {
    let sys = System {
        coeffs,
        variant: ModelVariant::Full,
        gamma: 0.0,
        load,
        load_factor: 1.0,
        forcing: None,
    };
    let out = newton(&sys, &mesh, vec![0.0; 4 * mesh.len()], 1e-12, 1)?;
    Ok(GridFunction::from_state(mesh, &out.state))
}

/// Solve with an extra forcing `f` added to the right-hand side of the Full operator (Gamma = 0).
pub(crate) fn solve_forced(
    coeffs: &ScaledCoefficients,
    mesh: Mesh,
    load: &LoadSamples,
    forcing: &Forcing,
) -> Result<InnerSolution> {
    let opts = SolverOptions {
        continuation_steps: 1,
        max_newton: 1,
        ..SolverOptions::default()
    };
    solve_system(coeffs, ModelVariant::Full, mesh, load, 0.0, Some(forcing), &opts)
}

/// One evaluation of the elongation map `Gamma -> Gamma(z_Gamma)`.
#[derive(Debug, Clone)]
pub struct GammaMapPoint {
    pub gamma_in: f64,
    pub gamma_out: f64,
    pub inner: InnerSolution,
}

/// A discretized problem: parameters, mesh aligned with the load jumps, sampled load.
#[derive(Debug, Clone)]
pub struct Problem {
    pub params: BridgeParams,
    pub geometry: CableGeometry,
    pub coeffs: ScaledCoefficients,
    pub variant: ModelVariant,
    pub mesh: Mesh,
    pub profile: LoadProfile,
    pub load: LoadSamples,
    pub options: SolverOptions,
}

impl Problem {
    pub fn new(
        params: &BridgeParams,
        variant: ModelVariant,
        p: &LoadProfile,
        opts: &SolverOptions,
        lc_mode: LcMode,
    ) -> Result<Self> {
        lc_mode.validate()?;
        opts.validate()?;
        let geometry = derive_geometry(params)?;
        p.validate(params.length)?;
        let mesh = Mesh::aligned(opts.n_intervals, &p.breakpoints(params.length))?;
        let load = sample_load(p, &mesh, params.length)?;
        Ok(Self {
            params: *params,
            geometry,
            coeffs: scaled_from_geometry(&geometry, lc_mode),
            variant,
            mesh,
            profile: p.clone(),
            load,
            options: *opts,
        })
    }

    pub fn lc_mode(&self) -> LcMode {
        self.coeffs.lc_mode
    }

    pub fn solve_at(&self, gamma: f64) -> Result<InnerSolution> {
        solve_inner(&self.coeffs, self.variant, self.mesh, &self.load, gamma, &self.options)
    }

    pub fn gamma_map(&self, gamma: f64) -> Result<GammaMapPoint> {
        let inner = self.solve_at(gamma)?;
        let gamma_out = gamma_scaled(&inner.solution, &self.coeffs);
        Ok(GammaMapPoint {
            gamma_in: gamma,
            gamma_out,
            inner,
        })
    }

    /// Smallest elongation a cable can have: straight between the towers.
    pub fn gamma_floor(&self) -> f64 {
        self.coeffs.length * (1.0 - self.coeffs.lc_ratio)
    }

    /// Solves the coupled problem by a bracketed root search on `Gamma_out(Gamma) - Gamma`.
    pub fn solve(&self) -> Result<SolveReport> {
        let opts = &self.options;
        let mut counts = Vec::new();
        let mut g = |gamma: f64| -> Result<f64> {
            let pt = self.gamma_map(gamma)?;
            counts.push(pt.inner.newton_iterations);
            Ok(pt.gamma_out - gamma)
        };
        let floor = self.gamma_floor();
        let (mut lo, mut hi) = opts.gamma_bracket;
        lo = lo.max(0.999 * floor);
        if lo >= hi {
            hi = lo + 1.0;
        }
        let mut glo = g(lo)?;
        let mut ghi = g(hi)?;
        let mut root = None;
        if lo < 0.0 && hi > 0.0 {
            let g0 = g(0.0)?;
            if g0 == 0.0 {
                root = Some(0.0);
            } else if g0.signum() != glo.signum() {
                hi = 0.0;
                ghi = g0;
            } else if g0.signum() != ghi.signum() {
                lo = 0.0;
                glo = g0;
            }
        }
        let mut expansions = 0;
        while root.is_none() && glo.signum() == ghi.signum() && glo != 0.0 && ghi != 0.0 {
            if expansions >= 20 {
                return Err(MelanError::BracketNotFound { lo, hi });
            }
            expansions += 1;
            let width = hi - lo;
            // g decreases: both positive means the root lies above, both negative below
            if glo > 0.0 {
                lo = hi;
                glo = ghi;
                hi += 2.0 * width;
                ghi = g(hi)?;
            } else {
                if lo <= 0.999 * floor {
                    return Err(MelanError::BracketNotFound { lo, hi });
                }
                hi = lo;
                ghi = glo;
                lo = (lo - 2.0 * width).max(0.999 * floor);
                glo = g(lo)?;
            }
        }
        let x = match root {
            Some(x) => x,
            None => root::brent(&mut g, lo, hi, glo, ghi, 1e-13, 200)?.x,
        };
        let outer_iterations = counts.len();
        let pt = self.gamma_map(x)?;
        counts.push(pt.inner.newton_iterations);
        Ok(self.report(x, pt.gamma_out, pt.inner, outer_iterations, counts))
    }

    pub(crate) fn report(
        &self,
        gamma_fix: f64,
        gamma_out: f64,
        inner: InnerSolution,
        outer_iterations: usize,
        inner_newton_counts: Vec<usize>,
    ) -> SolveReport {
        let ex = extremum_analysis(&inner.solution);
        let strong = strong_residual(&inner.solution, &self.coeffs, self.variant, &self.load.nodes, gamma_fix);
        let fixed_point_defect = (gamma_out - gamma_fix).abs();
        SolveReport {
            variant: self.variant,
            lc_mode: self.lc_mode(),
            n_intervals: self.mesh.n_intervals(),
            gamma_fix,
            gamma_out,
            fixed_point_defect,
            additional_tension: self.coeffs.stiffness * gamma_fix,
            max_displacement: ex.max_displacement,
            gap: ex.gap,
            extrema: ex.extrema,
            residual: inner.defect,
            strong_residual: strong,
            outer_iterations,
            inner_newton_counts,
            converged: fixed_point_defect <= self.options.gamma_tol && inner.defect <= self.options.bvp_tol,
            solution: inner.solution,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub variant: ModelVariant,
    pub lc_mode: LcMode,
    pub n_intervals: usize,
    /// Elongation at the fixed point (m).
    pub gamma_fix: f64,
    /// Elongation of the computed deflection (m).
    pub gamma_out: f64,
    pub fixed_point_defect: f64,
    /// `h = c Gamma` (kN).
    pub additional_tension: f64,
    /// `M`, the largest displacement (m).
    pub max_displacement: f64,
    /// `G`, first maximum minus the central minimum (m).
    pub gap: Option<f64>,
    pub extrema: Vec<Extremum>,
    /// Relative collocation defect of the final inner solve.
    pub residual: f64,
    /// Relative residual of the fourth-order equation from differenced nodal `z''`.
    pub strong_residual: f64,
    pub outer_iterations: usize,
    pub inner_newton_counts: Vec<usize>,
    pub converged: bool,
    #[serde(skip)]
    pub solution: GridFunction,
}

/// Solves the coupled problem for one variant and load.
pub fn solve_full(
    params: &BridgeParams,
    variant: ModelVariant,
    p: &LoadProfile,
    opts: &SolverOptions,
    lc_mode: LcMode,
) -> Result<SolveReport> {
    Problem::new(params, variant, p, opts, lc_mode)?.solve()
}

/// Max over interior nodes of `|z'''' - F|`, with `z''''` the centered second
/// difference of the nodal `z''`, relative to the size of the right-hand side.
///
/// Nodes next to the boundary are skipped.
pub fn strong_residual(
    z: &GridFunction,
    coeffs: &ScaledCoefficients,
    variant: ModelVariant,
    load_nodes: &[f64],
    gamma: f64,
) -> f64 {
    let mesh = z.mesh();
    let n = mesh.n_intervals();
    let h2 = mesh.step() * mesh.step();
    let empty = LoadSamples {
        nodes: Vec::new(),
        start: Vec::new(),
        mid: Vec::new(),
        end: Vec::new(),
    };
    let sys = System {
        coeffs,
        variant,
        gamma,
        load: &empty,
        load_factor: 1.0,
        forcing: None,
    };
    let (z1, z2) = (z.z1(), z.z2());
    let mut worst = 0.0f64;
    for i in 2..n.saturating_sub(1) {
        let z4 = (z2[i + 1] - 2.0 * z2[i] + z2[i - 1]) / h2;
        let (f, _, _) = sys.rhs(mesh.node(i), z1[i], z2[i], load_nodes[i], 0.0);
        worst = worst.max((z4 - f).abs());
    }
    let pmax = load_nodes.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = (coeffs.ap * pmax).max(coeffs.aq * gamma.abs());
    worst / if scale > 0.0 { scale } else { 1.0 }
}
