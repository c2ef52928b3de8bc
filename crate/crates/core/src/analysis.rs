//! Uniqueness conditions, sweeps of the elongation map, energy scans and
//! variant comparisons.

use serde::Serialize;

use crate::bridge_model::{derive_geometry, BridgeParams, LcMode};
use crate::error::{MelanError, Result};
use crate::exec::Execution;
use crate::functionals::{energy_with_load, EnergyBreakdown};
use crate::grid::{dual_norm, norm_y, sample_load, GridFunction, LoadProfile, Mesh};
use crate::solver::{ExtremumKind, ModelVariant, Problem, SolveReport, SolverOptions};

/// Constants of the existence and uniqueness theory for one load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub c_alpha2: f64,
    /// `(1 - c alpha^2)^2 / (c alpha beta^2)`; `None` when there is no cable stiffness.
    pub pc_threshold: Option<f64>,
    pub p_dual_norm: f64,
    /// `||p||_H / (1 - c alpha^2)`, radius of the ball holding the solution.
    #[serde(rename = "R_p")]
    pub a_priori_radius: Option<f64>,
    /// Contraction constant `c alpha (alpha + beta^2 R_p)`.
    pub rho: Option<f64>,
    pub cc_holds: bool,
    pub pc_holds: bool,
}

pub fn check_uniqueness_conditions(
    params: &BridgeParams,
    p: &LoadProfile,
    mesh: &Mesh,
    lc_mode: LcMode,
) -> Result<UniquenessReport> {
    lc_mode.validate()?;
    let geom = derive_geometry(params)?;
    let c = geom.stiffness_for(lc_mode);
    let (alpha, beta) = (geom.alpha, geom.beta);
    let c_alpha2 = c * alpha * alpha;
    let p_dual_norm = dual_norm(p, &geom, mesh)?;
    let cc_holds = c_alpha2 < 1.0;
    let pc_threshold = (c > 0.0).then(|| (1.0 - c_alpha2).powi(2) / (c * alpha * beta * beta));
    let (a_priori_radius, rho) = if cc_holds {
        let r = p_dual_norm / (1.0 - c_alpha2);
        (Some(r), Some(c * alpha * (alpha + beta * beta * r)))
    } else {
        (None, None)
    };
    let pc_holds = cc_holds && pc_threshold.is_none_or(|t| p_dual_norm < t);
    Ok(UniquenessReport {
        alpha,
        beta,
        c,
        c_alpha2,
        pc_threshold,
        p_dual_norm,
        a_priori_radius,
        rho,
        cc_holds,
        pc_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaMapRow {
    pub gamma_in: f64,
    pub gamma_out: Option<f64>,
    pub newton_iters: usize,
    pub converged: bool,
    pub error: Option<String>,
}

/// A sign change of `Gamma_out - Gamma_in` between two consecutive rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub lo: f64,
    pub hi: f64,
    /// Linear interpolation of the residual between `lo` and `hi`.
    pub estimate: f64,
    /// Central-difference slope of the map at `estimate`.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaMapTable {
    pub variant: ModelVariant,
    pub n_intervals: usize,
    pub rows: Vec<GammaMapRow>,
    pub crossings: Vec<Crossing>,
}

impl GammaMapTable {
    /// True when the sampled residual changes sign exactly once.
    pub fn single_crossing(&self) -> bool {
        self.crossings.len() == 1
    }
}

/// Difference step for the slope of the elongation map.
pub fn slope_step(opts: &SolverOptions) -> f64 {
    (100.0 * opts.gamma_tol).max(1e-4)
}

/// `d Gamma_out / d Gamma_in` by central differences.
pub fn fixed_point_slope(problem: &Problem, gamma: f64) -> Result<f64> {
    let h = slope_step(&problem.options);
    let up = problem.gamma_map(gamma + h)?.gamma_out;
    let down = problem.gamma_map(gamma - h)?.gamma_out;
    Ok((up - down) / (2.0 * h))
}

#[allow(clippy::too_many_arguments)]
pub fn sweep_gamma_map(
    params: &BridgeParams,
    variant: ModelVariant,
    p: &LoadProfile,
    range: (f64, f64),
    n_points: usize,
    opts: &SolverOptions,
    lc_mode: LcMode,
    exec: Execution,
) -> Result<GammaMapTable> {
    let (lo, hi) = range;
    if n_points < 3 || !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(MelanError::InvalidParameter {
            name: "range",
            reason: format!("need lo < hi and at least 3 points, got ({lo}, {hi}) with {n_points}"),
        });
    }
    let problem = Problem::new(params, variant, p, opts, lc_mode)?;
    let gammas: Vec<f64> = (0..n_points)
        .map(|k| lo + (hi - lo) * k as f64 / (n_points - 1) as f64)
        .collect();
    let rows = exec.map(&gammas, |&g| match problem.gamma_map(g) {
        Ok(pt) => GammaMapRow {
            gamma_in: g,
            gamma_out: Some(pt.gamma_out),
            newton_iters: pt.inner.newton_iterations,
            converged: pt.inner.defect <= opts.bvp_tol,
            error: None,
        },
        Err(e) => GammaMapRow {
            gamma_in: g,
            gamma_out: None,
            newton_iters: 0,
            converged: false,
            error: Some(e.to_string()),
        },
    });
    let mut brackets = Vec::new();
    let residual = |r: &GammaMapRow| r.gamma_out.map(|o| o - r.gamma_in);
    for (k, r) in rows.iter().enumerate() {
        let Some(ga) = residual(r) else { continue };
        if ga == 0.0 {
            brackets.push((r.gamma_in, r.gamma_in, r.gamma_in));
            continue;
        }
        if let Some(gb) = rows.get(k + 1).and_then(residual) {
            if gb != 0.0 && ga.signum() != gb.signum() {
                let (a, b) = (r.gamma_in, rows[k + 1].gamma_in);
                brackets.push((a, b, a + (b - a) * ga / (ga - gb)));
            }
        }
    }
    let crossings = exec.map(&brackets, |&(lo, hi, estimate)| Crossing {
        lo,
        hi,
        estimate,
        slope: fixed_point_slope(&problem, estimate).ok(),
    });
    Ok(GammaMapTable {
        variant,
        n_intervals: problem.mesh.n_intervals(),
        rows,
        crossings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyScanRow {
    pub t: f64,
    /// `J_p(w* + t v)`.
    pub total: f64,
    /// `(c/2) Gamma^2`.
    pub cable_tension: f64,
    /// `J_p - (c/2) Gamma^2`, convex in `t`.
    pub convex_part: f64,
}

impl EnergyScanRow {
    fn new(t: f64, e: &EnergyBreakdown) -> Self {
        Self {
            t,
            total: e.total,
            cable_tension: e.cable_tension,
            convex_part: e.total - e.cable_tension,
        }
    }
}

/// `J(w + t v)` for `t` on a uniform grid, with `v` normalized in `||.||_y`.
///
/// Without a direction the solution itself is used.
pub fn energy_scan(
    params: &BridgeParams,
    p: &LoadProfile,
    solution: &GridFunction,
    direction: Option<&GridFunction>,
    t_range: (f64, f64),
    n_points: usize,
    lc_mode: LcMode,
) -> Result<Vec<EnergyScanRow>> {
    let geom = derive_geometry(params)?;
    let mesh = solution.mesh();
    let v = direction.unwrap_or(solution);
    solution.same_mesh(v)?;
    let norm = norm_y(v, &geom);
    if norm.is_nan() || norm <= 0.0 {
        return Err(MelanError::DegenerateDirection);
    }
    let v = v.scaled(1.0 / norm);
    let load = sample_load(p, &mesh, params.length)?;
    let (a, b) = t_range;
    if n_points < 2 || !(a.is_finite() && b.is_finite() && a < b) {
        return Err(MelanError::InvalidParameter {
            name: "t_range",
            reason: format!("need lo < hi and at least 2 points, got ({a}, {b}) with {n_points}"),
        });
    }
    let steps = n_points - 1;
    (0..=steps)
        .map(|k| {
            let t = a + (b - a) * k as f64 / steps as f64;
            let w = solution.axpy(t, &v)?;
            Ok(EnergyScanRow::new(t, &energy_with_load(&w, &geom, &load, lc_mode)))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantComparison {
    pub variant: ModelVariant,
    pub gamma_fix: Option<f64>,
    pub max_displacement: Option<f64>,
    pub gap: Option<f64>,
    pub n_maxima: usize,
    pub n_minima: usize,
    pub converged: bool,
    pub error: Option<String>,
}

impl VariantComparison {
    pub fn from_result(variant: ModelVariant, r: &Result<SolveReport>) -> Self {
        match r {
            Ok(rep) => Self {
                variant,
                gamma_fix: Some(rep.gamma_fix),
                max_displacement: Some(rep.max_displacement),
                gap: rep.gap,
                n_maxima: rep.extrema.iter().filter(|e| e.kind == ExtremumKind::Max).count(),
                n_minima: rep.extrema.iter().filter(|e| e.kind == ExtremumKind::Min).count(),
                converged: rep.converged,
                error: None,
            },
            Err(e) => Self {
                variant,
                gamma_fix: None,
                max_displacement: None,
                gap: None,
                n_maxima: 0,
                n_minima: 0,
                converged: false,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Independent coupled solves, one per `(variant, load)` case.
pub fn solve_batch(
    params: &BridgeParams,
    cases: &[(ModelVariant, LoadProfile)],
    opts: &SolverOptions,
    lc_mode: LcMode,
    exec: Execution,
) -> Vec<Result<SolveReport>> {
    exec.map(cases, |(variant, p)| {
        Problem::new(params, *variant, p, opts, lc_mode).and_then(|pb| pb.solve())
    })
}

pub fn compare_variants(
    params: &BridgeParams,
    p: &LoadProfile,
    opts: &SolverOptions,
    lc_mode: LcMode,
    exec: Execution,
) -> Vec<VariantComparison> {
    let cases: Vec<_> = ModelVariant::ALL.iter().map(|&v| (v, p.clone())).collect();
    solve_batch(params, &cases, opts, lc_mode, exec)
        .iter()
        .zip(ModelVariant::ALL)
        .map(|(r, v)| VariantComparison::from_result(v, r))
        .collect()
}
