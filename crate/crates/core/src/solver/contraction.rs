//! Fixed-point iteration `w_{k+1} = Phi(w_k)` for the Full model: the cable term
//! is frozen at the previous iterate and the linear operator is inverted.

use serde::Serialize;

use super::collocation::{cable_term, defect, Forcing, System};
use super::{solve_forced, InnerSolution, ModelVariant, Problem, SolveReport, SolverOptions};
use crate::analysis::{check_uniqueness_conditions, UniquenessReport};
use crate::bridge_model::{BridgeParams, LcMode};
use crate::error::{MelanError, Result};
use crate::functionals::gamma_scaled;
use crate::grid::{norm_y, GridFunction, LoadProfile};

const MAX_ITERATIONS: usize = 500;
const MAX_EXPANDING_STEPS: usize = 3;

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub report: SolveReport,
    pub iterations: usize,
    /// `||w_{k+1} - w_k||_y`.
    pub step_norms: Vec<f64>,
    /// Successive quotients of the step norms.
    pub ratios: Vec<f64>,
    /// Largest quotient among steps well above round-off.
    pub max_ratio: Option<f64>,
    pub uniqueness: UniquenessReport,
    pub solution_norm: f64,
    /// `||w||_y <= R_p`.
    pub within_a_priori_bound: bool,
}

fn frozen_cable(problem: &Problem, v: &GridFunction, gamma: f64) -> Forcing {
    let k = &problem.coeffs;
    let mesh = problem.mesh;
    let h = mesh.step();
    let n = mesh.n_intervals();
    let (z1, z2, z3) = (v.z1(), v.z2(), v.z3());
    let at = |s: f64, a: f64, b: f64| cable_term(k, gamma, s, a, b).0;
    let mut f = Forcing {
        start: Vec::with_capacity(n),
        mid: Vec::with_capacity(n),
        end: Vec::with_capacity(n),
    };
    for i in 0..n {
        let j = i + 1;
        f.start.push(at(mesh.node(i), z1[i], z2[i]));
        f.end.push(at(mesh.node(j), z1[j], z2[j]));
        let m1 = 0.5 * (z1[i] + z1[j]) + h / 8.0 * (z2[i] - z2[j]);
        let m2 = 0.5 * (z2[i] + z2[j]) + h / 8.0 * (z3[i] - z3[j]);
        f.mid.push(at(mesh.midpoint(i), m1, m2));
    }
    f
}

/// Runs the contraction iteration from `w_0 = 0` until
/// `||w_{k+1} - w_k||_y <= newton_tol ||w_k||_y`.
///
/// Refuses to start when `c alpha^2 >= 1` and gives up after three consecutive
/// expanding steps.
pub fn contraction_solve(
    params: &BridgeParams,
    p: &LoadProfile,
    opts: &SolverOptions,
    lc_mode: LcMode,
) -> Result<ContractionReport> {
    let problem = Problem::new(params, ModelVariant::Full, p, opts, lc_mode)?;
    let uniqueness = check_uniqueness_conditions(params, p, &problem.mesh, lc_mode)?;
    if !uniqueness.cc_holds {
        return Err(MelanError::ConditionViolated {
            c_alpha2: uniqueness.c_alpha2,
        });
    }
    let geom = &problem.geometry;
    let mut w = GridFunction::zeros(problem.mesh);
    let mut step_norms: Vec<f64> = Vec::new();
    let mut ratios = Vec::new();
    let mut expanding = 0;
    let mut iterations = 0;
    loop {
        if iterations >= MAX_ITERATIONS {
            return Err(MelanError::NoContraction { steps: expanding });
        }
        iterations += 1;
        let gamma = gamma_scaled(&w, &problem.coeffs);
        let forcing = frozen_cable(&problem, &w, gamma);
        let next = solve_forced(&problem.coeffs, problem.mesh, &problem.load, &forcing)?.solution;
        let step = norm_y(&next.axpy(-1.0, &w)?, geom);
        let prev_norm = norm_y(&w, geom);
        if let Some(&last) = step_norms.last() {
            if last > 0.0 {
                let r = step / last;
                ratios.push(r);
                expanding = if r > 1.0 { expanding + 1 } else { 0 };
                if expanding >= MAX_EXPANDING_STEPS {
                    return Err(MelanError::NoContraction { steps: expanding });
                }
            }
        }
        step_norms.push(step);
        w = next;
        if step <= opts.newton_tol * prev_norm || step == 0.0 {
            break;
        }
    }
    let solution_norm = norm_y(&w, geom);
    // quotients of steps near round-off carry no information
    let floor = 1e-10 * solution_norm;
    let max_ratio = step_norms
        .windows(2)
        .filter(|s| s[1] > floor)
        .map(|s| s[1] / s[0])
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let gamma = gamma_scaled(&w, &problem.coeffs);
    let sys = System {
        coeffs: &problem.coeffs,
        variant: ModelVariant::Full,
        gamma,
        load: &problem.load,
        load_factor: 1.0,
        forcing: None,
    };
    let d = defect(&sys, &problem.mesh, &w.to_state());
    let within_a_priori_bound = uniqueness
        .a_priori_radius
        .is_some_and(|r| solution_norm <= r * (1.0 + 1e-9) + 1e-12);
    let inner = InnerSolution {
        solution: w,
        newton_iterations: iterations,
        defect: d,
    };
    let report = problem.report(gamma, gamma, inner, iterations, vec![1; iterations]);
    Ok(ContractionReport {
        report,
        iterations,
        step_norms,
        ratios,
        max_ratio,
        uniqueness,
        solution_norm,
        within_a_priori_bound,
    })
}
