//! Fourth-order mono-implicit Runge-Kutta (Lobatto IIIA / Hermite-Simpson)
//! discretization of the scaled first-order system `u = (z, z', z'', z''')`,
//! assembled as a banded system and solved by Newton's method.
//!
//! On each interval `[s_i, s_i + h]`:
//!
//! ```text
//! u_m  = (u_i + u_{i+1}) / 2 + h/8 (f_i - f_{i+1})
//! 0    = u_{i+1} - u_i - h/6 (f_i + 4 f(u_m) + f_{i+1})
//! ```
//!
//! closed by the hinged conditions `z = z'' = 0` at both ends.

use super::banded::BandedMatrix;
use super::ModelVariant;
use crate::bridge_model::ScaledCoefficients;
use crate::error::{MelanError, Result};
use crate::grid::{LoadSamples, Mesh};

type Mat4 = [[f64; 4]; 4];

/// Extra scaled right-hand side, sampled like a [`LoadSamples`] per interval.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Forcing {
    pub start: Vec<f64>,
    pub mid: Vec<f64>,
    pub end: Vec<f64>,
}

impl Forcing {
    fn max_abs(&self) -> f64 {
        self.start
            .iter()
            .chain(&self.mid)
            .chain(&self.end)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Right-hand side of `z'''' = F(s, z', z'')` for one variant with frozen elongation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct System<'a> {
    pub coeffs: &'a ScaledCoefficients,
    pub variant: ModelVariant,
    pub gamma: f64,
    pub load: &'a LoadSamples,
    pub load_factor: f64,
    pub forcing: Option<&'a Forcing>,
}

/// Nonlocal cable term `(ac z'' - aq) Gamma / (1 + (zscale z' + y')^2)^{3/2}` and its
/// partial derivatives in `z'` and `z''`.
#[inline]
pub(crate) fn cable_term(coeffs: &ScaledCoefficients, gamma: f64, s: f64, z1: f64, z2: f64) -> (f64, f64, f64) {
    let a = coeffs.zscale * z1 + coeffs.cable_slope(s);
    let big_d = 1.0 + a * a;
    let inv32 = 1.0 / (big_d * big_d.sqrt());
    let num = coeffs.ac * z2 - coeffs.aq;
    let value = num * gamma * inv32;
    let d_z1 = -3.0 * num * gamma * coeffs.zscale * a * inv32 / big_d;
    let d_z2 = coeffs.ac * gamma * inv32;
    (value, d_z1, d_z2)
}

impl System<'_> {
    /// `(F, dF/dz', dF/dz'')`.
    #[inline]
    pub(crate) fn rhs(&self, s: f64, z1: f64, z2: f64, p: f64, extra: f64) -> (f64, f64, f64) {
        let k = self.coeffs;
        let source = k.ap * p * self.load_factor + extra;
        match self.variant {
            ModelVariant::Full => {
                let ys = k.cable_slope(s);
                let d = 1.0 + ys * ys;
                let arm = 0.5 - s;
                let (c, c1, c2) = cable_term(k, self.gamma, s, z1, z2);
                (
                    source + k.a2 * z2 / d + k.a1 * z1 * arm / (d * d) + c,
                    k.a1 * arm / (d * d) + c1,
                    k.a2 / d + c2,
                )
            }
            ModelVariant::TimoshenkoYoung => {
                let (c, c1, c2) = cable_term(k, self.gamma, s, z1, z2);
                (source + k.a2 * z2 + c, c1, k.a2 + c2)
            }
            ModelVariant::Simplified => {
                let g = self.gamma;
                (source + k.a2 * z2 + (k.ac * z2 - k.aq) * g, 0.0, k.a2 + k.ac * g)
            }
        }
    }

    fn is_linear(&self) -> bool {
        self.variant == ModelVariant::Simplified || self.gamma == 0.0
    }

    fn scale(&self) -> f64 {
        let k = self.coeffs;
        let forcing = self.forcing.map_or(0.0, Forcing::max_abs);
        (k.ap * self.load.max_abs() * self.load_factor.abs() + k.aq * self.gamma.abs() + forcing).max(1.0)
    }

    /// `f(u)` and its Jacobian.
    #[inline]
    fn eval(&self, s: f64, u: &[f64], p: f64, extra: f64) -> ([f64; 4], Mat4) {
        let (f, f1, f2) = self.rhs(s, u[1], u[2], p, extra);
        let mut jac = [[0.0; 4]; 4];
        jac[0][1] = 1.0;
        jac[1][2] = 1.0;
        jac[2][3] = 1.0;
        jac[3][1] = f1;
        jac[3][2] = f2;
        ([u[1], u[2], u[3], f], jac)
    }
}

fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            if a[i][k] != 0.0 {
                for j in 0..4 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

/// Midpoint state and interval residual, optionally with both Jacobian blocks.
pub(crate) struct IntervalEval {
    pub residual: [f64; 4],
    pub left: Mat4,
    pub right: Mat4,
}

fn interval(sys: &System, mesh: &Mesh, i: usize, ua: &[f64], ub: &[f64], with_jac: bool) -> IntervalEval {
    let h = mesh.step();
    let (sa, sb, sm) = (mesh.node(i), mesh.node(i + 1), mesh.midpoint(i));
    let load = sys.load;
    let (ea, em, eb) = sys
        .forcing
        .map_or((0.0, 0.0, 0.0), |f| (f.start[i], f.mid[i], f.end[i]));
    let (fa, ja) = sys.eval(sa, ua, load.start[i], ea);
    let (fb, jb) = sys.eval(sb, ub, load.end[i], eb);
    let mut um = [0.0; 4];
    for k in 0..4 {
        um[k] = 0.5 * (ua[k] + ub[k]) + h / 8.0 * (fa[k] - fb[k]);
    }
    let (fm, jm) = sys.eval(sm, &um, load.mid[i], em);
    let mut residual = [0.0; 4];
    for k in 0..4 {
        residual[k] = ub[k] - ua[k] - h / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k]);
    }
    let mut left = [[0.0; 4]; 4];
    let mut right = [[0.0; 4]; 4];
    if with_jac {
        let mut dma = [[0.0; 4]; 4];
        let mut dmb = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                let id = if r == c { 0.5 } else { 0.0 };
                dma[r][c] = id + h / 8.0 * ja[r][c];
                dmb[r][c] = id - h / 8.0 * jb[r][c];
            }
        }
        let ma = matmul(&jm, &dma);
        let mb = matmul(&jm, &dmb);
        for r in 0..4 {
            for c in 0..4 {
                let id = if r == c { 1.0 } else { 0.0 };
                left[r][c] = -id - h / 6.0 * (ja[r][c] + 4.0 * ma[r][c]);
                right[r][c] = id - h / 6.0 * (jb[r][c] + 4.0 * mb[r][c]);
            }
        }
    }
    IntervalEval { residual, left, right }
}

fn residual_and_jacobian(sys: &System, mesh: &Mesh, state: &[f64]) -> (Vec<f64>, BandedMatrix) {
    let n = mesh.n_intervals();
    let size = 4 * (n + 1);
    let mut res = vec![0.0; size];
    let mut jac = BandedMatrix::zeros(size, 5, 5);
    res[0] = state[0];
    jac.add(0, 0, 1.0);
    res[1] = state[2];
    jac.add(1, 2, 1.0);
    for i in 0..n {
        let ua = &state[4 * i..4 * i + 4];
        let ub = &state[4 * i + 4..4 * i + 8];
        let ev = interval(sys, mesh, i, ua, ub, true);
        let row0 = 2 + 4 * i;
        for r in 0..4 {
            res[row0 + r] = ev.residual[r];
            for c in 0..4 {
                if ev.left[r][c] != 0.0 {
                    jac.add(row0 + r, 4 * i + c, ev.left[r][c]);
                }
                if ev.right[r][c] != 0.0 {
                    jac.add(row0 + r, 4 * i + 4 + c, ev.right[r][c]);
                }
            }
        }
    }
    res[size - 2] = state[4 * n];
    jac.add(size - 2, 4 * n, 1.0);
    res[size - 1] = state[4 * n + 2];
    jac.add(size - 1, 4 * n + 2, 1.0);
    (res, jac)
}

/// Largest interval residual divided by `h` and by the size of the right-hand side.
pub(crate) fn defect(sys: &System, mesh: &Mesh, state: &[f64]) -> f64 {
    let n = mesh.n_intervals();
    let mut worst = 0.0f64;
    for i in 0..n {
        let ev = interval(
            sys,
            mesh,
            i,
            &state[4 * i..4 * i + 4],
            &state[4 * i + 4..4 * i + 8],
            false,
        );
        for r in ev.residual {
            worst = worst.max(r.abs());
        }
    }
    for v in [state[0], state[2], state[4 * n], state[4 * n + 2]] {
        worst = worst.max(v.abs() * mesh.step());
    }
    worst / (mesh.step() * sys.scale())
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub state: Vec<f64>,
    pub iterations: usize,
    pub defect: f64,
}

pub(crate) fn newton(
    sys: &System,
    mesh: &Mesh,
    mut state: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    let linear = sys.is_linear();
    for it in 1..=max_iter {
        let (res, jac) = residual_and_jacobian(sys, mesh, &state);
        let mut step: Vec<f64> = res.iter().map(|r| -r).collect();
        jac.solve(&mut step)?;
        let mut step_max = 0.0f64;
        let mut state_max = 0.0f64;
        for (u, d) in state.iter_mut().zip(&step) {
            *u += d;
            step_max = step_max.max(d.abs());
            state_max = state_max.max(u.abs());
        }
        if !step_max.is_finite() || !state_max.is_finite() {
            return Err(MelanError::NewtonDiverged {
                iterations: it,
                defect: f64::INFINITY,
            });
        }
        if linear || step_max <= tol * (1.0 + state_max) {
            let d = defect(sys, mesh, &state);
            return Ok(NewtonOutcome {
                state,
                iterations: it,
                defect: d,
            });
        }
    }
    Err(MelanError::NewtonDiverged {
        iterations: max_iter,
        defect: defect(sys, mesh, &state),
    })
}
