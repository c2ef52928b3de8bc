//! Cable elongation, additional tension, the energy of the bridge and its
//! first variation, and the roots of the degenerate-limit function `gamma_w`.
//!
//! Integrals over the span use the composite trapezoid rule on the nodes with the
//! Euler-Maclaurin end correction built from the stored derivatives, so that the
//! discrete energy is consistent with the fourth-order collocation solution.

use serde::Serialize;

use crate::bridge_model::{CableGeometry, LcMode, ScaledCoefficients};
use crate::error::{MelanError, Result};
use crate::grid::{inner_y, load_pairing, sample_load, trap_corrected, GridFunction, LoadProfile, LoadSamples};

/// `sqrt(1 + a^2) - sqrt(1 + b^2)` without cancellation.
#[inline]
fn arc_difference(a: f64, b: f64) -> f64 {
    (a - b) * (a + b) / ((1.0 + a * a).sqrt() + (1.0 + b * b).sqrt())
}

/// `L [ int_0^1 sqrt(1 + (zscale z' + yslope (0.5 - s))^2) ds - L_c/L ]`.
///
/// In [`LcMode::Exact`] the rest length is the same quadrature applied to the
/// unloaded cable, evaluated in difference form to keep small elongations exact.
pub(crate) fn elongation(w: &GridFunction, length: f64, zscale: f64, yslope: f64, lc_mode: LcMode) -> f64 {
    let mesh = w.mesh();
    let n = mesh.n_intervals();
    let (z1, z2) = (w.z1(), w.z2());
    let b = |i: usize| yslope * (0.5 - mesh.node(i));
    let a = |i: usize| zscale * z1[i] + b(i);
    // d/ds of the integrands; b' = -yslope, a' = zscale z'' - yslope
    let da = |i: usize| {
        let a = a(i);
        a * (zscale * z2[i] - yslope) / (1.0 + a * a).sqrt()
    };
    let db = |i: usize| {
        let b = b(i);
        -b * yslope / (1.0 + b * b).sqrt()
    };
    match lc_mode {
        LcMode::Exact => {
            let d = |i: usize| da(i) - db(i);
            length * trap_corrected(&mesh, |i| arc_difference(a(i), b(i)), d(0), d(n))
        }
        LcMode::Ratio(r) => {
            let arc = trap_corrected(&mesh, |i| (1.0 + a(i) * a(i)).sqrt(), da(0), da(n));
            length * (arc - r)
        }
    }
}

/// `Gamma(w) = int_0^L sqrt(1 + (w' + y')^2) dx - L_c` (m).
pub fn gamma(w: &GridFunction, geom: &CableGeometry, lc_mode: LcMode) -> f64 {
    let l = geom.length();
    elongation(w, l, 1.0 / l, geom.q_over_h * l, lc_mode)
}

/// Elongation of the cable from scaled derivatives, using the coefficients' own mode.
pub fn gamma_scaled(w: &GridFunction, coeffs: &ScaledCoefficients) -> f64 {
    elongation(w, coeffs.length, coeffs.zscale, coeffs.yslope, coeffs.lc_mode)
}

/// `h(w) = (EcA / L_c) Gamma(w)` (kN).
pub fn additional_tension(w: &GridFunction, geom: &CableGeometry, lc_mode: LcMode) -> f64 {
    geom.stiffness_for(lc_mode) * gamma(w, geom, lc_mode)
}

/// First variation of the elongation: `int (w' + y') v' / sqrt(1 + (w' + y')^2) dx`.
pub fn gamma_derivative(w: &GridFunction, v: &GridFunction, geom: &CableGeometry) -> Result<f64> {
    w.same_mesh(v)?;
    let mesh = w.mesh();
    let n = mesh.n_intervals();
    let l = geom.length();
    let yslope = geom.q_over_h * l;
    let a = |i: usize| w.z1()[i] / l + yslope * (0.5 - mesh.node(i));
    let f = |i: usize| {
        let a = a(i);
        a * v.z1()[i] / (1.0 + a * a).sqrt()
    };
    let df = |i: usize| {
        let a = a(i);
        let r = 1.0 + a * a;
        (w.z2()[i] / l - yslope) * v.z1()[i] / (r * r.sqrt()) + a * v.z2()[i] / r.sqrt()
    };
    Ok(trap_corrected(&mesh, f, df(0), df(n)))
}

/// Energy terms in kN m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// `(EI/2) int (w'')^2`.
    pub bending: f64,
    /// `(H/2) int (w')^2 / (1 + y'^2)`.
    pub cable_stretch: f64,
    /// `cable_stretch + q int w`, the raw cable energy before the dead-load work cancels it.
    pub cable_stretch_raw: f64,
    /// `(c/2) Gamma^2`.
    pub cable_tension: f64,
    /// `int p w`.
    pub load_work: f64,
    /// `J_p = bending + cable_stretch + cable_tension - load_work`.
    pub total: f64,
    pub gamma: f64,
}

pub fn energy(w: &GridFunction, geom: &CableGeometry, p: &LoadProfile, lc_mode: LcMode) -> Result<EnergyBreakdown> {
    let load = sample_load(p, &w.mesh(), geom.length())?;
    Ok(energy_with_load(w, geom, &load, lc_mode))
}

/// [`energy`] for a load already sampled on the mesh of `w`.
pub fn energy_with_load(
    w: &GridFunction,
    geom: &CableGeometry,
    load: &LoadSamples,
    lc_mode: LcMode,
) -> EnergyBreakdown {
    let mesh = w.mesh();
    let n = mesh.n_intervals();
    let l = geom.length();
    let par = &geom.params;
    let quad = inner_y(w, w, geom).expect("same mesh");
    let dbend = |i: usize| 2.0 * w.z2()[i] * w.z3()[i];
    let bending =
        0.5 * par.flexural_rigidity / (l * l * l) * trap_corrected(&mesh, |i| w.z2()[i].powi(2), dbend(0), dbend(n));
    let cable_stretch = 0.5 * quad - bending;
    let dead_work = par.dead_load * l * trap_corrected(&mesh, |i| w.z()[i], w.z1()[0], w.z1()[n]);
    let g = gamma(w, geom, lc_mode);
    let cable_tension = 0.5 * geom.stiffness_for(lc_mode) * g * g;
    let load_work = load_pairing(load, w, l);
    EnergyBreakdown {
        bending,
        cable_stretch,
        cable_stretch_raw: cable_stretch + dead_work,
        cable_tension,
        load_work,
        total: bending + cable_stretch + cable_tension - load_work,
        gamma: g,
    }
}

/// `dJ_p(w)[v] = (w, v)_y + c Gamma(w) int (w'+y') v' / sqrt(1+(w'+y')^2) - <p, v>`.
pub fn energy_directional(
    w: &GridFunction,
    v: &GridFunction,
    geom: &CableGeometry,
    p: &LoadProfile,
    lc_mode: LcMode,
) -> Result<f64> {
    let load = sample_load(p, &w.mesh(), geom.length())?;
    energy_directional_with_load(w, v, geom, &load, lc_mode)
}

pub fn energy_directional_with_load(
    w: &GridFunction,
    v: &GridFunction,
    geom: &CableGeometry,
    load: &LoadSamples,
    lc_mode: LcMode,
) -> Result<f64> {
    let quad = inner_y(w, v, geom)?;
    let cable = geom.stiffness_for(lc_mode) * gamma(w, geom, lc_mode) * gamma_derivative(w, v, geom)?;
    Ok(quad + cable - load_pairing(load, v, geom.length()))
}

/// `gamma_w(t) = Gamma(t w - Y) = int [sqrt(1 + (t w')^2) - sqrt(1 + y'^2)] dx`.
pub fn gamma_w(w: &GridFunction, geom: &CableGeometry, t: f64) -> f64 {
    let mesh = w.mesh();
    let n = mesh.n_intervals();
    let l = geom.length();
    let yslope = geom.q_over_h * l;
    let a = |i: usize| t * w.z1()[i] / l;
    let b = |i: usize| yslope * (0.5 - mesh.node(i));
    let df = |i: usize| {
        let (a, b) = (a(i), b(i));
        a * (t * w.z2()[i] / l) / (1.0 + a * a).sqrt() + b * yslope / (1.0 + b * b).sqrt()
    };
    l * trap_corrected(&mesh, |i| arc_difference(a(i), b(i)), df(0), df(n))
}

/// Roots `T- < 0 < T+` of `gamma_w`, located by doubling from `t = +-1` and bisection.
pub fn gamma_w_roots(w: &GridFunction, geom: &CableGeometry) -> Result<(f64, f64)> {
    if w.is_zero() || gamma_w(w, geom, 0.0) >= 0.0 {
        return Err(MelanError::DegenerateDirection);
    }
    let root = |sign: f64| -> Result<f64> {
        let mut hi = 1.0;
        let mut doublings = 0;
        while gamma_w(w, geom, sign * hi) < 0.0 {
            hi *= 2.0;
            doublings += 1;
            if doublings > 1100 {
                return Err(MelanError::DegenerateDirection);
            }
        }
        let mut lo = if doublings == 0 { 0.0 } else { 0.5 * hi };
        while hi - lo > 1e-12 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if gamma_w(w, geom, sign * mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(sign * 0.5 * (lo + hi))
    };
    Ok((root(-1.0)?, root(1.0)?))
}
