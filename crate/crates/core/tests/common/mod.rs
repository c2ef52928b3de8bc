#![allow(dead_code)]

use std::f64::consts::PI;

use melan::functionals::{energy_directional, gamma_derivative};
use melan::grid::{l1_deriv, l2_deriv, load_pairing, sample_load};
use melan::*;
use rand::Rng;

pub const TABLE1_MODE: LcMode = LcMode::Ratio(1.026);

pub fn wollmann_geom() -> CableGeometry {
    derive_geometry(&BridgeParams::wollmann()).unwrap()
}

/// Wollmann span with the cable stiffness scaled down by `1e-4`.
pub fn toy_params() -> BridgeParams {
    let p = BridgeParams::wollmann();
    p.with_cable_stiffness(p.cable_stiffness * 1e-4)
}

pub fn half_span() -> LoadProfile {
    LoadProfile::on_interval(0.0, 230.0, 30.0)
}

pub struct Table1Row {
    pub label: &'static str,
    pub load: LoadProfile,
    pub gamma_fix: f64,
    pub max_displacement: f64,
    pub gap: f64,
    pub gap_tol: f64,
}

pub fn table1_rows() -> Vec<Table1Row> {
    let row = |label, load, gamma_fix, max_displacement, gap, gap_tol| Table1Row {
        label,
        load,
        gamma_fix,
        max_displacement,
        gap,
        gap_tol,
    };
    vec![
        row("p=10", LoadProfile::uniform(10.0), 0.039977, 0.06887, 0.02, 0.005),
        row("p=30", LoadProfile::uniform(30.0), 0.11966, 0.2014, 0.05, 0.005),
        row("p=60", LoadProfile::uniform(60.0), 0.23843, 0.3924, 0.08, 0.005),
        row("half-span p=30", half_span(), 0.060441, 0.9843, 1.81, 0.05),
    ]
}

/// `sum_k c_k sin(k pi s)` with its analytic derivatives.
pub fn sine_series(mesh: Mesh, coeffs: &[f64]) -> GridFunction {
    GridFunction::from_fn(mesh, |s| {
        let mut u = [0.0; 4];
        for (k, a) in coeffs.iter().enumerate() {
            let w = (k + 1) as f64 * PI;
            let (sn, cs) = (w * s).sin_cos();
            u[0] += a * sn;
            u[1] += a * w * cs;
            u[2] -= a * w * w * sn;
            u[3] -= a * w * w * w * cs;
        }
        u
    })
}

pub fn random_coeffs<R: Rng>(rng: &mut R) -> Vec<f64> {
    let modes = rng.random_range(1..=8);
    let amp = rng.random_range(0.01..2.0);
    (1..=modes)
        .map(|k| amp * rng.random_range(-1.0..1.0) / (k * k) as f64)
        .collect()
}

/// Random smooth displacement in meters with hinged ends.
pub fn random_smooth<R: Rng>(rng: &mut R, mesh: Mesh) -> GridFunction {
    sine_series(mesh, &random_coeffs(rng))
}

pub type Check = std::result::Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `||u'||_1 <= alpha ||u||_y + eps_h` and `||u'||_2 <= beta ||u||_y + eps_h`.
pub fn check_ests(u: &GridFunction, geom: &CableGeometry) -> Check {
    let n = u.mesh().n_intervals() as f64;
    let ny = norm_y(u, geom);
    let eps = 1e-3 * ny * 2000.0 / n;
    let l1 = l1_deriv(u);
    let l2 = l2_deriv(u, geom.length());
    ensure(l1 <= geom.alpha * ny + eps, || {
        format!("L1: {l1} > {} * {ny}", geom.alpha)
    })?;
    ensure(l2 <= geom.beta * ny + eps, || {
        format!("L2: {l2} > {} * {ny}", geom.beta)
    })
}

/// `|Gamma(u)| <= ||u'||_1` and `|Gamma(u) - Gamma(v)| <= ||u' - v'||_1`.
pub fn check_gamma_bounds(u: &GridFunction, v: &GridFunction, geom: &CableGeometry) -> Check {
    let gu = gamma(u, geom, LcMode::Exact);
    let gv = gamma(v, geom, LcMode::Exact);
    let l1u = l1_deriv(u);
    ensure(gu.abs() <= l1u + 1e-8, || format!("|Gamma(u)| = {} > {l1u}", gu.abs()))?;
    let d = l1_deriv(&u.axpy(-1.0, v).unwrap());
    ensure((gu - gv).abs() <= d + 1e-8, || {
        format!("Lipschitz: {} > {d}", (gu - gv).abs())
    })
}

fn grid_pairs(count: usize, range: f64) -> impl Iterator<Item = (f64, f64)> {
    let at = move |k: usize| -range + 2.0 * range * k as f64 / (count - 1) as f64;
    (0..count).flat_map(move |i| (0..count).map(move |j| (at(i), at(j))))
}

/// `|sqrt(1+(l+m)^2) - sqrt(1+m^2)| <= |l|` on a 100 x 100 grid.
pub fn check_arc_inequality() -> Check {
    for (l, m) in grid_pairs(100, 10.0) {
        let lhs = ((1.0 + (l + m).powi(2)).sqrt() - (1.0 + m * m).sqrt()).abs();
        ensure(lhs <= l.abs() * (1.0 + 1e-14) + 1e-15, || {
            format!("lambda={l} mu={m}: {lhs}")
        })?;
    }
    Ok(())
}

/// `|s1/sqrt(1+s1^2) - s2/sqrt(1+s2^2)| <= |s1 - s2|` on a 100 x 100 grid.
pub fn check_slope_lipschitz() -> Check {
    let g = |s: f64| s / (1.0 + s * s).sqrt();
    for (a, b) in grid_pairs(100, 10.0) {
        let lhs = (g(a) - g(b)).abs();
        ensure(lhs <= (a - b).abs() * (1.0 + 1e-14) + 1e-15, || {
            format!("s1={a} s2={b}: {lhs}")
        })?;
    }
    Ok(())
}

/// Central difference of the energy against the analytic directional derivative.
pub fn check_directional_fd(
    w: &GridFunction,
    v: &GridFunction,
    geom: &CableGeometry,
    p: &LoadProfile,
    mode: LcMode,
) -> Check {
    let t = 1e-4 / v.max_abs_z();
    let plus = energy(&w.axpy(t, v).unwrap(), geom, p, mode).unwrap().total;
    let minus = energy(&w.axpy(-t, v).unwrap(), geom, p, mode).unwrap().total;
    let fd = (plus - minus) / (2.0 * t);
    let an = energy_directional(w, v, geom, p, mode).unwrap();
    let c = geom.stiffness_for(mode);
    let load = sample_load(p, &w.mesh(), geom.length()).unwrap();
    let scale = inner_y(w, v, geom).unwrap().abs()
        + c * (gamma(w, geom, mode) * gamma_derivative(w, v, geom).unwrap()).abs()
        + load_pairing(&load, v, geom.length()).abs();
    let base = energy(w, geom, p, mode).unwrap().total;
    let curvature = (plus + minus - 2.0 * base).abs() / t;
    let roundoff = 10.0 * f64::EPSILON * (plus.abs() + minus.abs()) / t;
    ensure((an - fd).abs() <= 1e-6 * (scale + curvature) + roundoff, || {
        format!("dJ {an} vs fd {fd} (scale {scale})")
    })
}

/// Parity of `gamma_w` and `T(c w) = T(w) / c`.
pub fn check_gamma_w_laws(w: &GridFunction, geom: &CableGeometry, c: f64) -> Check {
    for t in [0.3, 1.0, 7.5, 120.0] {
        let (a, b) = (gamma_w(w, geom, t), gamma_w(w, geom, -t));
        ensure((a - b).abs() <= 1e-12 * (1.0 + a.abs()), || {
            format!("parity at t={t}: {a} vs {b}")
        })?;
    }
    let (lo, hi) = gamma_w_roots(w, geom).map_err(|e| e.to_string())?;
    ensure(lo < 0.0 && hi > 0.0, || format!("roots ({lo}, {hi}) do not straddle 0"))?;
    let l = geom.length();
    for r in [lo, hi] {
        let g = gamma_w(w, geom, r);
        ensure(g.abs() <= 1e-10 * l, || format!("gamma_w({r}) = {g}"))?;
    }
    let (slo, shi) = gamma_w_roots(&w.scaled(c), geom).map_err(|e| e.to_string())?;
    ensure((slo * c - lo).abs() <= 1e-9 * lo.abs(), || {
        format!("T- scaling: {slo} * {c} vs {lo}")
    })?;
    ensure((shi * c - hi).abs() <= 1e-9 * hi.abs(), || {
        format!("T+ scaling: {shi} * {c} vs {hi}")
    })
}

/// The cable shift `Y` has roots exactly at `-1` and `+1`.
pub fn check_shift_roots(mesh: Mesh, geom: &CableGeometry) -> Check {
    let l = geom.length();
    let y = GridFunction::from_fn(mesh, |s| {
        let x = s * l;
        [geom.shift(x), geom.slope(x) * l, geom.curvature() * l * l, 0.0]
    });
    let (lo, hi) = gamma_w_roots(&y, geom).map_err(|e| e.to_string())?;
    ensure((lo + 1.0).abs() <= 1e-10 && (hi - 1.0).abs() <= 1e-10, || {
        format!("T(Y) = ({lo}, {hi})")
    })
}

/// `J_p(w*) <= J_p(w* + v)` for `count` random `v` with `||v||_y = size`.
pub fn local_minimality_probe<R: Rng>(
    rng: &mut R,
    w: &GridFunction,
    params: &BridgeParams,
    p: &LoadProfile,
    mode: LcMode,
    count: usize,
    size: f64,
) -> Check {
    let geom = derive_geometry(params).unwrap();
    let base = energy(w, &geom, p, mode).unwrap().total;
    for k in 0..count {
        let v = random_smooth(rng, w.mesh());
        let v = v.scaled(size / norm_y(&v, &geom));
        let e = energy(&w.axpy(1.0, &v).unwrap(), &geom, p, mode).unwrap().total;
        ensure(e >= base, || format!("perturbation {k}: J = {e} < {base}"))?;
    }
    Ok(())
}

/// `|dJ_p(w*)[v]| <= 10 bvp_tol ||v||_y` for `count` random `v`.
pub fn weak_form_probe<R: Rng>(
    rng: &mut R,
    w: &GridFunction,
    params: &BridgeParams,
    p: &LoadProfile,
    mode: LcMode,
    bvp_tol: f64,
    count: usize,
) -> Check {
    let geom = derive_geometry(params).unwrap();
    for k in 0..count {
        let v = random_smooth(rng, w.mesh());
        let d = energy_directional(w, &v, &geom, p, mode).unwrap();
        let bound = 10.0 * bvp_tol * norm_y(&v, &geom);
        ensure(d.abs() <= bound, || {
            format!("direction {k}: |dJ| = {} > {bound}", d.abs())
        })?;
    }
    Ok(())
}

/// Max-norm errors of the inner solution at each `n` against the `reference` mesh,
/// and the observed orders between consecutive meshes.
pub fn self_convergence(
    params: &BridgeParams,
    variant: ModelVariant,
    p: &LoadProfile,
    gamma_frozen: f64,
    meshes: &[usize],
    reference: usize,
    mode: LcMode,
) -> (Vec<f64>, Vec<f64>) {
    let coeffs = nondimensionalize(params, mode).unwrap();
    let opts = SolverOptions::default();
    let solve = |n: usize| {
        let mesh = Mesh::new(n).unwrap();
        let load = sample_load(p, &mesh, params.length).unwrap();
        solve_inner(&coeffs, variant, mesh, &load, gamma_frozen, &opts)
            .unwrap()
            .solution
    };
    let fine = solve(reference);
    let errors: Vec<f64> = meshes
        .iter()
        .map(|&n| {
            assert_eq!(reference % n, 0);
            let stride = reference / n;
            let z = solve(n);
            (0..=n)
                .map(|i| (z.z()[i] - fine.z()[i * stride]).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let orders = errors
        .windows(2)
        .zip(meshes.windows(2))
        .map(|(e, m)| (e[0] / e[1]).ln() / (m[1] as f64 / m[0] as f64).ln())
        .collect();
    (errors, orders)
}
