//! Uniform meshes on the scaled span, grid functions carrying the four
//! components of the first-order system, live loads, quadrature and the
//! discrete norms of the energy space.

use serde::{Deserialize, Serialize};

use crate::bridge_model::{scaled_from_geometry, CableGeometry, LcMode};
use crate::error::{MelanError, Result};

/// Uniform mesh `s_i = i / n`, `i = 0..=n`, on the scaled span `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mesh {
    n_intervals: usize,
}

impl Mesh {
    pub const MIN_INTERVALS: usize = 8;

    pub fn new(n_intervals: usize) -> Result<Self> {
        if n_intervals < Self::MIN_INTERVALS {
            return Err(MelanError::InvalidParameter {
                name: "n_intervals",
                reason: format!("need at least {} intervals, got {n_intervals}", Self::MIN_INTERVALS),
            });
        }
        Ok(Self { n_intervals })
    }

    /// Smallest mesh with at least `n_intervals` intervals (and at most twice as many)
    /// that places a node on every breakpoint in `(0, 1)`. Falls back to `n_intervals`
    /// when no such mesh exists in that range.
    pub fn aligned(n_intervals: usize, breakpoints: &[f64]) -> Result<Self> {
        let base = Self::new(n_intervals)?;
        let inner: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > 0.0 && b < 1.0).collect();
        if inner.is_empty() {
            return Ok(base);
        }
        for m in n_intervals..=2 * n_intervals {
            let hits = inner.iter().all(|&b| {
                let k = b * m as f64;
                (k - k.round()).abs() < 1e-9
            });
            if hits {
                return Ok(Self { n_intervals: m });
            }
        }
        Ok(base)
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn len(&self) -> usize {
        self.n_intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n_intervals as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n_intervals as f64
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n_intervals as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_intervals).map(|i| self.node(i)).collect()
    }

    /// Index of the node at `s`, if `s` is (within rounding) a node.
    pub fn node_index(&self, s: f64) -> Option<usize> {
        let k = s * self.n_intervals as f64;
        let r = k.round();
        ((k - r).abs() < 1e-9 && r >= 0.0 && r <= self.n_intervals as f64).then_some(r as usize)
    }
}

/// Composite trapezoid rule over `[0, 1]` for node samples.
pub fn trapezoid(values: &[f64], mesh: &Mesh) -> Result<f64> {
    if values.len() != mesh.len() {
        return Err(MelanError::LengthMismatch {
            expected: mesh.len(),
            got: values.len(),
        });
    }
    Ok(trap(values, mesh.step()))
}

pub(crate) fn trap(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

pub(crate) fn trap_by<F: Fn(usize) -> f64>(mesh: &Mesh, f: F) -> f64 {
    let n = mesh.n_intervals();
    let inner: f64 = (1..n).map(&f).sum();
    mesh.step() * (inner + 0.5 * (f(0) + f(n)))
}

/// [`trap_by`] plus the Euler-Maclaurin end correction `h^2/12 (f'(0) - f'(1))`;
/// fourth order for integrands with a continuous first derivative.
pub(crate) fn trap_corrected<F: Fn(usize) -> f64>(mesh: &Mesh, f: F, df_start: f64, df_end: f64) -> f64 {
    let h = mesh.step();
    trap_by(mesh, f) + h * h / 12.0 * (df_start - df_end)
}

/// Discrete function on a mesh with its first three derivatives in `s`.
///
/// `z` is in meters; `z1 = dz/ds`, `z2 = d2z/ds2`, `z3 = d3z/ds3`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: Mesh,
    z: Vec<f64>,
    z1: Vec<f64>,
    z2: Vec<f64>,
    z3: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: Mesh, z: Vec<f64>, z1: Vec<f64>, z2: Vec<f64>, z3: Vec<f64>) -> Result<Self> {
        for v in [&z, &z1, &z2, &z3] {
            if v.len() != mesh.len() {
                return Err(MelanError::LengthMismatch {
                    expected: mesh.len(),
                    got: v.len(),
                });
            }
        }
        Ok(Self { mesh, z, z1, z2, z3 })
    }

    pub fn zeros(mesh: Mesh) -> Self {
        let n = mesh.len();
        Self {
            mesh,
            z: vec![0.0; n],
            z1: vec![0.0; n],
            z2: vec![0.0; n],
            z3: vec![0.0; n],
        }
    }

    /// Samples an analytic function given as `s -> [z, z', z'', z''']`.
    pub fn from_fn<F: Fn(f64) -> [f64; 4]>(mesh: Mesh, f: F) -> Self {
        let mut g = Self::zeros(mesh);
        for i in 0..mesh.len() {
            let [a, b, c, d] = f(mesh.node(i));
            g.z[i] = a;
            g.z1[i] = b;
            g.z2[i] = c;
            g.z3[i] = d;
        }
        g
    }

    /// Builds a grid function from the interleaved state vector `[z, z1, z2, z3]_i`.
    pub(crate) fn from_state(mesh: Mesh, state: &[f64]) -> Self {
        let mut g = Self::zeros(mesh);
        for i in 0..mesh.len() {
            g.z[i] = state[4 * i];
            g.z1[i] = state[4 * i + 1];
            g.z2[i] = state[4 * i + 2];
            g.z3[i] = state[4 * i + 3];
        }
        g
    }

    pub(crate) fn to_state(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.mesh.len());
        for i in 0..self.mesh.len() {
            out.extend_from_slice(&[self.z[i], self.z1[i], self.z2[i], self.z3[i]]);
        }
        out
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }
    pub fn z(&self) -> &[f64] {
        &self.z
    }
    pub fn z1(&self) -> &[f64] {
        &self.z1
    }
    pub fn z2(&self) -> &[f64] {
        &self.z2
    }
    pub fn z3(&self) -> &[f64] {
        &self.z3
    }

    #[cfg(test)]
    pub(crate) fn z2_mut(&mut self) -> &mut [f64] {
        &mut self.z2
    }

    /// `self + t * other`, componentwise.
    pub fn axpy(&self, t: f64, other: &GridFunction) -> Result<GridFunction> {
        self.same_mesh(other)?;
        let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + t * y).collect();
        Ok(GridFunction {
            mesh: self.mesh,
            z: comb(&self.z, &other.z),
            z1: comb(&self.z1, &other.z1),
            z2: comb(&self.z2, &other.z2),
            z3: comb(&self.z3, &other.z3),
        })
    }

    pub fn scaled(&self, k: f64) -> GridFunction {
        let sc = |a: &[f64]| a.iter().map(|x| k * x).collect();
        GridFunction {
            mesh: self.mesh,
            z: sc(&self.z),
            z1: sc(&self.z1),
            z2: sc(&self.z2),
            z3: sc(&self.z3),
        }
    }

    pub fn same_mesh(&self, other: &GridFunction) -> Result<()> {
        if self.mesh != other.mesh {
            return Err(MelanError::MeshMismatch {
                left: self.mesh.n_intervals(),
                right: other.mesh.n_intervals(),
            });
        }
        Ok(())
    }

    /// Largest violation of the hinged conditions `z = z'' = 0` at both ends.
    pub fn boundary_defect(&self) -> f64 {
        let n = self.mesh.n_intervals();
        [self.z[0], self.z[n], self.z2[0], self.z2[n]]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_z(&self) -> f64 {
        self.z.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.z1.iter().all(|&v| v == 0.0)
    }
}

/// `(u, v)_y = a int u''v'' dx + b int u'v'/(1+y'^2) dx` in physical units.
///
/// Both integrals use the end-corrected trapezoid rule with the stored derivatives.
pub fn inner_y(u: &GridFunction, v: &GridFunction, geom: &CableGeometry) -> Result<f64> {
    u.same_mesh(v)?;
    let mesh = u.mesh();
    let n = mesh.n_intervals();
    let l = geom.length();
    let p = &geom.params;
    let yslope = geom.q_over_h * l;
    let dbend = |i: usize| u.z3[i] * v.z2[i] + u.z2[i] * v.z3[i];
    let bend = trap_corrected(&mesh, |i| u.z2[i] * v.z2[i], dbend(0), dbend(n));
    let weight = |i: usize| {
        let ys = yslope * (0.5 - mesh.node(i));
        1.0 + ys * ys
    };
    let dstretch = |i: usize| {
        let ys = yslope * (0.5 - mesh.node(i));
        let d = weight(i);
        (u.z2[i] * v.z1[i] + u.z1[i] * v.z2[i]) / d + 2.0 * yslope * ys * u.z1[i] * v.z1[i] / (d * d)
    };
    let stretch = trap_corrected(&mesh, |i| u.z1[i] * v.z1[i] / weight(i), dstretch(0), dstretch(n));
    Ok(p.flexural_rigidity / (l * l * l) * bend + p.tension / l * stretch)
}

/// Energy norm `||u||_y`.
pub fn norm_y(u: &GridFunction, geom: &CableGeometry) -> f64 {
    inner_y(u, u, geom).expect("same mesh").max(0.0).sqrt()
}

/// `||u'||_1 = int |w'| dx`; independent of the span because `w' dx = z' ds`.
pub fn l1_deriv(u: &GridFunction) -> f64 {
    trap(&u.z1.iter().map(|v| v.abs()).collect::<Vec<_>>(), u.mesh.step())
}

/// `||u'||_2 = (int (w')^2 dx)^{1/2}`.
pub fn l2_deriv(u: &GridFunction, length: f64) -> f64 {
    let sq: Vec<f64> = u.z1.iter().map(|v| v * v).collect();
    (trap(&sq, u.mesh.step()) / length).sqrt()
}

/// One segment of a piecewise-constant live load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSegment {
    pub x_lo: f64,
    pub x_hi: f64,
    pub p: f64,
}

/// Live load `p(x)` in kN/m over the physical span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadProfile {
    Uniform {
        p0: f64,
    },
    /// Zero outside the listed segments.
    Piecewise {
        segments: Vec<LoadSegment>,
    },
    /// Linear interpolation between samples, held constant beyond the first and last.
    Samples {
        x: Vec<f64>,
        p: Vec<f64>,
    },
}

impl LoadProfile {
    pub fn zero() -> Self {
        LoadProfile::Uniform { p0: 0.0 }
    }

    pub fn uniform(p0: f64) -> Self {
        LoadProfile::Uniform { p0 }
    }

    pub fn on_interval(x_lo: f64, x_hi: f64, p: f64) -> Self {
        LoadProfile::Piecewise {
            segments: vec![LoadSegment { x_lo, x_hi, p }],
        }
    }

    pub fn validate(&self, length: f64) -> Result<()> {
        let bad = |msg: String| Err(MelanError::InvalidLoad(msg));
        match self {
            LoadProfile::Uniform { p0 } => {
                if !p0.is_finite() {
                    return bad(format!("uniform load {p0} is not finite"));
                }
            }
            LoadProfile::Piecewise { segments } => {
                let mut sorted = segments.clone();
                sorted.sort_by(|a, b| a.x_lo.total_cmp(&b.x_lo));
                for s in &sorted {
                    if !(s.x_lo.is_finite() && s.x_hi.is_finite() && s.p.is_finite()) {
                        return bad(format!("segment {s:?} has non-finite entries"));
                    }
                    if s.x_lo < 0.0 || s.x_hi > length || s.x_lo >= s.x_hi {
                        return bad(format!(
                            "segment [{}, {}] outside [0, {length}] or empty",
                            s.x_lo, s.x_hi
                        ));
                    }
                }
                for w in sorted.windows(2) {
                    if w[0].x_hi > w[1].x_lo {
                        return bad(format!(
                            "segments [{}, {}] and [{}, {}] overlap",
                            w[0].x_lo, w[0].x_hi, w[1].x_lo, w[1].x_hi
                        ));
                    }
                }
            }
            LoadProfile::Samples { x, p } => {
                if x.is_empty() || x.len() != p.len() {
                    return bad(format!(
                        "need matching non-empty x/p lists, got {} and {}",
                        x.len(),
                        p.len()
                    ));
                }
                if x.iter().chain(p).any(|v| !v.is_finite()) {
                    return bad("samples contain non-finite values".into());
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("sample positions must be strictly increasing".into());
                }
                if x[0] < 0.0 || x[x.len() - 1] > length {
                    return bad(format!("sample positions outside [0, {length}]"));
                }
            }
        }
        Ok(())
    }

    /// Discontinuities of the load, in scaled coordinates.
    pub fn breakpoints(&self, length: f64) -> Vec<f64> {
        match self {
            LoadProfile::Piecewise { segments } => {
                let mut b: Vec<f64> = segments
                    .iter()
                    .flat_map(|s| [s.x_lo / length, s.x_hi / length])
                    .filter(|&s| s > 0.0 && s < 1.0)
                    .collect();
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            }
            _ => Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LoadProfile::Uniform { p0 } => *p0 == 0.0,
            LoadProfile::Piecewise { segments } => segments.iter().all(|s| s.p == 0.0),
            LoadProfile::Samples { p, .. } => p.iter().all(|&v| v == 0.0),
        }
    }

    pub fn scaled(&self, k: f64) -> LoadProfile {
        match self {
            LoadProfile::Uniform { p0 } => LoadProfile::Uniform { p0: k * p0 },
            LoadProfile::Piecewise { segments } => LoadProfile::Piecewise {
                segments: segments.iter().map(|s| LoadSegment { p: k * s.p, ..*s }).collect(),
            },
            LoadProfile::Samples { x, p } => LoadProfile::Samples {
                x: x.clone(),
                p: p.iter().map(|v| k * v).collect(),
            },
        }
    }

    /// Limit from the right at `x` (from the left when `from_left`).
    fn one_sided(&self, x: f64, from_left: bool) -> f64 {
        match self {
            LoadProfile::Uniform { p0 } => *p0,
            LoadProfile::Piecewise { segments } => segments
                .iter()
                .filter(|s| {
                    if from_left {
                        s.x_lo < x && x <= s.x_hi
                    } else {
                        s.x_lo <= x && x < s.x_hi
                    }
                })
                .map(|s| s.p)
                .sum(),
            LoadProfile::Samples { x: xs, p } => interpolate(xs, p, x),
        }
    }

    /// Value at `x`; on a jump the average of both sides, at the towers the inner side.
    pub fn value_at(&self, x: f64, length: f64) -> f64 {
        if x <= 0.0 {
            self.one_sided(x.max(0.0), false)
        } else if x >= length {
            self.one_sided(length, true)
        } else {
            0.5 * (self.one_sided(x, true) + self.one_sided(x, false))
        }
    }
}

fn interpolate(xs: &[f64], ps: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ps[0];
    }
    if x >= xs[n - 1] {
        return ps[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ps[k] + t * (ps[k + 1] - ps[k])
}

/// Load sampled for the collocation scheme.
///
/// `nodes` carries the jump-averaged nodal values; `start`, `mid` and `end` carry,
/// for every interval, the one-sided values seen from inside that interval.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSamples {
    pub nodes: Vec<f64>,
    pub start: Vec<f64>,
    pub mid: Vec<f64>,
    pub end: Vec<f64>,
}

impl LoadSamples {
    pub fn zeros(mesh: &Mesh) -> Self {
        let n = mesh.n_intervals();
        Self {
            nodes: vec![0.0; n + 1],
            start: vec![0.0; n],
            mid: vec![0.0; n],
            end: vec![0.0; n],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.nodes.iter().chain(&self.mid).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, k: f64) -> Self {
        let sc = |v: &[f64]| v.iter().map(|x| k * x).collect();
        Self {
            nodes: sc(&self.nodes),
            start: sc(&self.start),
            mid: sc(&self.mid),
            end: sc(&self.end),
        }
    }
}

/// Samples the live load at the nodes `x_i = L s_i` and at the interval midpoints.
pub fn sample_load(p: &LoadProfile, mesh: &Mesh, length: f64) -> Result<LoadSamples> {
    p.validate(length)?;
    let n = mesh.n_intervals();
    let x = |s: f64| s * length;
    let nodes = (0..=n).map(|i| p.value_at(x(mesh.node(i)), length)).collect();
    let start = (0..n).map(|i| p.one_sided(x(mesh.node(i)), false)).collect();
    let mid = (0..n).map(|i| p.value_at(x(mesh.midpoint(i)), length)).collect();
    let end = (0..n).map(|i| p.one_sided(x(mesh.node(i + 1)), true)).collect();
    Ok(LoadSamples { nodes, start, mid, end })
}

/// `<p, v> = int p v dx`, trapezoid with the end correction applied on every
/// interval from the one-sided load values, so load jumps at nodes stay fourth order.
pub fn load_pairing(load: &LoadSamples, v: &GridFunction, length: f64) -> f64 {
    let mesh = v.mesh();
    let h = mesh.step();
    let base = trap_by(&mesh, |i| load.nodes[i] * v.z[i]);
    let correction: f64 = (0..mesh.n_intervals())
        .map(|i| {
            let dp = (load.end[i] - load.start[i]) / h;
            let left = dp * v.z[i] + load.start[i] * v.z1[i];
            let right = dp * v.z[i + 1] + load.end[i] * v.z1[i + 1];
            left - right
        })
        .sum();
    length * (base + h * h / 12.0 * correction)
}

/// Riesz representative `P` of the load: `(P, v)_y = <p, v>` for all admissible `v`.
///
/// Solved as the hinged linear problem `a P'''' - b (P'/(1+y'^2))' = p` with the
/// collocation scheme used for the nonlinear problem.
pub fn riesz_representative(p: &LoadProfile, geom: &CableGeometry, mesh: &Mesh) -> Result<GridFunction> {
    let load = sample_load(p, mesh, geom.length())?;
    let coeffs = scaled_from_geometry(geom, LcMode::Exact);
    crate::solver::solve_operator(&coeffs, *mesh, &load)
}

/// `||p||_H = ||P||_y` for the Riesz representative `P`.
pub fn dual_norm(p: &LoadProfile, geom: &CableGeometry, mesh: &Mesh) -> Result<f64> {
    if p.is_zero() {
        p.validate(geom.length())?;
        return Ok(0.0);
    }
    Ok(norm_y(&riesz_representative(p, geom, mesh)?, geom))
}
