use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub s: f64,
    pub z: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremumSummary {
    /// Largest nodal displacement `M` (m).
    pub max_displacement: f64,
    /// `z(first local max) - z(interior local min nearest midspan)` (m).
    pub gap: Option<f64>,
    pub extrema: Vec<Extremum>,
}

impl ExtremumSummary {
    pub fn count(&self, kind: ExtremumKind) -> usize {
        self.extrema.iter().filter(|e| e.kind == kind).count()
    }
}

/// Interior extrema from sign changes of the computed `z'`, refined by a
/// Newton step on the Taylor expansion of `z'` around the closest node.
pub fn extremum_analysis(z: &GridFunction) -> ExtremumSummary {
    let mesh = z.mesh();
    let n = mesh.n_intervals();
    let h = mesh.step();
    let (zv, z1, z2, z3) = (z.z(), z.z1(), z.z2(), z.z3());
    let max_displacement = zv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = z1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut extrema = Vec::new();
    if scale > 0.0 {
        let thr = 1e-9 * scale;
        let sign = |v: f64| {
            if v.abs() <= thr {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        };
        let mut last: Option<(usize, i32)> = None;
        for i in 0..=n {
            let sg = sign(z1[i]);
            if sg == 0 {
                continue;
            }
            if let Some((j0, s0)) = last {
                if s0 != sg {
                    let j = if i - j0 >= 2 {
                        (i + j0) / 2
                    } else if z1[j0].abs() <= z1[i].abs() {
                        j0
                    } else {
                        i
                    };
                    let j = j.clamp(1, n - 1);
                    let (mut s, mut val) = (mesh.node(j), zv[j]);
                    if z2[j] != 0.0 {
                        let mut delta = (-z1[j] / z2[j]).clamp(-h, h);
                        let slope = z2[j] + z3[j] * delta;
                        if slope != 0.0 {
                            let g = z1[j] + z2[j] * delta + 0.5 * z3[j] * delta * delta;
                            delta = (delta - g / slope).clamp(-h, h);
                        }
                        s += delta;
                        val += delta * (z1[j] + delta * (0.5 * z2[j] + delta * z3[j] / 6.0));
                    }
                    let kind = if s0 > 0 { ExtremumKind::Max } else { ExtremumKind::Min };
                    extrema.push(Extremum { s, z: val, kind });
                }
            }
            last = Some((i, sg));
        }
    }
    let first_max = extrema.iter().find(|e| e.kind == ExtremumKind::Max);
    let central_min = extrema
        .iter()
        .filter(|e| e.kind == ExtremumKind::Min)
        .min_by(|a, b| (a.s - 0.5).abs().total_cmp(&(b.s - 0.5).abs()));
    let gap = match (first_max, central_min) {
        (Some(mx), Some(mn)) => Some(mx.z - mn.z),
        _ => None,
    };
    ExtremumSummary {
        max_displacement,
        gap,
        extrema,
    }
}
