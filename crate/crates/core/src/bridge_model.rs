//! Physical parameters of the main span, the cable geometry at rest and the
//! dimensionless coefficients of the scaled boundary value problem.
//!
//! Units are kN and m throughout. The scaled problem lives on `s = x / L`
//! in `[0, 1]` with the displacement `z(s) = w(L s)` still measured in meters.

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, MelanError, Result};

/// Physical constants of the main span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeParams {
    /// Span between the towers (m).
    #[serde(rename = "L")]
    pub length: f64,
    /// Flexural rigidity of the deck (kN m^2).
    #[serde(rename = "EI")]
    pub flexural_rigidity: f64,
    /// Axial stiffness of the cable (kN).
    #[serde(rename = "EcA")]
    pub cable_stiffness: f64,
    /// Dead load (kN/m).
    #[serde(rename = "q")]
    pub dead_load: f64,
    /// Horizontal cable tension under the dead load (kN).
    #[serde(rename = "H")]
    pub tension: f64,
    /// Tower height offset (m). Only shifts the cable and never enters the equations.
    #[serde(rename = "ell", default)]
    pub tower_height: f64,
}

impl BridgeParams {
    /// Main span of the Wollmann three-span bridge.
    pub const fn wollmann() -> Self {
        Self {
            length: 460.0,
            flexural_rigidity: 57.0e6,
            cable_stiffness: 36.0e6,
            dead_load: 170.0,
            tension: 97_750.0,
            tower_height: 0.0,
        }
    }

    /// `L`, `EI` and `H` must be strictly positive; `EcA`, `q` and `ell` may be zero
    /// (no cable stretching, straight cable, towers at deck level).
    pub fn validate(&self) -> Result<()> {
        positive("L", self.length)?;
        positive("EI", self.flexural_rigidity)?;
        positive("H", self.tension)?;
        non_negative("EcA", self.cable_stiffness)?;
        non_negative("q", self.dead_load)?;
        non_negative("ell", self.tower_height)?;
        Ok(())
    }

    pub fn with_cable_stiffness(mut self, cable_stiffness: f64) -> Self {
        self.cable_stiffness = cable_stiffness;
        self
    }
}

/// How the cable length at rest `L_c` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LcMode {
    /// Closed-form arc length of the parabola. The elongation is measured against the
    /// discrete rest length, so the unloaded cable has zero elongation on every mesh.
    #[default]
    Exact,
    /// `L_c = r L` with a prescribed ratio, e.g. `1.026`.
    Ratio(f64),
}

impl LcMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LcMode::Exact => Ok(()),
            LcMode::Ratio(r) => positive("lc_ratio", r),
        }
    }
}

/// Quantities derived from the parabolic cable at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CableGeometry {
    pub params: BridgeParams,
    /// `q / H` (1/m); also `-y''`.
    pub q_over_h: f64,
    /// `q / (2H)` (1/m), so that `Y(x) = sag x (L - x)`.
    pub sag: f64,
    /// Closed-form cable length at rest (m).
    pub cable_length: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `EcA / L_c` with the closed-form `L_c` (kN/m).
    pub stiffness: f64,
}

/// Closed-form arc length of `y(x) = l + q/(2H) x (L - x)` over `[0, L]`.
pub fn cable_length_closed_form(length: f64, dead_load: f64, tension: f64) -> f64 {
    let t = dead_load * length / (2.0 * tension);
    let root = (1.0 + t * t).sqrt();
    // (H/q) asinh(t) = (L/2) asinh(t)/t
    let asinh_over_t = if t.abs() < 1e-6 {
        1.0 - t * t / 6.0
    } else {
        t.asinh() / t
    };
    0.5 * length * (root + asinh_over_t)
}

pub fn derive_geometry(params: &BridgeParams) -> Result<CableGeometry> {
    params.validate()?;
    let BridgeParams {
        length: l,
        dead_load: q,
        tension: h,
        ..
    } = *params;
    let cable_length = cable_length_closed_form(l, q, h);
    let ratio = q * l / h;
    let alpha2 = (1.0 + ratio * ratio / 12.0) * l / h;
    let beta2 = (1.0 + ratio * ratio / 4.0) / h;
    Ok(CableGeometry {
        params: *params,
        q_over_h: q / h,
        sag: q / (2.0 * h),
        cable_length,
        alpha: alpha2.sqrt(),
        beta: beta2.sqrt(),
        stiffness: params.cable_stiffness / cable_length,
    })
}

impl CableGeometry {
    pub fn length(&self) -> f64 {
        self.params.length
    }

    /// `y'(x) = (q/H)(L/2 - x)`.
    pub fn slope(&self, x: f64) -> f64 {
        self.q_over_h * (0.5 * self.params.length - x)
    }

    /// `y''`, constant along the span.
    pub fn curvature(&self) -> f64 {
        -self.q_over_h
    }

    /// Cable position at rest, `y(x) = ell + Y(x)`.
    pub fn cable_position(&self, x: f64) -> f64 {
        self.params.tower_height + self.shift(x)
    }

    /// `Y(x) = q/(2H) x (L - x)`; vanishes at both towers and `Y' = y'`.
    pub fn shift(&self, x: f64) -> f64 {
        self.sag * x * (self.params.length - x)
    }

    pub fn cable_length_for(&self, mode: LcMode) -> f64 {
        match mode {
            LcMode::Exact => self.cable_length,
            LcMode::Ratio(r) => r * self.params.length,
        }
    }

    /// `c = EcA / L_c` for the chosen cable-length mode.
    pub fn stiffness_for(&self, mode: LcMode) -> f64 {
        self.params.cable_stiffness / self.cable_length_for(mode)
    }

    /// `c alpha^2`; the uniqueness condition asks for a value below one.
    pub fn c_alpha2(&self, mode: LcMode) -> f64 {
        self.stiffness_for(mode) * self.alpha * self.alpha
    }

    /// Tension of the cable at rest, `H(x) = H sqrt(1 + y'(x)^2)`.
    pub fn tension_at_rest(&self, x: f64) -> Result<f64> {
        let l = self.params.length;
        if !(0.0..=l).contains(&x) {
            return Err(MelanError::OutOfRange { x, length: l });
        }
        let slope = self.slope(x);
        Ok(self.params.tension * (1.0 + slope * slope).sqrt())
    }
}

/// Coefficients of the scaled equation
///
/// ```text
/// z'''' - a2 z''/d(s) - a1 z'(0.5-s)/d(s)^2 - (ac z'' - aq) Gamma / D(s,z')^{3/2} = ap p(s)
/// d(s)    = 1 + (yslope (0.5-s))^2
/// D(s,z') = 1 + (zscale z' + yslope (0.5-s))^2
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledCoefficients {
    /// `H L^2 / EI`.
    pub a2: f64,
    /// `2 q^2 L^4 / (H EI)`.
    pub a1: f64,
    /// `c L^2 / EI`.
    pub ac: f64,
    /// `c (q/H) L^4 / EI`.
    pub aq: f64,
    /// `L^4 / EI`.
    pub ap: f64,
    /// `q L / H`; the scaled cable slope is `yslope (0.5 - s)`.
    pub yslope: f64,
    /// `1 / L`; converts `dz/ds` to `dw/dx`.
    pub zscale: f64,
    /// `L_c / L` for the chosen mode.
    pub lc_ratio: f64,
    pub lc_mode: LcMode,
    pub length: f64,
    /// `c` used in the cable terms (kN/m).
    pub stiffness: f64,
}

pub fn nondimensionalize(params: &BridgeParams, lc_mode: LcMode) -> Result<ScaledCoefficients> {
    lc_mode.validate()?;
    let geom = derive_geometry(params)?;
    Ok(scaled_from_geometry(&geom, lc_mode))
}

pub(crate) fn scaled_from_geometry(geom: &CableGeometry, lc_mode: LcMode) -> ScaledCoefficients {
    let p = &geom.params;
    let l = p.length;
    let ei = p.flexural_rigidity;
    let l2 = l * l;
    let l4 = l2 * l2;
    let c = geom.stiffness_for(lc_mode);
    ScaledCoefficients {
        a2: p.tension * l2 / ei,
        a1: 2.0 * p.dead_load * p.dead_load * l4 / (p.tension * ei),
        ac: c * l2 / ei,
        aq: c * geom.q_over_h * l4 / ei,
        ap: l4 / ei,
        yslope: geom.q_over_h * l,
        zscale: 1.0 / l,
        lc_ratio: geom.cable_length_for(lc_mode) / l,
        lc_mode,
        length: l,
        stiffness: c,
    }
}

impl ScaledCoefficients {
    /// Scaled cable slope `y'(L s)`.
    pub fn cable_slope(&self, s: f64) -> f64 {
        self.yslope * (0.5 - s)
    }
}
