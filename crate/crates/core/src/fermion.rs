//! Two-coefficient fermion channels: helicity and transverse (normal) spin.
//!
//! Both share the cross-section form `F₀ + F_c(ξ + ξ′) + F_q ξ ξ′` and the
//! detector-projected map `ξ → (F_c + F_q ξ)/(F₀ + F_c ξ)`. The transverse
//! coefficient `F_c = F_z` changes sign with the scattering side.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::spin_half::AmplitudeModel;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Helicity,
    Transverse,
}

/// `(F₀, F_c, F_q)`: `F_c` multiplies `ξ + ξ′`, `F_q` multiplies `ξ ξ′`.
///
/// Fields are public so that inadmissible triples can be built and then
/// diagnosed with [`positivity_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelCoefficients {
    pub f0: f64,
    pub fcorr: f64,
    pub fquad: f64,
    pub kind: ChannelKind,
}

impl ChannelCoefficients {
    /// Builds a triple that passes [`positivity_check`].
    pub fn new(f0: f64, fcorr: f64, fquad: f64, kind: ChannelKind) -> Result<Self> {
        let c = ChannelCoefficients {
            f0,
            fcorr,
            fquad,
            kind,
        };
        let diag = positivity_check(&c);
        if !diag.passes() {
            return Err(Error::InvalidArgument(format!(
                "channel coefficients ({f0}, {fcorr}, {fquad}) violate positivity"
            )));
        }
        Ok(c)
    }

    /// `F₀ + F_c(ξ + ξ′) + F_q ξ ξ′`.
    pub fn cross_section_factor(&self, xi: f64, xi_det: f64) -> f64 {
        self.f0 + self.fcorr * (xi + xi_det) + self.fquad * (xi * xi_det)
    }

    /// Same coefficients with the sign of `F_c` flipped.
    pub fn mirrored(&self) -> Self {
        ChannelCoefficients {
            fcorr: -self.fcorr,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelDiagnostics {
    /// `F₀ ≥ |F_q|`.
    pub quad_bound: bool,
    /// Cross-section factor at `(ξ, ξ′) ∈ {(1,1), (1,−1), (−1,1), (−1,−1)}`.
    pub corners: [f64; 4],
    pub corners_nonnegative: bool,
    pub f0_positive: bool,
}

impl ChannelDiagnostics {
    pub fn passes(&self) -> bool {
        self.quad_bound && self.corners_nonnegative && self.f0_positive
    }
}

/// Positivity of the channel: `F₀ > 0`, `F₀ ≥ |F_q|` and a nonnegative
/// cross section at the four corners of `[−1, 1]²` (bilinear, so the
/// corners bound the whole square).
pub fn positivity_check(c: &ChannelCoefficients) -> ChannelDiagnostics {
    let corners = [
        c.cross_section_factor(1.0, 1.0),
        c.cross_section_factor(1.0, -1.0),
        c.cross_section_factor(-1.0, 1.0),
        c.cross_section_factor(-1.0, -1.0),
    ];
    let slack = tol::ALGEBRAIC * c.f0.abs().max(1.0);
    ChannelDiagnostics {
        quad_bound: c.f0 + slack >= c.fquad.abs(),
        corners,
        corners_nonnegative: corners.iter().all(|&v| v >= -slack),
        f0_positive: c.f0 > 0.0,
    }
}

/// `(F_c + F_q ξ)/(F₀ + F_c ξ)`.
pub fn emergent_channel_polarization(c: &ChannelCoefficients, xi: f64) -> Result<f64> {
    if !xi.is_finite() || xi.abs() > 1.0 + tol::PSD_SLACK {
        return Err(Error::UnphysicalPolarization(xi.abs()));
    }
    let den = c.f0 + c.fcorr * xi;
    if den <= tol::DENOMINATOR {
        return Err(Error::ZeroWeight(format!("F₀ + F_c ξ = {den:e}")));
    }
    Ok(exact::affine_ratio(c.fcorr, c.fquad, xi, c.f0, c.fcorr, xi))
}

/// Stable point of repeated same-side steps: the root in `[−1, 1]` of
/// `F_c s² + (F₀ − F_q) s − F_c = 0`.
///
/// `None` when the map is the identity (`F_c = 0`, `F_q = F₀`).
pub fn fixed_point(c: &ChannelCoefficients) -> Option<f64> {
    let gap = c.f0 - c.fquad;
    let disc = (gap * gap + 4.0 * c.fcorr * c.fcorr).sqrt();
    if c.fcorr == 0.0 {
        return if gap == 0.0 { None } else { Some(0.0) };
    }
    // 2F_c / (gap ± √disc) avoids cancellation; the sign follows F_c.
    Some(2.0 * c.fcorr / (gap + disc))
}

/// Whether the helicity map does not decrease `ξ ∈ [0, 1]`:
/// `F_c (1 − ξ²) ≥ (F₀ − F_q) ξ`.
pub fn helicity_nondecreasing_at(c: &ChannelCoefficients, xi: f64) -> bool {
    c.fcorr * (1.0 - xi * xi) >= (c.f0 - c.fquad) * xi
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Scattering angle magnitude in `(0, π)` and the side it goes to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SideSignedAngle {
    theta: f64,
    side: Side,
}

impl SideSignedAngle {
    pub fn new(theta: f64, side: Side) -> Result<Self> {
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            return Err(Error::InvalidArgument(format!(
                "angle magnitude {theta} outside (0, π)"
            )));
        }
        Ok(SideSignedAngle { theta, side })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// `θ` with the side as its sign.
    pub fn signed(&self) -> f64 {
        self.theta * self.side.sign()
    }
}

/// Channel coefficients as functions of the scattering angle, quoted for
/// left-side scattering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelModel {
    /// Angle-independent triple.
    Constant { f0: f64, fcorr: f64, fquad: f64 },
    /// Saturated channel `F_q = F₀`, `F_c = λ F₀`.
    Chiral { f0: f64, lambda: f64 },
    /// Normal-spin channel of `F = a + i b (σ·n)` projected on `n`:
    /// `F₀ = F_q = |a|² + |b|²`, `F_c = 2 Im(a b*)`.
    Interference { amplitude: AmplitudeModel },
}

impl ChannelModel {
    pub fn coefficients(&self, theta: f64, kind: ChannelKind) -> Result<ChannelCoefficients> {
        let c = match self {
            ChannelModel::Constant { f0, fcorr, fquad } => {
                ChannelCoefficients::new(*f0, *fcorr, *fquad, kind)?
            }
            ChannelModel::Chiral { f0, lambda } => chiral(*f0, *lambda, kind)?,
            ChannelModel::Interference { amplitude } => {
                let (a, b) = amplitude.amplitudes(theta)?;
                let total = a.norm_sqr() + b.norm_sqr();
                if !(total > 0.0) {
                    return Err(Error::InvalidArgument(
                        "|a|² + |b|² must be positive".into(),
                    ));
                }
                ChannelCoefficients::new(total, 2.0 * (a * b.conj()).im, total, kind)?
            }
        };
        Ok(c)
    }
}

/// `F_q = F₀`, `F_c = λF₀` with `|λ| ≤ 1`.
pub fn chiral(f0: f64, lambda: f64, kind: ChannelKind) -> Result<ChannelCoefficients> {
    if !(f0 > 0.0) || lambda.abs() > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "chiral channel needs F₀ > 0 and |λ| ≤ 1, got ({f0}, {lambda})"
        )));
    }
    ChannelCoefficients::new(f0, lambda * f0, f0, kind)
}

/// One transverse step. `F_z` from the model is quoted for the left side
/// and flips sign for scattering to the right.
pub fn transverse_step(s_z: f64, angle: SideSignedAngle, model: &ChannelModel) -> Result<f64> {
    let left = model.coefficients(angle.theta, ChannelKind::Transverse)?;
    let c = match angle.side {
        Side::Left => left,
        Side::Right => left.mirrored(),
    };
    emergent_channel_polarization(&c, s_z)
}
