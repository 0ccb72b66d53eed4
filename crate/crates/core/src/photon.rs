//! Linear photon polarization (Stokes ξ₃) in Compton and Thomson scattering.
//!
//! The polarized cross section is `F₀ + F₃(ξ₃ + ξ₃′) + F₃₃ ξ₃ ξ₃′` with the
//! prefactor `(r_e²/4)(ω′/ω)² dΩ′` kept apart. Projecting onto the detector
//! state gives the polarization of the scattered beam before detection,
//! `(F₃ + ξ₃F₃₃)/(F₀ + ξ₃F₃)`, which reduces to relativistic velocity
//! addition in the Thomson limit `ω′ = ω`.
//!
//! Only ξ₃ is tracked, so every chain built from these functions assumes
//! coplanar scatterings (ξ₁ and ξ₂ stay zero).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact;
use crate::spin_half::add_collinear;
use crate::tol;

/// Incident frequency `x = ω/m` and scattering angle `θ ∈ (−π, π]`.
///
/// `x = 0` is the Thomson limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComptonKinematics {
    x: f64,
    theta: f64,
}

impl ComptonKinematics {
    pub fn new(x: f64, theta: f64) -> Result<Self> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ω/m must be finite and ≥ 0, got {x}"
            )));
        }
        if !(theta > -std::f64::consts::PI && theta <= std::f64::consts::PI) {
            return Err(Error::InvalidArgument(format!(
                "θ = {theta} outside (−π, π]"
            )));
        }
        Ok(ComptonKinematics { x, theta })
    }

    pub fn thomson(theta: f64) -> Result<Self> {
        Self::new(0.0, theta)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `ω′/ω = 1/(1 + x(1 − cos θ))`.
    pub fn frequency_ratio(&self) -> f64 {
        1.0 / (1.0 + self.x * (1.0 - self.theta.cos()))
    }

    /// `ω′/m`.
    pub fn x_prime(&self) -> f64 {
        self.x * self.frequency_ratio()
    }

    /// `(ω′/ω)²`, the kinematic prefactor in units of `(r_e²/4) dΩ′`.
    pub fn kinematic_weight(&self) -> f64 {
        self.frequency_ratio().powi(2)
    }

    /// `ω/ω′ + ω′/ω − 2 = (1 − r)²/r ≥ 0` with `r = ω′/ω`.
    pub fn recoil_excess(&self) -> f64 {
        let r = self.frequency_ratio();
        (1.0 - r).powi(2) / r
    }
}

/// `(F₀, F₃, F₃₃)` of the polarized cross section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StokesCoefficients {
    pub f0: f64,
    pub f3: f64,
    pub f33: f64,
}

/// `F₀ = ω/ω′ + ω′/ω − sin²θ`, `F₃ = sin²θ`, `F₃₃ = 1 + cos²θ`.
///
/// `F₀` is evaluated as `F₃₃ + (ω/ω′ + ω′/ω − 2)`, which is the same
/// quantity without the cancellation between the frequency terms and `sin²θ`.
pub fn coefficients(kin: &ComptonKinematics) -> StokesCoefficients {
    let (s, c) = kin.theta.sin_cos();
    let f33 = 1.0 + c * c;
    StokesCoefficients {
        f0: f33 + kin.recoil_excess(),
        f3: s * s,
        f33,
    }
}

/// Degree of linear polarization `ξ₃ ∈ [−1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct LinearPolarization(f64);

impl LinearPolarization {
    pub fn new(xi3: f64) -> Result<Self> {
        if !xi3.is_finite() || xi3.abs() > 1.0 + tol::ALGEBRAIC {
            return Err(Error::UnphysicalPolarization(xi3.abs()));
        }
        Ok(LinearPolarization(xi3))
    }

    pub fn unpolarized() -> Self {
        LinearPolarization(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `F₀ + F₃(ξ₃ + ξ₃′) + F₃₃ ξ₃ ξ₃′`; symmetric in the two polarizations.
pub fn cross_section_factor(
    f: &StokesCoefficients,
    xi_in: LinearPolarization,
    xi_det: LinearPolarization,
) -> f64 {
    let (a, b) = (xi_in.0, xi_det.0);
    f.f0 + f.f3 * (a + b) + f.f33 * (a * b)
}

fn emergent_denominator(f: &StokesCoefficients, xi: f64) -> Result<f64> {
    let den = f.f0 + xi * f.f3;
    if den <= tol::DENOMINATOR {
        return Err(Error::ZeroWeight(format!("F₀ + ξ₃F₃ = {den:e}")));
    }
    Ok(den)
}

/// Polarization of the scattered beam before detection, `(F₃ + ξ₃F₃₃)/(F₀ + ξ₃F₃)`.
///
/// Evaluated as `(s + qξ₃)/(1 + sξ₃)` with `s = F₃/F₀`, `q = F₃₃/F₀` and a
/// single final rounding. In the Thomson limit `q = 1` and the result is
/// bit-for-bit `add_collinear(s, ξ₃)`; with recoil `q < 1` it never exceeds it.
pub fn emergent_xi(
    f: &StokesCoefficients,
    xi_in: LinearPolarization,
) -> Result<LinearPolarization> {
    let xi = xi_in.0;
    emergent_denominator(f, xi)?;
    let s = f.f3 / f.f0;
    let q = f.f33 / f.f0;
    LinearPolarization::new(exact::affine_ratio(s, q, xi, 1.0, s, xi))
}

/// Plain floating-point evaluation of the addition law around `ξ₃ˢ⁰ = F₃/F₀`,
/// `(ξ₃ˢ⁰ + (F₃₃/F₀)ξ₃)/(1 + ξ₃ˢ⁰ξ₃)`.
pub fn addition_form(
    f: &StokesCoefficients,
    xi_in: LinearPolarization,
) -> Result<LinearPolarization> {
    let xi = xi_in.0;
    emergent_denominator(f, xi)?;
    let s0 = f.f3 / f.f0;
    LinearPolarization::new((s0 + f.f33 / f.f0 * xi) / (1.0 + s0 * xi))
}

/// Thomson-limit polarization from an unpolarized beam, `sin²θ/(1 + cos²θ)`.
pub fn thomson_xi(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    s * s / (1.0 + c * c)
}

/// Angle `θ ∈ [0, π/2]` whose single Thomson scattering produces `ξ₃`:
/// `cos²θ = (1 − ξ₃)/(1 + ξ₃)`.
pub fn effective_angle(xi: LinearPolarization) -> Result<f64> {
    let x = xi.0;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "effective angle needs ξ₃ in [0, 1], got {x}"
        )));
    }
    // tan²θ = 2ξ/(1 − ξ)
    Ok((2.0 * x).sqrt().atan2((1.0 - x).sqrt()))
}

/// Effective angle of two Thomson scatterings: `cos²θ_s = cos²θ₀ cos²θ_{s0}`.
pub fn compose_angles(theta0: f64, theta_s0: f64) -> Result<f64> {
    let range = 0.0..=std::f64::consts::FRAC_PI_2;
    for t in [theta0, theta_s0] {
        if !range.contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "angle {t} outside [0, π/2]"
            )));
        }
    }
    let (s0, c0) = theta0.sin_cos();
    let (s1, c1) = theta_s0.sin_cos();
    let (s0, c0, s1, c1) = (s0 * s0, c0 * c0, s1 * s1, c1 * c1);
    let sin2 = s0 + s1 - s0 * s1;
    Ok(sin2.sqrt().atan2((c0 * c1).sqrt()))
}

/// `ξ₃ = (1 − cos²θ)/(1 + cos²θ)` for a given `cos²θ`.
pub fn xi_from_cos2(cos2: f64) -> f64 {
    (1.0 - cos2) / (1.0 + cos2)
}

/// Two successive Thomson scatterings versus one through the summed angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SequentialComparison {
    /// `cos²θ_s = cos²θ₀ cos²θ_{s0}`.
    pub cos2_sequential: f64,
    /// `cos²θ_t` with `θ_t = θ₀ + θ_{s0}`.
    pub cos2_single: f64,
    pub xi_sequential: f64,
    pub xi_single: f64,
}

impl SequentialComparison {
    /// True when the single scattering polarizes at least as much.
    pub fn single_more_polarizing(&self) -> bool {
        self.cos2_single <= self.cos2_sequential
    }
}

/// Compares sequential and single scattering for signed angles in `(−π/2, π/2)`.
///
/// `cos²θ_t − cos²θ_s = sin θ₀ sin θ_{s0} (sin θ₀ sin θ_{s0} − 2 cos θ₀ cos θ_{s0})`.
/// Opposite signs always favour the sequential pair. Same signs favour the
/// single scattering exactly when `tan θ₀ tan θ_{s0} ≤ 2`; beyond that the
/// summed angle passes 90° far enough to lose polarization again.
pub fn sequential_vs_single(theta0: f64, theta_s0: f64) -> Result<SequentialComparison> {
    let half = std::f64::consts::FRAC_PI_2;
    for t in [theta0, theta_s0] {
        if !(t > -half && t < half) {
            return Err(Error::InvalidArgument(format!(
                "angle {t} outside (−π/2, π/2)"
            )));
        }
    }
    let cos2_sequential = (theta0.cos() * theta_s0.cos()).powi(2);
    // cos of the summed angle directly, so θ₀ = −θ_{s0} gives exactly 1.
    let cos2_single = (theta0 + theta_s0).cos().powi(2);
    Ok(SequentialComparison {
        cos2_sequential,
        cos2_single,
        xi_sequential: xi_from_cos2(cos2_sequential),
        xi_single: xi_from_cos2(cos2_single),
    })
}

/// ξ₃ after each step of a coplanar chain, starting value included.
pub fn chain(
    steps: &[ComptonKinematics],
    start: LinearPolarization,
) -> Result<Vec<LinearPolarization>> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(start);
    let mut xi = start;
    for kin in steps {
        xi = emergent_xi(&coefficients(kin), xi)?;
        out.push(xi);
    }
    Ok(out)
}

/// Velocity-rule ceiling `(F₃/F₀ ⊕ ξ₃)` for the emergent polarization.
pub fn velocity_ceiling(f: &StokesCoefficients, xi_in: LinearPolarization) -> Result<f64> {
    add_collinear(f.f3 / f.f0, xi_in.0)
}
