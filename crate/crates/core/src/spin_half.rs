//! Spin-1/2 on spin-0 scattering with amplitude `F = a + i b (σ·n)`.
//!
//! [`scatter`] computes `F ρ F†` by explicit matrix products and is the
//! brute-force reference for the closed-form composition laws here:
//! collinear addition `(P + P₀)/(1 + P P₀)`, the four-term non-collinear
//! rule, and the squared-magnitude law shared with relativistic velocity
//! composition.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::densmat::{bloch_from_density, density_from_bloch, BlochState, DensityMatrix};
use crate::error::{Error, Result};
use crate::exact;
use crate::linalg::{sigma_dot, CMatrix, C64, I};
use crate::tol;
use crate::vector::Vec3;

/// Spin-conserving amplitude `a`, spin-flip amplitude `b` and the unit
/// normal `n` of the scattering plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudePair {
    a: C64,
    b: C64,
    n: Vec3,
}

impl AmplitudePair {
    pub fn new(a: C64, b: C64, n: Vec3) -> Result<Self> {
        if (n.norm() - 1.0).abs() > tol::ALGEBRAIC {
            return Err(Error::InvalidArgument(format!(
                "scattering normal must be a unit vector, |n| = {}",
                n.norm()
            )));
        }
        let total = a.norm_sqr() + b.norm_sqr();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidArgument(
                "|a|² + |b|² must be positive and finite".into(),
            ));
        }
        Ok(AmplitudePair { a, b, n })
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn normal(&self) -> Vec3 {
        self.n
    }

    /// `|a|² + |b|²`, the unpolarized cross section.
    pub fn total(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    /// `a b*`; its imaginary part drives the emergent polarization.
    pub fn interference(&self) -> C64 {
        self.a * self.b.conj()
    }
}

/// `a I + i b (σ·n)`.
pub fn amplitude_operator(amp: &AmplitudePair) -> CMatrix {
    let flip = sigma_dot(amp.n).scale(I * amp.b);
    &CMatrix::identity(2).scale(amp.a) + &flip
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterOutcome {
    pub rho_final: DensityMatrix,
    /// Trace of `F ρ F†` before normalization.
    pub weight: f64,
    pub polarization: BlochState,
}

/// Exact density-matrix update `ρ → F ρ F† / Tr(F ρ F†)`.
pub fn scatter(rho_in: &DensityMatrix, amp: &AmplitudePair) -> Result<ScatterOutcome> {
    if rho_in.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho_in.dim(),
        });
    }
    let f = amplitude_operator(amp);
    let out = &(&f * rho_in.matrix()) * &f.adjoint();
    let weight = out.trace().re;
    if weight <= tol::DENOMINATOR * amp.total() {
        return Err(Error::ZeroWeight(format!(
            "F ρ F† has trace {weight:e}: the amplitude annihilates the incoming state"
        )));
    }
    let rho_final = DensityMatrix::from_unnormalized(out)?;
    let polarization = bloch_from_density(&rho_final)?;
    Ok(ScatterOutcome {
        rho_final,
        weight,
        polarization,
    })
}

/// Scatters a Bloch state; convenience wrapper over [`scatter`].
pub fn scatter_bloch(p: BlochState, amp: &AmplitudePair) -> Result<ScatterOutcome> {
    scatter(&density_from_bloch(p), amp)
}

/// `P₀ = n · 2 Im(a b*) / (|a|² + |b|²)`, produced from an unpolarized beam.
pub fn emergent_polarization(amp: &AmplitudePair) -> BlochState {
    let p0 = 2.0 * amp.interference().im / amp.total();
    BlochState::new(amp.n * p0).expect("|2 Im(ab*)| ≤ |a|² + |b|²")
}

fn check_unit_interval(p: f64) -> Result<()> {
    if !p.is_finite() || p.abs() > 1.0 + tol::PSD_SLACK {
        return Err(Error::UnphysicalPolarization(p.abs()));
    }
    Ok(())
}

/// Collinear composition `(P + P₀)/(1 + P P₀)`.
///
/// The fully anti-aligned pure case `P = −P₀ = ±1` has no events and is rejected.
pub fn add_collinear(p: f64, p0: f64) -> Result<f64> {
    check_unit_interval(p)?;
    check_unit_interval(p0)?;
    let den = 1.0 + p * p0;
    if den <= tol::DENOMINATOR {
        return Err(Error::ZeroWeight(format!(
            "anti-aligned pure polarizations {p} and {p0}"
        )));
    }
    Ok(exact::affine_ratio(p, 1.0, p0, 1.0, p, p0))
}

/// Closed-form polarization after one scattering of a beam with polarization `p`.
pub fn add_noncollinear(p: BlochState, amp: &AmplitudePair) -> Result<BlochState> {
    let pv = p.vector();
    let n = amp.n;
    let total = amp.total();
    let p0 = emergent_polarization(amp).vector();
    let den = 1.0 + pv.dot(p0);
    if den <= tol::DENOMINATOR {
        return Err(Error::ZeroWeight(format!("1 + P·P₀ = {den:e}")));
    }
    let along_p = (amp.a.norm_sqr() - amp.b.norm_sqr()) / total;
    let along_n = 2.0 * amp.b.norm_sqr() * pv.dot(n) / total;
    let along_cross = 2.0 * amp.interference().re / total;
    let num = p0 + pv * along_p + n * along_n + pv.cross(n) * along_cross;
    BlochState::new(num * (1.0 / den))
}

/// `((P + P₀)² − |P × P₀|²) / (1 + P·P₀)²`.
pub fn magnitude_squared(p: Vec3, p0: Vec3) -> Result<f64> {
    let den = 1.0 + p.dot(p0);
    if den <= tol::DENOMINATOR {
        return Err(Error::ZeroWeight(format!("1 + P·P₀ = {den:e}")));
    }
    Ok(((p + p0).norm_squared() - p.cross(p0).norm_squared()) / (den * den))
}

/// Relativistic velocity of a body moving with `v` in a frame that itself
/// moves with `u` (units of c).
pub fn velocity_compose(u: Vec3, v: Vec3) -> Result<Vec3> {
    for w in [u, v] {
        if !(w.norm() < 1.0) {
            return Err(Error::Superluminal(w.norm()));
        }
    }
    let u2 = u.norm_squared();
    let gamma = 1.0 / (1.0 - u2).sqrt();
    let uv = u.dot(v);
    let num = u + v * (1.0 / gamma) + u * (gamma / (1.0 + gamma) * uv);
    Ok(num * (1.0 / (1.0 + uv)))
}

/// Order dependence of two successive scatterings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderDependence {
    /// Final polarization for `amp1` then `amp2`.
    pub forward: Vec3,
    /// Final polarization for `amp2` then `amp1`.
    pub reverse: Vec3,
    /// Angle between the two final vectors (radians).
    pub angle: f64,
    /// `|forward| − |reverse|`.
    pub mag_diff: f64,
}

/// Applies the two scatterings in both orders through [`scatter`].
///
/// The raw angle is reported; it is not claimed to equal a Wigner rotation.
pub fn noncommutativity_delta(
    amp1: &AmplitudePair,
    amp2: &AmplitudePair,
    p_in: BlochState,
) -> Result<OrderDependence> {
    let rho = density_from_bloch(p_in);
    let first = scatter(&rho, amp1)?;
    let forward = scatter(&first.rho_final, amp2)?.polarization.vector();
    let first = scatter(&rho, amp2)?;
    let reverse = scatter(&first.rho_final, amp1)?.polarization.vector();
    Ok(OrderDependence {
        forward,
        reverse,
        angle: forward.angle_to(reverse),
        mag_diff: forward.norm() - reverse.norm(),
    })
}

/// `n = (k_in × k_out)/|k_in × k_out|`.
pub fn scattering_normal(k_in: Vec3, k_out: Vec3) -> Result<Vec3> {
    k_in.cross(k_out).normalized().ok_or_else(|| {
        Error::InvalidArgument("collinear momenta define no scattering plane".into())
    })
}

/// Normal for a beam along `z` scattered by polar angle `theta` at azimuth `phi`.
///
/// Equals `sign(θ)(−sin φ, cos φ, 0)`, so `θ → −θ` (scattering to the other
/// side) flips it. `θ = 0` takes the positive sign.
pub fn plane_normal(theta: f64, phi: f64) -> Vec3 {
    let side = if theta < 0.0 { -1.0 } else { 1.0 };
    Vec3::new(-phi.sin(), phi.cos(), 0.0) * side
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeTableRow {
    pub theta: f64,
    /// `[re, im]`.
    pub a: [f64; 2],
    /// `[re, im]`.
    pub b: [f64; 2],
}

/// How `(a, b)` depend on the scattering angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AmplitudeModel {
    /// Fixed complex pair.
    Constant { a: [f64; 2], b: [f64; 2] },
    /// `a = |a| e^{iδ}` with real `b`.
    SinglePhase {
        a_magnitude: f64,
        phase: f64,
        b: f64,
    },
    /// Linear interpolation in `|θ|` over rows sorted by `theta`.
    Table { rows: Vec<AmplitudeTableRow> },
}

impl AmplitudeModel {
    pub fn amplitudes(&self, theta: f64) -> Result<(C64, C64)> {
        match self {
            AmplitudeModel::Constant { a, b } => Ok((C64::new(a[0], a[1]), C64::new(b[0], b[1]))),
            AmplitudeModel::SinglePhase {
                a_magnitude,
                phase,
                b,
            } => Ok((C64::from_polar(*a_magnitude, *phase), C64::new(*b, 0.0))),
            AmplitudeModel::Table { rows } => interpolate_table(rows, theta.abs()),
        }
    }

    /// Amplitudes at `theta` with the plane normal for azimuth `phi`.
    pub fn pair(&self, theta: f64, phi: f64) -> Result<AmplitudePair> {
        let (a, b) = self.amplitudes(theta)?;
        AmplitudePair::new(a, b, plane_normal(theta, phi))
    }
}

fn interpolate_table(rows: &[AmplitudeTableRow], theta: f64) -> Result<(C64, C64)> {
    let out_of_range = || Error::InvalidArgument(format!("θ = {theta} outside amplitude table"));
    if rows.is_empty() {
        return Err(Error::InvalidArgument("empty amplitude table".into()));
    }
    if rows.windows(2).any(|w| !(w[0].theta < w[1].theta)) {
        return Err(Error::InvalidArgument(
            "amplitude table must be strictly increasing in theta".into(),
        ));
    }
    let c = |v: [f64; 2]| C64::new(v[0], v[1]);
    if rows.len() == 1 {
        return if rows[0].theta == theta {
            Ok((c(rows[0].a), c(rows[0].b)))
        } else {
            Err(out_of_range())
        };
    }
    let k = rows
        .windows(2)
        .position(|w| w[0].theta <= theta && theta <= w[1].theta)
        .ok_or_else(out_of_range)?;
    let (lo, hi) = (&rows[k], &rows[k + 1]);
    let s = (theta - lo.theta) / (hi.theta - lo.theta);
    let lerp = |x: [f64; 2], y: [f64; 2]| c(x) * (1.0 - s) + c(y) * s;
    Ok((lerp(lo.a, hi.a), lerp(lo.b, hi.b)))
}
