//! Density matrices, Bloch vectors, measurement projection and entropy functionals.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{pauli, sigma_dot, CMatrix, C64};
use crate::tol;
use crate::vector::Vec3;

/// Hermitian positive semidefinite matrix of unit trace.
///
/// Outputs of non-trace-preserving maps keep the trace they had before
/// normalization in `trace_weight`; it is the relative cross section.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    trace_weight: f64,
}

impl DensityMatrix {
    /// Accepts an already normalized state.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let diag = validate(&matrix);
        diag.check()?;
        if !diag.normalized {
            return Err(Error::InvalidDensity(format!(
                "trace {} differs from 1",
                diag.trace
            )));
        }
        Ok(DensityMatrix {
            matrix,
            trace_weight: 1.0,
        })
    }

    /// Normalizes a Hermitian PSD matrix and records its trace as the weight.
    pub fn from_unnormalized(matrix: CMatrix) -> Result<Self> {
        let diag = validate(&matrix);
        diag.check()?;
        let weight = diag.trace.re;
        if weight <= tol::DENOMINATOR {
            return Err(Error::ZeroWeight(format!("trace {weight:e}")));
        }
        Ok(DensityMatrix {
            matrix: matrix.scale_real(1.0 / weight),
            trace_weight: weight,
        })
    }

    /// `d^{-1} I`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(dim).scale_real(1.0 / dim as f64),
            trace_weight: 1.0,
        }
    }

    /// Projector onto basis state `index`.
    pub fn basis_projector(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut diag = vec![0.0; dim];
        diag[index] = 1.0;
        Ok(DensityMatrix {
            matrix: CMatrix::from_real_diagonal(&diag),
            trace_weight: 1.0,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace_weight(&self) -> f64 {
        self.trace_weight
    }

    pub fn with_trace_weight(mut self, weight: f64) -> Self {
        self.trace_weight = weight;
        self
    }

    /// Eigenvalues with round-off below zero clamped away.
    pub fn spectrum(&self) -> Vec<f64> {
        self.matrix
            .eigvalsh()
            .into_iter()
            .map(|l| l.max(0.0))
            .collect()
    }

    pub fn entropy_report(&self, max_power: usize) -> EntropyReport {
        EntropyReport::from_spectrum(&self.spectrum(), max_power)
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        von_neumann(&self.spectrum())
    }
}

/// Spin-1/2 polarization vector, `|P| ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochState(Vec3);

impl BlochState {
    pub fn new(p: Vec3) -> Result<Self> {
        let mag = p.norm();
        if !mag.is_finite() || mag > 1.0 + tol::PSD_SLACK {
            return Err(Error::UnphysicalPolarization(mag));
        }
        Ok(BlochState(p))
    }

    pub fn unpolarized() -> Self {
        BlochState(Vec3::ZERO)
    }

    pub fn vector(self) -> Vec3 {
        self.0
    }

    pub fn magnitude(self) -> f64 {
        self.0.norm()
    }
}

/// `½(I + σ·P)`.
pub fn density_from_bloch(p: BlochState) -> DensityMatrix {
    let m = &CMatrix::identity(2) + &sigma_dot(p.vector());
    DensityMatrix {
        matrix: m.scale_real(0.5),
        trace_weight: 1.0,
    }
}

/// `P_k = Tr(ρ σ_k)`.
pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochState> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let [sx, sy, sz] = pauli();
    let m = rho.matrix();
    let p = Vec3::new(
        (m * &sx).trace().re,
        (m * &sy).trace().re,
        (m * &sz).trace().re,
    );
    // A valid 2x2 density matrix cannot exceed |P| = 1 beyond round-off.
    Ok(BlochState(p))
}

/// Overlap `Tr(ρ_s ρ_det)` of the scattered state with the detector state.
///
/// For spin-1/2 this is `½(1 + P_s·P_det)`: the factor ½ is kept, so
/// cross-section proportionalities must absorb it at the call site.
pub fn measure_projection(rho_s: &DensityMatrix, rho_det: &DensityMatrix) -> Result<f64> {
    if rho_s.dim() != rho_det.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_s.dim(),
            found: rho_det.dim(),
        });
    }
    Ok((rho_s.matrix() * rho_det.matrix()).trace().re)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    /// Nats.
    pub von_neumann: f64,
    /// `-ln Tr ρ²`, nats.
    pub renyi_2: f64,
    /// `Tr ρⁿ` for `n = 1..=max_power`, stored at index `n - 1`.
    pub purity_powers: Vec<f64>,
}

impl EntropyReport {
    pub fn from_spectrum(eigenvalues: &[f64], max_power: usize) -> Self {
        let purity_powers: Vec<f64> = (1..=max_power)
            .map(|n| trace_power(eigenvalues, n))
            .collect();
        EntropyReport {
            von_neumann: von_neumann(eigenvalues),
            renyi_2: -trace_power(eigenvalues, 2).ln(),
            purity_powers,
        }
    }

    /// `Tr ρⁿ`, if it was computed.
    pub fn power(&self, n: usize) -> Option<f64> {
        n.checked_sub(1)
            .and_then(|k| self.purity_powers.get(k))
            .copied()
    }
}

pub(crate) fn trace_power(eigenvalues: &[f64], n: usize) -> f64 {
    eigenvalues.iter().map(|l| l.max(0.0).powi(n as i32)).sum()
}

pub(crate) fn von_neumann(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy functionals of an arbitrary matrix after checking it is a normalized state.
pub fn entropy_report(matrix: &CMatrix, max_power: usize) -> Result<EntropyReport> {
    let rho = DensityMatrix::new(matrix.clone())?;
    Ok(rho.entropy_report(max_power))
}

/// Residuals of the density-matrix invariants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub trace: C64Serde,
    pub hermitian: bool,
    pub positive_semidefinite: bool,
    pub normalized: bool,
}

/// Serializable complex scalar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct C64Serde {
    pub re: f64,
    pub im: f64,
}

impl std::fmt::Display for C64Serde {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{:+}i", self.re, self.im)
    }
}

impl From<C64> for C64Serde {
    fn from(z: C64) -> Self {
        C64Serde { re: z.re, im: z.im }
    }
}

impl Diagnostics {
    /// Hermitian and PSD; normalization is checked separately.
    pub fn is_state(&self) -> bool {
        self.hermitian && self.positive_semidefinite
    }

    pub fn is_valid(&self) -> bool {
        self.is_state() && self.normalized
    }

    fn check(&self) -> Result<()> {
        if !self.hermitian {
            return Err(Error::InvalidDensity(format!(
                "hermiticity residual {:e}",
                self.hermiticity_residual
            )));
        }
        if !self.positive_semidefinite {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {:e}",
                self.min_eigenvalue
            )));
        }
        Ok(())
    }
}

pub fn validate(matrix: &CMatrix) -> Diagnostics {
    let herm = matrix.hermiticity_residual();
    let trace = matrix.trace();
    let min_eigenvalue = if matrix.dim() == 0 {
        0.0
    } else {
        matrix.eigvalsh()[0]
    };
    let scale = trace.re.abs().max(1.0);
    Diagnostics {
        hermiticity_residual: herm,
        min_eigenvalue,
        trace: trace.into(),
        hermitian: herm <= tol::ALGEBRAIC * scale,
        positive_semidefinite: min_eigenvalue >= -tol::PSD_SLACK * scale,
        normalized: (trace - C64::new(1.0, 0.0)).norm() <= tol::ALGEBRAIC,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bloch(x: f64, y: f64, z: f64) -> BlochState {
        BlochState::new(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn bloch_examples() {
        let mixed = density_from_bloch(bloch(0.0, 0.0, 0.0));
        assert!(
            mixed
                .matrix()
                .max_abs_diff(&CMatrix::identity(2).scale_real(0.5))
                < 1e-15
        );
        let up = density_from_bloch(bloch(0.0, 0.0, 1.0));
        assert!(
            up.matrix()
                .max_abs_diff(&CMatrix::from_real_diagonal(&[1.0, 0.0]))
                < 1e-15
        );
        let pure = density_from_bloch(bloch(0.6, 0.0, 0.8));
        let spec = pure.matrix().eigh().values;
        assert!(spec[0].abs() < 1e-12 && (spec[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unphysical_polarization() {
        assert!(matches!(
            BlochState::new(Vec3::new(0.8, 0.8, 0.0)),
            Err(Error::UnphysicalPolarization(_))
        ));
        assert!(BlochState::new(Vec3::new(0.0, 0.0, 1.0 + 1e-10)).is_ok());
    }

    #[test]
    fn inverse_map_examples() {
        let p = bloch_from_density(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(p.vector(), Vec3::ZERO);
        let up = DensityMatrix::basis_projector(2, 0).unwrap();
        assert_eq!(bloch_from_density(&up).unwrap().vector(), Vec3::Z);
        let v = Vec3::new(0.3, -0.4, 0.5);
        let back = bloch_from_density(&density_from_bloch(BlochState::new(v).unwrap())).unwrap();
        assert!(back.vector().max_abs_diff(v) < 1e-12);
        assert!(matches!(
            bloch_from_density(&DensityMatrix::maximally_mixed(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let up = DensityMatrix::basis_projector(2, 0).unwrap();
        let down = DensityMatrix::basis_projector(2, 1).unwrap();
        assert_eq!(measure_projection(&up, &up).unwrap(), 1.0);
        assert_eq!(measure_projection(&up, &down).unwrap(), 0.0);
        let half = density_from_bloch(bloch(0.0, 0.0, 0.5));
        // Direct trace: diag(0.75, 0.25)·diag(0.75, 0.25) summed.
        let oracle = 0.75 * 0.75 + 0.25 * 0.25;
        assert!((measure_projection(&half, &half).unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 0.625).abs() < 1e-15);
        assert!(measure_projection(&half, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn entropy_examples() {
        for d in [2usize, 3, 5] {
            let r = DensityMatrix::maximally_mixed(d).entropy_report(4);
            assert!((r.von_neumann - (d as f64).ln()).abs() < 1e-12);
            for n in 1..=4 {
                let expected = (d as f64).powi(1 - n as i32);
                assert!((r.power(n).unwrap() - expected).abs() < 1e-12);
            }
        }
        let pure = density_from_bloch(bloch(0.6, 0.0, 0.8)).entropy_report(5);
        assert!(pure.von_neumann.abs() < 1e-12);
        assert!(pure.purity_powers.iter().all(|p| (p - 1.0).abs() < 1e-12));

        let oracle = -0.75f64 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
        let r = entropy_report(&CMatrix::from_real_diagonal(&[0.75, 0.25]), 2).unwrap();
        assert!((r.von_neumann - oracle).abs() < 1e-14);
        assert!((r.von_neumann - 0.5623).abs() < 1e-4);
        assert!((r.renyi_2 + (0.625f64).ln()).abs() < 1e-14);
        assert_eq!(r.power(0), None);
    }

    #[test]
    fn entropy_rejects_non_psd() {
        let bad = CMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(
            entropy_report(&bad, 2),
            Err(Error::InvalidDensity(_))
        ));
    }

    #[test]
    fn validate_examples() {
        assert!(validate(DensityMatrix::maximally_mixed(2).matrix()).is_valid());
        let bad = validate(&CMatrix::from_real_diagonal(&[1.5, -0.5]));
        assert!(!bad.positive_semidefinite && bad.hermitian && bad.normalized);
        assert!((bad.min_eigenvalue + 0.5).abs() < 1e-15);
        let up = validate(density_from_bloch(bloch(0.0, 0.0, 1.0)).matrix());
        assert!(up.is_valid() && up.min_eigenvalue.abs() < 1e-15);
    }

    #[test]
    fn unnormalized_keeps_weight() {
        let m = CMatrix::from_real_diagonal(&[3.0, 1.0]);
        let rho = DensityMatrix::from_unnormalized(m).unwrap();
        assert_eq!(rho.trace_weight(), 4.0);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
        assert!(matches!(
            DensityMatrix::from_unnormalized(CMatrix::zeros(2)),
            Err(Error::ZeroWeight(_))
        ));
    }

    fn ball_vector() -> impl Strategy<Value = Vec3> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.0f64..=1.0).prop_map(|(x, y, z, r)| {
            let v = Vec3::new(x, y, z);
            match v.normalized() {
                Some(u) => u * r,
                None => Vec3::ZERO,
            }
        })
    }

    fn random_unitary(angles: &[f64]) -> CMatrix {
        // exp(-i H) for a Hermitian H built from the angle list.
        let n = 3;
        let mut h = CMatrix::zeros(n);
        let mut k = 0;
        for i in 0..n {
            h[(i, i)] = C64::new(angles[k], 0.0);
            k += 1;
            for j in (i + 1)..n {
                let z = C64::new(angles[k], angles[k + 1]);
                k += 2;
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h.hermitian_function(|l| C64::from_polar(1.0, -l))
    }

    proptest! {
        #[test]
        fn spectrum_of_bloch_density(p in ball_vector()) {
            let rho = density_from_bloch(BlochState::new(p).unwrap());
            let spec = rho.matrix().eigvalsh();
            let m = p.norm();
            prop_assert!((spec[0] - 0.5 * (1.0 - m)).abs() < 1e-12);
            prop_assert!((spec[1] - 0.5 * (1.0 + m)).abs() < 1e-12);
            prop_assert!(spec[0] >= -tol::PSD_SLACK);
        }

        #[test]
        fn bloch_round_trip(p in ball_vector()) {
            let back = bloch_from_density(&density_from_bloch(BlochState::new(p).unwrap())).unwrap();
            prop_assert!(back.vector().max_abs_diff(p) < 1e-12);
        }

        #[test]
        fn projection_symmetric_and_bounded(p in ball_vector(), q in ball_vector()) {
            let a = density_from_bloch(BlochState::new(p).unwrap());
            let b = density_from_bloch(BlochState::new(q).unwrap());
            let ab = measure_projection(&a, &b).unwrap();
            let ba = measure_projection(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-15);
            prop_assert!((ab - 0.5 * (1.0 + p.dot(q))).abs() < 1e-12);
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&ab));
        }

        #[test]
        fn entropy_unitarily_invariant(
            weights in proptest::collection::vec(0.01f64..1.0, 3),
            angles in proptest::collection::vec(-3.0f64..3.0, 9),
        ) {
            let total: f64 = weights.iter().sum();
            let diag: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let rho = CMatrix::from_real_diagonal(&diag);
            let u = random_unitary(&angles);
            let rotated = rho.conjugate_by(&u);
            let before = entropy_report(&rho, 4).unwrap();
            let after = entropy_report(&rotated, 4).unwrap();
            prop_assert!((before.von_neumann - after.von_neumann).abs() < 1e-10);
            prop_assert!(after.von_neumann <= 3f64.ln() + 1e-12);
        }
    }
}
