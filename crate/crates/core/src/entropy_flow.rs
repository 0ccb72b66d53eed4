//! Spin ⊗ momentum composite states and the transfer of entropy between them.
//!
//! A composite state lives on `(2J+1)·M` dimensions with the row-major index
//! `α·M + i` (spin `α`, momentum `i`). Spin index `α = 0` is the highest
//! projection: for spin-1/2 `α = 0, 1` are `+, −`; for spin-1 `α = 0, 1, 2`
//! are `+, 0, −`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::densmat::{trace_power, von_neumann, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianEigen, C64};
use crate::sampling;
use crate::tol;

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeState {
    spin_dim: usize,
    momentum_dim: usize,
    rho: DensityMatrix,
}

impl CompositeState {
    pub fn new(spin_dim: usize, momentum_dim: usize, rho: DensityMatrix) -> Result<Self> {
        if spin_dim == 0 || momentum_dim == 0 {
            return Err(Error::InvalidArgument(
                "spin and momentum dimensions must be ≥ 1".into(),
            ));
        }
        if rho.dim() != spin_dim * momentum_dim {
            return Err(Error::DimensionMismatch {
                expected: spin_dim * momentum_dim,
                found: rho.dim(),
            });
        }
        Ok(CompositeState {
            spin_dim,
            momentum_dim,
            rho,
        })
    }

    /// `2J + 1`.
    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn momentum_dim(&self) -> usize {
        self.momentum_dim
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn index(&self, spin: usize, momentum: usize) -> usize {
        spin * self.momentum_dim + momentum
    }

    /// Diagonal population `ρ_{αq,αq}`, i.e. `F^α_{qq}`.
    pub fn population(&self, spin: usize, q: usize) -> f64 {
        let k = self.index(spin, q);
        self.rho.matrix()[(k, k)].re
    }
}

/// Hermitian PSD momentum-space matrix `F`; its trace is not fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumDistribution {
    matrix: CMatrix,
    spectrum: Vec<f64>,
}

impl MomentumDistribution {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let herm = matrix.hermiticity_residual();
        if herm > tol::ALGEBRAIC {
            return Err(Error::InvalidDensity(format!(
                "hermiticity residual {herm:e}"
            )));
        }
        let spectrum = matrix.eigvalsh();
        let min = spectrum.first().copied().unwrap_or(0.0);
        if min < -tol::PSD_SLACK {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(MomentumDistribution { matrix, spectrum })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(CMatrix::from_real_diagonal(entries))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr Fⁿ`.
    pub fn trace_power(&self, n: usize) -> f64 {
        trace_power(&self.spectrum, n)
    }
}

/// `ρ = (2J+1)⁻¹ δ_{αβ} δ_{ip} δ_{jp}`: unpolarized spin, definite momentum `p`.
pub fn make_initial(spin_dim: usize, momentum_dim: usize, p: usize) -> Result<CompositeState> {
    let momentum = DensityMatrix::basis_projector(momentum_dim, p)?;
    let spin = DensityMatrix::maximally_mixed(spin_dim);
    let rho = DensityMatrix::new(spin.matrix().kron(momentum.matrix()))?;
    CompositeState::new(spin_dim, momentum_dim, rho)
}

/// `ρ = δ_{αγ} δ_{βγ} F_{ij}`: definite spin projection `γ`, momentum spread `F`.
pub fn make_final(
    spin_dim: usize,
    momentum_dim: usize,
    gamma: usize,
    f: &MomentumDistribution,
) -> Result<CompositeState> {
    if (f.trace() - 1.0).abs() > tol::ALGEBRAIC {
        return Err(Error::InvalidDensity(format!(
            "Tr F = {} differs from 1",
            f.trace()
        )));
    }
    correlated_matrix(spin_dim, momentum_dim, &[(gamma, f)])
}

fn correlated_matrix(
    spin_dim: usize,
    momentum_dim: usize,
    pairs: &[(usize, &MomentumDistribution)],
) -> Result<CompositeState> {
    let mut rho = CMatrix::zeros(spin_dim * momentum_dim);
    for (k, &(gamma, f)) in pairs.iter().enumerate() {
        if gamma >= spin_dim {
            return Err(Error::IndexOutOfRange {
                index: gamma,
                dim: spin_dim,
            });
        }
        if f.dim() != momentum_dim {
            return Err(Error::DimensionMismatch {
                expected: momentum_dim,
                found: f.dim(),
            });
        }
        if pairs[..k].iter().any(|&(g, _)| g == gamma) {
            return Err(Error::InvalidArgument(format!(
                "spin projection {gamma} used twice"
            )));
        }
        let mut projector = vec![0.0; spin_dim];
        projector[gamma] = 1.0;
        rho = &rho + &CMatrix::from_real_diagonal(&projector).kron(f.matrix());
    }
    let rho = DensityMatrix::new(rho)?;
    CompositeState::new(spin_dim, momentum_dim, rho)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerComparison {
    pub n: usize,
    pub left: f64,
    pub right: f64,
    pub residual: f64,
}

/// Whether a unitary can connect two states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub powers: Vec<PowerComparison>,
    /// Largest difference between the sorted spectra.
    pub spectrum_residual: f64,
    pub trace_powers_match: bool,
    pub spectra_match: bool,
}

impl CompatibilityReport {
    pub fn passes(&self) -> bool {
        self.trace_powers_match
    }

    /// First power whose traces disagree.
    pub fn first_failure(&self) -> Option<usize> {
        self.powers
            .iter()
            .find(|p| p.residual > tol::TRACE_POWER)
            .map(|p| p.n)
    }
}

/// Compares `Tr ρⁿ` for `n = 1..=max_power` and the sorted spectra.
pub fn check_compatibility(
    rho_in: &CompositeState,
    rho_fin: &CompositeState,
    max_power: usize,
) -> Result<CompatibilityReport> {
    if rho_in.rho.dim() != rho_fin.rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_in.rho.dim(),
            found: rho_fin.rho.dim(),
        });
    }
    let a = rho_in.rho.spectrum();
    let b = rho_fin.rho.spectrum();
    let powers: Vec<PowerComparison> = (1..=max_power)
        .map(|n| {
            let (left, right) = (trace_power(&a, n), trace_power(&b, n));
            PowerComparison {
                n,
                left,
                right,
                residual: (left - right).abs(),
            }
        })
        .collect();
    let spectrum_residual = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(CompatibilityReport {
        trace_powers_match: powers.iter().all(|p| p.residual <= tol::TRACE_POWER),
        spectra_match: spectrum_residual <= tol::SPECTRUM,
        powers,
        spectrum_residual,
    })
}

/// `Σ_k Tr(F^k)ⁿ` against `(2J+1)^{1−n}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub powers: Vec<PowerComparison>,
    pub admissible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatedFinal {
    pub state: CompositeState,
    pub admissibility: AdmissibilityReport,
}

/// `ρ = Σ_k δ_{αγ_k} δ_{βγ_k} F^k_{ij}`.
///
/// Admissibility (the sum rule that makes the state unitarily reachable from
/// [`make_initial`]) is reported for `n = 1..=max(4, dim)`, not enforced.
pub fn make_correlated_final(
    spin_dim: usize,
    momentum_dim: usize,
    pairs: &[(usize, MomentumDistribution)],
) -> Result<CorrelatedFinal> {
    let total: f64 = pairs.iter().map(|(_, f)| f.trace()).sum();
    if (total - 1.0).abs() > tol::ALGEBRAIC {
        return Err(Error::InvalidDensity(format!(
            "Σ_k Tr F^k = {total} differs from 1"
        )));
    }
    let refs: Vec<(usize, &MomentumDistribution)> = pairs.iter().map(|(g, f)| (*g, f)).collect();
    let state = correlated_matrix(spin_dim, momentum_dim, &refs)?;
    let max_power = (spin_dim * momentum_dim).max(4);
    let powers: Vec<PowerComparison> = (1..=max_power)
        .map(|n| {
            let left: f64 = pairs.iter().map(|(_, f)| f.trace_power(n)).sum();
            let right = (spin_dim as f64).powi(1 - n as i32);
            PowerComparison {
                n,
                left,
                right,
                residual: (left - right).abs(),
            }
        })
        .collect();
    let admissible = powers.iter().all(|p| p.residual <= tol::TRACE_POWER);
    Ok(CorrelatedFinal {
        state,
        admissibility: AdmissibilityReport { powers, admissible },
    })
}

/// Local polarization at momentum `q`, in both normalizations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalPolarization {
    /// Combination of `F^k_{qq}` as written, not divided by the population.
    pub unnormalized: f64,
    /// Divided by the total population at `q`; a genuine polarization.
    pub conditioned: f64,
}

fn require_spin_dim(state: &CompositeState, spin_dim: usize) -> Result<()> {
    if state.spin_dim != spin_dim {
        return Err(Error::DimensionMismatch {
            expected: spin_dim,
            found: state.spin_dim,
        });
    }
    Ok(())
}

fn conditioned(state: &CompositeState, q: usize, unnormalized: f64) -> Result<LocalPolarization> {
    let population: f64 = (0..state.spin_dim).map(|a| state.population(a, q)).sum();
    if population <= tol::DENOMINATOR {
        return Err(Error::ZeroWeight(format!("no population at momentum {q}")));
    }
    Ok(LocalPolarization {
        unnormalized,
        conditioned: unnormalized / population,
    })
}

fn check_momentum(state: &CompositeState, q: usize) -> Result<()> {
    if q >= state.momentum_dim {
        return Err(Error::IndexOutOfRange {
            index: q,
            dim: state.momentum_dim,
        });
    }
    Ok(())
}

/// Spin-1/2 vector polarization `P(q) = F⁺_{qq} − F⁻_{qq}`.
pub fn local_polarization(state: &CompositeState, q: usize) -> Result<LocalPolarization> {
    require_spin_dim(state, 2)?;
    check_momentum(state, q)?;
    let value = state.population(0, q) - state.population(1, q);
    conditioned(state, q, value)
}

/// Spin-1 tensor polarization `P_T(q) = F⁺_{qq} + F⁻_{qq} − 2F⁰_{qq}`.
pub fn tensor_polarization(state: &CompositeState, q: usize) -> Result<LocalPolarization> {
    require_spin_dim(state, 3)?;
    check_momentum(state, q)?;
    let value = state.population(0, q) + state.population(2, q) - 2.0 * state.population(1, q);
    conditioned(state, q, value)
}

/// Partial trace over momentum: the spin density matrix.
pub fn reduce_micro(state: &CompositeState) -> DensityMatrix {
    let (s, m) = (state.spin_dim, state.momentum_dim);
    let rho = state.rho.matrix();
    let reduced = CMatrix::from_fn(s, |a, b| (0..m).map(|i| rho[(a * m + i, b * m + i)]).sum());
    reduced_state(reduced)
}

/// Partial trace over spin: the momentum density matrix.
pub fn reduce_macro(state: &CompositeState) -> DensityMatrix {
    let (s, m) = (state.spin_dim, state.momentum_dim);
    let rho = state.rho.matrix();
    let reduced = CMatrix::from_fn(m, |i, j| (0..s).map(|a| rho[(a * m + i, a * m + j)]).sum());
    reduced_state(reduced)
}

fn reduced_state(m: CMatrix) -> DensityMatrix {
    // A partial trace of a valid state is a valid state.
    DensityMatrix::new(m).expect("partial trace of a density matrix")
}

/// Precomputed `e^{−iHt}` for one Hamiltonian.
#[derive(Clone, Debug)]
pub struct Propagator {
    eigen: HermitianEigen,
}

impl Propagator {
    pub fn new(hamiltonian: &CMatrix) -> Result<Self> {
        let scale = hamiltonian.frobenius_norm().max(1.0);
        let herm = hamiltonian.hermiticity_residual();
        if herm > tol::ALGEBRAIC * scale {
            return Err(Error::InvalidArgument(format!(
                "Hamiltonian is not Hermitian (residual {herm:e})"
            )));
        }
        Ok(Propagator {
            eigen: hamiltonian.eigh(),
        })
    }

    pub fn dim(&self) -> usize {
        self.eigen.values.len()
    }

    /// `e^{−iHt}`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        let v = &self.eigen.vectors;
        let phases: Vec<C64> = self
            .eigen
            .values
            .iter()
            .map(|&l| C64::from_polar(1.0, -l * t))
            .collect();
        let n = self.dim();
        CMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj())
                .sum()
        })
    }

    pub fn evolve(&self, state: &CompositeState, t: f64) -> Result<CompositeState> {
        if self.dim() != state.rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.rho.dim(),
                found: self.dim(),
            });
        }
        let rotated = state.rho.matrix().conjugate_by(&self.unitary(t));
        let hermitian = CMatrix::from_fn(rotated.dim(), |i, j| {
            0.5 * (rotated[(i, j)] + rotated[(j, i)].conj())
        });
        let rho = DensityMatrix::new(hermitian)?;
        CompositeState::new(state.spin_dim, state.momentum_dim, rho)
    }
}

/// `ρ(t) = e^{−iHt} ρ e^{iHt}`, the solution of `i dρ/dt = [H, ρ]`.
pub fn unitary_evolve(
    state: &CompositeState,
    hamiltonian: &CMatrix,
    t: f64,
) -> Result<CompositeState> {
    Propagator::new(hamiltonian)?.evolve(state, t)
}

/// Entropies at one instant, in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropySample {
    pub t: f64,
    pub micro: f64,
    pub macro_: f64,
    pub total: f64,
}

pub fn entropy_sample(state: &CompositeState, t: f64) -> EntropySample {
    EntropySample {
        t,
        micro: reduce_micro(state).von_neumann_entropy(),
        macro_: reduce_macro(state).von_neumann_entropy(),
        total: von_neumann(&state.rho.spectrum()),
    }
}

/// Evaluates the entropies along the trajectory; time points run in parallel.
pub fn entropy_trajectory(
    state: &CompositeState,
    hamiltonian: &CMatrix,
    times: &[f64],
) -> Result<Vec<EntropySample>> {
    let prop = Propagator::new(hamiltonian)?;
    times
        .par_iter()
        .map(|&t| prop.evolve(state, t).map(|s| entropy_sample(&s, t)))
        .collect()
}

/// `F = U diag((2J+1)⁻¹ × (2J+1), 0, …) U†` with Haar-random `U`.
pub fn admissible_distribution<R: Rng + ?Sized>(
    rng: &mut R,
    spin_dim: usize,
    momentum_dim: usize,
) -> Result<MomentumDistribution> {
    if momentum_dim < spin_dim {
        return Err(Error::InvalidArgument(format!(
            "need at least {spin_dim} momentum states, got {momentum_dim}"
        )));
    }
    let mut diag = vec![0.0; momentum_dim];
    for d in diag.iter_mut().take(spin_dim) {
        *d = 1.0 / spin_dim as f64;
    }
    let u = sampling::unitary(rng, momentum_dim);
    let f = CMatrix::from_real_diagonal(&diag).conjugate_by(&u);
    let f = CMatrix::from_fn(momentum_dim, |i, j| 0.5 * (f[(i, j)] + f[(j, i)].conj()));
    MomentumDistribution::new(f)
}
