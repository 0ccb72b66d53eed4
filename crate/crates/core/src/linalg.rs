//! Dense square complex matrices sized for spin and small composite spaces.
//!
//! Hermitian spectra use the closed form for dimension 2 and a cyclic complex
//! Jacobi sweep otherwise. The trigonometric cubic for dimension 3 is kept as
//! an independent cross-check: it degrades to O(√ε) at doubly degenerate
//! spectra, which the spin-1 states hit routinely.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::vector::Vec3;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

const JACOBI_MAX_SWEEPS: usize = 100;

/// Row-major square complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        CMatrix { dim, data }
    }

    /// Builds a matrix from rows; panics if the rows are not square.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == dim),
            "matrix rows must be square"
        );
        CMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`, so index `(a, i)` maps to `a * other.dim + i`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        let m = other.dim;
        Self::from_fn(self.dim * m, |r, c| {
            self[(r / m, c / m)] * other[(r % m, c % m)]
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> CMatrix {
        &(u * self) * &u.adjoint()
    }

    /// Ascending eigenvalues of a Hermitian matrix.
    ///
    /// Only the Hermitian part is used; callers check hermiticity separately.
    pub fn eigvalsh(&self) -> Vec<f64> {
        match self.dim {
            0 => Vec::new(),
            1 => vec![self[(0, 0)].re],
            2 => eigvals_hermitian_2(self),
            _ => self.eigh().values,
        }
    }

    /// Full Hermitian eigendecomposition by cyclic complex Jacobi rotations.
    pub fn eigh(&self) -> HermitianEigen {
        jacobi_eigh(self)
    }

    /// Applies `f` to the spectrum: `V f(Λ) V†`.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let eig = self.eigh();
        let n = self.dim;
        let v = &eig.vectors;
        let fv: Vec<C64> = eig.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fv[k] * v[(j, k)].conj()).sum()
        })
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenpairs with ascending values; column `k` of `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

fn eigvals_hermitian_2(m: &CMatrix) -> Vec<f64> {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(m[(0, 1)].norm());
    vec![mean - radius, mean + radius]
}

/// Ascending eigenvalues of a Hermitian 3x3 from the trigonometric solution
/// of its characteristic cubic.
pub fn cubic_eigenvalues(m: &CMatrix) -> Vec<f64> {
    assert_eq!(m.dim(), 3, "cubic_eigenvalues needs a 3x3 matrix");
    let q = m.trace().re / 3.0;
    let b = m - &CMatrix::identity(3).scale_real(q);
    let off = b[(0, 1)].norm_sqr() + b[(0, 2)].norm_sqr() + b[(1, 2)].norm_sqr();
    let diag = b[(0, 0)].re.powi(2) + b[(1, 1)].re.powi(2) + b[(2, 2)].re.powi(2);
    let p = ((diag + 2.0 * off) / 6.0).sqrt();
    if p == 0.0 {
        return vec![q; 3];
    }
    let bn = b.scale_real(1.0 / p);
    let det = bn[(0, 0)] * (bn[(1, 1)] * bn[(2, 2)] - bn[(1, 2)] * bn[(2, 1)])
        - bn[(0, 1)] * (bn[(1, 0)] * bn[(2, 2)] - bn[(1, 2)] * bn[(2, 0)])
        + bn[(0, 2)] * (bn[(1, 0)] * bn[(2, 1)] - bn[(1, 1)] * bn[(2, 0)]);
    let r = (0.5 * det.re).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let middle = 3.0 * q - largest - smallest;
    let mut vals = vec![smallest, middle, largest];
    vals.sort_by(f64::total_cmp);
    vals
}

fn off_diagonal_norm_sqr(a: &CMatrix) -> f64 {
    let n = a.dim;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

fn jacobi_eigh(m: &CMatrix) -> HermitianEigen {
    let n = m.dim;
    // Symmetrize so that rounding in the input cannot break the rotation algebra.
    let mut a = CMatrix::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().powi(2);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm_sqr(&a);
        if off == 0.0 || off <= scale * 1e-32 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let pc = phase.conj();

                // A <- A J, with J_pp = c, J_pq = s, J_qp = -s e^{-iφ}, J_qq = c e^{-iφ}.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * pc * s;
                    a[(k, q)] = akp * s + akq * pc * c;
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * phase * s;
                    a[(q, k)] = apk * s + aqk * phase * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                // V <- V J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * pc * s;
                    v[(k, q)] = vkp * s + vkq * pc * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    HermitianEigen { values, vectors }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, -ONE]])
}

pub fn pauli() -> [CMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// `σ·v` for a real 3-vector.
pub fn sigma_dot(v: Vec3) -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(v.z, 0.0), C64::new(v.x, -v.y)],
        vec![C64::new(v.x, v.y), C64::new(-v.z, 0.0)],
    ])
}
