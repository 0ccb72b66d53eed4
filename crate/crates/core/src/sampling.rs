//! Random draws of states, amplitudes and operators for property checks and chains.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{CMatrix, C64};
use crate::spin_half::AmplitudePair;
use crate::vector::Vec3;

/// Uniform direction on the unit sphere.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// Uniform point in the closed unit ball.
pub fn ball_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let r: f64 = rng.random::<f64>().cbrt();
    unit_vector(rng) * r
}

/// Uniform point in the open ball of the given radius.
pub fn ball_vector_within<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Vec3 {
    ball_vector(rng) * radius
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Complex Gaussian `a`, `b` and a uniform normal.
pub fn amplitude_pair<R: Rng + ?Sized>(rng: &mut R) -> AmplitudePair {
    loop {
        let a = complex_normal(rng);
        let b = complex_normal(rng);
        if let Ok(amp) = AmplitudePair::new(a, b, unit_vector(rng)) {
            return amp;
        }
    }
}

/// Hermitian matrix with complex Gaussian entries (GUE up to scale).
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let mut h = CMatrix::zeros(dim);
    for i in 0..dim {
        h[(i, i)] = C64::new(StandardNormal.sample(rng), 0.0);
        for j in (i + 1)..dim {
            let z = complex_normal(rng) * std::f64::consts::FRAC_1_SQRT_2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Haar-distributed unitary from Gram-Schmidt on a complex Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        for c in &cols {
            let overlap: C64 = c.iter().zip(&v).map(|(ci, vi)| ci.conj() * vi).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= overlap * ci;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for vi in &mut v {
            *vi /= norm;
        }
        cols.push(v);
    }
    CMatrix::from_fn(dim, |i, j| cols[j][i])
}
