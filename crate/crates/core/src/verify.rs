//! Cross-module property suite behind `velopol verify`.
//!
//! Every property runs on a fixed seed and reports the largest residual it saw.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::densmat::{
    bloch_from_density, density_from_bloch, measure_projection, BlochState, DensityMatrix,
};
use crate::entropy_flow::{
    admissible_distribution, check_compatibility, make_final, make_initial, reduce_macro,
    reduce_micro, unitary_evolve,
};
use crate::fermion::{
    chiral, emergent_channel_polarization, ChannelCoefficients, ChannelKind, ChannelModel,
};
use crate::linalg::CMatrix;
use crate::photon::{
    addition_form, coefficients, compose_angles, emergent_xi, velocity_ceiling, xi_from_cos2,
    ComptonKinematics, LinearPolarization, StokesCoefficients,
};
use crate::sampling;
use crate::spin_half::{
    add_collinear, add_noncollinear, emergent_polarization, magnitude_squared, scatter_bloch,
    velocity_compose, AmplitudeModel,
};
use crate::tol;

pub const MODULES: [&str; 5] = [
    "densmat_core",
    "spin_half_scatter",
    "photon_thomson",
    "fermion_channels",
    "entropy_flow",
];

const SEED: u64 = 0x5EED_CAFE;
const CASES: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyResult {
    pub module: String,
    pub property: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub cases: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|r| {
                format!(
                    "[{}] {}::{} max_residual={:.3e} tolerance={:.0e} cases={}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.module,
                    r.property,
                    r.max_residual,
                    r.tolerance,
                    r.cases
                )
            })
            .collect()
    }
}

/// Accumulates residuals for one property. A NaN residual or a failed
/// boolean check fails the property.
struct Probe {
    module: &'static str,
    property: &'static str,
    tolerance: f64,
    max_residual: f64,
    cases: usize,
    broken: bool,
}

impl Probe {
    fn new(module: &'static str, property: &'static str, tolerance: f64) -> Self {
        Probe {
            module,
            property,
            tolerance,
            max_residual: 0.0,
            cases: 0,
            broken: false,
        }
    }

    fn residual(&mut self, r: f64) {
        self.cases += 1;
        if r.is_nan() {
            self.broken = true;
        } else {
            self.max_residual = self.max_residual.max(r);
        }
    }

    fn holds(&mut self, ok: bool) {
        self.cases += 1;
        self.broken |= !ok;
    }

    /// An unexpected library error fails the property.
    fn ok<T, E>(&mut self, r: std::result::Result<T, E>) -> Option<T> {
        if r.is_err() {
            self.broken = true;
        }
        r.ok()
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            module: self.module.into(),
            property: self.property.into(),
            passed: !self.broken && self.max_residual <= self.tolerance,
            max_residual: self.max_residual,
            tolerance: self.tolerance,
            cases: self.cases,
        }
    }
}

pub fn check_filter(filter: &str) -> Result<(), String> {
    if MODULES.contains(&filter) {
        Ok(())
    } else {
        Err(format!(
            "unknown module '{filter}', expected one of {}",
            MODULES.join(", ")
        ))
    }
}

/// Runs every suite, or only the one named by `filter`.
pub fn run(filter: Option<&str>) -> Result<VerifyReport, String> {
    if let Some(f) = filter {
        check_filter(f)?;
    }
    let mut results = Vec::new();
    for module in MODULES {
        if filter.is_some_and(|f| f != module) {
            continue;
        }
        results.extend(match module {
            "densmat_core" => densmat_suite(),
            "spin_half_scatter" => spin_half_suite(),
            "photon_thomson" => photon_suite(&coefficients),
            "fermion_channels" => fermion_suite(),
            _ => entropy_suite(),
        });
    }
    Ok(VerifyReport { results })
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt)
}

fn densmat_suite() -> Vec<PropertyResult> {
    let m = "densmat_core";
    let mut r = rng(1);
    let mut round_trip = Probe::new(m, "bloch_round_trip", tol::ALGEBRAIC);
    let mut projection = Probe::new(m, "projection_closed_form", tol::ALGEBRAIC);
    let mut spectrum = Probe::new(m, "spectrum_closed_form", tol::ALGEBRAIC);
    for _ in 0..CASES {
        let p = BlochState::new(sampling::ball_vector(&mut r)).expect("inside ball");
        let q = BlochState::new(sampling::ball_vector(&mut r)).expect("inside ball");
        let rho = density_from_bloch(p);
        if let Some(back) = round_trip.ok(bloch_from_density(&rho)) {
            round_trip.residual(back.vector().max_abs_diff(p.vector()));
        }
        if let Some(v) = projection.ok(measure_projection(&rho, &density_from_bloch(q))) {
            projection.residual((v - 0.5 * (1.0 + p.vector().dot(q.vector()))).abs());
        }
        let eig = rho.spectrum();
        let mag = p.magnitude();
        spectrum.residual(
            (eig[0] - 0.5 * (1.0 - mag))
                .abs()
                .max((eig[1] - 0.5 * (1.0 + mag)).abs()),
        );
    }
    let mut invariance = Probe::new(m, "entropy_unitary_invariance", tol::TRACE_POWER);
    for _ in 0..200 {
        let dim = r.random_range(2..6);
        let w: Vec<f64> = (0..dim).map(|_| r.random::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let d = CMatrix::from_real_diagonal(&w.iter().map(|x| x / total).collect::<Vec<_>>());
        let u = sampling::unitary(&mut r, dim);
        let (Some(a), Some(b)) = (
            invariance.ok(DensityMatrix::new(d)),
            invariance.ok(DensityMatrix::new(symmetrized(
                &CMatrix::from_real_diagonal(&w).conjugate_by(&u),
                total,
            ))),
        ) else {
            continue;
        };
        let (ra, rb) = (a.entropy_report(dim), b.entropy_report(dim));
        let mut worst = (ra.von_neumann - rb.von_neumann).abs();
        for (x, y) in ra.purity_powers.iter().zip(&rb.purity_powers) {
            worst = worst.max((x - y).abs());
        }
        invariance.residual(worst);
    }
    vec![
        round_trip.finish(),
        projection.finish(),
        spectrum.finish(),
        invariance.finish(),
    ]
}

fn symmetrized(m: &CMatrix, total: f64) -> CMatrix {
    CMatrix::from_fn(m.dim(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()) / total)
}

fn spin_half_suite() -> Vec<PropertyResult> {
    let m = "spin_half_scatter";
    let mut r = rng(2);
    let mut oracle = Probe::new(m, "closed_form_vs_matrix", tol::ALGEBRAIC);
    let mut velocity = Probe::new(m, "magnitude_vs_velocity_composition", tol::ALGEBRAIC);
    let mut weight = Probe::new(m, "weight_closed_form", tol::ALGEBRAIC);
    for _ in 0..CASES {
        let amp = sampling::amplitude_pair(&mut r);
        let p = BlochState::new(sampling::ball_vector_within(&mut r, 0.999)).expect("inside ball");
        let p0 = emergent_polarization(&amp).vector();
        let (Some(matrix), Some(closed)) = (
            oracle.ok(scatter_bloch(p, &amp)),
            oracle.ok(add_noncollinear(p, &amp)),
        ) else {
            continue;
        };
        oracle.residual(matrix.polarization.vector().max_abs_diff(closed.vector()));
        let expected = amp.total() * (1.0 + p.vector().dot(p0));
        weight.residual((matrix.weight - expected).abs() / amp.total());
        if p0.norm() < 1.0 {
            if let Some(w) = velocity.ok(velocity_compose(p.vector(), p0)) {
                velocity.residual((closed.vector().norm_squared() - w.norm_squared()).abs());
            }
            if let Some(m2) = velocity.ok(magnitude_squared(p.vector(), p0)) {
                velocity.residual((m2 - closed.vector().norm_squared()).abs());
            }
        }
    }
    let mut fixed = Probe::new(m, "collinear_fixed_points", 0.0);
    for _ in 0..CASES {
        let p0 = r.random_range(-0.999..0.999);
        for end in [1.0, -1.0] {
            if let Some(v) = fixed.ok(add_collinear(end, p0)) {
                fixed.residual((v - end).abs());
            }
        }
    }
    vec![
        oracle.finish(),
        weight.finish(),
        velocity.finish(),
        fixed.finish(),
    ]
}

fn grid() -> impl Iterator<Item = (f64, f64)> {
    (0..200).flat_map(|i| {
        let x = 10.0 * i as f64 / 199.0;
        (0..200).map(move |j| (x, PI * (j + 1) as f64 / 201.0))
    })
}

const XI_SET: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Positivity of the photon coefficients from `provider` on the `(x, θ)` grid.
pub fn positivity_suite(
    provider: &dyn Fn(&ComptonKinematics) -> StokesCoefficients,
) -> Vec<PropertyResult> {
    let m = "photon_thomson";
    let mut recoil = Probe::new(m, "f0_at_least_f33", 0.0);
    let mut bound = Probe::new(m, "emergent_xi_bounded", 0.0);
    for (x, theta) in grid() {
        let kin = ComptonKinematics::new(x, theta).expect("grid inside domain");
        let f = provider(&kin);
        recoil.residual((f.f33 - f.f0).max(0.0));
        for xi in XI_SET {
            let den = f.f0 + xi * f.f3;
            let v = (f.f3 + xi * f.f33) / den;
            bound.holds(den > 0.0);
            bound.residual((v.abs() - 1.0).max(0.0));
        }
    }
    vec![recoil.finish(), bound.finish()]
}

fn photon_suite(
    provider: &dyn Fn(&ComptonKinematics) -> StokesCoefficients,
) -> Vec<PropertyResult> {
    let m = "photon_thomson";
    let mut out = positivity_suite(provider);
    let mut ceiling = Probe::new(m, "velocity_ceiling", 0.0);
    let mut addition = Probe::new(m, "addition_form_equivalence", tol::ALGEBRAIC);
    for (x, theta) in grid().step_by(7) {
        let f = coefficients(&ComptonKinematics::new(x, theta).expect("grid inside domain"));
        for xi in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let xi = LinearPolarization::new(xi).expect("in range");
            if let (Some(e), Some(c)) = (
                ceiling.ok(emergent_xi(&f, xi)),
                ceiling.ok(velocity_ceiling(&f, xi)),
            ) {
                ceiling.residual((e.value() - c).max(0.0));
            }
            if let (Some(e), Some(a)) = (
                addition.ok(emergent_xi(&f, xi)),
                addition.ok(addition_form(&f, xi)),
            ) {
                addition.residual((e.value() - a.value()).abs());
            }
        }
    }
    let mut r = rng(3);
    let mut product = Probe::new(m, "product_rule", tol::ALGEBRAIC);
    let mut monotone = Probe::new(m, "thomson_monotone", 0.0);
    for _ in 0..200 {
        let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
        let mut xi = LinearPolarization::unpolarized();
        let mut cos2 = 1.0;
        let mut angle = 0.0;
        for _ in 0..50 {
            let theta = r.random_range(0.0..PI / 2.0);
            let f = coefficients(&ComptonKinematics::thomson(sign * theta).expect("in range"));
            let Some(next) = product.ok(emergent_xi(&f, xi)) else {
                break;
            };
            monotone.residual((xi.value() - next.value()).max(0.0));
            xi = next;
            cos2 *= theta.cos().powi(2);
            if let Some(a) = product.ok(compose_angles(angle, theta)) {
                angle = a;
            }
            product.residual((xi.value() - xi_from_cos2(cos2)).abs());
            product.residual((xi.value() - xi_from_cos2(angle.cos().powi(2))).abs());
        }
    }
    out.extend([
        ceiling.finish(),
        addition.finish(),
        product.finish(),
        monotone.finish(),
    ]);
    out
}

fn fermion_suite() -> Vec<PropertyResult> {
    let m = "fermion_channels";
    let mut r = rng(4);
    let mut bound = Probe::new(m, "helicity_bounded", 0.0);
    for _ in 0..CASES * 5 {
        let f0: f64 = r.random_range(0.1..5.0);
        let fquad: f64 = f0 * r.random_range(-1.0..=1.0);
        let fcorr = r.random_range(-1.0..=1.0) * (f0 + fquad.abs()) / 2.0;
        let Ok(c) = ChannelCoefficients::new(f0, fcorr, fquad, ChannelKind::Helicity) else {
            continue;
        };
        let xi = r.random_range(-1.0..=1.0);
        if let Some(v) = bound.ok(emergent_channel_polarization(&c, xi)) {
            bound.residual((v.abs() - 1.0).max(0.0));
        }
    }
    let mut saturation = Probe::new(m, "chiral_saturation_velocity_rule", 1e-10);
    for _ in 0..CASES {
        let lambda = r.random_range(-0.999..0.999);
        let xi = r.random_range(-1.0..=1.0);
        let f0: f64 = r.random_range(0.1..5.0);
        let Some(c) = saturation.ok(chiral(f0, lambda, ChannelKind::Helicity)) else {
            continue;
        };
        if let (Some(v), Some(w)) = (
            saturation.ok(emergent_channel_polarization(&c, xi)),
            saturation.ok(add_collinear(lambda, xi)),
        ) {
            saturation.residual((v - w).abs());
        }
    }
    let mut interference = Probe::new(m, "interference_vs_matrix", tol::ALGEBRAIC);
    for _ in 0..CASES {
        let amp = sampling::amplitude_pair(&mut r);
        let (a, b) = (amp.a(), amp.b());
        let model = ChannelModel::Interference {
            amplitude: AmplitudeModel::Constant {
                a: [a.re, a.im],
                b: [b.re, b.im],
            },
        };
        let s = r.random_range(-0.999..0.999);
        let n = amp.normal();
        let p = BlochState::new(n * s).expect("inside ball");
        let (Some(c), Some(out)) = (
            interference.ok(model.coefficients(0.5, ChannelKind::Helicity)),
            interference.ok(scatter_bloch(p, &amp)),
        ) else {
            continue;
        };
        if let Some(v) = interference.ok(emergent_channel_polarization(&c, s)) {
            interference.residual((v - out.polarization.vector().dot(n)).abs());
        }
    }
    vec![bound.finish(), saturation.finish(), interference.finish()]
}

fn entropy_suite() -> Vec<PropertyResult> {
    let m = "entropy_flow";
    let mut r = rng(5);
    let mut compat = Probe::new(m, "admissible_final_compatible", tol::TRACE_POWER);
    let mut swap = Probe::new(m, "entropy_swap", tol::TRACE_POWER);
    for j2 in [2usize, 3] {
        for mdim in [2usize, 3, 5] {
            if mdim < j2 {
                continue;
            }
            let Some(f) = compat.ok(admissible_distribution(&mut r, j2, mdim)) else {
                continue;
            };
            let (Some(init), Some(fin)) = (
                compat.ok(make_initial(j2, mdim, 0)),
                compat.ok(make_final(j2, mdim, 0, &f)),
            ) else {
                continue;
            };
            if let Some(rep) = compat.ok(check_compatibility(&init, &fin, 4)) {
                for p in &rep.powers {
                    compat.residual(p.residual);
                }
            }
            let ln = (j2 as f64).ln();
            swap.residual((reduce_micro(&init).von_neumann_entropy() - ln).abs());
            swap.residual(reduce_macro(&init).von_neumann_entropy().abs());
            swap.residual(reduce_micro(&fin).von_neumann_entropy().abs());
            swap.residual((reduce_macro(&fin).von_neumann_entropy() - ln).abs());
            swap.residual((fin.rho().von_neumann_entropy() - ln).abs());
        }
    }
    let mut evolution = Probe::new(m, "evolution_preserves_purity", tol::EVOLUTION);
    for _ in 0..100 {
        let j2 = r.random_range(2..4);
        let mdim = r.random_range(2..4);
        let Some(state) = evolution.ok(make_initial(j2, mdim, 0)) else {
            continue;
        };
        let h = sampling::hermitian(&mut r, j2 * mdim);
        let t = r.random_range(0.0..5.0);
        let Some(out) = evolution.ok(unitary_evolve(&state, &h, t)) else {
            continue;
        };
        let dim = j2 * mdim;
        let (a, b) = (
            state.rho().entropy_report(dim),
            out.rho().entropy_report(dim),
        );
        let worst = a
            .purity_powers
            .iter()
            .zip(&b.purity_powers)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        evolution.residual(worst);
    }
    vec![compat.finish(), swap.finish(), evolution.finish()]
}
