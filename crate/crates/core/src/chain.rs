//! Scenario files and the multi-scattering chain driver.
//!
//! A scenario runs `trajectories` independent chains. Trajectory `k` draws
//! from a ChaCha8 stream seeded with `splitmix64(master_seed ^ k)`, so the
//! output does not depend on how many workers run the trajectories.
//!
//! Azimuths follow `φᵢ = φᵢ⁽⁰⁾ + Δᵢ` with `Δᵢ = Δᵢ₋₁ + εᵢ`, where `φᵢ⁽⁰⁾` is the
//! nominal azimuth of step `i` and `εᵢ` is wrapped-normal noise whose mean
//! resultant length is the plane correlation `κ` (`σ² = −2 ln κ`). `κ = 1`
//! draws nothing; `κ = 0` draws uniformly.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::densmat::BlochState;
use crate::entropy_flow::{entropy_trajectory, make_initial};
use crate::error::Error;
use crate::fermion::{
    emergent_channel_polarization, ChannelKind, ChannelModel, Side, SideSignedAngle,
};
use crate::photon::{coefficients, emergent_xi, ComptonKinematics, LinearPolarization};
use crate::sampling;
use crate::spin_half::{scatter_bloch, AmplitudeModel};
use crate::tol;
use crate::vector::Vec3;
use crate::verify;

pub const CSV_HEADER: &str =
    "trajectory,step,theta,phi,P_x,P_y,P_z,P_mag,xi3,weight,S_micro,S_macro,S_total";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("malformed scenario: {0}")]
    Malformed(String),
    #[error("numerical invariant violated: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// 1 for bad input or I/O, 2 for a failure during the computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Malformed(_) | RunError::Io { .. } => 1,
            RunError::Numerical(_) => 2,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

fn malformed(msg: impl Into<String>) -> RunError {
    RunError::Malformed(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SpinHalfChain,
    ThomsonChain,
    HelicityChain,
    TransverseChain,
    EntropyDemo,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum SideSpec {
    Left,
    Right,
    /// Left or right with equal probability, drawn per trajectory.
    Random,
}

/// One scattering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Step {
    /// Scattering angle in radians; its sign selects the side unless `side` is given.
    pub theta: f64,
    /// Nominal azimuth of the scattering plane in radians. Defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Overrides the sign of `theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<SideSpec>,
    /// `ω/m` for thomson-chain. Defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Required by spin-half-chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<AmplitudeModel>,
    /// Required by helicity-chain and transverse-chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelModel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Bloch vector for spin-half-chain.
    Polarization([f64; 3]),
    /// Stokes `ξ₃` for thomson-chain.
    Xi3(f64),
    /// Spin component along the channel axis for helicity/transverse chains.
    SpinComponent(f64),
    /// Unpolarized spin with definite momentum, for entropy-demo.
    Composite {
        spin_dim: usize,
        momentum_dim: usize,
        momentum: usize,
    },
}

/// Time grid and coupling for entropy-demo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Evolution {
    pub t_max: f64,
    /// Number of time points, `t_k = k t_max / (samples − 1)`.
    pub samples: usize,
    /// Scale of the random Hamiltonian. Defaults to 1.
    #[serde(default = "one")]
    pub coupling: f64,
}

fn one() -> f64 {
    1.0
}

fn one_trajectory() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    #[serde(default)]
    pub steps: Vec<Step>,
    /// Unpolarized when omitted (entropy-demo requires `composite`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default = "one_trajectory")]
    pub trajectories: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// `κ ∈ [0, 1]`. Defaults to 1 (no azimuthal noise).
    #[serde(default = "one")]
    pub plane_correlation: f64,
    /// CSV destination, relative to the scenario file. Required except in verify mode,
    /// where it receives the JSON report instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<Evolution>,
    /// Module filter for verify mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
}

pub fn schema_json() -> String {
    let schema = schemars::schema_for!(Scenario);
    serde_json::to_string_pretty(&schema).expect("schema serializes")
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.trajectories == 0 {
            return Err(malformed("trajectories must be ≥ 1"));
        }
        let k = self.plane_correlation;
        if !(0.0..=1.0).contains(&k) {
            return Err(malformed(format!("plane_correlation {k} outside [0, 1]")));
        }
        if self.mode != Mode::Verify && self.output_path.is_none() {
            return Err(malformed("output_path is required"));
        }
        if self.filter.is_some() && self.mode != Mode::Verify {
            return Err(malformed("filter only applies to verify mode"));
        }
        if self.evolution.is_some() && self.mode != Mode::EntropyDemo {
            return Err(malformed("evolution only applies to entropy-demo"));
        }
        match self.mode {
            Mode::Verify => {
                if !self.steps.is_empty() || self.initial_state.is_some() {
                    return Err(malformed("verify mode takes no steps or initial_state"));
                }
                if let Some(f) = &self.filter {
                    verify::check_filter(f).map_err(malformed)?;
                }
                Ok(())
            }
            Mode::EntropyDemo => self.validate_entropy(),
            _ => self.validate_chain(),
        }
    }

    fn validate_chain(&self) -> Result<(), RunError> {
        if self.steps.is_empty() {
            return Err(malformed("chain modes need at least one step"));
        }
        let initial_ok = match (self.mode, &self.initial_state) {
            (_, None) => true,
            (Mode::SpinHalfChain, Some(InitialState::Polarization(p))) => {
                let p = Vec3::from_array(*p);
                BlochState::new(p).map_err(|e| malformed(e.to_string()))?;
                true
            }
            (Mode::ThomsonChain, Some(InitialState::Xi3(x))) => {
                LinearPolarization::new(*x).map_err(|e| malformed(e.to_string()))?;
                true
            }
            (Mode::HelicityChain | Mode::TransverseChain, Some(InitialState::SpinComponent(s))) => {
                if !(s.abs() <= 1.0) {
                    return Err(malformed(format!("spin component {s} outside [−1, 1]")));
                }
                true
            }
            _ => false,
        };
        if !initial_ok {
            return Err(malformed(format!(
                "initial_state does not fit mode {:?}",
                self.mode
            )));
        }
        let first_phi = self.steps[0].phi.unwrap_or(0.0);
        for (i, step) in self.steps.iter().enumerate() {
            self.validate_step(step)
                .map_err(|e| malformed(format!("step {i}: {e}")))?;
            if self.mode == Mode::ThomsonChain && step.phi.unwrap_or(0.0) != first_phi {
                return Err(malformed(
                    "thomson-chain steps must share one scattering plane (equal phi)",
                ));
            }
        }
        if self.mode == Mode::ThomsonChain && self.plane_correlation != 1.0 {
            return Err(malformed(
                "thomson-chain tracks ξ₃ only and needs plane_correlation = 1",
            ));
        }
        Ok(())
    }

    fn validate_step(&self, step: &Step) -> Result<(), String> {
        let theta = step.theta;
        if !(theta.is_finite() && theta.abs() <= PI) {
            return Err(format!("theta {theta} outside [−π, π]"));
        }
        if let Some(phi) = step.phi {
            if !phi.is_finite() {
                return Err("phi must be finite".into());
            }
        }
        let forbid = |present: bool, what: &str| {
            if present {
                Err(format!("{what} does not apply to {:?}", self.mode))
            } else {
                Ok(())
            }
        };
        match self.mode {
            Mode::SpinHalfChain => {
                forbid(step.x.is_some(), "x")?;
                forbid(step.channel.is_some(), "channel")?;
                let model = step.amplitude.as_ref().ok_or("amplitude is required")?;
                // Both signs share |θ|, so one evaluation covers random sides.
                model.pair(theta, 0.0).map_err(|e| e.to_string())?;
            }
            Mode::ThomsonChain => {
                forbid(step.amplitude.is_some(), "amplitude")?;
                forbid(step.channel.is_some(), "channel")?;
                ComptonKinematics::new(step.x.unwrap_or(0.0), theta.abs())
                    .map_err(|e| e.to_string())?;
            }
            Mode::HelicityChain | Mode::TransverseChain => {
                forbid(step.x.is_some(), "x")?;
                forbid(step.amplitude.is_some(), "amplitude")?;
                forbid(step.phi.is_some(), "phi")?;
                let model = step.channel.as_ref().ok_or("channel is required")?;
                let kind = if self.mode == Mode::HelicityChain {
                    forbid(step.side.is_some(), "side")?;
                    ChannelKind::Helicity
                } else {
                    SideSignedAngle::new(theta.abs(), Side::Left).map_err(|e| e.to_string())?;
                    ChannelKind::Transverse
                };
                model.coefficients(theta, kind).map_err(|e| e.to_string())?;
            }
            Mode::EntropyDemo | Mode::Verify => unreachable!("not a chain mode"),
        }
        Ok(())
    }

    fn validate_entropy(&self) -> Result<(), RunError> {
        if !self.steps.is_empty() {
            return Err(malformed("entropy-demo takes no steps"));
        }
        let Some(InitialState::Composite {
            spin_dim,
            momentum_dim,
            momentum,
        }) = self.initial_state
        else {
            return Err(malformed("entropy-demo needs a composite initial_state"));
        };
        make_initial(spin_dim, momentum_dim, momentum).map_err(|e| malformed(e.to_string()))?;
        if spin_dim * momentum_dim > 64 {
            return Err(malformed("composite dimension above 64 is not supported"));
        }
        let ev = self
            .evolution
            .as_ref()
            .ok_or_else(|| malformed("entropy-demo needs evolution"))?;
        if !(ev.t_max.is_finite() && ev.t_max >= 0.0 && ev.coupling.is_finite()) {
            return Err(malformed("t_max must be ≥ 0 and coupling finite"));
        }
        if ev.samples < 2 {
            return Err(malformed("evolution needs at least 2 samples"));
        }
        Ok(())
    }
}

/// One CSV row; `None` is an empty cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TraceRow {
    pub trajectory: usize,
    pub step: usize,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub p_x: Option<f64>,
    pub p_y: Option<f64>,
    pub p_z: Option<f64>,
    pub p_mag: Option<f64>,
    pub xi3: Option<f64>,
    pub weight: Option<f64>,
    pub s_micro: Option<f64>,
    pub s_macro: Option<f64>,
    pub s_total: Option<f64>,
}

impl TraceRow {
    fn cells(&self) -> [Option<f64>; 11] {
        [
            self.theta,
            self.phi,
            self.p_x,
            self.p_y,
            self.p_z,
            self.p_mag,
            self.xi3,
            self.weight,
            self.s_micro,
            self.s_macro,
            self.s_total,
        ]
    }

    fn check(&self) -> Result<(), RunError> {
        let bad = |what: &str| {
            Err(RunError::Numerical(format!(
                "trajectory {} step {}: {what}",
                self.trajectory, self.step
            )))
        };
        if self.cells().iter().flatten().any(|v| !v.is_finite()) {
            return bad("non-finite value");
        }
        if self.p_mag.is_some_and(|m| m > 1.0 + tol::PSD_SLACK) {
            return bad("|P| above 1");
        }
        if self.xi3.is_some_and(|x| x.abs() > 1.0 + tol::PSD_SLACK) {
            return bad("|ξ₃| above 1");
        }
        if self.weight.is_some_and(|w| w < 0.0) {
            return bad("negative weight");
        }
        Ok(())
    }
}

/// 17 significant digits.
fn format_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn render_csv(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        write!(out, "{},{}", row.trajectory, row.step).unwrap();
        for cell in row.cells() {
            out.push(',');
            out.push_str(&format_cell(cell));
        }
        out.push('\n');
    }
    out
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trajectory_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ index as u64))
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Azimuthal step noise with mean resultant length `κ`.
#[derive(Clone, Copy, Debug)]
enum AzimuthNoise {
    None,
    Uniform,
    WrappedNormal(Normal<f64>),
}

impl AzimuthNoise {
    fn new(kappa: f64) -> Self {
        if kappa >= 1.0 {
            AzimuthNoise::None
        } else if kappa <= 0.0 {
            AzimuthNoise::Uniform
        } else {
            let sigma = (-2.0 * kappa.ln()).sqrt();
            AzimuthNoise::WrappedNormal(Normal::new(0.0, sigma).expect("finite positive σ"))
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            AzimuthNoise::None => 0.0,
            AzimuthNoise::Uniform => wrap_angle(rng.random_range(-PI..PI)),
            AzimuthNoise::WrappedNormal(n) => wrap_angle(n.sample(rng)),
        }
    }
}

/// Signed angle for one step; random sides consume one draw.
fn signed_theta<R: Rng + ?Sized>(step: &Step, rng: &mut R) -> f64 {
    let side = match step.side {
        None => return step.theta,
        Some(SideSpec::Left) => Side::Left,
        Some(SideSpec::Right) => Side::Right,
        Some(SideSpec::Random) => {
            if rng.random::<bool>() {
                Side::Left
            } else {
                Side::Right
            }
        }
    };
    step.theta.abs() * side.sign()
}

fn spin_half_trajectory(s: &Scenario, index: usize) -> Result<Vec<TraceRow>, RunError> {
    let mut rng = trajectory_rng(s.master_seed, index);
    let noise = AzimuthNoise::new(s.plane_correlation);
    let start = match s.initial_state {
        Some(InitialState::Polarization(p)) => Vec3::from_array(p),
        _ => Vec3::ZERO,
    };
    let mut p = BlochState::new(start)?;
    let mut weight = 1.0;
    let row = |step, theta, phi, p: BlochState, weight| {
        let v = p.vector();
        TraceRow {
            trajectory: index,
            step,
            theta,
            phi,
            p_x: Some(v.x),
            p_y: Some(v.y),
            p_z: Some(v.z),
            p_mag: Some(v.norm()),
            weight: Some(weight),
            ..TraceRow::default()
        }
    };
    let mut rows = vec![row(0, None, None, p, weight)];
    let mut offset = 0.0;
    for (i, step) in s.steps.iter().enumerate() {
        let theta = signed_theta(step, &mut rng);
        offset = wrap_angle(offset + noise.draw(&mut rng));
        let phi = step.phi.unwrap_or(0.0) + offset;
        let amp = step
            .amplitude
            .as_ref()
            .expect("validated")
            .pair(theta, phi)?;
        let out = scatter_bloch(p, &amp)?;
        p = out.polarization;
        weight *= out.weight;
        rows.push(row(i + 1, Some(theta), Some(phi), p, weight));
    }
    Ok(rows)
}

fn thomson_trajectory(s: &Scenario, index: usize) -> Result<Vec<TraceRow>, RunError> {
    let mut rng = trajectory_rng(s.master_seed, index);
    let start = match s.initial_state {
        Some(InitialState::Xi3(x)) => x,
        _ => 0.0,
    };
    let mut xi = LinearPolarization::new(start)?;
    let mut weight = 1.0;
    let row = |step, theta, phi, xi: LinearPolarization, weight| TraceRow {
        trajectory: index,
        step,
        theta,
        phi,
        xi3: Some(xi.value()),
        weight: Some(weight),
        ..TraceRow::default()
    };
    let mut rows = vec![row(0, None, None, xi, weight)];
    for (i, step) in s.steps.iter().enumerate() {
        let theta = signed_theta(step, &mut rng);
        let kin = ComptonKinematics::new(step.x.unwrap_or(0.0), theta)?;
        let f = coefficients(&kin);
        weight *= kin.kinematic_weight() * (f.f0 + f.f3 * xi.value());
        xi = emergent_xi(&f, xi)?;
        rows.push(row(
            i + 1,
            Some(theta),
            Some(step.phi.unwrap_or(0.0)),
            xi,
            weight,
        ));
    }
    Ok(rows)
}

fn channel_trajectory(s: &Scenario, index: usize) -> Result<Vec<TraceRow>, RunError> {
    let mut rng = trajectory_rng(s.master_seed, index);
    let mut spin = match s.initial_state {
        Some(InitialState::SpinComponent(v)) => v,
        _ => 0.0,
    };
    let mut weight = 1.0;
    let row = |step, theta, spin: f64, weight| TraceRow {
        trajectory: index,
        step,
        theta,
        p_z: Some(spin),
        p_mag: Some(spin.abs()),
        weight: Some(weight),
        ..TraceRow::default()
    };
    let mut rows = vec![row(0, None, spin, weight)];
    for (i, step) in s.steps.iter().enumerate() {
        let theta = signed_theta(step, &mut rng);
        let model = step.channel.as_ref().expect("validated");
        let c = if s.mode == Mode::HelicityChain {
            model.coefficients(theta, ChannelKind::Helicity)?
        } else {
            let angle = SideSignedAngle::new(
                theta.abs(),
                if theta < 0.0 { Side::Right } else { Side::Left },
            )?;
            let left = model.coefficients(angle.theta(), ChannelKind::Transverse)?;
            match angle.side() {
                Side::Left => left,
                Side::Right => left.mirrored(),
            }
        };
        weight *= c.cross_section_factor(spin, 0.0);
        spin = emergent_channel_polarization(&c, spin)?;
        rows.push(row(i + 1, Some(theta), spin, weight));
    }
    Ok(rows)
}

fn entropy_demo_trajectory(s: &Scenario, index: usize) -> Result<Vec<TraceRow>, RunError> {
    let mut rng = trajectory_rng(s.master_seed, index);
    let Some(InitialState::Composite {
        spin_dim,
        momentum_dim,
        momentum,
    }) = s.initial_state
    else {
        unreachable!("validated");
    };
    let ev = s.evolution.as_ref().expect("validated");
    let state = make_initial(spin_dim, momentum_dim, momentum)?;
    let h = sampling::hermitian(&mut rng, spin_dim * momentum_dim).scale_real(ev.coupling);
    let last = (ev.samples - 1) as f64;
    let times: Vec<f64> = (0..ev.samples)
        .map(|k| ev.t_max * k as f64 / last)
        .collect();
    let samples = entropy_trajectory(&state, &h, &times)?;
    Ok(samples
        .iter()
        .enumerate()
        .map(|(k, e)| TraceRow {
            trajectory: index,
            step: k,
            s_micro: Some(e.micro),
            s_macro: Some(e.macro_),
            s_total: Some(e.total),
            ..TraceRow::default()
        })
        .collect())
}

/// Runs every trajectory on a pool of `workers` threads (all cores when `None`)
/// and returns the rows in trajectory order.
pub fn simulate(s: &Scenario, workers: Option<usize>) -> Result<Vec<TraceRow>, RunError> {
    let one = match s.mode {
        Mode::SpinHalfChain => spin_half_trajectory,
        Mode::ThomsonChain => thomson_trajectory,
        Mode::HelicityChain | Mode::TransverseChain => channel_trajectory,
        Mode::EntropyDemo => entropy_demo_trajectory,
        Mode::Verify => return Err(malformed("verify mode has no trajectories")),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(malformed("workers must be ≥ 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let per_trajectory: Vec<Vec<TraceRow>> = pool.install(|| {
        (0..s.trajectories)
            .into_par_iter()
            .map(|k| one(s, k))
            .collect::<Result<_, _>>()
    })?;
    let rows: Vec<TraceRow> = per_trajectory.into_iter().flatten().collect();
    for row in &rows {
        row.check()?;
    }
    Ok(rows)
}

/// Quantity plotted against the step number.
fn plotted(mode: Mode, row: &TraceRow) -> Option<f64> {
    match mode {
        Mode::ThomsonChain => row.xi3,
        Mode::HelicityChain | Mode::TransverseChain => row.p_z,
        Mode::EntropyDemo => row.s_micro,
        _ => row.p_mag,
    }
}

/// Mean of the plotted quantity per step.
pub fn step_means(mode: Mode, rows: &[TraceRow]) -> Vec<f64> {
    let steps = rows.iter().map(|r| r.step + 1).max().unwrap_or(0);
    let mut sum = vec![0.0; steps];
    let mut count = vec![0usize; steps];
    for r in rows {
        if let Some(v) = plotted(mode, r) {
            sum[r.step] += v;
            count[r.step] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect()
}

pub fn render_svg(mode: Mode, rows: &[TraceRow]) -> String {
    let means = step_means(mode, rows);
    let label = match mode {
        Mode::ThomsonChain => "mean xi3",
        Mode::HelicityChain | Mode::TransverseChain => "mean P_z",
        Mode::EntropyDemo => "mean S_micro",
        _ => "mean P_mag",
    };
    let (w, h, m) = (640.0, 400.0, 48.0);
    let lo = means.iter().copied().fold(0.0f64, f64::min);
    let hi = means.iter().copied().fold(1.0f64, f64::max);
    let span_x = (means.len().max(2) - 1) as f64;
    let x = |i: usize| m + (w - 2.0 * m) * i as f64 / span_x;
    let y = |v: f64| h - m - (h - 2.0 * m) * (v - lo) / (hi - lo);
    let points: Vec<String> = means
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{:.3},{:.3}", x(i), y(v)))
        .collect();
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<path d="M{m},{m} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = h - m,
        r = w - m
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{m}" y="{}" font-size="12">{hi:.3}</text>"#,
        m - 6.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="4" y="{}" font-size="12">{lo:.3}</text>"#,
        h - m
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12">step</text>"#,
        w - m - 24.0,
        h - m + 20.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="20" font-size="14">{label}</text>"#,
        m + 8.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        points.join(" ")
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    pub svg: bool,
}

#[derive(Clone, Debug)]
pub enum RunOutcome {
    Trace {
        rows: usize,
        csv: PathBuf,
        svg: Option<PathBuf>,
    },
    Verify(verify::VerifyReport),
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    std::fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a scenario whose relative paths resolve against `base_dir`.
///
/// A failing verify report is returned as `Ok`; the caller decides the exit code.
pub fn run(s: &Scenario, base_dir: &Path, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    s.validate()?;
    let out_path = s.output_path.as_ref().map(|p| base_dir.join(p));
    if s.mode == Mode::Verify {
        let report = verify::run(s.filter.as_deref()).map_err(malformed)?;
        if let Some(path) = out_path {
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write_file(&path, &json)?;
        }
        return Ok(RunOutcome::Verify(report));
    }
    let csv = out_path.expect("validated");
    let rows = simulate(s, opts.workers)?;
    write_file(&csv, &render_csv(&rows))?;
    let svg = if opts.svg {
        let path = csv.with_extension("svg");
        write_file(&path, &render_svg(s.mode, &rows))?;
        Some(path)
    } else {
        None
    };
    Ok(RunOutcome::Trace {
        rows: rows.len(),
        csv,
        svg,
    })
}
