//! Experiment configuration: a TOML file with one shared `[kernel]` table and
//! one table per experiment kind. Unknown keys are rejected.

use std::path::Path;

use kinetics_core::dsmc::{InitialLaw, RadialSampling};
use kinetics_core::kernels::{AngularKernel, KineticKernel, Restitution};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    KernelReport,
    PovznerSweep,
    Simulate,
    MomentCreation,
    FourierResidual,
}

impl Kind {
    pub fn label(self) -> &'static str {
        match self {
            Kind::KernelReport => "kernels",
            Kind::PovznerSweep => "povzner",
            Kind::Simulate => "simulate",
            Kind::MomentCreation => "moment-creation",
            Kind::FourierResidual => "fourier",
        }
    }
}

/// The file as written.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub kernel: KernelTable,
    pub kernels: Option<KernelReportParams>,
    pub povzner: Option<PovznerParams>,
    pub simulate: Option<SimulateParams>,
    pub moment_creation: Option<MomentCreationParams>,
    pub fourier: Option<FourierParams>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTable {
    pub e: Option<f64>,
    pub gamma: Option<f64>,
    pub s: Option<f64>,
    pub strength: Option<f64>,
    pub n: Option<u32>,
}

/// Kernel parameters with defaults filled in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub e: f64,
    pub gamma: f64,
    pub s: f64,
    pub strength: f64,
    pub n: u32,
}

pub const DEFAULT_S: f64 = 0.25;
pub const DEFAULT_STRENGTH: f64 = 1.0;
pub const DEFAULT_N: u32 = 16;

macro_rules! defaults {
    ($($name:ident : $t:ty = $v:expr;)*) => {
        $(fn $name() -> $t { $v })*
    };
}

defaults! {
    default_collisions: usize = 1_000_000;
    default_alpha0: Vec<f64> = vec![1.0, 2.0, 4.0];
    default_profile_points: usize = 64;
    default_e_values: Vec<f64> = vec![0.3, 0.5, 0.8, 1.0];
    default_kappa_values: Vec<f64> = vec![0.5, 1.0, 3.0];
    default_n_values: Vec<u32> = vec![4, 16];
    default_weights: Vec<WeightName> = vec![WeightName::Psi1, WeightName::Psi2];
    default_magnitudes: Vec<f64> = vec![0.25, 1.0, 4.0, 16.0];
    default_directions: usize = 24;
    default_random_tuples: usize = 200;
    default_convexity_points: usize = 10_000;
    default_g_tol: f64 = 1e-10;
    default_orders: Vec<f64> = vec![2.0, 4.0, 6.0];
    default_dt_fraction: f64 = 1.0;
    default_q: f64 = 6.0;
    default_ladder: Vec<usize> = vec![25_000, 50_000, 100_000, 200_000];
    default_t0: f64 = 0.1;
    default_creation_t_final: f64 = 2.0;
    default_creation_orders: Vec<f64> = vec![4.0, 6.0];
    default_creation_cadence: f64 = 0.02;
    default_temperature: f64 = 1.0;
    default_fourier_particles: usize = 400_000;
    default_replicas: usize = 32;
    default_delta: f64 = 0.005;
    default_strata: usize = 32;
    default_sweeps: usize = 128;
    default_batches: usize = 32;
    default_rhs_tolerance: f64 = 0.02;
    default_table_cells: usize = 8192;
    default_decay_points: usize = 200;
    default_decay_gammas: Vec<f64> = vec![0.5, 1.0, 2.0];
    default_decay_ns: Vec<u32> = vec![4, 16];
    default_eq_ns: Vec<u32> = vec![4, 8, 16];
    default_eq_particles: usize = 20_000;
    default_eq_t_final: f64 = 0.5;
    default_eq_samples: usize = 11;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelReportParams {
    /// Random collisions for the per-collision physics check.
    #[serde(default = "default_collisions")]
    pub collisions: usize,
    /// Exponents α₀ of the weighted angular integral.
    #[serde(default = "default_alpha0")]
    pub alpha0: Vec<f64>,
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
}

impl Default for KernelReportParams {
    fn default() -> Self {
        Self { collisions: default_collisions(), alpha0: default_alpha0(), profile_points: default_profile_points() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightName {
    Linear,
    Psi1,
    Psi2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovznerParams {
    #[serde(default = "default_e_values")]
    pub e_values: Vec<f64>,
    #[serde(default = "default_kappa_values")]
    pub kappa_values: Vec<f64>,
    #[serde(default = "default_n_values")]
    pub n_values: Vec<u32>,
    #[serde(default = "default_weights")]
    pub weights: Vec<WeightName>,
    /// Speeds |v|, |v*|; every ordered pair is used.
    #[serde(default = "default_magnitudes")]
    pub magnitudes: Vec<f64>,
    /// Angles between v and v* per speed pair, spread over [0, π].
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_random_tuples")]
    pub random_tuples: usize,
    #[serde(default = "default_convexity_points")]
    pub convexity_points: usize,
    /// Size of G below which it counts as zero where its bound vanishes.
    #[serde(default = "default_g_tol")]
    pub g_tol: f64,
}

impl Default for PovznerParams {
    fn default() -> Self {
        Self {
            e_values: default_e_values(),
            kappa_values: default_kappa_values(),
            n_values: default_n_values(),
            weights: default_weights(),
            magnitudes: default_magnitudes(),
            directions: default_directions(),
            random_tuples: default_random_tuples(),
            convexity_points: default_convexity_points(),
            g_tol: default_g_tol(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialTable {
    Maxwellian {
        #[serde(default = "default_temperature")]
        temperature: f64,
    },
    PowerTail {
        #[serde(default = "default_q")]
        q: f64,
        #[serde(default)]
        sampling: SamplingName,
    },
    BiMaxwellian {
        t1: f64,
        t2: f64,
        fraction: f64,
    },
}

impl Default for InitialTable {
    fn default() -> Self {
        InitialTable::Maxwellian { temperature: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingName {
    Iid,
    #[default]
    Stratified,
}

impl InitialTable {
    pub fn law(&self) -> InitialLaw {
        match *self {
            InitialTable::Maxwellian { temperature } => InitialLaw::Maxwellian { temperature },
            InitialTable::PowerTail { q, sampling } => InitialLaw::PowerTail {
                q,
                sampling: match sampling {
                    SamplingName::Iid => RadialSampling::Iid,
                    SamplingName::Stratified => RadialSampling::Stratified,
                },
            },
            InitialTable::BiMaxwellian { t1, t2, fraction } => InitialLaw::BiMaxwellian { t1, t2, fraction },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub particles: usize,
    pub t_final: f64,
    #[serde(default)]
    pub initial: InitialTable,
    #[serde(default = "default_orders")]
    pub moment_orders: Vec<f64>,
    /// Time between moment records; defaults to t_final/100.
    pub cadence: Option<f64>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_dt_fraction")]
    pub dt_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentCreationParams {
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub sampling: SamplingName,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_creation_t_final")]
    pub t_final: f64,
    #[serde(default = "default_creation_orders")]
    pub orders: Vec<f64>,
    #[serde(default = "default_creation_cadence")]
    pub cadence: f64,
}

impl Default for MomentCreationParams {
    fn default() -> Self {
        Self {
            q: default_q(),
            sampling: SamplingName::default(),
            ladder: default_ladder(),
            t0: default_t0(),
            t_final: default_creation_t_final(),
            orders: default_creation_orders(),
            cadence: default_creation_cadence(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierParams {
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_fourier_particles")]
    pub particles: usize,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Time span of the finite difference.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Probe frequencies; five fixed probes when absent.
    pub probes: Option<Vec<[f64; 3]>>,
    #[serde(default = "default_strata")]
    pub cos_strata: usize,
    #[serde(default = "default_strata")]
    pub phi_strata: usize,
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default = "default_rhs_tolerance")]
    pub rhs_tolerance: f64,
    #[serde(default = "default_table_cells")]
    pub table_cells: usize,
    #[serde(default = "default_decay_points")]
    pub decay_points: usize,
    #[serde(default = "default_decay_gammas")]
    pub decay_gammas: Vec<f64>,
    #[serde(default = "default_decay_ns")]
    pub decay_ns: Vec<u32>,
    #[serde(default = "default_eq_ns")]
    pub equicontinuity_ns: Vec<u32>,
    #[serde(default = "default_eq_particles")]
    pub equicontinuity_particles: usize,
    #[serde(default = "default_eq_t_final")]
    pub equicontinuity_t_final: f64,
    #[serde(default = "default_eq_samples")]
    pub equicontinuity_samples: usize,
}

impl Default for FourierParams {
    fn default() -> Self {
        Self {
            temperature: default_temperature(),
            particles: default_fourier_particles(),
            replicas: default_replicas(),
            delta: default_delta(),
            probes: None,
            cos_strata: default_strata(),
            phi_strata: default_strata(),
            sweeps: default_sweeps(),
            batches: default_batches(),
            rhs_tolerance: default_rhs_tolerance(),
            table_cells: default_table_cells(),
            decay_points: default_decay_points(),
            decay_gammas: default_decay_gammas(),
            decay_ns: default_decay_ns(),
            equicontinuity_ns: default_eq_ns(),
            equicontinuity_particles: default_eq_particles(),
            equicontinuity_t_final: default_eq_t_final(),
            equicontinuity_samples: default_eq_samples(),
        }
    }
}

/// Parameters of the selected experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Params {
    KernelReport(KernelReportParams),
    PovznerSweep(PovznerParams),
    Simulate(SimulateParams),
    MomentCreation(MomentCreationParams),
    FourierResidual(FourierParams),
}

/// Validated experiment with every default materialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub seed: u64,
    pub kernel: KernelParams,
    pub params: Params,
    /// Recorded in the manifest; results do not depend on it.
    #[serde(skip)]
    pub workers: Option<usize>,
}

pub fn parse_config(path: &Path, kind: Kind) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, kind)
}

pub fn parse_config_str(text: &str, kind: Kind) -> Result<ExperimentSpec> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    resolve(file, kind)
}

fn missing(table: &str, key: &str) -> HarnessError {
    HarnessError::Config(format!("missing key `{table}.{key}`"))
}

fn constraint(key: &str, value: impl std::fmt::Display, rule: &str) -> HarnessError {
    HarnessError::Config(format!("`{key}` = {value} violates {rule}"))
}

fn core_constraint(key: &str, err: kinetics_core::Error) -> HarnessError {
    match err {
        kinetics_core::Error::InvalidParameter { value, constraint: c, .. } => constraint(key, value, c),
        other => HarnessError::Config(format!("`{key}`: {other}")),
    }
}

fn check_e(key: &str, e: f64) -> Result<()> {
    Restitution::new(e).map(|_| ()).map_err(|err| core_constraint(key, err))
}

fn check_gamma(key: &str, g: f64) -> Result<()> {
    KineticKernel::new(g).map(|_| ()).map_err(|err| core_constraint(key, err))
}

fn check_positive(key: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(constraint(key, x, "a positive finite value"))
    }
}

fn check_count(key: &str, x: usize, min: usize) -> Result<()> {
    if x >= min {
        Ok(())
    } else {
        Err(constraint(key, x, &format!("a count of at least {min}")))
    }
}

fn check_initial(key: &str, init: &InitialTable) -> Result<()> {
    init.law().validate().map_err(|err| core_constraint(key, err))
}

/// Applies defaults for the kernel table; `e` and `gamma` are required when
/// `need_core` is set.
fn resolve_kernel(k: &KernelTable, need_core: bool) -> Result<KernelParams> {
    let e = match (k.e, need_core) {
        (Some(e), _) => e,
        (None, true) => return Err(missing("kernel", "e")),
        (None, false) => 1.0,
    };
    let gamma = match (k.gamma, need_core) {
        (Some(g), _) => g,
        (None, true) => return Err(missing("kernel", "gamma")),
        (None, false) => 1.0,
    };
    let p = KernelParams {
        e,
        gamma,
        s: k.s.unwrap_or(DEFAULT_S),
        strength: k.strength.unwrap_or(DEFAULT_STRENGTH),
        n: k.n.unwrap_or(DEFAULT_N),
    };
    check_e("kernel.e", p.e)?;
    check_gamma("kernel.gamma", p.gamma)?;
    AngularKernel::new(p.s, p.strength).map_err(|err| core_constraint("kernel.s", err))?;
    if p.n == 0 {
        return Err(constraint("kernel.n", 0, "n ≥ 1 (cutoff level)"));
    }
    Ok(p)
}

pub fn resolve(file: ConfigFile, kind: Kind) -> Result<ExperimentSpec> {
    let seed = file.seed.unwrap_or(DEFAULT_SEED);
    if file.workers == Some(0) {
        return Err(constraint("workers", 0, "a count of at least 1"));
    }
    let need_core = matches!(kind, Kind::Simulate | Kind::MomentCreation | Kind::FourierResidual);
    let kernel = resolve_kernel(&file.kernel, need_core)?;
    let params = match kind {
        Kind::KernelReport => {
            let p = file.kernels.unwrap_or_default();
            check_count("kernels.profile_points", p.profile_points, 2)?;
            for &a in &p.alpha0 {
                check_positive("kernels.alpha0", a)?;
            }
            Params::KernelReport(p)
        }
        Kind::PovznerSweep => {
            let p = file.povzner.unwrap_or_default();
            for &e in &p.e_values {
                check_e("povzner.e_values", e)?;
            }
            for &k in &p.kappa_values {
                check_positive("povzner.kappa_values", k)?;
            }
            for &m in &p.magnitudes {
                if !(m >= 0.0 && m.is_finite()) {
                    return Err(constraint("povzner.magnitudes", m, "a nonnegative finite speed"));
                }
            }
            if p.n_values.contains(&0) {
                return Err(constraint("povzner.n_values", 0, "n ≥ 1 (cutoff level)"));
            }
            check_count("povzner.directions", p.directions, 2)?;
            if p.e_values.is_empty() || p.kappa_values.is_empty() || p.n_values.is_empty() || p.weights.is_empty() || p.magnitudes.is_empty() {
                return Err(HarnessError::Config("povzner: every sweep list must be nonempty".into()));
            }
            check_positive("povzner.g_tol", p.g_tol)?;
            Params::PovznerSweep(p)
        }
        Kind::Simulate => {
            let mut p = file.simulate.ok_or_else(|| missing("simulate", "particles"))?;
            check_count("simulate.particles", p.particles, 2)?;
            if !(p.t_final >= 0.0 && p.t_final.is_finite()) {
                return Err(constraint("simulate.t_final", p.t_final, "t_final ≥ 0"));
            }
            check_initial("simulate.initial", &p.initial)?;
            let cadence = p.cadence.unwrap_or(if p.t_final > 0.0 { p.t_final / 100.0 } else { 1.0 });
            check_positive("simulate.cadence", cadence)?;
            p.cadence = Some(cadence);
            if !(p.dt_fraction > 0.0 && p.dt_fraction <= 1.0) {
                return Err(constraint("simulate.dt_fraction", p.dt_fraction, "dt_fraction ∈ (0,1]"));
            }
            Params::Simulate(p)
        }
        Kind::MomentCreation => {
            let p = file.moment_creation.unwrap_or_default();
            check_initial("moment_creation.q", &InitialTable::PowerTail { q: p.q, sampling: p.sampling })?;
            if p.ladder.len() < 2 {
                return Err(constraint("moment_creation.ladder", p.ladder.len(), "at least two ensemble sizes"));
            }
            for &n in &p.ladder {
                check_count("moment_creation.ladder", n, 2)?;
            }
            check_positive("moment_creation.t0", p.t0)?;
            if !(p.t_final > p.t0) {
                return Err(constraint("moment_creation.t_final", p.t_final, "t_final > t0"));
            }
            check_positive("moment_creation.cadence", p.cadence)?;
            if p.orders.is_empty() {
                return Err(HarnessError::Config("moment_creation.orders must be nonempty".into()));
            }
            Params::MomentCreation(p)
        }
        Kind::FourierResidual => {
            let p = file.fourier.unwrap_or_default();
            check_positive("fourier.temperature", p.temperature)?;
            check_count("fourier.particles", p.particles, 2)?;
            check_count("fourier.replicas", p.replicas, 2)?;
            check_positive("fourier.delta", p.delta)?;
            check_count("fourier.batches", p.batches, 2)?;
            check_count("fourier.cos_strata", p.cos_strata, 1)?;
            check_count("fourier.phi_strata", p.phi_strata, 1)?;
            check_count("fourier.sweeps", p.sweeps, 1)?;
            check_count("fourier.decay_points", p.decay_points, 2)?;
            check_count("fourier.equicontinuity_samples", p.equicontinuity_samples, 2)?;
            check_positive("fourier.rhs_tolerance", p.rhs_tolerance)?;
            check_positive("fourier.equicontinuity_t_final", p.equicontinuity_t_final)?;
            for &g in &p.decay_gammas {
                check_gamma("fourier.decay_gammas", g)?;
            }
            if p.decay_ns.contains(&0) || p.equicontinuity_ns.contains(&0) {
                return Err(constraint("fourier.decay_ns", 0, "n ≥ 1 (cutoff level)"));
            }
            Params::FourierResidual(p)
        }
    };
    Ok(ExperimentSpec { kind, seed, kernel, params, workers: file.workers })
}

impl ExperimentSpec {
    /// Canonical JSON of everything that determines the data artifacts.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simulate_gets_defaults() {
        let s = parse_config_str("[kernel]\ne = 0.5\ngamma = 1.0\n[simulate]\nparticles = 1000\nt_final = 1.0\n", Kind::Simulate).unwrap();
        assert_eq!(s.kernel.s, DEFAULT_S);
        assert_eq!(s.kernel.strength, DEFAULT_STRENGTH);
        assert_eq!(s.kernel.n, DEFAULT_N);
        assert_eq!(s.seed, DEFAULT_SEED);
        let Params::Simulate(p) = s.params else { panic!() };
        assert_eq!(p.cadence, Some(0.01));
        assert_eq!(p.dt_fraction, 1.0);
        assert_eq!(p.initial, InitialTable::Maxwellian { temperature: 1.0 });
    }

    #[test]
    fn restitution_above_one_is_rejected() {
        let err = parse_config_str("[kernel]\ne = 1.2\ngamma = 1.0\n[simulate]\nparticles = 10\nt_final = 1.0\n", Kind::Simulate).unwrap_err();
        assert!(err.to_string().contains("e ∈ (0,1]"), "{err}");
    }

    #[test]
    fn soft_potential_is_rejected() {
        let err = parse_config_str("[kernel]\ne = 1.0\ngamma = 0.0\n[simulate]\nparticles = 10\nt_final = 1.0\n", Kind::Simulate).unwrap_err();
        assert!(err.to_string().contains("(0,2]") && err.to_string().contains("hard-potential"), "{err}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_config_str("[kernel]\ne = 1.0\ngamma = 1.0\nbogus = 3\n", Kind::KernelReport).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = parse_config_str(
            "[kernel]\ne = 1.0\ngamma = 1.0\n[simulate]\nparticles = 10\nt_final = 1.0\ninitial = { law = \"maxwellian\", temp = 2.0 }\n",
            Kind::Simulate,
        )
        .unwrap_err();
        assert!(err.to_string().contains("temp"), "{err}");
    }

    #[test]
    fn light_tail_is_rejected() {
        let err = parse_config_str("[kernel]\ne = 0.5\ngamma = 1.0\n[moment_creation]\nq = 5.0\n", Kind::MomentCreation).unwrap_err();
        assert!(err.to_string().contains("q > 5"), "{err}");
    }

    #[test]
    fn missing_core_keys() {
        let err = parse_config_str("[simulate]\nparticles = 10\nt_final = 1.0\n", Kind::Simulate).unwrap_err();
        assert!(err.to_string().contains("kernel.e"), "{err}");
        assert!(parse_config_str("", Kind::PovznerSweep).is_ok());
    }

    #[test]
    fn hash_input_is_stable() {
        let text = "[kernel]\ne = 0.5\ngamma = 1.0\n[simulate]\nparticles = 1000\nt_final = 1.0\n";
        let a = parse_config_str(text, Kind::Simulate).unwrap().canonical_json();
        let b = parse_config_str(text, Kind::Simulate).unwrap().canonical_json();
        assert_eq!(a, b);
    }
}
