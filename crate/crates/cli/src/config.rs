//! Experiment configuration: TOML sections of `key = value` lines.
//!
//! Every key is optional. Missing keys take the documented defaults and are
//! listed in [`LoadedConfig::defaults_applied`] so outputs can record them.

use std::path::{Path, PathBuf};

use caclab_core::policies::{FuzzyController, FuzzyOutput, ThresholdPolicy, TriangularSet};
use caclab_core::rrbfn::{InitOptions, TrainOptions, DEFAULT_TRAINING_SIZE};
use caclab_core::traffic::{ClassId, SystemConfig, ThresholdSet, TrafficClass};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Conventional,
    Fuzzy,
    Fncac,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Conventional, PolicyKind::Fuzzy, PolicyKind::Fncac];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Conventional => "conventional",
            PolicyKind::Fuzzy => "fuzzy",
            PolicyKind::Fncac => "fncac",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s.trim())
    }

    /// Comma-separated list, e.g. `conventional,fncac`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>, CliError> {
        s.split(',')
            .map(|p| PolicyKind::parse(p).ok_or_else(|| CliError::Config(format!("unknown policy {:?}", p.trim()))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSection {
    pub channels: u32,
    pub rats: Vec<u32>,
    pub arrival_rates: [f64; 3],
    pub service_rates: [f64; 3],
    pub thresholds: [u32; 3],
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub replications: u32,
    pub horizon_events: u64,
    pub warmup_events: u64,
    pub ctmc_state_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzySection {
    pub accept_threshold: f64,
    pub capacity_sets: [[f64; 3]; 3],
    pub demand_sets: [[f64; 3]; 3],
    pub rules: [[FuzzyOutput; 3]; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrbfnSection {
    pub input_width: usize,
    pub hidden_width: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub training_size: usize,
    pub cost_bias: f64,
    pub recurrent_std: f64,
    pub output_weight_std: f64,
    pub seed: u64,
    /// Trained parameters to load instead of training.
    pub params_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub policies: Vec<PolicyKind>,
    pub sweep: SweepSection,
    pub fuzzy: FuzzySection,
    pub rrbfn: RrbfnSection,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    /// Dotted keys filled from defaults, e.g. `sweep.step`.
    pub defaults_applied: Vec<String>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub policies: Option<Vec<PolicyKind>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Rates {
    Scalar(f64),
    PerClass([f64; 3]),
}

impl Rates {
    fn per_class(self) -> [f64; 3] {
        match self {
            Rates::Scalar(v) => [v; 3],
            Rates::PerClass(v) => v,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    system: Option<RawSystem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    policies: Option<RawPolicies>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fuzzy: Option<RawFuzzy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rrbfn: Option<RawRrbfn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    channels: Option<u32>,
    rats: Option<Vec<u32>>,
    arrival_rate: Option<Rates>,
    service_rate: Option<Rates>,
    thresholds: Option<[u32; 3]>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicies {
    selected: Option<Vec<PolicyKind>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
    replications: Option<u32>,
    horizon_events: Option<u64>,
    warmup_events: Option<u64>,
    ctmc_state_cap: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFuzzy {
    accept_threshold: Option<f64>,
    capacity_sets: Option<[[f64; 3]; 3]>,
    demand_sets: Option<[[f64; 3]; 3]>,
    /// Rows: capacity low/medium/high; columns: demand small/medium/large.
    rules: Option<[[String; 3]; 3]>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRrbfn {
    input_width: Option<usize>,
    hidden_width: Option<usize>,
    epochs: Option<usize>,
    learning_rate: Option<f64>,
    batch_size: Option<usize>,
    training_size: Option<usize>,
    cost_bias: Option<f64>,
    recurrent_std: Option<f64>,
    output_weight_std: Option<f64>,
    seed: Option<u64>,
    params_file: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

pub const DEFAULT_CHANNELS: u32 = 30;
pub const DEFAULT_SEED: u64 = 1;

fn rule_name(o: FuzzyOutput) -> &'static str {
    match o {
        FuzzyOutput::Reject => "reject",
        FuzzyOutput::WeakAccept => "weak",
        FuzzyOutput::StrongAccept => "strong",
    }
}

fn parse_rule(s: &str) -> Option<FuzzyOutput> {
    match s {
        "reject" => Some(FuzzyOutput::Reject),
        "weak" => Some(FuzzyOutput::WeakAccept),
        "strong" => Some(FuzzyOutput::StrongAccept),
        _ => None,
    }
}

fn set_triple(s: &TriangularSet) -> [f64; 3] {
    [s.left, s.peak, s.right]
}

/// 1-based line holding `key` inside `[section]`, if the key is written out.
fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim();
        } else if current == section {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Resolver<'a> {
    source: &'a str,
    defaults: Vec<String>,
}

impl Resolver<'_> {
    fn take<T>(&mut self, section: &str, key: &str, value: Option<T>, default: impl FnOnce() -> T) -> T {
        value.unwrap_or_else(|| {
            self.defaults.push(format!("{section}.{key}"));
            default()
        })
    }

    fn fail(&self, section: &str, key: &str, reason: impl std::fmt::Display) -> CliError {
        let at = match locate(self.source, section, key) {
            Some(line) => format!(" (line {line})"),
            None => " (default)".to_string(),
        };
        CliError::Config(format!("[{section}] {key}{at}: {reason}"))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<LoadedConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    /// Parses config text; an empty string yields the full default configuration.
    pub fn parse(text: &str, overrides: &Overrides) -> Result<LoadedConfig, CliError> {
        let mut raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(seed) = overrides.seed {
            raw.system.get_or_insert_with(Default::default).seed = Some(seed);
        }
        if let Some(dir) = &overrides.out {
            raw.output.get_or_insert_with(Default::default).dir = Some(dir.clone());
        }
        if let Some(list) = &overrides.policies {
            raw.policies.get_or_insert_with(Default::default).selected = Some(list.clone());
        }
        let mut r = Resolver { source: text, defaults: Vec::new() };
        let config = resolve(raw, &mut r)?;
        Ok(LoadedConfig { config, defaults_applied: r.defaults })
    }

    /// Fully explicit TOML for this configuration; reparses to an equal value.
    pub fn to_toml(&self) -> String {
        let s = &self.system;
        let raw = RawConfig {
            system: Some(RawSystem {
                channels: Some(s.channels),
                rats: Some(s.rats.clone()),
                arrival_rate: Some(Rates::PerClass(s.arrival_rates)),
                service_rate: Some(Rates::PerClass(s.service_rates)),
                thresholds: Some(s.thresholds),
                seed: Some(s.seed),
            }),
            policies: Some(RawPolicies { selected: Some(self.policies.clone()) }),
            sweep: Some(RawSweep {
                start: Some(self.sweep.start),
                stop: Some(self.sweep.stop),
                step: Some(self.sweep.step),
                replications: Some(self.sweep.replications),
                horizon_events: Some(self.sweep.horizon_events),
                warmup_events: Some(self.sweep.warmup_events),
                ctmc_state_cap: Some(self.sweep.ctmc_state_cap),
            }),
            fuzzy: Some(RawFuzzy {
                accept_threshold: Some(self.fuzzy.accept_threshold),
                capacity_sets: Some(self.fuzzy.capacity_sets),
                demand_sets: Some(self.fuzzy.demand_sets),
                rules: Some(self.fuzzy.rules.map(|row| row.map(|o| rule_name(o).to_string()))),
            }),
            rrbfn: Some(RawRrbfn {
                input_width: Some(self.rrbfn.input_width),
                hidden_width: Some(self.rrbfn.hidden_width),
                epochs: Some(self.rrbfn.epochs),
                learning_rate: Some(self.rrbfn.learning_rate),
                batch_size: Some(self.rrbfn.batch_size),
                training_size: Some(self.rrbfn.training_size),
                cost_bias: Some(self.rrbfn.cost_bias),
                recurrent_std: Some(self.rrbfn.recurrent_std),
                output_weight_std: Some(self.rrbfn.output_weight_std),
                seed: Some(self.rrbfn.seed),
                params_file: self.rrbfn.params_file.clone(),
            }),
            output: Some(RawOutput { dir: Some(self.output_dir.clone()) }),
        };
        toml::to_string(&raw).expect("config serializes")
    }

    /// SHA-256 of [`to_toml`](Self::to_toml), lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn system_config(&self) -> SystemConfig {
        build_system(&self.system).expect("validated at parse time")
    }

    pub fn threshold_policy(&self) -> ThresholdPolicy {
        let [t1, t2, t3] = self.system.thresholds;
        ThresholdPolicy::new(ThresholdSet::new(t1, t2, t3).expect("validated at parse time"))
    }

    pub fn fuzzy_controller(&self) -> FuzzyController {
        build_fuzzy(&self.fuzzy).expect("validated at parse time")
    }

    /// Utilization grid points `start, start+step, …` up to `stop` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let s = &self.sweep;
        let n = ((s.stop - s.start) / s.step + 1e-9).floor() as usize + 1;
        // rounding keeps printed grid values free of accumulated binary noise
        (0..n).map(|k| ((s.start + k as f64 * s.step) * 1e12).round() / 1e12).collect()
    }

    pub fn init_options(&self) -> InitOptions {
        InitOptions { recurrent_std: self.rrbfn.recurrent_std, output_weight_std: self.rrbfn.output_weight_std }
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            epochs: self.rrbfn.epochs,
            learning_rate: self.rrbfn.learning_rate,
            batch_size: self.rrbfn.batch_size,
            seed: self.rrbfn.seed,
        }
    }
}

fn build_system(s: &SystemSection) -> caclab_core::Result<SystemConfig> {
    let mut classes = [TrafficClass::new(ClassId::Type1Conversational, 0.0, 1.0)?; 3];
    for id in ClassId::ALL {
        classes[id.index()] = TrafficClass::new(id, s.arrival_rates[id.index()], s.service_rates[id.index()])?;
    }
    let [t1, t2, t3] = s.thresholds;
    SystemConfig::with_rats(s.rats.clone(), classes, Some(ThresholdSet::new(t1, t2, t3)?), s.seed)
}

fn build_fuzzy(f: &FuzzySection) -> caclab_core::Result<FuzzyController> {
    let sets = |v: &[[f64; 3]; 3]| -> caclab_core::Result<[TriangularSet; 3]> {
        Ok([
            TriangularSet::new(v[0][0], v[0][1], v[0][2])?,
            TriangularSet::new(v[1][0], v[1][1], v[1][2])?,
            TriangularSet::new(v[2][0], v[2][1], v[2][2])?,
        ])
    };
    FuzzyController::new(sets(&f.capacity_sets)?, sets(&f.demand_sets)?, f.rules, f.accept_threshold)
}

fn resolve(raw: RawConfig, r: &mut Resolver) -> Result<ExperimentConfig, CliError> {
    let sys = raw.system.unwrap_or_default();
    let (channels, rats) = match (sys.channels, sys.rats) {
        (Some(n), Some(rats)) => {
            if rats.iter().sum::<u32>() != n {
                return Err(r.fail(
                    "system",
                    "rats",
                    format!("sub-pools sum to {} but channels = {n}", rats.iter().sum::<u32>()),
                ));
            }
            (n, rats)
        }
        (None, Some(rats)) => (rats.iter().sum(), rats),
        (n, None) => {
            let n = r.take("system", "channels", n, || DEFAULT_CHANNELS);
            r.defaults.push("system.rats".into());
            (n, vec![n])
        }
    };
    if channels == 0 {
        return Err(r.fail("system", "channels", "must be positive"));
    }
    let arrival_rates = r.take("system", "arrival_rate", sys.arrival_rate, || Rates::Scalar(1.0)).per_class();
    let service_rates = r.take("system", "service_rate", sys.service_rate, || Rates::Scalar(1.0)).per_class();
    if arrival_rates.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(r.fail("system", "arrival_rate", "rates must be finite and >= 0"));
    }
    if service_rates.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(r.fail("system", "service_rate", "rates must be finite and > 0"));
    }
    let thresholds = match sys.thresholds {
        Some(t) => t,
        None => {
            r.defaults.push("system.thresholds".into());
            let t = ThresholdSet::scaled_default(channels).map_err(|e| r.fail("system", "thresholds", e))?;
            [t.t1, t.t2, t.t3]
        }
    };
    let seed = r.take("system", "seed", sys.seed, || DEFAULT_SEED);
    let system = SystemSection { channels, rats, arrival_rates, service_rates, thresholds, seed };
    build_system(&system).map_err(|e| {
        let key = if e.to_string().contains("threshold") { "thresholds" } else { "channels" };
        r.fail("system", key, e)
    })?;

    let policies = r.take("policies", "selected", raw.policies.and_then(|p| p.selected), || PolicyKind::ALL.to_vec());
    if policies.is_empty() {
        return Err(r.fail("policies", "selected", "select at least one policy"));
    }
    let mut unique = policies.clone();
    unique.sort();
    unique.dedup();
    if unique.len() != policies.len() {
        return Err(r.fail("policies", "selected", "policies listed more than once"));
    }

    let sw = raw.sweep.unwrap_or_default();
    let start = r.take("sweep", "start", sw.start, || 0.1);
    let stop = r.take("sweep", "stop", sw.stop, || 1.0);
    let step = r.take("sweep", "step", sw.step, || 0.1);
    if !(start >= 0.0 && start.is_finite()) {
        return Err(r.fail("sweep", "start", "must be >= 0"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(r.fail("sweep", "step", "must be > 0"));
    }
    if !(stop >= start && stop.is_finite()) {
        return Err(r.fail("sweep", "stop", "must be >= start"));
    }
    let replications = r.take("sweep", "replications", sw.replications, || 5);
    if replications == 0 {
        return Err(r.fail("sweep", "replications", "must be >= 1"));
    }
    let horizon_events = r.take("sweep", "horizon_events", sw.horizon_events, || 100_000);
    let warmup_events = r.take("sweep", "warmup_events", sw.warmup_events, || horizon_events / 10);
    if horizon_events <= warmup_events {
        return Err(r.fail("sweep", "horizon_events", format!("must exceed warmup_events = {warmup_events}")));
    }
    let ctmc_state_cap =
        r.take("sweep", "ctmc_state_cap", sw.ctmc_state_cap, || caclab_core::markov::DEFAULT_STATE_CAP);
    let sweep = SweepSection { start, stop, step, replications, horizon_events, warmup_events, ctmc_state_cap };

    let fz = raw.fuzzy.unwrap_or_default();
    let defaults = FuzzyController::default_sets().map(|s| set_triple(&s));
    let rules = match fz.rules {
        Some(names) => {
            let mut rules = FuzzyController::default_rule_table();
            for (i, row) in names.iter().enumerate() {
                for (j, name) in row.iter().enumerate() {
                    rules[i][j] = parse_rule(name)
                        .ok_or_else(|| r.fail("fuzzy", "rules", format!("{name:?} is not reject, weak or strong")))?;
                }
            }
            rules
        }
        None => r.take("fuzzy", "rules", None, FuzzyController::default_rule_table),
    };
    let fuzzy = FuzzySection {
        accept_threshold: r.take("fuzzy", "accept_threshold", fz.accept_threshold, || 0.5),
        capacity_sets: r.take("fuzzy", "capacity_sets", fz.capacity_sets, || defaults),
        demand_sets: r.take("fuzzy", "demand_sets", fz.demand_sets, || defaults),
        rules,
    };
    build_fuzzy(&fuzzy).map_err(|e| r.fail("fuzzy", "capacity_sets", e))?;

    let nn = raw.rrbfn.unwrap_or_default();
    let rrbfn = RrbfnSection {
        input_width: r.take("rrbfn", "input_width", nn.input_width, || 8),
        hidden_width: r.take("rrbfn", "hidden_width", nn.hidden_width, || 32),
        epochs: r.take("rrbfn", "epochs", nn.epochs, || 500),
        learning_rate: r.take("rrbfn", "learning_rate", nn.learning_rate, || 0.05),
        batch_size: r.take("rrbfn", "batch_size", nn.batch_size, || 8),
        training_size: r.take("rrbfn", "training_size", nn.training_size, || DEFAULT_TRAINING_SIZE),
        cost_bias: r.take("rrbfn", "cost_bias", nn.cost_bias, || 1.0),
        recurrent_std: r.take("rrbfn", "recurrent_std", nn.recurrent_std, || 1.0),
        output_weight_std: r.take("rrbfn", "output_weight_std", nn.output_weight_std, || 0.1),
        seed: r.take("rrbfn", "seed", nn.seed, || seed),
        params_file: nn.params_file,
    };
    let needed = caclab_core::rrbfn::FncacFeatures::natural_len(system.rats.len());
    if rrbfn.input_width < needed {
        return Err(r.fail(
            "rrbfn",
            "input_width",
            format!("{} RATs need at least {needed} input neurons", system.rats.len()),
        ));
    }
    if rrbfn.hidden_width == 0 {
        return Err(r.fail("rrbfn", "hidden_width", "must be positive"));
    }
    if !(rrbfn.learning_rate > 0.0 && rrbfn.learning_rate.is_finite()) {
        return Err(r.fail("rrbfn", "learning_rate", "must be > 0"));
    }
    if rrbfn.batch_size == 0 {
        return Err(r.fail("rrbfn", "batch_size", "must be positive"));
    }
    if rrbfn.training_size < 10 {
        return Err(r.fail("rrbfn", "training_size", "must be >= 10"));
    }
    if !(rrbfn.recurrent_std >= 0.0 && rrbfn.recurrent_std.is_finite()) {
        return Err(r.fail("rrbfn", "recurrent_std", "must be >= 0"));
    }
    if !(rrbfn.output_weight_std >= 0.0 && rrbfn.output_weight_std.is_finite()) {
        return Err(r.fail("rrbfn", "output_weight_std", "must be >= 0"));
    }

    let output_dir = r.take("output", "dir", raw.output.and_then(|o| o.dir), || PathBuf::from("out"));
    Ok(ExperimentConfig { system, policies, sweep, fuzzy, rrbfn, output_dir })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<LoadedConfig, CliError> {
        ExperimentConfig::parse(text, &Overrides::default())
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let loaded = parse("[system]\nchannels = 30\narrival_rate = 0.5\nservice_rate = 1.0\n").unwrap();
        let c = &loaded.config;
        assert_eq!(c.system.arrival_rates, [0.5; 3]);
        assert_eq!(c.system.thresholds, [5, 10, 15]);
        assert_eq!(c.system.rats, vec![30]);
        assert_eq!(c.policies, PolicyKind::ALL.to_vec());
        assert_eq!(c.grid().len(), 10);
        assert_eq!((c.sweep.replications, c.sweep.horizon_events, c.sweep.warmup_events), (5, 100_000, 10_000));
        assert_eq!((c.rrbfn.input_width, c.rrbfn.hidden_width, c.rrbfn.training_size), (8, 32, 1000));
        assert!(loaded.defaults_applied.contains(&"sweep.step".to_string()));
        assert!(!loaded.defaults_applied.contains(&"system.channels".to_string()));
    }

    #[test]
    fn zero_step_is_rejected_with_key_and_line() {
        let err = parse("[sweep]\nstart = 0.1\nstep = 0.0\n").unwrap_err().to_string();
        assert!(err.contains("step") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn constraint_violations() {
        assert!(parse("[sweep]\nstart = 0.5\nstop = 0.2\n").is_err());
        assert!(parse("[sweep]\nstart = -0.1\n").is_err());
        assert!(parse("[sweep]\nreplications = 0\n").is_err());
        assert!(parse("[sweep]\nhorizon_events = 10\nwarmup_events = 10\n").is_err());
        assert!(parse("[system]\nthresholds = [4, 2, 6]\n").is_err());
        assert!(parse("[system]\nchannels = 10\nrats = [4, 4]\n").is_err());
        assert!(parse("[system]\nservice_rate = 0.0\n").is_err());
        assert!(parse("[policies]\nselected = []\n").is_err());
        assert!(parse("[policies]\nselected = [\"fuzzy\", \"fuzzy\"]\n").is_err());
        assert!(parse("[rrbfn]\ninput_width = 5\n").is_err());
        assert!(parse("[fuzzy]\nrules = [[\"no\",\"reject\",\"reject\"],[\"weak\",\"weak\",\"reject\"],[\"strong\",\"strong\",\"strong\"]]\n").is_err());
    }

    #[test]
    fn unknown_keys_and_bad_syntax_name_the_line() {
        let err = parse("[sweep]\nstep = 0.1\nsteps = 3\n").unwrap_err().to_string();
        assert!(err.contains("steps") && err.contains("line 3"), "{err}");
        let err = parse("[system]\nchannels = = 3\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse("[mystery]\n").is_err());
    }

    #[test]
    fn overrides_win_over_the_file() {
        let o = Overrides { seed: Some(99), out: Some("elsewhere".into()), policies: Some(vec![PolicyKind::Fuzzy]) };
        let c = ExperimentConfig::parse("[system]\nseed = 3\n", &o).unwrap().config;
        assert_eq!(c.system.seed, 99);
        assert_eq!(c.rrbfn.seed, 99);
        assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
        assert_eq!(c.policies, vec![PolicyKind::Fuzzy]);
    }

    #[test]
    fn rats_imply_total_channels() {
        let c = parse("[system]\nrats = [10, 10, 10]\nthresholds = [1, 2, 3]\n").unwrap().config;
        assert_eq!(c.system.channels, 30);
        assert_eq!(c.system_config().rat_count(), 3);
    }

    #[test]
    fn grid_is_inclusive_and_clean() {
        let c = parse("[sweep]\nstart = 0.2\nstop = 1.0\nstep = 0.2\n").unwrap().config;
        assert_eq!(c.grid(), vec![0.2, 0.4, 0.6, 0.8, 1.0]);
        let c = parse("[sweep]\nstart = 0.3\nstop = 0.3\nstep = 0.1\n").unwrap().config;
        assert_eq!(c.grid(), vec![0.3]);
    }

    #[test]
    fn default_round_trip() {
        let c = parse("").unwrap().config;
        let again = parse(&c.to_toml()).unwrap();
        assert_eq!(again.config, c);
        assert!(again.defaults_applied.is_empty(), "{:?}", again.defaults_applied);
        assert_eq!(c.hash().len(), 64);
    }

    proptest! {
        #[test]
        fn emitted_config_reparses_identically(
            n in 6u32..60,
            lam in 0.0f64..3.0,
            start in 0.0f64..0.5,
            span in 0.0f64..1.0,
            step in 0.01f64..0.5,
            reps in 1u32..9,
            horizon in 100u64..1_000_000,
            seed in any::<u64>(),
            hidden in 1usize..64,
            lr in 1e-4f64..1.0,
        ) {
            let text = format!(
                "[system]\nchannels = {n}\narrival_rate = {lam:?}\nseed = {seed}\n\
                 [sweep]\nstart = {start:?}\nstop = {:?}\nstep = {step:?}\nreplications = {reps}\nhorizon_events = {horizon}\n\
                 [rrbfn]\nhidden_width = {hidden}\nlearning_rate = {lr:?}\n",
                start + span
            );
            let c = parse(&text).unwrap().config;
            prop_assert_eq!(parse(&c.to_toml()).unwrap().config, c);
        }
    }
}
