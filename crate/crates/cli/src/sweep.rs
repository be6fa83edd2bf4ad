//! Utilization sweeps: analytical, CTMC and simulated blocking per policy.

use caclab_core::markov::{
    blocking_from_recurrence, build_ctmc, ctmc_blocking, ctmc_steady_state, erlang_b, solve_recurrence, ClassScope,
};
use caclab_core::policies::{AdmissionPolicy, FirstFit};
use caclab_core::rrbfn::{fit, generate_training_set, FncacController, RrbfnParams, TrainReport};
use caclab_core::simengine::{proportion, run, RunLength, SimReport};
use caclab_core::traffic::{ClassId, SystemConfig, UtilizationRate};
use caclab_core::CacError;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, PolicyKind};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub utilization: f64,
    pub policy: PolicyKind,
    pub class_scope: ClassScope,
    /// Reduced-recurrence figure (Erlang-B for single-class systems).
    pub analytical: f64,
    /// Exact CTMC figure; absent for FNCAC and beyond the state cap.
    pub ctmc: Option<f64>,
    pub empirical: f64,
    pub half_width: f64,
    pub seed: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of grid point `g`; every policy sees the same arrival stream there.
pub fn grid_seed(base: u64, g: usize) -> u64 {
    splitmix64(base ^ splitmix64(g as u64))
}

/// Seed of replication `r` at a grid point.
pub fn replication_seed(grid: u64, r: u32) -> u64 {
    splitmix64(grid.wrapping_add(r as u64 + 1))
}

/// Generates teacher-labelled samples from the configured system and trains
/// the controller network.
pub fn train_fncac(cfg: &ExperimentConfig) -> Result<TrainReport, CliError> {
    let system = cfg.system_config();
    let teacher = cfg.threshold_policy();
    let nn = &cfg.rrbfn;
    let set = generate_training_set(&system, &teacher, nn.training_size, nn.cost_bias, nn.seed)
        .map_err(CliError::model("generating training set"))?;
    let examples = set.examples(nn.input_width).map_err(CliError::model("building network inputs"))?;
    fit(&examples, nn.input_width, nn.hidden_width, &cfg.init_options(), &cfg.train_options())
        .map_err(CliError::model("training the controller network"))
}

/// Trained parameters from `rrbfn.params_file`, or a fresh training run.
pub fn fncac_params(cfg: &ExperimentConfig) -> Result<RrbfnParams, CliError> {
    match &cfg.rrbfn.params_file {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
            caclab_core::rrbfn::read_params(&text).map_err(CliError::model(format!("loading {}", path.display())))
        }
        None => Ok(train_fncac(cfg)?.params),
    }
}

pub(crate) fn analytical(system: &SystemConfig, a: f64, offered: &[ClassId]) -> Result<[f64; 4], CliError> {
    let u = UtilizationRate(a);
    if let [class] = offered {
        let servers = system.total_channels / class.channels_required();
        let b = erlang_b(servers, u);
        return Ok([b; 4]);
    }
    let sol = solve_recurrence(u, system.total_channels as usize).map_err(CliError::model("recurrence"))?;
    let r = blocking_from_recurrence(&sol);
    Ok(ClassScope::ALL.map(|s| r.get(s)))
}

pub(crate) fn ctmc_column(
    system: &SystemConfig,
    policy: &dyn AdmissionPolicy,
    cap: usize,
) -> Result<Option<[f64; 4]>, CliError> {
    let solved = build_ctmc(system, policy, cap).and_then(|m| ctmc_steady_state(&m).map(|pi| ctmc_blocking(&m, &pi)));
    match solved {
        Ok(r) => Ok(Some(ClassScope::ALL.map(|s| r.get(s)))),
        Err(CacError::ResourceLimit { .. }) => Ok(None),
        Err(e) => Err(CliError::model("CTMC solve")(e)),
    }
}

fn simulate_one(
    cfg: &ExperimentConfig,
    system: &SystemConfig,
    policy: PolicyKind,
    fncac: Option<&RrbfnParams>,
    seed: u64,
) -> Result<SimReport, CliError> {
    let length =
        RunLength::new(cfg.sweep.warmup_events, cfg.sweep.horizon_events).map_err(CliError::model("run length"))?;
    let result = match policy {
        PolicyKind::Conventional => run(system, &mut FirstFit::new(&cfg.threshold_policy()), length, seed),
        PolicyKind::Fuzzy => run(system, &mut FirstFit::new(&cfg.fuzzy_controller()), length, seed),
        PolicyKind::Fncac => {
            let params = fncac.ok_or_else(|| CliError::Config("fncac selected but no trained parameters".into()))?;
            let mut ctl = FncacController::new(params, system.rat_count(), cfg.rrbfn.cost_bias)
                .map_err(CliError::model("fncac controller"))?;
            run(system, &mut ctl, length, seed)
        }
    };
    result.map_err(CliError::model(format!("simulating {}", policy.name())))
}

/// Sweeps the configured grid with only `offered` classes carrying traffic.
/// Rows cover the aggregate plus each offered class, sorted by
/// (policy, class scope, utilization).
pub fn sweep_offered(
    cfg: &ExperimentConfig,
    policies: &[PolicyKind],
    offered: &[ClassId],
    fncac: Option<&RrbfnParams>,
) -> Result<Vec<SweepRow>, CliError> {
    let base = cfg.system_config();
    let grid = cfg.grid();
    let systems = grid
        .iter()
        .map(|&a| base.at_utilization(UtilizationRate(a), offered).map_err(CliError::model("loading the system")))
        .collect::<Result<Vec<_>, _>>()?;
    let scopes: Vec<ClassScope> = ClassScope::ALL
        .into_iter()
        .filter(|s| match s {
            ClassScope::Aggregate => true,
            ClassScope::Class(c) => offered.contains(c),
        })
        .collect();

    let reps = cfg.sweep.replications;
    let jobs: Vec<(usize, PolicyKind, u32)> =
        (0..grid.len()).flat_map(|g| policies.iter().flat_map(move |&p| (0..reps).map(move |r| (g, p, r)))).collect();
    let reports = jobs
        .par_iter()
        .map(|&(g, p, r)| {
            let seed = replication_seed(grid_seed(base.rng_seed, g), r);
            simulate_one(cfg, &systems[g], p, fncac, seed)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let oracles = (0..grid.len())
        .into_par_iter()
        .map(|g| -> Result<_, CliError> {
            let analytic = analytical(&systems[g], grid[g], offered)?;
            let cap = cfg.sweep.ctmc_state_cap;
            let wanted = |p| policies.contains(&p);
            let conventional = if wanted(PolicyKind::Conventional) {
                ctmc_column(&systems[g], &cfg.threshold_policy(), cap)?
            } else {
                None
            };
            let fuzzy =
                if wanted(PolicyKind::Fuzzy) { ctmc_column(&systems[g], &cfg.fuzzy_controller(), cap)? } else { None };
            Ok((analytic, conventional, fuzzy))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(grid.len() * policies.len() * scopes.len());
    for (chunk, &(g, policy, _)) in reports.chunks(reps as usize).zip(jobs.iter().step_by(reps as usize)) {
        let (analytic, conventional, fuzzy) = &oracles[g];
        let ctmc = match policy {
            PolicyKind::Conventional => *conventional,
            PolicyKind::Fuzzy => *fuzzy,
            PolicyKind::Fncac => None,
        };
        for &scope in &scopes {
            let (blocked, offered_calls) = chunk.iter().fold((0u64, 0u64), |(b, o), rep| match scope {
                ClassScope::Aggregate => (b + rep.total_blocked(), o + rep.total_offered()),
                ClassScope::Class(c) => (b + rep.blocked_per_class[c.index()], o + rep.offered_per_class[c.index()]),
            });
            let (empirical, half_width) = proportion(blocked, offered_calls);
            let k = ClassScope::ALL.iter().position(|s| *s == scope).expect("known scope");
            rows.push(SweepRow {
                utilization: grid[g],
                policy,
                class_scope: scope,
                analytical: analytic[k],
                ctmc: ctmc.map(|c| c[k]),
                empirical,
                half_width,
                seed: grid_seed(base.rng_seed, g),
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.policy, a.class_scope).cmp(&(b.policy, b.class_scope)).then(a.utilization.total_cmp(&b.utilization))
    });
    Ok(rows)
}

/// Full three-class sweep over the selected policies, training FNCAC first
/// when it is selected and no parameter file is configured.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let params = if cfg.policies.contains(&PolicyKind::Fncac) { Some(fncac_params(cfg)?) } else { None };
    sweep_offered(cfg, &cfg.policies, &ClassId::ALL, params.as_ref())
}
