//! The command verbs. Each writes its files under the output directory and
//! returns the text to print.

use std::fmt::Write as _;
use std::path::PathBuf;

use caclab_core::markov::ClassScope;
use caclab_core::policies::FirstFit;
use caclab_core::rrbfn::{write_params, FncacController};
use caclab_core::simengine::{run, RunLength, SimReport};
use caclab_core::traffic::{ClassId, UtilizationRate};

use crate::config::{LoadedConfig, PolicyKind};
use crate::csv::{emit_csv, fmt10, metadata};
use crate::error::CliError;
use crate::sweep::{analytical, ctmc_column, fncac_params, sweep, sweep_offered, train_fncac, SweepRow};

pub const PARAMS_FILE: &str = "rrbfn_params.txt";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const ANALYSIS_FILE: &str = "analysis.csv";
pub const FIGURE_FILES: [&str; 5] = [
    "fig4_aggregate.csv",
    "fig5_fncac_classes.csv",
    "fig6_type1_only.csv",
    "fig7_type2_only.csv",
    "fig8_type3_only.csv",
];

pub struct Output {
    pub text: String,
    pub files: Vec<PathBuf>,
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Recurrence and CTMC blocking over the grid, no simulation.
pub fn analyze(loaded: &LoadedConfig) -> Result<Output, CliError> {
    let cfg = &loaded.config;
    let base = cfg.system_config();
    let mut csv = String::new();
    for line in metadata(loaded, &[]) {
        let _ = writeln!(csv, "# {line}");
    }
    csv.push_str("utilization,policy,class_scope,analytical,ctmc\n");
    let mut text = String::from("utilization policy        scope      analytical        ctmc\n");
    let rule_based: Vec<PolicyKind> = cfg.policies.iter().copied().filter(|p| *p != PolicyKind::Fncac).collect();
    for policy in &rule_based {
        for &a in &cfg.grid() {
            let system = base.at_utilization(UtilizationRate(a), &ClassId::ALL).map_err(CliError::model("system"))?;
            let analytic = analytical(&system, a, &ClassId::ALL)?;
            let ctmc = match policy {
                PolicyKind::Conventional => ctmc_column(&system, &cfg.threshold_policy(), cfg.sweep.ctmc_state_cap)?,
                _ => ctmc_column(&system, &cfg.fuzzy_controller(), cfg.sweep.ctmc_state_cap)?,
            };
            for (k, scope) in ClassScope::ALL.iter().enumerate() {
                let c = ctmc.map(|c| fmt10(c[k])).unwrap_or_default();
                let _ = writeln!(csv, "{},{},{},{},{c}", fmt10(a), policy.name(), scope.label(), fmt10(analytic[k]));
                let _ = writeln!(
                    text,
                    "{a:<11} {:<13} {:<10} {:<17} {c}",
                    policy.name(),
                    scope.label(),
                    fmt10(analytic[k])
                );
            }
        }
    }
    let path = cfg.output_dir.join(ANALYSIS_FILE);
    write_file(&path, &csv)?;
    Ok(Output { text, files: vec![path] })
}

fn describe(policy: PolicyKind, r: &SimReport) -> String {
    let mut s =
        format!("{}: aggregate {} ± {}", policy.name(), fmt10(r.aggregate_blocking), fmt10(r.aggregate_half_width_95));
    for c in ClassId::ALL {
        let i = c.index();
        let _ = write!(
            s,
            "; {} {}/{} = {} ± {}",
            c.label(),
            r.blocked_per_class[i],
            r.offered_per_class[i],
            fmt10(r.empirical_blocking_per_class[i]),
            fmt10(r.half_width_95[i])
        );
    }
    let _ = write!(s, "; peak occupancy {}", r.peak_occupancy);
    s
}

/// One run per selected policy at the configured arrival rates.
pub fn simulate(loaded: &LoadedConfig) -> Result<Output, CliError> {
    let cfg = &loaded.config;
    let system = cfg.system_config();
    let length =
        RunLength::new(cfg.sweep.warmup_events, cfg.sweep.horizon_events).map_err(CliError::model("run length"))?;
    let params = if cfg.policies.contains(&PolicyKind::Fncac) { Some(fncac_params(cfg)?) } else { None };
    let mut text =
        format!("seed {}, {} events, warmup {}\n", cfg.system.seed, length.horizon_events, length.warmup_events);
    for &policy in &cfg.policies {
        let report = match policy {
            PolicyKind::Conventional => {
                run(&system, &mut FirstFit::new(&cfg.threshold_policy()), length, cfg.system.seed)
            }
            PolicyKind::Fuzzy => run(&system, &mut FirstFit::new(&cfg.fuzzy_controller()), length, cfg.system.seed),
            PolicyKind::Fncac => {
                let p = params.as_ref().expect("trained above");
                let mut ctl = FncacController::new(p, system.rat_count(), cfg.rrbfn.cost_bias)
                    .map_err(CliError::model("fncac controller"))?;
                run(&system, &mut ctl, length, cfg.system.seed)
            }
        }
        .map_err(CliError::model(format!("simulating {}", policy.name())))?;
        text.push_str(&describe(policy, &report));
        text.push('\n');
    }
    Ok(Output { text, files: vec![] })
}

/// Trains the controller network on threshold-teacher labels and writes the
/// parameter file.
pub fn train(loaded: &LoadedConfig) -> Result<Output, CliError> {
    let cfg = &loaded.config;
    let report = train_fncac(cfg)?;
    let final_loss = report.heldout_loss.last().copied().unwrap_or(report.best_heldout_loss);
    let mut meta = metadata(loaded, &[]);
    meta.push(format!("teacher = conventional thresholds {:?}", cfg.system.thresholds));
    meta.push(format!("train/held-out = {}/{}", report.train_len, report.heldout_len));
    meta.push(format!("best_epoch = {}", report.best_epoch));
    meta.push(format!("heldout_accuracy = {}", report.heldout_accuracy));
    meta.push(format!("best_heldout_loss = {:e}", report.best_heldout_loss));
    let path = cfg.output_dir.join(PARAMS_FILE);
    write_file(&path, &write_params(&report.params, &meta))?;
    let text = format!(
        "held-out agreement with teacher: {:.4} ({} samples)\nbest held-out loss: {:.6e} (epoch {})\nfinal held-out loss: {:.6e}\nfinal training loss: {:.6e}\n",
        report.heldout_accuracy,
        report.heldout_len,
        report.best_heldout_loss,
        report.best_epoch,
        final_loss,
        report.train_loss.last().copied().unwrap_or(f64::NAN),
    );
    Ok(Output { text, files: vec![path] })
}

pub fn sweep_command(loaded: &LoadedConfig) -> Result<Output, CliError> {
    let cfg = &loaded.config;
    let rows = sweep(cfg)?;
    let path = cfg.output_dir.join(SWEEP_FILE);
    emit_csv(&rows, &path, &metadata(loaded, &[]))?;
    Ok(Output { text: format!("{} rows written to {}\n", rows.len(), path.display()), files: vec![path] })
}

/// The five figure files. All three policies are always run here; the
/// selection in the config does not apply.
pub fn figures(loaded: &LoadedConfig) -> Result<Output, CliError> {
    let cfg = &loaded.config;
    let params = fncac_params(cfg)?;
    let all = PolicyKind::ALL;
    let mixed = sweep_offered(cfg, &all, &ClassId::ALL, Some(&params))?;

    let fig4: Vec<SweepRow> = mixed.iter().filter(|r| r.class_scope == ClassScope::Aggregate).cloned().collect();
    let fig5: Vec<SweepRow> = mixed
        .iter()
        .filter(|r| r.policy == PolicyKind::Fncac && r.class_scope != ClassScope::Aggregate)
        .cloned()
        .collect();
    let mut sets = vec![
        (FIGURE_FILES[0], fig4, "aggregate blocking, three policies"),
        (FIGURE_FILES[1], fig5, "per-class blocking under fncac"),
    ];
    for (k, class) in ClassId::ALL.into_iter().enumerate() {
        let rows: Vec<SweepRow> = sweep_offered(cfg, &all, &[class], Some(&params))?
            .into_iter()
            .filter(|r| r.class_scope == ClassScope::Class(class))
            .collect();
        sets.push((FIGURE_FILES[2 + k], rows, ["only type1 offered", "only type2 offered", "only type3 offered"][k]));
    }

    let mut files = Vec::new();
    let mut text = String::new();
    for (name, rows, what) in sets {
        let path = cfg.output_dir.join(name);
        emit_csv(&rows, &path, &metadata(loaded, &[format!("figure: {what}")]))?;
        let _ = writeln!(text, "{} ({} rows)", path.display(), rows.len());
        files.push(path);
    }
    Ok(Output { text, files })
}
