//! Sweep CSV: a `#` metadata block, a header line, one record per row.
//! Numbers carry 10 significant digits; an absent CTMC value is an empty field.

use std::fmt::Write as _;
use std::path::Path;

use caclab_core::markov::ClassScope;

use crate::config::{LoadedConfig, PolicyKind};
use crate::error::CliError;
use crate::sweep::SweepRow;

pub const HEADER: &str = "utilization,policy,class_scope,analytical,ctmc,empirical,half_width,seed";

pub fn fmt10(x: f64) -> String {
    format!("{x:.9e}")
}

/// Comment block that makes an output file reproducible on its own.
pub fn metadata(loaded: &LoadedConfig, extra: &[String]) -> Vec<String> {
    let c = &loaded.config;
    let mut lines = vec![
        format!("caclab {}", env!("CARGO_PKG_VERSION")),
        format!("config_sha256 = {}", c.hash()),
        format!("seed = {}", c.system.seed),
        format!(
            "run_length = {} events per replication, first {} discarded as warmup",
            c.sweep.horizon_events, c.sweep.warmup_events
        ),
        format!(
            "defaults_applied = {}",
            if loaded.defaults_applied.is_empty() { "none".to_string() } else { loaded.defaults_applied.join(",") }
        ),
    ];
    lines.extend(extra.iter().cloned());
    lines.push("effective config:".into());
    lines.extend(c.to_toml().lines().map(|l| format!("  {l}")));
    lines
}

pub fn render_csv(rows: &[SweepRow], metadata: &[String]) -> String {
    let mut out = String::new();
    for line in metadata {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt10(r.utilization),
            r.policy.name(),
            r.class_scope.label(),
            fmt10(r.analytical),
            r.ctmc.map(fmt10).unwrap_or_default(),
            fmt10(r.empirical),
            fmt10(r.half_width),
            r.seed
        );
    }
    out
}

/// Writes the CSV; refuses empty input without touching the filesystem.
pub fn emit_csv(rows: &[SweepRow], path: &Path, metadata: &[String]) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::Empty(format!("no rows for {}", path.display())));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    std::fs::write(path, render_csv(rows, metadata)).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let bad = |reason: String| CliError::Csv { line: line_no, reason };
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(bad(format!("expected header {HEADER:?}")));
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad(format!("{} fields, expected 8", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number {s:?}")));
        rows.push(SweepRow {
            utilization: num(f[0])?,
            policy: PolicyKind::parse(f[1]).ok_or_else(|| bad(format!("unknown policy {:?}", f[1])))?,
            class_scope: ClassScope::parse(f[2]).ok_or_else(|| bad(format!("unknown scope {:?}", f[2])))?,
            analytical: num(f[3])?,
            ctmc: if f[4].is_empty() { None } else { Some(num(f[4])?) },
            empirical: num(f[5])?,
            half_width: num(f[6])?,
            seed: f[7].parse().map_err(|_| bad(format!("bad seed {:?}", f[7])))?,
        });
    }
    if !seen_header {
        return Err(CliError::Csv { line: 0, reason: "missing header".into() });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use caclab_core::traffic::ClassId;
    use proptest::prelude::*;

    fn row(u: f64, ctmc: Option<f64>) -> SweepRow {
        SweepRow {
            utilization: u,
            policy: PolicyKind::Fuzzy,
            class_scope: ClassScope::Class(ClassId::Type2Interactive),
            analytical: 1.0 / 3.0,
            ctmc,
            empirical: 2.5e-7,
            half_width: 0.0,
            seed: u64::MAX,
        }
    }

    fn same10(a: f64, b: f64) -> bool {
        a == b || ((a - b) / a.abs().max(b.abs())).abs() < 5e-10
    }

    #[test]
    fn empty_rows_create_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        assert!(matches!(emit_csv(&[], &path, &[]), Err(CliError::Empty(_))));
        assert!(!path.exists());
    }

    #[test]
    fn constant_column_count_and_absent_oracle() {
        let text = render_csv(&[row(0.1, None), row(0.2, Some(0.5))], &["meta".into()]);
        let records: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(records[0], HEADER);
        assert!(records.iter().all(|l| l.split(',').count() == 8));
        assert!(records[1].contains(",,"));
        assert!(text.ends_with('\n'));
        assert_eq!(fmt10(1.0 / 3.0), "3.333333333e-1");
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv(&format!("{HEADER}\n1,2\n")).is_err());
        assert!(parse_csv(&format!("{HEADER}\n1e-1,nobody,aggregate,0,,0,0,1\n")).is_err());
    }

    proptest! {
        #[test]
        fn reparse_keeps_ten_digits(u in 0.0f64..2.0, a in 0.0f64..1.0, e in 0.0f64..1.0, c in proptest::option::of(0.0f64..1.0)) {
            let mut r = row(u, c);
            r.analytical = a;
            r.empirical = e;
            let back = parse_csv(&render_csv(std::slice::from_ref(&r), &[])).unwrap();
            let b = &back[0];
            prop_assert!(same10(b.utilization, u) && same10(b.analytical, a) && same10(b.empirical, e));
            prop_assert_eq!(b.ctmc.is_some(), c.is_some());
            if let (Some(x), Some(y)) = (b.ctmc, c) { prop_assert!(same10(x, y)); }
            prop_assert_eq!((b.policy, b.class_scope, b.seed), (r.policy, r.class_scope, r.seed));
        }
    }
}
