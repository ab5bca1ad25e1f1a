use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::config::{read_json, validate_schema, SWEEP_ROW_SCHEMA};
use crate::error::{CliError, CliResult};
use crate::run::{
    entries_to_ptm, load_result, ptm_errors, HamResult, LearnResult, OracleResult, PredictResult, SweepResult,
    SweepRow,
};

fn parse<T: DeserializeOwned>(path: &Path, v: Value) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Summary table for one result file (JSON envelope or sweep CSV).
pub fn report(path: &Path) -> CliResult<String> {
    let mut s = String::new();
    writeln!(s, "== {}", path.display()).unwrap();
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        let rows = read_sweep_csv(path)?;
        sweep_table(&mut s, &rows);
        return Ok(s);
    }
    let file = read_json(path)?;
    let (kind, result) = load_result(&file)?;
    writeln!(
        s,
        "experiment {kind}  version {}  seed {}  copies {}  config {}",
        file["version"].as_str().unwrap_or("?"),
        file["seed"],
        file["copies"],
        file["config_sha256"].as_str().and_then(|h| h.get(..12)).unwrap_or("?")
    )
    .unwrap();
    match kind.as_str() {
        "ptm_learn" | "sparse_learn" => learn_table(&mut s, &parse::<LearnResult>(path, result)?)?,
        "predict" => {
            let r: PredictResult = parse(path, result)?;
            writeln!(s, "{:<12} {:>14}", "prediction", fmt(r.prediction)).unwrap();
            writeln!(s, "{:<12} {:>14}", "truth", r.truth.map_or("-".into(), fmt)).unwrap();
            writeln!(s, "{:<12} {:>14}", "error", r.error.map_or("-".into(), fmt)).unwrap();
            writeln!(s, "{:<12} {:>14}", "bound", fmt(r.bound.bound)).unwrap();
        }
        "ham_learn" => ham_table(&mut s, &parse::<HamResult>(path, result)?),
        "separation_sweep" => {
            let r: SweepResult = parse(path, result)?;
            if let Some(c) = &r.calibration {
                writeln!(
                    s,
                    "calibrated {} budget T={} (pilot success {:.3})",
                    c.strategy, c.copies, c.pilot_success
                )
                .unwrap();
            }
            let rows: Vec<SweepRow> = r.games.iter().map(SweepRow::from).collect();
            sweep_table(&mut s, &rows);
        }
        "oracle_check" => {
            let r: OracleResult = parse(path, result)?;
            writeln!(
                s,
                "n={} channels={} rank={} max_diff={:.3e} tolerance={:.1e}",
                r.n, r.channels, r.rank, r.max_diff, r.tolerance
            )
            .unwrap();
        }
        other => return Err(CliError::Config(format!("unknown experiment {other:?}"))),
    }
    if let Some(checks) = file["checks"].as_array() {
        for c in checks {
            writeln!(
                s,
                "check {:<28} {}  {}",
                c["name"].as_str().unwrap_or("?"),
                if c["passed"].as_bool() == Some(true) { "ok  " } else { "FAIL" },
                c["detail"].as_str().unwrap_or("")
            )
            .unwrap();
        }
    }
    Ok(s)
}

fn fmt(x: f64) -> String {
    format!("{x:.6e}")
}

fn learn_table(s: &mut String, r: &LearnResult) -> CliResult<()> {
    let e = &r.estimate;
    writeln!(
        s,
        "n={} epsilon={} delta={}{} entries={} copies={}",
        e.n,
        e.epsilon,
        e.delta,
        e.threshold.map_or(String::new(), |t| format!(" threshold={t}")),
        e.entries.len(),
        e.copies
    )
    .unwrap();
    match &r.truth {
        Some(truth) => {
            let (max, mean) = ptm_errors(&entries_to_ptm(e.n, &e.entries)?, &entries_to_ptm(e.n, truth)?);
            writeln!(s, "{:<12} {:>14}", "max_error", fmt(max)).unwrap();
            writeln!(s, "{:<12} {:>14}", "mean_error", fmt(mean)).unwrap();
        }
        None => writeln!(s, "no embedded truth").unwrap(),
    }
    Ok(())
}

fn ham_table(s: &mut String, r: &HamResult) {
    let rep = &r.report;
    writeln!(
        s,
        "n={} mode={:?} epsilon={} h={} nodes={} copies={}",
        rep.n, rep.mode, rep.epsilon, r.h, rep.schedule.degree, rep.total_copies
    )
    .unwrap();
    writeln!(s, "{:<10} {:>14} {:>14} {:>14}", "term", "estimate", "truth", "error").unwrap();
    for e in &rep.estimates {
        let (truth, err) = match e.truth {
            Some(t) => (fmt(t), fmt((e.estimate - t).abs())),
            None => ("-".into(), "-".into()),
        };
        writeln!(s, "{:<10} {:>14} {:>14} {:>14}", e.target.to_string(), fmt(e.estimate), truth, err).unwrap();
    }
}

fn sweep_table(s: &mut String, rows: &[SweepRow]) {
    writeln!(
        s,
        "{:<26} {:>3} {:>8} {:>8} {:>7} {:>8} {:>18}",
        "strategy", "n", "epsilon", "T", "trials", "success", "wilson 95%"
    )
    .unwrap();
    for r in rows {
        writeln!(
            s,
            "{:<26} {:>3} {:>8} {:>8} {:>7} {:>8.4} {:>18}",
            r.strategy.name(),
            r.n,
            r.epsilon,
            r.copies,
            r.trials,
            r.success,
            format!("[{:.4}, {:.4}]", r.wilson_lo, r.wilson_hi)
        )
        .unwrap();
    }
}

pub fn read_sweep_csv(path: &Path) -> CliResult<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for rec in rd.deserialize::<SweepRow>() {
        let row = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        validate_schema(SWEEP_ROW_SCHEMA, &serde_json::to_value(&row).expect("row serializes"))?;
        rows.push(row);
    }
    Ok(rows)
}
