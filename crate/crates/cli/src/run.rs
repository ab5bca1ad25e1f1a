use std::fs;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use ptmlab_core::channel::{choi_to_ptm, exact_ptm, kraus_to_choi, random_channel, ChannelRep, PTMatrix, PTM_ZERO_TOL};
use ptmlab_core::hamiltonian::{learn_hamiltonian, EvolutionOracle, HamMode, HamiltonianJson, HamiltonianReport};
use ptmlab_core::learner::{learn_ptm, threshold_sparse_ptm, PTMEstimateJson, MAX_PTM_QUBITS};
use ptmlab_core::pauli::{to_dense, Convention, PauliString};
use ptmlab_core::predict::{predict_expectation, prediction_error_bound, BoundMode, BoundParams, PredictionBoundReport};
use ptmlab_core::separation::{calibrate_budget, distinguishing_game, BudgetCalibration, GameResult, Strategy};
use ptmlab_core::sim::{ChoiOracle, RngStream};

use crate::config::{
    read_json, sha256_hex, validate_schema, Experiment, HamConfig, LearnConfig, Loaded, OracleConfig,
    PredictConfig, SweepConfig, RESULT_SCHEMA,
};
use crate::error::{CliError, CliResult};
use crate::output::{to_pretty, Check, Envelope, ARTIFACT, VERSION};

pub const SWEEP_CSV: &str = "separation_sweep.csv";

/// Files to write plus the checks they report.
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
}

fn finish<C, T: Serialize>(
    kind: Experiment,
    loaded: &Loaded<C>,
    copies: u128,
    checks: Vec<Check>,
    result: T,
    extra: Vec<(String, Vec<u8>)>,
) -> CliResult<RunOutput> {
    let env = Envelope {
        artifact: ARTIFACT,
        version: VERSION,
        experiment: kind.name(),
        config_sha256: loaded.hash.clone(),
        seed: loaded.seed,
        copies,
        checks: checks.clone(),
        result,
    };
    let mut files = vec![(format!("{}.json", kind.name()), to_pretty(&env)?)];
    files.extend(extra);
    Ok(RunOutput { files, checks })
}

/// Max and mean absolute entry difference over the full matrix.
pub fn ptm_errors(est: &PTMatrix, truth: &PTMatrix) -> (f64, f64) {
    let d = est.dim();
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for a in 0..d {
        for b in 0..d {
            let e = (est.at(a, b) - truth.at(a, b)).abs();
            max = max.max(e);
            sum += e;
        }
    }
    (max, sum / (d * d) as f64)
}

pub fn entries_to_ptm(n: usize, entries: &[(PauliString, PauliString, f64)]) -> CliResult<PTMatrix> {
    let mut m = PTMatrix::zeros(n).map_err(CliError::input)?;
    for (a, b, v) in entries {
        if a.len() != n || b.len() != n {
            return Err(CliError::Config(format!("PTM entry {a}/{b} does not have {n} qubits")));
        }
        m.set(a.index(), b.index(), *v);
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnResult {
    pub estimate: PTMEstimateJson,
    /// Nonzero entries of the exact PTM.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<(PauliString, PauliString, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_error: Option<f64>,
    /// Copies drawn from the simulated oracle, as counted by the oracle itself.
    pub oracle_copies: u64,
}

fn exact_of(rep: &ChannelRep) -> CliResult<PTMatrix> {
    exact_ptm(&rep.to_kraus().map_err(CliError::sim)?).map_err(CliError::sim)
}

pub fn learn(loaded: &Loaded<LearnConfig>, sparse: bool) -> CliResult<RunOutput> {
    let c = &loaded.config;
    let rep = c.channel.load(&loaded.base_dir)?;
    let n = rep.qubits();
    if n > MAX_PTM_QUBITS {
        return Err(CliError::Dimension(format!(
            "{n}-qubit channel exceeds the learner maximum of {MAX_PTM_QUBITS}"
        )));
    }
    let stream = RngStream::new(loaded.seed);
    let oracle = ChoiOracle::from_channel(&rep).map_err(CliError::sim)?;
    let estimate = if sparse {
        PTMEstimateJson::from(&threshold_sparse_ptm(&oracle, c.epsilon, c.delta, &stream).map_err(CliError::sim)?)
    } else {
        PTMEstimateJson::from(&learn_ptm(&oracle, c.epsilon, c.delta, &stream).map_err(CliError::sim)?)
    };
    let used = oracle.copies_used();
    let formula = estimate.budget.copies();
    let mut checks = vec![Check::new(
        "copy_accounting",
        estimate.copies == used && formula == used as u128,
        format!("reported {}, oracle counted {used}, formula {formula}", estimate.copies),
    )];

    let mut result = LearnResult {
        estimate,
        truth: None,
        max_error: None,
        mean_error: None,
        oracle_copies: used,
    };
    if c.embed_truth {
        let exact = exact_of(&rep)?;
        let est = entries_to_ptm(n, &result.estimate.entries)?;
        let (max, mean) = ptm_errors(&est, &exact);
        result.truth = Some(exact.nonzeros(PTM_ZERO_TOL));
        result.max_error = Some(max);
        result.mean_error = Some(mean);
        if sparse {
            checks.extend(sparse_checks(&rep, &exact, &result.estimate, c, &stream)?);
        } else {
            checks.push(Check::new(
                "max_error",
                max <= c.epsilon,
                format!("max entry error {max:.6e} vs epsilon {}", c.epsilon),
            ));
        }
    }
    let kind = if sparse { Experiment::SparseLearn } else { Experiment::PtmLearn };
    finish(kind, loaded, used as u128, checks, result, vec![])
}

/// Thresholding guarantees, scored against the exact PTM.
fn sparse_checks(
    rep: &ChannelRep,
    exact: &PTMatrix,
    est: &PTMEstimateJson,
    c: &LearnConfig,
    stream: &RngStream,
) -> CliResult<Vec<Check>> {
    let eps = c.epsilon;
    // the same stream reproduces the inner ε/3 estimate on a fresh oracle
    let fresh = ChoiOracle::from_channel(rep).map_err(CliError::sim)?;
    let inner = learn_ptm(&fresh, eps / 3.0, c.delta, stream).map_err(CliError::sim)?;
    let inner_err = inner.ptm.max_abs_diff(exact);

    let listed = entries_to_ptm(exact.qubits(), &est.entries)?;
    let is_listed = |a: usize, b: usize| {
        est.entries.iter().any(|(x, y, _)| x.index() == a && y.index() == b)
    };
    let d = exact.dim();
    let (mut omitted_max, mut listed_min, mut listed_err) = (0.0f64, f64::INFINITY, 0.0f64);
    for a in 0..d {
        for b in 0..d {
            let t = exact.at(a, b).abs();
            if is_listed(a, b) {
                listed_min = listed_min.min(t);
                listed_err = listed_err.max((listed.at(a, b) - exact.at(a, b)).abs());
            } else {
                omitted_max = omitted_max.max(t);
            }
        }
    }
    let true_sparsity = exact.sparsity(PTM_ZERO_TOL);
    Ok(vec![
        Check::new(
            "accuracy_event",
            inner_err <= eps / 3.0,
            format!("inner estimate error {inner_err:.6e} vs epsilon/3 = {:.6e}", eps / 3.0),
        ),
        Check::new(
            "sparsity",
            est.entries.len() <= true_sparsity,
            format!("{} listed, true sparsity {true_sparsity}", est.entries.len()),
        ),
        Check::new(
            "omitted_small",
            omitted_max <= eps,
            format!("largest omitted |r| {omitted_max:.6e} vs epsilon {eps}"),
        ),
        Check::new(
            "listed_significant",
            est.entries.is_empty() || listed_min > eps / 6.0,
            format!("smallest listed |r| {listed_min:.6e} vs epsilon/6 = {:.6e}", eps / 6.0),
        ),
        Check::new(
            "listed_accurate",
            listed_err <= eps,
            format!("largest listed error {listed_err:.6e} vs epsilon {eps}"),
        ),
    ])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictResult {
    pub estimate_sha256: String,
    pub estimate_experiment: String,
    pub estimate_copies: u64,
    pub prediction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    pub bound: PredictionBoundReport,
}

pub fn predict(loaded: &Loaded<PredictConfig>) -> CliResult<RunOutput> {
    let c = &loaded.config;
    let path = loaded.base_dir.join(&c.estimate);
    let bytes = fs::read(&path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let file = read_json(&path)?;
    validate_schema(RESULT_SCHEMA, &file)?;
    let experiment = file["experiment"].as_str().unwrap_or_default().to_string();
    if experiment != "ptm_learn" && experiment != "sparse_learn" {
        return Err(CliError::Config(format!(
            "{} holds a {experiment} result, not a PTM estimate",
            path.display()
        )));
    }
    let learned: LearnResult = serde_json::from_value(file["result"].clone())
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let est = &learned.estimate;
    let ptm = entries_to_ptm(est.n, &est.entries)?;
    let prediction = predict_expectation(&ptm, &c.state, &c.observable).map_err(CliError::input)?;

    let truth = match (&c.truth, &learned.truth) {
        (Some(src), _) => {
            let rep = src.load(&loaded.base_dir)?;
            let out = rep
                .apply(&to_dense(&c.state).map_err(CliError::input)?)
                .map_err(CliError::input)?;
            let o = to_dense(&c.observable).map_err(CliError::input)?;
            Some(o.trace_product(&out).map_err(CliError::input)?.re)
        }
        (None, Some(entries)) => {
            let exact = entries_to_ptm(est.n, entries)?;
            Some(predict_expectation(&exact, &c.state, &c.observable).map_err(CliError::input)?)
        }
        (None, None) => None,
    };

    let d = (1u64 << est.n) as f64;
    let o_unnorm = c.observable.to_convention(Convention::Unnormalized);
    let bound = prediction_error_bound(
        BoundMode::SparseObjects,
        est.epsilon,
        &BoundParams {
            s_rho: Some(c.state.sparsity() as f64),
            s_o: Some(c.observable.sparsity() as f64),
            o_norm2: Some(o_unnorm.l2_norm() * d.sqrt()),
            q_max: Some(1.0 / d.sqrt()),
            ..Default::default()
        },
    )
    .map_err(CliError::sim)?;

    let error = truth.map(|t| (prediction - t).abs());
    let mut checks = Vec::new();
    if let Some(e) = error {
        checks.push(Check::new(
            "error_within_bound",
            e <= bound.bound,
            format!("|prediction - truth| {e:.6e} vs bound {:.6e}", bound.bound),
        ));
    }
    let result = PredictResult {
        estimate_sha256: sha256_hex(&bytes),
        estimate_experiment: experiment,
        estimate_copies: est.copies,
        prediction,
        truth,
        error,
        bound,
    };
    finish(Experiment::Predict, loaded, 0, checks, result, vec![])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamResult {
    pub hamiltonian: HamiltonianJson,
    pub h: f64,
    pub report: HamiltonianReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
}

/// Per-coefficient tolerance the mode promises.
pub fn ham_tolerance(mode: HamMode, epsilon: f64) -> f64 {
    match mode {
        HamMode::Exact => epsilon / 2.0 + 1e-9,
        HamMode::ExactNoisy | HamMode::Shadow => epsilon,
    }
}

pub fn ham(loaded: &Loaded<HamConfig>) -> CliResult<RunOutput> {
    let c = &loaded.config;
    let h = c.hamiltonian.load(&loaded.base_dir)?;
    let n = h.qubits();
    let targets: Vec<PauliString> = match &c.targets {
        Some(t) => t.clone(),
        None => PauliString::all(n).filter(|p| !p.is_identity()).collect(),
    };
    if let Some(bad) = targets.iter().find(|t| t.len() != n) {
        return Err(CliError::Config(format!("target {bad} does not have {n} qubits")));
    }
    let oracle = EvolutionOracle::new(h.clone()).map_err(CliError::input)?;
    let report = learn_hamiltonian(
        &oracle,
        &targets,
        c.epsilon,
        c.delta,
        c.h,
        c.mode,
        &RngStream::new(loaded.seed),
    )
    .map_err(CliError::sim)?;

    let mut checks = Vec::new();
    if c.mode == HamMode::Shadow {
        let sum: u128 = report.node_copies.iter().map(|&x| x as u128).sum();
        checks.push(Check::new(
            "copy_accounting",
            sum == report.total_copies && report.node_copies.iter().all(|&x| x > 0),
            format!("{} nodes, {sum} copies counted, {} reported", report.node_copies.len(), report.total_copies),
        ));
    }
    let max_error = report.max_error();
    if let Some(e) = max_error {
        let tol = ham_tolerance(c.mode, c.epsilon);
        checks.push(Check::new(
            "max_error",
            e <= tol,
            format!("max coefficient error {e:.6e} vs tolerance {tol:.6e}"),
        ));
    }
    let copies = report.total_copies;
    let result = HamResult {
        hamiltonian: HamiltonianJson::from_expansion(&h),
        h: c.h,
        report,
        max_error,
    };
    finish(Experiment::HamLearn, loaded, copies, checks, result, vec![])
}

/// One line of the sweep CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub strategy: Strategy,
    pub n: usize,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub copies: u64,
    pub trials: usize,
    pub success: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
}

impl From<&GameResult> for SweepRow {
    fn from(g: &GameResult) -> Self {
        Self {
            strategy: g.strategy,
            n: g.n,
            epsilon: g.epsilon,
            copies: g.copies,
            trials: g.trials,
            success: g.success,
            wilson_lo: g.wilson_lo,
            wilson_hi: g.wilson_hi,
            seed: g.seed,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepResult {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<BudgetCalibration>,
    pub grid: Vec<u64>,
    pub games: Vec<GameResult>,
    pub csv: String,
}

/// Success may dip between neighbouring budgets only within the lower Wilson bound.
fn nondecreasing_within_noise(games: &[&GameResult]) -> (bool, String) {
    for w in games.windows(2) {
        if w[1].success < w[0].wilson_lo {
            return (
                false,
                format!(
                    "success {:.4} at T={} below Wilson lower bound {:.4} at T={}",
                    w[1].success, w[1].copies, w[0].wilson_lo, w[0].copies
                ),
            );
        }
    }
    (true, format!("{} grid points", games.len()))
}

pub fn sweep(loaded: &Loaded<SweepConfig>) -> CliResult<RunOutput> {
    let c = &loaded.config;
    let stream = RngStream::new(loaded.seed);
    let strategies = c
        .strategies
        .clone()
        .unwrap_or_else(|| vec![Strategy::BellMemory, Strategy::SingleCopyRandomPauli]);

    let mut copies: u128 = 0;
    let calibration = match &c.calibrate {
        Some(k) => {
            let cal = calibrate_budget(
                c.n,
                c.epsilon,
                Strategy::BellMemory,
                k.target,
                k.pilot_trials,
                k.max_copies,
                &stream.derive_label("calibrate"),
            )
            .map_err(CliError::sim)?;
            // fit and check pilots at every grid point tried
            copies += cal.grid.iter().map(|&(t, _)| 2 * k.pilot_trials as u128 * t as u128).sum::<u128>();
            Some(cal)
        }
        None => None,
    };
    let mut grid: Vec<u64> = match (&c.grid, &calibration) {
        (Some(g), _) => g.clone(),
        (None, Some(cal)) => std::iter::successors(Some(2u64), |t| Some(t * 2))
            .take_while(|&t| t <= cal.copies)
            .collect(),
        (None, None) => unreachable!("schema requires grid or calibrate"),
    };
    grid.sort_unstable();
    grid.dedup();

    let points: Vec<(Strategy, u64)> = strategies
        .iter()
        .flat_map(|&s| grid.iter().map(move |&t| (s, t)))
        .collect();
    // each budget gets one stream shared by all strategies, so trials are paired
    let games: Vec<GameResult> = points
        .par_iter()
        .map(|&(s, t)| distinguishing_game(c.n, c.epsilon, t, c.trials, s, &stream.derive(t)))
        .collect::<Result<_, _>>()
        .map_err(CliError::sim)?;
    // pilot and evaluation runs
    copies += games.iter().map(|g| 2 * g.trials as u128 * g.copies as u128).sum::<u128>();

    let mut checks = Vec::new();
    if strategies.contains(&Strategy::BellMemory) {
        let bell: Vec<&GameResult> = games.iter().filter(|g| g.strategy == Strategy::BellMemory).collect();
        let (ok, detail) = nondecreasing_within_noise(&bell);
        checks.push(Check::new("bell_memory_nondecreasing", ok, detail));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    for g in &games {
        w.serialize(SweepRow::from(g))
            .map_err(|e| CliError::Simulation(format!("csv: {e}")))?;
    }
    let csv_bytes = w
        .into_inner()
        .map_err(|e| CliError::Simulation(format!("csv: {e}")))?;
    let result = SweepResult {
        calibration,
        grid,
        games,
        csv: SWEEP_CSV.to_string(),
    };
    finish(
        Experiment::SeparationSweep,
        loaded,
        copies,
        checks,
        result,
        vec![(SWEEP_CSV.to_string(), csv_bytes)],
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleResult {
    pub n: usize,
    pub channels: usize,
    pub rank: usize,
    pub tolerance: f64,
    pub max_diff: f64,
    pub diffs: Vec<f64>,
}

pub fn oracle(loaded: &Loaded<OracleConfig>) -> CliResult<RunOutput> {
    let c = &loaded.config;
    let rank = c.rank.unwrap_or(1 << c.n);
    let tolerance = c.tolerance.unwrap_or(1e-10);
    let stream = RngStream::new(loaded.seed);
    let diffs: Vec<f64> = (0..c.channels)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.derive(i as u64).rng();
            let k = random_channel(c.n, rank, &mut rng)?;
            Ok(choi_to_ptm(&kraus_to_choi(&k)?).max_abs_diff(&exact_ptm(&k)?))
        })
        .collect::<Result<_, ptmlab_core::Error>>()
        .map_err(CliError::sim)?;
    let max_diff = diffs.iter().cloned().fold(0.0, f64::max);
    let checks = vec![Check::new(
        "max_diff",
        max_diff <= tolerance,
        format!("max entry difference {max_diff:.3e} vs tolerance {tolerance:.1e}"),
    )];
    let result = OracleResult {
        n: c.n,
        channels: c.channels,
        rank,
        tolerance,
        max_diff,
        diffs,
    };
    finish(Experiment::OracleCheck, loaded, 0, checks, result, vec![])
}

/// Result file as read back by `report`.
pub fn load_result(value: &Value) -> CliResult<(String, Value)> {
    validate_schema(RESULT_SCHEMA, value)?;
    Ok((
        value["experiment"].as_str().unwrap_or_default().to_string(),
        value["result"].clone(),
    ))
}
