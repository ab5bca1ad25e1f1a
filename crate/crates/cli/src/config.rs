use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use ptmlab_core::channel::{
    depolarizing, identity_channel, make_pauli_channel, make_sparse_choi_channel, random_channel,
    ChannelJson, ChannelRep,
};
use ptmlab_core::hamiltonian::{random_hamiltonian, HamMode, HamiltonianJson};
use ptmlab_core::pauli::{PauliString, SparseOperatorExpansion};
use ptmlab_core::separation::Strategy;
use ptmlab_core::sim::RngStream;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    PtmLearn,
    SparseLearn,
    Predict,
    HamLearn,
    SeparationSweep,
    OracleCheck,
}

impl Experiment {
    #[cfg(test)]
    pub const ALL: [Experiment; 6] = [
        Experiment::PtmLearn,
        Experiment::SparseLearn,
        Experiment::Predict,
        Experiment::HamLearn,
        Experiment::SeparationSweep,
        Experiment::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PtmLearn => "ptm_learn",
            Experiment::SparseLearn => "sparse_learn",
            Experiment::Predict => "predict",
            Experiment::HamLearn => "ham_learn",
            Experiment::SeparationSweep => "separation_sweep",
            Experiment::OracleCheck => "oracle_check",
        }
    }

    pub fn schema(self) -> &'static str {
        match self {
            Experiment::PtmLearn => include_str!("../../../schemas/ptm_learn.schema.json"),
            Experiment::SparseLearn => include_str!("../../../schemas/sparse_learn.schema.json"),
            Experiment::Predict => include_str!("../../../schemas/predict.schema.json"),
            Experiment::HamLearn => include_str!("../../../schemas/ham_learn.schema.json"),
            Experiment::SeparationSweep => {
                include_str!("../../../schemas/separation_sweep.schema.json")
            }
            Experiment::OracleCheck => include_str!("../../../schemas/oracle_check.schema.json"),
        }
    }

    /// Runs without randomness may omit the seed.
    fn needs_seed(self) -> bool {
        self != Experiment::Predict
    }
}

pub const RESULT_SCHEMA: &str = include_str!("../../../schemas/result.schema.json");
pub const SWEEP_ROW_SCHEMA: &str = include_str!("../../../schemas/sweep_row.schema.json");

/// Validates `instance` against a schema document, collecting every violation.
pub fn validate_schema(schema: &str, instance: &Value) -> CliResult<()> {
    let schema: Value = serde_json::from_str(schema)
        .map_err(|e| CliError::Simulation(format!("bundled schema is invalid JSON: {e}")))?;
    let validator = jsonschema::validator_for(&schema)
        .map_err(|e| CliError::Simulation(format!("bundled schema does not compile: {e}")))?;
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(format!("schema violation: {}", errors.join("; "))))
    }
}

/// Compact JSON with object keys sorted at every level.
pub fn canonical_json(v: &Value) -> String {
    let mut s = String::new();
    write_canonical(v, &mut s);
    s
}

fn write_canonical(v: &Value, s: &mut String) {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            s.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&Value::String(k.clone()).to_string());
                s.push(':');
                write_canonical(&m[k], s);
            }
            s.push('}');
        }
        Value::Array(a) => {
            s.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write_canonical(x, s);
            }
            s.push(']');
        }
        _ => s.push_str(&v.to_string()),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A validated config with its effective seed and hash.
pub struct Loaded<T> {
    pub config: T,
    pub seed: u64,
    /// sha256 of the canonical effective config (seed override applied, `out` dropped).
    pub hash: String,
    /// Directory that relative input paths resolve against.
    pub base_dir: PathBuf,
    pub out: Option<PathBuf>,
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{} is not valid JSON: {e}", path.display())))
}

pub fn load<T: DeserializeOwned>(
    path: &Path,
    kind: Experiment,
    seed_override: Option<u64>,
) -> CliResult<Loaded<T>> {
    let mut value = read_json(path)?;
    let found = value.get("experiment").and_then(Value::as_str).map(str::to_owned);
    if found.as_deref() != Some(kind.name()) {
        return Err(CliError::Config(format!(
            "config experiment is {found:?}, expected {:?}",
            kind.name()
        )));
    }
    validate_schema(kind.schema(), &value)?;
    let obj = value.as_object_mut().expect("schema guarantees an object");
    if let Some(s) = seed_override {
        obj.insert("seed".into(), Value::from(s));
    }
    let seed = match obj.get("seed") {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| CliError::Config("seed must be an unsigned 64-bit integer".into()))?,
        None if kind.needs_seed() => {
            return Err(CliError::Config("no seed in config and no --seed given".into()))
        }
        None => 0,
    };
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let out = obj
        .remove("out")
        .and_then(|v| v.as_str().map(|s| base_dir.join(s)));
    let hash = sha256_hex(canonical_json(&value).as_bytes());
    let obj = value.as_object_mut().expect("still an object");
    obj.remove("experiment");
    obj.remove("seed");
    let config = serde_json::from_value(value)
        .map_err(|e| CliError::Config(format!("config does not match {}: {e}", kind.name())))?;
    Ok(Loaded {
        config,
        seed,
        hash,
        base_dir,
        out,
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSource {
    Identity { n: usize },
    Depolarizing { n: usize, p: f64 },
    Random { n: usize, rank: usize, seed: u64 },
    SparseChoi { string: PauliString },
    Pauli { rates: BTreeMap<PauliString, f64> },
    File { path: PathBuf },
}

impl ChannelSource {
    pub fn load(&self, base: &Path) -> CliResult<ChannelRep> {
        let rep = match self {
            ChannelSource::Identity { n } => ChannelRep::Kraus(identity_channel(*n).map_err(CliError::input)?),
            ChannelSource::Depolarizing { n, p } => {
                ChannelRep::Kraus(depolarizing(*n, *p).map_err(CliError::input)?)
            }
            ChannelSource::Random { n, rank, seed } => {
                let mut rng = RngStream::new(*seed).derive_label("channel").rng();
                ChannelRep::Kraus(random_channel(*n, *rank, &mut rng).map_err(CliError::input)?)
            }
            ChannelSource::SparseChoi { string } => {
                make_sparse_choi_channel(string).map_err(CliError::input)?
            }
            ChannelSource::Pauli { rates } => {
                ChannelRep::Kraus(make_pauli_channel(rates).map_err(CliError::input)?)
            }
            ChannelSource::File { path } => {
                let path = base.join(path);
                let json: ChannelJson = serde_json::from_value(read_json(&path)?).map_err(|e| {
                    CliError::Config(format!("{} is not a channel file: {e}", path.display()))
                })?;
                json.to_rep().map_err(CliError::input)?
            }
        };
        Ok(rep)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSource {
    Inline { n: usize, terms: Vec<(PauliString, f64)> },
    File { path: PathBuf },
    Random { n: usize, norm: f64, seed: u64 },
}

impl HamiltonianSource {
    pub fn load(&self, base: &Path) -> CliResult<SparseOperatorExpansion> {
        match self {
            HamiltonianSource::Inline { n, terms } => HamiltonianJson {
                n: *n,
                terms: terms.clone(),
            }
            .to_expansion()
            .map_err(CliError::input),
            HamiltonianSource::File { path } => {
                let path = base.join(path);
                let json: HamiltonianJson = serde_json::from_value(read_json(&path)?).map_err(|e| {
                    CliError::Config(format!("{} is not a Hamiltonian file: {e}", path.display()))
                })?;
                json.to_expansion().map_err(CliError::input)
            }
            HamiltonianSource::Random { n, norm, seed } => {
                let mut rng = RngStream::new(*seed).derive_label("hamiltonian").rng();
                random_hamiltonian(*n, *norm, &mut rng).map_err(CliError::input)
            }
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    pub channel: ChannelSource,
    pub epsilon: f64,
    pub delta: f64,
    /// Embed the exact PTM so reports can score the estimate.
    #[serde(default = "yes")]
    pub embed_truth: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    pub estimate: PathBuf,
    pub state: SparseOperatorExpansion,
    pub observable: SparseOperatorExpansion,
    #[serde(default)]
    pub truth: Option<ChannelSource>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamConfig {
    pub hamiltonian: HamiltonianSource,
    pub epsilon: f64,
    pub delta: f64,
    pub h: f64,
    pub mode: HamMode,
    #[serde(default)]
    pub targets: Option<Vec<PauliString>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    pub target: f64,
    pub pilot_trials: usize,
    pub max_copies: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    #[serde(default)]
    pub strategies: Option<Vec<Strategy>>,
    #[serde(default)]
    pub grid: Option<Vec<u64>>,
    #[serde(default)]
    pub calibrate: Option<CalibrateConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub n: usize,
    pub channels: usize,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sorts_keys_recursively() {
        let v: Value = serde_json::from_str(r#"{"b":1,"a":{"d":[1,{"z":0,"y":2}],"c":0.5}}"#).unwrap();
        assert_eq!(canonical_json(&v), r#"{"a":{"c":0.5,"d":[1,{"y":2,"z":0}]},"b":1}"#);
    }

    #[test]
    fn bundled_schemas_compile() {
        for k in Experiment::ALL {
            let v: Value = serde_json::from_str(k.schema()).unwrap();
            jsonschema::validator_for(&v).unwrap();
        }
        for s in [RESULT_SCHEMA, SWEEP_ROW_SCHEMA] {
            jsonschema::validator_for(&serde_json::from_str::<Value>(s).unwrap()).unwrap();
        }
    }

    #[test]
    fn schema_rejects_unknown_keys() {
        let v: Value = serde_json::from_str(
            r#"{"experiment":"oracle_check","seed":1,"n":1,"channels":2,"bogus":true}"#,
        )
        .unwrap();
        assert!(matches!(
            validate_schema(Experiment::OracleCheck.schema(), &v),
            Err(CliError::Config(_))
        ));
    }
}
