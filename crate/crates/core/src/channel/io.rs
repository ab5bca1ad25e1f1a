use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ChannelRep, ChoiState, KrausChannel, PTMatrix};
use crate::error::{Error, Result};
use crate::pauli::DenseOperator;

/// Wire form `{n, repr, data}` of a [`ChannelRep`].
///
/// `data` is a list of matrices of `[re, im]` pairs for `kraus`, one such
/// matrix for `choi`, and a real matrix for `ptm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub n: usize,
    pub repr: String,
    pub data: Value,
}

fn complex_rows(m: &DenseOperator) -> Value {
    Value::Array(
        m.to_rows()
            .into_iter()
            .map(|row| {
                Value::Array(
                    row.into_iter()
                        .map(|z| serde_json::json!([z.re, z.im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn parse_complex_rows(v: &Value) -> Result<DenseOperator> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(v.clone())
        .map_err(|e| Error::Parse(format!("complex matrix: {e}")))?;
    let rows: Vec<Vec<Complex64>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        .collect();
    DenseOperator::from_rows(&rows)
}

fn check_n(n: usize, found: usize) -> Result<()> {
    if n != found {
        return Err(Error::DimensionMismatch {
            expected: n,
            found,
        });
    }
    Ok(())
}

impl ChannelJson {
    pub fn from_rep(rep: &ChannelRep) -> Self {
        let (repr, data) = match rep {
            ChannelRep::Kraus(k) => (
                "kraus",
                Value::Array(k.ops().iter().map(complex_rows).collect()),
            ),
            ChannelRep::Choi(c) => ("choi", complex_rows(c.matrix())),
            ChannelRep::Ptm(p) => {
                let d = p.dim();
                let rows: Vec<Vec<f64>> =
                    (0..d).map(|a| (0..d).map(|b| p.at(a, b)).collect()).collect();
                ("ptm", serde_json::json!(rows))
            }
        };
        Self {
            n: rep.qubits(),
            repr: repr.to_string(),
            data,
        }
    }

    pub fn to_rep(&self) -> Result<ChannelRep> {
        match self.repr.as_str() {
            "kraus" => {
                let mats = self
                    .data
                    .as_array()
                    .ok_or_else(|| Error::Parse("kraus data must be a list".into()))?;
                let ops = mats.iter().map(parse_complex_rows).collect::<Result<Vec<_>>>()?;
                let k = KrausChannel::new(ops)?;
                check_n(self.n, k.qubits())?;
                Ok(ChannelRep::Kraus(k))
            }
            "choi" => {
                let c = ChoiState::new(parse_complex_rows(&self.data)?)?;
                check_n(self.n, c.qubits())?;
                Ok(ChannelRep::Choi(c))
            }
            "ptm" => {
                let rows: Vec<Vec<f64>> = serde_json::from_value(self.data.clone())
                    .map_err(|e| Error::Parse(format!("ptm matrix: {e}")))?;
                let d = rows.len();
                if rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Parse("ptm matrix is not square".into()));
                }
                let m = DMatrix::from_fn(d, d, |a, b| rows[a][b]);
                Ok(ChannelRep::Ptm(PTMatrix::from_matrix(self.n, m)?))
            }
            other => Err(Error::Parse(format!("unknown channel repr {other:?}"))),
        }
    }
}
