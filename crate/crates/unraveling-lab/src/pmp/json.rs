use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{FMSpec, HMSpec, MeasureSpec, PMPSpec, PmpError};
use crate::instrument::Alphabet;
use crate::numerics::ProbVector;

/// Serialized form of the three measure descriptions, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpecDoc {
    Pmp {
        alphabet: Vec<String>,
        matrices: BTreeMap<String, Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<BTreeMap<String, String>>,
        #[serde(rename = "delta_S", default, skip_serializing_if = "Option::is_none")]
        delta_s: Option<BTreeMap<String, f64>>,
    },
    Hm {
        alphabet: Vec<String>,
        #[serde(rename = "Q")]
        q_matrix: Vec<Vec<f64>>,
        #[serde(rename = "R")]
        emission: Vec<Vec<f64>>,
        p: Vec<f64>,
    },
    Fm {
        alphabet: Vec<String>,
        #[serde(rename = "Q")]
        p_matrix: Vec<Vec<f64>>,
        f: Vec<String>,
        p: Vec<f64>,
    },
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, PmpError> {
    let r = rows.len();
    let c = rows.first().map(Vec::len).unwrap_or(0);
    if r == 0 || rows.iter().any(|x| x.len() != c) {
        return Err(PmpError::Document("ragged or empty matrix".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl SpecDoc {
    pub fn build(&self) -> Result<MeasureSpec, PmpError> {
        Ok(match self {
            SpecDoc::Pmp { alphabet, matrices, p, theta, delta_s } => {
                let alphabet = Alphabet::new(alphabet.iter().cloned())?;
                let mats = alphabet
                    .symbols()
                    .iter()
                    .map(|s| {
                        matrices
                            .get(s)
                            .ok_or_else(|| PmpError::Document(format!("missing matrix for {s:?}")))
                            .and_then(|m| to_matrix(m))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let mut spec = match p {
                    Some(p) => PMPSpec::new(alphabet.clone(), mats, ProbVector::new(p.clone())?)?,
                    None => PMPSpec::from_matrices(alphabet.clone(), mats)?,
                };
                if let Some(t) = theta {
                    let th = alphabet
                        .symbols()
                        .iter()
                        .map(|s| alphabet.index_of(t.get(s).map(String::as_str).unwrap_or(s)))
                        .collect::<Result<Vec<_>, _>>()?;
                    spec = spec.with_theta(th)?;
                }
                if let Some(ds) = delta_s {
                    let v = alphabet
                        .symbols()
                        .iter()
                        .map(|s| ds.get(s).copied().ok_or_else(|| PmpError::Document(format!("missing ΔS for {s:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    spec = spec.with_delta_s(v)?;
                }
                MeasureSpec::Pmp(spec)
            }
            SpecDoc::Hm { alphabet, q_matrix, emission, p } => MeasureSpec::Hm(HMSpec::new(
                Alphabet::new(alphabet.iter().cloned())?,
                to_matrix(q_matrix)?,
                ProbVector::new(p.clone())?,
                to_matrix(emission)?,
            )?),
            SpecDoc::Fm { alphabet, p_matrix, f, p } => {
                let alphabet = Alphabet::new(alphabet.iter().cloned())?;
                let f = f.iter().map(|s| alphabet.index_of(s)).collect::<Result<Vec<_>, _>>()?;
                MeasureSpec::Fm(FMSpec::new(alphabet, to_matrix(p_matrix)?, ProbVector::new(p.clone())?, f)?)
            }
        })
    }

    pub fn from_spec(spec: &MeasureSpec) -> Self {
        let names = |a: &Alphabet| a.symbols().to_vec();
        match spec {
            MeasureSpec::Pmp(s) => {
                let a = s.alphabet();
                SpecDoc::Pmp {
                    alphabet: names(a),
                    matrices: (0..a.len()).map(|i| (a.symbol(i).to_string(), from_matrix(s.matrix(i)))).collect(),
                    p: Some(s.p().as_slice().to_vec()),
                    theta: Some((0..a.len()).map(|i| (a.symbol(i).to_string(), a.symbol(s.theta()[i]).to_string())).collect()),
                    delta_s: s.delta_s().map(|d| d.iter().enumerate().map(|(i, &v)| (a.symbol(i).to_string(), v)).collect()),
                }
            }
            MeasureSpec::Hm(s) => SpecDoc::Hm {
                alphabet: names(&s.alphabet),
                q_matrix: from_matrix(&s.q_matrix),
                emission: from_matrix(&s.emission),
                p: s.q.as_slice().to_vec(),
            },
            MeasureSpec::Fm(s) => SpecDoc::Fm {
                alphabet: names(&s.alphabet),
                p_matrix: from_matrix(&s.p_matrix),
                f: s.f.iter().map(|&i| s.alphabet.symbol(i).to_string()).collect(),
                p: s.p.as_slice().to_vec(),
            },
        }
    }
}

impl MeasureSpec {
    pub fn from_json(text: &str) -> Result<Self, PmpError> {
        let doc: SpecDoc = serde_json::from_str(text).map_err(|e| PmpError::Document(e.to_string()))?;
        doc.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecDoc::from_spec(self)).expect("plain data serializes")
    }
}
