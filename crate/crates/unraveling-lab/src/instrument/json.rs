use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Alphabet, CPMap, DensityMatrix, Instrument, InstrumentError};
use crate::numerics::{CMatrix, C64};

/// Complex matrix as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexMatrixDoc(pub Vec<Vec<[f64; 2]>>);

impl ComplexMatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    pub fn to_matrix(&self, dim: usize) -> Result<CMatrix, InstrumentError> {
        if self.0.len() != dim || self.0.iter().any(|r| r.len() != dim) {
            return Err(InstrumentError::Document(format!("expected a {dim}x{dim} matrix")));
        }
        Ok(CMatrix::from_fn(dim, dim, |i, j| C64::new(self.0[i][j][0], self.0[i][j][1])))
    }
}

/// Serialized instrument. `rho` defaults to the unique invariant state and
/// `theta` to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentDoc {
    pub dim: usize,
    pub alphabet: Vec<String>,
    pub kraus: BTreeMap<String, Vec<ComplexMatrixDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<ComplexMatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<BTreeMap<String, String>>,
    #[serde(rename = "delta_S", default, skip_serializing_if = "Option::is_none")]
    pub delta_s: Option<BTreeMap<String, f64>>,
}

impl InstrumentDoc {
    pub fn build(&self) -> Result<Instrument, InstrumentError> {
        let alphabet = Alphabet::new(self.alphabet.iter().cloned())?;
        if let Some(extra) = self.kraus.keys().find(|k| alphabet.index_of(k).is_err()) {
            return Err(InstrumentError::UnknownSymbol(extra.clone()));
        }
        let maps = alphabet
            .symbols()
            .iter()
            .map(|s| {
                let ks = self.kraus.get(s).map(Vec::as_slice).unwrap_or(&[]);
                let ks = ks.iter().map(|k| k.to_matrix(self.dim)).collect::<Result<Vec<_>, _>>()?;
                CPMap::new(self.dim, ks)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let theta = match &self.theta {
            None => (0..alphabet.len()).collect(),
            Some(t) => alphabet
                .symbols()
                .iter()
                .map(|s| alphabet.index_of(t.get(s).map(String::as_str).unwrap_or(s)))
                .collect::<Result<Vec<_>, _>>()?,
        };
        let delta_s = self
            .delta_s
            .as_ref()
            .map(|m| {
                alphabet
                    .symbols()
                    .iter()
                    .map(|s| m.get(s).copied().ok_or_else(|| InstrumentError::Document(format!("missing ΔS for {s:?}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        match &self.rho {
            Some(r) => Instrument::new(alphabet, maps, DensityMatrix::new(r.to_matrix(self.dim)?)?, theta, delta_s),
            None => Instrument::with_invariant_state(alphabet, maps, theta, delta_s),
        }
    }

    pub fn from_instrument(inst: &Instrument) -> Self {
        let a = inst.alphabet();
        let sym = |i: usize| a.symbol(i).to_string();
        Self {
            dim: inst.dim(),
            alphabet: a.symbols().to_vec(),
            kraus: (0..a.len())
                .map(|i| (sym(i), inst.map(i).kraus().iter().map(ComplexMatrixDoc::from_matrix).collect()))
                .collect(),
            rho: Some(ComplexMatrixDoc::from_matrix(inst.rho().matrix())),
            theta: Some((0..a.len()).map(|i| (sym(i), sym(inst.theta()[i]))).collect()),
            delta_s: inst.delta_s().map(|ds| ds.iter().enumerate().map(|(i, &v)| (sym(i), v)).collect()),
        }
    }
}

impl Instrument {
    pub fn from_json(text: &str) -> Result<Self, InstrumentError> {
        let doc: InstrumentDoc = serde_json::from_str(text).map_err(|e| InstrumentError::Document(e.to_string()))?;
        doc.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstrumentDoc::from_instrument(self)).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_word_probabilities() {
        let text = r#"{
            "dim": 2,
            "alphabet": ["a", "b"],
            "kraus": {
                "a": [[[[0.8, 0], [0, 0]], [[0, 0], [0.6, 0]]]],
                "b": [[[[0.6, 0], [0, 0]], [[0, 0], [0.8, 0]]]]
            },
            "rho": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]],
            "theta": {"a": "b", "b": "a"}
        }"#;
        let inst = Instrument::from_json(text).unwrap();
        let back = Instrument::from_json(&inst.to_json()).unwrap();
        for w in ["a", "ab", "bba", "abab"] {
            let x = inst.log_prob_str(w).unwrap();
            let y = back.log_prob_str(w).unwrap();
            assert!((x - y).abs() < 1e-14);
        }
        assert_eq!(back.theta(), &[1, 0]);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(Instrument::from_json("{}").is_err());
        let wrong_shape = r#"{"dim": 2, "alphabet": ["a"], "kraus": {"a": [[[[1, 0]]]]}}"#;
        assert!(Instrument::from_json(wrong_shape).is_err());
    }
}
