//! JSON views of states, POVMs, schedules and count tables.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::povm::{build_circuit, synthesize, IterationPair, PovmElement, PovmSet};
use crate::tolerance::Tolerances;
use crate::walk::{Coin, CoinLayer, CoinOp, CoinSchedule, WalkState};

/// A complex number; plain JSON numbers are read as real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ComplexRepr")]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Real(f64),
    Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl From<ComplexRepr> for ComplexJson {
    fn from(r: ComplexRepr) -> Self {
        match r {
            ComplexRepr::Real(re) => ComplexJson { re, im: 0.0 },
            ComplexRepr::Parts { re, im } => ComplexJson { re, im },
        }
    }
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

pub type MatrixJson = [[ComplexJson; 2]; 2];

pub fn matrix_to_json(m: &Mat2) -> MatrixJson {
    m.0.map(|row| row.map(ComplexJson::from))
}

pub fn matrix_from_json(m: &MatrixJson) -> Mat2 {
    Mat2(m.map(|row| row.map(Complex64::from)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub x: i64,
    pub coin: Coin,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkStateJson {
    pub entries: Vec<EntryJson>,
}

impl From<&WalkState> for WalkStateJson {
    fn from(s: &WalkState) -> Self {
        WalkStateJson {
            entries: s
                .entries()
                .map(|((x, coin), a)| EntryJson {
                    x,
                    coin,
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }
}

impl From<&WalkStateJson> for WalkState {
    fn from(j: &WalkStateJson) -> Self {
        let mut s = WalkState::default();
        for e in &j.entries {
            s.add(e.x, e.coin, Complex64::new(e.re, e.im));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmElementJson {
    pub label: String,
    pub port: i64,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmSetJson {
    pub elements: Vec<PovmElementJson>,
    #[serde(default)]
    pub residual: f64,
}

impl From<&PovmSet> for PovmSetJson {
    fn from(p: &PovmSet) -> Self {
        PovmSetJson {
            elements: p
                .elements
                .iter()
                .map(|e| PovmElementJson {
                    label: e.label.clone(),
                    port: e.port,
                    matrix: matrix_to_json(&e.matrix),
                })
                .collect(),
            residual: p.completeness_residual,
        }
    }
}

impl From<&PovmSetJson> for PovmSet {
    /// The stored residual is ignored and recomputed.
    fn from(j: &PovmSetJson) -> Self {
        PovmSet::new(
            j.elements
                .iter()
                .map(|e| PovmElement::new(e.label.clone(), e.port, matrix_from_json(&e.matrix)))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteCoinJson {
    pub x: i64,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairJson {
    pub c1: MatrixJson,
    pub c2: MatrixJson,
}

/// Custom circuit file: explicit coin layers, peel-off iteration pairs, or a
/// target POVM to synthesize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CircuitFile {
    Steps { steps: Vec<Vec<SiteCoinJson>> },
    Pairs { pairs: Vec<PairJson> },
    Povm(PovmSetJson),
}

fn checked_coin(m: &MatrixJson, step: usize, position: i64, tol: f64) -> Result<CoinOp> {
    CoinOp::new(matrix_from_json(m), tol).map_err(|defect| Error::NonUnitaryCoin {
        step: Some(step),
        position,
        defect,
    })
}

impl CircuitFile {
    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Builds the schedule, checking every coin for unitarity.
    pub fn schedule(&self, tol: &Tolerances) -> Result<CoinSchedule> {
        match self {
            CircuitFile::Steps { steps } => {
                let layers = steps
                    .iter()
                    .enumerate()
                    .map(|(i, layer)| {
                        layer
                            .iter()
                            .map(|s| Ok((s.x, checked_coin(&s.matrix, i + 1, s.x, tol.unitarity)?)))
                            .collect::<Result<CoinLayer>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                CoinSchedule::with_tolerance(layers, tol.unitarity)
            }
            CircuitFile::Pairs { pairs } => {
                let pairs = pairs
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        Ok(IterationPair::new(
                            checked_coin(&p.c1, 2 * k + 1, 0, tol.unitarity)?,
                            checked_coin(&p.c2, 2 * k + 2, 1, tol.unitarity)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                build_circuit(&pairs)
            }
            CircuitFile::Povm(p) => build_circuit(&synthesize(&PovmSet::from(p), tol)?.pairs),
        }
    }
}

/// Count table with string-free keys for CSV writers and tests.
pub fn count_table_json(table: &crate::experiment::CountTable) -> serde_json::Value {
    serde_json::to_value(table).expect("count tables serialize")
}

/// Port probabilities as a JSON object keyed by port.
pub fn distribution_json(dist: &BTreeMap<i64, f64>) -> serde_json::Value {
    serde_json::to_value(dist).expect("distributions serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::extract_povm;
    use crate::scenario::Scenario;

    #[test]
    fn complex_accepts_bare_numbers() {
        let m: MatrixJson = serde_json::from_str(r#"[[0, 1], [{"re": 1}, {"re": 0, "im": -1}]]"#).unwrap();
        let m = matrix_from_json(&m);
        assert_eq!(m.0[0][1], Complex64::new(1.0, 0.0));
        assert_eq!(m.0[1][1], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn walk_state_round_trip() {
        let s = crate::walk::run(&Scenario::Trine.schedule().unwrap(), crate::linalg::Vec2::H).unwrap();
        let j = WalkStateJson::from(&s);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.starts_with(r#"{"entries":[{"x":0,"coin":"R""#));
        let back = WalkState::from(&serde_json::from_str::<WalkStateJson>(&text).unwrap());
        assert_eq!(back, s);
    }

    #[test]
    fn povm_round_trip() {
        let p = extract_povm(&Scenario::Sic.schedule().unwrap()).unwrap();
        let j = PovmSetJson::from(&p);
        let back = PovmSet::from(&serde_json::from_str::<PovmSetJson>(&serde_json::to_string(&j).unwrap()).unwrap());
        assert_eq!(back, p);
    }

    #[test]
    fn circuit_file_variants() {
        let tol = Tolerances::default();
        let empty = CircuitFile::parse(r#"{"steps": []}"#).unwrap();
        assert!(empty.schedule(&tol).unwrap().is_empty());

        let vn = CircuitFile::parse(
            r#"{"pairs": [{"c1": [[1,0],[0,1]], "c2": [[1,0],[0,1]]}]}"#,
        )
        .unwrap();
        let povm = extract_povm(&vn.schedule(&tol).unwrap()).unwrap();
        assert_eq!(povm.len(), 2);

        let target = CircuitFile::parse(
            r#"{"elements": [{"label":"a","port":0,"matrix":[[1,0],[0,0]]},
                             {"label":"b","port":0,"matrix":[[0,0],[0,1]]}]}"#,
        )
        .unwrap();
        assert!(matches!(target, CircuitFile::Povm(_)));
        assert_eq!(extract_povm(&target.schedule(&tol).unwrap()).unwrap().len(), 2);
    }

    #[test]
    fn non_unitary_file_names_site() {
        let f = CircuitFile::parse(r#"{"steps": [[{"x": 0, "matrix": [[1,1],[0,1]]}]]}"#).unwrap();
        match f.schedule(&Tolerances::default()) {
            Err(Error::NonUnitaryCoin { step: Some(1), position: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
