use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Atom, AtomicMeasure, GridMeasure, Measure};
use crate::error::{Error, Result};

/// JSON form of a measure: `{dim, resolution?, atoms? | mass?, meta}`.
/// Grid masses are stored flat in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<Atom>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Vec<f64>>,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl MeasureDoc {
    pub fn from_measure(m: &Measure, meta: BTreeMap<String, serde_json::Value>) -> Self {
        match m {
            Measure::Atomic(a) => MeasureDoc {
                dim: a.dim(),
                resolution: None,
                atoms: Some(a.atoms().to_vec()),
                mass: None,
                meta,
            },
            Measure::Grid(g) => MeasureDoc {
                dim: g.dim(),
                resolution: Some(g.resolution()),
                atoms: None,
                mass: Some(g.mass().to_vec()),
                meta,
            },
        }
    }

    /// Rebuilds the measure, re-checking every invariant without renormalizing.
    pub fn to_measure(&self) -> Result<Measure> {
        match (&self.atoms, &self.mass, self.resolution) {
            (Some(atoms), None, None) => {
                Ok(AtomicMeasure::from_atoms(self.dim, atoms.clone())?.into())
            }
            (None, Some(mass), Some(res)) => {
                Ok(GridMeasure::from_normalized(self.dim, res, mass.clone())?.into())
            }
            _ => Err(Error::Serde(
                "measure document needs either atoms, or mass with resolution".into(),
            )),
        }
    }
}

impl Measure {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&MeasureDoc::from_measure(
            self,
            BTreeMap::new(),
        ))?)
    }

    pub fn from_json(s: &str) -> Result<Measure> {
        serde_json::from_str::<MeasureDoc>(s)?.to_measure()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{random_measure, RandomProfile};
    use proptest::prelude::*;

    #[test]
    fn rejects_mixed_documents() {
        let s = r#"{"dim":1,"atoms":[{"point":[0.0],"weight":1.0}],"mass":[1.0],"resolution":1}"#;
        assert!(Measure::from_json(s).is_err());
        let s = r#"{"dim":1,"atoms":[{"point":[0.0],"weight":0.5}]}"#;
        assert!(Measure::from_json(s).is_err());
    }

    #[test]
    fn grid_round_trip_is_exact() {
        let g: Measure = random_measure(2, 16, 3, RandomProfile::RoughDensity)
            .unwrap()
            .into();
        let back = Measure::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back, g);
    }

    proptest! {
        #[test]
        fn atomic_round_trip_is_bit_exact(
            pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 1e-6f64..10.0), 1..20)
        ) {
            let points = pts.iter().map(|p| vec![p.0, p.1]).collect();
            let weights = pts.iter().map(|p| p.2).collect();
            let m: Measure = AtomicMeasure::new(points, weights).unwrap().into();
            let back = Measure::from_json(&m.to_json().unwrap()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
