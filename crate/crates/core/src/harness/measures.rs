//! Measure files.
//!
//! ```json
//! {"kind": "complex", "atoms": [{"point": "4@0.5,0.25", "weight": 1.0}, {"point": "0", "weight": 2.0}]}
//! {"kind": "cone", "vertex": 0, "atoms": [{"point": "0:1.0,1:0.5", "weight": 1.0}]}
//! ```
//!
//! Complex points are `cell@x1,...` (a bare cell id for a vertex cell); cone
//! points are `axis:value` pairs, `O` for the apex. Weights are normalized.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex::{format_complex_point, parse_complex_point, ComplexPoint};
use crate::error::{Error, Result};
use crate::geometry::{ConePoint, FiniteMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Complex,
    Cone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomRecord {
    pub point: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub kind: MeasureKind,
    /// Apex of the cone, required for cone measures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<usize>,
    pub atoms: Vec<AtomRecord>,
}

impl MeasureFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: MeasureFile = serde_json::from_str(text)?;
        if m.kind == MeasureKind::Cone && m.vertex.is_none() {
            return Err(Error::Parse("cone measure needs a `vertex`".into()));
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure file serializes")
    }

    pub fn from_complex(mu: &FiniteMeasure<ComplexPoint>) -> Self {
        let atoms = mu
            .atoms()
            .iter()
            .map(|(p, w)| AtomRecord { point: format_complex_point(p), weight: *w })
            .collect();
        MeasureFile { kind: MeasureKind::Complex, vertex: None, atoms }
    }

    pub fn from_cone(vertex: usize, mu: &FiniteMeasure<ConePoint>) -> Self {
        let atoms = mu.atoms().iter().map(|(p, w)| AtomRecord { point: p.to_string(), weight: *w }).collect();
        MeasureFile { kind: MeasureKind::Cone, vertex: Some(vertex), atoms }
    }

    fn expect(&self, kind: MeasureKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidMeasure(format!("expected a {kind:?} measure, file holds {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn complex_measure(&self) -> Result<FiniteMeasure<ComplexPoint>> {
        self.expect(MeasureKind::Complex)?;
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok((parse_complex_point(&a.point)?, a.weight)))
            .collect::<Result<Vec<_>>>()?;
        FiniteMeasure::normalized(atoms)
    }

    pub fn cone_measure(&self) -> Result<FiniteMeasure<ConePoint>> {
        self.expect(MeasureKind::Cone)?;
        let atoms = self.atoms.iter().map(|a| Ok((ConePoint::parse(&a.point)?, a.weight))).collect::<Result<Vec<_>>>()?;
        FiniteMeasure::normalized(atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let mu = FiniteMeasure::normalized(vec![(ConePoint::axis(0, 1.0), 1.0), (ConePoint::axis(2, 0.5), 3.0)]).unwrap();
        let file = MeasureFile::from_cone(4, &mu);
        let back = MeasureFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.cone_measure().unwrap(), mu);
        assert!(back.complex_measure().is_err());
    }

    #[test]
    fn cone_needs_vertex() {
        assert!(MeasureFile::from_json(r#"{"kind":"cone","atoms":[{"point":"O","weight":1}]}"#).is_err());
        let m = MeasureFile::from_json(r#"{"kind":"complex","atoms":[{"point":"0","weight":1},{"point":"3@0.5","weight":1}]}"#)
            .unwrap();
        assert_eq!(m.complex_measure().unwrap().len(), 2);
    }
}
