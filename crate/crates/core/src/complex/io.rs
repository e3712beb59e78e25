use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ComplexPoint;
use crate::error::{Error, Result};

/// Serialized complex: vertex count, edge list and cube corner lists (binary
/// corner order, length a power of two).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawComplex {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub cubes: Vec<Vec<usize>>,
}

impl RawComplex {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Parse `cell` or `cell@x1,x2,...`.
pub fn parse_complex_point(text: &str) -> Result<ComplexPoint> {
    let text = text.trim();
    let (cell, coords) = match text.split_once('@') {
        Some((c, rest)) => (c, rest),
        None => (text, ""),
    };
    let cell: usize = cell
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad cell id in point `{text}`")))?;
    let coords = coords
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad coordinate `{s}`"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexPoint { cell, coords })
}

pub fn format_complex_point(p: &ComplexPoint) -> String {
    if p.coords.is_empty() {
        return p.cell.to_string();
    }
    let coords: Vec<String> = p.coords.iter().map(|x| format!("{x}")).collect();
    format!("{}@{}", p.cell, coords.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_text_roundtrip() {
        let p = parse_complex_point("7@0.25,0.5").unwrap();
        assert_eq!(p, ComplexPoint::new(7, vec![0.25, 0.5]));
        assert_eq!(format_complex_point(&p), "7@0.25,0.5");
        assert_eq!(parse_complex_point("3").unwrap(), ComplexPoint::vertex(3));
        assert!(parse_complex_point("x@1").is_err());
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(RawComplex::from_json(r#"{"vertices":1,"edges":[],"faces":[]}"#).is_err());
        let r = RawComplex::from_json(r#"{"vertices":2,"edges":[[0,1]]}"#).unwrap();
        assert!(r.cubes.is_empty());
    }
}
