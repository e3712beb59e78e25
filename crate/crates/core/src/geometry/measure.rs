use crate::error::{Error, Result};

/// Finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure<P> {
    atoms: Vec<(P, f64)>,
}

impl<P: Clone> FiniteMeasure<P> {
    /// Weights must be positive and sum to one within `1e-12`.
    pub fn new(atoms: Vec<(P, f64)>) -> Result<Self> {
        if atoms.len() < 2 {
            return Err(Error::InvalidMeasure(format!("{} atom(s); at least two needed", atoms.len())));
        }
        if let Some((_, w)) = atoms.iter().find(|(_, w)| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(FiniteMeasure { atoms })
    }

    /// Rescale positive weights to sum to one.
    pub fn normalized(atoms: Vec<(P, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidMeasure("total weight is not positive".into()));
        }
        FiniteMeasure::new(atoms.into_iter().map(|(p, w)| (p, w / total)).collect())
    }

    pub fn uniform(points: Vec<P>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        FiniteMeasure::normalized(points.into_iter().map(|p| (p, w)).collect())
    }

    pub fn atoms(&self) -> &[(P, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.1).collect()
    }

    pub fn points(&self) -> Vec<P> {
        self.atoms.iter().map(|a| a.0.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_checks() {
        assert!(FiniteMeasure::new(vec![(0.0, 0.5), (1.0, 0.5)]).is_ok());
        assert!(FiniteMeasure::new(vec![(0.0, 0.5), (1.0, 0.6)]).is_err());
        assert!(FiniteMeasure::new(vec![(0.0, 1.0)]).is_err());
        assert!(FiniteMeasure::new(vec![(0.0, 1.5), (1.0, -0.5)]).is_err());
        let m = FiniteMeasure::normalized(vec![(0.0, 1.0), (1.0, 3.0)]).unwrap();
        assert_eq!(m.weights(), vec![0.25, 0.75]);
    }
}
