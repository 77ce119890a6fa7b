use serde::{Deserialize, Serialize};

use super::{check_total, wrap_unit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// Finitely many weighted points in `[0,1)^d` with total weight one.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    /// Builds a measure from points and nonnegative weights. Points are reduced
    /// mod 1 and weights renormalized to sum to one.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("points"));
        }
        if weights.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::EmptyInput("point coordinates"));
        }
        let mut total = 0.0;
        for (index, (p, &w)) in points.iter().zip(&weights).enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::NegativeWeight { index, weight: w });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvariantViolated(format!(
                    "non-finite coordinate in atom {index}"
                )));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::ZeroTotalMass);
        }
        let atoms = points
            .into_iter()
            .zip(weights)
            .map(|(p, w)| Atom {
                point: p.into_iter().map(wrap_unit).collect(),
                weight: w / total,
            })
            .collect();
        Ok(Self { dim, atoms })
    }

    pub fn point_mass(point: &[f64]) -> Result<Self> {
        Self::new(vec![point.to_vec()], vec![1.0])
    }

    /// Wraps already-normalized atoms, checking every invariant.
    pub fn from_atoms(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        let m = Self { dim, atoms };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Product measure on `[0,1)^{d1+d2}`, coordinates of `self` first.
    pub fn product(&self, other: &AtomicMeasure) -> AtomicMeasure {
        let mut atoms = Vec::with_capacity(self.len() * other.len());
        for a in &self.atoms {
            for b in &other.atoms {
                let mut point = a.point.clone();
                point.extend_from_slice(&b.point);
                atoms.push(Atom {
                    point,
                    weight: a.weight * b.weight,
                });
            }
        }
        AtomicMeasure {
            dim: self.dim + other.dim,
            atoms,
        }
    }

    /// n-fold product of `self` with itself.
    pub fn power(&self, n: usize) -> AtomicMeasure {
        let mut out = self.clone();
        for _ in 1..n {
            out = out.product(self);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::EmptyInput("point coordinates"));
        }
        if self.atoms.is_empty() {
            return Err(Error::EmptyInput("atoms"));
        }
        let mut total = 0.0;
        for (index, a) in self.atoms.iter().enumerate() {
            if a.point.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: a.point.len(),
                });
            }
            if !(a.weight >= 0.0) {
                return Err(Error::NegativeWeight {
                    index,
                    weight: a.weight,
                });
            }
            if a.point.iter().any(|x| !(0.0..1.0).contains(x)) {
                return Err(Error::InvariantViolated(format!(
                    "atom {index} has a coordinate outside [0,1)"
                )));
            }
            total += a.weight;
        }
        check_total(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_is_renormalized() {
        let m = AtomicMeasure::new(vec![vec![0.0]], vec![5.0]).unwrap();
        assert_eq!(m.atoms()[0].weight, 1.0);
        assert_eq!(m.atoms()[0].point, vec![0.0]);
    }

    #[test]
    fn two_equal_atoms_split_mass() {
        let m = AtomicMeasure::new(vec![vec![0.0], vec![0.5]], vec![1.0, 1.0]).unwrap();
        assert_eq!(m.atoms()[0].weight, 0.5);
        assert_eq!(m.atoms()[1].weight, 0.5);
    }

    #[test]
    fn planar_point_mass() {
        let m = AtomicMeasure::new(vec![vec![0.25, 0.75]], vec![1.0]).unwrap();
        assert_eq!(m.dim(), 2);
        m.validate().unwrap();
    }

    #[test]
    fn points_are_reduced_mod_one() {
        let m = AtomicMeasure::new(vec![vec![1.25, -0.25, -1e-20]], vec![1.0]).unwrap();
        assert_eq!(m.atoms()[0].point, vec![0.25, 0.75, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            AtomicMeasure::new(vec![], vec![]),
            Err(Error::EmptyInput("points"))
        );
        assert!(matches!(
            AtomicMeasure::new(vec![vec![0.1], vec![0.2]], vec![1.0, -1.0]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert!(matches!(
            AtomicMeasure::new(vec![vec![0.1], vec![0.2, 0.3]], vec![1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            AtomicMeasure::new(vec![vec![0.1]], vec![0.0]),
            Err(Error::ZeroTotalMass)
        );
    }

    #[test]
    fn product_multiplies_weights() {
        let a = AtomicMeasure::new(vec![vec![0.0], vec![0.5]], vec![1.0, 3.0]).unwrap();
        let p = a.power(2);
        assert_eq!(p.dim(), 2);
        assert_eq!(p.len(), 4);
        p.validate().unwrap();
        assert!((p.atoms()[3].weight - 0.5625).abs() < 1e-15);
    }
}
