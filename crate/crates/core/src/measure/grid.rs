use super::{check_total, Atom, AtomicMeasure};
use crate::error::{invalid, Error, Result};

/// Mass array on the uniform `N^d` torus grid, stored flat in row-major order
/// (last axis fastest). Cell `(i_1,..,i_d)` is the cube `prod [i_k/N, (i_k+1)/N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    dim: usize,
    resolution: usize,
    mass: Vec<f64>,
}

impl GridMeasure {
    pub fn uniform(dim: usize, resolution: usize) -> Result<Self> {
        check_shape(dim, resolution)?;
        let cells = cell_count(dim, resolution)?;
        Ok(Self {
            dim,
            resolution,
            mass: vec![1.0 / cells as f64; cells],
        })
    }

    /// Normalizes a nonnegative mass array into a probability measure.
    pub fn from_unnormalized(dim: usize, resolution: usize, mut mass: Vec<f64>) -> Result<Self> {
        check_shape(dim, resolution)?;
        let cells = cell_count(dim, resolution)?;
        if mass.len() != cells {
            return Err(Error::DimensionMismatch {
                expected: cells,
                found: mass.len(),
            });
        }
        let mut total = 0.0;
        for (index, &w) in mass.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::NegativeWeight { index, weight: w });
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::ZeroTotalMass);
        }
        for w in &mut mass {
            *w /= total;
        }
        Ok(Self {
            dim,
            resolution,
            mass,
        })
    }

    /// Wraps an already normalized mass array, checking every invariant.
    pub fn from_normalized(dim: usize, resolution: usize, mass: Vec<f64>) -> Result<Self> {
        check_shape(dim, resolution)?;
        let m = Self {
            dim,
            resolution,
            mass,
        };
        m.validate()?;
        Ok(m)
    }

    /// A single occupied cell.
    pub fn point_mass(dim: usize, resolution: usize, cell: &[usize]) -> Result<Self> {
        check_shape(dim, resolution)?;
        if cell.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: cell.len(),
            });
        }
        if cell.iter().any(|&i| i >= resolution) {
            return Err(invalid("cell", "index out of range"));
        }
        let mut mass = vec![0.0; cell_count(dim, resolution)?];
        let flat = cell.iter().fold(0, |acc, &i| acc * resolution + i);
        mass[flat] = 1.0;
        Ok(Self {
            dim,
            resolution,
            mass,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn cell_count(&self) -> usize {
        self.mass.len()
    }

    /// Multi-index of a flat cell index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for k in (0..self.dim).rev() {
            idx[k] = flat % self.resolution;
            flat /= self.resolution;
        }
        idx
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        let n = self.resolution as f64;
        self.multi_index(flat)
            .into_iter()
            .map(|i| (i as f64 + 0.5) / n)
            .collect()
    }

    /// Visits every cell of nonzero mass as `(flat index, center, mass)`.
    pub fn for_each_cell(&self, mut f: impl FnMut(usize, &[f64], f64)) {
        let n = self.resolution;
        let nf = n as f64;
        let mut idx = vec![0usize; self.dim];
        let mut center: Vec<f64> = vec![0.5 / nf; self.dim];
        for (flat, &w) in self.mass.iter().enumerate() {
            if w > 0.0 {
                f(flat, &center, w);
            }
            // odometer increment, last axis fastest
            for k in (0..self.dim).rev() {
                idx[k] += 1;
                if idx[k] < n {
                    center[k] = (idx[k] as f64 + 0.5) / nf;
                    break;
                }
                idx[k] = 0;
                center[k] = 0.5 / nf;
            }
        }
    }

    pub fn nonzero_cells(&self) -> usize {
        self.mass.iter().filter(|&&w| w > 0.0).count()
    }

    /// The atomic measure placing each cell's mass at its center.
    pub fn to_atomic(&self) -> AtomicMeasure {
        let mut atoms = Vec::new();
        self.for_each_cell(|_, p, w| {
            atoms.push(Atom {
                point: p.to_vec(),
                weight: w,
            })
        });
        AtomicMeasure::from_atoms(self.dim, atoms).expect("grid invariants imply atomic invariants")
    }

    pub fn validate(&self) -> Result<()> {
        let cells = cell_count(self.dim, self.resolution)?;
        if self.mass.len() != cells {
            return Err(Error::DimensionMismatch {
                expected: cells,
                found: self.mass.len(),
            });
        }
        let mut total = 0.0;
        for (index, &w) in self.mass.iter().enumerate() {
            if !(w >= 0.0) {
                return Err(Error::NegativeWeight { index, weight: w });
            }
            total += w;
        }
        check_total(total)
    }
}

fn check_shape(dim: usize, resolution: usize) -> Result<()> {
    if dim == 0 {
        return Err(invalid("dim", "must be positive"));
    }
    if resolution < 2 {
        return Err(invalid("resolution", "must be at least 2"));
    }
    Ok(())
}

fn cell_count(dim: usize, resolution: usize) -> Result<usize> {
    u32::try_from(dim)
        .ok()
        .and_then(|d| resolution.checked_pow(d))
        .ok_or_else(|| invalid("resolution", "grid too large"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_cells() {
        let g = GridMeasure::uniform(1, 4).unwrap();
        assert_eq!(g.mass(), &[0.25; 4]);
        let g = GridMeasure::uniform(2, 2).unwrap();
        assert_eq!(g.mass(), &[0.25; 4]);
        let g = GridMeasure::uniform(1, 1000).unwrap();
        assert!((g.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(GridMeasure::uniform(0, 4).is_err());
        assert!(GridMeasure::uniform(1, 1).is_err());
        assert!(GridMeasure::uniform(1, 0).is_err());
    }

    #[test]
    fn odometer_matches_multi_index() {
        let g = GridMeasure::uniform(3, 3).unwrap();
        let mut seen = 0;
        g.for_each_cell(|flat, p, _| {
            assert_eq!(p, g.cell_center(flat).as_slice());
            seen += 1;
        });
        assert_eq!(seen, 27);
        assert_eq!(g.multi_index(5), vec![0, 1, 2]);
    }

    #[test]
    fn point_mass_cell() {
        let g = GridMeasure::point_mass(2, 4, &[1, 3]).unwrap();
        assert_eq!(g.nonzero_cells(), 1);
        let a = g.to_atomic();
        assert_eq!(a.atoms()[0].point, vec![0.375, 0.875]);
    }
}
