use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used by [`FourierTable::validate_probability`].
pub const TABLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Store {
    /// Every frequency of the box, lexicographic order.
    Dense(Vec<Complex64>),
    /// A subset of the box.
    Sparse(BTreeMap<Vec<i64>, Complex64>),
}

/// Complex coefficients at integer frequencies `xi` with `|xi|_inf <= box_radius`.
///
/// Dense tables hold the whole box; sparse tables hold only the frequencies a
/// verifier asked for, and report any other lookup as not tabulated.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable {
    dim: usize,
    box_radius: usize,
    store: Store,
    tag: Option<String>,
}

impl FourierTable {
    /// Fills the whole box from `f`, visiting frequencies in lexicographic order.
    pub fn from_fn(dim: usize, box_radius: usize, mut f: impl FnMut(&[i64]) -> Complex64) -> Self {
        let mut coeffs = Vec::with_capacity(box_len(dim, box_radius));
        for_each_in_box(dim, box_radius as i64, |xi| coeffs.push(f(xi)));
        Self {
            dim,
            box_radius,
            store: Store::Dense(coeffs),
            tag: None,
        }
    }

    pub(crate) fn dense(dim: usize, box_radius: usize, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), box_len(dim, box_radius));
        Self {
            dim,
            box_radius,
            store: Store::Dense(coeffs),
            tag: None,
        }
    }

    /// A table holding exactly the given frequencies.
    pub fn sparse(dim: usize, entries: BTreeMap<Vec<i64>, Complex64>) -> Result<Self> {
        let mut radius = 1usize;
        for xi in entries.keys() {
            if xi.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: xi.len(),
                });
            }
            radius = radius.max(sup_norm(xi) as usize);
        }
        Ok(Self {
            dim,
            box_radius: radius,
            store: Store::Sparse(entries),
            tag: None,
        })
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_radius(&self) -> usize {
        self.box_radius
    }

    pub fn tag(&self) -> Option<&str> {
        self.tag.as_deref()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.store, Store::Dense(_))
    }

    pub fn len(&self) -> usize {
        match &self.store {
            Store::Dense(c) => c.len(),
            Store::Sparse(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, xi: &[i64]) -> Result<Complex64> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: xi.len(),
            });
        }
        let r = self.box_radius as i64;
        if xi.iter().any(|&c| c.abs() > r) {
            return Err(Error::FrequencyOutsideBox {
                xi: xi.to_vec(),
                box_radius: self.box_radius,
            });
        }
        match &self.store {
            Store::Dense(c) => {
                let side = 2 * r + 1;
                let idx = xi.iter().fold(0i64, |acc, &k| acc * side + (k + r));
                Ok(c[idx as usize])
            }
            Store::Sparse(m) => m
                .get(xi)
                .copied()
                .ok_or_else(|| Error::FrequencyNotTabulated { xi: xi.to_vec() }),
        }
    }

    /// Every stored `(xi, coefficient)` in lexicographic order of `xi`.
    pub fn for_each(&self, mut f: impl FnMut(&[i64], Complex64)) {
        match &self.store {
            Store::Dense(c) => {
                let mut i = 0;
                for_each_in_box(self.dim, self.box_radius as i64, |xi| {
                    f(xi, c[i]);
                    i += 1;
                });
            }
            Store::Sparse(m) => {
                for (xi, &v) in m {
                    f(xi, v);
                }
            }
        }
    }

    /// Checks the invariants of the transform of a probability measure:
    /// unit mass at zero, Hermitian symmetry and `|c| <= 1`.
    pub fn validate_probability(&self) -> Result<()> {
        let zero = vec![0; self.dim];
        if let Ok(c0) = self.get(&zero) {
            if (c0 - Complex64::new(1.0, 0.0)).norm() > TABLE_TOLERANCE {
                return Err(Error::InvariantViolated(format!(
                    "coefficient at 0 is {c0}, expected 1"
                )));
            }
        }
        let mut err = None;
        self.for_each(|xi, c| {
            if err.is_some() {
                return;
            }
            if c.norm() > 1.0 + TABLE_TOLERANCE {
                err = Some(format!("|coefficient| at {xi:?} is {}", c.norm()));
                return;
            }
            let neg: Vec<i64> = xi.iter().map(|k| -k).collect();
            if let Ok(cn) = self.get(&neg) {
                if (cn - c.conj()).norm() > TABLE_TOLERANCE {
                    err = Some(format!("Hermitian symmetry fails at {xi:?}"));
                }
            }
        });
        match err {
            Some(e) => Err(Error::InvariantViolated(e)),
            None => Ok(()),
        }
    }

    pub fn to_doc(&self) -> TableDoc {
        let mut entries = Vec::with_capacity(self.len());
        self.for_each(|xi, c| entries.push((xi.to_vec(), c.re, c.im)));
        TableDoc {
            dim: self.dim,
            box_radius: self.box_radius,
            tag: self.tag.clone(),
            entries,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<TableDoc>(s)?.into_table()
    }
}

/// JSON form `{dim, box_radius, tag?, entries: [[xi..], re, im]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDoc {
    pub dim: usize,
    pub box_radius: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    pub entries: Vec<(Vec<i64>, f64, f64)>,
}

impl TableDoc {
    pub fn into_table(self) -> Result<FourierTable> {
        let mut map = BTreeMap::new();
        for (xi, re, im) in self.entries {
            if xi.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: xi.len(),
                });
            }
            if sup_norm(&xi) > self.box_radius as u64 {
                return Err(Error::FrequencyOutsideBox {
                    xi,
                    box_radius: self.box_radius,
                });
            }
            map.insert(xi, Complex64::new(re, im));
        }
        let mut table = if map.len() == box_len(self.dim, self.box_radius) {
            FourierTable::dense(self.dim, self.box_radius, map.into_values().collect())
        } else {
            let mut t = FourierTable::sparse(self.dim, map)?;
            t.box_radius = self.box_radius;
            t
        };
        table.tag = self.tag;
        Ok(table)
    }
}

pub(crate) fn box_len(dim: usize, radius: usize) -> usize {
    (2 * radius + 1).pow(dim as u32)
}

pub(crate) fn sup_norm(xi: &[i64]) -> u64 {
    xi.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}

/// Visits every integer vector of `[-r, r]^dim` in lexicographic order.
pub fn for_each_in_box(dim: usize, r: i64, mut f: impl FnMut(&[i64])) {
    let mut xi = vec![-r; dim];
    loop {
        f(&xi);
        let mut k = dim;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if xi[k] < r {
                xi[k] += 1;
                break;
            }
            xi[k] = -r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_enumeration_is_lexicographic() {
        let mut seen = Vec::new();
        for_each_in_box(2, 1, |xi| seen.push(xi.to_vec()));
        assert_eq!(seen.len(), 9);
        assert_eq!(seen[0], vec![-1, -1]);
        assert_eq!(seen[1], vec![-1, 0]);
        assert_eq!(seen[8], vec![1, 1]);
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(seen, sorted);
    }

    #[test]
    fn dense_lookup_and_bounds() {
        let t = FourierTable::from_fn(2, 3, |xi| Complex64::new(xi[0] as f64, xi[1] as f64));
        assert_eq!(t.get(&[2, -3]).unwrap(), Complex64::new(2.0, -3.0));
        assert!(matches!(
            t.get(&[4, 0]),
            Err(Error::FrequencyOutsideBox { .. })
        ));
    }

    #[test]
    fn sparse_lookup_reports_missing() {
        let mut m = BTreeMap::new();
        m.insert(vec![0], Complex64::new(1.0, 0.0));
        m.insert(vec![5], Complex64::new(0.3, 0.0));
        let t = FourierTable::sparse(1, m).unwrap();
        assert_eq!(t.box_radius(), 5);
        assert!(matches!(
            t.get(&[2]),
            Err(Error::FrequencyNotTabulated { .. })
        ));
    }

    #[test]
    fn json_round_trip_keeps_density_and_tag() {
        let t = FourierTable::from_fn(1, 4, |xi| Complex64::new(0.1 * xi[0] as f64, 1.0 / 3.0))
            .with_tag("plane:[1]");
        let back = FourierTable::from_json(&t.to_json().unwrap()).unwrap();
        assert!(back.is_dense());
        assert_eq!(back, t);
    }

    #[test]
    fn validation_catches_asymmetry() {
        let t = FourierTable::from_fn(1, 2, |xi| {
            if xi[0] == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.5)
            }
        });
        assert!(t.validate_probability().is_err());
        let t = FourierTable::from_fn(1, 2, |xi| Complex64::new(1.0, 0.1 * xi[0] as f64));
        assert!(t.validate_probability().is_err());
    }
}
