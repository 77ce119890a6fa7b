//! Probability measures on the torus `[0,1)^d`.
//!
//! Two representations are used throughout: [`AtomicMeasure`] (finitely many
//! weighted points) and [`GridMeasure`] (a mass array on a uniform `N^d` grid).
//! A grid cell carries the mass of its half-open cube and is treated as an atom
//! at the cube center, so both representations share one transform path.

mod atomic;
mod construct;
mod grid;
mod io;
mod profile;

pub use atomic::{Atom, AtomicMeasure};
pub use construct::{
    approximant_measure, localize, localize_atomic, localization_profile, random_measure,
    Approximant, ApproximantSpec, DeltaRule, RandomProfile,
};
pub use grid::GridMeasure;
pub use io::MeasureDoc;
pub use profile::{plane_basis, BumpProfile, ProfileKind, BAND_LIMITED_REACH};

use crate::error::{Error, Result};

/// Relative tolerance on total mass.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Either representation, as accepted by the transforms and verifiers.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Atomic(AtomicMeasure),
    Grid(GridMeasure),
}

impl Measure {
    pub fn dim(&self) -> usize {
        match self {
            Measure::Atomic(m) => m.dim(),
            Measure::Grid(m) => m.dim(),
        }
    }

    /// Visits every atom with nonzero weight. Grid cells are visited in
    /// row-major order with their centers as points.
    pub fn for_each_atom(&self, mut f: impl FnMut(&[f64], f64)) {
        match self {
            Measure::Atomic(m) => {
                for a in m.atoms() {
                    f(&a.point, a.weight);
                }
            }
            Measure::Grid(m) => m.for_each_cell(|_, p, w| f(p, w)),
        }
    }

    /// Cell width `1/N` for grids, `None` for atomic measures.
    pub fn cell_width(&self) -> Option<f64> {
        match self {
            Measure::Atomic(_) => None,
            Measure::Grid(m) => Some(1.0 / m.resolution() as f64),
        }
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = 0.0;
        self.for_each_atom(|_, w| s += w);
        s
    }

    /// The atomic measure with the same atoms (cell centers for grids).
    pub fn to_atomic(&self) -> AtomicMeasure {
        match self {
            Measure::Atomic(m) => m.clone(),
            Measure::Grid(m) => m.to_atomic(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Measure::Atomic(m) => m.validate(),
            Measure::Grid(m) => m.validate(),
        }
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl From<AtomicMeasure> for Measure {
    fn from(m: AtomicMeasure) -> Self {
        Measure::Atomic(m)
    }
}

impl From<GridMeasure> for Measure {
    fn from(m: GridMeasure) -> Self {
        Measure::Grid(m)
    }
}

/// Reduces `x` into `[0,1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid rounds tiny negatives up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Euclidean distance on the torus between two points of `[0,1)^d`.
pub fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = dist_to_integer(x - y);
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn check_total(total: f64) -> Result<()> {
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvariantViolated(format!(
            "total mass {total} differs from 1"
        )));
    }
    Ok(())
}
