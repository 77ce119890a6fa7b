use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::Measure;

/// Euclidean distance from `x` to the nearest point of `Z^n`.
pub fn lattice_distance(x: &[f64]) -> f64 {
    x.iter()
        .map(|c| {
            let f = c - c.round();
            f * f
        })
        .sum::<f64>()
        .sqrt()
}

/// Distance from `q . x` to the nearest integer.
pub fn linear_form_distance(q: &[i64], x: &[f64]) -> f64 {
    let s: f64 = q.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
    (s - s.round()).abs()
}

pub fn euclidean_norm(q: &[i64]) -> f64 {
    q.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt()
}

pub fn gcd(q: &[i64]) -> u64 {
    fn g(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    q.iter().fold(0, |acc, &c| g(acc, c.unsigned_abs()))
}

pub fn is_primitive(q: &[i64]) -> bool {
    gcd(q) == 1
}

/// `A(delta, Q) = {x in R^n : ||Q x|| < delta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeNeighborhood {
    pub dim: usize,
    pub modulus: u64,
    pub delta: f64,
}

impl LatticeNeighborhood {
    pub fn new(dim: usize, modulus: u64, delta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        if modulus == 0 {
            return Err(invalid("Q", "must be at least 1"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
        }
        Ok(Self {
            dim,
            modulus,
            delta,
        })
    }

    /// The slabs overlap and the `v_n delta^n` volume heuristic fails.
    pub fn overlapping(&self) -> bool {
        self.delta >= 0.5
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let q = self.modulus as f64;
        let scaled: Vec<f64> = x.iter().map(|c| q * c).collect();
        lattice_distance(&scaled)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance(x) < self.delta
    }
}

/// `L_{delta,q} = {x in R^d : ||q . x|| < delta}` and its `folds`-fold product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFormSpec {
    pub q: Vec<i64>,
    pub delta: f64,
    pub folds: usize,
}

impl LinearFormSpec {
    pub fn new(q: Vec<i64>, delta: f64, folds: usize) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::EmptyInput("q"));
        }
        if q.iter().all(|&c| c == 0) {
            return Err(invalid("q", "must be nonzero"));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid("delta", format!("must be positive, got {delta}")));
        }
        if folds == 0 {
            return Err(invalid("folds", "must be positive"));
        }
        Ok(Self { q, delta, folds })
    }

    pub fn d(&self) -> usize {
        self.q.len()
    }

    pub fn total_dim(&self) -> usize {
        self.q.len() * self.folds
    }

    pub fn q_norm(&self) -> f64 {
        euclidean_norm(&self.q)
    }

    /// Half-thickness `delta / |q|` of each slab.
    pub fn delta_star(&self) -> f64 {
        self.delta / self.q_norm()
    }

    pub fn overlapping(&self) -> bool {
        self.delta >= 0.5
    }

    /// Membership of a single `d`-block.
    pub fn block_contains(&self, x: &[f64]) -> bool {
        linear_form_distance(&self.q, x) < self.delta
    }

    /// Membership of an `n d`-vector in the product set.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.chunks(self.d()).all(|b| self.block_contains(b))
    }
}

pub fn in_lattice_neighborhood(x: &[f64], nb: &LatticeNeighborhood) -> bool {
    nb.contains(x)
}

pub fn in_linear_form(x: &[f64], spec: &LinearFormSpec) -> bool {
    spec.block_contains(x)
}

/// A measured value and the mass whose membership the cell-center rule could
/// not decide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub value: f64,
    pub boundary_error: f64,
}

/// `mu(A(delta, Q))`. Grid cells count by their centers; cells the boundary
/// may cross are summed into `boundary_error`.
pub fn measure_of_lattice_neighborhood(mu: &Measure, nb: &LatticeNeighborhood) -> Result<MassEstimate> {
    mu.check_dim(nb.dim)?;
    // ||Q x|| is Q-Lipschitz; a cell reaches half a diagonal from its center
    let slack = mu
        .cell_width()
        .map_or(0.0, |h| nb.modulus as f64 * h * (nb.dim as f64).sqrt() / 2.0);
    let (mut value, mut boundary) = (0.0, 0.0);
    mu.for_each_atom(|x, w| {
        let dist = nb.distance(x);
        if dist < nb.delta {
            value += w;
        }
        if slack > 0.0 && (dist - nb.delta).abs() <= slack {
            boundary += w;
        }
    });
    Ok(MassEstimate {
        value,
        boundary_error: boundary,
    })
}

/// `mu(L^n_{delta,q})` for `mu` on `[0,1]^{n d}`.
pub fn measure_of_linear_form(mu: &Measure, spec: &LinearFormSpec) -> Result<MassEstimate> {
    mu.check_dim(spec.total_dim())?;
    let d = spec.d();
    let slack = mu
        .cell_width()
        .map_or(0.0, |h| spec.q_norm() * h * (d as f64).sqrt() / 2.0);
    let (mut value, mut boundary) = (0.0, 0.0);
    mu.for_each_atom(|x, w| {
        let mut inside = true;
        let mut surely_in = true;
        let mut surely_out = false;
        for b in x.chunks(d) {
            let dist = linear_form_distance(&spec.q, b);
            inside &= dist < spec.delta;
            surely_in &= dist < spec.delta - slack;
            surely_out |= dist >= spec.delta + slack;
        }
        if inside {
            value += w;
        }
        if slack > 0.0 && !surely_in && !surely_out {
            boundary += w;
        }
    });
    Ok(MassEstimate {
        value,
        boundary_error: boundary,
    })
}
