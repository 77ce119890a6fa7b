use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{torus_distance, AtomicMeasure, GridMeasure};
use crate::error::{invalid, Error, Result};
use crate::lattice::linear_form_distance;

/// Localization cutoff: 1 on `[0, r]`, quartic spline rolloff `(1-t^2)^2`
/// with `t = (dist-r)/r`, and 0 from `2r` on.
pub fn localization_profile(dist: f64, radius: f64) -> f64 {
    if dist <= radius {
        1.0
    } else if dist >= 2.0 * radius {
        0.0
    } else {
        let t = (dist - radius) / radius;
        let u = 1.0 - t * t;
        u * u
    }
}

/// `d nu = c f d mu` with `f` the localization profile around `center` in the
/// torus metric and `c = (int f d mu)^{-1}`.
pub fn localize(mu: &GridMeasure, center: &[f64], radius: f64) -> Result<GridMeasure> {
    check_localization_args(mu.dim(), center, radius)?;
    let mut mass = vec![0.0; mu.cell_count()];
    let mut total = 0.0;
    mu.for_each_cell(|flat, p, w| {
        let v = w * localization_profile(torus_distance(p, center), radius);
        mass[flat] = v;
        total += v;
    });
    if total <= 0.0 {
        return Err(Error::EmptyLocalization);
    }
    GridMeasure::from_unnormalized(mu.dim(), mu.resolution(), mass)
}

/// Same as [`localize`] for atomic measures; atoms that lose all mass are dropped.
pub fn localize_atomic(mu: &AtomicMeasure, center: &[f64], radius: f64) -> Result<AtomicMeasure> {
    check_localization_args(mu.dim(), center, radius)?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for a in mu.atoms() {
        let v = a.weight * localization_profile(torus_distance(&a.point, center), radius);
        if v > 0.0 {
            points.push(a.point.clone());
            weights.push(v);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyLocalization);
    }
    AtomicMeasure::new(points, weights)
}

fn check_localization_args(dim: usize, center: &[f64], radius: f64) -> Result<()> {
    if center.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: center.len(),
        });
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid("radius", "must be positive"));
    }
    Ok(())
}

/// Slab thickness as a function of the integer vector `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum DeltaRule {
    /// `delta(q) = |q|_inf^{-tau}`.
    Power { tau: f64 },
    Constant { delta: f64 },
}

impl DeltaRule {
    pub fn delta(&self, q: &[i64]) -> f64 {
        match *self {
            DeltaRule::Power { tau } => {
                let sup = q.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64;
                sup.powf(-tau)
            }
            DeltaRule::Constant { delta } => delta,
        }
    }
}

/// Parameters of a finite-depth truncation of the well-approximable set
/// `E(tau, d, n)`, realised on a grid over `[0,1)^{nd}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximantSpec {
    pub tau: f64,
    pub d: usize,
    pub n: usize,
    pub q_set: Vec<Vec<i64>>,
    pub delta_rule: DeltaRule,
    pub resolution: usize,
    /// Number of tower levels; the set is the intersection over levels of the
    /// union of `L^n_{delta(q),q}` over the level's `q`.
    #[serde(default = "default_depth")]
    pub tower_depth: usize,
}

fn default_depth() -> usize {
    1
}

impl ApproximantSpec {
    /// Default rule `delta(q) = |q|_inf^{-tau}`.
    pub fn new(tau: f64, d: usize, n: usize, q_set: Vec<Vec<i64>>, resolution: usize) -> Self {
        Self {
            tau,
            d,
            n,
            q_set,
            delta_rule: DeltaRule::Power { tau },
            resolution,
            tower_depth: 1,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.tower_depth = depth;
        self
    }

    pub fn with_delta_rule(mut self, rule: DeltaRule) -> Self {
        self.delta_rule = rule;
        self
    }

    /// Splits `q_set` into tower levels: the distinct sup-norms in increasing
    /// order are cut into `tower_depth` contiguous, near-equal runs.
    pub fn levels(&self) -> Result<Vec<Vec<Vec<i64>>>> {
        let mut qs = self.q_set.clone();
        qs.sort_by_key(|q| (sup_norm(q), q.clone()));
        qs.dedup();
        let mut norms: Vec<u64> = qs.iter().map(|q| sup_norm(q)).collect();
        norms.dedup();
        let depth = self.tower_depth;
        if depth == 0 || depth > norms.len() {
            return Err(invalid(
                "tower_depth",
                format!("must be in 1..={} for this q_set", norms.len()),
            ));
        }
        let mut levels = vec![Vec::new(); depth];
        for q in qs {
            let rank = norms.binary_search(&sup_norm(&q)).unwrap();
            levels[rank * depth / norms.len()].push(q);
        }
        Ok(levels)
    }
}

fn sup_norm(q: &[i64]) -> u64 {
    q.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}

/// Output of [`approximant_measure`].
#[derive(Debug, Clone, PartialEq)]
pub struct Approximant {
    pub measure: GridMeasure,
    /// Fraction of cells inside the set before normalization.
    pub covered_fraction: f64,
    pub levels: Vec<Vec<Vec<i64>>>,
}

/// Normalized restriction of the uniform grid measure to the truncated set.
/// A cell belongs to the set when its center does.
pub fn approximant_measure(spec: &ApproximantSpec) -> Result<Approximant> {
    let (d, n, res) = (spec.d, spec.n, spec.resolution);
    if d == 0 || n == 0 {
        return Err(invalid("d, n", "must be positive"));
    }
    if spec.q_set.is_empty() {
        return Err(Error::EmptyInput("q_set"));
    }
    let mut max_q = 0u64;
    let mut min_delta = f64::INFINITY;
    for q in &spec.q_set {
        if q.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: q.len(),
            });
        }
        if q.iter().all(|&c| c == 0) {
            return Err(invalid("q_set", "contains the zero vector"));
        }
        let delta = spec.delta_rule.delta(q);
        if !(delta > 0.0 && delta < 0.5) {
            return Err(invalid(
                "delta_rule",
                format!("delta({q:?}) = {delta} outside (0, 1/2)"),
            ));
        }
        max_q = max_q.max(sup_norm(q));
        min_delta = min_delta.min(delta);
    }
    let required = (4.0 * max_q as f64 / min_delta).ceil() as usize;
    if res < required {
        return Err(Error::ResolutionTooCoarse {
            resolution: res,
            required,
        });
    }
    let levels = spec.levels()?;

    // membership of each d-block cell in L_{delta(q),q}, per q
    let block = GridMeasure::uniform(d, res)?;
    let block_cells = block.cell_count();
    let member: Vec<Vec<Vec<bool>>> = levels
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|q| {
                    let delta = spec.delta_rule.delta(q);
                    let mut m = vec![false; block_cells];
                    block.for_each_cell(|flat, p, _| {
                        m[flat] = linear_form_distance(q, p) < delta;
                    });
                    m
                })
                .collect()
        })
        .collect();

    let total_dim = d * n;
    let cells = block_cells
        .checked_pow(n as u32)
        .ok_or_else(|| invalid("resolution", "grid too large"))?;
    let mut mass = vec![0.0; cells];
    let mut blocks = vec![0usize; n];
    let mut hits = 0usize;
    for (flat, m) in mass.iter_mut().enumerate() {
        let mut rest = flat;
        for b in (0..n).rev() {
            blocks[b] = rest % block_cells;
            rest /= block_cells;
        }
        let inside = member.iter().all(|level| {
            level
                .iter()
                .any(|mq| blocks.iter().all(|&b| mq[b]))
        });
        if inside {
            *m = 1.0;
            hits += 1;
        }
    }
    if hits == 0 {
        return Err(Error::EmptyApproximant { resolution: res });
    }
    let measure = GridMeasure::from_unnormalized(total_dim, res, mass)?;
    Ok(Approximant {
        measure,
        covered_fraction: hits as f64 / cells as f64,
        levels,
    })
}

/// Shapes produced by [`random_measure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomProfile {
    /// At most `ceil(sqrt N)^d` occupied cells with random weights.
    SparseAtoms,
    /// Independent uniform mass in every cell.
    RoughDensity,
    /// A positive trigonometric polynomial of low degree.
    SmoothDensity,
}

impl RandomProfile {
    pub const ALL: [RandomProfile; 3] = [
        RandomProfile::SparseAtoms,
        RandomProfile::RoughDensity,
        RandomProfile::SmoothDensity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RandomProfile::SparseAtoms => "sparse-atoms",
            RandomProfile::RoughDensity => "rough-density",
            RandomProfile::SmoothDensity => "smooth-density",
        }
    }
}

/// Deterministic random grid measure.
pub fn random_measure(
    dim: usize,
    resolution: usize,
    seed: u64,
    profile: RandomProfile,
) -> Result<GridMeasure> {
    let shape = GridMeasure::uniform(dim, resolution)?;
    let cells = shape.cell_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mass = vec![0.0; cells];
    match profile {
        RandomProfile::SparseAtoms => {
            let side = (resolution as f64).sqrt().ceil() as usize;
            let picks = side.pow(dim as u32);
            for _ in 0..picks {
                let cell = rng.random_range(0..cells);
                mass[cell] += 1.0 - rng.random::<f64>();
            }
        }
        RandomProfile::RoughDensity => {
            for m in &mut mass {
                *m = rng.random::<f64>();
            }
        }
        RandomProfile::SmoothDensity => {
            let terms = 4;
            let mut modes = Vec::with_capacity(terms);
            let mut budget = 0.9;
            for _ in 0..terms {
                let k: Vec<f64> = loop {
                    let k: Vec<i64> = (0..dim).map(|_| rng.random_range(-4..=4)).collect();
                    if k.iter().any(|&c| c != 0) {
                        break k.into_iter().map(|c| c as f64).collect();
                    }
                };
                let amp = budget * rng.random::<f64>();
                budget -= amp;
                let phase = rng.random::<f64>();
                modes.push((k, amp, phase));
            }
            shape.for_each_cell(|flat, p, _| {
                let mut v = 1.0;
                for (k, amp, phase) in &modes {
                    let arg: f64 = k.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + phase;
                    v += amp * (std::f64::consts::TAU * arg).cos();
                }
                mass[flat] = v;
            });
        }
    }
    GridMeasure::from_unnormalized(dim, resolution, mass)
}
