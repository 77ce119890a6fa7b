use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::parseval::verify_parseval;
use super::schedule::Lemma6Schedule;
use super::theorems::{theorem3_lower, theorem3_upper, theorem5_lower, theorem5_upper, Budget};
use super::{BoundReport, Verdict};
use crate::error::{invalid, Error, Result};
use crate::fourier::{linear_form_table, transform_grid, FourierTable};
use crate::lattice::{is_primitive, LinearFormSpec};
use crate::measure::{random_measure, BumpProfile, Measure, RandomProfile};

/// One `(delta, Q)` point of the lattice-neighbourhood battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryCase {
    pub seed: u64,
    pub profile: RandomProfile,
    pub n: usize,
    pub delta: f64,
    pub modulus: u64,
}

/// One `(q, delta)` point of the slab battery on `[0,1)^{nd}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFormCase {
    pub seed: u64,
    pub profile: RandomProfile,
    pub n: usize,
    pub q: Vec<i64>,
    pub delta: f64,
}

/// A Parseval check with the band-limited mollifier of width `delta_*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsevalCase {
    pub seed: u64,
    pub profile: RandomProfile,
    pub q: Vec<i64>,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryConfig {
    pub seeds: Vec<u64>,
    pub profiles: Vec<RandomProfile>,
    /// Log grid of slab widths, all below 1/4.
    pub deltas: Vec<f64>,
    pub moduli: Vec<u64>,
    pub lattice_dims: Vec<usize>,
    /// Grid resolution per lattice dimension `n = 1, 2, ..`.
    pub lattice_resolution: Vec<usize>,
    pub d: usize,
    pub folds: Vec<usize>,
    /// Grid resolution on `[0,1)^{nd}` per fold count `n = 1, 2, ..`.
    pub linear_resolution: Vec<usize>,
    pub q_sup: i64,
    pub q_per_measure: usize,
    /// Decay surplus feeding the `K`, `N` schedule.
    pub eps_prime: f64,
    pub budget: Budget,
    pub parseval: bool,
    /// Overrides the table box (frequency radius, or `t` radius for slabs).
    pub box_radius: Option<usize>,
    /// Overrides every grid resolution.
    pub grid: Option<usize>,
    /// Uncovered frequencies become errors instead of skipped reports.
    pub strict: bool,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            seeds: (0..20).collect(),
            profiles: RandomProfile::ALL.to_vec(),
            deltas: vec![0.2, 0.1, 0.05],
            moduli: vec![2, 3, 5, 8],
            lattice_dims: vec![1, 2],
            lattice_resolution: vec![1024, 672],
            d: 2,
            folds: vec![1, 2],
            linear_resolution: vec![64, 16],
            q_sup: 8,
            q_per_measure: 3,
            eps_prime: 0.1,
            budget: Budget::default(),
            parseval: true,
            box_radius: None,
            grid: None,
            strict: false,
        }
    }
}

/// Sorted reports and their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryOutcome {
    pub reports: Vec<BoundReport>,
    pub violations: usize,
    pub skipped: usize,
    /// Largest `lhs / rhs_main` per report name, the empirical constant.
    pub worst_ratio: std::collections::BTreeMap<String, f64>,
}

impl BatteryOutcome {
    fn from_reports(mut reports: Vec<BoundReport>) -> Self {
        reports.sort_by_cached_key(|r| r.sort_key());
        let violations = reports.iter().filter(|r| r.verdict == Verdict::Violated).count();
        let skipped = reports.iter().filter(|r| r.verdict == Verdict::Skipped).count();
        let mut worst = std::collections::BTreeMap::new();
        for r in &reports {
            if let (Some(ratio), true) = (r.ratio, r.name.ends_with("upper")) {
                let e = worst.entry(r.name.clone()).or_insert(ratio);
                *e = f64::max(*e, ratio);
            }
        }
        Self {
            reports,
            violations,
            skipped,
            worst_ratio: worst,
        }
    }
}

impl BatteryConfig {
    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.profiles.is_empty() || self.deltas.is_empty() {
            return Err(Error::EmptyInput("battery grid"));
        }
        if let Some(&bad) = self.deltas.iter().find(|&&d| !(d > 0.0 && d < 0.25)) {
            return Err(invalid("deltas", format!("must lie in (0, 1/4), got {bad}")));
        }
        if self.lattice_dims.iter().any(|&n| n == 0 || n > self.lattice_resolution.len()) {
            return Err(invalid("lattice_dims", "each needs a resolution"));
        }
        if self.folds.iter().any(|&n| n == 0 || n > self.linear_resolution.len()) {
            return Err(invalid("folds", "each needs a resolution"));
        }
        if self.d == 0 || self.q_sup < 1 {
            return Err(invalid("d, q_sup", "must be positive"));
        }
        Ok(())
    }

    /// Every lattice case, in grid order.
    pub fn lattice_cases(&self) -> Vec<BatteryCase> {
        let mut out = Vec::new();
        for &seed in &self.seeds {
            for &profile in &self.profiles {
                for &n in &self.lattice_dims {
                    for &delta in &self.deltas {
                        for &modulus in &self.moduli {
                            out.push(BatteryCase {
                                seed,
                                profile,
                                n,
                                delta,
                                modulus,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Primitive `q` with `|q|_inf <= q_sup`, one sign per line.
    pub fn q_pool(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        crate::fourier::for_each_in_box(self.d, self.q_sup, |q| {
            let first = q.iter().find(|&&c| c != 0).copied().unwrap_or(0);
            if first > 0 && is_primitive(q) {
                out.push(q.to_vec());
            }
        });
        out
    }

    /// `q` vectors drawn for one measure.
    fn draw_qs(&self, seed: u64, profile: RandomProfile, n: usize) -> Vec<Vec<i64>> {
        let pool = self.q_pool();
        let tag = RandomProfile::ALL.iter().position(|p| *p == profile).unwrap_or(0) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003) ^ (tag << 8) ^ n as u64);
        let mut qs: Vec<Vec<i64>> = pool.choose_multiple(&mut rng, self.q_per_measure).cloned().collect();
        qs.sort();
        qs
    }

    pub fn linear_cases(&self) -> Vec<LinearFormCase> {
        let mut out = Vec::new();
        for &seed in &self.seeds {
            for &profile in &self.profiles {
                for &n in &self.folds {
                    for q in self.draw_qs(seed, profile, n) {
                        for &delta in &self.deltas {
                            out.push(LinearFormCase {
                                seed,
                                profile,
                                n,
                                q: q.clone(),
                                delta,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// The `d`-dimensional, single-fold slab cases.
    pub fn parseval_cases(&self) -> Vec<ParsevalCase> {
        self.linear_cases()
            .into_iter()
            .filter(|c| c.n == 1)
            .map(|c| ParsevalCase {
                seed: c.seed,
                profile: c.profile,
                q: c.q,
                delta: c.delta,
            })
            .collect()
    }

    fn schedule(&self, n: usize, modulus: f64) -> Result<(f64, u32)> {
        let s = Lemma6Schedule::new(n, self.eps_prime)?;
        Ok((modulus.powf(s.rho_prime).max(1.0), s.order))
    }

    fn resolution(&self, list: &[usize], n: usize) -> usize {
        self.grid.unwrap_or(list[n - 1])
    }
}

fn coverage(strict: bool, err: Error, skipped: BoundReport) -> Result<BoundReport> {
    match err {
        Error::FrequencyOutsideBox { .. } | Error::FrequencyNotTabulated { .. } if !strict => {
            Ok(skipped.param("warning", err.to_string()).with_verdict(Verdict::Skipped))
        }
        e => Err(e),
    }
}

fn lattice_reports(cfg: &BatteryConfig, seed: u64, profile: RandomProfile, n: usize) -> Result<Vec<BoundReport>> {
    let res = cfg.resolution(&cfg.lattice_resolution, n);
    let grid = random_measure(n, res, seed, profile)?;
    let mut needed = 0.0f64;
    for &delta in &cfg.deltas {
        for &q in &cfg.moduli {
            let (k, _) = cfg.schedule(n, q as f64)?;
            needed = needed.max(2.0 * q as f64 / delta).max(k * q as f64 / delta);
        }
    }
    let box_radius = cfg.box_radius.unwrap_or(needed.ceil() as usize + 1);
    let table = transform_grid(&grid, box_radius)?;
    let mu = Measure::Grid(grid);
    let mut out = Vec::new();
    for &delta in &cfg.deltas {
        for &q in &cfg.moduli {
            let (k, order) = cfg.schedule(n, q as f64)?;
            let tag = |r: BoundReport| r.param("seed", seed).param("profile", profile.name());
            let base = |name: &str| {
                BoundReport::new(name, 0.0, 0.0, 0.0)
                    .param("n", n)
                    .param("Q", q)
                    .param("delta", delta)
            };
            let up = theorem3_upper(&mu, &table, delta, q, &cfg.budget)
                .or_else(|e| coverage(cfg.strict, e, base("theorem3_upper")))?;
            let lo = theorem3_lower(&mu, &table, delta, q, k, order, &cfg.budget)
                .or_else(|e| coverage(cfg.strict, e, base("theorem3_lower")))?;
            out.push(tag(up));
            out.push(tag(lo));
        }
    }
    Ok(out)
}

fn linear_reports(cfg: &BatteryConfig, seed: u64, profile: RandomProfile, n: usize) -> Result<Vec<BoundReport>> {
    let res = cfg.resolution(&cfg.linear_resolution, n);
    let mu = Measure::Grid(random_measure(cfg.d * n, res, seed, profile)?);
    let (k, order) = cfg.schedule(n, 1.0)?;
    let mut out = Vec::new();
    for q in cfg.draw_qs(seed, profile, n) {
        // K grows with |q|_inf along the schedule, as K_Q = Q^{rho'}
        let sup = q.iter().map(|c| c.abs()).max().unwrap_or(1) as f64;
        let k = k.max(cfg.schedule(n, sup)?.0);
        let needed = cfg
            .deltas
            .iter()
            .map(|&d| (2.0 / d).max(k / d))
            .fold(0.0, f64::max);
        let t_max = cfg.box_radius.unwrap_or(needed.floor() as usize);
        let table: FourierTable = linear_form_table(&mu, &q, n, t_max)?;
        for &delta in &cfg.deltas {
            let spec = LinearFormSpec::new(q.clone(), delta, n)?;
            let tag = |r: BoundReport| r.param("seed", seed).param("profile", profile.name());
            let base = |name: &str| {
                BoundReport::new(name, 0.0, 0.0, 0.0)
                    .param("n", n)
                    .param("q", q.clone())
                    .param("delta", delta)
            };
            let up = theorem5_upper(&mu, &table, &spec, &cfg.budget)
                .or_else(|e| coverage(cfg.strict, e, base("theorem5_upper")))?;
            let lo = theorem5_lower(&mu, &table, &spec, k, order, &cfg.budget)
                .or_else(|e| coverage(cfg.strict, e, base("theorem5_lower")))?;
            out.push(tag(up));
            out.push(tag(lo));
            if cfg.parseval && n == 1 {
                let prof = BumpProfile::band_limited(spec.delta_star(), cfg.d)?;
                out.push(tag(verify_parseval(&mu, &spec, &prof, None)?));
            }
        }
    }
    Ok(out)
}

enum Job {
    Lattice(u64, RandomProfile, usize),
    Linear(u64, RandomProfile, usize),
}

/// Runs every configured case in parallel; output order is canonical.
pub fn run_battery(cfg: &BatteryConfig) -> Result<BatteryOutcome> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &seed in &cfg.seeds {
        for &profile in &cfg.profiles {
            for &n in &cfg.lattice_dims {
                jobs.push(Job::Lattice(seed, profile, n));
            }
            for &n in &cfg.folds {
                jobs.push(Job::Linear(seed, profile, n));
            }
        }
    }
    let chunks: Vec<Result<Vec<BoundReport>>> = jobs
        .par_iter()
        .map(|job| match *job {
            Job::Lattice(seed, profile, n) => lattice_reports(cfg, seed, profile, n),
            Job::Linear(seed, profile, n) => linear_reports(cfg, seed, profile, n),
        })
        .collect();
    let mut reports = Vec::new();
    for c in chunks {
        reports.extend(c?);
    }
    Ok(BatteryOutcome::from_reports(reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BatteryConfig {
        BatteryConfig {
            seeds: vec![0, 1],
            deltas: vec![0.2, 0.1],
            moduli: vec![2, 3],
            lattice_resolution: vec![256, 128],
            linear_resolution: vec![32, 8],
            q_sup: 3,
            q_per_measure: 2,
            ..BatteryConfig::default()
        }
    }

    #[test]
    fn small_battery_is_clean_and_sorted() {
        let out = run_battery(&small()).unwrap();
        assert_eq!(out.violations, 0, "{:?}", out.reports.iter().find(|r| r.is_violated()));
        assert_eq!(out.skipped, 0);
        let keys: Vec<String> = out.reports.iter().map(|r| r.sort_key()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        let again = run_battery(&small()).unwrap();
        assert_eq!(serde_json::to_string(&out).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn undersized_box_skips_or_fails() {
        let cfg = BatteryConfig {
            box_radius: Some(4),
            parseval: false,
            ..small()
        };
        let out = run_battery(&cfg).unwrap();
        assert!(out.skipped > 0);
        let strict = BatteryConfig { strict: true, ..cfg };
        let err = run_battery(&strict).unwrap_err();
        assert!(err.to_string().contains("frequency"), "{err}");
    }

    #[test]
    fn rejects_wide_slabs() {
        let cfg = BatteryConfig {
            deltas: vec![0.3],
            ..small()
        };
        assert!(run_battery(&cfg).is_err());
    }
}
