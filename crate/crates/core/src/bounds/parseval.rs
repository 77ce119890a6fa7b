use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundReport, Verdict};
use crate::error::{invalid, Error, Result};
use crate::fourier::{for_each_in_box, linear_form_frequency, linear_form_table, projection_groups};
use crate::lattice::{mollified_density_at_phase, LinearFormSpec, PlaneUnionMeasure};
use crate::measure::{BumpProfile, Measure};

/// Largest relative gap `|lhs - rhs| / |lhs|` accepted by [`verify_parseval`].
pub const PARSEVAL_TOLERANCE: f64 = 1e-6;

/// Truncation remainders must stay below this fraction of the sum.
const TRUNCATION_TOLERANCE: f64 = 1e-8;

/// Upper end of the scan that measures the profile constant.
const CONSTANT_SCAN: f64 = 60.0;

/// `|hat phi(delta_* t q)|` for `t` in `Z`, the one-dimensional factor of
/// every term of the dual sum.
fn factor(profile: &BumpProfile, q: &[i64], scale: f64, t: i64) -> f64 {
    let xi: Vec<f64> = q.iter().map(|&c| scale * (t * c) as f64).collect();
    profile.base_transform(&xi)
}

fn sup_norm(q: &[i64]) -> f64 {
    q.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64
}

/// `sum_{|t| > j0 - 1} |hat phi(delta_* t q)|` with the profile's decay used
/// beyond an explicit window, and the full sum over `Z`.
fn factor_sums(profile: &BumpProfile, q: &[i64], scale: f64, j0: i64) -> Result<(f64, f64)> {
    let step = scale * crate::lattice::euclidean_norm(q);
    let head: f64 = (-(j0 - 1)..j0).map(|t| factor(profile, q, scale, t).abs()).sum();
    if let Some(edge) = profile.band_edge() {
        let last = (edge / (scale * sup_norm(q))).ceil() as i64;
        let tail: f64 = (j0..=last.max(j0 - 1))
            .map(|t| 2.0 * factor(profile, q, scale, t).abs())
            .sum();
        return Ok((tail, head + tail));
    }
    let window = (10 * j0).max((CONSTANT_SCAN / step).ceil() as i64);
    let mut tail: f64 = (j0..=window)
        .map(|t| 2.0 * factor(profile, q, scale, t).abs())
        .sum();
    let e = profile.decay_order();
    let c = profile_constant(profile, e - 1e-9)?;
    // sum_{t > window} c (1 + step t)^{-e} <= integral from window
    tail += 2.0 * c * (1.0 + step * window as f64).powf(1.0 - e) / (step * (e - 1.0));
    Ok((tail, head + tail))
}

/// `sup_rho |hat phi(rho)| (1 + rho)^exponent`, measured on a grid over
/// `[0, 60]` and refined around the best point. Product profiles are not
/// radial, so both a coordinate axis and the diagonal are scanned.
pub fn profile_constant(profile: &BumpProfile, exponent: f64) -> Result<f64> {
    if profile.decay_order() < exponent {
        return Err(Error::ProfileTooRough {
            order: profile.decay_order(),
            required: exponent,
        });
    }
    let diag = 1.0 / (profile.dim as f64).sqrt();
    let eval = |rho: f64| {
        let mut xi = vec![0.0; profile.dim];
        xi[0] = rho;
        let mut v = profile.base_transform(&xi).abs();
        if !profile.is_compact() && profile.dim > 1 {
            xi.fill(rho * diag);
            v = v.max(profile.base_transform(&xi).abs());
        }
        v * (1.0 + rho).powf(exponent)
    };
    let steps = 2400;
    let h = CONSTANT_SCAN / steps as f64;
    let (mut best, mut at) = (0.0f64, 0.0);
    for i in 0..=steps {
        let rho = i as f64 * h;
        let v = eval(rho);
        if v > best {
            best = v;
            at = rho;
        }
    }
    for i in 0..=200 {
        let rho = (at - h + i as f64 * h / 100.0).max(0.0);
        best = best.max(eval(rho));
    }
    // a small margin covers the grid's blind spots
    Ok(best * 1.01)
}

/// The dual-side tail `T = sum_{|t|_inf > K/delta} prod_i |hat phi(delta_* t_i q)|`
/// next to its envelope `c^n 2n 3^{n-1} (1 + 1/N) (delta_* |q|)^{-n} K^{-N}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub computed: f64,
    pub envelope: f64,
    /// `sup |hat phi(rho)| (1 + rho)^{N + n}`.
    pub constant: f64,
    pub k: f64,
    pub order: u32,
}

impl TailBound {
    pub fn holds(&self) -> bool {
        self.computed <= self.envelope
    }
}

pub fn tail_bound_t(profile: &BumpProfile, spec: &LinearFormSpec, k: f64, order: u32) -> Result<TailBound> {
    if profile.dim != spec.d() {
        return Err(Error::DimensionMismatch {
            expected: spec.d(),
            found: profile.dim,
        });
    }
    if !(k >= 1.0) || order == 0 {
        return Err(invalid("K, N", "need K >= 1 and N >= 1"));
    }
    let n = spec.folds;
    let delta = spec.delta;
    let scale = spec.delta_star();
    let exponent = (order as usize + n) as f64;
    if profile.decay_order() <= exponent {
        return Err(Error::ProfileTooRough {
            order: profile.decay_order(),
            required: exponent,
        });
    }
    let constant = profile_constant(profile, exponent)?;
    let envelope = constant.powi(n as i32)
        * 2.0
        * n as f64
        * 3f64.powi(n as i32 - 1)
        * (1.0 + 1.0 / order as f64)
        * delta.powi(-(n as i32))
        * k.powf(-(order as f64));

    // |t|_inf > K/delta, i.e. some |t_i| >= j0
    let j0 = (k / delta).floor() as i64 + 1;
    let computed = match profile.band_edge() {
        Some(edge) if k * sup_norm(&spec.q) >= edge * spec.q_norm() => 0.0,
        _ => {
            let (tail, full) = factor_sums(profile, &spec.q, scale, j0)?;
            let inner = full - tail;
            // A^n - B^n = (A - B) sum_k A^k B^{n-1-k}
            tail * (0..n).map(|i| full.powi(i as i32) * inner.powi((n - 1 - i) as i32)).sum::<f64>()
        }
    };
    Ok(TailBound {
        computed,
        envelope,
        constant,
        k,
        order,
    })
}

/// Both sides of
/// `int prod_i (phi_w * L_q)(x^(i)) dmu = |q|^n w^{nd} sum_t conj(hat mu(t q)) prod_i hat phi(w t_i q)`
/// with `w = delta_*`. The dual sum runs over `|t|_inf <= trunc`; by default
/// the band-limited profile's exact cutoff. Compact profiles need `trunc`
/// large enough that the neglected terms fall below 1e-8 of the sum.
pub fn verify_parseval(
    mu: &Measure,
    spec: &LinearFormSpec,
    profile: &BumpProfile,
    trunc: Option<usize>,
) -> Result<BoundReport> {
    let d = spec.d();
    let n = spec.folds;
    if profile.dim != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: profile.dim,
        });
    }
    let w = spec.delta_star();
    if (profile.width - w).abs() > 1e-12 * w {
        return Err(invalid(
            "profile",
            format!("width {} differs from delta_* = {w}", profile.width),
        ));
    }
    let pm = PlaneUnionMeasure::new(spec.q.clone())?;
    let qn = spec.q_norm();

    let exact_cut = profile
        .band_edge()
        .map(|edge| (edge / (w * sup_norm(&spec.q))).ceil() as usize);
    let t_max = match (trunc, exact_cut) {
        (Some(t), _) => t,
        (None, Some(t)) => t,
        (None, None) => return Err(invalid("trunc", "required for compact-support profiles")),
    };

    // one factor per |t| <= t_max, with the |q| w^d prefactor folded in
    let radius = t_max as i64;
    let g: Vec<f64> = (-radius..=radius)
        .map(|t| qn * w.powi(d as i32) * factor(profile, &spec.q, w, t))
        .collect();
    let table = linear_form_table(mu, &spec.q, n, t_max)?;
    let mut rhs = num_complex::Complex64::new(0.0, 0.0);
    let mut err = None;
    for_each_in_box(n, radius, |t| {
        let weight: f64 = t.iter().map(|&ti| g[(ti + radius) as usize]).product();
        if weight == 0.0 {
            return;
        }
        match table.get(&linear_form_frequency(&spec.q, t)) {
            Ok(c) => rhs += weight * c.conj(),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }

    // |hat mu| <= 1 bounds what the truncation dropped by A^n - B^n
    let (outside, full) = factor_sums(profile, &spec.q, w, radius + 1)?;
    let prefactor = qn * w.powi(d as i32);
    let (a, b) = (prefactor * full, prefactor * (full - outside));
    let remainder = a.powi(n as i32) - b.powi(n as i32);
    let tolerance = TRUNCATION_TOLERANCE * rhs.re.abs();
    if remainder > tolerance {
        return Err(Error::TruncationNotConverged {
            remainder,
            tolerance,
        });
    }

    let groups = projection_groups(mu, &spec.q, n)?;
    let mut phases: BTreeMap<u64, f64> = BTreeMap::new();
    for (proj, _) in &groups {
        for s in proj {
            phases.insert(s.to_bits(), 0.0);
        }
    }
    let keys: Vec<u64> = phases.keys().copied().collect();
    let values: Vec<f64> = keys
        .par_iter()
        .map(|&bits| mollified_density_at_phase(&pm, profile, f64::from_bits(bits)))
        .collect();
    for (key, v) in keys.into_iter().zip(values) {
        phases.insert(key, v);
    }
    let lhs: f64 = groups
        .iter()
        .map(|(proj, wt)| wt * proj.iter().map(|s| phases[&s.to_bits()]).product::<f64>())
        .sum();

    let gap = (lhs - rhs.re).abs() / lhs.abs().max(f64::MIN_POSITIVE);
    let verdict = if gap < PARSEVAL_TOLERANCE {
        Verdict::Consistent
    } else {
        Verdict::Violated
    };
    Ok(BoundReport::new("parseval", lhs, rhs.re, remainder)
        .param("q", spec.q.clone())
        .param("n", n)
        .param("delta", spec.delta)
        .param("delta_star", w)
        .param("trunc", t_max)
        .param("rhs_im", rhs.im)
        .param("rel_gap", gap)
        .param("profile", serde_json::to_value(profile.kind)?)
        .with_verdict(verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{random_measure, AtomicMeasure, GridMeasure, ProfileKind, RandomProfile};

    fn band(spec: &LinearFormSpec) -> BumpProfile {
        BumpProfile::band_limited(spec.delta_star(), spec.d()).unwrap()
    }

    #[test]
    fn point_mass_matches_closed_form() {
        let mu = Measure::Atomic(AtomicMeasure::point_mass(&[0.0, 0.0]).unwrap());
        let spec = LinearFormSpec::new(vec![1, 0], 0.2, 1).unwrap();
        let r = verify_parseval(&mu, &spec, &band(&spec), None).unwrap();
        assert!(r.params["rel_gap"].as_f64().unwrap() < 1e-8, "{r:?}");
    }

    #[test]
    fn uniform_keeps_only_zero_term() {
        let mu = Measure::Grid(GridMeasure::uniform(2, 64).unwrap());
        let spec = LinearFormSpec::new(vec![2, 1], 0.2, 1).unwrap();
        let r = verify_parseval(&mu, &spec, &band(&spec), None).unwrap();
        let w = spec.delta_star();
        assert!((r.rhs_main - w * spec.delta).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Consistent, "{r:?}");
    }

    #[test]
    fn random_two_fold_case() {
        let mu = Measure::Grid(random_measure(4, 8, 3, RandomProfile::SmoothDensity).unwrap());
        let spec = LinearFormSpec::new(vec![1, -1], 0.25, 2).unwrap();
        let r = verify_parseval(&mu, &spec, &band(&spec), None).unwrap();
        // the t = 0 term carries the normalization
        assert_eq!(r.verdict, Verdict::Consistent, "{r:?}");
    }

    #[test]
    fn compact_profile_needs_enough_terms() {
        let mu = Measure::Grid(random_measure(2, 16, 1, RandomProfile::RoughDensity).unwrap());
        let spec = LinearFormSpec::new(vec![1, 1], 0.3, 1).unwrap();
        let prof = BumpProfile::compact(spec.delta_star(), 2).unwrap();
        let err = verify_parseval(&mu, &spec, &prof, Some(2)).unwrap_err();
        assert!(matches!(err, Error::TruncationNotConverged { .. }));
        let wrong = BumpProfile::band_limited(0.1, 2).unwrap();
        assert!(verify_parseval(&mu, &spec, &wrong, None).is_err());
    }

    #[test]
    fn band_limited_tail_vanishes_past_the_band() {
        let spec = LinearFormSpec::new(vec![2, 1], 0.1, 2).unwrap();
        let t = tail_bound_t(&band(&spec), &spec, 1.2, 4).unwrap();
        assert_eq!(t.computed, 0.0);
        let t = tail_bound_t(&band(&spec), &spec, 1.0, 4).unwrap();
        assert!(t.computed > 0.0 && t.holds());
    }

    #[test]
    fn compact_tail_below_envelope() {
        let spec = LinearFormSpec::new(vec![1, 2], 0.1, 1).unwrap();
        let prof = BumpProfile::new(
            ProfileKind::CompactSupport { exponent: 10 },
            spec.delta_star(),
            2,
        )
        .unwrap();
        let a = tail_bound_t(&prof, &spec, 4.0, 3).unwrap();
        assert!(a.holds(), "{a:?}");
        let b = tail_bound_t(&prof, &spec, 8.0, 3).unwrap();
        assert!((b.envelope / a.envelope - 0.125).abs() < 1e-12);
        assert!(b.computed <= a.computed);
        let rough = BumpProfile::compact(spec.delta_star(), 2).unwrap();
        assert!(matches!(
            tail_bound_t(&rough, &spec, 4.0, 8),
            Err(Error::ProfileTooRough { .. })
        ));
    }
}
