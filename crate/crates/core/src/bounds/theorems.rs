use serde::{Deserialize, Serialize};

use super::{BoundReport, Verdict};
use crate::error::{invalid, Result};
use crate::fourier::{restricted_sum, FrequencySet, Norm, Spectrum};
use crate::lattice::{
    measure_of_lattice_neighborhood, measure_of_linear_form, LatticeNeighborhood, LinearFormSpec,
};
use crate::measure::Measure;
use crate::quad::unit_ball_volume;

/// Explicit stand-ins for the absolute constants hidden in `<<` and `>>`.
///
/// An upper bound is violated when `lhs / rhs_main` exceeds
/// `upper * main`, a lower bound when `lhs < (main / lower) rhs_main - tail`,
/// where `main` is `v_n` for lattice neighbourhoods and `2^n` for slabs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub upper: f64,
    pub lower: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            upper: 10.0,
            lower: 10.0,
        }
    }
}

impl Budget {
    pub fn new(upper: f64, lower: f64) -> Result<Self> {
        if !(upper > 0.0) || !(lower > 0.0) {
            return Err(invalid("budget", "factors must be positive"));
        }
        Ok(Self { upper, lower })
    }
}

fn upper_verdict(report: &BoundReport, limit: f64) -> Verdict {
    match report.ratio {
        Some(r) if r > limit => Verdict::Violated,
        _ => Verdict::Consistent,
    }
}

fn lower_verdict(lhs: f64, c: f64, rhs_main: f64, tail: f64) -> Verdict {
    if lhs < c * rhs_main - tail {
        Verdict::Violated
    } else {
        Verdict::Consistent
    }
}

/// `mu(A(delta, Q)) << delta^n (1 + sum_{Q | xi, 0 < |xi| <= 2Q/delta} |hat mu(xi)|)`.
pub fn theorem3_upper(
    mu: &Measure,
    spectrum: &dyn Spectrum,
    delta: f64,
    modulus: u64,
    budget: &Budget,
) -> Result<BoundReport> {
    let n = mu.dim();
    let nb = LatticeNeighborhood::new(n, modulus, delta)?;
    let mass = measure_of_lattice_neighborhood(mu, &nb)?;
    let set = FrequencySet::lattice_upper(n, modulus, delta);
    let s = restricted_sum(spectrum, &set, true)?.value();
    let main = unit_ball_volume(n);
    let rhs_main = delta.powi(n as i32) * (1.0 + s);
    let report = BoundReport::new("theorem3_upper", mass.value, rhs_main, 0.0)
        .param("n", n)
        .param("Q", modulus)
        .param("delta", delta)
        .param("sum", s)
        .param("boundary_error", mass.boundary_error)
        .param("overlapping", nb.overlapping())
        .param("budget", budget.upper * main);
    let verdict = upper_verdict(&report, budget.upper * main);
    Ok(report.with_verdict(verdict))
}

/// `mu(A(delta, Q)) >> delta^n (1 - S_K) - K^{-N}` with `S_K` the magnitude
/// sum over multiples of `Q` up to `K Q / delta`. The signed sum is recorded
/// alongside.
pub fn theorem3_lower(
    mu: &Measure,
    spectrum: &dyn Spectrum,
    delta: f64,
    modulus: u64,
    k: f64,
    order: u32,
    budget: &Budget,
) -> Result<BoundReport> {
    if !(k >= 1.0) {
        return Err(invalid("K", format!("must be at least 1, got {k}")));
    }
    let n = mu.dim();
    let nb = LatticeNeighborhood::new(n, modulus, delta)?;
    let mass = measure_of_lattice_neighborhood(mu, &nb)?;
    let set = FrequencySet::LatticeMultiples {
        dim: n,
        modulus,
        radius: k * modulus as f64 / delta,
        norm: Norm::Euclidean,
    };
    let s_abs = restricted_sum(spectrum, &set, true)?.value();
    let signed = match restricted_sum(spectrum, &set, false)? {
        crate::fourier::RestrictedSum::Signed(c) => c,
        crate::fourier::RestrictedSum::Magnitude(v) => v.into(),
    };
    let c = unit_ball_volume(n) / budget.lower;
    let rhs_main = delta.powi(n as i32) * (1.0 - s_abs);
    let tail = k.powf(-(order as f64));
    let verdict = lower_verdict(mass.value, c, rhs_main, tail);
    Ok(BoundReport::new("theorem3_lower", mass.value, rhs_main, tail)
        .param("n", n)
        .param("Q", modulus)
        .param("delta", delta)
        .param("K", k)
        .param("N", order)
        .param("sum", s_abs)
        .param("signed_sum_re", signed.re)
        .param("signed_sum_im", signed.im)
        .param("boundary_error", mass.boundary_error)
        .param("overlapping", nb.overlapping())
        .param("c", c)
        .with_verdict(verdict))
}

/// `mu(L^n_{delta,q}) << delta^n (1 + sum_{0 < |t|_inf <= 2/delta} |hat mu(t_1 q, .., t_n q)|)`.
pub fn theorem5_upper(
    mu: &Measure,
    spectrum: &dyn Spectrum,
    spec: &LinearFormSpec,
    budget: &Budget,
) -> Result<BoundReport> {
    let n = spec.folds;
    let mass = measure_of_linear_form(mu, spec)?;
    let set = FrequencySet::linear_form_upper(&spec.q, n, spec.delta);
    let s = restricted_sum(spectrum, &set, true)?.value();
    let main = 2f64.powi(n as i32);
    let rhs_main = spec.delta.powi(n as i32) * (1.0 + s);
    let report = BoundReport::new("theorem5_upper", mass.value, rhs_main, 0.0)
        .param("n", n)
        .param("q", spec.q.clone())
        .param("delta", spec.delta)
        .param("sum", s)
        .param("boundary_error", mass.boundary_error)
        .param("overlapping", spec.overlapping())
        .param("budget", budget.upper * main);
    let verdict = upper_verdict(&report, budget.upper * main);
    Ok(report.with_verdict(verdict))
}

/// Lower companion of [`theorem5_upper`] with the sum taken to `|t|_inf <= K/delta`.
pub fn theorem5_lower(
    mu: &Measure,
    spectrum: &dyn Spectrum,
    spec: &LinearFormSpec,
    k: f64,
    order: u32,
    budget: &Budget,
) -> Result<BoundReport> {
    if !(k >= 1.0) {
        return Err(invalid("K", format!("must be at least 1, got {k}")));
    }
    let n = spec.folds;
    let mass = measure_of_linear_form(mu, spec)?;
    let set = FrequencySet::LinearForm {
        q: spec.q.clone(),
        folds: n,
        t_radius: k / spec.delta,
        strict: false,
    };
    let s_abs = restricted_sum(spectrum, &set, true)?.value();
    let signed = restricted_sum(spectrum, &set, false)?;
    let signed_re = match signed {
        crate::fourier::RestrictedSum::Signed(c) => c.re,
        crate::fourier::RestrictedSum::Magnitude(v) => v,
    };
    let c = 2f64.powi(n as i32) / budget.lower;
    let rhs_main = spec.delta.powi(n as i32) * (1.0 - s_abs);
    let tail = k.powf(-(order as f64));
    let verdict = lower_verdict(mass.value, c, rhs_main, tail);
    Ok(BoundReport::new("theorem5_lower", mass.value, rhs_main, tail)
        .param("n", n)
        .param("q", spec.q.clone())
        .param("delta", spec.delta)
        .param("K", k)
        .param("N", order)
        .param("sum", s_abs)
        .param("signed_sum_re", signed_re)
        .param("boundary_error", mass.boundary_error)
        .param("overlapping", spec.overlapping())
        .param("c", c)
        .with_verdict(verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{transform, SyntheticSpectrum};
    use crate::measure::{AtomicMeasure, GridMeasure};

    fn origin(n: usize) -> Measure {
        Measure::Atomic(AtomicMeasure::point_mass(&vec![0.0; n]).unwrap())
    }

    #[test]
    fn uniform_ratio_is_ball_volume() {
        let mu = Measure::Grid(GridMeasure::uniform(1, 8192).unwrap());
        let spec = SyntheticSpectrum::Lebesgue { dim: 1 };
        let r = theorem3_upper(&mu, &spec, 0.1, 7, &Budget::default()).unwrap();
        assert!((r.ratio.unwrap() - 2.0).abs() < 0.01, "{:?}", r.ratio);
        assert_eq!(r.verdict, Verdict::Consistent);

        let mu = Measure::Grid(GridMeasure::uniform(2, 1024).unwrap());
        let spec = SyntheticSpectrum::Lebesgue { dim: 2 };
        let r = theorem3_upper(&mu, &spec, 0.2, 3, &Budget::default()).unwrap();
        assert!((r.ratio.unwrap() - std::f64::consts::PI).abs() < 0.03);
    }

    #[test]
    fn point_mass_counts_multiples() {
        let mu = origin(1);
        let table = transform(&mu, 2000).unwrap();
        let r = theorem3_upper(&mu, &table, 0.5, 10, &Budget::default()).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.rhs_main - 4.5).abs() < 1e-9);
        assert_eq!(r.verdict, Verdict::Consistent);
        assert_eq!(r.params["overlapping"], true);

        let r = theorem3_upper(&mu, &table, 0.01, 10, &Budget::default()).unwrap();
        assert!((r.params["sum"].as_f64().unwrap() - 400.0).abs() < 1e-9);
        assert!((r.rhs_main - 4.01).abs() < 1e-9);
    }

    #[test]
    fn undersized_table_names_frequency() {
        let mu = origin(1);
        let table = transform(&mu, 50).unwrap();
        let err = theorem3_upper(&mu, &table, 0.1, 10, &Budget::default()).unwrap_err();
        assert!(matches!(err, crate::Error::FrequencyOutsideBox { .. }), "{err}");
    }

    #[test]
    fn lower_bound_on_uniform_and_midpoint_atom() {
        let mu = Measure::Grid(GridMeasure::uniform(1, 8192).unwrap());
        let spec = SyntheticSpectrum::Lebesgue { dim: 1 };
        let r = theorem3_lower(&mu, &spec, 0.1, 5, 2.0, 4, &Budget::default()).unwrap();
        assert!((r.lhs - 0.2).abs() < 1e-3);
        assert!((r.rhs_main - 0.1).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Consistent);

        // an atom at 1/(2Q) avoids A(delta, Q); the inequality survives only
        // because the sum is large
        let q = 5u64;
        let mu = Measure::Atomic(AtomicMeasure::point_mass(&[0.5 / q as f64]).unwrap());
        let table = transform(&mu, 200).unwrap();
        let r = theorem3_lower(&mu, &table, 0.1, q, 2.0, 4, &Budget::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.params["sum"].as_f64().unwrap() >= 1.0);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn slab_examples() {
        let mu = Measure::Grid(GridMeasure::uniform(1, 4000).unwrap());
        let spec = LinearFormSpec::new(vec![1], 0.1, 1).unwrap();
        let r = theorem5_upper(&mu, &SyntheticSpectrum::Lebesgue { dim: 1 }, &spec, &Budget::default())
            .unwrap();
        assert!((r.ratio.unwrap() - 2.0).abs() < 1e-3, "{r:?}");

        let mu = origin(2);
        let table = transform(&mu, 8).unwrap();
        let spec = LinearFormSpec::new(vec![1], 0.25, 2).unwrap();
        let r = theorem5_upper(&mu, &table, &spec, &Budget::default()).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.params["sum"].as_f64().unwrap() - 288.0).abs() < 1e-9);
        assert!((r.rhs_main - 0.0625 * 289.0).abs() < 1e-9);

        let lo = theorem5_lower(&mu, &table, &spec, 2.0, 3, &Budget::default()).unwrap();
        assert_eq!(lo.verdict, Verdict::Consistent);
    }

    #[test]
    fn slab_lower_tail_halves_per_doubling() {
        let mu = Measure::Grid(GridMeasure::uniform(2, 1000).unwrap());
        let lebesgue = SyntheticSpectrum::Lebesgue { dim: 2 };
        let spec = LinearFormSpec::new(vec![1], 0.1, 2).unwrap();
        let a = theorem5_lower(&mu, &lebesgue, &spec, 2.0, 3, &Budget::default()).unwrap();
        let b = theorem5_lower(&mu, &lebesgue, &spec, 4.0, 3, &Budget::default()).unwrap();
        assert!((b.tail / a.tail - 0.125).abs() < 1e-12);
        assert_eq!(a.verdict, b.verdict);
        assert!((a.lhs - 0.04).abs() < 1e-3, "{a:?}");
    }

    #[test]
    fn tiny_budget_forces_violation() {
        let mu = Measure::Grid(GridMeasure::uniform(1, 1024).unwrap());
        let spec = SyntheticSpectrum::Lebesgue { dim: 1 };
        let r = theorem3_upper(&mu, &spec, 0.1, 3, &Budget::new(0.01, 10.0).unwrap()).unwrap();
        assert!(r.is_violated());
    }
}
