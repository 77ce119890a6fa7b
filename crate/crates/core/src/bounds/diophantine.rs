use super::{schedule::tau_prime, BoundReport, Verdict};
use crate::error::{invalid, Error, Result};
use crate::fourier::{decay_profile, FourierTable, DEFAULT_SHELL_BASE};
use crate::lattice::lattice_distance;
use crate::measure::{wrap_unit, Measure};

/// Allowance on the fitted exponent above the Fourier-dimension ceiling.
pub const WITNESS_SLACK: f64 = 0.15;

/// `min_{q_min <= q <= q_max} q^{1/n} ||q x||`.
pub fn badness_window(x: &[f64], q_min: u64, q_max: u64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput("x"));
    }
    if q_min == 0 || q_max < q_min {
        return Err(invalid("Q", format!("need 1 <= q_min <= q_max, got {q_min}..{q_max}")));
    }
    let inv_n = 1.0 / x.len() as f64;
    let frac: Vec<f64> = x.iter().map(|&c| wrap_unit(c)).collect();
    let mut scaled = vec![0.0; x.len()];
    let mut best = f64::INFINITY;
    for q in q_min..=q_max {
        let qf = q as f64;
        for (s, &f) in scaled.iter_mut().zip(&frac) {
            *s = qf * f;
        }
        best = best.min(qf.powf(inv_n) * lattice_distance(&scaled));
    }
    Ok(best)
}

/// `min_{1 <= q <= q_max} q^{1/n} ||q x||`, with `||.||` the Euclidean
/// distance to `Z^n`.
pub fn badness(x: &[f64], q_max: u64) -> Result<f64> {
    badness_window(x, 1, q_max)
}

/// Compares the decay exponent fitted from `table` with the ceiling
/// `2d / (1 + tau)` and evaluates the exponents `n tau'` and
/// `(s/2)(1 + tau')` whose excess over `d` would make the slab series
/// converge. Evidence only: a finite table cannot certify a dimension.
pub fn non_salem_witness(tau: f64, d: usize, n: usize, mu: &Measure, table: &FourierTable) -> Result<BoundReport> {
    if d == 0 || n == 0 {
        return Err(invalid("d, n", "must be positive"));
    }
    if !(tau > 0.0) {
        return Err(invalid("tau", "must be positive"));
    }
    mu.check_dim(d * n)?;
    if table.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: table.dim(),
        });
    }
    let profile = decay_profile(table, DEFAULT_SHELL_BASE)?;
    let s = profile.fitted_s;
    let ceiling = 2.0 * d as f64 / (1.0 + tau);
    let verdict = if s <= ceiling + WITNESS_SLACK {
        Verdict::Consistent
    } else {
        Verdict::Violated
    };
    let mut report = BoundReport::new("non_salem_witness", s, ceiling, WITNESS_SLACK)
        .param("tau", tau)
        .param("d", d)
        .param("n", n)
        .param("fitted_s", s)
        .param("ceiling", ceiling)
        .param("zero_dominated", profile.zero_dominated)
        .param("shells", profile.shells.len())
        .param("evidence_only", true);
    // with |hat mu| << |xi|^{-s/2}, a feasible tau' turns the slab sums
    // into a convergent series, which the construction forbids
    match tau_prime(tau, d, n, s / 2.0) {
        Ok(tp) => {
            report = report
                .param("tau_prime", tp)
                .param("n_tau_prime", n as f64 * tp)
                .param("s_one_plus_tau_prime", s / 2.0 * (1.0 + tp))
                .param("series_converges", true);
        }
        Err(_) => {
            report = report
                .param("tau_prime", serde_json::Value::Null)
                .param("series_converges", false);
        }
    }
    Ok(report.with_verdict(verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::transform;
    use crate::measure::GridMeasure;

    #[test]
    fn rational_points_score_zero() {
        assert_eq!(badness(&[1.0 / 3.0], 3).unwrap(), 0.0);
        assert!(badness(&[1.0 / 3.0], 2).unwrap() > 0.0);
    }

    #[test]
    fn quadratic_irrationals_tail() {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let tail = badness_window(&[phi], 1000, 100_000).unwrap();
        assert!((tail - 1.0 / 5f64.sqrt()).abs() < 5e-3, "{tail}");
        let full = badness(&[phi], 100_000).unwrap();
        // q = 1 dominates the full scan
        assert!((full - (1.0 - phi)).abs() < 1e-12);
    }

    #[test]
    fn monotone_and_periodic() {
        let x = [0.1234567, 0.7654321];
        let mut prev = f64::INFINITY;
        for q in [1, 5, 50, 500, 5000] {
            let b = badness(&x, q).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        let shifted = [x[0] + 3.0, x[1] - 2.0];
        assert!((badness(&shifted, 5000).unwrap() - prev).abs() < 1e-9);
    }

    #[test]
    fn witness_ceilings() {
        let mu = Measure::Grid(GridMeasure::uniform(2, 64).unwrap());
        let table = transform(&mu, 32).unwrap();
        let r = non_salem_witness(1.0, 1, 2, &mu, &table).unwrap();
        assert_eq!(r.rhs_main, 1.0);
        // uniform measure decays perfectly: fitted_s hits the cap and
        // exceeds the ceiling
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.params["series_converges"], true);

        let mu1 = Measure::Grid(GridMeasure::uniform(1, 64).unwrap());
        let t1 = transform(&mu1, 32).unwrap();
        assert_eq!(non_salem_witness(1.0, 1, 1, &mu1, &t1).unwrap().rhs_main, 1.0);
        let mu2 = Measure::Grid(GridMeasure::uniform(2, 32).unwrap());
        let t2 = transform(&mu2, 16).unwrap();
        assert_eq!(non_salem_witness(3.0, 2, 1, &mu2, &t2).unwrap().rhs_main, 1.0);
        assert!(non_salem_witness(1.0, 1, 1, &mu1, &t2).is_err());
    }
}
