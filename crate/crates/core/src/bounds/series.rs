use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fourier::{least_squares_slope, FrequencySet, Spectrum, SyntheticSpectrum};
use crate::lattice::is_primitive;
use crate::quad::unit_ball_volume;

/// Slopes in `[-1 - INCONCLUSIVE_BAND, -1)` are reported as inconclusive.
pub const INCONCLUSIVE_BAND: f64 = 0.05;

/// Regression noise allowed when comparing a slope with `-1`.
const SLOPE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Converging,
    Diverging,
    Inconclusive,
}

/// Which family of sets the series runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ScanMode {
    /// `A(delta_Q, Q)` in `R^n`, one term per `Q`.
    Lattice { n: usize },
    /// `L^n_{delta_q, q}` in `R^{nd}` over primitive `q in Z^d`, one sign per
    /// line, grouped into one term per shell `|q|_inf = Q`.
    LinearForm { d: usize, n: usize },
}

impl ScanMode {
    fn dim(&self) -> usize {
        match *self {
            ScanMode::Lattice { n } => n,
            ScanMode::LinearForm { d, n } => d * n,
        }
    }

    fn rule(&self) -> &'static str {
        match self {
            ScanMode::Lattice { .. } => "delta_Q = Q^-tau'; term = v_n delta^n (1 + S(Q, delta))",
            ScanMode::LinearForm { .. } => {
                "delta_q = |q|_inf^-tau'; term = sum over primitive q with |q|_inf = Q of 2^n delta^n (1 + S(q, delta))"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub exponent_rule: String,
    /// `(Q_max, sum of terms up to Q_max)` at checkpoints `1..9 x 10^k` and
    /// the final `Q_max`.
    pub partial_sums: Vec<(u64, f64)>,
    pub classified: Classification,
    /// Log-log slope of the terms over the last decade.
    pub slope: f64,
    /// Frequencies the spectrum could not supply; the affected terms use
    /// only the covered part of the sum.
    pub coverage_warnings: Vec<String>,
}

fn checkpoint(q: u64) -> bool {
    let mut p = 1;
    while q / p >= 10 {
        p *= 10;
    }
    q % p == 0
}

/// Primitive `q in Z^d` with `|q|_inf = shell`, first nonzero entry positive.
fn primitive_shell(d: usize, shell: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    crate::fourier::for_each_in_box(d, shell, |q| {
        let sup = q.iter().map(|c| c.abs()).max().unwrap_or(0);
        let first = q.iter().find(|&&c| c != 0).copied().unwrap_or(0);
        if sup == shell && first > 0 && is_primitive(q) {
            out.push(q.to_vec());
        }
    });
    out
}

fn covered_sum(spectrum: &dyn Spectrum, set: &FrequencySet, warnings: &mut Vec<String>) -> Result<f64> {
    match spectrum.abs_sum(set) {
        Ok(s) => Ok(s),
        Err(Error::FrequencyOutsideBox { .. } | Error::FrequencyNotTabulated { .. }) => {
            let mut s = 0.0;
            let mut first = None;
            for xi in set.enumerate()? {
                match spectrum.coefficient(&xi) {
                    Ok(c) => s += c.norm(),
                    Err(Error::FrequencyOutsideBox { .. } | Error::FrequencyNotTabulated { .. }) => {
                        first.get_or_insert(xi);
                    }
                    Err(e) => return Err(e),
                }
            }
            if let Some(xi) = first {
                warnings.push(format!("frequency {xi:?} not covered"));
            }
            Ok(s)
        }
        Err(e) => Err(e),
    }
}

/// Sums the upper-bound right-hand sides along `delta = Q^{-tau'}` and
/// classifies the series by the slope of its terms over the last decade.
/// A slope of at least `-1` diverges by comparison with the harmonic
/// series; one below `-1 - INCONCLUSIVE_BAND` converges; in between a
/// finite scan cannot tell.
pub fn borel_cantelli_scan(
    spectrum: &dyn Spectrum,
    tau_prime: f64,
    q_max: u64,
    mode: ScanMode,
) -> Result<SeriesReport> {
    if !(tau_prime > 0.0) {
        return Err(invalid("tau_prime", format!("must be positive, got {tau_prime}")));
    }
    if q_max < 10 {
        return Err(invalid("Q_max", "need at least one decade"));
    }
    if spectrum.dim() != mode.dim() {
        return Err(Error::DimensionMismatch {
            expected: mode.dim(),
            found: spectrum.dim(),
        });
    }
    let mut warnings = Vec::new();
    let mut terms = Vec::with_capacity(q_max as usize);
    for q in 1..=q_max {
        let delta = (q as f64).powf(-tau_prime);
        let term = match mode {
            ScanMode::Lattice { n } => {
                let set = FrequencySet::lattice_upper(n, q, delta);
                let s = covered_sum(spectrum, &set, &mut warnings)?;
                unit_ball_volume(n) * delta.powi(n as i32) * (1.0 + s)
            }
            ScanMode::LinearForm { d, n } => {
                let main = 2f64.powi(n as i32) * delta.powi(n as i32);
                let mut t = 0.0;
                for v in primitive_shell(d, q as i64) {
                    let set = FrequencySet::linear_form_upper(&v, n, delta);
                    t += main * (1.0 + covered_sum(spectrum, &set, &mut warnings)?);
                }
                t
            }
        };
        terms.push(term);
    }

    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for (i, t) in terms.iter().enumerate() {
        acc += t;
        let q = i as u64 + 1;
        if checkpoint(q) || q == q_max {
            partial_sums.push((q, acc));
        }
    }

    let start = (q_max / 10).max(1);
    let pts: Vec<(f64, f64)> = (start..=q_max)
        .filter(|&q| terms[q as usize - 1] > 0.0)
        .map(|q| ((q as f64).ln(), terms[q as usize - 1].ln()))
        .collect();
    let slope = least_squares_slope(&pts);
    let classified = if slope >= -1.0 - SLOPE_EPS {
        Classification::Diverging
    } else if slope < -1.0 - INCONCLUSIVE_BAND {
        Classification::Converging
    } else {
        Classification::Inconclusive
    };
    warnings.dedup();
    Ok(SeriesReport {
        exponent_rule: mode.rule().to_string(),
        partial_sums,
        classified,
        slope,
        coverage_warnings: warnings,
    })
}

/// Growth exponent `e` of the terms, `term ~ Q^e`, for a closed-form
/// spectrum: `max(-n tau', -a (1 + tau'))` for `|hat mu| = |xi|^{-a}`, plus
/// `d - 1` for the shell count in linear-form mode.
pub fn closed_form_exponent(spectrum: &SyntheticSpectrum, tau_prime: f64, mode: ScanMode) -> f64 {
    let (n, shell) = match mode {
        ScanMode::Lattice { n } => (n, 0.0),
        ScanMode::LinearForm { d, n } => (n, d as f64 - 1.0),
    };
    let main = -(n as f64) * tau_prime;
    let e = match spectrum {
        SyntheticSpectrum::Lebesgue { .. } => main,
        SyntheticSpectrum::PowerLaw { exponent, .. } => main.max(-exponent * (1.0 + tau_prime)),
    };
    e + shell
}
