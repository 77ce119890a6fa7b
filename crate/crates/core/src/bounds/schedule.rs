use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Weight `h` in `tau' = lb (1 - h) + tau h`.
pub const TAU_PRIME_WEIGHT: f64 = 0.9;

/// The `delta_Q`, `K_Q`, `N` schedule for the lower bound when
/// `|hat mu(k)| << |k|^{-n/(n+1) - eps'}`:
/// `delta_Q = Q^{-(1+eps')/n}`, `K_Q = Q^{rho'}`, and `N` with
/// `K_Q^{-N} = o(delta_Q^n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma6Schedule {
    pub n: usize,
    pub eps_prime: f64,
    pub rho_prime: f64,
    pub order: u32,
}

impl Lemma6Schedule {
    /// `rho'` at half its admissible maximum, and the least `N` with
    /// `rho' N > 1 + eps'`.
    pub fn new(n: usize, eps_prime: f64) -> Result<Self> {
        let rho_max = Self::rho_prime_max(n, eps_prime)?;
        let rho_prime = rho_max / 2.0;
        let order = ((1.0 + eps_prime) / rho_prime).floor() as u32 + 1;
        Ok(Self {
            n,
            eps_prime,
            rho_prime,
            order,
        })
    }

    /// Exponent of `Q` in the dual sum with `K = 1`:
    /// `-eps'/n - eps'/(n+1) - eps'^2/n`.
    pub fn sum_exponent(n: usize, eps_prime: f64) -> f64 {
        let nf = n as f64;
        -eps_prime / nf - eps_prime / (nf + 1.0) - eps_prime * eps_prime / nf
    }

    /// Largest `rho'` keeping `K^{n - n/(n+1) - eps'} Q^{sum_exponent}` decaying.
    pub fn rho_prime_max(n: usize, eps_prime: f64) -> Result<f64> {
        if n == 0 {
            return Err(invalid("n", "must be positive"));
        }
        let nf = n as f64;
        let k_power = nf - nf / (nf + 1.0) - eps_prime;
        if !(eps_prime > 0.0) || k_power <= 0.0 {
            return Err(invalid(
                "eps_prime",
                format!("must lie in (0, {}), got {eps_prime}", nf - nf / (nf + 1.0)),
            ));
        }
        Ok(-Self::sum_exponent(n, eps_prime) / k_power)
    }

    pub fn delta(&self, q: u64) -> f64 {
        (q as f64).powf(-(1.0 + self.eps_prime) / self.n as f64)
    }

    pub fn k(&self, q: u64) -> f64 {
        (q as f64).powf(self.rho_prime)
    }

    /// `K_Q^{-N} / delta_Q^n = Q^{1 + eps' - rho' N}`.
    pub fn tail_ratio(&self, q: u64) -> f64 {
        self.k(q).powi(-(self.order as i32)) / self.delta(q).powi(self.n as i32)
    }

    /// Exponent of `Q` in the dual sum along the schedule; negative.
    pub fn scheduled_sum_exponent(&self) -> f64 {
        let nf = self.n as f64;
        self.rho_prime * (nf - nf / (nf + 1.0) - self.eps_prime)
            + Self::sum_exponent(self.n, self.eps_prime)
    }
}

/// `tau(eps)` for part 1: the midpoint of the interval of `t in (1/n, tau)`
/// where `-t a - a < -1`, `a = 1/(1+tau) + eps`.
pub fn tau_epsilon(tau: f64, eps: f64, n: usize) -> Result<f64> {
    if n == 0 || !(tau > 1.0 / n as f64) {
        return Err(invalid("tau", format!("must exceed 1/n, got {tau}")));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    let a = 1.0 / (1.0 + tau) + eps;
    let lo = (1.0 / n as f64).max(1.0 / a - 1.0);
    // at t = tau the exponent is -1 - eps - eps tau < -1, so lo < tau
    if lo >= tau {
        return Err(Error::Infeasible(format!(
            "no tau(eps) in ({lo}, {tau})"
        )));
    }
    let t = 0.5 * (lo + tau);
    debug_assert!(-t * a - a < -1.0 && t * n as f64 > 1.0);
    Ok(t)
}

/// `tau'` for part 2, given the decay exponent `s` in `|hat mu| << |xi|^{-s}`:
/// needs `n tau > n tau' > d` and `s (1 + tau') > d`.
pub fn tau_prime(tau: f64, d: usize, n: usize, s: f64) -> Result<f64> {
    if n == 0 || d == 0 {
        return Err(invalid("d, n", "must be positive"));
    }
    if !(s > 0.0) {
        return Err(Error::Infeasible(format!("decay exponent {s} is not positive")));
    }
    let lb = (d as f64 / n as f64).max(d as f64 / s - 1.0);
    if lb >= tau {
        return Err(Error::Infeasible(format!(
            "constraints need tau' > {lb} but tau = {tau}"
        )));
    }
    let tp = lb * (1.0 - TAU_PRIME_WEIGHT) + tau * TAU_PRIME_WEIGHT;
    if !(n as f64 * tp > d as f64 && s * (1.0 + tp) > d as f64 && tp < tau) {
        return Err(Error::Infeasible(format!("tau' = {tp} breaks a constraint")));
    }
    Ok(tp)
}
