use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sets::{euclidean_norm, gcd};
use crate::error::{invalid, Error, Result};
use crate::fourier::{unit_phase, FourierTable};
use crate::measure::BumpProfile;
use crate::quad::unit_ball_volume;

/// Surface measure `L_q` on the planes `{x : q . x = r}`, `r in Z`, viewed on
/// the torus. Its total mass per unit cube is `|q|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneUnionMeasure {
    q: Vec<i64>,
}

impl PlaneUnionMeasure {
    pub fn new(q: Vec<i64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::EmptyInput("q"));
        }
        if q.iter().all(|&c| c == 0) {
            return Err(invalid("q", "must be nonzero"));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> &[i64] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn norm(&self) -> f64 {
        euclidean_norm(&self.q)
    }

    pub fn total_mass(&self) -> f64 {
        self.norm()
    }

    pub fn unit_normal(&self) -> Vec<f64> {
        let n = self.norm();
        self.q.iter().map(|&c| c as f64 / n).collect()
    }

    /// The coordinate solved for in the parameterization: largest `|q_j|`,
    /// first on ties.
    pub fn solved_coordinate(&self) -> usize {
        let mut best = 0;
        for (j, c) in self.q.iter().enumerate() {
            if c.abs() > self.q[best].abs() {
                best = j;
            }
        }
        best
    }

    /// The multiplier `t` with `k = t q`, if any.
    pub fn resonance(&self, k: &[i64]) -> Option<i64> {
        let j = self.solved_coordinate();
        if k.len() != self.q.len() || k[j] % self.q[j] != 0 {
            return None;
        }
        let t = k[j] / self.q[j];
        self.q
            .iter()
            .zip(k)
            .all(|(&qi, &ki)| t * qi == ki)
            .then_some(t)
    }

    /// `L_q(B_eps(x))`: each plane at distance `h < eps` meets the ball in a
    /// `(d-1)`-ball of radius `sqrt(eps^2 - h^2)`.
    pub fn ball_measure(&self, x: &[f64], eps: f64) -> f64 {
        let d = self.dim();
        let norm = self.norm();
        let s: f64 = self.q.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
        let v = unit_ball_volume(d - 1);
        let lo = (s - eps * norm).ceil() as i64;
        let hi = (s + eps * norm).floor() as i64;
        (lo..=hi)
            .map(|r| {
                let h = (s - r as f64) / norm;
                let chord2 = eps * eps - h * h;
                if chord2 > 0.0 {
                    v * chord2.powf((d as f64 - 1.0) / 2.0)
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// `hat L_q(k)`: `|q|` when `k` is an integer multiple of `q`, else 0.
pub fn plane_fourier_coefficient(pm: &PlaneUnionMeasure, k: &[i64]) -> f64 {
    match pm.resonance(k) {
        Some(_) => pm.norm(),
        None => 0.0,
    }
}

/// `int e^{-2 pi i k.x} dL_q` over one period, by the midpoint rule with
/// `mesh` nodes per free coordinate of the graph parameterization
/// `x_j = (r - sum_{i != j} q_i y_i) / q_j`, `r = 0..|q_j|-1`, whose surface
/// element is `|q| / |q_j|`. The integrand factorizes over the free
/// coordinates, so the tensor rule is evaluated as a product of 1-D sums.
pub fn plane_fourier_quadrature(pm: &PlaneUnionMeasure, k: &[i64], mesh: usize) -> Result<Complex64> {
    if mesh < 2 {
        return Err(invalid("mesh", "must be at least 2"));
    }
    if k.len() != pm.dim() {
        return Err(Error::DimensionMismatch {
            expected: pm.dim(),
            found: k.len(),
        });
    }
    let j = pm.solved_coordinate();
    let qj = pm.q[j];
    let reps = qj.unsigned_abs();
    let mut plane_sum = Complex64::new(0.0, 0.0);
    for r in 0..reps {
        plane_sum += unit_phase(k[j] as f64 * r as f64 / qj as f64);
    }
    let mut product = Complex64::new(1.0, 0.0);
    for (i, (&qi, &ki)) in pm.q.iter().zip(k).enumerate() {
        if i == j {
            continue;
        }
        let c = ki as f64 - k[j] as f64 * qi as f64 / qj as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for l in 0..mesh {
            s += unit_phase(c * (l as f64 + 0.5) / mesh as f64);
        }
        product *= s / mesh as f64;
    }
    Ok(plane_sum * product * (pm.norm() / reps as f64))
}

/// Closed-form coefficients on the box, tagged `plane:q`. Not a probability
/// table: the zero coefficient is `|q|`.
pub fn plane_coefficient_table(pm: &PlaneUnionMeasure, box_radius: usize) -> FourierTable {
    FourierTable::from_fn(pm.dim(), box_radius, |k| {
        Complex64::new(plane_fourier_coefficient(pm, k), 0.0)
    })
    .with_tag(format!("plane:{:?}", pm.q).replace(' ', ""))
}

/// `(phi_w * L_q)(x)` where only `q . x` matters: sums the profile's integral
/// over every plane within its reach.
pub fn mollified_density_at_phase(pm: &PlaneUnionMeasure, profile: &BumpProfile, s: f64) -> f64 {
    let norm = pm.norm();
    let normal = pm.unit_normal();
    let reach = profile.scaled_reach() * norm;
    let lo = (s - reach).ceil() as i64;
    let hi = (s + reach).floor() as i64;
    (lo..=hi)
        .map(|r| profile.scaled_plane_integral(&normal, (s - r as f64) / norm))
        .sum()
}

/// `(phi_w * L_q)(x)` by direct integration over the nearby planes.
pub fn mollified_plane_density(pm: &PlaneUnionMeasure, profile: &BumpProfile, x: &[f64]) -> Result<f64> {
    if x.len() != pm.dim() || profile.dim != pm.dim() {
        return Err(Error::DimensionMismatch {
            expected: pm.dim(),
            found: if x.len() != pm.dim() { x.len() } else { profile.dim },
        });
    }
    let s: f64 = pm.q.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
    Ok(mollified_density_at_phase(pm, profile, s))
}

/// Empirical constants in `a eps^{d-1} <= L_q(B_eps(x)) <= b eps^{d-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdConstants {
    pub a: f64,
    pub b: f64,
    pub samples: usize,
}

/// Measures `a` and `b` over `samples` random points on the planes and every
/// radius in `radii`.
pub fn ad_constants(pm: &PlaneUnionMeasure, radii: &[f64], samples: usize, seed: u64) -> Result<AdConstants> {
    if radii.is_empty() || samples == 0 {
        return Err(Error::EmptyInput("radii or samples"));
    }
    if radii.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(invalid("radii", "must lie in (0, 1)"));
    }
    let d = pm.dim();
    let norm2 = pm.norm().powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut a, mut b) = (f64::INFINITY, 0.0f64);
    for _ in 0..samples {
        let y: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let s: f64 = pm.q.iter().zip(&y).map(|(&c, &v)| c as f64 * v).sum();
        let t = (s - s.round()) / norm2;
        let x: Vec<f64> = y.iter().zip(&pm.q).map(|(v, &c)| v - t * c as f64).collect();
        for &eps in radii {
            let ratio = pm.ball_measure(&x, eps) / eps.powi(d as i32 - 1);
            a = a.min(ratio);
            b = b.max(ratio);
        }
    }
    Ok(AdConstants { a, b, samples })
}

/// `q / gcd(q)`.
pub fn primitive_part(q: &[i64]) -> Vec<i64> {
    let g = gcd(q).max(1) as i64;
    q.iter().map(|c| c / g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::for_each_in_box;
    use crate::lattice::{is_primitive, LinearFormSpec};
    use crate::quad::composite;

    #[test]
    fn closed_form_examples() {
        let pm = PlaneUnionMeasure::new(vec![1, 0]).unwrap();
        assert_eq!(plane_fourier_coefficient(&pm, &[3, 0]), 1.0);
        let pm = PlaneUnionMeasure::new(vec![2, 1]).unwrap();
        assert!((plane_fourier_coefficient(&pm, &[2, 1]) - 2.23607).abs() < 1e-5);
        assert_eq!(plane_fourier_coefficient(&pm, &[1, 1]), 0.0);
    }

    #[test]
    fn quadrature_examples() {
        let pm = PlaneUnionMeasure::new(vec![1, 0]).unwrap();
        assert!((plane_fourier_quadrature(&pm, &[0, 0], 64).unwrap() - 1.0).norm() < 1e-12);
        let pm = PlaneUnionMeasure::new(vec![2, 1]).unwrap();
        let v = plane_fourier_quadrature(&pm, &[2, 1], 256).unwrap();
        assert!((v - 5f64.sqrt()).norm() < 1e-6);
        assert!(plane_fourier_quadrature(&pm, &[0, 1], 256).unwrap().norm() < 1e-6);
        assert!(plane_fourier_quadrature(&pm, &[0, 1], 1).is_err());
        assert!(PlaneUnionMeasure::new(vec![0, 0]).is_err());
    }

    #[test]
    fn quadrature_agrees_with_closed_form_on_primitive_vectors() {
        for d in [2usize, 3] {
            for_each_in_box(d, 2, |q| {
                if !is_primitive(q) {
                    return;
                }
                let pm = PlaneUnionMeasure::new(q.to_vec()).unwrap();
                for_each_in_box(d, 4, |k| {
                    let quad = plane_fourier_quadrature(&pm, k, 512).unwrap();
                    let exact = plane_fourier_coefficient(&pm, k);
                    assert!((quad - exact).norm() < 1e-5, "q={q:?} k={k:?}");
                });
            });
        }
    }

    #[test]
    fn non_primitive_vectors_follow_the_displayed_formula() {
        // q = (2, 2): planes x + y = r/2; resonances stay on Z q
        let pm = PlaneUnionMeasure::new(vec![2, 2]).unwrap();
        for_each_in_box(2, 6, |k| {
            let quad = plane_fourier_quadrature(&pm, k, 512).unwrap();
            assert!((quad - plane_fourier_coefficient(&pm, k)).norm() < 1e-9, "k={k:?}");
        });
        assert_eq!(plane_fourier_coefficient(&pm, &[1, 1]), 0.0);
        assert_eq!(primitive_part(&[2, 2]), vec![1, 1]);
    }

    #[test]
    fn total_mass_by_independent_line_integral() {
        // q = (2, 1): L_q([0,1]^2) = |q|, integrating arc length over the
        // lines 2x + y = r, r = 0..3, clipped to the unit square
        let pm = PlaneUnionMeasure::new(vec![2, 1]).unwrap();
        let mut length = 0.0;
        for r in 0..=3 {
            let r = r as f64;
            // y = r - 2x with 0 <= y < 1 and 0 <= x < 1
            let lo = ((r - 1.0) / 2.0).max(0.0);
            let hi = (r / 2.0).min(1.0);
            if hi > lo {
                length += composite(lo, hi, 1, |_| 5f64.sqrt());
            }
        }
        assert!((length - pm.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn table_export_is_tagged() {
        let pm = PlaneUnionMeasure::new(vec![2, 1]).unwrap();
        let t = plane_coefficient_table(&pm, 4);
        assert_eq!(t.tag(), Some("plane:[2,1]"));
        assert!((t.get(&[-4, -2]).unwrap().re - 5f64.sqrt()).abs() < 1e-15);
        let back = FourierTable::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn ad_constants_on_the_relevant_scale() {
        // below the plane spacing only one plane meets the ball: a = b = v_{d-1}
        let pm = PlaneUnionMeasure::new(vec![2, 1]).unwrap();
        let radii: Vec<f64> = (1..20).map(|i| i as f64 * 0.02).collect();
        let ad = ad_constants(&pm, &radii, 200, 7).unwrap();
        assert!((ad.a - 2.0).abs() < 1e-9 && (ad.b - 2.0).abs() < 1e-9);
        // past the spacing further planes enter and b grows with |q|
        let wide = ad_constants(&pm, &[0.9], 200, 7).unwrap();
        assert!(wide.b > 2.5);
    }

    #[test]
    fn compact_density_examples() {
        let spec = LinearFormSpec::new(vec![2, 1], 0.2, 1).unwrap();
        let pm = PlaneUnionMeasure::new(spec.q.clone()).unwrap();
        let w = spec.delta_star();
        let phi = BumpProfile::compact(w, 2).unwrap();
        let ad = ad_constants(&pm, &[w / 2.0, w, 2.0 * w], 50, 1).unwrap();
        // on a plane: phi_w >= min over B_{1/2} on a ball of radius w/2
        let on_plane = [0.3, 0.4];
        let v = mollified_plane_density(&pm, &phi, &on_plane).unwrap();
        let floor = phi.min_on_ball(0.5) * ad.a * (w / 2.0);
        assert!(floor > 0.0 && v >= floor);
        // off every slab: zero
        let off = [0.25, 0.0];
        assert!(crate::lattice::linear_form_distance(&pm.q, &off) > 0.2 + 1e-9);
        assert_eq!(mollified_plane_density(&pm, &phi, &off).unwrap(), 0.0);
        // everywhere: bounded by sup phi * b * (2 w)^{d-1}
        for i in 0..50 {
            let x = [i as f64 / 50.0, 0.37];
            let v = mollified_plane_density(&pm, &phi, &x).unwrap();
            assert!(v <= phi.sup_abs() * ad.b * 2.0 * w + 1e-15);
        }
    }

    #[test]
    fn density_integrates_to_mass_times_profile_mass() {
        // int over the torus of phi_w * L_q = |q| w^d
        let pm = PlaneUnionMeasure::new(vec![1, 2]).unwrap();
        for phi in [
            BumpProfile::compact(0.05, 2).unwrap(),
            BumpProfile::band_limited(0.05, 2).unwrap(),
        ] {
            // only q.x mod 1 matters; its distribution under Lebesgue is uniform
            let avg = composite(0.0, 1.0, 200, |s| mollified_density_at_phase(&pm, &phi, s));
            let expect = pm.norm() * 0.05f64.powi(2);
            assert!((avg - expect).abs() < 1e-9 * expect.max(1.0), "{avg} vs {expect}");
        }
    }
}
