//! Sums of Fourier coefficients over structured frequency sets, and the
//! [`Spectrum`] abstraction shared by tables and closed-form spectra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::table::{for_each_in_box, FourierTable};
use super::transform::linear_form_frequency;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    Euclidean,
    Sup,
}

impl Norm {
    pub fn of(&self, v: &[i64]) -> f64 {
        match self {
            Norm::Euclidean => v.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt(),
            Norm::Sup => v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64,
        }
    }
}

/// A finite set of nonzero integer frequencies.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencySet {
    /// `{xi in Z^dim : Q | xi, 0 < |xi| <= radius}`.
    LatticeMultiples {
        dim: usize,
        modulus: u64,
        radius: f64,
        norm: Norm,
    },
    /// `{(t_1 q, .., t_n q) : t in Z^n, 0 < |t|_inf <= t_radius}`, or `<` when
    /// `strict`.
    LinearForm {
        q: Vec<i64>,
        folds: usize,
        t_radius: f64,
        strict: bool,
    },
    /// `{xi in Z^dim : |xi| <= radius}`, optionally without `0`.
    Ball {
        dim: usize,
        radius: f64,
        norm: Norm,
        include_zero: bool,
    },
}

impl FrequencySet {
    /// Multiples of `Q` in the punctured Euclidean ball of radius `2Q/delta`.
    pub fn lattice_upper(dim: usize, modulus: u64, delta: f64) -> Self {
        FrequencySet::LatticeMultiples {
            dim,
            modulus,
            radius: 2.0 * modulus as f64 / delta,
            norm: Norm::Euclidean,
        }
    }

    /// `(t_1 q, .., t_n q)` with `0 < |t|_inf <= 2/delta`.
    pub fn linear_form_upper(q: &[i64], folds: usize, delta: f64) -> Self {
        FrequencySet::LinearForm {
            q: q.to_vec(),
            folds,
            t_radius: 2.0 / delta,
            strict: false,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FrequencySet::LatticeMultiples { dim, .. } | FrequencySet::Ball { dim, .. } => *dim,
            FrequencySet::LinearForm { q, folds, .. } => q.len() * folds,
        }
    }

    /// Integer cutoff `t` such that `|t| <= t` describes the index range.
    fn index_radius(radius: f64, strict: bool) -> i64 {
        let r = radius.floor();
        if strict && r == radius {
            r as i64 - 1
        } else {
            r as i64
        }
    }

    /// Every member, in ascending lexicographic order.
    pub fn enumerate(&self) -> Result<Vec<Vec<i64>>> {
        let mut out = Vec::new();
        match self {
            FrequencySet::LatticeMultiples {
                dim,
                modulus,
                radius,
                norm,
            } => {
                if *modulus == 0 {
                    return Err(invalid("modulus", "must be positive"));
                }
                let q = *modulus as i64;
                let r = Self::index_radius(radius / q as f64, false);
                for_each_in_box(*dim, r, |k| {
                    let xi: Vec<i64> = k.iter().map(|c| c * q).collect();
                    let len = norm.of(&xi);
                    if len > 0.0 && len <= *radius {
                        out.push(xi);
                    }
                });
            }
            FrequencySet::LinearForm {
                q,
                folds,
                t_radius,
                strict,
            } => {
                if q.iter().all(|&c| c == 0) {
                    return Err(invalid("q", "must be nonzero"));
                }
                let r = Self::index_radius(*t_radius, *strict);
                for_each_in_box(*folds, r, |t| {
                    if t.iter().any(|&c| c != 0) {
                        out.push(linear_form_frequency(q, t));
                    }
                });
            }
            FrequencySet::Ball {
                dim,
                radius,
                norm,
                include_zero,
            } => {
                let r = radius.floor() as i64;
                for_each_in_box(*dim, r, |xi| {
                    let len = norm.of(xi);
                    if len <= *radius && (*include_zero || len > 0.0) {
                        out.push(xi.to_vec());
                    }
                });
            }
        }
        out.sort();
        Ok(out)
    }
}

/// Anything that can report `hat mu(xi)` at integer frequencies.
pub trait Spectrum {
    fn dim(&self) -> usize;

    fn coefficient(&self, xi: &[i64]) -> Result<Complex64>;

    /// `sum |hat mu(xi)|` over the set, in ascending lexicographic order.
    fn abs_sum(&self, set: &FrequencySet) -> Result<f64> {
        let mut s = 0.0;
        for xi in set.enumerate()? {
            s += self.coefficient(&xi)?.norm();
        }
        Ok(s)
    }

    /// The first member of `set` this spectrum cannot evaluate, if any.
    fn first_uncovered(&self, set: &FrequencySet) -> Result<Option<Vec<i64>>> {
        for xi in set.enumerate()? {
            match self.coefficient(&xi) {
                Ok(_) => {}
                Err(Error::FrequencyOutsideBox { .. } | Error::FrequencyNotTabulated { .. }) => {
                    return Ok(Some(xi))
                }
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }
}

impl Spectrum for FourierTable {
    fn dim(&self) -> usize {
        FourierTable::dim(self)
    }

    fn coefficient(&self, xi: &[i64]) -> Result<Complex64> {
        self.get(xi)
    }
}

/// Result of [`restricted_sum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RestrictedSum {
    Magnitude(f64),
    Signed(Complex64),
}

impl RestrictedSum {
    /// The magnitude sum, or the modulus of the signed sum.
    pub fn value(&self) -> f64 {
        match self {
            RestrictedSum::Magnitude(v) => *v,
            RestrictedSum::Signed(c) => c.norm(),
        }
    }
}

/// Exact sum over the selected frequencies of `|coeff|` (or of `coeff`).
/// Frequencies outside the spectrum's coverage are reported, first one wins.
pub fn restricted_sum(
    spectrum: &dyn Spectrum,
    set: &FrequencySet,
    magnitude_only: bool,
) -> Result<RestrictedSum> {
    if set.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            found: set.dim(),
        });
    }
    if magnitude_only {
        return Ok(RestrictedSum::Magnitude(spectrum.abs_sum(set)?));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for xi in set.enumerate()? {
        s += spectrum.coefficient(&xi)?;
    }
    Ok(RestrictedSum::Signed(s))
}

/// Closed-form spectra standing in for measures whose transforms are known
/// at every frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SyntheticSpectrum {
    /// Lebesgue measure on the torus: `hat mu(xi) = 0` for `xi != 0`.
    Lebesgue { dim: usize },
    /// `hat mu(xi) = |xi|^{-exponent}` (Euclidean norm) for `xi != 0`.
    PowerLaw { dim: usize, exponent: f64 },
}

impl Spectrum for SyntheticSpectrum {
    fn dim(&self) -> usize {
        match self {
            SyntheticSpectrum::Lebesgue { dim } | SyntheticSpectrum::PowerLaw { dim, .. } => *dim,
        }
    }

    fn coefficient(&self, xi: &[i64]) -> Result<Complex64> {
        if xi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: xi.len(),
            });
        }
        let len = Norm::Euclidean.of(xi);
        if len == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        Ok(match self {
            SyntheticSpectrum::Lebesgue { .. } => Complex64::new(0.0, 0.0),
            SyntheticSpectrum::PowerLaw { exponent, .. } => Complex64::new(len.powf(-exponent), 0.0),
        })
    }

    fn abs_sum(&self, set: &FrequencySet) -> Result<f64> {
        match (self, set) {
            (SyntheticSpectrum::Lebesgue { .. }, _) => {
                // every member of every set is nonzero, except in a Ball with zero
                match set {
                    FrequencySet::Ball {
                        include_zero: true, ..
                    } => Ok(1.0),
                    _ => Ok(0.0),
                }
            }
            // one-dimensional index sets: 2 |Q|^{-a} H_M(a)
            (
                SyntheticSpectrum::PowerLaw { exponent, .. },
                FrequencySet::LatticeMultiples {
                    dim: 1,
                    modulus,
                    radius,
                    ..
                },
            ) => {
                let m = (radius / *modulus as f64).floor() as u64;
                Ok(2.0 * (*modulus as f64).powf(-exponent) * harmonic(m, *exponent))
            }
            (
                SyntheticSpectrum::PowerLaw { exponent, .. },
                FrequencySet::LinearForm {
                    q,
                    folds: 1,
                    t_radius,
                    strict,
                },
            ) => {
                let m = FrequencySet::index_radius(*t_radius, *strict).max(0) as u64;
                Ok(2.0 * Norm::Euclidean.of(q).powf(-exponent) * harmonic(m, *exponent))
            }
            _ => {
                let mut s = 0.0;
                for xi in set.enumerate()? {
                    s += self.coefficient(&xi)?.norm();
                }
                Ok(s)
            }
        }
    }
}

/// Generalized harmonic number `sum_{k=1}^{m} k^{-a}`. Direct below a cutoff,
/// Euler-Maclaurin with four correction terms above it.
pub fn harmonic(m: u64, a: f64) -> f64 {
    const DIRECT: u64 = 64;
    if m <= DIRECT {
        return (1..=m).map(|k| (k as f64).powf(-a)).sum();
    }
    let head: f64 = (1..DIRECT).map(|k| (k as f64).powf(-a)).sum();
    // sum_{k=n}^{m} f(k), f(x) = x^{-a}
    let (n, mf) = (DIRECT as f64, m as f64);
    let f = |x: f64| x.powf(-a);
    let integral = if (a - 1.0).abs() < 1e-15 {
        (mf / n).ln()
    } else {
        (mf.powf(1.0 - a) - n.powf(1.0 - a)) / (1.0 - a)
    };
    // derivatives f' = -a x^{-a-1}, f''' = -a(a+1)(a+2) x^{-a-3}, f^(5)
    let d1 = |x: f64| -a * x.powf(-a - 1.0);
    let d3 = |x: f64| -a * (a + 1.0) * (a + 2.0) * x.powf(-a - 3.0);
    let d5 = |x: f64| -a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0) * x.powf(-a - 5.0);
    let tail = integral + 0.5 * (f(n) + f(mf)) + (d1(mf) - d1(n)) / 12.0
        - (d3(mf) - d3(n)) / 720.0
        + (d5(mf) - d5(n)) / 30240.0;
    head + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::transform_atomic;
    use crate::measure::{AtomicMeasure, GridMeasure};
    use std::collections::BTreeMap;

    #[test]
    fn multiples_in_ball() {
        // Q = 10, delta = 0.5: multiples of 10 with 0 < |xi| <= 40
        let set = FrequencySet::lattice_upper(1, 10, 0.5);
        assert_eq!(
            set.enumerate().unwrap(),
            vec![vec![-40], vec![-30], vec![-20], vec![-10], vec![10], vec![20], vec![30], vec![40]]
        );
        let mu = AtomicMeasure::point_mass(&[0.0]).unwrap();
        let t = transform_atomic(&mu, 40).unwrap();
        assert_eq!(restricted_sum(&t, &set, true).unwrap(), RestrictedSum::Magnitude(8.0));
    }

    #[test]
    fn uniform_grid_sums_vanish() {
        let g = GridMeasure::uniform(2, 64).unwrap();
        let t = crate::fourier::transform_grid(&g, 20).unwrap();
        let set = FrequencySet::Ball {
            dim: 2,
            radius: 20.0,
            norm: Norm::Sup,
            include_zero: false,
        };
        assert!(restricted_sum(&t, &set, true).unwrap().value() < 1e-12);
    }

    #[test]
    fn singleton_entry() {
        let t = FourierTable::from_fn(1, 10, |xi| match xi[0] {
            0 => Complex64::new(1.0, 0.0),
            5 => Complex64::new(0.3, 0.0),
            _ => Complex64::new(0.0, 0.0),
        });
        let set = FrequencySet::Ball {
            dim: 1,
            radius: 7.0,
            norm: Norm::Euclidean,
            include_zero: false,
        };
        assert_eq!(restricted_sum(&t, &set, true).unwrap().value(), 0.3);
        assert_eq!(
            restricted_sum(&t, &set, false).unwrap(),
            RestrictedSum::Signed(Complex64::new(0.3, 0.0))
        );
    }

    #[test]
    fn out_of_box_frequency_is_named() {
        let t = FourierTable::from_fn(1, 10, |_| Complex64::new(1.0, 0.0));
        let set = FrequencySet::lattice_upper(1, 10, 0.5);
        assert_eq!(
            restricted_sum(&t, &set, true),
            Err(Error::FrequencyOutsideBox {
                xi: vec![-40],
                box_radius: 10
            })
        );
        assert_eq!(t.first_uncovered(&set).unwrap(), Some(vec![-40]));
        let mut m = BTreeMap::new();
        m.insert(vec![-40], Complex64::new(1.0, 0.0));
        m.insert(vec![10], Complex64::new(1.0, 0.0));
        let sparse = FourierTable::sparse(1, m).unwrap();
        assert_eq!(sparse.first_uncovered(&set).unwrap(), Some(vec![-30]));
    }

    #[test]
    fn linear_form_set_counts_box() {
        // (2*8+1)^2 - 1 = 288 members
        let set = FrequencySet::linear_form_upper(&[1], 2, 0.25);
        assert_eq!(set.enumerate().unwrap().len(), 288);
        let strict = FrequencySet::LinearForm {
            q: vec![1],
            folds: 2,
            t_radius: 8.0,
            strict: true,
        };
        assert_eq!(strict.enumerate().unwrap().len(), 15 * 15 - 1);
    }

    #[test]
    fn harmonic_matches_direct_sum() {
        for a in [0.3, 0.5, 1.0, 1.5, 2.0] {
            for m in [1u64, 10, 64, 65, 100, 1000, 12345] {
                let direct: f64 = (1..=m).map(|k| (k as f64).powf(-a)).sum();
                assert!(
                    (harmonic(m, a) - direct).abs() < 1e-11 * direct.max(1.0),
                    "a={a} m={m}"
                );
            }
        }
    }

    #[test]
    fn power_law_fast_paths_match_enumeration() {
        let s = SyntheticSpectrum::PowerLaw {
            dim: 1,
            exponent: 0.7,
        };
        let set = FrequencySet::lattice_upper(1, 7, 0.01);
        let direct: f64 = set
            .enumerate()
            .unwrap()
            .iter()
            .map(|xi| s.coefficient(xi).unwrap().norm())
            .sum();
        assert!((s.abs_sum(&set).unwrap() - direct).abs() < 1e-12 * direct);

        let s2 = SyntheticSpectrum::PowerLaw {
            dim: 2,
            exponent: 0.7,
        };
        let lf = FrequencySet::linear_form_upper(&[3, -2], 1, 0.013);
        let direct: f64 = lf
            .enumerate()
            .unwrap()
            .iter()
            .map(|xi| s2.coefficient(xi).unwrap().norm())
            .sum();
        assert!((s2.abs_sum(&lf).unwrap() - direct).abs() < 1e-12 * direct);
    }
}
