use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::table::{box_len, sup_norm, FourierTable};
use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, GridMeasure, Measure};

/// `e^{-2 pi i t}`, reducing `t` mod 1 first.
#[inline]
pub fn unit_phase(t: f64) -> Complex64 {
    let frac = t - t.round();
    let (s, c) = (TAU * frac).sin_cos();
    Complex64::new(c, -s)
}

/// `hat mu(xi) = int e^{-2 pi i x.xi} d mu(x)` on the box `|xi|_inf <= box_radius`.
pub fn transform(mu: &Measure, box_radius: usize) -> Result<FourierTable> {
    match mu {
        Measure::Atomic(m) => transform_atomic(m, box_radius),
        Measure::Grid(m) => transform_grid(m, box_radius),
    }
}

/// Exact atom sums. Cost is `atoms * (2 box + 1)^d`.
pub fn transform_atomic(mu: &AtomicMeasure, box_radius: usize) -> Result<FourierTable> {
    check_box(box_radius)?;
    let dim = mu.dim();
    let r = box_radius as i64;
    let side = 2 * box_radius + 1;
    let len = box_len(dim, box_radius);
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    let mut phases = vec![Complex64::new(0.0, 0.0); dim * side];
    let mut partial = vec![Complex64::new(0.0, 0.0); dim + 1];
    let mut idx = vec![0usize; dim];
    for atom in mu.atoms() {
        for (k, &x) in atom.point.iter().enumerate() {
            for (j, xi) in (-r..=r).enumerate() {
                phases[k * side + j] = unit_phase(x * xi as f64);
            }
        }
        // odometer over the box, keeping running products per prefix
        idx.iter_mut().for_each(|i| *i = 0);
        partial[0] = Complex64::new(atom.weight, 0.0);
        for k in 0..dim {
            partial[k + 1] = partial[k] * phases[k * side];
        }
        for slot in acc.iter_mut() {
            *slot += partial[dim];
            let mut k = dim;
            while k > 0 {
                k -= 1;
                idx[k] += 1;
                if idx[k] < side {
                    break;
                }
                idx[k] = 0;
            }
            for j in k..dim {
                partial[j + 1] = partial[j] * phases[j * side + idx[j]];
            }
        }
    }
    Ok(FourierTable::dense(dim, box_radius, acc))
}

/// Multi-dimensional FFT of the mass array with the cell-center phase
/// correction `e^{-pi i xi_k / N}` per axis. Requires `box_radius <= N/2`.
pub fn transform_grid(mu: &GridMeasure, box_radius: usize) -> Result<FourierTable> {
    check_box(box_radius)?;
    let n = mu.resolution();
    if box_radius > n / 2 {
        return Err(Error::AliasGuard {
            requested: box_radius,
            limit: n / 2,
        });
    }
    let dim = mu.dim();
    let mut data: Vec<Complex64> = mu.mass().iter().map(|&m| Complex64::new(m, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
    let shift: Vec<Complex64> = (-(box_radius as i64)..=box_radius as i64)
        .map(|xi| unit_phase(xi as f64 / (2 * n) as f64))
        .collect();
    let r = box_radius as i64;
    let table = FourierTable::from_fn(dim, box_radius, |xi| {
        let mut flat = 0usize;
        let mut phase = Complex64::new(1.0, 0.0);
        for &k in xi {
            flat = flat * n + k.rem_euclid(n as i64) as usize;
            phase *= shift[(k + r) as usize];
        }
        data[flat] * phase
    });
    Ok(table)
}

/// Exact coefficients at the listed frequencies only. Grid measures still
/// honour the alias guard.
pub fn transform_at(mu: &Measure, freqs: &[Vec<i64>]) -> Result<FourierTable> {
    let dim = mu.dim();
    if let Measure::Grid(g) = mu {
        let limit = g.resolution() / 2;
        if let Some(xi) = freqs.iter().find(|xi| sup_norm(xi) as usize > limit) {
            return Err(Error::AliasGuard {
                requested: sup_norm(xi) as usize,
                limit,
            });
        }
    }
    let mut map = BTreeMap::new();
    for xi in freqs {
        if xi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: xi.len(),
            });
        }
        map.insert(xi.clone(), Complex64::new(0.0, 0.0));
    }
    mu.for_each_atom(|p, w| {
        for (xi, acc) in map.iter_mut() {
            let t: f64 = p.iter().zip(xi).map(|(x, &k)| x * k as f64).sum();
            *acc += w * unit_phase(t);
        }
    });
    FourierTable::sparse(dim, map)
}

/// Atoms of `mu` on `[0,1)^{nd}` merged by their reduced projections
/// `(q.x^{(1)}, .., q.x^{(n)}) mod 1`, keyed by bit pattern. Grid measures
/// contribute their cell-center atoms.
pub fn projection_groups(mu: &Measure, q: &[i64], folds: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let d = q.len();
    if d == 0 || folds == 0 || mu.dim() != d * folds {
        return Err(Error::DimensionMismatch {
            expected: d * folds,
            found: mu.dim(),
        });
    }
    let mut groups: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
    mu.for_each_atom(|point, weight| {
        let proj: Vec<f64> = point
            .chunks(d)
            .map(|block| {
                let s: f64 = q.iter().zip(block).map(|(&c, x)| c as f64 * x).sum();
                crate::measure::wrap_unit(s)
            })
            .collect();
        let key = proj.iter().map(|s| s.to_bits()).collect();
        groups.entry(key).or_insert((proj, 0.0)).1 += weight;
    });
    Ok(groups.into_values().collect())
}

/// Coefficients at `(t_1 q, .., t_n q)` for `|t|_inf <= t_max`, for a measure
/// on `[0,1)^{nd}`. Only the projections `q.x^{(i)}` matter, so atoms sharing
/// a projection tuple are merged before summing; the result is exact for the
/// atoms (cell centers, for grids).
pub fn linear_form_table(mu: &Measure, q: &[i64], folds: usize, t_max: usize) -> Result<FourierTable> {
    let d = q.len();
    let groups = projection_groups(mu, q, folds)?;
    let t_r = t_max as i64;
    let side = 2 * t_max + 1;
    let mut acc = vec![Complex64::new(0.0, 0.0); side.pow(folds as u32)];
    let mut phases = vec![Complex64::new(0.0, 0.0); folds * side];
    for (proj, w) in &groups {
        for (i, &s) in proj.iter().enumerate() {
            for (j, t) in (-t_r..=t_r).enumerate() {
                phases[i * side + j] = unit_phase(s * t as f64);
            }
        }
        for (flat, slot) in acc.iter_mut().enumerate() {
            let mut rest = flat;
            let mut v = Complex64::new(*w, 0.0);
            for i in (0..folds).rev() {
                v *= phases[i * side + rest % side];
                rest /= side;
            }
            *slot += v;
        }
    }
    let mut map = BTreeMap::new();
    for (flat, v) in acc.into_iter().enumerate() {
        let mut rest = flat;
        let mut t = vec![0i64; folds];
        for i in (0..folds).rev() {
            t[i] = (rest % side) as i64 - t_r;
            rest /= side;
        }
        map.insert(linear_form_frequency(q, &t), v);
    }
    FourierTable::sparse(d * folds, map)
}

/// `(t_1 q, .., t_n q)` flattened into `Z^{nd}`.
pub fn linear_form_frequency(q: &[i64], t: &[i64]) -> Vec<i64> {
    t.iter()
        .flat_map(|&ti| q.iter().map(move |&c| ti * c))
        .collect()
}

fn check_box(box_radius: usize) -> Result<()> {
    if box_radius == 0 {
        return Err(crate::error::invalid("box_radius", "must be at least 1"));
    }
    Ok(())
}
