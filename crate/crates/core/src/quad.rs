//! Composite Gauss-Legendre quadrature and a few special-function helpers.

use std::f64::consts::PI;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

/// Nodes per panel.
pub const PANEL_DEGREE: usize = 16;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(PANEL_DEGREE)
            .expect("degree is at least 2")
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// `int_a^b f` using `panels` equal Gauss-Legendre panels.
pub fn composite(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for &(x, w) in rule() {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// `Gamma(k / 2)` for a positive integer `k`, by the half-step recursion.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "gamma_half needs a positive argument");
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `int_{B_k} (1 - |u|^2)^m du` over the unit ball of `R^k`, for `m` a
/// nonnegative multiple of one half. `k = 0` gives 1.
pub fn ball_moment(k: usize, m: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let twice = (2.0 * m).round() as u32;
    debug_assert!((2.0 * m - twice as f64).abs() < 1e-12);
    PI.powf(k as f64 / 2.0) * gamma_half(twice + 2) / gamma_half(twice + 2 + k as u32)
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    ball_moment(n, 0.0)
}

/// `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - (PI * x).powi(2) / 6.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Centered cardinal B-spline of order `n` (the `n`-fold convolution of the
/// indicator of `[-1/2, 1/2)`), supported on `|x| < n/2`. Evaluated by the
/// two-term recursion, bottom up.
pub fn cardinal_bspline(n: u32, x: f64) -> f64 {
    if n == 0 || x.abs() >= n as f64 / 2.0 {
        return 0.0;
    }
    let n = n as usize;
    // level k holds M_k(x + m/2) for m = -(n-k), -(n-k)+2, .., n-k
    let mut vals: Vec<f64> = (0..n)
        .map(|i| {
            let y = x + (2.0 * i as f64 - (n as f64 - 1.0)) / 2.0;
            if (-0.5..0.5).contains(&y) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for k in 2..=n {
        let h = k as f64 / 2.0;
        let next: Vec<f64> = (0..vals.len() - 1)
            .map(|i| {
                let y = x + (2.0 * i as f64 - (n - k) as f64) / 2.0;
                ((h + y) * vals[i + 1] + (h - y) * vals[i]) / (k - 1) as f64
            })
            .collect();
        vals = next;
    }
    vals[0]
}

/// `M_n(0)`, cached for `n <= 64`.
pub fn cardinal_bspline_peak(n: u32) -> f64 {
    static PEAKS: OnceLock<Vec<f64>> = OnceLock::new();
    let peaks = PEAKS.get_or_init(|| (0..=64).map(|k| cardinal_bspline(k, 0.0)).collect());
    peaks
        .get(n as usize)
        .copied()
        .unwrap_or_else(|| cardinal_bspline(n, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        // v_n = 2 pi / n v_{n-2}
        for n in 3..10 {
            let rec = 2.0 * PI / n as f64 * unit_ball_volume(n - 2);
            assert!((unit_ball_volume(n) - rec).abs() < 1e-13);
        }
    }

    #[test]
    fn ball_moment_matches_quadrature() {
        // d = 2, m = 3: 2 pi int_0^1 (1-r^2)^3 r dr = pi / 4
        assert!((ball_moment(2, 3.0) - PI / 4.0).abs() < 1e-14);
        let one_d = composite(-1.0, 1.0, 4, |t| (1.0 - t * t).powf(2.5));
        assert!((ball_moment(1, 2.5) - one_d).abs() < 1e-8);
    }

    #[test]
    fn bspline_is_a_density() {
        for n in 1..9 {
            let total = composite(-(n as f64) / 2.0, n as f64 / 2.0, 8 * n as usize, |x| {
                cardinal_bspline(n, x)
            });
            assert!((total - 1.0).abs() < 1e-12, "order {n}: {total}");
        }
        assert_eq!(cardinal_bspline(4, 2.0), 0.0);
        assert!((cardinal_bspline(2, 0.0) - 1.0).abs() < 1e-15);
    }
}
