use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::{ball_moment, cardinal_bspline, cardinal_bspline_peak, composite, sinc};

/// Half-width, in base units, of the window over which band-limited plane
/// integrals are truncated. The kernel tail beyond it is below 1e-12.
pub const BAND_LIMITED_REACH: f64 = 48.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `C (1 - |z|^2)^exponent` on the unit ball, zero outside.
    CompactSupport { exponent: u32 },
    /// `prod_i beta sinc^{2 order}(beta z_i) / M(0)`; its transform is a
    /// product of cardinal B-splines supported in `|xi_i| < order * beta`.
    BandLimited { order: u32, beta: f64 },
}

impl ProfileKind {
    pub const COMPACT: ProfileKind = ProfileKind::CompactSupport { exponent: 4 };
    pub const BAND_LIMITED: ProfileKind = ProfileKind::BandLimited {
        order: 4,
        beta: 0.25,
    };
}

/// A mollifier `phi_w(x) = phi(x / w)` on `R^dim` with `hat phi(0) = 1`.
///
/// Base quantities refer to `phi`, scaled ones to `phi_w`, whose transform is
/// `w^dim hat phi(w xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub kind: ProfileKind,
    pub width: f64,
    pub dim: usize,
}

impl BumpProfile {
    pub fn new(kind: ProfileKind, width: f64, dim: usize) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(invalid("width", format!("must be positive, got {width}")));
        }
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        match kind {
            ProfileKind::CompactSupport { exponent } if exponent == 0 => {
                return Err(invalid("exponent", "must be positive"))
            }
            ProfileKind::BandLimited { order, beta } => {
                if order == 0 {
                    return Err(invalid("order", "must be positive"));
                }
                if !(beta > 0.0 && beta < 0.5) {
                    return Err(invalid("beta", format!("must lie in (0, 1/2), got {beta}")));
                }
            }
            _ => {}
        }
        Ok(Self { kind, width, dim })
    }

    pub fn compact(width: f64, dim: usize) -> Result<Self> {
        Self::new(ProfileKind::COMPACT, width, dim)
    }

    pub fn band_limited(width: f64, dim: usize) -> Result<Self> {
        Self::new(ProfileKind::BAND_LIMITED, width, dim)
    }

    pub fn with_width(&self, width: f64) -> Result<Self> {
        Self::new(self.kind, width, self.dim)
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.kind, ProfileKind::CompactSupport { .. })
    }

    /// `C` with `int C (1-|z|^2)^m dz = 1`.
    fn compact_norm(&self, m: u32) -> f64 {
        1.0 / ball_moment(self.dim, m as f64)
    }

    fn band_k(order: u32, beta: f64, s: f64) -> f64 {
        beta * sinc(beta * s).powi(2 * order as i32) / cardinal_bspline_peak(2 * order)
    }

    fn band_k_hat(order: u32, beta: f64, xi: f64) -> f64 {
        cardinal_bspline(2 * order, xi / beta) / cardinal_bspline_peak(2 * order)
    }

    pub fn base_value(&self, z: &[f64]) -> f64 {
        match self.kind {
            ProfileKind::CompactSupport { exponent } => {
                let r2: f64 = z.iter().map(|c| c * c).sum();
                if r2 >= 1.0 {
                    0.0
                } else {
                    self.compact_norm(exponent) * (1.0 - r2).powi(exponent as i32)
                }
            }
            ProfileKind::BandLimited { order, beta } => {
                z.iter().map(|&s| Self::band_k(order, beta, s)).product()
            }
        }
    }

    /// Radial transform of the compact bump, `hat phi` at `|xi| = rho`.
    fn compact_radial_transform(&self, m: u32, rho: f64) -> f64 {
        // hat phi(rho) = int (1-t^2)^a cos(2 pi rho t) dt / int (1-t^2)^a dt,
        // a = m + (d-1)/2; substitute t = sin(theta).
        let a = m as f64 + (self.dim as f64 - 1.0) / 2.0;
        let power = 2.0 * a + 1.0;
        let omega = 2.0 * PI * rho.abs();
        let panels = 4 + (omega / 2.0).ceil() as usize;
        let integral = composite(-PI / 2.0, PI / 2.0, panels, |th| {
            th.cos().powf(power) * (omega * th.sin()).cos()
        });
        integral / ball_moment(1, a)
    }

    pub fn base_transform(&self, xi: &[f64]) -> f64 {
        match self.kind {
            ProfileKind::CompactSupport { exponent } => {
                let rho = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
                self.compact_radial_transform(exponent, rho)
            }
            ProfileKind::BandLimited { order, beta } => xi
                .iter()
                .map(|&x| Self::band_k_hat(order, beta, x))
                .product(),
        }
    }

    /// Radial profile of the compact bump's transform; `None` for kinds that
    /// are not radial.
    pub fn radial_transform(&self, rho: f64) -> Option<f64> {
        match self.kind {
            ProfileKind::CompactSupport { exponent } => {
                Some(self.compact_radial_transform(exponent, rho))
            }
            ProfileKind::BandLimited { .. } => None,
        }
    }

    /// `phi(x / w)`.
    pub fn scaled_value(&self, x: &[f64]) -> f64 {
        let z: Vec<f64> = x.iter().map(|c| c / self.width).collect();
        self.base_value(&z)
    }

    /// `w^d hat phi(w xi)`.
    pub fn scaled_transform(&self, xi: &[f64]) -> f64 {
        let z: Vec<f64> = xi.iter().map(|c| c * self.width).collect();
        self.width.powi(self.dim as i32) * self.base_transform(&z)
    }

    /// `sup |phi|`.
    pub fn sup_abs(&self) -> f64 {
        match self.kind {
            ProfileKind::CompactSupport { exponent } => self.compact_norm(exponent),
            ProfileKind::BandLimited { order, beta } => {
                Self::band_k(order, beta, 0.0).powi(self.dim as i32)
            }
        }
    }

    /// `min phi` over the closed base ball of radius `r`.
    pub fn min_on_ball(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::CompactSupport { exponent } => {
                if r >= 1.0 {
                    0.0
                } else {
                    self.compact_norm(exponent) * (1.0 - r * r).powi(exponent as i32)
                }
            }
            // log k(sqrt(u)) is concave in u, so the minimum over the ball sits
            // at a point with a single nonzero coordinate
            ProfileKind::BandLimited { order, beta } => {
                if beta * r >= 1.0 {
                    return 0.0;
                }
                Self::band_k(order, beta, r)
                    * Self::band_k(order, beta, 0.0).powi(self.dim as i32 - 1)
            }
        }
    }

    /// Radius of the base support, `None` when unbounded.
    pub fn support_radius(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::CompactSupport { .. } => Some(1.0),
            ProfileKind::BandLimited { .. } => None,
        }
    }

    /// Per-coordinate edge of the base transform's support, `None` when
    /// unbounded.
    pub fn band_edge(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::CompactSupport { .. } => None,
            ProfileKind::BandLimited { order, beta } => Some(order as f64 * beta),
        }
    }

    /// Largest `e` with `hat phi(xi) = O(|xi|^{-e})`.
    pub fn decay_order(&self) -> f64 {
        match self.kind {
            ProfileKind::CompactSupport { exponent } => {
                exponent as f64 + (self.dim as f64 + 1.0) / 2.0
            }
            ProfileKind::BandLimited { .. } => f64::INFINITY,
        }
    }

    /// `int phi` over the base hyperplane `{z : z . normal = offset}`,
    /// `normal` a unit vector.
    pub fn base_plane_integral(&self, normal: &[f64], offset: f64) -> f64 {
        let d = self.dim;
        match self.kind {
            ProfileKind::CompactSupport { exponent } => {
                let m = exponent as f64;
                let s = 1.0 - offset * offset;
                if s <= 0.0 {
                    return 0.0;
                }
                self.compact_norm(exponent)
                    * ball_moment(d - 1, m)
                    * s.powf(m + (d as f64 - 1.0) / 2.0)
            }
            ProfileKind::BandLimited { .. } => {
                if d == 1 {
                    return self.base_value(&[offset * normal[0].signum()]);
                }
                let basis = plane_basis(normal);
                let origin: Vec<f64> = normal.iter().map(|c| c * offset).collect();
                let panels = (2.0 * BAND_LIMITED_REACH) as usize;
                let mut coords = vec![0.0; d - 1];
                let mut point = vec![0.0; d];
                nested_integral(&mut coords, 0, panels, &mut |u| {
                    for (k, p) in point.iter_mut().enumerate() {
                        *p = origin[k] + u.iter().zip(&basis).map(|(c, e)| c * e[k]).sum::<f64>();
                    }
                    self.base_value(&point)
                })
            }
        }
    }

    /// `int phi_w` over the hyperplane at signed distance `offset` from the
    /// origin with unit normal `normal`.
    pub fn scaled_plane_integral(&self, normal: &[f64], offset: f64) -> f64 {
        self.width.powi(self.dim as i32 - 1) * self.base_plane_integral(normal, offset / self.width)
    }

    /// Distance beyond which [`scaled_plane_integral`](Self::scaled_plane_integral)
    /// vanishes or is below 1e-12 of its peak.
    pub fn scaled_reach(&self) -> f64 {
        self.width * self.support_radius().unwrap_or(BAND_LIMITED_REACH)
    }
}

fn nested_integral(
    coords: &mut Vec<f64>,
    level: usize,
    panels: usize,
    f: &mut dyn FnMut(&[f64]) -> f64,
) -> f64 {
    if level == coords.len() {
        return f(coords);
    }
    composite(-BAND_LIMITED_REACH, BAND_LIMITED_REACH, panels, |u| {
        coords[level] = u;
        nested_integral(coords, level + 1, panels, f)
    })
}

/// Orthonormal basis of the complement of the unit vector `n`.
pub fn plane_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()));
    for &axis in &order {
        if basis.len() == d - 1 {
            break;
        }
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        for e in std::iter::once(n).chain(basis.iter().map(|b| b.as_slice())) {
            let dot: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(e).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|c| c / norm).collect());
        }
    }
    basis
}
