use std::io::Write;

use serde::{Deserialize, Serialize};

use super::sums::Norm;
use super::table::FourierTable;
use crate::error::{invalid, Error, Result};

/// Magnitudes below this are raised to it before taking logs.
pub const PEAK_FLOOR: f64 = 1e-13;

pub const DEFAULT_SHELL_BASE: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub radius: f64,
    /// `max |coeff|` over `radius <= |xi| < 2 radius` (Euclidean norm).
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub shells: Vec<Shell>,
    /// Estimate of `s` in `|coeff(xi)| ~ |xi|^{-s/2}`, clamped to `[0, cap]`.
    pub fitted_s: f64,
    pub cap: f64,
    /// Raw slope of the log-log fit, before clamping.
    pub slope: f64,
    /// Number of shells whose peak was raised to [`PEAK_FLOOR`].
    pub floored: usize,
    /// True when at least half of the shells were floored.
    pub zero_dominated: bool,
}

impl DecayProfile {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["radius", "peak"])?;
        for s in &self.shells {
            wr.write_record([s.radius.to_string(), s.peak.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Shell-peak regression of `log |coeff|` against `log |xi|`.
///
/// Shells sit at radii `shell_base^k <= box_radius`; a shell is usable when
/// the table holds at least one frequency in it. If every shell is floored
/// the table carries no measurable signal and `fitted_s` is set to the cap.
pub fn decay_profile(table: &FourierTable, shell_base: f64) -> Result<DecayProfile> {
    if !(shell_base > 1.0) || !shell_base.is_finite() {
        return Err(invalid("shell_base", format!("must exceed 1, got {shell_base}")));
    }
    let box_r = table.box_radius() as f64;
    if box_r < shell_base * shell_base {
        return Err(invalid(
            "box_radius",
            format!("{box_r} is below shell_base^2 = {}", shell_base * shell_base),
        ));
    }
    let mut radii = Vec::new();
    let mut r = 1.0;
    while r <= box_r {
        radii.push(r);
        r *= shell_base;
    }
    let mut peaks: Vec<Option<f64>> = vec![None; radii.len()];
    let ln_b = shell_base.ln();
    table.for_each(|xi, c| {
        let len = Norm::Euclidean.of(xi);
        if len < 1.0 {
            return;
        }
        // shells k with b^k <= len < 2 b^k
        let hi = (len.ln() / ln_b + 1e-12).floor() as i64;
        let lo = ((len / 2.0).ln() / ln_b).floor() as i64;
        for k in (lo.max(0))..=hi {
            let k = k as usize;
            if k >= radii.len() {
                break;
            }
            if radii[k] <= len && len < 2.0 * radii[k] {
                let m = c.norm();
                peaks[k] = Some(peaks[k].map_or(m, |p: f64| p.max(m)));
            }
        }
    });
    let shells: Vec<Shell> = radii
        .iter()
        .zip(&peaks)
        .filter_map(|(&radius, p)| p.map(|peak| Shell { radius, peak }))
        .collect();
    if shells.len() < 3 {
        return Err(Error::TooFewShells {
            found: shells.len(),
        });
    }
    let cap = table.dim() as f64;
    let floored = shells.iter().filter(|s| s.peak < PEAK_FLOOR).count();
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .map(|s| (s.radius.ln(), s.peak.max(PEAK_FLOOR).ln()))
        .collect();
    let slope = least_squares_slope(&pts);
    let fitted_s = if floored == shells.len() {
        cap
    } else {
        (-2.0 * slope).clamp(0.0, cap)
    };
    Ok(DecayProfile {
        zero_dominated: 2 * floored >= shells.len(),
        shells,
        fitted_s,
        cap,
        slope,
        floored,
    })
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
