//! Dilation-radius schedules.
//!
//! Dilated areas are step functions of the radius, so radii sitting next to a
//! jump of the discrete-disk area carry biased area samples. The optimal-area
//! radii are the radii at which the discrete disk (pixel centers within `r` of
//! the origin) has area exactly `pi r^2`, i.e. the zeros of
//! `D(r) = discrete_area(r) - pi r^2`.

use crate::error::{Error, Result};

pub const DEFAULT_R_MIN: f64 = 1.2616;
pub const DEFAULT_STEP: f64 = 1.05;

/// How a schedule of dilation radii was constructed.
#[derive(Debug, Clone, PartialEq)]
pub enum SchedulePolicy {
    /// Optimal-area radii thinned to multiplicative spacing of about 1.5.
    QuickOptimalArea,
    /// Geometric ladder `r_min * step^j <= r_max`.
    Geometric { r_min: f64, step: f64, r_max: f64 },
}

/// A strictly increasing list of dilation radii in pixel widths.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSchedule {
    pub radii: Vec<f64>,
    pub policy: SchedulePolicy,
}

impl RadiusSchedule {
    pub fn from_radii(radii: Vec<f64>, policy: SchedulePolicy) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidInput("empty radius schedule".into()));
        }
        if radii.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidInput("radii must be >= 0".into()));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "radii must be strictly increasing".into(),
            ));
        }
        Ok(RadiusSchedule { radii, policy })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Number of pixel centers `(i, j)` with `i^2 + j^2 <= r^2`.
pub fn discrete_disk_area(r: f64) -> u64 {
    if r < 0.0 {
        return 0;
    }
    let r2 = (r * r + 1e-9).floor() as i64;
    let rmax = (r2 as f64).sqrt().floor() as i64 + 1;
    let mut count = 0u64;
    for i in -rmax..=rmax {
        let rem = r2 - i * i;
        if rem < 0 {
            continue;
        }
        let mut j = (rem as f64).sqrt().floor() as i64;
        // guard against float rounding at exact squares
        while j * j > rem {
            j -= 1;
        }
        while (j + 1) * (j + 1) <= rem {
            j += 1;
        }
        count += (2 * j + 1) as u64;
    }
    count
}

/// Plateaus of the discrete-disk area: for each attainable area `A` the
/// half-open radius-squared interval `[n_lo, n_hi)` on which it holds.
fn area_plateaus(max_r2: i64) -> Vec<(i64, i64, u64)> {
    // counts[n] = number of lattice points at squared norm exactly n
    let mut counts = vec![0u32; (max_r2 + 1) as usize];
    let rmax = (max_r2 as f64).sqrt().floor() as i64 + 1;
    for i in -rmax..=rmax {
        for j in -rmax..=rmax {
            let n = i * i + j * j;
            if n <= max_r2 {
                counts[n as usize] += 1;
            }
        }
    }
    let mut plateaus = Vec::new();
    let mut cum = 0u64;
    let mut prev_n: Option<i64> = None;
    for n in 0..=max_r2 {
        if counts[n as usize] > 0 {
            if let Some(p) = prev_n {
                plateaus.push((p, n, cum));
            }
            cum += counts[n as usize] as u64;
            prev_n = Some(n);
        }
    }
    // the final plateau (from the last attainable norm up to max_r2) is
    // dropped: its right endpoint is unknown without looking further
    plateaus
}

/// All optimal-area radii up to `r_max`.
///
/// A radius qualifies when the area staircase crosses `pi r^2` robustly: the
/// plateau with area `A` contains `sqrt(A/pi)`, and the staircase overshoots
/// the parabola by at least one pixel at the plateau start and undershoots by
/// at least one pixel at its end. Grazing crossings (areas 13, 29, 81, ...)
/// sit within a fraction of a pixel of an area jump and are exactly the radii
/// the schedule exists to avoid, so they are excluded.
pub fn optimal_area_radii(r_max: f64) -> Vec<f64> {
    if r_max < 0.5 {
        return Vec::new();
    }
    let max_r2 = ((r_max + 2.0) * (r_max + 2.0)).ceil() as i64;
    let mut out = Vec::new();
    for (n_lo, n_hi, area) in area_plateaus(max_r2) {
        let t = area as f64 / std::f64::consts::PI; // r^2 at the would-be zero
        if t < n_lo as f64 || t >= n_hi as f64 {
            continue;
        }
        let overshoot = area as f64 - std::f64::consts::PI * n_lo as f64;
        let undershoot = std::f64::consts::PI * n_hi as f64 - area as f64;
        if overshoot < 1.0 - 1e-9 || undershoot < 1.0 - 1e-9 {
            continue;
        }
        let r = t.sqrt();
        if r <= r_max {
            out.push(r);
        }
    }
    out
}

/// The quick evaluation schedule: optimal-area radii thinned greedily to
/// multiplicative spacing of at least 1.5, starting at the first radius.
pub fn quick_radii(r_max: f64) -> Vec<f64> {
    let all = optimal_area_radii(r_max);
    let mut out: Vec<f64> = Vec::new();
    for r in all {
        if out.last().map_or(true, |last| r >= 1.5 * last) {
            out.push(r);
        }
    }
    out
}

/// Default `r_max` rule for a `w x h` image.
pub fn default_r_max(width: usize, height: usize) -> f64 {
    (0.06 * width.min(height) as f64).max(20.0)
}

/// Geometric schedule `r_j = r_min * step^j` truncated at `r_max`.
///
/// Defaults: `r_min` 1.2616, `step` 1.05, `r_max = max(0.06 * min(w, h), 20)`.
pub fn default_radii(
    width: usize,
    height: usize,
    r_min: f64,
    step: f64,
    r_max_override: Option<f64>,
) -> Result<RadiusSchedule> {
    if !(step > 1.0) {
        return Err(Error::InvalidInput(format!("step must be > 1, got {step}")));
    }
    if !(r_min > 0.0) {
        return Err(Error::InvalidInput(format!(
            "r_min must be > 0, got {r_min}"
        )));
    }
    let r_max = r_max_override.unwrap_or_else(|| default_r_max(width, height));
    let mut radii = Vec::new();
    for j in 0.. {
        let r = r_min * step.powi(j);
        if r > r_max * (1.0 + 1e-12) {
            break;
        }
        radii.push(r);
    }
    if radii.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no radii: r_min {r_min} exceeds r_max {r_max}"
        )));
    }
    RadiusSchedule::from_radii(radii, SchedulePolicy::Geometric { r_min, step, r_max })
}
