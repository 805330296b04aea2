//! Minkowski functionals of binary images and per-radius functional profiles.
//!
//! The three planar functionals are measured per image: `C2` the area (pixel
//! count), `C1` half the boundary length, and `C0` the Euler number.
//! `C1` and `C0` come from the 16 possible 2x2 pixel configurations counted
//! over the image padded by one white ring (the image is treated as embedded
//! in an infinite white plane). Connected components use foreground
//! 8-connectivity, holes use background 4-connectivity; this complementary
//! pair makes the configuration-count Euler number agree with labeling on
//! every image.
//!
//! Boundary weights per configuration class (full perimeter, halved for `C1`):
//!
//! | class            | weight                      |
//! |------------------|-----------------------------|
//! | one black        | 1                           |
//! | two adjacent     | 1                           |
//! | two diagonal     | 2                           |
//! | three black      | (pi - 2*sqrt(2))/(4 - 2*sqrt(2)) |
//!
//! The first two make digitized axis-aligned rectangles exact
//! (`C1 = w + h`); the three-black weight is calibrated so the measured
//! perimeter of large digitized disks converges to `2 pi r`.

use crate::error::{Error, Result};
use crate::raster::{dilate, BinaryImage, DistanceField, RadiusSchedule};
use rayon::prelude::*;

/// Weight of the three-black 2x2 configuration in the perimeter estimate.
pub fn concave_corner_weight() -> f64 {
    (std::f64::consts::PI - 2.0 * std::f64::consts::SQRT_2) / (4.0 - 2.0 * std::f64::consts::SQRT_2)
}

/// Counts of the 2x2 pixel configuration classes over the padded image.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfigCounts {
    /// exactly one black pixel
    pub one: u64,
    /// two black pixels sharing an edge
    pub two_adjacent: u64,
    /// two black pixels sharing only a corner
    pub two_diagonal: u64,
    /// exactly three black pixels
    pub three: u64,
    /// all four black
    pub four: u64,
}

/// Tallies the 2x2 configurations of the image padded by one white ring.
pub fn config_counts(img: &BinaryImage) -> ConfigCounts {
    let w = img.width();
    let h = img.height();
    let mut c = ConfigCounts::default();
    let at = |x: isize, y: isize| -> bool {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            false
        } else {
            img.get(x as usize, y as usize)
        }
    };
    for wy in -1..h as isize {
        for wx in -1..w as isize {
            let a = at(wx, wy) as u8; // top-left
            let b = at(wx + 1, wy) as u8; // top-right
            let d = at(wx, wy + 1) as u8; // bottom-left
            let e = at(wx + 1, wy + 1) as u8; // bottom-right
            match a + b + d + e {
                0 => {}
                1 => c.one += 1,
                2 => {
                    if (a == 1 && e == 1) || (b == 1 && d == 1) {
                        c.two_diagonal += 1;
                    } else {
                        c.two_adjacent += 1;
                    }
                }
                3 => c.three += 1,
                _ => c.four += 1,
            }
        }
    }
    c
}

impl ConfigCounts {
    /// Half the boundary length `C1` under the calibrated weights.
    pub fn boundary_length(&self) -> f64 {
        let perimeter = self.one as f64
            + self.two_adjacent as f64
            + 2.0 * self.two_diagonal as f64
            + concave_corner_weight() * self.three as f64;
        perimeter / 2.0
    }

    /// Euler number `C0` under foreground-8 / background-4 connectivity.
    pub fn euler_number(&self) -> i64 {
        let v = self.one as i64 - self.three as i64 - 2 * self.two_diagonal as i64;
        debug_assert_eq!(v.rem_euclid(4), 0, "Euler count not divisible by 4");
        v.div_euclid(4)
    }
}

/// Foreground pixel count, the discrete area `C2`.
pub fn area(img: &BinaryImage) -> u64 {
    img.foreground_count()
}

/// Half the boundary length `C1`, from weighted 2x2 configuration counts.
pub fn boundary_length(img: &BinaryImage) -> f64 {
    config_counts(img).boundary_length()
}

/// Euler number `C0 = N - Q` under foreground-8 / background-4 connectivity.
pub fn euler_number(img: &BinaryImage) -> i64 {
    config_counts(img).euler_number()
}

/// Number of foreground components (8-connectivity) and holes (background
/// 4-connectivity with the image embedded in an infinite white plane).
pub fn components_and_holes(img: &BinaryImage) -> (u64, u64) {
    let w = img.width() as isize;
    let h = img.height() as isize;
    let idx = |x: isize, y: isize| (y * w + x) as usize;
    let mut seen = vec![false; (w * h) as usize];
    let mut stack = Vec::new();

    // foreground components, 8-connected
    let mut n = 0u64;
    for y in 0..h {
        for x in 0..w {
            if !img.get(x as usize, y as usize) || seen[idx(x, y)] {
                continue;
            }
            n += 1;
            seen[idx(x, y)] = true;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (cx + dx, cy + dy);
                        if nx >= 0
                            && ny >= 0
                            && nx < w
                            && ny < h
                            && img.get(nx as usize, ny as usize)
                            && !seen[idx(nx, ny)]
                        {
                            seen[idx(nx, ny)] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        }
    }

    // background components, 4-connected, on the one-ring padded grid
    let pw = w + 2;
    let ph = h + 2;
    let pidx = |x: isize, y: isize| (y * pw + x) as usize;
    let is_bg = |x: isize, y: isize| -> bool {
        let (ix, iy) = (x - 1, y - 1);
        if ix < 0 || iy < 0 || ix >= w || iy >= h {
            true
        } else {
            !img.get(ix as usize, iy as usize)
        }
    };
    let mut bseen = vec![false; (pw * ph) as usize];
    let mut bg_components = 0u64;
    for y in 0..ph {
        for x in 0..pw {
            if !is_bg(x, y) || bseen[pidx(x, y)] {
                continue;
            }
            bg_components += 1;
            bseen[pidx(x, y)] = true;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let (nx, ny) = (cx + dx, cy + dy);
                    if nx >= 0
                        && ny >= 0
                        && nx < pw
                        && ny < ph
                        && is_bg(nx, ny)
                        && !bseen[pidx(nx, ny)]
                    {
                        bseen[pidx(nx, ny)] = true;
                        stack.push((nx, ny));
                    }
                }
            }
        }
    }
    (n, bg_components.saturating_sub(1))
}

/// `C0^var` proxy `N + Q`, components plus holes.
pub fn c0_var_estimate(img: &BinaryImage) -> u64 {
    let (n, q) = components_and_holes(img);
    n + q
}

/// One measured dilation radius.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    /// dilation radius in pixel widths
    pub r: f64,
    /// `x = -log r`
    pub x: f64,
    /// area of the dilated image
    pub c2: u64,
    /// half boundary length
    pub c1: f64,
    /// Euler number
    pub c0: i64,
    pub n_components: u64,
    pub n_holes: u64,
    /// `N + Q`
    pub c0var: u64,
    /// `y_k = log(C_k^var / r^k)`; `None` where the measured value is <= 0
    pub y2: Option<f64>,
    pub y1: Option<f64>,
    pub y0: Option<f64>,
}

impl FunctionalSample {
    /// Measures all functionals of `img` at radius `r`.
    pub fn measure(img: &BinaryImage, r: f64) -> Self {
        let x = -r.ln();
        let c2 = area(img);
        let cfg = config_counts(img);
        let c1 = cfg.boundary_length();
        let c0 = cfg.euler_number();
        let (n, q) = components_and_holes(img);
        let c0var = n + q;
        let logpos = |v: f64, k: f64| {
            if v > 0.0 {
                Some(v.ln() + k * x)
            } else {
                None
            }
        };
        FunctionalSample {
            r,
            x,
            c2,
            c1,
            c0,
            n_components: n,
            n_holes: q,
            c0var,
            y2: logpos(c2 as f64, 2.0),
            y1: logpos(c1, 1.0),
            y0: logpos(c0var as f64, 0.0),
        }
    }
}

/// Per-radius functional samples, ordered by increasing radius.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalProfile {
    pub samples: Vec<FunctionalSample>,
    /// true when the `N + Q <= 2` break condition cut the schedule short
    pub truncated_by_break: bool,
    /// true when some sample reached `N + Q <= 2`
    pub break_condition_met: bool,
}

/// Dilates the field at every radius of the schedule and measures one
/// `FunctionalSample` each. With `brk` set, measurement stops at the first
/// sample with `N + Q <= 2` (that sample is retained).
///
/// Radii are processed in parallel chunks; the result is identical to the
/// sequential scan.
pub fn measure_profile(
    field: &DistanceField,
    schedule: &RadiusSchedule,
    brk: bool,
) -> Result<FunctionalProfile> {
    if schedule.is_empty() {
        return Err(Error::InvalidInput("empty radius schedule".into()));
    }
    let chunk = rayon::current_num_threads().max(1) * 2;
    let mut samples: Vec<FunctionalSample> = Vec::with_capacity(schedule.len());
    let mut truncated = false;
    let mut met = false;
    for radii in schedule.radii.chunks(chunk) {
        let measured: Vec<Result<FunctionalSample>> = radii
            .par_iter()
            .map(|&r| {
                let img = dilate(field, r)?;
                Ok(FunctionalSample::measure(&img, r))
            })
            .collect();
        for m in measured {
            let sample = m?;
            let hit = sample.n_components + sample.n_holes <= 2;
            samples.push(sample);
            if hit {
                met = true;
                if brk {
                    truncated = true;
                    break;
                }
            }
        }
        if truncated {
            break;
        }
    }
    Ok(FunctionalProfile {
        samples,
        truncated_by_break: truncated,
        break_condition_met: met,
    })
}

fn fmt_sig(v: f64) -> String {
    format!("{:.11e}", v)
}

/// Profile CSV header; the contract between the measure and estimate stages.
pub const PROFILE_CSV_HEADER: &str = "r,x,c2,c1,c0,N,Q,c0var,y2,y1,y0";

/// Serializes the profile as CSV with 12 significant digits and empty cells
/// for undefined `y_k`.
pub fn profile_to_csv(profile: &FunctionalProfile) -> String {
    let mut out = String::from(PROFILE_CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    for s in &profile.samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_sig(s.r),
            fmt_sig(s.x),
            s.c2,
            fmt_sig(s.c1),
            s.c0,
            s.n_components,
            s.n_holes,
            s.c0var,
            opt(s.y2),
            opt(s.y1),
            opt(s.y0),
        ));
    }
    out
}

/// Parses a profile CSV produced by [`profile_to_csv`].
pub fn profile_from_csv(text: &str) -> Result<FunctionalProfile> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Format {
        what: "profile CSV",
        line: 1,
        msg: "empty file".into(),
    })?;
    if header.trim() != PROFILE_CSV_HEADER {
        return Err(Error::Format {
            what: "profile CSV",
            line: 1,
            msg: format!("unexpected header {header:?}"),
        });
    }
    let mut samples = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Format {
                what: "profile CSV",
                line: i + 1,
                msg: format!("expected 11 fields, got {}", fields.len()),
            });
        }
        let ferr = |msg: String| Error::Format {
            what: "profile CSV",
            line: i + 1,
            msg,
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| ferr(format!("{s:?}: {e}")));
        let int = |s: &str| s.parse::<i64>().map_err(|e| ferr(format!("{s:?}: {e}")));
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        samples.push(FunctionalSample {
            r: num(fields[0])?,
            x: num(fields[1])?,
            c2: int(fields[2])? as u64,
            c1: num(fields[3])?,
            c0: int(fields[4])?,
            n_components: int(fields[5])? as u64,
            n_holes: int(fields[6])? as u64,
            c0var: int(fields[7])? as u64,
            y2: opt(fields[8])?,
            y1: opt(fields[9])?,
            y0: opt(fields[10])?,
        });
    }
    if samples.is_empty() {
        return Err(Error::Format {
            what: "profile CSV",
            line: 1,
            msg: "no samples".into(),
        });
    }
    let met = samples.iter().any(|s| s.n_components + s.n_holes <= 2);
    let truncated = samples
        .last()
        .map(|s| s.n_components + s.n_holes <= 2)
        .unwrap_or(false);
    Ok(FunctionalProfile {
        samples,
        truncated_by_break: truncated,
        break_condition_met: met,
    })
}
