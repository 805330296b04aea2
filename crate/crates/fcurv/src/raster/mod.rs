//! Binary image storage, PBM I/O, exact Euclidean distance transform,
//! parallel-set dilation and dilation-radius schedules.

mod edt;
mod pbm;
mod radii;

pub use edt::distance_transform;
pub use pbm::{load_pbm, load_pbm_bytes, save_pbm, save_pbm_ascii};
pub use radii::{
    default_r_max, default_radii, discrete_disk_area, optimal_area_radii, quick_radii,
    RadiusSchedule, SchedulePolicy, DEFAULT_R_MIN, DEFAULT_STEP,
};

use crate::error::{Error, Result};

/// A binary image on the pixel grid, stored as a row-major bit set.
/// Foreground (black, PBM value 1) pixels are the set being analysed.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    words: Vec<u64>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let words_per_row = (width + 63) / 64;
        BinaryImage {
            width,
            height,
            words: vec![0; words_per_row * height],
        }
    }

    #[inline]
    fn words_per_row(&self) -> usize {
        (self.width + 63) / 64
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < self.width && y < self.height);
        let w = self.words[y * self.words_per_row() + x / 64];
        (w >> (x % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        debug_assert!(x < self.width && y < self.height);
        let idx = y * self.words_per_row() + x / 64;
        let bit = 1u64 << (x % 64);
        if value {
            self.words[idx] |= bit;
        } else {
            self.words[idx] &= !bit;
        }
    }

    /// Number of foreground pixels (the discrete area `C2`).
    pub fn foreground_count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Coordinates of all foreground pixels in row-major order.
    pub fn foreground_pixels(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.foreground_count() as usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.push((x as u32, y as u32));
                }
            }
        }
        out
    }

    /// Builds an image from a row of `0`/`1` slices, for tests and tools.
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let height = rows.len();
        let width = rows[0].len();
        let mut img = BinaryImage::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), width, "ragged rows");
            for (x, &v) in row.iter().enumerate() {
                if v != 0 {
                    img.set(x, y, true);
                }
            }
        }
        img
    }
}

impl std::fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BinaryImage({}x{}, {} foreground)",
            self.width,
            self.height,
            self.foreground_count()
        )
    }
}

/// Per-pixel exact squared Euclidean distance (in pixel widths) to the
/// nearest foreground pixel, measured center to center.
#[derive(Clone)]
pub struct DistanceField {
    width: usize,
    height: usize,
    d2: Vec<u64>,
}

impl DistanceField {
    pub(crate) fn from_raw(width: usize, height: usize, d2: Vec<u64>) -> Self {
        debug_assert_eq!(d2.len(), width * height);
        DistanceField { width, height, d2 }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Squared distance at pixel `(x, y)`.
    #[inline]
    pub fn d2(&self, x: usize, y: usize) -> u64 {
        self.d2[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.d2
    }
}

/// Thresholds the distance field: pixel is foreground iff `d2 <= floor(r^2 + 1e-9)`.
/// The comparison is pure integer arithmetic, so dilation is reproducible and
/// monotone in `r`.
pub fn dilate(field: &DistanceField, r: f64) -> Result<BinaryImage> {
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "dilation radius must be >= 0, got {r}"
        )));
    }
    let threshold = (r * r + 1e-9).floor() as u64;
    let mut img = BinaryImage::new(field.width, field.height);
    for y in 0..field.height {
        for x in 0..field.width {
            if field.d2[y * field.width + x] <= threshold {
                img.set(x, y, true);
            }
        }
    }
    Ok(img)
}
