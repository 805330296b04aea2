//! Exact squared Euclidean distance transform.
//!
//! Two-pass dimensional reduction (Meijster, Roerdink, Hesselink): a row scan
//! produces per-row distances to the nearest foreground pixel, then a column
//! scan minimizes `(y - u)^2 + g(u)^2` over each column with the
//! lower-envelope recurrence. All arithmetic is on integers, so the result is
//! exact, not a chamfer approximation.

use super::{BinaryImage, DistanceField};
use crate::error::{Error, Result};

/// Computes the exact squared Euclidean distance to the nearest foreground
/// pixel, center to center, for every pixel in the image.
pub fn distance_transform(img: &BinaryImage) -> Result<DistanceField> {
    if img.foreground_count() == 0 {
        return Err(Error::EmptyForeground);
    }
    let w = img.width();
    let h = img.height();
    // Larger than any possible row distance; g^2 must not overflow when
    // combined with column offsets, hence i64 throughout.
    let inf = (w + h) as i64;

    // Phase 1: per-row horizontal distances g(x, y).
    let mut g = vec![0i64; w * h];
    for y in 0..h {
        let row = y * w;
        g[row] = if img.get(0, y) { 0 } else { inf };
        for x in 1..w {
            g[row + x] = if img.get(x, y) {
                0
            } else {
                g[row + x - 1].saturating_add(1).min(inf)
            };
        }
        for x in (0..w - 1).rev() {
            if g[row + x + 1] < g[row + x] {
                g[row + x] = g[row + x + 1] + 1;
            }
        }
    }

    // Phase 2: per-column lower envelope of parabolas u -> (y-u)^2 + g(x,u)^2.
    let mut d2 = vec![0u64; w * h];
    let mut s = vec![0usize; h]; // parabola sites
    let mut t = vec![0i64; h]; // start of each parabola's dominance interval
    let f = |x: usize, u: usize, g: &[i64]| -> i64 {
        let gv = g[u * w + x];
        gv * gv
    };
    // First y-coordinate where the parabola at `u` beats the one at `i`.
    let sep = |x: usize, i: usize, u: usize, g: &[i64]| -> i64 {
        let (i, u) = (i as i64, u as i64);
        let fi = f(x, i as usize, g);
        let fu = f(x, u as usize, g);
        (u * u - i * i + fu - fi).div_euclid(2 * (u - i))
    };
    for x in 0..w {
        let mut q: isize = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..h {
            while q >= 0 {
                let tq = t[q as usize];
                let sq = s[q as usize];
                let dy = tq - sq as i64;
                let dy_u = tq - u as i64;
                if dy * dy + f(x, sq, &g) > dy_u * dy_u + f(x, u, &g) {
                    q -= 1;
                } else {
                    break;
                }
            }
            if q < 0 {
                q = 0;
                s[0] = u;
                t[0] = 0;
            } else {
                let wsep = sep(x, s[q as usize], u, &g) + 1;
                if wsep < h as i64 {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = wsep;
                }
            }
        }
        for y in (0..h).rev() {
            while q > 0 && t[q as usize] > y as i64 {
                q -= 1;
            }
            let su = s[q as usize];
            let dy = y as i64 - su as i64;
            d2[y * w + x] = (dy * dy + f(x, su, &g)) as u64;
        }
    }

    Ok(DistanceField::from_raw(w, h, d2))
}
