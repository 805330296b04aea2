//! Planar iterated function systems of contracting similarities: similarity
//! dimension, arithmetic classification, a catalog of sample sets, and
//! chaos-game rasterization.

use crate::error::{Error, Result};
use crate::raster::BinaryImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name of the RNG used by the chaos game, recorded in run metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

/// A contracting similarity of the plane:
/// `f(p) = ratio * R(rotation) * J * p + translation`,
/// where `J` reflects about the x-axis when `reflected` is set (the
/// reflection is applied before the rotation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub ratio: f64,
    pub rotation: f64,
    pub reflected: bool,
    pub translation: [f64; 2],
}

impl Similarity {
    pub fn new(ratio: f64, rotation: f64, reflected: bool, translation: [f64; 2]) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidInput(format!(
                "similarity ratio must lie in (0,1), got {ratio}"
            )));
        }
        Ok(Similarity {
            ratio,
            rotation,
            reflected,
            translation,
        })
    }

    /// 2x2 linear part of the map.
    pub fn linear(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.rotation.sin_cos();
        let j = if self.reflected { -1.0 } else { 1.0 };
        // R(theta) * diag(1, j) scaled by ratio
        [
            [self.ratio * c, self.ratio * -s * j],
            [self.ratio * s, self.ratio * c * j],
        ]
    }

    /// Applies the map to a point.
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let m = self.linear();
        [
            m[0][0] * p[0] + m[0][1] * p[1] + self.translation[0],
            m[1][0] * p[0] + m[1][1] * p[1] + self.translation[1],
        ]
    }

    /// The unique fixed point `f(p) = p`.
    pub fn fixed_point(&self) -> [f64; 2] {
        // solve (I - L) p = t
        let m = self.linear();
        let a = 1.0 - m[0][0];
        let b = -m[0][1];
        let c = -m[1][0];
        let d = 1.0 - m[1][1];
        let det = a * d - b * c;
        let t = self.translation;
        [(d * t[0] - b * t[1]) / det, (a * t[1] - c * t[0]) / det]
    }
}

/// An iterated function system of at least two contracting similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratedFunctionSystem {
    pub maps: Vec<Similarity>,
    pub name: Option<String>,
}

impl IteratedFunctionSystem {
    pub fn new(maps: Vec<Similarity>, name: Option<String>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "an IFS needs at least 2 maps, got {}",
                maps.len()
            )));
        }
        Ok(IteratedFunctionSystem { maps, name })
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    /// Similarity dimension of the attractor.
    pub fn dimension(&self) -> Result<f64> {
        similarity_dimension(&self.ratios())
    }
}

/// Arithmeticity of the ratio set: `Arithmetic(h)` when every `log r_i` is an
/// integer multiple of a common `h` (the greatest such value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithmeticClass {
    Arithmetic { h: f64 },
    NonArithmetic,
}

/// Solves `sum r_i^s = 1` for `s` by bisection on the strictly decreasing map
/// `s -> sum r_i^s`. A single-map input returns the boundary solution `s = 0`.
pub fn similarity_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::InvalidInput("empty ratio list".into()));
    }
    for &r in ratios {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidInput(format!(
                "ratio must lie in (0,1), got {r}"
            )));
        }
    }
    let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    if ratios.len() == 1 {
        return Ok(0.0);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InvalidInput("dimension root not bracketed".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * (1.0 + hi) {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    debug_assert!(f(s).abs() <= 1e-12);
    Ok(s)
}

/// Classifies the ratio set as `h`-arithmetic or non-arithmetic via a
/// Euclid-style real GCD of the values `-log r_i` with tolerance `tol`
/// (default 1e-9). The candidate falling below `1e-6 * max|log r_i|` decides
/// non-arithmetic; ties break toward non-arithmetic.
pub fn arithmetic_class(ratios: &[f64], tol: f64) -> Result<ArithmeticClass> {
    if ratios.is_empty() {
        return Err(Error::InvalidInput("empty ratio list".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be > 0, got {tol}")));
    }
    let mut logs: Vec<f64> = Vec::new();
    for &r in ratios {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidInput(format!(
                "ratio must lie in (0,1), got {r}"
            )));
        }
        logs.push(-r.ln());
    }
    let floor = 1e-6 * logs.iter().cloned().fold(0.0, f64::max);

    let mut g = logs[0];
    for &v in &logs[1..] {
        let (mut a, mut b) = (g.max(v), g.min(v));
        loop {
            // symmetric remainder keeps the iteration contracting
            let q = (a / b).round();
            let r = (a - q * b).abs();
            if r <= tol * a.max(1.0) {
                break;
            }
            a = b;
            b = r;
            if b < floor {
                return Ok(ArithmeticClass::NonArithmetic);
            }
        }
        g = b;
        if g < floor {
            return Ok(ArithmeticClass::NonArithmetic);
        }
    }
    // verify maximality: every log must be close to an integer multiple of g
    for &v in &logs {
        let k = (v / g).round();
        if (v - k * g).abs() > tol * v.max(1.0) || k < 1.0 {
            return Ok(ArithmeticClass::NonArithmetic);
        }
    }
    Ok(ArithmeticClass::Arithmetic { h: g })
}

/// The built-in sample sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleSetId {
    SierpinskiGasket,
    SierpinskiCarpet,
    SierpinskiTree,
    CantorDust,
    KochCurve,
    ModifiedCarpet,
    Tripet,
    TriangleDelta,
    ShearedGasket,
}

impl SampleSetId {
    pub const ALL: [SampleSetId; 9] = [
        SampleSetId::SierpinskiGasket,
        SampleSetId::SierpinskiCarpet,
        SampleSetId::SierpinskiTree,
        SampleSetId::CantorDust,
        SampleSetId::KochCurve,
        SampleSetId::ModifiedCarpet,
        SampleSetId::Tripet,
        SampleSetId::TriangleDelta,
        SampleSetId::ShearedGasket,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SampleSetId::SierpinskiGasket => "gasket",
            SampleSetId::SierpinskiCarpet => "carpet",
            SampleSetId::SierpinskiTree => "tree",
            SampleSetId::CantorDust => "dust",
            SampleSetId::KochCurve => "koch",
            SampleSetId::ModifiedCarpet => "modcarpet",
            SampleSetId::Tripet => "tripet",
            SampleSetId::TriangleDelta => "triangle",
            SampleSetId::ShearedGasket => "sheared-gasket",
        }
    }

    pub fn parse(s: &str) -> Option<SampleSetId> {
        SampleSetId::ALL.iter().copied().find(|id| id.name() == s)
    }
}

fn scaled(ratio: f64, tx: f64, ty: f64) -> Similarity {
    Similarity::new(ratio, 0.0, false, [tx, ty]).unwrap()
}

/// Returns the documented IFS for a sample set.
///
/// All catalog sets are normalized so that the reference edge used for
/// curvature rescaling has model length 1: the gasket/carpet base, the
/// triangle's hypotenuse, the unit square of the dust and tree.
pub fn catalog(id: SampleSetId) -> IteratedFunctionSystem {
    let maps = match id {
        // three half-size copies toward the vertices of an equilateral triangle
        SampleSetId::SierpinskiGasket => vec![
            scaled(0.5, 0.0, 0.0),
            scaled(0.5, 0.5, 0.0),
            scaled(0.5, 0.25, 0.25 * 3f64.sqrt()),
        ],
        // eight third-size copies, center cell empty
        SampleSetId::SierpinskiCarpet => {
            let mut v = Vec::new();
            for j in 0..3 {
                for i in 0..3 {
                    if (i, j) != (1, 1) {
                        v.push(scaled(1.0 / 3.0, i as f64 / 3.0, j as f64 / 3.0));
                    }
                }
            }
            v
        }
        // half-size copies: upper left rotated -pi/2, lower left unrotated,
        // lower right rotated +pi/2
        SampleSetId::SierpinskiTree => vec![
            Similarity::new(0.5, -std::f64::consts::FRAC_PI_2, false, [0.0, 1.0]).unwrap(),
            scaled(0.5, 0.0, 0.0),
            Similarity::new(0.5, std::f64::consts::FRAC_PI_2, false, [1.0, 0.0]).unwrap(),
        ],
        // four third-size copies in the corners of the unit square
        SampleSetId::CantorDust => vec![
            scaled(1.0 / 3.0, 0.0, 0.0),
            scaled(1.0 / 3.0, 2.0 / 3.0, 0.0),
            scaled(1.0 / 3.0, 0.0, 2.0 / 3.0),
            scaled(1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0),
        ],
        SampleSetId::KochCurve => {
            let th = std::f64::consts::FRAC_PI_3;
            vec![
                scaled(1.0 / 3.0, 0.0, 0.0),
                Similarity::new(1.0 / 3.0, th, false, [1.0 / 3.0, 0.0]).unwrap(),
                Similarity::new(1.0 / 3.0, -th, false, [0.5, 3f64.sqrt() / 6.0]).unwrap(),
                scaled(1.0 / 3.0, 2.0 / 3.0, 0.0),
            ]
        }
        // carpet variant with an occupied center cell (the top-middle cell is
        // empty instead) and two copies rotated by multiples of pi/4
        SampleSetId::ModifiedCarpet => {
            let r = 1.0 / 3.0;
            let pi = std::f64::consts::PI;
            let mut v = Vec::new();
            for (i, j) in [(0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (2, 2)] {
                v.push(scaled(r, i as f64 / 3.0, j as f64 / 3.0));
            }
            // center copy rotated a half turn, fixed cell [1/3,2/3]^2
            v.push(Similarity::new(r, pi, false, [2.0 / 3.0, 2.0 / 3.0]).unwrap());
            v
        }
        // eight third-size copies filling a staircase: full bottom and middle
        // rows plus the two left cells of the top row
        SampleSetId::Tripet => {
            let r = 1.0 / 3.0;
            let mut v = Vec::new();
            for (i, j) in [
                (0, 0),
                (1, 0),
                (2, 0),
                (0, 1),
                (1, 1),
                (2, 1),
                (0, 2),
                (1, 2),
            ] {
                v.push(scaled(r, i as f64 / 3.0, j as f64 / 3.0));
            }
            v
        }
        SampleSetId::TriangleDelta => triangle_delta_maps(),
        // gasket sheared onto the right triangle with legs 0.6 and 0.8
        SampleSetId::ShearedGasket => vec![
            scaled(0.5, 0.0, 0.0),
            scaled(0.5, 0.3, 0.0),
            scaled(0.5, 0.0, 0.4),
        ],
    };
    IteratedFunctionSystem {
        maps,
        name: Some(id.name().to_string()),
    }
}

/// The non-arithmetic self-similar right triangle with side lengths 0.6, 0.8
/// and hypotenuse 1, right angle at the origin, legs along the axes
/// (horizontal 0.6, vertical 0.8).
///
/// The two positively oriented copies (ratios 25/41 and 16/41) are pinned at
/// the ends of the horizontal leg; the reflected copy (ratio 20/41) is pinned
/// at the top vertex. The three copies and a central triangular gap congruent
/// to the reflected copy tile the filled triangle exactly.
fn triangle_delta_maps() -> Vec<Similarity> {
    let r1 = 25.0 / 41.0;
    let r2 = 20.0 / 41.0;
    let r3 = 16.0 / 41.0;
    // reflected linear part r2 * [[-0.8,-0.6],[-0.6,0.8]]
    // = r2 * R(atan2(-0.6,-0.8)) * diag(1,-1)
    let theta = (-0.6f64).atan2(-0.8);
    vec![
        Similarity::new(r1, 0.0, false, [0.6 * (1.0 - r1), 0.0]).unwrap(),
        Similarity::new(r2, theta, true, [9.6 / 41.0, 20.0 / 41.0]).unwrap(),
        Similarity::new(r3, 0.0, false, [0.0, 0.0]).unwrap(),
    ]
}

/// Plain-text IFS exchange format: one line per map,
/// `ratio rotation_deg reflect tx ty`, `#` comments allowed.
pub fn ifs_to_text(ifs: &IteratedFunctionSystem) -> String {
    let mut out = String::new();
    if let Some(name) = &ifs.name {
        out.push_str(&format!("# {name}\n"));
    }
    out.push_str("# ratio rotation_deg reflect tx ty\n");
    for m in &ifs.maps {
        out.push_str(&format!(
            "{:.12} {:.12} {} {:.12} {:.12}\n",
            m.ratio,
            m.rotation.to_degrees(),
            u8::from(m.reflected),
            m.translation[0],
            m.translation[1]
        ));
    }
    out
}

/// Parses the plain-text IFS format.
pub fn ifs_from_text(text: &str, name: Option<String>) -> Result<IteratedFunctionSystem> {
    let mut maps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Format {
                what: "IFS file",
                line: i + 1,
                msg: format!("expected 5 fields `ratio rotation_deg reflect tx ty`, got {line:?}"),
            });
        }
        let ferr = |msg: String| Error::Format {
            what: "IFS file",
            line: i + 1,
            msg,
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| ferr(format!("{s:?}: {e}")));
        let reflect = match fields[2] {
            "0" | "false" => false,
            "1" | "true" => true,
            other => return Err(ferr(format!("reflect must be 0/1, got {other:?}"))),
        };
        maps.push(Similarity::new(
            num(fields[0])?,
            num(fields[1])?.to_radians(),
            reflect,
            [num(fields[3])?, num(fields[4])?],
        )?);
    }
    IteratedFunctionSystem::new(maps, name)
}

/// Affine fit from model coordinates to pixel coordinates. Uniform scale, so
/// the rendered set is similar to the model set; `scale` is in pixels per
/// model unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelToPixel {
    pub scale: f64,
    pub offset: [f64; 2],
    pub height: usize,
}

impl ModelToPixel {
    /// Maps a model point to integer pixel coordinates (row 0 at the top).
    #[inline]
    pub fn pixel(&self, p: [f64; 2]) -> (i64, i64) {
        let px = (self.scale * (p[0] - self.offset[0])).floor() as i64;
        let py = (self.scale * (p[1] - self.offset[1])).floor() as i64;
        (px, self.height as i64 - 1 - py)
    }
}

/// A rasterized attractor together with its model-to-pixel transform.
pub struct Rasterized {
    pub image: BinaryImage,
    pub transform: ModelToPixel,
    pub plotted_points: u64,
}

const PROBE_ITERATES: usize = 10_000;
const BBOX_MARGIN_PIXELS: f64 = 1.0;

/// Default point budget: `50 (w h)^(s/2)` capped at 1e8.
pub fn default_n_points(width: usize, height: usize, s: f64) -> u64 {
    let n = 50.0 * ((width * height) as f64).powf(s / 2.0);
    n.min(1e8) as u64
}

fn select_map(cumulative: &[f64], u: f64) -> usize {
    match cumulative.binary_search_by(|p| p.partial_cmp(&u).unwrap()) {
        Ok(i) => i + 1,
        Err(i) => i,
    }
    .min(cumulative.len() - 1)
}

/// Rasterizes the attractor by the chaos game and returns the image together
/// with the model-to-pixel transform.
///
/// Maps are selected i.i.d. with probabilities `r_i^s`; the orbit starts at
/// the fixed point of map 0 (a point of the attractor, so every iterate lies
/// on it) and the first `burn_in` iterates are not plotted. The attractor's
/// bounding box, estimated from a probe orbit, is fitted to the image with a
/// one-pixel margin. Deterministic for a fixed seed.
pub fn rasterize(
    ifs: &IteratedFunctionSystem,
    width: usize,
    height: usize,
    seed: u64,
    burn_in: u64,
    n_points: u64,
) -> Result<Rasterized> {
    if width < 16 || height < 16 {
        return Err(Error::InvalidInput(format!(
            "image must be at least 16x16, got {width}x{height}"
        )));
    }
    if n_points < 1 {
        return Err(Error::InvalidInput("n_points must be >= 1".into()));
    }
    let s = ifs.dimension()?;
    let weights: Vec<f64> = ifs.maps.iter().map(|m| m.ratio.powf(s)).collect();
    let total: f64 = weights.iter().sum();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w / total;
        cumulative.push(acc);
    }

    // probe orbit for the bounding box; starts on the attractor
    let start = ifs.maps[0].fixed_point();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = start;
    let (mut min, mut max) = (start, start);
    for _ in 0..PROBE_ITERATES {
        let i = select_map(&cumulative, rng.gen::<f64>());
        p = ifs.maps[i].apply(p);
        for k in 0..2 {
            min[k] = min[k].min(p[k]);
            max[k] = max[k].max(p[k]);
        }
    }
    let bw = max[0] - min[0];
    let bh = max[1] - min[1];
    if bw.max(bh) < 1e-12 {
        return Err(Error::DegenerateGeometry(
            "attractor bounding box collapses to a point".into(),
        ));
    }
    // shrunk by a hair so the extreme probe points stay strictly inside the
    // margin after flooring
    let avail_w = width as f64 - 2.0 * BBOX_MARGIN_PIXELS - 1e-6;
    let avail_h = height as f64 - 2.0 * BBOX_MARGIN_PIXELS - 1e-6;
    let mut scale = f64::INFINITY;
    if bw > 1e-12 {
        scale = scale.min(avail_w / bw);
    }
    if bh > 1e-12 {
        scale = scale.min(avail_h / bh);
    }
    let transform = ModelToPixel {
        scale,
        offset: [
            min[0] - BBOX_MARGIN_PIXELS / scale,
            min[1] - BBOX_MARGIN_PIXELS / scale,
        ],
        height,
    };

    // main orbit, re-seeded so the run is independent of the probe length
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = start;
    let mut img = BinaryImage::new(width, height);
    let mut plotted = 0u64;
    for _ in 0..burn_in {
        let i = select_map(&cumulative, rng.gen::<f64>());
        p = ifs.maps[i].apply(p);
    }
    for _ in 0..n_points {
        let i = select_map(&cumulative, rng.gen::<f64>());
        p = ifs.maps[i].apply(p);
        let (px, py) = transform.pixel(p);
        if px >= 0 && py >= 0 && (px as usize) < width && (py as usize) < height {
            img.set(px as usize, py as usize, true);
            plotted += 1;
        }
    }
    Ok(Rasterized {
        image: img,
        transform,
        plotted_points: plotted,
    })
}

/// Chaos-game rasterization returning the image alone.
pub fn chaos_game(
    ifs: &IteratedFunctionSystem,
    width: usize,
    height: usize,
    seed: u64,
    burn_in: u64,
    n_points: u64,
) -> Result<BinaryImage> {
    rasterize(ifs, width, height, seed, burn_in, n_points).map(|r| r.image)
}
