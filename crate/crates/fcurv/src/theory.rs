//! Exact fractal curvatures from curvature scaling functions.
//!
//! For a self-similar set with similarity dimension `s` the k-th average
//! fractal total curvature equals
//! `X_k = (1/eta) * integral_0^1 eps^(s-k-1) R_k(eps) d eps`
//! with `eta = -sum r_i^s log r_i` and `R_k` the k-th curvature scaling
//! function, a piecewise polynomial for the sets treated here. The integral
//! is evaluated in closed form piece by piece.

use crate::error::{Error, Result};
use crate::ifs::SampleSetId;

/// A piecewise polynomial on `(0, 1]`: breakpoints `0 = b_0 < ... < b_M = 1`
/// and per-interval coefficient rows `[c0, c1, c2]` for `(b_{i-1}, b_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    breakpoints: Vec<f64>,
    pieces: Vec<[f64; 3]>,
}

impl PiecewisePoly {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<[f64; 3]>) -> Result<Self> {
        if breakpoints.len() != pieces.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints do not delimit {} pieces",
                breakpoints.len(),
                pieces.len()
            )));
        }
        if pieces.is_empty() {
            return Err(Error::InvalidInput("no pieces".into()));
        }
        if (breakpoints[0] - 0.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("domain must start at 0".into()));
        }
        if (breakpoints.last().unwrap() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("domain must end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(PiecewisePoly {
            breakpoints,
            pieces,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[[f64; 3]] {
        &self.pieces
    }

    /// Evaluates the polynomial at `eps` in `(0, 1]`.
    pub fn eval(&self, eps: f64) -> f64 {
        assert!(eps > 0.0 && eps <= 1.0 + 1e-12, "eps out of domain: {eps}");
        let mut idx = self.pieces.len() - 1;
        for (i, w) in self.breakpoints.windows(2).enumerate() {
            if eps <= w[1] {
                idx = i;
                break;
            }
        }
        let [c0, c1, c2] = self.pieces[idx];
        c0 + eps * (c1 + eps * c2)
    }

    /// Parses the CSV exchange format: one `b_lo,b_hi,c0,c1,c2` row per
    /// piece, `#` comments allowed, pieces in increasing order.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut breakpoints = Vec::new();
        let mut pieces = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Format {
                    what: "scaling-function CSV",
                    line: i + 1,
                    msg: format!("expected `b_lo,b_hi,c0,c1,c2`, got {line:?}"),
                });
            }
            let num = |s: &str| -> Result<f64> {
                s.parse().map_err(|e| Error::Format {
                    what: "scaling-function CSV",
                    line: i + 1,
                    msg: format!("{s:?}: {e}"),
                })
            };
            let lo = num(fields[0])?;
            let hi = num(fields[1])?;
            if breakpoints.is_empty() {
                breakpoints.push(lo);
            } else if (lo - *breakpoints.last().unwrap()).abs() > 1e-12 {
                return Err(Error::Format {
                    what: "scaling-function CSV",
                    line: i + 1,
                    msg: format!("piece starts at {lo}, previous ended at different point"),
                });
            }
            breakpoints.push(hi);
            pieces.push([num(fields[2])?, num(fields[3])?, num(fields[4])?]);
        }
        PiecewisePoly::new(breakpoints, pieces)
    }
}

/// `eta = -sum r_i^s log r_i`. Requires `sum r_i^s = 1` within 1e-9.
pub fn eta(ratios: &[f64], s: f64) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::InvalidInput("empty ratio list".into()));
    }
    let sum: f64 = ratios.iter().map(|r| r.powf(s)).sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "s = {s} does not solve the dimension equation: sum r_i^s = {sum}"
        )));
    }
    Ok(-ratios.iter().map(|r| r.powf(s) * r.ln()).sum::<f64>())
}

/// Evaluates `(1/eta) * integral_0^1 eps^(s-k-1) R_k(eps) d eps` in closed
/// form: each monomial contributes `c_j (b_hi^(s-k+j) - b_lo^(s-k+j))/(s-k+j)`
/// (or `c_j log(b_hi/b_lo)` when the exponent vanishes).
pub fn curvature_integral(rk: &PiecewisePoly, s: f64, k: u8, eta: f64) -> Result<f64> {
    if k > 2 {
        return Err(Error::InvalidInput(format!("k must be 0, 1 or 2, got {k}")));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidInput(format!("eta must be > 0, got {eta}")));
    }
    let mut total = 0.0;
    for (i, piece) in rk.pieces().iter().enumerate() {
        let lo = rk.breakpoints()[i];
        let hi = rk.breakpoints()[i + 1];
        for (j, &c) in piece.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let p = s - k as f64 + j as f64; // exponent after integration
            if p.abs() < 1e-12 {
                if lo <= 0.0 {
                    return Err(Error::Divergence(format!(
                        "logarithmic monomial of degree {j} reaches eps = 0"
                    )));
                }
                total += c * (hi / lo).ln();
            } else if p < 0.0 && lo <= 0.0 {
                return Err(Error::Divergence(format!(
                    "monomial degree {j} gives exponent {p} <= -1 at eps = 0"
                )));
            } else {
                let lo_pow = if lo <= 0.0 { 0.0 } else { lo.powf(p) };
                total += c * (hi.powf(p) - lo_pow) / p;
            }
        }
    }
    Ok(total / eta)
}

/// Exact curvature scaling functions for the self-similar triangle with side
/// lengths 0.6, 0.8 and hypotenuse 1, together with the similarity dimension
/// and ratios. Breakpoints are the similarity ratios and the in-circle radius
/// of the central gap, 4/41.
pub fn scaling_functions_triangle() -> (PiecewisePoly, PiecewisePoly, PiecewisePoly, f64, Vec<f64>)
{
    let r1 = 25.0 / 41.0;
    let r2 = 20.0 / 41.0;
    let r3 = 16.0 / 41.0;
    let omega = 4.0 / 41.0;
    let area = 0.24; // triangle area
    let per = 2.4; // triangle perimeter
    let pi = std::f64::consts::PI;
    let bps = vec![0.0, omega, r3, r2, r1, 1.0];

    let r0 = PiecewisePoly::new(
        bps.clone(),
        vec![
            [-3.0, 0.0, 0.0],
            [-2.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
        ],
    )
    .unwrap();

    let r1f = PiecewisePoly::new(
        bps.clone(),
        vec![
            [0.0, -(6.0 + 2.0 * pi), 0.0],
            [(1.0 - r1 - r2 - r3) * per / 2.0, -2.0 * pi, 0.0],
            [(1.0 - r1 - r2) * per / 2.0, -pi, 0.0],
            [(1.0 - r1) * per / 2.0, 0.0, 0.0],
            [per / 2.0, pi, 0.0],
        ],
    )
    .unwrap();

    let r2f = PiecewisePoly::new(
        bps,
        vec![
            [0.0, 0.0, -(6.0 + 2.0 * pi)],
            [
                (1.0 - r1 * r1 - r2 * r2 - r3 * r3) * area,
                (1.0 - r1 - r2 - r3) * per,
                -2.0 * pi,
            ],
            [(1.0 - r1 * r1 - r2 * r2) * area, (1.0 - r1 - r2) * per, -pi],
            [(1.0 - r1 * r1) * area, (1.0 - r1) * per, 0.0],
            [area, per, pi],
        ],
    )
    .unwrap();

    let ratios = vec![r1, r2, r3];
    let s = crate::ifs::similarity_dimension(&ratios).unwrap();
    (r0, r1f, r2f, s, ratios)
}

/// Exact fractal curvatures of a set, on the model scale where its reference
/// edge has length 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalCurvatures {
    pub s: f64,
    pub eta: f64,
    pub x: [f64; 3],
}

impl TheoreticalCurvatures {
    /// Specific curvatures `Xi_k = X_k / X_2`; defined when `X_2 > 0`.
    pub fn specific(&self) -> Option<[f64; 2]> {
        if self.x[2] > 0.0 {
            Some([self.x[0] / self.x[2], self.x[1] / self.x[2]])
        } else {
            None
        }
    }
}

/// Rescales a fractal curvature to a `lambda`-times larger copy of the set:
/// `C -> C * lambda^s` (the scaling exponents satisfy `s_k + k = s`).
pub fn rescale_curvature(c: f64, lambda: f64, s: f64) -> f64 {
    assert!(lambda > 0.0, "lambda must be positive");
    c * lambda.powf(s)
}

/// Sets with published exact fractal curvatures. The window and gate carpet
/// variants have published constants but no catalog IFS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceSet {
    SierpinskiGasket,
    SierpinskiCarpet,
    ModifiedCarpet,
    TriangleDelta,
    Window,
    Gate,
}

impl ReferenceSet {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceSet::SierpinskiGasket => "gasket",
            ReferenceSet::SierpinskiCarpet => "carpet",
            ReferenceSet::ModifiedCarpet => "modcarpet",
            ReferenceSet::TriangleDelta => "triangle",
            ReferenceSet::Window => "window",
            ReferenceSet::Gate => "gate",
        }
    }
}

impl TryFrom<SampleSetId> for ReferenceSet {
    type Error = Error;

    fn try_from(id: SampleSetId) -> Result<ReferenceSet> {
        match id {
            SampleSetId::SierpinskiGasket => Ok(ReferenceSet::SierpinskiGasket),
            SampleSetId::SierpinskiCarpet => Ok(ReferenceSet::SierpinskiCarpet),
            SampleSetId::ModifiedCarpet => Ok(ReferenceSet::ModifiedCarpet),
            SampleSetId::TriangleDelta => Ok(ReferenceSet::TriangleDelta),
            other => Err(Error::NotAvailable(format!("{:?}", other))),
        }
    }
}

/// Published exact fractal curvatures, on the scale where the reference edge
/// has length 1. The triangle is additionally recomputed live from its
/// scaling functions by [`curvature_integral`]; the others are fixtures.
pub fn reference_curvatures(set: ReferenceSet) -> Result<TheoreticalCurvatures> {
    let log = |a: f64, b: f64| a.ln() / b.ln();
    let fixture = |s: f64, ratios: &[f64], x: [f64; 3]| -> Result<TheoreticalCurvatures> {
        Ok(TheoreticalCurvatures {
            s,
            eta: eta(ratios, s)?,
            x,
        })
    };
    match set {
        ReferenceSet::SierpinskiGasket => {
            fixture(log(3.0, 2.0), &[0.5, 0.5, 0.5], [-0.042345, 0.37615, 1.81])
        }
        ReferenceSet::SierpinskiCarpet => {
            fixture(log(8.0, 3.0), &vec![1.0 / 3.0; 8], [-0.0162, 0.0725, 1.352])
        }
        ReferenceSet::ModifiedCarpet => {
            fixture(log(8.0, 3.0), &vec![1.0 / 3.0; 8], [-0.014, 0.0720, 1.344])
        }
        ReferenceSet::Window => fixture(
            log(40.0, 7.0),
            &vec![1.0 / 7.0; 40],
            [-0.0146171712902, 0.0652764265706, 1.251813666054],
        ),
        ReferenceSet::Gate => fixture(
            log(40.0, 7.0),
            &vec![1.0 / 7.0; 40],
            [-0.0163916537451, 0.0732007965716, 1.403780236274],
        ),
        ReferenceSet::TriangleDelta => {
            let (r0, r1, r2, s, ratios) = scaling_functions_triangle();
            let eta = eta(&ratios, s)?;
            Ok(TheoreticalCurvatures {
                s,
                eta,
                x: [
                    curvature_integral(&r0, s, 0, eta)?,
                    curvature_integral(&r1, s, 1, eta)?,
                    curvature_integral(&r2, s, 2, eta)?,
                ],
            })
        }
    }
}
