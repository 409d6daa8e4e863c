use std::fmt;

use serde::Serialize;

use super::Distortion;
use crate::error::{Error, Result};

/// Second differences within this band count as zero.
pub const CURVATURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Concave,
    Convex,
    Linear,
}

impl Curvature {
    pub(crate) fn flip(self) -> Curvature {
        match self {
            Curvature::Concave => Curvature::Convex,
            Curvature::Convex => Curvature::Concave,
            Curvature::Linear => Curvature::Linear,
        }
    }
}

/// A maximal interval of constant curvature sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub curvature: Curvature,
}

/// Grid-based classification of a distortion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "shape", content = "segments", rename_all = "lowercase")]
pub enum ShapeReport {
    Linear,
    Concave,
    Convex,
    Neither,
    Piecewise(Vec<Segment>),
}

impl ShapeReport {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeReport::Linear => "linear",
            ShapeReport::Concave => "concave",
            ShapeReport::Convex => "convex",
            ShapeReport::Neither => "neither",
            ShapeReport::Piecewise(_) => "piecewise",
        }
    }

    pub fn is_concave(&self) -> bool {
        matches!(self, ShapeReport::Concave | ShapeReport::Linear)
    }

    pub fn is_convex(&self) -> bool {
        matches!(self, ShapeReport::Convex | ShapeReport::Linear)
    }
}

impl fmt::Display for ShapeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeReport::Piecewise(segs) => {
                let parts: Vec<String> = segs
                    .iter()
                    .map(|s| format!("{:?} on [{:.6}, {:.6}]", s.curvature, s.lo, s.hi).to_lowercase())
                    .collect();
                write!(f, "piecewise: {}", parts.join(", "))
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Classify g by the sign of its second differences on a uniform grid of
/// `grid` cells.
///
/// Differences touching u = 0 are ignored for concavity and those touching
/// u = 1 for convexity, since a concave distortion may jump at 0 and a
/// convex one at 1.
pub fn classify_shape(g: &Distortion, grid: usize) -> Result<ShapeReport> {
    if grid < 16 {
        return Err(Error::domain(format!("grid size {grid} below 16")));
    }
    let n = grid;
    let vals: Vec<f64> = (0..=n).map(|i| g.eval(i as f64 / n as f64)).collect();
    // d[i-1] is the second difference centred at u_i, i = 1..n-1
    let d: Vec<f64> = vals.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    let last = d.len() - 1;
    let concave = d.iter().skip(1).all(|&x| x <= CURVATURE_TOL);
    let convex = d[..last].iter().all(|&x| x >= -CURVATURE_TOL);
    match (concave, convex) {
        (true, true) => return Ok(ShapeReport::Linear),
        (true, false) => return Ok(ShapeReport::Concave),
        (false, true) => return Ok(ShapeReport::Convex),
        _ => {}
    }

    let mut signs: Vec<i8> = d
        .iter()
        .map(|&x| {
            if x > CURVATURE_TOL {
                1
            } else if x < -CURVATURE_TOL {
                -1
            } else {
                0
            }
        })
        .collect();
    if signs[0] < 0 {
        signs[0] = 0;
    }
    if signs[last] > 0 {
        signs[last] = 0;
    }

    // runs of equal nonzero sign: (sign, first index, last index)
    let mut runs: Vec<(i8, usize, usize)> = Vec::new();
    for (i, &s) in signs.iter().enumerate() {
        if s == 0 {
            continue;
        }
        match runs.last_mut() {
            Some(r) if r.0 == s => r.2 = i,
            _ => runs.push((s, i, i)),
        }
    }
    let min_len = (n / 100).max(3);
    if runs.len() < 2 || runs.iter().any(|r| r.2 - r.1 + 1 < min_len) {
        return Ok(ShapeReport::Neither);
    }
    let u = |i: usize| (i + 1) as f64 / n as f64;
    let mut segs = Vec::with_capacity(runs.len());
    for (k, r) in runs.iter().enumerate() {
        let lo = if k == 0 { 0.0 } else { 0.5 * (u(runs[k - 1].2) + u(r.1)) };
        let hi = if k + 1 == runs.len() { 1.0 } else { 0.5 * (u(r.2) + u(runs[k + 1].1)) };
        segs.push(Segment {
            lo,
            hi,
            curvature: if r.0 < 0 { Curvature::Concave } else { Curvature::Convex },
        });
    }
    Ok(ShapeReport::Piecewise(segs))
}
