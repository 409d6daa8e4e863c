use serde::Serialize;

use super::{numeric, step_integral};
use crate::asymptotics::{JointModel, McConfig};
use crate::distortion::Distortion;
use crate::distributions::Distribution;
use crate::error::{Error, Result};

/// Slack allowed in lhs ≤ rhs.
pub const TAIL_TOL: f64 = 1e-9;

/// ∫_{0∧m}^0 (g(S(z)) − 1) dz + ∫_{0∨m}^∞ g(S(z)) dz.
pub fn tail_choquet(g: &Distortion, d: &Distribution, m_alpha: f64) -> Result<f64> {
    if !m_alpha.is_finite() {
        return Err(Error::domain("tail cutoff must be finite"));
    }
    if let Some(dd) = d.as_discrete() {
        let xn = *dd.atoms().last().unwrap();
        let top = xn.max(0.0).max(m_alpha);
        return Ok(step_integral(g, &dd, m_alpha, top) + m_alpha.min(0.0));
    }
    if m_alpha >= 0.0 {
        return Ok(numeric::above(g, d, m_alpha, m_alpha)?.value);
    }
    let up = numeric::above(g, d, 0.0, 0.0)?;
    let down = numeric::between_complement(g, d, m_alpha, 0.0);
    Ok(up.value - down.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailVerdict {
    Holds,
    Fails,
    /// P(X > s_α(X), Y > s_α(Y), X+Y > s_α(X+Y)) = 0.
    Inapplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCheck {
    pub verdict: TailVerdict,
    /// Tail integral of X + Y.
    pub lhs: f64,
    /// Sum of the tail integrals of X and Y.
    pub rhs: f64,
    pub m_alpha: f64,
    /// s_α of X, Y and X + Y.
    pub s_alpha: [f64; 3],
    /// Probability of the common tail region.
    pub tail_probability: f64,
}

/// Compare the tail integrals of X + Y and of X, Y above the common cutoff
/// m_α = max{s_α(X), s_α(Y), s_α(X+Y)}, s_α being the lower α-quantile.
pub fn tail_subadditivity_check(
    g: &Distortion,
    joint: &JointModel,
    alpha: f64,
    mc: Option<McConfig>,
) -> Result<TailCheck> {
    if joint.k() != 2 {
        return Err(Error::domain(format!("tail check needs two risks, got {}", joint.k())));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha {alpha} outside (0,1)")));
    }
    let x = &joint.marginals()[0];
    let y = &joint.marginals()[1];
    let sum = joint.sum_distribution(mc)?.distribution;
    let s = [x.quantile_lower(alpha)?, y.quantile_lower(alpha)?, sum.quantile_lower(alpha)?];
    let m = s[0].max(s[1]).max(s[2]);
    let inside = |r: &[f64]| r[0] > s[0] && r[1] > s[1] && r[0] + r[1] > s[2];
    let tail_probability = match joint.joint_pmf() {
        Some(pmf) => pmf.iter().filter(|t| inside(&t.0)).map(|t| t.1).sum(),
        None => {
            let cfg = mc.ok_or_else(|| Error::Unsupported("tail region needs Monte Carlo settings".into()))?;
            let hits = joint.simulate(cfg, 0, |r| inside(r) as u32);
            hits.iter().map(|&h| h as f64).sum::<f64>() / cfg.samples as f64
        }
    };
    let lhs = tail_choquet(g, &sum, m)?;
    let rhs = tail_choquet(g, x, m)? + tail_choquet(g, y, m)?;
    let verdict = if tail_probability <= 0.0 {
        TailVerdict::Inapplicable
    } else if lhs <= rhs + TAIL_TOL {
        TailVerdict::Holds
    } else {
        TailVerdict::Fails
    };
    Ok(TailCheck {
        verdict,
        lhs,
        rhs,
        m_alpha: m,
        s_alpha: s,
        tail_probability,
    })
}
