//! VaR ratios of sums of risks, R(p) = VaR_p[ΣX_i] / Σ VaR_p[X_i], and
//! their limits as p → 1.

mod joint;

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

pub use joint::{Dependence, JointModel, McConfig, StepMap, SumLaw, CHUNK};

use crate::distributions::{Distribution, Family};
use crate::error::{Error, Result};
use crate::format::num;
use crate::measures::Method;

/// 97.5% standard normal quantile.
const Z95: f64 = 1.959963984540054;

/// How the numerator of a ratio was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointMethod {
    Exact,
    ClosedForm,
    MonteCarlo { samples: usize, seed: u64 },
}

impl PointMethod {
    pub fn name(&self) -> &'static str {
        match self {
            PointMethod::Exact => "exact",
            PointMethod::ClosedForm => "closed_form",
            PointMethod::MonteCarlo { .. } => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    pub p: f64,
    pub ratio: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// Halfwidth of a 95% order-statistic interval, on the ratio scale.
    pub ci_halfwidth: f64,
    pub method: PointMethod,
    /// Set when fewer than 100 samples are expected beyond the quantile.
    pub low_confidence: bool,
}

/// Theoretical limit of R(p) as p → 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prediction {
    Point { value: f64 },
    Band { lo: f64, hi: f64 },
    /// Bounded marginals: the limit, if any, is at most 1.
    AtMostOne,
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Point { value } => f.write_str(&num(*value)),
            Prediction::Band { lo, hi } => write!(f, "[{};{}]", num(*lo), num(*hi)),
            Prediction::AtMostOne => f.write_str("<=1"),
        }
    }
}

/// VaR_p of X + Y for independent Uniform(0,1) risks:
/// √(2p) on (0, ½] and 2 − √(2(1−p)) on [½, 1].
pub fn uniform_sum_closed_form(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("level {p} outside (0,1]")));
    }
    Ok(if p <= 0.5 { (2.0 * p).sqrt() } else { 2.0 - (2.0 * (1.0 - p)).sqrt() })
}

fn standard_uniform_pair(j: &JointModel) -> Option<(f64, f64)> {
    if !matches!(j.dependence(), Dependence::Independent) || j.k() != 2 {
        return None;
    }
    match (j.marginals()[0].family()?, j.marginals()[1].family()?) {
        (Family::Uniform { a, b }, Family::Uniform { a: a2, b: b2 }) if a == a2 && b == b2 => Some((a, b)),
        _ => None,
    }
}

/// The k-th smallest (1-based) of `xs`, reordering `xs`.
fn order_stat(xs: &mut [f64], k: usize) -> f64 {
    *xs.select_nth_unstable_by(k - 1, f64::total_cmp).1
}

fn var_ratio_at(j: &JointModel, p: f64, mc: Option<McConfig>, point: u64) -> Result<RatioPoint> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("ratio level {p} outside (0,1)")));
    }
    let mut den = 0.0;
    for m in j.marginals() {
        den += m.quantile_lower(p)?;
    }
    let exact = |num: f64, method: PointMethod| RatioPoint {
        p,
        ratio: num / den,
        numerator: num,
        denominator: den,
        ci_halfwidth: 0.0,
        method,
        low_confidence: false,
    };
    let point = if matches!(j.dependence(), Dependence::Comonotone) {
        exact(den, PointMethod::Exact)
    } else if let (Some((a, b)), None) = (standard_uniform_pair(j), mc) {
        exact(2.0 * a + (b - a) * uniform_sum_closed_form(p)?, PointMethod::ClosedForm)
    } else if let Ok(s) = j.sum_distribution(None) {
        let how = if s.method == Method::ClosedForm {
            PointMethod::ClosedForm
        } else {
            PointMethod::Exact
        };
        exact(s.distribution.quantile_lower(p)?, how)
    } else {
        let Some(cfg) = mc else {
            return Err(Error::Unsupported("this ratio needs Monte Carlo settings".into()));
        };
        if cfg.samples == 0 {
            return Err(Error::domain("Monte Carlo needs at least one sample"));
        }
        let mut xs = j.simulate(cfg, point, |x| x.iter().sum::<f64>());
        let n = xs.len();
        let nf = n as f64;
        let k = ((nf * p).ceil() as usize).clamp(1, n);
        let sd = (nf * p * (1.0 - p)).sqrt();
        let lo = ((nf * p - Z95 * sd).floor() as usize).clamp(1, k);
        let hi = ((nf * p + Z95 * sd).ceil() as usize).clamp(k, n);
        let num = order_stat(&mut xs, k);
        let x_lo = if lo < k { order_stat(&mut xs[..k - 1], lo) } else { num };
        let x_hi = if hi > k { order_stat(&mut xs[k..], hi - k) } else { num };
        RatioPoint {
            p,
            ratio: num / den,
            numerator: num,
            denominator: den,
            ci_halfwidth: (x_hi - num).max(num - x_lo) / den.abs(),
            method: PointMethod::MonteCarlo {
                samples: cfg.samples,
                seed: cfg.seed,
            },
            low_confidence: nf * (1.0 - p) < 100.0,
        }
    };
    if den == 0.0 {
        return Err(Error::ZeroDenominator {
            numerator: point.numerator,
        });
    }
    Ok(point)
}

/// R(p) = VaR_p[ΣX_i] / Σ VaR_p[X_i]. Marginal VaRs are analytic; only the
/// numerator is simulated when no exact law of the sum is available.
pub fn var_ratio(j: &JointModel, p: f64, mc: Option<McConfig>) -> Result<RatioPoint> {
    var_ratio_at(j, p, mc, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioScan {
    pub points: Vec<RatioPoint>,
    pub predicted_limit: Option<Prediction>,
    /// Ratio at the last grid point.
    pub last_ratio: f64,
    /// Largest finite ratio over the grid.
    pub max_ratio: f64,
}

impl RatioScan {
    pub fn p_grid(&self) -> Vec<f64> {
        self.points.iter().map(|r| r.p).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|r| r.ratio).collect()
    }

    pub fn to_csv(&self) -> String {
        let limit = self.predicted_limit.map(|l| l.to_string()).unwrap_or_default();
        let mut out = String::from("p,ratio,ci_halfwidth,method,predicted_limit\n");
        for r in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                num(r.p),
                num(r.ratio),
                num(r.ci_halfwidth),
                r.method.name(),
                limit
            ));
        }
        out
    }
}

/// Grid of `points` levels with 1 − p geometric between 1 − p_start and
/// 1 − p_end.
pub fn scan_grid(p_start: f64, p_end: f64, points: usize) -> Result<Vec<f64>> {
    if !(0.0 < p_start && p_start < p_end && p_end < 1.0) {
        return Err(Error::domain(format!("scan needs 0 < p_start < p_end < 1, got {p_start}, {p_end}")));
    }
    if points < 2 {
        return Err(Error::domain("scan needs at least two points"));
    }
    let (a, b) = ((1.0 - p_start).ln(), (1.0 - p_end).ln());
    let mut grid: Vec<f64> = (0..points)
        .map(|i| 1.0 - (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect();
    grid[0] = p_start;
    grid[points - 1] = p_end;
    Ok(grid)
}

/// R(p) over a grid geometric in 1 − p. A zero denominator is recorded as
/// an infinite ratio (NaN when the numerator is zero too).
pub fn ratio_scan(j: &JointModel, p_start: f64, p_end: f64, points: usize, mc: Option<McConfig>) -> Result<RatioScan> {
    let grid = scan_grid(p_start, p_end, points)?;
    let pts: Vec<RatioPoint> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &p)| match var_ratio_at(j, p, mc, i as u64) {
            Err(Error::ZeroDenominator { numerator }) => Ok(RatioPoint {
                p,
                ratio: if numerator == 0.0 { f64::NAN } else { f64::INFINITY * numerator.signum() },
                numerator,
                denominator: 0.0,
                ci_halfwidth: 0.0,
                method: PointMethod::Exact,
                low_confidence: false,
            }),
            other => other,
        })
        .collect::<Result<_>>()?;
    let last_ratio = pts.last().map(|r| r.ratio).unwrap_or(f64::NAN);
    let max_ratio = pts
        .iter()
        .map(|r| r.ratio)
        .filter(|r| r.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioScan {
        points: pts,
        predicted_limit: limit_predictor(j),
        last_ratio,
        max_ratio,
    })
}

/// Limit of R(p) as p → 1 where theory gives one: comonotone sums have
/// ratio 1, bounded marginals a limit at most 1, and k independent
/// Pareto(α) risks the limit k^{1/α − 1}.
pub fn limit_predictor(j: &JointModel) -> Option<Prediction> {
    if matches!(j.dependence(), Dependence::Comonotone) {
        return Some(Prediction::Point { value: 1.0 });
    }
    if j.marginals().iter().all(|m| m.support_endpoints().1.is_finite()) {
        return Some(Prediction::AtMostOne);
    }
    if matches!(j.dependence(), Dependence::Independent) {
        let first = j.marginals()[0].family()?;
        if let Family::Pareto { alpha, .. } = first {
            if j.marginals().iter().all(|m| m.family() == Some(first)) {
                let k = j.k() as f64;
                return Some(Prediction::Point {
                    value: k.powf(1.0 / alpha - 1.0),
                });
            }
        }
    }
    None
}

/// Limit band for k risks with extended regularly varying tails of indices
/// −α ≥ −β: [k^{1/β−1}, k^{1/α−1}], collapsing to 1 when α = β = 1.
pub fn erv_band(alpha: f64, beta: f64, k: usize) -> Result<Prediction> {
    if !(alpha > 0.0 && beta >= alpha) || k == 0 {
        return Err(Error::domain(format!("ERV band needs 0 < alpha <= beta and k >= 1, got {alpha}, {beta}, {k}")));
    }
    if alpha == 1.0 && beta == 1.0 {
        return Ok(Prediction::Point { value: 1.0 });
    }
    let k = k as f64;
    let (a, b) = (k.powf(1.0 / beta - 1.0), k.powf(1.0 / alpha - 1.0));
    Ok(Prediction::Band { lo: a.min(b), hi: a.max(b) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "<1")]
    Below,
    #[serde(rename = "=1")]
    Equal,
    #[serde(rename = ">1")]
    Above,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Below => "<1",
            Verdict::Equal => "=1",
            Verdict::Above => ">1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailConstantLimit {
    /// (Σ c_i)^{1/α}
    pub lhs: f64,
    /// Σ c_i^{1/α}
    pub rhs: f64,
    pub limit: f64,
    pub verdict: Verdict,
}

/// Limit of R(p) for risks with P(X_i > x) ~ c_i·P(X_1 > x) regularly
/// varying of index −α: (Σc_i)^{1/α} / Σc_i^{1/α}.
pub fn theorem43_limit(c: &[f64], alpha: f64) -> Result<TailConstantLimit> {
    if c.first() != Some(&1.0) || c.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::domain("tail constants need c_1 = 1 and c_i > 0"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("tail index {alpha} must be positive")));
    }
    let lhs = c.iter().sum::<f64>().powf(1.0 / alpha);
    let rhs: f64 = c.iter().map(|x| x.powf(1.0 / alpha)).sum();
    let limit = lhs / rhs;
    let verdict = if (limit - 1.0).abs() <= 1e-12 {
        Verdict::Equal
    } else if limit < 1.0 {
        Verdict::Below
    } else {
        Verdict::Above
    };
    Ok(TailConstantLimit { lhs, rhs, limit, verdict })
}

/// Maximum domain of attraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class")]
pub enum MdaClass {
    Frechet { alpha: f64 },
    /// Finite right endpoint; `alpha` is known for the uniform law.
    Weibull { alpha: Option<f64> },
    Gumbel,
}

pub fn mda_class(d: &Distribution) -> MdaClass {
    match d.family() {
        Some(Family::Pareto { alpha, .. }) => MdaClass::Frechet { alpha },
        Some(Family::Uniform { .. }) => MdaClass::Weibull { alpha: Some(1.0) },
        Some(Family::Exponential { .. } | Family::Lognormal { .. } | Family::Normal { .. }) => MdaClass::Gumbel,
        Some(Family::Bernoulli { .. }) | None => MdaClass::Weibull { alpha: None },
    }
}
