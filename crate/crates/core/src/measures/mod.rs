//! Distortion risk measures of a single loss distribution.

mod numeric;
mod tail;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::distortion::{Distortion, SpectralWeight};
use crate::distributions::{fsum, Discrete, Distribution, Family};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::special::{normal_cdf, normal_pdf};

pub use tail::{tail_choquet, tail_subadditivity_check, TailCheck, TailVerdict};

/// How a reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactStieltjes,
    Quadrature,
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub value: f64,
    pub method: Method,
    pub abs_error_estimate: f64,
    pub distortion: String,
    pub distribution: String,
}

impl MeasureReport {
    fn new(value: f64, method: Method, err: f64, distortion: impl Into<String>, d: &Distribution) -> Self {
        MeasureReport {
            value,
            method,
            abs_error_estimate: if method == Method::ExactStieltjes { 0.0 } else { err.abs() },
            distortion: distortion.into(),
            distribution: d.label(),
        }
    }
}

/// ∫_a^b g(S(x)) dx for a discrete law, a ≤ b, exact.
fn step_integral(g: &Distortion, d: &Discrete, a: f64, b: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let xs = d.atoms();
    let ts = d.tails();
    let n = xs.len();
    let mut terms = Vec::with_capacity(n + 1);
    // S = 1 below the first atom
    terms.push((xs[0].min(b) - a).max(0.0));
    for i in 0..n - 1 {
        let lo = xs[i].max(a);
        let hi = xs[i + 1].min(b);
        if hi > lo {
            terms.push((hi - lo) * g.eval(ts[i]));
        }
    }
    fsum(terms)
}

fn discrete_choquet(g: &Distortion, d: &Discrete) -> f64 {
    let xs = d.atoms();
    xs[0] + step_integral(g, d, xs[0], xs[xs.len() - 1])
}

/// Σ x_i·dg over the level cells of a discrete law. A jump of g at a
/// level S_i sends its left part to x_{i+1} and its right part to x_i.
fn discrete_quantile_form(g: &Distortion, d: &Discrete) -> f64 {
    let xs = d.atoms();
    let ts = d.tails();
    let n = xs.len();
    let level = |i: isize| if i < 0 { 1.0 } else { ts[i as usize] };
    let mut terms = Vec::with_capacity(3 * n);
    for i in 0..n {
        let hi = level(i as isize - 1);
        let lo = ts[i];
        terms.push(xs[i] * (g.eval_left(hi) - g.eval_right(lo)));
    }
    for i in -1..n as isize {
        let q = level(i);
        let v = g.eval(q);
        let left = v - g.eval_left(q);
        let right = g.eval_right(q) - v;
        if left != 0.0 {
            terms.push(left * xs[((i + 1) as usize).min(n - 1)]);
        }
        if right != 0.0 {
            terms.push(right * xs[i.max(0) as usize]);
        }
    }
    fsum(terms)
}

/// ρ_g[X] = ∫_0^∞ g(S(x)) dx + ∫_{−∞}^0 (g(S(x)) − 1) dx.
///
/// Finite-support laws are summed exactly over the atoms; continuous laws
/// are integrated with breakpoints at the preimages of g's jumps and kinks.
///
/// ```
/// use drisk::distortion::parse_distortion;
/// use drisk::distributions::Distribution;
/// use drisk::measures::choquet;
///
/// let g = parse_distortion("tvar:0.95").unwrap();
/// let r = choquet(&g, &Distribution::uniform(0.0, 1.0).unwrap()).unwrap();
/// assert!((r.value - 0.975).abs() < 1e-9);
/// ```
pub fn choquet(g: &Distortion, d: &Distribution) -> Result<MeasureReport> {
    if let Some(dd) = d.as_discrete() {
        return Ok(MeasureReport::new(discrete_choquet(g, &dd), Method::ExactStieltjes, 0.0, g.label(), d));
    }
    let q = numeric::survival_form(g, d)?;
    Ok(MeasureReport::new(q.value, Method::Quadrature, q.error, g.label(), d))
}

/// ρ_g[X] = ∫_{[0,1]} VaR_{1−q}[X] dg(q). Jumps of g contribute quantile
/// values times jump heights; the density part is integrated numerically.
pub fn choquet_quantile_form(g: &Distortion, d: &Distribution) -> Result<MeasureReport> {
    if let Some(dd) = d.as_discrete() {
        return Ok(MeasureReport::new(
            discrete_quantile_form(g, &dd),
            Method::ExactStieltjes,
            0.0,
            g.label(),
            d,
        ));
    }
    let q = numeric::quantile_form(g, d)?;
    Ok(MeasureReport::new(q.value, Method::Quadrature, q.error, g.label(), d))
}

/// Lower p-quantile, p in (0, 1].
pub fn var(d: &Distribution, p: f64) -> Result<f64> {
    d.quantile_lower(p)
}

/// Upper p-quantile, p in [0, 1).
pub fn var_plus(d: &Distribution, p: f64) -> Result<f64> {
    d.quantile_upper(p)
}

fn esssup(d: &Distribution) -> Result<f64> {
    let hi = d.support_endpoints().1;
    if hi.is_finite() {
        Ok(hi)
    } else {
        Err(Error::Divergence(format!("{} has no finite essential supremum", d.label())))
    }
}

fn tvar_closed_form(f: Family, p: f64) -> Result<Option<f64>> {
    let d = Distribution::Parametric(f);
    let q = d.quantile_at_survival(1.0 - p);
    Ok(match f {
        Family::Uniform { b, .. } => Some(0.5 * (q + b)),
        Family::Exponential { rate } => Some(q + 1.0 / rate),
        Family::Pareto { alpha, .. } => {
            if alpha <= 1.0 {
                return Err(Error::Divergence(format!("Pareto tail with alpha = {alpha} has infinite mean")));
            }
            Some(alpha * q / (alpha - 1.0))
        }
        Family::Normal { mu, sigma } => {
            let z = (q - mu) / sigma;
            Some(mu + sigma * normal_pdf(z) / (1.0 - p))
        }
        Family::Lognormal { mu, sigma } => {
            let z = (q.ln() - mu) / sigma;
            Some((mu + 0.5 * sigma * sigma).exp() * normal_cdf(sigma - z) / (1.0 - p))
        }
        Family::Bernoulli { .. } => None,
    })
}

fn tvar_with_method(d: &Distribution, p: f64) -> Result<(f64, Method)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("tvar level {p} outside [0,1]")));
    }
    if p == 1.0 {
        return Ok((esssup(d)?, Method::ClosedForm));
    }
    if p == 0.0 {
        return d.mean().map(|m| (m, Method::ClosedForm)).map_err(|e| match e {
            Error::Unsupported(m) => Error::Divergence(m),
            other => other,
        });
    }
    if let Some(f) = d.family() {
        if let Some(v) = tvar_closed_form(f, p)? {
            return Ok((v, Method::ClosedForm));
        }
    }
    let r = choquet(&Distortion::tvar(p)?, d)?;
    if let Some(dd) = d.as_discrete() {
        debug_assert!((discrete_tvar_eq21(&dd, p) - r.value).abs() <= 1e-10 * r.value.abs().max(1.0));
    }
    Ok((r.value, r.method))
}

/// TVaR_p[X] = (1/(1−p)) ∫_p^1 VaR_u du, p in [0, 1]. TVaR_0 is the mean and
/// TVaR_1 the essential supremum.
pub fn tvar(d: &Distribution, p: f64) -> Result<f64> {
    tvar_with_method(d, p).map(|r| r.0)
}

pub fn tvar_report(d: &Distribution, p: f64) -> Result<MeasureReport> {
    let (v, m) = tvar_with_method(d, p)?;
    Ok(MeasureReport::new(v, m, 0.0, format!("tvar:{p}"), d))
}

fn discrete_tvar_eq21(d: &Discrete, p: f64) -> f64 {
    let v = d.at_survival(1.0 - p);
    let excess = fsum(d.pairs().filter(|a| a.0 > v).map(|(x, q)| (x - v) * q));
    v + excess / (1.0 - p)
}

/// TVaR_p = VaR_p + E[(X − VaR_p)+] / (1 − p), for finite-support laws,
/// p in (0, 1).
pub fn tvar_eq21(d: &Distribution, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("tvar level {p} outside (0,1)")));
    }
    let dd = d
        .as_discrete()
        .ok_or_else(|| Error::Unsupported(format!("excess-mean form needs a finite-support law, got {}", d.label())))?;
    Ok(discrete_tvar_eq21(&dd, p))
}

/// CTE_p[X] = E[X | X > VaR_p[X]], p in (0, 1).
pub fn cte(d: &Distribution, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("cte level {p} outside (0,1)")));
    }
    let v = d.quantile_lower(p)?;
    if let Some(dd) = d.as_discrete() {
        let mass = fsum(dd.pairs().filter(|a| a.0 > v).map(|a| a.1));
        if mass <= 0.0 {
            return Err(Error::domain(format!("P(X > VaR_{p}) = 0 for {}", d.label())));
        }
        return Ok(fsum(dd.pairs().filter(|a| a.0 > v).map(|(x, q)| x * q)) / mass);
    }
    tvar(d, p)
}

/// ∫_0^1 VaR_w φ(w) dw plus the atoms of φ at their quantile levels.
pub fn spectral(phi: &SpectralWeight, d: &Distribution) -> Result<MeasureReport> {
    let q_at = |w: f64| -> Result<f64> {
        let x = if w <= 0.0 {
            d.support_endpoints().0
        } else {
            d.quantile_lower(w.min(1.0))?
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Divergence(format!("spectral atom at {w} meets an infinite quantile")))
        }
    };
    let mut atoms = Vec::new();
    for &(w, m) in phi.atoms() {
        if m > 0.0 {
            atoms.push(m * q_at(w)?);
        }
    }
    let atoms = fsum(atoms);
    if let Some(dd) = d.as_discrete() {
        // VaR_w = x_i for w in (F_{i−1}, F_i]
        let mut prev = 0.0;
        let mut terms = Vec::new();
        for (i, (x, _)) in dd.pairs().enumerate() {
            let f = 1.0 - dd.tails()[i];
            let c = phi.continuous_cumulative(f);
            terms.push(x * (c - prev));
            prev = c;
        }
        let method = if phi.continuous_cumulative(1.0) == 0.0 {
            Method::ExactStieltjes
        } else {
            Method::Quadrature
        };
        return Ok(MeasureReport::new(fsum(terms) + atoms, method, 1e-12, phi.label(), d));
    }
    let brk: Vec<f64> = phi.breaks().iter().map(|b| 1.0 - b).collect();
    let q = numeric::quantile_weighted(d, &|q| phi.density(1.0 - q), &brk)?;
    Ok(MeasureReport::new(q.value + atoms, Method::Quadrature, q.error, phi.label(), d))
}

type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A probability measure μ on [0,1] used to mix TVaR levels: point masses
/// plus an optional density.
#[derive(Clone)]
pub struct TvarMixing {
    pub atoms: Vec<(f64, f64)>,
    pub density: Option<Density>,
    breaks: Vec<f64>,
}

impl fmt::Debug for TvarMixing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TvarMixing")
            .field("atoms", &self.atoms.len())
            .field("density", &self.density.is_some())
            .finish()
    }
}

impl TvarMixing {
    /// `breaks` are the interior points where the density is not smooth.
    pub fn new(atoms: Vec<(f64, f64)>, density: Option<Density>, breaks: &[f64]) -> Result<Self> {
        if atoms.iter().any(|&(w, m)| !(0.0..=1.0).contains(&w) || !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::domain("mixing atoms need levels in [0,1] and nonnegative mass"));
        }
        let mut breaks: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0 && *b < 1.0).collect();
        breaks.sort_by(f64::total_cmp);
        let mu = TvarMixing { atoms, density, breaks };
        let mass = mu.mass();
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::domain(format!("mixing measure has mass {mass}, not 1")));
        }
        Ok(mu)
    }

    pub fn point_mass(w: f64) -> Result<Self> {
        Self::new(vec![(w, 1.0)], None, &[])
    }

    fn pts(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        pts.extend(&self.breaks);
        pts.push(1.0);
        pts
    }

    pub fn mass(&self) -> f64 {
        let dens = match &self.density {
            Some(f) => self.pts().windows(2).map(|w| integrate(|x| f(x), w[0], w[1], 1e-13, 40).value).sum(),
            None => 0.0,
        };
        fsum(self.atoms.iter().map(|a| a.1)) + dens
    }
}

/// ∫_0^1 TVaR_w[X] dμ(w).
pub fn weighted_tvar(mu: &TvarMixing, d: &Distribution) -> Result<MeasureReport> {
    let mut terms = Vec::with_capacity(mu.atoms.len());
    let mut method = if d.as_discrete().is_some() {
        Method::ExactStieltjes
    } else {
        Method::ClosedForm
    };
    let discrete = d.as_discrete();
    for &(w, m) in &mu.atoms {
        if m == 0.0 {
            continue;
        }
        let t = match &discrete {
            Some(dd) if w > 0.0 && w < 1.0 => discrete_tvar_eq21(dd, w),
            _ => {
                let (t, how) = tvar_with_method(d, w)?;
                if how == Method::Quadrature {
                    method = Method::Quadrature;
                }
                t
            }
        };
        terms.push(m * t);
    }
    let mut err = 0.0;
    if let Some(f) = &mu.density {
        method = Method::Quadrature;
        let failure = std::cell::RefCell::new(None);
        let pts = mu.pts();
        let n = (pts.len() - 1) as f64;
        for w in pts.windows(2) {
            let q = integrate(
                |x| {
                    let fx = f(x);
                    if fx == 0.0 {
                        return 0.0;
                    }
                    match tvar(d, x) {
                        Ok(t) => fx * t,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    }
                },
                w[0],
                w[1],
                1e-9 / n,
                40,
            );
            terms.push(q.value);
            err += q.error;
        }
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
    }
    Ok(MeasureReport::new(fsum(terms), method, err, "weighted_tvar", d))
}

const DECOMPOSE_GRID: usize = 10_000;
/// Relative size of a cell-average increment treated as rounding noise.
const DECOMPOSE_NOISE: f64 = 1e-9;

/// The mixing measure μ with ρ_g = ∫ TVaR_w dμ(w) for concave g.
///
/// With φ(q) = g′(1−q), ν is dφ plus an atom φ(0) = g′(1) at 0, and
/// dμ(w) = (1−w) dν(w). φ is replaced by its cell averages on a grid of
/// 10⁴ cells, so μ is atomic; a jump of g at 0 adds an atom g(0+) at w = 1.
pub fn decompose_concave(g: &Distortion) -> Result<TvarMixing> {
    let n = DECOMPOSE_GRID;
    let nf = n as f64;
    // phi[i] averages φ over the cell [i/n, (i+1)/n]
    let phi: Vec<f64> = (0..n)
        .map(|i| {
            let hi_u = 1.0 - i as f64 / nf;
            let lo_u = 1.0 - (i + 1) as f64 / nf;
            let top = if i == 0 { g.eval_left(1.0) } else { g.eval(hi_u) };
            let bottom = if i + 1 == n { g.eval_right(0.0) } else { g.eval(lo_u) };
            nf * (top - bottom)
        })
        .collect();
    if g.eval_left(1.0) < 1.0 - 1e-12 {
        return Err(Error::domain(format!("{} jumps at 1 and is not concave", g.label())));
    }
    for i in 1..n {
        if phi[i] < phi[i - 1] - 1e-5 * phi[i - 1].abs().max(1.0) {
            return Err(Error::domain(format!(
                "{} is not concave near u = {:.6}",
                g.label(),
                1.0 - i as f64 / nf
            )));
        }
    }
    // cell averages carry rounding noise; increments below it are dropped and
    // the atom at 0 absorbs the difference
    let mut atoms = vec![(0.0, 0.0)];
    for i in 1..n {
        let q = i as f64 / nf;
        let step = phi[i] - phi[i - 1];
        if step > DECOMPOSE_NOISE * phi[i - 1].abs().max(1.0) {
            atoms.push((q, (1.0 - q) * step));
        }
    }
    let top = g.at_zero_plus();
    if top > 0.0 {
        atoms.push((1.0, top));
    }
    let rest = fsum(atoms.iter().map(|a| a.1));
    atoms[0].1 = (1.0 - rest).max(0.0);
    atoms.retain(|a| a.1 > 0.0);
    TvarMixing::new(atoms, None, &[])
}

/// GlueVaR: w1·TVaR_β + w2·TVaR_α + w3·VaR_β + w4·VaR_α.
pub fn glue_var(w: [f64; 4], alpha: f64, beta: f64, d: &Distribution) -> Result<MeasureReport> {
    if w.iter().any(|x| !(*x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("GlueVaR weights {w:?} must be nonnegative and sum to 1")));
    }
    if !(alpha > 0.0 && alpha <= beta && beta <= 1.0) {
        return Err(Error::domain(format!("GlueVaR levels need 0 < alpha <= beta <= 1, got {alpha}, {beta}")));
    }
    let mut terms = Vec::with_capacity(4);
    let mut quad = false;
    for (i, &wi) in w.iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        let level = if i % 2 == 0 { beta } else { alpha };
        let x = if i < 2 {
            let (t, m) = tvar_with_method(d, level)?;
            quad |= m == Method::Quadrature;
            t
        } else {
            d.quantile_lower(level)?
        };
        terms.push(wi * x);
    }
    let method = if quad {
        Method::Quadrature
    } else if d.as_discrete().is_some() {
        Method::ExactStieltjes
    } else {
        Method::ClosedForm
    };
    let value = fsum(terms);
    Ok(MeasureReport::new(
        value,
        method,
        0.0,
        format!("gluevar:{},{},{},{};{alpha},{beta}", w[0], w[1], w[2], w[3]),
        d,
    ))
}

#[cfg(test)]
mod tests;
