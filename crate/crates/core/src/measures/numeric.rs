//! Quadrature paths for continuous laws.

use crate::distortion::Distortion;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Quad};

const TOL: f64 = 1e-9;
const DEPTH: u32 = 40;
/// Relative size below which a tail remainder is dropped.
const NEGLIGIBLE: f64 = 1e-15;
/// Smallest tail probability probed.
const S_FLOOR: f64 = 1e-300;
/// Decay exponents at or below 1 + this are treated as divergent.
const DECAY_SLACK: f64 = 1e-3;

/// ∫_a^b h over a finite range. Wide ranges of one sign are integrated in
/// t = ln|x|.
pub(crate) fn segment(h: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Quad {
    if !(b > a) {
        return Quad::ZERO;
    }
    if a < 0.0 && b > 0.0 {
        return segment(h, a, 0.0, 0.5 * tol) + segment(h, 0.0, b, 0.5 * tol);
    }
    if b <= 0.0 {
        return segment(&|y| h(-y), -b, -a, tol);
    }
    if a == 0.0 && b > 16.0 {
        return integrate(h, 0.0, 1.0, 0.5 * tol, DEPTH) + segment(h, 1.0, b, 0.5 * tol);
    }
    if a > 0.0 && b / a > 16.0 {
        return integrate(
            |t| {
                let x = t.exp();
                x * h(x)
            },
            a.ln(),
            b.ln(),
            tol,
            DEPTH,
        );
    }
    integrate(h, a, b, tol, DEPTH)
}

fn pieces(h: &dyn Fn(f64) -> f64, pts: &[f64]) -> Quad {
    let n = pts.len().saturating_sub(1).max(1) as f64;
    pts.windows(2).fold(Quad::ZERO, |acc, w| acc + segment(h, w[0], w[1], TOL / n))
}

/// ∫_from^∞ h for a decaying h. `at_tail(s)` is the point beyond which the
/// law has probability s. Cutoffs move out by factors of 1e12 in s; past the
/// last one the tail is taken as regularly varying with exponent estimated
/// from h(x) / h(2x).
fn right_tail(h: &dyn Fn(f64) -> f64, at_tail: &dyn Fn(f64) -> f64, from: f64, scale: f64) -> Result<Quad> {
    let mut q = Quad::ZERO;
    let mut x = from;
    let mut s = 1e-12;
    while s >= S_FLOOR {
        let xt = at_tail(s);
        s *= 1e-12;
        if !xt.is_finite() || xt > 1e250 {
            break;
        }
        if xt <= x {
            continue;
        }
        q = q + segment(h, x, xt, TOL);
        x = xt;
        if (h(x) * x).abs() <= NEGLIGIBLE * scale.abs().max(q.value.abs()).max(1.0) {
            break;
        }
    }
    let hx = h(x);
    if hx == 0.0 || x <= 0.0 {
        return Ok(q);
    }
    let h2 = h(2.0 * x);
    let k = (hx / h2).log2();
    if k <= 1.0 + DECAY_SLACK {
        return Err(Error::Divergence(format!(
            "integrand decays like x^-{k:.4} beyond x = {x:e}"
        )));
    }
    let corr = if k.is_finite() { hx * x / (k - 1.0) } else { 0.0 };
    Ok(q + Quad {
        value: corr,
        error: corr.abs(),
    })
}

/// x-coordinates where g∘S is not smooth.
fn breaks(g: &Distortion, d: &Distribution) -> Vec<f64> {
    let mut xs: Vec<f64> = g
        .nonsmooth_points()
        .into_iter()
        .filter(|&b| b > 0.0 && b < 1.0)
        .map(|b| d.quantile_at_survival(b))
        .filter(|x| x.is_finite())
        .collect();
    let (lo, hi) = d.support_endpoints();
    if lo < 0.0 && hi > 0.0 {
        xs.push(0.0);
    }
    xs.extend([lo, hi].into_iter().filter(|x| x.is_finite()));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// ∫_a^∞ g(S(x)) dx.
pub(crate) fn above(g: &Distortion, d: &Distribution, a: f64, scale: f64) -> Result<Quad> {
    let h = |x: f64| g.eval(d.survival(x));
    let (_, hi) = d.support_endpoints();
    let mut pts = vec![a];
    pts.extend(breaks(g, d).into_iter().filter(|&x| x > a));
    let body = pieces(&h, &pts);
    if hi.is_finite() {
        return Ok(body);
    }
    let last = *pts.last().unwrap();
    let tail = right_tail(&h, &|s| d.quantile_at_survival(s), last, scale + body.value)?;
    Ok(body + tail)
}

/// ∫_{−∞}^b (1 − g(S(x))) dx.
pub(crate) fn below(g: &Distortion, d: &Distribution, b: f64, scale: f64) -> Result<Quad> {
    let h = |x: f64| 1.0 - g.eval(d.survival(x));
    let (lo, _) = d.support_endpoints();
    let mut pts: Vec<f64> = breaks(g, d).into_iter().filter(|&x| x < b).collect();
    pts.push(b);
    let body = pieces(&h, &pts);
    if lo.is_finite() {
        return Ok(body);
    }
    let first = pts[0];
    let tail = right_tail(&|y| h(-y), &|p| -d.quantile_at_cdf(p), -first, scale + body.value)?;
    Ok(body + tail)
}

/// ∫_a^b (1 − g(S(x))) dx for finite a < b.
pub(crate) fn between_complement(g: &Distortion, d: &Distribution, a: f64, b: f64) -> Quad {
    let h = |x: f64| 1.0 - g.eval(d.survival(x));
    let mut pts = vec![a];
    pts.extend(breaks(g, d).into_iter().filter(|&x| x > a && x < b));
    pts.push(b);
    pieces(&h, &pts)
}

/// Survival form: c + ∫_c^∞ g(S) − ∫_{−∞}^c (1 − g(S)), anchored at the
/// lower endpoint when finite and at the median otherwise.
pub(crate) fn survival_form(g: &Distortion, d: &Distribution) -> Result<Quad> {
    let (lo, _) = d.support_endpoints();
    let c = if lo.is_finite() { lo } else { d.quantile_at_survival(0.5) };
    let up = above(g, d, c, c)?;
    let down = if lo.is_finite() { Quad::ZERO } else { below(g, d, c, c + up.value)? };
    Ok(Quad {
        value: c + up.value - down.value,
        error: up.error + down.error,
    })
}

/// ∫_0^∞ f(t) dt for f decaying at least exponentially, `t_max` being the
/// largest admissible argument. Past the last panel f is extrapolated as
/// f(T)·e^{−β(t−T)}.
fn exp_tail(f: &dyn Fn(f64) -> f64, t_max: f64) -> Result<Quad> {
    let mut q = Quad::ZERO;
    let (mut t1, mut t2) = (0.0_f64, 1.0_f64);
    loop {
        t2 = t2.min(t_max);
        q = q + integrate(f, t1, t2, TOL, DEPTH);
        let (fm, f2) = (f(0.5 * (t1 + t2)), f(t2));
        if fm == 0.0 && f2 == 0.0 {
            return Ok(q);
        }
        if !f2.is_finite() || !q.value.is_finite() {
            return Err(Error::Divergence("quantile integral is infinite".into()));
        }
        let beta = if fm != 0.0 && f2 != 0.0 && fm.signum() == f2.signum() {
            (fm.abs().ln() - f2.abs().ln()) / (0.5 * (t2 - t1))
        } else {
            f64::NAN
        };
        let rem = f2 / beta;
        let small = rem.abs() <= NEGLIGIBLE * q.value.abs().max(1.0);
        if beta > DECAY_SLACK && (small || t2 >= t_max) {
            return Ok(q + Quad {
                value: rem,
                error: rem.abs(),
            });
        }
        if t2 >= t_max {
            return Err(Error::Divergence(format!(
                "quantile integrand decays at rate {beta:.4} near the tail"
            )));
        }
        t1 = t2;
        t2 *= 2.0;
    }
}

/// ∫_0^1 VaR_{1−q}[X] w(q) dq, with `brk` the points in (0,1) where w is
/// not smooth.
pub(crate) fn quantile_weighted(d: &Distribution, w: &dyn Fn(f64) -> f64, brk: &[f64]) -> Result<Quad> {
    let mut bs: Vec<f64> = brk.iter().copied().filter(|&b| b > 0.0 && b < 1.0).collect();
    bs.sort_by(f64::total_cmp);
    bs.dedup();
    if bs.is_empty() {
        bs.push(0.5);
    }
    let (first, last) = (bs[0], bs[bs.len() - 1]);
    let head = exp_tail(
        &|t| {
            let q = first * (-t).exp();
            let wq = w(q);
            if wq == 0.0 {
                0.0
            } else {
                d.quantile_at_survival(q) * wq * q
            }
        },
        (first / S_FLOOR).ln(),
    )?;
    let n = bs.len().max(2) as f64;
    let mid = bs.windows(2).fold(Quad::ZERO, |acc, p| {
        acc + integrate(
            |q| {
                let wq = w(q);
                if wq == 0.0 {
                    0.0
                } else {
                    d.quantile_at_survival(q) * wq
                }
            },
            p[0],
            p[1],
            TOL / n,
            DEPTH,
        )
    });
    let tail = exp_tail(
        &|t| {
            let r = (1.0 - last) * (-t).exp();
            let wq = w(1.0 - r);
            if wq == 0.0 {
                0.0
            } else {
                d.quantile_at_cdf(r) * wq * r
            }
        },
        ((1.0 - last) / f64::EPSILON).ln(),
    )?;
    Ok(head + mid + tail)
}

/// Quantile form: ∫ VaR_{1−q} dg(q), jumps summed exactly.
pub(crate) fn quantile_form(g: &Distortion, d: &Distribution) -> Result<Quad> {
    let ac = quantile_weighted(d, &|q| g.density(q), &g.nonsmooth_points())?;
    let (lo, hi) = d.support_endpoints();
    let mut atoms = 0.0;
    for j in g.jumps() {
        let part = |mass: f64, x: f64| -> Result<f64> {
            if mass == 0.0 {
                Ok(0.0)
            } else if x.is_finite() {
                Ok(mass * x)
            } else {
                Err(Error::Divergence(format!("weight {mass} on an infinite quantile")))
            }
        };
        if j.at <= 0.0 {
            atoms += part(j.right, hi)?;
        } else if j.at >= 1.0 {
            atoms += part(j.left, lo)?;
        } else {
            atoms += part(j.left, d.quantile_upper_at_survival(j.at))?;
            atoms += part(j.right, d.quantile_at_survival(j.at))?;
        }
    }
    Ok(ac + Quad {
        value: atoms,
        error: 0.0,
    })
}
