//! Distortion functions g: [0,1] → [0,1] as composable values.
//!
//! Every distortion carries an explicit list of jumps, each split into the
//! part taken from the left (g(u) − g(u−)) and from the right
//! (g(u+) − g(u)), so Stieltjes sums against dg are exact for indicator-type
//! distortions.

mod parse;
mod shape;
mod spectral;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use parse::parse_distortion;
pub use shape::{classify_shape, Curvature, Segment, ShapeReport};
pub use spectral::SpectralWeight;

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, integrate_pieces};
use crate::special::{inc_beta, ln_beta, normal_cdf, normal_quantile};

/// Arguments within this distance of a jump location are evaluated at it.
pub const JUMP_TOL: f64 = 1e-12;

const GRID: usize = 10_000;

/// A discontinuity of g at `at`, with g(at) = `value`,
/// g(at−) = value − left and g(at+) = value + right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub at: f64,
    pub value: f64,
    pub left: f64,
    pub right: f64,
}

impl Jump {
    pub fn height(&self) -> f64 {
        self.left + self.right
    }
}

/// Known shape of a distortion, recorded at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeHint {
    Linear,
    Concave,
    Convex,
    Neither,
    Piecewise(Vec<Segment>),
}

impl ShapeHint {
    fn flip(&self) -> ShapeHint {
        match self {
            ShapeHint::Concave => ShapeHint::Convex,
            ShapeHint::Convex => ShapeHint::Concave,
            ShapeHint::Piecewise(segs) => ShapeHint::Piecewise(
                segs.iter()
                    .rev()
                    .map(|s| Segment {
                        lo: 1.0 - s.hi,
                        hi: 1.0 - s.lo,
                        curvature: s.curvature.flip(),
                    })
                    .collect(),
            ),
            other => other.clone(),
        }
    }
}

/// Which argument of the copula is fixed at v.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// u ↦ C(u, v)/v
    First,
    /// u ↦ C(v, u)/v
    Second,
}

type Map = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Node {
    Identity,
    /// 1{u > a}
    Var { a: f64 },
    Tvar { p: f64 },
    Beta { a: f64, b: f64, lnb: f64 },
    Power { a: f64 },
    DualPower { b: f64 },
    Wang { shift: f64 },
    Lookback { p: f64 },
    Glue { h1: f64, h2: f64, a1: f64, a2: f64 },
    Dual(Distortion),
    Compose(Distortion, Distortion),
    Mix(Vec<(f64, Distortion)>),
    Spectral(SpectralWeight),
    Copula { c: Copula, v: f64, side: Side },
    Custom { f: Map, d: Option<Map> },
}

#[derive(Clone)]
struct Inner {
    node: Node,
    jumps: Vec<Jump>,
    kinks: Vec<f64>,
    hint: Option<ShapeHint>,
    label: String,
}

/// A distortion function.
#[derive(Clone)]
pub struct Distortion {
    inner: Arc<Inner>,
}

impl fmt::Debug for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Distortion({})", self.inner.label)
    }
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.inner.label)
    }
}

fn check_prob(name: &str, x: f64, lo_open: bool, hi_open: bool) -> Result<()> {
    let lo_ok = if lo_open { x > 0.0 } else { x >= 0.0 };
    let hi_ok = if hi_open { x < 1.0 } else { x <= 1.0 };
    if lo_ok && hi_ok {
        Ok(())
    } else {
        let l = if lo_open { '(' } else { '[' };
        let r = if hi_open { ')' } else { ']' };
        Err(Error::domain(format!("{name} parameter {x} outside {l}0,1{r}")))
    }
}

fn check_pos(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} parameter {x} must be positive")))
    }
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.retain(|x| x.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= JUMP_TOL);
    v
}

impl Distortion {
    fn build(node: Node, jumps: Vec<Jump>, kinks: Vec<f64>, hint: Option<ShapeHint>, label: String) -> Result<Self> {
        let mut jumps: Vec<Jump> = jumps.into_iter().filter(|j| j.height() > 1e-15).collect();
        jumps.sort_by(|a, b| a.at.total_cmp(&b.at));
        let jump_at: Vec<f64> = jumps.iter().map(|j| j.at).collect();
        let kinks: Vec<f64> = dedup_sorted(kinks)
            .into_iter()
            .filter(|&k| k > 0.0 && k < 1.0 && !jump_at.iter().any(|a| (a - k).abs() <= JUMP_TOL))
            .collect();
        let d = Distortion {
            inner: Arc::new(Inner {
                node,
                jumps,
                kinks,
                hint,
                label,
            }),
        };
        d.check_monotone()?;
        Ok(d)
    }

    fn check_monotone(&self) -> Result<()> {
        let mut prev = 0.0;
        for i in 1..=GRID {
            let g = self.eval(i as f64 / GRID as f64);
            if !(0.0 - 1e-12..=1.0 + 1e-12).contains(&g) || g < prev - 1e-12 || g.is_nan() {
                return Err(Error::domain(format!(
                    "{} is not a distortion (value {g} at u={})",
                    self.inner.label,
                    i as f64 / GRID as f64
                )));
            }
            prev = g;
        }
        Ok(())
    }

    // ---- catalog ----

    pub fn identity() -> Self {
        Self::build(Node::Identity, vec![], vec![], Some(ShapeHint::Linear), "identity".into()).unwrap()
    }

    /// 1{u > 1−p}: the VaR_p distortion.
    pub fn var(p: f64) -> Result<Self> {
        check_prob("var", p, true, false)?;
        let a = 1.0 - p;
        let jump = Jump {
            at: a,
            value: 0.0,
            left: 0.0,
            right: 1.0,
        };
        let hint = if a == 0.0 { ShapeHint::Concave } else { ShapeHint::Neither };
        Self::build(Node::Var { a }, vec![jump], vec![], Some(hint), format!("var:{p}"))
    }

    /// min{u/(1−p), 1}: the TVaR_p distortion.
    pub fn tvar(p: f64) -> Result<Self> {
        check_prob("tvar", p, false, true)?;
        let hint = if p == 0.0 { ShapeHint::Linear } else { ShapeHint::Concave };
        Self::build(Node::Tvar { p }, vec![], vec![1.0 - p], Some(hint), format!("tvar:{p}"))
    }

    /// Regularized incomplete beta function I_u(a, b).
    pub fn beta(a: f64, b: f64) -> Result<Self> {
        check_pos("beta", a)?;
        check_pos("beta", b)?;
        let hint = if a == 1.0 && b == 1.0 {
            Some(ShapeHint::Linear)
        } else if a <= 1.0 && b >= 1.0 {
            Some(ShapeHint::Concave)
        } else if a >= 1.0 && b <= 1.0 {
            Some(ShapeHint::Convex)
        } else {
            None
        };
        Self::build(
            Node::Beta { a, b, lnb: ln_beta(a, b) },
            vec![],
            vec![],
            hint,
            format!("beta:{a},{b}"),
        )
    }

    /// u^a.
    pub fn power(a: f64) -> Result<Self> {
        check_pos("power", a)?;
        Self::build(Node::Power { a }, vec![], vec![], Some(exponent_hint(a, true)), format!("power:{a}"))
    }

    /// 1 − (1−u)^b.
    pub fn dual_power(b: f64) -> Result<Self> {
        check_pos("dualpower", b)?;
        Self::build(
            Node::DualPower { b },
            vec![],
            vec![],
            Some(exponent_hint(b, false)),
            format!("dualpower:{b}"),
        )
    }

    /// Φ(Φ⁻¹(u) + Φ⁻¹(p)).
    pub fn wang(p: f64) -> Result<Self> {
        check_prob("wang", p, true, true)?;
        let hint = if p > 0.5 {
            ShapeHint::Concave
        } else if p < 0.5 {
            ShapeHint::Convex
        } else {
            ShapeHint::Linear
        };
        Self::build(
            Node::Wang {
                shift: normal_quantile(p),
            },
            vec![],
            vec![],
            Some(hint),
            format!("wang:{p}"),
        )
    }

    /// u^p (1 − p ln u), with value 0 at u = 0.
    pub fn lookback(p: f64) -> Result<Self> {
        check_prob("lookback", p, true, false)?;
        Self::build(Node::Lookback { p }, vec![], vec![], Some(ShapeHint::Concave), format!("lookback:{p}"))
    }

    /// GlueVaR distortion k^{h1,h2}_{β,α}.
    pub fn glue(h1: f64, h2: f64, alpha: f64, beta: f64) -> Result<Self> {
        for (n, x) in [("h1", h1), ("h2", h2), ("alpha", alpha), ("beta", beta)] {
            check_prob(n, x, false, false)?;
        }
        if alpha > beta || h1 > h2 {
            return Err(Error::domain(format!(
                "glue needs alpha <= beta and h1 <= h2, got ({h1},{h2},{alpha},{beta})"
            )));
        }
        let (a1, a2) = (1.0 - beta, 1.0 - alpha);
        let mut jumps = Vec::new();
        if a2 == 0.0 {
            jumps.push(Jump {
                at: 0.0,
                value: 0.0,
                left: 0.0,
                right: 1.0,
            });
        } else {
            if a1 == 0.0 && h1 > 0.0 {
                jumps.push(Jump {
                    at: 0.0,
                    value: 0.0,
                    left: 0.0,
                    right: h1,
                });
            }
            let before = if a2 > a1 { h2 } else { h1 };
            jumps.push(Jump {
                at: a2,
                value: 1.0,
                left: 1.0 - before,
                right: 0.0,
            });
        }
        let s1 = if a1 > 0.0 { h1 / a1 } else { f64::INFINITY };
        let s2 = if a2 > a1 { (h2 - h1) / (a2 - a1) } else { 0.0 };
        let curv = if s1 >= s2 { Curvature::Concave } else { Curvature::Convex };
        let top_jump = jumps.last().map(|j| j.at > 0.0 && j.left > 1e-15).unwrap_or(false);
        let hint = if !top_jump && curv == Curvature::Concave {
            ShapeHint::Concave
        } else {
            ShapeHint::Piecewise(vec![
                Segment {
                    lo: 0.0,
                    hi: a2,
                    curvature: curv,
                },
                Segment {
                    lo: a2,
                    hi: 1.0,
                    curvature: Curvature::Linear,
                },
            ])
        };
        Self::build(
            Node::Glue { h1, h2, a1, a2 },
            jumps,
            vec![a1],
            Some(hint),
            format!("glue:{h1},{h2},{alpha},{beta}"),
        )
    }

    /// λ·1{u>0} + (1−λ)·g.
    pub fn esssup(lambda: f64, g: &Distortion) -> Result<Self> {
        check_prob("esssup", lambda, false, false)?;
        let top = Distortion::var(1.0)?;
        let mut d = Self::mix(&[(lambda, top), (1.0 - lambda, g.clone())])?;
        let hint = match g.hint() {
            Some(ShapeHint::Concave | ShapeHint::Linear) => Some(ShapeHint::Concave),
            _ if lambda == 0.0 => g.hint().cloned(),
            _ => None,
        };
        d.relabel(format!("esssup({lambda},{g})"), hint);
        Ok(d)
    }

    // ---- algebra ----

    /// The dual distortion ḡ(u) = 1 − g(1−u).
    pub fn dual(g: &Distortion) -> Self {
        let node = Node::Dual(g.clone());
        let jumps = g.jumps().iter().map(|j| (1.0 - j.at).clamp(0.0, 1.0)).collect::<Vec<_>>();
        let kinks = g.kinks().iter().map(|k| 1.0 - k).collect();
        let hint = g.hint().map(ShapeHint::flip);
        Self::build_generic(node, jumps, kinks, hint, format!("dual({g})")).expect("dual of a distortion")
    }

    /// u ↦ outer(inner(u)).
    pub fn compose(outer: &Distortion, inner: &Distortion) -> Self {
        let mut cands: Vec<f64> = inner.jumps().iter().map(|j| j.at).collect();
        let mut kinks = inner.kinks().to_vec();
        for a in outer.jumps().iter().map(|j| j.at) {
            cands.extend(preimages(inner, a));
        }
        for &k in outer.kinks() {
            kinks.extend(preimages(inner, k));
        }
        let hint = match (outer.hint(), inner.hint()) {
            (Some(ShapeHint::Linear), h) | (h, Some(ShapeHint::Linear)) => h.cloned(),
            (Some(ShapeHint::Concave), Some(ShapeHint::Concave)) => Some(ShapeHint::Concave),
            (Some(ShapeHint::Convex), Some(ShapeHint::Convex)) => Some(ShapeHint::Convex),
            _ => None,
        };
        Self::build_generic(
            Node::Compose(outer.clone(), inner.clone()),
            cands,
            kinks,
            hint,
            format!("compose({outer},{inner})"),
        )
        .expect("composition of distortions")
    }

    /// Left fold f_n = f_{n−1} ∘ h_n.
    pub fn compose_chain(gs: &[Distortion]) -> Result<Self> {
        let (first, rest) = gs
            .split_first()
            .ok_or_else(|| Error::domain("compose_chain needs at least one distortion"))?;
        Ok(rest.iter().fold(first.clone(), |acc, h| Distortion::compose(&acc, h)))
    }

    /// Tail distortion g_p(u) = g(u/(1−p)) on [0, 1−p], 1 above.
    pub fn tail(g: &Distortion, p: f64) -> Result<Self> {
        check_prob("tail", p, true, true)?;
        let mut d = Distortion::compose(g, &Distortion::tvar(p)?);
        let hint = d.hint().cloned();
        d.relabel(format!("tail({g},{p})"), hint);
        Ok(d)
    }

    /// Convex combination Σ w_i g_i.
    pub fn mix(terms: &[(f64, Distortion)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::domain("mix needs at least one term"));
        }
        let mut sum = 0.0;
        for (w, _) in terms {
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(Error::domain(format!("negative mixing weight {w}")));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("mixing weights sum to {sum}, not 1")));
        }
        Ok(Self::mix_unchecked(terms.iter().filter(|t| t.0 > 0.0).cloned().collect()))
    }

    fn mix_unchecked(terms: Vec<(f64, Distortion)>) -> Self {
        let cands: Vec<f64> = terms.iter().flat_map(|(_, g)| g.jumps().iter().map(|j| j.at)).collect();
        let kinks: Vec<f64> = terms.iter().flat_map(|(_, g)| g.kinks().iter().copied()).collect();
        let hints: Vec<Option<&ShapeHint>> = terms.iter().map(|(_, g)| g.hint()).collect();
        let all = |h: ShapeHint| hints.iter().all(|x| *x == Some(&h) || *x == Some(&ShapeHint::Linear));
        let hint = if hints.iter().all(|x| *x == Some(&ShapeHint::Linear)) {
            Some(ShapeHint::Linear)
        } else if all(ShapeHint::Concave) {
            Some(ShapeHint::Concave)
        } else if all(ShapeHint::Convex) {
            Some(ShapeHint::Convex)
        } else {
            None
        };
        let label = if terms.len() > 8 {
            format!("mix({} terms)", terms.len())
        } else {
            let body: Vec<String> = terms.iter().map(|(w, g)| format!("{w}*{g}")).collect();
            format!("mix({})", body.join(","))
        };
        if terms.len() == 1 {
            return terms[0].1.clone();
        }
        Self::build_generic(Node::Mix(terms), cands, kinks, hint, label).expect("mixture of distortions")
    }

    /// ∫ g_w dψ(w) for a parametric family and a mixing law ψ.
    pub fn mix_parametric<F>(family: F, weights: &MixingWeights) -> Result<Self>
    where
        F: Fn(f64) -> Result<Distortion>,
    {
        let raw: Vec<(f64, f64)> = match weights {
            MixingWeights::Atoms(atoms) => {
                let sum: f64 = atoms.iter().map(|a| a.1).sum();
                if atoms.iter().any(|a| a.1 < 0.0) || (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::domain(format!("mixing atoms have mass {sum}, not 1")));
                }
                atoms.clone()
            }
            MixingWeights::Countable { start, weight, max_terms } => {
                let mut out = Vec::new();
                let mut cum = 0.0;
                for i in *start..start + max_terms {
                    let w = weight(i);
                    if w < 0.0 || !w.is_finite() {
                        return Err(Error::domain(format!("invalid mixing weight {w} at {i}")));
                    }
                    cum += w;
                    out.push((i as f64, w));
                    if cum >= 1.0 - 1e-12 {
                        break;
                    }
                }
                if cum < 1.0 - 1e-12 || cum > 1.0 + 1e-12 {
                    return Err(Error::domain(format!(
                        "countable mixing weights reach mass {cum} after {} terms",
                        out.len()
                    )));
                }
                if let Some(last) = out.last_mut() {
                    last.1 += 1.0 - cum;
                }
                out
            }
            MixingWeights::Density {
                density,
                lo,
                hi,
                order,
                panels,
            } => {
                if !(lo < hi) || *order == 0 || *panels == 0 {
                    return Err(Error::domain("mixing density needs lo < hi, order >= 1"));
                }
                let width = (hi - lo) / *panels as f64;
                let mut out = Vec::with_capacity(order * panels);
                for k in 0..*panels {
                    let a = lo + k as f64 * width;
                    for (w, q) in gauss_legendre_on(*order, a, a + width) {
                        out.push((w, density(w) * q));
                    }
                }
                let sum: f64 = out.iter().map(|x| x.1).sum();
                if out.iter().any(|x| x.1 < 0.0) || (sum - 1.0).abs() > 1e-6 {
                    return Err(Error::domain(format!("mixing density has mass {sum}, not 1")));
                }
                out.iter_mut().for_each(|x| x.1 /= sum);
                out
            }
        };
        let mut terms = Vec::with_capacity(raw.len());
        for (w, m) in raw {
            if m > 0.0 {
                terms.push((m, family(w)?));
            }
        }
        let total: f64 = terms.iter().map(|t| t.0).sum();
        terms.iter_mut().for_each(|t| t.0 /= total);
        Ok(Self::mix_unchecked(terms))
    }

    /// g_v(u) = C(u,v)/v, or C(v,u)/v for `Side::Second`.
    pub fn copula_derived(c: &Copula, v: f64, side: Side) -> Result<Self> {
        check_prob("copula v", v, true, false)?;
        let kinks = match side {
            Side::First => c.kinks_in_u(v),
            Side::Second => c.kinks_in_v(v),
        };
        use crate::copula::CopulaFamily as F;
        let hint = match c.family() {
            Some(F::Independence) => Some(ShapeHint::Linear),
            Some(F::Comonotone) => Some(ShapeHint::Concave),
            Some(F::Countermonotone) => Some(ShapeHint::Convex),
            _ => None,
        };
        let side_s = match side {
            Side::First => "",
            Side::Second => ",side=second",
        };
        let label = format!("copula({},v={v}{side_s})", c.label());
        Self::build(
            Node::Copula {
                c: c.clone(),
                v,
                side,
            },
            vec![],
            kinks,
            hint,
            label,
        )
    }

    /// g(1−t) = 1 − ∫_0^t φ: the distortion of a spectral weight.
    pub fn from_spectral(phi: &SpectralWeight) -> Self {
        let mut jumps = Vec::new();
        for &(w, m) in phi.atoms() {
            let at = 1.0 - w;
            if at <= 0.0 {
                jumps.push(Jump {
                    at: 0.0,
                    value: 0.0,
                    left: 0.0,
                    right: m,
                });
            } else if at >= 1.0 {
                jumps.push(Jump {
                    at: 1.0,
                    value: 1.0,
                    left: m,
                    right: 0.0,
                });
            } else {
                jumps.push(Jump {
                    at,
                    value: 1.0 - phi.cumulative(w),
                    left: 0.0,
                    right: m,
                });
            }
        }
        let kinks = phi.breaks().iter().map(|b| 1.0 - b).collect();
        Self::build(Node::Spectral(phi.clone()), jumps, kinks, None, phi.label().to_string())
            .expect("spectral weight of mass one")
    }

    /// A user-supplied distortion. `jumps` lists (location, left part,
    /// right part); `density` is the derivative of the continuous part.
    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        density: Option<Map>,
        jumps: &[(f64, f64, f64)],
        kinks: &[f64],
    ) -> Result<Self> {
        let f: Map = Arc::new(f);
        let js = jumps
            .iter()
            .map(|&(at, left, right)| Jump {
                at,
                value: if at <= 0.0 {
                    0.0
                } else if at >= 1.0 {
                    1.0
                } else {
                    f(at)
                },
                left,
                right,
            })
            .collect();
        Self::build(Node::Custom { f, d: density }, js, kinks.to_vec(), None, label.into())
    }

    /// Construct with jumps found by evaluating one-sided limits at the
    /// candidate locations.
    fn build_generic(node: Node, cands: Vec<f64>, kinks: Vec<f64>, hint: Option<ShapeHint>, label: String) -> Result<Self> {
        let probe = Distortion {
            inner: Arc::new(Inner {
                node,
                jumps: vec![],
                kinks: vec![],
                hint: None,
                label: String::new(),
            }),
        };
        let mut jumps = Vec::new();
        for c in dedup_sorted(cands) {
            let c = c.clamp(0.0, 1.0);
            let (l, v, r) = probe.node_limits(c);
            if v - l > 1e-15 || r - v > 1e-15 {
                jumps.push(Jump {
                    at: c,
                    value: v,
                    left: (v - l).max(0.0),
                    right: (r - v).max(0.0),
                });
            }
        }
        let node = Arc::try_unwrap(probe.inner).ok().expect("unique probe").node;
        Self::build(node, jumps, kinks, hint, label)
    }

    /// (g(c−), g(c), g(c+)) from the children of a combinator node.
    fn node_limits(&self, c: f64) -> (f64, f64, f64) {
        const PROBE: f64 = 1e-9;
        let lim = |l: f64, v: f64, r: f64| {
            let l = if c <= 0.0 { v } else { l };
            let r = if c >= 1.0 { v } else { r };
            (l, v, r)
        };
        match &self.inner.node {
            Node::Dual(g) => {
                let x = 1.0 - c;
                let v = if c <= 0.0 {
                    0.0
                } else if c >= 1.0 {
                    1.0
                } else {
                    1.0 - g.eval(x)
                };
                lim(1.0 - g.eval_right(x), v, 1.0 - g.eval_left(x))
            }
            Node::Compose(f, g) => {
                let v = if c <= 0.0 {
                    0.0
                } else if c >= 1.0 {
                    1.0
                } else {
                    f.eval(g.eval(c))
                };
                let gl = g.eval_left(c);
                let left = if c > 0.0 && g.eval((c - PROBE).max(0.0)) < gl {
                    f.eval_left(gl)
                } else {
                    f.eval(gl)
                };
                let gr = g.eval_right(c);
                let right = if c < 1.0 && g.eval((c + PROBE).min(1.0)) > gr {
                    f.eval_right(gr)
                } else {
                    f.eval(gr)
                };
                lim(left, v, right)
            }
            Node::Mix(terms) => {
                let (mut l, mut v, mut r) = (0.0, 0.0, 0.0);
                for (w, g) in terms {
                    l += w * g.eval_left(c);
                    v += w * g.eval(c);
                    r += w * g.eval_right(c);
                }
                lim(l, v, r)
            }
            _ => {
                let v = self.eval(c);
                (self.eval_left(c), v, self.eval_right(c))
            }
        }
    }

    fn relabel(&mut self, label: String, hint: Option<ShapeHint>) {
        let inner = Arc::make_mut(&mut self.inner);
        inner.label = label;
        inner.hint = hint;
    }

    // ---- evaluation ----

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.inner.jumps
    }

    /// Interior points where g is continuous but not differentiable.
    pub fn kinks(&self) -> &[f64] {
        &self.inner.kinks
    }

    /// Sorted kinks and jump locations.
    pub fn nonsmooth_points(&self) -> Vec<f64> {
        let mut v = self.inner.kinks.clone();
        v.extend(self.inner.jumps.iter().map(|j| j.at));
        dedup_sorted(v)
    }

    pub fn hint(&self) -> Option<&ShapeHint> {
        self.inner.hint.as_ref()
    }

    fn jump_near(&self, u: f64) -> Option<&Jump> {
        let js = &self.inner.jumps;
        let i = js.partition_point(|j| j.at < u - JUMP_TOL);
        js.get(i).filter(|j| {
            if j.at <= 0.0 {
                u <= 0.0
            } else if j.at >= 1.0 {
                u >= 1.0
            } else {
                (j.at - u).abs() <= JUMP_TOL
            }
        })
    }

    /// g(u), with u clamped to [0, 1].
    pub fn eval(&self, u: f64) -> f64 {
        if u.is_nan() {
            return f64::NAN;
        }
        if let Some(j) = self.jump_near(u) {
            return j.value;
        }
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        self.raw(u)
    }

    /// g(u−).
    pub fn eval_left(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match self.jump_near(u) {
            Some(j) => j.value - j.left,
            None => self.eval(u),
        }
    }

    /// g(u+).
    pub fn eval_right(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return 1.0;
        }
        match self.jump_near(u) {
            Some(j) => j.value + j.right,
            None => self.eval(u),
        }
    }

    fn raw(&self, u: f64) -> f64 {
        match &self.inner.node {
            Node::Identity => u,
            Node::Var { a } => {
                if u > *a {
                    1.0
                } else {
                    0.0
                }
            }
            Node::Tvar { p } => (u / (1.0 - p)).min(1.0),
            Node::Beta { a, b, .. } => inc_beta(u, *a, *b),
            Node::Power { a } => u.powf(*a),
            Node::DualPower { b } => -(b * (-u).ln_1p()).exp_m1(),
            Node::Wang { shift } => normal_cdf(normal_quantile(u) + shift),
            Node::Lookback { p } => u.powf(*p) * (1.0 - p * u.ln()),
            Node::Glue { h1, h2, a1, a2 } => {
                if u < *a1 {
                    h1 * u / a1
                } else if u < *a2 {
                    h1 + (h2 - h1) * (u - a1) / (a2 - a1)
                } else {
                    1.0
                }
            }
            Node::Dual(g) => 1.0 - g.eval(1.0 - u),
            Node::Compose(f, g) => f.eval(g.eval(u)),
            Node::Mix(terms) => terms.iter().map(|(w, g)| w * g.eval(u)).sum::<f64>().min(1.0),
            Node::Spectral(phi) => 1.0 - phi.cumulative(1.0 - u),
            Node::Copula { c, v, side } => match side {
                Side::First => c.eval(u, *v) / v,
                Side::Second => c.eval(*v, u) / v,
            },
            Node::Custom { f, .. } => f(u),
        }
    }

    /// Density of the absolutely continuous part of dg at u ∈ (0,1).
    pub fn density(&self, u: f64) -> f64 {
        if !(u > 0.0 && u < 1.0) {
            return 0.0;
        }
        match &self.inner.node {
            Node::Identity => 1.0,
            Node::Var { .. } => 0.0,
            Node::Tvar { p } => {
                if u < 1.0 - p {
                    1.0 / (1.0 - p)
                } else {
                    0.0
                }
            }
            Node::Beta { a, b, lnb } => ((a - 1.0) * u.ln() + (b - 1.0) * (-u).ln_1p() - lnb).exp(),
            Node::Power { a } => a * u.powf(a - 1.0),
            Node::DualPower { b } => b * (1.0 - u).powf(b - 1.0),
            Node::Wang { shift } => {
                let z = normal_quantile(u);
                (-shift * z - 0.5 * shift * shift).exp()
            }
            Node::Lookback { p } => -p * p * u.powf(p - 1.0) * u.ln(),
            Node::Glue { h1, h2, a1, a2 } => {
                if u < *a1 {
                    h1 / a1
                } else if u < *a2 {
                    (h2 - h1) / (a2 - a1)
                } else {
                    0.0
                }
            }
            Node::Dual(g) => g.density(1.0 - u),
            Node::Compose(f, g) => {
                let gd = g.density(u);
                if gd == 0.0 {
                    0.0
                } else {
                    f.density(g.eval(u)) * gd
                }
            }
            Node::Mix(terms) => terms.iter().map(|(w, g)| w * g.density(u)).sum(),
            Node::Spectral(phi) => phi.density(1.0 - u),
            Node::Copula { c, v, side } => match side {
                Side::First => c.du(u, *v) / v,
                Side::Second => c.dv(*v, u) / v,
            },
            Node::Custom { d: Some(d), .. } => d(u),
            Node::Custom { f, .. } => {
                let h = 1e-6_f64.min(0.5 * u).min(0.5 * (1.0 - u));
                let lo = if self.jump_near_within(u - h, u) { u } else { u - h };
                let hi = if self.jump_near_within(u, u + h) { u } else { u + h };
                if hi > lo {
                    (f(hi) - f(lo)) / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    fn jump_near_within(&self, a: f64, b: f64) -> bool {
        self.inner.jumps.iter().any(|j| j.at >= a - JUMP_TOL && j.at <= b + JUMP_TOL)
    }

    /// g(0+): the weight placed on the essential supremum.
    pub fn at_zero_plus(&self) -> f64 {
        self.eval_right(0.0)
    }

    /// Total mass of the absolutely continuous part of dg.
    ///
    /// The density is integrated on pieces refined geometrically towards both
    /// endpoints; the two end slivers of width 1e-10 use differences of g.
    pub fn ac_mass(&self) -> f64 {
        let mut pts: Vec<f64> = (0..10).flat_map(|k| {
            let x = 1e-10 * 10f64.powi(k);
            [x, 1.0 - x]
        })
        .collect();
        pts.extend(self.nonsmooth_points().into_iter().filter(|&x| x > 1e-10 && x < 1.0 - 1e-10));
        let pts = dedup_sorted(pts);
        let (lo, hi) = (pts[0], pts[pts.len() - 1]);
        let body = integrate_pieces(|u| self.density(u), &pts, 1e-12, 50).value;
        body + (self.eval_left(lo) - self.eval_right(0.0)) + (self.eval_left(1.0) - self.eval_right(hi))
    }

    /// Check the distortion invariants: endpoints, monotonicity on a grid,
    /// total mass of dg (jumps plus continuous density) equal to 1 within
    /// 1e-8, and concavity of the recorded shape hint.
    pub fn validate(&self) -> Result<()> {
        if self.eval(0.0) != 0.0 || self.eval(1.0) != 1.0 {
            return Err(Error::domain(format!("{} violates g(0)=0, g(1)=1", self.label())));
        }
        self.check_monotone()?;
        let ac = self.ac_mass();
        let jumps: f64 = self.jumps().iter().map(Jump::height).sum();
        if (ac + jumps - 1.0).abs() > 1e-8 {
            return Err(Error::domain(format!(
                "{}: jump mass {jumps} + density mass {ac} != 1",
                self.label()
            )));
        }
        if matches!(self.hint(), Some(ShapeHint::Concave)) {
            let n = GRID;
            let vals: Vec<f64> = (0..=n).map(|i| self.eval(i as f64 / n as f64)).collect();
            if vals.windows(3).skip(1).any(|w| w[0] - 2.0 * w[1] + w[2] > 1e-9) {
                return Err(Error::domain(format!("{} is marked concave but is not", self.label())));
            }
        }
        Ok(())
    }
}

fn exponent_hint(a: f64, power: bool) -> ShapeHint {
    if a == 1.0 {
        ShapeHint::Linear
    } else if (a < 1.0) == power {
        ShapeHint::Concave
    } else {
        ShapeHint::Convex
    }
}

/// Endpoints of {u : g(u) = a}, found by bisection.
fn preimages(g: &Distortion, a: f64) -> Vec<f64> {
    if a <= 0.0 || a >= 1.0 {
        return if a <= 0.0 { vec![0.0] } else { vec![1.0] };
    }
    let bisect = |below: &dyn Fn(f64) -> bool| {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let lo = bisect(&|u| g.eval(u) < a);
    let hi = bisect(&|u| g.eval(u) <= a);
    if (hi - lo).abs() <= JUMP_TOL {
        vec![lo]
    } else {
        vec![lo, hi]
    }
}

/// Mixing law for [`Distortion::mix_parametric`].
pub enum MixingWeights {
    /// Finitely many (parameter, mass) pairs.
    Atoms(Vec<(f64, f64)>),
    /// Masses on the integers from `start`, truncated once the cumulative
    /// mass reaches 1 − 1e-12.
    Countable {
        start: usize,
        weight: Box<dyn Fn(usize) -> f64>,
        max_terms: usize,
    },
    /// A density on [lo, hi], integrated by `panels` composite
    /// Gauss–Legendre panels of the given order.
    Density {
        density: Box<dyn Fn(f64) -> f64>,
        lo: f64,
        hi: f64,
        order: usize,
        panels: usize,
    },
}

impl MixingWeights {
    /// Density weights with the default order 64 and a single panel.
    pub fn density(density: impl Fn(f64) -> f64 + 'static, lo: f64, hi: f64) -> Self {
        MixingWeights::Density {
            density: Box::new(density),
            lo,
            hi,
            order: 64,
            panels: 1,
        }
    }
}
