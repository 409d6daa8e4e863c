//! Bivariate copulas, Archimedean generators and copula-derived distortions.

mod bvn;
mod sampling;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bvn::bivariate_normal_cdf;
pub use sampling::{sample_pairs, stream_rng};
pub(crate) use sampling::open01;

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_quantile};

/// Closed-form copula families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CopulaFamily {
    Independence,
    Comonotone,
    Countermonotone,
    Clayton { alpha: f64 },
    Frank { alpha: f64 },
    ParetoSurvival { alpha: f64 },
    Amh { alpha: f64 },
    Gumbel { alpha: f64 },
    Fgm { alpha: f64 },
    MarshallOlkin { alpha: f64, beta: f64 },
    Gaussian { rho: f64 },
}

impl CopulaFamily {
    pub fn validate(&self) -> Result<()> {
        use CopulaFamily::*;
        let ok = match *self {
            Independence | Comonotone | Countermonotone => true,
            Clayton { alpha } | ParetoSurvival { alpha } => alpha > 0.0 && alpha.is_finite(),
            Frank { alpha } => alpha != 0.0 && alpha.is_finite(),
            Amh { alpha } => (-1.0..1.0).contains(&alpha),
            Gumbel { alpha } => alpha >= 1.0 && alpha.is_finite(),
            Fgm { alpha } => (-1.0..=1.0).contains(&alpha),
            MarshallOlkin { alpha, beta } => (0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta),
            Gaussian { rho } => rho > -1.0 && rho < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("parameter out of range for copula {}", self.label())))
        }
    }

    pub fn label(&self) -> String {
        use CopulaFamily::*;
        match *self {
            Independence => "independence".into(),
            Comonotone => "comonotone".into(),
            Countermonotone => "countermonotone".into(),
            Clayton { alpha } => format!("clayton:{alpha}"),
            Frank { alpha } => format!("frank:{alpha}"),
            ParetoSurvival { alpha } => format!("pareto:{alpha}"),
            Amh { alpha } => format!("amh:{alpha}"),
            Gumbel { alpha } => format!("gumbel:{alpha}"),
            Fgm { alpha } => format!("fgm:{alpha}"),
            MarshallOlkin { alpha, beta } => format!("mo:{alpha},{beta}"),
            Gaussian { rho } => format!("gaussian:{rho}"),
        }
    }

    /// Generator of the Archimedean families.
    pub fn generator(&self) -> Option<Generator> {
        use CopulaFamily::*;
        match *self {
            Independence => Some(Generator::independence()),
            Clayton { alpha } => Some(Generator::clayton(alpha)),
            Frank { alpha } => Some(Generator::frank(alpha)),
            ParetoSurvival { alpha } => Some(Generator::pareto_survival(alpha)),
            Amh { alpha } => Some(Generator::amh(alpha)),
            Gumbel { alpha } => Some(Generator::gumbel(alpha)),
            _ => None,
        }
    }
}

type Map = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Archimedean generator Ψ: (0,1] → [0,∞) with Ψ(1) = 0, convex and
/// decreasing.
#[derive(Clone)]
pub struct Generator {
    psi: Map,
    psi_prime: Option<Map>,
    inverse: Option<Map>,
    psi0: f64,
    label: String,
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("label", &self.label)
            .field("psi0", &self.psi0)
            .finish()
    }
}

impl Generator {
    /// A generator given only by Ψ. Derivative and pseudo-inverse are
    /// computed numerically.
    pub fn new(label: impl Into<String>, psi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let psi: Map = Arc::new(psi);
        let at0 = psi(0.0);
        let psi0 = if at0.is_nan() { psi(1e-300) } else { at0 };
        Generator {
            psi,
            psi_prime: None,
            inverse: None,
            psi0,
            label: label.into(),
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.psi_prime = Some(Arc::new(d));
        self
    }

    pub fn with_inverse(mut self, inv: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.inverse = Some(Arc::new(inv));
        self
    }

    pub fn independence() -> Self {
        Generator::new("independence", |t: f64| -t.ln())
            .with_derivative(|t| -1.0 / t)
            .with_inverse(|s| (-s).exp())
    }

    pub fn clayton(a: f64) -> Self {
        Generator::new(format!("clayton:{a}"), move |t: f64| (t.powf(-a) - 1.0) / a)
            .with_derivative(move |t| -t.powf(-a - 1.0))
            .with_inverse(move |s| (1.0 + a * s).powf(-1.0 / a))
    }

    pub fn frank(a: f64) -> Self {
        let d = (-a).exp_m1();
        Generator::new(format!("frank:{a}"), move |t: f64| -((-a * t).exp_m1() / d).ln())
            .with_derivative(move |t| {
                let e = (-a * t).exp();
                a * e / (e - 1.0)
            })
            .with_inverse(move |s| -((-s).exp() * d).ln_1p() / a)
    }

    pub fn pareto_survival(a: f64) -> Self {
        Generator::new(format!("pareto:{a}"), move |t: f64| t.powf(-1.0 / a) - 1.0)
            .with_derivative(move |t| -t.powf(-1.0 / a - 1.0) / a)
            .with_inverse(move |s| (1.0 + s).powf(-a))
    }

    pub fn amh(a: f64) -> Self {
        Generator::new(format!("amh:{a}"), move |t: f64| ((1.0 - a + a * t) / t).ln())
            .with_derivative(move |t| a / (1.0 - a + a * t) - 1.0 / t)
            .with_inverse(move |s| (1.0 - a) / (s.exp() - a))
    }

    pub fn gumbel(a: f64) -> Self {
        Generator::new(format!("gumbel:{a}"), move |t: f64| (-t.ln()).powf(a))
            .with_derivative(move |t| -a * (-t.ln()).powf(a - 1.0) / t)
            .with_inverse(move |s| (-s.powf(1.0 / a)).exp())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Ψ(0), possibly infinite.
    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    pub fn psi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            self.psi0
        } else if t >= 1.0 {
            0.0
        } else {
            (self.psi)(t)
        }
    }

    pub fn psi_prime(&self, t: f64) -> f64 {
        match &self.psi_prime {
            Some(d) => d(t),
            None => {
                let h = 1e-6 * t.min(1.0 - t).max(1e-9);
                ((self.psi)(t + h) - (self.psi)(t - h)) / (2.0 * h)
            }
        }
    }

    /// Pseudo-inverse Ψ^[-1]: [0,∞] → [0,1], zero from Ψ(0) on.
    pub fn pseudo_inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        if s >= self.psi0 {
            return 0.0;
        }
        if let Some(inv) = &self.inverse {
            return inv(s).clamp(0.0, 1.0);
        }
        let (mut lo, mut hi) = (1e-15, 1.0);
        if self.psi(lo) < s {
            return lo;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.psi(mid) > s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Check Ψ(1) = 0 and that Ψ is decreasing and convex on a grid.
    pub fn validate(&self) -> Result<()> {
        if self.psi(1.0 - 1e-12).abs() > 1e-6 || (self.psi)(1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("generator {} has psi(1) != 0", self.label)));
        }
        let n = 1000;
        let vals: Vec<f64> = (1..n).map(|i| (self.psi)(i as f64 / n as f64)).collect();
        for w in vals.windows(2) {
            if w[1] > w[0] + 1e-12 {
                return Err(Error::domain(format!("generator {} is not decreasing", self.label)));
            }
        }
        for w in vals.windows(3) {
            let d2 = w[0] - 2.0 * w[1] + w[2];
            if d2 < -1e-9 * (1.0 + w[1].abs()) {
                return Err(Error::domain(format!("generator {} is not convex", self.label)));
            }
        }
        Ok(())
    }
}

/// Outcome of the 1/Ψ' concavity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorConcavity {
    Concave,
    NotConcave,
}

/// Decide whether every derived distortion g_v(u) = Ψ^{-1}(Ψ(u)+Ψ(v))/v is
/// concave, via concavity of t ↦ 1/Ψ'(t) on a grid.
///
/// Needs Ψ(0) = ∞; a finite Ψ(0) is a precondition error.
pub fn theorem31_concavity(gen: &Generator) -> Result<GeneratorConcavity> {
    if gen.psi0().is_finite() {
        return Err(Error::Precondition(format!(
            "generator {} has finite psi(0) = {}",
            gen.label(),
            gen.psi0()
        )));
    }
    let n = 1000;
    let f: Vec<f64> = (1..n).map(|i| 1.0 / gen.psi_prime(i as f64 / n as f64)).collect();
    let concave = f.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] <= 1e-9);
    Ok(if concave {
        GeneratorConcavity::Concave
    } else {
        GeneratorConcavity::NotConcave
    })
}

#[derive(Clone)]
enum Kind {
    Family(CopulaFamily),
    Archimedean(Generator),
}

/// A bivariate copula.
#[derive(Clone)]
pub struct Copula {
    kind: Kind,
    generator: Option<Generator>,
}

impl fmt::Debug for Copula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Copula({})", self.label())
    }
}

impl Copula {
    pub fn new(family: CopulaFamily) -> Result<Self> {
        family.validate()?;
        Ok(Copula {
            kind: Kind::Family(family),
            generator: family.generator(),
        })
    }

    /// C(u,v) = Ψ^[-1](Ψ(u) + Ψ(v)).
    pub fn archimedean(gen: Generator) -> Result<Self> {
        gen.validate()?;
        Ok(Copula {
            kind: Kind::Archimedean(gen.clone()),
            generator: Some(gen),
        })
    }

    pub fn family(&self) -> Option<CopulaFamily> {
        match &self.kind {
            Kind::Family(f) => Some(*f),
            Kind::Archimedean(_) => None,
        }
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Family(f) => f.label(),
            Kind::Archimedean(g) => format!("archimedean({})", g.label()),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(
            self.kind,
            Kind::Family(CopulaFamily::MarshallOlkin { alpha, beta }) if alpha != beta
        )
    }

    /// C(u, v).
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let c = match &self.kind {
            Kind::Archimedean(g) => g.pseudo_inverse(g.psi(u) + g.psi(v)),
            Kind::Family(f) => family_eval(f, u, v),
        };
        c.clamp((u + v - 1.0).max(0.0), u.min(v))
    }

    /// ∂C/∂u, the conditional distribution of V given U = u.
    pub fn du(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let u = u.clamp(1e-300, 1.0);
        let d = match &self.kind {
            Kind::Archimedean(g) => archimedean_du(g, self, u, v),
            Kind::Family(f) => match *f {
                CopulaFamily::Independence => v,
                CopulaFamily::Comonotone => {
                    if u < v {
                        1.0
                    } else {
                        0.0
                    }
                }
                CopulaFamily::Countermonotone => {
                    if u + v > 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                CopulaFamily::Fgm { alpha } => v + alpha * v * (1.0 - v) * (1.0 - 2.0 * u),
                CopulaFamily::MarshallOlkin { alpha, beta } => {
                    if u.powf(-alpha) <= v.powf(-beta) {
                        (1.0 - alpha) * u.powf(-alpha) * v
                    } else {
                        v.powf(1.0 - beta)
                    }
                }
                CopulaFamily::Gaussian { rho } => {
                    normal_cdf((normal_quantile(v) - rho * normal_quantile(u)) / (1.0 - rho * rho).sqrt())
                }
                _ => {
                    let g = self.generator.as_ref().expect("archimedean family");
                    archimedean_du(g, self, u, v)
                }
            },
        };
        d.clamp(0.0, 1.0)
    }

    /// ∂C/∂v.
    pub fn dv(&self, u: f64, v: f64) -> f64 {
        match &self.kind {
            Kind::Family(CopulaFamily::MarshallOlkin { alpha, beta }) => {
                if u <= 0.0 {
                    return 0.0;
                }
                if u >= 1.0 {
                    return 1.0;
                }
                let v = v.clamp(1e-300, 1.0);
                let d = if u.powf(-alpha) <= v.powf(-beta) {
                    u.powf(1.0 - alpha)
                } else {
                    (1.0 - beta) * u * v.powf(-beta)
                };
                d.clamp(0.0, 1.0)
            }
            _ => self.du(v, u),
        }
    }

    /// Points in (0,1) where u ↦ C(u, v) is not smooth.
    pub fn kinks_in_u(&self, v: f64) -> Vec<f64> {
        match self.family() {
            Some(CopulaFamily::Comonotone) => vec![v],
            Some(CopulaFamily::Countermonotone) => vec![1.0 - v],
            Some(CopulaFamily::MarshallOlkin { alpha, beta }) if alpha > 0.0 => {
                vec![v.powf(beta / alpha)]
            }
            _ => Vec::new(),
        }
        .into_iter()
        .filter(|&u| u > 0.0 && u < 1.0)
        .collect()
    }

    /// Points in (0,1) where v ↦ C(u, v) is not smooth.
    pub fn kinks_in_v(&self, u: f64) -> Vec<f64> {
        match self.family() {
            Some(CopulaFamily::MarshallOlkin { alpha, beta }) if beta > 0.0 => {
                vec![u.powf(alpha / beta)]
            }
            _ => self.kinks_in_u(u),
        }
        .into_iter()
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect()
    }
}

fn archimedean_du(g: &Generator, c: &Copula, u: f64, v: f64) -> f64 {
    let cv = match &c.kind {
        Kind::Family(f) if !matches!(f, CopulaFamily::Independence) => family_eval(f, u, v),
        _ => g.pseudo_inverse(g.psi(u) + g.psi(v)),
    };
    if cv <= 0.0 {
        return 0.0;
    }
    g.psi_prime(u) / g.psi_prime(cv)
}

/// ln(e^a + e^b - 1) for a, b >= 0.
fn log_sum_exp_m1(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m < 1.0 {
        (a.exp_m1() + b.exp_m1()).ln_1p()
    } else {
        m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln()
    }
}

fn family_eval(f: &CopulaFamily, u: f64, v: f64) -> f64 {
    use CopulaFamily::*;
    match *f {
        Independence => u * v,
        Comonotone => u.min(v),
        Countermonotone => (u + v - 1.0).max(0.0),
        Clayton { alpha } => {
            let s = log_sum_exp_m1(-alpha * u.ln(), -alpha * v.ln());
            (-s / alpha).exp()
        }
        ParetoSurvival { alpha } => {
            let s = log_sum_exp_m1(-u.ln() / alpha, -v.ln() / alpha);
            (-s * alpha).exp()
        }
        Frank { alpha } => {
            let num = (-alpha * u).exp_m1() * (-alpha * v).exp_m1();
            -(num / (-alpha).exp_m1()).ln_1p() / alpha
        }
        Amh { alpha } => u * v / (1.0 - alpha * (1.0 - u) * (1.0 - v)),
        Gumbel { alpha } => {
            let a = (-u.ln()).powf(alpha);
            let b = (-v.ln()).powf(alpha);
            (-(a + b).powf(1.0 / alpha)).exp()
        }
        Fgm { alpha } => u * v * (1.0 + alpha * (1.0 - u) * (1.0 - v)),
        MarshallOlkin { alpha, beta } => (u.powf(1.0 - alpha) * v).min(u * v.powf(1.0 - beta)),
        Gaussian { rho } => bivariate_normal_cdf(normal_quantile(u), normal_quantile(v), rho).unwrap_or(f64::NAN),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_families() -> Vec<CopulaFamily> {
        use CopulaFamily::*;
        vec![
            Independence,
            Comonotone,
            Countermonotone,
            Clayton { alpha: 1.0 },
            Clayton { alpha: 7.5 },
            Frank { alpha: 2.0 },
            Frank { alpha: -3.0 },
            ParetoSurvival { alpha: 0.7 },
            Amh { alpha: 0.5 },
            Amh { alpha: -1.0 },
            Gumbel { alpha: 1.5 },
            Gumbel { alpha: 3.0 },
            Fgm { alpha: -0.8 },
            Fgm { alpha: 1.0 },
            MarshallOlkin { alpha: 0.3, beta: 0.8 },
            Gaussian { rho: 0.6 },
            Gaussian { rho: -0.4 },
        ]
    }

    #[test]
    fn catalog_examples() {
        let c = Copula::new(CopulaFamily::Clayton { alpha: 1.0 }).unwrap();
        assert!((c.eval(0.5, 0.5) - 1.0 / 3.0).abs() < 1e-15);
        let i = Copula::new(CopulaFamily::Independence).unwrap();
        assert!((i.eval(0.3, 0.4) - 0.12).abs() < 1e-15);
        let w = Copula::new(CopulaFamily::Countermonotone).unwrap();
        assert_eq!(w.eval(0.3, 0.4), 0.0);
    }

    #[test]
    fn parameter_ranges() {
        assert!(Copula::new(CopulaFamily::Clayton { alpha: 0.0 }).is_err());
        assert!(Copula::new(CopulaFamily::Frank { alpha: 0.0 }).is_err());
        assert!(Copula::new(CopulaFamily::Amh { alpha: 1.0 }).is_err());
        assert!(Copula::new(CopulaFamily::Gumbel { alpha: 0.9 }).is_err());
        assert!(Copula::new(CopulaFamily::Fgm { alpha: 1.1 }).is_err());
        assert!(Copula::new(CopulaFamily::MarshallOlkin { alpha: 0.5, beta: 1.2 }).is_err());
        assert!(Copula::new(CopulaFamily::Gaussian { rho: 1.0 }).is_err());
    }

    #[test]
    fn copula_axioms_on_grid() {
        let n = 50;
        let g: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        for fam in all_families() {
            let c = Copula::new(fam).unwrap();
            for &u in &g {
                assert!(c.eval(u, 0.0).abs() < 1e-15 && c.eval(0.0, u).abs() < 1e-15);
                assert!((c.eval(u, 1.0) - u).abs() < 1e-12, "{fam:?}");
                assert!((c.eval(1.0, u) - u).abs() < 1e-12, "{fam:?}");
            }
            for i in 0..n {
                for j in 0..n {
                    let (u1, u2, v1, v2) = (g[i], g[i + 1], g[j], g[j + 1]);
                    let vol = c.eval(u2, v2) - c.eval(u2, v1) - c.eval(u1, v2) + c.eval(u1, v1);
                    assert!(vol >= -1e-10, "{fam:?} ({u1},{v1}) vol={vol}");
                    let x = c.eval(u1, v1);
                    assert!(x >= (u1 + v1 - 1.0).max(0.0) - 1e-10 && x <= u1.min(v1) + 1e-10);
                }
            }
        }
    }

    #[test]
    fn archimedean_generators_match_closed_forms() {
        let n = 50;
        for fam in all_families() {
            let Some(gen) = fam.generator() else { continue };
            let closed = Copula::new(fam).unwrap();
            // strip the closed form and inverse: pure bisection path
            let psi = gen.clone();
            let numeric = Copula::archimedean(Generator::new("numeric", move |t| psi.psi(t))).unwrap();
            let with_inv = Copula::archimedean(gen.clone()).unwrap();
            for i in 1..n {
                for j in 1..n {
                    let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                    let a = closed.eval(u, v);
                    assert!((a - with_inv.eval(u, v)).abs() < 1e-10, "{fam:?}");
                    assert!((a - numeric.eval(u, v)).abs() < 1e-10, "{fam:?}");
                }
            }
        }
    }

    #[test]
    fn generator_examples() {
        let ind = Copula::archimedean(Generator::new("log", |t: f64| -t.ln())).unwrap();
        assert!((ind.eval(0.3, 0.7) - 0.21).abs() < 1e-12);
        let gh = Copula::archimedean(Generator::new("gh2", |t: f64| t.ln().powi(2))).unwrap();
        let oracle = (-(2f64).sqrt() * 2f64.ln()).exp();
        assert!((gh.eval(0.5, 0.5) - oracle).abs() < 1e-10);
        assert!((oracle - 0.3752142272).abs() < 1e-10);
    }

    #[test]
    fn pseudo_inverse_properties() {
        for fam in all_families() {
            let Some(g) = fam.generator() else { continue };
            for i in 1..=100 {
                let t = 0.01 * i as f64;
                assert!((g.pseudo_inverse(g.psi(t)) - t).abs() < 1e-9, "{fam:?} t={t}");
            }
        }
        // finite psi(0)
        let g = Generator::new("linear", |t: f64| 1.0 - t);
        assert_eq!(g.psi0(), 1.0);
        assert_eq!(g.pseudo_inverse(1.0), 0.0);
        assert_eq!(g.pseudo_inverse(5.0), 0.0);
        assert!((g.pseudo_inverse(0.25) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_convex_generator() {
        let bad = Generator::new("concave", |t: f64| 1.0 - t * t);
        assert!(Copula::archimedean(bad).is_err());
        let increasing = Generator::new("inc", |t: f64| t - 1.0);
        assert!(Copula::archimedean(increasing).is_err());
    }

    #[test]
    fn theorem31_examples() {
        use GeneratorConcavity::*;
        for a in [0.1, 1.0, 5.0] {
            assert_eq!(theorem31_concavity(&Generator::clayton(a)).unwrap(), Concave);
        }
        assert_eq!(theorem31_concavity(&Generator::frank(-2.0)).unwrap(), NotConcave);
        assert_eq!(theorem31_concavity(&Generator::frank(2.0)).unwrap(), Concave);
        assert_eq!(theorem31_concavity(&Generator::gumbel(1.5)).unwrap(), Concave);
        // (1/psi')'' < 0 on (0,1) for every alpha >= 1
        assert_eq!(theorem31_concavity(&Generator::gumbel(3.0)).unwrap(), Concave);
        assert_eq!(theorem31_concavity(&Generator::amh(-0.5)).unwrap(), NotConcave);
        assert_eq!(theorem31_concavity(&Generator::amh(0.5)).unwrap(), Concave);
        let finite = Generator::new("linear", |t: f64| 1.0 - t);
        assert!(matches!(theorem31_concavity(&finite), Err(Error::Precondition(_))));
    }

    #[test]
    fn partials_match_differences() {
        for fam in all_families() {
            let c = Copula::new(fam).unwrap();
            for &(u, v) in &[(0.3, 0.6), (0.71, 0.2), (0.5, 0.9)] {
                if !c.kinks_in_u(v).iter().all(|k| (k - u).abs() > 1e-3) {
                    continue;
                }
                let h = 1e-6;
                let num = (c.eval(u + h, v) - c.eval(u - h, v)) / (2.0 * h);
                assert!((c.du(u, v) - num).abs() < 1e-6, "{fam:?} du at ({u},{v})");
                if c.kinks_in_v(u).iter().all(|k| (k - v).abs() > 1e-3) {
                    let num = (c.eval(u, v + h) - c.eval(u, v - h)) / (2.0 * h);
                    assert!((c.dv(u, v) - num).abs() < 1e-6, "{fam:?} dv at ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn clayton_limits() {
        let ind = Copula::new(CopulaFamily::Independence).unwrap();
        let com = Copula::new(CopulaFamily::Comonotone).unwrap();
        let small = Copula::new(CopulaFamily::Clayton { alpha: 1e-4 }).unwrap();
        let big = Copula::new(CopulaFamily::Clayton { alpha: 1e3 }).unwrap();
        let n = 50;
        for i in 0..=n {
            for j in 0..=n {
                let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                assert!((small.eval(u, v) - ind.eval(u, v)).abs() <= 1e-3);
                assert!((big.eval(u, v) - com.eval(u, v)).abs() <= 1e-3);
            }
        }
    }
}
