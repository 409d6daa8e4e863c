//! Loss distributions: discrete, empirical and a closed set of parametric
//! families, each exposing survival, lower/upper quantiles and moments.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_quantile};

/// Probability slack used when comparing cumulative sums against a level.
pub const PROB_EPS: f64 = 1e-12;

/// Atoms closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;

/// Closed set of parametric families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Uniform { a: f64, b: f64 },
    Bernoulli { q: f64 },
    /// Survival (x/scale)^(-alpha) for x >= scale.
    Pareto { alpha: f64, scale: f64 },
    Exponential { rate: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Normal { mu: f64, sigma: f64 },
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Family::Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
            Family::Bernoulli { q } => (0.0..=1.0).contains(&q),
            Family::Pareto { alpha, scale } => alpha > 0.0 && scale > 0.0 && alpha.is_finite() && scale.is_finite(),
            Family::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Family::Lognormal { mu, sigma } | Family::Normal { mu, sigma } => {
                mu.is_finite() && sigma > 0.0 && sigma.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid parameters for {}", self.label())))
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Family::Uniform { a, b } => format!("uniform:{a},{b}"),
            Family::Bernoulli { q } => format!("bernoulli:{q}"),
            Family::Pareto { alpha, scale } => format!("pareto:{alpha},{scale}"),
            Family::Exponential { rate } => format!("exponential:{rate}"),
            Family::Lognormal { mu, sigma } => format!("lognormal:{mu},{sigma}"),
            Family::Normal { mu, sigma } => format!("normal:{mu},{sigma}"),
        }
    }

    fn bernoulli_discrete(q: f64) -> Discrete {
        let pairs: Vec<(f64, f64)> = [(0.0, 1.0 - q), (1.0, q)]
            .into_iter()
            .filter(|&(_, p)| p > 0.0)
            .collect();
        Discrete::from_pairs(&pairs).expect("valid bernoulli")
    }
}

fn neumaier_step(sum: f64, comp: f64, x: f64) -> (f64, f64) {
    let t = sum + x;
    let c = if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
    (t, comp + c)
}

/// Compensated summation.
pub(crate) fn fsum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, c) = xs.into_iter().fold((0.0, 0.0), |(s, c), x| neumaier_step(s, c, x));
    s + c
}

/// Finitely supported law with strictly increasing atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrete {
    atoms: Vec<f64>,
    probs: Vec<f64>,
    /// tail[i] = P(X > atoms[i]), accumulated from the right.
    tail: Vec<f64>,
}

impl Discrete {
    /// Build from (value, probability) pairs in any order. Coinciding values
    /// are merged and zero-probability atoms dropped.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::domain("discrete law needs at least one atom"));
        }
        for &(v, p) in pairs {
            if !v.is_finite() || !p.is_finite() || p < 0.0 {
                return Err(Error::domain(format!("invalid atom ({v}, {p})")));
            }
        }
        let sum = fsum(pairs.iter().map(|a| a.1));
        if (sum - 1.0).abs() > PROB_EPS {
            return Err(Error::domain(format!("probabilities sum to {sum}, not 1")));
        }
        let mut sorted: Vec<(f64, f64)> = pairs.iter().copied().filter(|&(_, p)| p > 0.0).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut probs: Vec<f64> = Vec::with_capacity(sorted.len());
        for (v, p) in sorted {
            match atoms.last() {
                Some(&last) if (v - last).abs() <= MERGE_TOL => *probs.last_mut().unwrap() += p,
                _ => {
                    atoms.push(v);
                    probs.push(p);
                }
            }
        }
        let mut tail = vec![0.0; atoms.len()];
        let (mut acc, mut comp) = (0.0, 0.0);
        for i in (0..atoms.len().saturating_sub(1)).rev() {
            (acc, comp) = neumaier_step(acc, comp, probs[i + 1]);
            tail[i] = acc + comp;
        }
        Ok(Discrete { atoms, probs, tail })
    }

    pub fn new(atoms: &[f64], probs: &[f64]) -> Result<Self> {
        if atoms.len() != probs.len() {
            return Err(Error::domain("atoms and probabilities differ in length"));
        }
        let pairs: Vec<(f64, f64)> = atoms.iter().copied().zip(probs.iter().copied()).collect();
        Self::from_pairs(&pairs)
    }

    pub fn point_mass(c: f64) -> Self {
        Discrete {
            atoms: vec![c],
            probs: vec![1.0],
            tail: vec![0.0],
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Suffix sums P(X > atoms[i]).
    pub fn tails(&self) -> &[f64] {
        &self.tail
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.probs.iter().copied())
    }

    fn survival(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        if k == 0 {
            1.0
        } else {
            self.tail[k - 1]
        }
    }

    /// First atom whose tail is at most `s`.
    pub(crate) fn at_survival(&self, s: f64) -> f64 {
        let i = self.tail.iter().position(|&t| t <= s + PROB_EPS).unwrap_or(self.atoms.len() - 1);
        self.atoms[i]
    }

    /// First atom whose tail is strictly below `s`.
    fn at_survival_strict(&self, s: f64) -> f64 {
        let i = self.tail.iter().position(|&t| t < s - PROB_EPS).unwrap_or(self.atoms.len() - 1);
        self.atoms[i]
    }

    fn mean(&self) -> f64 {
        fsum(self.pairs().map(|(v, p)| v * p))
    }

    /// Law of a·X + c.
    pub fn affine(&self, a: f64, c: f64) -> Discrete {
        let pairs: Vec<(f64, f64)> = self.pairs().map(|(v, p)| (a * v + c, p)).collect();
        Discrete::from_pairs(&pairs).expect("affine image of a valid law")
    }
}

/// Law of the sum of two independent discrete risks.
pub fn convolve_discrete(d1: &Discrete, d2: &Discrete) -> Discrete {
    let mut pairs = Vec::with_capacity(d1.atoms.len() * d2.atoms.len());
    for (x, p) in d1.pairs() {
        for (y, q) in d2.pairs() {
            pairs.push((x + y, p * q));
        }
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    for p in &mut pairs {
        p.1 /= total;
    }
    Discrete::from_pairs(&pairs).expect("convolution of valid laws")
}

/// Equally weighted sample, sorted on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Empirical {
    samples: Vec<f64>,
}

impl Empirical {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("empirical law needs at least one sample"));
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("non-finite sample {bad}")));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Empirical { samples })
    }

    /// Read one value per line. A single leading `value` header is allowed,
    /// blank lines are skipped.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut out = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || (idx == 0 && text.eq_ignore_ascii_case("value")) {
                continue;
            }
            let col = line.len() - line.trim_start().len() + 1;
            let v: f64 = text
                .parse()
                .map_err(|_| Error::parse(idx + 1, col, format!("not a number: {text:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(idx + 1, col, "value must be finite"));
            }
            out.push(v);
        }
        Empirical::new(out)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Order statistic x_(k), 1-based.
    fn order(&self, k: usize) -> f64 {
        self.samples[k.clamp(1, self.samples.len()) - 1]
    }

    pub fn to_discrete(&self) -> Discrete {
        let w = 1.0 / self.samples.len() as f64;
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for &x in &self.samples {
            match pairs.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => pairs.push((x, w)),
            }
        }
        Discrete::from_pairs(&pairs).expect("valid sample")
    }
}

/// A loss distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Discrete(Discrete),
    Empirical(Empirical),
    Parametric(Family),
}

impl From<Discrete> for Distribution {
    fn from(d: Discrete) -> Self {
        Distribution::Discrete(d)
    }
}

impl From<Empirical> for Distribution {
    fn from(d: Empirical) -> Self {
        Distribution::Empirical(d)
    }
}

impl Distribution {
    pub fn parametric(f: Family) -> Result<Self> {
        f.validate()?;
        Ok(Distribution::Parametric(f))
    }

    pub fn discrete(pairs: &[(f64, f64)]) -> Result<Self> {
        Discrete::from_pairs(pairs).map(Distribution::Discrete)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::parametric(Family::Uniform { a, b })
    }

    pub fn pareto(alpha: f64, scale: f64) -> Result<Self> {
        Self::parametric(Family::Pareto { alpha, scale })
    }

    pub fn bernoulli(q: f64) -> Result<Self> {
        Self::parametric(Family::Bernoulli { q })
    }

    pub fn point_mass(c: f64) -> Self {
        Distribution::Discrete(Discrete::point_mass(c))
    }

    pub fn label(&self) -> String {
        match self {
            Distribution::Discrete(d) => {
                let body: Vec<String> = d.pairs().map(|(v, p)| format!("{v}:{p}")).collect();
                format!("discrete:{}", body.join(","))
            }
            Distribution::Empirical(e) => format!("empirical(n={})", e.len()),
            Distribution::Parametric(f) => f.label(),
        }
    }

    pub fn family(&self) -> Option<Family> {
        match self {
            Distribution::Parametric(f) => Some(*f),
            _ => None,
        }
    }

    /// Finite-support view: discrete and empirical laws, and Bernoulli.
    pub fn as_discrete(&self) -> Option<Discrete> {
        match self {
            Distribution::Discrete(d) => Some(d.clone()),
            Distribution::Empirical(e) => Some(e.to_discrete()),
            Distribution::Parametric(Family::Bernoulli { q }) => Some(Family::bernoulli_discrete(*q)),
            Distribution::Parametric(_) => None,
        }
    }

    /// P(X > x).
    pub fn survival(&self, x: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.survival(x),
            Distribution::Empirical(e) => {
                let n = e.samples.len();
                (n - e.samples.partition_point(|&s| s <= x)) as f64 / n as f64
            }
            Distribution::Parametric(f) => match *f {
                Family::Uniform { a, b } => ((b - x) / (b - a)).clamp(0.0, 1.0),
                Family::Bernoulli { q } => {
                    if x < 0.0 {
                        1.0
                    } else if x < 1.0 {
                        q
                    } else {
                        0.0
                    }
                }
                Family::Pareto { alpha, scale } => {
                    if x <= scale {
                        1.0
                    } else {
                        (x / scale).powf(-alpha)
                    }
                }
                Family::Exponential { rate } => {
                    if x <= 0.0 {
                        1.0
                    } else {
                        (-rate * x).exp()
                    }
                }
                Family::Lognormal { mu, sigma } => {
                    if x <= 0.0 {
                        1.0
                    } else {
                        normal_cdf(-(x.ln() - mu) / sigma)
                    }
                }
                Family::Normal { mu, sigma } => normal_cdf(-(x - mu) / sigma),
            },
        }
    }

    /// P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// Lower quantile inf{x : F(x) >= p}, p in (0, 1].
    pub fn quantile_lower(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::domain(format!("lower quantile level {p} outside (0,1]")));
        }
        Ok(match self {
            Distribution::Empirical(e) => {
                let n = e.samples.len() as f64;
                e.order((n * (p - PROB_EPS)).ceil().max(1.0) as usize)
            }
            _ => self.quantile_at_survival(1.0 - p),
        })
    }

    /// Upper quantile sup{x : F(x) <= p}, p in [0, 1).
    pub fn quantile_upper(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain(format!("upper quantile level {p} outside [0,1)")));
        }
        Ok(match self {
            Distribution::Discrete(d) => d.at_survival_strict(1.0 - p),
            Distribution::Empirical(e) => {
                let n = e.samples.len() as f64;
                e.order((n * (p + PROB_EPS)).floor() as usize + 1)
            }
            Distribution::Parametric(Family::Bernoulli { q }) => {
                Family::bernoulli_discrete(*q).at_survival_strict(1.0 - p)
            }
            Distribution::Parametric(_) => self.quantile_at_survival(1.0 - p),
        })
    }

    /// Lower quantile at level 1 − s, evaluated without forming 1 − s where
    /// the family allows. `s` in [0, 1).
    pub fn quantile_at_survival(&self, s: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.at_survival(s),
            Distribution::Empirical(e) => {
                let n = e.samples.len() as f64;
                e.order((n * (1.0 - s - PROB_EPS)).ceil().max(1.0) as usize)
            }
            Distribution::Parametric(f) => match *f {
                Family::Uniform { a, b } => b - s * (b - a),
                Family::Bernoulli { q } => Family::bernoulli_discrete(q).at_survival(s),
                Family::Pareto { alpha, scale } => scale * s.powf(-1.0 / alpha),
                Family::Exponential { rate } => -s.ln() / rate,
                Family::Lognormal { mu, sigma } => (mu - sigma * normal_quantile(s)).exp(),
                Family::Normal { mu, sigma } => mu - sigma * normal_quantile(s),
            },
        }
    }

    /// Lower quantile at level p, accurate for small p. `p` in (0, 1].
    pub fn quantile_at_cdf(&self, p: f64) -> f64 {
        match self {
            Distribution::Parametric(f) => match *f {
                Family::Uniform { a, b } => a + p * (b - a),
                Family::Pareto { alpha, scale } => scale * (-(-p).ln_1p() / alpha).exp(),
                Family::Exponential { rate } => -(-p).ln_1p() / rate,
                Family::Lognormal { mu, sigma } => (mu + sigma * normal_quantile(p)).exp(),
                Family::Normal { mu, sigma } => mu + sigma * normal_quantile(p),
                Family::Bernoulli { .. } => self.quantile_at_survival(1.0 - p),
            },
            _ => self.quantile_at_survival(1.0 - p),
        }
    }

    /// Upper quantile at level 1 − s, `s` in (0, 1].
    pub fn quantile_upper_at_survival(&self, s: f64) -> f64 {
        match self.as_discrete_view() {
            Some(d) => d.at_survival_strict(s),
            None => self.quantile_at_survival(s),
        }
    }

    fn as_discrete_view(&self) -> Option<Discrete> {
        match self {
            Distribution::Parametric(Family::Bernoulli { .. }) | Distribution::Discrete(_) | Distribution::Empirical(_) => {
                self.as_discrete()
            }
            _ => None,
        }
    }

    /// Expectation; unsupported when infinite.
    pub fn mean(&self) -> Result<f64> {
        match self {
            Distribution::Discrete(d) => Ok(d.mean()),
            Distribution::Empirical(e) => Ok(e.samples.iter().sum::<f64>() / e.samples.len() as f64),
            Distribution::Parametric(f) => match *f {
                Family::Uniform { a, b } => Ok(0.5 * (a + b)),
                Family::Bernoulli { q } => Ok(q),
                Family::Pareto { alpha, scale } => {
                    if alpha > 1.0 {
                        Ok(alpha * scale / (alpha - 1.0))
                    } else {
                        Err(Error::Unsupported(format!(
                            "Pareto mean is infinite for alpha = {alpha}"
                        )))
                    }
                }
                Family::Exponential { rate } => Ok(1.0 / rate),
                Family::Lognormal { mu, sigma } => Ok((mu + 0.5 * sigma * sigma).exp()),
                Family::Normal { mu, .. } => Ok(mu),
            },
        }
    }

    /// Essential infimum and supremum.
    pub fn support_endpoints(&self) -> (f64, f64) {
        match self {
            Distribution::Discrete(d) => (d.atoms[0], *d.atoms.last().unwrap()),
            Distribution::Empirical(e) => (e.samples[0], *e.samples.last().unwrap()),
            Distribution::Parametric(f) => match *f {
                Family::Uniform { a, b } => (a, b),
                Family::Bernoulli { q } => {
                    let d = Family::bernoulli_discrete(q);
                    (d.atoms[0], *d.atoms.last().unwrap())
                }
                Family::Pareto { scale, .. } => (scale, f64::INFINITY),
                Family::Exponential { .. } | Family::Lognormal { .. } => (0.0, f64::INFINITY),
                Family::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            },
        }
    }

    /// Regular-variation index of the right tail, when of Fréchet type.
    pub fn tail_index(&self) -> Option<f64> {
        match self {
            Distribution::Parametric(Family::Pareto { alpha, .. }) => Some(*alpha),
            _ => None,
        }
    }

    /// Whether the law has finitely many atoms and no continuous part.
    pub fn is_finite_support(&self) -> bool {
        self.as_discrete_view().is_some()
    }

    /// Law of a·X + c for a > 0.
    pub fn affine(&self, a: f64, c: f64) -> Result<Distribution> {
        if !(a >= 0.0 && a.is_finite() && c.is_finite()) {
            return Err(Error::domain("affine map needs a >= 0 and finite c"));
        }
        match self {
            Distribution::Discrete(d) => Ok(d.affine(a, c).into()),
            Distribution::Empirical(e) => {
                Empirical::new(e.samples.iter().map(|x| a * x + c).collect()).map(Into::into)
            }
            Distribution::Parametric(f) if a > 0.0 => match *f {
                Family::Uniform { a: lo, b: hi } => Distribution::uniform(a * lo + c, a * hi + c),
                Family::Normal { mu, sigma } => Distribution::parametric(Family::Normal {
                    mu: a * mu + c,
                    sigma: a * sigma,
                }),
                Family::Bernoulli { q } => Ok(Family::bernoulli_discrete(q).affine(a, c).into()),
                Family::Pareto { alpha, scale } if c == 0.0 => Distribution::pareto(alpha, a * scale),
                _ => Err(Error::Unsupported(format!("affine image of {}", f.label()))),
            },
            Distribution::Parametric(_) => Ok(Distribution::point_mass(c)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn ex31x() -> Distribution {
        Distribution::discrete(&[(0.0, 0.6), (100.0, 0.375), (500.0, 0.025)]).unwrap()
    }

    fn ex31y() -> Distribution {
        Distribution::discrete(&[(0.0, 0.6), (100.0, 0.39), (1100.0, 0.01)]).unwrap()
    }

    #[test]
    fn survival_examples() {
        assert!((Distribution::uniform(0.0, 1.0).unwrap().survival(0.3) - 0.7).abs() < 1e-15);
        assert!((ex31x().survival(50.0) - 0.4).abs() < 1e-15);
        assert_eq!(Distribution::pareto(2.0, 1.0).unwrap().survival(1.0), 1.0);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(ex31x().quantile_lower(0.95).unwrap(), 100.0);
        assert_eq!(ex31x().quantile_lower(0.96).unwrap(), 100.0);
        assert_eq!(Distribution::uniform(0.0, 1.0).unwrap().quantile_lower(0.5).unwrap(), 0.5);
        let b = Distribution::bernoulli(0.02).unwrap();
        assert_eq!(b.quantile_lower(0.99).unwrap(), 1.0);
        assert_eq!(b.quantile_lower(0.975).unwrap(), 0.0);
        // sup{x : F(x) <= 0.6} over cdf 0.6 / 0.975 / 1
        assert_eq!(ex31x().quantile_upper(0.6).unwrap(), 100.0);
        assert_eq!(b.quantile_upper(0.98).unwrap(), 1.0);
        assert_eq!(Distribution::uniform(0.0, 1.0).unwrap().quantile_upper(0.5).unwrap(), 0.5);
    }

    #[test]
    fn quantile_domain_errors() {
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert!(u.quantile_lower(0.0).is_err());
        assert!(u.quantile_lower(1.5).is_err());
        assert!(u.quantile_upper(1.0).is_err());
        assert!(u.quantile_upper(-0.1).is_err());
    }

    #[test]
    fn mean_examples() {
        assert!((ex31x().mean().unwrap() - 50.0).abs() < 1e-12);
        assert!((ex31y().mean().unwrap() - 50.0).abs() < 1e-12);
        assert_eq!(Distribution::uniform(0.0, 1.0).unwrap().mean().unwrap(), 0.5);
        assert!(matches!(
            Distribution::pareto(1.0, 1.0).unwrap().mean(),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn endpoints() {
        assert_eq!(ex31x().support_endpoints(), (0.0, 500.0));
        assert_eq!(Distribution::uniform(0.0, 1.0).unwrap().support_endpoints(), (0.0, 1.0));
        assert_eq!(
            Distribution::pareto(2.0, 1.0).unwrap().support_endpoints(),
            (1.0, f64::INFINITY)
        );
    }

    #[test]
    fn convolution_examples() {
        let b = Distribution::bernoulli(0.02).unwrap().as_discrete().unwrap();
        let s = convolve_discrete(&b, &b);
        assert_eq!(s.atoms(), &[0.0, 1.0, 2.0]);
        let expect = [0.9604, 0.0392, 0.0004];
        for (p, e) in s.probs().iter().zip(expect) {
            assert!((p - e).abs() < 1e-15);
        }

        let zero = Discrete::point_mass(0.0);
        let x = ex31x().as_discrete().unwrap();
        assert_eq!(convolve_discrete(&zero, &x), x);

        let y = ex31y().as_discrete().unwrap();
        let xy = convolve_discrete(&x, &y);
        // brute-force double loop
        let mut brute: Vec<(f64, f64)> = Vec::new();
        for (a, p) in x.pairs() {
            for (b, q) in y.pairs() {
                match brute.iter_mut().find(|e| e.0 == a + b) {
                    Some(e) => e.1 += p * q,
                    None => brute.push((a + b, p * q)),
                }
            }
        }
        brute.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(xy.atoms().len(), 8);
        assert_eq!(brute.len(), 8);
        for ((a, p), (b, q)) in xy.pairs().zip(brute) {
            assert_eq!(a, b);
            assert!((p - q).abs() < 1e-15);
        }
        assert!((xy.probs()[0] - 0.36).abs() < 1e-15);
        let total: f64 = xy.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let m = Distribution::Discrete(xy).mean().unwrap();
        assert!((m - 100.0).abs() < 1e-10);
    }

    #[test]
    fn merges_float_noise() {
        let d = Discrete::from_pairs(&[(0.1 + 0.2, 0.5), (0.3, 0.5)]).unwrap();
        assert_eq!(d.atoms().len(), 1);
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(Discrete::from_pairs(&[(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(Discrete::from_pairs(&[(0.0, -0.5), (1.0, 1.5)]).is_err());
    }

    #[test]
    fn continuous_quantiles_coincide() {
        let fams = [
            Distribution::uniform(-1.0, 3.0).unwrap(),
            Distribution::pareto(2.5, 2.0).unwrap(),
            Distribution::parametric(Family::Exponential { rate: 0.7 }).unwrap(),
            Distribution::parametric(Family::Lognormal { mu: 0.3, sigma: 1.2 }).unwrap(),
            Distribution::parametric(Family::Normal { mu: -2.0, sigma: 3.0 }).unwrap(),
        ];
        for d in &fams {
            for i in 1..1000 {
                let p = i as f64 / 1000.0;
                let lo = d.quantile_lower(p).unwrap();
                let hi = d.quantile_upper(p).unwrap();
                assert!((lo - hi).abs() <= 1e-12 * lo.abs().max(1.0), "{d:?} {p}");
                let s = d.survival(lo);
                assert!((s - (1.0 - p)).abs() < 1e-9, "{d:?} p={p} s={s}");
            }
        }
    }

    #[test]
    fn quantile_survival_duality_discrete() {
        let d = ex31x();
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let q = d.quantile_lower(p).unwrap();
            assert!(d.survival(q) <= 1.0 - p + 1e-12);
            assert!(d.survival(q - 1e-9) >= 1.0 - p - 1e-12);
            assert!(d.atoms_contains(q));
            assert!(q <= d.quantile_upper(p).unwrap());
        }
    }

    impl Distribution {
        fn atoms_contains(&self, x: f64) -> bool {
            self.as_discrete().unwrap().atoms().contains(&x)
        }
    }

    #[test]
    fn empirical_order_statistics() {
        let e: Distribution = Empirical::new(vec![3.0, 1.0, 2.0, 4.0]).unwrap().into();
        assert_eq!(e.quantile_lower(0.25).unwrap(), 1.0);
        assert_eq!(e.quantile_lower(0.26).unwrap(), 2.0);
        assert_eq!(e.quantile_upper(0.25).unwrap(), 2.0);
        assert_eq!(e.quantile_lower(1.0).unwrap(), 4.0);
        assert_eq!(e.survival(2.0), 0.5);
        assert_eq!(e.mean().unwrap(), 2.5);
    }

    #[test]
    fn csv_ingestion() {
        let text = "value\n1.5\n\n-2\n3e1\n";
        let e = Empirical::from_csv(text.as_bytes()).unwrap();
        assert_eq!(e.samples(), &[-2.0, 1.5, 30.0]);
        let err = Empirical::from_csv("1\n2\n  abc\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn affine_discrete() {
        let d = ex31x().affine(2.0, -10.0).unwrap();
        assert_eq!(d.support_endpoints(), (-10.0, 990.0));
        assert!((d.mean().unwrap() - 90.0).abs() < 1e-12);
    }
}
