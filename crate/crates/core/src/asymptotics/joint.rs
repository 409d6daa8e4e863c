use rayon::prelude::*;

use crate::copula::{open01, stream_rng};
use crate::copula::Copula;
use crate::distributions::{fsum, Discrete, Distribution, Empirical, Family, MERGE_TOL};
use crate::error::{Error, Result};
use crate::measures::Method;

/// Samples per parallel chunk.
pub const CHUNK: usize = 1 << 16;

/// Monte Carlo settings; results are a pure function of these and the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
}

/// A step function of the common uniform U: `values[i]` applies for
/// U in (breaks[i−1], breaks[i]], with breaks[−1] = 0 and the last break 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMap {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepMap {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != values.len() {
            return Err(Error::domain("step map needs one value per break"));
        }
        if breaks.last() != Some(&1.0) {
            return Err(Error::domain("step map breaks must end at 1"));
        }
        let mut prev = 0.0;
        for &b in &breaks {
            if !(b > prev) {
                return Err(Error::domain("step map breaks must increase strictly within (0,1]"));
            }
            prev = b;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("step map values must be finite"));
        }
        Ok(StepMap { breaks, values })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, u: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b < u).min(self.values.len() - 1);
        self.values[i]
    }

    pub fn law(&self) -> Discrete {
        let mut prev = 0.0;
        let pairs: Vec<(f64, f64)> = self
            .breaks
            .iter()
            .zip(&self.values)
            .map(|(&b, &v)| {
                let w = b - prev;
                prev = b;
                (v, w)
            })
            .collect();
        Discrete::from_pairs(&pairs).expect("widths sum to 1")
    }
}

#[derive(Debug, Clone)]
pub enum Dependence {
    Independent,
    Comonotone,
    /// Bivariate copula on the marginal distribution functions.
    Copula(Copula),
    /// Probability mass function over value tuples.
    ExplicitDiscrete(Vec<(Vec<f64>, f64)>),
    /// X_i = map_i(U) for one uniform U.
    FunctionalOfUniform(Vec<StepMap>),
}

/// Joint law of (X_1, …, X_k).
#[derive(Debug, Clone)]
pub struct JointModel {
    marginals: Vec<Distribution>,
    dependence: Dependence,
}

/// Law of the sum and how it was obtained.
#[derive(Debug, Clone)]
pub struct SumLaw {
    pub distribution: Distribution,
    pub method: Method,
}

fn same_law(a: &Discrete, b: &Discrete) -> bool {
    a.atoms().len() == b.atoms().len()
        && a.pairs().zip(b.pairs()).all(|(x, y)| (x.0 - y.0).abs() <= 1e-12 && (x.1 - y.1).abs() <= 1e-12)
}

fn pmf_from_pairs(pairs: Vec<(f64, f64)>) -> Result<Discrete> {
    let total = fsum(pairs.iter().map(|p| p.1));
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("joint masses sum to {total}, not 1")));
    }
    let pairs: Vec<(f64, f64)> = pairs.into_iter().map(|(x, p)| (x, p / total)).collect();
    Discrete::from_pairs(&pairs)
}

impl JointModel {
    pub fn new(marginals: Vec<Distribution>, dependence: Dependence) -> Result<Self> {
        let k = marginals.len();
        if k == 0 {
            return Err(Error::domain("joint model needs at least one risk"));
        }
        match &dependence {
            Dependence::Copula(_) if k != 2 => {
                return Err(Error::domain(format!("copula coupling needs k = 2, got {k}")));
            }
            Dependence::ExplicitDiscrete(pmf) => {
                let derived = Self::explicit_marginals(pmf, k)?;
                for (i, (m, d)) in marginals.iter().zip(&derived).enumerate() {
                    let ok = m.as_discrete().is_some_and(|m| same_law(&m, d));
                    if !ok {
                        return Err(Error::domain(format!("joint pmf does not marginalize to risk {}", i + 1)));
                    }
                }
            }
            Dependence::FunctionalOfUniform(maps) => {
                if maps.len() != k {
                    return Err(Error::domain("one step map per risk is required"));
                }
                for (i, (m, f)) in marginals.iter().zip(maps).enumerate() {
                    let ok = m.as_discrete().is_some_and(|m| same_law(&m, &f.law()));
                    if !ok {
                        return Err(Error::domain(format!("step map {} does not match its marginal", i + 1)));
                    }
                }
            }
            _ => {}
        }
        Ok(JointModel { marginals, dependence })
    }

    pub fn independent(marginals: Vec<Distribution>) -> Result<Self> {
        Self::new(marginals, Dependence::Independent)
    }

    pub fn comonotone(marginals: Vec<Distribution>) -> Result<Self> {
        Self::new(marginals, Dependence::Comonotone)
    }

    pub fn copula(c: Copula, x: Distribution, y: Distribution) -> Result<Self> {
        Self::new(vec![x, y], Dependence::Copula(c))
    }

    /// Joint law given by its pmf; marginals are derived.
    pub fn explicit(pmf: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let k = pmf.first().map(|t| t.0.len()).unwrap_or(0);
        let marginals = Self::explicit_marginals(&pmf, k)?.into_iter().map(Distribution::from).collect();
        Self::new(marginals, Dependence::ExplicitDiscrete(pmf))
    }

    /// X_i = maps[i](U); marginals are derived.
    pub fn functional(maps: Vec<StepMap>) -> Result<Self> {
        let marginals = maps.iter().map(|m| Distribution::from(m.law())).collect();
        Self::new(marginals, Dependence::FunctionalOfUniform(maps))
    }

    fn explicit_marginals(pmf: &[(Vec<f64>, f64)], k: usize) -> Result<Vec<Discrete>> {
        if k == 0 || pmf.iter().any(|t| t.0.len() != k) {
            return Err(Error::domain("joint pmf tuples must all have the model's length"));
        }
        (0..k)
            .map(|i| Discrete::from_pairs(&pmf.iter().map(|(v, p)| (v[i], *p)).collect::<Vec<_>>()))
            .collect()
    }

    pub fn k(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Distribution] {
        &self.marginals
    }

    pub fn dependence(&self) -> &Dependence {
        &self.dependence
    }

    /// The joint pmf, when the joint law is finitely supported and exactly
    /// available.
    pub fn joint_pmf(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        match &self.dependence {
            Dependence::ExplicitDiscrete(pmf) => Some(pmf.clone()),
            Dependence::FunctionalOfUniform(maps) => {
                let mut cuts: Vec<f64> = maps.iter().flat_map(|m| m.breaks.iter().copied()).collect();
                cuts.sort_by(f64::total_cmp);
                cuts.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
                let mut prev = 0.0;
                Some(
                    cuts.into_iter()
                        .map(|c| {
                            let mid = 0.5 * (prev + c);
                            let w = c - prev;
                            prev = c;
                            (maps.iter().map(|m| m.eval(mid)).collect(), w)
                        })
                        .collect(),
                )
            }
            Dependence::Independent => {
                let ds: Option<Vec<Discrete>> = self.marginals.iter().map(|m| m.as_discrete()).collect();
                let mut rows: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
                for d in ds? {
                    rows = rows
                        .into_iter()
                        .flat_map(|(v, p)| {
                            d.pairs().map(move |(x, q)| {
                                let mut v = v.clone();
                                v.push(x);
                                (v, p * q)
                            })
                        })
                        .collect();
                }
                Some(rows)
            }
            Dependence::Comonotone => {
                let ds: Option<Vec<Discrete>> = self.marginals.iter().map(|m| m.as_discrete()).collect();
                let ds = ds?;
                let mut levels: Vec<f64> = ds.iter().flat_map(|d| d.tails().iter().copied()).collect();
                levels.push(1.0);
                levels.sort_by(|a, b| b.total_cmp(a));
                levels.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
                Some(
                    levels
                        .windows(2)
                        .map(|w| (ds.iter().map(|d| d.at_survival(w[1])).collect(), w[0] - w[1]))
                        .collect(),
                )
            }
            Dependence::Copula(c) => {
                let x = self.marginals[0].as_discrete()?;
                let y = self.marginals[1].as_discrete()?;
                let fx: Vec<f64> = std::iter::once(0.0).chain(x.tails().iter().map(|t| 1.0 - t)).collect();
                let fy: Vec<f64> = std::iter::once(0.0).chain(y.tails().iter().map(|t| 1.0 - t)).collect();
                let mut rows = Vec::new();
                for (i, &xi) in x.atoms().iter().enumerate() {
                    for (j, &yj) in y.atoms().iter().enumerate() {
                        let p = c.eval(fx[i + 1], fy[j + 1]) - c.eval(fx[i], fy[j + 1]) - c.eval(fx[i + 1], fy[j])
                            + c.eval(fx[i], fy[j]);
                        if p > 0.0 {
                            rows.push((vec![xi, yj], p));
                        }
                    }
                }
                Some(rows)
            }
        }
    }

    fn comonotone_closed_form(&self) -> Option<Distribution> {
        let fams: Option<Vec<Family>> = self.marginals.iter().map(|m| m.family()).collect();
        let fams = fams?;
        let first = fams[0];
        let d = match first {
            Family::Uniform { .. } => {
                let (mut a, mut b) = (0.0, 0.0);
                for f in &fams {
                    let Family::Uniform { a: fa, b: fb } = *f else { return None };
                    a += fa;
                    b += fb;
                }
                Distribution::uniform(a, b)
            }
            Family::Normal { .. } => {
                let (mut mu, mut sigma) = (0.0, 0.0);
                for f in &fams {
                    let Family::Normal { mu: m, sigma: s } = *f else { return None };
                    mu += m;
                    sigma += s;
                }
                Distribution::parametric(Family::Normal { mu, sigma })
            }
            Family::Exponential { .. } => {
                let mut mean = 0.0;
                for f in &fams {
                    let Family::Exponential { rate } = *f else { return None };
                    mean += 1.0 / rate;
                }
                Distribution::parametric(Family::Exponential { rate: 1.0 / mean })
            }
            Family::Pareto { alpha, .. } => {
                let mut scale = 0.0;
                for f in &fams {
                    let Family::Pareto { alpha: a, scale: s } = *f else { return None };
                    if a != alpha {
                        return None;
                    }
                    scale += s;
                }
                Distribution::pareto(alpha, scale)
            }
            Family::Lognormal { sigma, .. } => {
                let mut total = 0.0;
                for f in &fams {
                    let Family::Lognormal { mu, sigma: s } = *f else { return None };
                    if s != sigma {
                        return None;
                    }
                    total += mu.exp();
                }
                Distribution::parametric(Family::Lognormal { mu: total.ln(), sigma })
            }
            Family::Bernoulli { .. } => return None,
        };
        d.ok()
    }

    /// Law of X_1 + … + X_k: exact for finitely supported joints, closed form
    /// for comonotone sums within one family, Monte Carlo otherwise.
    pub fn sum_distribution(&self, mc: Option<McConfig>) -> Result<SumLaw> {
        if let Some(pmf) = self.joint_pmf() {
            let pairs = pmf.into_iter().map(|(v, p)| (fsum(v), p)).collect();
            return Ok(SumLaw {
                distribution: pmf_from_pairs(pairs)?.into(),
                method: Method::ExactStieltjes,
            });
        }
        if matches!(self.dependence, Dependence::Comonotone) {
            if let Some(d) = self.comonotone_closed_form() {
                return Ok(SumLaw {
                    distribution: d,
                    method: Method::ClosedForm,
                });
            }
        }
        let Some(cfg) = mc else {
            return Err(Error::Unsupported(
                "no exact law for this sum; supply Monte Carlo settings".into(),
            ));
        };
        let sums = self.simulate(cfg, 0, |x| fsum(x.iter().copied()));
        Ok(SumLaw {
            distribution: Empirical::new(sums)?.into(),
            method: Method::MonteCarlo,
        })
    }

    /// Draw `cfg.samples` rows and map each through `f`. Chunk c of grid
    /// point `point` uses stream point·2³² + c.
    pub fn simulate<T, F>(&self, cfg: McConfig, point: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64]) -> T + Sync,
    {
        let n = cfg.samples;
        let chunks = n.div_ceil(CHUNK);
        let cum: Option<Vec<f64>> = match &self.dependence {
            Dependence::ExplicitDiscrete(pmf) => {
                let mut acc = 0.0;
                Some(
                    pmf.iter()
                        .map(|t| {
                            acc += t.1;
                            acc
                        })
                        .collect(),
                )
            }
            _ => None,
        };
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = stream_rng(cfg.seed, (point << 32) | c as u64);
                let len = CHUNK.min(n - c * CHUNK);
                let mut row = vec![0.0; self.k()];
                let mut out = Vec::with_capacity(len);
                for _ in 0..len {
                    self.draw(&mut rng, &mut row, cum.as_deref());
                    out.push(f(&row));
                }
                out
            })
            .collect()
    }

    fn draw<R: rand::Rng>(&self, rng: &mut R, row: &mut [f64], cum: Option<&[f64]>) {
        match &self.dependence {
            Dependence::Independent => {
                for (x, m) in row.iter_mut().zip(&self.marginals) {
                    *x = m.quantile_at_survival(open01(rng));
                }
            }
            Dependence::Comonotone => {
                let s = open01(rng);
                for (x, m) in row.iter_mut().zip(&self.marginals) {
                    *x = m.quantile_at_survival(s);
                }
            }
            Dependence::Copula(c) => {
                let (u, v) = c.sample_one(rng);
                row[0] = self.marginals[0].quantile_at_survival(1.0 - u);
                row[1] = self.marginals[1].quantile_at_survival(1.0 - v);
            }
            Dependence::FunctionalOfUniform(maps) => {
                let u = open01(rng);
                for (x, m) in row.iter_mut().zip(maps) {
                    *x = m.eval(u);
                }
            }
            Dependence::ExplicitDiscrete(pmf) => {
                let cum = cum.expect("cumulative pmf");
                let u = open01(rng) * cum[cum.len() - 1];
                let i = cum.partition_point(|&c| c < u).min(pmf.len() - 1);
                row.copy_from_slice(&pmf[i].0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::CopulaFamily;

    fn bern(q: f64) -> Distribution {
        Distribution::bernoulli(q).unwrap()
    }

    #[test]
    fn independent_bernoulli_sum() {
        let j = JointModel::independent(vec![bern(0.02), bern(0.02)]).unwrap();
        let s = j.sum_distribution(None).unwrap();
        let d = s.distribution.as_discrete().unwrap();
        let want = [(0.0, 0.9604), (1.0, 0.0392), (2.0, 0.0004)];
        assert_eq!(d.atoms().len(), 3);
        for ((x, p), (wx, wp)) in d.pairs().zip(want) {
            assert_eq!(x, wx);
            assert!((p - wp).abs() < 1e-15);
        }
    }

    #[test]
    fn functional_coupling_sum() {
        let x = StepMap::new(vec![0.04, 1.0], vec![1000.0, 0.0]).unwrap();
        let y = StepMap::new(vec![0.96, 1.0], vec![0.0, 1000.0]).unwrap();
        let j = JointModel::functional(vec![x, y]).unwrap();
        let d = j.sum_distribution(None).unwrap().distribution.as_discrete().unwrap();
        let pairs: Vec<_> = d.pairs().collect();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].0, 0.0);
        assert!((pairs[0].1 - 0.92).abs() < 1e-12);
        assert_eq!(pairs[1].0, 1000.0);
        assert!((pairs[1].1 - 0.08).abs() < 1e-12);
    }

    #[test]
    fn comonotone_uniforms_sum_to_uniform() {
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        let j = JointModel::comonotone(vec![u.clone(), u]).unwrap();
        let s = j.sum_distribution(None).unwrap();
        assert_eq!(s.method, Method::ClosedForm);
        assert_eq!(s.distribution, Distribution::uniform(0.0, 2.0).unwrap());
    }

    #[test]
    fn comonotone_discrete_adds_quantiles() {
        let x = Distribution::discrete(&[(0.0, 0.5), (10.0, 0.5)]).unwrap();
        let y = Distribution::discrete(&[(1.0, 0.25), (2.0, 0.5), (3.0, 0.25)]).unwrap();
        let j = JointModel::comonotone(vec![x.clone(), y.clone()]).unwrap();
        let s = j.sum_distribution(None).unwrap().distribution;
        for p in [0.1, 0.25, 0.3, 0.5, 0.6, 0.75, 0.9, 1.0] {
            let want = x.quantile_lower(p).unwrap() + y.quantile_lower(p).unwrap();
            assert_eq!(s.quantile_lower(p).unwrap(), want, "p={p}");
        }
    }

    #[test]
    fn copula_volumes_match_independence() {
        let c = Copula::new(CopulaFamily::Independence).unwrap();
        let j = JointModel::copula(c, bern(0.3), bern(0.5)).unwrap();
        let pmf = j.joint_pmf().unwrap();
        let mass: f64 = pmf.iter().map(|t| t.1).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        let p11 = pmf.iter().find(|t| t.0 == vec![1.0, 1.0]).unwrap().1;
        assert!((p11 - 0.15).abs() < 1e-12);
    }

    #[test]
    fn explicit_pmf_must_marginalize() {
        let pmf = vec![(vec![0.0, 0.0], 0.5), (vec![1.0, 1.0], 0.5)];
        assert!(JointModel::explicit(pmf.clone()).is_ok());
        let wrong = vec![bern(0.4), bern(0.5)];
        assert!(JointModel::new(wrong, Dependence::ExplicitDiscrete(pmf)).is_err());
    }

    #[test]
    fn simulation_is_deterministic_and_chunked() {
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        let j = JointModel::independent(vec![u.clone(), u]).unwrap();
        let cfg = McConfig {
            samples: 3 * CHUNK + 17,
            seed: 11,
        };
        let a = j.simulate(cfg, 0, |x| x[0] + x[1]);
        let b = j.simulate(cfg, 0, |x| x[0] + x[1]);
        assert_eq!(a.len(), cfg.samples);
        assert_eq!(a, b);
        let c = j.simulate(cfg, 1, |x| x[0] + x[1]);
        assert_ne!(a, c);
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!((mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn copula_needs_two_risks() {
        let c = Copula::new(CopulaFamily::Clayton { alpha: 2.0 }).unwrap();
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert!(JointModel::new(vec![u.clone(), u.clone(), u], Dependence::Copula(c)).is_err());
    }

    #[test]
    fn step_map_convention() {
        let m = StepMap::new(vec![0.04, 1.0], vec![1000.0, 0.0]).unwrap();
        assert_eq!(m.eval(0.04), 1000.0);
        assert_eq!(m.eval(0.0400001), 0.0);
        assert!(StepMap::new(vec![0.5, 0.9], vec![1.0, 2.0]).is_err());
    }
}
