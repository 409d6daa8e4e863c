//! Distribution descriptors, joint-model specs and experiment configs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{JointModel, StepMap};
use crate::copula::{Copula, CopulaFamily};
use crate::distributions::{Distribution, Empirical, Family};
use crate::error::{Error, Result};

fn bad(column: usize, msg: impl Into<String>) -> Error {
    Error::parse(1, column, msg)
}

/// Comma-separated numbers starting at byte `offset` of the descriptor.
fn numbers(body: &str, offset: usize, want: usize, what: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut col = offset + 1;
    for part in body.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| bad(col, format!("expected a number in {what}, found '{part}'")))?;
        out.push(v);
        col += part.len() + 1;
    }
    if out.len() != want {
        return Err(bad(offset + 1, format!("{what} takes {want} parameter(s), got {}", out.len())));
    }
    Ok(out)
}

/// The two loss tables used by the `example:3.1X` and `example:3.1Y`
/// descriptors.
pub fn example_31(which: char) -> Distribution {
    let pairs: &[(f64, f64)] = match which {
        'X' => &[(0.0, 0.6), (100.0, 0.375), (500.0, 0.025)],
        _ => &[(0.0, 0.6), (100.0, 0.39), (1100.0, 0.01)],
    };
    Distribution::discrete(pairs).expect("valid table")
}

fn read_samples(path: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::parse(1, 1, format!("{other:?}")),
        })?;
    let mut xs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(i + 1, 1, e.to_string()))?;
        let Some(field) = rec.get(0).map(str::trim) else { continue };
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => xs.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::parse(i + 1, 1, format!("not a number: '{field}'"))),
        }
    }
    Ok(xs)
}

/// Parse a distribution descriptor such as `discrete:0:0.6,100:0.4`,
/// `uniform:0,1`, `pareto:2,1`, `bernoulli:0.02`, `csv:losses.csv` or
/// `example:3.1X`.
pub fn parse_distribution(desc: &str) -> Result<Distribution> {
    let desc = desc.trim();
    let Some((kind, body)) = desc.split_once(':') else {
        return Err(bad(1, format!("expected '<kind>:<parameters>', found '{desc}'")));
    };
    let off = kind.len() + 1;
    match kind {
        "discrete" => {
            let mut pairs = Vec::new();
            let mut col = off + 1;
            for item in body.split(',') {
                let (v, p) = item
                    .split_once(':')
                    .ok_or_else(|| bad(col, format!("expected value:probability, found '{item}'")))?;
                let v: f64 = v.trim().parse().map_err(|_| bad(col, format!("bad value '{v}'")))?;
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| bad(col, format!("bad probability '{p}'")))?;
                pairs.push((v, p));
                col += item.len() + 1;
            }
            Distribution::discrete(&pairs)
        }
        "uniform" => {
            let v = numbers(body, off, 2, "uniform")?;
            Distribution::uniform(v[0], v[1])
        }
        "pareto" => {
            let v = numbers(body, off, 2, "pareto")?;
            Distribution::pareto(v[0], v[1])
        }
        "bernoulli" => Distribution::bernoulli(numbers(body, off, 1, "bernoulli")?[0]),
        "exponential" => Distribution::parametric(Family::Exponential {
            rate: numbers(body, off, 1, "exponential")?[0],
        }),
        "normal" => {
            let v = numbers(body, off, 2, "normal")?;
            Distribution::parametric(Family::Normal { mu: v[0], sigma: v[1] })
        }
        "lognormal" => {
            let v = numbers(body, off, 2, "lognormal")?;
            Distribution::parametric(Family::Lognormal { mu: v[0], sigma: v[1] })
        }
        "csv" => Ok(Empirical::new(read_samples(body)?)?.into()),
        "example" => match body {
            "3.1X" => Ok(example_31('X')),
            "3.1Y" => Ok(example_31('Y')),
            _ => Err(bad(off + 1, format!("unknown example distribution '{body}'"))),
        },
        _ => Err(bad(1, format!("unknown distribution kind '{kind}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepMapSpec {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DependenceSpec {
    Independent,
    Comonotone,
    Copula { copula: CopulaFamily },
    /// Joint pmf as (value tuple, probability) pairs.
    Explicit { pmf: Vec<(Vec<f64>, f64)> },
    /// Step maps of one common uniform.
    Functional { maps: Vec<StepMapSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    /// Distribution descriptors; derived from the dependence for the
    /// explicit and functional kinds.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub marginals: Vec<String>,
    pub dependence: DependenceSpec,
}

impl JointSpec {
    pub fn build(&self) -> Result<JointModel> {
        let marginals = || -> Result<Vec<Distribution>> { self.marginals.iter().map(|m| parse_distribution(m)).collect() };
        let j = match &self.dependence {
            DependenceSpec::Independent => JointModel::independent(marginals()?)?,
            DependenceSpec::Comonotone => JointModel::comonotone(marginals()?)?,
            DependenceSpec::Copula { copula } => {
                let mut m = marginals()?;
                if m.len() != 2 {
                    return Err(Error::domain(format!("a copula couples two risks, got {}", m.len())));
                }
                let y = m.pop().unwrap();
                let x = m.pop().unwrap();
                JointModel::copula(Copula::new(*copula)?, x, y)?
            }
            DependenceSpec::Explicit { pmf } => JointModel::explicit(pmf.clone())?,
            DependenceSpec::Functional { maps } => JointModel::functional(
                maps.iter()
                    .map(|m| StepMap::new(m.breaks.clone(), m.values.clone()))
                    .collect::<Result<_>>()?,
            )?,
        };
        if !self.marginals.is_empty()
            && matches!(self.dependence, DependenceSpec::Explicit { .. } | DependenceSpec::Functional { .. })
        {
            let declared = marginals()?;
            if declared.len() != j.k() {
                return Err(Error::domain(format!("{} marginals declared for {} risks", declared.len(), j.k())));
            }
            return JointModel::new(declared, j.dependence().clone());
        }
        Ok(j)
    }

    /// Built-in joint models: `example:4.1` (two independent
    /// Bernoulli(0.02)), `example:4.2` (the 1000-loss coupling on one
    /// uniform), `example:4.3` (two independent uniforms) and `example:4.4`
    /// (two independent Pareto(1, 1)).
    pub fn example(id: &str) -> Option<JointSpec> {
        let indep = |m: &str| JointSpec {
            marginals: vec![m.to_string(), m.to_string()],
            dependence: DependenceSpec::Independent,
        };
        Some(match id {
            "4.1" => indep("bernoulli:0.02"),
            "4.2" => JointSpec {
                marginals: Vec::new(),
                dependence: DependenceSpec::Functional {
                    maps: vec![
                        StepMapSpec {
                            breaks: vec![0.04, 1.0],
                            values: vec![1000.0, 0.0],
                        },
                        StepMapSpec {
                            breaks: vec![0.96, 1.0],
                            values: vec![0.0, 1000.0],
                        },
                    ],
                },
            },
            "4.3" => indep("uniform:0,1"),
            "4.4" => indep("pareto:1,1"),
            _ => return None,
        })
    }

    /// `example:<id>` or the path of a JSON file holding a [`JointSpec`].
    pub fn resolve(arg: &str) -> Result<JointSpec> {
        if let Some(id) = arg.strip_prefix("example:") {
            return JointSpec::example(id).ok_or_else(|| bad(9, format!("unknown example joint model '{id}'")));
        }
        let text = std::fs::read_to_string(Path::new(arg))?;
        from_json(&text)
    }
}

fn default_curve_grid() -> usize {
    101
}

fn default_classify_grid() -> usize {
    2000
}

fn default_alpha() -> f64 {
    0.95
}

/// One run of the tool, as read by `drisk run <config.json>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Measure {
        distortion: String,
        dist: String,
        #[serde(default)]
        form: Form,
    },
    Curve {
        distortion: String,
        #[serde(default = "default_curve_grid")]
        grid: usize,
    },
    Classify {
        distortion: String,
        #[serde(default = "default_classify_grid")]
        grid: usize,
    },
    Subadd {
        distortion: String,
        joint: JointArg,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    RatioScan {
        joint: JointArg,
        p_start: f64,
        p_end: f64,
        points: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Example {
        id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

/// A joint model given inline or by reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JointArg {
    /// `example:<id>` or a path to a JSON spec.
    Ref(String),
    Inline(JointSpec),
}

impl JointArg {
    pub fn spec(&self) -> Result<JointSpec> {
        match self {
            JointArg::Ref(s) => JointSpec::resolve(s),
            JointArg::Inline(j) => Ok(j.clone()),
        }
    }
}

/// Which Choquet representation `measure` evaluates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    #[default]
    Survival,
    Quantile,
}

/// Deserialize JSON, mapping serde's position to a parse error.
pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))
}
