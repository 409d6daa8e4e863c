//! Canned scenarios for `drisk example <id>`.

use crate::asymptotics::{uniform_sum_closed_form, var_ratio, JointModel, McConfig};
use crate::distortion::Distortion;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::format::num;
use crate::measures::{choquet, glue_var, tvar, var};

use super::config::{example_31, JointSpec};

pub const EXAMPLE_IDS: [&str; 7] = ["3.1", "3.2", "3.3", "4.1", "4.2", "4.3", "4.4"];

const DEFAULT_SEED: u64 = 20_240_601;

/// How a computed value is compared with its expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    Within { expected: f64, tol: f64 },
    AtMost(f64),
    Between(f64, f64),
    Above(f64),
}

impl Check {
    fn passes(&self, x: f64) -> bool {
        match *self {
            Check::Within { expected, tol } => (x - expected).abs() <= tol,
            Check::AtMost(b) => x <= b,
            Check::Between(lo, hi) => lo <= x && x <= hi,
            Check::Above(b) => x > b,
        }
    }

    fn expected(&self) -> String {
        match *self {
            Check::Within { expected, .. } => num(expected),
            Check::AtMost(b) => format!("<={}", num(b)),
            Check::Between(lo, hi) => format!("[{};{}]", num(lo), num(hi)),
            Check::Above(b) => format!(">{}", num(b)),
        }
    }

    fn tolerance(&self) -> String {
        match *self {
            Check::Within { tol, .. } => num(tol),
            _ => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub computed: f64,
    pub check: Check,
}

impl Row {
    pub fn passes(&self) -> bool {
        self.check.passes(self.computed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleReport {
    pub id: String,
    pub rows: Vec<Row>,
}

impl ExampleReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(Row::passes)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,computed,expected,tolerance,status\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.quantity,
                num(r.computed),
                r.check.expected(),
                r.check.tolerance(),
                if r.passes() { "ok" } else { "MISMATCH" }
            ));
        }
        out
    }
}

struct Rows(Vec<Row>);

impl Rows {
    fn exact(&mut self, q: impl Into<String>, computed: f64, expected: f64) {
        self.within(q, computed, expected, 1e-10);
    }

    fn within(&mut self, q: impl Into<String>, computed: f64, expected: f64, tol: f64) {
        self.push(q, computed, Check::Within { expected, tol });
    }

    fn push(&mut self, q: impl Into<String>, computed: f64, check: Check) {
        self.0.push(Row {
            quantity: q.into(),
            computed,
            check,
        });
    }
}

fn example_31_rows(rows: &mut Rows) -> Result<()> {
    let gp = Distortion::compose(&Distortion::tvar(0.95)?, &Distortion::tvar(0.95)?);
    for (name, top) in [('X', 500.0), ('Y', 1100.0)] {
        let d = example_31(name);
        rows.exact(format!("E[{name}]"), d.mean()?, 50.0);
        rows.exact(format!("VaR_0.95[{name}]"), var(&d, 0.95)?, 100.0);
        rows.exact(format!("VaR_0.96[{name}]"), var(&d, 0.96)?, 100.0);
        rows.exact(format!("TVaR_0.95[{name}]"), tvar(&d, 0.95)?, 300.0);
        rows.exact(format!("TVaR_0.96[{name}]"), tvar(&d, 0.96)?, 350.0);
        rows.exact(format!("rho_gp[{name}]"), choquet(&gp, &d)?.value, top);
    }
    Ok(())
}

fn example_32_rows(rows: &mut Rows) -> Result<()> {
    let w = [0.25; 4];
    let (a, b) = (0.95, 0.96);
    let want = 0.25 * (350.0 + 300.0 + 100.0 + 100.0);
    for name in ['X', 'Y'] {
        let d = example_31(name);
        rows.exact(format!("GlueVaR_0.95_0.96[{name}]"), glue_var(w, a, b, &d)?.value, want);
    }
    for (name, top) in [('X', 500.0), ('Y', 1100.0)] {
        let d = example_31(name);
        rows.exact(format!("esssup[{name}]"), d.support_endpoints().1, top);
    }
    Ok(())
}

/// λ·1(u > 0) + (1 − λ)[α(1−β)u + αβ·1(u > 1−p) + (1−α)·min(u/(1−p), 1)].
pub fn example_33_distortion(lambda: f64, alpha: f64, beta: f64, p: f64) -> Result<Distortion> {
    let g = Distortion::mix(&[
        (alpha * (1.0 - beta), Distortion::identity()),
        (alpha * beta, Distortion::var(p)?),
        (1.0 - alpha, Distortion::tvar(p)?),
    ])?;
    Distortion::mix(&[(lambda, Distortion::var(1.0)?), (1.0 - lambda, g)])
}

fn example_33_rows(rows: &mut Rows) -> Result<()> {
    for (l, a, b) in [(0.5, 1.0, 0.0), (0.5, 0.5, 0.5)] {
        let base = 50.0 * a * b - 250.0 * a + 300.0;
        let g = example_33_distortion(l, a, b, 0.95)?;
        for (name, top) in [('X', 500.0), ('Y', 1100.0)] {
            let want = top * l + (1.0 - l) * base;
            let got = choquet(&g, &example_31(name))?.value;
            rows.exact(format!("rho_glambda[{name}] lambda={l} alpha={a} beta={b}"), got, want);
        }
    }
    for a in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for b in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let got = choquet(&example_33_distortion(0.0, a, b, 0.95)?, &example_31('X'))?.value;
            rows.exact(format!("rho_g[X] alpha={a} beta={b}"), got, 50.0 * a * b - 250.0 * a + 300.0);
        }
    }
    Ok(())
}

fn joint(id: &str) -> Result<JointModel> {
    JointSpec::example(id).expect("built-in example").build()
}

fn example_41_rows(rows: &mut Rows) -> Result<()> {
    let j = joint("4.1")?;
    let sum = j.sum_distribution(None)?.distribution;
    for (x, p) in [(0.0, 0.9604), (1.0, 0.0392), (2.0, 0.0004)] {
        let mass = sum.cdf(x) - sum.cdf(x - 0.5);
        rows.within(format!("P(X+Y={x})"), mass, p, 1e-15);
    }
    for p in [0.981, 0.99, 0.9995] {
        rows.exact(format!("VaR_{p}[X+Y]"), sum.quantile_lower(p)?, 1.0);
    }
    for p in [0.9997, 0.9999] {
        rows.exact(format!("VaR_{p}[X+Y]"), sum.quantile_lower(p)?, 2.0);
    }
    for p in [0.981, 0.99, 0.9995, 0.9997, 0.9999] {
        rows.push(format!("R({p})"), var_ratio(&j, p, None)?.ratio, Check::AtMost(1.0));
    }
    Ok(())
}

fn example_42_rows(rows: &mut Rows) -> Result<()> {
    let j = joint("4.2")?;
    let sum = j.sum_distribution(None)?.distribution;
    let (x, y) = (&j.marginals()[0], &j.marginals()[1]);
    rows.exact("VaR_0.95[X+Y]", sum.quantile_lower(0.95)?, 1000.0);
    rows.exact("VaR_0.95[X]", x.quantile_lower(0.95)?, 0.0);
    rows.exact("VaR_0.95[Y]", y.quantile_lower(0.95)?, 0.0);
    let flagged = matches!(var_ratio(&j, 0.95, None), Err(Error::ZeroDenominator { numerator }) if numerator > 0.0);
    rows.exact("superadditive_at_0.95", flagged as u8 as f64, 1.0);
    for p in [0.97, 0.99] {
        let r = var_ratio(&j, p, None)?;
        rows.exact(format!("VaR_{p}[X+Y]"), r.numerator, 1000.0);
        rows.exact(format!("VaR_{p}[X]+VaR_{p}[Y]"), r.denominator, 2000.0);
        rows.push(format!("R({p})"), r.ratio, Check::AtMost(1.0));
    }
    Ok(())
}

fn example_43_rows(rows: &mut Rows, cfg: McConfig) -> Result<()> {
    let j = joint("4.3")?;
    for p in [0.5, 0.875, 0.99] {
        let exact = uniform_sum_closed_form(p)?;
        let r = var_ratio(&j, p, Some(cfg))?;
        // the ratio interval is scaled back to the sum
        let ci = r.ci_halfwidth * r.denominator;
        rows.within(format!("VaR_{p}[X+Y] mc (ci {})", num(ci)), r.numerator, exact, ci.max(5e-3));
    }
    Ok(())
}

fn example_44_rows(rows: &mut Rows, cfg: McConfig) -> Result<()> {
    let p = 1.0 - 1e-3;
    for (alpha, check) in [
        (2.0, Check::Between(0.62, 0.80)),
        (1.0, Check::Between(0.9, 1.1)),
        (0.5, Check::Above(1.3)),
    ] {
        let m = Distribution::pareto(alpha, 1.0)?;
        let j = JointModel::independent(vec![m.clone(), m])?;
        let r = var_ratio(&j, p, Some(cfg))?;
        rows.push(format!("R({p}) pareto alpha={alpha}"), r.ratio, check);
    }
    Ok(())
}

/// Run example `id`. Monte Carlo examples default to 10^6 samples.
pub fn run_example(id: &str, samples: Option<usize>, seed: Option<u64>) -> Result<ExampleReport> {
    let cfg = McConfig {
        samples: samples.unwrap_or(1_000_000),
        seed: seed.unwrap_or(DEFAULT_SEED),
    };
    let mut rows = Rows(Vec::new());
    match id {
        "3.1" => example_31_rows(&mut rows)?,
        "3.2" => example_32_rows(&mut rows)?,
        "3.3" => example_33_rows(&mut rows)?,
        "4.1" => example_41_rows(&mut rows)?,
        "4.2" => example_42_rows(&mut rows)?,
        "4.3" => example_43_rows(&mut rows, cfg)?,
        "4.4" => example_44_rows(&mut rows, cfg)?,
        _ => {
            return Err(Error::parse(
                1,
                1,
                format!("unknown example '{id}' (known: {})", EXAMPLE_IDS.join(", ")),
            ))
        }
    }
    Ok(ExampleReport {
        id: id.to_string(),
        rows: rows.0,
    })
}
