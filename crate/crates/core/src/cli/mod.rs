//! Command-line front end.
//!
//! Exit codes: 0 success, 1 parse/io/usage errors, 2 domain errors,
//! 3 divergent integrals, 4 an `example` check out of tolerance.

pub mod config;
pub mod examples;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::asymptotics::{ratio_scan, McConfig};
use crate::distortion::{classify_shape, parse_distortion, ShapeReport};
use crate::error::{Error, Result};
use crate::format::num;
use crate::measures::{choquet, choquet_quantile_form, tail_subadditivity_check};

pub use config::{parse_distribution, DependenceSpec, ExperimentConfig, Form, JointArg, JointSpec, StepMapSpec};
pub use examples::{run_example, ExampleReport, EXAMPLE_IDS};

pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "drisk", version, about = "Distortion risk measures and VaR tail-ratio experiments")]
pub struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate ρ_g[X] and print a JSON report.
    Measure {
        #[arg(long)]
        distortion: String,
        #[arg(long)]
        dist: String,
        #[arg(long, value_enum, default_value_t = Form::Survival)]
        form: Form,
    },
    /// Tabulate g on an evenly spaced grid as `u,g_u` CSV.
    Curve {
        #[arg(long)]
        distortion: String,
        /// Number of grid points, endpoints included.
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Report concavity or convexity of g.
    Classify {
        #[arg(long)]
        distortion: String,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Tail subadditivity check for a pair of risks.
    Subadd {
        #[arg(long)]
        distortion: String,
        /// `example:<id>` or a JSON joint-model file.
        #[arg(long)]
        joint: String,
        #[arg(long, default_value_t = 0.95)]
        alpha: f64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// VaR_p[ΣX] / ΣVaR_p[X_i] over a grid geometric in 1 − p, as CSV.
    RatioScan {
        #[arg(long)]
        joint: String,
        #[arg(long, default_value_t = 0.9)]
        p_start: f64,
        #[arg(long, default_value_t = 0.999)]
        p_end: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Reproduce a worked example and compare with the expected values.
    Example {
        /// One of 3.1, 3.2, 3.3, 4.1, 4.2, 4.3, 4.4.
        id: String,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Run an experiment described by a JSON config.
    Run { config: PathBuf },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct McArgs {
    /// Monte Carlo sample size.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &Error) -> Self {
        Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

impl Command {
    fn into_config(self) -> Result<ExperimentConfig> {
        Ok(match self {
            Command::Measure { distortion, dist, form } => ExperimentConfig::Measure { distortion, dist, form },
            Command::Curve { distortion, grid } => ExperimentConfig::Curve { distortion, grid },
            Command::Classify { distortion, grid } => ExperimentConfig::Classify { distortion, grid },
            Command::Subadd {
                distortion,
                joint,
                alpha,
                mc,
            } => ExperimentConfig::Subadd {
                distortion,
                joint: JointArg::Ref(joint),
                alpha,
                samples: mc.samples,
                seed: mc.seed,
            },
            Command::RatioScan {
                joint,
                p_start,
                p_end,
                points,
                mc,
            } => ExperimentConfig::RatioScan {
                joint: JointArg::Ref(joint),
                p_start,
                p_end,
                points,
                samples: mc.samples,
                seed: mc.seed,
            },
            Command::Example { id, mc } => ExperimentConfig::Example {
                id,
                samples: mc.samples,
                seed: mc.seed,
            },
            Command::Run { config } => config::from_json(&std::fs::read_to_string(config)?)?,
        })
    }
}

fn mc_config(samples: Option<usize>, seed: Option<u64>) -> Option<McConfig> {
    samples.map(|samples| McConfig {
        samples,
        seed: seed.unwrap_or(0),
    })
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn shape_json(label: &str, grid: usize, r: &ShapeReport) -> serde_json::Value {
    let segments = match r {
        ShapeReport::Piecewise(s) => json!(s),
        _ => json!([]),
    };
    json!({
        "distortion": label,
        "grid": grid,
        "shape": r.name(),
        "summary": r.to_string(),
        "segments": segments,
    })
}

/// Execute one experiment. The `bool` is false when an example check fails.
pub fn execute(cfg: &ExperimentConfig) -> Result<(String, bool)> {
    let out = match cfg {
        ExperimentConfig::Measure { distortion, dist, form } => {
            let g = parse_distortion(distortion)?;
            let d = parse_distribution(dist)?;
            let r = match form {
                Form::Survival => choquet(&g, &d)?,
                Form::Quantile => choquet_quantile_form(&g, &d)?,
            };
            pretty(&r)
        }
        ExperimentConfig::Curve { distortion, grid } => {
            if *grid < 2 {
                return Err(Error::Domain("curve grid needs at least two points".into()));
            }
            let g = parse_distortion(distortion)?;
            let mut s = String::from("u,g_u\n");
            for i in 0..*grid {
                let u = i as f64 / (*grid - 1) as f64;
                s.push_str(&format!("{},{}\n", num(u), num(g.eval(u))));
            }
            s
        }
        ExperimentConfig::Classify { distortion, grid } => {
            let g = parse_distortion(distortion)?;
            let r = classify_shape(&g, *grid)?;
            pretty(&shape_json(&g.label(), *grid, &r))
        }
        ExperimentConfig::Subadd {
            distortion,
            joint,
            alpha,
            samples,
            seed,
        } => {
            let g = parse_distortion(distortion)?;
            let j = joint.spec()?.build()?;
            let r = tail_subadditivity_check(&g, &j, *alpha, mc_config(*samples, *seed))?;
            pretty(&json!({ "distortion": g.label(), "alpha": alpha, "check": r }))
        }
        ExperimentConfig::RatioScan {
            joint,
            p_start,
            p_end,
            points,
            samples,
            seed,
        } => {
            let j = joint.spec()?.build()?;
            ratio_scan(&j, *p_start, *p_end, *points, mc_config(*samples, *seed))?.to_csv()
        }
        ExperimentConfig::Example { id, samples, seed } => {
            let r = run_example(id, *samples, *seed)?;
            return Ok((r.to_csv(), r.passes()));
        }
    };
    Ok((out, true))
}

/// Parse `args` (program name first) and run the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            };
        }
    };
    let result = cli.command.into_config().and_then(|cfg| execute(&cfg));
    match result {
        Ok((text, passed)) => {
            let mut o = match &cli.out {
                Some(path) => match std::fs::write(path, &text) {
                    Ok(()) => Outcome::ok(String::new()),
                    Err(e) => return Outcome::error(&Error::Io(e)),
                },
                None => Outcome::ok(text),
            };
            if !passed {
                o.code = EXIT_MISMATCH;
                o.stderr = "error: example values out of tolerance\n".into();
            }
            o
        }
        Err(e) => Outcome::error(&e),
    }
}
