//! Experiment configuration: defaults, a flat `key = value` file, and flag
//! overrides, applied in that order.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use crdiv_core::{ParamSet, Scheduler, SystemParams};

use crate::error::CliError;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 20_240_117;

/// Occupancy model selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Occupancy {
    /// Independent slots, busy with probability `λ/μ̂` per scheduler.
    Analytic,
    /// Explicit primary queue.
    Queue,
}

impl Occupancy {
    pub fn name(self) -> &'static str {
        match self {
            Occupancy::Analytic => "analytic",
            Occupancy::Queue => "queue",
        }
    }
}

/// Flags of the `sweep` subcommand. Every field is optional so that unset
/// flags fall through to the config file and then the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Detection probability p_d.
    #[arg(long)]
    pub pd: Option<f64>,
    /// False-alarm probability p_f.
    #[arg(long)]
    pub pf: Option<f64>,
    /// Primary packet arrival rate (packets/slot).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Primary QoS floor on the departure rate.
    #[arg(long = "mu-min")]
    pub mu_min: Option<f64>,
    /// Primary transmit power in dB.
    #[arg(long = "pp-db")]
    pub pp_db: Option<f64>,
    /// Secondary peak power in dB.
    #[arg(long = "psmax-db")]
    pub psmax_db: Option<f64>,
    /// Primary target rate R (bits/s/Hz).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Secondary user counts, e.g. "1:100" or "10,20,50".
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    /// Monte Carlo trials (slots) per N.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated subset of exact, lower, upper.
    #[arg(long)]
    pub schedulers: Option<String>,
    #[arg(long, value_enum)]
    pub occupancy: Option<Occupancy>,
    /// Flat key=value file read before the flags are applied.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (does not affect the results).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Validated parameters; `n` is set per row by the sweep.
    pub params: SystemParams,
    pub pp_db: f64,
    pub psmax_db: f64,
    pub n_list: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub schedulers: Vec<Scheduler>,
    pub occupancy: Occupancy,
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Draft {
    p_d: f64,
    p_f: f64,
    lambda: f64,
    mu_min: f64,
    pp_db: f64,
    psmax_db: f64,
    rate: f64,
    n_list: Vec<usize>,
    trials: u64,
    seed: u64,
    schedulers: Vec<Scheduler>,
    occupancy: Occupancy,
    out: Option<PathBuf>,
}

impl Default for Draft {
    fn default() -> Self {
        let base = ParamSet::default();
        Self {
            p_d: base.p_d,
            p_f: base.p_f,
            lambda: base.lambda,
            mu_min: base.mu_min,
            pp_db: linear_to_db(base.p_p),
            psmax_db: linear_to_db(base.p_s_max),
            rate: base.rate,
            n_list: (1..=100).collect(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            schedulers: Scheduler::BOUNDED.to_vec(),
            occupancy: Occupancy::Analytic,
            out: None,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Parses `"1:100"`, `"10,20,50"` or a mix such as `"1:5,10,20"`.
pub fn parse_n_list(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = |part: &str| CliError::Usage(format!("n-list: cannot parse '{part}' (expected e.g. 1:100 or 10,20,50)"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once(':') {
            let a: usize = a.trim().parse().map_err(|_| bad(part))?;
            let b: usize = b.trim().parse().map_err(|_| bad(part))?;
            if a > b {
                return Err(CliError::InvalidConfig(format!("n-list range {part} is descending")));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    if out.is_empty() {
        return Err(CliError::InvalidConfig("n-list is empty".into()));
    }
    if out[0] == 0 {
        return Err(CliError::InvalidConfig("n-list entries must be at least 1".into()));
    }
    if let Some(w) = out.windows(2).find(|w| w[0] >= w[1]) {
        return Err(CliError::InvalidConfig(format!(
            "n-list must be strictly ascending ({} is followed by {})",
            w[0], w[1]
        )));
    }
    Ok(out)
}

pub fn parse_schedulers(text: &str) -> Result<Vec<Scheduler>, CliError> {
    let mut out = Vec::new();
    for name in text.split(',') {
        let s: Scheduler = name.parse().map_err(CliError::Usage)?;
        if s == Scheduler::Silent {
            return Err(CliError::Usage("schedulers: expected a subset of exact, lower, upper".into()));
        }
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out.sort_by_key(|s| Scheduler::BOUNDED.iter().position(|b| b == s));
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config key '{key}': cannot parse '{value}'")))
}

impl Draft {
    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key.replace('_', "-").as_str() {
            "pd" => self.p_d = parse_value(key, value)?,
            "pf" => self.p_f = parse_value(key, value)?,
            "lambda" => self.lambda = parse_value(key, value)?,
            "mu-min" => self.mu_min = parse_value(key, value)?,
            "pp-db" => self.pp_db = parse_value(key, value)?,
            "psmax-db" => self.psmax_db = parse_value(key, value)?,
            "rate" => self.rate = parse_value(key, value)?,
            "n-list" => self.n_list = parse_n_list(value)?,
            "trials" => self.trials = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "schedulers" => self.schedulers = parse_schedulers(value)?,
            "occupancy" => {
                self.occupancy = Occupancy::from_str(value, true)
                    .map_err(|_| CliError::Usage(format!("config key '{key}': expected analytic or queue")))?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(CliError::Usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    fn apply_flags(&mut self, args: &SweepArgs) -> Result<(), CliError> {
        macro_rules! take {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = args.$field { self.$target = v; })*
            };
        }
        take!(pd => p_d, pf => p_f, lambda => lambda, mu_min => mu_min, pp_db => pp_db,
              psmax_db => psmax_db, rate => rate, trials => trials, seed => seed,
              occupancy => occupancy);
        if let Some(list) = &args.n_list {
            self.n_list = parse_n_list(list)?;
        }
        if let Some(list) = &args.schedulers {
            self.schedulers = parse_schedulers(list)?;
        }
        if let Some(out) = &args.out {
            self.out = Some(out.clone());
        }
        Ok(())
    }

    fn finish(self) -> Result<ExperimentConfig, CliError> {
        if self.trials < 1 {
            return Err(CliError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.schedulers.is_empty() {
            return Err(CliError::InvalidConfig("at least one scheduler is required".into()));
        }
        let params = ParamSet {
            p_d: self.p_d,
            p_f: self.p_f,
            lambda: self.lambda,
            mu_min: self.mu_min,
            p_p: db_to_linear(self.pp_db),
            p_s_max: db_to_linear(self.psmax_db),
            rate: self.rate,
            n: self.n_list[0],
        }
        .validate()?;
        Ok(ExperimentConfig {
            params,
            pp_db: self.pp_db,
            psmax_db: self.psmax_db,
            n_list: self.n_list,
            trials: self.trials,
            seed: self.seed,
            schedulers: self.schedulers,
            occupancy: self.occupancy,
            output_path: self.out,
        })
    }
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value, got '{line}'", i + 1)))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text)
}

/// Resolves the experiment configuration from the flags and the optional
/// config file they name.
pub fn parse_config(args: &SweepArgs) -> Result<ExperimentConfig, CliError> {
    let mut draft = Draft::default();
    if let Some(path) = &args.config {
        for (key, value) in read_config_file(path)? {
            draft.apply(&key, &value)?;
        }
    }
    draft.apply_flags(args)?;
    draft.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_set() {
        let c = parse_config(&SweepArgs::default()).unwrap();
        let p = &c.params;
        assert_eq!((p.p_d(), p.p_f(), p.lambda(), p.mu_min(), p.rate()), (0.8, 0.3, 0.5, 0.95, 0.5));
        assert!((p.p_p() - 10.0).abs() < 1e-12 && (p.p_s_max() - 10.0).abs() < 1e-12);
        assert_eq!(c.n_list, (1..=100).collect::<Vec<_>>());
        assert_eq!(c.trials, 100_000);
        assert_eq!(c.schedulers, Scheduler::BOUNDED.to_vec());
        assert_eq!(c.occupancy, Occupancy::Analytic);
    }

    #[test]
    fn decibels_convert() {
        let args = SweepArgs {
            pp_db: Some(10.0),
            psmax_db: Some(20.0),
            ..Default::default()
        };
        let c = parse_config(&args).unwrap();
        assert_eq!(c.params.p_p(), 10.0);
        assert_eq!(c.params.p_s_max(), 100.0);
        assert!((linear_to_db(db_to_linear(3.7)) - 3.7).abs() < 1e-12);
    }

    #[test]
    fn n_list_syntax() {
        assert_eq!(parse_n_list("1:4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_n_list("10, 20,50").unwrap(), vec![10, 20, 50]);
        assert_eq!(parse_n_list("1:3,10").unwrap(), vec![1, 2, 3, 10]);
        assert!(matches!(parse_n_list("5,3"), Err(CliError::InvalidConfig(_))));
        assert!(matches!(parse_n_list("0:3"), Err(CliError::InvalidConfig(_))));
        assert!(matches!(parse_n_list("a"), Err(CliError::Usage(_))));
        assert!(matches!(parse_n_list("1:x"), Err(CliError::Usage(_))));
    }

    #[test]
    fn scheduler_subsets_are_canonical() {
        assert_eq!(
            parse_schedulers("upper,exact,upper").unwrap(),
            vec![Scheduler::MaxSnr, Scheduler::Genie]
        );
        assert!(parse_schedulers("silent").is_err());
        assert!(parse_schedulers("fast").is_err());
    }

    #[test]
    fn flags_override_file() {
        let pairs = parse_config_text("# comment\npd = 0.7\ntrials=50 # inline\n\nn_list = 2:4\n").unwrap();
        let mut d = Draft::default();
        for (k, v) in &pairs {
            d.apply(k, v).unwrap();
        }
        d.apply_flags(&SweepArgs {
            trials: Some(9),
            ..Default::default()
        })
        .unwrap();
        let c = d.finish().unwrap();
        assert_eq!(c.params.p_d(), 0.7);
        assert_eq!(c.trials, 9);
        assert_eq!(c.n_list, vec![2, 3, 4]);
    }

    #[test]
    fn bad_keys_and_values_are_usage_errors() {
        let mut d = Draft::default();
        let e = d.apply("colour", "blue").unwrap_err();
        assert!(e.to_string().contains("colour"));
        assert_eq!(e.exit_code(), 2);
        assert_eq!(d.apply("pd", "high").unwrap_err().exit_code(), 2);
        assert!(parse_config_text("just words").is_err());
    }

    #[test]
    fn infeasible_parameters_name_the_assumption() {
        // p_d·e^{-R_p} = 0.7675 > 0.7, so no power level meets the floor.
        let e = parse_config(&SweepArgs {
            mu_min: Some(0.7),
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("mu_min"), "{e}");

        let e = parse_config(&SweepArgs {
            mu_min: Some(0.96),
            ..Default::default()
        })
        .unwrap_err();
        assert!(e.to_string().contains("K > 0"), "{e}");

        let e = parse_config(&SweepArgs {
            trials: Some(0),
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }
}
