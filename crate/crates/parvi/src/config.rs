//! Run configuration: a flat `key = value` file format.
//!
//! Lines are `key = value` pairs; `#` starts a comment anywhere on a line
//! and blank lines are skipped. Keys are lowercase with dots for grouping
//! (`kernel.bandwidth`, `lmc.a`). Unknown or inapplicable keys are rejected
//! with their line number, as are duplicates, so typos cannot silently fall
//! back to defaults. Only `target` and `scheme` are required.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernels::{BandwidthPolicy, KernelConfig};
use crate::solvers::{Scheme, SolverConfig};

/// Which target distribution a run samples, with its data parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Toy1,
    Toy2,
    Toy3,
    Gaussian {
        dim: usize,
    },
    Flat {
        dim: usize,
    },
    /// Two-component Gaussian mixture posterior over (omega1, omega2) with
    /// synthetic observations generated at parse time parameters.
    Mixture {
        t: usize,
        omega1: f64,
        omega2: f64,
        sigma: f64,
        data_seed: u64,
    },
    /// Bayesian logistic regression posterior over the weight vector.
    Logistic {
        csv: PathBuf,
        label_column: String,
        standardize: bool,
        split: f64,
        alpha: f64,
        /// None runs full-batch gradients.
        batch_size: Option<usize>,
        data_seed: u64,
    },
}

impl TargetSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TargetSpec::Toy1 => "toy1",
            TargetSpec::Toy2 => "toy2",
            TargetSpec::Toy3 => "toy3",
            TargetSpec::Gaussian { .. } => "gaussian",
            TargetSpec::Flat { .. } => "flat",
            TargetSpec::Mixture { .. } => "mixture",
            TargetSpec::Logistic { .. } => "logistic",
        }
    }
}

/// Fully resolved description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub target: TargetSpec,
    pub scheme: Scheme,
    pub n_particles: usize,
    pub outer_iters: usize,
    pub seed: u64,
    pub tau: f64,
    pub lr: f64,
    pub inner_max_iter: usize,
    pub inner_tol: f64,
    pub gfsf_ridge: f64,
    pub lmc_a: f64,
    pub lmc_b: f64,
    pub lmc_c: f64,
    pub lmc_ascent_drift: bool,
    pub bandwidth: BandwidthPolicy,
    /// Fallback bandwidth for a coincident ensemble under the median rule;
    /// None lets the degenerate-configuration error propagate.
    pub median_floor: Option<f64>,
    /// Initial ensemble mean; empty means the origin in the target's dim.
    pub init_mean: Vec<f64>,
    pub init_scale: f64,
    pub output_dir: PathBuf,
    /// Snapshot interval in outer iterations; 0 keeps initial + final only.
    pub snapshot_every: usize,
    /// Optional particle CSV to compare against with squared MMD each
    /// iteration.
    pub mmd_reference: Option<PathBuf>,
}

impl RunConfig {
    pub fn solver_config(&self) -> SolverConfig {
        let mut solver = SolverConfig::new(self.scheme);
        solver.tau = self.tau;
        solver.lr = self.lr;
        solver.inner_max_iter = self.inner_max_iter;
        solver.inner_tol = self.inner_tol;
        solver.outer_iters = self.outer_iters;
        solver.lmc_schedule.a = self.lmc_a;
        solver.lmc_schedule.b = self.lmc_b;
        solver.lmc_schedule.c = self.lmc_c;
        solver.gfsf_ridge = self.gfsf_ridge;
        solver.seed = self.seed;
        solver.median_floor = self.median_floor;
        solver.lmc_ascent_drift = self.lmc_ascent_drift;
        solver
    }

    pub fn kernel_config(&self, dim: usize) -> Result<KernelConfig> {
        KernelConfig::new(self.bandwidth, dim)
    }

    /// Renders the resolved configuration back to the file format. Parsing
    /// the result reproduces this config exactly (floats print with
    /// shortest round-trip formatting).
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "target = {}", self.target.name());
        match &self.target {
            TargetSpec::Gaussian { dim } | TargetSpec::Flat { dim } => {
                let _ = writeln!(s, "dim = {dim}");
            }
            TargetSpec::Mixture {
                t,
                omega1,
                omega2,
                sigma,
                data_seed,
            } => {
                let _ = writeln!(s, "mixture.t = {t}");
                let _ = writeln!(s, "mixture.omega1 = {omega1}");
                let _ = writeln!(s, "mixture.omega2 = {omega2}");
                let _ = writeln!(s, "mixture.sigma = {sigma}");
                let _ = writeln!(s, "mixture.data_seed = {data_seed}");
            }
            TargetSpec::Logistic {
                csv,
                label_column,
                standardize,
                split,
                alpha,
                batch_size,
                data_seed,
            } => {
                let _ = writeln!(s, "logistic.csv = {}", csv.display());
                let _ = writeln!(s, "logistic.label_column = {label_column}");
                let _ = writeln!(s, "logistic.standardize = {standardize}");
                let _ = writeln!(s, "logistic.split = {split}");
                let _ = writeln!(s, "logistic.alpha = {alpha}");
                let _ = writeln!(s, "logistic.batch_size = {}", batch_size.unwrap_or(0));
                let _ = writeln!(s, "logistic.data_seed = {data_seed}");
            }
            _ => {}
        }
        let _ = writeln!(s, "scheme = {}", self.scheme.name());
        let _ = writeln!(s, "n_particles = {}", self.n_particles);
        let _ = writeln!(s, "outer_iters = {}", self.outer_iters);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "lr = {}", self.lr);
        let _ = writeln!(s, "inner_max_iter = {}", self.inner_max_iter);
        let _ = writeln!(s, "inner_tol = {}", self.inner_tol);
        let _ = writeln!(s, "gfsf.ridge = {}", self.gfsf_ridge);
        let _ = writeln!(s, "lmc.a = {}", self.lmc_a);
        let _ = writeln!(s, "lmc.b = {}", self.lmc_b);
        let _ = writeln!(s, "lmc.c = {}", self.lmc_c);
        let _ = writeln!(s, "lmc.ascent_drift = {}", self.lmc_ascent_drift);
        match self.bandwidth {
            BandwidthPolicy::MedianRule => {
                let _ = writeln!(s, "kernel.bandwidth = median");
            }
            BandwidthPolicy::Fixed(h) => {
                let _ = writeln!(s, "kernel.bandwidth = {h}");
            }
        }
        let _ = writeln!(
            s,
            "kernel.median_floor = {}",
            self.median_floor.unwrap_or(0.0)
        );
        if !self.init_mean.is_empty() {
            let rendered: Vec<String> = self.init_mean.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "init.mean = {}", rendered.join(", "));
        }
        let _ = writeln!(s, "init.scale = {}", self.init_scale);
        let _ = writeln!(s, "output.dir = {}", self.output_dir.display());
        let _ = writeln!(s, "output.snapshot_every = {}", self.snapshot_every);
        if let Some(reference) = &self.mmd_reference {
            let _ = writeln!(s, "mmd.reference = {}", reference.display());
        }
        s
    }
}

struct RawEntry {
    value: String,
    line: usize,
}

/// Key/value pairs with line numbers, checked for duplicates.
struct RawConfig {
    entries: BTreeMap<String, RawEntry>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, RawEntry> = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let content = content.trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse(format!(
                    "line {line}: expected `key = value`, got {content:?}"
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::Parse(format!("line {line}: empty key")));
            }
            if key
                .chars()
                .any(|c| !(c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.'))
            {
                return Err(Error::Parse(format!(
                    "line {line}: key {key:?} may only contain lowercase letters, digits, `_`, and `.`"
                )));
            }
            if let Some(first) = entries.get(key) {
                return Err(Error::Parse(format!(
                    "line {line}: duplicate key {key:?} (first set on line {})",
                    first.line
                )));
            }
            entries.insert(
                key.to_string(),
                RawEntry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(RawConfig { entries })
    }

    fn take(&mut self, key: &str) -> Option<RawEntry> {
        self.entries.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(entry) => entry
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| invalid_value(key, &entry, what)),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some((key, entry)) = self.entries.into_iter().next() {
            return Err(Error::Parse(format!(
                "line {}: unknown or inapplicable key {key:?}",
                entry.line
            )));
        }
        Ok(())
    }
}

fn invalid_value(key: &str, entry: &RawEntry, what: &str) -> Error {
    Error::Parse(format!(
        "line {}: key {key:?} expects {what}, got {:?}",
        entry.line, entry.value
    ))
}

fn require_positive(key: &str, v: f64) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::invalid(format!("{key} must be positive, got {v}")));
    }
    Ok(v)
}

/// Parses and validates a run configuration from file contents.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let mut raw = RawConfig::parse(text)?;

    let target_entry = raw
        .take("target")
        .ok_or_else(|| Error::Parse("missing required key \"target\"".into()))?;
    let scheme_entry = raw
        .take("scheme")
        .ok_or_else(|| Error::Parse("missing required key \"scheme\"".into()))?;
    let scheme: Scheme = scheme_entry.value.parse().map_err(|_| {
        invalid_value(
            "scheme",
            &scheme_entry,
            "one of evi_im, blob, svgd, gfsf, gfsd, lmc",
        )
    })?;

    let target = match target_entry.value.as_str() {
        "toy1" => TargetSpec::Toy1,
        "toy2" => TargetSpec::Toy2,
        "toy3" => TargetSpec::Toy3,
        "gaussian" | "flat" => {
            let dim = raw.take_parsed::<usize>("dim", "a positive integer")?.unwrap_or(2);
            if dim == 0 {
                return Err(Error::invalid("dim must be at least 1"));
            }
            if target_entry.value == "gaussian" {
                TargetSpec::Gaussian { dim }
            } else {
                TargetSpec::Flat { dim }
            }
        }
        "mixture" => {
            let t = raw
                .take_parsed::<usize>("mixture.t", "a nonnegative integer")?
                .unwrap_or(1000);
            let omega1 = raw
                .take_parsed::<f64>("mixture.omega1", "a float")?
                .unwrap_or(1.0);
            let omega2 = raw
                .take_parsed::<f64>("mixture.omega2", "a float")?
                .unwrap_or(-2.0);
            let sigma = raw
                .take_parsed::<f64>("mixture.sigma", "a float")?
                .unwrap_or(2.5);
            require_positive("mixture.sigma", sigma)?;
            let data_seed = raw
                .take_parsed::<u64>("mixture.data_seed", "an unsigned integer")?
                .unwrap_or(0);
            TargetSpec::Mixture {
                t,
                omega1,
                omega2,
                sigma,
                data_seed,
            }
        }
        "logistic" => {
            let csv = raw
                .take("logistic.csv")
                .ok_or_else(|| {
                    Error::Parse("missing required key \"logistic.csv\" for the logistic target".into())
                })?
                .value;
            let label_column = raw
                .take("logistic.label_column")
                .map(|e| e.value)
                .unwrap_or_else(|| "label".to_string());
            let standardize = raw
                .take_parsed::<bool>("logistic.standardize", "true or false")?
                .unwrap_or(true);
            let split = raw
                .take_parsed::<f64>("logistic.split", "a fraction in (0, 1)")?
                .unwrap_or(0.8);
            if !split.is_finite() || split <= 0.0 || split >= 1.0 {
                return Err(Error::invalid(format!(
                    "logistic.split must lie strictly between 0 and 1, got {split}"
                )));
            }
            let alpha = raw
                .take_parsed::<f64>("logistic.alpha", "a float")?
                .unwrap_or(1.0);
            require_positive("logistic.alpha", alpha)?;
            let batch = raw
                .take_parsed::<usize>("logistic.batch_size", "a nonnegative integer (0 = full batch)")?
                .unwrap_or(0);
            let data_seed = raw
                .take_parsed::<u64>("logistic.data_seed", "an unsigned integer")?
                .unwrap_or(0);
            TargetSpec::Logistic {
                csv: PathBuf::from(csv),
                label_column,
                standardize,
                split,
                alpha,
                batch_size: if batch == 0 { None } else { Some(batch) },
                data_seed,
            }
        }
        other => {
            return Err(Error::Parse(format!(
                "line {}: unknown target {other:?} (expected toy1, toy2, toy3, gaussian, flat, mixture, or logistic)",
                target_entry.line
            )))
        }
    };

    let n_particles = raw
        .take_parsed::<usize>("n_particles", "a positive integer")?
        .unwrap_or(100);
    if n_particles == 0 {
        return Err(Error::invalid("n_particles must be at least 1"));
    }
    let outer_iters = raw
        .take_parsed::<usize>("outer_iters", "a nonnegative integer")?
        .unwrap_or(100);
    let seed = raw
        .take_parsed::<u64>("seed", "an unsigned integer")?
        .unwrap_or(0);
    let tau = raw.take_parsed::<f64>("tau", "a float")?.unwrap_or(0.01);
    let lr = raw.take_parsed::<f64>("lr", "a float")?.unwrap_or(0.01);
    let inner_max_iter = raw
        .take_parsed::<usize>("inner_max_iter", "a positive integer")?
        .unwrap_or(100);
    let inner_tol = raw
        .take_parsed::<f64>("inner_tol", "a float")?
        .unwrap_or(1e-8);
    let gfsf_ridge = raw
        .take_parsed::<f64>("gfsf.ridge", "a nonnegative float")?
        .unwrap_or(1e-8);
    let lmc_a = raw.take_parsed::<f64>("lmc.a", "a float")?.unwrap_or(0.1);
    let lmc_b = raw.take_parsed::<f64>("lmc.b", "a float")?.unwrap_or(1.0);
    let lmc_c = raw.take_parsed::<f64>("lmc.c", "a float")?.unwrap_or(0.55);
    let lmc_ascent_drift = raw
        .take_parsed::<bool>("lmc.ascent_drift", "true or false")?
        .unwrap_or(false);

    let bandwidth = match raw.take("kernel.bandwidth") {
        None => BandwidthPolicy::MedianRule,
        Some(entry) if entry.value == "median" => BandwidthPolicy::MedianRule,
        Some(entry) => {
            let h: f64 = entry.value.parse().map_err(|_| {
                invalid_value("kernel.bandwidth", &entry, "\"median\" or a positive float")
            })?;
            require_positive("kernel.bandwidth", h)?;
            BandwidthPolicy::Fixed(h)
        }
    };
    let floor_raw = raw
        .take_parsed::<f64>(
            "kernel.median_floor",
            "a nonnegative float (0 disables the floor)",
        )?
        .unwrap_or(1e-3);
    let median_floor = if floor_raw == 0.0 {
        None
    } else {
        Some(require_positive("kernel.median_floor", floor_raw)?)
    };

    let init_mean = match raw.take("init.mean") {
        None => Vec::new(),
        Some(entry) => {
            let mut mean = Vec::new();
            for part in entry.value.split(',') {
                let v: f64 = part
                    .trim()
                    .parse()
                    .map_err(|_| invalid_value("init.mean", &entry, "comma-separated floats"))?;
                mean.push(v);
            }
            mean
        }
    };
    let init_scale = raw
        .take_parsed::<f64>("init.scale", "a nonnegative float")?
        .unwrap_or(1.0);
    if !init_scale.is_finite() || init_scale < 0.0 {
        return Err(Error::invalid(format!(
            "init.scale must be nonnegative, got {init_scale}"
        )));
    }

    let output_dir = raw
        .take("output.dir")
        .map(|e| PathBuf::from(e.value))
        .unwrap_or_else(|| PathBuf::from("out"));
    let snapshot_every = raw
        .take_parsed::<usize>("output.snapshot_every", "a nonnegative integer")?
        .unwrap_or(0);
    let mmd_reference = raw.take("mmd.reference").map(|e| PathBuf::from(e.value));

    raw.finish()?;

    let config = RunConfig {
        target,
        scheme,
        n_particles,
        outer_iters,
        seed,
        tau,
        lr,
        inner_max_iter,
        inner_tol,
        gfsf_ridge,
        lmc_a,
        lmc_b,
        lmc_c,
        lmc_ascent_drift,
        bandwidth,
        median_floor,
        init_mean,
        init_scale,
        output_dir,
        snapshot_every,
        mmd_reference,
    };
    // Field-level solver validation (tau, lr, ...) names its keys directly.
    config.solver_config().validate()?;
    Ok(config)
}

/// Reads and parses a run configuration file.
pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
    parse_run_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_documented_defaults() {
        let config = parse_run_config("target = toy1\nscheme = evi_im\n").unwrap();
        assert_eq!(config.target, TargetSpec::Toy1);
        assert_eq!(config.scheme, Scheme::EviIm);
        assert_eq!(config.n_particles, 100);
        assert_eq!(config.outer_iters, 100);
        assert_eq!(config.seed, 0);
        assert_eq!(config.tau, 0.01);
        assert_eq!(config.bandwidth, BandwidthPolicy::MedianRule);
        assert_eq!(config.median_floor, Some(1e-3));
        assert_eq!(config.output_dir, PathBuf::from("out"));
        assert_eq!(config.snapshot_every, 0);
        assert!(config.mmd_reference.is_none());
        assert!(config.init_mean.is_empty());
    }

    #[test]
    fn comments_blanks_and_spacing_are_tolerated() {
        let text = "\n# full line comment\n  target = toy2   # trailing comment\n\nscheme=blob\n  lr =  0.05\n";
        let config = parse_run_config(text).unwrap();
        assert_eq!(config.target, TargetSpec::Toy2);
        assert_eq!(config.scheme, Scheme::Blob);
        assert_eq!(config.lr, 0.05);
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_line() {
        let text = "target = toy1\nscheme = evi_im\ntua = 0.1\n";
        let err = parse_run_config(text).unwrap_err().to_string();
        assert!(err.contains("tua"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn keys_for_other_targets_are_rejected() {
        let text = "target = toy1\nscheme = evi_im\nmixture.t = 5\n";
        let err = parse_run_config(text).unwrap_err().to_string();
        assert!(err.contains("mixture.t"), "{err}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = "target = toy1\nscheme = evi_im\ntau = 0.1\ntau = 0.2\n";
        let err = parse_run_config(text).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
        assert!(err.contains("line 4"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn missing_required_keys_are_named() {
        let err = parse_run_config("scheme = evi_im\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("target"), "{err}");
        let err = parse_run_config("target = toy1\n").unwrap_err().to_string();
        assert!(err.contains("scheme"), "{err}");
    }

    #[test]
    fn bad_values_name_key_and_line() {
        let text = "target = toy1\nscheme = evi_im\ntau = fast\n";
        let err = parse_run_config(text).unwrap_err().to_string();
        assert!(err.contains("tau"), "{err}");
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("fast"), "{err}");
    }

    #[test]
    fn out_of_range_values_name_their_key() {
        let err = parse_run_config("target = toy1\nscheme = evi_im\ntau = -1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("tau"), "{err}");
        let err = parse_run_config("target = toy1\nscheme = blob\nlr = 0\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("lr"), "{err}");
        let err = parse_run_config("target = toy1\nscheme = evi_im\nkernel.bandwidth = -0.5\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("kernel.bandwidth"), "{err}");
        let err = parse_run_config(
            "target = logistic\nscheme = evi_im\nlogistic.csv = d.csv\nlogistic.split = 1.5\n",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("logistic.split"), "{err}");
    }

    #[test]
    fn mixture_and_logistic_blocks_parse() {
        let text = "target = mixture\nscheme = evi_im\nmixture.t = 50\nmixture.omega1 = 0.5\nmixture.sigma = 2.0\n";
        let config = parse_run_config(text).unwrap();
        assert_eq!(
            config.target,
            TargetSpec::Mixture {
                t: 50,
                omega1: 0.5,
                omega2: -2.0,
                sigma: 2.0,
                data_seed: 0
            }
        );

        let text = "target = logistic\nscheme = evi_im\nlogistic.csv = data/train.csv\nlogistic.batch_size = 32\n";
        let config = parse_run_config(text).unwrap();
        match config.target {
            TargetSpec::Logistic {
                ref csv,
                ref label_column,
                standardize,
                split,
                alpha,
                batch_size,
                data_seed,
            } => {
                assert_eq!(csv, &PathBuf::from("data/train.csv"));
                assert_eq!(label_column, "label");
                assert!(standardize);
                assert_eq!(split, 0.8);
                assert_eq!(alpha, 1.0);
                assert_eq!(batch_size, Some(32));
                assert_eq!(data_seed, 0);
            }
            other => panic!("wrong target {other:?}"),
        }
    }

    #[test]
    fn fixed_bandwidth_and_disabled_floor_parse() {
        let text =
            "target = toy1\nscheme = evi_im\nkernel.bandwidth = 0.05\nkernel.median_floor = 0\n";
        let config = parse_run_config(text).unwrap();
        assert_eq!(config.bandwidth, BandwidthPolicy::Fixed(0.05));
        assert_eq!(config.median_floor, None);
    }

    #[test]
    fn echo_round_trips_every_target_kind() {
        let texts = [
            "target = toy3\nscheme = gfsf\ngfsf.ridge = 1e-6\nkernel.bandwidth = 0.3\ninit.mean = 0.5, -1\nmmd.reference = ref.csv\n",
            "target = gaussian\ndim = 3\nscheme = lmc\nlmc.a = 0.2\nlmc.c = 0.6\nseed = 9\n",
            "target = mixture\nscheme = evi_im\nmixture.t = 12\nmixture.sigma = 1.5\ntau = 0.05\n",
            "target = logistic\nscheme = svgd\nlogistic.csv = x.csv\nlogistic.batch_size = 16\nlr = 0.002\n",
            "target = flat\ndim = 1\nscheme = blob\noutput.snapshot_every = 25\noutput.dir = results/run1\n",
        ];
        for text in texts {
            let config = parse_run_config(text).unwrap();
            let echoed = parse_run_config(&config.echo()).unwrap();
            assert_eq!(config, echoed, "echo failed to round-trip for {text:?}");
        }
    }

    #[test]
    fn solver_config_carries_every_knob() {
        let text = "target = toy1\nscheme = lmc\nouter_iters = 7\nseed = 3\nlmc.a = 0.4\nlmc.b = 2\nlmc.c = 0.9\nlmc.ascent_drift = true\n";
        let config = parse_run_config(text).unwrap();
        let solver = config.solver_config();
        assert_eq!(solver.scheme, Scheme::Lmc);
        assert_eq!(solver.outer_iters, 7);
        assert_eq!(solver.seed, 3);
        assert_eq!(solver.lmc_schedule.a, 0.4);
        assert_eq!(solver.lmc_schedule.b, 2.0);
        assert_eq!(solver.lmc_schedule.c, 0.9);
        assert!(solver.lmc_ascent_drift);
    }

    #[test]
    fn lines_without_equals_are_rejected() {
        let err = parse_run_config("target toy1\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }
}
