//! Experiment configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use mismatch_quant::{quantizer::MAX_BITS, Distribution64, DistributionConfig, LloydConfig, LloydInit};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    MeanSweep,
    VarianceSweep,
    LaplaceTable,
    RateRecovery,
    BscSweep,
    RicianCsi,
    SemanticMixture,
    SingleReport,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::MeanSweep => "mean_sweep",
            Self::VarianceSweep => "variance_sweep",
            Self::LaplaceTable => "laplace_table",
            Self::RateRecovery => "rate_recovery",
            Self::BscSweep => "bsc_sweep",
            Self::RicianCsi => "rician_csi",
            Self::SemanticMixture => "semantic_mixture",
            Self::SingleReport => "single_report",
        }
    }

    fn uses_bits(self) -> bool {
        !matches!(self, Self::BscSweep | Self::RicianCsi)
    }

    fn supports_mc(self) -> bool {
        matches!(self, Self::MeanSweep | Self::VarianceSweep | Self::LaplaceTable | Self::SingleReport | Self::BscSweep)
    }

    /// The sweeps build the true law from their grid.
    fn sets_truth(self) -> bool {
        matches!(self, Self::MeanSweep | Self::VarianceSweep | Self::BscSweep | Self::RicianCsi | Self::SemanticMixture)
    }

    fn sets_design(self) -> bool {
        matches!(self, Self::BscSweep | Self::RicianCsi | Self::SemanticMixture)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: Option<u64>,
    /// Monte Carlo draws per grid point; 0 keeps the output exact only.
    #[serde(default)]
    pub mc_samples: usize,
    pub output: Option<PathBuf>,
    pub design: Option<DistributionConfig>,
    #[serde(alias = "true")]
    pub truth: Option<DistributionConfig>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub lloyd: LloydSection,
    #[serde(default)]
    pub semantic: SemanticSection,
}

/// Sweep axes; unset axes take per-experiment defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub bits: Option<Vec<u32>>,
    /// True means for `mean_sweep`.
    pub means: Option<Vec<f64>>,
    /// True standard deviations for `variance_sweep`.
    pub stds: Option<Vec<f64>>,
    pub epsilons: Option<Vec<f64>>,
    pub sigma0: Option<Vec<f64>>,
    pub sigma1: Option<Vec<f64>>,
    pub k_true: Option<Vec<f64>>,
    pub k_design: Option<Vec<f64>>,
    /// Active class counts for `semantic_mixture`.
    pub classes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Quantiles,
    PointDensity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LloydSection {
    pub max_iters: usize,
    pub tol: f64,
    pub init: Option<InitKind>,
}

impl Default for LloydSection {
    fn default() -> Self {
        let d = LloydConfig::<f64>::default();
        Self { max_iters: d.max_iters, tol: d.tol, init: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemanticSection {
    pub classes: usize,
    pub spacing: f64,
    pub std: f64,
}

impl Default for SemanticSection {
    fn default() -> Self {
        Self { classes: 10, spacing: 2.0, std: 1.0 }
    }
}

/// Command-line values that replace their config counterparts.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub bits: Option<Vec<u32>>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub mc_samples: Option<usize>,
}

/// `1,2,3`, `2..12` and `2-12` (inclusive) and mixtures of them.
pub fn parse_bits(s: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("`{t}` is not a bit count"));
        match range {
            Some((a, b)) => out.extend(num(a)?..=num(b)?),
            None => out.push(num(part)?),
        }
    }
    Ok(out)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(e) = o.experiment {
            self.experiment = e;
        }
        if let Some(b) = o.bits {
            self.grid.bits = Some(b);
        }
        if let Some(s) = o.seed {
            self.seed = Some(s);
        }
        if let Some(p) = o.output {
            self.output = Some(p);
        }
        if let Some(n) = o.mc_samples {
            self.mc_samples = n;
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.experiment.name())))
    }

    pub fn bits(&self) -> Vec<u32> {
        self.grid.bits.clone().unwrap_or_else(|| match self.experiment {
            Experiment::RateRecovery => (2..=12).collect(),
            Experiment::SemanticMixture => vec![2, 3, 4],
            _ => vec![1, 2, 3, 4],
        })
    }

    pub fn means(&self) -> Vec<f64> {
        self.grid.means.clone().unwrap_or_else(|| linspace(-2.0, 2.0, 41))
    }

    pub fn stds(&self) -> Vec<f64> {
        self.grid.stds.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 10.0])
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.grid.epsilons.clone().unwrap_or_else(|| vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5])
    }

    pub fn sigma0(&self) -> Vec<f64> {
        self.grid.sigma0.clone().unwrap_or_else(|| vec![1.0])
    }

    pub fn sigma1(&self) -> Vec<f64> {
        self.grid.sigma1.clone().unwrap_or_else(|| vec![0.5, 2.0, 4.0])
    }

    pub fn k_true(&self) -> Vec<f64> {
        self.grid.k_true.clone().unwrap_or_else(|| vec![0.0, 1.0, 3.0, 6.0, 10.0, 20.0, 50.0, 100.0, 200.0])
    }

    pub fn k_design(&self) -> Vec<f64> {
        self.grid.k_design.clone().unwrap_or_else(|| vec![3.0])
    }

    pub fn classes(&self) -> Vec<usize> {
        self.grid.classes.clone().unwrap_or_else(|| (1..=self.semantic.classes).collect())
    }

    pub fn design_law(&self) -> Result<Distribution64, CliError> {
        law_or(&self.design, Distribution64::standard_normal(), "design")
    }

    pub fn true_law(&self) -> Result<Distribution64, CliError> {
        let fallback = match self.experiment {
            Experiment::RateRecovery => Distribution64::gaussian(0.0, 2.0).expect("valid law"),
            _ => Distribution64::unit_laplace(),
        };
        law_or(&self.truth, fallback, "truth")
    }

    pub fn lloyd(&self) -> LloydConfig<f64> {
        let init = match self.lloyd.init {
            Some(InitKind::PointDensity) => LloydInit::PointDensity,
            Some(InitKind::Quantiles) => LloydInit::Quantiles,
            None if self.experiment == Experiment::RateRecovery => LloydInit::PointDensity,
            None => LloydInit::Quantiles,
        };
        LloydConfig { max_iters: self.lloyd.max_iters, tol: self.lloyd.tol, init }
    }

    /// Every precondition `run` checks, as human-readable diagnostics.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let e = self.experiment;
        let mut grid = |name: &str, values: &[f64], ok: fn(f64) -> bool, rule: &str| {
            if values.is_empty() {
                out.push(format!("{name} grid empty"));
            } else if let Some(v) = values.iter().find(|&&v| !ok(v)) {
                out.push(format!("{name} {v} {rule}"));
            }
        };
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match e {
            Experiment::MeanSweep => grid("means", &self.means(), f64::is_finite, "is not finite"),
            Experiment::VarianceSweep => grid("stds", &self.stds(), positive, "must be positive"),
            Experiment::BscSweep => {
                grid("epsilon", &self.epsilons(), |v| (0.0..=0.5).contains(&v), "out of [0, 0.5]");
                grid("sigma0", &self.sigma0(), positive, "must be positive");
                grid("sigma1", &self.sigma1(), positive, "must be positive");
            }
            Experiment::RicianCsi => {
                let k_ok = |v: f64| v >= 0.0 && v.is_finite();
                grid("k_true", &self.k_true(), k_ok, "must be finite and nonnegative");
                grid("k_design", &self.k_design(), k_ok, "must be finite and nonnegative");
            }
            _ => {}
        }
        if e.uses_bits() {
            let bits = self.bits();
            if bits.is_empty() {
                out.push("bits grid empty".into());
            } else if let Some(b) = bits.iter().find(|b| !(1..=MAX_BITS).contains(*b)) {
                out.push(format!("bits {b} out of [1, {MAX_BITS}]"));
            }
        }
        if e == Experiment::SemanticMixture {
            let s = &self.semantic;
            if s.classes == 0 {
                out.push("semantic.classes must be at least 1".into());
            }
            if !positive(s.spacing) || !positive(s.std) {
                out.push("semantic.spacing and semantic.std must be positive".into());
            }
            let ks = self.classes();
            if ks.is_empty() {
                out.push("classes grid empty".into());
            } else if let Some(k) = ks.iter().find(|&&k| k == 0 || k > s.classes) {
                out.push(format!("classes {k} out of [1, {}]", s.classes));
            }
        }
        if self.mc_samples > 0 {
            if self.seed.is_none() {
                out.push("seed required when mc_samples > 0".into());
            }
            if !e.supports_mc() {
                out.push(format!("mc_samples is not supported by {}", e.name()));
            }
        }
        if e.sets_truth() && self.truth.is_some() {
            out.push(format!("truth is set by the {} grid; remove it", e.name()));
        }
        if e.sets_design() && self.design.is_some() {
            out.push(format!("design is set by the {} grid; remove it", e.name()));
        }
        if !e.sets_design() {
            if let Err(err) = self.design_law() {
                out.push(err.to_string());
            } else if matches!(e, Experiment::MeanSweep | Experiment::VarianceSweep)
                && !matches!(self.design_law(), Ok(Distribution64::Gaussian(_)))
            {
                out.push(format!("{} needs a gaussian design law", e.name()));
            }
        }
        if !e.sets_truth() {
            if let Err(err) = self.true_law() {
                out.push(err.to_string());
            }
        }
        if !positive(self.lloyd.tol) || self.lloyd.max_iters == 0 {
            out.push("lloyd.tol and lloyd.max_iters must be positive".into());
        }
        out
    }
}

fn law_or(cfg: &Option<DistributionConfig>, fallback: Distribution64, role: &str) -> Result<Distribution64, CliError> {
    match cfg {
        Some(c) => Distribution64::try_from(c.clone()).map_err(|e| CliError::Parse(format!("{role} law: {e}"))),
        None => Ok(fallback),
    }
}
