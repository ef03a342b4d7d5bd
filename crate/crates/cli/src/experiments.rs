//! Grid experiments. Each returns a table whose rows follow grid order.

use std::path::Path;

use mismatch_quant::{
    classification_report, eta, lloyd_max_design, mc_noisy_distortions, phi, rate_recovery_sweep, report_for,
    Channel, Distribution64, DistortionReport64, LabeledSource, LloydConfig, McConfig, NoisyDecoder, Quantizer64,
    Strategy,
};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;

pub const REPORT_HEADER: [&str; 9] =
    ["design_params", "true_params", "bits", "d_fix", "d_gen", "d_ideal", "gain_pct", "ideal_gain_pct", "method"];
pub const REPORT_MC_HEADER: [&str; 3] = ["mc_d_fix", "mc_d_gen", "mc_stderr"];
pub const RATE_HEADER: [&str; 6] = ["bits", "d_fix", "d_gen", "d_ideal_pd", "bias_part", "penalty_factor"];
pub const BSC_HEADER: [&str; 6] = ["epsilon", "sigma0", "sigma1", "d_std", "d_hard", "d_opt"];
pub const BSC_MC_HEADER: [&str; 4] = ["mc_d_std", "mc_d_hard", "mc_d_opt", "mc_stderr"];
pub const RICIAN_HEADER: [&str; 5] = ["K_t", "K_d", "phi_t", "phi_d", "eta_pct"];
pub const SEMANTIC_HEADER: [&str; 6] = ["k", "bits", "acc_fix", "acc_gen", "acc_ideal", "recovery_pct"];

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// One-line summaries for the terminal.
    pub notes: Vec<String>,
}

impl Table {
    fn new(header: impl IntoIterator<Item = &'static str>, rows: Vec<Vec<String>>) -> Self {
        Self { header: header.into_iter().map(String::from).collect(), rows, notes: Vec::new() }
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let io = |source: std::io::Error| CliError::Io { path: path.display().to_string(), source };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
        w.write_record(&self.header).map_err(|e| io(e.into()))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| io(e.into()))?;
        }
        w.flush().map_err(io)
    }
}

/// Round-trip exact: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn failed(operation: &str, params: String) -> impl FnOnce(mismatch_quant::Error) -> CliError + '_ {
    move |source| CliError::Run { operation: operation.to_string(), params, source }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let diagnostics = cfg.validate();
    if !diagnostics.is_empty() {
        return Err(CliError::Invalid(diagnostics));
    }
    match cfg.experiment {
        Experiment::MeanSweep => {
            let design = cfg.design_law()?;
            let sd = design.std_dev();
            report_grid(cfg, &design, sweep_laws(cfg.means(), |m| Distribution64::gaussian(m, sd))?)
        }
        Experiment::VarianceSweep => {
            let design = cfg.design_law()?;
            let mean = design.mean();
            report_grid(cfg, &design, sweep_laws(cfg.stds(), |s| Distribution64::gaussian(mean, s))?)
        }
        Experiment::LaplaceTable | Experiment::SingleReport => report_grid(cfg, &cfg.design_law()?, vec![cfg.true_law()?]),
        Experiment::RateRecovery => rate_recovery(cfg),
        Experiment::BscSweep => bsc_sweep(cfg),
        Experiment::RicianCsi => rician_csi(cfg),
        Experiment::SemanticMixture => semantic_mixture(cfg),
    }
}

fn sweep_laws(
    grid: Vec<f64>,
    law: impl Fn(f64) -> mismatch_quant::Result<Distribution64>,
) -> Result<Vec<Distribution64>, CliError> {
    grid.into_iter().map(law).collect::<mismatch_quant::Result<_>>().map_err(|e| CliError::Invalid(vec![e.to_string()]))
}

fn designs(design: &Distribution64, bits: &[u32], lloyd: &LloydConfig<f64>) -> Result<Vec<Quantizer64>, CliError> {
    bits.par_iter()
        .map(|&b| lloyd_max_design(design, b, lloyd).map_err(failed("lloyd_max_design", format!("law={design}, bits={b}"))))
        .collect()
}

/// Rows ordered by bits, then by true law.
fn report_grid(
    cfg: &ExperimentConfig,
    design: &Distribution64,
    truths: Vec<Distribution64>,
) -> Result<Table, CliError> {
    let bits = cfg.bits();
    let lloyd = cfg.lloyd();
    let quantizers = designs(design, &bits, &lloyd)?;
    let points: Vec<(usize, &Quantizer64, &Distribution64)> = quantizers
        .iter()
        .flat_map(|q| truths.iter().map(move |t| (q, t)))
        .enumerate()
        .map(|(i, (q, t))| (i, q, t))
        .collect();
    let with_mc = cfg.mc_samples > 0;
    let rows = points
        .par_iter()
        .map(|&(i, q, truth)| {
            let mc = with_mc.then(|| McConfig::new(cfg.seed.unwrap_or_default(), cfg.mc_samples).with_stream(i as u64));
            let params = format!("design={design}, true={truth}, bits={}", q.bits());
            let r = report_for(q, truth, &lloyd, mc.as_ref()).map_err(failed("report", params))?;
            Ok(report_row(design, truth, &r, with_mc))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut header: Vec<&str> = REPORT_HEADER.to_vec();
    if with_mc {
        header.extend(REPORT_MC_HEADER);
    }
    Ok(Table::new(header, rows))
}

pub fn report_row(design: &Distribution64, truth: &Distribution64, r: &DistortionReport64, with_mc: bool) -> Vec<String> {
    let mut row = vec![
        design.to_string(),
        truth.to_string(),
        r.bits.to_string(),
        num(r.d_fix),
        num(r.d_gen),
        opt(r.d_ideal),
        num(r.relative_gain_pct),
        opt(r.ideal_gain_pct),
        r.method.as_str().to_string(),
    ];
    if with_mc {
        row.extend([opt(r.mc_d_fix), opt(r.mc_d_gen), opt(r.mc_stderr)]);
    }
    row
}

fn rate_recovery(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let (design, truth) = (cfg.design_law()?, cfg.true_law()?);
    let bits = cfg.bits();
    let sweep = rate_recovery_sweep(&design, &truth, &bits, &cfg.lloyd())
        .map_err(failed("rate_recovery", format!("design={design}, true={truth}, bits={bits:?}")))?;
    let rows = sweep
        .reports
        .iter()
        .map(|r| {
            vec![
                r.bits.to_string(),
                num(r.d_total_fix),
                num(r.d_total_gen),
                num(r.d_ideal_pd),
                num(r.bias_part),
                num(r.penalty_factor),
            ]
        })
        .collect();
    let mut table = Table::new(RATE_HEADER, rows);
    let slope = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    table.notes.push(format!(
        "log2 slope over the last 4 points: d_gen {}, d_fix {}",
        slope(sweep.slope_gen),
        slope(sweep.slope_fix)
    ));
    Ok(table)
}

/// Rows ordered by sigma0, then sigma1, then epsilon.
fn bsc_sweep(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let mut points = Vec::new();
    for s0 in cfg.sigma0() {
        for s1 in cfg.sigma1() {
            for eps in cfg.epsilons() {
                points.push((s0, s1, eps));
            }
        }
    }
    let with_mc = cfg.mc_samples > 0;
    let lloyd = cfg.lloyd();
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, &(s0, s1, eps))| {
            let params = format!("sigma0={s0}, sigma1={s1}, epsilon={eps}");
            let r = mismatch_quant::strategy_report(s0, s1, eps).map_err(failed("strategy_report", params.clone()))?;
            let mut row = vec![num(eps), num(s0), num(s1), num(r.d_std), num(r.d_hard), num(r.d_opt)];
            if with_mc {
                let mc = McConfig::new(cfg.seed.unwrap_or_default(), cfg.mc_samples).with_stream(i as u64);
                let est = simulate_bsc(s0, s1, eps, &lloyd, &mc).map_err(failed("bsc simulation", params))?;
                let stderr = est.iter().map(|e| e.stderr).fold(0.0, f64::max);
                row.extend(est.iter().map(|e| num(e.mean)));
                row.push(num(stderr));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut header: Vec<&str> = BSC_HEADER.to_vec();
    if with_mc {
        header.extend(BSC_MC_HEADER);
    }
    Ok(Table::new(header, rows))
}

fn simulate_bsc(
    s0: f64,
    s1: f64,
    eps: f64,
    lloyd: &LloydConfig<f64>,
    mc: &McConfig,
) -> mismatch_quant::Result<Vec<mismatch_quant::McEstimate<f64>>> {
    let q = lloyd_max_design(&Distribution64::gaussian(0.0, s0)?, 1, lloyd)?;
    let truth = Distribution64::gaussian(0.0, s1)?;
    let ch = Channel::bsc(1, eps)?;
    let tables = [Strategy::StandardSeparation, Strategy::HardGenerative, Strategy::SoftGenerative]
        .map(|s| NoisyDecoder::build(s, &q, &truth, &ch).map(|d| d.table));
    let [a, b, c] = tables;
    let (a, b, c) = (a?, b?, c?);
    mc_noisy_distortions(q.partition(), &ch, &[&a, &b, &c], &truth, mc)
}

/// Rows ordered by K_d, then K_t.
fn rician_csi(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let mut points = Vec::new();
    for kd in cfg.k_design() {
        for kt in cfg.k_true() {
            points.push((kt, kd));
        }
    }
    let rows = points
        .par_iter()
        .map(|&(kt, kd)| {
            let fail = || failed("rician_csi", format!("K_t={kt}, K_d={kd}"));
            Ok(vec![
                num(kt),
                num(kd),
                num(phi(kt).map_err(fail())?),
                num(phi(kd).map_err(fail())?),
                num(eta(kt, kd).map_err(fail())?),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table::new(RICIAN_HEADER, rows))
}

/// Equally spaced unit classes centred on zero; the truth keeps the first `k`.
pub fn semantic_source(cfg: &ExperimentConfig) -> mismatch_quant::Result<LabeledSource<f64>> {
    let s = &cfg.semantic;
    let centre = (s.classes as f64 - 1.0) / 2.0;
    let means: Vec<f64> = (0..s.classes).map(|i| (i as f64 - centre) * s.spacing).collect();
    LabeledSource::gaussian_classes(&means, s.std)
}

/// Rows ordered by bits, then k.
fn semantic_mixture(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let design = semantic_source(cfg).map_err(failed("semantic_mixture", format!("{:?}", cfg.semantic)))?;
    let marginal = design.marginal().map_err(failed("semantic_mixture", "design marginal".into()))?;
    let bits = cfg.bits();
    let lloyd = cfg.lloyd();
    let quantizers = designs(&marginal, &bits, &lloyd)?;
    let points: Vec<(&Quantizer64, usize)> =
        quantizers.iter().flat_map(|q| cfg.classes().into_iter().map(move |k| (q, k))).collect();
    let rows = points
        .par_iter()
        .map(|&(q, k)| {
            let fail = || failed("semantic_mixture", format!("k={k}, bits={}", q.bits()));
            let active: Vec<usize> = (0..k).collect();
            let truth = design.restrict(&active).map_err(fail())?;
            let r = classification_report(q.partition(), &truth, &design, &lloyd).map_err(fail())?;
            Ok(vec![k.to_string(), q.bits().to_string(), num(r.acc_fix), num(r.acc_gen), num(r.acc_ideal), opt(r.recovery_pct)])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table::new(SEMANTIC_HEADER, rows))
}
