use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mismatch_quant::{lloyd_max_design, report_for, LloydConfig, McConfig};
use mismatch_quant_cli::{parse_bits, parse_law, run, CliError, Experiment, ExperimentConfig, Overrides};

/// A single `--bits` value holding a whole list.
type BitList = Vec<u32>;

#[derive(Parser)]
#[command(name = "mismatch-quant", version, about = "Mismatched scalar quantization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write its CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        experiment: Option<Experiment>,
        /// Comma list with inclusive ranges, e.g. `1,2,5..8`.
        #[arg(long, value_parser = parse_bits)]
        bits: Option<BitList>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mc_samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config and list every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the distortion report for one design/true pair.
    Report {
        /// `gaussian(0,1)`, `laplace(0,0.7)`, `mixture(w:m:s;...)` or a JSON law.
        #[arg(long)]
        design: String,
        #[arg(long = "true")]
        truth: String,
        #[arg(long)]
        bits: u32,
        #[arg(long, default_value_t = 0)]
        mc_samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// `MQ_THREADS` caps the worker pool.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MQ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Parse(format!("MQ_THREADS={raw} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Parse(format!("MQ_THREADS: {e}")))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, experiment, bits, seed, mc_samples, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply(Overrides { experiment, bits, seed, output: out, mc_samples });
            let table = run(&cfg)?;
            let path = cfg.output_path();
            table.write_csv(&path)?;
            println!("{}: wrote {} rows to {}", cfg.experiment.name(), table.rows.len(), path.display());
            for note in &table.notes {
                println!("{note}");
            }
            Ok(())
        }
        Command::Validate { config } => {
            let diagnostics = ExperimentConfig::load(&config)?.validate();
            if diagnostics.is_empty() {
                println!("{}: ok", config.display());
                Ok(())
            } else {
                Err(CliError::Invalid(diagnostics))
            }
        }
        Command::Report { design, truth, bits, mc_samples, seed } => {
            let (design, truth) = (parse_law(&design)?, parse_law(&truth)?);
            if mc_samples > 0 && seed.is_none() {
                return Err(CliError::Invalid(vec!["seed required when mc_samples > 0".into()]));
            }
            let run_err = |source| CliError::Run {
                operation: "report".into(),
                params: format!("design={design}, true={truth}, bits={bits}"),
                source,
            };
            let lloyd = LloydConfig::default();
            let q = lloyd_max_design(&design, bits, &lloyd).map_err(run_err)?;
            let mc = seed.filter(|_| mc_samples > 0).map(|s| McConfig::new(s, mc_samples));
            let r = report_for(&q, &truth, &lloyd, mc.as_ref()).map_err(run_err)?;
            print_report(&design.to_string(), &truth.to_string(), &r);
            Ok(())
        }
    }
}

fn print_report(design: &str, truth: &str, r: &mismatch_quant::DistortionReport64) {
    let line = |k: &str, v: String| println!("{k:<16}{v}");
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.10}"));
    line("design", design.to_string());
    line("true", truth.to_string());
    line("bits", r.bits.to_string());
    line("method", r.method.as_str().to_string());
    line("d_fix", format!("{:.10}", r.d_fix));
    line("d_gen", format!("{:.10}", r.d_gen));
    line("d_ideal", opt(r.d_ideal));
    line("excess", format!("{:.10}", r.excess));
    line("gain_pct", format!("{:.4}", r.relative_gain_pct));
    line("ideal_gain_pct", r.ideal_gain_pct.map_or("n/a".into(), |g| format!("{g:.4}")));
    if let (Some(f), Some(g), Some(se)) = (r.mc_d_fix, r.mc_d_gen, r.mc_stderr) {
        line("mc_d_fix", format!("{f:.10}"));
        line("mc_d_gen", format!("{g:.10}"));
        line("mc_stderr", format!("{se:.3e}"));
    }
    if !r.fallback_bins.is_empty() {
        line("fallback_bins", format!("{:?}", r.fallback_bins));
    }
}
