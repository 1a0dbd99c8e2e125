use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fmlab::cli::{self, Dims, ExperimentConfig, GeneratorKind, OutputFormat, SuiteKind};
use fmlab::generators::{
    finite_gabor, gabor_lattice, harmonic_tight, onb, random_frame, random_symbol,
    DEFAULT_CONDITION_CAP,
};
use fmlab::{io, Error, Multiplier, Result, Tol};

#[derive(Parser)]
#[command(
    name = "fmlab",
    version,
    about = "Seeded experiments on finite frame multipliers"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a report.
    Run {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteKind,
        /// Dimensions as `dxN`; repeat for several shapes.
        #[arg(long = "dims", default_values = ["3x6"])]
        dims: Vec<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "tol-rel", default_value_t = 1e-8)]
        tol_rel: f64,
        #[arg(long, value_enum, default_value = "random")]
        generator: GeneratorKind,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        /// Zero the wall-time field so repeated runs are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
    /// Write a frame file.
    Gen {
        #[arg(long, value_enum, default_value = "random")]
        generator: GeneratorKind,
        #[arg(long, default_value = "3x6")]
        dims: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a symbol file with moduli uniform in [lo, hi].
    GenSymbol {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0.5)]
        lo: f64,
        #[arg(long, default_value_t = 2.0)]
        hi: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print frame bounds, or the inversion report of a multiplier.
    Inspect {
        frame: PathBuf,
        /// Analysis frame; with --symbol, inspects the multiplier.
        #[arg(long)]
        psi: Option<PathBuf>,
        #[arg(long)]
        symbol: Option<PathBuf>,
    },
}

fn generate(kind: GeneratorKind, dims: Dims, seed: u64) -> Result<fmlab::Frame> {
    match kind {
        GeneratorKind::Random => random_frame(dims.d, dims.n, seed, DEFAULT_CONDITION_CAP),
        GeneratorKind::Riesz => random_frame(dims.d, dims.d, seed, DEFAULT_CONDITION_CAP),
        GeneratorKind::Harmonic => harmonic_tight(dims.d, dims.n),
        GeneratorKind::Onb => onb(dims.d),
        GeneratorKind::Gabor => {
            let (d, n) = (dims.d, dims.n);
            let (a, b) = gabor_lattice(d, n)
                .ok_or_else(|| Error::ConfigInvalid(format!("no Gabor lattice for {dims}")))?;
            finite_gabor(d, a, b)
        }
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run {
            suite,
            dims,
            trials,
            seed,
            tol_rel,
            generator,
            out,
            format,
            no_timing,
        } => {
            let cfg = ExperimentConfig {
                suite,
                dims: dims.iter().map(|s| s.parse()).collect::<Result<_>>()?,
                trials,
                seed,
                tol: Tol::default()
                    .with_rel_eq(tol_rel)
                    .map_err(|e| Error::ConfigInvalid(e.to_string()))?,
                generator,
                output_path: out,
                format,
            };
            let mut reports = cli::run(&cfg)?;
            if no_timing {
                reports = reports.iter().map(|r| r.without_wall_time()).collect();
            }
            for r in &reports {
                eprintln!("{}", r.summary());
            }
            match &cfg.output_path {
                Some(path) => {
                    for p in cli::save_reports(&reports, path, cfg.format)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => {
                    for r in &reports {
                        match cfg.format {
                            OutputFormat::Json => print!("{}", r.to_json()),
                            OutputFormat::Csv => print!("{}", r.to_csv()?),
                        }
                    }
                }
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
        Command::Gen {
            generator,
            dims,
            seed,
            out,
        } => {
            let frame = generate(generator, dims.parse()?, seed)?;
            io::save_frame(&frame, &out)?;
            Ok(true)
        }
        Command::GenSymbol {
            count,
            lo,
            hi,
            seed,
            out,
        } => {
            io::save_symbol(&random_symbol(count, lo, hi, seed)?, &out)?;
            Ok(true)
        }
        Command::Inspect { frame, psi, symbol } => {
            let tol = Tol::default();
            let phi = io::load_frame(&frame, &tol)?;
            let (a, b) = phi.bounds();
            println!(
                "d={} N={} A={a:.12e} B={b:.12e} B/A={:.6e}",
                phi.dim(),
                phi.count(),
                b / a
            );
            if let (Some(psi), Some(symbol)) = (psi, symbol) {
                let psi = io::load_frame(&psi, &tol)?;
                let m = io::load_symbol(&symbol)?;
                let mult = Multiplier::build(&m, &phi, &psi, &tol)?;
                let diag = mult.inv_diag();
                println!(
                    "sigma_min={:.12e} sigma_max={:.12e} invertible={}",
                    diag.sigma_min, diag.sigma_max, diag.invertible
                );
                if mult.is_invertible() {
                    let r = mult.inversion_report(&tol)?;
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&r).expect("report serializes")
                    );
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Args::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
