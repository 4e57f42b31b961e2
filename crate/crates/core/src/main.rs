use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use lemtree::exactcomb::{exact_moments, exact_pgf, expand_f, ExactRational, UniformSampler};
use lemtree::exprunner::{
    emit_lemniscate_plot, run, trial_rng, Experiment, ExperimentConfig, ExperimentError, RunOutput,
};
use lemtree::lemgeo::{PolynomialRep, DEFAULT_PAIRING_RADIUS};
use lemtree::polymodels::ModelKind;

#[derive(Parser)]
#[command(
    name = "lemtree",
    version,
    about = "Lemniscate trees: exact counts, sampling and Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Output {
    /// Directory for trials.csv and summary.json. The summary is always
    /// printed to stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Coefficient table a(n,k) as CSV.
    Coeffs {
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact PGF, mean and variance of the outdegree-2 count at one size.
    Pgf {
        #[arg(long)]
        size: usize,
    },
    /// Uniform random trees, one JSON object per line.
    SampleTree {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    Clt {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        out: Output,
    },
    Simulate {
        #[arg(long)]
        model: String,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        out: Output,
    },
    Sweep {
        #[arg(long)]
        model: String,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<usize>,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        out: Output,
    },
    ChebyshevTable {
        #[arg(long)]
        max_degree: usize,
        #[arg(long)]
        step: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Petal polylines of every singular component of a polynomial given
    /// as JSON (zeros, monomial_coeffs or cheb_coeffs).
    Trace {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Pairing {
        #[arg(long)]
        model: String,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_PAIRING_RADIUS)]
        r: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Also trace every petal (small-petal census and tree profile).
        #[arg(long)]
        trace_petals: bool,
        #[command(flatten)]
        out: Output,
    },
}

fn model(name: &str) -> Result<ModelKind, ExperimentError> {
    name.parse()
        .map_err(|e: lemtree::polymodels::ModelError| ExperimentError::Config(e.to_string()))
}

fn emit(o: &RunOutput, out: &Output) -> Result<(), ExperimentError> {
    if let Some(dir) = &out.out_dir {
        o.write_to(dir)?;
    }
    print!("{}", o.summary_json());
    Ok(())
}

fn experiment(e: Experiment, seed: u64, jobs: usize, out: &Output) -> Result<(), ExperimentError> {
    let cfg = ExperimentConfig {
        experiment: e,
        master_seed: seed,
        jobs,
    };
    match run(&cfg) {
        Ok(o) => {
            emit(&o, out)?;
            o.check_rejection()
        }
        Err(ExperimentError::ExcessiveRejection {
            degree,
            rate,
            reasons,
            partial,
        }) => {
            emit(&partial, out)?;
            Err(ExperimentError::ExcessiveRejection {
                degree,
                rate,
                reasons,
                partial,
            })
        }
        Err(e) => Err(e),
    }
}

fn read_poly(path: &Path) -> Result<PolynomialRep, ExperimentError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))
}

fn dispatch(cmd: Cmd) -> Result<(), ExperimentError> {
    match cmd {
        Cmd::Coeffs { n_max, out } => {
            let table = expand_f(n_max);
            let mut w = BufWriter::new(File::create(&out)?);
            table.write_csv(&mut w)?;
            w.flush()?;
        }
        Cmd::Pgf { size } => {
            if size == 0 {
                return Err(ExperimentError::Config("size must be at least 1".into()));
            }
            let table = expand_f(size - 1);
            let bad = |e: lemtree::exactcomb::SeriesError| ExperimentError::Numeric(e.to_string());
            let pgf = exact_pgf(&table, size).map_err(bad)?;
            let m = exact_moments(&table, size).map_err(bad)?;
            let v = json!({
                "size": size,
                "pgf": pgf.coeffs().iter().map(ExactRational::from).collect::<Vec<_>>(),
                "mean": ExactRational::from(&m.mean),
                "variance": ExactRational::from(&m.variance),
            });
            println!("{v}");
        }
        Cmd::SampleTree { size, seed, count } => {
            if size == 0 {
                return Err(ExperimentError::Config("size must be at least 1".into()));
            }
            let sampler = UniformSampler::new(size);
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            for i in 0..count {
                let t = sampler.sample(&mut trial_rng(seed, i));
                serde_json::to_writer(&mut w, &t.to_raw()).expect("tree serialises");
                writeln!(w)?;
            }
            w.flush()?;
        }
        Cmd::Clt {
            size,
            trials,
            seed,
            jobs,
            out,
        } => {
            experiment(Experiment::Clt { size, trials }, seed, jobs, &out)?;
        }
        Cmd::Simulate {
            model: m,
            degree,
            trials,
            seed,
            jobs,
            out,
        } => {
            let model = model(&m)?;
            experiment(Experiment::Simulate { model, degree, trials }, seed, jobs, &out)?;
        }
        Cmd::Sweep {
            model: m,
            degrees,
            trials,
            seed,
            jobs,
            out,
        } => {
            let model = model(&m)?;
            experiment(Experiment::Sweep { model, degrees, trials }, seed, jobs, &out)?;
        }
        Cmd::ChebyshevTable {
            max_degree,
            step,
            trials,
            seed,
            jobs,
            out,
        } => {
            experiment(
                Experiment::ChebyshevTable {
                    max_degree,
                    step,
                    trials,
                },
                seed,
                jobs,
                &out,
            )?;
        }
        Cmd::Trace { poly, out } => {
            let p = read_poly(&poly)?;
            let plot = emit_lemniscate_plot(&p, &out)?;
            if !plot.complete {
                return Err(ExperimentError::Numeric(plot.error.unwrap_or_default()));
            }
        }
        Cmd::Pairing {
            model: m,
            degree,
            trials,
            r,
            seed,
            jobs,
            trace_petals,
            out,
        } => {
            let model = model(&m)?;
            experiment(
                Experiment::Pairing {
                    model,
                    degree,
                    trials,
                    r,
                    trace_petals,
                },
                seed,
                jobs,
                &out,
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
