use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use cqi::analytics::{self, heatmap_grid, report};
use cqi::export::{self, SweepRow};
use cqi::protocol::estimate_success;
use cqi::verify::{run_suite, SuiteConfig};
use cqi::{ProtocolParams, PureState};

#[derive(Parser)]
#[command(name = "cqi", version, about = "Concealed teleportation over a partially entangled channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimate of the success probability
    Run {
        #[command(flatten)]
        key: KeyArgs,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed-form probabilities and the exact oracle value
    Exact {
        #[command(flatten)]
        key: KeyArgs,
        #[command(flatten)]
        psi: PsiArgs,
    },
    /// Every probability over an (x, y) grid
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long, default_value_t = 11)]
        resolution: usize,
        /// Defaults to standard output
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Success probability image over the unit square
    Heatmap {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Pgm)]
        format: Format,
    },
    /// Runs the self-check suite
    Verify {
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
        #[arg(long, hide = true, default_value_t = 1.0, allow_negative_numbers = true)]
        tolerance_scale: f64,
    },
}

#[derive(Args)]
struct KeyArgs {
    /// Channel angle in [0, pi/2]
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, allow_negative_numbers = true)]
    y: f64,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PsiArgs {
    /// Amplitudes as re0,im0,re1,im1
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    psi: Option<Vec<f64>>,
    /// Bloch angles as polar,azimuth
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bloch: Option<Vec<f64>>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Pgm,
}

/// Input error: reported on one line, exit status 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

impl PsiArgs {
    fn state(&self) -> Result<PureState, Usage> {
        if let Some(b) = &self.bloch {
            let [polar, azimuth] = b[..] else {
                return Err(Usage(format!("--bloch takes 2 comma-separated values, got {}", b.len())));
            };
            return Ok(PureState::from_bloch(polar, azimuth)?);
        }
        let v = self.psi.as_deref().expect("clap enforces one of --psi/--bloch");
        if v.len() != 4 {
            return Err(Usage(format!("--psi takes 4 comma-separated values, got {}", v.len())));
        }
        let amps = vec![Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])];
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !n2.is_finite() || n2 == 0.0 {
            return Err(Usage(format!("psi must have a finite nonzero norm (norm^2 = {n2})")));
        }
        if (n2 - 1.0).abs() > 1e-6 {
            eprintln!("warning: psi normalized (norm^2 was {n2})");
        }
        Ok(PureState::normalize(amps)?)
    }
}

fn params(key: &KeyArgs, psi: &PsiArgs) -> Result<ProtocolParams, Usage> {
    let params = ProtocolParams::new(key.theta, key.x, key.y, psi.state()?)?;
    // surfaces DegenerateBasis before any sampling
    report(&params)?;
    Ok(params)
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn execute(command: Command) -> Result<ExitCode, Usage> {
    match command {
        Command::Run { key, psi, shots, seed } => {
            let p = params(&key, &psi)?;
            let analytic = report(&p)?.p_xy;
            let (p_mc, stderr) = estimate_success(&p, shots, seed)?;
            let mut out = io::stdout().lock();
            export::write_run(&mut out, &p, shots, seed, p_mc, stderr, analytic)?;
        }
        Command::Exact { key, psi } => {
            let p = params(&key, &psi)?;
            let r = report(&p)?;
            let oracle = analytics::oracle_success_prob(&p)?;
            export::write_exact(&mut io::stdout().lock(), &p, &r, oracle)?;
        }
        Command::Sweep { theta, psi, resolution, output } => {
            let psi = psi.state()?;
            let grid = heatmap_grid(theta, &psi, resolution)?;
            let rows: Vec<SweepRow> = (0..resolution * resolution)
                .into_par_iter()
                .map(|k| {
                    let (x, y) = (grid.coord(k % resolution), grid.coord(k / resolution));
                    let p = ProtocolParams::new(theta, x, y, psi.clone()).expect("validated by the grid");
                    let cell =
                        grid.values[k].and_then(|_| Some((report(&p).ok()?, analytics::oracle_success_prob(&p).ok()?)));
                    (x, y, cell)
                })
                .collect();
            let mut out = open_output(output.as_deref())?;
            export::write_sweep(&mut out, theta, &rows)?;
            out.flush()?;
        }
        Command::Heatmap { theta, psi, resolution, output, format } => {
            if theta <= 0.0 {
                return Err(Usage(format!("heatmap needs theta in (0, pi/2], got {theta}")));
            }
            let grid = heatmap_grid(theta, &psi.state()?, resolution)?;
            match format {
                Format::Pgm => {
                    let path = output.unwrap_or_else(|| PathBuf::from("heatmap.pgm"));
                    let mut pgm = open_output(Some(&path))?;
                    export::write_pgm(&mut pgm, &grid)?;
                    pgm.flush()?;
                    let mut csv = open_output(Some(&path.with_extension("csv")))?;
                    export::write_grid_csv(&mut csv, &grid)?;
                    csv.flush()?;
                }
                Format::Csv => {
                    let mut csv = open_output(output.as_deref())?;
                    export::write_grid_csv(&mut csv, &grid)?;
                    csv.flush()?;
                }
            }
        }
        Command::Verify { seed, tolerance_scale } => {
            let checks = run_suite(&SuiteConfig { seed, tolerance_scale, ..SuiteConfig::default() });
            let mut out = io::stdout().lock();
            for c in &checks {
                writeln!(out, "{c}")?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            writeln!(out, "{} checks, {failed} failed", checks.len())?;
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
