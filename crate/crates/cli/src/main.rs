//! `scc`: command-line front end for the storage/computation/communication
//! tradeoff toolkit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use scc_core::harness::{self, Report, VerifyMode};
use scc_core::rational::parse_q;
use scc_core::{Exec, Q};
use serde::de::DeserializeOwned;
use serde::Serialize;

const OUT_DIR_ENV: &str = "SCC_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "scc",
    version,
    about = "Exact storage/computation/communication tradeoffs for coded distributed computing"
)]
struct Cli {
    /// Run without rayon.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file. Defaults to `$SCC_OUT_DIR/<name>` if set, else stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Export the optimal-load surface, OCP/OCM curves and corners as CSV.
    Surface {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'K', long)]
        nodes: Option<usize>,
        #[arg(long, value_parser = parse_rational)]
        r_step: Option<Q>,
        #[arg(long, value_parser = parse_rational)]
        c_step: Option<Q>,
        /// Append decimal columns.
        #[arg(long)]
        float: bool,
    },
    /// Run one D3C corner scheme end to end.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'K', long)]
        nodes: Option<usize>,
        #[arg(short, long)]
        r: Option<usize>,
        #[arg(short, long)]
        g: Option<usize>,
        #[arg(long)]
        eta: Option<usize>,
        #[command(flatten)]
        job: JobFlags,
        /// Also write the scheme structure as JSON.
        #[arg(long)]
        dump_scheme: Option<PathBuf>,
    },
    /// Run a file-sharing mix of two corner schemes.
    Share {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'K', long)]
        nodes: Option<usize>,
        /// First corner as `r,g`.
        #[arg(long, value_parser = parse_corner)]
        a: Option<harness::config::Corner>,
        /// Second corner as `r,g`.
        #[arg(long, value_parser = parse_corner)]
        b: Option<harness::config::Corner>,
        /// File fraction of the first corner.
        #[arg(long, value_parser = parse_rational)]
        alpha: Option<Q>,
        #[command(flatten)]
        job: JobFlags,
        #[arg(long)]
        dump_scheme: Option<PathBuf>,
    },
    /// Check the converse by exhaustive search or random sampling.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'K', long)]
        nodes: Option<usize>,
        #[arg(short = 'N', long)]
        files: Option<usize>,
        #[arg(short, long, value_parser = parse_rational)]
        r: Option<Q>,
        #[arg(short, long, value_parser = parse_rational)]
        c: Option<Q>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        timing: bool,
    },
    /// Simulate every corner over a range of K; CSV rows plus a JSON summary.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        eta: Option<usize>,
        /// Where to write the JSON summary. Defaults next to the CSV, else stderr.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Args)]
struct JobFlags {
    #[arg(short = 'T', long)]
    iva_bits: Option<usize>,
    #[arg(short = 'F', long)]
    file_bits: Option<usize>,
    #[arg(short = 'B', long)]
    output_bits: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Random,
}

fn parse_rational(s: &str) -> Result<Q, String> {
    parse_q(s).map_err(|e| e.to_string())
}

fn parse_corner(s: &str) -> Result<harness::config::Corner, String> {
    let (r, g) = s.split_once(',').ok_or("expected r,g")?;
    Ok(harness::config::Corner {
        r: r.trim().parse().map_err(|e| format!("r: {e}"))?,
        g: g.trim().parse().map_err(|e| format!("g: {e}"))?,
    })
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

impl From<scc_core::Error> for Failure {
    fn from(e: scc_core::Error) -> Self {
        if e.is_config() {
            Failure::Config(e.into())
        } else {
            Failure::Run(e.into())
        }
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn load<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config_err)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(config_err)
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn target(out: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
    out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| Path::new(&d).join(name))
    })
}

fn emit(path: Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))
                    .map_err(Failure::Run)?;
            }
            fs::write(&p, bytes)
                .with_context(|| format!("writing {}", p.display()))
                .map_err(Failure::Run)
        }
        None => match std::io::stdout().write_all(bytes) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("writing stdout").map_err(Failure::Run),
        },
    }
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn finish_report(report: &Report, out: &Option<PathBuf>, name: &str) -> Result<bool, Failure> {
    emit(target(out, name), &json(report))?;
    Ok(report.pass)
}

fn apply_job(
    job: JobFlags,
    t: &mut Option<usize>,
    f: &mut usize,
    b: &mut usize,
    seed: &mut u64,
    timing: &mut bool,
) {
    if job.iva_bits.is_some() {
        *t = job.iva_bits;
    }
    set(f, job.file_bits);
    set(b, job.output_bits);
    set(seed, job.seed);
    *timing |= job.timing;
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    match cli.cmd {
        Cmd::Surface {
            common,
            nodes,
            r_step,
            c_step,
            float,
        } => {
            let mut cfg: harness::SurfaceConfig = load(&common.config)?;
            set(&mut cfg.nodes, nodes);
            set(&mut cfg.r_step, r_step);
            set(&mut cfg.c_step, c_step);
            cfg.float |= float;
            let rows = harness::cmd_surface(&cfg, exec)?;
            let mut buf = Vec::new();
            harness::write_rows(&rows, cfg.float, &mut buf)?;
            emit(target(&common.out, "surface.csv"), &buf)?;
            Ok(true)
        }
        Cmd::Simulate {
            common,
            nodes,
            r,
            g,
            eta,
            job,
            dump_scheme,
        } => {
            let mut cfg: harness::SimulateConfig = load(&common.config)?;
            set(&mut cfg.nodes, nodes);
            set(&mut cfg.r, r);
            set(&mut cfg.g, g);
            set(&mut cfg.eta, eta);
            apply_job(
                job,
                &mut cfg.iva_bits,
                &mut cfg.file_bits,
                &mut cfg.output_bits,
                &mut cfg.seed,
                &mut cfg.timing,
            );
            let (report, scheme) = harness::cmd_simulate(&cfg, exec)?;
            if let Some(p) = dump_scheme {
                emit(Some(p), &json(&scheme.to_dump()))?;
            }
            finish_report(&report, &common.out, "simulate.json")
        }
        Cmd::Share {
            common,
            nodes,
            a,
            b,
            alpha,
            job,
            dump_scheme,
        } => {
            let mut cfg: harness::ShareConfig = load(&common.config)?;
            set(&mut cfg.nodes, nodes);
            set(&mut cfg.a, a);
            set(&mut cfg.b, b);
            set(&mut cfg.alpha, alpha);
            apply_job(
                job,
                &mut cfg.iva_bits,
                &mut cfg.file_bits,
                &mut cfg.output_bits,
                &mut cfg.seed,
                &mut cfg.timing,
            );
            let (report, scheme) = harness::cmd_share(&cfg, exec)?;
            if let Some(p) = dump_scheme {
                emit(Some(p), &json(&scheme.to_dump()))?;
            }
            finish_report(&report, &common.out, "share.json")
        }
        Cmd::Verify {
            common,
            nodes,
            files,
            r,
            c,
            mode,
            samples,
            seed,
            timing,
        } => {
            let mut cfg: harness::VerifyConfig = load(&common.config)?;
            set(&mut cfg.nodes, nodes);
            set(&mut cfg.files, files);
            set(&mut cfg.r, r);
            set(&mut cfg.c, c);
            set(
                &mut cfg.mode,
                mode.map(|m| match m {
                    ModeArg::Exhaustive => VerifyMode::Exhaustive,
                    ModeArg::Random => VerifyMode::Random,
                }),
            );
            set(&mut cfg.samples, samples);
            set(&mut cfg.seed, seed);
            cfg.timing |= timing;
            let report = harness::cmd_verify(&cfg, exec)?;
            finish_report(&report, &common.out, "verify.json")
        }
        Cmd::Report {
            common,
            k_min,
            k_max,
            eta,
            summary,
        } => {
            let mut cfg: harness::ReportConfig = load(&common.config)?;
            set(&mut cfg.k_min, k_min);
            set(&mut cfg.k_max, k_max);
            set(&mut cfg.eta, eta);
            let (runs, rows) = harness::cmd_report(&cfg, exec)?;
            let csv_path = target(&common.out, "report.csv");
            let summary_path =
                summary.or_else(|| csv_path.as_ref().map(|p| p.with_extension("json")));
            let mut buf = Vec::new();
            harness::write_rows(&rows, false, &mut buf)?;
            emit(csv_path, &buf)?;
            let pass = runs.iter().all(|r| r.pass);
            let doc = serde_json::json!({ "pass": pass, "config": cfg, "runs": runs });
            match summary_path {
                Some(p) => emit(Some(p), &json(&doc))?,
                None => eprintln!("{}", serde_json::to_string(&doc).expect("serializable")),
            }
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("scc: check failed");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("scc: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("scc: config error: {e:#}");
            ExitCode::from(2)
        }
    }
}
