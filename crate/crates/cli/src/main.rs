//! `crstates`: construct, classify, decompose and probe bipartite states.
//!
//! All reports are JSON on standard output; diagnostics go to standard
//! error. Exit codes: 0 success, 1 negative verdict, 2 usage or I/O error,
//! 3 inconclusive decomposition.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crstates_core::error::Error;
use crstates_core::families;
use crstates_core::io;
use crstates_core::ops::{self, SitesDescriptor};
use crstates_core::probe;
use crstates_core::reduce::{self, Verdict};
use crstates_core::state::{random_state, BipartiteState, ToleranceConfig};

/// Decomposition size guard: the representation of `T` holds `(k^2)^2`
/// real entries, so the state dimension is capped.
const DECOMPOSE_DIM_CAP: usize = 256;

#[derive(Parser)]
#[command(name = "crstates", version, about = "Completely reducible bipartite states")]
struct Cli {
    /// Relative PSD slack.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_psd: f64,
    /// Absolute vanishing threshold for Frobenius norms.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_zero: f64,
    /// Relative spectral-gap threshold for multiplicity decisions.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_gap: f64,
    /// RNG seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the condition flags (PSD, PPT, SPC, realignment invariance).
    Classify { path: PathBuf },
    /// Decide complete reducibility; exit 0 = reducible, 1 = not, 3 = inconclusive.
    Decompose {
        path: PathBuf,
        /// Also write the certificate to this file.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Re-verify a stored certificate against a state.
    Certify {
        state: PathBuf,
        certificate: PathBuf,
    },
    /// Construct a named state family and write it to a file.
    Construct(ConstructArgs),
    /// Shuffle two or more states into one bipartite state.
    Shuffle {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Apply a structural transform to a state file.
    Transform {
        path: PathBuf,
        op: TransformOp,
        /// Exponent for power / root.
        #[arg(long)]
        n: Option<u32>,
        /// Site index for ptrace.
        #[arg(long)]
        site: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Probe shuffles of partial transposes with rank-two-span vectors.
    Probe {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Run even when inputs are not realignment-invariant (control runs).
        #[arg(long)]
        allow_non_invariant: bool,
    },
}

#[derive(Args)]
struct ConstructArgs {
    family: Family,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Werner,
    Counterexample,
    Maxent,
    DiagPair,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformOp {
    Power,
    Root,
    Support,
    Ptrace,
    Pt,
    Realign,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match ToleranceConfig::new(cli.tol_psd, cli.tol_zero, cli.tol_gap) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, cfg: &ToleranceConfig) -> Result<u8, Error> {
    match &cli.command {
        Command::Classify { path } => {
            let (state, _) = io::read_state(path, cfg)?;
            let flags = families::classify(&state, cfg)?;
            println!("{}", io::to_json_string(&flags)?);
            Ok(0)
        }
        Command::Decompose { path, json_out } => {
            let (state, _) = io::read_state(path, cfg)?;
            if state.dim() > DECOMPOSE_DIM_CAP {
                return Err(Error::Parameter(format!(
                    "state dimension {} exceeds the decomposition cap {DECOMPOSE_DIM_CAP} \
                     (the representation of T holds (k^2)^2 real entries)",
                    state.dim()
                )));
            }
            let cert = reduce::decompose(&state, cfg);
            let json = io::certificate_to_json(&cert);
            let text = io::to_json_string(&json)?;
            if let Some(out) = json_out {
                std::fs::write(out, text.clone() + "\n")?;
            }
            println!("{text}");
            Ok(match cert.verdict {
                Verdict::CompletelyReducible => 0,
                Verdict::NotCompletelyReducible => 1,
                Verdict::Inconclusive => 3,
            })
        }
        Command::Certify { state, certificate } => {
            let (gamma, _) = io::read_state(state, cfg)?;
            let text = std::fs::read_to_string(certificate)?;
            let json: io::CertificateJson = serde_json::from_str(&text)?;
            let cert = io::certificate_from_json(&json, cfg)?;
            let (valid, reason) = reduce::verify_certificate(&gamma, &cert, cfg)?;
            println!(
                "{}",
                io::to_json_string(&serde_json::json!({
                    "valid": valid,
                    "verdict": cert.verdict,
                    "reason": reason,
                }))?
            );
            Ok(if valid { 0 } else { 1 })
        }
        Command::Construct(args) => {
            let (state, sites) = construct(args, cli.seed, cfg)?;
            io::write_state(&args.out, &state, sites.as_ref())?;
            eprintln!(
                "wrote {} ({}x{} state on ({}, {}))",
                args.out.display(),
                state.dim(),
                state.dim(),
                state.k(),
                state.m()
            );
            Ok(0)
        }
        Command::Shuffle { paths, out } => {
            let mut states = Vec::with_capacity(paths.len());
            for p in paths {
                states.push(io::read_state(p, cfg)?.0);
            }
            let (shuffled, sites) = ops::shuffle(&states, cfg)?;
            io::write_state(out, &shuffled, Some(&sites))?;
            eprintln!(
                "wrote {} (shuffle of {} states on ({}, {}))",
                out.display(),
                states.len(),
                shuffled.k(),
                shuffled.m()
            );
            Ok(0)
        }
        Command::Transform {
            path,
            op,
            n,
            site,
            out,
        } => {
            let (state, sites) = io::read_state(path, cfg)?;
            let (result, new_sites) = transform(&state, sites, *op, *n, *site, cfg)?;
            io::write_state(out, &result, new_sites.as_ref())?;
            Ok(0)
        }
        Command::Probe {
            paths,
            trials,
            allow_non_invariant,
        } => {
            let mut states = Vec::with_capacity(paths.len());
            for p in paths {
                states.push(io::read_state(p, cfg)?.0);
            }
            let report = probe::probe(&states, *trials, cli.seed, cfg, *allow_non_invariant)?;
            println!("{}", io::to_json_string(&report)?);
            eprintln!("{}", report.summary_line());
            Ok(if report.violations == 0 { 0 } else { 1 })
        }
    }
}

fn construct(
    args: &ConstructArgs,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<(BipartiteState, Option<SitesDescriptor>), Error> {
    let need = |opt: Option<f64>, name: &str| {
        opt.ok_or_else(|| Error::Parameter(format!("--{name} is required for this family")))
    };
    let state = match args.family {
        Family::Werner => families::werner(
            args.k,
            need(args.a, "a")?,
            need(args.b, "b")?,
            need(args.c, "c")?,
            cfg,
        )?,
        Family::Counterexample => {
            let ce = families::counterexample_delta(args.k, need(args.eps, "eps")?, cfg)?;
            eprintln!(
                "G_delta smallest singular value: {:.6e}",
                ce.g_min_singular
            );
            ce.state
        }
        Family::Maxent => families::maxent_state(args.k, cfg)?,
        Family::DiagPair => families::diag_pair_state(args.k, cfg)?,
        Family::Random => {
            let m = args.m.unwrap_or(args.k);
            let rank = args
                .rank
                .ok_or_else(|| Error::Parameter("--rank is required for random".into()))?;
            random_state(args.k, m, rank, seed, cfg)?
        }
    };
    Ok((state, None))
}

fn transform(
    state: &BipartiteState,
    sites: Option<SitesDescriptor>,
    op: TransformOp,
    n: Option<u32>,
    site: Option<usize>,
    cfg: &ToleranceConfig,
) -> Result<(BipartiteState, Option<SitesDescriptor>), Error> {
    let need_n = || n.ok_or_else(|| Error::Parameter("--n is required for this transform".into()));
    match op {
        TransformOp::Power => Ok((families::power(state, need_n()?, cfg)?, sites)),
        TransformOp::Root => Ok((families::root(state, need_n()?, cfg)?, sites)),
        TransformOp::Support => Ok((families::support_state(state, cfg)?, sites)),
        TransformOp::Pt => {
            let pt = ops::partial_transpose(state);
            let out = BipartiteState::new(state.k(), state.m(), pt, cfg).map_err(|e| {
                Error::Domain(format!("partial transpose left the PSD cone: {e}"))
            })?;
            Ok((out, sites))
        }
        TransformOp::Realign => {
            let r = ops::realignment(state)?;
            let out = BipartiteState::new(state.k(), state.m(), r, cfg).map_err(|e| {
                Error::Domain(format!("realignment left the PSD cone: {e}"))
            })?;
            Ok((out, sites))
        }
        TransformOp::Ptrace => {
            let site =
                site.ok_or_else(|| Error::Parameter("--site is required for ptrace".into()))?;
            let sites = sites.unwrap_or_else(|| SitesDescriptor::bipartite(state.k(), state.m()));
            let (matrix, rest) = ops::partial_trace(state.matrix(), &sites, site)?;
            let out = BipartiteState::new(rest.left_dim(), rest.right_dim(), matrix, cfg)?;
            Ok((out, Some(rest)))
        }
    }
}
