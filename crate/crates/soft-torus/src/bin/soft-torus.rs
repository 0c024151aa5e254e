//! Command-line surface: generate pairs, compute invariants, project
//! onto exact pairs, and run seeded parameter sweeps.
//!
//! Exit codes: 0 success, 2 usage or unreadable input, 3 spectral gap at
//! 1/2 too small, 4 spectrum on the branch cut, 5 infeasible target,
//! 6 iteration budget exhausted.

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use soft_torus::error::Error;
use soft_torus::generators::{
    haar_unitary, perturb_pair, tensor_lift, theta_pair, twist, voiculescu, Angle, RationalAngle,
    Seed, UnitaryPair,
};
use soft_torus::invariants::{bott_pair, defect, winding, BranchCut, TraceKind};
use soft_torus::matcore::unit_phase;
use soft_torus::pairfile::{self, parse_theta};
use soft_torus::rotrep::{irrep_at, IrrepSpec};
use soft_torus::solver::{project_to_theta_pairs, SolverOptions};
use soft_torus::sweep::{run_sweep, to_csv, SweepConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "soft-torus", version, about = "Obstruction invariants and projections for almost-commuting unitary pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Exact pair (I_m x S1, I_m x S2) for theta = p/q
    Clockshift,
    /// Almost-commuting clock/shift pair of dimension n with winding 1/n
    Voiculescu,
    /// Seeded multiplicative perturbation of an exact pair
    Perturbed,
    /// Independent Haar-random unitaries
    Haar,
    /// Tensor lift (u x S2, v x S1) of an input pair
    Lift,
    /// Scalar twist (r1 u, r2 v) of an input pair
    Twist,
    /// Irreducible representation at a torus base point
    Irrep,
}

#[derive(Clone, Copy, ValueEnum)]
enum Branch {
    Principal,
    Log0,
}

impl Branch {
    fn cut(self) -> BranchCut {
        match self {
            Branch::Principal => BranchCut::principal(),
            Branch::Log0 => BranchCut::log0(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a pair file
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// Dimension (voiculescu, haar)
        #[arg(long)]
        n: Option<usize>,
        /// Target angle, "p/q" or decimal
        #[arg(long)]
        theta: Option<String>,
        /// Block multiplicity (clockshift, perturbed)
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Perturbation size
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Input pair file (lift, twist)
        #[arg(long)]
        input: Option<PathBuf>,
        /// u-phase in turns (twist: scalar factor e^{2 pi i r1}; irrep: root override)
        #[arg(long)]
        r1: Option<f64>,
        /// v-phase in turns
        #[arg(long)]
        r2: Option<f64>,
        /// Base point t1 in turns (irrep)
        #[arg(long, default_value_t = 0.0)]
        t1: f64,
        /// Base point t2 in turns (irrep)
        #[arg(long, default_value_t = 0.0)]
        t2: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Defect, winding, bott and the trace-formula verdict of a pair file
    Invariants {
        pairfile: PathBuf,
        #[arg(long, value_enum, default_value_t = Branch::Principal)]
        branch: Branch,
        #[arg(long, default_value_t = soft_torus::invariants::DEFAULT_GAP_POLICY)]
        gap_policy: f64,
        /// Also write a JSON report
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Project a pair onto the exact theta-pair manifold
    Solve {
        pairfile: PathBuf,
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the solved pair
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the JSON solve report
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Seeded (n, eps) sweep emitting CSV
    Sweep {
        #[arg(long)]
        theta: String,
        /// Comma-separated dimensions, each divisible by q
        #[arg(long)]
        n_list: String,
        /// Comma-separated perturbation sizes
        #[arg(long)]
        eps_list: String,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::GapTooSmall { .. } => 3,
        Error::SpectrumOnCut { .. } => 4,
        Error::Infeasible { .. } | Error::IrrationalTarget { .. } => 5,
        Error::Parse(_)
        | Error::Io(_)
        | Error::Dimension(_)
        | Error::NotDivisible { .. }
        | Error::RootMismatch { .. } => 2,
        _ => 1,
    }
}

fn rational_theta(s: &str) -> Result<RationalAngle, Error> {
    let parsed = parse_theta(s)?;
    if parsed.snapped {
        if let Angle::Rational(r) = parsed.angle {
            eprintln!("note: theta {s} snapped to {r}");
        }
    }
    let theta = parsed.angle.require_rational()?;
    // the toolkit works at matrix scale; block dimension q bounds every
    // construction
    if theta.q() > 512 {
        return Err(Error::Parse(format!(
            "theta denominator {} exceeds the supported matrix scale (512)",
            theta.q()
        )));
    }
    Ok(theta)
}

fn gen_pair(cmd: &Command) -> Result<(UnitaryPair, PathBuf), Error> {
    let Command::Gen {
        kind,
        n,
        theta,
        m,
        eps,
        seed,
        input,
        r1,
        r2,
        t1,
        t2,
        out,
    } = cmd
    else {
        unreachable!()
    };
    let need_theta = || -> Result<RationalAngle, Error> {
        rational_theta(
            theta
                .as_deref()
                .ok_or_else(|| Error::Parse("--theta is required for this kind".into()))?,
        )
    };
    let need_n = || -> Result<usize, Error> {
        n.ok_or_else(|| Error::Parse("--n is required for this kind".into()))
    };
    let need_input = || -> Result<UnitaryPair, Error> {
        pairfile::load(
            input
                .as_deref()
                .ok_or_else(|| Error::Parse("--input is required for this kind".into()))?,
        )
    };
    let pair = match kind {
        GenKind::Clockshift => theta_pair(need_theta()?, *m),
        GenKind::Voiculescu => {
            let n = need_n()?;
            if n < 2 {
                return Err(Error::Parse("--n must be at least 2".into()));
            }
            voiculescu(n)
        }
        GenKind::Perturbed => {
            if !(0.0..=0.5).contains(eps) {
                return Err(Error::Parse("--eps must lie in [0, 0.5]".into()));
            }
            perturb_pair(&theta_pair(need_theta()?, *m), *eps, Seed(*seed))
        }
        GenKind::Haar => {
            let n = need_n()?;
            UnitaryPair::new(
                haar_unitary(n, Seed(*seed)),
                haar_unitary(n, Seed(*seed).offset(1)),
                Angle::ZERO,
            )?
        }
        GenKind::Lift => tensor_lift(&need_input()?, need_theta()?),
        GenKind::Twist => {
            let base = need_input()?;
            twist(
                &base,
                unit_phase(r1.unwrap_or(0.0)),
                unit_phase(r2.unwrap_or(0.0)),
            )
        }
        GenKind::Irrep => {
            let theta = need_theta()?;
            let (t1, t2) = (unit_phase(*t1), unit_phase(*t2));
            let spec = match (r1, r2) {
                (Some(a), Some(b)) => {
                    IrrepSpec::new(theta, t1, t2, unit_phase(*a), unit_phase(*b))?
                }
                (None, None) => IrrepSpec::principal(theta, t1, t2)?,
                _ => {
                    return Err(Error::Parse(
                        "--r1 and --r2 must be given together".into(),
                    ))
                }
            };
            irrep_at(&spec)
        }
    };
    Ok((pair, out.clone()))
}

fn run(cli: Cli) -> Result<u8, Error> {
    match &cli.command {
        cmd @ Command::Gen { .. } => {
            let (pair, out) = gen_pair(cmd)?;
            pairfile::save(&pair, &out)?;
            println!(
                "n={} theta={} defect={}",
                pair.n(),
                pair.theta(),
                defect(&pair)
            );
            Ok(0)
        }
        Command::Invariants {
            pairfile: path,
            branch,
            gap_policy,
            json,
        } => {
            let pair = pairfile::load(path)?;
            let cut = branch.cut();
            let wind_unnorm = winding(&pair, cut, TraceKind::Unnormalized)?;
            let wind_norm = wind_unnorm / pair.n() as f64;
            let report = bott_pair(&pair, *gap_policy)?;
            println!("n={} theta={}", pair.n(), pair.theta());
            println!("defect={}", defect(&pair));
            println!("winding_unnormalized={wind_unnorm}");
            println!("winding_normalized={wind_norm}");
            println!(
                "bott={} rank_above={} gap={}",
                report.bott, report.rank_above, report.gap
            );
            match (report.exel_pass(), report.exel_discrepancy) {
                (Some(true), Some(d)) => println!("exel=pass discrepancy={d}"),
                (Some(false), Some(d)) => println!("exel=FAIL discrepancy={d}"),
                _ => println!("exel=n/a (principal branch does not apply)"),
            }
            if let Some(json_path) = json {
                let doc = json!({
                    "n": pair.n(),
                    "theta": pair.theta().to_string(),
                    "defect": defect(&pair),
                    "branch": match branch { Branch::Principal => "principal", Branch::Log0 => "log0" },
                    "winding_unnormalized": wind_unnorm,
                    "winding_normalized": wind_norm,
                    "bott": report.bott,
                    "rank_above": report.rank_above,
                    "gap": report.gap,
                    "exel_discrepancy": report.exel_discrepancy,
                    "exel_pass": report.exel_pass(),
                });
                pairfile::write_atomic(json_path, serde_json::to_string_pretty(&doc).expect("report").as_bytes())?;
            }
            if report.exel_pass() == Some(false) {
                return Ok(1);
            }
            Ok(0)
        }
        Command::Solve {
            pairfile: path,
            theta,
            max_iter,
            seed,
            out,
            report: report_path,
        } => {
            let pair = pairfile::load(path)?;
            let theta = rational_theta(theta)?;
            let opts = SolverOptions {
                max_iterations: *max_iter,
                seed: Seed(*seed),
                ..SolverOptions::default()
            };
            let (solved, report) = project_to_theta_pairs(&pair, theta, &opts)?;
            if let Some(out) = out {
                pairfile::save(&solved, out)?;
            }
            if let Some(report_path) = report_path {
                let doc = json!({
                    "converged": report.converged,
                    "iterations": report.iterations,
                    "dist_u": report.dist_u,
                    "dist_v": report.dist_v,
                    "relation_residual": report.relation_residual,
                    "objective_trace": report.objective_trace,
                });
                pairfile::write_atomic(report_path, serde_json::to_string_pretty(&doc).expect("report").as_bytes())?;
            }
            println!(
                "converged={} iterations={} dist_u={} dist_v={} relation_residual={}",
                report.converged,
                report.iterations,
                report.dist_u,
                report.dist_v,
                report.relation_residual
            );
            Ok(if report.converged { 0 } else { 6 })
        }
        Command::Sweep {
            theta,
            n_list,
            eps_list,
            trials,
            seed,
            out,
        } => {
            let theta = rational_theta(theta)?;
            let n_list: Vec<usize> = n_list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad n {s:?}")))
                })
                .collect::<Result<_, _>>()?;
            let eps_list: Vec<f64> = eps_list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad eps {s:?}")))
                        .and_then(|x| {
                            if x.is_finite() && x >= 0.0 {
                                Ok(x)
                            } else {
                                Err(Error::Parse(format!("bad eps {s:?}")))
                            }
                        })
                })
                .collect::<Result<_, _>>()?;
            let threads = std::env::var("SOFT_TORUS_THREADS")
                .ok()
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&t| t >= 1);
            let config = SweepConfig {
                theta,
                n_list,
                eps_list,
                trials: *trials,
                base_seed: Seed(*seed),
                threads,
            };
            let rows = run_sweep(&config)?;
            pairfile::write_atomic(out, to_csv(&rows).as_bytes())?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
