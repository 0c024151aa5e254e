//! Seeded parameter sweeps: one row per (n, eps, trial), emitted as CSV
//! for downstream figures. Rows are enumerated in sorted (n, eps, seed)
//! order with per-trial seed = base seed + row index, so the output is
//! independent of how trials are scheduled across threads.

use crate::generators::{perturb_pair, theta_pair, RationalAngle, Seed};
use crate::invariants::{bott_pair, defect, winding, BranchCut, TraceKind, DEFAULT_GAP_POLICY};
use crate::solver::{project_to_theta_pairs, SolverOptions};
use crate::error::{Error, Result};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

pub const CSV_HEADER: &str =
    "n,q,p,eps,seed,defect,winding_norm,bott,gap,exel_ok,solve_dist,solve_iters,solve_converged,wall_ms";

/// One sweep trial. Failed fields carry the sentinel -1.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub q: i64,
    pub p: i64,
    pub eps: f64,
    pub seed: u64,
    pub defect: f64,
    pub winding_norm: f64,
    pub bott: i64,
    pub gap: f64,
    pub exel_ok: i64,
    pub solve_dist: f64,
    pub solve_iters: i64,
    pub solve_converged: i64,
    pub wall_ms: i64,
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.q,
            self.p,
            self.eps,
            self.seed,
            self.defect,
            self.winding_norm,
            self.bott,
            self.gap,
            self.exel_ok,
            self.solve_dist,
            self.solve_iters,
            self.solve_converged,
            self.wall_ms
        )
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub theta: RationalAngle,
    pub n_list: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub trials: usize,
    pub base_seed: Seed,
    /// worker cap; `None` uses machine parallelism
    pub threads: Option<usize>,
}

fn run_trial(theta: RationalAngle, n: usize, eps: f64, seed: Seed) -> SweepRow {
    let start = Instant::now();
    let q = theta.q();
    let m = n / q as usize;
    let pair = perturb_pair(&theta_pair(theta, m), eps, seed);
    let pair_defect = defect(&pair);
    let cut = if theta == RationalAngle::half() {
        BranchCut::log0()
    } else {
        BranchCut::principal()
    };
    let winding_norm = winding(&pair, cut, TraceKind::Normalized).unwrap_or(-1.0);
    let (bott, gap, exel_ok) = match bott_pair(&pair, DEFAULT_GAP_POLICY) {
        Ok(report) => (
            report.bott,
            report.gap,
            i64::from(report.exel_pass() == Some(true)),
        ),
        Err(_) => (-1, -1.0, 0),
    };
    let opts = SolverOptions {
        seed,
        ..SolverOptions::default()
    };
    let (solve_dist, solve_iters, solve_converged) =
        match project_to_theta_pairs(&pair, theta, &opts) {
            Ok((_, report)) => (
                report.dist_u.max(report.dist_v),
                report.iterations as i64,
                i64::from(report.converged),
            ),
            Err(_) => (-1.0, -1, 0),
        };
    SweepRow {
        n,
        q,
        p: theta.p(),
        eps,
        seed: seed.0,
        defect: pair_defect,
        winding_norm,
        bott,
        gap,
        exel_ok,
        solve_dist,
        solve_iters,
        solve_converged,
        wall_ms: start.elapsed().as_millis() as i64,
    }
}

/// Run the sweep. Trials may execute on multiple threads; results are
/// assembled by row index so the output ordering is deterministic.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let q = config.theta.q() as usize;
    for &n in &config.n_list {
        if n == 0 || n % q != 0 {
            return Err(Error::NotDivisible {
                q: config.theta.q(),
                n,
            });
        }
    }
    let mut n_list = config.n_list.clone();
    n_list.sort_unstable();
    let mut eps_list = config.eps_list.clone();
    eps_list.sort_by(|a, b| a.partial_cmp(b).expect("finite eps"));

    let jobs: Vec<(usize, f64, Seed)> = {
        let mut jobs = Vec::new();
        let mut index = 0u64;
        for &n in &n_list {
            for &eps in &eps_list {
                for _ in 0..config.trials {
                    jobs.push((n, eps, config.base_seed.offset(index)));
                    index += 1;
                }
            }
        }
        jobs
    };

    let workers = config
        .threads
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
        .max(1)
        .min(jobs.len().max(1));

    let results: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    let theta = config.theta;
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let (n, eps, seed) = jobs[i];
                let row = run_trial(theta, n, eps, seed);
                results.lock().expect("sweep results lock")[i] = Some(row);
            });
        }
    });
    Ok(results
        .into_inner()
        .expect("sweep results lock")
        .into_iter()
        .map(|r| r.expect("every job produces a row"))
        .collect())
}

/// CSV document: fixed header, LF endings, no quoting.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}
