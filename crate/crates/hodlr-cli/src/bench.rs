//! Level sweep for the benchmark command: per level, build the model
//! instance, time setup once, time `repeats` solves, and collect exact
//! operation counts.

use hodlr::{random_regular, setup, setup_parallel, tridiagonal_model, SplitMix64};
use std::io::{self, Write};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n0: usize,
    pub levels: usize,
    pub rank: usize,
    pub seed: u64,
    pub repeats: usize,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub level: usize,
    pub n: usize,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub setup_ops: u64,
    pub solve_ops: u64,
    pub residual_inf: f64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("levels must be at least 1")]
    NoLevels,
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("threads must be at least 1")]
    NoThreads,
    #[error(transparent)]
    Generate(#[from] hodlr::GenerateError),
    #[error(transparent)]
    Factor(#[from] hodlr::FactorError),
    #[error("building the thread pool failed: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs the sweep over levels `1..=cfg.levels`. Rank 1 benchmarks the
/// tridiagonal model; higher ranks fall back to the seeded random regular
/// generator, which is the only rank-k instance source. Each level's
/// factorization is dropped before the next level is built, so peak memory
/// stays at roughly twice the largest instance.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.levels == 0 {
        return Err(BenchError::NoLevels);
    }
    if cfg.repeats == 0 {
        return Err(BenchError::NoRepeats);
    }
    if cfg.threads == 0 {
        return Err(BenchError::NoThreads);
    }
    let pool = if cfg.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()?,
        )
    } else {
        None
    };

    let mut rows = Vec::with_capacity(cfg.levels);
    for level in 1..=cfg.levels {
        let a = if cfg.rank == 1 {
            tridiagonal_model(cfg.n0, level, cfg.seed)?
        } else {
            random_regular(cfg.n0, level, cfg.rank, cfg.seed)?
        };
        let n = a.dim();

        let start = Instant::now();
        let f = match &pool {
            Some(pool) => pool.install(|| setup_parallel(a))?,
            None => setup(a)?,
        };
        let setup_seconds = start.elapsed().as_secs_f64();

        let mut rhs_rng = SplitMix64::new(
            cfg.seed
                .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(level as u64)),
        );
        let mut solve_times = Vec::with_capacity(cfg.repeats);
        let mut residual_inf = 0.0_f64;
        let mut x = vec![0.0; n];
        for _ in 0..cfg.repeats {
            let z: Vec<f64> = (0..n).map(|_| rhs_rng.next_unit()).collect();
            x.copy_from_slice(&z);
            let start = Instant::now();
            f.solve_in_place(&mut x).expect("buffer length matches");
            solve_times.push(start.elapsed().as_secs_f64());
            let r = f.matrix().matvec(&x).expect("buffer length matches");
            let z_inf = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let r_inf = r
                .iter()
                .zip(&z)
                .fold(0.0_f64, |m, (ri, zi)| m.max((ri - zi).abs()));
            residual_inf = residual_inf.max(r_inf / z_inf.max(f64::MIN_POSITIVE));
        }

        rows.push(BenchRow {
            level,
            n,
            setup_seconds,
            solve_seconds: median(&mut solve_times),
            setup_ops: f.setup_ops().total(),
            solve_ops: f.solve_ops().total(),
            residual_inf,
        });
    }
    Ok(rows)
}

fn median(times: &mut [f64]) -> f64 {
    times.sort_by(|a, b| a.partial_cmp(b).expect("timings are finite"));
    let mid = times.len() / 2;
    if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    }
}

pub const CSV_HEADER: &str = "level,n,setup_seconds,setup_seconds_per_dof,solve_seconds,solve_seconds_per_dof,setup_ops,solve_ops,residual_inf";

pub fn write_csv(rows: &[BenchRow], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let dof = r.n as f64;
        writeln!(
            out,
            "{},{},{:.9},{:.6e},{:.9},{:.6e},{},{},{:.6e}",
            r.level,
            r.n,
            r.setup_seconds,
            r.setup_seconds / dof,
            r.solve_seconds,
            r.solve_seconds / dof,
            r.setup_ops,
            r.solve_ops,
            r.residual_inf
        )?;
    }
    Ok(())
}
