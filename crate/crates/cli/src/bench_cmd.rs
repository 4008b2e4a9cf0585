//! Direct vs fast `V0` timing, emitted as CSV on stdout. The direct double
//! sum is skipped above `n = 48` where it stops being informative.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use logsp_core::kernel::{bilinear_with_table, v0_fast};
use logsp_core::{build_kernel_table, ConvolutionPlan, GridSpec, KernelKind, ScalarField};

use crate::error::CliError;
use crate::output::format_real;

const DIRECT_CUTOFF: usize = 48;

fn random_field(grid: GridSpec, seed: u64) -> ScalarField {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut f = ScalarField::zeros(grid);
    for v in f.values_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
    f
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> T) -> (f64, T) {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps {
        let t0 = Instant::now();
        let v = f();
        best = best.min(t0.elapsed().as_secs_f64());
        out = Some(v);
    }
    (best, out.expect("at least one rep"))
}

pub fn bench_cmd(sizes: &[usize]) -> Result<i32, CliError> {
    if sizes.is_empty() {
        return Err(CliError::Config("bench needs at least one size".into()));
    }
    for &n in sizes {
        if n < 8 {
            return Err(CliError::Config(format!(
                "bench sizes must be at least 8, got {n}"
            )));
        }
    }
    println!("n,t_direct_s,t_fast_s,rel_err");
    for &n in sizes {
        let grid = GridSpec::new(8.0, n)?;
        let u = random_field(grid, 42);
        let plan = ConvolutionPlan::new(grid);
        let (t_fast, v0) = best_of(3, || v0_fast(&u, &plan));
        if n <= DIRECT_CUTOFF {
            let table = build_kernel_table(grid, KernelKind::Log);
            let sq_vals: Vec<f64> = u.values().iter().map(|&v| v * v).collect();
            let sq = ScalarField::from_values(grid, sq_vals)?;
            let (t_direct, v0_direct) = best_of(1, || bilinear_with_table(&table, &sq, &sq));
            let rel_err = (v0 - v0_direct).abs() / v0_direct.abs().max(1e-300);
            println!(
                "{n},{},{},{}",
                format_real(t_direct),
                format_real(t_fast),
                format_real(rel_err)
            );
        } else {
            println!("{n},skipped,{},", format_real(t_fast));
        }
    }
    Ok(0)
}
