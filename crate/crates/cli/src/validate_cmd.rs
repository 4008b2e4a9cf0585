//! The invariant suites of all modules as a pass/fail table: kernel split,
//! scalings, gradient checks, the algebraic identity, the HLS chain and the
//! fibering roots. `quick` runs small grids; `full` raises sizes and sample
//! counts and adds a complete small solve.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use logsp_core::kernel::bilinear_with_table;
use logsp_core::{
    build_kernel_table, dirichlet_energy, hls_chain_check, lp_norm, nehari_project, norms, phi_u,
    phi_u_direct, solve, ConvolutionPlan, FiberingCoefficients, GridSpec, KernelKind,
    PotentialSpec, Problem, ScalarField, SolverConfig, TWO_PI,
};

#[derive(Clone, Copy)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Copy)]
struct Sizes {
    kernel_n: usize,
    oracle_n: usize,
    functional_n: usize,
    field_samples: u64,
    pair_samples: u64,
}

impl Level {
    fn sizes(self) -> Sizes {
        match self {
            Level::Quick => Sizes {
                kernel_n: 12,
                oracle_n: 16,
                functional_n: 16,
                field_samples: 20,
                pair_samples: 5,
            },
            Level::Full => Sizes {
                kernel_n: 16,
                oracle_n: 32,
                functional_n: 32,
                field_samples: 100,
                pair_samples: 50,
            },
        }
    }
}

fn random_field(grid: GridSpec, seed: u64) -> ScalarField {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut f = ScalarField::zeros(grid);
    for v in f.values_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
    f
}

fn squared(u: &ScalarField) -> ScalarField {
    let vals: Vec<f64> = u.values().iter().map(|&v| v * v).collect();
    ScalarField::from_values(u.grid(), vals).unwrap()
}

fn problem(n: usize) -> Result<Problem, String> {
    let grid = GridSpec::new(4.0, n).map_err(|e| e.to_string())?;
    Problem::new(
        grid,
        PotentialSpec::harmonic(1.0, 1.0).unwrap(),
        6.0,
        TWO_PI,
        1.0,
    )
    .map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl Fn() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_kernel_closed_form(s: &Sizes) -> Result<(), String> {
    let grid = GridSpec::new(4.0, s.kernel_n).map_err(|e| e.to_string())?;
    let h = grid.spacing();
    let t = build_kernel_table(grid, KernelKind::Log);
    ensure((t.at(3, 4) - (5.0 * h).ln()).abs() < 1e-15, || {
        format!("log table at (3h,4h): {} vs {}", t.at(3, 4), (5.0 * h).ln())
    })?;
    // exact cell average of log|z|: ln h + pi/4 - 3/2 - (ln 2)/2
    let c1 = std::f64::consts::FRAC_PI_4 - 1.5 - 0.5 * std::f64::consts::LN_2;
    ensure(
        (t.singular_cell_value() - (h.ln() + c1)).abs() < 1e-10,
        || {
            format!(
                "singular cell: {} vs {}",
                t.singular_cell_value(),
                h.ln() + c1
            )
        },
    )
}

fn check_kernel_split(s: &Sizes) -> Result<(), String> {
    let grid = GridSpec::new(3.0, s.kernel_n).map_err(|e| e.to_string())?;
    let t0 = build_kernel_table(grid, KernelKind::Log);
    let t1 = build_kernel_table(grid, KernelKind::Log1p);
    let t2 = build_kernel_table(grid, KernelKind::Log1pInv);
    let sing =
        (t0.singular_cell_value() - (t1.singular_cell_value() - t2.singular_cell_value())).abs();
    ensure(sing < 1e-10, || format!("singular split gap {sing}"))?;
    for seed in 0..10 {
        let f = random_field(grid, 100 + seed);
        let g = random_field(grid, 200 + seed);
        let b0 = bilinear_with_table(&t0, &f, &g);
        let b1 = bilinear_with_table(&t1, &f, &g);
        let b2 = bilinear_with_table(&t2, &f, &g);
        let gap = (b0 - (b1 - b2)).abs();
        ensure(gap <= 1e-10 * (b1.abs() + b2.abs()).max(1.0), || {
            format!("seed {seed}: B0 - (B1 - B2) = {gap}")
        })?;
    }
    Ok(())
}

fn check_fast_oracle(s: &Sizes) -> Result<(), String> {
    let grid = GridSpec::new(4.0, s.oracle_n).map_err(|e| e.to_string())?;
    let u = random_field(grid, 7);
    let plan = ConvolutionPlan::new(grid);
    let table = build_kernel_table(grid, KernelKind::Log);
    let fast = phi_u(&u, &plan).map_err(|e| e.to_string())?;
    let direct = phi_u_direct(&u, &table).map_err(|e| e.to_string())?;
    let scale = direct.max_abs();
    for (k, (a, b)) in fast.values().iter().zip(direct.values()).enumerate() {
        ensure((a - b).abs() <= 1e-10 * scale, || {
            format!("phi fast/direct mismatch at cell {k}: {a} vs {b}")
        })?;
    }
    let sq = squared(&u);
    let v0_fast = logsp_core::kernel::v0_fast(&u, &plan);
    let v0_direct = bilinear_with_table(&table, &sq, &sq);
    ensure(
        (v0_fast - v0_direct).abs() <= 1e-10 * v0_direct.abs().max(1.0),
        || format!("V0 fast {v0_fast} vs direct {v0_direct}"),
    )
}

fn check_scalings(s: &Sizes) -> Result<(), String> {
    let grid = GridSpec::new(3.0, s.functional_n).map_err(|e| e.to_string())?;
    for seed in 0..s.field_samples {
        let u = random_field(grid, 300 + seed);
        let c = 1.0 + seed as f64 * 0.37;
        let lp = lp_norm(&u, 3.0).map_err(|e| e.to_string())?;
        let lp_scaled = lp_norm(&u.scaled(c), 3.0).map_err(|e| e.to_string())?;
        ensure((lp_scaled - c * lp).abs() <= 1e-14 * (1.0 + c * lp), || {
            format!("lp scaling gap at seed {seed}")
        })?;
        let d = dirichlet_energy(&u).map_err(|e| e.to_string())?;
        let d_scaled = dirichlet_energy(&u.scaled(c)).map_err(|e| e.to_string())?;
        ensure(
            (d_scaled - c * c * d).abs() <= 1e-12 * (1.0 + c * c * d),
            || format!("dirichlet homogeneity gap at seed {seed}"),
        )?;
        let report = norms(&u, &PotentialSpec::harmonic(1.0, 1.0).unwrap(), 6.0)
            .map_err(|e| e.to_string())?;
        let gap = (report.x_norm_sq - (report.dirichlet + report.v_weighted + report.star)).abs();
        ensure(gap <= 1e-14 * report.x_norm_sq.max(1.0), || {
            format!("norm decomposition gap {gap}")
        })?;
    }
    Ok(())
}

fn check_quartic_scaling(s: &Sizes) -> Result<(), String> {
    let grid = GridSpec::new(3.0, s.kernel_n).map_err(|e| e.to_string())?;
    let table = build_kernel_table(grid, KernelKind::Log);
    let u = random_field(grid, 17);
    let sq = squared(&u);
    let base = bilinear_with_table(&table, &sq, &sq);
    for t in [0.5f64, 2.0, 3.0] {
        let sq_t = squared(&u.scaled(t));
        let scaled = bilinear_with_table(&table, &sq_t, &sq_t);
        let t4 = t.powi(4);
        ensure(
            (scaled - t4 * base).abs() <= 1e-12 * (t4 * base.abs()).max(1.0),
            || format!("V0({t} u) = {scaled}, expected {}", t4 * base),
        )?;
    }
    Ok(())
}

fn check_gradient(s: &Sizes) -> Result<(), String> {
    let p = problem(s.functional_n)?;
    let eps = 1e-5;
    for seed in 0..s.pair_samples {
        let u = random_field(p.grid(), 400 + seed);
        let v = random_field(p.grid(), 500 + seed);
        let analytic = p
            .directional_derivative(&u, &v)
            .map_err(|e| e.to_string())?;
        let plus = p
            .energy(&u.sub_scaled(&v, -eps).unwrap())
            .map_err(|e| e.to_string())?;
        let minus = p
            .energy(&u.sub_scaled(&v, eps).unwrap())
            .map_err(|e| e.to_string())?;
        let fd = (plus - minus) / (2.0 * eps);
        ensure(
            (analytic - fd).abs() <= 1e-6 * analytic.abs().max(1.0),
            || format!("seed {seed}: derivative {analytic} vs FD {fd}"),
        )?;
        let g = p.gradient_field(&u).map_err(|e| e.to_string())?;
        let lhs = logsp_core::quadrature_dot(&g, &v).map_err(|e| e.to_string())?;
        ensure(
            (lhs - analytic).abs() <= 1e-12 * analytic.abs().max(1.0),
            || format!("seed {seed}: adjoint gap {}", (lhs - analytic).abs()),
        )?;
    }
    Ok(())
}

fn check_identity(s: &Sizes) -> Result<(), String> {
    let p = problem(s.functional_n)?;
    for seed in 0..s.field_samples {
        let u = random_field(p.grid(), 600 + seed);
        let gap = p.identity_check(&u).map_err(|e| e.to_string())?;
        ensure(gap <= 1e-12, || format!("seed {seed}: identity gap {gap}"))?;
        let e_even = (p.energy(&u).unwrap() - p.energy(&u.scaled(-1.0)).unwrap()).abs();
        ensure(e_even == 0.0, || {
            format!("seed {seed}: evenness gap {e_even}")
        })?;
    }
    Ok(())
}

fn check_hls(s: &Sizes) -> Result<(), String> {
    let grid = GridSpec::new(3.0, s.kernel_n).map_err(|e| e.to_string())?;
    for seed in 0..s.field_samples {
        let u = random_field(grid, 700 + seed).abs();
        let chain = hls_chain_check(&u).map_err(|e| e.to_string())?;
        ensure(chain.v2 <= chain.riesz, || {
            format!("seed {seed}: V2 = {} > Riesz = {}", chain.v2, chain.riesz)
        })?;
    }
    Ok(())
}

fn check_nehari_roots(level: Level) -> Result<(), String> {
    let root = |a: f64, q: f64, m: f64| {
        nehari_project(&FiberingCoefficients {
            a,
            q,
            m,
            p_exp: 6.0,
        })
        .map_err(|e| e.to_string())
    };
    let r1 = root(1.0, 0.0, 1.0)?;
    let r2 = root(1.0, 1.0, 1.0)?;
    let r3 = root(1.0, -0.5, 1.0)?;
    if matches!(level, Level::Full) {
        println!("    analytic Nehari roots: {r1:.9}, {r2:.9}, {r3:.9}");
    }
    let golden = ((1.0 + 5.0f64.sqrt()) / 2.0).sqrt();
    let neg = ((-0.5 + 4.25f64.sqrt()) / 2.0).sqrt();
    ensure((r1 - 1.0).abs() <= 1e-9, || format!("root(1,0,1) = {r1}"))?;
    ensure((r2 - golden).abs() <= 1e-9, || {
        format!("root(1,1,1) = {r2}")
    })?;
    ensure((r3 - neg).abs() <= 1e-9, || {
        format!("root(1,-0.5,1) = {r3}")
    })
}

fn check_nehari_membership(s: &Sizes) -> Result<(), String> {
    let p = problem(s.functional_n)?;
    for seed in 0..s.pair_samples {
        let u = random_field(p.grid(), 800 + seed);
        let c = p.fibering_coefficients(&u).map_err(|e| e.to_string())?;
        let t = nehari_project(&c).map_err(|e| e.to_string())?;
        let projected = u.scaled(t);
        let slope = p.nehari_slope(&projected).map_err(|e| e.to_string())?;
        let energy = p.energy(&projected).map_err(|e| e.to_string())?;
        ensure(slope.abs() <= 1e-9 * (1.0 + energy.abs()), || {
            format!("seed {seed}: Nehari gap {slope}")
        })?;
        ensure(c.energy_at(64.0 * t) < 0.0, || {
            format!("seed {seed}: no ray divergence at 64 t*")
        })?;
    }
    Ok(())
}

fn check_v0_signs() -> Result<(), String> {
    let grid = GridSpec::new(8.0, 32).map_err(|e| e.to_string())?;
    let table = build_kernel_table(grid, KernelKind::Log);
    let tight = ScalarField::from_fn(grid, |x, y| {
        2.0 * (-(x * x + y * y) / (2.0 * 0.12 * 0.12)).exp()
    });
    let sq = squared(&tight);
    let v0_tight = bilinear_with_table(&table, &sq, &sq);
    ensure(v0_tight < 0.0, || {
        format!("concentrated V0 = {v0_tight} not negative")
    })?;
    let spread = ScalarField::from_fn(grid, |x, y| {
        (-((x + 5.0) * (x + 5.0) + y * y) / 0.5).exp()
            + (-((x - 5.0) * (x - 5.0) + y * y) / 0.5).exp()
    });
    let sq = squared(&spread);
    let v0_spread = bilinear_with_table(&table, &sq, &sq);
    ensure(v0_spread > 0.0, || {
        format!("spread V0 = {v0_spread} not positive")
    })
}

fn check_mountain_pass() -> Result<(), String> {
    let p = problem(32)?;
    for seed in 0..100 {
        let raw = random_field(p.grid(), 900 + seed);
        let h1 = (dirichlet_energy(&raw).unwrap() + lp_norm(&raw, 2.0).unwrap().powi(2)).sqrt();
        let u = raw.scaled(0.05 / h1);
        let e = p.energy(&u).map_err(|e| e.to_string())?;
        ensure(e > 0.0, || {
            format!("seed {seed}: energy {e} at the H1 sphere")
        })?;
    }
    Ok(())
}

fn check_small_solve() -> Result<(), String> {
    let grid = GridSpec::new(6.0, 32).map_err(|e| e.to_string())?;
    let p = Problem::new(
        grid,
        PotentialSpec::harmonic(1.0, 1.0).unwrap(),
        6.0,
        TWO_PI,
        1.0,
    )
    .map_err(|e| e.to_string())?;
    let r = solve(&p, &SolverConfig::default()).map_err(|e| e.to_string())?;
    ensure(r.converged(), || {
        format!("small solve exited with {:?}", r.exit)
    })?;
    ensure(r.energy > 0.0, || {
        format!("small solve energy {}", r.energy)
    })?;
    ensure(r.u_final.values().iter().all(|&v| v >= 0.0), || {
        "negative cells".into()
    })?;
    ensure(r.ray_max.gap <= 1e-8 * (1.0 + r.energy.abs()), || {
        format!("ray max gap {}", r.ray_max.gap)
    })?;
    ensure((r.ray_max.t_max - 1.0).abs() <= 1e-3, || {
        format!("ray maximizer {}", r.ray_max.t_max)
    })
}

type Check = (&'static str, Box<dyn Fn() -> Result<(), String>>);

pub fn validate_cmd(level: Level) -> i32 {
    let s = level.sizes();
    let checks: Vec<Check> = {
        let mut list: Vec<Check> = vec![
            (
                "kernel_closed_form",
                Box::new(move || check_kernel_closed_form(&s)),
            ),
            (
                "kernel_split_identity",
                Box::new(move || check_kernel_split(&s)),
            ),
            (
                "fast_convolution_oracle",
                Box::new(move || check_fast_oracle(&s)),
            ),
            ("norm_scalings", Box::new(move || check_scalings(&s))),
            (
                "quartic_v_scaling",
                Box::new(move || check_quartic_scaling(&s)),
            ),
            ("gradient_consistency", Box::new(move || check_gradient(&s))),
            (
                "energy_identity_evenness",
                Box::new(move || check_identity(&s)),
            ),
            ("hls_chain", Box::new(move || check_hls(&s))),
            (
                "nehari_analytic_roots",
                Box::new(move || check_nehari_roots(level)),
            ),
            (
                "nehari_membership",
                Box::new(move || check_nehari_membership(&s)),
            ),
            ("v0_sign_structure", Box::new(check_v0_signs)),
        ];
        if matches!(level, Level::Full) {
            list.push(("mountain_pass_barrier", Box::new(check_mountain_pass)));
            list.push(("ground_state_solve", Box::new(check_small_solve)));
        }
        list
    };

    let mut failed = 0;
    for (name, check) in &checks {
        let t0 = Instant::now();
        match check() {
            Ok(()) => {
                println!("PASS  {name:<28} {:>8.2} s", t0.elapsed().as_secs_f64());
            }
            Err(msg) => {
                failed += 1;
                println!(
                    "FAIL  {name:<28} {:>8.2} s  {msg}",
                    t0.elapsed().as_secs_f64()
                );
            }
        }
    }
    if failed == 0 {
        println!("all {} checks passed", checks.len());
        0
    } else {
        eprintln!("{failed} of {} checks failed", checks.len());
        3
    }
}
