//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a non-zero status if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracbc::exterior::ExteriorData;
use fracbc::operators::{assemble, Grid1D, OperatorSpec};
use fracbc::solvers::{
    dirichlet_uniqueness_check, escape_probability, solve_steady_dirichlet, solve_transient, DirichletProblem,
    NeumannProblem, SolverOptions, TransientProblem,
};
use fracbc::spectral::{multiplier_eval, verify_tempered_identity, PeriodicField};
use fracbc::stochastic::{
    berry_esseen_bound, crossover_experiment, mc_escape_probability, mc_escape_tally, moment, moment_by_quadrature,
    moment_full_support, simulate_flight, walker_rng, CrossoverConfig, JumpLaw,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn spec(beta: f64, lambda: f64) -> OperatorSpec {
    if lambda == 0.0 {
        OperatorSpec::fractional(beta, 1).unwrap()
    } else {
        OperatorSpec::tempered(beta, lambda, 1).unwrap()
    }
}

fn bump(x: f64) -> f64 {
    let s = (x - 0.5) / 0.4;
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn constant_solution() -> Outcome {
    const TOL: f64 = 1e-9;
    const BUDGET: f64 = 5.0;
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for beta in [0.5, 1.2, 1.8] {
        for lambda in [0.0, 0.5] {
            let t = Instant::now();
            let grid = Grid1D::new(0.0, 1.0, 200).unwrap();
            let opr = assemble(grid, spec(beta, lambda)).unwrap();
            let rep = solve_steady_dirichlet(&DirichletProblem::new(opr, ExteriorData::one()), &SolverOptions::default())
                .unwrap();
            slowest = slowest.max(secs(t.elapsed()));
            worst = rep.solution.iter().map(|p| (p - 1.0).abs()).fold(worst, f64::max);
        }
    }
    Outcome {
        pass: worst <= TOL && slowest < BUDGET,
        detail: format!("g=1 gives p=1, max error {worst:.2e} <= {TOL:.0e}, slowest case {slowest:.2} s < {BUDGET} s"),
    }
}

fn solver_vs_monte_carlo() -> Outcome {
    const BUDGET: f64 = 60.0;
    let t = Instant::now();
    let (n, x0, beta) = (199, 0.3, 1.2);
    let grid = Grid1D::new(0.0, 1.0, n).unwrap();
    let rep = escape_probability(grid, spec(beta, 0.0), &[(1.0, 2.0)]).unwrap();
    // x0 = 0.3 is node 59 of 199 (h = 1/200)
    let i = (x0 / grid.h()).round() as usize - 1;
    assert!((grid.node(i) - x0).abs() < 1e-12);
    let pde = rep.solution[i];
    let law = JumpLaw::power_law(beta, 1e-3).unwrap();
    let mc = mc_escape_probability((0.0, 1.0), x0, &[(1.0, 2.0)], &law, 1.0, 100_000, 20_240_601).unwrap();
    let diff = (pde - mc.estimate).abs();
    let elapsed = secs(t.elapsed());
    Outcome {
        pass: diff <= 3.0 * mc.stderr && elapsed < BUDGET,
        detail: format!(
            "escape into (1,2) from 0.3: PDE {pde:.5}, MC {:.5}, |diff| {diff:.2e} <= 3 stderr {:.2e}, {elapsed:.1} s < {BUDGET} s",
            mc.estimate,
            3.0 * mc.stderr
        ),
    }
}

fn tempered_identity() -> Outcome {
    const TOL_1D: f64 = 1e-6;
    const TOL_2D: f64 = 1e-5;
    const BUDGET: f64 = 30.0;
    let t = Instant::now();
    let ks: Vec<f64> = (1..=100).map(|j| 0.1 * j as f64).collect();
    let mut worst1: f64 = 0.0;
    for beta in [0.3, 0.5, 0.8, 1.2, 1.5, 1.8] {
        for lambda in [0.1, 1.0, 10.0] {
            worst1 = worst1.max(verify_tempered_identity(1, beta, lambda, &ks).unwrap().max_rel_error);
        }
    }
    let spot = [0.1, 1.0, 5.0];
    let mut worst2: f64 = 0.0;
    for (beta, lambda) in [(1.5, 0.3), (0.5, 1.0), (1.2, 2.0)] {
        worst2 = worst2.max(verify_tempered_identity(2, beta, lambda, &spot).unwrap().max_rel_error);
    }
    let elapsed = secs(t.elapsed());
    Outcome {
        pass: worst1 <= TOL_1D && worst2 <= TOL_2D && elapsed < BUDGET,
        detail: format!(
            "tempered symbol identity, 1D max rel {worst1:.2e} <= {TOL_1D:.0e}, 2D max rel {worst2:.2e} <= {TOL_2D:.0e}, {elapsed:.1} s < {BUDGET} s"
        ),
    }
}

fn operator_vs_spectral() -> Outcome {
    const MIN_ORDER: f64 = 1.0;
    let mut lowest = f64::INFINITY;
    let mut cases = Vec::new();
    for (beta, lambda) in [(0.5, 0.0), (1.2, 0.0), (1.8, 0.0), (1.2, 0.5)] {
        let sp = spec(beta, lambda);
        let (len, m) = (256.0, 1usize << 17);
        let x0 = 0.5 - len / 2.0;
        let field = PeriodicField::sample(x0, len, m, bump).unwrap();
        let mut errs = Vec::new();
        for n in [100, 200, 400] {
            let grid = Grid1D::new(0.0, 1.0, n).unwrap();
            let opr = assemble(grid, sp).unwrap();
            let p: Vec<f64> = grid.nodes().iter().map(|&x| bump(x)).collect();
            let ap = opr.apply(&p, &ExteriorData::zero(), 0.0).unwrap();
            let offsets: Vec<f64> = grid.nodes().iter().map(|x| x - x0).collect();
            let reference = multiplier_eval(&field, |k| sp.multiplier(k), &offsets, 1e-15);
            errs.push(ap.iter().zip(&reference).map(|(a, r)| (a - r).abs()).fold(0.0, f64::max));
        }
        let order = (errs[0] / errs[1]).log2().min((errs[1] / errs[2]).log2());
        lowest = lowest.min(order);
        cases.push(format!("({beta},{lambda}): {order:.2}"));
    }
    Outcome {
        pass: lowest >= MIN_ORDER,
        detail: format!(
            "apply vs FFT on a bump, N=100/200/400, lowest successive order {lowest:.2} >= {MIN_ORDER} [{}]",
            cases.join(", ")
        ),
    }
}

fn neumann_mass() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut worst: f64 = 0.0;
    for (beta, lambda) in [(1.2, 0.0), (0.5, 0.5), (1.8, 0.0)] {
        let grid = Grid1D::new(0.0, 1.0, 200).unwrap();
        let p0: Vec<f64> = grid.nodes().iter().map(|&x| bump(x)).collect();
        let prob = NeumannProblem::reflecting(grid, spec(beta, lambda), p0);
        let rep = solve_transient(TransientProblem::Neumann(&prob), 1.0, 0.01, &SolverOptions::default()).unwrap();
        let m0 = rep.mass_history[0];
        worst = rep.mass_history.iter().map(|m| (m - m0).abs() / m0).fold(worst, f64::max);
    }
    Outcome {
        pass: worst <= TOL,
        detail: format!("reflecting Neumann, T=1, tau=0.01, N=200, max relative mass drift {worst:.2e} <= {TOL:.0e}"),
    }
}

fn energy_decay() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (beta, lambda) in [(0.5, 0.0), (1.2, 0.5), (1.8, 0.0)] {
        let grid = Grid1D::new(0.0, 1.0, 200).unwrap();
        let opr = assemble(grid, spec(beta, lambda)).unwrap();
        let p0: Vec<f64> = grid.nodes().iter().map(|&x| bump(x)).collect();
        let prob = DirichletProblem::new(opr, ExteriorData::zero()).with_initial(p0);
        let rep = solve_transient(TransientProblem::Dirichlet(&prob), 1.0, 0.01, &SolverOptions::default()).unwrap();
        let e: Vec<f64> = rep.energy_history.iter().map(|r| r.l2_sq).collect();
        worst = e.windows(2).map(|w| w[1] - w[0]).fold(worst, f64::max);
    }
    Outcome {
        pass: worst <= 0.0,
        detail: format!("absorbing Dirichlet, f=g=0, largest step change of L2 norm^2 {worst:.2e} <= 0"),
    }
}

fn crossover() -> Outcome {
    const BETA: f64 = 0.8;
    const BAND: f64 = 0.15;
    const BUDGET: f64 = 300.0;
    let t = Instant::now();
    let cfg = CrossoverConfig { seed: 7, ..CrossoverConfig::default() };
    let rep = crossover_experiment(BETA, &[0.05, 0.1, 0.2, 0.4], 0.02, &cfg).unwrap();
    let elapsed = secs(t.elapsed());
    let all_resolved = rep.m_star.iter().all(Option::is_some);
    let slope = rep.fitted_slope.unwrap_or(f64::NAN);
    let rel = (slope + BETA).abs() / BETA;
    let ms: Vec<String> = rep.m_star.iter().map(|m| m.map_or("-".into(), |m| format!("{m:.0}"))).collect();
    Outcome {
        pass: all_resolved && rel <= BAND && elapsed < BUDGET,
        detail: format!(
            "crossover slope {slope:.3} vs -{BETA} (rel {rel:.3} <= {BAND}), m* = [{}], {elapsed:.1} s < {BUDGET} s",
            ms.join(", ")
        ),
    }
}

fn moments() -> Outcome {
    const TOL_MOMENT: f64 = 1e-8;
    const TOL_BE: f64 = 1e-12;
    let mut worst_m: f64 = 0.0;
    let mut worst_be: f64 = 0.0;
    for (beta, lambda, r_min) in [(0.8, 0.1, 0.01), (1.2, 1.0, 0.1), (0.5, 2.0, 0.05), (1.7, 0.3, 1e-3)] {
        let law = JumpLaw::tempered(beta, lambda, r_min).unwrap();
        for order in [2, 3] {
            let a = moment(&law, order).unwrap();
            let q = moment_by_quadrature(&law, order).unwrap();
            worst_m = worst_m.max((a - q).abs() / a.abs());
        }
        let m2 = moment_full_support(&law, 2).unwrap();
        let m3 = moment_full_support(&law, 3).unwrap();
        for m in [1.0, 10.0, 1234.0] {
            let direct = 2.5 * m3 / m2.powf(1.5) / f64::sqrt(m);
            let bound = berry_esseen_bound(beta, lambda, law.c, m).unwrap();
            worst_be = worst_be.max((bound - direct).abs() / direct);
        }
    }
    Outcome {
        pass: worst_m <= TOL_MOMENT && worst_be <= TOL_BE,
        detail: format!(
            "moments 2,3 vs quadrature max rel {worst_m:.2e} <= {TOL_MOMENT:.0e}, Berry-Esseen identity max rel {worst_be:.2e} <= {TOL_BE:.0e}"
        ),
    }
}

fn characteristic_function() -> Outcome {
    let n = 100_000u64;
    let tol = 5.0 / (n as f64).sqrt();
    let (zeta, t_end) = (1.0, 1.0);
    let mut worst: f64 = 0.0;
    for law in [JumpLaw::power_law(1.2, 0.1).unwrap(), JumpLaw::tempered(0.8, 1.0, 0.1).unwrap()] {
        let finals: Vec<f64> = (0..n)
            .map(|i| simulate_flight(&law, zeta, t_end, &mut walker_rng(11, i)).unwrap().final_position())
            .collect();
        for j in 0..=100 {
            let k = -5.0 + 0.1 * j as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for x in &finals {
                re += (k * x).cos();
                im += (k * x).sin();
            }
            let (re, im) = (re / n as f64, im / n as f64);
            let exact = (zeta * t_end * (law.jump_characteristic(k).unwrap() - 1.0)).exp();
            worst = worst.max(((re - exact).powi(2) + im * im).sqrt());
        }
    }
    Outcome {
        pass: worst <= tol,
        detail: format!("empirical vs exact characteristic function on [-5,5], max modulus error {worst:.2e} <= {tol:.2e}"),
    }
}

fn exterior_only_dependence() -> Outcome {
    const TOL: f64 = 1e-9;
    let grid = Grid1D::new(0.0, 1.0, 100).unwrap();
    let opr = assemble(grid, spec(1.2, 0.0)).unwrap();
    let base = DirichletProblem::new(opr.clone(), ExteriorData::indicator(&[(1.0, 2.0)]));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let amp: f64 = rng.random_range(-5.0..5.0);
        let centre: f64 = rng.random_range(0.1..0.9);
        let freq: f64 = rng.random_range(1.0..20.0);
        let g = ExteriorData::from_fn(
            move |x: &[f64]| {
                let y = x[0];
                let outside = if (1.0..2.0).contains(&y) { 1.0 } else { 0.0 };
                let inside = if y > 0.0 && y < 1.0 { amp * (freq * (y - centre)).sin() } else { 0.0 };
                outside + inside
            },
            vec![0.0, 1.0, 2.0],
        );
        let alt = DirichletProblem::new(opr.clone(), g);
        worst = worst.max(dirichlet_uniqueness_check(&base, &alt, &SolverOptions::default()).unwrap());
    }
    Outcome {
        pass: worst <= TOL,
        detail: format!("10 random perturbations of g inside the domain, max solution change {worst:.2e} <= {TOL:.0e}"),
    }
}

fn partition() -> Outcome {
    const TOL: f64 = 1e-8;
    let cells = [(f64::NEG_INFINITY, -1.0), (-1.0, 0.0), (1.0, 2.0), (2.0, f64::INFINITY)];
    let grid = Grid1D::new(0.0, 1.0, 199).unwrap();
    let sp = spec(1.2, 0.0);
    let mut sum = vec![0.0; grid.n];
    for c in cells {
        let rep = escape_probability(grid, sp, &[c]).unwrap();
        for (s, v) in sum.iter_mut().zip(&rep.solution) {
            *s += v;
        }
    }
    let worst = sum.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let law = JumpLaw::power_law(1.2, 1e-2).unwrap();
    let tally = mc_escape_tally((0.0, 1.0), 0.3, &cells, &law, 1.0, 20_000, 5).unwrap();
    let counted: u64 = tally.cell_counts.iter().sum();
    Outcome {
        pass: worst <= TOL && counted == tally.n_walkers,
        detail: format!(
            "4-cell exterior partition, solver sum error {worst:.2e} <= {TOL:.0e}, MC tallies {counted}/{} walkers",
            tally.n_walkers
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("constant solution", constant_solution),
        ("solver vs Monte Carlo", solver_vs_monte_carlo),
        ("tempered symbol identity", tempered_identity),
        ("operator vs spectral", operator_vs_spectral),
        ("Neumann mass conservation", neumann_mass),
        ("Dirichlet energy decay", energy_decay),
        ("Berry-Esseen crossover", crossover),
        ("moment identities", moments),
        ("characteristic function", characteristic_function),
        ("exterior-only dependence", exterior_only_dependence),
        ("escape partition", partition),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {} ({name}): {}", i + 1, out.detail);
        if !out.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
