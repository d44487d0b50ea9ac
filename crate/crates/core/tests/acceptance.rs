//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are
//! always shown.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::error::Error as StdError;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use modunwrap::baselines::{solve_trs, solve_ucqp};
use modunwrap::certificate::{build_dual_certificate, build_t, linf_bound, lifted_gram, sufficient_apriori, tightness_verdict, Verdict};
use modunwrap::circle::{centered_wrap, chord_from_wrap, circle_arg, circle_embed, h_inv, h_map, mod1, wrap_distance};
use modunwrap::harness::synth::PlantedTerm;
use modunwrap::harness::{
    align, generate, monte_carlo, rate_fit, run_pipeline, GraphChoice, McConfig, Method, PlantedFunction, SyntheticSpec,
    TestFunction,
};
use modunwrap::interp;
use modunwrap::io::Report;
use modunwrap::knn::{choose_k_expected_risk, circle_estimate_at};
use modunwrap::{CircleSignal, GraphSpec, GridField, Mod1Value, QcqpProblem, SolveOptions, UnitComplex, UniformGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, Box<dyn StdError>>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+).into());
        }
    };
}

fn within(start: Instant, budget: Duration) -> std::result::Result<(), String> {
    let el = start.elapsed();
    if el <= budget {
        Ok(())
    } else {
        Err(format!("runtime {:.2}s over budget {:.0}s", el.as_secs_f64(), budget.as_secs_f64()))
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))).collect()
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// 1
fn noiseless_exact_recovery() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut check = |function: TestFunction, d: usize, m: usize| -> Result<(), Box<dyn StdError>> {
        let data = generate(&SyntheticSpec { function, d, m, sigma: 0.0, seed: 1 })?;
        let out = run_pipeline(&data.noisy_mod, 1)?;
        let q_star = -align(&out.ftilde, &data.truth)? as f64;
        let shifted: Vec<f64> = out.ftilde.values().iter().map(|v| v + q_star).collect();
        worst = worst.max(max_abs_diff(&shifted, data.truth.values()));
        Ok(())
    };
    for m in [27, 100, 1000] {
        check(TestFunction::Example1, 1, m)?;
    }
    // sin(2πx₁) + cos(2πx₂): ℓ∞-Lipschitz constant 4π, and 4π/29 < 1/2
    let planted = PlantedFunction {
        terms: vec![
            PlantedTerm { amplitude: 1.0, frequency: vec![1.0, 0.0], phase: -PI / 2.0 },
            PlantedTerm { amplitude: 1.0, frequency: vec![0.0, 1.0], phase: 0.0 },
        ],
        offset: 0.0,
    };
    check(TestFunction::Planted(planted), 2, 30)?;
    ensure!(worst <= 1e-10, "max |f̃ + q⋆ - f| = {worst:.3e}");
    within(start, Duration::from_secs(1))?;
    Ok(format!("max |f̃ + q⋆ - f| = {worst:.2e}"))
}

// 2
fn denoising_property() -> Outcome {
    let start = Instant::now();
    let cfg = McConfig { n_sweep: vec![1000], trials: 50, ..McConfig::default() };
    let out = monte_carlo(&cfg)?;
    let results: Vec<_> = out.records.iter().filter_map(|r| r.result.as_ref()).collect();
    ensure!(results.len() == 50, "only {} of 50 trials succeeded", results.len());
    let mean = |f: &dyn Fn(&&modunwrap::harness::TrialResult) -> f64| results.iter().map(f).sum::<f64>() / 50.0;
    let noisy = mean(&|r| r.wrap_mse_noisy);
    let denoised = mean(&|r| r.wrap_mse_denoised);
    let wins = results.iter().filter(|r| r.wrap_mse_denoised < r.wrap_mse_noisy).count();
    ensure!(denoised < noisy, "mean denoised {denoised:.4e} ≥ noisy {noisy:.4e}");
    ensure!(wins >= 45, "denoising helped in only {wins}/50 trials");
    within(start, Duration::from_secs(30))?;
    Ok(format!("wrap-MSE {noisy:.3e} → {denoised:.3e}, improved in {wins}/50"))
}

// 3
fn rate_trend() -> Outcome {
    let start = Instant::now();
    let cfg = McConfig::default();
    let out = monte_carlo(&cfg)?;
    let mut errs = Vec::new();
    for &n in &cfg.n_sweep {
        let e = out.summary.entry(n, Method::Knn).ok_or("missing summary entry")?;
        ensure!(e.failures == 0, "{} failed trials at n = {n}", e.failures);
        errs.push(e.max_wrap_denoised.ok_or("no max-wrap summary")?.mean);
    }
    let fit = rate_fit(&cfg.n_sweep, &errs)?;
    let s = fit.slope_vs_log_ratio;
    ensure!((0.15..=0.60).contains(&s), "slope {s:.4} outside [0.15, 0.60] (errors {errs:?})");
    within(start, Duration::from_secs(300))?;
    Ok(format!("slope {s:.3} vs log(log n/n), {:.3} vs log n", fit.slope_vs_log_n))
}

// 4
fn expected_risk_bound() -> Outcome {
    let start = Instant::now();
    let (m, sigma, lipschitz, trials) = (256usize, 0.1, 1.0, 200u64);
    let f = PlantedFunction::random(1, 3, 2, lipschitz, 44);
    ensure!((f.lipschitz() - 1.0).abs() < 1e-12, "planted Lipschitz constant {}", f.lipschitz());
    let k = choose_k_expected_risk(1, sigma, lipschitz, m)?.k;
    let ratio = k as f64 / m as f64;
    let bound = 64.0 * PI * PI * lipschitz * lipschitz * ratio * ratio + 32.0 * PI * PI * sigma * sigma / k as f64;
    let points = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut risk = [0.0; 5];
    for t in 0..trials {
        let data = generate(&SyntheticSpec {
            function: TestFunction::Planted(f.clone()),
            d: 1,
            m,
            sigma,
            seed: 1000 + t,
        })?;
        for (p, &x) in points.iter().enumerate() {
            let est = circle_estimate_at(&data.noisy_mod, &[x], k)?;
            let h = Complex64::from_polar(1.0, 2.0 * PI * f.eval(&[x]));
            risk[p] += (est - h).norm_sqr() / trials as f64;
        }
    }
    let worst = risk.iter().cloned().fold(0.0, f64::max);
    ensure!(worst <= bound, "risk estimate {worst:.4e} exceeds bound {bound:.4e} (per point {risk:?})");
    within(start, Duration::from_secs(30))?;
    Ok(format!("k = {k}, max estimated risk {worst:.3e} ≤ bound {bound:.3e}"))
}

fn along(g: &[Complex64], u: &[f64], t: f64) -> CircleSignal {
    CircleSignal::project(&g.iter().zip(u).map(|(gi, ui)| gi * Complex64::from_polar(1.0, t * ui)).collect::<Vec<_>>())
}

fn random_graph(rng: &mut ChaCha8Rng, kind: usize) -> Result<GraphSpec, Box<dyn StdError>> {
    Ok(match kind {
        0 => GraphSpec::path(rng.gen_range(2..=16))?,
        1 => GraphSpec::grid_linf(UniformGrid::new(1, rng.gen_range(3..=16))?, 2)?,
        _ => GraphSpec::grid_linf(UniformGrid::new(2, rng.gen_range(2..=4))?, 1)?,
    })
}

// 5
fn derivative_correctness() -> Outcome {
    let h = 1e-5;
    let (mut worst_g, mut worst_h): (f64, f64) = (0.0, 0.0);
    for inst in 0..25 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + inst as u64);
        let graph = random_graph(&mut rng, inst % 3)?;
        let n = graph.n();
        let lambda = rng.gen_range(0.05..2.0);
        let problem = QcqpProblem::new(CircleSignal::new(random_unit(&mut rng, n))?, graph, lambda)?;
        let g = random_unit(&mut rng, n);
        let gs = CircleSignal::project(&g);
        let grad = problem.riemannian_grad(&gs)?;
        for _ in 0..3 {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gdot: Vec<Complex64> = g.iter().zip(&u).map(|(gi, ui)| Complex64::i() * ui * gi).collect();

            let analytic: f64 = grad.iter().zip(&gdot).map(|(a, b)| (a.conj() * b).re).sum();
            let fd = (problem.objective(&along(&g, &u, h))? - problem.objective(&along(&g, &u, -h))?) / (2.0 * h);
            worst_g = worst_g.max((fd - analytic).abs() / analytic.abs());

            let hess = problem.hessian_apply(&gs, &gdot)?;
            let gp = problem.riemannian_grad(&along(&g, &u, h))?;
            let gm = problem.riemannian_grad(&along(&g, &u, -h))?;
            let dgrad: Vec<Complex64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            // tangent projection at g: v - Re(v ḡ) g
            let fd_hess: Vec<Complex64> = dgrad.iter().zip(&g).map(|(v, gi)| v - (v * gi.conj()).re * gi).collect();
            let diff: Vec<Complex64> = fd_hess.iter().zip(&hess).map(|(a, b)| a - b).collect();
            worst_h = worst_h.max(norm2(&diff) / norm2(&hess));
        }
    }
    ensure!(worst_g < 1e-5, "gradient relative error {worst_g:.3e}");
    ensure!(worst_h < 1e-5, "Hessian relative error {worst_h:.3e}");
    Ok(format!("max relative error: gradient {worst_g:.1e}, Hessian {worst_h:.1e}"))
}

/// Brute-force global minimum of the n = 3 path problem: torus grid search,
/// then exact coordinate minimization from the best grid points.
fn brute_force_n3(z: &[Complex64], lambda: f64) -> f64 {
    let f = |g: &[Complex64; 3]| {
        lambda * ((g[0] - g[1]).norm_sqr() + (g[1] - g[2]).norm_sqr())
            - 2.0 * (0..3).map(|i| (g[i].conj() * z[i]).re).sum::<f64>()
    };
    const STEPS: usize = 72;
    let angle = |s: usize| Complex64::from_polar(1.0, 2.0 * PI * s as f64 / STEPS as f64);
    let mut cands: Vec<(f64, [Complex64; 3])> = Vec::with_capacity(STEPS * STEPS * STEPS);
    for a in 0..STEPS {
        for b in 0..STEPS {
            for c in 0..STEPS {
                let g = [angle(a), angle(b), angle(c)];
                cands.push((f(&g), g));
            }
        }
    }
    cands.sort_by(|x, y| x.0.total_cmp(&y.0));
    let neighbours: [&[usize]; 3] = [&[1], &[0, 2], &[1]];
    cands
        .iter()
        .take(20)
        .map(|&(_, mut g)| {
            for _ in 0..20_000 {
                for i in 0..3 {
                    let w = z[i] + lambda * neighbours[i].iter().map(|&j| g[j]).sum::<Complex64>();
                    if w.norm() > 0.0 {
                        g[i] = w / w.norm();
                    }
                }
            }
            f(&g)
        })
        .fold(f64::INFINITY, f64::min)
}

// 6
fn qcqp_optimality() -> Outcome {
    let mut worst_gap: f64 = 0.0;
    for inst in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + inst);
        let z = random_unit(&mut rng, 3);
        let lambda = rng.gen_range(0.0..=0.2);
        let problem = QcqpProblem::new(CircleSignal::new(z.clone())?, GraphSpec::path(3)?, lambda)?;
        let report = problem.solve(&SolveOptions::default())?;
        ensure!(report.converged, "instance {inst}: solver did not converge");
        let oracle = brute_force_n3(&z, lambda);
        let gap = (report.objective - oracle).abs();
        worst_gap = worst_gap.max(gap);
        ensure!(gap <= 1e-6, "instance {inst}: solver {} vs oracle {oracle}", report.objective);
        let checks = problem.critical_point_checks(&report.ghat)?;
        ensure!((checks.tol - 3e-7).abs() < 1e-20, "critical-point tolerance {}", checks.tol);
        ensure!(checks.passed(), "instance {inst}: critical point checks failed: {checks:?}");
    }
    Ok(format!("max objective gap {worst_gap:.1e}"))
}

// 7
fn certificate_identities() -> Outcome {
    let mut worst_sg: f64 = 0.0;
    let mut solves = 0;
    for inst in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + inst);
        let graph = if inst % 2 == 0 {
            GraphSpec::path(rng.gen_range(5..=40))?
        } else {
            GraphSpec::grid_linf(UniformGrid::new(2, rng.gen_range(3..=6))?, 1)?
        };
        let n = graph.n();
        let lambda = rng.gen_range(0.0..1.0);
        let problem = QcqpProblem::new(CircleSignal::new(random_unit(&mut rng, n))?, graph, lambda)?;
        let report = problem.solve(&SolveOptions::default())?;
        if !report.converged {
            continue;
        }
        solves += 1;
        let s = build_dual_certificate(&problem, &report.ghat)?;
        let mut gt = report.ghat.as_slice().to_vec();
        gt.push(Complex64::new(1.0, 0.0));
        let sg = inf_norm(&s.matrix().apply(&gt));
        let limit = 1e-7 * (1.0 + s.inf_norm());
        ensure!(sg <= limit, "instance {inst}: ‖Ŝg̃‖∞ = {sg:.3e} > {limit:.3e}");
        worst_sg = worst_sg.max(sg / (1.0 + s.inf_norm()));

        // trace identity on a random torus point
        let g = CircleSignal::new(random_unit(&mut rng, n))?;
        let t = build_t(lambda, problem.graph(), problem.z())?;
        let tr = t.matrix().mul(lifted_gram(&g).matrix()).trace();
        let obj = problem.objective(&g)?;
        ensure!((tr.re - obj).abs() <= 1e-9 && tr.im.abs() <= 1e-9, "Tr(TW) = {tr} vs F = {obj}");
    }
    ensure!(solves >= 25, "only {solves} of 30 solves converged");
    for n in [5, 20, 50] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let problem = QcqpProblem::new(CircleSignal::new(random_unit(&mut rng, n))?, GraphSpec::path(n)?, 0.0)?;
        let report = problem.solve(&SolveOptions::default())?;
        let cert = tightness_verdict(&problem, &report.ghat)?;
        ensure!(cert.verdict == Verdict::Tight, "λ = 0, n = {n}: verdict {:?}", cert.verdict);
        ensure!(cert.null_multiplicity == 1, "λ = 0, n = {n}: null multiplicity {}", cert.null_multiplicity);
    }
    Ok(format!("{solves} converged solves, max ‖Ŝg̃‖∞/(1+‖Ŝ‖∞) = {worst_sg:.1e}; λ = 0 tight for n ∈ {{5, 20, 50}}"))
}

struct PlantedOutcome {
    verdict: Verdict,
    err_inf_sq: f64,
    bound: f64,
}

fn cond1_lhs(delta: f64, ld: f64, bn: f64) -> f64 {
    delta + ((8.0 / 7.0) * (3.0 * delta + ld * (bn * bn + 2f64.sqrt()))).sqrt()
}

fn planted_instance(i: u64) -> Result<PlantedOutcome, Box<dyn StdError>> {
    let mut rng = ChaCha8Rng::seed_from_u64(800 + i);
    let (grid, graph) = if i.is_multiple_of(2) {
        let grid = UniformGrid::new(1, rng.gen_range(5..=60))?;
        (grid, GraphSpec::path(grid.n())?)
    } else {
        let grid = UniformGrid::new(2, rng.gen_range(3..=7))?;
        (grid, GraphSpec::grid_linf(grid, 1)?)
    };
    let m = grid.m() as f64;
    // an ℓ∞ step of 1/(m-1) moves the phase by at most 2πL/(m-1) ≤ 0.2
    let lip = rng.gen_range(0.05..1.0) * 0.2 * (m - 1.0) / (2.0 * PI);
    let f = PlantedFunction::random(grid.d(), 3, 2, lip, 900 + i);
    let h: Vec<Complex64> = (0..grid.n()).map(|l| Complex64::from_polar(1.0, 2.0 * PI * f.eval(&grid.point_at(l)))).collect();
    let bn = graph.edges().iter().map(|&(a, b)| (h[a] - h[b]).norm()).fold(0.0, f64::max);
    if bn > 0.2 {
        return Err(format!("B_n = {bn} above 0.2").into());
    }

    let ld = rng.gen_range(1e-3..=0.125);
    let max_degree = graph.max_degree() as f64;
    let lambda = ld / max_degree;
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cond1_lhs(mid, ld, bn) <= 2f64.sqrt() / 3.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta_target = rng.gen_range(0.0..1.0) * lo;
    let phi_max = 2.0 * (delta_target / 2.0).asin();
    let z: Vec<Complex64> = h.iter().map(|hi| hi * Complex64::from_polar(1.0, rng.gen_range(-phi_max..=phi_max))).collect();
    let delta = z.iter().zip(&h).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if !(cond1_lhs(delta, ld, bn) <= 2f64.sqrt() / 3.0 && ld <= 0.125) {
        return Err(format!("instance {i}: sampled parameters violate the conditions").into());
    }
    if !sufficient_apriori(delta, lambda, max_degree, bn)?.pass {
        return Err(format!("instance {i}: library disagrees on the sufficient conditions").into());
    }

    let problem = QcqpProblem::new(CircleSignal::project(&z), graph, lambda)?;
    let report = problem.solve(&SolveOptions { tol: 1e-10, ..SolveOptions::default() })?;
    let cert = tightness_verdict(&problem, &report.ghat)?;
    let err_inf = report.ghat.as_slice().iter().zip(&h).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let bound_oracle = (2.0 * delta + delta * delta + ld * (bn * bn + 2f64.sqrt())) / (1.0 - ld / 2f64.sqrt());
    let bound = linf_bound(delta, lambda, max_degree, bn)?;
    if (bound - bound_oracle).abs() > 1e-14 * bound_oracle.max(1.0) {
        return Err(format!("instance {i}: ℓ∞ bound {bound} vs oracle {bound_oracle}").into());
    }
    Ok(PlantedOutcome { verdict: cert.verdict, err_inf_sq: err_inf * err_inf, bound })
}

const PLANTED_INSTANCES: u64 = 120;

fn planted_sweep() -> &'static Result<(Vec<PlantedOutcome>, Duration), String> {
    static SWEEP: OnceLock<Result<(Vec<PlantedOutcome>, Duration), String>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let out = (0..PLANTED_INSTANCES)
            .into_par_iter()
            .map(|i| planted_instance(i).map_err(|e| e.to_string()))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        Ok((out, start.elapsed()))
    })
}

// 8
fn tightness_on_planted() -> Outcome {
    let (sweep, elapsed) = planted_sweep().as_ref().map_err(|e| e.clone())?;
    let tight = sweep.iter().filter(|o| o.verdict == Verdict::Tight).count();
    ensure!(tight == sweep.len(), "tight in {tight}/{} planted instances", sweep.len());
    ensure!(*elapsed <= Duration::from_secs(300), "sweep took {:.1}s", elapsed.as_secs_f64());
    Ok(format!("tight in {tight}/{} planted instances", sweep.len()))
}

// 9
fn linf_bound_on_planted() -> Outcome {
    let (sweep, _) = planted_sweep().as_ref().map_err(|e| e.clone())?;
    let mut worst_ratio: f64 = 0.0;
    for (i, o) in sweep.iter().enumerate() {
        ensure!(o.err_inf_sq <= o.bound + 1e-8, "instance {i}: ‖ĝ-h‖∞² = {:.3e} > bound {:.3e}", o.err_inf_sq, o.bound);
        worst_ratio = worst_ratio.max(o.err_inf_sq / o.bound);
    }
    Ok(format!("{} instances, max ‖ĝ-h‖∞²/bound = {worst_ratio:.3}", sweep.len()))
}

// 10
fn baseline_correctness() -> Outcome {
    let (mut worst_u, mut worst_t, mut worst_norm): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for inst in 0..16u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + inst);
        let graph = match inst % 3 {
            0 => GraphSpec::path(rng.gen_range(10..=500))?,
            1 => GraphSpec::grid_linf(UniformGrid::new(2, rng.gen_range(3..=15))?, 1)?,
            _ => GraphSpec::grid_linf(UniformGrid::new(1, rng.gen_range(10..=300))?, 3)?,
        };
        let n = graph.n();
        let z = CircleSignal::new(random_unit(&mut rng, n))?;
        let lambda = 10f64.powf(rng.gen_range(-1.0..2.0));
        let zinf = inf_norm(z.as_slice());

        let u = solve_ucqp(&z, &graph, lambda, 1e-13)?;
        let lu = graph.laplacian_apply(&u.g)?;
        let res_u = (0..n).map(|i| (u.g[i] + lambda * lu[i] - z.as_slice()[i]).norm()).fold(0.0, f64::max);
        ensure!(res_u <= 1e-10 * zinf, "UCQP residual {res_u:.3e} (n = {n}, λ = {lambda:.3})");
        worst_u = worst_u.max(res_u);

        let t = solve_trs(&z, &graph, lambda, 1e-13, 1e-9 / n as f64 / 10.0)?;
        let lt = graph.laplacian_apply(&t.g)?;
        let res_t = (0..n).map(|i| (lambda * lt[i] + t.mu * t.g[i] - z.as_slice()[i]).norm()).fold(0.0, f64::max);
        let norm_gap = (t.g.iter().map(|v| v.norm_sqr()).sum::<f64>() - n as f64).abs();
        ensure!(norm_gap <= 1e-8, "TRS ‖g‖² - n = {norm_gap:.3e} (n = {n})");
        ensure!(res_t <= 1e-8, "TRS stationarity residual {res_t:.3e}");
        worst_t = worst_t.max(res_t);
        worst_norm = worst_norm.max(norm_gap);

        let u0 = solve_ucqp(&z, &graph, 0.0, 1e-13)?;
        let t0 = solve_trs(&z, &graph, 0.0, 1e-13, 1e-12)?;
        ensure!(u0.ghat == z && u0.g == z.as_slice(), "UCQP at λ = 0 did not return z");
        ensure!(t0.ghat == z && t0.g == z.as_slice(), "TRS at λ = 0 did not return z");
    }
    Ok(format!("UCQP residual ≤ {worst_u:.1e}, TRS residual ≤ {worst_t:.1e}, |‖g‖²-n| ≤ {worst_norm:.1e}"))
}

// 11
fn appendix_identities() -> Outcome {
    let cfg = Config { cases: 10_000, failure_persistence: None, ..Config::default() };
    let gammas = [0.25, 0.5, 1.0, PI];
    TestRunner::new(cfg.clone())
        .run(&(-100.0f64..100.0, 0usize..4), |(t, gi)| {
            let gamma = gammas[gi];
            let lhs = centered_wrap(t, gamma).unwrap() / (2.0 * gamma);
            let rhs = h_map(mod1(t / (2.0 * gamma)).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-12, "t = {t}, γ = {gamma}: {lhs} vs {rhs}");
            Ok(())
        })
        .map_err(|e| format!("centered modulo correspondence: {e}"))?;
    TestRunner::new(cfg.clone())
        .run(&(0.0f64..1.0, 0.0f64..1.0), |(a, b)| {
            let (a, b) = (Mod1Value::new(a).unwrap(), Mod1Value::new(b).unwrap());
            let chord = (circle_embed(a).value() - circle_embed(b).value()).norm();
            let via_wrap = chord_from_wrap(wrap_distance(a, b)).unwrap();
            prop_assert!((chord - via_wrap).abs() <= 1e-12);
            prop_assert!(h_inv(h_map(a)).unwrap() == a);
            Ok(())
        })
        .map_err(|e| format!("chord/wrap identity: {e}"))?;
    TestRunner::new(cfg)
        .run(&(0.0f64..(2.0 * PI), 0.0f64..(2.0 * PI)), |(s, t)| {
            let (u, v) = (Complex64::from_polar(1.0, s), Complex64::from_polar(1.0, t));
            let eps = (u - v).norm();
            let (au, av) = (
                circle_arg(UnitComplex::new(u.re, u.im).unwrap()),
                circle_arg(UnitComplex::new(v.re, v.im).unwrap()),
            );
            prop_assert!(wrap_distance(au, av) <= eps / 4.0 + 1e-12);
            Ok(())
        })
        .map_err(|e| format!("wrap bound from chord: {e}"))?;
    Ok("3 properties × 10⁴ cases".into())
}

// 12
fn interpolant_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1200);
    let random_point = |rng: &mut ChaCha8Rng, d: usize| -> Vec<f64> { (0..d).map(|_| rng.gen_range(0.0..=1.0)).collect() };

    // properties 1 (C = 1) and 2, shift equivariance on random fields
    let mut worst_shift: f64 = 0.0;
    for (d, m) in [(1, 17), (2, 9), (3, 5)] {
        let grid = UniformGrid::new(d, m)?;
        let values: Vec<f64> = (0..grid.n()).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let vmax = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let model = interp::fit(&GridField::new(grid, values.clone())?);
        let q = rng.gen_range(-20i64..=20) as f64;
        let shifted = interp::fit(&GridField::new(grid, values.iter().map(|v| v + q).collect())?);
        let c = rng.gen_range(-3.0..3.0);
        let constant = interp::fit(&GridField::new(grid, vec![c; grid.n()])?);
        for _ in 0..2000 {
            let x = random_point(&mut rng, d);
            let v = model.evaluate(&x)?;
            ensure!(v.abs() <= vmax, "|Q f| = {} > max |f| = {vmax}", v.abs());
            ensure!(constant.evaluate(&x)? == c, "constant {c} not reproduced at {x:?}");
            let gap = (shifted.evaluate(&x)? - (v + q)).abs();
            worst_shift = worst_shift.max(gap);
            ensure!(gap <= 1e-12 * (1.0 + vmax + q.abs()), "shift by {q}: gap {gap:.3e}");
        }
    }
    // with exactly representable samples and points the shift identity is bit-exact
    for d in [1, 2] {
        let grid = UniformGrid::new(d, 9)?;
        let values: Vec<f64> = (0..grid.n()).map(|_| rng.gen_range(-1024i64..1024) as f64 / 64.0).collect();
        let model = interp::fit(&GridField::new(grid, values.clone())?);
        let q = 7.0;
        let shifted = interp::fit(&GridField::new(grid, values.iter().map(|v| v + q).collect())?);
        for _ in 0..2000 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0..=256) as f64 / 256.0).collect();
            ensure!(shifted.evaluate(&x)? == model.evaluate(&x)? + q, "shift not exact at dyadic point {x:?}");
        }
    }

    // Lipschitz rate on analytic functions, M the ℓ∞-Lipschitz constant
    type Func = (fn(&[f64]) -> f64, f64);
    let one_d: [Func; 5] = [
        (|x| (4.0 * PI * x[0]).sin(), 4.0 * PI),
        (|x| x[0] * x[0], 2.0),
        (|x| x[0].exp(), std::f64::consts::E),
        (|x| (3.0 * x[0]).cos() + x[0], 4.0),
        (|x| 1.0 / (1.0 + x[0]), 1.0),
    ];
    let two_d: [Func; 5] = [
        (|x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos(), 4.0 * PI),
        (|x| x[0] * x[1], 2.0),
        (|x| (x[0] + x[1]).exp(), 2.0 * std::f64::consts::E.powi(2)),
        (|x| (x[0] + 2.0 * x[1]).sin(), 3.0),
        (|x| x[0] * x[0] - x[1] * x[1], 4.0),
    ];
    let mut worst_ratio: f64 = 0.0;
    for (d, funcs) in [(1, one_d), (2, two_d)] {
        for m in [11, 33] {
            let grid = UniformGrid::new(d, m)?;
            for (f, lip) in funcs {
                let model = interp::fit(&GridField::from_fn(grid, f));
                let bound = lip / (m - 1) as f64;
                let mut sup: f64 = 0.0;
                for _ in 0..10_000 {
                    let x = random_point(&mut rng, d);
                    sup = sup.max((model.evaluate(&x)? - f(&x)).abs());
                }
                ensure!(sup <= bound, "d = {d}, m = {m}: sup error {sup:.3e} > M/(m-1) = {bound:.3e}");
                worst_ratio = worst_ratio.max(sup / bound);
            }
        }
    }
    Ok(format!("shift gap ≤ {worst_shift:.1e} (exact on dyadic data), max sup-error/(M/(m-1)) = {worst_ratio:.3}"))
}

// 13
fn determinism() -> Outcome {
    let cfg = McConfig {
        n_sweep: vec![64, 256],
        methods: vec![Method::Trs, Method::Knn, Method::Ucqp],
        trials: 10,
        base_seed: 99,
        graph: GraphChoice::Auto,
        ..McConfig::default()
    };
    let render = |cfg: &McConfig| -> Result<String, Box<dyn StdError>> {
        let out = monte_carlo(cfg)?;
        let mut report = Report::new("mc", serde_json::to_value(cfg)?);
        report.trials = out.records;
        report.summary = Some(out.summary);
        Ok(report.to_json()?)
    };
    let a = render(&cfg)?;
    let b = render(&cfg)?;
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let c = single.install(|| render(&cfg).map_err(|e| e.to_string()))?;
    ensure!(a == b, "two runs produced different reports");
    ensure!(a == c, "single-threaded run produced a different report");
    Ok(format!("3 runs, {} identical bytes each", a.len()))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("noiseless exact recovery", noiseless_exact_recovery),
        ("denoising property", denoising_property),
        ("rate trend", rate_trend),
        ("expected-risk bound", expected_risk_bound),
        ("gradient/Hessian correctness", derivative_correctness),
        ("QCQP optimality at desk scale", qcqp_optimality),
        ("certificate identities", certificate_identities),
        ("tightness on planted instances", tightness_on_planted),
        ("ℓ∞ QCQP bound", linf_bound_on_planted),
        ("baseline correctness", baseline_correctness),
        ("circle and modulo identities", appendix_identities),
        ("interpolant contract", interpolant_contract),
        ("determinism", determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}").into())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
