use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use modunwrap::baselines::{solve_trs, solve_ucqp, LambdaRule};
use modunwrap::certificate::tightness_verdict;
use modunwrap::harness::elevation::{cone_terrain, elevation_demo, ElevationOptions};
use modunwrap::harness::{
    generate, monte_carlo, rate_fit, run_pipeline, unwrap_denoised, McConfig, McSummary, Method, PlantedFunction,
    SyntheticSpec, TestFunction,
};
use modunwrap::io::{self, FieldKind, GridFileHeader, Report};
use modunwrap::knn::{denoise, KRule};
use modunwrap::{interp, CircleSignal, GridField, Mod1Value, QcqpProblem, SolveOptions, UniformGrid};
use serde_json::json;

use crate::args::*;
use crate::{usage, CliError};

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Gen(a) => gen(a),
        Command::Denoise(a) => denoise_cmd(a),
        Command::Unwrap(a) => unwrap_cmd(a),
        Command::Recover(a) => recover(a),
        Command::Interp(a) => interp_cmd(a),
        Command::Qcqp(a) => qcqp(a),
        Command::Certify(a) => certify(a),
        Command::Ucqp(a) => baseline(a, Method::Ucqp),
        Command::Trs(a) => baseline(a, Method::Trs),
        Command::Mc(a) => mc(a),
        Command::Rate(a) => rate(a),
        Command::DemoElevation(a) => demo_elevation(a),
    }
}

/// Writes to `path`, or to stdout when absent.
fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| {
            modunwrap::Error::Io {
                path: p.to_path_buf(),
                source,
            }
            .into()
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| {
                    modunwrap::Error::Io {
                        path: PathBuf::from("<stdout>"),
                        source,
                    }
                    .into()
                })
        }
    }
}

fn emit_json(path: Option<&Path>, value: &impl serde::Serialize) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(modunwrap::Error::from)?;
    text.push('\n');
    emit(path, &text)
}

fn mod1_text(field: &GridField<Mod1Value>, header: GridFileHeader) -> CliResult<String> {
    let values: Vec<f64> = field.values().iter().map(|v| v.get()).collect();
    Ok(io::format_field(&GridFileHeader { kind: FieldKind::Mod1, ..header }, &values)?)
}

fn real_text(field: &GridField<f64>, header: GridFileHeader) -> CliResult<String> {
    Ok(io::format_field(&GridFileHeader { kind: FieldKind::Real, ..header }, field.values())?)
}

fn require_positive(name: &str, v: f64) -> CliResult {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

fn test_function(a: &FunctionArgs, seed: u64) -> CliResult<TestFunction> {
    Ok(match a.func {
        FuncName::Example1 => TestFunction::Example1,
        FuncName::Example2 => TestFunction::Example2,
        FuncName::Planted => {
            require_positive("planted-lipschitz", a.planted_lipschitz)?;
            if a.planted_terms == 0 || a.planted_max_freq < 1 {
                return Err(usage("a planted function needs at least one term and --planted-max-freq ≥ 1"));
            }
            TestFunction::Planted(PlantedFunction::random(
                a.d,
                a.planted_terms,
                a.planted_max_freq,
                a.planted_lipschitz,
                seed,
            ))
        }
    })
}

/// Builds the neighbour rule. `sigma` and `lipschitz` fill in what the
/// flags leave open.
fn k_rule(a: &KArgs, sigma: Option<f64>, lipschitz: Option<f64>) -> CliResult<KRule> {
    let name = a.k_rule.unwrap_or(if a.k.is_some() { KRuleName::Explicit } else { KRuleName::Practical });
    if a.k.is_some() && name != KRuleName::Explicit {
        return Err(usage("--k only applies to --k-rule explicit"));
    }
    let bound_inputs = || -> CliResult<(f64, f64)> {
        let sigma = sigma.ok_or_else(|| usage("this --k-rule needs --sigma"))?;
        let lipschitz = a.lipschitz.or(lipschitz).ok_or_else(|| usage("this --k-rule needs --lipschitz"))?;
        Ok((sigma, lipschitz))
    };
    Ok(match name {
        KRuleName::Explicit => KRule::Explicit {
            k: a.k.ok_or_else(|| usage("--k-rule explicit needs --k"))?,
        },
        KRuleName::Expected => {
            let (sigma, lipschitz) = bound_inputs()?;
            KRule::ExpectedRisk { sigma, lipschitz }
        }
        KRuleName::Supnorm => {
            let (sigma, lipschitz) = bound_inputs()?;
            KRule::SupNorm { sigma, lipschitz }
        }
        KRuleName::Practical => {
            require_positive("C", a.c)?;
            KRule::Practical { c: a.c }
        }
    })
}

fn lambda_rule(a: &LambdaArgs) -> CliResult<LambdaRule> {
    match (a.lambda, a.kappa) {
        (Some(_), Some(_)) => Err(usage("give either --lambda or --kappa, not both")),
        (Some(lambda), None) => Ok(LambdaRule::Explicit { lambda }),
        (None, Some(kappa)) => Ok(LambdaRule::Schedule { kappa }),
        (None, None) => Err(usage("one of --lambda or --kappa is required")),
    }
}

fn gen(a: GenArgs) -> CliResult {
    if a.sigma < 0.0 || !a.sigma.is_finite() {
        return Err(usage("--sigma must be non-negative"));
    }
    let function = test_function(&a.function, a.seed)?;
    let spec = SyntheticSpec {
        function,
        d: a.function.d,
        m: a.m,
        sigma: a.sigma,
        seed: a.seed,
    };
    let data = generate(&spec)?;
    let mut header = GridFileHeader::new(data.truth.grid(), FieldKind::Mod1).with_seed(a.seed);
    header.meta.insert("func".into(), spec.function.label().into());
    header.meta.insert("sigma".into(), format!("{}", a.sigma));
    if let Some(p) = &a.truth_out {
        emit(Some(p), &real_text(&data.truth, header.clone())?)?;
    }
    emit(a.out.as_deref(), &mod1_text(&data.noisy_mod, header)?)
}

fn denoise_cmd(a: DenoiseArgs) -> CliResult {
    let (header, y) = io::read_mod1_field(&a.input)?;
    let k = k_rule(&a.k, a.sigma, None)?.resolve(y.grid())?;
    let den = denoise(&y, k)?;
    eprintln!("k = {k}, zero resultants = {}", den.zero_resultants);
    emit(a.out.as_deref(), &mod1_text(&den.field, header)?)
}

fn unwrap_cmd(a: UnwrapArgs) -> CliResult {
    let (header, y) = io::read_mod1_field(&a.input)?;
    let out = unwrap_denoised(y);
    eprintln!("itoh margin = {:.6e}", out.itoh_margin);
    emit(a.out.as_deref(), &real_text(&out.ftilde, header)?)
}

fn recover(a: RecoverArgs) -> CliResult {
    let (header, y) = io::read_mod1_field(&a.input)?;
    let k = k_rule(&a.k, a.sigma, None)?.resolve(y.grid())?;
    let out = run_pipeline(&y, k)?;
    eprintln!(
        "k = {k}, zero resultants = {}, itoh margin = {:.6e}",
        out.zero_resultants, out.itoh_margin
    );
    if let Some(p) = &a.ghat_out {
        emit(Some(p), &mod1_text(&out.ghat, header.clone())?)?;
    }
    emit(a.out.as_deref(), &real_text(&out.ftilde, header)?)
}

fn interp_cmd(a: InterpArgs) -> CliResult {
    let (_, field) = io::read_field(&a.input)?;
    let model = interp::fit(&field);
    let mut text = String::new();
    for p in &a.at {
        let x = p
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("bad coordinate '{t}' in --at {p}"))))
            .collect::<CliResult<Vec<f64>>>()?;
        text.push_str(&format!("{:.16e}\n", model.evaluate(&x)?));
    }
    emit(a.out.as_deref(), &text)
}

struct Solved {
    header: GridFileHeader,
    problem: QcqpProblem,
    report: modunwrap::SolveReport,
}

fn solve_qcqp(a: &QcqpArgs) -> CliResult<Solved> {
    let (header, y) = io::read_mod1_field(&a.input)?;
    require_positive("tol", a.tol)?;
    let graph = a.graph.build(y.grid())?;
    let lambda = lambda_rule(&a.lambda)?.resolve(y.grid().n())?;
    let problem = QcqpProblem::new(CircleSignal::from_mod1(y.values()), graph, lambda)?;
    let opts = SolveOptions {
        max_iter: a.max_iter,
        tol: a.tol,
        restarts: a.restarts,
        seed: a.seed,
        ..SolveOptions::default()
    };
    let report = problem.solve(&opts)?;
    Ok(Solved { header, problem, report })
}

fn ghat_field(grid: UniformGrid, g: &CircleSignal) -> CliResult<GridField<Mod1Value>> {
    Ok(GridField::new(grid, g.to_mod1())?)
}

fn header_grid(h: &GridFileHeader) -> CliResult<UniformGrid> {
    Ok(UniformGrid::new(h.d, h.m)?)
}

fn qcqp(a: QcqpArgs) -> CliResult {
    let s = solve_qcqp(&a)?;
    let checks = s.problem.critical_point_checks(&s.report.ghat)?;
    let summary = json!({
        "lambda": s.problem.lambda(),
        "objective": s.report.objective,
        "grad_inf_norm": s.report.grad_inf_norm,
        "iterations": s.report.iterations,
        "converged": s.report.converged,
        "critical_point": checks,
    });
    let field = ghat_field(header_grid(&s.header)?, &s.report.ghat)?;
    emit(a.out.as_deref(), &mod1_text(&field, s.header)?)?;
    if a.out.is_some() {
        emit_json(None, &summary)?;
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn certify(a: CertifyArgs) -> CliResult {
    let s = solve_qcqp(&a.solve)?;
    let cert = tightness_verdict(&s.problem, &s.report.ghat)?;
    if let Some(p) = &a.solve.out {
        let field = ghat_field(header_grid(&s.header)?, &s.report.ghat)?;
        emit(Some(p), &mod1_text(&field, s.header.clone())?)?;
    }
    emit_json(
        None,
        &json!({
            "verdict": cert.verdict,
            "tight": cert.tight,
            "min_eig": cert.min_eig,
            "null_multiplicity": cert.null_multiplicity,
            "objective": s.report.objective,
        }),
    )?;
    if let Some(p) = &a.report {
        let mut report = Report::new(
            "certify",
            json!({
                "input": a.solve.input,
                "graph": a.solve.graph,
                "lambda": s.problem.lambda(),
                "tol": a.solve.tol,
                "restarts": a.solve.restarts,
                "seed": a.solve.seed,
            }),
        );
        report.certificates.push(cert);
        io::write_report(p, &report)?;
    }
    Ok(())
}

fn baseline(a: BaselineArgs, method: Method) -> CliResult {
    let (header, y) = io::read_mod1_field(&a.input)?;
    require_positive("tol", a.tol)?;
    let graph = a.graph.build(y.grid())?;
    let lambda = lambda_rule(&a.lambda)?.resolve(y.grid().n())?;
    let z = CircleSignal::from_mod1(y.values());
    let ghat = match method {
        Method::Ucqp => {
            let r = solve_ucqp(&z, &graph, lambda, a.tol)?;
            eprintln!("lambda = {lambda}, residual = {:.3e}, cg iterations = {}", r.residual_inf, r.cg_iterations);
            r.ghat
        }
        Method::Trs => {
            let r = solve_trs(&z, &graph, lambda, a.tol, 1e-10)?;
            eprintln!("lambda = {lambda}, mu = {:.6e}, residual = {:.3e}", r.mu, r.residual_inf);
            r.ghat
        }
        Method::Knn => unreachable!("kNN is not a graph baseline"),
    };
    let field = ghat_field(y.grid(), &ghat)?;
    emit(a.out.as_deref(), &mod1_text(&field, header)?)
}

fn mc_config(a: &McArgs) -> CliResult<McConfig> {
    let function = test_function(&a.function, a.seed)?;
    let methods = a
        .methods
        .split(',')
        .map(|t| t.trim().parse::<Method>().map_err(|e| usage(e.to_string())))
        .collect::<CliResult<Vec<_>>>()?;
    let k_rule = k_rule(&a.k, Some(a.sigma), Some(function.lipschitz()))?;
    Ok(McConfig {
        function,
        d: a.function.d,
        sigma: a.sigma,
        n_sweep: a.n_sweep.clone(),
        methods,
        trials: a.trials,
        base_seed: a.seed,
        k_rule,
        kappa: a.kappa,
        graph: a.graph,
    })
}

fn run_mc(a: &McArgs) -> CliResult<Report> {
    let cfg = mc_config(a)?;
    let outcome = monte_carlo(&cfg)?;
    let mut report = Report::new("mc", serde_json::to_value(&cfg).map_err(modunwrap::Error::from)?);
    report.trials = outcome.records;
    report.summary = Some(outcome.summary);
    Ok(report)
}

fn mc(a: McArgs) -> CliResult {
    let report = run_mc(&a)?;
    if let (Some(p), Some(s)) = (&a.csv, &report.summary) {
        io::write_summary_csv(p, s)?;
    }
    emit(a.out.as_deref(), &report.to_json()?)
}

fn rate(a: RateArgs) -> CliResult {
    let report = match &a.input {
        Some(p) => io::read_report(p)?,
        None => run_mc(&a.mc)?,
    };
    let summary: &McSummary = report
        .summary
        .as_ref()
        .ok_or_else(|| usage("report has no summary"))?;
    if let Some(p) = &a.mc.csv {
        io::write_summary_csv(p, summary)?;
    }
    let mut methods: Vec<Method> = summary.entries.iter().map(|e| e.method).collect();
    methods.dedup();
    let mut fits = serde_json::Map::new();
    for method in methods {
        let mut ns = Vec::new();
        let mut errs = Vec::new();
        for e in summary.entries.iter().filter(|e| e.method == method) {
            let stat = e
                .metrics()
                .into_iter()
                .find(|(name, _)| *name == a.metric)
                .ok_or_else(|| usage(format!("unknown metric '{}'", a.metric)))?
                .1;
            if let Some(s) = stat {
                ns.push(e.n);
                errs.push(s.mean);
            }
        }
        let fit = rate_fit(&ns, &errs)?;
        fits.insert(method.label().to_string(), json!({ "n": ns, "mean": errs, "fit": fit }));
    }
    emit_json(a.mc.out.as_deref(), &json!({ "metric": a.metric, "fits": fits }))
}

fn demo_elevation(a: ElevationArgs) -> CliResult {
    let rows = match (&a.input, a.cone) {
        (Some(p), None) => io::read_elevation(p, a.crop)?,
        (None, Some(m)) if m >= 2 => cone_terrain(m, a.cone_height),
        (None, Some(_)) => return Err(usage("--cone needs a side length of at least 2")),
        _ => return Err(usage("give --in <matrix> or --cone <m>")),
    };
    let opts = ElevationOptions {
        scale: a.scale,
        sigma: a.sigma,
        k: a.k,
        seed: a.seed,
    };
    let demo = elevation_demo(&rows, &opts)?;
    fs::create_dir_all(&a.out_dir).map_err(|source| modunwrap::Error::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    let header = GridFileHeader::new(demo.truth.grid(), FieldKind::Real).with_seed(a.seed);
    let dir = &a.out_dir;
    emit(Some(&dir.join("truth.gf")), &real_text(&demo.truth, header.clone())?)?;
    emit(Some(&dir.join("noisy.gf")), &mod1_text(&demo.noisy, header.clone())?)?;
    emit(Some(&dir.join("denoised.gf")), &mod1_text(&demo.denoised, header.clone())?)?;
    emit(Some(&dir.join("unwrapped.gf")), &real_text(&demo.unwrapped, header.clone())?)?;
    emit(Some(&dir.join("naive_unwrapped.gf")), &real_text(&demo.naive_unwrapped, header)?)?;
    let summary = json!({
        "m": demo.m,
        "options": opts,
        "metrics": demo.metrics,
        "naive_metrics": demo.naive_metrics,
        "clean_step": demo.clean_step,
        "clean_itoh": demo.clean_itoh,
    });
    emit_json(Some(&dir.join("report.json")), &summary)?;
    emit_json(None, &summary)
}
