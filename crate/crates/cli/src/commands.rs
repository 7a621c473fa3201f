use ergo_core::averages::{birkhoff_profile, sampled_averages_at, sampled_birkhoff_profile, Horizon};
use ergo_core::campaign::{run_campaign, Check};
use ergo_core::decomposition::{
    self as decomposition, build_input, build_sampled_input, verify_certificate, DecompositionInput, VerificationReport,
};
use ergo_core::io::{CertificateFile, LoadedSystem};
use ergo_core::maximal::{corollary_lambda_sweep, maximal_integral, verify_maximal_theorem, LambdaSweep};
use ergo_core::scalar::to_decimal;
use ergo_core::{Rational, Scalar};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::input::{
    load_certificate, load_system, load_system_arg, parse_range, require_finite, require_sampled, LambdaSpec,
};
use crate::report::{csv_text, write_file, ReportBuilder};
use crate::{BirkhoffArgs, ConvergeArgs, CorollaryArgs, DecomposeArgs, FuzzArgs, VerifyCertArgs, VerifyMaximalArgs};

fn render<S: Scalar>(values: &[S]) -> Vec<String> {
    values.iter().map(Scalar::render).collect()
}

fn horizon_label(h: Horizon) -> Value {
    match h {
        Horizon::Finite(n) => json!(n),
        Horizon::Full => json!("full"),
    }
}

fn emit(report: ReportBuilder, out: Option<&std::path::Path>) -> CliResult<bool> {
    let report = report.finish();
    if let Some(path) = out {
        report.write(path)?;
    }
    println!("{}", report.summary_line());
    Ok(report.passed())
}

pub fn verify_maximal(argv: Vec<String>, args: VerifyMaximalArgs) -> CliResult<bool> {
    let path = &args.system.system;
    let loaded = load_system_arg(&args.system)?;
    let case = require_finite(&loaded, path, "verify-maximal")?;
    let spec = LambdaSpec::parse(&args.lambda)?;
    let range = parse_range(&args.n_range, "--n-range")?;
    if *range.start() == 0 {
        return Err(CliError::Usage("--n-range starts at 1".into()));
    }
    let horizons = *range.start() as usize..=*range.end() as usize;

    let mut report = ReportBuilder::new(argv);
    for horizon in horizons.clone() {
        let h = Horizon::Finite(horizon);
        for (i, lambda) in spec.finite(case, path, h)?.iter().enumerate() {
            let v = maximal_integral(&case.system, &case.f, h, lambda)?;
            report.case(
                format!("N={horizon} lambda#{i}"),
                v.holds,
                json!({
                    "N": horizon,
                    "lambda": render(&v.lambda),
                    "integral": v.integral.render(),
                    "exceedance": v.exceedance.members,
                    "mass": v.exceedance.mass.render(),
                }),
            );
        }
    }
    if spec != LambdaSpec::Grid {
        let lambda = spec.single_finite(case, path)?;
        let sweep = verify_maximal_theorem(&case.system, &case.f, &lambda, horizons)?;
        report.case("nested", sweep.nested, json!({ "check": "E_N ⊆ E_{N+1}" }));
        report.case(
            "stabilized",
            sweep.stabilized,
            json!({ "check": "verdicts constant from the longest cycle length on" }),
        );
        report.case(
            "full",
            sweep.full.holds,
            json!({
                "N": horizon_label(sweep.full.horizon),
                "lambda": render(&sweep.full.lambda),
                "integral": sweep.full.integral.render(),
                "exceedance": sweep.full.exceedance.members,
                "mass": sweep.full.exceedance.mass.render(),
            }),
        );
    }
    emit(report, args.out.as_deref())
}

enum Window {
    Exact(DecompositionInput<Rational>),
    Float(DecompositionInput<f64>),
}

fn build_window(
    loaded: &LoadedSystem,
    path: &std::path::Path,
    spec: &LambdaSpec,
    x: usize,
    horizon: usize,
    m: usize,
) -> CliResult<Window> {
    Ok(match loaded {
        LoadedSystem::Finite(case) => {
            let lambda = spec.single_finite(case, path)?;
            Window::Exact(build_input(&case.system, &case.f, &lambda, x, horizon, m)?)
        }
        LoadedSystem::Sampled(case) => {
            let lambda = spec.sampled(case, path)?;
            Window::Float(build_sampled_input(
                &case.system,
                case.start,
                &case.f,
                lambda,
                horizon,
                m,
            )?)
        }
    })
}

pub fn decompose(_argv: Vec<String>, args: DecomposeArgs) -> CliResult<bool> {
    let path = &args.system.system;
    let loaded = load_system_arg(&args.system)?;
    let spec = LambdaSpec::parse(&args.lambda)?;
    let x = loaded.as_finite().map(|_| args.x);
    let window = build_window(&loaded, path, &spec, args.x, args.horizon, args.m)?;
    fn finish<S: Scalar>(
        input: &DecompositionInput<S>,
        x: Option<usize>,
    ) -> CliResult<(CertificateFile, VerificationReport)> {
        let cert = decomposition::decompose(input)?;
        let verdict = verify_certificate(&cert, input);
        Ok((CertificateFile::from_certificate(&cert, x), verdict))
    }
    let (file, verdict) = match &window {
        Window::Exact(input) => finish(input, x)?,
        Window::Float(input) => finish(input, x)?,
    };
    let mut text = file.to_json_pretty();
    text.push('\n');
    write_file(&args.emit, &text)?;
    println!(
        "decompose: {} blocks, tail at {}, total {} ≥ {}; wrote {}",
        file.blocks.len(),
        file.tail_start,
        file.total_sum,
        file.lower_bound,
        args.emit.display()
    );
    for failure in &verdict.failures {
        eprintln!("clause {} failed: {}", failure.clause, failure.detail);
    }
    Ok(verdict.passed())
}

pub fn verify_cert(argv: Vec<String>, args: VerifyCertArgs) -> CliResult<bool> {
    let path = &args.system.system;
    let file = load_certificate(&args.cert)?;
    let loaded = load_system_arg(&args.system)?;
    let spec = LambdaSpec::parse(&args.lambda)?;
    let x = match (&loaded, args.x.or(file.x)) {
        (LoadedSystem::Finite(_), None) => {
            return Err(CliError::config(&args.cert, None, "certificate has no x; pass --x"))
        }
        (_, x) => x.unwrap_or(0),
    };
    let window = build_window(&loaded, path, &spec, x, file.horizon, file.m)?;
    let verdict = match &window {
        Window::Exact(input) => verify_certificate(&file.to_certificate::<Rational>()?, input),
        Window::Float(input) => verify_certificate(&file.to_certificate::<f64>()?, input),
    };
    let mut report = ReportBuilder::new(argv);
    for failure in &verdict.failures {
        eprintln!("clause {} failed: {}", failure.clause, failure.detail);
        report.case(failure.clause.to_string(), false, json!({ "detail": failure.detail }));
    }
    if verdict.passed() {
        report.case("certificate", true, json!({ "m": file.m, "N": file.horizon }));
    }
    emit(report, args.out.as_deref())
}

pub fn birkhoff(_argv: Vec<String>, args: BirkhoffArgs) -> CliResult<bool> {
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let loaded = load_system_arg(&args.system)?;
    let (columns, rows): (&[&str], Vec<Vec<String>>) = match &loaded {
        LoadedSystem::Finite(case) => {
            let profile = birkhoff_profile(&case.system, &case.f, args.x, args.k)?;
            let rows = (1..=args.k)
                .map(|k| {
                    let a = profile.at(k);
                    vec![k.to_string(), a.render(), to_decimal(a).to_string()]
                })
                .collect();
            (&["k", "A_k", "A_k_decimal"], rows)
        }
        LoadedSystem::Sampled(case) => {
            let trace = case.system.sample_orbit(case.start, args.k, &case.f)?;
            let profile = sampled_birkhoff_profile(&trace.f_values);
            let rows = (1..=args.k)
                .map(|k| vec![k.to_string(), profile.at(k).to_string()])
                .collect();
            (&["k", "A_k"], rows)
        }
    };
    write_csv(args.out.as_deref(), &csv_text("birkhoff", columns, &rows)?)
}

fn write_csv(out: Option<&std::path::Path>, text: &str) -> CliResult<bool> {
    match out {
        Some(path) => write_file(path, text)?,
        None => print!("{text}"),
    }
    Ok(true)
}

pub fn converge(argv: Vec<String>, args: ConvergeArgs) -> CliResult<bool> {
    if args.min_exp > args.max_exp || args.max_exp > 30 {
        return Err(CliError::Usage("need --min-exp ≤ --max-exp ≤ 30".into()));
    }
    let loaded = load_system(&args.system)?;
    let case = require_sampled(&loaded, &args.system, "converge")?;
    let limit = match args.limit.or_else(|| case.system.space_average(&case.f)) {
        Some(l) => l,
        None => {
            return Err(CliError::Usage(
                "no closed-form space average for this observable; pass --limit".into(),
            ))
        }
    };
    let ks: Vec<usize> = (args.min_exp..=args.max_exp).map(|e| 1usize << e).collect();
    let trace = case.system.sample_orbit(case.start, *ks.last().unwrap(), &case.f)?;
    let averages = sampled_averages_at(&trace.f_values, &ks);

    let mut report = ReportBuilder::new(argv);
    let mut rows = Vec::with_capacity(ks.len());
    for (&k, &a) in ks.iter().zip(&averages) {
        let dev = (a - limit).abs();
        report.deviation(dev);
        report.case(
            format!("k={k}"),
            dev.is_finite(),
            json!({ "k": k, "A_k": a, "deviation": dev }),
        );
        rows.push(vec![k.to_string(), a.to_string(), dev.to_string()]);
    }
    write_csv(
        args.out.as_deref(),
        &csv_text("converge", &["k", "A_k", "abs_dev"], &rows)?,
    )?;
    let report = report.finish();
    if let Some(path) = &args.report {
        report.write(path)?;
    }
    eprintln!("{}", report.summary_line());
    Ok(report.passed())
}

pub fn fuzz(argv: Vec<String>, args: FuzzArgs) -> CliResult<bool> {
    let seeds = parse_range(&args.seeds, "--seeds")?;
    if args.n_max == 0 {
        return Err(CliError::Usage("--n-max must be at least 1".into()));
    }
    let checks: Vec<Check> = if args.checks.trim() == "all" {
        Check::ALL.to_vec()
    } else {
        args.checks
            .split(',')
            .map(|c| c.trim().parse::<Check>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Usage(e.to_string()))?
    };
    let campaign = run_campaign(*seeds.start()..seeds.end() + 1, args.n_max, &checks);

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let mut report = ReportBuilder::new(argv);
    for case in &campaign.cases {
        let mut detail = json!({
            "seed": case.seed,
            "check": case.check.name(),
            "points": case.points,
            "assertions": case.assertions,
        });
        if let Some(repro) = &case.repro {
            let file = args.out.join(format!("seed-{}-{}.json", case.seed, case.check.name()));
            let mut text = repro.to_json_pretty();
            text.push('\n');
            write_file(&file, &text)?;
            detail["failures"] = json!(case.failures);
            detail["repro"] = json!(file.display().to_string());
            eprintln!("seed {} {}: {}", case.seed, case.check, case.failures.join("; "));
        }
        report.case(
            format!("seed={} {}", case.seed, case.check.name()),
            case.passed(),
            detail,
        );
    }
    let report = report.finish();
    if let Some(path) = &args.report {
        report.write(path)?;
    }
    println!("{}", report.summary_line());
    Ok(report.passed())
}

fn sweep_cases(report: &mut ReportBuilder, name: &str, sweep: &LambdaSweep<Rational>) {
    for step in &sweep.steps {
        report.case(
            format!("{name} n={}", step.n),
            step.full_exceedance && step.theorem_integral >= Rational::from_count(0),
            json!({
                "n": step.n,
                "lambda": render(&step.lambda),
                "integral_lambda": step.integral_lambda.render(),
                "full_exceedance": step.full_exceedance,
                "theorem_integral": step.theorem_integral.render(),
            }),
        );
    }
    report.case(
        format!("{name} sweep"),
        sweep.holds(),
        json!({
            "integral_observable": sweep.integral_observable.render(),
            "integral_limit": sweep.integral_limit.render(),
            "converged_at": sweep.converged_at,
            "bounded": sweep.bounded(),
            "nondecreasing": sweep.nondecreasing(),
            "reaches_limit": sweep.reaches_limit(),
        }),
    );
}

pub fn corollary(argv: Vec<String>, args: CorollaryArgs) -> CliResult<bool> {
    let path = &args.system.system;
    let loaded = load_system_arg(&args.system)?;
    let case = require_finite(&loaded, path, "corollary")?;
    let n_max = match args.n_max {
        Some(0) => return Err(CliError::Usage("--n-max must be at least 1".into())),
        Some(n) => n,
        None => case.f.positive_part().sup_norm().ceil_u64() + 3,
    };
    let r = corollary_lambda_sweep(&case.system, &case.f, n_max)?;
    let mut report = ReportBuilder::new(argv);
    sweep_cases(&mut report, "f+", &r.positive_part);
    sweep_cases(&mut report, "f", &r.observable);
    report.case(
        "limits",
        r.convergence.converges_everywhere() && r.convergence.chain_holds(),
        json!({
            "upper": render(&r.convergence.upper),
            "lower": render(&r.convergence.lower),
            "integral_upper": r.convergence.integral_upper.render(),
            "integral_lower": r.convergence.integral_lower.render(),
            "integral_f": r.convergence.integral_f.render(),
        }),
    );
    emit(report, args.out.as_deref())
}
