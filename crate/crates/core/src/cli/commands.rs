use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde_json::json;

use crate::action::{
    classify_fixed_point, extract_weights, group_element, linear_part, validate_action, ActionKind, ActionSpec,
    ValidationConfig, WeightData, DEFAULT_WEIGHT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::extend::{injectivity_radius, saturate_extend, InjectivityDomain, InjectivitySearch};
use crate::flow::{integrate_flow, FlowQuery, IntegratorConfig};
use crate::linearize::{
    bochner_symbolic, reconstruct_polymap, verify_conjugacy, ConjugacySampling, GridConfig, Linearizer,
    QuadratureConfig,
};
use crate::sampling::seed_from_env;

use super::format::{parse_complex_list, read_points, Document};
use super::report::{ExtensionRecord, FitRecord, Report, WeightsRecord};
use super::{Backend, BuildArgs, Cli, Command, ExtendArgs, LinearizeArgs, OrbitArgs, OutputArgs};

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Input(_) => 1,
        Error::NotAPeriodicFlow { .. }
        | Error::NilpotentPartDetected(_)
        | Error::SuspectWeight { .. }
        | Error::WeightsUnreliable { .. } => 3,
        Error::DegreeTooHighForGrid { .. } => 4,
        _ => 5,
    }
}

pub fn run(cli: Cli) -> i32 {
    let seed = seed_from_env();
    match cli.command {
        Command::Check { spec, output } => {
            let mut report = Report::new("check", spec.display().to_string(), seed, json!({}));
            let result = check(&spec, seed, &mut report);
            finish(report, result, &output)
        }
        Command::Classify { spec, output } => {
            let mut report = Report::new("classify", spec.display().to_string(), seed, json!({}));
            let result = classify(&spec, &mut report);
            finish(report, result, &output)
        }
        Command::Linearize(args) => {
            let mut report = Report::new("linearize", args.spec.display().to_string(), seed, json!({}));
            let result = linearize(&args, seed, &mut report);
            finish(report, result, &args.output)
        }
        Command::Verify {
            spec,
            linearizer,
            samples,
            tolerance,
            output,
        } => {
            let mut report = Report::new("verify", spec.display().to_string(), seed, json!({}));
            let result = verify(&spec, &linearizer, samples, tolerance, seed, &mut report);
            finish(report, result, &output)
        }
        Command::Extend(args) => {
            let mut report = Report::new("extend", args.spec.display().to_string(), seed, json!({}));
            let result = extend(&args, seed, &mut report);
            finish(report, result, &args.output)
        }
        Command::Orbit(args) => match orbit(&args) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
    }
}

fn finish(mut report: Report, result: Result<()>, output: &OutputArgs) -> i32 {
    let code = match &result {
        Ok(()) if report.passed => 0,
        Ok(()) => 2,
        Err(e) => {
            let code = exit_code(e);
            report.fail(e, code);
            eprintln!("error: {e}");
            code
        }
    };
    if output.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", summary(&report));
    }
    if let Some(path) = &output.report {
        if let Err(e) = std::fs::write(path, report.to_json() + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 5;
        }
    }
    code
}

fn summary(report: &Report) -> String {
    let mut out = String::new();
    let status = if report.passed { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "{} {}: {status}", report.command, report.input);
    if let Some(v) = &report.validation {
        for (name, value) in [
            ("group law residual", v.group_law_residual),
            ("identity residual", v.identity_residual),
            ("fixed point residual", v.fixed_point_residual),
            ("field at fixed point", v.field_at_fixed_point),
            ("periodicity residual", v.periodicity.as_ref().map(|p| p.max_residual)),
        ] {
            if let Some(value) = value {
                let _ = writeln!(out, "  {name}: {value:.3e}");
            }
        }
    }
    if let Some(w) = &report.weights {
        let _ = writeln!(out, "  weights: {:?}", w.weights);
    }
    if let Some(c) = &report.classification {
        let _ = writeln!(out, "  fixed point: {c:?}");
    }
    if let Some(fit) = &report.fit {
        let _ = writeln!(
            out,
            "  fit: degree {}, residual {:.3e}, condition {:.3e}",
            fit.max_degree, fit.fit_residual, fit.condition
        );
    }
    if let Some(n) = &report.normalization {
        let _ = writeln!(
            out,
            "  |F(p)| = {:.3e}, max |DF(p) - Id| = {:.3e}",
            n.value_at_fixed_point, n.jacobian_defect
        );
    }
    if let Some(c) = &report.conjugacy {
        let _ = writeln!(
            out,
            "  conjugacy: max residual {:.3e}, mean {:.3e} over {} samples",
            c.max_residual, c.mean_residual, c.sample_count
        );
    }
    if let Some(d) = &report.domain {
        let _ = writeln!(out, "  domain radius: {}", d.radius);
    }
    if let Some(records) = &report.extension {
        for r in records {
            let _ = writeln!(
                out,
                "  T({}) = {} (z = {}, residual {:.3e})",
                show(&r.y),
                show(&r.result.value),
                show(&[r.result.witness_z]),
                r.result.residual
            );
        }
    }
    out
}

fn show(v: &[[f64; 2]]) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{}", Complex64::new(c[0], c[1]))).collect();
    format!("({})", parts.join(", "))
}

fn load_spec(path: &Path) -> Result<ActionSpec> {
    Document::read(path)?.to_spec()
}

fn weights(spec: &ActionSpec, report: &mut Report) -> Result<WeightData> {
    let w = extract_weights(&linear_part(spec), DEFAULT_WEIGHT_TOLERANCE)?;
    report.weights = Some(WeightsRecord::from(&w));
    report.classification = Some(classify_fixed_point(&w));
    Ok(w)
}

fn validation_config(seed: u64) -> ValidationConfig {
    let mut cfg = ValidationConfig {
        seed,
        ..Default::default()
    };
    cfg.periodicity.seed = seed;
    cfg
}

fn check(path: &Path, seed: u64, report: &mut Report) -> Result<()> {
    let cfg = validation_config(seed);
    report.provenance.settings = json!({ "validation": cfg });
    let spec = load_spec(path)?;
    let v = validate_action(&spec, &cfg)?;
    report.passed = v.passed;
    report.validation = Some(v);
    Ok(())
}

fn classify(path: &Path, report: &mut Report) -> Result<()> {
    report.provenance.settings = json!({ "weight_tolerance": DEFAULT_WEIGHT_TOLERANCE });
    let spec = load_spec(path)?;
    weights(&spec, report)?;
    report.passed = true;
    Ok(())
}

fn quadrature(build: &BuildArgs) -> QuadratureConfig {
    QuadratureConfig {
        nodes: build.nodes,
        auto_refine: !build.no_refine,
        ..Default::default()
    }
}

fn grid(build: &BuildArgs) -> GridConfig {
    GridConfig {
        radius: build.grid_radius,
        points_per_axis: build.points_per_axis,
    }
}

fn build_settings(build: &BuildArgs, integrator: &IntegratorConfig) -> serde_json::Value {
    json!({
        "backend": format!("{:?}", build.backend).to_lowercase(),
        "max_degree": build.max_deg,
        "quadrature": quadrature(build),
        "grid": grid(build),
        "integrator": integrator,
        "weight_tolerance": DEFAULT_WEIGHT_TOLERANCE,
    })
}

fn build_linearizer(
    spec: &ActionSpec,
    w: &WeightData,
    build: &BuildArgs,
    integrator: &IntegratorConfig,
    report: &mut Report,
) -> Result<Linearizer> {
    let symbolic = match (build.backend, spec.kind()) {
        (Backend::Symbolic, ActionKind::VectorField(_)) => {
            return Err(Error::Input("the symbolic backend needs a closed-form action".into()))
        }
        (Backend::Symbolic, _) => true,
        (Backend::Numeric, _) => false,
        (Backend::Auto, kind) => matches!(kind, ActionKind::ClosedForm(_)),
    };
    let f = if symbolic {
        bochner_symbolic(spec, w)?
    } else {
        let q = quadrature(build);
        q.validate()?;
        let r = reconstruct_polymap(spec, build.max_deg, &grid(build), &q, integrator)?;
        report.fit = Some(FitRecord::new(build.max_deg, &r));
        Linearizer::from_polymap(r.map, spec.fixed_point().to_vec(), w.clone())?
    };
    report.linearizer = f.polymap().map(|m| Document::from_polymap(m, f.fixed_point()));
    report.normalization = Some(f.normalization()?);
    Ok(f)
}

fn certify(
    f: &Linearizer,
    spec: &ActionSpec,
    samples: usize,
    tolerance: f64,
    seed: u64,
    integrator: &IntegratorConfig,
    report: &mut Report,
) -> Result<()> {
    let sampling = ConjugacySampling {
        samples,
        seed,
        ..Default::default()
    };
    let (zs, xs) = sampling.draw(spec.fixed_point());
    let c = verify_conjugacy(f, spec, &zs, &xs, integrator)?;
    report.passed = c.max_residual <= tolerance;
    report.conjugacy = Some(c);
    if let serde_json::Value::Object(settings) = &mut report.provenance.settings {
        settings.insert("conjugacy".into(), json!({ "sampling": sampling, "tolerance": tolerance }));
    }
    Ok(())
}

fn linearize(args: &LinearizeArgs, seed: u64, report: &mut Report) -> Result<()> {
    let integrator = IntegratorConfig::default();
    let cfg = validation_config(seed);
    let mut settings = build_settings(&args.build, &integrator);
    settings["validation"] = json!(cfg);
    report.provenance.settings = settings;

    let spec = load_spec(&args.spec)?;
    let w = weights(&spec, report)?;
    let v = validate_action(&spec, &cfg)?;
    let valid = v.passed;
    report.validation = Some(v);
    if !valid {
        return Ok(());
    }
    let f = build_linearizer(&spec, &w, &args.build, &integrator, report)?;
    if let (Some(path), Some(doc)) = (&args.out, &report.linearizer) {
        std::fs::write(path, doc.to_json() + "\n")
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    certify(&f, &spec, args.samples, args.tolerance, seed, &integrator, report)
}

fn load_linearizer(path: &Path, spec: &ActionSpec, w: &WeightData) -> Result<Linearizer> {
    let (map, p) = Document::read(path)?.to_polymap()?;
    if map.dimension() != spec.dimension() {
        return Err(Error::Input(format!(
            "map has dimension {}, action has {}",
            map.dimension(),
            spec.dimension()
        )));
    }
    if p != spec.fixed_point() {
        return Err(Error::Input("map and action have different fixed points".into()));
    }
    Linearizer::from_polymap(map, p, w.clone())
}

fn verify(
    spec_path: &Path,
    map_path: &Path,
    samples: usize,
    tolerance: f64,
    seed: u64,
    report: &mut Report,
) -> Result<()> {
    let integrator = IntegratorConfig::default();
    report.provenance.settings = json!({ "integrator": integrator, "weight_tolerance": DEFAULT_WEIGHT_TOLERANCE });
    let spec = load_spec(spec_path)?;
    let w = weights(&spec, report)?;
    let f = load_linearizer(map_path, &spec, &w)?;
    report.linearizer = f.polymap().map(|m| Document::from_polymap(m, f.fixed_point()));
    report.normalization = Some(f.normalization()?);
    certify(&f, &spec, samples, tolerance, seed, &integrator, report)
}

fn extend(args: &ExtendArgs, seed: u64, report: &mut Report) -> Result<()> {
    let integrator = IntegratorConfig::default();
    let search = InjectivitySearch {
        seed,
        ..Default::default()
    };
    let mut settings = build_settings(&args.build, &integrator);
    settings["injectivity"] = json!(search);
    settings["budget"] = json!(args.budget);
    report.provenance.settings = settings;

    let spec = load_spec(&args.spec)?;
    let w = weights(&spec, report)?;
    let class = classify_fixed_point(&w);
    if !class.is_dicritical() {
        return Err(Error::NotDicritical(class));
    }
    let f = match &args.linearizer {
        Some(path) => {
            let f = load_linearizer(path, &spec, &w)?;
            report.normalization = Some(f.normalization()?);
            f
        }
        None => build_linearizer(&spec, &w, &args.build, &integrator, report)?,
    };
    let points = read_points(&args.points, spec.dimension())?;
    let dom = match args.radius {
        Some(r) => InjectivityDomain::new(r)?,
        None => injectivity_radius(&f, &search)?,
    };
    report.domain = Some(dom);
    let mut records = Vec::with_capacity(points.len());
    for y in &points {
        let result = saturate_extend(&spec, &f, &dom, y, args.budget, &integrator)?;
        records.push(ExtensionRecord {
            y: y.iter().map(|c| [c.re, c.im]).collect(),
            result,
        });
    }
    report.extension = Some(records);
    report.passed = true;
    Ok(())
}

fn orbit(args: &OrbitArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let x0 = parse_complex_list(&args.x0)?;
    if x0.len() != spec.dimension() {
        return Err(Error::Input(format!(
            "--x0 has {} coordinates, action has dimension {}",
            x0.len(),
            spec.dimension()
        )));
    }
    if args.steps == 0 {
        return Err(Error::Input("--steps must be positive".into()));
    }
    let mut vertices = vec![Complex64::new(0.0, 0.0)];
    for v in &args.path {
        match parse_complex_list(v)?.as_slice() {
            [z] => vertices.push(*z),
            _ => return Err(Error::Input(format!("--path {v:?} must be a single re,im pair"))),
        }
    }
    let integrator = IntegratorConfig::default();
    let total = args.steps * (vertices.len() - 1);

    let mut csv = String::from("t");
    for i in 1..=x0.len() {
        let _ = write!(csv, ",re_x{i},im_x{i}");
    }
    csv.push('\n');
    let mut x = x0.clone();
    let mut z = vertices[0];
    let mut row = |t: f64, x: &[Complex64]| {
        let _ = write!(csv, "{t}");
        for c in x {
            let _ = write!(csv, ",{},{}", c.re, c.im);
        }
        csv.push('\n');
    };
    row(0.0, &x);
    for (seg, pair) in vertices.windows(2).enumerate() {
        let step = (pair[1] - pair[0]) / args.steps as f64;
        for j in 1..=args.steps {
            let next = pair[0] + step * j as f64;
            x = match spec.kind() {
                ActionKind::ClosedForm(a) => a.eval(group_element(next), &x0)?,
                ActionKind::VectorField(field) => integrate_flow(
                    field,
                    &FlowQuery {
                        z: next - z,
                        x0: x,
                    },
                    &integrator,
                )?,
            };
            z = next;
            row((seg * args.steps + j) as f64 / total as f64, &x);
        }
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
