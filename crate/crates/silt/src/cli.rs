//! Command line: class enumeration, integral evaluation, moment
//! reports, and a self-verification suite.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage error,
//! 3 verification mismatch.

use crate::combinatorics::{
    arborescence_count, classify, enumerate_matrices, ClassId, ALL_CLASSES,
};
use crate::gammafn::{
    gamma_f1_recurrence, gamma_f2_recurrence, gamma_value, GammaMethod, GammaQuery,
};
use crate::integrals::{
    bessel_moment, evaluate_class, gamma_v, gamma_v7_by_quadrature, gamma_v8_by_quadrature,
    k0_convolution_check, load_constants, ConstantSet, EvalContext, IntegralValue, Route, VGraph,
};
use crate::moments::{build_report, MomentReport, ReportOptions, ReportProvenance};
use crate::multigraph::graph_from_matrix;
use crate::quad::Method;
use crate::specfun::{zeta3, zeta_f, zeta_f_series};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "silt",
    version,
    about = "Moments of the renormalized intersection local time of planar Brownian motion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Monte Carlo samples per estimate (minimum 1000 when sampling).
    #[arg(long, global = true, default_value_t = 1 << 20)]
    samples: u64,
    /// Seed for all Monte Carlo estimates.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance for deterministic quadratures, in [1e-12, 1e-2].
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Constants file with `name value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    constants: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads (falls back to SILT_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// List the connectivity-matrix classes of one order.
    Enumerate {
        /// Matrix order, 2 through 6.
        #[arg(long)]
        r: usize,
    },
    /// Evaluate the class integrals I and script-I for one class.
    Integrals {
        /// Class name, f1 through f8.
        #[arg(long)]
        class: String,
        /// Evaluation route.
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Assemble the full moment report.
    Moments {
        /// Skip the fourth moment (closed forms only).
        #[arg(long)]
        skip_fourth: bool,
    },
    /// Run the built-in verification suite.
    Verify,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Closed,
    Parametric,
    Position,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

/// Parse `std::env::args`, execute, and return the exit code.
pub fn run() -> i32 {
    let mut stdout = std::io::stdout();
    run_to(std::env::args_os(), &mut stdout)
}

/// Testable entry point: execute with explicit arguments, writing the
/// primary output to `out` (diagnostics go to standard error).
pub fn run_to<I, T>(args: I, out: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not failures.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = validate(&cli) {
        eprintln!("silt: {msg}");
        return 2;
    }
    configure_threads(cli.threads);
    let result = match &cli.command {
        Command::Enumerate { r } => cmd_enumerate(&cli, *r),
        Command::Integrals { class, method } => cmd_integrals(&cli, class, *method),
        Command::Moments { skip_fourth } => cmd_moments(&cli, *skip_fourth),
        Command::Verify => cmd_verify(&cli),
    };
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            eprintln!("silt: {}", f.message);
            f.code
        }
    }
}

fn validate(cli: &Cli) -> Result<(), String> {
    if !(1e-12..=1e-2).contains(&cli.tol) {
        return Err(format!("--tol must lie in [1e-12, 1e-2], got {}", cli.tol));
    }
    let uses_mc = match &cli.command {
        Command::Enumerate { .. } => false,
        Command::Integrals { method, .. } => {
            matches!(method, MethodArg::Auto | MethodArg::Parametric)
        }
        Command::Moments { .. } | Command::Verify => true,
    };
    if uses_mc && cli.samples < 1000 {
        return Err(format!(
            "--samples must be at least 1000 for Monte Carlo estimates, got {}",
            cli.samples
        ));
    }
    if let Command::Enumerate { r } = &cli.command {
        if !(2..=6).contains(r) {
            return Err(format!("--r must lie in [2, 6], got {r}"));
        }
    }
    Ok(())
}

fn configure_threads(threads: Option<usize>) {
    let n = threads.or_else(|| {
        std::env::var("SILT_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = n.filter(|&n| n > 0) {
        // The global pool can only be installed once per process; a
        // second attempt is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn load_constants_opt(cli: &Cli) -> Result<Option<ConstantSet>, Failure> {
    match &cli.constants {
        None => Ok(None),
        Some(path) => match load_constants(path) {
            Ok(set) => {
                for w in &set.warnings {
                    eprintln!("silt: warning: {w}");
                }
                Ok(Some(set))
            }
            Err(e) => Err(fail(1, format!("constants file {}: {e}", path.display()))),
        },
    }
}

fn meta_block(cli: &Cli) -> Value {
    json!({
        "seed": cli.seed,
        "samples": cli.samples,
        "tol": cli.tol,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn json_document(cli: &Cli, results: Value, provenance: Value) -> String {
    let doc = json!({
        "meta": meta_block(cli),
        "results": results,
        "provenance": provenance,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
    s.push('\n');
    s
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// `value [+- sigma]` for humans; exact values print all digits.
fn fmt_measure(value: f64, sigma: Option<f64>) -> String {
    match sigma {
        None => format!("{value}"),
        Some(s) => format!("{value:.10} +- {s:.2e}"),
    }
}

fn uncertainty_of(v: &IntegralValue) -> Option<f64> {
    if v.estimate.method == Method::Exact || v.estimate.error == 0.0 {
        None
    } else {
        Some(v.estimate.error)
    }
}

// ---------------------------------------------------------------- enumerate

/// Frozen table rows (g, cof, M) for the labeled classes.
fn table_row(id: ClassId) -> (u64, i64, u64) {
    match id {
        ClassId::F1 => (1, 2, 4),
        ClassId::F2 => (1, 3, 1),
        ClassId::F3 => (2, 4, 8),
        ClassId::F4 => (12, 4, 4),
        ClassId::F5 => (6, 8, 16),
        ClassId::F6 => (12, 6, 2),
        ClassId::F7 => (3, 4, 1),
        ClassId::F8 => (6, 5, 1),
    }
}

fn cmd_enumerate(cli: &Cli, r: usize) -> Result<(String, i32), Failure> {
    let matrices = enumerate_matrices(r).map_err(|e| fail(1, e.to_string()))?;
    let classes = classify(&matrices);
    let out = match cli.format {
        Format::Text => {
            let mut s = format!(
                "order {r}: {} matrices in {} classes\n\n",
                matrices.len(),
                classes.len()
            );
            let _ = writeln!(
                s,
                "{:<6} {:>4} {:>5} {:>4} {:>12}",
                "class", "g", "cof", "M", "coefficient"
            );
            for c in &classes {
                let name = c.id.map_or("-", |id| id.name());
                let coef = c
                    .coefficient
                    .map_or_else(|| "-".to_string(), |q| q.to_string());
                let _ = writeln!(
                    s,
                    "{:<6} {:>4} {:>5} {:>4} {:>12}",
                    name, c.weight, c.cofactor, c.multiplicity, coef
                );
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("class,g,cof,M,coefficient\n");
            for c in &classes {
                let name = c.id.map_or("-", |id| id.name());
                let coef = c
                    .coefficient
                    .map_or_else(|| "-".to_string(), |q| q.to_string());
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    name, c.weight, c.cofactor, c.multiplicity, coef
                );
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = classes
                .iter()
                .map(|c| {
                    let rep = &c.representative;
                    let entries: Vec<Vec<u8>> = (0..rep.order())
                        .map(|i| (0..rep.order()).map(|j| rep.get(i, j)).collect())
                        .collect();
                    json!({
                        "class": c.id.map(|id| id.name()),
                        "g": c.weight,
                        "cof": c.cofactor,
                        "M": c.multiplicity,
                        "coefficient": c.coefficient.map(|q| q.to_string()),
                        "symmetry_count": c.symmetry_count,
                        "representative": entries,
                    })
                })
                .collect();
            json_document(
                cli,
                json!({
                    "order": r,
                    "matrix_count": matrices.len(),
                    "classes": rows,
                }),
                json!({ "classes": "exact-enumeration" }),
            )
        }
    };
    Ok((out, 0))
}

// ---------------------------------------------------------------- integrals

fn cmd_integrals(cli: &Cli, class: &str, method: MethodArg) -> Result<(String, i32), Failure> {
    let Some(id) = ClassId::parse(class) else {
        return Err(fail(
            2,
            format!("unknown class {class:?} (expected f1..f8)"),
        ));
    };
    let constants = load_constants_opt(cli)?;
    let ctx = EvalContext {
        samples: cli.samples,
        seed: cli.seed,
        tol: cli.tol,
        constants: constants.as_ref(),
    };
    let route = match method {
        MethodArg::Auto => Route::Auto,
        MethodArg::Closed => Route::Closed,
        MethodArg::Parametric => Route::Parametric,
        MethodArg::Position => Route::Position,
    };
    let record = evaluate_class(id, route, ctx).map_err(|e| fail(1, e.to_string()))?;
    let plain_name = format!("I_{}", id.name());
    let script_name = format!("script_I_{}", id.name());
    let out = match cli.format {
        Format::Text => {
            let mut s = format!("class {} (order {})\n", id.name(), id.order());
            for (name, v) in [
                (&plain_name, &record.plain),
                (&script_name, &record.scripted),
            ] {
                let _ = writeln!(
                    s,
                    "{:<12} = {:<28} [{}]{}",
                    name,
                    fmt_measure(v.estimate.value, uncertainty_of(v)),
                    v.provenance,
                    v.expr
                        .as_deref()
                        .map_or(String::new(), |e| format!("  {e}")),
                );
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("name,value,uncertainty,provenance\n");
            for (name, v) in [
                (&plain_name, &record.plain),
                (&script_name, &record.scripted),
            ] {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    name,
                    v.estimate.value,
                    uncertainty_of(v).map_or(String::new(), |u| u.to_string()),
                    v.provenance
                );
            }
            s
        }
        Format::Json => {
            let entry = |v: &IntegralValue| {
                json!({
                    "value": v.estimate.value,
                    "uncertainty": uncertainty_of(v),
                    "expr": v.expr,
                })
            };
            let mut results = Map::new();
            results.insert(plain_name.clone(), entry(&record.plain));
            results.insert(script_name.clone(), entry(&record.scripted));
            let mut provenance = Map::new();
            provenance.insert(
                plain_name.clone(),
                json!(record.plain.provenance.to_string()),
            );
            provenance.insert(
                script_name.clone(),
                json!(record.scripted.provenance.to_string()),
            );
            json_document(cli, Value::Object(results), Value::Object(provenance))
        }
    };
    Ok((out, 0))
}

// ---------------------------------------------------------------- moments

fn m4_mixed_provenance(report: &MomentReport) -> Option<&'static str> {
    let tags: Vec<ReportProvenance> = report
        .constants_used
        .iter()
        .filter(|c| matches!(c.name, "gamma_V5" | "gamma_V7" | "gamma_V8" | "T_D"))
        .map(|c| c.provenance)
        .collect();
    if report.m4.is_none() || tags.len() < 4 {
        return None;
    }
    if tags.contains(&ReportProvenance::InternalMc) {
        Some("internal-mc")
    } else if tags.contains(&ReportProvenance::InternalCubature) {
        Some("internal-cubature")
    } else {
        Some("external-constant")
    }
}

fn cmd_moments(cli: &Cli, skip_fourth: bool) -> Result<(String, i32), Failure> {
    let constants = load_constants_opt(cli)?;
    let options = ReportOptions {
        samples: cli.samples,
        seed: cli.seed,
        tol: cli.tol,
        constants,
        skip_fourth,
    };
    let report = build_report(&options);
    // A requested fourth moment that could not be assembled is a
    // computation failure, but the rest of the report still prints.
    let code = if !skip_fourth && report.m4.is_none() {
        1
    } else {
        0
    };
    let out = match cli.format {
        Format::Text => render_moments_text(&report),
        Format::Csv => render_moments_csv(&report),
        Format::Json => render_moments_json(cli, &report),
    };
    Ok((out, code))
}

fn render_moments_text(r: &MomentReport) -> String {
    let mut s = String::from("intersection local time moments\n");
    let _ = writeln!(s, "  m2            = {}", fmt_measure(r.m2, None));
    let _ = writeln!(s, "  m3            = {}", fmt_measure(r.m3, None));
    match r.m4 {
        Some(u) => {
            let _ = writeln!(
                s,
                "  m4            = {}",
                fmt_measure(u.value, Some(u.sigma))
            );
        }
        None => {
            let _ = writeln!(s, "  m4            = unavailable");
        }
    }
    let _ = writeln!(s, "  gamma1        = {}", fmt_measure(r.gamma1, None));
    match r.gamma2 {
        Some(u) => {
            let _ = writeln!(
                s,
                "  gamma2        = {}",
                fmt_measure(u.value, Some(u.sigma))
            );
        }
        None => {
            let _ = writeln!(s, "  gamma2        = unavailable");
        }
    }
    s.push_str("closed-walk limit moments\n");
    let _ = writeln!(s, "  m2_closed     = {}", fmt_measure(r.m2_closed, None));
    let _ = writeln!(s, "  m3_closed     = {}", fmt_measure(r.m3_closed, None));
    let _ = writeln!(
        s,
        "  gamma1_closed = {}",
        fmt_measure(r.gamma1_closed, None)
    );
    s.push_str("constants used\n");
    for c in &r.constants_used {
        let _ = writeln!(
            s,
            "  {:<9} = {:<24} [{}]",
            c.name,
            fmt_measure(c.value, c.sigma.filter(|&x| x > 0.0)),
            c.provenance
        );
    }
    if !r.m4_contributions.is_empty() {
        s.push_str("m4 error budget\n");
        for (name, contribution) in &r.m4_contributions {
            let _ = writeln!(s, "  {name:<9} contributes {contribution:.2e}");
        }
    }
    s.push_str("notes\n");
    for n in &r.notes {
        let _ = writeln!(s, "  {n}");
    }
    if !r.diagnostics.is_empty() {
        s.push_str("diagnostics\n");
        for d in &r.diagnostics {
            let _ = writeln!(s, "  {d}");
        }
    }
    s
}

fn render_moments_csv(r: &MomentReport) -> String {
    let mut s = String::from("name,value,uncertainty,provenance\n");
    let closed = ReportProvenance::ClosedForm.as_str();
    let mixed = m4_mixed_provenance(r).unwrap_or("unavailable");
    let _ = writeln!(s, "m2,{},,{closed}", r.m2);
    let _ = writeln!(s, "m3,{},,{closed}", r.m3);
    if let Some(u) = r.m4 {
        let _ = writeln!(s, "m4,{},{},{mixed}", u.value, u.sigma);
    }
    let _ = writeln!(s, "m2_closed,{},,{closed}", r.m2_closed);
    let _ = writeln!(s, "m3_closed,{},,{closed}", r.m3_closed);
    let _ = writeln!(s, "gamma1,{},,{closed}", r.gamma1);
    if let Some(u) = r.gamma2 {
        let _ = writeln!(s, "gamma2,{},{},{mixed}", u.value, u.sigma);
    }
    let _ = writeln!(s, "gamma1_closed,{},,{closed}", r.gamma1_closed);
    for c in &r.constants_used {
        let _ = writeln!(
            s,
            "const:{},{},{},{}",
            c.name,
            c.value,
            c.sigma
                .filter(|&x| x > 0.0)
                .map_or(String::new(), |x| x.to_string()),
            c.provenance
        );
    }
    s
}

fn render_moments_json(cli: &Cli, r: &MomentReport) -> String {
    let exact = |v: f64| json!({ "value": v, "uncertainty": Value::Null });
    let measured = |u: crate::moments::Uncertain| {
        json!({
            "value": u.value,
            "uncertainty": if u.sigma > 0.0 { json!(u.sigma) } else { Value::Null },
        })
    };
    let mut results = Map::new();
    results.insert("m2".into(), exact(r.m2));
    results.insert("m3".into(), exact(r.m3));
    results.insert("m4".into(), r.m4.map_or(Value::Null, measured));
    results.insert("m2_closed".into(), exact(r.m2_closed));
    results.insert("m3_closed".into(), exact(r.m3_closed));
    results.insert("gamma1".into(), exact(r.gamma1));
    results.insert("gamma2".into(), r.gamma2.map_or(Value::Null, measured));
    results.insert("gamma1_closed".into(), exact(r.gamma1_closed));
    let mut budget = Map::new();
    for (name, sigma) in &r.error_budget {
        budget.insert((*name).into(), json!(sigma));
    }
    results.insert("error_budget".into(), Value::Object(budget));
    let mut contributions = Map::new();
    for (name, c) in &r.m4_contributions {
        contributions.insert((*name).into(), json!(c));
    }
    results.insert(
        "m4_error_contributions".into(),
        Value::Object(contributions),
    );
    results.insert("notes".into(), json!(r.notes));
    results.insert("diagnostics".into(), json!(r.diagnostics));

    let mut provenance = Map::new();
    let closed = ReportProvenance::ClosedForm.as_str();
    for name in ["m2", "m3"] {
        provenance.insert(name.into(), json!(closed));
    }
    provenance.insert("m4".into(), json!(m4_mixed_provenance(r)));
    for name in ["m2_closed", "m3_closed", "gamma1"] {
        provenance.insert(name.into(), json!(closed));
    }
    provenance.insert("gamma2".into(), json!(m4_mixed_provenance(r)));
    provenance.insert("gamma1_closed".into(), json!(closed));
    let mut consts = Map::new();
    for c in &r.constants_used {
        consts.insert(
            c.name.into(),
            json!({
                "value": c.value,
                "uncertainty": c.sigma.filter(|&x| x > 0.0),
                "source": c.provenance.as_str(),
            }),
        );
    }
    provenance.insert("constants".into(), Value::Object(consts));
    json_document(cli, Value::Object(results), Value::Object(provenance))
}

// ---------------------------------------------------------------- verify

struct Check {
    name: &'static str,
    outcome: Result<String, String>,
}

fn cmd_verify(cli: &Cli) -> Result<(String, i32), Failure> {
    let samples = cli.samples;
    let seed = cli.seed;
    let checks = vec![
        Check {
            name: "class-table",
            outcome: check_class_table(),
        },
        Check {
            name: "arborescence-oracle",
            outcome: check_arborescence(),
        },
        Check {
            name: "zeta-f-value",
            outcome: check_zeta_value(),
        },
        Check {
            name: "zeta-f-routes",
            outcome: check_zeta_routes(),
        },
        Check {
            name: "radial-kernel-moment",
            outcome: check_radial_moment(),
        },
        Check {
            name: "kernel-convolution",
            outcome: check_convolution(),
        },
        Check {
            name: "gamma-normalization",
            outcome: check_gamma_one(),
        },
        Check {
            name: "gamma-tree-count",
            outcome: check_gamma_two(samples, seed),
        },
        Check {
            name: "recurrence-ladder",
            outcome: check_recurrences(),
        },
        Check {
            name: "seed-integrals",
            outcome: check_seed_integrals(samples, seed),
        },
        Check {
            name: "closed-moments",
            outcome: check_closed_moments(),
        },
        Check {
            name: "deletion-graph-routes",
            outcome: check_deletion_routes(samples, seed),
        },
        Check {
            name: "determinism",
            outcome: check_determinism(samples, seed),
        },
    ];
    let failed = checks.iter().filter(|c| c.outcome.is_err()).count();
    let passed = checks.len() - failed;
    let out = match cli.format {
        Format::Text => {
            let mut s = String::new();
            for c in &checks {
                match &c.outcome {
                    Ok(d) => {
                        let _ = writeln!(s, "PASS {} ({d})", c.name);
                    }
                    Err(d) => {
                        let _ = writeln!(s, "FAIL {} ({d})", c.name);
                    }
                }
            }
            let _ = writeln!(s, "verification: {passed} passed, {failed} failed");
            s
        }
        Format::Csv => {
            let mut s = String::from("name,status,detail\n");
            for c in &checks {
                let (status, d) = match &c.outcome {
                    Ok(d) => ("pass", d),
                    Err(d) => ("fail", d),
                };
                let _ = writeln!(s, "{},{},{}", c.name, status, csv_escape(d));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = checks
                .iter()
                .map(|c| {
                    let (status, d) = match &c.outcome {
                        Ok(d) => ("pass", d),
                        Err(d) => ("fail", d),
                    };
                    json!({ "name": c.name, "status": status, "detail": d })
                })
                .collect();
            json_document(
                cli,
                json!({ "checks": rows, "passed": passed, "failed": failed }),
                json!({ "checks": "self-verification" }),
            )
        }
    };
    Ok((out, if failed > 0 { 3 } else { 0 }))
}

fn check_class_table() -> Result<String, String> {
    let mut rows = 0;
    for (r, want_matrices, want_classes) in [(2usize, 1usize, 1usize), (3, 3, 2), (4, 39, 5)] {
        let matrices = enumerate_matrices(r).map_err(|e| e.to_string())?;
        if matrices.len() != want_matrices {
            return Err(format!(
                "order {r}: {} matrices, expected {want_matrices}",
                matrices.len()
            ));
        }
        let classes = classify(&matrices);
        if classes.len() != want_classes {
            return Err(format!(
                "order {r}: {} classes, expected {want_classes}",
                classes.len()
            ));
        }
        for c in &classes {
            let id =
                c.id.ok_or_else(|| format!("order {r}: unlabeled class of size {}", c.weight))?;
            let (g, cof, m) = table_row(id);
            if c.weight != g || c.cofactor != cof || c.multiplicity != m {
                return Err(format!(
                    "{}: (g, cof, M) = ({}, {}, {}), expected ({g}, {cof}, {m})",
                    id.name(),
                    c.weight,
                    c.cofactor,
                    c.multiplicity
                ));
            }
            rows += 1;
        }
    }
    Ok(format!("{rows} classes match the frozen table"))
}

fn check_arborescence() -> Result<String, String> {
    let mut checked = 0;
    for r in 2..=4 {
        for f in enumerate_matrices(r).map_err(|e| e.to_string())? {
            let cof = f.cofactor() as u64;
            for root in 0..r {
                let count = arborescence_count(&f, root);
                if count != cof {
                    return Err(format!(
                        "order {r} matrix {f}: cofactor {cof} but {count} arborescences at root {root}"
                    ));
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} matrices, every root"))
}

fn check_zeta_value() -> Result<String, String> {
    let z = zeta_f();
    let published = 0.781302412896486;
    if (z - published).abs() > 1e-14 {
        return Err(format!("zeta_f = {z}, published {published}"));
    }
    Ok(format!("zeta_f = {z:.15}"))
}

fn check_zeta_routes() -> Result<String, String> {
    let z = zeta_f();
    let (_, lower, upper) = zeta_f_series(4000);
    if !(lower <= z && z <= upper) {
        return Err(format!(
            "trigamma value {z} outside series bracket [{lower}, {upper}]"
        ));
    }
    let mid = 0.5 * (lower + upper);
    if (mid - z).abs() > 1e-12 {
        return Err(format!("series route {mid} vs trigamma route {z}"));
    }
    Ok(format!("routes agree to {:.1e}", (mid - z).abs()))
}

fn check_radial_moment() -> Result<String, String> {
    let m3 = bessel_moment(3, 1e-10).map_err(|e| e.to_string())?;
    let lhs = 2.0 * std::f64::consts::PI * m3.value;
    let rhs = 1.5 * std::f64::consts::PI * zeta_f();
    let rel = ((lhs - rhs) / rhs).abs();
    if rel > 1e-9 {
        return Err(format!(
            "2 pi int x K0^3 = {lhs}, target {rhs}, rel {rel:.1e}"
        ));
    }
    Ok(format!("relative error {rel:.1e}"))
}

fn check_convolution() -> Result<String, String> {
    let mut worst = 0.0f64;
    for x in [0.5, 1.0, 2.0] {
        let (est, reference) = k0_convolution_check(x, 1e-8).map_err(|e| e.to_string())?;
        let residual = (est.value - reference).abs();
        if residual > 1e-6 {
            return Err(format!("x = {x}: residual {residual:.1e}"));
        }
        worst = worst.max(residual);
    }
    Ok(format!("worst residual {worst:.1e} over three radii"))
}

fn check_gamma_one() -> Result<String, String> {
    for id in ALL_CLASSES {
        let est = gamma_value(
            &GammaQuery {
                graph: graph_from_matrix(&id.reference()),
                n: 1.0,
                method: GammaMethod::SectorMc,
            },
            1000,
            0,
        )
        .map_err(|e| e.to_string())?;
        if est.value != 1.0 || est.error != 0.0 {
            return Err(format!(
                "{}: order-1 value {} +- {}",
                id.name(),
                est.value,
                est.error
            ));
        }
    }
    Ok("order-1 value is exactly 1 for all class graphs".to_string())
}

fn check_gamma_two(samples: u64, seed: u64) -> Result<String, String> {
    let mut worst = 0.0f64;
    for (k, id) in ALL_CLASSES.into_iter().enumerate() {
        let graph = graph_from_matrix(&id.reference());
        let trees = graph.spanning_trees().map_err(|e| e.to_string())?.len() as f64;
        let est = gamma_value(
            &GammaQuery {
                graph,
                n: 2.0,
                method: GammaMethod::SectorMc,
            },
            samples,
            seed.wrapping_add(7000 + k as u64),
        )
        .map_err(|e| e.to_string())?;
        let z = (est.value - trees).abs() / est.error;
        if z > 4.0 {
            return Err(format!(
                "{}: order-2 estimate {} +- {} vs {trees} spanning trees (z = {z:.1})",
                id.name(),
                est.value,
                est.error
            ));
        }
        worst = worst.max(z);
    }
    Ok(format!(
        "all eight class graphs within 4 sigma (worst z = {worst:.1})"
    ))
}

fn check_recurrences() -> Result<String, String> {
    let ladder1 = gamma_f1_recurrence(3);
    let want1 = [7.0 * zeta3(), 1.0, 4.0, 80.0];
    for (n, (got, want)) in ladder1.iter().zip(want1).enumerate() {
        if ((got - want) / want).abs() > 1e-12 {
            return Err(format!("dumbbell ladder at {n}: {got} vs {want}"));
        }
    }
    let ladder2 = gamma_f2_recurrence(2);
    let want2 = [3.0 * zeta3(), 1.0, 12.0];
    for (n, (got, want)) in ladder2.iter().zip(want2).enumerate() {
        if ((got - want) / want).abs() > 1e-12 {
            return Err(format!("triangle ladder at {n}: {got} vs {want}"));
        }
    }
    Ok("both ladders reproduce 7z3, 1, 4, 80 and 3z3, 1, 12".to_string())
}

fn check_seed_integrals(samples: u64, seed: u64) -> Result<String, String> {
    let targets = [(ClassId::F1, 7.0 * zeta3()), (ClassId::F2, 3.0 * zeta3())];
    let mut detail = String::new();
    for (k, (id, want)) in targets.into_iter().enumerate() {
        let est = gamma_value(
            &GammaQuery {
                graph: graph_from_matrix(&id.reference()),
                n: 0.0,
                method: GammaMethod::SectorMc,
            },
            samples,
            seed.wrapping_add(8000 + k as u64),
        )
        .map_err(|e| e.to_string())?;
        let z = (est.value - want).abs() / est.error;
        if z > 4.0 {
            return Err(format!(
                "{}: order-0 estimate {} +- {} vs {want} (z = {z:.1})",
                id.name(),
                est.value,
                est.error
            ));
        }
        let _ = write!(detail, "{} z = {z:.1}; ", id.name());
    }
    Ok(format!("{detail}both within 4 sigma"))
}

fn check_closed_moments() -> Result<String, String> {
    let checks = [
        ("m2", crate::moments::moment2(), 0.043035, 1e-6),
        ("m3", crate::moments::moment3(), 0.010178, 1e-6),
        (
            "m2_closed",
            crate::moments::closed_moments().0,
            0.0649029,
            1e-6,
        ),
        (
            "m3_closed",
            crate::moments::closed_moments().1,
            -0.016961,
            1e-6,
        ),
        (
            "gamma1",
            crate::moments::skewness(crate::moments::moment2(), crate::moments::moment3()),
            1.140051529,
            1e-9,
        ),
        (
            "gamma1_closed",
            crate::moments::skewness(
                crate::moments::closed_moments().0,
                crate::moments::closed_moments().1,
            ),
            -1.0257865,
            1e-7,
        ),
    ];
    for (name, got, want, tol) in checks {
        if (got - want).abs() > tol {
            return Err(format!("{name} = {got}, published {want}"));
        }
    }
    let identity =
        16.0 * std::f64::consts::PI.powi(3) * crate::moments::moment3() + 4.0 + 15.0 * zeta_f()
            - 311.0 * zeta3() / 18.0;
    if identity.abs() > 1e-12 {
        return Err(format!("third-moment identity residual {identity:.1e}"));
    }
    Ok("all six published values and the exact identity".to_string())
}

fn check_deletion_routes(samples: u64, seed: u64) -> Result<String, String> {
    let quad8 = gamma_v8_by_quadrature(1e-10).map_err(|e| e.to_string())?;
    let mc8 = gamma_v(VGraph::V8, samples, seed.wrapping_add(9001)).map_err(|e| e.to_string())?;
    let z8 = (mc8.value - quad8.value).abs() / mc8.error;
    if z8 > 4.0 {
        return Err(format!(
            "V8: quadrature {} vs sector MC {} +- {} (z = {z8:.1})",
            quad8.value, mc8.value, mc8.error
        ));
    }
    let quad7 = gamma_v7_by_quadrature(1e-8).map_err(|e| e.to_string())?;
    let mc7 = gamma_v(VGraph::V7, samples, seed.wrapping_add(9002)).map_err(|e| e.to_string())?;
    let z7 = (mc7.value - quad7.value).abs() / mc7.error;
    if z7 > 4.0 {
        return Err(format!(
            "V7: quadrature {} vs sector MC {} +- {} (z = {z7:.1})",
            quad7.value, mc7.value, mc7.error
        ));
    }
    Ok(format!("V8 z = {z8:.1}, V7 z = {z7:.1}"))
}

fn check_determinism(samples: u64, seed: u64) -> Result<String, String> {
    let n = samples.min(1 << 14);
    let a = gamma_v(VGraph::V8, n, seed).map_err(|e| e.to_string())?;
    let b = gamma_v(VGraph::V8, n, seed).map_err(|e| e.to_string())?;
    if a.value.to_bits() != b.value.to_bits() || a.error.to_bits() != b.error.to_bits() {
        return Err(format!("reruns differ: {} vs {}", a.value, b.value));
    }
    Ok("rerun with the same seed is bit-identical".to_string())
}
