use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde::Serialize;
use serde_json::{json, Value};

use orthorec::asymptotics::{self, fit_rows};
use orthorec::coefficients::{self, ExactBudget};
use orthorec::mellin::{evaluate_batch, read_points_csv, sample_points, write_batch_csv, MellinFunction};
use orthorec::transforms::{self, verify_all, ShiftedSequence};
use orthorec::volterra::{self, LogGrid};
use orthorec::zeros::{self, Rectangle, Wall, WindingConfig};
use orthorec::{
    compute_exact, compute_float, cross_validate, CoefficientTable, Error, EvaluationTolerance, Evaluator64, EvaluatorMp,
    PrecisionConfig, SummationMode,
};

#[derive(Parser, Debug)]
#[command(name = "orthorec", version, about = "Orthorecursive expansion of unity: coefficients, Mellin zeros, resolvent, transfer and fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficient table c_0..c_N with partial sums.
    Coeffs(CoeffsArgs),
    /// Partial sums C_N and the transform A_g(N).
    Sums(CoeffsArgs),
    /// Evaluate digamma, g*, D or D' at points from a file or seeded random points.
    Mellin(MellinArgs),
    /// Zeros of D in a vertical strip by winding numbers and Newton.
    Zeros(ZerosArgs),
    /// Solve the resolvent equation and check its bounds, Mellin transform and decay.
    Resolvent(ResolventArgs),
    /// Recover A from A_g through the resolvent; renormalisation check.
    Transfer(TransferArgs),
    /// Envelope, sign-change and oscillatory fits (consistency probes).
    Fit(FitArgs),
    /// Exact identities and properties with a pass/fail table.
    Verify(VerifyArgs),
    /// Compact summary of every module at modest sizes.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug, Serialize)]
struct Precision {
    /// Use the multiprecision float engine instead of exact rationals.
    #[arg(long, conflicts_with = "exact")]
    float: bool,
    /// Exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    /// Mantissa bits of the float engine (53 runs in native f64).
    #[arg(long, default_value_t = 128)]
    bits: u32,
    #[arg(long, value_enum, default_value = "compensated")]
    summation: Summation,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Summation {
    Plain,
    Compensated,
}

impl From<Summation> for SummationMode {
    fn from(s: Summation) -> Self {
        match s {
            Summation::Plain => SummationMode::Plain,
            Summation::Compensated => SummationMode::Compensated,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct CoeffsArgs {
    /// Largest index N.
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[command(flatten)]
    precision: Precision,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct MellinArgs {
    #[arg(long, default_value = "g-star")]
    function: String,
    /// CSV of `re,im` points.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Seed for random points in [-3,3] x [-50,50] when no input is given.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Working bits; 53 uses f64.
    #[arg(long, default_value_t = 53)]
    bits: u32,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct ZerosArgs {
    /// Real-part range of the strip.
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [1.0, 1.5])]
    strip: Vec<f64>,
    #[arg(long, default_value_t = 100.0)]
    tmax: f64,
    /// Check the sign conditions on a wall instead (0, 1 or 3/2).
    #[arg(long)]
    wall: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    #[arg(long, default_value_t = 1.0 / 1024.0)]
    step: f64,
    #[arg(long, default_value_t = 8.0)]
    umax: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct ResolventArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Decay-fit window in y; default [10, min(2000, e^umax)].
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    window: Option<Vec<f64>>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct TransferArgs {
    /// Coefficient table size.
    #[arg(long, default_value_t = 600)]
    n: usize,
    #[arg(long, default_value_t = 128)]
    bits: u32,
    #[command(flatten)]
    grid: GridArgs,
    /// Points where A is recovered.
    #[arg(long = "at", num_args = 1.., default_values_t = [50.0, 100.0, 500.0])]
    at: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Evaluation point of the renormalisation check; needs umax >= ln x.
    #[arg(long, default_value_t = 1e4)]
    x_eval: f64,
    #[arg(long, default_value_t = 10.0)]
    mode_umax: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum Series {
    /// The coefficients c_n.
    C,
    /// The partial sums C_N.
    Partial,
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 128)]
    bits: u32,
    /// Coefficient table CSV to fit instead of computing one.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "c")]
    series: Series,
    /// Fit window in n.
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [1000usize, 10_000])]
    window: Vec<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Exact coefficient table CSV to verify instead of computing one.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct ReportArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 128)]
    bits: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

/// Outcome of a subcommand: the JSON payload, an optional CSV rendering, and
/// whether every check passed.
struct Outcome {
    json: Value,
    csv: Option<Vec<u8>>,
    ok: bool,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidConfig(msg.into()).into()
}

fn emit(output: &Output, default: Format, config: Value, outcome: &Outcome) -> anyhow::Result<()> {
    let format = output.format.unwrap_or(default);
    let mut w: Box<dyn Write> = match &output.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Json => {
            let doc = json!({ "config": config, "passed": outcome.ok, "result": outcome.json });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let csv = outcome.csv.as_ref().ok_or_else(|| usage("this subcommand has no CSV form; use --format json"))?;
            writeln!(w, "# {}", serde_json::to_string(&config)?)?;
            w.write_all(csv)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn config_of<T: Serialize>(name: &str, args: &T) -> anyhow::Result<Value> {
    let mut v = serde_json::to_value(args)?;
    if let Value::Object(m) = &mut v {
        m.remove("output");
        m.insert("subcommand".into(), Value::String(name.into()));
    }
    Ok(v)
}

fn precision_config(bits: u32, summation: SummationMode) -> anyhow::Result<PrecisionConfig> {
    Ok(PrecisionConfig::new(bits, summation)?)
}

fn run_coeffs(a: &CoeffsArgs, sums: bool) -> anyhow::Result<Outcome> {
    let float = a.precision.float;
    let mut buf = Vec::new();
    let rows: Vec<Value>;
    if float {
        let t = compute_float(a.n, precision_config(a.precision.bits, a.precision.summation.into())?)?;
        rows = table_rows(&t, sums, &mut buf)?;
        let mut m = serde_json::to_value(t.manifest())?;
        m["rows"] = Value::Array(rows);
        return Ok(Outcome { json: m, csv: Some(buf), ok: true });
    }
    let t = compute_exact(a.n)?;
    rows = table_rows(&t, sums, &mut buf)?;
    let mut m = serde_json::to_value(t.manifest())?;
    m["rows"] = Value::Array(rows);
    m["satisfies_recurrence"] = Value::Bool(t.satisfies_recurrence());
    Ok(Outcome { json: m, csv: Some(buf), ok: true })
}

fn table_rows<T: orthorec::Scalar + transforms::Weighted>(t: &CoefficientTable<T>, sums: bool, buf: &mut Vec<u8>) -> anyhow::Result<Vec<Value>> {
    if !sums {
        t.write_csv(&mut *buf)?;
        return Ok((0..=t.n_max())
            .map(|n| json!({ "n": n, "c_n": t.c(n).to_table_string(), "C_n": t.partial_sum(n).to_table_string() }))
            .collect());
    }
    let seq = ShiftedSequence::from_table(t);
    writeln!(buf, "N,C_N,A_g_N")?;
    let mut rows = Vec::new();
    for n in 0..=t.n_max() {
        let ag = if n >= 1 { seq.eval_ag_int(n)?.to_table_string() } else { String::new() };
        let c = t.partial_sum(n).to_table_string();
        writeln!(buf, "{n},{c},{ag}")?;
        rows.push(json!({ "N": n, "C_N": c, "A_g_N": ag }));
    }
    Ok(rows)
}

fn run_mellin(a: &MellinArgs) -> anyhow::Result<Outcome> {
    let f: MellinFunction = a.function.parse()?;
    let tol = EvaluationTolerance::new(a.tol, EvaluationTolerance::default().max_terms)?;
    let points = match &a.input {
        Some(p) => read_points_csv(File::open(p).with_context(|| format!("opening {}", p.display()))?)?,
        None => sample_points(a.seed, a.count, orthorec::mellin::DEFAULT_POLE_RADIUS),
    };
    let rows = if a.bits <= 53 {
        if a.bits < 53 {
            return Err(usage(format!("bits must be at least 53, got {}", a.bits)));
        }
        evaluate_batch(&Evaluator64::f64().with_tolerance(tol), f, &points)?
    } else {
        evaluate_batch(&EvaluatorMp::with_bits(a.bits as usize).with_tolerance(tol), f, &points)?
    };
    let mut buf = Vec::new();
    write_batch_csv(&rows, &mut buf)?;
    Ok(Outcome { json: serde_json::to_value(&rows)?, csv: Some(buf), ok: true })
}

fn run_zeros(a: &ZerosArgs) -> anyhow::Result<Outcome> {
    let tol = EvaluationTolerance::new(a.tol, EvaluationTolerance::default().max_terms)?;
    let ev = Evaluator64::f64().with_tolerance(tol);
    if let Some(w) = &a.wall {
        let wall: Wall = w.parse()?;
        let grid: Vec<f64> = (1..=1000).map(|k| k as f64 * a.tmax / 1000.0).collect();
        let r = zeros::wall_inequality_check(&ev, wall, &grid)?;
        let mut buf = Vec::new();
        writeln!(buf, "y,re,im,ok")?;
        for s in &r.samples {
            writeln!(buf, "{:.17e},{:.17e},{:.17e},{}", s.y, s.re, s.im, s.ok)?;
        }
        let ok = r.violations == 0;
        return Ok(Outcome { json: serde_json::to_value(&r)?, csv: Some(buf), ok });
    }
    let (lo, hi) = (a.strip[0], a.strip[1]);
    Rectangle::new(lo, hi, zeros::DEFAULT_TAU_MIN, a.tmax)?;
    let scan = zeros::scan_strip(&ev, lo, hi, a.tmax, &WindingConfig::default())?;
    let mut buf = Vec::new();
    writeln!(buf, "re,im,residual")?;
    for z in &scan.zeros {
        writeln!(buf, "{:.17e},{:.17e},{:.3e}", z.re, z.im, z.residual_modulus)?;
    }
    let counted: i64 = scan.tiles.iter().map(|t| t.winding).sum();
    let ok = counted == scan.zeros.len() as i64;
    Ok(Outcome { json: serde_json::to_value(&scan)?, csv: Some(buf), ok })
}

fn grid_of(g: &GridArgs) -> anyhow::Result<LogGrid> {
    Ok(LogGrid::new(g.umax, g.step)?)
}

fn run_resolvent(a: &ResolventArgs) -> anyhow::Result<Outcome> {
    let grid = grid_of(&a.grid)?;
    let rg = volterra::solve_resolvent::<f64>(&grid, a.grid.tol)?;
    let mut buf = Vec::new();
    rg.write_csv(&mut buf)?;
    // the grid CSV carries its own JSON header; drop it in favour of the config line
    let body = buf.splitn(2, |b| *b == b'\n').nth(1).unwrap_or_default().to_vec();
    let violations = rg.global_bound_violations();
    let neumann = rg.neumann_cross_check(20, 4.0)?;
    let mut mellin = Vec::new();
    let mut ok = violations.is_empty() && neumann <= 10.0 * a.grid.tol && (rg.r[0] - 0.5).abs() <= 1e-10;
    for k in 0..10 {
        let s = 2.0 + 0.5 * k as f64;
        let c = volterra::resolvent_mellin(Complex::new(s, 0.0), &rg)?;
        ok &= c.deviation <= 1e-6 + c.tail_error;
        mellin.push(c);
    }
    let window = match &a.window {
        Some(w) => (w[0], w[1]),
        None => (volterra::DECAY_WINDOW_MIN, grid.y_max().min(2000.0)),
    };
    let fit = volterra::resolvent_decay_fit(&rg, window);
    let fit = match fit {
        Ok(f) => serde_json::to_value(f)?,
        Err(e @ (Error::Coverage(_) | Error::InvalidConfig(_))) => return Err(e.into()),
        Err(e) => {
            ok = false;
            json!({ "error": e.to_string() })
        }
    };
    Ok(Outcome {
        json: json!({
            "header": rg.header(),
            "r_at_1": rg.r[0],
            "bound_violations": violations.len(),
            "neumann_max_difference": neumann,
            "mellin": mellin,
            "decay_fit": fit,
        }),
        csv: Some(body),
        ok,
    })
}

fn run_transfer(a: &TransferArgs) -> anyhow::Result<Outcome> {
    let table = compute_float(a.n, precision_config(a.bits, SummationMode::Compensated)?)?;
    let seq = ShiftedSequence::from_table(&table);
    let rg = volterra::solve_resolvent::<f64>(&grid_of(&a.grid)?, a.grid.tol)?;
    let samples = transforms::apply_transfer(&seq, &rg, &a.at)?;
    let mode_grid = LogGrid::new(a.mode_umax, a.grid.step)?;
    let rg_mode = volterra::solve_resolvent::<f64>(&mode_grid, a.grid.tol)?;
    let mode = transforms::transfer_mode_check(a.beta, &rg_mode, a.x_eval)?;
    let ok = samples.iter().all(|s| s.relative_error <= 1e-4);
    let mut buf = Vec::new();
    writeln!(buf, "x,recovered,a_exact,relative_error,error_estimate")?;
    for s in &samples {
        writeln!(buf, "{:.17e},{:.17e},{:.17e},{:.3e},{:.3e}", s.x, s.recovered, s.a_exact, s.relative_error, s.error_estimate)?;
    }
    Ok(Outcome { json: json!({ "samples": samples, "mode_check": mode }), csv: Some(buf), ok })
}

fn load_f64_table(path: &PathBuf) -> anyhow::Result<Vec<(f64, f64)>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let t = coefficients::read_csv_f64(BufReader::new(f))?;
    Ok(t.values().iter().copied().zip(t.partial_sums().iter().copied()).collect())
}

fn run_fit(a: &FitArgs) -> anyhow::Result<Outcome> {
    let (lo, hi) = (a.window[0], a.window[1]);
    let need = a.n.max(hi);
    let data = if let Some(p) = &a.input {
        load_f64_table(p)?
    } else {
        let t = compute_float(need, precision_config(a.bits, SummationMode::Compensated)?)?;
        t.values_f64().into_iter().zip(t.partial_sums_f64()).collect()
    };
    let seq: Vec<f64> = match a.series {
        Series::C => data.iter().map(|d| d.0).collect(),
        Series::Partial => data.iter().map(|d| d.1).collect(),
    };
    let envelope = asymptotics::envelope_exponent(&seq, (lo, hi))?;
    let mut out = json!({ "label": asymptotics::PROBE_LABEL, "envelope": envelope });
    let mut csv = None;
    match asymptotics::sign_changes(&seq, (lo.min(10).max(1), seq.len() - 1)) {
        Ok(sc) => {
            let init = sc.clone().with_exponent(-envelope.exponent);
            out["sign_changes"] = serde_json::to_value(&sc)?;
            match asymptotics::oscillatory_fit(&seq, (lo, hi), &init) {
                Ok(fit) => {
                    let mut buf = Vec::new();
                    writeln!(buf, "n,value,fitted,residual")?;
                    for (n, v, f, r) in fit_rows(&seq, &fit) {
                        writeln!(buf, "{n},{v:.17e},{f:.17e},{r:.17e}")?;
                    }
                    csv = Some(buf);
                    out["oscillatory_fit"] = serde_json::to_value(&fit)?;
                }
                Err(e) => out["oscillatory_fit"] = json!({ "error": e.to_string() }),
            }
        }
        Err(e) => out["sign_changes"] = json!({ "error": e.to_string() }),
    }
    if matches!(a.series, Series::C) {
        out["dyadic_n2_c"] = serde_json::to_value(asymptotics::dyadic_scaled_max(&seq, (lo, hi), 2.0)?)?;
    }
    Ok(Outcome { json: out, csv, ok: true })
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    passed: bool,
    detail: String,
}

fn run_verify(a: &VerifyArgs) -> anyhow::Result<Outcome> {
    let table = match &a.input {
        Some(p) => coefficients::read_exact_csv(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?))?,
        None => coefficients::compute_exact_with(a.n + 1, ExactBudget::default())?,
    };
    let n = a.n.min(table.n_max().saturating_sub(1));
    let mut rows = Vec::new();
    let residual_ok = table.satisfies_recurrence();
    rows.push(CheckRow { check: "recurrence residuals".into(), passed: residual_ok, detail: format!("N <= {}", table.n_max()) });
    let oracle = ["1", "-3/2", "5/24", "77/720"];
    let prefix: Vec<String> = (0..4.min(table.n_max() + 1)).map(|k| orthorec::Scalar::to_table_string(table.c(k))).collect();
    let prefix_ok = prefix.iter().zip(oracle).all(|(a, b)| a == b || (b == "1" && a == "1/1"));
    rows.push(CheckRow { check: "prefix c_0..c_3".into(), passed: prefix_ok, detail: prefix.join(", ") });
    let seq = ShiftedSequence::from_table(&table);
    let reports = verify_all(&seq, n)?;
    for name in ["discrete-volterra", "ag-integer", "bootstrap", "ag-continuity"] {
        let mine: Vec<_> = reports.iter().filter(|r| r.identity == name).collect();
        let bad: Vec<usize> = mine.iter().filter(|r| !r.passed(0.0)).map(|r| r.n).collect();
        let detail = if bad.is_empty() {
            format!("{} values of N, all exact", mine.len())
        } else {
            format!("fails at N = {:?}", &bad[..bad.len().min(5)])
        };
        rows.push(CheckRow { check: name.into(), passed: bad.is_empty(), detail });
    }
    if n >= 2 {
        let fl = compute_float(n, PrecisionConfig::default())?;
        let rel = cross_validate(&table, &fl, n);
        let (ok, detail) = match rel {
            Ok(r) => (r <= 2f64.powi(-100), format!("max relative {r:.3e}")),
            Err(e) => (false, e.to_string()),
        };
        rows.push(CheckRow { check: "128-bit float vs exact".into(), passed: ok, detail });
    }
    let ok = rows.iter().all(|r| r.passed);
    let mut buf = Vec::new();
    writeln!(buf, "check,passed,detail")?;
    for r in &rows {
        writeln!(buf, "{},{},\"{}\"", r.check, r.passed, r.detail)?;
    }
    for r in &rows {
        eprintln!("{:<26} {:<4} {}", r.check, if r.passed { "PASS" } else { "FAIL" }, r.detail);
    }
    Ok(Outcome { json: json!({ "checks": rows, "reports": reports }), csv: Some(buf), ok })
}

fn run_report(a: &ReportArgs) -> anyhow::Result<Outcome> {
    let ev = Evaluator64::f64();
    let rho1 = zeros::locate_rho1(&ev, &WindingConfig::default())?;
    let rg = volterra::solve_resolvent::<f64>(&LogGrid::default(), volterra::DEFAULT_TOL)?;
    let decay = volterra::resolvent_decay_fit(&rg, (10.0, 2000.0))?;
    let exact = compute_exact(301)?;
    let reports = verify_all(&ShiftedSequence::from_table(&exact), 300)?;
    let identities_ok = reports.iter().all(|r| r.passed(0.0));
    let points = sample_points(a.seed, 200, orthorec::mellin::DEFAULT_POLE_RADIUS);
    let worst = points
        .iter()
        .map(|&p| -> anyhow::Result<f64> {
            let z = ev.point(p);
            let g = ev.g_star(&z)?;
            let d = ev.d_infty_series(&z)?;
            Ok((g - z * d * 2.0).norm())
        })
        .collect::<anyhow::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let t = compute_float(a.n, precision_config(a.bits, SummationMode::Compensated)?)?;
    let hi = a.n.min(10_000);
    let envelope = asymptotics::envelope_exponent(&t.partial_sums_f64(), (100.min(hi / 2), hi)).ok();
    let ok = identities_ok && worst <= 1e-10 && (rho1.location() - Complex::new(1.34652, 1.05516)).norm() < 1e-4;
    Ok(Outcome {
        json: json!({
            "rho1": rho1,
            "g_star_vs_2zD_max": worst,
            "identities_exact_to_300": identities_ok,
            "resolvent": { "residual_sup": rg.residual_sup, "r_at_1": rg.r[0], "decay_fit": decay },
            "partial_sum_envelope": envelope,
            "label": asymptotics::PROBE_LABEL,
        }),
        csv: None,
        ok,
    })
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let (name, out, default, outcome, config) = match &cli.command {
        Command::Coeffs(a) => ("coeffs", &a.output, Format::Csv, run_coeffs(a, false)?, config_of("coeffs", a)?),
        Command::Sums(a) => ("sums", &a.output, Format::Csv, run_coeffs(a, true)?, config_of("sums", a)?),
        Command::Mellin(a) => ("mellin", &a.output, Format::Csv, run_mellin(a)?, config_of("mellin", a)?),
        Command::Zeros(a) => {
            if a.strip.len() != 2 {
                return Err(usage("--strip takes two values"));
            }
            ("zeros", &a.output, Format::Json, run_zeros(a)?, config_of("zeros", a)?)
        }
        Command::Resolvent(a) => ("resolvent", &a.output, Format::Json, run_resolvent(a)?, config_of("resolvent", a)?),
        Command::Transfer(a) => ("transfer", &a.output, Format::Json, run_transfer(a)?, config_of("transfer", a)?),
        Command::Fit(a) => {
            if a.window[0] == 0 || a.window[0] >= a.window[1] {
                return Err(usage("--window needs 1 <= A < B"));
            }
            ("fit", &a.output, Format::Json, run_fit(a)?, config_of("fit", a)?)
        }
        Command::Verify(a) => ("verify", &a.output, Format::Json, run_verify(a)?, config_of("verify", a)?),
        Command::Report(a) => ("report", &a.output, Format::Json, run_report(a)?, config_of("report", a)?),
    };
    let _ = name;
    emit(out, default, config, &outcome)?;
    Ok(outcome.ok)
}

fn is_usage(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::InvalidConfig(_) | Error::Domain(_) | Error::Parse(_) | Error::Coverage(_) | Error::ResourceLimit(_))
    ) || e.downcast_ref::<io::Error>().is_some()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
