use std::fmt;
use std::path::Path;

use ncpsh::calculus::{
    eval_form, fd_derivative, pluriharmonic_conjugate, psh_sample_test, symbolic, DerivOp, FdConfig, SampleOutcome,
    SamplerConfig,
};
use ncpsh::eval::{eval_expr, eval_series};
use ncpsh::lab;
use ncpsh::linalg::json::to_rows;
use ncpsh::middle::{confirm_witness, psh_certificate};
use ncpsh::realization::{build_realization, Realization, RealizationOptions};
use ncpsh::transform::{self, ContinuationOptions, PathSpec};
use ncpsh::{expand, parse, random, Error, Expr, Letter, MatrixTuple, NCSeries, Word};
use serde_json::{json, Value};

use crate::config::Config;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input.
    Usage(String),
    Compute(Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::InvalidWord(_)
            | Error::Json(_)
            | Error::DimensionMismatch(_)
            | Error::TruncationTooDeep { .. }
            | Error::PreconditionViolated(_)
            | Error::Unsupported(_) => CliError::Usage(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}

type Outcome = Result<Report, CliError>;

pub struct Report {
    pub command: &'static str,
    pub ok: bool,
    pub result: Value,
    pub summary: Vec<String>,
}

impl Report {
    fn new(command: &'static str, ok: bool, result: Value, summary: Vec<String>) -> Self {
        Report { command, ok, result, summary }
    }

    pub fn to_json(&self, cfg: &Config) -> String {
        let v = json!({
            "command": self.command,
            "status": if self.ok { "ok" } else { "failed" },
            "config": cfg,
            "result": self.result,
        });
        serde_json::to_string_pretty(&v).expect("reports serialize")
    }

    pub fn to_text(&self, cfg: &Config) -> String {
        let mut out = format!("{}: {}\n", self.command, if self.ok { "ok" } else { "FAILED" });
        for line in &self.summary {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("config:\n");
        if let Value::Object(map) = serde_json::to_value(cfg).expect("config serializes") {
            for (k, v) in map {
                out.push_str(&format!("  {k} = {v}\n"));
            }
        }
        out.trim_end().to_string()
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: ncpsh::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_expr(path: &Path) -> Result<Expr, CliError> {
    let text = read(path)?;
    in_file(path, parse(text.trim()))
}

fn load_tuple(path: &Path) -> Result<MatrixTuple, CliError> {
    let text = read(path)?;
    in_file(path, MatrixTuple::from_json_str(&text))
}

fn load_series(path: &Path) -> Result<NCSeries, CliError> {
    let text = read(path)?;
    in_file(path, NCSeries::from_json_str(&text))
}

fn load_realization(path: &Path) -> Result<Realization, CliError> {
    let text = read(path)?;
    in_file(path, Realization::from_json_str(&text))
}

fn parse_complex(text: &str) -> Result<ncpsh::Complex64, CliError> {
    parse(text)
        .ok()
        .and_then(|e| e.const_value())
        .ok_or_else(|| CliError::Usage(format!("`{text}` is not a complex number")))
}

fn matrix_json(m: &ncpsh::CMat) -> Value {
    json!({ "rows": m.nrows(), "cols": m.ncols(), "matrix": to_rows(m) })
}

fn fmt_matrix(m: &ncpsh::CMat) -> Vec<String> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| format!("{:>12.6}{:+.6}i", m[(i, j)].re, m[(i, j)].im))
                .collect::<Vec<_>>()
                .join("  ")
        })
        .collect()
}

pub fn eval(_cfg: &Config, expr: &Path, point: &Path) -> Outcome {
    let e = load_expr(expr)?;
    let x = load_tuple(point)?;
    let v = eval_expr(&e, &x)?;
    let mut summary = vec![format!("f = {e}")];
    summary.extend(fmt_matrix(&v));
    Ok(Report::new("eval", true, matrix_json(&v), summary))
}

pub fn expand_expr(expr: &Path, d: usize, maxdeg: usize, out: Option<&Path>) -> Outcome {
    let e = load_expr(expr)?;
    let s = expand(&e, d, maxdeg)?;
    if let Some(p) = out {
        write(p, &s.to_json_string())?;
    }
    let summary = vec![format!("{} terms through degree {maxdeg}", s.len())];
    let result = json!({ "terms": s.len(), "series": s.to_json() });
    Ok(Report::new("expand", true, result, summary))
}

pub fn diff(cfg: &Config, expr: &Path, op: &str, fd: bool, point: &Path, dir: &Path) -> Outcome {
    let op: DerivOp = op.parse()?;
    let e = load_expr(expr)?;
    let z = load_tuple(point)?;
    let h = load_tuple(dir)?;
    let (method, v) = if fd {
        let fcfg = FdConfig { step: cfg.fd_step, richardson: cfg.richardson };
        ("finite-difference", fd_derivative(&|x| eval_expr(&e, x), &z, &h, op, fcfg)?)
    } else {
        let s = expand(&e, z.d(), cfg.expand_maxdeg)?;
        ("symbolic", eval_form(&symbolic(&s, op), &z, &h)?)
    };
    let mut result = matrix_json(&v);
    result["op"] = json!(op.name());
    result["method"] = json!(method);
    let mut summary = vec![format!("{} of {e} ({method})", op.name())];
    summary.extend(fmt_matrix(&v));
    Ok(Report::new("diff", true, result, summary))
}

pub fn certify(cfg: &Config, series: &Path, n: usize, sample: bool) -> Outcome {
    let s = load_series(series)?;
    let rep = psh_certificate(&s, n, cfg.psd_tol)?;
    let mut summary = vec![
        rep.status.clone(),
        format!("C+ min eigenvalue {:.6e}", rep.cplus.min_eig),
        format!("C- min eigenvalue {:.6e}", rep.cminus.min_eig),
    ];
    let mut result = serde_json::to_value(&rep).expect("report serializes");
    if let Some(w) = &rep.witness {
        let poly: Vec<Value> = w
            .polynomial()
            .into_iter()
            .map(|(word, v)| json!({ "word": word, "coeff": ncpsh::linalg::json::vector(&v) }))
            .collect();
        result["witness_polynomial"] = Value::Array(poly);
        let words: Vec<String> = w.polynomial().into_iter().map(|(word, _)| word).collect();
        summary.push(format!("witness words: {}", words.join(", ")));
        match confirm_witness(&s, n, w) {
            Ok(check) => {
                summary.push(format!(
                    "Hessian along the witness: {:.6e} (confirmed {})",
                    check.quadratic, check.confirmed
                ));
                result["witness_check"] = serde_json::to_value(&check).expect("check serializes");
            }
            Err(e) => {
                summary.push(format!("witness check unavailable: {e}"));
                result["witness_check"] = json!({ "error": e.to_string() });
            }
        }
    }
    if sample {
        let scfg = SamplerConfig {
            samples: cfg.sampler_samples,
            radius: cfg.sampler_radius,
            seed: cfg.seed,
            tol: cfg.psd_tol,
            workers: cfg.workers,
            ..SamplerConfig::default()
        };
        let outcome = psh_sample_test(&s, &[], &scfg)?;
        result["sampler"] = match outcome {
            SampleOutcome::NoWitness { evaluated } => {
                summary.push(format!("sampler: no negative direction in {evaluated} samples"));
                json!({ "witness": false, "evaluated": evaluated })
            }
            SampleOutcome::Witness { z, h, min_eig, .. } => {
                summary.push(format!("sampler: Hessian eigenvalue {min_eig:.6e} at n = {}", z.n()));
                json!({ "witness": true, "min_eig": min_eig, "point": z.to_json(), "direction": h.to_json() })
            }
        };
    }
    Ok(Report::new("certify-psh", rep.certified(), result, summary))
}

pub fn realize(cfg: &Config, series: &Path, n: usize, out: &Path) -> Outcome {
    let s = load_series(series)?;
    let opts = RealizationOptions { null_cutoff: cfg.null_cutoff, basis_seed: cfg.basis_seed, ..Default::default() };
    let r = build_realization(&s, n, &opts)?;
    write(out, &r.to_json_string())?;
    let dg = &r.diagnostics;
    let summary = vec![
        format!("written to {}", out.display()),
        format!("rank C+ {}, rank C- {}", dg.rank_plus, dg.rank_minus),
        format!("T growth {:.6}, dropped entries {}", dg.growth, dg.dropped_entries),
    ];
    let result = json!({ "out": out.display().to_string(), "N": n, "diagnostics": dg });
    Ok(Report::new("realize", true, result, summary))
}

fn mixed_words(d: usize, max_len: usize) -> Vec<Word> {
    let mut level = vec![Word::empty()];
    let mut all = level.clone();
    for _ in 0..max_len {
        level = level
            .iter()
            .flat_map(|w| {
                (0..2 * d).map(move |i| {
                    let mut next = w.clone();
                    next.push(Letter::new((i / 2) as u16, i % 2 == 1));
                    next
                })
            })
            .collect();
        all.extend(level.iter().cloned());
    }
    all
}

/// Runs `job(i)` for `i < count` on `workers` threads; results keep index order.
fn parallel<T: Send>(count: usize, workers: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = workers.clamp(1, count.max(1));
    if workers == 1 {
        return (0..count).map(job).collect();
    }
    let chunk = count.div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let job = &job;
                scope.spawn(move || (w * chunk..((w + 1) * chunk).min(count)).map(job).collect::<Vec<T>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

pub fn verify_realization(cfg: &Config, realization: &Path, series: &Path, samples: usize) -> Outcome {
    let r = load_realization(realization)?;
    let s = load_series(series)?;
    if s.nvars() != r.d || s.k() != r.k {
        return Err(CliError::Usage("series and realization have different shapes".into()));
    }
    let local = s.translate(&r.center)?;
    let mut worst_coeff: f64 = 0.0;
    let mut bad_words = Vec::new();
    let words = mixed_words(r.d, r.n);
    for w in &words {
        let want = local.coeff(w);
        let err = (r.reconstruct_coefficient(w)? - &want).norm();
        worst_coeff = worst_coeff.max(err);
        if err > cfg.verify_tol * (1.0 + want.norm()) {
            bad_words.push(w.to_string());
        }
    }
    let values = parallel(samples, cfg.workers, |i| -> ncpsh::Result<Option<f64>> {
        let mut rng = random::rng(cfg.seed, i as u64);
        let n = 1 + i % 3;
        let x =
            MatrixTuple::scalar_point(n, &r.center).add(&random::tuple_in_ball(&mut rng, n, r.d, cfg.verify_radius))?;
        match r.eval(&x) {
            Ok(v) => {
                let want = eval_series(&local, &r.displacement(&x)?)?;
                Ok(Some((v - &want).norm() / want.norm().max(1.0)))
            }
            Err(Error::TNotContractive { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    });
    let mut worst_value: f64 = 0.0;
    let mut skipped = 0;
    for v in values {
        match v? {
            Some(e) => worst_value = worst_value.max(e),
            None => skipped += 1,
        }
    }
    let ok = bad_words.is_empty() && worst_value <= cfg.verify_tol;
    let summary = vec![
        format!("{} words up to length {}: worst coefficient error {worst_coeff:.3e}", words.len(), r.n),
        format!("{} points ({skipped} outside the domain): worst relative value error {worst_value:.3e}", samples),
    ];
    let result = json!({
        "N": r.n,
        "words": words.len(),
        "max_coefficient_error": worst_coeff,
        "failing_words": bad_words,
        "samples": samples,
        "skipped": skipped,
        "max_value_error": worst_value,
    });
    Ok(Report::new("verify-realization", ok, result, summary))
}

pub fn continue_path(cfg: &Config, realization: &Path, path: &Path, out: Option<&Path>) -> Outcome {
    let r = load_realization(realization)?;
    let spec: PathSpec = in_file(path, serde_json::from_str(&read(path)?).map_err(Error::from))?;
    let opts = ContinuationOptions { order: cfg.continuation_order, tol: cfg.continuation_tol };
    let (report, last) = transform::continue_path(&r, &spec, &opts, cfg.overlap_samples, cfg.seed)?;
    if let Some(p) = out {
        write(p, &last.to_json_string())?;
    }
    let ok = report.completed && report.max_overlap_deviation <= cfg.overlap_tol;
    let mut summary: Vec<String> = report
        .steps
        .iter()
        .map(|s| {
            let dev = s.overlap_deviation.map_or("n/a".to_string(), |d| format!("{d:.3e}"));
            format!(
                "step {}: valid {} (min 1-|T| {:.4}), overlap deviation {dev} over {} points",
                s.index, s.segment.valid, s.segment.min_indicator, s.overlap_samples
            )
        })
        .collect();
    summary.push(format!("completed {}, max overlap deviation {:.3e}", report.completed, report.max_overlap_deviation));
    Ok(Report::new("continue", ok, serde_json::to_value(&report).expect("report serializes"), summary))
}

pub fn log_radius(_cfg: &Config, n: usize, csv: Option<&Path>) -> Outcome {
    let rep = lab::log_radius_experiment(n)?;
    if let Some(p) = csv {
        write(p, &rep.to_csv())?;
    }
    let summary = vec![
        format!("root-test estimate {:.4} over n in [{}, {}]", rep.estimate, rep.window[0], rep.window[1]),
        format!("slope estimate {:.4}, radius {:.4}", rep.slope_estimate, rep.radius),
        format!("traces vanish exactly: {}", rep.trace_exactly_zero),
    ];
    let ok = rep.trace_exactly_zero;
    Ok(Report::new("lab log-radius", ok, serde_json::to_value(&rep).expect("report serializes"), summary))
}

pub fn bch(cfg: &Config, maxdeg: usize) -> Outcome {
    let rep = lab::bch_check(maxdeg, cfg.bch_samples, cfg.seed)?;
    let summary = vec![
        format!("{} terms through degree {}", rep.terms, rep.maxdeg),
        format!("degree one exact {}, degree two exact {}", rep.degree_one_exact, rep.degree_two_exact),
        format!("max error {:.3e} over {} samples", rep.max_error, rep.samples.len()),
    ];
    let ok = rep.degree_one_exact && rep.degree_two_exact;
    Ok(Report::new("lab bch", ok, serde_json::to_value(&rep).expect("report serializes"), summary))
}

pub fn martin_shamovich(cfg: &Config, maxdeg: usize) -> Outcome {
    let rep = lab::martin_shamovich_check(maxdeg, cfg.divergence_degree)?;
    let dv = &rep.divergence;
    let summary = vec![
        format!("substitution matches through degree {} (deviation {:.3e})", rep.matched_through, rep.max_deviation),
        format!(
            "largest partial sum at degree {}: {:.3e} inside, {:.3e} outside",
            dv.degree, dv.max_partial_inside, dv.max_partial_outside
        ),
    ];
    let ok = rep.product_matches;
    Ok(Report::new("lab martin-shamovich", ok, serde_json::to_value(&rep).expect("report serializes"), summary))
}

pub fn triangular(cfg: &Config, expr: &Path, x: &Path, y: &Path, cc: &str) -> Outcome {
    let e = load_expr(expr)?;
    let xs = load_tuple(x)?;
    let ys = load_tuple(y)?;
    let cc = parse_complex(cc)?;
    let rep = lab::triangular_continuation_check(&e, &xs, &ys, cc)?;
    let ok = rep.holds(cfg.triangular_tol);
    let summary = vec![format!("deviation {:.3e} (scale {:.3e})", rep.deviation, rep.scale)];
    Ok(Report::new("lab triangular", ok, serde_json::to_value(&rep).expect("report serializes"), summary))
}

pub fn conjugate(_cfg: &Config, series: &Path) -> Outcome {
    let s = load_series(series)?;
    match pluriharmonic_conjugate(&s) {
        Ok(f) => {
            let summary = vec![format!("analytic conjugate with {} terms", f.len())];
            let result = json!({ "pluriharmonic": true, "conjugate": f.to_json() });
            Ok(Report::new("conjugate", true, result, summary))
        }
        Err(Error::NotPluriharmonic { word }) => {
            let summary = vec![format!("not pluriharmonic: mixed word `{word}` has a nonzero coefficient")];
            let result = json!({ "pluriharmonic": false, "witness_word": word });
            Ok(Report::new("conjugate", false, result, summary))
        }
        Err(Error::NotSelfAdjoint { deviation }) => {
            let summary = vec![format!("series is not self-adjoint (deviation {deviation:.3e})")];
            let result = json!({ "pluriharmonic": false, "self_adjoint_deviation": deviation });
            Ok(Report::new("conjugate", false, result, summary))
        }
        Err(e) => Err(e.into()),
    }
}
