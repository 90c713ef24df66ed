use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use hn_core::ellipticity::{run_sweep, ConeSampler, SweepKind, SweepReport};
use hn_core::io::{self, ProblemFile};
use hn_core::solver::{continuation_solve, ManufacturedCase, NewtonOptions, Schedule};
use hn_core::Error;
use serde::Serialize;

pub const OK: u8 = 0;
pub const MATH_FAILURE: u8 = 1;
pub const USAGE: u8 = 2;

/// Exit status an error maps to.
fn status_of(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. }
        | Error::Continuation { .. }
        | Error::Cone { .. }
        | Error::ConeAtNode { .. }
        | Error::Numeric(_) => MATH_FAILURE,
        Error::Domain(_)
        | Error::Precondition(_)
        | Error::Validation { .. }
        | Error::Parse { .. }
        | Error::Io(_) => USAGE,
    }
}

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    status_of(e)
}

/// Sizes the global worker pool from `HN_THREADS` when set.
pub fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("HN_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("HN_THREADS: expected a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("HN_THREADS: {e}"))
}

fn prepare_out(out: &Path) -> Result<(), Error> {
    fs::create_dir_all(out)?;
    Ok(())
}

#[derive(Serialize)]
struct Violation<'a> {
    lemma: &'a str,
    n: usize,
    k: usize,
    l: Option<usize>,
    eta: &'a [f64],
}

pub fn verify_lemmas(n_max: usize, samples: u64, seed: u64, out: &Path) -> u8 {
    if samples == 0 {
        eprintln!("error: empty sweep: --samples must be positive");
        return USAGE;
    }
    if let Err(e) = prepare_out(out) {
        return fail(&e);
    }
    let mut reports: Vec<SweepReport> = Vec::new();
    for kind in SweepKind::ALL {
        for n in 2..=n_max {
            for (k, l) in kind.index_sets(n) {
                match run_sweep(kind, n, k, l, samples, seed) {
                    Ok(r) => reports.push(r),
                    Err(e) => return fail(&e),
                }
            }
        }
    }
    let written = io::write_json(&out.join("sweeps.json"), &reports).and_then(|_| {
        fs::write(out.join("summary.csv"), io::sweep_summary_csv(&reports))?;
        Ok(())
    });
    if let Err(e) = written {
        return fail(&e);
    }
    let mut status = OK;
    for r in &reports {
        if r.violations > 0 {
            status = MATH_FAILURE;
            let v = Violation {
                lemma: r.lemma.label(),
                n: r.n,
                k: r.k,
                l: r.l,
                eta: r.first_violation.as_deref().unwrap_or(&[]),
            };
            eprintln!(
                "violation: {} of {} samples; first: {}",
                r.violations,
                r.samples,
                serde_json::to_string(&v).unwrap_or_default()
            );
        }
    }
    let total: u64 = reports.iter().map(|r| r.violations).sum();
    println!(
        "{} sweeps x {samples} samples, {total} violations; reports in {}",
        reports.len(),
        out.display()
    );
    status
}

pub struct SolveArgs {
    pub problem: PathBuf,
    pub out: PathBuf,
    pub tol: Option<f64>,
    pub m: Option<usize>,
    pub beta: Option<f64>,
    pub dump: bool,
}

pub fn solve(args: &SolveArgs) -> u8 {
    let loaded = ProblemFile::load(&args.problem).and_then(|mut file| {
        if let Some(m) = args.m {
            file.domain.m = m;
        }
        if let Some(beta) = args.beta {
            file.beta = beta;
        }
        let base = args.problem.parent().unwrap_or(Path::new("."));
        let spec = file.to_spec(base)?;
        Ok((spec, file.schedule()?))
    });
    let (spec, schedule) = match loaded {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            eprintln!("error: --tol: must be a positive number, got {t}");
            return USAGE;
        }
    }
    if let Err(e) = prepare_out(&args.out) {
        return fail(&e);
    }
    let opts = NewtonOptions {
        tol: args.tol,
        ..NewtonOptions::default()
    };
    match continuation_solve(&spec, &schedule, &opts) {
        Ok((u, report)) => {
            let written = io::write_json(&args.out.join("report.json"), &report)
                .and_then(|_| io::write_json(&args.out.join("diagnostics.json"), &report.diagnostics))
                .and_then(|_| {
                    fs::write(args.out.join("solution.csv"), io::solution_csv(&u))?;
                    if args.dump {
                        io::write_field(&args.out.join("solution.bin"), &u)?;
                    }
                    Ok(())
                });
            if let Err(e) = written {
                return fail(&e);
            }
            println!(
                "converged: {} stages, {} newton steps, interior residual {:e}, boundary residual {:e}, min cone margin {:e}",
                report.continuation.len(),
                report.newton_steps(),
                report.interior_residual,
                report.boundary_residual,
                report.min_cone_margin
            );
            OK
        }
        Err(e) => {
            if let Some(report) = e.report() {
                if let Err(w) = io::write_json(&args.out.join("report.json"), report) {
                    eprintln!("error: {w}");
                }
            }
            fail(&e)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct MmsRow {
    m: usize,
    h: f64,
    err_inf: f64,
}

fn observed_order(prev: &MmsRow, cur: &MmsRow) -> f64 {
    (prev.err_inf / cur.err_inf).ln() / (prev.h / cur.h).ln()
}

/// Errors below this are stencil-exact; orders are meaningless there.
const EXACT_ERROR: f64 = 1e-10;
const MIN_ORDER: f64 = 1.7;

pub fn mms_study(case_id: &str, grids: &[usize], out: &Path) -> u8 {
    let Some(case) = ManufacturedCase::from_id(case_id) else {
        let known: Vec<&str> = ManufacturedCase::ALL.iter().map(|c| c.id()).collect();
        eprintln!("error: unknown case {case_id:?}; known: {}", known.join(", "));
        return USAGE;
    };
    if grids.len() < 2 {
        eprintln!("error: --grids: need at least two grid sizes");
        return USAGE;
    }
    if let Err(e) = prepare_out(out) {
        return fail(&e);
    }
    let mut rows = Vec::new();
    for &m in grids {
        let (spec, exact) = match case.problem(m) {
            Ok(v) => v,
            Err(Error::Validation { field, message }) if field == "u_star" => {
                eprintln!("error: {field}: {message}");
                return MATH_FAILURE;
            }
            Err(e) => return fail(&e),
        };
        let solved = continuation_solve(&spec, &Schedule::default(), &NewtonOptions::default());
        let u = match solved {
            Ok((u, _)) => u,
            Err(e) => return fail(&e),
        };
        rows.push(MmsRow {
            m,
            h: spec.grid().h()[0],
            err_inf: u.max_abs_diff(&exact),
        });
    }
    let exact = rows.iter().all(|r| r.err_inf < EXACT_ERROR);
    let mut csv = String::from("m,h,err_inf,order\n");
    let mut final_order = f64::NAN;
    for (i, r) in rows.iter().enumerate() {
        let order = if exact {
            "exact".to_string()
        } else if i == 0 {
            String::new()
        } else {
            final_order = observed_order(&rows[i - 1], r);
            format!("{final_order:.4}")
        };
        csv.push_str(&format!("{},{:e},{:e},{}\n", r.m, r.h, r.err_inf, order));
    }
    if let Err(e) = fs::write(out.join("mms.csv"), &csv) {
        return fail(&Error::Io(e));
    }
    print!("{csv}");
    if exact || final_order >= MIN_ORDER {
        OK
    } else {
        eprintln!("observed order {final_order:.4} below {MIN_ORDER}");
        MATH_FAILURE
    }
}

pub fn sample_cone(n: usize, k: usize, count: u64, seed: u64, scale: f64) -> u8 {
    let sampler = match ConeSampler::new(n, k, seed, scale) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let stdout = std::io::stdout();
    let mut w = std::io::BufWriter::new(stdout.lock());
    let header: Vec<String> = (1..=n).map(|i| format!("eta{i}")).collect();
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{}", header.join(","))?;
        for i in 0..count {
            let eta = sampler.sample_at(i);
            let row: Vec<String> = eta.as_slice().iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()
    };
    match emit() {
        Ok(()) => OK,
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => OK,
        Err(e) => fail(&Error::Io(e)),
    }
}
