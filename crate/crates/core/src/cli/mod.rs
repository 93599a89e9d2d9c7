//! Batch front end: `run`, `verify` and `order` over a JSON config.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 not converged,
//! 3 invalid config, 4 bracket verification failed, 5 monotonicity violation.

pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::discretization::{Field, Grid1D};
use crate::error::Error;
use crate::iteration::{run, ConvergenceHistory, Layout, Solution};
use crate::model::validate_problem;
use crate::verify::{check_bracket, order_study, BracketKind, ResidualReport, DEFAULT_RESIDUAL_SLACK};

pub use config::{load_config, ConfigError, LoadedConfig, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_INVALID_CONFIG: u8 = 3;
pub const EXIT_VERIFY_FAILED: u8 = 4;
pub const EXIT_MONOTONICITY: u8 = 5;

/// Sampling density used by `verify` for the hypothesis checks.
const VALIDATION_SAMPLING: usize = 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    pub audit_mmatrix: bool,
    pub sequential_branches: bool,
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_solution_csv(out: &mut impl Write, grid: &Grid1D, solution: &Solution) -> io::Result<()> {
    writeln!(out, "t,x,u,u_lower,u_upper")?;
    for k in 0..grid.levels() {
        for i in 0..grid.nodes() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_num(grid.t(k)),
                fmt_num(grid.x(i)),
                fmt_num(solution.u.get(k, i)),
                fmt_num(solution.u_lower.get(k, i)),
                fmt_num(solution.u_upper.get(k, i)),
            )?;
        }
    }
    Ok(())
}

pub fn write_history_csv(out: &mut impl Write, history: &ConvergenceHistory) -> io::Result<()> {
    writeln!(out, "sweep,gap_lower_upper,max_update,chain_violation,wall_ms")?;
    for r in &history.sweeps {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.sweep,
            fmt_num(r.gap_lower_upper),
            fmt_num(r.max_update),
            fmt_num(r.chain_violation),
            fmt_num(r.wall_ms),
        )?;
    }
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()
}

fn solver_exit(err: &Error) -> u8 {
    match err {
        Error::AtSweep { source, .. } => solver_exit(source),
        Error::ChainViolation { .. } | Error::MMatrixAudit { .. } => EXIT_MONOTONICITY,
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        Error::InvalidDecomposition(_)
        | Error::InvalidGrid(_)
        | Error::InvalidWindow { .. }
        | Error::BracketOrder { .. }
        | Error::UnknownProblem(_)
        | Error::MissingParameter { .. }
        | Error::InvalidParameter { .. } => EXIT_INVALID_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn layout_name(layout: Layout) -> String {
    match layout {
        Layout::Single => "single_domain".into(),
        Layout::Split(d) => format!("i2_lo={},i1_hi={}", d.i2_lo, d.i1_hi),
    }
}

fn load(path: &Path, flags: Flags, err: &mut dyn Write) -> Result<LoadedConfig, u8> {
    match load_config(path) {
        Ok(mut cfg) => {
            cfg.options.audit_mmatrix = flags.audit_mmatrix;
            cfg.options.parallel_branches = !flags.sequential_branches;
            Ok(cfg)
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            Err(EXIT_INVALID_CONFIG)
        }
    }
}

/// Solves the configured problem and writes the solution and history CSVs.
pub fn cmd_run(path: &Path, flags: Flags, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cfg = match load(path, flags, err) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let (solution, history) = match run(&cfg.spec, &cfg.grid, cfg.layout, &cfg.options) {
        Ok(result) => result,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return solver_exit(&e);
        }
    };

    if let Some(p) = &cfg.solution_csv {
        if let Err(e) = write_file(p, |w| write_solution_csv(w, &cfg.grid, &solution)) {
            let _ = writeln!(err, "error: writing {}: {e}", p.display());
            return EXIT_FAILURE;
        }
    }
    if let Some(p) = &cfg.history_csv {
        if let Err(e) = write_file(p, |w| write_history_csv(w, &history)) {
            let _ = writeln!(err, "error: writing {}: {e}", p.display());
            return EXIT_FAILURE;
        }
    }

    let last = history.sweeps.last();
    let _ = writeln!(
        out,
        "problem={} layout={} nx={} nt={} converged={} sweeps={} gap={} max_update={} systems={} audited={}",
        cfg.spec.name,
        layout_name(cfg.layout),
        cfg.grid.nx,
        cfg.grid.nt,
        solution.converged,
        solution.sweeps_used,
        last.map_or(f64::NAN, |r| r.gap_lower_upper),
        last.map_or(f64::NAN, |r| r.max_update),
        history.systems_solved,
        history.systems_audited,
    );
    if solution.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn print_report(out: &mut dyn Write, label: &str, r: &ResidualReport) {
    let _ = writeln!(
        out,
        "{label}: passed={} interior={} (k={}, i={}) boundary={} (k={}, {:?}) initial={} (i={}) slack={}",
        r.passed,
        r.worst_interior.0,
        r.worst_interior.1,
        r.worst_interior.2,
        r.worst_boundary.0,
        r.worst_boundary.1,
        r.worst_boundary.2,
        r.worst_initial.0,
        r.worst_initial.1,
        r.slack,
    );
}

/// Checks the problem hypotheses and both bracket halves on the configured grid.
pub fn cmd_verify(path: &Path, flags: Flags, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cfg = match load(path, flags, err) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let violations = validate_problem(&cfg.spec, VALIDATION_SAMPLING);
    for v in &violations {
        let _ = writeln!(out, "hypothesis violated: {}: {}", v.name, v.detail);
    }
    let spec = &cfg.spec;
    let lower = Field::from_fn(&cfg.grid, |t, x| (spec.bracket.u_hat)(t, x));
    let upper = Field::from_fn(&cfg.grid, |t, x| (spec.bracket.u_tilde)(t, x));
    let mut passed = violations.is_empty();
    for (label, field, kind) in [
        ("subsolution", &lower, BracketKind::Sub),
        ("supersolution", &upper, BracketKind::Super),
    ] {
        match check_bracket(spec, &cfg.grid, field, kind, DEFAULT_RESIDUAL_SLACK) {
            Ok(report) => {
                print_report(out, label, &report);
                passed &= report.passed;
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_FAILURE;
            }
        }
    }
    if passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

/// Runs the refinement study and prints `nx,nt,max_error,sweeps,observed_order`.
pub fn cmd_order(path: &Path, flags: Flags, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cfg = match load(path, flags, err) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let study = match order_study(&cfg.spec, &cfg.grids(), &|g| cfg.layout_for(g), &cfg.options) {
        Ok(study) => study,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return solver_exit(&e);
        }
    };
    let _ = writeln!(out, "nx,nt,max_error,sweeps,observed_order");
    for (n, e) in study.errors.iter().enumerate() {
        let order = if n == 0 {
            String::new()
        } else {
            fmt_num(study.orders[n - 1])
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.nx,
            e.nt,
            fmt_num(e.max_error),
            e.sweeps,
            order
        );
    }
    EXIT_OK
}
