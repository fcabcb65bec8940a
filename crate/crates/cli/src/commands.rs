use rayon::prelude::*;
use serde_json::{json, Value};
use stein_clt::arrays::{validate_row, ArrayRow, ValidationReport, DEFAULT_TOL_COV, DEFAULT_TOL_MEAN};
use stein_clt::charfn::{charfn_gap, empirical_charfn, gaussian_charfn, kolmogorov_mc, row_sum_charfn};
use stein_clt::clt::{decomposition_check, default_bound_eps_grid, lambda_f_estimate, master_bound, theorem_bound_report};
use stein_clt::indices::{default_eps_grid, l_sum, lindeberg_index_estimate, CopyMode};
use stein_clt::stein::{
    alpha_identities, gaussian_expectation_identity, hessian_closed_form, hessian_difference,
    hessian_finite_difference, stein_residual, stein_solution, HESSIAN_FD_STEP,
};
use stein_clt::{Error, RealVector};

use crate::args::{eps_grid, t_grid, x_grid, Command, RunArgs};
use crate::report::{num, re_im, Report};
use crate::source::Source;
use crate::CliError;

const HESSIAN_TOL: f64 = 1e-5;
const HESSIAN_DIFF_TOL: f64 = 1e-8;
const STEIN_RESIDUAL_TOL: f64 = 1e-7;
const EXPECTATION_TOL: f64 = 1e-9;
const ALPHA_TOL: f64 = 1e-12;
const S_GRID_POINTS: usize = 21;

pub fn run(command: &Command) -> Result<Report, CliError> {
    let args = command.args();
    let name = command.name();
    let config = serde_json::to_value(args).expect("arguments serialize");
    match command {
        Command::Validate(_) => validate(name, config, args),
        Command::Charfn(_) => charfn(name, config, args),
        Command::Gap(_) => gap(name, config, args),
        Command::Lindeberg(_) => lindeberg(name, config, args),
        Command::LSum(_) => lsum(name, config, args),
        Command::Identity(_) => identity(name, config, args),
        Command::SteinCheck(_) => stein_check(name, config, args),
        Command::Bound(_) => bound(name, config, args),
        Command::Report(_) => asymptotic(name, config, args),
        Command::LambdaF(_) => lambda_f(name, config, args),
        Command::Kolmogorov(_) => kolmogorov(name, config, args),
    }
}

fn text(v: &RealVector) -> Value {
    Value::from(v.to_string())
}

fn rows_for(source: &Source, n_grid: &[usize]) -> Result<Vec<ArrayRow>, CliError> {
    Ok(n_grid
        .par_iter()
        .map(|&n| source.family.row(n))
        .collect::<Result<Vec<_>, Error>>()?)
}

/// Every (row, t) pair in n-major order.
fn pairs<'a>(rows: &'a [ArrayRow], ts: &'a [RealVector]) -> Vec<(&'a ArrayRow, &'a RealVector)> {
    rows.iter().flat_map(|r| ts.iter().map(move |t| (r, t))).collect()
}

fn validation_row(report: &ValidationReport) -> Vec<Value> {
    vec![
        Value::from(report.n),
        Value::from(report.dim),
        Value::from(report.passed),
        num(report.max_prob_sum_residual()),
        num(report.max_mean_residual()),
        num(report.max_covariance_residual),
        num(report.second_moment_sum),
        num(report.second_moment_residual),
    ]
}

fn validate(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let mut report = Report::new(
        name,
        config,
        &[
            "n",
            "dim",
            "passed",
            "max_prob_sum_residual",
            "max_mean_residual",
            "max_covariance_residual",
            "second_moment_sum",
            "second_moment_residual",
        ],
    );
    let mut failures = Vec::new();
    let mut record = |report: &mut Report, v: &ValidationReport| {
        report.push(validation_row(v));
        failures.extend(v.failures.iter().map(|f| format!("n={}: {f}", v.n)));
    };
    match Source::from_args(args) {
        Err(CliError::Core(Error::Validation { report: v, .. })) => record(&mut report, &v),
        Err(e) => return Err(e),
        Ok(source) => {
            for n in source.n_grid(args)? {
                match source.family.row(n) {
                    Ok(row) => record(&mut report, &validate_row(&row, DEFAULT_TOL_MEAN, DEFAULT_TOL_COV)),
                    Err(Error::Validation { report: v, .. }) => record(&mut report, &v),
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    for f in &failures {
        eprintln!("validation: {f}");
    }
    report.passed = failures.is_empty();
    report.summary("tol_mean", DEFAULT_TOL_MEAN);
    report.summary("tol_cov", DEFAULT_TOL_COV);
    report.summary("failures", failures);
    Ok(report)
}

fn charfn(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let source = Source::from_args(args)?;
    let n_grid = source.n_grid(args)?;
    let ts = t_grid(args, source.dim(), &n_grid)?;
    let rows = rows_for(&source, &n_grid)?;
    if args.samples == Some(0) {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let mut report = Report::new(
        name,
        config,
        &["n", "t", "exact_re", "exact_im", "gaussian", "gap", "mc_re", "mc_im", "mc_stderr"],
    );
    let cells = pairs(&rows, &ts)
        .par_iter()
        .map(|&(row, t)| {
            let exact = row_sum_charfn(row, t)?;
            let mc = match args.samples {
                Some(m) => Some(empirical_charfn(row, t, m, args.rng_seed())?),
                None => None,
            };
            let [er, ei] = re_im(exact);
            let (mr, mi, se) = match mc {
                Some(v) => (num(v.value.re), num(v.value.im), num(v.stderr)),
                None => (Value::Null, Value::Null, Value::Null),
            };
            Ok(vec![
                Value::from(row.n()),
                text(t),
                er,
                ei,
                num(gaussian_charfn(t).re),
                num(charfn_gap(row, t)?),
                mr,
                mi,
                se,
            ])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    cells.into_iter().for_each(|r| report.push(r));
    if let Some(m) = args.samples {
        report.summary("samples", m);
        report.summary("seed", args.seed);
        report.summary("stream", args.stream);
    }
    Ok(report)
}

fn gap(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let source = Source::from_args(args)?;
    let n_grid = source.n_grid(args)?;
    let ts = t_grid(args, source.dim(), &n_grid)?;
    let rows = rows_for(&source, &n_grid)?;
    let mut report = Report::new(name, config, &["n", "t", "gap"]);
    let gaps = pairs(&rows, &ts)
        .par_iter()
        .map(|&(row, t)| charfn_gap(row, t))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut max_gap = 0.0f64;
    for ((row, t), g) in pairs(&rows, &ts).into_iter().zip(gaps) {
        max_gap = max_gap.max(g);
        report.push(vec![Value::from(row.n()), text(t), num(g)]);
    }
    report.summary("max_gap", max_gap);
    Ok(report)
}

fn lindeberg(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let source = Source::from_args(args)?;
    let n_grid = source.n_grid(args)?;
    let eps = eps_grid(args, default_eps_grid())?;
    let est = lindeberg_index_estimate(&source.family, &eps, &n_grid, args.tail_window)?;
    let mut report = Report::new(name, config, &["eps", "n", "lindeberg_sum"]);
    for (e, sums) in est.eps_grid.iter().zip(&est.per_point) {
        for (n, s) in est.n_grid.iter().zip(sums) {
            report.push(vec![num(*e), Value::from(*n), num(*s)]);
        }
    }
    report.truncation = Some(json!({
        "eps_grid": est.eps_grid,
        "n_grid": est.n_grid,
        "tail_window": est.tail_window,
    }));
    report.summary("lindeberg_index_estimate", est.value);
    report.summary("argmax_eps", est.argmax_eps);
    report.summary("non_monotone_eps", est.non_monotone_eps);
    Ok(report)
}

fn lsum(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let source = Source::from_args(args)?;
    let n_grid = source.n_grid(args)?;
    let ts = t_grid(args, source.dim(), &n_grid)?;
    let eps = eps_grid(args, vec![1.0])?;
    let rows = rows_for(&source, &n_grid)?;
    let mut report = Report::new(name, config, &["n", "t", "eps", "l_same", "l_indep"]);
    let cells: Vec<(&ArrayRow, &RealVector, f64)> = pairs(&rows, &ts)
        .into_iter()
        .flat_map(|(r, t)| eps.iter().map(move |&e| (r, t, e)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(row, t, e)| Ok((l_sum(row, CopyMode::Same, t, e)?, l_sum(row, CopyMode::Independent, t, e)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    for ((row, t, e), (same, indep)) in cells.into_iter().zip(values) {
        report.push(vec![Value::from(row.n()), text(t), num(e), num(same), num(indep)]);
    }
    Ok(report)
}

fn identity(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let source = Source::from_args(args)?;
    let n_grid = source.n_grid(args)?;
    let ts = t_grid(args, source.dim(), &n_grid)?;
    let spec = args.quadrature()?;
    let rows = rows_for(&source, &n_grid)?;
    let mut report = Report::new(
        name,
        config,
        &["n", "t", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual", "quadrature_error", "passed"],
    );
    let checks = pairs(&rows, &ts)
        .par_iter()
        .map(|&(row, t)| decomposition_check(row, t, &spec))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut max_residual = 0.0f64;
    let mut failures = 0usize;
    for c in checks {
        max_residual = max_residual.max(c.residual);
        failures += usize::from(!c.passed);
        let [lr, li] = re_im(c.lhs);
        let [rr, ri] = re_im(c.rhs);
        report.push(vec![
            Value::from(c.n),
            text(&c.t),
            lr,
            li,
            rr,
            ri,
            num(c.residual),
            num(c.quadrature_error),
            Value::from(c.passed),
        ]);
    }
    report.passed = failures == 0;
    report.summary("max_residual", max_residual);
    report.summary("failures", failures);
    Ok(report)
}

fn stein_check(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let dim = match (&args.spec, args.family) {
        (None, None) => args.dim,
        _ => Source::from_args(args)?.dim(),
    };
    if dim == 0 {
        return Err(CliError::Usage("--dim must be at least 1".into()));
    }
    let ts = t_grid(args, dim, &[])?;
    let xs = x_grid(args, dim)?;
    let spec = args.quadrature()?;
    let mut report = Report::new(
        name,
        config,
        &[
            "t",
            "x",
            "solution_re",
            "solution_im",
            "solution_error",
            "hessian_fd_error",
            "hessian_difference_error",
            "stein_residual",
            "stein_fd_residual",
            "expectation_residual",
            "alpha_residual",
            "passed",
        ],
    );
    let s_grid: Vec<f64> = (0..S_GRID_POINTS).map(|i| i as f64 / (S_GRID_POINTS - 1) as f64).collect();
    let cells: Vec<(&RealVector, &RealVector)> = ts.iter().flat_map(|t| xs.iter().map(move |x| (t, x))).collect();
    let rows = cells
        .par_iter()
        .map(|&(t, x)| -> Result<(Vec<Value>, bool), Error> {
            let sol = stein_solution(t, x, &spec)?;
            let h = hessian_closed_form(t, x, &spec)?;
            let fd = hessian_finite_difference(t, x, &spec, HESSIAN_FD_STEP)?;
            let hess_err = (&h.matrix - &fd.matrix).max_abs();
            let origin = RealVector::zeros(dim);
            let d = hessian_difference(t, x, &origin, &spec)?;
            let h0 = hessian_closed_form(t, &origin, &spec)?;
            let diff_err = (&d - &(&h.matrix - &h0.matrix)).max_abs();
            let res = stein_residual(t, x, &spec, args.fd_step)?;
            let expectation = if dim <= 4 {
                let mut worst = 0.0f64;
                for &s in &s_grid {
                    worst = worst.max(gaussian_expectation_identity(t, x, s, args.level)?.max_residual);
                }
                Some(worst)
            } else {
                None
            };
            let mut alpha = 0.0f64;
            for &s in &s_grid {
                let (r1, r2) = alpha_identities(x, t, s)?;
                alpha = alpha.max(r1).max(r2);
            }
            let passed = hess_err <= HESSIAN_TOL
                && diff_err <= HESSIAN_DIFF_TOL
                && res.residual.norm() < STEIN_RESIDUAL_TOL
                && expectation.is_none_or(|e| e < EXPECTATION_TOL)
                && alpha < ALPHA_TOL;
            let [sr, si] = re_im(sol.value);
            Ok((
                vec![
                    text(t),
                    text(x),
                    sr,
                    si,
                    num(sol.est_error),
                    num(hess_err),
                    num(diff_err),
                    num(res.residual.norm()),
                    num(res.fd_residual.norm()),
                    expectation.map_or(Value::Null, num),
                    num(alpha),
                    Value::from(passed),
                ],
                passed,
            ))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut failures = 0usize;
    for (row, ok) in rows {
        failures += usize::from(!ok);
        report.push(row);
    }
    report.passed = failures == 0;
    report.summary("failures", failures);
    report.summary(
        "tolerances",
        json!({
            "hessian_fd": HESSIAN_TOL,
            "hessian_difference": HESSIAN_DIFF_TOL,
            "stein_residual": STEIN_RESIDUAL_TOL,
            "expectation": EXPECTATION_TOL,
            "alpha": ALPHA_TOL,
        }),
    );
    report.truncation = Some(json!({ "s_grid_points": S_GRID_POINTS, "hermite_level": args.level }));
    Ok(report)
}

fn bound(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let source = Source::from_args(args)?;
    let n_grid = source.n_grid(args)?;
    let ts = t_grid(args, source.dim(), &n_grid)?;
    let eps = eps_grid(args, default_bound_eps_grid())?;
    let rows = rows_for(&source, &n_grid)?;
    let mut report = Report::new(
        name,
        config,
        &[
            "n", "t", "eps", "gap", "term_eps", "term_same", "term_indep", "envelope", "rhs", "slack", "passed",
        ],
    );
    let cells: Vec<(&ArrayRow, &RealVector, f64)> = pairs(&rows, &ts)
        .into_iter()
        .flat_map(|(r, t)| eps.iter().map(move |&e| (r, t, e)))
        .collect();
    let bounds = cells
        .par_iter()
        .map(|&(row, t, e)| master_bound(row, t, e))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut min_slack = f64::INFINITY;
    let mut failures = 0usize;
    let mut best = Vec::new();
    for b in &bounds {
        min_slack = min_slack.min(b.slack);
        failures += usize::from(!b.passed);
        report.push(vec![
            Value::from(b.n),
            text(&b.t),
            num(b.eps),
            num(b.lhs_gap),
            num(b.term_eps),
            num(b.term_same),
            num(b.term_indep),
            num(b.envelope),
            num(b.rhs),
            num(b.slack),
            Value::from(b.passed),
        ]);
    }
    for chunk in bounds.chunks(eps.len()) {
        let b = chunk
            .iter()
            .min_by(|a, b| a.rhs.total_cmp(&b.rhs))
            .expect("eps grid is nonempty");
        best.push(json!({ "n": b.n, "t": b.t.to_string(), "eps": b.eps, "rhs": b.rhs }));
    }
    report.passed = failures == 0;
    report.summary("min_slack", min_slack);
    report.summary("failures", failures);
    report.summary("best_eps", best);
    Ok(report)
}

fn asymptotic(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let source = Source::from_args(args)?;
    let n_grid = source.n_grid(args)?;
    let ts = t_grid(args, source.dim(), &n_grid)?;
    let eps = eps_grid(args, default_bound_eps_grid())?;
    let rep = theorem_bound_report(&source.family, &ts, &n_grid, &eps, args.tail_window)?;
    let mut report = Report::new(
        name,
        config,
        &["t", "gap_limsup", "theorem_rhs", "theorem_slack", "corollary_rhs", "corollary_slack"],
    );
    for (i, t) in rep.t_grid.iter().enumerate() {
        let g = rep.gap_limsup[i];
        report.push(vec![
            text(t),
            num(g),
            num(rep.theorem_rhs[i]),
            num(rep.theorem_rhs[i] - g),
            num(rep.corollary_rhs),
            num(rep.corollary_rhs - g),
        ]);
    }
    report.truncation = Some(json!({
        "n_grid": rep.n_grid,
        "eps_grid": rep.eps_grid,
        "tail_window": rep.tail_window,
        "note": "finite-grid estimates of limsup quantities; negative slack above the floor is reported as truncation",
    }));
    report.passed = rep.passed;
    report.summary("family", rep.family.clone());
    report.summary("l_same", rep.l_same);
    report.summary("l_indep", rep.l_indep);
    report.summary("lindeberg_index_estimate", rep.lindeberg.value);
    report.summary("infinitesimality", rep.infinitesimality);
    report.summary("corollary_applicable", rep.corollary_applicable);
    report.summary("lambda_f", rep.lambda_f);
    report.summary("flags", serde_json::to_value(&rep.flags).expect("flags serialize"));
    Ok(report)
}

fn lambda_f(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let source = Source::from_args(args)?;
    let n_grid = source.n_grid(args)?;
    let ts = t_grid(args, source.dim(), &n_grid)?;
    let est = lambda_f_estimate(&source.family, &ts, &n_grid, args.tail_window)?;
    let mut report = Report::new(name, config, &["n", "t", "gap"]);
    for (j, n) in est.n_grid.iter().enumerate() {
        for (i, t) in est.t_grid.iter().enumerate() {
            report.push(vec![Value::from(*n), text(t), num(est.gaps[i][j])]);
        }
    }
    report.truncation = Some(json!({
        "n_grid": est.n_grid,
        "tail_window": est.tail_window,
        "t_points": est.t_grid.len(),
        "caveat": est.caveat,
    }));
    report.summary("lambda_f", est.value);
    report.summary("per_n_sup", est.per_n_sup);
    Ok(report)
}

fn kolmogorov(name: &'static str, config: Value, args: &RunArgs) -> Result<Report, CliError> {
    let source = Source::from_args(args)?;
    let n_grid = source.n_grid(args)?;
    let samples = args.samples.unwrap_or(100_000);
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let rows = rows_for(&source, &n_grid)?;
    let mut report = Report::new(name, config, &["n", "samples", "seed", "stream", "distance"]);
    for row in &rows {
        let d = kolmogorov_mc(row, samples, args.rng_seed())?;
        report.push(vec![
            Value::from(row.n()),
            Value::from(samples),
            Value::from(args.seed),
            Value::from(args.stream),
            num(d),
        ]);
    }
    Ok(report)
}
