use rayon::prelude::*;

use dicke_core::entanglement::{concurrence_scan, ConcurrenceScan};
use dicke_core::equivalence::{coefficient_limit_check, gap_series, GapSeries};
use dicke_core::hamiltonians::{coefficient_blowup_report, BlowupReport};
use dicke_core::oracle::{consistency_suite, OracleReport, SuiteOptions};
use dicke_core::{Error, ModelSpec, ThermoOptions, ThermoResult};

use crate::config::{Command, RunConfig};
use crate::CliError;

/// 17 significant digits, enough to round-trip.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn thermo_options(cfg: &RunConfig) -> ThermoOptions {
    ThermoOptions { tol_cutoff: cfg.tol_cutoff, max_dim: cfg.max_dim, expectations: false }
}

#[derive(Clone, Debug)]
pub struct ThermoRow {
    pub lambda: f64,
    pub epsilon: f64,
    pub result: ThermoResult,
}

/// Grid order: kind, N, β, λ.
pub fn thermo_rows(cfg: &RunConfig) -> Result<Vec<ThermoRow>, CliError> {
    let expectations = matches!(cfg.command, Command::Thermo { no_expectations: false });
    let opts = ThermoOptions { expectations, ..thermo_options(cfg) };
    let mut jobs = Vec::new();
    for &kind in &cfg.kinds {
        for &n in &cfg.n_list {
            for &beta in &cfg.beta_list {
                for &lambda in &cfg.lambda_list {
                    jobs.push((kind, n, beta, lambda));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(kind, n, beta, lambda)| {
            let spec = ModelSpec::new(kind, n, lambda).with_epsilon(cfg.epsilon);
            let result = dicke_core::thermo::free_energy_density(&spec, beta, &opts)?;
            Ok(ThermoRow { lambda, epsilon: cfg.epsilon, result })
        })
        .collect()
}

pub fn render_thermo(cfg: &RunConfig, rows: &[ThermoRow]) -> String {
    let mut s = cfg.metadata();
    s += "kind,N,beta,lambda,epsilon,M,f,u,s,exp_photons_per_N,exp_Jx2_per_N2,exp_Jz_per_N\n";
    for row in rows {
        let r = &row.result;
        let e = r.expectations.as_ref();
        s += &format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.kind,
            r.n,
            fmt(r.beta),
            fmt(row.lambda),
            fmt(row.epsilon),
            r.cutoff.map(|m| m.to_string()).unwrap_or_default(),
            fmt(r.f),
            fmt(r.u),
            fmt(r.s),
            opt(e.and_then(|e| e.photons_per_n)),
            opt(e.map(|e| e.jx2_per_n2)),
            opt(e.map(|e| e.jz_per_n)),
        );
    }
    s
}

/// One series per `(β, λ)`, β outer.
pub fn gap_table(cfg: &RunConfig) -> Result<Vec<GapSeries>, CliError> {
    let pair = (cfg.kinds[0], cfg.kinds[1]);
    let opts = thermo_options(cfg);
    let mut jobs = Vec::new();
    for &beta in &cfg.beta_list {
        for &lambda in &cfg.lambda_list {
            jobs.push((beta, lambda));
        }
    }
    jobs.par_iter()
        .map(|&(beta, lambda)| Ok(gap_series(pair, lambda, cfg.epsilon, &cfg.n_list, beta, &opts)?))
        .collect()
}

fn fit_summary(series: &GapSeries) -> String {
    match &series.fit {
        Ok(fit) => format!(
            "p={}, C={}, residual={}, used={}, rejected={}",
            fmt(fit.exponent),
            fmt(fit.prefactor),
            fmt(fit.residual),
            fit.used,
            fit.rejected
        ),
        Err(Error::Underflow { rejected, total }) if rejected == total => {
            "suppressed (underflow points: all)".to_string()
        }
        Err(e) => format!("suppressed ({e})"),
    }
}

pub fn render_gap(cfg: &RunConfig, table: &[GapSeries]) -> String {
    let mut s = cfg.metadata();
    s += "kind_a,kind_b,N,beta,lambda,epsilon,M_a,M_b,f_a,f_b,gap\n";
    let m = |c: Option<usize>| c.map(|m| m.to_string()).unwrap_or_default();
    for series in table {
        for p in &series.points {
            s += &format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                series.pair.0,
                series.pair.1,
                p.n,
                fmt(series.beta),
                fmt(series.lambda),
                fmt(series.epsilon),
                m(p.cutoff_a),
                m(p.cutoff_b),
                fmt(p.f_a),
                fmt(p.f_b),
                fmt(p.gap)
            );
        }
    }
    for series in table {
        let at = format!("beta={} lambda={}", fmt(series.beta), fmt(series.lambda));
        s += &format!("# fit {at}: {}\n", fit_summary(series));
        s += &format!("# strictly_decreasing {at}: {}\n", flag(series.strictly_decreasing()));
        s += &format!("# bound_constant {at}: {}\n", fmt(series.bound_constant));
        if series.involves_effective_model() {
            let nd = series.non_decay().map_or("n/a", flag);
            s += &format!("# non_decay {at}: {nd}\n");
        }
    }
    s
}

/// Kind outer, then N.
pub fn concurrence_table(cfg: &RunConfig) -> Result<Vec<ConcurrenceScan>, CliError> {
    let opts = thermo_options(cfg);
    let mut jobs = Vec::new();
    for &kind in &cfg.kinds {
        for &n in &cfg.n_list {
            jobs.push((kind, n));
        }
    }
    jobs.par_iter()
        .map(|&(kind, n)| Ok(concurrence_scan(kind, n, &cfg.lambda_list, cfg.epsilon, &opts)?))
        .collect()
}

pub fn render_concurrence(cfg: &RunConfig, table: &[ConcurrenceScan]) -> String {
    let mut s = cfg.metadata();
    s += "kind,N,lambda,C,rescaledC,parity_flag,degeneracy_flag\n";
    for scan in table {
        for r in &scan.rows {
            s += &format!(
                "{},{},{},{},{},{},{}\n",
                scan.kind,
                scan.n,
                fmt(r.lambda),
                fmt(r.concurrence),
                fmt(r.rescaled),
                flag(r.parity_flag),
                flag(r.degenerate)
            );
        }
    }
    for scan in table {
        s += &format!(
            "# argmax kind={} N={}: lambda={}, C={}, rescaledC={}\n",
            scan.kind,
            scan.n,
            fmt(scan.argmax_lambda),
            fmt(scan.max_concurrence),
            fmt(scan.max_rescaled())
        );
    }
    s
}

pub const BLOWUP_DEFAULTS: [(f64, usize); 2] = [(1.0, 1), (0.6, 8)];

pub fn blowup_grid() -> Vec<f64> {
    let mut grid = vec![0.01, 0.1, 1.0, 10.0];
    grid.extend((0..=10).map(|i| 50.0 + 5.0 * i as f64));
    grid
}

/// One line per assertion; the flag is whether they all passed.
pub fn limits_report(cfg: &RunConfig) -> Result<(String, bool), CliError> {
    let mut s = cfg.metadata();
    let mut ok = true;
    let mut line = |pass: bool, text: String| {
        ok &= pass;
        s.push_str(if pass { "PASS " } else { "FAIL " });
        s.push_str(&text);
        s.push('\n');
    };
    for c in coefficient_limit_check().checks {
        line(c.pass, format!("{}: value={}, bound={}", c.name, fmt(c.value), fmt(c.bound)));
    }
    let pairs: Vec<(f64, usize)> = if cfg.lambda_list.is_empty() && cfg.n_list.is_empty() {
        BLOWUP_DEFAULTS.to_vec()
    } else {
        let ls = if cfg.lambda_list.is_empty() { vec![1.0] } else { cfg.lambda_list.clone() };
        let ns = if cfg.n_list.is_empty() { vec![1] } else { cfg.n_list.clone() };
        ls.iter().flat_map(|&l| ns.iter().map(move |&n| (l, n))).collect()
    };
    let mut tables = String::new();
    for (lambda, n) in pairs {
        let r: BlowupReport = coefficient_blowup_report(lambda, n, &blowup_grid())?;
        let slope = r.slope.expect("grid reaches the fit window");
        let rel = (slope - r.asymptotic_slope).abs() / r.asymptotic_slope.abs();
        let at = format!("lambda={lambda} N={n}");
        if lambda != 0.0 {
            line(
                rel <= 0.01,
                format!("LZ prefactor slope over beta in [50, 100] within 1% of 2 lambda^2/N ({at}): slope={}, 2lambda^2/N={}", fmt(slope), fmt(r.asymptotic_slope)),
            );
        }
        let small = r.rows[0].1;
        let ah = 4.0 * lambda * lambda / n as f64;
        line(
            (small - ah).abs() <= 1e-4 * ah.max(1.0),
            format!("LZ prefactor at beta=0.01 matches AH ({at}): value={}, AH={}", fmt(small), fmt(ah)),
        );
        tables += &format!("# blowup {at}\nbeta,prefactor\n");
        for (b, p) in &r.rows {
            tables += &format!("{},{}\n", fmt(*b), fmt(*p));
        }
    }
    s += &tables;
    Ok((s, ok))
}

pub fn oracle_report(cfg: &RunConfig) -> Result<OracleReport, CliError> {
    let inject_fault = matches!(cfg.command, Command::OracleCheck { inject_fault: true, .. });
    let opts = SuiteOptions { max_n: cfg.max_n, inject_fault, ..SuiteOptions::default() };
    Ok(consistency_suite(&opts)?)
}

pub fn render_oracle(cfg: &RunConfig, report: &OracleReport) -> String {
    let mut s = cfg.metadata();
    for c in &report.checks {
        s += &format!(
            "{} {}: deviation={}, tol={}\n",
            if c.pass() { "PASS" } else { "FAIL" },
            c.name,
            fmt(c.deviation),
            fmt(c.tol)
        );
    }
    s += &format!("checks passed: {} of {}\n", report.passed(), report.checks.len());
    s
}

