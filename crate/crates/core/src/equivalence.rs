//! Free-energy gaps between models and their finite-size decay.
//!
//! For the DICKE/AH pair the gap `f_N[DICKE] − f_N[AH]` is squeezed between
//! bounds of order `N^{-1/2}` and `N^{-1} ln N` at every temperature; the CT and
//! LZ Hamiltonians only approach AH in their respective limits.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::{kappa, ModelKind, ModelSpec};
use crate::thermo::{free_energy_density, ThermoOptions};

/// Gaps at or below this magnitude are treated as numerical zero.
pub const UNDERFLOW: f64 = 1e-13;

/// Decay exponent a DICKE/AH series must reach.
pub const MIN_DECAY_EXPONENT: f64 = 0.4;

/// A gap at the largest `N` at least this fraction of the one at the smallest
/// `N` counts as not decaying.
pub const NON_DECAY_RATIO: f64 = 0.5;

/// Smallest `N_max / N_min` over which non-decay is judged.
pub const NON_DECAY_MIN_RANGE: usize = 8;

/// `f_N[a] − f_N[b]` at inverse temperature `beta`.
pub fn free_energy_gap(a: &ModelSpec, b: &ModelSpec, beta: f64, opts: &ThermoOptions) -> Result<f64> {
    Ok(gap_point(a, b, beta, opts)?.gap)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapPoint {
    pub n: usize,
    pub f_a: f64,
    pub f_b: f64,
    pub gap: f64,
    pub cutoff_a: Option<usize>,
    pub cutoff_b: Option<usize>,
}

fn gap_point(a: &ModelSpec, b: &ModelSpec, beta: f64, opts: &ThermoOptions) -> Result<GapPoint> {
    if a.n != b.n {
        return Err(Error::ParameterMismatch(format!("N differs: {} vs {}", a.n, b.n)));
    }
    if a.epsilon != b.epsilon || a.lambda != b.lambda {
        return Err(Error::ParameterMismatch(format!(
            "(epsilon, lambda) differ: ({}, {}) vs ({}, {})",
            a.epsilon, a.lambda, b.epsilon, b.lambda
        )));
    }
    let opts = ThermoOptions { expectations: false, ..opts.clone() };
    let (ra, rb) = rayon::join(
        || free_energy_density(a, beta, &opts),
        || free_energy_density(b, beta, &opts),
    );
    let (ra, rb) = (ra?, rb?);
    Ok(GapPoint { n: a.n, f_a: ra.f, f_b: rb.f, gap: ra.f - rb.f, cutoff_a: ra.cutoff, cutoff_b: rb.cutoff })
}

/// Least-squares fit of `ln|Δf| = ln C − p ln N`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual in `ln|Δf|`.
    pub residual: f64,
    pub used: usize,
    /// Points dropped for `|Δf| <= 1e-13`.
    pub rejected: usize,
}

/// Fits `|Δf| ≈ C N^{-p}` to `(N, |Δf|)` pairs.
pub fn decay_rate_fit(points: &[(f64, f64)]) -> Result<DecayFit> {
    let total = points.len();
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1.abs() > UNDERFLOW)
        .map(|&(n, g)| (n.ln(), g.abs().ln()))
        .collect();
    let rejected = total - kept.len();
    if kept.len() < 3 {
        if rejected > 0 {
            return Err(Error::Underflow { rejected, total });
        }
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {total}")));
    }
    let k = kept.len() as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / k;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all N equal".into()));
    }
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (kept.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / k).sqrt();
    Ok(DecayFit { exponent: -slope, prefactor: intercept.exp(), residual, used: kept.len(), rejected })
}

/// Gap sequence over `N` at fixed `(β, λ, ε)`.
#[derive(Clone, Debug)]
pub struct GapSeries {
    pub pair: (ModelKind, ModelKind),
    pub beta: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub points: Vec<GapPoint>,
    pub fit: std::result::Result<DecayFit, Error>,
    /// Smallest `C` with `|Δf| <= C·max(N^{-1/2}, N^{-1} ln N)` on every point.
    pub bound_constant: f64,
}

impl GapSeries {
    pub fn abs_gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gap.abs()).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.abs_gaps().windows(2).all(|w| w[1] < w[0])
    }

    /// Whether the pair involves one of the temperature-dependent models.
    pub fn involves_effective_model(&self) -> bool {
        [self.pair.0, self.pair.1].iter().any(|k| k.needs_beta())
    }

    /// `|Δf(N_max)| >= 0.5 |Δf(N_min)|`, judged only over an `N` range of at
    /// least 8×.
    pub fn non_decay(&self) -> Option<bool> {
        let (first, last) = (self.points.first()?, self.points.last()?);
        if last.n < NON_DECAY_MIN_RANGE * first.n {
            return None;
        }
        Some(last.gap.abs() >= NON_DECAY_RATIO * first.gap.abs())
    }

    /// Fitted exponent reaches [`MIN_DECAY_EXPONENT`].
    pub fn decays(&self) -> bool {
        self.fit.as_ref().is_ok_and(|f| f.exponent >= MIN_DECAY_EXPONENT)
    }
}

/// Largest `|Δf| / max(N^{-1/2}, N^{-1} ln N)` over the points.
pub fn bound_constant(points: &[GapPoint]) -> f64 {
    points
        .iter()
        .map(|p| {
            let n = p.n as f64;
            p.gap.abs() / n.powf(-0.5).max(n.ln() / n)
        })
        .fold(0.0, f64::max)
}

pub fn gap_series(
    pair: (ModelKind, ModelKind),
    lambda: f64,
    epsilon: f64,
    n_list: &[usize],
    beta: f64,
    opts: &ThermoOptions,
) -> Result<GapSeries> {
    if n_list.is_empty() {
        return Err(Error::Empty("N grid"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidModel("N grid must be strictly increasing".into()));
    }
    let points: Vec<GapPoint> = n_list
        .par_iter()
        .map(|&n| {
            let a = ModelSpec::new(pair.0, n, lambda).with_epsilon(epsilon);
            let b = ModelSpec::new(pair.1, n, lambda).with_epsilon(epsilon);
            gap_point(&a, &b, beta, opts)
        })
        .collect::<Result<_>>()?;
    let fit_input: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.gap.abs())).collect();
    Ok(GapSeries {
        pair,
        beta,
        lambda,
        epsilon,
        fit: decay_rate_fit(&fit_input),
        bound_constant: bound_constant(&points),
        points,
    })
}

/// One [`GapSeries`] per β, in grid order.
pub fn temperature_independence_scan(
    pair: (ModelKind, ModelKind),
    lambda: f64,
    epsilon: f64,
    n_list: &[usize],
    beta_list: &[f64],
    opts: &ThermoOptions,
) -> Result<Vec<GapSeries>> {
    if beta_list.is_empty() {
        return Err(Error::Empty("beta grid"));
    }
    beta_list
        .par_iter()
        .map(|&beta| gap_series(pair, lambda, epsilon, n_list, beta, opts))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport {
    pub checks: Vec<LimitCheck>,
}

impl LimitReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const CT_LIMIT_GRID: [f64; 7] = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
pub const LZ_LIMIT_GRID: [f64; 6] = [0.01, 0.03, 0.05, 0.1, 0.2, 0.3];

/// Scalar form of the two coincidence statements: `κ_CT(β) − 1 <= 3/β` for
/// `β >= 10` and `κ_LZ(β) − 1 <= β²/10` for `β <= 0.3`, plus the pinned
/// values `κ_CT(50)`, `κ_LZ(0.1)`, `κ_LZ(0.01)` and `κ_CT(0.01)`.
pub fn coefficient_limit_check() -> LimitReport {
    let ct = |b: f64| kappa(ModelKind::Ct, Some(b)).expect("positive beta");
    let lz = |b: f64| kappa(ModelKind::Lz, Some(b)).expect("positive beta");
    let mut checks = Vec::new();
    let mut push = |name: String, value: f64, bound: f64, pass: bool| {
        checks.push(LimitCheck { name, value, bound, pass });
    };
    for b in CT_LIMIT_GRID {
        let v = ct(b) - 1.0;
        push(format!("kappa_CT({b}) - 1 <= 3/beta"), v, 3.0 / b, v <= 3.0 / b);
    }
    for b in LZ_LIMIT_GRID {
        let v = lz(b) - 1.0;
        push(format!("kappa_LZ({b}) - 1 <= beta^2/10"), v, b * b / 10.0, v <= b * b / 10.0);
    }
    let v = ct(50.0) - 1.0;
    push("kappa_CT(50) - 1 < 0.05".into(), v, 0.05, v < 0.05);
    let v = lz(0.1) - 1.0;
    push("kappa_LZ(0.1) - 1 < 1e-3".into(), v, 1e-3, v < 1e-3);
    let v = lz(0.01) - 1.0;
    push("kappa_LZ(0.01) - 1 < 1e-4".into(), v, 1e-4, v < 1e-4);
    let v = ct(0.01);
    push("|kappa_CT(0.01) - 3| <= 0.01".into(), v, 0.01, (v - 3.0).abs() <= 0.01);
    LimitReport { checks }
}
