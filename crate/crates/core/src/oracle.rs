//! Brute-force reference over the full `(M+1)·2^N` product space.
//!
//! Collective operators are built as sums of single-site Pauli matrices and
//! diagonalized with nalgebra, so nothing here goes through the sector
//! decomposition or the in-house eigensolvers. Only the scalar `κ` functions
//! are shared.
//!
//! Qubit 0 is the most significant bit of the spin index, bit value 0 is `↑`,
//! and the full index is `photons · 2^N + spins`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::entanglement::{collective_moments, reduced_two_qubit, wootters_concurrence, TwoQubitState};
use crate::error::{Error, Result};
use crate::hamiltonians::{build_sector_hamiltonian, kappa, ModelKind, ModelSpec};
use crate::operators::{SpinSector, DEFAULT_MAX_DIM};
use crate::thermo::{free_energy_density, ground_state, sector_spectra, ThermoOptions};

pub const MAX_N: usize = 8;
pub const MAX_CUTOFF: usize = 32;

/// Full-space Hamiltonian.
#[derive(Clone, Debug)]
pub struct FullSpaceMatrix {
    pub n: usize,
    /// `M + 1` for DICKE, 1 otherwise.
    pub photon_levels: usize,
    pub matrix: DMatrix<f64>,
}

impl FullSpaceMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn guard(spec: &ModelSpec) -> Result<()> {
    if spec.n == 0 || spec.n > MAX_N {
        return Err(Error::OracleGuard(format!("N = {} outside 1..={MAX_N}", spec.n)));
    }
    if spec.kind == ModelKind::Dicke {
        match spec.cutoff {
            None => return Err(Error::OracleGuard("DICKE needs an explicit cutoff".into())),
            Some(m) if m > MAX_CUTOFF => {
                return Err(Error::OracleGuard(format!("cutoff {m} above {MAX_CUTOFF}")));
            }
            _ => {}
        }
    }
    Ok(())
}

fn is_up(spins: usize, n: usize, q: usize) -> bool {
    spins >> (n - 1 - q) & 1 == 0
}

/// `Jz = ½ Σ σz` and `Jx = ½ Σ σx` on `2^N` states.
fn collective_spin(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = 1usize << n;
    let mut jz = DMatrix::zeros(d, d);
    let mut jx = DMatrix::zeros(d, d);
    for s in 0..d {
        for q in 0..n {
            jz[(s, s)] += if is_up(s, n, q) { 0.5 } else { -0.5 };
            jx[(s ^ (1 << (n - 1 - q)), s)] += 0.5;
        }
    }
    (jz, jx)
}

pub fn brute_force_hamiltonian(spec: &ModelSpec) -> Result<FullSpaceMatrix> {
    guard(spec)?;
    let n = spec.n;
    let (jz, jx) = collective_spin(n);
    let d = 1usize << n;
    if spec.kind == ModelKind::Dicke {
        let levels = spec.cutoff.expect("guarded") + 1;
        let g = 2.0 * spec.lambda / (n as f64).sqrt();
        let mut h = DMatrix::zeros(levels * d, levels * d);
        for p in 0..levels {
            for s in 0..d {
                h[(p * d + s, p * d + s)] = p as f64 + spec.epsilon * jz[(s, s)];
            }
            if p + 1 < levels {
                let x = (p as f64 + 1.0).sqrt();
                for s in 0..d {
                    for t in 0..d {
                        let v = -g * x * jx[(s, t)];
                        h[(p * d + s, (p + 1) * d + t)] += v;
                        h[((p + 1) * d + t, p * d + s)] += v;
                    }
                }
            }
        }
        return Ok(FullSpaceMatrix { n, photon_levels: levels, matrix: h });
    }
    let k = kappa(spec.kind, spec.beta)?;
    let jx2 = &jx * &jx;
    let h = jz * spec.epsilon - jx2 * (k * 4.0 * spec.lambda * spec.lambda / n as f64);
    Ok(FullSpaceMatrix { n, photon_levels: 1, matrix: h })
}

fn eigen(h: &FullSpaceMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let es = SymmetricEigen::new(h.matrix.clone());
    (es.eigenvalues.iter().copied().collect(), es.eigenvectors)
}

/// Full spectrum, ascending.
pub fn brute_force_spectrum(spec: &ModelSpec) -> Result<Vec<f64>> {
    let (mut values, _) = eigen(&brute_force_hamiltonian(spec)?);
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `f = −ln Tr e^{−βH} / (βN)`. CT and LZ without a build β are built at `beta`.
pub fn brute_force_free_energy(spec: &ModelSpec, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::NonPositiveBeta(beta));
    }
    let mut s = spec.clone();
    if matches!(s.kind, ModelKind::Ct | ModelKind::Lz) && s.beta.is_none() {
        s.beta = Some(beta);
    }
    let values = brute_force_spectrum(&s)?;
    let e0 = values[0];
    let sum: f64 = values.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    let ln_z = -beta * e0 + sum.ln();
    Ok(-ln_z / (beta * spec.n as f64))
}

#[derive(Clone, Debug)]
pub struct OracleGroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    /// `E1 − E0`.
    pub gap: f64,
}

pub fn brute_force_ground_state(spec: &ModelSpec) -> Result<OracleGroundState> {
    let (values, vectors) = eigen(&brute_force_hamiltonian(spec)?);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let gap = if order.len() > 1 { values[order[1]] - values[order[0]] } else { f64::INFINITY };
    Ok(OracleGroundState {
        energy: values[order[0]],
        vector: vectors.column(order[0]).iter().copied().collect(),
        gap,
    })
}

/// Partial trace of `|ψ><ψ|` onto qubits `(p, q)`, tracing out photons and all
/// other spins. Basis `(↑↑, ↑↓, ↓↑, ↓↓)` for `(p, q)`.
pub fn pair_reduction_on(state: &[f64], n: usize, p: usize, q: usize) -> Result<[[f64; 4]; 4]> {
    if n < 2 || n > MAX_N || p >= n || q >= n || p == q {
        return Err(Error::OracleGuard(format!("pair ({p}, {q}) of {n} qubits")));
    }
    let d = 1usize << n;
    if state.is_empty() || state.len() % d != 0 {
        return Err(Error::OracleGuard(format!("state length {} not a multiple of {d}", state.len())));
    }
    let (bp, bq) = (1usize << (n - 1 - p), 1usize << (n - 1 - q));
    let local = |s: usize| 2 * usize::from(s & bp != 0) + usize::from(s & bq != 0);
    let mut rho = [[0.0; 4]; 4];
    for chunk in state.chunks(d) {
        for s in 0..d {
            if chunk[s] == 0.0 {
                continue;
            }
            let rest = s & !(bp | bq);
            for a in 0..4 {
                let t = rest | if a & 2 != 0 { bp } else { 0 } | if a & 1 != 0 { bq } else { 0 };
                rho[local(s)][a] += chunk[s] * chunk[t];
            }
        }
    }
    Ok(rho)
}

/// Partial trace onto qubits `(0, 1)`.
pub fn brute_force_pair_reduction(state: &[f64], n: usize) -> Result<[[f64; 4]; 4]> {
    pair_reduction_on(state, n, 0, 1)
}

/// Symmetric one-excitation state `(|↑↓…↓> + … + |↓…↓↑>)/√N`.
pub fn w_state(n: usize) -> Vec<f64> {
    let d = 1usize << n;
    let amp = 1.0 / (n as f64).sqrt();
    let mut v = vec![0.0; d];
    for q in 0..n {
        // all other qubits down (bit 1), qubit q up (bit 0)
        v[(d - 1) & !(1 << (n - 1 - q))] = amp;
    }
    v
}

/// Outcome of one oracle comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub deviation: f64,
    pub tol: f64,
}

impl OracleCheck {
    pub fn pass(&self) -> bool {
        self.deviation <= self.tol
    }
}

#[derive(Clone, Debug, Default)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(OracleCheck::pass)
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass()).count()
    }

    /// The failing check with the largest deviation relative to its tolerance.
    pub fn worst(&self) -> Option<&OracleCheck> {
        self.checks
            .iter()
            .filter(|c| !c.pass())
            .max_by(|a, b| (a.deviation / a.tol).total_cmp(&(b.deviation / b.tol)))
    }

    fn push(&mut self, name: String, deviation: f64, tol: f64) {
        self.checks.push(OracleCheck { name, deviation, tol });
    }
}

/// Options for [`consistency_suite`].
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Largest `N` in the spectrum comparisons; thermodynamic and reduction
    /// checks stay at `N <= 3`.
    pub max_n: usize,
    pub tol: f64,
    /// Fock cutoff used for DICKE on both sides.
    pub dicke_cutoff: usize,
    /// Perturbs the first comparison; exercises the failure path.
    pub inject_fault: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { max_n: 3, tol: 1e-9, dicke_cutoff: 10, inject_fault: false }
    }
}

pub const SUITE_LAMBDAS: [f64; 2] = [0.3, 0.6];
pub const SUITE_BETAS: [f64; 2] = [0.5, 2.0];
pub const SUITE_BUILD_BETA: f64 = 1.0;
pub const SUITE_PAIR_LAMBDAS: [f64; 2] = [0.3, 0.7];

fn suite_spec(kind: ModelKind, n: usize, lambda: f64, cutoff: usize) -> ModelSpec {
    let s = ModelSpec::new(kind, n, lambda);
    match kind {
        ModelKind::Dicke => s.with_cutoff(cutoff),
        _ => s,
    }
}

fn expanded_sector_spectrum(spec: &ModelSpec) -> Result<Vec<f64>> {
    let mut all = Vec::new();
    for block in sector_spectra(spec, DEFAULT_MAX_DIM)? {
        for &e in &block.eigenvalues {
            all.extend(std::iter::repeat(e).take(block.multiplicity as usize));
        }
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rho_diff(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - b[i][j]).abs());
        }
    }
    worst
}

/// Mutual-consistency checks between the sector path and the brute-force
/// oracle.
pub fn consistency_suite(opts: &SuiteOptions) -> Result<OracleReport> {
    if opts.max_n > MAX_N {
        return Err(Error::OracleGuard(format!("max N {} above {MAX_N}", opts.max_n)));
    }
    let mut report = OracleReport::default();
    let tol = opts.tol;
    let m = opts.dicke_cutoff;
    let fault = if opts.inject_fault { 1e-6 } else { 0.0 };

    // N = 1: the single sector is the full space
    for kind in ModelKind::ALL {
        let spec = suite_spec(kind, 1, 0.6, m).with_beta(SUITE_BUILD_BETA);
        let sector = build_sector_hamiltonian(&spec, SpinSector::symmetric(1)?, DEFAULT_MAX_DIM)?;
        let full = brute_force_hamiltonian(&spec)?;
        let mut dev: f64 = 0.0;
        for i in 0..full.dim() {
            for j in 0..full.dim() {
                dev = dev.max((sector.get(i, j) - full.matrix[(i, j)]).abs());
            }
        }
        report.push(format!("matrix N=1 {kind}"), dev + fault, tol);
    }

    for n in 1..=opts.max_n {
        for kind in ModelKind::ALL {
            for lambda in SUITE_LAMBDAS {
                let spec = suite_spec(kind, n, lambda, m).with_beta(SUITE_BUILD_BETA);
                let a = expanded_sector_spectrum(&spec)?;
                let b = brute_force_spectrum(&spec)?;
                report.push(format!("spectrum {kind} N={n} lambda={lambda}"), max_diff(&a, &b), tol);
            }
        }
    }

    let thermo = ThermoOptions::default();
    for n in 2..=opts.max_n.min(3) {
        for kind in ModelKind::ALL {
            for lambda in SUITE_LAMBDAS {
                for beta in SUITE_BETAS {
                    let spec = suite_spec(kind, n, lambda, m);
                    let a = free_energy_density(&spec.at_beta(beta), beta, &thermo)?.f;
                    let b = brute_force_free_energy(&spec, beta)?;
                    report.push(format!("free energy {kind} N={n} lambda={lambda} beta={beta}"), (a - b).abs(), tol);
                }
            }
        }
    }

    for n in 2..=opts.max_n.min(3) {
        for kind in [ModelKind::Ah, ModelKind::Dicke] {
            for lambda in SUITE_PAIR_LAMBDAS {
                let spec = suite_spec(kind, n, lambda, m);
                let gs = ground_state(&spec, &thermo)?;
                let oracle = brute_force_ground_state(&spec)?;
                report.push(format!("ground energy {kind} N={n} lambda={lambda}"), (gs.energy - oracle.energy).abs(), tol);
                let levels = gs.cutoff.map_or(1, |c| c + 1);
                let moments = collective_moments(&gs.vector, gs.sector, levels)?;
                let rho = reduced_two_qubit(&moments)?;
                let brute = brute_force_pair_reduction(&oracle.vector, n)?;
                report.push(format!("pair reduction {kind} N={n} lambda={lambda}"), rho_diff(rho.matrix(), &brute), tol);
                for (p, q) in [(0, 2), (1, 2), (n - 2, n - 1)] {
                    if q < n && p < q {
                        let other = pair_reduction_on(&oracle.vector, n, p, q)?;
                        report.push(format!("exchange ({p},{q}) {kind} N={n} lambda={lambda}"), rho_diff(&other, &brute), tol);
                    }
                }
            }
        }
    }

    for n in [3usize, 4] {
        if n > opts.max_n.max(3) {
            continue;
        }
        let rho = TwoQubitState::new(brute_force_pair_reduction(&w_state(n), n)?)?;
        let c = wootters_concurrence(&rho)?;
        report.push(format!("W state N={n} concurrence 2/N"), (c - 2.0 / n as f64).abs(), tol);
    }
    Ok(report)
}
