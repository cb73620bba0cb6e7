//! Spectra and finite-N thermodynamics.
//!
//! Traces always run over every `J` sector weighted by its multiplicity, so
//! `Tr` is the trace over the full `2^N` spin space (times the truncated Fock
//! space for DICKE). Blocks are diagonalized in parallel but reduced in a
//! fixed order (J descending, even parity first, eigenvalues ascending), so
//! results do not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::{build_parity_blocks, BlockMatrix, ModelKind, ModelSpec, Parity, ParityBlock};
use crate::linalg::{band_eigenvalues, band_lowest_eigenpair, symmetric_eigen};
use crate::operators::{build_spin_ops, m_of_index, SpinSector, SymMatrix, DEFAULT_MAX_DIM};

pub const DEFAULT_CUTOFF_TOL: f64 = 1e-9;

/// Splittings below this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ThermoOptions {
    /// Convergence tolerance of the adaptive Fock cutoff.
    pub tol_cutoff: f64,
    /// Largest sector matrix dimension any step may build.
    pub max_dim: usize,
    /// Compute thermal expectations (needs eigenvectors, `O(dim³)` per block).
    pub expectations: bool,
}

impl Default for ThermoOptions {
    fn default() -> Self {
        Self { tol_cutoff: DEFAULT_CUTOFF_TOL, max_dim: DEFAULT_MAX_DIM, expectations: false }
    }
}

impl ThermoOptions {
    pub fn with_expectations(mut self) -> Self {
        self.expectations = true;
        self
    }
}

/// Spectral decomposition of one matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

pub fn eigensystem(h: &SymMatrix, want_vectors: bool) -> Result<Spectrum> {
    let es = symmetric_eigen(h, want_vectors)?;
    Ok(Spectrum { eigenvalues: es.values, eigenvectors: es.vectors })
}

/// Eigenvalues of one parity block with the multiplicity of its sector.
#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    pub sector: SpinSector,
    pub parity: Parity,
    pub multiplicity: u128,
    pub eigenvalues: Vec<f64>,
}

/// `ln Σ_blocks d Σ_k exp(−β E_k)`, shifted by the global minimum.
pub fn log_partition(blocks: &[(&[f64], u128)], beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let emin = global_min(blocks.iter().map(|b| b.0))?;
    let mut sum = 0.0;
    for (values, mult) in blocks {
        let s: f64 = values.iter().map(|e| (-beta * (e - emin)).exp()).sum();
        sum += *mult as f64 * s;
    }
    Ok(-beta * emin + sum.ln())
}

fn global_min<'a>(blocks: impl Iterator<Item = &'a [f64]>) -> Result<f64> {
    let mut emin = f64::INFINITY;
    let mut any = false;
    for values in blocks {
        for &e in values {
            any = true;
            emin = emin.min(e);
        }
    }
    if any {
        Ok(emin)
    } else {
        Err(Error::Empty("spectrum blocks"))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveBeta(beta))
    }
}

fn block_eigenvalues(block: &ParityBlock) -> Result<Vec<f64>> {
    match &block.matrix {
        BlockMatrix::Dense(m) => Ok(symmetric_eigen(m, false)?.values),
        BlockMatrix::Band(b) => band_eigenvalues(b),
    }
}

fn all_blocks(spec: &ModelSpec, max_dim: usize) -> Result<Vec<ParityBlock>> {
    let mut blocks = Vec::new();
    for sector in SpinSector::all(spec.n)? {
        blocks.extend(build_parity_blocks(spec, sector, max_dim)?);
    }
    Ok(blocks)
}

/// Eigenvalues of every parity block of every sector. `spec` must be fully
/// specified (β for CT/LZ, cutoff for DICKE).
pub fn sector_spectra(spec: &ModelSpec, max_dim: usize) -> Result<Vec<BlockSpectrum>> {
    spectra_of(all_blocks(spec, max_dim)?)
}

fn spectra_of(blocks: Vec<ParityBlock>) -> Result<Vec<BlockSpectrum>> {
    blocks
        .into_par_iter()
        .map(|b| {
            Ok(BlockSpectrum {
                sector: b.sector,
                parity: b.parity,
                multiplicity: b.sector.multiplicity(),
                eigenvalues: block_eigenvalues(&b)?,
            })
        })
        .collect()
}

fn ln_z_of(spectra: &[BlockSpectrum], beta: f64) -> Result<f64> {
    let blocks: Vec<(&[f64], u128)> = spectra.iter().map(|b| (b.eigenvalues.as_slice(), b.multiplicity)).collect();
    log_partition(&blocks, beta)
}

/// Thermal expectations; `photons_per_n` is `None` for the spin-only models.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectations {
    pub photons_per_n: Option<f64>,
    pub jx2_per_n2: f64,
    pub jz_per_n: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThermoResult {
    pub kind: ModelKind,
    pub n: usize,
    pub beta: f64,
    /// Fock cutoff actually used (DICKE only).
    pub cutoff: Option<usize>,
    pub ln_z: f64,
    /// Free energy per spin.
    pub f: f64,
    /// Internal energy per spin.
    pub u: f64,
    /// Entropy per spin.
    pub s: f64,
    pub expectations: Option<Expectations>,
}

/// `f_N = −ln Tr exp(−βH) / (βN)` and friends at inverse temperature `beta`.
///
/// CT/LZ are built at `beta` unless `spec.beta` pins a different value. DICKE
/// uses `spec.cutoff` when given, otherwise [`adaptive_cutoff`].
pub fn free_energy_density(spec: &ModelSpec, beta: f64, opts: &ThermoOptions) -> Result<ThermoResult> {
    spec.validate()?;
    check_beta(beta)?;
    let mut s = spec.at_beta(beta);
    if s.kind == ModelKind::Dicke && s.cutoff.is_none() {
        s.cutoff = Some(adaptive_cutoff(&s, beta, opts.tol_cutoff, opts.max_dim)?.cutoff);
    }
    if opts.expectations {
        thermo_with_vectors(&s, beta, opts.max_dim)
    } else {
        let spectra = sector_spectra(&s, opts.max_dim)?;
        Ok(thermo_from_spectra(&s, beta, &spectra)?)
    }
}

fn thermo_from_spectra(spec: &ModelSpec, beta: f64, spectra: &[BlockSpectrum]) -> Result<ThermoResult> {
    let ln_z = ln_z_of(spectra, beta)?;
    let emin = global_min(spectra.iter().map(|b| b.eigenvalues.as_slice()))?;
    let (mut z, mut excess) = (0.0, 0.0);
    for b in spectra {
        let d = b.multiplicity as f64;
        for &e in &b.eigenvalues {
            let w = d * (-beta * (e - emin)).exp();
            z += w;
            excess += w * (e - emin);
        }
    }
    Ok(assemble(spec, beta, ln_z, emin + excess / z, None))
}

fn assemble(spec: &ModelSpec, beta: f64, ln_z: f64, mean_energy: f64, ex: Option<Expectations>) -> ThermoResult {
    let n = spec.n as f64;
    let f = -ln_z / (beta * n);
    let u = mean_energy / n;
    ThermoResult {
        kind: spec.kind,
        n: spec.n,
        beta,
        cutoff: if spec.kind == ModelKind::Dicke { spec.cutoff } else { None },
        ln_z,
        f,
        u,
        s: beta * (u - f),
        expectations: ex,
    }
}

struct VectorBlock {
    multiplicity: u128,
    values: Vec<f64>,
    photons: f64,
    jz: f64,
    jx2: f64,
}

/// Thermodynamics plus expectations from full eigendecompositions.
fn thermo_with_vectors(spec: &ModelSpec, beta: f64, max_dim: usize) -> Result<ThermoResult> {
    let blocks = all_blocks(spec, max_dim)?;
    let computed: Vec<(Vec<f64>, Vec<Vec<f64>>)> = blocks
        .par_iter()
        .map(|b| {
            let es = symmetric_eigen(&b.matrix.to_dense(), true)?;
            Ok((es.values, es.vectors.expect("vectors requested")))
        })
        .collect::<Result<_>>()?;
    let emin = global_min(computed.iter().map(|c| c.0.as_slice()))?;

    let per_block: Vec<VectorBlock> = blocks
        .par_iter()
        .zip(computed.par_iter())
        .map(|(block, (values, vectors))| {
            let tj = block.sector.twice_j();
            let jx2 = build_spin_ops(tj).jx2;
            let pos = block_positions(block);
            let (mut photons, mut jz, mut jx2_sum) = (0.0, 0.0, 0.0);
            for (e, v) in values.iter().zip(vectors) {
                let w = (-beta * (e - emin)).exp();
                if w == 0.0 {
                    continue;
                }
                let (mut p, mut z, mut x) = (0.0, 0.0, 0.0);
                for (k, &(n, mi)) in block.basis.iter().enumerate() {
                    let c2 = v[k] * v[k];
                    p += n as f64 * c2;
                    z += m_of_index(tj, mi) * c2;
                    let lo = mi.saturating_sub(2);
                    let hi = (mi + 2).min(tj);
                    for mj in lo..=hi {
                        let a = jx2.get(mi, mj);
                        if a != 0.0 {
                            if let Some(t) = pos.get(&(n, mj)) {
                                x += v[k] * a * v[*t];
                            }
                        }
                    }
                }
                photons += w * p;
                jz += w * z;
                jx2_sum += w * x;
            }
            VectorBlock { multiplicity: block.sector.multiplicity(), values: values.clone(), photons, jz, jx2: jx2_sum }
        })
        .collect();

    let (mut z, mut excess, mut photons, mut jz, mut jx2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for b in &per_block {
        let d = b.multiplicity as f64;
        for &e in &b.values {
            let w = d * (-beta * (e - emin)).exp();
            z += w;
            excess += w * (e - emin);
        }
        photons += d * b.photons;
        jz += d * b.jz;
        jx2 += d * b.jx2;
    }
    let ln_z = -beta * emin + z.ln();
    let n = spec.n as f64;
    let ex = Expectations {
        photons_per_n: spec.kind.has_boson().then(|| photons / z / n),
        jx2_per_n2: jx2 / z / (n * n),
        jz_per_n: jz / z / n,
    };
    Ok(assemble(spec, beta, ln_z, emin + excess / z, Some(ex)))
}

fn block_positions(block: &ParityBlock) -> std::collections::HashMap<(usize, usize), usize> {
    block.basis.iter().enumerate().map(|(k, &nm)| (nm, k)).collect()
}

/// Outcome of the Fock-cutoff doubling loop.
#[derive(Clone, Debug)]
pub struct CutoffReport {
    pub cutoff: usize,
    /// `f_N` at the accepted cutoff and at twice it.
    pub f: f64,
    pub f_doubled: f64,
    /// Upper bound on the thermal population of the two highest Fock levels.
    pub top_population: f64,
    /// Every cutoff tried, in order.
    pub tried: Vec<usize>,
}

pub fn initial_cutoff(spec: &ModelSpec) -> usize {
    16usize.max((8.0 * spec.lambda * spec.lambda * spec.n as f64).ceil() as usize)
}

fn with_cutoff(spec: &ModelSpec, m: usize) -> ModelSpec {
    let mut s = spec.clone();
    s.cutoff = Some(m);
    s
}

fn largest_block(spec: &ModelSpec, m: usize) -> usize {
    (m + 1) * (spec.n + 1)
}

/// Doubles the Fock cutoff from `max(16, ⌈8λ²N⌉)` until `|f(M) − f(2M)| < tol`
/// and the two highest Fock levels hold less than `tol` of the thermal weight.
///
/// The population is bounded from above without eigenvectors: `ln Z` is convex
/// in a perturbation `−μP`, so `⟨P⟩ ≤ (ln Z[H − μP] − ln Z[H])/(βμ)`; we take
/// `βμ = 1`.
pub fn adaptive_cutoff(spec: &ModelSpec, beta: f64, tol: f64, max_dim: usize) -> Result<CutoffReport> {
    if spec.kind != ModelKind::Dicke {
        return Err(Error::InvalidModel(format!("{} has no boson cutoff", spec.kind)));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidModel(format!("cutoff tolerance must be positive, got {tol}")));
    }
    spec.validate()?;
    check_beta(beta)?;
    let mut m = initial_cutoff(spec);
    if largest_block(spec, m) > max_dim {
        return Err(Error::CutoffInsufficient { cutoff: m, max_dim });
    }
    let n = spec.n as f64;
    let mut tried = vec![m];
    let mut ln_z = ln_z_of(&sector_spectra(&with_cutoff(spec, m), max_dim)?, beta)?;
    loop {
        let pop = top_population_bound(spec, m, beta, ln_z, max_dim)?;
        if largest_block(spec, 2 * m) > max_dim {
            return Err(Error::CutoffInsufficient { cutoff: m, max_dim });
        }
        let ln_z2 = ln_z_of(&sector_spectra(&with_cutoff(spec, 2 * m), max_dim)?, beta)?;
        let (f, f2) = (-ln_z / (beta * n), -ln_z2 / (beta * n));
        if (f - f2).abs() < tol && pop < tol {
            return Ok(CutoffReport { cutoff: m, f, f_doubled: f2, top_population: pop, tried });
        }
        m *= 2;
        tried.push(m);
        ln_z = ln_z2;
    }
}

fn top_population_bound(spec: &ModelSpec, m: usize, beta: f64, ln_z: f64, max_dim: usize) -> Result<f64> {
    let mu = 1.0 / beta;
    let mut blocks = all_blocks(&with_cutoff(spec, m), max_dim)?;
    for b in &mut blocks {
        let BlockMatrix::Band(band) = &mut b.matrix else {
            unreachable!("DICKE blocks are banded");
        };
        for (k, &(photons, _)) in b.basis.iter().enumerate() {
            if photons + 1 >= m {
                band.add(k, k, -mu);
            }
        }
    }
    let shifted = spectra_of(blocks)?;
    let ln_z_shifted = ln_z_of(&shifted, beta)?;
    Ok(((ln_z_shifted - ln_z) / (beta * mu)).max(0.0))
}

/// Lowest eigenvalue found in one parity block.
#[derive(Clone, Copy, Debug)]
pub struct BlockMinimum {
    pub sector: SpinSector,
    pub parity: Parity,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// Normalised, in the full basis of `sector` (`photons × spin index`).
    pub vector: Vec<f64>,
    pub sector: SpinSector,
    pub parity: Parity,
    pub cutoff: Option<usize>,
    /// `E_odd − E_even` of the lowest states in the winning sector, if both exist.
    pub parity_splitting: Option<f64>,
    /// Whether the `J = N/2` sector holds the global minimum.
    pub symmetric_sector_wins: bool,
    pub minima: Vec<BlockMinimum>,
}

impl GroundState {
    pub fn is_degenerate(&self) -> bool {
        self.parity_splitting.is_some_and(|s| s.abs() < DEGENERACY_TOL)
    }
}

/// Global ground state across all sectors and parities. Ties within
/// [`DEGENERACY_TOL`] go to the larger `J`, then to even parity.
pub fn ground_state(spec: &ModelSpec, opts: &ThermoOptions) -> Result<GroundState> {
    spec.validate()?;
    if spec.kind.needs_beta() && spec.beta.is_none() {
        return Err(Error::InvalidModel(format!("{} ground state needs a build beta", spec.kind)));
    }
    let mut s = spec.clone();
    if s.kind == ModelKind::Dicke && s.cutoff.is_none() {
        s.cutoff = Some(adaptive_ground_cutoff(&s, opts.tol_cutoff, opts.max_dim)?);
    }
    let blocks = all_blocks(&s, opts.max_dim)?;
    let minima = block_minima(&blocks)?;
    let emin = minima.iter().map(|b| b.energy).fold(f64::INFINITY, f64::min);
    let tie = DEGENERACY_TOL * emin.abs().max(1.0);
    let winner = minima
        .iter()
        .enumerate()
        .filter(|(_, b)| b.energy - emin <= tie)
        .min_by(|(_, a), (_, b)| b.sector.twice_j().cmp(&a.sector.twice_j()).then(a.parity.cmp(&b.parity)))
        .map(|(i, _)| i)
        .expect("at least one block");
    let block = &blocks[winner];
    let (energy, v) = lowest_pair(block)?;
    let parity_splitting = {
        let even = minima.iter().find(|b| b.sector == block.sector && b.parity == Parity::Even);
        let odd = minima.iter().find(|b| b.sector == block.sector && b.parity == Parity::Odd);
        even.zip(odd).map(|(e, o)| o.energy - e.energy)
    };
    Ok(GroundState {
        energy,
        vector: block.embed(&v),
        sector: block.sector,
        parity: block.parity,
        cutoff: s.cutoff,
        parity_splitting,
        symmetric_sector_wins: minima
            .iter()
            .filter(|b| b.sector.twice_j() == spec.n)
            .any(|b| b.energy - emin <= tie),
        minima,
    })
}

fn block_minima(blocks: &[ParityBlock]) -> Result<Vec<BlockMinimum>> {
    blocks
        .par_iter()
        .map(|b| {
            let values = block_eigenvalues(b)?;
            Ok(BlockMinimum { sector: b.sector, parity: b.parity, energy: values[0] })
        })
        .collect()
}

fn lowest_pair(block: &ParityBlock) -> Result<(f64, Vec<f64>)> {
    match &block.matrix {
        BlockMatrix::Dense(m) => {
            let es = symmetric_eigen(m, true)?;
            let mut v = es.vectors.expect("vectors requested").swap_remove(0);
            let big = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if big < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            Ok((es.values[0], v))
        }
        BlockMatrix::Band(b) => band_lowest_eigenpair(b),
    }
}

/// Zero-temperature analogue of [`adaptive_cutoff`]: doubles `M` until the
/// ground energy per spin moves by less than `tol` and the ground state puts
/// less than `tol` weight on the two highest Fock levels.
pub fn adaptive_ground_cutoff(spec: &ModelSpec, tol: f64, max_dim: usize) -> Result<usize> {
    if spec.kind != ModelKind::Dicke {
        return Err(Error::InvalidModel(format!("{} has no boson cutoff", spec.kind)));
    }
    let mut m = initial_cutoff(spec);
    let n = spec.n as f64;
    if largest_block(spec, m) > max_dim {
        return Err(Error::CutoffInsufficient { cutoff: m, max_dim });
    }
    let global = |m: usize| -> Result<(f64, Vec<ParityBlock>, Vec<BlockMinimum>)> {
        let blocks = all_blocks(&with_cutoff(spec, m), max_dim)?;
        let minima = block_minima(&blocks)?;
        let e = minima.iter().map(|b| b.energy).fold(f64::INFINITY, f64::min);
        Ok((e, blocks, minima))
    };
    let (mut e0, mut blocks, mut minima) = global(m)?;
    loop {
        let best = minima
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (_, v) = lowest_pair(&blocks[best])?;
        let pop: f64 = blocks[best]
            .basis
            .iter()
            .zip(&v)
            .filter(|((photons, _), _)| photons + 1 >= m)
            .map(|(_, x)| x * x)
            .sum();
        if largest_block(spec, 2 * m) > max_dim {
            return Err(Error::CutoffInsufficient { cutoff: m, max_dim });
        }
        let (e2, blocks2, minima2) = global(2 * m)?;
        if ((e0 - e2) / n).abs() < tol && pop < tol {
            return Ok(m);
        }
        m *= 2;
        e0 = e2;
        blocks = blocks2;
        minima = minima2;
    }
}
