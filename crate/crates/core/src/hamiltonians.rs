//! The Dicke Hamiltonian and its three collective-spin rivals.
//!
//! With `ħ = ω = 1`:
//!
//! ```text
//! DICKE  a†a + ε Jz − (2λ/√N)(a + a†) Jx
//! CT     ε Jz − κ_CT(β) (4λ²/N) Jx²     κ_CT = 1 + 2/(β(h(β) + 1))
//! LZ     ε Jz − κ_LZ(β) (4λ²/N) Jx²     κ_LZ = (β/2) coth(β/2)
//! AH     ε Jz −          (4λ²/N) Jx²
//! ```
//!
//! The three spin models share one builder parameterised by `κ`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::operators::{
    build_boson_ops, build_spin_ops, kron_sym, ladder_element, m_of_index, SpinSector, SymMatrix,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Dicke,
    Ct,
    Lz,
    Ah,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Dicke, ModelKind::Ct, ModelKind::Lz, ModelKind::Ah];

    pub fn has_boson(self) -> bool {
        self == ModelKind::Dicke
    }

    pub fn needs_beta(self) -> bool {
        matches!(self, ModelKind::Ct | ModelKind::Lz)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Dicke => "DICKE",
            ModelKind::Ct => "CT",
            ModelKind::Lz => "LZ",
            ModelKind::Ah => "AH",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DICKE" => Ok(ModelKind::Dicke),
            "CT" => Ok(ModelKind::Ct),
            "LZ" => Ok(ModelKind::Lz),
            "AH" => Ok(ModelKind::Ah),
            other => Err(Error::InvalidModel(format!("unknown model kind {other:?}"))),
        }
    }
}

/// A Hamiltonian with its parameters.
///
/// `beta` is the inverse temperature the CT/LZ coefficient is built at. When it
/// is `None`, thermal routines build at the trace temperature. `cutoff` is the
/// Fock cutoff `M` for DICKE; `None` lets thermal routines choose it.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub beta: Option<f64>,
    pub cutoff: Option<usize>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, n: usize, lambda: f64) -> Self {
        Self { kind, n, epsilon: 1.0, lambda, beta: None, cutoff: None }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidModel("N must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidModel(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidModel(format!("lambda must be finite, got {}", self.lambda)));
        }
        if let Some(b) = self.beta {
            check_beta(b)?;
        }
        Ok(())
    }

    /// Same model with the CT/LZ coefficient built at `beta` unless already pinned.
    pub fn at_beta(&self, beta: f64) -> ModelSpec {
        let mut s = self.clone();
        if s.kind.needs_beta() && s.beta.is_none() {
            s.beta = Some(beta);
        }
        s
    }

    /// `κ · 4λ²/N`, the magnitude of the `Jx²` term. Fails for DICKE.
    pub fn jx2_prefactor(&self) -> Result<f64> {
        let k = kappa(self.kind, self.beta)?;
        Ok(k * 4.0 * self.lambda * self.lambda / self.n as f64)
    }

    /// `2λ/√N`, the DICKE coupling.
    pub fn dicke_coupling(&self) -> f64 {
        2.0 * self.lambda / (self.n as f64).sqrt()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveBeta(beta))
    }
}

/// Mean photon number of a free mode, `1/(e^β − 1)`.
pub fn bose_factor(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(1.0 / beta.exp_m1())
}

/// Coefficient multiplying `(2λ/√N)² Jx²`.
pub fn kappa(kind: ModelKind, beta: Option<f64>) -> Result<f64> {
    match kind {
        ModelKind::Dicke => Err(Error::NoKappa(kind)),
        ModelKind::Ah => Ok(1.0),
        ModelKind::Ct => {
            let b = beta.ok_or(Error::NonPositiveBeta(f64::NAN))?;
            let h = bose_factor(b)?;
            Ok(1.0 + 2.0 / (b * (h + 1.0)))
        }
        ModelKind::Lz => {
            let b = beta.ok_or(Error::NonPositiveBeta(f64::NAN))?;
            check_beta(b)?;
            let x = 0.5 * b;
            Ok(x / x.tanh())
        }
    }
}

/// Dense sector Hamiltonian, assembled literally from Kronecker products.
pub fn build_sector_hamiltonian(spec: &ModelSpec, sector: SpinSector, max_dim: usize) -> Result<SymMatrix> {
    spec.validate()?;
    if sector.n() != spec.n {
        return Err(Error::InvalidSector { n: spec.n, twice_j: sector.twice_j() });
    }
    let spin = build_spin_ops(sector.twice_j());
    match spec.kind {
        ModelKind::Dicke => {
            let m = spec.cutoff.ok_or_else(|| Error::InvalidModel("DICKE needs a Fock cutoff".into()))?;
            let dim = (m + 1) * sector.dim();
            if dim > max_dim {
                return Err(Error::DimensionGuard { dim, max: max_dim });
            }
            let boson = build_boson_ops(m);
            let i_s = SymMatrix::identity(sector.dim());
            let i_b = SymMatrix::identity(m + 1);
            let num = kron_sym(&boson.num, &i_s, max_dim)?;
            let jz = kron_sym(&i_b, &spin.jz, max_dim)?;
            let coupling = kron_sym(&boson.x, &spin.jx, max_dim)?;
            Ok(num.add_scaled(spec.epsilon, &jz).add_scaled(-spec.dicke_coupling(), &coupling))
        }
        _ => {
            if sector.dim() > max_dim {
                return Err(Error::DimensionGuard { dim: sector.dim(), max: max_dim });
            }
            let c = spec.jx2_prefactor()?;
            Ok(spin.jz.scaled(spec.epsilon).add_scaled(-c, &spin.jx2))
        }
    }
}

/// Eigenvalue of `(−1)^{a†a + Jz + J}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn of(excitations: usize) -> Parity {
        if excitations % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Clone, Debug)]
pub enum BlockMatrix {
    Dense(SymMatrix),
    Band(BandMatrix),
}

impl BlockMatrix {
    pub fn dim(&self) -> usize {
        match self {
            BlockMatrix::Dense(m) => m.dim(),
            BlockMatrix::Band(b) => b.dim(),
        }
    }

    pub fn to_dense(&self) -> SymMatrix {
        match self {
            BlockMatrix::Dense(m) => m.clone(),
            BlockMatrix::Band(b) => b.to_dense(),
        }
    }
}

/// One parity half of a sector Hamiltonian. `basis[k] = (photons, spin index)`
/// in the ordering of [`build_sector_hamiltonian`]; spin-only models use
/// `photons = 0` throughout.
#[derive(Clone, Debug)]
pub struct ParityBlock {
    pub sector: SpinSector,
    pub parity: Parity,
    pub boson_dim: usize,
    pub basis: Vec<(usize, usize)>,
    pub matrix: BlockMatrix,
}

impl ParityBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Embeds a block vector into the full sector basis.
    pub fn embed(&self, v: &[f64]) -> Vec<f64> {
        let sd = self.sector.dim();
        let mut full = vec![0.0; self.boson_dim * sd];
        for (x, &(n, mi)) in v.iter().zip(&self.basis) {
            full[n * sd + mi] = *x;
        }
        full
    }
}

/// Splits a sector into its parity blocks (even first). DICKE blocks are
/// banded; an empty block is omitted.
pub fn build_parity_blocks(spec: &ModelSpec, sector: SpinSector, max_dim: usize) -> Result<Vec<ParityBlock>> {
    spec.validate()?;
    if sector.n() != spec.n {
        return Err(Error::InvalidSector { n: spec.n, twice_j: sector.twice_j() });
    }
    let tj = sector.twice_j();
    let sd = sector.dim();
    let boson_dim = match spec.kind {
        ModelKind::Dicke => {
            spec.cutoff.ok_or_else(|| Error::InvalidModel("DICKE needs a Fock cutoff".into()))? + 1
        }
        _ => 1,
    };
    let full_dim = boson_dim * sd;
    if full_dim > max_dim {
        return Err(Error::DimensionGuard { dim: full_dim, max: max_dim });
    }

    let mut blocks = Vec::with_capacity(2);
    for parity in [Parity::Even, Parity::Odd] {
        let basis: Vec<(usize, usize)> = (0..boson_dim)
            .flat_map(|n| (0..sd).map(move |mi| (n, mi)))
            .filter(|&(n, mi)| Parity::of(n + tj - mi) == parity)
            .collect();
        if basis.is_empty() {
            continue;
        }
        let mut pos = vec![usize::MAX; full_dim];
        for (k, &(n, mi)) in basis.iter().enumerate() {
            pos[n * sd + mi] = k;
        }
        let matrix = match spec.kind {
            ModelKind::Dicke => {
                let g = spec.dicke_coupling();
                // (n, mi) -> (n+1, mi±1): collect the couplings, then size the band
                let mut links = Vec::new();
                for (k, &(n, mi)) in basis.iter().enumerate() {
                    if n + 1 >= boson_dim {
                        continue;
                    }
                    let amp = -g * ((n + 1) as f64).sqrt();
                    let m = m_of_index(tj, mi);
                    if mi > 0 {
                        // spin index mi-1 holds m+1
                        let t = pos[(n + 1) * sd + mi - 1];
                        links.push((t, k, amp * 0.5 * ladder_element(tj, m)));
                    }
                    if mi + 1 < sd {
                        let t = pos[(n + 1) * sd + mi + 1];
                        links.push((t, k, amp * 0.5 * ladder_element(tj, m - 1.0)));
                    }
                }
                let kd = links.iter().map(|&(t, k, _)| t - k).max().unwrap_or(0);
                let mut band = BandMatrix::zeros(basis.len(), kd);
                for (k, &(n, mi)) in basis.iter().enumerate() {
                    band.set(k, k, n as f64 + spec.epsilon * m_of_index(tj, mi));
                }
                for (t, k, v) in links {
                    band.set(t, k, v);
                }
                BlockMatrix::Band(band)
            }
            _ => {
                let spin = build_spin_ops(tj);
                let c = spec.jx2_prefactor()?;
                let h = spin.jz.scaled(spec.epsilon).add_scaled(-c, &spin.jx2);
                let idx: Vec<usize> = basis.iter().map(|&(_, mi)| mi).collect();
                BlockMatrix::Dense(h.submatrix(&idx))
            }
        };
        blocks.push(ParityBlock { sector, parity, boson_dim, basis, matrix });
    }
    Ok(blocks)
}

/// Lower edge of the "large β" window used for the LZ slope fit.
pub const BLOWUP_FIT_FROM: f64 = 50.0;

#[derive(Clone, Debug)]
pub struct BlowupReport {
    pub lambda: f64,
    pub n: usize,
    /// `(β, κ_LZ(β)·4λ²/N)`.
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of the prefactor over grid points with `β >= 50`.
    pub slope: Option<f64>,
    /// `2λ²/N`, the large-β slope of `(β/2)coth(β/2)·4λ²/N`.
    pub asymptotic_slope: f64,
}

/// Tabulates the LZ `Jx²` prefactor against β. It grows without bound as
/// β → ∞, so `exp(−β H_LZ)` stops being trace class in that limit.
pub fn coefficient_blowup_report(lambda: f64, n: usize, beta_grid: &[f64]) -> Result<BlowupReport> {
    if beta_grid.is_empty() {
        return Err(Error::Empty("beta grid"));
    }
    if n == 0 {
        return Err(Error::InvalidModel("N must be at least 1".into()));
    }
    let rows = beta_grid
        .iter()
        .map(|&b| Ok((b, kappa(ModelKind::Lz, Some(b))? * 4.0 * lambda * lambda / n as f64)))
        .collect::<Result<Vec<_>>>()?;
    let window: Vec<(f64, f64)> = rows.iter().copied().filter(|&(b, _)| b >= BLOWUP_FIT_FROM).collect();
    let slope = (window.len() >= 2).then(|| {
        let k = window.len() as f64;
        let mx = window.iter().map(|p| p.0).sum::<f64>() / k;
        let my = window.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = window.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = window.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(BlowupReport { lambda, n, rows, slope, asymptotic_slope: 2.0 * lambda * lambda / n as f64 })
}
