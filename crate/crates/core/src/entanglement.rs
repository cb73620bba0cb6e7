//! Ground-state pairwise concurrence from collective-spin moments.
//!
//! A state in the symmetric sector `J = N/2` is invariant under qubit
//! permutations, so its two-qubit reduced density matrix is fixed by a handful
//! of collective expectations. With parity conserved the matrix is an X-state
//! in the basis `(↑↑, ↑↓, ↓↑, ↓↓)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::{ModelKind, ModelSpec};
use crate::linalg::symmetric_eigen;
use crate::operators::{build_spin_ops, Matrix, SpinSector, SymMatrix};
use crate::thermo::{ground_state, ThermoOptions};

/// Odd-parity moments above this make the X-state reduction invalid.
pub const PARITY_TOL: f64 = 1e-8;

const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollectiveMoments {
    pub jz: f64,
    pub jz2: f64,
    pub jp2: f64,
    pub jp: f64,
    /// `<J+ Jz + Jz J+>`
    pub jp_jz_sym: f64,
    pub n: usize,
    /// The state lives in `J = N/2`.
    pub symmetric: bool,
}

impl CollectiveMoments {
    /// Largest odd-parity moment.
    pub fn parity_moment(&self) -> f64 {
        self.jp.abs().max(self.jp_jz_sym.abs())
    }
}

/// Moments of a normalised state given in the sector basis
/// `photons × spin index` (`boson_dim = 1` for spin-only models).
pub fn collective_moments(state: &[f64], sector: SpinSector, boson_dim: usize) -> Result<CollectiveMoments> {
    let sd = sector.dim();
    if boson_dim == 0 || state.len() != boson_dim * sd {
        return Err(Error::InvalidModel(format!(
            "state length {} does not match {} photon levels x {} spin levels",
            state.len(),
            boson_dim,
            sd
        )));
    }
    let norm: f64 = state.iter().map(|x| x * x).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidModel(format!("state not normalised: |v|^2 = {norm}")));
    }
    let ops = build_spin_ops(sector.twice_j());
    let jz = ops.jz.as_matrix();
    let jz2 = jz.matmul(jz);
    let jp2 = ops.jp.matmul(&ops.jp);
    let jp_jz = ops.jp.matmul(jz);
    let jz_jp = jz.matmul(&ops.jp);
    let sym = Matrix::from_row_major(
        sd,
        sd,
        jp_jz.as_slice().iter().zip(jz_jp.as_slice()).map(|(a, b)| a + b).collect(),
    );
    let expect = |op: &Matrix| -> f64 {
        state.chunks(sd).map(|v| op.quadratic_form(v, v)).sum()
    };
    Ok(CollectiveMoments {
        jz: expect(jz),
        jz2: expect(&jz2),
        jp2: expect(&jp2),
        jp: expect(&ops.jp),
        jp_jz_sym: expect(&sym),
        n: sector.n(),
        symmetric: sector.twice_j() == sector.n(),
    })
}

/// Validated two-qubit density matrix, basis `(↑↑, ↑↓, ↓↑, ↓↓)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitState {
    rho: [[f64; 4]; 4],
}

impl TwoQubitState {
    pub fn new(rho: [[f64; 4]; 4]) -> Result<Self> {
        for i in 0..4 {
            for j in 0..i {
                if (rho[i][j] - rho[j][i]).abs() > STATE_TOL {
                    return Err(Error::InvalidDensityMatrix(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        let trace: f64 = (0..4).map(|i| rho[i][i]).sum();
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        // swap exchanges basis states 1 and 2
        let swap = [0usize, 2, 1, 3];
        for i in 0..4 {
            for j in 0..4 {
                if (rho[i][j] - rho[swap[i]][swap[j]]).abs() > STATE_TOL {
                    return Err(Error::InvalidDensityMatrix("not exchange symmetric".into()));
                }
            }
        }
        let low = eigenvalues(&rho)?[0];
        if low < -STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {low}")));
        }
        Ok(TwoQubitState { rho })
    }

    pub fn matrix(&self) -> &[[f64; 4]; 4] {
        &self.rho
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rho[i][j]
    }

    pub fn max_abs_diff(&self, other: &TwoQubitState) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.rho[i][j] - other.rho[i][j]).abs());
            }
        }
        worst
    }
}

fn to_sym(m: &[[f64; 4]; 4]) -> SymMatrix {
    SymMatrix::from_upper_fn(4, |i, j| 0.5 * (m[i][j] + m[j][i]))
}

fn eigenvalues(m: &[[f64; 4]; 4]) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(&to_sym(m), false)?.values)
}

/// X-state reduction of a parity-symmetric state in `J = N/2`.
pub fn reduced_two_qubit(m: &CollectiveMoments) -> Result<TwoQubitState> {
    if m.n < 2 {
        return Err(Error::InvalidModel(format!("pair reduction needs N >= 2, got {}", m.n)));
    }
    if !m.symmetric {
        return Err(Error::InvalidModel("pair reduction needs the J = N/2 sector".into()));
    }
    if m.jp.abs() >= PARITY_TOL {
        return Err(Error::ParityViolation { name: "<J+>", value: m.jp });
    }
    if m.jp_jz_sym.abs() >= PARITY_TOL {
        return Err(Error::ParityViolation { name: "<J+Jz+JzJ+>", value: m.jp_jz_sym });
    }
    let n = m.n as f64;
    let denom = 4.0 * n * (n - 1.0);
    let base = n * n - 2.0 * n + 4.0 * m.jz2;
    let tilt = 4.0 * m.jz * (n - 1.0);
    let vp = (base + tilt) / denom;
    let vm = (base - tilt) / denom;
    let w = (n * n - 4.0 * m.jz2) / denom;
    let u = m.jp2 / (n * (n - 1.0));
    TwoQubitState::new([[vp, 0.0, 0.0, u], [0.0, w, w, 0.0], [0.0, w, w, 0.0], [u, 0.0, 0.0, vm]])
}

/// `σy ⊗ σy`, which is real.
const SYSY: [[f64; 4]; 4] = [[0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]];

/// Wootters concurrence. With `ρ = F Fᵀ` the nonzero eigenvalues of `ρ ρ̃`
/// are the squares of those of the symmetric `A = Fᵀ (σy⊗σy) F`, so
/// `√μ_i = |eig(A)|` and no square root of a small eigenvalue of `ρ ρ̃` is
/// taken.
pub fn wootters_concurrence(state: &TwoQubitState) -> Result<f64> {
    let es = symmetric_eigen(&to_sym(state.matrix()), true)?;
    let vecs = es.vectors.expect("vectors requested");
    // columns of F
    let f: Vec<[f64; 4]> = es
        .values
        .iter()
        .zip(&vecs)
        .map(|(val, v)| {
            let s = val.max(0.0).sqrt();
            [s * v[0], s * v[1], s * v[2], s * v[3]]
        })
        .collect();
    let mut a = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    a[i][j] += f[i][k] * SYSY[k][l] * f[j][l];
                }
            }
        }
    }
    let mut l: Vec<f64> = eigenvalues(&a)?.into_iter().map(f64::abs).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrenceRow {
    pub lambda: f64,
    pub concurrence: f64,
    /// `(N − 1)·C`
    pub rescaled: f64,
    pub parity_moment: f64,
    pub parity_flag: bool,
    /// Lowest even and odd levels lie within `1e-10`.
    pub degenerate: bool,
    pub cutoff: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ConcurrenceScan {
    pub kind: ModelKind,
    pub n: usize,
    pub rows: Vec<ConcurrenceRow>,
    pub argmax_lambda: f64,
    pub max_concurrence: f64,
}

impl ConcurrenceScan {
    pub fn max_rescaled(&self) -> f64 {
        (self.n as f64 - 1.0) * self.max_concurrence
    }
}

/// Ground-state concurrence over a λ grid. CT at zero temperature is AH;
/// LZ has no zero-temperature limit and is rejected.
pub fn concurrence_at(kind: ModelKind, n: usize, lambda: f64, epsilon: f64, opts: &ThermoOptions) -> Result<ConcurrenceRow> {
    let kind = match kind {
        ModelKind::Ct => ModelKind::Ah,
        ModelKind::Lz => {
            return Err(Error::InvalidModel("LZ has no zero-temperature limit".into()));
        }
        k => k,
    };
    let spec = ModelSpec::new(kind, n, lambda).with_epsilon(epsilon);
    let gs = ground_state(&spec, opts)?;
    let boson_dim = gs.cutoff.map_or(1, |m| m + 1);
    let m = collective_moments(&gs.vector, gs.sector, boson_dim)?;
    let c = wootters_concurrence(&reduced_two_qubit(&m)?)?;
    Ok(ConcurrenceRow {
        lambda,
        concurrence: c,
        rescaled: (n as f64 - 1.0) * c,
        parity_moment: m.parity_moment(),
        parity_flag: m.parity_moment() >= PARITY_TOL,
        degenerate: gs.is_degenerate(),
        cutoff: gs.cutoff,
    })
}

pub fn concurrence_scan(
    kind: ModelKind,
    n: usize,
    lambda_grid: &[f64],
    epsilon: f64,
    opts: &ThermoOptions,
) -> Result<ConcurrenceScan> {
    if lambda_grid.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    let rows: Vec<ConcurrenceRow> = lambda_grid
        .par_iter()
        .map(|&l| concurrence_at(kind, n, l, epsilon, opts))
        .collect::<Result<_>>()?;
    // first maximum wins
    let best = rows.iter().fold(&rows[0], |b, r| if r.concurrence > b.concurrence { r } else { b });
    Ok(ConcurrenceScan {
        kind,
        n,
        argmax_lambda: best.lambda,
        max_concurrence: best.concurrence,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w_moments() -> CollectiveMoments {
        // |J=3/2, m=-1/2>
        let sector = SpinSector::symmetric(3).unwrap();
        collective_moments(&[0.0, 0.0, 1.0, 0.0], sector, 1).unwrap()
    }

    #[test]
    fn w_state() {
        let m = w_moments();
        assert_eq!(m.jz, -0.5);
        assert!((m.jz2 - 0.25).abs() < 1e-15);
        let rho = reduced_two_qubit(&m).unwrap();
        assert!((rho.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((rho.get(3, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!(rho.get(0, 0).abs() < 1e-15);
        assert!((wootters_concurrence(&rho).unwrap() - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn all_down() {
        let sector = SpinSector::symmetric(5).unwrap();
        let mut v = vec![0.0; 6];
        v[5] = 1.0;
        let m = collective_moments(&v, sector, 1).unwrap();
        assert_eq!((m.jz, m.jz2, m.jp2), (-2.5, 6.25, 0.0));
        let rho = reduced_two_qubit(&m).unwrap();
        assert!((rho.get(3, 3) - 1.0).abs() < 1e-15);
        assert_eq!(wootters_concurrence(&rho).unwrap(), 0.0);
    }

    #[test]
    fn bell_and_werner() {
        let h = 0.5;
        let bell = TwoQubitState::new([[h, 0.0, 0.0, h], [0.0; 4], [0.0; 4], [h, 0.0, 0.0, h]]).unwrap();
        assert!((wootters_concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        for &p in &[0.8, 0.5, 0.3, 0.2] {
            let mut r = [[0.0; 4]; 4];
            for i in 0..4 {
                r[i][i] = (1.0 - p) / 4.0;
            }
            r[0][0] += p / 2.0;
            r[3][3] += p / 2.0;
            r[0][3] = p / 2.0;
            r[3][0] = p / 2.0;
            let c = wootters_concurrence(&TwoQubitState::new(r).unwrap()).unwrap();
            let closed = ((3.0 * p - 1.0) / 2.0f64).max(0.0);
            assert!((c - closed).abs() < 1e-12, "p = {p}: {c} vs {closed}");
        }
    }

    #[test]
    fn invalid_states() {
        let mut r = [[0.0; 4]; 4];
        r[0][0] = 0.5;
        assert!(TwoQubitState::new(r).is_err());
        r[3][3] = 0.5;
        r[0][1] = 0.1;
        assert!(TwoQubitState::new(r).is_err());
        let mut r = [[0.0; 4]; 4];
        r[1][1] = 1.0;
        assert!(TwoQubitState::new(r).is_err(), "swap asymmetric");
        let mut r = [[0.0; 4]; 4];
        r[0][0] = 0.5;
        r[3][3] = 0.5;
        r[0][3] = 0.8;
        r[3][0] = 0.8;
        assert!(TwoQubitState::new(r).is_err(), "not positive");
    }

    #[test]
    fn reduction_errors() {
        let mut m = w_moments();
        m.jp = 1e-6;
        assert!(matches!(reduced_two_qubit(&m), Err(Error::ParityViolation { .. })));
        let sector = SpinSector::symmetric(1).unwrap();
        let m = collective_moments(&[1.0, 0.0], sector, 1).unwrap();
        assert!(reduced_two_qubit(&m).is_err());
        let sector = SpinSector::new(3, 1).unwrap();
        let m = collective_moments(&[1.0, 0.0], sector, 1).unwrap();
        assert!(!m.symmetric);
        assert!(reduced_two_qubit(&m).is_err());
        assert!(collective_moments(&[1.0, 0.0, 0.0], sector, 1).is_err());
    }

    #[test]
    fn zero_coupling_is_unentangled() {
        let opts = ThermoOptions::default();
        for kind in [ModelKind::Dicke, ModelKind::Ah, ModelKind::Ct] {
            let row = concurrence_at(kind, 6, 0.0, 1.0, &opts).unwrap();
            assert_eq!(row.concurrence, 0.0);
        }
        assert!(concurrence_at(ModelKind::Lz, 6, 0.3, 1.0, &opts).is_err());
    }

    #[test]
    fn ah_scan_peaks_near_mean_field_onset() {
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.02).collect();
        let scan = concurrence_scan(ModelKind::Ah, 8, &grid, 1.0, &ThermoOptions::default()).unwrap();
        assert!(scan.rows.iter().all(|r| !r.parity_flag && r.parity_moment < 1e-10));
        assert!(scan.rows.iter().all(|r| (0.0..=1.0).contains(&r.concurrence)));
        assert!((0.4..=0.7).contains(&scan.argmax_lambda), "argmax {}", scan.argmax_lambda);
    }

    proptest::proptest! {
        #[test]
        fn reduction_trace_is_one(jz2 in 0.0f64..16.0, frac in -1.0f64..1.0) {
            let n = 8usize;
            let jz = frac * jz2.sqrt().min(4.0);
            let m = CollectiveMoments { jz, jz2, jp2: 0.0, jp: 0.0, jp_jz_sym: 0.0, n, symmetric: true };
            let nn = n as f64;
            let d = 4.0 * nn * (nn - 1.0);
            let base = nn * nn - 2.0 * nn + 4.0 * jz2;
            let tilt = 4.0 * jz * (nn - 1.0);
            let w = (nn * nn - 4.0 * jz2) / d;
            let tr = (base + tilt) / d + 2.0 * w + (base - tilt) / d;
            proptest::prop_assert!((tr - 1.0).abs() < 1e-12);
            // admissible moments may still give an invalid matrix; trace is never the reason
            if let Err(Error::InvalidDensityMatrix(msg)) = reduced_two_qubit(&m) {
                proptest::prop_assert!(!msg.starts_with("trace"));
            }
        }
    }
}
