//! Collective spin and truncated boson operators.
//!
//! Spin matrices live in the `|J, m>` basis ordered `m = J, J-1, ..., -J`, boson
//! matrices in the Fock basis `|0>, ..., |M>`. Both bases make every operator
//! entering the Hamiltonians real, so everything here is `f64`.

use crate::error::{Error, Result};

/// Default ceiling on the dimension of any constructed matrix.
pub const DEFAULT_MAX_DIM: usize = 20_000;

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `<u|A|v>`.
    pub fn quadratic_form(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(self.mul_vec(v)).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest `|M_ij - M_ji|`; zero means bitwise symmetric up to signed zeros.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Real symmetric matrix. Symmetry is exact: constructors either mirror one
/// triangle or reject input that is not bitwise symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Builds from the upper triangle `f(i, j)` with `i <= j`.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        SymMatrix(m)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Matrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        SymMatrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(Matrix::identity(dim))
    }

    pub fn try_from_matrix(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::InvalidModel(format!("{}x{} matrix is not square", m.rows, m.cols)));
        }
        for i in 0..m.rows {
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::InvalidModel(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SymMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        let data = self.0.data.iter().map(|x| factor * x).collect();
        SymMatrix(Matrix { data, ..self.0 })
    }

    /// `self + factor * other`, elementwise, so symmetry is preserved exactly.
    pub fn add_scaled(&self, factor: f64, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), other.dim());
        let data = self.0.data.iter().zip(&other.0.data).map(|(a, b)| a + factor * b).collect();
        SymMatrix(Matrix { data, ..self.0 })
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, indices: &[usize]) -> SymMatrix {
        SymMatrix::from_upper_fn(indices.len(), |a, b| self.get(indices[a], indices[b]))
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// One total angular momentum sector of `N` spin-1/2 particles. `J` is stored
/// doubled so that half-integers are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinSector {
    n: usize,
    twice_j: usize,
}

impl SpinSector {
    pub fn new(n: usize, twice_j: usize) -> Result<Self> {
        if n == 0 || twice_j > n || (n - twice_j) % 2 != 0 {
            return Err(Error::InvalidSector { n, twice_j });
        }
        Ok(Self { n, twice_j })
    }

    /// The fully symmetric sector `J = N/2`.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn twice_j(&self) -> usize {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_j + 1
    }

    pub fn multiplicity(&self) -> u128 {
        sector_multiplicity(self.n, self.twice_j).expect("sector validated on construction")
    }

    /// All sectors of `n` spins, `J` descending.
    pub fn all(n: usize) -> Result<Vec<SpinSector>> {
        if n == 0 {
            return Err(Error::InvalidSector { n, twice_j: 0 });
        }
        Ok((0..=n).rev().step_by(2).map(|twice_j| SpinSector { n, twice_j }).collect())
    }
}

/// Exact binomial coefficient; zero when `k` is out of range.
pub fn binomial(n: usize, k: i64) -> Result<u128> {
    if k < 0 || k as usize > n {
        return Ok(0);
    }
    let k = (k as usize).min(n - k as usize);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::InvalidModel(format!("binomial C({n}, {k}) overflows")))?
            / (i as u128 + 1);
    }
    Ok(acc)
}

/// Number of times the spin-`J` irrep occurs in `(1/2)^{⊗N}`:
/// `C(N, N/2 - J) - C(N, N/2 - J - 1)`.
pub fn sector_multiplicity(n: usize, twice_j: usize) -> Result<u128> {
    if n == 0 || twice_j > n || (n - twice_j) % 2 != 0 {
        return Err(Error::InvalidSector { n, twice_j });
    }
    let k = ((n - twice_j) / 2) as i64;
    Ok(binomial(n, k)? - binomial(n, k - 1)?)
}

/// Spin operators of one irrep, basis `m = J, ..., -J`.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub twice_j: usize,
    pub jz: SymMatrix,
    pub jx: SymMatrix,
    pub jx2: SymMatrix,
    /// Raising operator `J+`, entries `<m+1|J+|m>`.
    pub jp: Matrix,
}

impl SpinOps {
    pub fn dim(&self) -> usize {
        self.twice_j + 1
    }

    /// `Jy` is imaginary in this basis; this is the real matrix `i·Jy = (J+ - J-)/2`.
    pub fn i_jy(&self) -> Matrix {
        let jm = self.jp.transpose();
        let d = self.dim();
        let data = self.jp.as_slice().iter().zip(jm.as_slice()).map(|(p, m)| 0.5 * (p - m)).collect();
        Matrix::from_row_major(d, d, data)
    }
}

/// `m` value of basis index `i` (`i = 0` is `m = J`).
#[inline]
pub fn m_of_index(twice_j: usize, i: usize) -> f64 {
    (twice_j as f64 - 2.0 * i as f64) / 2.0
}

/// `sqrt(J(J+1) - m(m+1))`, the `J+` matrix element out of `|m>`.
#[inline]
pub fn ladder_element(twice_j: usize, m: f64) -> f64 {
    let j = twice_j as f64 / 2.0;
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

pub fn build_spin_ops(twice_j: usize) -> SpinOps {
    let dim = twice_j + 1;
    let jz = SymMatrix::diagonal(&(0..dim).map(|i| m_of_index(twice_j, i)).collect::<Vec<_>>());

    // index i+1 holds m-1, so <m|J+|m-1> sits at (i, i+1)
    let mut jp = Matrix::zeros(dim, dim);
    for i in 0..dim.saturating_sub(1) {
        jp.set(i, i + 1, ladder_element(twice_j, m_of_index(twice_j, i + 1)));
    }
    let jx = SymMatrix::from_upper_fn(dim, |i, j| if j == i + 1 { 0.5 * jp.get(i, j) } else { 0.0 });
    let jx2 = SymMatrix::try_from_matrix(jx.as_matrix().matmul(jx.as_matrix()))
        .expect("square of a symmetric matrix is computed symmetrically");
    SpinOps { twice_j, jz, jx, jx2, jp }
}

/// Number operator and quadrature `X = a + a†` on `|0>, ..., |M>`.
#[derive(Clone, Debug)]
pub struct BosonOps {
    pub cutoff: usize,
    pub num: SymMatrix,
    pub x: SymMatrix,
}

pub fn build_boson_ops(cutoff: usize) -> BosonOps {
    let dim = cutoff + 1;
    let num = SymMatrix::diagonal(&(0..dim).map(|n| n as f64).collect::<Vec<_>>());
    let x = SymMatrix::from_upper_fn(dim, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
    BosonOps { cutoff, num, x }
}

/// Kronecker product `A ⊗ B`, index `(i, k) -> i * dim(B) + k`.
pub fn kron(a: &Matrix, b: &Matrix, max_dim: usize) -> Result<Matrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows.max(cols) > max_dim {
        return Err(Error::DimensionGuard { dim: rows.max(cols), max: max_dim });
    }
    let mut out = Matrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij == 0.0 {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of symmetric factors; the result is symmetric bit for bit.
pub fn kron_sym(a: &SymMatrix, b: &SymMatrix, max_dim: usize) -> Result<SymMatrix> {
    let m = kron(a.as_matrix(), b.as_matrix(), max_dim)?;
    SymMatrix::try_from_matrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn multiplicities_small() {
        assert_eq!(sector_multiplicity(2, 2).unwrap(), 1);
        assert_eq!(sector_multiplicity(2, 0).unwrap(), 1);
        assert_eq!(sector_multiplicity(4, 2).unwrap(), 3);
        assert_eq!(sector_multiplicity(4, 0).unwrap(), 2);
        assert_eq!(sector_multiplicity(3, 1).unwrap(), 2);
    }

    #[test]
    fn multiplicity_rejects_bad_j() {
        assert!(matches!(sector_multiplicity(4, 6), Err(Error::InvalidSector { .. })));
        assert!(matches!(sector_multiplicity(4, 1), Err(Error::InvalidSector { .. })));
        assert!(SpinSector::new(3, 2).is_err());
        assert!(SpinSector::new(0, 0).is_err());
    }

    #[test]
    fn completeness_up_to_64() {
        for n in 1..=64usize {
            let total: u128 = SpinSector::all(n)
                .unwrap()
                .iter()
                .map(|s| s.multiplicity() * s.dim() as u128)
                .sum();
            assert_eq!(total, 1u128 << n, "N = {n}");
        }
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let ops = build_spin_ops(1);
        assert_eq!(ops.jz.as_matrix().as_slice(), &[0.5, 0.0, 0.0, -0.5]);
        assert_eq!(ops.jx.as_matrix().as_slice(), &[0.0, 0.5, 0.5, 0.0]);
        assert_eq!(ops.jx2.as_matrix().as_slice(), &[0.25, 0.0, 0.0, 0.25]);
    }

    #[test]
    fn spin_one_jx() {
        let ops = build_spin_ops(2);
        let r = 1.0 / 2f64.sqrt();
        let expected = [0.0, r, 0.0, r, 0.0, r, 0.0, r, 0.0];
        for (a, b) in ops.jx.as_matrix().as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn commutator_jz_jx() {
        for twice_j in 1..=12 {
            let ops = build_spin_ops(twice_j);
            let jz = ops.jz.as_matrix();
            let jx = ops.jx.as_matrix();
            let c = jz.matmul(jx).sub(&jx.matmul(jz));
            for i in 0..ops.dim() {
                for k in 0..ops.dim() {
                    // (i, i+1) = <m|.|m-1>: +1/2 sqrt(...), mirror carries the minus sign
                    let expected = if k == i + 1 {
                        0.5 * ladder_element(twice_j, m_of_index(twice_j, k))
                    } else if i == k + 1 {
                        -0.5 * ladder_element(twice_j, m_of_index(twice_j, i))
                    } else {
                        0.0
                    };
                    assert!((c.get(i, k) - expected).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn casimir() {
        for twice_j in 0..=40 {
            let ops = build_spin_ops(twice_j);
            let j = twice_j as f64 / 2.0;
            let iy = ops.i_jy();
            // Jy^2 = -(iJy)^2
            let jy2 = iy.matmul(&iy);
            let jz2 = ops.jz.as_matrix().matmul(ops.jz.as_matrix());
            for a in 0..ops.dim() {
                for b in 0..ops.dim() {
                    let val = ops.jx2.get(a, b) - jy2.get(a, b) + jz2.get(a, b);
                    let expected = if a == b { j * (j + 1.0) } else { 0.0 };
                    assert!((val - expected).abs() < 1e-12, "J = {j} ({a},{b}) {val}");
                }
            }
        }
    }

    #[test]
    fn boson_ops() {
        let b = build_boson_ops(1);
        assert_eq!(b.num.as_matrix().as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(b.x.as_matrix().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let b = build_boson_ops(2);
        assert_eq!(b.x.get(0, 1), 1.0);
        assert_eq!(b.x.get(1, 2), 2f64.sqrt());
        let b = build_boson_ops(10);
        let x2 = b.x.as_matrix().matmul(b.x.as_matrix());
        for n in 0..10 {
            assert!((x2.get(n, n) - (2 * n + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn kron_examples() {
        let i2 = Matrix::identity(2);
        assert_eq!(kron(&i2, &i2, DEFAULT_MAX_DIM).unwrap(), Matrix::identity(4));
        let a = SymMatrix::diagonal(&[0.0, 1.0]);
        let b = SymMatrix::diagonal(&[2.5, -3.0]);
        let k = kron_sym(&a, &b, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(k, SymMatrix::diagonal(&[0.0, 0.0, 2.5, -3.0]));
        assert!(matches!(
            kron(&Matrix::identity(200), &Matrix::identity(200), 20_000),
            Err(Error::DimensionGuard { dim: 40_000, max: 20_000 })
        ));
    }

    #[test]
    fn constructed_operators_are_exactly_symmetric() {
        for twice_j in 0..=20 {
            let ops = build_spin_ops(twice_j);
            assert_eq!(ops.jz.as_matrix().asymmetry(), 0.0);
            assert_eq!(ops.jx.as_matrix().asymmetry(), 0.0);
            assert_eq!(ops.jx2.as_matrix().asymmetry(), 0.0);
        }
        let b = build_boson_ops(7);
        let s = build_spin_ops(5);
        let k = kron_sym(&b.x, &s.jx2, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(k.as_matrix().asymmetry(), 0.0);
    }

    fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-2.0f64..2.0, rows * cols)
            .prop_map(move |d| Matrix::from_row_major(rows, cols, d))
    }

    proptest! {
        #[test]
        fn kron_mixed_product(
            a in small_matrix(3, 2),
            b in small_matrix(2, 4),
            u in prop::collection::vec(-1.0f64..1.0, 2),
            v in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let k = kron(&a, &b, DEFAULT_MAX_DIM).unwrap();
            let uv: Vec<f64> = u.iter().flat_map(|x| v.iter().map(move |y| x * y)).collect();
            let lhs = k.mul_vec(&uv);
            let au = a.mul_vec(&u);
            let bv = b.mul_vec(&v);
            let rhs: Vec<f64> = au.iter().flat_map(|x| bv.iter().map(move |y| x * y)).collect();
            for (l, r) in lhs.iter().zip(rhs) {
                prop_assert!((l - r).abs() < 1e-12);
            }
        }
    }
}
