//! Real symmetric eigensolvers.
//!
//! Dense matrices are reduced to tridiagonal form by Householder reflections,
//! banded matrices by Rutishauser's Givens band-chasing, which costs
//! `O(kd·n²)` instead of `O(n³)`. Both feed the same implicit QL iteration.
//! Everything runs in a fixed order, so identical inputs give identical bits.

use crate::error::{Error, Result};
use crate::operators::SymMatrix;

/// QL sweeps allowed per eigenvalue before giving up.
pub const QL_MAX_SWEEPS: usize = 60;

/// Eigenvalues in ascending order, optionally with eigenvectors
/// (`vectors[k]` belongs to `values[k]`).
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
}

/// Symmetric band matrix, lower storage: entry `(i, j)` with `0 <= i - j <= kd`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kd: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self { n, kd, data: vec![0.0; n * (kd + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.kd, "({i}, {j}) outside band {}", self.kd);
        i * (self.kd + 1) + (i - j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let d = i.abs_diff(j);
        if d > self.kd {
            0.0
        } else {
            self.data[self.offset(i, j)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let o = self.offset(i, j);
        self.data[o] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let o = self.offset(i, j);
        self.data[o] += value;
    }

    pub fn to_dense(&self) -> SymMatrix {
        SymMatrix::from_upper_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kd);
            let row = &self.data[i * (self.kd + 1)..(i + 1) * (self.kd + 1)];
            out[i] += row[0] * v[i];
            for j in lo..i {
                let a = row[i - j];
                out[i] += a * v[j];
                out[j] += a * v[i];
            }
        }
        out
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.kd)..=i {
                let a = self.get(i, j).abs();
                sums[i] += a;
                if j != i {
                    sums[j] += a;
                }
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}

/// Full eigendecomposition of a dense symmetric matrix.
pub fn symmetric_eigen(h: &SymMatrix, want_vectors: bool) -> Result<Eigensystem> {
    let n = h.dim();
    if n == 0 {
        return Ok(Eigensystem { values: vec![], vectors: want_vectors.then(Vec::new) });
    }
    let mut a = h.as_matrix().as_slice().to_vec();
    let (mut d, mut e, reflectors) = householder_tridiagonal(&mut a, n);
    if !want_vectors {
        tridiagonal_ql(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        return Ok(Eigensystem { values: d, vectors: None });
    }
    // rows of `qt` are the columns of the accumulated orthogonal transform
    let mut qt = accumulate_transposed(&reflectors, n);
    tridiagonal_ql(&mut d, &mut e, Some(&mut qt))?;
    Ok(sorted(d, Some(qt), n))
}

/// All eigenvalues of a symmetric band matrix, ascending.
pub fn band_eigenvalues(h: &BandMatrix) -> Result<Vec<f64>> {
    let (mut d, mut e) = band_to_tridiagonal(h);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues of a symmetric tridiagonal matrix (`off[i]` couples `i` and `i+1`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Lowest eigenpair of a band matrix: eigenvalue from the band reduction,
/// vector by shifted inverse iteration with a banded Cholesky factor.
///
/// The returned vector is normalised with its largest component positive.
pub fn band_lowest_eigenpair(h: &BandMatrix) -> Result<(f64, Vec<f64>)> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::Empty("band matrix"));
    }
    let values = band_eigenvalues(h)?;
    let e0 = values[0];
    let scale = h.inf_norm().max(1.0);
    let mut shift_gap = 1e-9 * scale;
    let mut x = start_vector(n);
    for _attempt in 0..6 {
        let sigma = e0 - shift_gap;
        let factor = match BandCholesky::factor(h, sigma) {
            Some(f) => f,
            None => {
                shift_gap *= 10.0;
                continue;
            }
        };
        for _ in 0..8 {
            let mut y = factor.solve(&x);
            normalise(&mut y);
            x = y;
            let hx = h.mul_vec(&x);
            let rq: f64 = hx.iter().zip(&x).map(|(a, b)| a * b).sum();
            let res = hx.iter().zip(&x).map(|(a, b)| (a - rq * b).powi(2)).sum::<f64>().sqrt();
            if res <= 1e-11 * scale {
                fix_sign(&mut x);
                return Ok((e0, x));
            }
        }
        shift_gap *= 10.0;
    }
    Err(Error::InverseIteration(format!("no converged ground vector for dim {n}")))
}

fn start_vector(n: usize) -> Vec<f64> {
    // fixed pseudo-random start; the ground state is never orthogonal to it in practice
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            0.5 + (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    normalise(&mut v);
    v
}

fn normalise(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

struct BandCholesky {
    n: usize,
    kd: usize,
    // lower factor, same layout as BandMatrix
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factors `h - sigma·I`; `None` if it is not numerically positive definite.
    fn factor(h: &BandMatrix, sigma: f64) -> Option<Self> {
        let (n, kd) = (h.n, h.kd);
        let w = kd + 1;
        let mut l = h.data.clone();
        for i in 0..n {
            l[i * w] -= sigma;
        }
        for i in 0..n {
            let lo = i.saturating_sub(kd);
            for j in lo..=i {
                let mut s = l[i * w + (i - j)];
                for k in lo.max(j.saturating_sub(kd))..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Some(Self { n, kd, l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kd, w) = (self.n, self.kd, self.kd + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(kd)..i {
                s -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + kd + 1).min(n) {
                s -= self.l[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        y
    }
}

struct Reflector {
    tau: f64,
    // v[0] = 1 implicitly stored; acts on indices k+1..n
    v: Vec<f64>,
}

/// Householder reduction of the lower triangle of `a` (row-major, `n×n`).
/// Returns diagonal, off-diagonal (`e[n-1] = 0`) and the reflectors `H_k`
/// with `Qᵀ A Q = T`, `Q = H_0 H_1 ⋯`.
fn householder_tridiagonal(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<Reflector>) {
    let mut e = vec![0.0; n];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let alpha = a[(k + 1) * n + k];
        let tail2: f64 = (k + 2..n).map(|i| a[i * n + k] * a[i * n + k]).sum();
        if tail2 == 0.0 {
            e[k] = alpha;
            reflectors.push(Reflector { tau: 0.0, v: Vec::new() });
            continue;
        }
        let norm = alpha.hypot(tail2.sqrt());
        let beta = if alpha >= 0.0 { -norm } else { norm };
        let tau = (beta - alpha) / beta;
        let scale = 1.0 / (alpha - beta);
        let mut v = vec![0.0; m];
        v[0] = 1.0;
        for i in 1..m {
            v[i] = a[(k + 1 + i) * n + k] * scale;
        }
        e[k] = beta;

        // p = tau · A22 v using the lower triangle only
        let p = &mut p[..m];
        p.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..m {
            let row = (k + 1 + i) * n + (k + 1);
            let vi = v[i];
            let mut acc = 0.0;
            for j in 0..i {
                let aij = a[row + j];
                acc += aij * v[j];
                p[j] += aij * vi;
            }
            p[i] += acc + a[row + i] * vi;
        }
        let mut pv = 0.0;
        for i in 0..m {
            p[i] *= tau;
            pv += p[i] * v[i];
        }
        let half = 0.5 * tau * pv;
        for i in 0..m {
            p[i] -= half * v[i];
        }
        // A22 -= v wᵀ + w vᵀ, with w now in p
        for i in 0..m {
            let row = (k + 1 + i) * n + (k + 1);
            let (vi, wi) = (v[i], p[i]);
            for j in 0..=i {
                a[row + j] -= vi * p[j] + wi * v[j];
            }
        }
        reflectors.push(Reflector { tau, v });
    }
    if n >= 2 {
        e[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    let d = (0..n).map(|i| a[i * n + i]).collect();
    (d, e, reflectors)
}

/// `Qᵀ = ⋯ H_1 H_0`, built as `(H_{last} ⋯) H_0` by right-multiplication so the
/// untouched identity rows are skipped.
fn accumulate_transposed(reflectors: &[Reflector], n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n * n];
    for i in 0..n {
        x[i * n + i] = 1.0;
    }
    for (k, r) in reflectors.iter().enumerate().rev() {
        if r.tau == 0.0 {
            continue;
        }
        for row in k + 1..n {
            let cols = &mut x[row * n + k + 1..row * n + n];
            let s: f64 = cols.iter().zip(&r.v).map(|(a, b)| a * b).sum();
            if s == 0.0 {
                continue;
            }
            let s = s * r.tau;
            for (c, vi) in cols.iter_mut().zip(&r.v) {
                *c -= s * vi;
            }
        }
    }
    x
}

/// Implicit QL with Wilkinson-type shifts on `(d, e)`; `e[i]` couples `i` and
/// `i+1`. When `rows` is given (row-major `n×n`), the rotations are applied to
/// its rows, so rows that start as `Qᵀ` end as eigenvectors.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut rows: Option<&mut Vec<f64>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::NoConvergence(QL_MAX_SWEEPS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = rows.as_deref_mut() {
                    let (head, tail) = z.split_at_mut((i + 1) * n);
                    let zi = &mut head[i * n..];
                    let zj = &mut tail[..n];
                    for (a, b) in zi.iter_mut().zip(zj.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sorted(values: Vec<f64>, rows: Option<Vec<f64>>, n: usize) -> Eigensystem {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let vals = order.iter().map(|&k| values[k]).collect();
    let vectors = rows.map(|z| order.iter().map(|&k| z[k * n..(k + 1) * n].to_vec()).collect());
    Eigensystem { values: vals, vectors }
}

/// Rutishauser band reduction to tridiagonal form by Givens rotations.
fn band_to_tridiagonal(h: &BandMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = h.n;
    let kd = h.kd.min(n.saturating_sub(1));
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if kd <= 1 {
        for i in 0..n {
            d[i] = h.get(i, i);
            if i + 1 < n && kd == 1 {
                e[i] = h.get(i + 1, i);
            }
        }
        return (d, e);
    }
    // one extra diagonal for the bulge
    let mut w = Workspace { w: kd + 2, a: vec![0.0; n * (kd + 2)] };
    for i in 0..n {
        for j in i.saturating_sub(kd)..=i {
            w.set(i, j, h.get(i, j));
        }
    }
    for k in (2..=kd).rev() {
        for j in 0..n {
            let (mut row, mut col) = (j + k, j);
            while row < n {
                let x = w.get(row, col);
                if x == 0.0 {
                    break;
                }
                let y = w.get(row - 1, col);
                let r = y.hypot(x);
                let (c, s) = (y / r, x / r);
                w.rotate(n, k, row - 1, c, s);
                w.set(row - 1, col, r);
                w.set(row, col, 0.0);
                col = row - 1;
                row += k;
            }
        }
    }
    for i in 0..n {
        d[i] = w.get(i, i);
        if i + 1 < n {
            e[i] = w.get(i + 1, i);
        }
    }
    (d, e)
}

struct Workspace {
    w: usize,
    a: Vec<f64>,
}

impl Workspace {
    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.w + (i - j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.w + (i - j)] = v;
    }

    /// Similarity transform by the rotation in plane `(p, p+1)`:
    /// `row_p ← c·row_p + s·row_q`, `row_q ← -s·row_p + c·row_q`, same for columns.
    /// Entries farther than `k + 1` from the diagonal are known to be zero.
    fn rotate(&mut self, n: usize, k: usize, p: usize, c: f64, s: f64) {
        let q = p + 1;
        for x in q.saturating_sub(k + 1)..p {
            let (ap, aq) = (self.get(p, x), self.get(q, x));
            self.set(p, x, c * ap + s * aq);
            self.set(q, x, c * aq - s * ap);
        }
        let (app, aqq, aqp) = (self.get(p, p), self.get(q, q), self.get(q, p));
        let (cc, ss, cs) = (c * c, s * s, c * s);
        self.set(p, p, cc * app + 2.0 * cs * aqp + ss * aqq);
        self.set(q, q, ss * app - 2.0 * cs * aqp + cc * aqq);
        self.set(q, p, cs * (aqq - app) + (cc - ss) * aqp);
        for x in q + 1..(p + k + 2).min(n) {
            let (ap, aq) = (self.get(x, p), self.get(x, q));
            self.set(x, p, c * ap + s * aq);
            self.set(x, q, c * aq - s * ap);
        }
    }
}
