//! Dense row-major matrices, LU with row equilibration and partial
//! pivoting, and compensated dot products for accurate residuals.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Self {
            rows: n,
            cols,
            data,
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// `A x` with compensated dot products.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length");
        (0..self.rows).map(|i| dot2(self.row(i), x)).collect()
    }

    /// `A B` with compensated dot products.
    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let bt = other.transpose();
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                out.data[i * other.cols + j] = dot2(self.row(i), bt.row(j));
            }
        }
        Ok(out)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Error-free sum: `a + b = s + e` exactly.
#[inline(always)]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// Error-free product: `a * b = p + e` exactly.
#[inline(always)]
pub fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Dot product evaluated as if in twice the working precision.
pub fn dot2(a: &[f64], b: &[f64]) -> f64 {
    dot2_with(a, b, 0.0)
}

/// `c + a . b` evaluated as if in twice the working precision.
pub fn dot2_with(a: &[f64], b: &[f64], c: f64) -> f64 {
    assert_eq!(a.len(), b.len(), "dot product length");
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("fma") {
        // SAFETY: the required target feature was detected at runtime.
        return unsafe { dot2_fma(a, b, c) };
    }
    dot2_generic(a, b, c)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "fma")]
unsafe fn dot2_fma(a: &[f64], b: &[f64], c: f64) -> f64 {
    dot2_generic(a, b, c)
}

#[inline(always)]
fn dot2_generic(a: &[f64], b: &[f64], c: f64) -> f64 {
    const LANES: usize = 4;
    let mut s = [0.0f64; LANES];
    let mut e = [0.0f64; LANES];
    s[0] = c;
    let mut chunks_a = a.chunks_exact(LANES);
    let mut chunks_b = b.chunks_exact(LANES);
    for (ca, cb) in (&mut chunks_a).zip(&mut chunks_b) {
        for l in 0..LANES {
            let (p, pe) = two_product(ca[l], cb[l]);
            let (t, te) = two_sum(s[l], p);
            s[l] = t;
            e[l] += pe + te;
        }
    }
    let (mut sum, mut err) = (s[0], e[0]);
    for l in 1..LANES {
        let (t, te) = two_sum(sum, s[l]);
        sum = t;
        err += te + e[l];
    }
    for (x, y) in chunks_a.remainder().iter().zip(chunks_b.remainder()) {
        let (p, pe) = two_product(*x, *y);
        let (t, te) = two_sum(sum, p);
        sum = t;
        err += pe + te;
    }
    sum + err
}

/// `P D A = L U` where `D` scales every row of `A` to unit max norm.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    factors: DenseMatrix,
    perm: Vec<usize>,
    row_scale: Vec<f64>,
    min_pivot: f64,
}

impl LuFactorization {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let n = a.nrows();
        let mut lu = a.clone();
        let mut row_scale = vec![1.0; n];
        for (i, scale) in row_scale.iter_mut().enumerate() {
            let big = lu.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if big == 0.0 {
                return Err(Error::Singular {
                    step: i,
                    pivot: 0.0,
                });
            }
            *scale = 1.0 / big;
            lu.row_mut(i).iter_mut().for_each(|v| *v *= 1.0 / big);
        }

        let mut perm: Vec<usize> = (0..n).collect();
        let min_pivot = eliminate(&mut lu.data, n, &mut perm)?;
        Ok(Self {
            factors: lu,
            perm,
            row_scale,
            min_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Smallest pivot magnitude of the equilibrated matrix.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        let mut x: Vec<f64> = self
            .perm
            .iter()
            .map(|&p| b[p] * self.row_scale[p])
            .collect();
        for i in 0..n {
            let row = self.factors.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.factors.row(i);
            let s: f64 = row[i + 1..]
                .iter()
                .zip(&x[i + 1..])
                .map(|(u, y)| u * y)
                .sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}

const PANEL: usize = 48;
const TILE: usize = 512;

/// In-place blocked LU with partial pivoting on a row-major `n x n`
/// array. Returns the smallest pivot magnitude.
fn eliminate(data: &mut [f64], n: usize, perm: &mut [usize]) -> Result<f64> {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the required target feature was detected at runtime.
        return unsafe { eliminate_avx2(data, n, perm) };
    }
    eliminate_generic(data, n, perm)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn eliminate_avx2(data: &mut [f64], n: usize, perm: &mut [usize]) -> Result<f64> {
    eliminate_generic(data, n, perm)
}

#[inline(always)]
fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
}

#[inline(always)]
fn eliminate_generic(data: &mut [f64], n: usize, perm: &mut [usize]) -> Result<f64> {
    let threshold = n as f64 * f64::EPSILON;
    let mut min_pivot = f64::INFINITY;
    let mut k0 = 0;
    while k0 < n {
        let k1 = (k0 + PANEL).min(n);
        // panel: columns k0..k1, all rows below k0
        for k in k0..k1 {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, data[i * n + k].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot < threshold {
                return Err(Error::Singular { step: k, pivot });
            }
            min_pivot = min_pivot.min(pivot);
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    data.swap(k * n + j, p * n + j);
                }
            }
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..k * n + k1];
            let diag = pivot_row[k];
            for row in tail.chunks_exact_mut(n) {
                let l = row[k] / diag;
                row[k] = l;
                if l != 0.0 {
                    axpy(&mut row[k + 1..k1], l, &pivot_row[k + 1..]);
                }
            }
        }
        if k1 == n {
            break;
        }
        // block row of U: apply the unit lower panel to columns k1..n
        for k in k0..k1 {
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n + k1..(k + 1) * n];
            for r in k + 1..k1 {
                let row = &mut tail[(r - k - 1) * n..(r - k) * n];
                let l = row[k];
                if l != 0.0 {
                    axpy(&mut row[k1..], l, pivot_row);
                }
            }
        }
        // trailing update, tiled over columns
        let (head, tail) = data.split_at_mut(k1 * n);
        let panel_rows = &head[k0 * n..];
        let mut c0 = k1;
        while c0 < n {
            let c1 = (c0 + TILE).min(n);
            for row in tail.chunks_exact_mut(n) {
                let (left, right) = row.split_at_mut(c0);
                let target = &mut right[..c1 - c0];
                for k in k0..k1 {
                    let l = left[k];
                    if l != 0.0 {
                        let urow = &panel_rows[(k - k0) * n + c0..(k - k0) * n + c1];
                        axpy(target, l, urow);
                    }
                }
            }
            c0 = c1;
        }
        k0 = k1;
    }
    Ok(min_pivot)
}

/// Solves `A x = b` with compensated-residual iterative refinement.
pub fn solve_refined(a: &DenseMatrix, b: &[f64], max_steps: usize) -> Result<Vec<f64>> {
    Ok(LuFactorization::factor(a)?.solve_refined(a, b, max_steps))
}

impl LuFactorization {
    /// Solves `A x = b` where `self` factors `a`, refining with
    /// compensated residuals until the correction vanishes.
    pub fn solve_refined(&self, a: &DenseMatrix, b: &[f64], max_steps: usize) -> Vec<f64> {
        let mut x = self.solve(b);
        for _ in 0..max_steps {
            let r: Vec<f64> = (0..a.nrows())
                .map(|i| dot2_with(a.row(i), &x, -b[i]))
                .collect();
            let dx = self.solve(&r);
            let mut changed = false;
            for (xi, d) in x.iter_mut().zip(dx) {
                let new = *xi - d;
                changed |= new != *xi;
                *xi = new;
            }
            if !changed {
                break;
            }
        }
        x
    }
}

#[derive(Clone, Debug)]
pub struct Inverse {
    pub matrix: DenseMatrix,
    /// `max |A X - I|`, evaluated with compensated dot products.
    pub residual: f64,
    pub refinement_steps: usize,
    pub min_pivot: f64,
}

/// Residual `A X - I` where `xt` holds `X` transposed.
fn identity_residual(a: &DenseMatrix, xt: &DenseMatrix) -> (DenseMatrix, f64) {
    let n = a.nrows();
    // stored transposed: r[j][i] = (A X - I)_{ij}
    let mut r = DenseMatrix::zeros(n, n);
    let mut worst = 0.0f64;
    for j in 0..n {
        let col = xt.row(j);
        for i in 0..n {
            let delta = if i == j { -1.0 } else { 0.0 };
            let v = dot2_with(a.row(i), col, delta);
            worst = worst.max(v.abs());
            r.data[j * n + i] = v;
        }
    }
    (r, worst)
}

/// `max |A X - I|` with compensated dot products.
pub fn identity_residual_max(a: &DenseMatrix, x: &DenseMatrix) -> f64 {
    identity_residual(a, &x.transpose()).1
}

/// Inverse of `a` refined until the compensated residual stops halving or
/// `max_steps` corrections were applied.
pub fn refined_inverse(a: &DenseMatrix, max_steps: usize) -> Result<Inverse> {
    Ok(refined_inverse_with(
        a,
        &LuFactorization::factor(a)?,
        max_steps,
    ))
}

/// [`refined_inverse`] reusing an existing factorization of `a`.
pub fn refined_inverse_with(a: &DenseMatrix, lu: &LuFactorization, max_steps: usize) -> Inverse {
    let n = a.nrows();
    let mut xt = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        xt.row_mut(j).copy_from_slice(&lu.solve(&e));
        e[j] = 0.0;
    }
    let (mut r, mut residual) = identity_residual(a, &xt);
    let mut steps = 0;
    while steps < max_steps && residual > 0.0 {
        let mut candidate = xt.clone();
        for j in 0..n {
            let d = lu.solve(r.row(j));
            for (x, dx) in candidate.row_mut(j).iter_mut().zip(d) {
                *x -= dx;
            }
        }
        let (r_new, res_new) = identity_residual(a, &candidate);
        if res_new >= residual {
            break;
        }
        steps += 1;
        let halved = res_new <= 0.5 * residual;
        xt = candidate;
        r = r_new;
        residual = res_new;
        if !halved {
            break;
        }
    }
    Inverse {
        matrix: xt.transpose(),
        residual,
        refinement_steps: steps,
        min_pivot: lu.min_pivot(),
    }
}
