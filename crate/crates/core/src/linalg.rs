//! Symmetric skyline storage with an in-place LDLᵀ factorization, a
//! shift-invert Lanczos eigensolver built on it, and small dense helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric matrix stored by columns of its upper triangle, each column
/// running from its first structurally non-zero row down to the diagonal.
#[derive(Debug, Clone)]
pub struct Skyline {
    n: usize,
    first: Vec<usize>,
    col_ptr: Vec<usize>,
    values: Vec<f64>,
}

impl Skyline {
    /// `first[j]` is the smallest row index stored in column `j` (`<= j`).
    pub fn with_profile(first: Vec<usize>) -> Self {
        let n = first.len();
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        for (j, &f) in first.iter().enumerate() {
            assert!(f <= j, "profile row {f} below diagonal in column {j}");
            col_ptr.push(col_ptr[j] + (j - f + 1));
        }
        let nnz = col_ptr[n];
        Self {
            n,
            first,
            col_ptr,
            values: vec![0.0; nnz],
        }
    }

    /// Profile from a list of index groups that couple (element DOF lists).
    pub fn from_connectivity<'a>(n: usize, groups: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut first: Vec<usize> = (0..n).collect();
        for g in groups {
            if let Some(&lo) = g.iter().min() {
                for &j in g {
                    if lo < first[j] {
                        first[j] = lo;
                    }
                }
            }
        }
        Self::with_profile(first)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn stored(&self) -> usize {
        self.values.len()
    }

    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if i < self.first[j] {
            None
        } else {
            Some(self.col_ptr[j] + (i - self.first[j]))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Accumulates `v` into entry `(i, j)` (and by symmetry `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .idx(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside skyline profile"));
        self.values[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .idx(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside skyline profile"));
        self.values[k] = v;
    }

    /// Replaces row and column `i` by the identity row, for eliminating a
    /// prescribed unknown.
    pub fn constrain(&mut self, i: usize) {
        for j in i..self.n {
            if let Some(k) = self.idx(i, j) {
                self.values[k] = 0.0;
            }
        }
        for r in self.first[i]..i {
            self.values[self.col_ptr[i] + (r - self.first[i])] = 0.0;
        }
        self.set(i, i, 1.0);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.values[self.col_ptr[j + 1] - 1]).collect()
    }

    /// `self + alpha * other`. The profile of `other` must lie inside that
    /// of `self`.
    pub fn axpy(&self, alpha: f64, other: &Skyline) -> Skyline {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = self.clone();
        if self.first == other.first {
            for (a, b) in out.values.iter_mut().zip(&other.values) {
                *a += alpha * b;
            }
            return out;
        }
        for j in 0..other.n {
            for i in other.first[j]..=j {
                let v = other.values[other.col_ptr[j] + (i - other.first[j])];
                if v != 0.0 {
                    out.add(i, j, alpha * v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let base = self.col_ptr[j];
            let f = self.first[j];
            let mut acc = 0.0;
            for (off, i) in (f..j).enumerate() {
                let a = self.values[base + off];
                acc += a * x[i];
                y[i] += a * x[j];
            }
            acc += self.values[self.col_ptr[j + 1] - 1] * x[j];
            y[j] += acc;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// In-place `L D Lᵀ` factorization (no pivoting). Pivots smaller than
    /// `1e-13` times the original diagonal are reported as failures.
    pub fn factor(mut self) -> Result<LdlFactor> {
        let n = self.n;
        let mut d = vec![0.0; n];
        for j in 0..n {
            let fj = self.first[j];
            let cj = self.col_ptr[j];
            // g(i, j) = a(i, j) - sum_k L(i, k) g(k, j)
            for i in fj..j {
                let fi = self.first[i];
                let lo = fi.max(fj);
                let ci = self.col_ptr[i];
                let mut s = 0.0;
                for k in lo..i {
                    s += self.values[ci + (k - fi)] * self.values[cj + (k - fj)];
                }
                self.values[cj + (i - fj)] -= s;
            }
            let diag_orig = self.values[self.col_ptr[j + 1] - 1];
            let mut dj = diag_orig;
            for i in fj..j {
                let g = self.values[cj + (i - fj)];
                let l = g / d[i];
                dj -= l * g;
                self.values[cj + (i - fj)] = l;
            }
            if !(dj.abs() > 1e-13 * diag_orig.abs()) || !dj.is_finite() {
                return Err(Error::Factorization { pivot: j });
            }
            d[j] = dj;
            let last = self.col_ptr[j + 1] - 1;
            self.values[last] = dj;
        }
        Ok(LdlFactor { l: self, d })
    }
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    l: Skyline,
    d: Vec<f64>,
}

impl LdlFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        let l = &self.l;
        for j in 0..n {
            let f = l.first[j];
            let c = l.col_ptr[j];
            let mut s = 0.0;
            for k in f..j {
                s += l.values[c + (k - f)] * x[k];
            }
            x[j] -= s;
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let f = l.first[j];
            let c = l.col_ptr[j];
            let xj = x[j];
            for k in f..j {
                x[k] -= l.values[c + (k - f)] * xj;
            }
        }
        x
    }

    /// Number of negative pivots (Sylvester inertia).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Relative residual `|K x - w² M x| / |K x|` required of every pair.
    pub tol: f64,
    /// Largest Krylov dimension tried before giving up.
    pub max_dim: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_dim: 400,
        }
    }
}

/// Eigenpairs of `K x = w² M x`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// M-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub krylov_dim: usize,
}

/// Shift-invert Lanczos with full M-reorthogonalization for the `count`
/// eigenvalues of `K x = w² M x` closest above `sigma`, skipping the zero
/// (rigid) eigenvalues of a singular `K`.
///
/// `M` may be singular: the operator `(K - σM)⁻¹ M` maps its null space to
/// zero, so those directions never enter the Krylov basis.
pub fn shift_invert_lanczos(
    k: &Skyline,
    m: &Skyline,
    count: usize,
    sigma: f64,
    opts: LanczosOptions,
) -> Result<EigenPairs> {
    let n = k.dim();
    let shifted = k.axpy(-sigma, m);
    let fac = shifted.factor()?;
    let op = |v: &[f64]| fac.solve(&m.mul_vec(v));

    let mut dim = (2 * count + 20).min(n);
    let mut last_residual = f64::INFINITY;
    loop {
        match lanczos_pass(k, m, &op, n, count, sigma, dim, opts.tol) {
            Ok(pairs) => return Ok(pairs),
            Err(res) => last_residual = last_residual.min(res),
        }
        if dim >= n || dim >= opts.max_dim {
            return Err(Error::EigenNonConvergence {
                iterations: dim,
                residual: last_residual,
            });
        }
        dim = (dim * 2).min(n).min(opts.max_dim);
    }
}

#[allow(clippy::too_many_arguments)]
fn lanczos_pass(
    k: &Skyline,
    m: &Skyline,
    op: &impl Fn(&[f64]) -> Vec<f64>,
    n: usize,
    count: usize,
    sigma: f64,
    dim: usize,
    tol: f64,
) -> std::result::Result<EigenPairs, f64> {
    // Deterministic start vector with content in every component.
    let start: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).fract())
        .collect();
    let mut v = op(&start);
    let mut mv = m.mul_vec(&v);
    let b0 = dot(&v, &mv).sqrt();
    if !(b0 > 0.0) {
        return Err(f64::INFINITY);
    }
    v.iter_mut().for_each(|x| *x /= b0);
    mv.iter_mut().for_each(|x| *x /= b0);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut mbasis: Vec<Vec<f64>> = vec![mv];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    for j in 0..dim {
        let mut w = op(&basis[j]);
        let a = dot(&w, &mbasis[j]);
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for (q, mq) in basis.iter().zip(&mbasis) {
                let c = dot(&w, mq);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        if j + 1 == dim {
            break;
        }
        let mw = m.mul_vec(&w);
        let b = dot(&w, &mw).max(0.0).sqrt();
        if b <= 1e-14 * a.abs().max(1e-300) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
        mbasis.push(mw.iter().map(|x| x / b).collect());
    }

    let p = alpha.len();
    let mut t = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        t[(i, i)] = alpha[i];
        if i + 1 < p {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..p).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    for &i in &order {
        let theta = eig.eigenvalues[i];
        let mut x = vec![0.0; n];
        for (c, q) in basis.iter().enumerate() {
            let y = eig.eigenvectors[(c, i)];
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += y * qi;
            }
        }
        // One extra application purges components along M's null space.
        let mut x = op(&x);
        x.iter_mut().for_each(|v| *v *= 1.0 / theta);
        candidates.push((sigma + 1.0 / theta, x));
    }
    // A null vector of K maps to w² = 0 up to rounding of order eps |sigma|;
    // scaling the cut by the largest Ritz value would drop genuine low modes
    // of stiff operators.
    candidates.retain(|c| c.0 > 1e-7 * sigma.abs());
    if candidates.len() < count {
        return Err(f64::INFINITY);
    }
    candidates.truncate(count);
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    let mut worst: f64 = 0.0;
    for (lam, mut x) in candidates {
        let mx = m.mul_vec(&x);
        let nrm = dot(&x, &mx).sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);
        let kx = k.mul_vec(&x);
        let mx = m.mul_vec(&x);
        let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lam * b).collect();
        let res = norm(&r) / norm(&kx);
        worst = worst.max(res);
        values.push(lam);
        vectors.push(x);
        residuals.push(res);
    }
    if worst > tol {
        return Err(worst);
    }
    // Fix the sign convention: largest-magnitude component positive.
    for x in &mut vectors {
        let imax = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if x[imax] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(EigenPairs {
        values,
        vectors,
        residuals,
        krylov_dim: p,
    })
}

/// All eigenpairs of the dense symmetric-definite pencil `(K, M)`,
/// ascending, M-orthonormal eigenvectors as columns.
pub fn dense_generalized_eigen(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(Error::Factorization { pivot: 0 })?;
    let a = &linv * k * linv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let n = k.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let ys = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let xs = linv.transpose() * ys;
    Ok((vals, xs))
}
