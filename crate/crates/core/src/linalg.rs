//! Dense linear algebra used by the spectral routines.
//!
//! Hermitian eigenproblems go through a cyclic complex Jacobi sweep and
//! symmetric tridiagonal problems through implicit-shift QL. General
//! factorizations (LU, SVD) come from `nalgebra`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Full spectral decomposition `M = V diag(values) V*` with ascending values.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, stored column-wise in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Columns whose eigenvalue satisfies `pred`.
    pub fn select(&self, pred: impl Fn(f64) -> bool) -> CMatrix {
        let idx: Vec<usize> = (0..self.dim()).filter(|&k| pred(self.values[k])).collect();
        columns(&self.vectors, &idx)
    }

    /// `V f(D) V*` for a scalar function of the eigenvalues.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let w = C64::new(f(self.values[k]), 0.0);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Relative Frobenius distance between `m` and its adjoint.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let diff = (m - m.adjoint()).norm();
    diff / m.norm().max(1.0)
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// The strictly Hermitian part `(M + M*)/2` is diagonalised; callers that
/// need to reject non-Hermitian input check [`hermitian_defect`] first.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Input("matrix contains NaN or infinite entries".into()));
    }
    let mut a = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut v = CMatrix::identity(n, n);
    let scale = a.norm();
    if n <= 1 || scale == 0.0 {
        return Ok(finish(a, v));
    }

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale * 1e-2 {
            return Ok(finish(a, v));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    Err(Error::Numerical(format!(
        "Jacobi sweeps did not converge for a {n}x{n} matrix"
    )))
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = a.nrows();
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag < 1e-300 || mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // G = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
    let gp_q = -phase.conj() * s; // G[q][p]
    let gq_q = phase.conj() * c; // G[q][q]
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * gp_q;
        a[(k, q)] = akp * s + akq * gq_q;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * gp_q.conj();
        a[(q, k)] = apk * s + aqk * gq_q.conj();
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * gp_q;
        v[(k, q)] = vkp * s + vkq * gq_q;
    }
}

fn finish(a: CMatrix, v: CMatrix) -> HermitianEigen {
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    HermitianEigen {
        values,
        vectors: columns(&v, &order),
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}

/// Eigenvalues of the symmetric tridiagonal matrix with the given diagonal and
/// off-diagonal, by the QL algorithm with implicit Wilkinson shifts. Ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "tridiagonal: {} diagonal entries need {} off-diagonal entries, got {}",
            n,
            n - 1,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
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
            if iter > 60 {
                return Err(Error::Numerical(format!(
                    "tridiagonal QL did not converge at index {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Number of eigenvalues of a symmetric tridiagonal matrix strictly below `x`
/// (Sylvester inertia of the `LDLᵀ` factorisation of `T − x`).
pub fn tridiagonal_count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0_f64;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solve `(T − s)x = rhs` for the symmetric tridiagonal `T = (diag, off)` by
/// Gaussian elimination with partial pivoting. Exact zero pivots are nudged.
pub fn tridiagonal_solve(d: &[f64], e: &[f64], s: f64, rhs: &[f64]) -> Vec<f64> {
    let n = d.len();
    // Rows stored as (diag, super, super-super) after pivoting.
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut r = rhs.to_vec();
    for i in 0..n {
        a[i] = d[i] - s;
        if i + 1 < n {
            b[i] = e[i];
            lower[i + 1] = e[i];
        }
    }
    let tiny = 1e-300;
    for i in 0..n.saturating_sub(1) {
        if lower[i + 1].abs() > a[i].abs() {
            // Swap rows i and i+1.
            let (ai, bi, ci, ri) = (a[i], b[i], c[i], r[i]);
            a[i] = lower[i + 1];
            b[i] = a[i + 1];
            c[i] = b[i + 1];
            r[i] = r[i + 1];
            let m = ai / a[i];
            a[i + 1] = bi - m * b[i];
            b[i + 1] = ci - m * c[i];
            r[i + 1] = ri - m * r[i];
        } else {
            if a[i].abs() < tiny {
                a[i] = tiny;
            }
            let m = lower[i + 1] / a[i];
            a[i + 1] -= m * b[i];
            b[i + 1] -= m * c[i];
            r[i + 1] -= m * r[i];
        }
    }
    if a[n - 1].abs() < tiny {
        a[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = r[i];
        if i + 1 < n {
            v -= b[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= c[i] * x[i + 2];
        }
        x[i] = v / a[i];
    }
    x
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis (columns) of the numerical kernel of `m`: right singular
/// vectors whose singular value is at most `rel_tol · σ_max`.
pub fn kernel_basis(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let (rows, cols) = m.shape();
    // Pad to a square matrix so the SVD yields a complete right basis.
    let size = rows.max(cols);
    let mut padded = CMatrix::zeros(size, cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let threshold = rel_tol * smax;
    let idx: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] <= threshold).collect();
    let mut out = CMatrix::zeros(cols, idx.len());
    for (j, &k) in idx.iter().enumerate() {
        for i in 0..cols {
            out[(i, j)] = v_t[(k, i)].conj();
        }
    }
    out
}

/// Numerical rank with relative threshold `rel_tol · σ_max`.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// Orthogonal projector `V V*` onto the span of orthonormal columns.
pub fn projector_from_basis(basis: &CMatrix) -> CMatrix {
    basis * basis.adjoint()
}

/// Gram–Schmidt orthonormalisation (modified, two passes) of the columns.
pub fn orthonormalize(m: &CMatrix) -> CMatrix {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for _ in 0..2 {
            for k in 0..j {
                let coeff = q.column(k).dotc(&q.column(j));
                let col_k = q.column(k).clone_owned();
                let mut col_j = q.column_mut(j);
                col_j -= col_k * coeff;
            }
        }
        let norm = q.column(j).norm();
        if norm > 0.0 {
            let mut col = q.column_mut(j);
            col /= C64::new(norm, 0.0);
        }
    }
    q
}

/// Solve `m x = b` by partial-pivot LU; `None` if `m` is numerically singular.
pub fn solve(m: &CMatrix, b: &CVector) -> Option<CVector> {
    let lu = m.clone().lu();
    lu.solve(b)
}

/// Inverse via LU; `None` if singular.
pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().lu().try_inverse()
}

/// Select columns by index.
pub fn columns(m: &CMatrix, idx: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(m.nrows(), idx.len());
    for (j, &k) in idx.iter().enumerate() {
        out.set_column(j, &m.column(k));
    }
    out
}

/// Lift a real matrix to complex.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| C64::new(v, 0.0))
}

/// Largest entry modulus of the imaginary parts relative to the matrix norm.
pub fn imaginary_fraction(m: &CMatrix) -> f64 {
    let im = m.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    im / m.norm().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&g + g.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 8, 17] {
            let m = random_hermitian(n, &mut rng);
            let eig = hermitian_eigen(&m).unwrap();
            let rebuilt = eig.apply_fn(|x| x);
            assert!((&m - rebuilt).norm() <= 1e-12 * m.norm().max(1.0));
            let gram = eig.vectors.adjoint() * &eig.vectors;
            assert!((gram - CMatrix::identity(n, n)).norm() < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn jacobi_handles_degenerate_spectrum() {
        let m = CMatrix::identity(4, 4) * C64::new(3.0, 0.0);
        let eig = hermitian_eigen(&m).unwrap();
        assert_eq!(eig.values, vec![3.0; 4]);
    }

    #[test]
    fn ql_matches_closed_form_chain() {
        // Free chain with n sites: 2 cos(kπ/(n+1)).
        let n = 50;
        let vals = tridiagonal_eigenvalues(&vec![0.0; n], &vec![1.0; n - 1]).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 * (std::f64::consts::PI * (n - k) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
        }
    }

    #[test]
    fn sturm_count_agrees_with_ql() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d: Vec<f64> = (0..40).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let e: Vec<f64> = (0..39).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vals = tridiagonal_eigenvalues(&d, &e).unwrap();
        for x in [-3.0, -0.5, 0.0, 0.7, 3.5] {
            let expect = vals.iter().filter(|&&v| v < x).count();
            assert_eq!(tridiagonal_count_below(&d, &e, x), expect);
        }
    }

    #[test]
    fn kernel_of_wide_matrix() {
        // (1, -1) has kernel span(1, 1)/sqrt 2.
        let m = CMatrix::from_row_slice(1, 2, &[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        let k = kernel_basis(&m, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!((k[(0, 0)].norm() - k[(1, 0)].norm()).abs() < 1e-14);
        assert!((&m * &k).norm() < 1e-14);
    }

    #[test]
    fn nonsquare_rejected() {
        assert!(hermitian_eigen(&CMatrix::zeros(2, 3)).is_err());
    }
}
