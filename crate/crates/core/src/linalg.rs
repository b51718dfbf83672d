//! Dense complex linear algebra helpers on top of `nalgebra`.
//!
//! All residuals reported by the crate are Frobenius norms, which bound the
//! operator norm from above.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative slack under which two pivot candidates count as tied.
const PIVOT_TIE: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Unit vector `e_j` of `C^d`.
pub fn unit(d: usize, j: usize) -> CVec {
    let mut x = CVec::zeros(d);
    x[j] = ONE;
    x
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Thin singular value decomposition `A = U diag(s) V*`, `s` descending.
///
/// Computed from the Hermitian eigenproblem of `[[0, A], [A*, 0]]`, whose
/// eigenvalues are `±sᵢ`. `nalgebra`'s complex SVD loses up to `1e-3` in
/// reconstruction on matrices with clustered singular values; the
/// Hermitian solver does not. Singular vectors for `sᵢ = 0` are not
/// meaningful.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(a: &CMat) -> Svd {
    let (m, n) = a.shape();
    let r = m.min(n);
    if r == 0 {
        return Svd {
            u: CMat::zeros(m, 0),
            s: Vec::new(),
            v: CMat::zeros(n, 0),
        };
    }
    let mut h = CMat::zeros(m + n, m + n);
    h.view_mut((0, m), (m, n)).copy_from(a);
    h.view_mut((m, 0), (n, m)).copy_from(&a.adjoint());
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m + n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let scale = c(std::f64::consts::SQRT_2, 0.0);
    let mut u = CMat::zeros(m, r);
    let mut v = CMat::zeros(n, r);
    let mut s = Vec::with_capacity(r);
    for (k, &i) in order.iter().take(r).enumerate() {
        let col = eig.eigenvectors.column(i);
        u.set_column(k, &(col.rows(0, m) * scale));
        v.set_column(k, &(col.rows(m, n) * scale));
        s.push(eig.eigenvalues[i].max(0.0));
    }
    Svd { u, s, v }
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    svd(m).s.first().copied().unwrap_or(0.0)
}

/// `‖U*U − I‖_F`.
pub fn unitary_deviation(u: &CMat) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    frob(&(u.adjoint() * u - eye(u.nrows())))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}

fn rebuild(vectors: &CMat, values: &[f64]) -> CMat {
    let n = vectors.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        let col = vectors.column(k);
        out += &col * col.adjoint() * c(lam, 0.0);
    }
    out
}

/// Square root of a positive semidefinite matrix.
///
/// Negative eigenvalues of magnitude at most `tol` are clamped to zero.
pub fn psd_sqrt(m: &CMat, tol: f64) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(m);
    let mut roots = Vec::with_capacity(vals.len());
    for &v in &vals {
        if v < -tol {
            return Err(Error::NotPositive { eigenvalue: v });
        }
        roots.push(v.max(0.0).sqrt());
    }
    Ok(rebuild(&vecs, &roots))
}

/// Nearest orthogonal projection: eigenvalues of the Hermitian part are
/// rounded to 0 or 1 at threshold 1/2.
pub fn clean_projection(p: &CMat) -> (CMat, usize) {
    let (vals, vecs) = hermitian_eigen(p);
    let rounded: Vec<f64> = vals
        .iter()
        .map(|&v| if v > 0.5 { 1.0 } else { 0.0 })
        .collect();
    let rank = rounded.iter().filter(|&&v| v == 1.0).count();
    (rebuild(&vecs, &rounded), rank)
}

/// Minimum-norm least-squares solution of `a x = b`.
///
/// Singular values below `rcond · σ_max` are discarded.
pub fn lstsq_min_norm(a: &CMat, b: &CMat, rcond: f64) -> CMat {
    if a.ncols() == 0 {
        return CMat::zeros(0, b.ncols());
    }
    if a.nrows() == 0 {
        return CMat::zeros(a.ncols(), b.ncols());
    }
    let Svd { u, s, v } = svd(a);
    let cut = rcond * s.first().copied().unwrap_or(0.0);
    let utb = u.adjoint() * b;
    let mut scaled = CMat::zeros(s.len(), b.ncols());
    for (i, &si) in s.iter().enumerate() {
        if si > cut && si > 0.0 {
            for j in 0..b.ncols() {
                scaled[(i, j)] = utb[(i, j)] / c(si, 0.0);
            }
        }
    }
    v * scaled
}

/// Solves a square system; `None` if singular.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    a.clone().lu().solve(b)
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    a.clone().try_inverse()
}

/// Greedy column-pivoted Gram–Schmidt.
///
/// At every step the remaining column with the largest residual norm is
/// chosen; near-ties (relative slack `1e-10`) go to the lowest index. Stops
/// once the largest residual falls below `tol` times the largest input
/// column norm. Returns the orthonormal columns and the chosen pivots in
/// order.
pub fn pivoted_orthonormalize(cols: &CMat, tol: f64) -> (CMat, Vec<usize>) {
    let n = cols.nrows();
    let m = cols.ncols();
    let mut work: Vec<CVec> = (0..m).map(|j| cols.column(j).into_owned()).collect();
    let scale = work.iter().map(vec_norm).fold(0.0, f64::max);
    let mut basis: Vec<CVec> = Vec::new();
    let mut pivots = Vec::new();
    let mut used = vec![false; m];
    if scale == 0.0 {
        return (CMat::zeros(n, 0), pivots);
    }
    loop {
        let norms: Vec<f64> = work.iter().map(vec_norm).collect();
        let best = (0..m)
            .filter(|&j| !used[j])
            .map(|j| norms[j])
            .fold(0.0, f64::max);
        if best <= tol * scale {
            break;
        }
        let pick = (0..m)
            .find(|&j| !used[j] && norms[j] >= best * (1.0 - PIVOT_TIE))
            .expect("a candidate attains the maximum");
        used[pick] = true;
        let mut v = work[pick].clone();
        // second pass against the accumulated basis
        for q in &basis {
            let proj = q.dotc(&v);
            v -= q * proj;
        }
        let nv = vec_norm(&v);
        v /= c(nv, 0.0);
        for (j, w) in work.iter_mut().enumerate() {
            if used[j] {
                continue;
            }
            let proj = v.dotc(w);
            *w -= &v * proj;
        }
        basis.push(v);
        pivots.push(pick);
        if basis.len() == n {
            break;
        }
    }
    let mut out = CMat::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    (out, pivots)
}

/// Classical Gram–Schmidt with one reorthogonalisation pass, in column
/// order. Columns must be linearly independent.
pub fn gram_schmidt(cols: &CMat) -> CMat {
    let mut out = cols.clone();
    for j in 0..out.ncols() {
        let mut v = out.column(j).into_owned();
        for _ in 0..2 {
            for i in 0..j {
                let q = out.column(i);
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let nv = vec_norm(&v);
        out.set_column(j, &(v / c(nv, 0.0)));
    }
    out
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Column-stacking vectorisation.
pub fn vectorize(m: &CMat) -> CMat {
    CMat::from_column_slice(m.len(), 1, m.as_slice())
}

pub fn unvectorize(v: &[C64], rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v)
}

/// Largest principal-angle sine between the column spans of two
/// orthonormal frames of equal rank.
pub fn subspace_gap(a: &CMat, b: &CMat) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let resid = a - b * (b.adjoint() * a);
    spectral_norm(&resid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_sqrt_squares_back() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let r = psd_sqrt(&m, 1e-12).unwrap();
        assert!(frob(&(&r * &r - &m)) < 1e-12);
        let neg = CMat::from_row_slice(1, 1, &[c(-1.0, 0.0)]);
        assert!(matches!(
            psd_sqrt(&neg, 1e-9),
            Err(Error::NotPositive { .. })
        ));
        let tiny = CMat::from_row_slice(1, 1, &[c(-1e-14, 0.0)]);
        assert_eq!(psd_sqrt(&tiny, 1e-9).unwrap()[(0, 0)], ZERO);
    }

    #[test]
    fn projection_cleanup() {
        let p = CMat::from_row_slice(
            2,
            2,
            &[c(1.0 + 1e-9, 0.0), c(1e-10, 0.0), ZERO, c(-1e-9, 0.0)],
        );
        let (clean, rank) = clean_projection(&p);
        assert_eq!(rank, 1);
        assert!(frob(&(&clean * &clean - &clean)) < 1e-14);
        assert!(frob(&(clean.adjoint() - &clean)) < 1e-14);
    }

    #[test]
    fn svd_reconstructs_clustered_spectrum() {
        // Kronecker structure gives repeated singular values.
        let e = CMat::from_fn(2, 4, |i, j| {
            c(0.3 * i as f64 - 0.2 * j as f64, 0.1 * (i + j) as f64 + 0.5)
        });
        let a = kron(&e.transpose(), &eye(4));
        let Svd { u, s, v } = svd(&a);
        let sigma =
            CMat::from_diagonal(&CVec::from_iterator(s.len(), s.iter().map(|&x| c(x, 0.0))));
        assert!(frob(&(&u * sigma * v.adjoint() - &a)) < 1e-13);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn min_norm_solution() {
        // x + y = 2 has minimum-norm solution (1, 1)
        let a = CMat::from_row_slice(1, 2, &[ONE, ONE]);
        let b = CMat::from_row_slice(1, 1, &[c(2.0, 0.0)]);
        let x = lstsq_min_norm(&a, &b, 1e-12);
        assert!((x[(0, 0)] - ONE).norm() < 1e-14);
        assert!((x[(1, 0)] - ONE).norm() < 1e-14);
    }

    #[test]
    fn pivoting_prefers_lowest_index_on_ties() {
        let cols = CMat::from_row_slice(
            3,
            4,
            &[
                ONE, ZERO, ONE, ZERO, //
                ZERO, ONE, ZERO, ZERO, //
                ZERO, ZERO, ZERO, ZERO,
            ],
        );
        let (q, piv) = pivoted_orthonormalize(&cols, 1e-12);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(q.ncols(), 2);
        assert!(frob(&(q.adjoint() * &q - eye(2))) < 1e-14);
    }

    #[test]
    fn kron_vec_identity() {
        // vec(A X B) = (B^T ⊗ A) vec(X)
        let a = CMat::from_fn(2, 3, |i, j| c(i as f64 + 1.0, j as f64));
        let x = CMat::from_fn(3, 2, |i, j| c(j as f64, -(i as f64)));
        let b = CMat::from_fn(2, 2, |i, j| c((i * j) as f64 + 0.5, 1.0));
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!(frob(&(lhs - rhs)) < 1e-12);
    }
}
