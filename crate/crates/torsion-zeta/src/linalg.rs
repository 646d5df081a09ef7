//! Complex dense linear algebra helpers shared by the spectral and torsion
//! modules: determinants, rank-revealing column selection, generalized
//! kernels via SVD of matrix powers, eigenvalue clustering.
//!
//! Everything here operates on `DMatrix<Complex<f64>>` at desk scale
//! (dimensions in the tens). Eigenvalues of defective matrices split like
//! `eps^(1/k)` under rounding, so rank questions are always answered by
//! singular values of powered matrices, never by eigenvalue magnitudes.

use nalgebra::{Complex, DMatrix, DVector};



pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Determinant by LU. A 0x0 matrix has determinant 1 (empty product).
pub fn det(m: &CMatrix) -> C64 {
    assert_eq!(m.nrows(), m.ncols(), "determinant of non-square matrix");
    if m.nrows() == 0 {
        return c64(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Frobenius-like scale of a matrix, used to make tolerances relative.
pub fn scale_of(m: &CMatrix) -> f64 {
    let s = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Rank-revealing column selection by modified Gram-Schmidt with column
/// pivoting. Returns the numerical rank and the selected column indices in
/// pivot order. `tol` is relative to the largest column norm.
pub fn rank_revealing_columns(m: &CMatrix, tol: f64) -> (usize, Vec<usize>) {
    let ncols = m.ncols();
    if m.nrows() == 0 || ncols == 0 {
        return (0, Vec::new());
    }
    let mut cols: Vec<CVector> = (0..ncols).map(|j| m.column(j).into_owned()).collect();
    let mut remaining: Vec<usize> = (0..ncols).collect();
    let mut pivots = Vec::new();
    let norm0 = remaining
        .iter()
        .map(|&j| cols[j].norm())
        .fold(0.0_f64, f64::max);
    if norm0 == 0.0 {
        return (0, Vec::new());
    }
    while !remaining.is_empty() {
        let (pos, &best) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| {
                cols[*a.1]
                    .norm()
                    .partial_cmp(&cols[*b.1].norm())
                    .expect("column norms are finite")
            })
            .expect("non-empty remaining set");
        let pivot_norm = cols[best].norm();
        if pivot_norm <= tol * norm0 {
            break;
        }
        let q = cols[best].clone() / c64(pivot_norm, 0.0);
        remaining.remove(pos);
        pivots.push(best);
        for &j in &remaining {
            let proj = q.dotc(&cols[j]);
            let update = &q * proj;
            cols[j] -= update;
        }
    }
    (pivots.len(), pivots)
}

/// Numerical rank via singular values with a relative gap threshold.
/// Returns `(rank, smallest_kept, largest_dropped)`.
pub fn rank_by_svd(m: &CMatrix, rel_tol: f64) -> (usize, f64, f64) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0, 0.0, 0.0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return (0, 0.0, 0.0);
    }
    let mut rank = 0;
    for s in sv.iter() {
        if *s > rel_tol * smax {
            rank += 1;
        }
    }
    let kept = if rank > 0 { sv[rank - 1] } else { 0.0 };
    let dropped = if rank < sv.len() { sv[rank] } else { 0.0 };
    (rank, kept, dropped)
}

/// Orthonormal basis of the null space of `m`, as columns. `rel_tol` is
/// relative to the largest singular value.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let n = m.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMatrix::identity(n, n);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let mut null_rows: Vec<usize> = Vec::new();
    for (i, s) in sv.iter().enumerate() {
        if smax == 0.0 || *s <= rel_tol * smax {
            null_rows.push(i);
        }
    }
    // Rows of V^H beyond min(nrows, ncols) never appear in v_t; for wide
    // matrices the remaining kernel directions are appended by completing
    // the basis. Desk-scale inputs here are square, so this path is rare.
    let mut basis: Vec<CVector> = null_rows
        .iter()
        .map(|&i| v_t.row(i).adjoint().column(0).into_owned())
        .collect();
    if v_t.nrows() < n {
        complete_kernel_basis(&v_t, &mut basis);
    }
    let mut out = CMatrix::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

fn complete_kernel_basis(v_t: &CMatrix, basis: &mut Vec<CVector>) {
    let n = v_t.ncols();
    for j in 0..n {
        let mut e = CVector::zeros(n);
        e[j] = c64(1.0, 0.0);
        for i in 0..v_t.nrows() {
            let row = v_t.row(i).adjoint().column(0).into_owned();
            let proj = row.dotc(&e);
            e -= row * proj;
        }
        for b in basis.iter() {
            let proj = b.dotc(&e);
            e -= b * proj;
        }
        let norm = e.norm();
        if norm > 1e-8 {
            basis.push(e / c64(norm, 0.0));
        }
    }
}

/// `m^k` by repeated multiplication (k is at most the dimension here).
pub fn matrix_power(m: &CMatrix, k: usize) -> CMatrix {
    let n = m.nrows();
    let mut acc = CMatrix::identity(n, n);
    for _ in 0..k {
        acc = &acc * m;
    }
    acc
}

/// All eigenvalues (with repetition) of a square complex matrix.
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    assert_eq!(m.nrows(), m.ncols(), "eigenvalues of non-square matrix");
    if m.nrows() == 0 {
        return Vec::new();
    }
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let ev = m
        .clone()
        .eigenvalues()
        .expect("complex Schur iteration converged");
    let mut out: Vec<C64> = ev.iter().cloned().collect();
    sort_complex(&mut out);
    out
}

/// Sort complex numbers by `(re, im)`; the ordering is only used to make
/// clustering and multiset comparison deterministic.
pub fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("finite eigenvalues")
    });
}

/// Group a sorted eigenvalue list into `(representative, multiplicity)`
/// clusters. Two values belong to one cluster when they differ by at most
/// `tol * scale` where `scale` is the largest magnitude in the list.
pub fn cluster_multiplicities(eigs: &[C64], tol: f64) -> Vec<(C64, u32)> {
    if eigs.is_empty() {
        return Vec::new();
    }
    let mut sorted = eigs.to_vec();
    sort_complex(&mut sorted);
    let scale = sorted
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let mut out: Vec<(C64, u32)> = Vec::new();
    let mut members: Vec<C64> = vec![sorted[0]];
    for &z in &sorted[1..] {
        let rep = members.iter().sum::<C64>() / c64(members.len() as f64, 0.0);
        if (z - rep).norm() <= tol * scale {
            members.push(z);
        } else {
            out.push(flush_cluster(&members));
            members = vec![z];
        }
    }
    out.push(flush_cluster(&members));
    out
}

fn flush_cluster(members: &[C64]) -> (C64, u32) {
    let rep = members.iter().sum::<C64>() / c64(members.len() as f64, 0.0);
    (rep, members.len() as u32)
}

/// Compensated (Kahan-Neumaier) summation of complex terms in the given
/// order, componentwise. Deterministic regardless of how the terms were
/// produced, and exact under catastrophic cancellation of large partials.
pub fn kahan_sum<I: IntoIterator<Item = C64>>(terms: I) -> C64 {
    let mut sum = [0.0_f64; 2];
    let mut comp = [0.0_f64; 2];
    for t in terms {
        for (i, part) in [t.re, t.im].into_iter().enumerate() {
            let tmp = sum[i] + part;
            if sum[i].abs() >= part.abs() {
                comp[i] += (sum[i] - tmp) + part;
            } else {
                comp[i] += (part - tmp) + sum[i];
            }
            sum[i] = tmp;
        }
    }
    c64(sum[0] + comp[0], sum[1] + comp[1])
}

/// Solve `a x = b` for square invertible `a`.
pub fn solve(a: &CMatrix, b: &CVector) -> Option<CVector> {
    if a.nrows() == 0 {
        return Some(CVector::zeros(0));
    }
    a.clone().lu().solve(b)
}

/// Least-squares residual of expressing the columns of `b` in the column
/// span of `a`; returns the coefficient matrix and the residual norm.
pub fn express_in_basis(a: &CMatrix, b: &CMatrix) -> (CMatrix, f64) {
    if a.ncols() == 0 {
        return (CMatrix::zeros(0, b.ncols()), b.norm());
    }
    // Normal equations are fine at these scales and condition numbers.
    let ah = a.adjoint();
    let gram = &ah * a;
    let rhs = &ah * b;
    let coeff = gram
        .lu()
        .solve(&rhs)
        .unwrap_or_else(|| CMatrix::zeros(a.ncols(), b.ncols()));
    let resid = b - a * &coeff;
    (coeff, resid.norm())
}

/// Relative multiset comparison of two complex spectra within `tol`.
pub fn multisets_match(a: &[C64], b: &[C64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sort_complex(&mut sa);
    sort_complex(&mut sb);
    let scale = sa
        .iter()
        .chain(sb.iter())
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    sa.iter()
        .zip(sb.iter())
        .all(|(x, y)| (x - y).norm() <= tol * scale)
}
