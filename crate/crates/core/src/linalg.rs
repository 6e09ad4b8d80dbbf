//! Thin wrappers over the system BLAS/LAPACK for the few dense kernels that
//! dominate training cost. Everything is column-major, matching `nalgebra`.

use nalgebra::DMatrix;

use crate::error::{numerical, Result};

const CBLAS_COL_MAJOR: i32 = 102;
const CBLAS_UPPER: i32 = 121;
const CBLAS_NO_TRANS: i32 = 111;
const CBLAS_TRANS: i32 = 112;

extern "C" {
    fn cblas_dsyrk(
        order: i32,
        uplo: i32,
        trans: i32,
        n: i32,
        k: i32,
        alpha: f64,
        a: *const f64,
        lda: i32,
        beta: f64,
        c: *mut f64,
        ldc: i32,
    );
    fn cblas_dgemm(
        order: i32,
        trans_a: i32,
        trans_b: i32,
        m: i32,
        n: i32,
        k: i32,
        alpha: f64,
        a: *const f64,
        lda: i32,
        b: *const f64,
        ldb: i32,
        beta: f64,
        c: *mut f64,
        ldc: i32,
    );
    fn dposv_(
        uplo: *const u8,
        n: *const i32,
        nrhs: *const i32,
        a: *mut f64,
        lda: *const i32,
        b: *mut f64,
        ldb: *const i32,
        info: *mut i32,
    );
}

/// `c += a * a^T` over the first `cols` columns of `a` (rank-k update,
/// upper triangle; call [`symmetrize_upper`] before consuming the full matrix).
pub fn syrk_accumulate(c: &mut DMatrix<f64>, a: &DMatrix<f64>, cols: usize) {
    let n = a.nrows();
    debug_assert_eq!(c.nrows(), n);
    debug_assert_eq!(c.ncols(), n);
    debug_assert!(cols <= a.ncols());
    if n == 0 || cols == 0 {
        return;
    }
    unsafe {
        cblas_dsyrk(
            CBLAS_COL_MAJOR,
            CBLAS_UPPER,
            CBLAS_NO_TRANS,
            n as i32,
            cols as i32,
            1.0,
            a.as_slice().as_ptr(),
            n as i32,
            1.0,
            c.as_mut_slice().as_mut_ptr(),
            n as i32,
        );
    }
}

/// Mirrors the upper triangle into the lower one.
pub fn symmetrize_upper(c: &mut DMatrix<f64>) {
    let n = c.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            c[(i, j)] = c[(j, i)];
        }
    }
}

/// `c += a * b^T` using the first `cols` columns of both `a` (m x cols) and
/// `b` (n x cols).
pub fn gemm_abt_accumulate(c: &mut DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>, cols: usize) {
    let m = a.nrows();
    let n = b.nrows();
    debug_assert_eq!(c.nrows(), m);
    debug_assert_eq!(c.ncols(), n);
    if m == 0 || n == 0 || cols == 0 {
        return;
    }
    unsafe {
        cblas_dgemm(
            CBLAS_COL_MAJOR,
            CBLAS_NO_TRANS,
            CBLAS_TRANS,
            m as i32,
            n as i32,
            cols as i32,
            1.0,
            a.as_slice().as_ptr(),
            m as i32,
            b.as_slice().as_ptr(),
            n as i32,
            1.0,
            c.as_mut_slice().as_mut_ptr(),
            m as i32,
        );
    }
}

/// Solves `a * x = b` for symmetric positive-definite `a` by Cholesky
/// factorization in place. `a` is overwritten by its factor, `b` by the
/// solution. Never forms an explicit inverse.
pub fn solve_spd_in_place(a: &mut DMatrix<f64>, b: &mut DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), n);
    debug_assert_eq!(b.nrows(), n);
    let nrhs = b.ncols();
    let (nn, rr, mut info) = (n as i32, nrhs as i32, 0i32);
    unsafe {
        dposv_(
            b"U".as_ptr(),
            &nn,
            &rr,
            a.as_mut_slice().as_mut_ptr(),
            &nn,
            b.as_mut_slice().as_mut_ptr(),
            &nn,
            &mut info,
        );
    }
    if info != 0 {
        return Err(numerical(format!(
            "Cholesky factorization failed: matrix not positive definite \
             (LAPACK dposv info = {info}; leading minor of that order is singular)"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn syrk_matches_naive_product() {
        let a = DMatrix::from_fn(4, 7, |i, j| ((i * 3 + j) as f64).sin());
        let mut g = DMatrix::zeros(4, 4);
        syrk_accumulate(&mut g, &a, 7);
        symmetrize_upper(&mut g);
        let expect = &a * a.transpose();
        assert_relative_eq!(g, expect, epsilon = 1e-12);
    }

    #[test]
    fn gemm_abt_matches_naive_product() {
        let a = DMatrix::from_fn(3, 5, |i, j| (i + 2 * j) as f64);
        let b = DMatrix::from_fn(4, 5, |i, j| (i as f64) - (j as f64) * 0.5);
        let mut c = DMatrix::zeros(3, 4);
        gemm_abt_accumulate(&mut c, &a, &b, 5);
        let expect = &a * b.transpose();
        assert_relative_eq!(c, expect, epsilon = 1e-12);
    }

    #[test]
    fn spd_solve_recovers_rhs() {
        let m = DMatrix::from_fn(5, 5, |i, j| ((i * 5 + j) as f64).cos());
        let mut a = &m * m.transpose() + DMatrix::identity(5, 5);
        let x_true = DMatrix::from_fn(5, 2, |i, j| (i + j) as f64);
        let mut b = &a * &x_true;
        solve_spd_in_place(&mut a, &mut b).unwrap();
        assert_relative_eq!(b, x_true, epsilon = 1e-10);
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        let mut a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        let mut b = DMatrix::zeros(2, 1);
        assert!(solve_spd_in_place(&mut a, &mut b).is_err());
    }
}
