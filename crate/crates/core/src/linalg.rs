//! Thin wrappers over `nalgebra` for the dense complex linear algebra used by
//! the resonance solvers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest matrix accepted by [`eigenvalues`].
pub const MAX_EIG_DIM: usize = 64;

/// All eigenvalues of a square complex matrix via the complex Schur form.
pub fn eigenvalues(mat: &CMatrix) -> Result<Vec<Complex64>> {
    let n = mat.nrows();
    if n != mat.ncols() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    if n > MAX_EIG_DIM {
        return Err(Error::InvalidArgument(format!(
            "dimension {n} exceeds {MAX_EIG_DIM}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if mat.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let schur = nalgebra::Schur::try_new(mat.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::NoConvergence("Schur iteration".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// `(log|det A|, arg det A)` from an LU factorisation. Returns
/// `Err(SingularMatrix)` for an exactly singular pivot.
pub fn log_det(mat: &CMatrix) -> Result<(f64, f64)> {
    let lu = mat.clone().lu();
    let u = lu.u();
    let mut log_abs = 0.0;
    let mut phase = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        let a = d.norm();
        if a == 0.0 || !a.is_finite() {
            return Err(Error::SingularMatrix);
        }
        log_abs += a.ln();
        phase += d.arg();
    }
    let perm_sign = lu.p().determinant::<f64>();
    if perm_sign < 0.0 {
        phase += std::f64::consts::PI;
    }
    Ok((log_abs, phase))
}

/// Singular values in descending order.
pub fn singular_values(mat: &CMatrix) -> Vec<f64> {
    let sv = mat.clone().svd(false, false).singular_values;
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Largest singular value by power iteration on `A*A`.
pub fn norm2_power(mat: &CMatrix, rel_tol: f64, max_iter: usize) -> f64 {
    let n = mat.ncols();
    if n == 0 {
        return 0.0;
    }
    let ah = mat.adjoint();
    let mut x = nalgebra::DVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + 0.1 * (i as f64).sin(), 0.05 * (i as f64).cos())
    });
    x /= Complex64::new(x.norm(), 0.0);
    let mut sigma2 = 0.0;
    for _ in 0..max_iter {
        let y = &ah * (mat * &x);
        let next = y.norm();
        if next == 0.0 {
            return 0.0;
        }
        x = y / Complex64::new(next, 0.0);
        let done = (next - sigma2).abs() <= rel_tol * next;
        sigma2 = next;
        if done {
            break;
        }
    }
    sigma2.sqrt()
}

/// Divide every row by its largest-magnitude entry (rows of zeros are left
/// untouched).
pub fn row_scaled(mat: &CMatrix) -> CMatrix {
    let mut out = mat.clone();
    for mut row in out.row_iter_mut() {
        let m = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > 0.0 {
            row.iter_mut().for_each(|z| *z /= m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0), c(0.0, 0.0), c(-2.0, 0.5), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        );
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-2.0, 0.5)).norm() < 1e-12);
        assert!((ev[1] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((ev[2] - c(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn log_det_matches_product() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(2.0, 0.0), c(3.0, 0.0), c(1.0, -1.0)]);
        let det = c(0.0, 1.0) * c(1.0, -1.0) - c(6.0, 0.0);
        let (la, ph) = log_det(&m).unwrap();
        let got = Complex64::from_polar(la.exp(), ph);
        assert!((got - det).norm() < 1e-12);
        let z = CMatrix::zeros(2, 2);
        assert_eq!(log_det(&z), Err(Error::SingularMatrix));
    }

    #[test]
    fn power_iteration_agrees_with_svd() {
        let m = CMatrix::from_fn(6, 6, |i, j| c(1.0 / (1.0 + i as f64 + j as f64), 0.1 * (i as f64 - j as f64)));
        let p = norm2_power(&m, 1e-15, 10_000);
        let s = singular_values(&m)[0];
        assert!((p - s).abs() < 1e-12 * s);
    }

    #[test]
    fn scaling_and_singular_values() {
        let id = CMatrix::identity(4, 4);
        let sv = singular_values(&row_scaled(&id));
        assert!((sv[3] - 1.0).abs() < 1e-15);
        let mut m = CMatrix::identity(3, 3);
        m.row_mut(1).fill(c(0.0, 0.0));
        assert!(singular_values(&row_scaled(&m))[2] < 1e-300);
    }
}
