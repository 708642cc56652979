//! Floating-point matrix numerics shared by the analytic routines:
//! conversions to dense complex matrices and spectral helpers.

use crate::connection::ConstMatrix;
use crate::scalars::FloatScalar;
use nalgebra::{Complex, DMatrix};

pub(crate) fn to_dense(a: &ConstMatrix<FloatScalar>) -> DMatrix<Complex<f64>> {
    let n = a.size();
    DMatrix::from_fn(n, n, |i, j| {
        let v = a.get(i, j);
        Complex::new(v.re, v.im)
    })
}

pub(crate) fn from_dense(m: &DMatrix<Complex<f64>>) -> ConstMatrix<FloatScalar> {
    let n = m.nrows();
    let mut out = ConstMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            let c = m[(i, j)];
            out.set(i, j, FloatScalar { re: c.re, im: c.im });
        }
    }
    out
}

/// Eigenvalues via the complex Schur form; `None` when the QR iteration
/// fails to converge (does not occur for the small matrices used here).
pub(crate) fn eigenvalues(a: &ConstMatrix<FloatScalar>) -> Option<Vec<Complex<f64>>> {
    let n = a.size();
    if n == 0 {
        return Some(Vec::new());
    }
    if n == 1 {
        let v = a.get(0, 0);
        return Some(vec![Complex::new(v.re, v.im)]);
    }
    let schur = nalgebra::linalg::Schur::try_new(to_dense(a), 1e-14, 100_000)?;
    let (_, t) = schur.unpack();
    Some((0..n).map(|i| t[(i, i)]).collect())
}
