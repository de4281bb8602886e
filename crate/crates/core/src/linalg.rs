//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{CMatrix, Error, Result, C64};

/// Ascending eigenvalues of a Hermitian matrix (only the lower triangle is read).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    check_finite(m)?;
    let vals = m.symmetric_eigenvalues();
    let mut out: Vec<f64> = vals.iter().copied().collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("hermitian eigensolver returned a non-finite value".into()));
    }
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix, eigenpairs sorted by ascending value.
pub fn hermitian_eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    check_finite(m)?;
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("hermitian eigensolver returned a non-finite value".into()));
    }
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// `A^H A`, symmetrised so that rounding cannot break Hermitian structure.
pub fn gram(a: &CMatrix) -> CMatrix {
    hermitize(a.adjoint() * a)
}

/// `A A^H`, symmetrised.
pub fn outer_gram(a: &CMatrix) -> CMatrix {
    hermitize(a * a.adjoint())
}

pub fn hermitize(m: CMatrix) -> CMatrix {
    let mh = m.adjoint();
    (m + mh).map(|z| z * 0.5)
}

/// Largest entrywise modulus of `M - I`.
pub fn identity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Real symmetric eigen-decomposition, ascending.
pub(crate) fn symmetric_eigh_real(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("matrix contains non-finite entries".into()))
    }
}
