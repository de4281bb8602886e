//! Random-matrix ensembles behind the Jacobi channel.
//!
//! The channel `H11` is the top-left `m_r x m_t` block of an `m x m` Haar
//! unitary. Haar unitaries come from the QR factorisation of a Ginibre matrix
//! with the diagonal of `R` rotated onto the positive real axis; the plain
//! Householder `Q` is not Haar distributed.
//!
//! When only `H11` is needed, the sampler factors the `m x m_t` Ginibre slab
//! instead of the full square matrix. Column `j` of the phase-corrected `Q`
//! depends on the first `j` Ginibre columns only, so the slab yields exactly
//! the first `m_t` columns of the full construction at `O(m m_t^2)` cost.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::linalg::{gram, hermitian_eigenvalues, hermitize, outer_gram};
use crate::{CMatrix, Error, Result, C64};

/// Default tolerance for classifying an eigenvalue as exactly 0 or 1.
pub const UNIT_TOL: f64 = 1e-9;

/// Clamping beyond this magnitude is counted as suspicious.
pub const CLAMP_WARN: f64 = 1e-10;

/// Mode counts `(m_t, m_r, m)` of a truncated-Haar channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ChannelDims {
    m_t: usize,
    m_r: usize,
    m: usize,
}

impl ChannelDims {
    pub fn new(m_t: usize, m_r: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if m_t == 0 || m_t > m {
            return Err(Error::InvalidParameter(format!(
                "m_t must satisfy 1 <= m_t <= m (got m_t={m_t}, m={m})"
            )));
        }
        if m_r == 0 || m_r > m {
            return Err(Error::InvalidParameter(format!(
                "m_r must satisfy 1 <= m_r <= m (got m_r={m_r}, m={m})"
            )));
        }
        Ok(Self { m_t, m_r, m })
    }

    pub fn m_t(&self) -> usize {
        self.m_t
    }

    pub fn m_r(&self) -> usize {
        self.m_r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of singular values pinned at one, `max(m_t + m_r - m, 0)`.
    pub fn k(&self) -> usize {
        (self.m_t + self.m_r).saturating_sub(self.m)
    }

    pub fn m_min(&self) -> usize {
        self.m_t.min(self.m_r)
    }

    pub fn m_max(&self) -> usize {
        self.m_t.max(self.m_r)
    }

    /// `|m_r - m_t|`, the exponent of `lambda` in the Jacobi weight.
    pub fn alpha(&self) -> usize {
        self.m_t.abs_diff(self.m_r)
    }

    /// `m - m_t - m_r`; negative in the `k > 0` regime.
    pub fn beta(&self) -> i64 {
        self.m as i64 - self.m_t as i64 - self.m_r as i64
    }

    /// `m_t + m_r <= m`: no singular value is forced to one.
    pub fn is_unconstrained(&self) -> bool {
        self.m_t + self.m_r <= self.m
    }

    /// Residual channel `(m - m_r, m - m_t, m)` left after removing the `k`
    /// unit singular values. `None` when either residual side is empty.
    pub fn residual(&self) -> Option<ChannelDims> {
        let t = self.m - self.m_r;
        let r = self.m - self.m_t;
        if t == 0 || r == 0 {
            None
        } else {
            Some(ChannelDims { m_t: t, m_r: r, m: self.m })
        }
    }

    /// Same channel with transmitter and receiver swapped.
    pub fn swapped(&self) -> ChannelDims {
        ChannelDims { m_t: self.m_r, m_r: self.m_t, m: self.m }
    }
}

impl std::fmt::Display for ChannelDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.m_t, self.m_r, self.m)
    }
}

/// One channel draw: `H11` and, optionally, the full unitary it came from.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    dims: ChannelDims,
    h11: CMatrix,
    full: Option<CMatrix>,
}

impl ChannelRealization {
    /// Wrap an explicit `m x m` unitary (no unitarity check is made).
    pub fn from_unitary(dims: ChannelDims, u: CMatrix) -> Result<Self> {
        if u.nrows() != dims.m() || u.ncols() != dims.m() {
            return Err(Error::InvalidParameter(format!(
                "expected a {0}x{0} matrix, got {1}x{2}",
                dims.m(),
                u.nrows(),
                u.ncols()
            )));
        }
        let h11 = u.view((0, 0), (dims.m_r(), dims.m_t())).into_owned();
        Ok(Self { dims, h11, full: Some(u) })
    }

    /// Wrap a bare `m_r x m_t` block.
    pub fn from_block(dims: ChannelDims, h11: CMatrix) -> Result<Self> {
        if h11.nrows() != dims.m_r() || h11.ncols() != dims.m_t() {
            return Err(Error::InvalidParameter(format!(
                "expected a {}x{} block, got {}x{}",
                dims.m_r(),
                dims.m_t(),
                h11.nrows(),
                h11.ncols()
            )));
        }
        Ok(Self { dims, h11, full: None })
    }

    pub fn dims(&self) -> ChannelDims {
        self.dims
    }

    pub fn h11(&self) -> &CMatrix {
        &self.h11
    }

    pub fn full(&self) -> Option<&CMatrix> {
        self.full.as_ref()
    }

    pub fn h12(&self) -> Option<CMatrix> {
        let (mt, mr, m) = (self.dims.m_t, self.dims.m_r, self.dims.m);
        self.full.as_ref().map(|u| u.view((0, mt), (mr, m - mt)).into_owned())
    }

    pub fn h21(&self) -> Option<CMatrix> {
        let (mt, mr, m) = (self.dims.m_t, self.dims.m_r, self.dims.m);
        self.full.as_ref().map(|u| u.view((mr, 0), (m - mr, mt)).into_owned())
    }

    pub fn h22(&self) -> Option<CMatrix> {
        let (mt, mr, m) = (self.dims.m_t, self.dims.m_r, self.dims.m);
        self.full.as_ref().map(|u| u.view((mr, mt), (m - mr, m - mt)).into_owned())
    }

    /// `||H11||_F^2`, the sum of the squared singular values.
    pub fn frobenius_sq(&self) -> f64 {
        crate::linalg::frobenius_sq(&self.h11)
    }
}

/// Ascending squared singular values with a 0 / interior / 1 classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub lambdas: Vec<f64>,
    pub n_unit: usize,
    pub n_interior: usize,
    pub n_zero: usize,
    pub tol: f64,
    /// Values that had to be moved into `[0, 1]` by more than [`CLAMP_WARN`].
    pub clamp_warnings: usize,
}

impl SpectrumSample {
    /// Clamp raw eigenvalues into `[0, 1]`, sort and classify.
    pub fn from_raw(mut raw: Vec<f64>, tol: f64) -> Self {
        let mut clamp_warnings = 0;
        for v in raw.iter_mut() {
            let c = v.clamp(0.0, 1.0);
            if (c - *v).abs() > CLAMP_WARN {
                clamp_warnings += 1;
            }
            *v = c;
        }
        raw.sort_by(|a, b| a.total_cmp(b));
        let n_unit = raw.iter().filter(|&&v| v >= 1.0 - tol).count();
        let n_zero = raw.iter().filter(|&&v| v <= tol).count();
        let n_interior = raw.len() - n_unit - n_zero;
        Self { lambdas: raw, n_unit, n_interior, n_zero, tol, clamp_warnings }
    }

    /// Replace values classified as unit or zero by exactly 1 and 0.
    pub fn snapped(mut self) -> Self {
        let tol = self.tol;
        for v in self.lambdas.iter_mut() {
            if *v >= 1.0 - tol {
                *v = 1.0;
            } else if *v <= tol {
                *v = 0.0;
            }
        }
        self
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `sum_i log2(1 + rho * lambda_i)`, the mutual information with `Q = I`.
    pub fn log_det_bits(&self, rho: f64) -> f64 {
        self.lambdas.iter().map(|&l| (rho * l).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
    }
}

/// Outcome of checking the unit-eigenvalue structure of one realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub n_unit_found: usize,
    pub n_zero_found: usize,
    pub expected_unit: usize,
    pub expected_zero: usize,
    /// Max abs difference between the non-unit eigenvalues of `H11^H H11`
    /// and the eigenvalues of `H22 H22^H`, paired in sorted order.
    pub residual_match_error: f64,
    pub tol: f64,
}

impl Lemma1Report {
    pub fn holds(&self) -> bool {
        self.n_unit_found >= self.expected_unit
            && self.n_zero_found >= self.expected_zero
            && self.residual_match_error <= self.tol
    }
}

pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of i.i.d. `CN(0, 1)` entries, drawn column by column.
pub fn sample_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let data: Vec<C64> = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    CMatrix::from_vec(rows, cols, data)
}

/// First `cols` columns of an `m x m` Haar unitary.
fn haar_frame<R: Rng + ?Sized>(m: usize, cols: usize, rng: &mut R) -> CMatrix {
    let z = sample_ginibre(m, cols, rng);
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { C64::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed `m x m` unitary.
pub fn sample_haar_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMatrix {
    haar_frame(m, m, rng)
}

/// Draw `H11` from a fresh Haar unitary; `keep_full` retains all four blocks.
pub fn draw_channel<R: Rng + ?Sized>(
    dims: ChannelDims,
    rng: &mut R,
    keep_full: bool,
) -> ChannelRealization {
    if keep_full {
        let u = sample_haar_unitary(dims.m(), rng);
        let h11 = u.view((0, 0), (dims.m_r(), dims.m_t())).into_owned();
        ChannelRealization { dims, h11, full: Some(u) }
    } else {
        let frame = haar_frame(dims.m(), dims.m_t(), rng);
        let h11 = frame.rows(0, dims.m_r()).into_owned();
        ChannelRealization { dims, h11, full: None }
    }
}

/// The `m_min` squared singular values of `H11`.
///
/// Uses `H11^H H11` when `m_t <= m_r` and `H11 H11^H` otherwise, so the Gram
/// matrix is always `m_min x m_min` and carries no structural zeros.
pub fn squared_singular_values(real: &ChannelRealization, tol: f64) -> Result<SpectrumSample> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidParameter(format!("tolerance must lie in (0, 1e-3], got {tol}")));
    }
    let h = real.h11();
    let g = if h.ncols() <= h.nrows() { gram(h) } else { outer_gram(h) };
    Ok(SpectrumSample::from_raw(hermitian_eigenvalues(&g)?, tol))
}

/// Spectrum of the Jacobi ensemble `J(m1, m2, n)` built from two Wisharts.
///
/// Returns the eigenvalues of `(A+B)^{-1/2} A (A+B)^{-1/2}` with
/// `A = G1^H G1`, `B = G2^H G2`, together with the number of draws that were
/// rejected because `A + B` was numerically singular.
pub fn sample_jacobi_spectrum_wishart<R: Rng + ?Sized>(
    m1: usize,
    m2: usize,
    n: usize,
    rng: &mut R,
) -> Result<(SpectrumSample, u32)> {
    if n == 0 {
        return Ok((SpectrumSample::from_raw(Vec::new(), UNIT_TOL), 0));
    }
    if m1 < n || m2 < n {
        return Err(Error::InvalidParameter(format!(
            "Jacobi ensemble needs m1 >= n and m2 >= n (got m1={m1}, m2={m2}, n={n})"
        )));
    }
    const MAX_RESAMPLES: u32 = 64;
    let mut resamples = 0;
    loop {
        let g1 = sample_ginibre(m1, n, rng);
        let g2 = sample_ginibre(m2, n, rng);
        let a = gram(&g1);
        let s = hermitize(&a + gram(&g2));
        let (vals, vecs) = crate::linalg::hermitian_eigh(&s)?;
        let top = vals.last().copied().unwrap_or(0.0);
        if vals[0] <= 1e-13 * top.max(f64::MIN_POSITIVE) {
            resamples += 1;
            if resamples > MAX_RESAMPLES {
                return Err(Error::Numerical("A + B repeatedly singular".into()));
            }
            continue;
        }
        let inv_sqrt = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            vals.iter().map(|&v| C64::new(v.sqrt().recip(), 0.0)),
        ));
        let s_inv_half = &vecs * inv_sqrt * vecs.adjoint();
        let form = hermitize(&s_inv_half * a * &s_inv_half);
        let raw = hermitian_eigenvalues(&form)?;
        return Ok((SpectrumSample::from_raw(raw, UNIT_TOL), resamples));
    }
}

/// Check the unit / zero / `H22` structure of `H11^H H11` for one draw.
pub fn verify_lemma1(real: &ChannelRealization, tol: f64) -> Result<Lemma1Report> {
    let dims = real.dims();
    if dims.k() == 0 {
        return Err(Error::Contract(format!(
            "unit-eigenvalue structure needs m_t + m_r > m, got {dims}"
        )));
    }
    let h22 = real
        .h22()
        .ok_or_else(|| Error::Contract("realization does not retain the full unitary".into()))?;
    let mut lam = hermitian_eigenvalues(&gram(real.h11()))?;
    lam.sort_by(|a, b| a.total_cmp(b));
    let n_unit_found = lam.iter().filter(|&&v| (v - 1.0).abs() <= tol).count();
    let n_zero_found = lam.iter().filter(|&&v| v.abs() <= tol).count();

    let k = dims.k();
    let rest = &lam[..lam.len() - k];
    let lam22 = hermitian_eigenvalues(&outer_gram(&h22))?;
    let residual_match_error = rest
        .iter()
        .zip(lam22.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    Ok(Lemma1Report {
        n_unit_found,
        n_zero_found,
        expected_unit: k,
        expected_zero: dims.m_t() - dims.m_min(),
        residual_match_error,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity_defect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn dims_validation() {
        assert!(ChannelDims::new(0, 1, 2).is_err());
        assert!(ChannelDims::new(3, 1, 2).is_err());
        assert!(ChannelDims::new(1, 3, 2).is_err());
        let d = ChannelDims::new(3, 2, 4).unwrap();
        assert_eq!((d.k(), d.m_min(), d.m_max(), d.alpha(), d.beta()), (1, 2, 3, 1, -1));
        assert_eq!(d.residual(), Some(ChannelDims::new(2, 1, 4).unwrap()));
        assert_eq!(ChannelDims::new(4, 4, 4).unwrap().residual(), None);
    }

    #[test]
    fn eigenvalue_count_partition() {
        for m in 1..=7 {
            for mt in 1..=m {
                for mr in 1..=m {
                    let d = ChannelDims::new(mt, mr, m).unwrap();
                    if d.k() > 0 {
                        // unit + zero + H22-matched eigenvalues of H11^H H11
                        assert_eq!(d.k() + (d.m_t() - d.m_min()) + (m - d.m_max()), d.m_t());
                        assert_eq!(d.k() + (m - d.m_r()), d.m_t());
                    }
                }
            }
        }
    }

    #[test]
    fn ginibre_is_deterministic() {
        let a = sample_ginibre(3, 2, &mut rng(9));
        let b = sample_ginibre(3, 2, &mut rng(9));
        assert_eq!(a, b);
    }

    #[test]
    fn ginibre_unit_variance() {
        let mut r = rng(1);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_ginibre(1, 1, &mut r)[(0, 0)].norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean |g|^2 = {mean}");
    }

    #[test]
    fn ginibre_entries_uncorrelated() {
        let mut r = rng(2);
        let n = 100_000;
        let mut cov = [[C64::new(0.0, 0.0); 6]; 6];
        for _ in 0..n {
            let g = sample_ginibre(3, 2, &mut r);
            let v: Vec<C64> = g.iter().copied().collect();
            for i in 0..6 {
                for j in 0..6 {
                    cov[i][j] += v[i] * v[j].conj();
                }
            }
        }
        for (i, row) in cov.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let c = c / n as f64;
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((c - C64::new(target, 0.0)).norm() < 0.02, "cov[{i}][{j}] = {c}");
            }
        }
    }

    #[test]
    fn haar_is_unitary() {
        let mut r = rng(3);
        for m in [1, 2, 5, 8, 16] {
            let u = sample_haar_unitary(m, &mut r);
            assert!(identity_defect(&(u.adjoint() * &u)) < 1e-12);
        }
        let u = sample_haar_unitary(1, &mut r);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_eigenvalues_on_unit_circle() {
        let u = sample_haar_unitary(8, &mut rng(4));
        let schur = nalgebra::Schur::new(u);
        let (_, t) = schur.unpack();
        for i in 0..8 {
            assert!((t[(i, i)].norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn haar_entry_power_is_uniform() {
        let mut r = rng(5);
        let n = 100_000;
        let mut acc = [[0.0; 4]; 4];
        for _ in 0..n {
            let u = sample_haar_unitary(4, &mut r);
            for i in 0..4 {
                for j in 0..4 {
                    acc[i][j] += u[(i, j)].norm_sqr();
                }
            }
        }
        for row in acc {
            for v in row {
                assert!((v / n as f64 - 0.25).abs() < 0.01);
            }
        }
    }

    #[test]
    fn thin_and_full_draws_agree() {
        let d = ChannelDims::new(2, 3, 5).unwrap();
        let thin = draw_channel(d, &mut rng(6), false);
        let full = draw_channel(d, &mut rng(6), true);
        let diff = (thin.h11() - full.h11()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn full_truncation_is_unitary() {
        let d = ChannelDims::new(4, 4, 4).unwrap();
        let real = draw_channel(d, &mut rng(7), false);
        let s = squared_singular_values(&real, UNIT_TOL).unwrap();
        assert!(s.lambdas.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert_eq!(s.n_unit, 4);
    }

    #[test]
    fn one_unit_value_for_223() {
        let d = ChannelDims::new(2, 2, 3).unwrap();
        let mut r = rng(8);
        for _ in 0..1000 {
            let s = squared_singular_values(&draw_channel(d, &mut r, false), UNIT_TOL).unwrap();
            assert!(s.n_unit >= 1);
            assert!((s.lambdas[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_frobenius_power() {
        let d = ChannelDims::new(2, 2, 4).unwrap();
        let mut r = rng(10);
        let n = 100_000;
        let mean = (0..n).map(|_| draw_channel(d, &mut r, false).frobenius_sq()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn tolerance_is_validated() {
        let d = ChannelDims::new(1, 1, 2).unwrap();
        let real = draw_channel(d, &mut rng(11), false);
        assert!(squared_singular_values(&real, 0.0).is_err());
        assert!(squared_singular_values(&real, 0.1).is_err());
    }

    #[test]
    fn wishart_jacobi_degenerate_and_bounds() {
        let mut r = rng(12);
        let (s, _) = sample_jacobi_spectrum_wishart(2, 3, 0, &mut r).unwrap();
        assert!(s.is_empty());
        assert!(sample_jacobi_spectrum_wishart(1, 3, 2, &mut r).is_err());
        for _ in 0..200 {
            let (s, _) = sample_jacobi_spectrum_wishart(3, 2, 2, &mut r).unwrap();
            assert!(s.lambdas.iter().all(|&l| (0.0..=1.0).contains(&l)));
            assert_eq!(s.clamp_warnings, 0);
        }
    }

    #[test]
    fn wishart_jacobi_uniform_mean() {
        let mut r = rng(13);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_jacobi_spectrum_wishart(1, 1, 1, &mut r).unwrap().0.lambdas[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "{mean}");
    }

    #[test]
    fn lemma1_structure() {
        let mut r = rng(14);
        for (mt, mr, m) in [(2, 2, 3), (3, 3, 4), (4, 3, 4), (3, 2, 4)] {
            let d = ChannelDims::new(mt, mr, m).unwrap();
            for _ in 0..200 {
                let rep = verify_lemma1(&draw_channel(d, &mut r, true), UNIT_TOL).unwrap();
                assert!(rep.holds(), "{d}: {rep:?}");
            }
        }
    }

    #[test]
    fn lemma1_requires_positive_k_and_full_matrix() {
        let mut r = rng(15);
        let d = ChannelDims::new(2, 2, 4).unwrap();
        assert!(matches!(verify_lemma1(&draw_channel(d, &mut r, true), UNIT_TOL), Err(Error::Contract(_))));
        let d = ChannelDims::new(2, 2, 3).unwrap();
        assert!(matches!(verify_lemma1(&draw_channel(d, &mut r, false), UNIT_TOL), Err(Error::Contract(_))));
    }

    #[test]
    fn blocks_tile_the_unitary() {
        let d = ChannelDims::new(2, 3, 5).unwrap();
        let real = draw_channel(d, &mut rng(16), true);
        assert_eq!(real.h12().unwrap().shape(), (3, 3));
        assert_eq!(real.h21().unwrap().shape(), (2, 2));
        assert_eq!(real.h22().unwrap().shape(), (2, 3));
        let h11 = real.h11();
        let h21 = real.h21().unwrap();
        let s = h11.adjoint() * h11 + h21.adjoint() * h21;
        assert!(identity_defect(&s) < 1e-12);
    }
}
