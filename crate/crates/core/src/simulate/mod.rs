//! Monte-Carlo estimators on truncated-Haar channels.
//!
//! Every estimator takes an [`McConfig`]; the result is a pure function of
//! the experiment parameters, `trials` and `master_seed`. Streams depend on
//! the experiment and the channel dimensions but not on the SNR, so sweeps
//! over `rho` reuse the same channel draws.

mod engine;
pub mod stats;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use engine::{run_blocks, run_collect, run_scalar, tag, trial_rng, McConfig, McEstimate, BLOCK_LEN};

use crate::ensembles::{
    complex_normal, draw_channel, sample_ginibre, sample_jacobi_spectrum_wishart, squared_singular_values,
    SpectrumSample, UNIT_TOL,
};
use crate::linalg::{gram, hermitian_eigenvalues, outer_gram};
use crate::{analytic, ChannelDims, Error, Result, C64};
use stats::{ks_two_sample, qpsk_symbol_error, RunningStats};

/// Stream tag of an experiment on a given channel.
pub fn dims_tag(name: &str, dims: ChannelDims) -> u64 {
    let code = ((dims.m_t() as u64) << 42) ^ ((dims.m_r() as u64) << 21) ^ dims.m() as u64;
    tag(name) ^ code.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rho must be finite and >= 0, got {rho}")))
    }
}

/// Squared singular values of a fresh draw, with the structural ones and
/// zeros set exactly.
pub fn draw_spectrum(dims: ChannelDims, rng: &mut ChaCha8Rng) -> Result<SpectrumSample> {
    let real = draw_channel(dims, rng, false);
    Ok(squared_singular_values(&real, UNIT_TOL)?.snapped())
}

/// Mean of `sum_i log2(1 + rho lambda_i)` over fresh draws.
pub fn mc_ergodic_capacity(dims: ChannelDims, rho: f64, cfg: &McConfig) -> Result<McEstimate> {
    check_rho(rho)?;
    run_scalar(cfg, dims_tag("ergodic", dims), |rng, _| Ok(draw_spectrum(dims, rng)?.log_det_bits(rho)))
}

/// Target rate of an outage experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Rate {
    /// Absolute rate in bits per channel use.
    Bits(f64),
    /// Multiplexing ratio `r`, i.e. `r * log2(1 + rho)` bits.
    Ratio(f64),
}

impl Rate {
    pub fn bits(&self, rho: f64) -> Result<f64> {
        let b = match *self {
            Rate::Bits(b) => b,
            Rate::Ratio(r) => r * (rho.ln_1p() / std::f64::consts::LN_2),
        };
        if b >= 0.0 && b.is_finite() {
            Ok(b)
        } else {
            Err(Error::InvalidParameter(format!("rate must be finite and >= 0, got {self:?}")))
        }
    }
}

/// Fraction of draws whose mutual information falls below the rate.
///
/// Below `k log2(1 + rho)` no draw can be in outage; an outage event there is
/// reported as a numerical failure rather than counted.
pub fn mc_outage(dims: ChannelDims, rho: f64, rate: Rate, cfg: &McConfig) -> Result<McEstimate> {
    check_rho(rho)?;
    let bits = rate.bits(rho)?;
    let guaranteed = dims.k() as f64 * (rho.ln_1p() / std::f64::consts::LN_2);
    run_scalar(cfg, dims_tag("outage", dims), |rng, i| {
        let mi = draw_spectrum(dims, rng)?.log_det_bits(rho);
        let out = mi < bits;
        if out && bits < guaranteed {
            return Err(Error::Numerical(format!(
                "trial {i}: mutual information {mi} below {bits} despite {} unit singular values",
                dims.k()
            )));
        }
        Ok(if out { 1.0 } else { 0.0 })
    })
}

/// How the repetition-scheme error rate is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorEstimator {
    /// Average the exact conditional QPSK error at the post-combining SNR.
    Conditional,
    /// Transmit a QPSK symbol, add noise, combine and count decision errors.
    Counting,
}

/// QPSK symbol error of the repetition scheme: one symbol sent from each
/// transmit mode in turn over `m_t` uses, maximal-ratio combined at the
/// receiver. The combined SNR is `rho ||H11||_F^2`.
pub fn mc_repetition_error(
    dims: ChannelDims,
    rho: f64,
    estimator: ErrorEstimator,
    cfg: &McConfig,
) -> Result<McEstimate> {
    check_rho(rho)?;
    let t = dims_tag("repetition", dims);
    match estimator {
        ErrorEstimator::Conditional => run_scalar(cfg, t, |rng, _| {
            let g = draw_channel(dims, rng, false).frobenius_sq();
            Ok(qpsk_symbol_error(rho * g))
        }),
        ErrorEstimator::Counting => run_scalar(cfg, t, |rng, _| {
            let h = draw_channel(dims, rng, false).h11().clone();
            let s = C64::new(
                if rng.random::<bool>() { 1.0 } else { -1.0 },
                if rng.random::<bool>() { 1.0 } else { -1.0 },
            ) * std::f64::consts::FRAC_1_SQRT_2;
            let amp = rho.sqrt();
            let mut u = C64::new(0.0, 0.0);
            for j in 0..dims.m_t() {
                for i in 0..dims.m_r() {
                    let y = h[(i, j)] * s * amp + complex_normal(rng);
                    u += h[(i, j)].conj() * y;
                }
            }
            let wrong = (u.re > 0.0) != (s.re > 0.0) || (u.im > 0.0) != (s.im > 0.0);
            Ok(if wrong { 1.0 } else { 0.0 })
        }),
    }
}

/// Outage of the Alamouti code on `(2, 2, m)`: the event
/// `log2(1 + ||H11||_F^2 rho) < r log2(rho)`.
pub fn mc_alamouti_outage(m: usize, rho: f64, r: f64, cfg: &McConfig) -> Result<McEstimate> {
    let dims = ChannelDims::new(2, 2, m)?;
    if rho <= 0.0 || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("rho must be finite and > 0, got {rho}")));
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("multiplexing ratio must be >= 0, got {r}")));
    }
    let threshold = r * rho.log2();
    run_scalar(cfg, dims_tag("alamouti", dims), |rng, _| {
        let g = draw_channel(dims, rng, false).frobenius_sq();
        Ok(if (g * rho).ln_1p() / std::f64::consts::LN_2 < threshold { 1.0 } else { 0.0 })
    })
}

/// Sample statistics of `||H11||_F^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrobeniusStats {
    pub estimate: McEstimate,
    pub min: f64,
    pub max: f64,
}

pub fn mc_frobenius_sq(dims: ChannelDims, cfg: &McConfig) -> Result<FrobeniusStats> {
    cfg.validate()?;
    let t = dims_tag("frobenius", dims);
    let blocks = run_blocks(cfg.trials, BLOCK_LEN, cfg.workers, |range| {
        let mut s = RunningStats::default();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in range {
            let g = draw_channel(dims, &mut trial_rng(cfg.master_seed, t, i), false).frobenius_sq();
            s.push(g);
            lo = lo.min(g);
            hi = hi.max(g);
        }
        Ok((s, lo, hi))
    })?;
    let mut total = RunningStats::default();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (s, a, b) in &blocks {
        total.merge(s);
        lo = lo.min(*a);
        hi = hi.max(*b);
    }
    Ok(FrobeniusStats { estimate: McEstimate::from_stats(&total, cfg.master_seed), min: lo, max: hi })
}

/// Diversity gain `-d log10(P) / d log10(rho)` by least squares.
pub fn estimate_diversity_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter("slope estimation needs at least 3 points".into()));
    }
    if points.iter().any(|&(r, p)| !(r > 0.0) || !(p > 0.0)) {
        return Err(Error::InvalidParameter("slope estimation needs rho > 0 and probability > 0".into()));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let d = -stats::ls_slope(&x, &y)?;
    Ok(if d == 0.0 { 0.0 } else { d })
}

/// Pooled squared singular values of truncated-Haar draws, `m_min` per draw.
pub fn collect_truncated_spectra(dims: ChannelDims, cfg: &McConfig) -> Result<Vec<f64>> {
    run_collect(cfg, dims_tag("spectrum", dims), |rng, _, out| {
        let real = draw_channel(dims, rng, false);
        out.extend(squared_singular_values(&real, UNIT_TOL)?.lambdas);
        Ok(())
    })
}

/// Pooled eigenvalues of the Wishart-built Jacobi ensemble `J(m1, m2, n)`.
pub fn collect_wishart_jacobi_spectra(m1: usize, m2: usize, n: usize, cfg: &McConfig) -> Result<Vec<f64>> {
    let t = tag("wishart-jacobi") ^ ((m1 as u64) << 42 | (m2 as u64) << 21 | n as u64);
    run_collect(cfg, t, |rng, _, out| {
        out.extend(sample_jacobi_spectrum_wishart(m1, m2, n, rng)?.0.lambdas);
        Ok(())
    })
}

fn rayleigh_eigenvalues(m_r: usize, m_t: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let h = sample_ginibre(m_r, m_t, rng);
    let g = if m_t <= m_r { gram(&h) } else { outer_gram(&h) };
    Ok(hermitian_eigenvalues(&g)?.into_iter().map(|v| v.max(0.0)).collect())
}

/// Pooled eigenvalues of `H^H H` for an `m_r x m_t` i.i.d. `CN(0, 1)` channel.
pub fn collect_rayleigh_spectra(m_r: usize, m_t: usize, cfg: &McConfig) -> Result<Vec<f64>> {
    if m_r == 0 || m_t == 0 {
        return Err(Error::InvalidParameter("Rayleigh channel needs m_r, m_t >= 1".into()));
    }
    let t = tag("rayleigh") ^ ((m_r as u64) << 21 | m_t as u64);
    run_collect(cfg, t, |rng, _, out| {
        out.extend(rayleigh_eigenvalues(m_r, m_t, rng)?);
        Ok(())
    })
}

fn per_draw_stats<F: Fn(&[f64]) -> f64>(pooled: &[f64], per_draw: usize, f: F) -> RunningStats {
    pooled.chunks_exact(per_draw).map(f).collect()
}

/// One `(m, rho_bar)` point of a Jacobi-versus-Rayleigh comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayleighRow {
    pub m: usize,
    /// Average SNR per receive mode, linear.
    pub rho_bar: f64,
    /// Per-mode SNR of the Jacobi channel, `rho_bar * m / m_t`.
    pub rho_mode: f64,
    /// Analytic Jacobi ergodic capacity at `rho_mode`.
    pub capacity_jacobi: f64,
    /// Monte-Carlo Rayleigh ergodic capacity at `rho_bar / m_t` per antenna.
    pub capacity_rayleigh: McEstimate,
    /// Extra SNR (dB) the Jacobi channel needs to match the Rayleigh capacity.
    pub gap_db: f64,
    pub outage_jacobi: McEstimate,
    pub outage_rayleigh: McEstimate,
    /// KS distance between `m * lambda` (Jacobi) and the Wishart eigenvalues.
    pub ks_distance: f64,
}

/// Compare the `(m_t, m_r, m)` Jacobi channel with the i.i.d. Rayleigh channel
/// at common average receive SNR, for every `m` in `m_list` and every
/// `rho_bar` in `rho_bars`. Outage is evaluated at rate `r log2(1 + rho_bar)`.
/// Spectra are drawn once per channel and reused across `rho_bars`.
pub fn rayleigh_compare(
    m_t: usize,
    m_r: usize,
    m_list: &[usize],
    rho_bars: &[f64],
    r: f64,
    cfg: &McConfig,
) -> Result<Vec<RayleighRow>> {
    for &rb in rho_bars {
        if !(rb > 0.0 && rb.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho_bar must be finite and > 0, got {rb}")));
        }
    }
    for &m in m_list {
        if m < m_t + m_r {
            return Err(Error::InvalidParameter(format!(
                "Rayleigh comparison needs m >= m_t + m_r (got m={m}, m_t + m_r = {})",
                m_t + m_r
            )));
        }
    }
    let n = m_t.min(m_r);
    let mi = |lams: &[f64], rho: f64| lams.iter().map(|&l| (rho * l).ln_1p()).sum::<f64>() / std::f64::consts::LN_2;
    let wishart = collect_rayleigh_spectra(m_r, m_t, cfg)?;

    let mut rows = Vec::with_capacity(m_list.len() * rho_bars.len());
    for &m in m_list {
        let dims = ChannelDims::new(m_t, m_r, m)?;
        let scale = m as f64 / m_t as f64;
        let jacobi = collect_truncated_spectra(dims, cfg)?;
        let scaled: Vec<f64> = jacobi.iter().map(|&l| l * m as f64).collect();
        let ks_distance = ks_two_sample(&scaled, &wishart)?;
        for &rho_bar in rho_bars {
            let bits = Rate::Ratio(r).bits(rho_bar)?;
            let rho_w = rho_bar / m_t as f64;
            let rho_mode = rho_bar * scale;
            let cap_w = per_draw_stats(&wishart, n, |l| mi(l, rho_w));
            let out_w = per_draw_stats(&wishart, n, |l| if mi(l, rho_w) < bits { 1.0 } else { 0.0 });
            let out_j = per_draw_stats(&jacobi, n, |l| if mi(l, rho_mode) < bits { 1.0 } else { 0.0 });
            let capacity_rayleigh = McEstimate::from_stats(&cap_w, cfg.master_seed);
            let gap_db = equivalent_snr_gap_db(
                |rb| analytic::ergodic_capacity(dims, rb * scale),
                rho_bar,
                capacity_rayleigh.value,
            )?;
            rows.push(RayleighRow {
                m,
                rho_bar,
                rho_mode,
                capacity_jacobi: analytic::ergodic_capacity(dims, rho_mode)?,
                capacity_rayleigh,
                gap_db,
                outage_jacobi: McEstimate::from_stats(&out_j, cfg.master_seed),
                outage_rayleigh: McEstimate::from_stats(&out_w, cfg.master_seed),
                ks_distance,
            });
        }
    }
    Ok(rows)
}

/// `10 log10(x / rho_bar)` where `cap(x) = target`, for nondecreasing `cap`.
pub fn equivalent_snr_gap_db<F: Fn(f64) -> Result<f64>>(cap: F, rho_bar: f64, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (-60.0_f64, 60.0_f64);
    let at = |db: f64| cap(rho_bar * 10f64.powf(db / 10.0));
    if at(lo)? > target || at(hi)? < target {
        return Err(Error::Numerical(format!("capacity {target} is not reachable within +-60 dB")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
