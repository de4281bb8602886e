//! Closed-form quantities of the Jacobi channel.
//!
//! Everything here is deterministic and linear-scale: `rho` is the SNR per
//! excited mode and rates are in bits.

use serde::Serialize;

use crate::specfun::{gauss_jacobi_rule, inv_reg_inc_beta, jacobi_norm_b, jacobi_poly, reg_inc_beta};
use crate::{ChannelDims, Error, Result};

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rho must be finite and >= 0, got {rho}")))
    }
}

fn weight_exponents(dims: ChannelDims) -> Result<(u32, u32)> {
    if !dims.is_unconstrained() {
        return Err(Error::Contract(format!(
            "the eigenvalue density needs m_t + m_r <= m, got {dims}"
        )));
    }
    Ok((dims.alpha() as u32, dims.beta() as u32))
}

/// Density of one unordered squared singular value, for `m_t + m_r <= m`.
pub fn eigen_density(dims: ChannelDims, lambda: f64) -> Result<f64> {
    let (a, b) = weight_exponents(dims)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Ok(0.0);
    }
    Ok(density_unchecked(dims.m_min(), a, b, lambda))
}

fn density_unchecked(n: usize, a: u32, b: u32, lambda: f64) -> f64 {
    let x = 1.0 - 2.0 * lambda;
    let s: f64 = (0..n).map(|k| jacobi_poly(k, a, b, x).powi(2) / jacobi_norm_b(k, a, b)).sum();
    let w = lambda.powi(a as i32) * (1.0 - lambda).powi(b as i32);
    (s * w / n as f64).max(0.0)
}

/// Gauss-Legendre panels `[0, h], [h, 2h], [2h, 4h], ...` with `h = 1/rho`,
/// so the logarithm is resolved near the origin at every SNR.
fn graded_integral<F: Fn(f64) -> f64>(rho: f64, nodes: usize, f: F) -> Result<f64> {
    let rule = gauss_jacobi_rule(nodes, 0, 0)?;
    let mut edges = vec![0.0];
    let mut h = if rho > 1.0 { 1.0 / rho } else { 1.0 };
    while h < 1.0 {
        edges.push(h);
        h *= 2.0;
    }
    edges.push(1.0);
    Ok(edges.windows(2).map(|e| rule.integrate_on(e[0], e[1], &f)).sum())
}

/// Ergodic capacity in bits per channel use with `Q = I`.
///
/// For `m_t + m_r <= m` this is `m_min * int log2(1 + rho l) f(l) dl`.
/// Otherwise the `k` unit singular values each contribute `log2(1 + rho)`
/// and the rest behave like the residual channel `(m - m_r, m - m_t, m)`.
pub fn ergodic_capacity(dims: ChannelDims, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    if !dims.is_unconstrained() {
        let unit = dims.k() as f64 * log2_1p(rho);
        let rest = match dims.residual() {
            Some(r) => ergodic_capacity(r, rho)?,
            None => 0.0,
        };
        return Ok(unit + rest);
    }
    let (a, b) = weight_exponents(dims)?;
    let n = dims.m_min();
    let degree = 2 * (n - 1) + (a + b) as usize;
    let c = graded_integral(rho, 24 + degree / 2, |l| {
        (rho * l).ln_1p() * density_unchecked(n, a, b, l)
    })?;
    Ok((n as f64 * c / std::f64::consts::LN_2).max(0.0))
}

/// Case-I capacity from the orthogonal-polynomial sum with an `nodes`-point
/// Gauss-Jacobi rule carrying the weight. Loses accuracy at high `rho`, where
/// the logarithm is poorly resolved; kept as an independent cross-check.
pub fn ergodic_capacity_jacobi_sum(dims: ChannelDims, rho: f64, nodes: usize) -> Result<f64> {
    check_rho(rho)?;
    let (a, b) = weight_exponents(dims)?;
    let rule = gauss_jacobi_rule(nodes, a, b)?;
    let total: f64 = (0..dims.m_min())
        .map(|k| {
            rule.integrate(|l| (rho * l).ln_1p() * jacobi_poly(k, a, b, 1.0 - 2.0 * l).powi(2))
                / jacobi_norm_b(k, a, b)
        })
        .sum();
    Ok(total / std::f64::consts::LN_2)
}

/// Default node count for [`ergodic_capacity_jacobi_sum`].
pub fn default_sum_nodes(dims: ChannelDims) -> usize {
    dims.m_min() + 32
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Outage probability of the single-input channel `(1, m_r, m)` at rate `r_bits`.
///
/// `||h||^2` is `Beta(m_r, m - m_r)`, so the outage is `I_x(m_r, m - m_r)`
/// with `x = (2^R - 1) / rho`.
pub fn outage_single_mode(m_r: usize, m: usize, r_bits: f64, rho: f64) -> Result<f64> {
    if m_r == 0 || m < m_r + 1 {
        return Err(Error::InvalidParameter(format!(
            "single-input outage needs 1 <= m_r <= m - 1 (got m_r={m_r}, m={m})"
        )));
    }
    check_rho(rho)?;
    if !(r_bits >= 0.0) {
        return Err(Error::InvalidParameter(format!("rate must be >= 0, got {r_bits}")));
    }
    if r_bits == 0.0 {
        return Ok(0.0);
    }
    if rho == 0.0 {
        return Ok(1.0);
    }
    let x = (r_bits * std::f64::consts::LN_2).exp_m1() / rho;
    if x >= 1.0 {
        return Ok(1.0);
    }
    Ok(reg_inc_beta(x, m_r as f64, (m - m_r) as f64))
}

/// Smallest `rho / (2^R - 1)` that keeps the single-input outage at or below `epsilon`.
pub fn rho_norm(m_r: usize, m: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Contract(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if m_r == 0 || m_r > m {
        return Err(Error::InvalidParameter(format!(
            "rho_norm needs 1 <= m_r <= m (got m_r={m_r}, m={m})"
        )));
    }
    if m_r == m {
        return Ok(1.0);
    }
    let x = inv_reg_inc_beta(epsilon, m_r as f64, (m - m_r) as f64);
    if !(x > 0.0) {
        return Err(Error::Numerical(format!("inverse incomplete beta underflowed at epsilon={epsilon}")));
    }
    Ok(1.0 / x)
}

/// Outage reduction for `k > 0`: the outage at ratio `r` equals the outage of
/// the residual channel at `max(r - k, 0)`. The residual is `None` when it has
/// no modes, in which case any positive reduced ratio is always in outage.
pub fn outage_rate_reduction(dims: ChannelDims, r: f64) -> Result<(Option<ChannelDims>, f64)> {
    if dims.k() == 0 {
        return Err(Error::Contract(format!("rate reduction needs m_t + m_r > m, got {dims}")));
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("multiplexing ratio must be >= 0, got {r}")));
    }
    Ok((dims.residual(), (r - dims.k() as f64).max(0.0)))
}

/// Piecewise-linear optimal diversity-multiplexing curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmtCurve {
    /// `(r, d)` vertices, `r` ascending; the curve ends at `d = 0`.
    pub vertices: Vec<(f64, f64)>,
    /// `d(r)` is infinite for `r` below this value.
    pub infinite_below: f64,
}

impl DmtCurve {
    /// `d*(r)`: infinite below the threshold, interpolated on the vertices,
    /// zero past the last vertex.
    pub fn eval(&self, r: f64) -> f64 {
        if r < self.infinite_below {
            return f64::INFINITY;
        }
        let v = &self.vertices;
        if v.is_empty() || r >= v[v.len() - 1].0 {
            return 0.0;
        }
        if r <= v[0].0 {
            return v[0].1;
        }
        let i = v.partition_point(|p| p.0 <= r);
        let (r0, d0) = v[i - 1];
        let (r1, d1) = v[i];
        d0 + (d1 - d0) * (r - r0) / (r1 - r0)
    }
}

/// Optimal DMT of the Jacobi channel.
pub fn dmt_optimal_curve(dims: ChannelDims) -> DmtCurve {
    if dims.is_unconstrained() {
        let (t, r) = (dims.m_t(), dims.m_r());
        let vertices = (0..=dims.m_min())
            .map(|j| (j as f64, ((t - j) * (r - j)) as f64))
            .collect();
        return DmtCurve { vertices, infinite_below: 0.0 };
    }
    let k = dims.k() as f64;
    let vertices = match dims.residual() {
        Some(res) => dmt_optimal_curve(res).vertices.into_iter().map(|(r, d)| (r + k, d)).collect(),
        None => vec![(k, 0.0)],
    };
    DmtCurve { vertices, infinite_below: k }
}
