//! Special functions: Jacobi polynomials, Gauss-Jacobi quadrature on `[0, 1]`
//! and the regularized incomplete beta function.

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// `P_k^{(alpha, beta)}(x)` by the ascending three-term recurrence.
pub fn jacobi_poly(k: usize, alpha: u32, beta: u32, x: f64) -> f64 {
    let (a, b) = (alpha as f64, beta as f64);
    let mut p0 = 1.0;
    if k == 0 {
        return p0;
    }
    let mut p1 = 0.5 * (a + b + 2.0) * x + 0.5 * (a - b);
    for n in 2..=k {
        let n = n as f64;
        let c = 2.0 * n + a + b;
        let a1 = 2.0 * n * (n + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Squared norm of `P_k(1 - 2 lambda)` against `lambda^alpha (1 - lambda)^beta` on `[0, 1]`:
///
/// `b = C(2k+a+b, k) / C(2k+a+b, k+a) / (2k+a+b+1)`.
///
/// The binomial ratio collapses to `prod_{i=1..a} (k+i) / (k+b+i)`, every
/// factor of which is at most one, so nothing overflows.
pub fn jacobi_norm_b(k: usize, alpha: u32, beta: u32) -> f64 {
    let (k, a, b) = (k as f64, alpha as f64, beta as f64);
    let ratio: f64 = (1..=alpha).map(|i| (k + i as f64) / (k + b + i as f64)).product();
    ratio / (2.0 * k + a + b + 1.0)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Gauss rule for the weight `lambda^alpha (1 - lambda)^beta` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: u32,
    pub beta: u32,
}

impl QuadratureRule {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// `sum_i w_i f(x_i)`, i.e. `int_0^1 lambda^alpha (1-lambda)^beta f(lambda)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Integrate over `[lo, hi]`; the weight is transported along, so this is
    /// only the plain integral when `alpha = beta = 0`.
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let h = hi - lo;
        h * self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(lo + h * x)).sum::<f64>()
    }
}

/// Golub-Welsch on the monic Jacobi recurrence on `[-1, 1]`, mapped through
/// `lambda = (1 - x) / 2`.
pub fn gauss_jacobi_rule(n: usize, alpha: u32, beta: u32) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
    }
    let (a, b) = (alpha as f64, beta as f64);
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let jf = j as f64;
        let s = 2.0 * jf + a + b;
        jm[(j, j)] = if j == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) };
        if j + 1 < n {
            let i = jf + 1.0;
            let s = 2.0 * i + a + b;
            let num = 4.0 * i * (i + a) * (i + b) * (i + a + b);
            let den = s * s * (s + 1.0) * (s - 1.0);
            let off = (num / den).sqrt();
            jm[(j, j + 1)] = off;
            jm[(j + 1, j)] = off;
        }
    }
    let (xs, vecs) = crate::linalg::symmetric_eigh_real(jm)?;
    let mu0 = ln_beta(a + 1.0, b + 1.0).exp();
    // x ascending means lambda descending; walk backwards.
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in (0..n).rev() {
        nodes.push(0.5 * (1.0 - xs[i]));
        weights.push(mu0 * vecs[(0, i)] * vecs[(0, i)]);
    }
    if nodes.iter().chain(&weights).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("Gauss-Jacobi rule produced non-finite values".into()));
    }
    Ok(QuadratureRule { nodes, weights, alpha, beta })
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b) = B(x; a, b) / B(1; a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        (front * beta_cf(x, a, b) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - front * beta_cf(1.0 - x, b, a) / b).clamp(0.0, 1.0)
    }
}

/// Inverse of [`reg_inc_beta`] in `x`: Newton steps kept inside a shrinking
/// bisection bracket.
pub fn inv_reg_inc_beta(p: f64, a: f64, b: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ln_b = ln_beta(a, b);
    let mut x = initial_guess(p, a, b).clamp(1e-300, 1.0 - 1e-16);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..400 {
        let f = reg_inc_beta(x, a, b) - p;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let ln_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b;
        let pdf = ln_pdf.exp();
        let mut next = if pdf > 0.0 && pdf.is_finite() { x - f / pdf } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = if lo == 0.0 { (hi * 1e-3).max(0.5 * hi.min(x)) } else { 0.5 * (lo + hi) };
            if lo > 0.0 && hi / lo > 1e3 {
                next = (lo * hi).sqrt();
            }
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.max(f64::MIN_POSITIVE) {
            return next;
        }
        x = next;
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    x
}

fn initial_guess(p: f64, a: f64, b: f64) -> f64 {
    if a >= 1.0 && b >= 1.0 {
        let pp = if p < 0.5 { p } else { 1.0 - p };
        let t = (-2.0 * pp.ln()).sqrt();
        let mut z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if p < 0.5 {
            z = -z;
        }
        let al = (z * z - 3.0) / 6.0;
        let h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        let w = z * (al + h).sqrt() / h
            - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        a / (a + b * (2.0 * w).exp())
    } else {
        let lna = (a / (a + b)).ln();
        let lnb = (b / (a + b)).ln();
        let t = (a * lna).exp() / a;
        let u = (b * lnb).exp() / b;
        let w = t + u;
        if p < t / w {
            (a * w * p).powf(1.0 / a)
        } else {
            1.0 - (b * w * (1.0 - p)).powf(1.0 / b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Rodrigues' formula expanded with Leibniz:
    /// `P_k(x) = 2^-k sum_s C(k+a, s) C(k+b, k-s) (x-1)^(k-s) (x+1)^s`.
    fn rodrigues(k: usize, a: u32, b: u32, x: f64) -> f64 {
        fn binom(n: f64, r: usize) -> f64 {
            (0..r).map(|i| (n - i as f64) / (i + 1) as f64).product()
        }
        let (ka, kb) = ((k as u32 + a) as f64, (k as u32 + b) as f64);
        (0..=k)
            .map(|s| binom(ka, s) * binom(kb, k - s) * (x - 1.0).powi((k - s) as i32) * (x + 1.0).powi(s as i32))
            .sum::<f64>()
            / 2f64.powi(k as i32)
    }

    #[test]
    fn low_degree_values() {
        assert_eq!(jacobi_poly(0, 3, 1, 0.7), 1.0);
        assert!((jacobi_poly(1, 0, 0, 0.5) - 0.5).abs() < 1e-15);
        assert!((jacobi_poly(1, 2, 5, 0.3) - (9.0 * 0.3 / 2.0 - 1.5)).abs() < 1e-14);
    }

    #[test]
    fn recurrence_matches_rodrigues() {
        let xs = [-0.97, -0.81, -0.64, -0.5, -0.33, -0.2, -0.11, -0.03, 0.05, 0.12, 0.25, 0.31, 0.44, 0.5, 0.58, 0.66, 0.72, 0.85, 0.93, 0.99];
        for &x in &xs {
            let got = jacobi_poly(5, 2, 3, x);
            let want = rodrigues(5, 2, 3, x);
            assert!((got - want).abs() < 1e-10, "x={x}: {got} vs {want}");
        }
        for k in 0..8 {
            for (a, b) in [(0, 0), (1, 4), (3, 0), (6, 6)] {
                let got = jacobi_poly(k, a, b, 0.37);
                let want = rodrigues(k, a, b, 0.37);
                assert!((got - want).abs() < 1e-9 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn norm_constants() {
        assert!((jacobi_norm_b(0, 0, 0) - 1.0).abs() < 1e-15);
        assert!((jacobi_norm_b(0, 1, 1) - 1.0 / 6.0).abs() < 1e-15);
        // Legendre on [0, 1]: 1 / (2k + 1)
        for k in 0..10 {
            assert!((jacobi_norm_b(k, 0, 0) - 1.0 / (2 * k + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn norm_matches_quadrature() {
        for k in 0..9 {
            for a in 0..=6 {
                for b in 0..=6 {
                    let rule = gauss_jacobi_rule(k + 2, a, b).unwrap();
                    let q = rule.integrate(|l| jacobi_poly(k, a, b, 1.0 - 2.0 * l).powi(2));
                    let want = jacobi_norm_b(k, a, b);
                    assert!(((q - want) / want).abs() < 1e-9, "k={k} a={a} b={b}: {q} vs {want}");
                }
            }
        }
    }

    #[test]
    fn orthogonality() {
        for a in 0..=6 {
            for b in 0..=6 {
                let rule = gauss_jacobi_rule(10, a, b).unwrap();
                for k in 0..=8 {
                    for j in 0..k {
                        let q = rule.integrate(|l| {
                            let x = 1.0 - 2.0 * l;
                            jacobi_poly(k, a, b, x) * jacobi_poly(j, a, b, x)
                        });
                        assert!(q.abs() < 1e-9, "k={k} j={j} a={a} b={b}: {q}");
                    }
                }
            }
        }
    }

    #[test]
    fn large_parameters_stay_finite() {
        for k in [0, 10, 50, 100] {
            let v = jacobi_norm_b(k, 50, 50);
            assert!(v.is_finite() && v > 0.0);
            assert!(jacobi_poly(k, 50, 50, 0.3).is_finite());
        }
    }

    #[test]
    fn midpoint_rule() {
        let r = gauss_jacobi_rule(1, 0, 0).unwrap();
        assert!((r.nodes[0] - 0.5).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn beta_moments_are_exact() {
        let rule = gauss_jacobi_rule(8, 1, 2).unwrap();
        // int lambda^j * lambda (1-lambda)^2 = B(j+2, 3)
        for j in 0..=15 {
            let q = rule.integrate(|l| l.powi(j));
            let want = ln_beta(j as f64 + 2.0, 3.0).exp();
            assert!(((q - want) / want).abs() < 1e-12, "j={j}: {q} vs {want}");
        }
    }

    #[test]
    fn rule_structure() {
        for (n, a, b) in [(1, 0, 0), (5, 2, 0), (20, 3, 7), (40, 0, 12)] {
            let r = gauss_jacobi_rule(n, a, b).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.nodes.iter().all(|&x| x > 0.0 && x < 1.0));
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            let total: f64 = r.weights.iter().sum();
            let want = ln_beta(a as f64 + 1.0, b as f64 + 1.0).exp();
            assert!(((total - want) / want).abs() < 1e-12);
        }
    }

    #[test]
    fn incomplete_beta_values() {
        for x in [0.0, 0.3, 1.0] {
            assert!((reg_inc_beta(x, 1.0, 1.0) - x).abs() < 1e-14);
        }
        for a in [1.0, 2.0, 5.0] {
            assert!((reg_inc_beta(0.5, a, a) - 0.5).abs() < 1e-12);
        }
        assert!((reg_inc_beta(0.1, 2.0, 2.0) - 0.028).abs() < 1e-12);
        assert_eq!(reg_inc_beta(0.0, 3.0, 4.0), 0.0);
        assert_eq!(reg_inc_beta(1.0, 3.0, 4.0), 1.0);
    }

    #[test]
    fn incomplete_beta_matches_statrs() {
        for &(x, a, b) in &[(0.2, 0.5, 0.7), (0.9, 12.0, 3.0), (0.01, 2.0, 60.0), (0.6, 30.0, 25.0)] {
            let got = reg_inc_beta(x, a, b);
            let want = statrs::function::beta::beta_reg(a, b, x);
            assert!((got - want).abs() < 1e-10 * want.max(1e-300).max(got), "{x} {a} {b}: {got} vs {want}");
        }
    }

    #[test]
    fn inverse_endpoints_and_symmetry() {
        assert_eq!(inv_reg_inc_beta(0.0, 2.0, 3.0), 0.0);
        assert_eq!(inv_reg_inc_beta(1.0, 2.0, 3.0), 1.0);
        assert!((inv_reg_inc_beta(0.5, 3.0, 3.0) - 0.5).abs() < 1e-10);
        assert!((inv_reg_inc_beta(1e-3, 1.0, 1.0) - 1e-3).abs() < 1e-14);
    }

    #[test]
    fn inverse_deep_tail() {
        for &(a, b) in &[(1.0, 63.0), (16.0, 48.0), (2.0, 2.0), (48.0, 16.0)] {
            for p in [1e-3, 1e-4, 1e-5] {
                let x = inv_reg_inc_beta(p, a, b);
                assert!(((reg_inc_beta(x, a, b) - p) / p).abs() < 1e-8, "a={a} b={b} p={p} x={x}");
            }
        }
    }

    proptest! {
        #[test]
        fn inverse_round_trip(x in 0.001f64..0.999, a in 0.3f64..40.0, b in 0.3f64..40.0) {
            let p = reg_inc_beta(x, a, b);
            prop_assume!(p > 1e-300 && p < 1.0 - 1e-12);
            let back = inv_reg_inc_beta(p, a, b);
            prop_assert!((reg_inc_beta(back, a, b) - p).abs() < 1e-9);
            // x is only identifiable where the CDF is not flat
            let ln_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b);
            if ln_pdf.exp() > 1e-3 {
                prop_assert!((back - x).abs() < 1e-8, "x={} back={}", x, back);
            }
        }

        #[test]
        fn incomplete_beta_monotone(x in 0.0f64..1.0, dx in 0.0f64..0.2, a in 0.5f64..20.0, b in 0.5f64..20.0) {
            let y = (x + dx).min(1.0);
            prop_assert!(reg_inc_beta(y, a, b) >= reg_inc_beta(x, a, b) - 1e-14);
        }
    }
}
