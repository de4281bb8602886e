//! Delayed-feedback scheme that turns a `k > 0` Jacobi channel into `k`
//! unfaded scalar channels of SNR `rho`.
//!
//! At use `i` the transmitter sends `k` fresh symbols on the first modes and
//! relays `H21^(i-l) x^(i-l)` on the remaining `m - m_r` modes. After the
//! frame the last `l` relay vectors are delivered by repetition. The receiver
//! then peels backwards: combining `y^(i)` with a unit-noise measure of
//! `sqrt(rho) H21^(i) x^(i)` through `[H11^H H21^H]` yields
//! `sqrt(rho) x^(i) + z` with white unit noise, whose relay part is the
//! measure needed for use `i - l`.
//!
//! With [`RelayPower::Unit`] the relay vector is spread by a unitary DFT and
//! scaled by `sqrt(m / m_t)`, which gives every relay mode unit average
//! power. The receiver undoes the scaling and adds independent noise so that
//! each measure again carries exactly unit noise.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ensembles::{complex_normal, draw_channel};
use crate::linalg::{gram, hermitian_eigh, hermitize, identity_defect};
use crate::simulate::stats::qpsk_bit_error;
use crate::simulate::{run_blocks, tag, trial_rng};
use crate::{CMatrix, ChannelDims, Error, Result, C64};

/// Slack allowed on the eigenvalues of `I - H11^H H11`.
const COMPLETION_TOL: f64 = 1e-9;

/// `H21` with `H11^H H11 + H21^H H21 = I`: the `m - m_r` leading eigenpairs of
/// `I - H11^H H11 = V L V^H` give the rows `sqrt(l_j) v_j^H`, largest first.
pub fn complete_unitary(h11: &CMatrix, dims: ChannelDims) -> Result<CMatrix> {
    if dims.k() == 0 {
        return Err(Error::Contract(format!("unitary completion needs m_t + m_r > m, got {dims}")));
    }
    if h11.nrows() != dims.m_r() || h11.ncols() != dims.m_t() {
        return Err(Error::InvalidParameter(format!(
            "H11 must be {}x{}, got {}x{}",
            dims.m_r(),
            dims.m_t(),
            h11.nrows(),
            h11.ncols()
        )));
    }
    let m_t = dims.m_t();
    let q = dims.m() - dims.m_r();
    let defect = hermitize(CMatrix::identity(m_t, m_t) - gram(h11));
    let (vals, vecs) = hermitian_eigh(&defect)?;
    if vals[0] < -COMPLETION_TOL {
        return Err(Error::Numerical(format!(
            "I - H11^H H11 has eigenvalue {} < 0: H11 is not a contraction",
            vals[0]
        )));
    }
    if m_t > q && vals[m_t - q - 1] > COMPLETION_TOL {
        return Err(Error::Numerical(format!(
            "I - H11^H H11 has rank above m - m_r = {q}; no completion exists"
        )));
    }
    let mut h21 = CMatrix::zeros(q, m_t);
    for row in 0..q {
        let idx = m_t - 1 - row;
        let s = vals[idx].max(0.0).sqrt();
        for c in 0..m_t {
            h21[(row, c)] = vecs[(c, idx)].conj() * s;
        }
    }
    Ok(h21)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Modulation {
    /// Gray-mapped QPSK with unit energy; bit errors are counted.
    Qpsk,
    /// `CN(0, 1)` symbols as a proxy for a Gaussian codebook.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChannelMode {
    /// A fresh Haar draw for every channel use.
    Fresh,
    /// One draw held for the whole frame, closing included.
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RelayPower {
    /// Spread and scale the relay so every mode has unit average power.
    Unit,
    /// Send `H21 x` as is; relay modes then carry `m_t / m` on average.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeConfig {
    pub dims: ChannelDims,
    /// Data channel uses per frame.
    pub n: usize,
    /// Feedback delay in channel uses.
    pub delay_l: usize,
    /// Linear SNR per mode.
    pub rho: f64,
    pub modulation: Modulation,
    pub seed: u64,
    pub channel_mode: ChannelMode,
    pub relay_power: RelayPower,
    /// Put extra symbols in the relay slots of the first `l` uses, which
    /// would otherwise carry zeros.
    pub reuse_zero_rows: bool,
}

impl SchemeConfig {
    pub fn new(dims: ChannelDims, n: usize, delay_l: usize, rho: f64) -> Self {
        Self {
            dims,
            n,
            delay_l,
            rho,
            modulation: Modulation::Gaussian,
            seed: 0,
            channel_mode: ChannelMode::Fresh,
            relay_power: RelayPower::Unit,
            reuse_zero_rows: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.k() == 0 {
            return Err(Error::Contract(format!(
                "the feedback scheme needs m_t + m_r > m, got {}",
                self.dims
            )));
        }
        if self.delay_l == 0 {
            return Err(Error::InvalidParameter("feedback delay must be at least 1".into()));
        }
        if self.n <= self.delay_l {
            return Err(Error::InvalidParameter(format!(
                "frame length n={} must exceed the delay l={}",
                self.n, self.delay_l
            )));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be finite and > 0, got {}", self.rho)));
        }
        Ok(())
    }

    /// Channel uses spent delivering the last `l` relay vectors by repetition.
    pub fn overhead_uses(&self) -> usize {
        self.delay_l * (self.dims.m() - self.dims.m_r()) * self.dims.m_t()
    }

    fn relay_gain(&self) -> f64 {
        match self.relay_power {
            RelayPower::Unit => (self.dims.m() as f64 / self.dims.m_t() as f64).sqrt(),
            RelayPower::Literal => 1.0,
        }
    }
}

/// Measurements of one or more frames.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeReport {
    pub frames: u64,
    /// Empirical `E|sqrt(rho) s|^2 / E|noise|^2` for each of the `k` streams.
    pub per_stream_snr: Vec<f64>,
    /// Max entrywise deviation of the combined-noise covariance from `I`.
    pub noise_cov_error: f64,
    /// Largest normalized noise cross-correlation between two streams.
    pub stream_cross_corr: f64,
    /// `(k n + extra) log2(1 + rho) / (n + overhead)` bits per channel use.
    pub achieved_rate: f64,
    /// `k log2(1 + rho)`.
    pub target_rate: f64,
    pub ber: Option<f64>,
    pub bit_errors: u64,
    pub bits: u64,
    /// Closed-form QPSK bit error at SNR `rho`.
    pub ber_awgn: f64,
    pub overhead_uses: usize,
    pub extra_symbols: u64,
    /// Per-frame mutual information in bits per channel use, from the
    /// algebraic noise covariance of every combined use.
    pub frame_mutual_information: Vec<f64>,
    /// Worst `|H11^H H11 + H21^H H21 - I|` over all uses.
    pub combining_defect: f64,
    /// Smallest ratio of side-information SNR to `rho` before noise matching.
    pub min_side_snr_ratio: f64,
    /// Average `|x_j|^2` per transmit mode over the data uses.
    pub mode_power: Vec<f64>,
}

impl SchemeReport {
    /// Frames whose mutual information reaches `rate`.
    pub fn frames_supporting(&self, rate: f64) -> usize {
        self.frame_mutual_information.iter().filter(|&&v| v >= rate).count()
    }
}

/// Transmitted signals of one frame, one column per data use.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitTrace {
    pub k: usize,
    pub delay_l: usize,
    pub x: CMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    pub per_mode: Vec<f64>,
    /// `max_j |per_mode[j] - 1|`.
    pub max_deviation: f64,
    /// Whether the relay entries of the first `l` uses are all zero.
    pub leading_relay_zero: bool,
    /// Largest `| |s|^2 - 1 |` over the new-symbol entries.
    pub symbol_power_spread: f64,
}

/// Empirical per-mode power of a transmitted frame.
pub fn power_check(trace: &TransmitTrace) -> PowerReport {
    let (m_t, n) = trace.x.shape();
    let per_mode: Vec<f64> =
        (0..m_t).map(|j| trace.x.row(j).iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64).collect();
    let max_deviation = per_mode.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    let lead = trace.delay_l.min(n);
    let leading_relay_zero = (trace.k..m_t).all(|j| (0..lead).all(|i| trace.x[(j, i)].norm_sqr() == 0.0));
    let symbol_power_spread = (0..trace.k)
        .flat_map(|j| trace.x.row(j).iter().map(|z| (z.norm_sqr() - 1.0).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    PowerReport { per_mode, max_deviation, leading_relay_zero, symbol_power_spread }
}

/// Run one frame with the stream derived from `cfg.seed`.
pub fn run_feedback_scheme(cfg: &SchemeConfig) -> Result<SchemeReport> {
    Ok(run_feedback_scheme_traced(cfg)?.0)
}

/// [`run_feedback_scheme`] also returning the transmitted signals.
pub fn run_feedback_scheme_traced(cfg: &SchemeConfig) -> Result<(SchemeReport, TransmitTrace)> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, tag("feedback"), 0);
    let (tally, trace) = simulate_frame(cfg, &mut rng, true)?;
    Ok((tally.report(cfg), trace.expect("trace requested")))
}

/// Run `frames` independent frames (frame `f` uses stream `f`) and pool
/// their measurements. The result does not depend on `workers`.
pub fn run_feedback_frames(cfg: &SchemeConfig, frames: u64, workers: usize) -> Result<SchemeReport> {
    cfg.validate()?;
    if frames == 0 {
        return Err(Error::InvalidParameter("frames must be at least 1".into()));
    }
    let tallies = run_blocks(frames, 1, workers, |r| {
        let mut rng = trial_rng(cfg.seed, tag("feedback"), r.start);
        Ok(simulate_frame(cfg, &mut rng, false)?.0)
    })?;
    let mut it = tallies.into_iter();
    let mut total = it.next().expect("at least one frame");
    for t in it {
        total.merge(t);
    }
    Ok(total.report(cfg))
}

#[derive(Debug, Clone)]
struct FrameTally {
    frames: u64,
    sig_pow: Vec<f64>,
    noise_pow: Vec<f64>,
    noise_cov: CMatrix,
    noise_samples: u64,
    bit_errors: u64,
    bits: u64,
    mode_pow: Vec<f64>,
    uses: u64,
    extra_symbols: u64,
    frame_mi: Vec<f64>,
    combining_defect: f64,
    min_side_snr_ratio: f64,
}

impl FrameTally {
    fn new(k: usize, m_t: usize) -> Self {
        Self {
            frames: 0,
            sig_pow: vec![0.0; k],
            noise_pow: vec![0.0; k],
            noise_cov: CMatrix::zeros(m_t, m_t),
            noise_samples: 0,
            bit_errors: 0,
            bits: 0,
            mode_pow: vec![0.0; m_t],
            uses: 0,
            extra_symbols: 0,
            frame_mi: Vec::new(),
            combining_defect: 0.0,
            min_side_snr_ratio: f64::INFINITY,
        }
    }

    fn merge(&mut self, o: FrameTally) {
        self.frames += o.frames;
        for (a, b) in self.sig_pow.iter_mut().zip(&o.sig_pow) {
            *a += b;
        }
        for (a, b) in self.noise_pow.iter_mut().zip(&o.noise_pow) {
            *a += b;
        }
        self.noise_cov += &o.noise_cov;
        self.noise_samples += o.noise_samples;
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
        for (a, b) in self.mode_pow.iter_mut().zip(&o.mode_pow) {
            *a += b;
        }
        self.uses += o.uses;
        self.extra_symbols += o.extra_symbols;
        self.frame_mi.extend(o.frame_mi);
        self.combining_defect = self.combining_defect.max(o.combining_defect);
        self.min_side_snr_ratio = self.min_side_snr_ratio.min(o.min_side_snr_ratio);
    }

    fn report(&self, cfg: &SchemeConfig) -> SchemeReport {
        let k = cfg.dims.k();
        let per_stream_snr = self.sig_pow.iter().zip(&self.noise_pow).map(|(s, z)| s / z).collect();
        let cov = self.noise_cov.map(|z| z / self.noise_samples as f64);
        let noise_cov_error = identity_defect(&cov);
        let mut stream_cross_corr = 0.0_f64;
        for a in 0..k {
            for b in 0..a {
                let c = cov[(a, b)].norm() / (cov[(a, a)].re * cov[(b, b)].re).sqrt();
                stream_cross_corr = stream_cross_corr.max(c);
            }
        }
        let l2 = cfg.rho.ln_1p() / std::f64::consts::LN_2;
        let total_uses = (cfg.n + cfg.overhead_uses()) as f64;
        let per_frame_extra = self.extra_symbols as f64 / self.frames as f64;
        let achieved_rate = ((k * cfg.n) as f64 + per_frame_extra) * l2 / total_uses;
        let ber = match cfg.modulation {
            Modulation::Qpsk => Some(self.bit_errors as f64 / self.bits as f64),
            Modulation::Gaussian => None,
        };
        SchemeReport {
            frames: self.frames,
            per_stream_snr,
            noise_cov_error,
            stream_cross_corr,
            achieved_rate,
            target_rate: k as f64 * l2,
            ber,
            bit_errors: self.bit_errors,
            bits: self.bits,
            ber_awgn: qpsk_bit_error(cfg.rho),
            overhead_uses: cfg.overhead_uses(),
            extra_symbols: self.extra_symbols,
            frame_mutual_information: self.frame_mi.clone(),
            combining_defect: self.combining_defect,
            min_side_snr_ratio: self.min_side_snr_ratio,
            mode_power: self.mode_pow.iter().map(|p| p / self.uses as f64).collect(),
        }
    }
}

fn dft(q: usize) -> CMatrix {
    let s = (q as f64).sqrt().recip();
    CMatrix::from_fn(q, q, |a, b| {
        let phase = -2.0 * std::f64::consts::PI * (a * b) as f64 / q as f64;
        C64::from_polar(s, phase)
    })
}

fn symbol(modulation: Modulation, rng: &mut ChaCha8Rng) -> C64 {
    match modulation {
        Modulation::Qpsk => {
            let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
        Modulation::Gaussian => complex_normal(rng),
    }
}

fn noise_vec(len: usize, std: f64, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(len, 1, |_, _| complex_normal(rng) * std)
}

fn simulate_frame(
    cfg: &SchemeConfig,
    rng: &mut ChaCha8Rng,
    keep_trace: bool,
) -> Result<(FrameTally, Option<TransmitTrace>)> {
    let dims = cfg.dims;
    let (m_t, k, n, l) = (dims.m_t(), dims.k(), cfg.n, cfg.delay_l);
    let q = m_t - k;
    let sr = cfg.rho.sqrt();
    let a = cfg.relay_gain();
    let spread = match cfg.relay_power {
        RelayPower::Unit => dft(q),
        RelayPower::Literal => CMatrix::identity(q, q),
    };
    let spread_inv = spread.adjoint();
    let held = match cfg.channel_mode {
        ChannelMode::Hold => Some(draw_channel(dims, rng, false).h11().clone()),
        ChannelMode::Fresh => None,
    };
    let next_channel = |rng: &mut ChaCha8Rng| -> CMatrix {
        match &held {
            Some(h) => h.clone(),
            None => draw_channel(dims, rng, false).h11().clone(),
        }
    };

    let mut tally = FrameTally::new(k, m_t);
    tally.frames = 1;
    tally.uses = n as u64;

    // Forward pass.
    let mut h11s: Vec<CMatrix> = Vec::with_capacity(n);
    let mut h21s: Vec<CMatrix> = Vec::with_capacity(n);
    let mut xs: Vec<CMatrix> = Vec::with_capacity(n);
    let mut ys: Vec<CMatrix> = Vec::with_capacity(n);
    let mut extra = vec![false; n];
    for i in 0..n {
        let h11 = next_channel(rng);
        let h21 = complete_unitary(&h11, dims)?;
        let mut x = CMatrix::zeros(m_t, 1);
        for j in 0..k {
            x[(j, 0)] = symbol(cfg.modulation, rng);
        }
        if i >= l {
            let relay = (&spread * &h21s[i - l] * &xs[i - l]).map(|z| z * a);
            x.rows_mut(k, q).copy_from(&relay);
        } else if cfg.reuse_zero_rows {
            for j in k..m_t {
                x[(j, 0)] = symbol(cfg.modulation, rng);
            }
            extra[i] = true;
            tally.extra_symbols += q as u64;
        }
        let y = (&h11 * &x).map(|z| z * sr) + noise_vec(dims.m_r(), 1.0, rng);
        for j in 0..m_t {
            tally.mode_pow[j] += x[(j, 0)].norm_sqr();
        }
        let defect = identity_defect(&(gram(&h11) + gram(&h21)));
        tally.combining_defect = tally.combining_defect.max(defect);
        h11s.push(h11);
        h21s.push(h21);
        xs.push(x);
        ys.push(y);
    }

    // Closing: deliver w = a F H21 x for the last l uses, one entry per
    // m_t uses, each from one transmit mode in turn, combined by MRC.
    let mut side: Vec<Option<CMatrix>> = vec![None; n];
    for i in n - l..n {
        let w = (&spread * &h21s[i] * &xs[i]).map(|z| z * a);
        let mut w_hat = CMatrix::zeros(q, 1);
        for e in 0..q {
            let g_mat = next_channel(rng);
            let mut acc = C64::new(0.0, 0.0);
            for u in 0..m_t {
                for r in 0..dims.m_r() {
                    let h = g_mat[(r, u)];
                    acc += h.conj() * (h * w[(e, 0)] * sr + complex_normal(rng));
                }
            }
            let g = crate::linalg::frobenius_sq(&g_mat);
            let var = 1.0 / g;
            let ratio = a * a / var;
            tally.min_side_snr_ratio = tally.min_side_snr_ratio.min(ratio);
            if ratio < 1.0 - 1e-9 {
                return Err(Error::Numerical(format!(
                    "side information SNR fell below rho (ratio {ratio}) at use {i}"
                )));
            }
            w_hat[(e, 0)] = acc / g + complex_normal(rng) * (a * a - var).max(0.0).sqrt();
        }
        side[i] = Some((&spread_inv * w_hat).map(|z| z / a));
    }

    // Backward peeling.
    let mut mi_bits = 0.0;
    let l2 = |snr: f64| snr.ln_1p() / std::f64::consts::LN_2;
    for i in (0..n).rev() {
        let v_hat = side[i].take().expect("side measure available in peeling order");
        let y_tilde = h11s[i].adjoint() * &ys[i] + h21s[i].adjoint() * v_hat;
        let noise = &y_tilde - xs[i].map(|z| z * sr);
        tally.noise_cov += &noise * noise.adjoint();
        tally.noise_samples += 1;

        let eff = gram(&h11s[i]) + gram(&h21s[i]);
        let n_streams = if extra[i] { m_t } else { k };
        for j in 0..n_streams {
            mi_bits += l2(cfg.rho / eff[(j, j)].re);
        }
        for j in 0..k {
            tally.sig_pow[j] += cfg.rho * xs[i][(j, 0)].norm_sqr();
            tally.noise_pow[j] += noise[(j, 0)].norm_sqr();
        }
        if cfg.modulation == Modulation::Qpsk {
            for j in 0..n_streams {
                let (s, r) = (xs[i][(j, 0)], y_tilde[(j, 0)]);
                tally.bit_errors += ((r.re > 0.0) != (s.re > 0.0)) as u64 + ((r.im > 0.0) != (s.im > 0.0)) as u64;
                tally.bits += 2;
            }
        }
        if i >= l {
            let relay = y_tilde.rows(k, q).into_owned() + noise_vec(q, (a * a - 1.0).max(0.0).sqrt(), rng);
            side[i - l] = Some((&spread_inv * relay).map(|z| z / a));
        }
    }
    tally.frame_mi.push(mi_bits / (n + cfg.overhead_uses()) as f64);

    let trace = keep_trace.then(|| {
        let mut x = CMatrix::zeros(m_t, n);
        for (i, xi) in xs.iter().enumerate() {
            x.set_column(i, &xi.column(0));
        }
        TransmitTrace { k, delay_l: l, x }
    });
    Ok((tally, trace))
}
