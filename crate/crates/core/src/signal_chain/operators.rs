use nalgebra::DMatrix;

use super::{PulseShape, SampledPulse, Side, SystemConfig};
use crate::error::{Error, Result};

pub const DEFAULT_REFINE: usize = 64;

/// Half-width of the convolution window, in symbol periods.
const CONV_HALF_WIDTH: f64 = 32.0;

/// Banded Toeplitz filter matrix: row `i` holds `scale * samples` starting at
/// column `i`, giving an `n_tot x 3 n_tot` operator.
pub fn build_filter_matrix(pulse: &SampledPulse, cfg: &SystemConfig) -> Result<DMatrix<f64>> {
    let n_tot = cfg.n_tot();
    let len = 2 * n_tot + 1;
    if pulse.len() != len {
        return Err(Error::Dimension {
            what: "sampled pulse length",
            expected: len,
            got: pulse.len(),
        });
    }
    let mut g = DMatrix::zeros(n_tot, 3 * n_tot);
    for i in 0..n_tot {
        for (k, s) in pulse.samples.iter().enumerate() {
            g[(i, i + k)] = pulse.scale * s;
        }
    }
    Ok(g)
}

/// `U[m, n] = 1` iff `m = M n` (0-based), the M-fold upsampler.
pub fn build_upsampler(cfg: &SystemConfig) -> DMatrix<f64> {
    let m = cfg.upsampling();
    let mut u = DMatrix::zeros(cfg.n_tot(), cfg.n_q());
    for n in 0..cfg.n_q() {
        u[(m * n, n)] = 1.0;
    }
    u
}

/// Combined transmit/receive waveform `v = g_tx * g_rx` at time `t`, by a
/// Riemann sum on a grid of spacing `T / (m_rx refine)`.
pub fn combined_waveform(t: f64, cfg: &SystemConfig, refine: usize) -> f64 {
    let period = cfg.symbol_period;
    let h = cfg.sample_spacing() / refine as f64;
    let k_max = ((CONV_HALF_WIDTH * period + t.abs()) / h).ceil() as i64;
    (-k_max..=k_max)
        .map(|k| {
            let tau = k as f64 * h;
            PulseShape::RaisedCosine.eval(tau, cfg.rolloff_tx, period)
                * PulseShape::RootRaisedCosine.eval(t - tau, cfg.rolloff_rx, period)
        })
        .sum::<f64>()
        * h
}

/// Symmetric Toeplitz matrix of the combined waveform sampled at lags
/// `(j - i) T / m_rx`.
pub fn build_combined_v(cfg: &SystemConfig, refine: usize) -> DMatrix<f64> {
    let n_tot = cfg.n_tot();
    let spacing = cfg.sample_spacing();
    let lags: Vec<f64> = (0..n_tot)
        .map(|k| combined_waveform(k as f64 * spacing, cfg, refine))
        .collect();
    DMatrix::from_fn(n_tot, n_tot, |i, j| lags[i.abs_diff(j)])
}

/// `W = G_tx^T U`, mapping precoding coefficients to transmit samples.
pub fn build_w(g_tx: &DMatrix<f64>, u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if g_tx.nrows() != u.nrows() {
        return Err(Error::Dimension {
            what: "rows of U",
            expected: g_tx.nrows(),
            got: u.nrows(),
        });
    }
    Ok(g_tx.transpose() * u)
}

/// Covariance of the filtered noise `G_rx n` per real dimension.
pub fn noise_covariance(cfg: &SystemConfig, g_rx: &DMatrix<f64>) -> DMatrix<f64> {
    let var = cfg.noise_split.real_variance(cfg.noise_variance);
    let mut cov = g_rx * g_rx.transpose() * var;
    // exact symmetry
    cov = (&cov + cov.transpose()) * 0.5;
    cov
}

/// Every dense operator of the chain for one configuration. Immutable once
/// built.
#[derive(Debug, Clone)]
pub struct SignalOperators {
    pub config: SystemConfig,
    pub g_tx: DMatrix<f64>,
    pub g_rx: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub noise_cov: DMatrix<f64>,
    /// `V U`, the noise-free map from precoding coefficients to receive samples.
    pub vu: DMatrix<f64>,
}

impl SignalOperators {
    pub fn build(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let tx = SampledPulse::sample(PulseShape::RaisedCosine, cfg, Side::Tx);
        let rx = SampledPulse::sample(PulseShape::RootRaisedCosine, cfg, Side::Rx);
        let g_tx = build_filter_matrix(&tx, cfg)?;
        let g_rx = build_filter_matrix(&rx, cfg)?;
        let u = build_upsampler(cfg);
        let v = build_combined_v(cfg, cfg.refine);
        let w = build_w(&g_tx, &u)?;
        let noise_cov = noise_covariance(cfg, &g_rx);
        let vu = &v * &u;
        Ok(SignalOperators {
            config: cfg.clone(),
            g_tx,
            g_rx,
            v,
            u,
            w,
            noise_cov,
            vu,
        })
    }

    pub fn n_tot(&self) -> usize {
        self.config.n_tot()
    }

    pub fn n_q(&self) -> usize {
        self.config.n_q()
    }
}
