//! Discrete-time operators of the band-limited transmission chain.
//!
//! Time is measured in units of the symbol period `T`. Receive samples are
//! spaced `T / m_rx` apart; a frame of `n_symbols` symbols plus one pilot
//! occupies `n_tot = n_symbols * m_rx + 1` receive samples and the transmitter
//! controls `n_q = n_symbols * m_tx + 1` precoding coefficients.

mod operators;
mod pulse;

pub use operators::{
    build_combined_v, build_filter_matrix, build_upsampler, build_w, combined_waveform,
    noise_covariance, SignalOperators, DEFAULT_REFINE,
};
pub use pulse::{rc_pulse, rrc_pulse, PulseShape, SampledPulse};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the complex noise variance `sigma_n^2` is spread over the real and
/// imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseSplit {
    /// Each real dimension carries the full `sigma_n^2`.
    #[default]
    PerRealDimFull,
    /// Each real dimension carries `sigma_n^2 / 2`.
    PerRealDimHalf,
}

impl NoiseSplit {
    /// Variance per real dimension for a given complex noise variance.
    pub fn real_variance(self, noise_variance: f64) -> f64 {
        match self {
            NoiseSplit::PerRealDimFull => noise_variance,
            NoiseSplit::PerRealDimHalf => 0.5 * noise_variance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tx,
    Rx,
}

/// Scenario parameters shared by every stage of the link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_symbols: usize,
    pub m_rx: usize,
    pub m_tx: usize,
    pub n_users: usize,
    pub n_tx_antennas: usize,
    pub rolloff_tx: f64,
    pub rolloff_rx: f64,
    pub symbol_period: f64,
    pub noise_variance: f64,
    pub beamforming_gain: f64,
    pub noise_split: NoiseSplit,
    /// Renormalize the sampled transmit pulse to exactly unit norm instead of
    /// applying `a_tx = sqrt(T / m_tx)`.
    pub tx_scale_exact_energy: bool,
    /// Sub-sample refinement of the grid used to convolve the two pulses.
    pub refine: usize,
}

impl SystemConfig {
    /// Single-user, single-antenna link with the 0.22 roll-off used throughout
    /// the numerical evaluation and `m_tx = m_rx` (no upsampling).
    pub fn new(n_symbols: usize, m_rx: usize) -> Self {
        SystemConfig {
            n_symbols,
            m_rx,
            m_tx: m_rx,
            n_users: 1,
            n_tx_antennas: 1,
            rolloff_tx: 0.22,
            rolloff_rx: 0.22,
            symbol_period: 1.0,
            noise_variance: 1.0,
            beamforming_gain: 1.0,
            noise_split: NoiseSplit::default(),
            tx_scale_exact_energy: false,
            refine: DEFAULT_REFINE,
        }
    }

    pub fn with_m_tx(mut self, m_tx: usize) -> Self {
        self.m_tx = m_tx;
        self
    }

    pub fn with_noise_variance(mut self, noise_variance: f64) -> Self {
        self.noise_variance = noise_variance;
        self
    }

    pub fn with_rolloff(mut self, rolloff: f64) -> Self {
        self.rolloff_tx = rolloff;
        self.rolloff_rx = rolloff;
        self
    }

    pub fn with_users(mut self, n_users: usize, n_tx_antennas: usize) -> Self {
        self.n_users = n_users;
        self.n_tx_antennas = n_tx_antennas;
        self
    }

    pub fn with_noise_split(mut self, split: NoiseSplit) -> Self {
        self.noise_split = split;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_symbols", self.n_symbols),
            ("m_rx", self.m_rx),
            ("m_tx", self.m_tx),
            ("n_users", self.n_users),
            ("n_tx_antennas", self.n_tx_antennas),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if self.m_rx % self.m_tx != 0 {
            return Err(Error::config(format!(
                "m_rx ({}) must be a multiple of m_tx ({})",
                self.m_rx, self.m_tx
            )));
        }
        if self.n_tx_antennas < self.n_users {
            return Err(Error::config(
                "zero-forcing needs at least as many transmit antennas as users",
            ));
        }
        for (name, r) in [("rolloff_tx", self.rolloff_tx), ("rolloff_rx", self.rolloff_rx)] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1], got {r}")));
            }
        }
        if !(self.symbol_period > 0.0) {
            return Err(Error::config("symbol_period must be positive"));
        }
        // sigma^2 = 0 is accepted for noise-free simulation
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::config("noise_variance must be non-negative"));
        }
        if !(self.beamforming_gain > 0.0) {
            return Err(Error::config("beamforming_gain must be positive"));
        }
        if self.refine < 8 {
            return Err(Error::config("refine must be at least 8"));
        }
        Ok(())
    }

    /// Upsampling factor `M = m_rx / m_tx`.
    pub fn upsampling(&self) -> usize {
        self.m_rx / self.m_tx
    }

    /// Receive samples per frame, pilot included.
    pub fn n_tot(&self) -> usize {
        self.n_symbols * self.m_rx + 1
    }

    /// Precoding coefficients per frame.
    pub fn n_q(&self) -> usize {
        self.n_symbols * self.m_tx + 1
    }

    /// Receive sample spacing `T / m_rx`.
    pub fn sample_spacing(&self) -> f64 {
        self.symbol_period / self.m_rx as f64
    }

    pub(crate) fn filter_scale(&self, side: Side) -> f64 {
        let m = match side {
            Side::Tx => self.m_tx,
            Side::Rx => self.m_rx,
        };
        (self.symbol_period / m as f64).sqrt()
    }
}
