use std::f64::consts::PI;

use super::{Side, SystemConfig};

/// Width of the band around a removable singularity inside which the analytic
/// limit is returned, relative to `T`.
const SINGULAR_GUARD: f64 = 1e-9;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Raised-cosine impulse response with unit energy in continuous time.
pub fn rc_pulse(t: f64, rolloff: f64, period: f64) -> f64 {
    let norm = 1.0 / (period * (1.0 - rolloff / 4.0)).sqrt();
    let x = t / period;
    let edge = 1.0 / (2.0 * rolloff);
    if (x.abs() - edge).abs() < SINGULAR_GUARD {
        return norm * PI / 4.0 * sinc(edge);
    }
    let d = 2.0 * rolloff * x;
    norm * sinc(x) * (PI * rolloff * x).cos() / (1.0 - d * d)
}

/// Root-raised-cosine impulse response with unit energy in continuous time.
pub fn rrc_pulse(t: f64, rolloff: f64, period: f64) -> f64 {
    let norm = 1.0 / period.sqrt();
    let x = t / period;
    let b = rolloff;
    if x.abs() < SINGULAR_GUARD {
        return norm * (1.0 - b + 4.0 * b / PI);
    }
    let edge = 1.0 / (4.0 * b);
    if (x.abs() - edge).abs() < SINGULAR_GUARD {
        let a = PI / (4.0 * b);
        return norm * b / 2f64.sqrt()
            * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * x * (1.0 - b)).sin() + 4.0 * b * x * (PI * x * (1.0 + b)).cos();
    let den = PI * x * (1.0 - (4.0 * b * x).powi(2));
    norm * num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    RaisedCosine,
    RootRaisedCosine,
}

impl PulseShape {
    pub fn eval(self, t: f64, rolloff: f64, period: f64) -> f64 {
        match self {
            PulseShape::RaisedCosine => rc_pulse(t, rolloff, period),
            PulseShape::RootRaisedCosine => rrc_pulse(t, rolloff, period),
        }
    }
}

/// A pulse sampled at the receive rate, centred on `center_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPulse {
    pub samples: Vec<f64>,
    pub spacing: f64,
    pub center_index: usize,
    pub scale: f64,
}

impl SampledPulse {
    /// Samples `shape` on `[-T(N + 1/m_rx), T(N + 1/m_rx)]` at spacing
    /// `T / m_rx`, i.e. `2 n_tot + 1` points, and attaches the filter scale
    /// for `side`.
    pub fn sample(shape: PulseShape, cfg: &SystemConfig, side: Side) -> Self {
        let n_tot = cfg.n_tot() as isize;
        let spacing = cfg.sample_spacing();
        let rolloff = match side {
            Side::Tx => cfg.rolloff_tx,
            Side::Rx => cfg.rolloff_rx,
        };
        let samples: Vec<f64> = (-n_tot..=n_tot)
            .map(|k| shape.eval(k as f64 * spacing, rolloff, cfg.symbol_period))
            .collect();
        let scale = if side == Side::Tx && cfg.tx_scale_exact_energy {
            1.0 / samples.iter().map(|s| s * s).sum::<f64>().sqrt()
        } else {
            cfg.filter_scale(side)
        };
        SampledPulse {
            samples,
            spacing,
            center_index: n_tot as usize,
            scale,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Squared norm of `scale * samples`.
    pub fn energy(&self) -> f64 {
        self.scale * self.scale * self.samples.iter().map(|s| s * s).sum::<f64>()
    }
}
