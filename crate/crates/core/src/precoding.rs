//! Spatial zero-forcing and the per-user, per-quadrature QOS temporal
//! precoding problem.
//!
//! For a target frame `c` (pilot included) the temporal precoder solves
//!
//! ```text
//!     minimize     |W p|^2
//!     subject to   beta * c_i * (V U p)_i >= gamma   for every sample i
//! ```
//!
//! so that, without noise, every receive sample sits on the correct side of
//! the quantizer threshold with margin at least `gamma`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qp::{kkt_residuals, solve_qp, KktResiduals, QpProblem, QpSettings};
use crate::signal_chain::SignalOperators;
use crate::zx_modem::Level;

pub type C64 = Complex<f64>;

/// Flat-fading downlink channel, one row per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(pub DMatrix<C64>);

impl ChannelMatrix {
    pub fn identity(n: usize) -> Self {
        ChannelMatrix(DMatrix::identity(n, n))
    }

    pub fn n_users(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.0.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZfPrecoder {
    /// `H^H (H H^H)^-1`.
    pub p_zf: DMatrix<C64>,
    /// `sqrt(N_u / trace((H H^H)^-1))`.
    pub c_zf: f64,
    /// `c_zf * p_zf`.
    pub p_sp: DMatrix<C64>,
}

pub fn zf_precoder(h: &ChannelMatrix) -> Result<ZfPrecoder> {
    let hh = &h.0 * h.0.adjoint();
    let eig = hh.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if !(lo > 0.0) || hi / lo > 1e12 {
        return Err(Error::RankDeficient);
    }
    let inv = hh.try_inverse().ok_or(Error::RankDeficient)?;
    let p_zf = h.0.adjoint() * &inv;
    let trace: f64 = inv.diagonal().iter().map(|z| z.re).sum();
    let c_zf = (h.n_users() as f64 / trace).sqrt();
    let p_sp = &p_zf * C64::new(c_zf, 0.0);
    Ok(ZfPrecoder { p_zf, c_zf, p_sp })
}

/// The QOS problem for one real component of one user's frame:
/// `Q = W'W`, `A = -beta diag(c) V U`, `b = -gamma 1`.
pub fn build_qos_problem(
    frame: &[Level],
    ops: &SignalOperators,
    gamma: f64,
    beta: f64,
) -> Result<QpProblem> {
    let n_tot = ops.n_tot();
    if frame.len() != n_tot {
        return Err(Error::Dimension {
            what: "frame length",
            expected: n_tot,
            got: frame.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(Error::config("gamma must be positive"));
    }
    let q = ops.w.transpose() * &ops.w;
    let q = (&q + q.transpose()) * 0.5;
    let mut a = ops.vu.clone();
    for (i, &c) in frame.iter().enumerate() {
        a.row_mut(i).scale_mut(-beta * c as f64);
    }
    QpProblem::new(q, a, DVector::from_element(n_tot, -gamma))
}

/// Optimal temporal precoder for one real component.
#[derive(Debug, Clone, PartialEq)]
pub struct QosSolution {
    pub p: DVector<f64>,
    /// `|W p|^2`.
    pub objective: f64,
    /// `min_i beta c_i (V U p)_i`.
    pub min_margin: f64,
    pub kkt: KktResiduals,
    pub iterations: usize,
}

pub fn min_margin(frame: &[Level], ops: &SignalOperators, beta: f64, p: &DVector<f64>) -> f64 {
    let y = &ops.vu * p;
    frame
        .iter()
        .zip(y.iter())
        .map(|(&c, &v)| beta * c as f64 * v)
        .fold(f64::INFINITY, f64::min)
}

pub fn solve_qos(
    frame: &[Level],
    ops: &SignalOperators,
    gamma: f64,
    beta: f64,
    settings: QpSettings,
) -> Result<QosSolution> {
    let problem = build_qos_problem(frame, ops, gamma, beta)?;
    let sol = solve_qp(&problem, settings)?;
    let kkt = kkt_residuals(&problem, &sol.x, &sol.duals);
    Ok(QosSolution {
        objective: (&ops.w * &sol.x).norm_squared(),
        min_margin: min_margin(frame, ops, beta, &sol.x),
        p: sol.x,
        kkt,
        iterations: sol.iterations,
    })
}

/// Both quadratures of one user.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecodeResult {
    pub p_x_i: Vec<f64>,
    pub p_x_q: Vec<f64>,
    /// `|W p_i|^2 + |W p_q|^2`.
    pub objective: f64,
    pub min_margin: f64,
}

pub fn precode_user(
    frame_i: &[Level],
    frame_q: &[Level],
    ops: &SignalOperators,
    gamma: f64,
    beta: f64,
) -> Result<PrecodeResult> {
    let si = solve_qos(frame_i, ops, gamma, beta, QpSettings::default())?;
    let sq = solve_qos(frame_q, ops, gamma, beta, QpSettings::default())?;
    Ok(PrecodeResult {
        objective: si.objective + sq.objective,
        min_margin: si.min_margin.min(sq.min_margin),
        p_x_i: si.p.iter().copied().collect(),
        p_x_q: sq.p.iter().copied().collect(),
    })
}

/// Transmit energy of user `k`: `|p_sp_k|^2 (|W p_i|^2 + |W p_q|^2)`.
pub fn user_energy(
    p_sp_k: &DVector<C64>,
    p_x_i: &DVector<f64>,
    p_x_q: &DVector<f64>,
    ops: &SignalOperators,
) -> f64 {
    p_sp_k.norm_squared() * ((&ops.w * p_x_i).norm_squared() + (&ops.w * p_x_q).norm_squared())
}

/// Total transmit energy `trace(P_sp R R^H P_sp^H)`, `R` stacking the rows
/// `(G_tx' U p_x_k)'` with `p_x_k = p_i + j p_q`.
pub fn total_energy(
    p_sp: &DMatrix<C64>,
    precoders: &[(DVector<f64>, DVector<f64>)],
    ops: &SignalOperators,
) -> Result<f64> {
    if precoders.len() != p_sp.ncols() {
        return Err(Error::Dimension {
            what: "per-user precoders",
            expected: p_sp.ncols(),
            got: precoders.len(),
        });
    }
    let len = ops.w.nrows();
    let mut r = DMatrix::<C64>::zeros(precoders.len(), len);
    for (k, (pi, pq)) in precoders.iter().enumerate() {
        let wi = &ops.w * pi;
        let wq = &ops.w * pq;
        for t in 0..len {
            r[(k, t)] = C64::new(wi[t], wq[t]);
        }
    }
    let pr = p_sp * r;
    Ok((&pr * pr.adjoint()).trace().re)
}

type CacheKey = (Vec<Level>, u64, u64);

/// Memo of QOS solutions keyed by the pilot-normalized frame, `gamma` and
/// `beta`. A frame with a negative pilot reuses the negated solution of its
/// mirror image.
#[derive(Debug, Default)]
pub struct QosCache {
    map: RwLock<HashMap<CacheKey, Arc<DVector<f64>>>>,
}

impl QosCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn precoder(
        &self,
        frame: &[Level],
        ops: &SignalOperators,
        gamma: f64,
        beta: f64,
    ) -> Result<DVector<f64>> {
        let sign = frame[0];
        let key: Vec<Level> = frame.iter().map(|&c| c * sign).collect();
        let key = (key, gamma.to_bits(), beta.to_bits());
        let hit = self.map.read().expect("cache lock").get(&key).cloned();
        let p = match hit {
            Some(p) => p,
            None => {
                let sol = solve_qos(&key.0, ops, gamma, beta, QpSettings::default())?;
                let p = Arc::new(sol.p);
                self.map
                    .write()
                    .expect("cache lock")
                    .insert(key, Arc::clone(&p));
                p
            }
        };
        Ok(p.as_ref() * sign as f64)
    }
}
