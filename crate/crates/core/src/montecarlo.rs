//! Seeded end-to-end link simulation.
//!
//! Each block draws fresh bits for every user and quadrature, maps them onto
//! a pilot-led ZX frame, precodes with the QOS solution, passes the spatially
//! precoded signal through the channel, adds complex noise at the transmit
//! sample rate, filters it with the receive filter, quantizes to one bit and
//! detects.
//!
//! Randomness comes from ChaCha8 with one stream per block: block `b` of a
//! run seeded with `s` uses `ChaCha8Rng::seed_from_u64(s)` with stream `b`,
//! so results do not depend on how blocks are scheduled.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::precoding::{zf_precoder, ChannelMatrix, QosCache, C64};
use crate::signal_chain::{SignalOperators, SystemConfig};
use crate::zx_modem::{forward_map, gray_decode, gray_encode, Level, Symbol, ZxCodebook};

/// Generator recorded in output metadata.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha), stream = block index";

/// Per sample: `sign(Re) + j sign(Im)` with `sign(0) = +1`.
pub fn q1_quantize(y: &[C64]) -> Vec<C64> {
    let s = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
    y.iter().map(|z| C64::new(s(z.re), s(z.im))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    Identity,
    Fixed(ChannelMatrix),
    /// i.i.d. `CN(0, 1)` entries drawn once per run from the given seed.
    IidGaussian { seed: u64 },
}

/// Which reference the detector uses for the first codeword of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PilotMode {
    /// The quantized pilot sample as received.
    #[default]
    Received,
    /// The transmitted pilot level.
    Known,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub system: SystemConfig,
    pub gamma: f64,
    pub n_blocks: usize,
    pub seed: u64,
    pub channel: ChannelModel,
    pub pilot_mode: PilotMode,
}

impl McConfig {
    pub fn new(system: SystemConfig, gamma: f64, n_blocks: usize, seed: u64) -> Self {
        McConfig {
            system,
            gamma,
            n_blocks,
            seed,
            channel: ChannelModel::Identity,
            pilot_mode: PilotMode::default(),
        }
    }

    pub fn with_channel(mut self, channel: ChannelModel) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_pilot_mode(mut self, mode: PilotMode) -> Self {
        self.pilot_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.n_blocks == 0 {
            return Err(Error::config("n_blocks must be at least 1"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::config("gamma must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub gamma: f64,
    pub ser: f64,
    pub ber: f64,
    pub symbol_errors: u64,
    pub symbols: u64,
    pub bit_errors: u64,
    pub bits: u64,
    /// `1.96 sqrt(ser (1 - ser) / symbols)`.
    pub ci95_ser: f64,
}

impl McResult {
    fn from_counts(gamma: f64, c: Counts) -> Self {
        let ser = c.symbol_errors as f64 / c.symbols as f64;
        McResult {
            gamma,
            ser,
            ber: c.bit_errors as f64 / c.bits as f64,
            symbol_errors: c.symbol_errors,
            symbols: c.symbols,
            bit_errors: c.bit_errors,
            bits: c.bits,
            ci95_ser: 1.96 * (ser * (1.0 - ser) / c.symbols as f64).sqrt(),
        }
    }

    /// Binomial standard error of `ser`.
    pub fn std_error(&self) -> f64 {
        self.ci95_ser / 1.96
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    symbol_errors: u64,
    symbols: u64,
    bit_errors: u64,
    bits: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            symbol_errors: self.symbol_errors + o.symbol_errors,
            symbols: self.symbols + o.symbols,
            bit_errors: self.bit_errors + o.bit_errors,
            bits: self.bits + o.bits,
        }
    }
}

/// Transmitted and detected data of one block, indexed by
/// `[user][quadrature]` with quadrature 0 = in-phase.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    pub tx_symbols: Vec<[Vec<Symbol>; 2]>,
    pub rx_symbols: Vec<[Vec<Symbol>; 2]>,
    pub tx_bits: Vec<[Vec<u8>; 2]>,
    pub rx_bits: Vec<[Vec<u8>; 2]>,
}

impl BlockOutcome {
    fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for (tx, rx) in self.tx_symbols.iter().zip(&self.rx_symbols) {
            for q in 0..2 {
                c.symbols += tx[q].len() as u64;
                c.symbol_errors += tx[q].iter().zip(&rx[q]).filter(|(a, b)| a != b).count() as u64;
            }
        }
        for (tx, rx) in self.tx_bits.iter().zip(&self.rx_bits) {
            for q in 0..2 {
                c.bits += tx[q].len() as u64;
                c.bit_errors += tx[q].iter().zip(&rx[q]).filter(|(a, b)| a != b).count() as u64;
            }
        }
        c
    }
}

/// Everything that stays fixed across the blocks of one run.
#[derive(Debug)]
pub struct McEngine {
    cfg: McConfig,
    ops: SignalOperators,
    codebook: ZxCodebook,
    /// `H P_sp`, users by users.
    effective: DMatrix<C64>,
    beta: f64,
    noise_std: f64,
    cache: QosCache,
}

fn draw_channel(model: &ChannelModel, n_users: usize, n_tx: usize) -> Result<ChannelMatrix> {
    match model {
        ChannelModel::Identity => {
            if n_users != n_tx {
                return Err(Error::config(
                    "identity channel needs n_users == n_tx_antennas",
                ));
            }
            Ok(ChannelMatrix::identity(n_users))
        }
        ChannelModel::Fixed(h) => {
            if h.n_users() != n_users || h.n_tx() != n_tx {
                return Err(Error::Dimension {
                    what: "channel matrix rows x cols",
                    expected: n_users * n_tx,
                    got: h.n_users() * h.n_tx(),
                });
            }
            Ok(h.clone())
        }
        ChannelModel::IidGaussian { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            Ok(ChannelMatrix(DMatrix::from_fn(n_users, n_tx, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(s * re, s * im)
            })))
        }
    }
}

impl McEngine {
    pub fn new(cfg: McConfig) -> Result<Self> {
        cfg.validate()?;
        let sys = &cfg.system;
        let codebook = ZxCodebook::for_m_rx(sys.m_rx)?;
        if sys.n_symbols % codebook.block_len() != 0 {
            return Err(Error::config(format!(
                "n_symbols must be a multiple of {} for m_rx = {}",
                codebook.block_len(),
                sys.m_rx
            )));
        }
        let ops = SignalOperators::build(sys)?;
        let h = draw_channel(&cfg.channel, sys.n_users, sys.n_tx_antennas)?;
        let zf = zf_precoder(&h)?;
        let effective = &h.0 * &zf.p_sp;
        Ok(McEngine {
            beta: zf.c_zf,
            noise_std: sys.noise_split.real_variance(sys.noise_variance).sqrt(),
            effective,
            ops,
            codebook,
            cfg,
            cache: QosCache::new(),
        })
    }

    pub fn config(&self) -> &McConfig {
        &self.cfg
    }

    pub fn operators(&self) -> &SignalOperators {
        &self.ops
    }

    /// Beamforming gain used in the QOS constraints (`c_zf` of the channel).
    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn block_rng(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(block);
        rng
    }

    /// Simulates block `block` of the run.
    pub fn run_block(&self, block: u64) -> Result<BlockOutcome> {
        let sys = &self.cfg.system;
        let n_users = sys.n_users;
        let n_tot = self.ops.n_tot();
        let n_bits = sys.n_symbols / self.codebook.block_len() * self.codebook.bits_per_word();
        let pilot: Level = if block % 2 == 0 { 1 } else { -1 };
        let mut rng = self.block_rng(block);

        let mut tx_symbols = Vec::with_capacity(n_users);
        let mut tx_bits = Vec::with_capacity(n_users);
        let mut clean = DMatrix::<C64>::zeros(n_users, n_tot);
        for k in 0..n_users {
            let mut syms: [Vec<Symbol>; 2] = Default::default();
            let mut bits: [Vec<u8>; 2] = Default::default();
            let mut comps: [DVector<f64>; 2] = Default::default();
            for q in 0..2 {
                bits[q] = (0..n_bits).map(|_| u8::from(rng.random::<bool>())).collect();
                syms[q] = gray_encode(&bits[q], &self.codebook)?;
                let frame = forward_map(&syms[q], pilot, self.codebook.alphabet())?;
                let p = self
                    .cache
                    .precoder(&frame.with_pilot(), &self.ops, self.cfg.gamma, self.beta)?;
                comps[q] = &self.ops.vu * p;
            }
            for t in 0..n_tot {
                clean[(k, t)] = C64::new(comps[0][t], comps[1][t]);
            }
            tx_symbols.push(syms);
            tx_bits.push(bits);
        }
        let received = &self.effective * clean;

        let n_fine = self.ops.g_rx.ncols();
        let mut rx_symbols = Vec::with_capacity(n_users);
        let mut rx_bits = Vec::with_capacity(n_users);
        for k in 0..n_users {
            let mut y: Vec<C64> = received.row(k).iter().copied().collect();
            if self.noise_std > 0.0 {
                let mut draw = || {
                    DVector::from_fn(n_fine, |_, _| {
                        self.noise_std * rng.sample::<f64, _>(StandardNormal)
                    })
                };
                let ni = &self.ops.g_rx * draw();
                let nq = &self.ops.g_rx * draw();
                for (t, z) in y.iter_mut().enumerate() {
                    *z += C64::new(ni[t], nq[t]);
                }
            }
            let r = q1_quantize(&y);
            let mut syms: [Vec<Symbol>; 2] = Default::default();
            let mut bits: [Vec<u8>; 2] = Default::default();
            for q in 0..2 {
                let mut levels: Vec<Level> = r
                    .iter()
                    .map(|z| (if q == 0 { z.re } else { z.im }) as Level)
                    .collect();
                if self.cfg.pilot_mode == PilotMode::Known {
                    levels[0] = pilot;
                }
                let words = self.codebook.detect_frame(&levels)?;
                syms[q] = words
                    .iter()
                    .flat_map(|&w| self.codebook.word(w).iter().copied())
                    .collect();
                bits[q] = gray_decode(&syms[q], &self.codebook)?;
            }
            rx_symbols.push(syms);
            rx_bits.push(bits);
        }
        Ok(BlockOutcome {
            tx_symbols,
            rx_symbols,
            tx_bits,
            rx_bits,
        })
    }

    /// Runs all blocks in parallel; the counts are exact integer sums, so the
    /// result is independent of the worker count.
    pub fn run(&self) -> Result<McResult> {
        let counts = (0..self.cfg.n_blocks as u64)
            .into_par_iter()
            .map(|b| self.run_block(b).map(|o| o.counts()))
            .try_reduce(Counts::default, |a, b| Ok(a + b))?;
        Ok(McResult::from_counts(self.cfg.gamma, counts))
    }
}

pub fn run_mc(cfg: &McConfig) -> Result<McResult> {
    McEngine::new(cfg.clone())?.run()
}

/// Seed of sweep point `index` derived from the master seed.
pub fn derive_seed(master: u64, index: usize) -> u64 {
    let mut z = master ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One run per `gamma`, each with its own seed derived from `template.seed`
/// and the grid index.
pub fn run_sweep(template: &McConfig, gammas: &[f64]) -> Result<Vec<McResult>> {
    run_sweep_with(template, gammas, |_, _| {})
}

/// [`run_sweep`] calling `on_point(index, result)` as each point completes.
pub fn run_sweep_with(
    template: &McConfig,
    gammas: &[f64],
    mut on_point: impl FnMut(usize, &McResult),
) -> Result<Vec<McResult>> {
    if gammas.is_empty() {
        return Err(Error::config("gamma grid is empty"));
    }
    let mut out = Vec::with_capacity(gammas.len());
    for (i, &gamma) in gammas.iter().enumerate() {
        let cfg = McConfig {
            gamma,
            seed: derive_seed(template.seed, i),
            ..template.clone()
        };
        let r = run_mc(&cfg)?;
        on_point(i, &r);
        out.push(r);
    }
    Ok(out)
}
