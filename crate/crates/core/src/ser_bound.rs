//! Worst-case SER/BER upper bound for QOS precoding.
//!
//! Every receive sample is assumed to sit exactly at distance `gamma` from
//! the threshold, so the received block of `d = block_len * m_rx + 1`
//! samples is Gaussian with mean `gamma * c` (`c` the transmitted codeword,
//! pilot first) and the filtered-noise covariance. The probability of correct
//! detection of a word is the mass of the orthants the detector maps back to
//! it. Only blocks starting with a positive pilot are integrated; the mirror
//! half follows by symmetry.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mvn::{mvn_rect_prob, norm_cdf, MvnRectangle, MvnSettings, DEFAULT_EPS};
use crate::signal_chain::SignalOperators;
use crate::zx_modem::{Level, ZxCodebook};

/// Search interval and resolution of the `gamma(SER)` inversion.
pub const GAMMA_GRID_STEP: f64 = 0.05;
pub const GAMMA_MAX: f64 = 8.0;

/// One integration orthant credited to a transmitted word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RegionRow {
    pub word: usize,
    /// Received sign pattern detected as `word`.
    pub pattern: Vec<Level>,
    /// Sign of each coordinate of the integrated orthant: `+1` is `[0, inf)`,
    /// `-1` is `(-inf, 0]`.
    pub region: Vec<Level>,
}

impl RegionRow {
    pub fn lower(&self) -> Vec<f64> {
        self.region
            .iter()
            .map(|&s| if s > 0 { 0.0 } else { f64::NEG_INFINITY })
            .collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.region
            .iter()
            .map(|&s| if s > 0 { f64::INFINITY } else { 0.0 })
            .collect()
    }
}

/// Which integration regions the bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionSource {
    /// The published integration regions (`m_rx` 2 and 3 only).
    #[default]
    Published,
    /// Regions enumerated from the detector.
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionTable {
    pub m_rx: usize,
    pub block_len: usize,
    pub dim: usize,
    /// Mean sign vector per word (its codeword after a positive pilot).
    pub mu_signs: Vec<Vec<Level>>,
    pub rows: Vec<RegionRow>,
}

fn signs(s: &str) -> Vec<Level> {
    s.bytes().map(|b| if b == b'+' { 1 } else { -1 }).collect()
}

impl RegionTable {
    pub fn alphabet_size(&self) -> usize {
        self.mu_signs.len()
    }

    pub fn rows_for(&self, word: usize) -> impl Iterator<Item = &RegionRow> {
        self.rows.iter().filter(move |r| r.word == word)
    }

    /// `(word, detected pattern)` pairs.
    pub fn pattern_set(&self) -> BTreeSet<(usize, Vec<Level>)> {
        self.rows.iter().map(|r| (r.word, r.pattern.clone())).collect()
    }

    /// `(word, integrated orthant)` pairs.
    pub fn region_set(&self) -> BTreeSet<(usize, Vec<Level>)> {
        self.rows.iter().map(|r| (r.word, r.region.clone())).collect()
    }

    /// Checks the structural invariants: positive-pilot orthants of the right
    /// dimension, disjoint within each word.
    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            if r.region.len() != self.dim || r.pattern.len() != self.dim {
                return Err(Error::Dimension {
                    what: "region row",
                    expected: self.dim,
                    got: r.region.len(),
                });
            }
            if r.region[0] != 1 || r.pattern[0] != 1 {
                return Err(Error::config("region rows must start with a positive pilot"));
            }
        }
        for w in 0..self.alphabet_size() {
            let regions: Vec<_> = self.rows_for(w).map(|r| &r.region).collect();
            let unique: BTreeSet<_> = regions.iter().collect();
            if unique.len() != regions.len() {
                return Err(Error::config(format!("overlapping regions for word {w}")));
            }
        }
        Ok(())
    }
}

/// The published integration-region tables, transcribed row by row as
/// `(word, mean signs, [(detected pattern, integrated orthant)])`.
///
/// For `m_rx = 2` the second row of word 7 lists the detected pattern
/// `+--+-` but integrates the orthant `+-+-+`. Both columns are kept so the
/// published curve can be reproduced and the discrepancy inspected.
pub fn published_region_table(m_rx: usize) -> Result<RegionTable> {
    type Rows = &'static [(&'static str, &'static [(&'static str, &'static str)])];
    let table: Rows = match m_rx {
        3 => &[
            ("++++", &[("++++", "++++"), ("++-+", "++-+"), ("+-++", "+-++")]),
            ("+++-", &[("+++-", "+++-"), ("+-+-", "+-+-")]),
            ("++--", &[("++--", "++--")]),
            ("+---", &[("+---", "+---"), ("+--+", "+--+")]),
        ],
        2 => &[
            (
                "+++++",
                &[
                    ("+++++", "+++++"),
                    ("+++-+", "+++-+"),
                    ("++-++", "++-++"),
                    ("+-+++", "+-+++"),
                ],
            ),
            (
                "++++-",
                &[("++++-", "++++-"), ("++-+-", "++-+-"), ("+-++-", "+-++-")],
            ),
            ("+++--", &[("+++--", "+++--"), ("+-+--", "+-+--")]),
            ("++---", &[("++---", "++---")]),
            ("++--+", &[("++--+", "++--+")]),
            ("+---+", &[("+---+", "+---+"), ("+-+-+", "+-+-+")]),
            ("+----", &[("+----", "+----"), ("+--+-", "+-+-+")]),
            ("+--++", &[("+--++", "+--++")]),
        ],
        other => return Err(Error::UnsupportedOversampling(other)),
    };
    let block_len = if m_rx == 2 { 2 } else { 1 };
    let mut rows = Vec::new();
    let mut mu_signs = Vec::new();
    for (word, (mu, entries)) in table.iter().enumerate() {
        mu_signs.push(signs(mu));
        for (pattern, region) in entries.iter() {
            rows.push(RegionRow {
                word,
                pattern: signs(pattern),
                region: signs(region),
            });
        }
    }
    Ok(RegionTable {
        m_rx,
        block_len,
        dim: m_rx * block_len + 1,
        mu_signs,
        rows,
    })
}

/// Enumerates every positive-pilot sign pattern, runs the block detector and
/// credits the pattern's orthant to the detected word.
pub fn derive_region_table(codebook: &ZxCodebook) -> Result<RegionTable> {
    let block_len = codebook.block_len();
    let dim = codebook.m_rx() * block_len + 1;
    if dim > 13 {
        return Err(Error::config(format!("dimension {dim} too large to enumerate")));
    }
    let mut rows = Vec::with_capacity(1 << (dim - 1));
    for bits in 0u32..(1 << (dim - 1)) {
        let mut z = vec![1 as Level; dim];
        for (k, zk) in z.iter_mut().skip(1).enumerate() {
            if bits >> (dim - 2 - k) & 1 == 1 {
                *zk = -1;
            }
        }
        let word = codebook.detect(&z, 1);
        rows.push(RegionRow {
            word,
            region: z.clone(),
            pattern: z,
        });
    }
    rows.sort();
    let mu_signs = (0..codebook.size())
        .map(|w| {
            let mut c = vec![1];
            c.extend(codebook.codeword(w, 1));
            c
        })
        .collect();
    Ok(RegionTable {
        m_rx: codebook.m_rx(),
        block_len,
        dim,
        mu_signs,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSettings {
    /// Absolute error target per orthant probability.
    pub eps: f64,
    /// Relative error target per orthant probability; the tighter of the two
    /// applies.
    pub rel_eps: f64,
    pub seed: u64,
    pub source: RegionSource,
}

impl Default for BoundSettings {
    fn default() -> Self {
        BoundSettings {
            eps: DEFAULT_EPS,
            rel_eps: 1e-2,
            seed: 0x5eed,
            source: RegionSource::Published,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub gamma: f64,
    pub ser_ub: f64,
    pub ber_ub: f64,
    pub err_est: f64,
}

/// A configured bound evaluator for one oversampling factor.
#[derive(Debug, Clone)]
pub struct SerBound {
    table: RegionTable,
    sigma: DMatrix<f64>,
    bits_per_symbol: f64,
    settings: BoundSettings,
}

fn orthant_index(signs: &[Level]) -> usize {
    signs[1..]
        .iter()
        .fold(0usize, |acc, &s| acc << 1 | usize::from(s < 0))
}

fn orthant_signs(index: usize, dim: usize) -> Vec<Level> {
    let mut z = vec![1 as Level; dim];
    for (k, zk) in z.iter_mut().skip(1).enumerate() {
        if index >> (dim - 2 - k) & 1 == 1 {
            *zk = -1;
        }
    }
    z
}

fn mix_seed(seed: u64, a: usize, b: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed
        .wrapping_add((a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((b as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SerBound {
    pub fn new(m_rx: usize, ops: &SignalOperators, settings: BoundSettings) -> Result<Self> {
        let codebook = ZxCodebook::for_m_rx(m_rx)?;
        let table = match settings.source {
            RegionSource::Published => published_region_table(m_rx)?,
            RegionSource::Derived => derive_region_table(&codebook)?,
        };
        table.validate()?;
        if ops.config.m_rx != m_rx {
            return Err(Error::config(format!(
                "operators built for m_rx={} but bound requested for m_rx={m_rx}",
                ops.config.m_rx
            )));
        }
        let d = table.dim;
        if ops.n_tot() < d {
            return Err(Error::Dimension {
                what: "noise covariance size (increase n_symbols)",
                expected: d,
                got: ops.n_tot(),
            });
        }
        let sigma = ops.noise_cov.view((0, 0), (d, d)).into_owned();
        Ok(SerBound {
            table,
            sigma,
            bits_per_symbol: codebook.bits_per_symbol(),
            settings,
        })
    }

    pub fn table(&self) -> &RegionTable {
        &self.table
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn bits_per_symbol(&self) -> f64 {
        self.bits_per_symbol
    }

    pub fn settings(&self) -> &BoundSettings {
        &self.settings
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.settings.eps = eps;
        self
    }

    fn orthant_probability(
        &self,
        gamma: f64,
        word: usize,
        orthant: &[Level],
        seed: u64,
        eps: f64,
    ) -> Result<(f64, f64)> {
        let d = self.table.dim;
        let mu = DVector::from_iterator(
            d,
            self.table.mu_signs[word].iter().map(|&s| gamma * s as f64),
        );
        let row = RegionRow {
            word,
            pattern: orthant.to_vec(),
            region: orthant.to_vec(),
        };
        let rect = MvnRectangle::new(
            mu,
            self.sigma.clone(),
            DVector::from_vec(row.lower()),
            DVector::from_vec(row.upper()),
        )?;
        let settings = MvnSettings {
            eps,
            seed,
            ..MvnSettings::default()
        };
        let est = mvn_rect_prob(&rect, &settings.with_rel_eps(self.settings.rel_eps))?;
        Ok((est.p, est.err_est))
    }

    /// Probability of missing each word: the negative-pilot half plus every
    /// positive-pilot orthant not credited to the word. Summing the small
    /// masses keeps precision deep in the tail, where `1 - P'` would not.
    fn miss_probabilities(&self, gamma: f64, eps: f64) -> Result<Vec<(f64, f64)>> {
        let d = self.table.dim;
        let n_orthants = 1usize << (d - 1);
        let pilot_flip = norm_cdf(-gamma / self.sigma[(0, 0)].sqrt());
        let tasks: Vec<(usize, usize)> = (0..self.table.alphabet_size())
            .flat_map(|w| {
                let credited: BTreeSet<usize> =
                    self.table.rows_for(w).map(|r| orthant_index(&r.region)).collect();
                (0..n_orthants)
                    .filter(move |o| !credited.contains(o))
                    .map(move |o| (w, o))
            })
            .collect();
        let probs: Vec<(usize, f64, f64)> = tasks
            .par_iter()
            .map(|&(w, o)| {
                let seed = mix_seed(self.settings.seed, w, o);
                self.orthant_probability(gamma, w, &orthant_signs(o, d), seed, eps)
                    .map(|(p, e)| (w, p, e))
            })
            .collect::<Result<_>>()?;
        let mut miss = vec![(pilot_flip, 0.0); self.table.alphabet_size()];
        for (w, p, e) in probs {
            miss[w].0 += p;
            miss[w].1 += e;
        }
        Ok(miss)
    }

    /// `P'(b_l)` for every word.
    pub fn correct_probabilities(&self, gamma: f64) -> Result<Vec<f64>> {
        Ok(self
            .miss_probabilities(gamma, self.settings.eps)?
            .into_iter()
            .map(|(m, _)| (1.0 - m).clamp(0.0, 1.0))
            .collect())
    }

    /// Masses of every positive-pilot orthant for word `word`'s mean, in
    /// orthant-index order.
    pub fn orthant_masses(&self, gamma: f64, word: usize) -> Result<Vec<(Vec<Level>, f64, f64)>> {
        let d = self.table.dim;
        (0..1usize << (d - 1))
            .map(|o| {
                let z = orthant_signs(o, d);
                let seed = mix_seed(self.settings.seed, word, o);
                let (p, e) = self.orthant_probability(gamma, word, &z, seed, self.settings.eps)?;
                Ok((z, p, e))
            })
            .collect()
    }

    fn evaluate_with_eps(&self, gamma: f64, eps: f64) -> Result<BoundResult> {
        if !(gamma > 0.0) {
            return Err(Error::config("gamma must be positive"));
        }
        let miss = self.miss_probabilities(gamma, eps)?;
        let m = miss.len() as f64;
        let ser_ub = (miss.iter().map(|(p, _)| p).sum::<f64>() / m).clamp(0.0, 1.0);
        let err_est = miss.iter().map(|(_, e)| e).sum::<f64>() / m;
        Ok(BoundResult {
            gamma,
            ser_ub,
            ber_ub: ser_ub / self.bits_per_symbol,
            err_est,
        })
    }

    /// `SER_ub = 1 - (1/m) sum_l P'(b_l)` and `BER_ub = SER_ub / n_s`.
    pub fn evaluate(&self, gamma: f64) -> Result<BoundResult> {
        self.evaluate_with_eps(gamma, self.settings.eps)
    }

    pub fn sweep(&self, gammas: &[f64]) -> Result<Vec<BoundResult>> {
        gammas.par_iter().map(|&g| self.evaluate(g)).collect()
    }

    /// Whether `SER_ub(gamma) > ser_target`. Tightens `eps` tenfold per pass
    /// until the answer clears the error estimate or `eps_min` is reached.
    fn above_target(&self, gamma: f64, ser_target: f64, eps_min: f64) -> Result<(bool, f64)> {
        let mut eps = self.settings.eps.max(eps_min);
        loop {
            let r = self.evaluate_with_eps(gamma, eps)?;
            if (r.ser_ub - ser_target).abs() > r.err_est || eps <= eps_min {
                return Ok((r.ser_ub > ser_target, r.ser_ub));
            }
            eps = (eps / 10.0).max(eps_min);
        }
    }

    /// Largest multiple of `grid_step` whose bound still exceeds `ser_target`,
    /// i.e. the grid point just before the crossing, found by bisection. If
    /// the first grid point already meets the target, that point is returned.
    pub fn gamma_for_target(&self, ser_target: f64, grid_step: f64) -> Result<f64> {
        if !(ser_target > 0.0 && ser_target < 1.0) {
            return Err(Error::config("SER target must lie in (0, 1)"));
        }
        if !(grid_step > 0.0) {
            return Err(Error::config("grid step must be positive"));
        }
        let eps_min = self.settings.eps.min(1e-2 * ser_target);
        let above = |k: usize| self.above_target(k as f64 * grid_step, ser_target, eps_min);
        let k_max = (GAMMA_MAX / grid_step).round() as usize;
        let (top_above, top) = above(k_max)?;
        if top_above {
            return Err(Error::TargetUnreachable {
                target: ser_target,
                gamma_max: GAMMA_MAX,
                ser: top,
            });
        }
        let (mut lo, mut hi) = (1usize, k_max);
        if !above(lo)?.0 {
            return Ok(lo as f64 * grid_step);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if above(mid)?.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo as f64 * grid_step)
    }
}

/// Bound at one `gamma` with the published regions.
pub fn ser_upper_bound(gamma: f64, m_rx: usize, ops: &SignalOperators, eps: f64) -> Result<BoundResult> {
    let settings = BoundSettings {
        eps,
        ..BoundSettings::default()
    };
    SerBound::new(m_rx, ops, settings)?.evaluate(gamma)
}

/// `gamma(SER)` with the published regions.
pub fn gamma_for_target(
    ser_target: f64,
    m_rx: usize,
    ops: &SignalOperators,
    grid_step: f64,
) -> Result<f64> {
    SerBound::new(m_rx, ops, BoundSettings::default())?.gamma_for_target(ser_target, grid_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_rows_are_well_formed() {
        for m_rx in [2, 3] {
            let t = published_region_table(m_rx).unwrap();
            t.validate().unwrap();
            assert_eq!(t.rows.len(), 1 << (t.dim - 1));
        }
        let t3 = published_region_table(3).unwrap();
        assert_eq!(t3.rows_for(0).count(), 3);
        let b3: Vec<_> = t3.rows_for(2).collect();
        assert_eq!(b3.len(), 1);
        assert_eq!(b3[0].region, vec![1, 1, -1, -1]);
        assert_eq!(b3[0].lower(), vec![0.0, 0.0, f64::NEG_INFINITY, f64::NEG_INFINITY]);
        assert_eq!(b3[0].upper(), vec![f64::INFINITY, f64::INFINITY, 0.0, 0.0]);
        assert!(t3.rows_for(0).any(|r| r.pattern == vec![1, 1, -1, 1]));

        let t2 = published_region_table(2).unwrap();
        assert_eq!(t2.mu_signs[7], vec![1, -1, -1, 1, 1]);
        assert_eq!(t2.rows_for(7).count(), 1);
        assert_eq!(t2.rows_for(1).count(), 3);
        assert!(matches!(published_region_table(4), Err(Error::UnsupportedOversampling(4))));
    }

    #[test]
    fn mean_signs_match_codewords() {
        for m_rx in [2, 3] {
            let cb = ZxCodebook::for_m_rx(m_rx).unwrap();
            let published = published_region_table(m_rx).unwrap();
            let derived = derive_region_table(&cb).unwrap();
            assert_eq!(published.mu_signs, derived.mu_signs);
        }
    }

    #[test]
    fn single_sample_symbols() {
        let cb = ZxCodebook::for_m_rx(1).unwrap();
        let t = derive_region_table(&cb).unwrap();
        assert_eq!(t.dim, 2);
        assert_eq!(t.rows_for(0).map(|r| r.region.clone()).collect::<Vec<_>>(), vec![vec![1, 1]]);
        assert_eq!(t.rows_for(1).map(|r| r.region.clone()).collect::<Vec<_>>(), vec![vec![1, -1]]);
    }

    #[test]
    fn orthant_indexing_round_trips() {
        for d in 2..7 {
            for o in 0..1usize << (d - 1) {
                assert_eq!(orthant_index(&orthant_signs(o, d)), o);
            }
        }
    }
}
