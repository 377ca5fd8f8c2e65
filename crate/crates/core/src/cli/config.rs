//! Flat key-value run configuration (TOML syntax, one key per line).
//!
//! Every key is optional. Command-line flags override file values, which
//! override the defaults below:
//!
//! | key | default |
//! |---|---|
//! | `m_rx` | 3 |
//! | `n_symbols` | 2 for `m_rx = 2`, otherwise 1 |
//! | `m_tx` | `m_rx` |
//! | `n_users`, `n_tx_antennas` | 1 |
//! | `rolloff_tx`, `rolloff_rx` | 0.22 |
//! | `symbol_period` | 1 |
//! | `noise_variance` | 1 |
//! | `beamforming_gain` | 1 |
//! | `noise_split` | `"full"` (or `"half"`) |
//! | `refine` | 64 |
//! | `seed` | 7 |
//! | `eps` | 1e-5 |
//! | `regions` | `"published"` (or `"derived"`) |
//! | `pilot_mode` | `"received"` (or `"known"`) |
//! | `blocks` | 100000 |
//! | `threads` | all cores |

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::montecarlo::PilotMode;
use crate::ser_bound::RegionSource;
use crate::signal_chain::{NoiseSplit, SystemConfig, DEFAULT_REFINE};

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_BLOCKS: usize = 100_000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub m_rx: Option<usize>,
    pub n_symbols: Option<usize>,
    pub m_tx: Option<usize>,
    pub n_users: Option<usize>,
    pub n_tx_antennas: Option<usize>,
    pub rolloff_tx: Option<f64>,
    pub rolloff_rx: Option<f64>,
    pub symbol_period: Option<f64>,
    pub noise_variance: Option<f64>,
    pub beamforming_gain: Option<f64>,
    pub noise_split: Option<String>,
    pub refine: Option<usize>,
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub regions: Option<String>,
    pub pilot_mode: Option<String>,
    pub blocks: Option<usize>,
    pub threads: Option<usize>,
}

/// Takes every key set in `other`, keeping `self` elsewhere.
macro_rules! overlay {
    ($self:ident, $other:ident, $($f:ident),*) => {
        RunConfig { $($f: $other.$f.clone().or_else(|| $self.$f.clone()),)* }
    };
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Self::parse(&text)
    }

    pub fn overlay(&self, other: &RunConfig) -> RunConfig {
        overlay!(
            self, other, m_rx, n_symbols, m_tx, n_users, n_tx_antennas, rolloff_tx, rolloff_rx,
            symbol_period, noise_variance, beamforming_gain, noise_split, refine, seed, eps,
            regions, pilot_mode, blocks, threads
        )
    }

    pub fn m_rx(&self) -> usize {
        self.m_rx.unwrap_or(3)
    }

    pub fn system(&self) -> Result<SystemConfig> {
        let m_rx = self.m_rx();
        let n = self.n_symbols.unwrap_or(if m_rx == 2 { 2 } else { 1 });
        let mut cfg = SystemConfig::new(n, m_rx);
        cfg.m_tx = self.m_tx.unwrap_or(m_rx);
        cfg.n_users = self.n_users.unwrap_or(1);
        cfg.n_tx_antennas = self.n_tx_antennas.unwrap_or(cfg.n_users);
        cfg.rolloff_tx = self.rolloff_tx.unwrap_or(cfg.rolloff_tx);
        cfg.rolloff_rx = self.rolloff_rx.unwrap_or(cfg.rolloff_rx);
        cfg.symbol_period = self.symbol_period.unwrap_or(1.0);
        cfg.noise_variance = self.noise_variance.unwrap_or(1.0);
        cfg.beamforming_gain = self.beamforming_gain.unwrap_or(1.0);
        cfg.noise_split = match self.noise_split.as_deref() {
            None | Some("full") => NoiseSplit::PerRealDimFull,
            Some("half") => NoiseSplit::PerRealDimHalf,
            Some(other) => return Err(Error::config(format!("noise_split {other:?}: expected full or half"))),
        };
        cfg.refine = self.refine.unwrap_or(DEFAULT_REFINE);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn eps(&self) -> Result<f64> {
        let eps = self.eps.unwrap_or(crate::mvn::DEFAULT_EPS);
        if !(eps > 0.0) {
            return Err(Error::config("eps must be positive"));
        }
        Ok(eps)
    }

    pub fn regions(&self) -> Result<RegionSource> {
        match self.regions.as_deref() {
            None | Some("published") => Ok(RegionSource::Published),
            Some("derived") => Ok(RegionSource::Derived),
            Some(other) => Err(Error::config(format!("regions {other:?}: expected published or derived"))),
        }
    }

    pub fn pilot_mode(&self) -> Result<PilotMode> {
        match self.pilot_mode.as_deref() {
            None | Some("received") => Ok(PilotMode::Received),
            Some("known") => Ok(PilotMode::Known),
            Some(other) => Err(Error::config(format!("pilot_mode {other:?}: expected received or known"))),
        }
    }

    pub fn blocks(&self) -> Result<usize> {
        match self.blocks.unwrap_or(DEFAULT_BLOCKS) {
            0 => Err(Error::config("blocks must be at least 1")),
            b => Ok(b),
        }
    }

    /// Checks every key before any computation starts.
    pub fn validate(&self) -> Result<()> {
        self.system()?;
        self.eps()?;
        self.regions()?;
        self.pilot_mode()?;
        self.blocks()?;
        if self.threads == Some(0) {
            return Err(Error::config("threads must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 over the resolved settings, excluding `threads`, which does not
    /// change results.
    pub fn hash(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Resolved<'a> {
            system: SystemConfig,
            seed: u64,
            eps: f64,
            regions: &'a str,
            pilot_mode: &'a str,
            blocks: usize,
        }
        let r = Resolved {
            system: self.system()?,
            seed: self.seed(),
            eps: self.eps()?,
            regions: match self.regions()? {
                RegionSource::Published => "published",
                RegionSource::Derived => "derived",
            },
            pilot_mode: match self.pilot_mode()? {
                PilotMode::Received => "received",
                PilotMode::Known => "known",
            },
            blocks: self.blocks()?,
        };
        let json = serde_json::to_string(&r).map_err(|e| Error::config(e.to_string()))?;
        let digest = Sha256::digest(json.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_documents() {
        let c = RunConfig::parse("# scenario\nm_rx = 2\nnoise_variance = 0.5\nregions = \"derived\"\n").unwrap();
        assert_eq!(c.m_rx, Some(2));
        let sys = c.system().unwrap();
        assert_eq!(sys.n_symbols, 2);
        assert_eq!(sys.noise_variance, 0.5);
        assert_eq!(c.regions().unwrap(), RegionSource::Derived);
        assert_eq!(c.seed(), DEFAULT_SEED);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(RunConfig::parse("mrx = 3\n").is_err());
        assert!(RunConfig::parse("m_rx = \"three\"\n").is_err());
        for text in ["m_rx = 4\nm_tx = 3\n", "noise_split = \"quarter\"\n", "eps = 0.0\n", "blocks = 0\n", "threads = 0\n", "rolloff_tx = 1.5\n"] {
            assert!(RunConfig::parse(text).unwrap().validate().is_err(), "{text}");
        }
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::parse("m_rx = 2\nseed = 1\n").unwrap();
        let flags = RunConfig {
            seed: Some(9),
            ..RunConfig::default()
        };
        let merged = file.overlay(&flags);
        assert_eq!(merged.m_rx, Some(2));
        assert_eq!(merged.seed, Some(9));
    }

    #[test]
    fn hash_tracks_meaningful_keys_only() {
        let base = RunConfig::default();
        let h = base.hash().unwrap();
        assert_eq!(h.len(), 64);
        assert_eq!(h, RunConfig::default().hash().unwrap());
        let threads = RunConfig { threads: Some(2), ..base.clone() };
        assert_eq!(threads.hash().unwrap(), h);
        // spelling out a default does not change the resolved settings
        let explicit = RunConfig { m_rx: Some(3), ..base.clone() };
        assert_eq!(explicit.hash().unwrap(), h);
        for changed in [
            RunConfig { seed: Some(8), ..base.clone() },
            RunConfig { noise_variance: Some(2.0), ..base.clone() },
            RunConfig { regions: Some("derived".into()), ..base.clone() },
        ] {
            assert_ne!(changed.hash().unwrap(), h);
        }
    }
}
