//! Time-instance zero-crossing (TI ZX) modulation.
//!
//! With `m_rx`-fold oversampling a symbol interval holds `m_rx` one-bit
//! samples. Symbol `b1` keeps the previous level for the whole interval; the
//! remaining `m_rx` symbols each place a single sign change in one of the
//! sub-intervals, `b2` in the last one down to `b_{m_rx+1}` in the first.
//! A frame starts with a pilot sample that anchors the first symbol.

mod codebook;
mod detect;

pub use codebook::{gray_decode, gray_encode, ZxCodebook};
pub use detect::{detect_sequence, hamming_detect, hamming_distance};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A one-bit sample, `+1` or `-1`.
pub type Level = i8;

/// Symbol `b_{k+1}` is stored as index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub usize);

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0 + 1)
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let digits = t.strip_prefix('b').or_else(|| t.strip_prefix('B')).unwrap_or(t);
        match digits.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Symbol(n - 1)),
            _ => Err(Error::config(format!("cannot parse symbol {s:?}"))),
        }
    }
}

/// The `1 + m_rx` symbols of the modulation and their zero-crossing slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZxAlphabet {
    m_rx: usize,
}

impl ZxAlphabet {
    pub fn new(m_rx: usize) -> Result<Self> {
        if m_rx == 0 {
            return Err(Error::UnsupportedOversampling(m_rx));
        }
        Ok(ZxAlphabet { m_rx })
    }

    pub fn m_rx(&self) -> usize {
        self.m_rx
    }

    /// Number of symbols `R = 1 + m_rx`.
    pub fn size(&self) -> usize {
        self.m_rx + 1
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.size()).map(Symbol)
    }

    pub fn check(&self, s: Symbol) -> Result<()> {
        if s.0 < self.size() {
            Ok(())
        } else {
            Err(Error::InvalidSymbol {
                id: s.0 + 1,
                size: self.size(),
            })
        }
    }

    /// 1-based sub-interval holding the zero crossing, `None` for `b1`.
    pub fn zero_crossing(&self, s: Symbol) -> Option<usize> {
        if s.0 == 0 {
            None
        } else {
            Some(self.m_rx + 1 - s.0)
        }
    }

    /// The `m_rx` samples of `s` following a sample at level `prev`.
    pub fn codeword(&self, s: Symbol, prev: Level) -> Vec<Level> {
        match self.zero_crossing(s) {
            None => vec![prev; self.m_rx],
            Some(i) => {
                let mut cw = vec![prev; i - 1];
                cw.resize(self.m_rx, -prev);
                cw
            }
        }
    }
}

/// A mapped frame: pilot plus `n_symbols * m_rx` samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZxFrame {
    pub pilot: Level,
    pub samples: Vec<Level>,
    pub symbols: Vec<Symbol>,
}

impl ZxFrame {
    /// The full output sequence, pilot first (`n_tot` samples).
    pub fn with_pilot(&self) -> Vec<Level> {
        let mut out = Vec::with_capacity(self.samples.len() + 1);
        out.push(self.pilot);
        out.extend_from_slice(&self.samples);
        out
    }
}

fn check_level(l: Level) -> Result<()> {
    if l == 1 || l == -1 {
        Ok(())
    } else {
        Err(Error::config(format!("sample level must be +1 or -1, got {l}")))
    }
}

/// Maps symbols to the concatenated ±1 sample sequence, each codeword
/// continuing from the last emitted sample.
pub fn forward_map(symbols: &[Symbol], pilot: Level, alphabet: &ZxAlphabet) -> Result<ZxFrame> {
    check_level(pilot)?;
    if symbols.is_empty() {
        return Err(Error::config("cannot map an empty symbol sequence"));
    }
    let mut samples = Vec::with_capacity(symbols.len() * alphabet.m_rx());
    let mut level = pilot;
    for &s in symbols {
        alphabet.check(s)?;
        let cw = alphabet.codeword(s, level);
        level = *cw.last().expect("m_rx >= 1");
        samples.extend(cw);
    }
    Ok(ZxFrame {
        pilot,
        samples,
        symbols: symbols.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(ids: &[usize]) -> Vec<Symbol> {
        ids.iter().map(|&i| Symbol(i - 1)).collect()
    }

    #[test]
    fn maps_the_four_symbol_example() {
        let a = ZxAlphabet::new(3).unwrap();
        let f = forward_map(&syms(&[4, 2, 3, 1]), 1, &a).unwrap();
        assert_eq!(f.samples, vec![-1, -1, -1, -1, -1, 1, 1, -1, -1, -1, -1, -1]);
    }

    #[test]
    fn no_crossing_keeps_pilot_level() {
        for m_rx in 1..6 {
            let a = ZxAlphabet::new(m_rx).unwrap();
            let f = forward_map(&syms(&[1, 1, 1]), 1, &a).unwrap();
            assert!(f.samples.iter().all(|&s| s == 1));
        }
    }

    #[test]
    fn first_interval_crossing_from_negative_pilot() {
        let a = ZxAlphabet::new(2).unwrap();
        let f = forward_map(&syms(&[3]), -1, &a).unwrap();
        assert_eq!(f.samples, vec![1, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        let a = ZxAlphabet::new(3).unwrap();
        assert!(matches!(
            forward_map(&[Symbol(4)], 1, &a),
            Err(Error::InvalidSymbol { id: 5, size: 4 })
        ));
        assert!(forward_map(&[], 1, &a).is_err());
        assert!(forward_map(&[Symbol(0)], 0, &a).is_err());
    }

    #[test]
    fn each_interval_is_claimed_once() {
        let a = ZxAlphabet::new(5).unwrap();
        let mut slots: Vec<usize> = a.symbols().filter_map(|s| a.zero_crossing(s)).collect();
        slots.sort();
        assert_eq!(slots, vec![1, 2, 3, 4, 5]);
        assert_eq!(a.symbols().filter(|&s| a.zero_crossing(s).is_none()).count(), 1);
    }

    #[test]
    fn symbol_parsing() {
        assert_eq!("b4".parse::<Symbol>().unwrap(), Symbol(3));
        assert_eq!("2".parse::<Symbol>().unwrap(), Symbol(1));
        assert!("b0".parse::<Symbol>().is_err());
        assert_eq!(Symbol(2).to_string(), "b3");
    }
}
