use super::detect::hamming_distance;
use super::{Level, Symbol, ZxAlphabet};
use crate::error::{Error, Result};

/// Blocks of consecutive symbols used as the unit of bit labelling and of
/// detection.
///
/// When `1 + m_rx` is a power of two every symbol carries `log2(1 + m_rx)`
/// bits and a block is a single symbol. For `m_rx = 2` the three symbols are
/// paired: eight of the nine pairs carry three bits and the pair `(b2, b3)` is
/// never transmitted.
///
/// Word order fixes both the reflected Gray labels and the detector
/// tie-break.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZxCodebook {
    alphabet: ZxAlphabet,
    words: Vec<Vec<Symbol>>,
    bits_per_word: usize,
}

const PAIR_WORDS: [(usize, usize); 8] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (1, 0),
    (1, 1),
    (2, 1),
    (2, 0),
    (2, 2),
];

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

impl ZxCodebook {
    pub fn for_m_rx(m_rx: usize) -> Result<Self> {
        let alphabet = ZxAlphabet::new(m_rx)?;
        let r = alphabet.size();
        if m_rx == 2 {
            let words = PAIR_WORDS
                .iter()
                .map(|&(a, b)| vec![Symbol(a), Symbol(b)])
                .collect();
            Ok(ZxCodebook {
                alphabet,
                words,
                bits_per_word: 3,
            })
        } else if r.is_power_of_two() {
            Ok(ZxCodebook {
                words: alphabet.symbols().map(|s| vec![s]).collect(),
                alphabet,
                bits_per_word: r.trailing_zeros() as usize,
            })
        } else {
            Err(Error::UnsupportedOversampling(m_rx))
        }
    }

    pub fn alphabet(&self) -> &ZxAlphabet {
        &self.alphabet
    }

    pub fn m_rx(&self) -> usize {
        self.alphabet.m_rx()
    }

    /// Symbols per word.
    pub fn block_len(&self) -> usize {
        self.words[0].len()
    }

    /// Number of words `m`.
    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn bits_per_word(&self) -> usize {
        self.bits_per_word
    }

    /// Bits per transmit symbol `n_s` (2 for `m_rx = 3`, 1.5 for `m_rx = 2`).
    pub fn bits_per_symbol(&self) -> f64 {
        self.bits_per_word as f64 / self.block_len() as f64
    }

    pub fn word(&self, idx: usize) -> &[Symbol] {
        &self.words[idx]
    }

    pub fn words(&self) -> &[Vec<Symbol>] {
        &self.words
    }

    /// Gray label of word `idx`, most significant bit first.
    pub fn label(&self, idx: usize) -> Vec<u8> {
        let g = gray(idx);
        (0..self.bits_per_word)
            .rev()
            .map(|k| (g >> k & 1) as u8)
            .collect()
    }

    /// Samples of word `idx` after a sample at level `prev`.
    pub fn codeword(&self, idx: usize, prev: Level) -> Vec<Level> {
        let mut out = Vec::with_capacity(self.block_len() * self.m_rx());
        let mut level = prev;
        for &s in &self.words[idx] {
            let cw = self.alphabet.codeword(s, level);
            level = *cw.last().expect("m_rx >= 1");
            out.extend(cw);
        }
        out
    }

    /// Minimum-Hamming-distance word for `segment = [rho, z...]` against
    /// candidates `[prev_level, codeword(w, prev_level)]`.
    pub fn detect(&self, segment: &[Level], prev_level: Level) -> usize {
        debug_assert_eq!(segment.len(), self.block_len() * self.m_rx() + 1);
        let head = usize::from(segment[0] != prev_level);
        let mut best = (usize::MAX, 0);
        for w in 0..self.size() {
            let d = head + hamming_distance(&segment[1..], &self.codeword(w, prev_level));
            if d < best.0 {
                best = (d, w);
            }
        }
        best.1
    }

    /// Word-by-word detection of a frame whose first sample is the pilot,
    /// referencing each block to the received sample before it.
    pub fn detect_frame(&self, received: &[Level]) -> Result<Vec<usize>> {
        let span = self.block_len() * self.m_rx();
        if received.len() < span + 1 || (received.len() - 1) % span != 0 {
            return Err(Error::FrameLength {
                len: received.len(),
                m_rx: self.m_rx(),
            });
        }
        Ok((0..(received.len() - 1) / span)
            .map(|j| {
                let seg = &received[j * span..=(j + 1) * span];
                self.detect(seg, seg[0])
            })
            .collect())
    }

    /// Index of the word whose symbols are `block`; symbol blocks outside the
    /// codebook resolve to the nearest word by codeword Hamming distance
    /// (lowest index on ties).
    pub fn word_index(&self, block: &[Symbol]) -> Result<usize> {
        if block.len() != self.block_len() {
            return Err(Error::Dimension {
                what: "symbol block",
                expected: self.block_len(),
                got: block.len(),
            });
        }
        for &s in block {
            self.alphabet.check(s)?;
        }
        if let Some(i) = self.words.iter().position(|w| w.as_slice() == block) {
            return Ok(i);
        }
        let mut cw = Vec::new();
        let mut level = 1;
        for &s in block {
            let c = self.alphabet.codeword(s, level);
            level = *c.last().expect("m_rx >= 1");
            cw.extend(c);
        }
        let mut best = (usize::MAX, 0);
        for w in 0..self.size() {
            let d = hamming_distance(&cw, &self.codeword(w, 1));
            if d < best.0 {
                best = (d, w);
            }
        }
        Ok(best.1)
    }
}

/// Maps a bit string onto symbols through the Gray-labelled codebook.
pub fn gray_encode(bits: &[u8], codebook: &ZxCodebook) -> Result<Vec<Symbol>> {
    let k = codebook.bits_per_word();
    if bits.is_empty() || bits.len() % k != 0 {
        return Err(Error::BitLength(format!(
            "{} bits is not a positive multiple of {k}",
            bits.len()
        )));
    }
    let mut out = Vec::with_capacity(bits.len() / k * codebook.block_len());
    for chunk in bits.chunks(k) {
        let mut g = 0usize;
        for &b in chunk {
            if b > 1 {
                return Err(Error::BitLength(format!("bit value {b} is not 0 or 1")));
            }
            g = g << 1 | b as usize;
        }
        out.extend_from_slice(codebook.word(gray_inverse(g)));
    }
    Ok(out)
}

/// Inverse of [`gray_encode`]; symbol blocks that are not codebook words
/// decode as their nearest word.
pub fn gray_decode(symbols: &[Symbol], codebook: &ZxCodebook) -> Result<Vec<u8>> {
    let l = codebook.block_len();
    if symbols.is_empty() || symbols.len() % l != 0 {
        return Err(Error::Dimension {
            what: "symbol count (multiple of block length)",
            expected: l,
            got: symbols.len(),
        });
    }
    let mut bits = Vec::with_capacity(symbols.len() / l * codebook.bits_per_word());
    for block in symbols.chunks(l) {
        bits.extend(codebook.label(codebook.word_index(block)?));
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn two_bit_labels() {
        let cb = ZxCodebook::for_m_rx(3).unwrap();
        let got: Vec<Vec<u8>> = (0..4).map(|i| cb.label(i)).collect();
        assert_eq!(got, vec![bits("00"), bits("01"), bits("11"), bits("10")]);
        assert_eq!(
            gray_encode(&bits("00011110"), &cb).unwrap(),
            vec![Symbol(0), Symbol(1), Symbol(2), Symbol(3)]
        );
        assert_eq!(cb.bits_per_symbol(), 2.0);
    }

    #[test]
    fn pair_labels_follow_reflected_gray() {
        let cb = ZxCodebook::for_m_rx(2).unwrap();
        let expected = ["000", "001", "011", "010", "110", "111", "101", "100"];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(cb.label(i), bits(e));
        }
        assert_eq!(cb.bits_per_symbol(), 1.5);
        assert_eq!(cb.block_len(), 2);
    }

    #[test]
    fn pair_codewords_from_positive_pilot() {
        let cb = ZxCodebook::for_m_rx(2).unwrap();
        let expected: [[Level; 4]; 8] = [
            [1, 1, 1, 1],
            [1, 1, 1, -1],
            [1, 1, -1, -1],
            [1, -1, -1, -1],
            [1, -1, -1, 1],
            [-1, -1, -1, 1],
            [-1, -1, -1, -1],
            [-1, -1, 1, 1],
        ];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(cb.codeword(i, 1), e.to_vec());
        }
    }

    #[test]
    fn unused_pair_decodes_to_nearest_word() {
        let cb = ZxCodebook::for_m_rx(2).unwrap();
        // (b2, b3) -> [1,1,-1,1,1], distance one from words 0, 4 and 7
        assert_eq!(cb.word_index(&[Symbol(1), Symbol(2)]).unwrap(), 0);
        assert_eq!(
            gray_decode(&[Symbol(1), Symbol(2)], &cb).unwrap(),
            bits("000")
        );
    }

    #[test]
    fn bit_length_errors() {
        let cb = ZxCodebook::for_m_rx(3).unwrap();
        assert!(matches!(gray_encode(&bits("011"), &cb), Err(Error::BitLength(_))));
        assert!(gray_encode(&[0, 2], &cb).is_err());
        let cb2 = ZxCodebook::for_m_rx(2).unwrap();
        assert!(gray_encode(&bits("0110"), &cb2).is_err());
        assert!(gray_decode(&[Symbol(0)], &cb2).is_err());
    }

    #[test]
    fn unsupported_alphabets() {
        assert!(matches!(
            ZxCodebook::for_m_rx(4),
            Err(Error::UnsupportedOversampling(4))
        ));
        let cb = ZxCodebook::for_m_rx(7).unwrap();
        assert_eq!(cb.bits_per_word(), 3);
        let cb = ZxCodebook::for_m_rx(1).unwrap();
        assert_eq!(cb.bits_per_word(), 1);
    }

    #[test]
    fn adjacent_zero_crossings_differ_in_one_bit() {
        let cb = ZxCodebook::for_m_rx(3).unwrap();
        for i in 1..cb.size() {
            let d = cb
                .label(i)
                .iter()
                .zip(cb.label(i - 1))
                .filter(|(a, b)| **a != *b)
                .count();
            assert_eq!(d, 1);
        }
    }
}
