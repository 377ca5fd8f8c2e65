use super::{Level, Symbol, ZxAlphabet};
use crate::error::{Error, Result};

/// Number of positions where two ±1 sequences differ, `sum |a - b| / 2`.
pub fn hamming_distance(a: &[Level], b: &[Level]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Minimum-Hamming-distance decision for one segment `[rho, z_1..z_m]`.
///
/// Candidates are `[prev_level, codeword(s, prev_level)]` for every symbol;
/// ties go to the lowest symbol index.
pub fn hamming_detect(segment: &[Level], prev_level: Level, alphabet: &ZxAlphabet) -> Symbol {
    debug_assert_eq!(segment.len(), alphabet.m_rx() + 1);
    let head = usize::from(segment[0] != prev_level);
    let mut best = (usize::MAX, Symbol(0));
    for s in alphabet.symbols() {
        let d = head + hamming_distance(&segment[1..], &alphabet.codeword(s, prev_level));
        if d < best.0 {
            best = (d, s);
        }
    }
    best.1
}

/// Symbol-by-symbol detection of a received frame whose first sample is the
/// pilot. Each segment is referenced to the received sample preceding it.
pub fn detect_sequence(received: &[Level], alphabet: &ZxAlphabet) -> Result<Vec<Symbol>> {
    let m = alphabet.m_rx();
    if received.len() < m + 1 || (received.len() - 1) % m != 0 {
        return Err(Error::FrameLength {
            len: received.len(),
            m_rx: m,
        });
    }
    Ok((0..(received.len() - 1) / m)
        .map(|j| {
            let seg = &received[j * m..=(j + 1) * m];
            hamming_detect(seg, seg[0], alphabet)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::forward_map;
    use super::*;

    #[test]
    fn exact_codeword() {
        let a = ZxAlphabet::new(3).unwrap();
        assert_eq!(hamming_detect(&[1, 1, 1, -1], 1, &a), Symbol(1));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let a = ZxAlphabet::new(3).unwrap();
        // b1/b3 at distance one
        assert_eq!(hamming_detect(&[1, 1, -1, 1], 1, &a), Symbol(0));
        // b2/b4 at distance one
        assert_eq!(hamming_detect(&[1, -1, 1, -1], 1, &a), Symbol(1));
    }

    #[test]
    fn single_flip_in_no_crossing_run() {
        let a = ZxAlphabet::new(3).unwrap();
        let frame = forward_map(&[Symbol(0); 3], 1, &a).unwrap();
        let mut rx = frame.with_pilot();
        rx[5] = -1; // middle of the second codeword
        assert_eq!(detect_sequence(&rx, &a).unwrap(), vec![Symbol(0); 3]);
    }

    #[test]
    fn pilot_flip_only_touches_first_decision() {
        let a = ZxAlphabet::new(3).unwrap();
        for first in a.symbols() {
            let sent = vec![first, Symbol(2), Symbol(1), Symbol(3)];
            let mut rx = forward_map(&sent, 1, &a).unwrap().with_pilot();
            rx[0] = -rx[0];
            let got = detect_sequence(&rx, &a).unwrap();
            assert_eq!(&got[1..], &sent[1..]);
        }
    }

    #[test]
    fn frame_length_checked() {
        let a = ZxAlphabet::new(3).unwrap();
        assert!(matches!(
            detect_sequence(&[1, 1, 1], &a),
            Err(Error::FrameLength { len: 3, m_rx: 3 })
        ));
        assert!(detect_sequence(&[1, 1, 1, 1, 1], &a).is_err());
    }

    #[test]
    fn detector_partitions_all_segments() {
        for m_rx in 1..=4 {
            let a = ZxAlphabet::new(m_rx).unwrap();
            let mut counts = vec![0usize; a.size()];
            for bits in 0u32..(1 << (m_rx + 1)) {
                let seg: Vec<Level> = (0..=m_rx)
                    .map(|k| if bits >> k & 1 == 0 { 1 } else { -1 })
                    .collect();
                let s = hamming_detect(&seg, seg[0], &a);
                counts[s.0] += 1;
            }
            assert_eq!(counts.iter().sum::<usize>(), 1 << (m_rx + 1));
            assert!(counts.iter().all(|&c| c >= 2), "m_rx={m_rx}: {counts:?}");
        }
    }
}
