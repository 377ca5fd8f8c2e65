use tizx::zx_modem::{detect_sequence, forward_map, gray_decode, gray_encode, Symbol, ZxAlphabet, ZxCodebook};

fn sequences(alphabet: usize, len: usize) -> impl Iterator<Item = Vec<Symbol>> {
    (0..alphabet.pow(len as u32)).map(move |mut k| {
        (0..len)
            .map(|_| {
                let s = Symbol(k % alphabet);
                k /= alphabet;
                s
            })
            .collect()
    })
}

#[test]
fn every_short_sequence_survives_map_and_detect() {
    for m_rx in [2, 3] {
        let alphabet = ZxAlphabet::new(m_rx).unwrap();
        let mut count = 0;
        for len in 1..=4 {
            for syms in sequences(alphabet.size(), len) {
                for pilot in [1, -1] {
                    let frame = forward_map(&syms, pilot, &alphabet).unwrap();
                    assert_eq!(detect_sequence(&frame.with_pilot(), &alphabet).unwrap(), syms);
                    count += 1;
                }
            }
        }
        let a = alphabet.size();
        assert_eq!(count, 2 * (a + a * a + a.pow(3) + a.pow(4)));
    }
}

#[test]
fn word_detection_inverts_the_codebook() {
    for m_rx in [2, 3] {
        let cb = ZxCodebook::for_m_rx(m_rx).unwrap();
        for len in 1..=4 {
            for idx in 0..cb.size().pow(len) {
                let words: Vec<usize> = (0..len).map(|j| idx / cb.size().pow(j) % cb.size()).collect();
                let syms: Vec<Symbol> = words.iter().flat_map(|&w| cb.word(w).to_vec()).collect();
                for pilot in [1, -1] {
                    let frame = forward_map(&syms, pilot, cb.alphabet()).unwrap();
                    assert_eq!(cb.detect_frame(&frame.with_pilot()).unwrap(), words);
                }
            }
        }
    }
}

#[test]
fn gray_labels_round_trip() {
    for m_rx in [2, 3] {
        let cb = ZxCodebook::for_m_rx(m_rx).unwrap();
        let k = cb.bits_per_word();
        for v in 0..1usize << (3 * k) {
            let bits: Vec<u8> = (0..3 * k).map(|i| (v >> i & 1) as u8).collect();
            assert_eq!(gray_decode(&gray_encode(&bits, &cb).unwrap(), &cb).unwrap(), bits);
        }
    }
}
