//! Map bits to a zero-crossing frame and detect them back.
//!
//! `cargo run --example modem_frame`

use tizx::zx_modem::{gray_decode, gray_encode, ZxCodebook};

fn show(levels: &[i8]) -> String {
    levels.iter().map(|&l| if l > 0 { '+' } else { '-' }).collect()
}

fn main() -> tizx::Result<()> {
    for m_rx in [2, 3] {
        let cb = ZxCodebook::for_m_rx(m_rx)?;
        println!("m_rx = {m_rx}: {} words of {} symbols, {} bits each", cb.size(), cb.block_len(), cb.bits_per_word());
        for w in 0..cb.size() {
            let syms: Vec<String> = cb.word(w).iter().map(|s| s.to_string()).collect();
            let bits: String = cb.label(w).iter().map(|b| char::from(b'0' + b)).collect();
            println!("  {bits}  {:<8} +1 -> {}", syms.join(" "), show(&cb.codeword(w, 1)));
        }

        let bits: Vec<u8> = (0..4 * cb.bits_per_word()).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
        let symbols = gray_encode(&bits, &cb)?;
        let frame = tizx::zx_modem::forward_map(&symbols, 1, cb.alphabet())?;
        let seq = frame.with_pilot();
        let detected = tizx::zx_modem::detect_sequence(&seq, cb.alphabet())?;
        let back = gray_decode(&detected, &cb)?;
        println!("  frame {} round trip {}", show(&seq), if back == bits { "ok" } else { "FAILED" });
    }
    Ok(())
}
