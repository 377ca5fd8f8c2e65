//! Minimum-energy precoder that keeps every receive sample at least `gamma`
//! on the right side of zero, checked by noise-free re-quantization.
//!
//! `cargo run --example qos_precoding`

use tizx::precoding::solve_qos;
use tizx::qp::QpSettings;
use tizx::signal_chain::{SignalOperators, SystemConfig};
use tizx::zx_modem::{forward_map, ZxAlphabet};

fn main() -> tizx::Result<()> {
    let ops = SignalOperators::build(&SystemConfig::new(2, 2))?;
    let alphabet = ZxAlphabet::new(2)?;
    for gamma in [0.5, 1.0, 2.0, 4.0] {
        println!("gamma = {gamma}");
        for word in [[0, 0], [1, 2], [2, 1]] {
            let syms: Vec<_> = word.iter().map(|&s| tizx::zx_modem::Symbol(s)).collect();
            let frame = forward_map(&syms, 1, &alphabet)?.with_pilot();
            let sol = solve_qos(&frame, &ops, gamma, 1.0, QpSettings::default())?;
            let y = &ops.vu * &sol.p;
            let ok = frame.iter().zip(y.iter()).all(|(&c, &v)| (v > 0.0) == (c > 0));
            println!(
                "  b{} b{}  energy {:8.3}  margin {:.6}  kkt {:.1e}  {} iterations  {}",
                word[0] + 1,
                word[1] + 1,
                sol.objective,
                sol.min_margin,
                sol.kkt.primal.max(sol.kkt.dual).max(sol.kkt.gap),
                sol.iterations,
                if ok { "re-quantizes" } else { "MISMATCH" },
            );
        }
    }
    Ok(())
}
