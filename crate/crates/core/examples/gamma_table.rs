//! Threshold distance needed for a target symbol error rate.
//!
//! `cargo run --release --example gamma_table -- 3`

use tizx::ser_bound::{BoundSettings, SerBound, GAMMA_GRID_STEP};
use tizx::signal_chain::{SignalOperators, SystemConfig};

fn main() -> tizx::Result<()> {
    let m_rx: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let n = if m_rx == 2 { 2 } else { 1 };
    let ops = SignalOperators::build(&SystemConfig::new(n, m_rx))?;
    let bound = SerBound::new(m_rx, &ops, BoundSettings::default())?;
    println!("m_rx = {m_rx}, sigma^2 = 1");
    for e in 1..=4 {
        let target = 10f64.powi(-e);
        let gamma = bound.gamma_for_target(target, GAMMA_GRID_STEP)?;
        let at = bound.evaluate(gamma)?.ser_ub;
        let next = bound.evaluate(gamma + GAMMA_GRID_STEP)?.ser_ub;
        println!("  SER 1e-{e}: gamma {gamma:.2}  (bound {at:.3e}, then {next:.3e})");
    }
    Ok(())
}
