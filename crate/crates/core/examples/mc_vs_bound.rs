//! Simulated SER next to the semi-analytical bound.
//!
//! `cargo run --release --example mc_vs_bound -- 3 20000`

use tizx::montecarlo::{run_sweep, McConfig, RNG_NAME};
use tizx::ser_bound::{BoundSettings, SerBound};
use tizx::signal_chain::{SignalOperators, SystemConfig};

fn main() -> tizx::Result<()> {
    let mut args = std::env::args().skip(1);
    let m_rx: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let blocks: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let sys = SystemConfig::new(if m_rx == 2 { 2 } else { 1 }, m_rx);
    let bound = SerBound::new(m_rx, &SignalOperators::build(&sys)?, BoundSettings::default())?;

    let gammas = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let sim = run_sweep(&McConfig::new(sys, 0.5, blocks, 7), &gammas)?;
    println!("m_rx = {m_rx}, {blocks} blocks per point, {RNG_NAME}");
    println!("gamma   simulated      +/-ci95      bound");
    for r in &sim {
        let ub = bound.evaluate(r.gamma)?.ser_ub;
        let flag = if r.ser <= ub + 3.0 * r.ci95_ser { "" } else { "  above bound" };
        println!("{:5.2}  {:.4e}  {:.2e}  {:.4e}{flag}", r.gamma, r.ser, r.ci95_ser, ub);
    }
    Ok(())
}
