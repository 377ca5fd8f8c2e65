//! Worst-case SER and BER bound over a range of threshold distances.
//!
//! `cargo run --release --example bound_curve -- 3`

use std::time::Instant;

use tizx::ser_bound::{BoundSettings, RegionSource, SerBound};
use tizx::signal_chain::{SignalOperators, SystemConfig};

fn main() -> tizx::Result<()> {
    let m_rx: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let n = if m_rx == 2 { 2 } else { 1 };
    let ops = SignalOperators::build(&SystemConfig::new(n, m_rx))?;
    for source in [RegionSource::Published, RegionSource::Derived] {
        let bound = SerBound::new(m_rx, &ops, BoundSettings { source, ..Default::default() })?;
        let start = Instant::now();
        println!("{source:?} regions");
        for gamma in [0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            let r = bound.evaluate(gamma)?;
            println!(
                "  gamma {gamma:4.2}  SER <= {:.5e}  BER <= {:.5e}  (+/- {:.1e})",
                r.ser_ub, r.ber_ub, r.err_est
            );
        }
        println!("  {:.2?}", start.elapsed());
    }
    Ok(())
}
