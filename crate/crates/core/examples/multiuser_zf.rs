//! Zero-forcing spatial precoding for several users over a random channel.
//!
//! `cargo run --release --example multiuser_zf`

use tizx::montecarlo::{run_mc, ChannelModel, McConfig};
use tizx::precoding::{zf_precoder, ChannelMatrix};
use tizx::signal_chain::SystemConfig;

fn main() -> tizx::Result<()> {
    let h = ChannelMatrix(nalgebra::DMatrix::from_fn(2, 4, |i, j| {
        tizx::precoding::C64::new(((i * 4 + j) as f64 * 0.7).cos(), ((i + 2 * j) as f64 * 0.3).sin())
    }));
    let zf = zf_precoder(&h)?;
    let eff = &h.0 * &zf.p_sp;
    println!("c_zf = {:.4}; H P_sp = c_zf I up to {:.1e}", zf.c_zf, (eff - nalgebra::DMatrix::identity(2, 2) * tizx::precoding::C64::new(zf.c_zf, 0.0)).camax());

    // ZF leaves c_zf I and the receivers scale by beta = c_zf, so every
    // channel sees the same per-user link; only the transmit energy differs.
    let single = run_mc(&McConfig::new(SystemConfig::new(1, 3), 2.0, 10_000, 7))?;
    println!("single user:   SER {:.4e} over {} symbols", single.ser, single.symbols);
    let sys = SystemConfig::new(1, 3).with_users(2, 4);
    for (name, channel) in [("fixed", ChannelModel::Fixed(h)), ("iid", ChannelModel::IidGaussian { seed: 11 })] {
        let cfg = McConfig::new(sys.clone(), 2.0, 5_000, 7).with_channel(channel);
        let r = run_mc(&cfg)?;
        println!("{name:5} channel: SER {:.4e} over {} symbols (both users)", r.ser, r.symbols);
    }
    Ok(())
}
