//! Dense operators of the oversampled chain and a few of their properties.
//!
//! `cargo run --example signal_operators`

use tizx::signal_chain::{rc_pulse, SignalOperators, SystemConfig};

fn main() -> tizx::Result<()> {
    for beta in [0.0, 0.22, 0.5] {
        let taps: Vec<String> = (0..4).map(|k| format!("{:+.4}", rc_pulse(0.5 * k as f64, beta, 1.0))).collect();
        println!("unit-energy rc({beta}) at t = 0, T/2, T, 3T/2: {}", taps.join(" "));
    }

    let cfg = SystemConfig::new(1, 3);
    let ops = SignalOperators::build(&cfg)?;
    let shape = |m: &nalgebra::DMatrix<f64>| format!("{}x{}", m.nrows(), m.ncols());
    println!("\nN = 1, m_rx = 3: n_tot = {}, n_q = {}", ops.n_tot(), ops.n_q());
    println!("  G_tx {}  G_rx {}  V {}  U {}  W {}", shape(&ops.g_tx), shape(&ops.g_rx), shape(&ops.v), shape(&ops.u), shape(&ops.w));

    let sym = (&ops.noise_cov - ops.noise_cov.transpose()).amax();
    let min_eig = ops.noise_cov.clone().symmetric_eigenvalues().min();
    println!("  noise covariance: diag {:.4}, asymmetry {sym:.1e}, min eigenvalue {min_eig:.3e}", ops.noise_cov[(0, 0)]);
    let row: Vec<String> = ops.vu.row(0).iter().map(|v| format!("{v:+.3}")).collect();
    println!("  first row of V U: {}", row.join(" "));
    Ok(())
}
