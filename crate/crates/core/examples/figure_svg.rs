//! Bound curve and simulated points written as CSV and SVG.
//!
//! `cargo run --release --example figure_svg -- out_dir`

use std::path::PathBuf;

use tizx::cli::{plot_svg, CsvMeta, CsvTable, PlotAxes, SweepSeries, BOUND_HEADER, MC_HEADER};
use tizx::montecarlo::{run_sweep, McConfig};
use tizx::ser_bound::{BoundSettings, SerBound};
use tizx::signal_chain::{SignalOperators, SystemConfig};

fn main() -> tizx::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let sys = SystemConfig::new(1, 3);
    let bound = SerBound::new(3, &SignalOperators::build(&sys)?, BoundSettings::default())?;
    let gammas: Vec<f64> = (1..=30).map(|k| 0.1 * k as f64).collect();
    let curve = bound.sweep(&gammas)?;
    let sim = run_sweep(&McConfig::new(sys, 0.5, 10_000, 7), &[0.5, 1.0, 1.5, 2.0, 2.5])?;

    let mut t = CsvTable::new(&BOUND_HEADER).with_meta(CsvMeta::new(Some(bound.settings().seed), "example"));
    for r in &curve {
        t.push(vec![r.gamma, r.ser_ub, r.ber_ub, r.err_est])?;
    }
    t.write(dir.join("bound.csv"))?;
    let mut m = CsvTable::new(&MC_HEADER).with_meta(CsvMeta::new(Some(7), "example"));
    for r in &sim {
        m.push(vec![r.gamma, r.ser, r.ber, r.symbols as f64, r.ci95_ser])?;
    }
    m.write(dir.join("mc.csv"))?;

    let series = [
        SweepSeries::line("bound", curve.iter().map(|r| (r.gamma, r.ser_ub)).collect()),
        SweepSeries::markers("simulation", sim.iter().map(|r| (r.gamma, r.ser)).collect()),
    ];
    let axes = PlotAxes {
        title: "m_rx = 3".into(),
        ..PlotAxes::default()
    };
    plot_svg(&series, &axes, dir.join("ser.svg"))?;
    println!("wrote bound.csv, mc.csv and ser.svg to {}", dir.display());
    Ok(())
}
