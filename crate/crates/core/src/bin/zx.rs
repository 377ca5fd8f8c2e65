//! `zx`: command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tizx::cli::{
    csv::{BOUND_HEADER, GAMMA_TABLE_HEADER, MC_HEADER},
    parse_grid, parse_list, plot_svg, CsvMeta, CsvTable, PlotAxes, RunConfig, SweepSeries,
};
use tizx::error::{Error, Result};
use tizx::montecarlo::{run_sweep_with, McConfig, RNG_NAME};
use tizx::precoding::{solve_qos, user_energy, C64};
use tizx::qp::QpSettings;
use tizx::ser_bound::{BoundSettings, SerBound, GAMMA_GRID_STEP};
use tizx::signal_chain::SignalOperators;
use tizx::zx_modem::{forward_map, gray_encode, Level, Symbol, ZxAlphabet, ZxCodebook};

#[derive(Parser)]
#[command(name = "zx", version, about = "TI ZX modulation with 1-bit oversampled receivers")]
struct Cli {
    /// Flat TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "ZX_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct SystemArgs {
    /// Receive oversampling factor.
    #[arg(long)]
    mrx: Option<usize>,
    /// Symbols per frame.
    #[arg(long)]
    n: Option<usize>,
    /// Transmit signaling-rate factor.
    #[arg(long)]
    mtx: Option<usize>,
    /// Noise variance.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Roll-off of both filters.
    #[arg(long)]
    rolloff: Option<f64>,
    /// `full` or `half` noise variance per real dimension.
    #[arg(long)]
    noise_split: Option<String>,
}

impl SystemArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            m_rx: self.mrx,
            n_symbols: self.n,
            m_tx: self.mtx,
            noise_variance: self.sigma2,
            rolloff_tx: self.rolloff,
            rolloff_rx: self.rolloff,
            noise_split: self.noise_split.clone(),
            ..RunConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Map symbols or bits onto a pilot-led sample frame.
    Map {
        #[command(flatten)]
        sys: SystemArgs,
        /// Comma-separated symbols, e.g. `b1,b4,b2`.
        #[arg(long, conflicts_with = "bits")]
        symbols: Option<String>,
        /// Bit string, Gray mapped onto codebook words.
        #[arg(long)]
        bits: Option<String>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        pilot: i8,
        /// Print pilot, symbols and samples as JSON instead of the bare frame.
        #[arg(long)]
        json: bool,
    },
    /// Solve the QOS precoding problem for one user and print JSON.
    Precode {
        #[command(flatten)]
        sys: SystemArgs,
        /// In-phase symbols, comma separated.
        #[arg(long)]
        symbols_i: String,
        /// Quadrature symbols (default: same as in-phase).
        #[arg(long)]
        symbols_q: Option<String>,
        #[arg(long)]
        gamma: f64,
        /// Beamforming gain in the constraints (default from config, 1).
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        pilot: i8,
    },
    /// Worst-case SER/BER bound over a gamma grid.
    Bound {
        #[command(flatten)]
        sys: SystemArgs,
        /// Grid `start:step:stop` or a list `a,b,c`.
        #[arg(long, default_value = "0.1:0.05:6")]
        gamma: String,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// `published` or `derived` integration regions.
        #[arg(long)]
        regions: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gamma for each SER target: the last grid point whose bound still
    /// exceeds the target.
    GammaTable {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6")]
        targets: String,
        #[arg(long, default_value_t = GAMMA_GRID_STEP)]
        step: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        regions: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo SER/BER over a gamma grid.
    Mc {
        #[command(flatten)]
        sys: SystemArgs,
        /// Grid `start:step:stop` or a list `a,b,c`.
        #[arg(long, default_value = "0.1:0.5:3.6")]
        gamma: String,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// `received` or `known`.
        #[arg(long)]
        pilot_mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot CSV columns against their first column as SVG.
    Plot {
        /// `FILE:COLUMN[:LABEL]`, drawn as a line.
        #[arg(long)]
        line: Vec<String>,
        /// `FILE:COLUMN[:LABEL]`, drawn as markers.
        #[arg(long)]
        points: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        title: Option<String>,
        #[arg(long, default_value = "gamma")]
        xlabel: String,
        #[arg(long, default_value = "SER")]
        ylabel: String,
        #[arg(long)]
        xmin: Option<f64>,
        #[arg(long)]
        xmax: Option<f64>,
        #[arg(long)]
        ymin: Option<f64>,
        #[arg(long)]
        ymax: Option<f64>,
        /// Linear instead of logarithmic y axis.
        #[arg(long)]
        linear: bool,
    },
}

fn parse_symbols(list: &str) -> Result<Vec<Symbol>> {
    list.split(',')
        .map(|s| s.trim().parse::<Symbol>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::config(format!("malformed symbol list {list:?}")))
}

fn parse_pilot(p: i8) -> Result<Level> {
    match p {
        1 | -1 => Ok(p),
        _ => Err(Error::config("pilot must be 1 or -1")),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            }),
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::config(e.to_string()))
}

fn resolve(file: &RunConfig, flags: RunConfig) -> Result<RunConfig> {
    let cfg = file.overlay(&flags);
    cfg.validate()?;
    Ok(cfg)
}

fn bound_for(cfg: &RunConfig) -> Result<SerBound> {
    let sys = cfg.system()?;
    let ops = SignalOperators::build(&sys)?;
    let settings = BoundSettings {
        eps: cfg.eps()?,
        seed: cfg.seed(),
        source: cfg.regions()?,
        ..BoundSettings::default()
    };
    SerBound::new(sys.m_rx, &ops, settings)
}

fn parse_series_spec(spec: &str, markers: bool) -> Result<SweepSeries> {
    let mut parts = spec.splitn(3, ':');
    let (file, column) = match (parts.next(), parts.next()) {
        (Some(f), Some(c)) if !f.is_empty() && !c.is_empty() => (f, c),
        _ => return Err(Error::config(format!("series {spec:?}: expected FILE:COLUMN[:LABEL]"))),
    };
    let label = parts.next().unwrap_or(column);
    let table = CsvTable::read(file)?;
    let ys = table
        .column(column)
        .ok_or_else(|| Error::config(format!("{file}: no column {column:?}")))?;
    let xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let points = xs.into_iter().zip(ys).collect();
    Ok(if markers {
        SweepSeries::markers(label, points)
    } else {
        SweepSeries::line(label, points)
    })
}

#[derive(Serialize)]
struct MapOutput {
    pilot: Level,
    symbols: Vec<String>,
    samples: Vec<Level>,
}

#[derive(Serialize)]
struct PrecodeOutput {
    gamma: f64,
    beta: f64,
    frame_i: Vec<Level>,
    frame_q: Vec<Level>,
    p_x_i: Vec<f64>,
    p_x_q: Vec<f64>,
    objective: f64,
    energy: f64,
    min_margin: f64,
    kkt_primal: f64,
    kkt_dual: f64,
    kkt_gap: f64,
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.threads.or(file.threads) {
        if t == 0 {
            return Err(Error::config("threads must be at least 1"));
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }

    match cli.command {
        Command::Map { sys, symbols, bits, pilot, json: as_json } => {
            let cfg = resolve(&file, sys.to_config())?;
            let codebook = ZxCodebook::for_m_rx(cfg.m_rx())?;
            let syms = match (symbols, bits) {
                (Some(s), _) => parse_symbols(&s)?,
                (None, Some(b)) => {
                    let bits: Vec<u8> = b
                        .trim()
                        .bytes()
                        .map(|c| match c {
                            b'0' => Ok(0),
                            b'1' => Ok(1),
                            _ => Err(Error::BitLength(format!("{b:?} is not a bit string"))),
                        })
                        .collect::<Result<_>>()?;
                    gray_encode(&bits, &codebook)?
                }
                (None, None) => return Err(Error::config("give --symbols or --bits")),
            };
            let frame = forward_map(&syms, parse_pilot(pilot)?, codebook.alphabet())?;
            if !as_json {
                let line: Vec<String> = frame.samples.iter().map(|l| l.to_string()).collect();
                return emit(&format!("{}\n", line.join(",")), None);
            }
            emit(
                &json(&MapOutput {
                    pilot: frame.pilot,
                    symbols: frame.symbols.iter().map(|s| s.to_string()).collect(),
                    samples: frame.with_pilot(),
                })?,
                None,
            )
        }
        Command::Precode {
            sys,
            symbols_i,
            symbols_q,
            gamma,
            beta,
            pilot,
        } => {
            let flags = RunConfig {
                beamforming_gain: beta,
                ..sys.to_config()
            };
            let si = parse_symbols(&symbols_i)?;
            let sq = match &symbols_q {
                Some(s) => parse_symbols(s)?,
                None => si.clone(),
            };
            let mut cfg = flags.clone();
            if cfg.n_symbols.is_none() && file.n_symbols.is_none() {
                cfg.n_symbols = Some(si.len());
            }
            let cfg = resolve(&file, cfg)?;
            let system = cfg.system()?;
            let ops = SignalOperators::build(&system)?;
            let alphabet = ZxAlphabet::new(system.m_rx)?;
            let pilot = parse_pilot(pilot)?;
            let fi = forward_map(&si, pilot, &alphabet)?.with_pilot();
            let fq = forward_map(&sq, pilot, &alphabet)?.with_pilot();
            let beta = system.beamforming_gain;
            let a = solve_qos(&fi, &ops, gamma, beta, QpSettings::default())?;
            let b = solve_qos(&fq, &ops, gamma, beta, QpSettings::default())?;
            let one = nalgebra::DVector::from_element(1, C64::new(1.0, 0.0));
            let out = PrecodeOutput {
                gamma,
                beta,
                energy: user_energy(&one, &a.p, &b.p, &ops),
                frame_i: fi,
                frame_q: fq,
                p_x_i: a.p.iter().copied().collect(),
                p_x_q: b.p.iter().copied().collect(),
                objective: a.objective + b.objective,
                min_margin: a.min_margin.min(b.min_margin),
                kkt_primal: a.kkt.primal.max(b.kkt.primal),
                kkt_dual: a.kkt.dual.max(b.kkt.dual),
                kkt_gap: a.kkt.gap.max(b.kkt.gap),
            };
            emit(&json(&out)?, None)
        }
        Command::Bound {
            sys,
            gamma,
            eps,
            seed,
            regions,
            out,
        } => {
            let cfg = resolve(
                &file,
                RunConfig {
                    eps,
                    seed,
                    regions,
                    ..sys.to_config()
                },
            )?;
            let grid = parse_grid(&gamma)?;
            let bound = bound_for(&cfg)?;
            let results = bound.sweep(&grid)?;
            let mut table =
                CsvTable::new(&BOUND_HEADER).with_meta(CsvMeta::new(Some(cfg.seed()), cfg.hash()?));
            for r in results {
                table.push(vec![r.gamma, r.ser_ub, r.ber_ub, r.err_est])?;
            }
            emit(&table.render(), out.as_ref())
        }
        Command::GammaTable {
            sys,
            targets,
            step,
            eps,
            seed,
            regions,
            out,
        } => {
            let cfg = resolve(
                &file,
                RunConfig {
                    eps,
                    seed,
                    regions,
                    ..sys.to_config()
                },
            )?;
            let targets = parse_list(&targets)?;
            let bound = bound_for(&cfg)?;
            let mut table = CsvTable::new(&GAMMA_TABLE_HEADER)
                .with_meta(CsvMeta::new(Some(cfg.seed()), cfg.hash()?));
            for t in targets {
                let g = bound.gamma_for_target(t, step)?;
                table.push(vec![t, g])?;
            }
            emit(&table.render(), out.as_ref())
        }
        Command::Mc {
            sys,
            gamma,
            blocks,
            seed,
            pilot_mode,
            out,
        } => {
            let cfg = resolve(
                &file,
                RunConfig {
                    blocks,
                    seed,
                    pilot_mode,
                    ..sys.to_config()
                },
            )?;
            let grid = parse_grid(&gamma)?;
            let template = McConfig::new(cfg.system()?, grid[0], cfg.blocks()?, cfg.seed())
                .with_pilot_mode(cfg.pilot_mode()?);
            eprintln!("rng: {RNG_NAME}");
            let n = grid.len();
            let results = run_sweep_with(&template, &grid, |i, r| {
                eprintln!(
                    "[{}/{n}] gamma={} ser={:.4e} ({} symbols)",
                    i + 1,
                    r.gamma,
                    r.ser,
                    r.symbols
                );
            })?;
            let mut table =
                CsvTable::new(&MC_HEADER).with_meta(CsvMeta::new(Some(cfg.seed()), cfg.hash()?));
            for r in results {
                table.push(vec![r.gamma, r.ser, r.ber, r.symbols as f64, r.ci95_ser])?;
            }
            emit(&table.render(), out.as_ref())
        }
        Command::Plot {
            line,
            points,
            out,
            title,
            xlabel,
            ylabel,
            xmin,
            xmax,
            ymin,
            ymax,
            linear,
        } => {
            let mut series = Vec::new();
            for spec in &line {
                series.push(parse_series_spec(spec, false)?);
            }
            for spec in &points {
                series.push(parse_series_spec(spec, true)?);
            }
            let pair = |a: Option<f64>, b: Option<f64>| -> Result<Option<(f64, f64)>> {
                match (a, b) {
                    (Some(a), Some(b)) => Ok(Some((a, b))),
                    (None, None) => Ok(None),
                    _ => Err(Error::config("give both ends of an axis range")),
                }
            };
            let axes = PlotAxes {
                log_y: !linear,
                title: title.unwrap_or_default(),
                x_label: xlabel,
                y_label: ylabel,
                x_range: pair(xmin, xmax)?,
                y_range: pair(ymin, ymax)?,
            };
            plot_svg(&series, &axes, &out)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("zx: {e}");
        std::process::exit(e.exit_code());
    }
}
