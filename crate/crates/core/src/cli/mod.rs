//! Building blocks of the `zx` command-line tool: run configuration, grid
//! parsing, CSV files and SVG plots.

pub mod config;
pub mod csv;
pub mod plot;
pub mod range;

pub use config::RunConfig;
pub use csv::{CsvMeta, CsvTable, BOUND_HEADER, GAMMA_TABLE_HEADER, MC_HEADER};
pub use plot::{plot_svg, render_svg, PlotAxes, SweepSeries};
pub use range::{parse_grid, parse_list, parse_range};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;
