//! Overlay data (GBL, NFM) and figure tables.

mod figure;
mod output;
mod table;

pub use figure::{
    emit_figure, Column, FigureId, FigureParams, FigureTable, DEFAULT_DELTA_XI_SET,
    DEFAULT_FIG1_GRID, DEFAULT_FIG1_N_BAR, DEFAULT_N_BAR_GRID, DEFAULT_PORT2_N_BAR,
    MAX_FIGURE_GRID, MAX_FIGURE_N_BAR,
};
pub use output::{figure_json, format_f64, read_figure_csv, write_figure_csv, write_figure_json};
pub use table::{gbl_adjust, load_experiment, ExperimentPoint, ExperimentTable, GBL_ADJUST};
