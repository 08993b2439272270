//! Configuration files and output tables.

mod config;
mod figures;
mod output;

pub use config::{
    Angle, DeviceSection, Method, OutputSection, RunConfigFile, RunPlan, SweepSection, DEFAULT_LATTICE, DEFAULT_SEED,
    DEFAULT_TRAJECTORIES,
};
pub use figures::{figure_rows, intensity_distribution, rotated_density, rotation_curve, DistParams, Figure, FigureRow};
pub use output::{
    evaluate, fmt_float, write_divergence_csv, write_figure_csv, write_report_json, write_results_csv,
    write_surface_csv, CellRecord, CellResult, Preamble, Report, TOOL, VERSION,
};
