//! Work-rate fitting and full-system runtime projection.

mod fit;
mod formulas;
mod workload;

pub use fit::{
    fit_points, fit_work_rate, read_samples, write_samples, WorkRateModel, WorkRateSample,
};
pub use formulas::{
    project_bfs, project_pr, sweep, write_projection_csv, BfsBracket, Projection, ProjectionRow,
    SweepOptions, SystemParams,
};
pub use workload::{
    characterize_workload, measure_workload, MeasureOptions, WorkloadAt, WorkloadCharacterization,
    WorkloadMeasurement,
};
