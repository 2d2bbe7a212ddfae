//! Datasets, seeded simulation, sweeps and result export.

pub mod dataset;
pub mod experiment;
pub mod export;
pub mod sweep;

pub use dataset::{gen_dirichlet, gen_round_robin, load_csv_column, Dataset, DomainSpec, Provenance};
pub use experiment::{run_experiment, summarize, ExperimentConfig, ExperimentSummary, RunOutcome};
pub use export::{export, read_csv, write_csv, write_json, Format, CSV_HEADER};
pub use sweep::{
    analytic_asr, pareto_sweep, parse_grid, parse_int_grid, parse_protocols, DataSource, EmpiricalOptions,
    ParetoRow, Protocol, SweepOptions,
};
