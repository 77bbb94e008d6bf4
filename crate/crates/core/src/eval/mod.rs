//! Protocols, metrics and experiment tooling over a sequence of domains.

pub mod config;
pub mod diagnostics;
pub mod grid;
pub mod metrics;
pub mod protocol;
pub mod report;
pub mod suite;
pub mod sweep;

pub use config::{read_order_file, AdapterKind, GridConfig, KernelKind, Mode, RunConfig};
pub use diagnostics::{domain_prototype_diagnostics, pearson, Diagnostics};
pub use grid::{grid_search, grid_search_on, standard_beta_grid, GridOutcome, GridPoint};
pub use metrics::{compute_metrics, DomainMetrics, MetricMatrix, Metrics};
pub use protocol::{run, run_mtil, run_xtail, Hyperparams, RunOutput};
pub use report::RunReport;
pub use suite::{write_synthetic, DomainData, DomainSuite};
pub use sweep::{sweep_ablation, SweepAxis, SweepRow};
