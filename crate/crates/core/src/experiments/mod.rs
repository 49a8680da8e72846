//! Noise generators, metrics, synthetic data and a seeded runner for
//! tabular denoising experiments.

pub mod benchmark;
pub mod clusters;
pub mod metrics;
pub mod noise;
pub mod runner;
pub mod spec;

pub use benchmark::{ccp_vs_pg_benchmark, ccp_vs_pg_benchmark_with, prior_instance, BenchmarkConfig, BenchmarkReport};
pub use clusters::{generate_clusters, make_cluster_data, ClusterData, ClusterParams};
pub use metrics::{median, pearson_correlation, relative_error};
pub use noise::{add_noise, NoiseKind, NoiseSpec};
pub use runner::{run_experiment, select_columns, ExperimentOutput, ExperimentTable, RunOptions, TableRow, TraceTable};
pub use spec::{Aggregate, ExperimentSpec, MethodCall, Metric};
