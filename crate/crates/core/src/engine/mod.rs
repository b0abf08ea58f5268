//! Configuration, execution of command streams, and run comparison.

pub mod compare;
pub mod config;
pub mod run;
pub mod snapshot;

pub use compare::{compare_runs, Comparison, Difference};
pub use config::{
    random_layout, resolve_threads, Layer, MediumConfig, RandomSources, RunConfig, ScheduleConfig, ScheduleKind,
    SourceConfig, SourceLayout, THREADS_ENV,
};
pub use run::{run, run_with_plan, validate_config, FieldData, RunOutput, RunReport, SparseSetup, NAN_CHECK_INTERVAL};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_HEADER_LEN, SNAPSHOT_MAGIC};
