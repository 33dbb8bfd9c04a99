//! Declarative Monte-Carlo experiments: spec files, execution, result files
//! and comparisons.

mod compare;
mod output;
mod results;
mod run;
mod spec;

pub use compare::{compare, CompareRow, CompareTable, COMPARE_HEADER};
pub use output::{read_result, sidecar_json, sidecar_path, write_result, GIT_DESCRIBE, VERSION};
pub use results::{ExperimentResult, Outcome, ResultRow, TrialLabel, CSV_HEADER};
pub use run::{run, sweep};
pub use spec::{
    AlgorithmId, AlgorithmSpec, ExperimentSpec, OutputFormat, OutputSpec, StructureSpec, SweepPoint, SweepSpec,
    SweepVariable, SystemSpec,
};
