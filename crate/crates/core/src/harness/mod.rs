//! Configuration, the per-block pipeline, parallel sweeps and CSV output.

pub mod experiment;
pub mod output;
pub mod pipeline;
pub mod sweep;

pub use experiment::{load_config, ExperimentKind, ExperimentSpec, PrecoderChoice, RunConfig};
pub use output::{emit_results, write_results, Index, Metric, ResultRow, CSV_HEADER};
pub use pipeline::{run_coherence_block, BlockOutcome, Csi, DropState, PrecoderOutcome, Solved};
pub use sweep::{aqnm_check, run_experiment, sweep, AqnmCheck, GridPoint, RunOptions};
