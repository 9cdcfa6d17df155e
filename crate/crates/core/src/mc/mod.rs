//! Monte Carlo designs and the table harness.

mod dgp;
mod harness;

pub use dgp::{generate, generate_seeded, DgpSpec, Model, Simulated};
pub use harness::{
    run_cell, run_replication, run_table, table_spec, write_replications, write_rows, CellResult, McConfig,
    MetricRow, Replication, TableKind, TableSpec, FAILURE_FLAG,
};
