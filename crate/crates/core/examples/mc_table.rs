// Monte Carlo cells of the accuracy and coverage tables.
//
// `cargo run --release --example mc_table -- TABLE REPS` runs a whole table
// and prints CSV; the default runs one cell of table 4 with 100 replications.

use glbreak::mc::{run_cell, run_table, table_spec, write_rows, CellResult, McConfig, Model, TableKind};

fn run_example(table: Option<u8>, n_reps: usize) -> Vec<CellResult> {
    let config = McConfig {
        n_reps,
        ..Default::default()
    };
    let cells = match table {
        Some(n) => run_table(&table_spec(n).expect("table number"), &config).expect("table"),
        None => {
            let bank = config.bank().expect("bank");
            vec![run_cell(Model::M1, 0.5, 0.8, TableKind::Coverage, &config, &bank).expect("cell")]
        }
    };
    let mut csv = Vec::new();
    write_rows(&mut csv, &cells).expect("csv");
    print!("{}", String::from_utf8(csv).expect("utf-8"));
    cells
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let table = args.first().map(|s| s.parse().expect("table number"));
    let reps = args.get(1).map_or(100, |s| s.parse().expect("replications"));
    run_example(table, reps);
}
