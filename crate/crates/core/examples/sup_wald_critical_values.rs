// Simulates the asymptotic sup-Wald critical-value table.
//
// `cargo run --release --example sup_wald_critical_values -- --full OUT.rs`
// reproduces the embedded table; without `--full` a small table is printed.

use glbreak::ls::critical_values::{simulate_table, CriticalValueConfig, LEVELS, TRIMMINGS};

fn run_example(config: CriticalValueConfig) -> glbreak::ls::critical_values::CriticalValueTable {
    let table = simulate_table(config);
    println!("paths={} grid={} seed={}", config.paths, config.grid, config.seed);
    for (q, block) in table.values.iter().enumerate() {
        for (e, row) in block.iter().enumerate() {
            let cells: Vec<String> = LEVELS
                .iter()
                .zip(row)
                .map(|(a, v)| format!("a={a}: {v:.3}"))
                .collect();
            println!("q={} eps={:.2}  {}", q + 1, TRIMMINGS[e], cells.join("  "));
        }
    }
    table
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.first().map(String::as_str) == Some("--full") {
        let table = run_example(CriticalValueConfig::default());
        if let Some(path) = args.get(1) {
            std::fs::write(path, table.to_rust_source()).expect("write table");
        }
    } else {
        run_example(CriticalValueConfig {
            paths: 2000,
            grid: 1000,
            max_q: 2,
            ..Default::default()
        });
    }
}
