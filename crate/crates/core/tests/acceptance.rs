//! Runs every acceptance criterion and prints one PASS or FAIL line each.
//! Set `LINKGRAPH_ACCEPTANCE=fast` to skip the Monte Carlo suite.

use linkgraph::acceptance::{run, Level};

fn main() {
    let level = match std::env::var("LINKGRAPH_ACCEPTANCE").as_deref() {
        Ok("fast") => Level::Fast,
        _ => Level::Full,
    };
    let outcomes = run(level, |o| println!("{o}"));
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
