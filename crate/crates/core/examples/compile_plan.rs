//! Compiles the cell-by-cell tables for a word code and reports their size.
//!
//! cargo run --release --example compile_plan -- 1,1,1,1 3 strong

use std::time::Instant;

use pcbounds::wordcode::PlanOptions;
use pcbounds::{Alphabet, BoundaryProfile, CodeKind, CompositionPlan};

fn main() -> pcbounds::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let profile: BoundaryProfile = args.first().map_or("1,1,1,1", String::as_str).parse()?;
    let m: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let code: CodeKind = args.get(2).map_or("weak", String::as_str).parse()?;

    let alphabet = Alphabet::enumerate(profile)?;
    let start = Instant::now();
    let plan = CompositionPlan::build(&alphabet, m, code, &PlanOptions { verbose: true, ..PlanOptions::default() })?;
    println!("{profile} M={m} {code}: {} letters, {} states, {:.2?}", alphabet.len(), plan.total_states(), start.elapsed());
    for s in 0..plan.steps() {
        println!("  after cell {s}: {} states", plan.state_count(s));
    }
    println!("checksum {}", plan.checksum_hex());

    let cells = vec![alphabet.max(); m * m];
    assert_eq!(plan.code_word(&cells)?, alphabet.max());
    Ok(())
}
