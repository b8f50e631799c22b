//! Over-estimates of the two-sides mass along the recursion for several p.
//! Below the threshold the curves fall under 0.556.

use pcbounds::iterate::{iterate_tau, IterationConfig, TauMap};
use pcbounds::wordcode::PlanOptions;
use pcbounds::{Alphabet, BoundaryProfile, CodeKind, CompositionPlan, Direction, Sink};

fn main() -> pcbounds::Result<()> {
    let alphabet = Alphabet::enumerate(BoundaryProfile::uniform(1)?)?;
    let plan = CompositionPlan::build(&alphabet, 2, CodeKind::Weak, &PlanOptions::default())?;
    let pi = alphabet.pi_set();
    let ps: Vec<f64> = (0..10).map(|k| 0.70 + 0.01 * k as f64).collect();
    let checkpoints = [1, 10, 50, 100, 250, 500, 1000];

    print!("{:>5}", "n");
    for p in &ps {
        print!("  {p:>6.2}");
    }
    println!();
    let mut columns = Vec::new();
    for &p in &ps {
        let mut col = Vec::new();
        iterate_tau(TauMap::new(&alphabet, &plan)?, &IterationConfig::new(p, 1000, Sink::Max), |n, x| {
            if checkpoints.contains(&n) {
                col.push(x.upset_mass(&alphabet, &pi, Direction::Upper).unwrap());
            }
        })?;
        columns.push(col);
    }
    for (row, n) in checkpoints.iter().enumerate() {
        print!("{n:>5}");
        for col in &columns {
            print!("  {:>6.4}", col[row]);
        }
        println!();
    }
    Ok(())
}
