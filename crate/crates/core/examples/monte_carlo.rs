//! Simulated crossing and two-sides probabilities, and how realizations
//! relate to their weak and strong classes.

use pcbounds::mc::{check_properties, estimate, simulate_trial, Estimate, Statistic};
use pcbounds::wordcode::PlanOptions;
use pcbounds::{Alphabet, BoundaryProfile, CodeKind, CompositionPlan};

fn main() -> pcbounds::Result<()> {
    println!("{}", Estimate::CSV_HEADER);
    for p in [0.6, 0.8, 0.9] {
        for stat in [Statistic::Pi, Statistic::Theta] {
            println!("{}", estimate(2, p, 4, 20_000, stat, 1)?.csv_row());
        }
    }

    let alphabet = Alphabet::enumerate(BoundaryProfile::uniform(1)?)?;
    let weak = CompositionPlan::build(&alphabet, 3, CodeKind::Weak, &PlanOptions::default())?;
    let strong = CompositionPlan::build(&alphabet, 3, CodeKind::Strong, &PlanOptions::default())?;
    let trials = 5000;
    let (mut strong_max, mut crossing, mut weak_pi) = (0, 0, 0);
    for t in 0..trials {
        let r = simulate_trial(3, 0.85, 3, 2, t)?;
        let c = check_properties(&r, &alphabet, &weak, &strong)?;
        assert!(c.weak_holds && c.strong_holds && c.sandwich_holds());
        strong_max += usize::from(c.strong_is_max);
        crossing += usize::from(c.percolates);
        weak_pi += usize::from(c.weak_two_sides);
    }
    println!("M=3 p=0.85 n=3: strong max {strong_max} <= crossing {crossing} <= weak two-sides {weak_pi} of {trials}");

    let r = simulate_trial(2, 0.85, 3, 42, 0)?;
    print!("{}", r.to_pbm());
    Ok(())
}
