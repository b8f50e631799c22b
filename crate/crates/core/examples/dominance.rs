//! Stochastic dominance on the 14-letter poset, with an explicit coupling.

use num_rational::BigRational;
use pcbounds::certify::{dominates, dominates_by_upsets};
use pcbounds::{Alphabet, BoundaryProfile};

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn main() -> pcbounds::Result<()> {
    let a = Alphabet::enumerate(BoundaryProfile::uniform(1)?)?;
    let n = a.len();
    let mut lower = vec![frac(0, 1); n];
    lower[a.min() as usize] = frac(1, 2);
    lower[1] = frac(1, 2);
    let mut upper = vec![frac(0, 1); n];
    upper[a.max() as usize] = frac(1, 3);
    upper[1] = frac(2, 3);

    match dominates(&a, &upper, &lower)? {
        Some(w) => {
            println!("upper dominates lower; coupling:");
            for (x, y, g) in &w.pairs {
                println!("  {} -> {}  {}", a.letter(*y), a.letter(*x), g);
            }
        }
        None => println!("no dominance"),
    }
    println!("reverse: {}", dominates_by_upsets(&a, &lower, &upper)?);
    Ok(())
}
