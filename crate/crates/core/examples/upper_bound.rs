//! Certifies p_c(3) < 0.958 from the candidate x = tau^n(0.9579).

use pcbounds::certify::{candidate_vector, certify_upper, BoundSide, Outcome, ProbabilityChoice, Setup, UpperConfig};
use pcbounds::wordcode::PlanOptions;
use pcbounds::{BoundaryProfile, CodeKind};

fn main() -> pcbounds::Result<()> {
    let prepared = Setup::new(3, BoundaryProfile::uniform(1)?, CodeKind::Strong).prepare(None, &PlanOptions::default())?;
    let p = ProbabilityChoice::parse("0.958", BoundSide::Upper)?;
    let q = ProbabilityChoice::parse("0.9579", BoundSide::Upper)?;
    let (x, source) = candidate_vector(&prepared, &q, &UpperConfig::default())?;
    println!("x = tau^{}({}), x_max = {:.6}", source.iterations, q.decimal, x.max_mass());

    match certify_upper(&prepared, &p, &x, Some(&source))? {
        Outcome::Certified(cert) => {
            let u = cert.upper.as_ref().unwrap();
            println!("{}: coupling with {} pairs", cert.statement(), u.witness.len());
        }
        Outcome::Refused(r) => println!("refused: {}", r.reason),
    }
    Ok(())
}
