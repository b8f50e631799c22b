//! Certifies p < p_c(2) for p = 0.785 and writes the certificate.

use pcbounds::certify::{certify_lower, BoundSide, LowerConfig, Outcome, ProbabilityChoice, Setup};
use pcbounds::wordcode::PlanOptions;
use pcbounds::{BoundaryProfile, CodeKind};

fn main() -> pcbounds::Result<()> {
    let prepared = Setup::new(2, BoundaryProfile::uniform(1)?, CodeKind::Weak).prepare(None, &PlanOptions::default())?;
    for decimal in ["0.785", "0.80"] {
        let p = ProbabilityChoice::parse(decimal, BoundSide::Lower)?;
        match certify_lower(&prepared, &p, &LowerConfig::default())? {
            Outcome::Certified(cert) => {
                let l = cert.lower.as_ref().unwrap();
                println!("{} after {} steps, two-sides mass <= {}", cert.statement(), cert.iterations, l.tau_pi_float);
                let path = std::env::temp_dir().join("lower_m2.json");
                cert.write(&path)?;
                println!("  written to {}", path.display());
            }
            Outcome::Refused(r) => println!("p = {decimal}: refused ({}, last {:.4})", r.reason, r.last_value),
        }
    }
    Ok(())
}
