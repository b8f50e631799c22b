//! Bisection for the best lower and upper bounds at two decimal places.

use pcbounds::certify::{search_lower, search_upper, LowerConfig, Setup, UpperSearchConfig};
use pcbounds::wordcode::PlanOptions;
use pcbounds::{BoundaryProfile, CodeKind};

fn main() -> pcbounds::Result<()> {
    let square = BoundaryProfile::uniform(1)?;
    let opts = PlanOptions::default();
    let weak = Setup::new(2, square, CodeKind::Weak).prepare(None, &opts)?;
    let lower = search_lower(&weak, 0.01, &LowerConfig::default())?;
    if let Some((p, _)) = &lower.best {
        println!("p_c(2) > {p} ({} probes)", lower.probes);
    }
    let strong = Setup::new(3, square, CodeKind::Strong).prepare(None, &opts)?;
    let upper = search_upper(&strong, 0.01, &UpperSearchConfig::default())?;
    if let Some((p, _)) = &upper.best {
        println!("p_c(3) < {p} ({} probes)", upper.probes);
    }
    Ok(())
}
