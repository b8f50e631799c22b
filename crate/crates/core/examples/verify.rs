//! Checks a certificate file, optionally replaying it on compiled tables.
//!
//! cargo run --example verify -- /tmp/lower_m2.json --recompute

use pcbounds::certify::{recompute_certificate, verify_certificate, Certificate, Setup};
use pcbounds::wordcode::PlanOptions;

fn main() -> pcbounds::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| std::env::temp_dir().join("lower_m2.json").display().to_string());
    let cert = Certificate::read(path.as_ref())?;
    let report = if args.iter().any(|a| a == "--recompute") {
        let setup = Setup::new(cert.m, cert.profile.parse()?, cert.code);
        recompute_certificate(&cert, &setup.prepare(None, &PlanOptions::default())?)?
    } else {
        verify_certificate(&cert)?
    };
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{}", if report.passed() { format!("valid: {}", cert.statement()) } else { "invalid".into() });
    Ok(())
}
