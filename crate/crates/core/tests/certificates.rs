mod common;

use common::square;
use pcbounds::certify::{
    candidate_vector, certify_lower, certify_upper, dominates, dominates_by_upsets, recompute_certificate,
    verify_certificate, BoundSide, Certificate, LowerConfig, Outcome, Prepared, ProbabilityChoice, Setup,
    SiteConstant, UpperConfig,
};
use pcbounds::exact::{parse_fraction_string, to_fraction_string};
use pcbounds::wordcode::PlanOptions;
use pcbounds::CodeKind;
use num_rational::BigRational;
use proptest::prelude::*;

fn prepared(m: usize, code: CodeKind) -> Prepared {
    Setup::new(m, square(), code).prepare(None, &PlanOptions::default()).unwrap()
}

fn lower_certificate() -> Certificate {
    let p = ProbabilityChoice::parse("0.785", BoundSide::Lower).unwrap();
    match certify_lower(&prepared(2, CodeKind::Weak), &p, &LowerConfig::default()).unwrap() {
        Outcome::Certified(c) => *c,
        Outcome::Refused(r) => panic!("refused: {r:?}"),
    }
}

fn upper_certificate() -> (Certificate, Prepared) {
    let prep = prepared(3, CodeKind::Strong);
    let p = ProbabilityChoice::parse("0.958", BoundSide::Upper).unwrap();
    let q = ProbabilityChoice::parse("0.9579", BoundSide::Upper).unwrap();
    let (x, source) = candidate_vector(&prep, &q, &UpperConfig::default()).unwrap();
    match certify_upper(&prep, &p, &x, Some(&source)).unwrap() {
        Outcome::Certified(c) => (*c, prep),
        Outcome::Refused(r) => panic!("refused: {r:?}"),
    }
}

fn failed(cert: &Certificate) -> Vec<&'static str> {
    verify_certificate(cert).unwrap().failures().map(|c| c.name).collect()
}

#[test]
fn lower_certificate_round_trips_and_verifies() {
    let cert = lower_certificate();
    let json = cert.to_json().unwrap();
    let back = Certificate::from_json(&json).unwrap();
    assert_eq!(back.to_json().unwrap(), json);
    assert!(verify_certificate(&back).unwrap().passed());
    let l = back.lower.as_ref().unwrap();
    assert!(l.tau_pi_float < 0.556);
    assert!(back.iterations <= 1000);
    assert!(recompute_certificate(&back, &prepared(2, CodeKind::Weak)).unwrap().passed());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lower.json");
    cert.write(&path).unwrap();
    assert_eq!(Certificate::read(&path).unwrap().to_json().unwrap(), json);
}

#[test]
fn upper_certificate_round_trips_and_verifies() {
    let (cert, prep) = upper_certificate();
    let back = Certificate::from_json(&cert.to_json().unwrap()).unwrap();
    assert!(verify_certificate(&back).unwrap().passed());
    assert!(recompute_certificate(&back, &prep).unwrap().passed());
    let u = back.upper.as_ref().unwrap();
    assert!(parse_fraction_string(&u.x_max).unwrap() > BigRational::from_integer(0.into()));
}

#[test]
fn tampered_lower_certificates_are_rejected() {
    let cert = lower_certificate();

    let mut c = cert.clone();
    c.lower.as_mut().unwrap().distribution[0] = "1/3".into();
    assert!(failed(&c).contains(&"mass_digest"));

    let mut c = cert.clone();
    {
        let l = c.lower.as_mut().unwrap();
        l.tau_pi_upper = "1/2".into();
        l.tau_pi_float = 0.5;
    }
    c.mass_digest = c.compute_digest();
    // a smaller claim than the recomputed mass
    assert_eq!(failed(&c), vec!["tau_pi"]);

    let mut c = cert.clone();
    c.lower.as_mut().unwrap().site_constant = 0.6;
    assert!(failed(&c).contains(&"threshold"));

    let mut c = cert.clone();
    c.p.decimal = "0.786".into();
    assert!(failed(&c).contains(&"p_side"));

    let mut c = cert.clone();
    c.code = CodeKind::Strong;
    assert!(failed(&c).contains(&"code"));

    let mut c = cert.clone();
    c.lower.as_mut().unwrap().distribution[3] = "1/7".into();
    c.mass_digest = c.compute_digest();
    let prep = prepared(2, CodeKind::Weak);
    let report = recompute_certificate(&c, &prep).unwrap();
    assert!(report.failures().any(|f| f.name == "replay"));

    let mut c = cert;
    c.alphabet_size = 15;
    assert!(failed(&c).contains(&"alphabet"));
}

#[test]
fn tampered_upper_certificates_are_rejected() {
    let (cert, prep) = upper_certificate();

    let mut c = cert.clone();
    c.upper.as_mut().unwrap().witness.pop();
    c.mass_digest = c.compute_digest();
    assert!(failed(&c).contains(&"witness_marginals"));

    let mut c = cert.clone();
    {
        let u = c.upper.as_mut().unwrap();
        // swap one coupling pair so that it points downwards
        let (a, b, w) = u.witness.iter().find(|(a, b, _)| a != b).cloned().unwrap();
        let i = u.witness.iter().position(|t| *t == (a, b, w.clone())).unwrap();
        u.witness[i] = (b, a, w);
    }
    c.mass_digest = c.compute_digest();
    assert!(failed(&c).contains(&"witness_support"));

    let mut c = cert.clone();
    c.p.decimal = "0.9579".into();
    assert!(failed(&c).contains(&"p_side"));

    // a claimed image that is not what the tables produce
    let mut c = cert.clone();
    {
        let u = c.upper.as_mut().unwrap();
        u.image = u.x.clone();
        u.witness = (0..u.x.len() as u32)
            .filter(|&a| u.x[a as usize] != "0/1")
            .map(|a| (a, a, u.x[a as usize].clone()))
            .collect();
    }
    c.mass_digest = c.compute_digest();
    assert!(verify_certificate(&c).unwrap().passed());
    let mut lowered = c.clone();
    lowered.p.used_float = 0.95;
    lowered.p.used = to_fraction_string(&pcbounds::exact::rational(0.95));
    lowered.p.decimal = "0.95".into();
    assert!(recompute_certificate(&lowered, &prep).unwrap().failures().any(|f| f.name == "image_dominates"));
    let mut other_tables = c;
    other_tables.table_checksum = "00".repeat(32);
    assert!(recompute_certificate(&other_tables, &prep).unwrap().failures().any(|f| f.name == "table_checksum"));
}

#[test]
fn refusals_are_not_certificates() {
    let p = ProbabilityChoice::parse("0.99", BoundSide::Lower).unwrap();
    let out = certify_lower(&prepared(2, CodeKind::Weak), &p, &LowerConfig::default()).unwrap();
    assert!(!out.is_certified());
    let config = LowerConfig { max_iterations: 1000, site_constant: SiteConstant::new(0.5).unwrap() };
    let p = ProbabilityChoice::parse("0.785", BoundSide::Lower).unwrap();
    // a smaller site constant can only make certification harder
    let prep = prepared(2, CodeKind::Weak);
    if let Outcome::Certified(c) = certify_lower(&prep, &p, &config).unwrap() {
        assert!(c.lower.unwrap().tau_pi_float < 0.5);
    }
    assert!(certify_lower(&prepared(2, CodeKind::Strong), &p, &LowerConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn max_flow_agrees_with_upset_enumeration(
        x in prop::collection::vec(0u32..6, 14),
        y in prop::collection::vec(0u32..6, 14),
    ) {
        let a = pcbounds::Alphabet::enumerate(square()).unwrap();
        let norm = |v: &[u32]| {
            let t: u32 = v.iter().sum::<u32>().max(1);
            let mut out: Vec<BigRational> = v.iter().map(|&w| BigRational::new(w.into(), t.into())).collect();
            if v.iter().all(|&w| w == 0) {
                out[0] = BigRational::from_integer(1.into());
            }
            out
        };
        let (x, y) = (norm(&x), norm(&y));
        let flow = dominates(&a, &x, &y).unwrap();
        prop_assert_eq!(flow.is_some(), dominates_by_upsets(&a, &x, &y).unwrap());
        if let Some(w) = flow {
            prop_assert!(w.check(&a, &x, &y));
        }
    }
}

#[test]
fn float_fields_survive_the_json_round_trip() {
    let prep = prepared(3, CodeKind::Weak);
    let p = ProbabilityChoice::parse("0.715", BoundSide::Lower).unwrap();
    let cert = certify_lower(&prep, &p, &LowerConfig::default()).unwrap().certificate().unwrap().clone();
    let back = Certificate::from_json(&cert.to_json().unwrap()).unwrap();
    assert_eq!(back, cert);
    assert!(verify_certificate(&back).unwrap().passed());
}
