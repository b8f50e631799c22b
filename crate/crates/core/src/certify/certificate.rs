//! JSON certificates and their verification.

use std::path::Path;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::flow::{dominates, DominanceWitness};
use super::{CandidateSource, Prepared, ProbabilityChoice, SiteConstant, SITE_CONSTANT};
use crate::alphabet::{Alphabet, AlphabetKind, BoundaryProfile, LetterId};
use crate::error::{Error, Result};
use crate::exact::{f64_at_most, parse_decimal, parse_fraction_string, rational, to_fraction_string};
use crate::iterate::{LetterDistribution, Sink, StopReason};
use crate::wordcode::{alphabet_checksum, CodeKind};

pub const CERTIFICATE_FORMAT: &str = "pcbounds-certificate/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRecord {
    /// As requested.
    pub decimal: String,
    /// Exact value of the double used in the computation.
    pub used: String,
    pub used_float: f64,
}

impl From<&ProbabilityChoice> for ProbabilityRecord {
    fn from(p: &ProbabilityChoice) -> Self {
        ProbabilityRecord { decimal: p.decimal.clone(), used: to_fraction_string(&rational(p.value)), used_float: p.value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingRecord {
    pub mode: String,
    pub sink: Sink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerPayload {
    pub stop_reason: StopReason,
    /// Upward-rounded bound on the mass of the two-sides-connected letters.
    pub tau_pi_upper: String,
    pub tau_pi_float: f64,
    pub site_constant: f64,
    /// Retained masses of `τ^n`; the slack belongs to `max`.
    pub distribution: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub p: ProbabilityRecord,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperPayload {
    pub candidate: Option<CandidateRecord>,
    /// The candidate as an exact probability vector.
    pub x: Vec<String>,
    /// Lower vector of its image, slack placed on `min`.
    pub image: Vec<String>,
    pub x_max: String,
    /// `(a, b, γ(a, b))` with `a ⪰ b`.
    pub witness: Vec<(LetterId, LetterId, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: String,
    pub kind: CertificateKind,
    pub software_version: String,
    pub m: usize,
    pub profile: String,
    pub code: CodeKind,
    pub alphabet: String,
    pub alphabet_size: usize,
    pub alphabet_checksum: String,
    pub word_size: usize,
    pub p: ProbabilityRecord,
    pub iterations: usize,
    pub rounding: RoundingRecord,
    pub table_checksum: String,
    pub lower: Option<LowerPayload>,
    pub upper: Option<UpperPayload>,
    pub mass_digest: String,
}

fn kind_name(kind: AlphabetKind) -> &'static str {
    match kind {
        AlphabetKind::Full => "full",
        AlphabetKind::Extremes => "extremes",
        AlphabetKind::Subset => "subset",
    }
}

fn fractions(v: impl IntoIterator<Item = BigRational>) -> Vec<String> {
    v.into_iter().map(|r| to_fraction_string(&r)).collect()
}

impl Certificate {
    fn base(prepared: &Prepared, kind: CertificateKind, p: &ProbabilityChoice, iterations: usize, sink: Sink) -> Self {
        let a = &prepared.alphabet;
        Certificate {
            format: CERTIFICATE_FORMAT.into(),
            kind,
            software_version: env!("CARGO_PKG_VERSION").into(),
            m: prepared.setup.m,
            profile: prepared.setup.profile.to_string(),
            code: prepared.plan.code(),
            alphabet: kind_name(a.kind()).into(),
            alphabet_size: a.len(),
            alphabet_checksum: hex::encode(alphabet_checksum(a)),
            word_size: prepared.plan.m(),
            p: p.into(),
            iterations,
            rounding: RoundingRecord { mode: "directed".into(), sink },
            table_checksum: prepared.plan.checksum_hex(),
            lower: None,
            upper: None,
            mass_digest: String::new(),
        }
    }

    pub(crate) fn lower(
        prepared: &Prepared,
        p: &ProbabilityChoice,
        iterations: usize,
        x: &LetterDistribution,
        tau_pi: f64,
        site: SiteConstant,
    ) -> Self {
        let mut c = Self::base(prepared, CertificateKind::Lower, p, iterations, Sink::Max);
        c.lower = Some(LowerPayload {
            stop_reason: StopReason::BelowThreshold,
            tau_pi_upper: to_fraction_string(&rational(tau_pi)),
            tau_pi_float: tau_pi,
            site_constant: site.value(),
            distribution: fractions(x.masses().iter().map(|&m| rational(m))),
        });
        c.mass_digest = c.compute_digest();
        c
    }

    pub(crate) fn upper(
        prepared: &Prepared,
        p: &ProbabilityChoice,
        x: &[BigRational],
        image: &[BigRational],
        witness: &DominanceWitness,
        source: Option<&CandidateSource>,
    ) -> Self {
        let mut c = Self::base(prepared, CertificateKind::Upper, p, source.map_or(0, |s| s.iterations), Sink::Min);
        let max = prepared.alphabet.max() as usize;
        c.upper = Some(UpperPayload {
            candidate: source.map(|s| CandidateRecord {
                p: (&s.p).into(),
                iterations: s.iterations,
                stop_reason: s.stop_reason,
            }),
            x: fractions(x.iter().cloned()),
            image: fractions(image.iter().cloned()),
            x_max: to_fraction_string(&x[max]),
            witness: witness.pairs.iter().map(|(a, b, w)| (*a, *b, to_fraction_string(w))).collect(),
        });
        c.mass_digest = c.compute_digest();
        c
    }

    /// SHA-256 over the setup, mass vectors and witness.
    pub fn compute_digest(&self) -> String {
        let mut h = Sha256::new();
        let mut feed = |tag: &str, items: &[String]| {
            h.update(tag.as_bytes());
            for s in items {
                h.update(s.as_bytes());
                h.update(b";");
            }
        };
        let setup = [
            format!("{:?}", self.kind),
            self.m.to_string(),
            self.profile.clone(),
            self.code.to_string(),
            self.alphabet.clone(),
            self.alphabet_size.to_string(),
            self.alphabet_checksum.clone(),
            self.word_size.to_string(),
            self.p.decimal.clone(),
            self.p.used.clone(),
            self.iterations.to_string(),
            self.table_checksum.clone(),
        ];
        feed("setup", &setup);
        if let Some(l) = &self.lower {
            feed("site_constant", &[l.site_constant.to_string()]);
            feed("distribution", &l.distribution);
            feed("tau_pi", std::slice::from_ref(&l.tau_pi_upper));
        }
        if let Some(u) = &self.upper {
            feed("x", &u.x);
            feed("image", &u.image);
            let w: Vec<String> = u.witness.iter().map(|(a, b, g)| format!("{a},{b},{g}")).collect();
            feed("witness", &w);
        }
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Certificate(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// The decimal value this certificate bounds `p_c(M)` by.
    pub fn bound(&self) -> &str {
        &self.p.decimal
    }

    /// `p_c(M) > p` or `p_c(M) < p`.
    pub fn statement(&self) -> String {
        let rel = match self.kind {
            CertificateKind::Lower => '>',
            CertificateKind::Upper => '<',
        };
        format!("p_c({}) {rel} {}", self.m, self.p.decimal)
    }
}

/// One named verification check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn add(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name, passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn parse_vector(v: &[String], len: usize) -> Result<Vec<BigRational>> {
    if v.len() != len {
        return Err(Error::Certificate(format!("vector of length {} for {len} letters", v.len())));
    }
    v.iter().map(|s| parse_fraction_string(s)).collect()
}

fn is_distribution(v: &[BigRational]) -> bool {
    v.iter().all(|x| !x.is_negative()) && v.iter().sum::<BigRational>() == BigRational::one()
}

/// Re-checks every arithmetic claim of a certificate. Only the alphabet is
/// rebuilt; the transition tables are trusted through their checksum.
pub fn verify_certificate(cert: &Certificate) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    report.add("format", cert.format == CERTIFICATE_FORMAT, cert.format.clone());
    let profile: BoundaryProfile = cert.profile.parse()?;
    let kind = match cert.alphabet.as_str() {
        "full" => AlphabetKind::Full,
        "extremes" => AlphabetKind::Extremes,
        other => return Err(Error::Certificate(format!("unsupported alphabet {other:?}"))),
    };
    let alphabet = Alphabet::build(profile, kind)?;
    report.add(
        "alphabet",
        alphabet.len() == cert.alphabet_size && hex::encode(alphabet_checksum(&alphabet)) == cert.alphabet_checksum,
        format!("{} letters", alphabet.len()),
    );
    report.add("mass_digest", cert.compute_digest() == cert.mass_digest, "digest over setup, masses and witness");

    let decimal = parse_decimal(&cert.p.decimal)?;
    let used = parse_fraction_string(&cert.p.used)?;
    let float_matches = rational(cert.p.used_float) == used;
    let side_ok = match cert.kind {
        CertificateKind::Lower => used >= decimal,
        CertificateKind::Upper => used <= decimal,
    };
    report.add("p_side", float_matches && side_ok, format!("decimal {} used {}", cert.p.decimal, cert.p.used));

    match (cert.kind, &cert.lower, &cert.upper) {
        (CertificateKind::Lower, Some(l), None) => verify_lower(cert, l, &alphabet, &mut report)?,
        (CertificateKind::Upper, None, Some(u)) => verify_upper(cert, u, &alphabet, &mut report)?,
        _ => return Err(Error::Certificate("payload does not match certificate kind".into())),
    }
    Ok(report)
}

fn verify_lower(cert: &Certificate, l: &LowerPayload, alphabet: &Alphabet, report: &mut VerificationReport) -> Result<()> {
    report.add(
        "code",
        cert.code == CodeKind::Weak && cert.rounding.sink == Sink::Max,
        format!("{} with slack on {:?}", cert.code, cert.rounding.sink),
    );
    let masses = parse_vector(&l.distribution, alphabet.len())?;
    let total: BigRational = masses.iter().sum();
    report.add(
        "distribution",
        masses.iter().all(|m| !m.is_negative()) && total <= BigRational::one(),
        "non-negative, total at most one",
    );
    // slack on max lies inside the two-sides set, so its mass is one minus the rest
    let pi = alphabet.pi_set();
    let outside: BigRational = masses.iter().enumerate().filter(|(a, _)| !pi.contains(*a as LetterId)).map(|(_, m)| m).sum();
    let exact_pi = BigRational::one() - outside;
    let claimed = parse_fraction_string(&l.tau_pi_upper)?;
    report.add(
        "tau_pi",
        claimed >= exact_pi && rational(l.tau_pi_float) == claimed,
        format!("claimed {} ≥ recomputed", l.tau_pi_float),
    );
    let site_ok = l.site_constant > 0.0 && l.site_constant <= SITE_CONSTANT;
    report.add(
        "threshold",
        site_ok && claimed < rational(l.site_constant),
        format!("{} < {}", l.tau_pi_float, l.site_constant),
    );
    Ok(())
}

fn verify_upper(cert: &Certificate, u: &UpperPayload, alphabet: &Alphabet, report: &mut VerificationReport) -> Result<()> {
    report.add(
        "code",
        cert.code.is_strong() && cert.rounding.sink == Sink::Min,
        format!("{} with slack on {:?}", cert.code, cert.rounding.sink),
    );
    let x = parse_vector(&u.x, alphabet.len())?;
    let image = parse_vector(&u.image, alphabet.len())?;
    report.add("probability_vectors", is_distribution(&x) && is_distribution(&image), "x and image sum to one");
    let x_max = parse_fraction_string(&u.x_max)?;
    report.add(
        "x_max",
        x_max.is_positive() && x_max == x[alphabet.max() as usize],
        u.x_max.clone(),
    );
    let mut pairs = Vec::with_capacity(u.witness.len());
    for (a, b, w) in &u.witness {
        pairs.push((*a, *b, parse_fraction_string(w)?));
    }
    let n = alphabet.len() as LetterId;
    let support = pairs.iter().all(|(a, b, w)| *a < n && *b < n && !w.is_negative() && alphabet.leq(*b, *a));
    report.add("witness_support", support, "γ ≥ 0 on pairs a ⪰ b only");
    let witness = DominanceWitness { pairs };
    let marginals = support && {
        let mut rows = vec![BigRational::zero(); alphabet.len()];
        let mut cols = vec![BigRational::zero(); alphabet.len()];
        for (a, b, w) in &witness.pairs {
            rows[*a as usize] += w;
            cols[*b as usize] += w;
        }
        rows == image && cols == x
    };
    report.add("witness_marginals", marginals, "rows give the image, columns give x");
    Ok(())
}

/// Runs [`verify_certificate`] and then replays the computation on compiled
/// tables: a lower certificate's iteration is repeated bit for bit, and an
/// upper certificate's image is recomputed conservatively from the stored
/// `x` and checked for dominance again.
pub fn recompute_certificate(cert: &Certificate, prepared: &Prepared) -> Result<VerificationReport> {
    let mut report = verify_certificate(cert)?;
    let plan = &prepared.plan;
    let alphabet = &prepared.alphabet;
    report.add(
        "setup",
        prepared.setup.m == cert.m
            && prepared.setup.profile.to_string() == cert.profile
            && plan.code() == cert.code
            && plan.m() == cert.word_size
            && alphabet.len() == cert.alphabet_size,
        format!("M = {}, profile {}, {} code", cert.m, cert.profile, cert.code),
    );
    report.add("table_checksum", plan.checksum_hex() == cert.table_checksum, plan.checksum_hex());
    let map = prepared.map()?;
    let p = cert.p.used_float;
    match (&cert.lower, &cert.upper) {
        (Some(l), _) => {
            let mut x = LetterDistribution::point_mass(alphabet, alphabet.max(), Sink::Max);
            for _ in 0..cert.iterations {
                x = map.step(&x, p)?;
            }
            let replay = fractions(x.masses().iter().map(|&m| rational(m)));
            report.add("replay", replay == l.distribution, format!("{} iterations", cert.iterations));
        }
        (None, Some(u)) => {
            let x = parse_vector(&u.x, alphabet.len())?;
            // rounding x down moves mass onto min, so the result is dominated by x
            let masses: Vec<f64> = x.iter().map(f64_at_most).collect();
            let below = LetterDistribution::from_masses(alphabet, masses, Sink::Min)?;
            let image = map.step(&below, p)?.exact_masses();
            report.add("image_dominates", dominates(alphabet, &image, &x)?.is_some(), "recomputed image dominates x");
        }
        (None, None) => return Err(Error::Certificate("certificate without payload".into())),
    }
    Ok(report)
}
