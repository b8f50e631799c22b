//! Bound certificates.
//!
//! A lower bound `p < p_c(M)` follows when an over-estimate of the
//! two-sides-connected probability, obtained from the weak code with slack on
//! `max`, falls below a rigorous lower bound for the site percolation
//! threshold. An upper bound `p_c(M) < p` follows from a vector `x` with
//! positive `max` mass whose image under the strong-code recursion dominates
//! it; the image is computed with slack on `min`, so it is dominated by the
//! true image.

mod certificate;
mod flow;

use std::path::Path;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

pub use certificate::{
    recompute_certificate, verify_certificate, Certificate, CertificateKind, Check, LowerPayload, ProbabilityRecord, UpperPayload,
    VerificationReport, CERTIFICATE_FORMAT,
};
pub use flow::{dominates, dominates_by_upsets, DominanceWitness};

use crate::alphabet::{Alphabet, AlphabetKind, BoundaryProfile};
use crate::error::{Error, Result};
use crate::exact::{f64_at_least, f64_at_most, parse_decimal, rational, to_decimal_string, to_fraction_string};
use crate::iterate::{iterate_tau, EarlyStop, IterationConfig, LetterDistribution, Sink, StopReason, TauMap};
use crate::rounding::{mul_down, sqrt_bounds, sub_down, sub_up};
use crate::wordcode::{CodeKind, CompositionPlan, PlanOptions};

/// Largest accepted lower bound for the site percolation threshold.
pub const SITE_CONSTANT: f64 = 0.556;

/// Rigorous lower bound on the site percolation threshold of the square
/// lattice. Only values in `(0, 0.556]` are accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteConstant(f64);

impl SiteConstant {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= SITE_CONSTANT {
            Ok(SiteConstant(value))
        } else {
            Err(Error::SiteConstant(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for SiteConstant {
    fn default() -> Self {
        SiteConstant(SITE_CONSTANT)
    }
}

/// Which side of a decimal `p` the machine value may fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    /// Lower bounds use a value `>= p`.
    Lower,
    /// Upper bounds use a value `<= p`.
    Upper,
}

/// A survival probability given as a decimal, with the double actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityChoice {
    pub decimal: String,
    pub exact: BigRational,
    pub value: f64,
}

impl ProbabilityChoice {
    pub fn parse(decimal: &str, side: BoundSide) -> Result<Self> {
        let exact = parse_decimal(decimal)?;
        if !crate::exact::is_probability(&exact) {
            return Err(Error::InvalidProbability(exact.to_f64().unwrap_or(f64::NAN)));
        }
        let value = match side {
            BoundSide::Lower => f64_at_least(&exact),
            BoundSide::Upper => f64_at_most(&exact),
        };
        Ok(ProbabilityChoice { decimal: decimal.trim().to_string(), exact, value })
    }

    /// `p - delta`, for taking an upper-bound candidate just below `p`.
    pub fn below(&self, delta: &BigRational) -> Result<Self> {
        let exact = &self.exact - delta;
        if !crate::exact::is_probability(&exact) {
            return Err(Error::InvalidProbability(exact.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(ProbabilityChoice {
            decimal: to_decimal_string(&exact, 40).unwrap_or_else(|| to_fraction_string(&exact)),
            value: f64_at_most(&exact),
            exact,
        })
    }
}

/// Classical bounds: `p_c(M) > 1/√M`, and for `M = 2` the coupling with
/// `M = 4`, `p_c(2) ≤ 1 - (1 - √p_c(4))⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineBounds {
    /// Rounded down.
    pub lower: f64,
    /// Rounded up; present for `M = 2` when a bound for `M = 4` is supplied.
    pub upper: Option<f64>,
}

pub fn baseline_bounds(m: usize, pc4_upper: Option<f64>) -> Result<BaselineBounds> {
    if m < 2 {
        return Err(Error::Config(format!("M = {m} must be at least 2")));
    }
    let (_, root_hi) = sqrt_bounds(m as f64);
    let lower = f64_at_most(&(BigRational::from_integer(1.into()) / rational(root_hi)));
    let upper = match (m, pc4_upper) {
        (2, Some(c)) => {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidProbability(c));
            }
            let (_, s_hi) = sqrt_bounds(c);
            let gap = sub_down(1.0, s_hi).max(0.0);
            let g2 = mul_down(gap, gap);
            Some(sub_up(1.0, mul_down(g2, g2)))
        }
        _ => None,
    };
    Ok(BaselineBounds { lower, upper })
}

/// Everything fixed about a certification run except `p`.
#[derive(Debug, Clone)]
pub struct Setup {
    pub m: usize,
    pub profile: BoundaryProfile,
    pub code: CodeKind,
    pub alphabet_kind: AlphabetKind,
}

impl Setup {
    pub fn new(m: usize, profile: BoundaryProfile, code: CodeKind) -> Self {
        let alphabet_kind =
            if code == CodeKind::StrongAllSides { AlphabetKind::Extremes } else { AlphabetKind::Full };
        Setup { m, profile, code, alphabet_kind }
    }

    pub fn with_alphabet_kind(mut self, kind: AlphabetKind) -> Self {
        self.alphabet_kind = kind;
        self
    }

    /// Word size of the compiled code (4 for the embedded variant).
    pub fn word_size(&self) -> usize {
        if self.code == CodeKind::EmbeddedM2Via4 {
            4
        } else {
            self.m
        }
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::build(self.profile, self.alphabet_kind)
    }

    /// Alphabet and compiled plan, using `cache_dir` when given.
    pub fn prepare(&self, cache_dir: Option<&Path>, opts: &PlanOptions) -> Result<Prepared> {
        if self.code == CodeKind::EmbeddedM2Via4 && self.m != 2 {
            return Err(Error::UnsupportedCode {
                code: self.code.to_string(),
                reason: format!("bounds M = 2 only, got M = {}", self.m),
            });
        }
        let alphabet = self.alphabet()?;
        let plan = CompositionPlan::load_or_build(&alphabet, self.word_size(), self.code, cache_dir, opts)?;
        Ok(Prepared { setup: self.clone(), alphabet, plan })
    }
}

/// A setup with its alphabet and tables.
#[derive(Debug)]
pub struct Prepared {
    pub setup: Setup,
    pub alphabet: Alphabet,
    pub plan: CompositionPlan,
}

impl Prepared {
    pub fn map(&self) -> Result<TauMap<'_>> {
        TauMap::new(&self.alphabet, &self.plan)
    }
}

#[derive(Debug, Clone)]
pub struct LowerConfig {
    pub max_iterations: usize,
    pub site_constant: SiteConstant,
}

impl Default for LowerConfig {
    fn default() -> Self {
        LowerConfig { max_iterations: 1000, site_constant: SiteConstant::default() }
    }
}

/// A failed attempt. Never evidence for the opposite inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct Refusal {
    pub p: String,
    pub iterations: usize,
    pub reason: String,
    /// Last value of the quantity compared against the criterion.
    pub last_value: f64,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Certified(Box<Certificate>),
    Refused(Refusal),
}

impl Outcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, Outcome::Certified(_))
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Outcome::Certified(c) => Some(c),
            Outcome::Refused(_) => None,
        }
    }
}

fn check_weak(prepared: &Prepared) -> Result<()> {
    if prepared.plan.code() != CodeKind::Weak {
        return Err(Error::UnsupportedCode {
            code: prepared.plan.code().to_string(),
            reason: "lower bounds need the weak code".into(),
        });
    }
    Ok(())
}

/// Certifies `p < p_c(M)` when the over-estimate of `τ_π^n(p)` drops below
/// the site constant for some `n ≤ max_iterations`.
pub fn certify_lower(prepared: &Prepared, p: &ProbabilityChoice, config: &LowerConfig) -> Result<Outcome> {
    check_weak(prepared)?;
    let alphabet = &prepared.alphabet;
    let threshold = config.site_constant.value();
    let pi = alphabet.pi_set();
    let iteration = IterationConfig::new(p.value, config.max_iterations, Sink::Max)
        .with_early_stop(EarlyStop::UpsetBelow { set: pi.clone(), threshold });
    let out = iterate_tau(prepared.map()?, &iteration, |_, _| {})?;
    let tau_pi = out.distribution.set_mass(&pi, crate::iterate::Direction::Upper);
    if out.stop_reason != StopReason::BelowThreshold {
        return Ok(Outcome::Refused(Refusal {
            p: p.decimal.clone(),
            iterations: out.iterations,
            reason: format!("over-estimate of tau_pi stayed at or above {threshold}"),
            last_value: tau_pi,
        }));
    }
    let cert = Certificate::lower(prepared, p, out.iterations, &out.distribution, tau_pi, config.site_constant);
    Ok(Outcome::Certified(Box::new(cert)))
}

/// Where the candidate fixed point `x` comes from.
#[derive(Debug, Clone)]
pub struct UpperConfig {
    pub max_iterations: usize,
    /// Stop iterating for `x` once no mass moves by more than this; `0`
    /// disables the check.
    pub stagnation_tolerance: f64,
}

impl Default for UpperConfig {
    fn default() -> Self {
        UpperConfig { max_iterations: 1000, stagnation_tolerance: 0.0 }
    }
}

/// Provenance of a candidate vector.
#[derive(Debug, Clone)]
pub struct CandidateSource {
    pub p: ProbabilityChoice,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

/// `x = τ^n(q)` computed with slack on `min`.
pub fn candidate_vector(
    prepared: &Prepared,
    q: &ProbabilityChoice,
    config: &UpperConfig,
) -> Result<(LetterDistribution, CandidateSource)> {
    let stop = if config.stagnation_tolerance > 0.0 {
        EarlyStop::Stagnation { tolerance: config.stagnation_tolerance }
    } else {
        EarlyStop::Never
    };
    let iteration = IterationConfig::new(q.value, config.max_iterations, Sink::Min).with_early_stop(stop);
    let out = iterate_tau(prepared.map()?, &iteration, |_, _| {})?;
    let source = CandidateSource { p: q.clone(), iterations: out.iterations, stop_reason: out.stop_reason };
    Ok((out.distribution, source))
}

/// Certifies `p_c(M) < p` when `T_p(x) ⪰ x` and `x_max > 0`.
pub fn certify_upper(
    prepared: &Prepared,
    p: &ProbabilityChoice,
    x: &LetterDistribution,
    source: Option<&CandidateSource>,
) -> Result<Outcome> {
    if !prepared.plan.code().is_strong() {
        return Err(Error::UnsupportedCode {
            code: prepared.plan.code().to_string(),
            reason: "upper bounds need a strong code".into(),
        });
    }
    let alphabet = &prepared.alphabet;
    let x = x.clone().with_sink(Sink::Min);
    let x_exact = x.exact_masses();
    let x_max = &x_exact[alphabet.max() as usize];
    let refuse = |reason: String, last: f64| {
        Ok(Outcome::Refused(Refusal {
            p: p.decimal.clone(),
            iterations: source.map_or(0, |s| s.iterations),
            reason,
            last_value: last,
        }))
    };
    if *x_max <= BigRational::from_integer(0.into()) {
        return refuse("candidate has no mass on max".into(), 0.0);
    }
    let image = prepared.map()?.step(&x, p.value)?;
    let image_exact = image.exact_masses();
    match dominates(alphabet, &image_exact, &x_exact)? {
        Some(witness) => {
            let cert = Certificate::upper(prepared, p, &x_exact, &image_exact, &witness, source);
            Ok(Outcome::Certified(Box::new(cert)))
        }
        None => refuse("image does not dominate the candidate".into(), image.max_mass()),
    }
}

/// Result of a grid search.
#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Best certified grid point, with its certificate.
    pub best: Option<(String, Box<Certificate>)>,
    /// Closest refused grid point on the other side.
    pub bracket: Option<Refusal>,
    pub probes: usize,
}

/// Decimal digits of a power-of-ten precision such as `1e-3`.
fn grid_digits(precision: f64) -> Result<u32> {
    let d = -precision.log10();
    let digits = d.round();
    if !(1.0..=9.0).contains(&digits) || (d - digits).abs() > 1e-9 {
        return Err(Error::Config(format!("precision {precision} must be a power of ten between 1e-9 and 0.1")));
    }
    Ok(digits as u32)
}

fn grid_decimal(k: u64, digits: u32) -> String {
    let scale = 10u64.pow(digits);
    format!("{}.{:0width$}", k / scale, k % scale, width = digits as usize)
}

/// Finds the boundary of a monotone predicate on grid points `lo..=hi`,
/// where `good(lo)` is assumed true and `good(hi)` false. Probes several
/// points per round when more than one thread is available.
fn grid_bisect<T: Send>(
    mut lo: u64,
    mut hi: u64,
    probe: impl Fn(u64) -> Result<(bool, T)> + Sync,
) -> Result<(Option<(u64, T)>, Option<(u64, T)>, usize)> {
    let mut good = None;
    let mut bad = None;
    let mut probes = 0;
    let width = rayon::current_num_threads().max(1) as u64;
    while hi - lo > 1 {
        let points: Vec<u64> = (1..=width)
            .map(|i| lo + (hi - lo) * i / (width + 1))
            .filter(|&k| k > lo && k < hi)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let points = if points.is_empty() { vec![lo + (hi - lo) / 2] } else { points };
        let results: Vec<(u64, Result<(bool, T)>)> = points.into_par_iter().map(|k| (k, probe(k))).collect();
        probes += results.len();
        let mut new_lo = lo;
        let mut new_hi = hi;
        for (k, r) in results {
            let (ok, data) = r?;
            if ok && k > new_lo && k < new_hi {
                new_lo = k;
                good = Some((k, data));
            } else if !ok && k < new_hi {
                new_hi = k;
                bad = Some((k, data));
            }
        }
        lo = new_lo;
        hi = new_hi;
    }
    Ok((good, bad, probes))
}

/// Largest grid point `p` with a lower-bound certificate, by bisection on
/// `[0, 1]` at the given power-of-ten precision.
pub fn search_lower(prepared: &Prepared, precision: f64, config: &LowerConfig) -> Result<SearchResult> {
    check_weak(prepared)?;
    let digits = grid_digits(precision)?;
    let top = 10u64.pow(digits);
    let (good, bad, probes) = grid_bisect(0, top, |k| {
        let p = ProbabilityChoice::parse(&grid_decimal(k, digits), BoundSide::Lower)?;
        Ok(match certify_lower(prepared, &p, config)? {
            Outcome::Certified(c) => (true, Ok(c)),
            Outcome::Refused(r) => (false, Err(r)),
        })
    })?;
    Ok(SearchResult {
        best: good.and_then(|(k, c)| c.ok().map(|c| (grid_decimal(k, digits), c))),
        bracket: bad.and_then(|(_, r)| r.err()),
        probes,
    })
}

#[derive(Debug, Clone)]
pub struct UpperSearchConfig {
    pub candidate: UpperConfig,
    /// Offset between the certified `p` and the `p` the candidate is taken at.
    pub delta: BigRational,
    /// Grid points at or below this are not probed.
    pub floor: Option<f64>,
}

impl Default for UpperSearchConfig {
    fn default() -> Self {
        UpperSearchConfig { candidate: UpperConfig::default(), delta: BigRational::new(1.into(), 10_000.into()), floor: None }
    }
}

/// Smallest grid point `p` with an upper-bound certificate, using
/// `x = τ^n(p - δ)` as candidate.
pub fn search_upper(prepared: &Prepared, precision: f64, config: &UpperSearchConfig) -> Result<SearchResult> {
    let digits = grid_digits(precision)?;
    let top = 10u64.pow(digits);
    let floor = config.floor.unwrap_or_else(|| {
        baseline_bounds(prepared.setup.m, None).map(|b| b.lower).unwrap_or(0.0)
    });
    let lo = (floor * top as f64).floor() as u64;
    let delta_exact = &config.delta;
    // certified points sit above the threshold, so bisect on "refused";
    // the virtual point past 1 stands for the trivial bound
    let (refused, certified, probes) = grid_bisect(lo, top + 1, |k| {
        let p = ProbabilityChoice::parse(&grid_decimal(k, digits), BoundSide::Upper)?;
        if &p.exact < delta_exact {
            return Ok((true, Err(None)));
        }
        let q = p.below(delta_exact)?;
        let (x, source) = candidate_vector(prepared, &q, &config.candidate)?;
        Ok(match certify_upper(prepared, &p, &x, Some(&source))? {
            Outcome::Certified(c) => (false, Ok(c)),
            Outcome::Refused(r) => (true, Err(Some(r))),
        })
    })?;
    Ok(SearchResult {
        best: certified.and_then(|(k, c)| c.ok().map(|c| (grid_decimal(k, digits), c))),
        bracket: refused.and_then(|(_, r)| r.err().flatten()),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_constant_only_moves_down() {
        assert!(SiteConstant::new(0.55).is_ok());
        assert!(SiteConstant::new(0.556).is_ok());
        assert!(SiteConstant::new(0.6).is_err());
        assert!(SiteConstant::new(0.0).is_err());
    }

    #[test]
    fn baseline_examples() {
        let b4 = baseline_bounds(4, None).unwrap();
        assert_eq!(b4.lower, 0.5);
        let b2 = baseline_bounds(2, Some(0.998)).unwrap();
        let u = b2.upper.unwrap();
        assert!(u < 1.0 && u > 1.0 - 1e-11);
        assert!(1.0 - u > 1e-12);
        let b = baseline_bounds(2, Some(0.972)).unwrap().upper.unwrap();
        let direct = 1.0 - (1.0 - 0.972f64.sqrt()).powi(4);
        assert!(b >= direct && b - direct < 1e-14);
        assert!(baseline_bounds(2, None).unwrap().lower <= std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn decimal_sides() {
        let lo = ProbabilityChoice::parse("0.785", BoundSide::Lower).unwrap();
        let hi = ProbabilityChoice::parse("0.785", BoundSide::Upper).unwrap();
        assert!(rational(lo.value) >= lo.exact);
        assert!(rational(hi.value) <= hi.exact);
        assert!(ProbabilityChoice::parse("1.5", BoundSide::Lower).is_err());
    }

    #[test]
    fn grid_formatting() {
        assert_eq!(grid_digits(1e-3).unwrap(), 3);
        assert!(grid_digits(2e-3).is_err());
        assert_eq!(grid_decimal(785, 3), "0.785");
        assert_eq!(grid_decimal(1000, 3), "1.000");
        assert_eq!(grid_decimal(7, 2), "0.07");
    }

    #[test]
    fn bisection_finds_boundary() {
        let (good, bad, _) = grid_bisect(0, 1000, |k| Ok((k <= 437, ()))).unwrap();
        assert_eq!(good.unwrap().0, 437);
        assert_eq!(bad.unwrap().0, 438);
    }
}
