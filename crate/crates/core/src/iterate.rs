//! Letter distributions and the recursion `τ^{n+1} = F(p·τ^n + (1-p)·min)`.
//!
//! Every stored mass is a lower bound on the true probability. Whatever is
//! missing from a total of one (the slack) is owed to a sink letter: putting
//! it on `max` yields a vector that dominates the exact one, putting it on
//! `min` yields one that is dominated by it. The push through a compiled
//! plan rounds every product and sum down, so the choice of sink fixes the
//! side of the error for the whole run.

use std::io::Write;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::alphabet::{Alphabet, LetterId, LetterSet};
use crate::error::{Error, Result};
use crate::exact::rational;
use crate::rounding::{add_down, mul_down, sub_down, sub_up, sum_down, sum_up};
use crate::wordcode::{CodeKind, CompositionPlan};

/// Letter that absorbs unaccounted mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sink {
    Min,
    Max,
}

/// Side of a one-sided bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

impl Sink {
    /// The bound direction this sink makes valid for up-set masses.
    pub fn direction(self) -> Direction {
        match self {
            Sink::Max => Direction::Upper,
            Sink::Min => Direction::Lower,
        }
    }
}

/// Probability vector over an alphabet with implicit slack at a sink.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterDistribution {
    masses: Vec<f64>,
    sink: Sink,
    min_id: LetterId,
    max_id: LetterId,
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

impl LetterDistribution {
    pub fn point_mass(alphabet: &Alphabet, id: LetterId, sink: Sink) -> Self {
        let mut masses = vec![0.0; alphabet.len()];
        masses[id as usize] = 1.0;
        LetterDistribution { masses, sink, min_id: alphabet.min(), max_id: alphabet.max() }
    }

    /// Wraps retained masses; they must be non-negative with exact sum at
    /// most one.
    pub fn from_masses(alphabet: &Alphabet, masses: Vec<f64>, sink: Sink) -> Result<Self> {
        if masses.len() != alphabet.len() {
            return Err(Error::AlphabetMismatch { expected: alphabet.len(), got: masses.len() });
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Config("masses must be finite and non-negative".into()));
        }
        if sum_up(masses.iter().copied()) > 1.0 {
            let exact: BigRational = masses.iter().map(|&m| rational(m)).sum();
            if exact > BigRational::one() {
                return Err(Error::Config("masses sum to more than one".into()));
            }
        }
        Ok(LetterDistribution { masses, sink, min_id: alphabet.min(), max_id: alphabet.max() })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, id: LetterId) -> f64 {
        self.masses[id as usize]
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn sink(&self) -> Sink {
        self.sink
    }

    pub fn sink_id(&self) -> LetterId {
        match self.sink {
            Sink::Min => self.min_id,
            Sink::Max => self.max_id,
        }
    }

    pub fn min_id(&self) -> LetterId {
        self.min_id
    }

    pub fn max_id(&self) -> LetterId {
        self.max_id
    }

    /// Upper bound on `1 - Σ masses`.
    pub fn slack(&self) -> f64 {
        sub_up(1.0, sum_down(self.masses.iter().copied())).max(0.0)
    }

    /// Exact slack as a rational.
    pub fn exact_slack(&self) -> BigRational {
        let total: BigRational = self.masses.iter().map(|&m| rational(m)).sum();
        BigRational::one() - total
    }

    /// Moves a lower bound of the slack onto the sink letter.
    pub fn materialized(&self) -> Self {
        let mut out = self.clone();
        let slack = sub_down(1.0, sum_up(self.masses.iter().copied()));
        if slack > 0.0 {
            let s = self.sink_id() as usize;
            out.masses[s] = add_down(out.masses[s], slack);
        }
        out
    }

    /// Exact probability vector with the slack placed on the sink.
    pub fn exact_masses(&self) -> Vec<BigRational> {
        let mut v: Vec<BigRational> = self.masses.iter().map(|&m| rational(m)).collect();
        let slack = self.exact_slack();
        v[self.sink_id() as usize] += slack;
        v
    }

    /// One-sided bound on the mass of an up-set.
    pub fn upset_mass(&self, alphabet: &Alphabet, set: &LetterSet, direction: Direction) -> Result<f64> {
        if set.universe_len() != self.masses.len() {
            return Err(Error::AlphabetMismatch { expected: self.masses.len(), got: set.universe_len() });
        }
        if !alphabet.is_upset(set) {
            return Err(Error::NotAnUpset);
        }
        Ok(self.set_mass(set, direction))
    }

    /// Same as [`upset_mass`](Self::upset_mass) without the up-set check.
    pub(crate) fn set_mass(&self, set: &LetterSet, direction: Direction) -> f64 {
        let inside = self.masses.iter().enumerate().filter(|(i, _)| set.contains(*i as LetterId)).map(|(_, &m)| m);
        let outside = self.masses.iter().enumerate().filter(|(i, _)| !set.contains(*i as LetterId)).map(|(_, &m)| m);
        let v = match (set.contains(self.sink_id()), direction) {
            (true, Direction::Upper) => sub_up(1.0, sum_down(outside)),
            (true, Direction::Lower) => sub_down(1.0, sum_up(outside)),
            (false, Direction::Upper) => sum_up(inside),
            (false, Direction::Lower) => sum_down(inside),
        };
        v.clamp(0.0, 1.0)
    }

    /// Conservative bound on the mass of `max`.
    pub fn max_mass(&self) -> f64 {
        let set_max = self.sink == Sink::Max;
        let m = self.masses[self.max_id as usize];
        if set_max {
            let others = self.masses.iter().enumerate().filter(|(i, _)| *i != self.max_id as usize).map(|(_, &m)| m);
            sub_up(1.0, sum_down(others)).clamp(0.0, 1.0)
        } else {
            m
        }
    }

    /// `p·x + (1-p)·δ_min`, rounded down.
    pub fn mix(&self, p: f64) -> Result<Self> {
        check_probability(p)?;
        let x = self.materialized();
        let mut out = x.clone();
        for m in &mut out.masses {
            *m = mul_down(p, *m);
        }
        let min = self.min_id as usize;
        out.masses[min] = add_down(out.masses[min], sub_down(1.0, p));
        Ok(out)
    }

    /// Largest componentwise change.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.masses.iter().zip(&other.masses).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn with_sink(mut self, sink: Sink) -> Self {
        self.sink = sink;
        self
    }
}

/// Default bound on the slack produced by one application of `F`.
pub const DEFAULT_SLACK_BOUND: f64 = 1e-9;

/// The map `F` of a compiled word code and its one-step recursion.
#[derive(Debug, Clone, Copy)]
pub struct TauMap<'a> {
    alphabet: &'a Alphabet,
    plan: &'a CompositionPlan,
    slack_bound: f64,
}

/// Adds `mass · x_a` into `next[row[a]]` for the listed letters.
#[inline]
fn scatter(next: &mut [f64], row: &[u32], letters: &[(u32, f64)], mass: f64) {
    for &(a, xa) in letters {
        let t = row[a as usize] as usize;
        next[t] = add_down(next[t], mul_down(mass, xa));
    }
}

/// States per parallel shard. Fixed, so that results do not depend on the
/// number of threads.
const SHARD_STATES: usize = 1 << 14;

impl<'a> TauMap<'a> {
    pub fn new(alphabet: &'a Alphabet, plan: &'a CompositionPlan) -> Result<Self> {
        plan.check_alphabet(alphabet)?;
        Ok(TauMap { alphabet, plan, slack_bound: DEFAULT_SLACK_BOUND })
    }

    pub fn with_slack_bound(mut self, bound: f64) -> Self {
        self.slack_bound = bound;
        self
    }

    pub fn alphabet(&self) -> &'a Alphabet {
        self.alphabet
    }

    pub fn plan(&self) -> &'a CompositionPlan {
        self.plan
    }

    fn check(&self, x: &LetterDistribution) -> Result<()> {
        if x.len() != self.alphabet.len() {
            return Err(Error::AlphabetMismatch { expected: self.alphabet.len(), got: x.len() });
        }
        Ok(())
    }

    fn finish(&self, masses: Vec<f64>, sink: Sink) -> Result<LetterDistribution> {
        let out = LetterDistribution { masses, sink, min_id: self.alphabet.min(), max_id: self.alphabet.max() };
        let slack = out.slack();
        if slack > self.slack_bound {
            return Err(Error::SlackBlowup { slack, bound: self.slack_bound });
        }
        Ok(out)
    }

    /// `F(x)`: the distribution of the code of a word of i.i.d. letters.
    pub fn apply_f(&self, x: &LetterDistribution) -> Result<LetterDistribution> {
        self.check(x)?;
        if self.plan.code() == CodeKind::EmbeddedM2Via4 {
            return Err(Error::UnsupportedCode {
                code: self.plan.code().to_string(),
                reason: "the embedded code has no plain F; use step".into(),
            });
        }
        let x = x.materialized();
        let letters = nonzero(&x);
        let mut cur = vec![1.0];
        for s in 0..self.plan.steps() {
            cur = self.push_step(s, &cur, &letters);
        }
        self.finish(cur, x.sink())
    }

    /// One recursion step `T_p(x)`. For ordinary codes this is
    /// `F(mix(x, p))`; for the embedded code each quadrant of the 4×4 word
    /// survives with probability `p` and holds `mix(x, p)` letters.
    pub fn step(&self, x: &LetterDistribution, p: f64) -> Result<LetterDistribution> {
        check_probability(p)?;
        self.check(x)?;
        if self.plan.code() == CodeKind::EmbeddedM2Via4 {
            self.step_embedded(x, p)
        } else {
            self.apply_f(&x.mix(p)?)
        }
    }

    fn next_len(&self, s: usize) -> usize {
        if s + 1 == self.plan.steps() {
            self.plan.alphabet_len()
        } else {
            self.plan.state_count(s + 1)
        }
    }

    fn push_step(&self, s: usize, cur: &[f64], letters: &[(u32, f64)]) -> Vec<f64> {
        let len = self.next_len(s);
        if cur.len() > SHARD_STATES {
            let chunk = SHARD_STATES;
            let parts: Vec<Vec<f64>> = cur
                .par_chunks(chunk)
                .enumerate()
                .map(|(k, part)| {
                    let mut next = vec![0.0; len];
                    for (j, &m) in part.iter().enumerate() {
                        if m > 0.0 {
                            scatter(&mut next, self.plan.row(s, k * chunk + j), letters, m);
                        }
                    }
                    next
                })
                .collect();
            let mut it = parts.into_iter();
            let mut next = it.next().unwrap_or_else(|| vec![0.0; len]);
            for part in it {
                for (a, b) in next.iter_mut().zip(part) {
                    *a = add_down(*a, b);
                }
            }
            next
        } else {
            let mut next = vec![0.0; len];
            for (i, &m) in cur.iter().enumerate() {
                if m > 0.0 {
                    scatter(&mut next, self.plan.row(s, i), letters, m);
                }
            }
            next
        }
    }

    fn step_embedded(&self, x: &LetterDistribution, p: f64) -> Result<LetterDistribution> {
        let alive = x.mix(p)?;
        let letters = nonzero(&alive);
        let dead = sub_down(1.0, p);
        let min = self.alphabet.min() as usize;
        let m = self.plan.m();
        // masses per quadrant-survival pattern: bit q set when the quadrant
        // of column half q in the current row band survived
        let mut cur: [Vec<f64>; 4] = [vec![1.0], Vec::new(), Vec::new(), Vec::new()];
        for s in 0..self.plan.steps() {
            let (c, r) = (s % m, s / m);
            if c == 0 && r % 2 == 0 {
                let width = cur.iter().map(Vec::len).max().unwrap_or(0);
                let mut merged = vec![0.0; width];
                for part in cur.iter_mut() {
                    for (a, b) in merged.iter_mut().zip(part.drain(..)) {
                        *a = add_down(*a, b);
                    }
                }
                cur[0] = merged;
            }
            let bit = 1usize << (c / 2);
            let first = r % 2 == 0 && c % 2 == 0;
            let len = self.next_len(s);
            let mut next: [Vec<f64>; 4] = Default::default();
            for (st, masses) in cur.iter().enumerate() {
                if masses.is_empty() {
                    continue;
                }
                for (i, &mass) in masses.iter().enumerate() {
                    if mass == 0.0 {
                        continue;
                    }
                    let row = self.plan.row(s, i);
                    if first {
                        let live = &mut next[st | bit];
                        if live.is_empty() {
                            live.resize(len, 0.0);
                        }
                        scatter(live, row, &letters, mul_down(mass, p));
                        let gone = &mut next[st];
                        if gone.is_empty() {
                            gone.resize(len, 0.0);
                        }
                        let t = row[min] as usize;
                        gone[t] = add_down(gone[t], mul_down(mass, dead));
                    } else {
                        let target = &mut next[st];
                        if target.is_empty() {
                            target.resize(len, 0.0);
                        }
                        if st & bit != 0 {
                            scatter(target, row, &letters, mass);
                        } else {
                            let t = row[min] as usize;
                            target[t] = add_down(target[t], mass);
                        }
                    }
                }
            }
            cur = next;
        }
        let mut out = vec![0.0; self.alphabet.len()];
        for part in &cur {
            for (a, &b) in out.iter_mut().zip(part) {
                *a = add_down(*a, b);
            }
        }
        self.finish(out, x.sink())
    }
}

fn nonzero(x: &LetterDistribution) -> Vec<(u32, f64)> {
    x.masses().iter().enumerate().filter(|(_, &m)| m > 0.0).map(|(a, &m)| (a as u32, m)).collect()
}

/// When to stop iterating before the iteration cap.
#[derive(Debug, Clone)]
pub enum EarlyStop {
    Never,
    /// Stop once the bound on the mass of `set` drops strictly below `threshold`.
    UpsetBelow { set: LetterSet, threshold: f64 },
    /// Stop once no mass moves by more than `tolerance` in one step.
    Stagnation { tolerance: f64 },
}

#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub p: f64,
    pub max_iterations: usize,
    pub sink: Sink,
    pub early_stop: EarlyStop,
}

impl IterationConfig {
    pub fn new(p: f64, max_iterations: usize, sink: Sink) -> Self {
        IterationConfig { p, max_iterations, sink, early_stop: EarlyStop::Never }
    }

    pub fn with_early_stop(mut self, stop: EarlyStop) -> Self {
        self.early_stop = stop;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if self.max_iterations == 0 {
            return Err(Error::Config("at least one iteration is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    BelowThreshold,
    Stagnation,
}

#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub distribution: LetterDistribution,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

/// Yields `τ^1, τ^2, …` starting from `τ^0 = δ_max`.
pub struct TauIter<'a> {
    map: TauMap<'a>,
    p: f64,
    current: LetterDistribution,
    n: usize,
}

impl<'a> TauIter<'a> {
    pub fn new(map: TauMap<'a>, p: f64, sink: Sink) -> Result<Self> {
        check_probability(p)?;
        let alphabet = map.alphabet();
        Ok(TauIter { current: LetterDistribution::point_mass(alphabet, alphabet.max(), sink), map, p, n: 0 })
    }

    pub fn current(&self) -> &LetterDistribution {
        &self.current
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl Iterator for TauIter<'_> {
    type Item = Result<(usize, LetterDistribution)>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.map.step(&self.current, self.p) {
            Ok(next) => {
                self.n += 1;
                self.current = next.clone();
                Some(Ok((self.n, next)))
            }
            Err(e) => Some(Err(e)),
        }
    }
}

/// Iterates the recursion, calling `observe(n, τ^n)` for every `n ≥ 1`.
pub fn iterate_tau(
    map: TauMap<'_>,
    config: &IterationConfig,
    mut observe: impl FnMut(usize, &LetterDistribution),
) -> Result<IterationOutcome> {
    config.validate()?;
    let mut iter = TauIter::new(map, config.p, config.sink)?;
    let mut prev = iter.current().clone();
    loop {
        let (n, x) = iter.next().expect("infinite iterator")?;
        observe(n, &x);
        let reason = match &config.early_stop {
            EarlyStop::UpsetBelow { set, threshold } if x.set_mass(set, config.sink.direction()) < *threshold => {
                Some(StopReason::BelowThreshold)
            }
            EarlyStop::Stagnation { tolerance } if x.max_abs_diff(&prev) <= *tolerance => Some(StopReason::Stagnation),
            _ if n >= config.max_iterations => Some(StopReason::MaxIterations),
            _ => None,
        };
        if let Some(stop_reason) = reason {
            return Ok(IterationOutcome { distribution: x, iterations: n, stop_reason });
        }
        prev = x;
    }
}

/// One row of a trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub n: usize,
    pub p: f64,
    pub upset_mass_pi: f64,
    pub mass_max: f64,
    pub slack: f64,
}

impl TrajectoryPoint {
    pub fn of(alphabet: &Alphabet, n: usize, p: f64, x: &LetterDistribution) -> Self {
        TrajectoryPoint {
            n,
            p,
            upset_mass_pi: x.set_mass(&alphabet.pi_set(), x.sink().direction()),
            mass_max: x.max_mass(),
            slack: x.slack(),
        }
    }
}

pub fn write_trajectory_csv<W: Write>(mut w: W, points: &[TrajectoryPoint]) -> std::io::Result<()> {
    writeln!(w, "n,p,upset_mass_pi,mass_max,slack")?;
    for t in points {
        writeln!(w, "{},{:?},{:?},{:?},{:?}", t.n, t.p, t.upset_mass_pi, t.mass_max, t.slack)?;
    }
    Ok(())
}

/// Exact rational vector `p·x + (1-p)·δ_min`.
pub fn exact_mix(x: &[BigRational], p: &BigRational, min: LetterId) -> Vec<BigRational> {
    let q = BigRational::one() - p;
    let mut out: Vec<BigRational> = x.iter().map(|v| v * p).collect();
    out[min as usize] += q;
    out
}

/// Exact push of a probability vector through a plan (small cases only).
pub fn exact_apply_f(plan: &CompositionPlan, x: &[BigRational]) -> Vec<BigRational> {
    let mut cur = vec![BigRational::one()];
    for s in 0..plan.steps() {
        let len = if s + 1 == plan.steps() { plan.alphabet_len() } else { plan.state_count(s + 1) };
        let mut next = vec![BigRational::zero(); len];
        for (i, m) in cur.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            for (a, xa) in x.iter().enumerate() {
                if !xa.is_zero() {
                    next[plan.row(s, i)[a] as usize] += m * xa;
                }
            }
        }
        cur = next;
    }
    cur
}
