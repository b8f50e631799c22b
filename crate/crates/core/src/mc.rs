//! Monte Carlo simulation of fractal percolation.
//!
//! Realizations keep only surviving squares, level by level. Connectivity is
//! computed on the finest level with 4-adjacency (squares touching at a
//! corner are not connected). Trials draw from independent ChaCha streams
//! derived from one seed, so results do not depend on scheduling.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::alphabet::{Alphabet, LetterId};
use crate::error::{Error, Result};
use crate::wordcode::{Dsu, WordCoder, WordGrid};

/// Largest allowed number of finest-level squares per side.
pub const DEPTH_CAP: u64 = 1 << 13;

/// A realization of `K_0 ⊇ K_1 ⊇ … ⊇ K_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    m: usize,
    /// `levels[k]`: sorted `(x, y)` of surviving squares of side `M^-k`,
    /// origin at the bottom-left corner.
    levels: Vec<Vec<(u32, u32)>>,
    seed: Option<(u64, u64)>,
}

fn side_len(m: usize, n: usize) -> Result<u64> {
    let side = (m as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if side > DEPTH_CAP {
        return Err(Error::DepthCap { side, cap: DEPTH_CAP });
    }
    Ok(side)
}

impl Realization {
    /// Builds a realization from explicit levels; `levels[0]` must be the
    /// root and every square must have a surviving parent.
    pub fn from_levels(m: usize, mut levels: Vec<Vec<(u32, u32)>>) -> Result<Self> {
        if m < 2 || levels.is_empty() || levels[0] != [(0, 0)] {
            return Err(Error::Config("a realization starts with the unit square".into()));
        }
        side_len(m, levels.len() - 1)?;
        for k in 1..levels.len() {
            levels[k].sort_unstable();
            levels[k].dedup();
            let side = (m as u32).pow(k as u32);
            for &(x, y) in &levels[k] {
                let parent = (x / m as u32, y / m as u32);
                if x >= side || y >= side || levels[k - 1].binary_search(&parent).is_err() {
                    return Err(Error::Config(format!("square ({x}, {y}) at level {k} has no parent")));
                }
            }
        }
        Ok(Realization { m, levels, seed: None })
    }

    /// Every square survives.
    pub fn full(m: usize, n: usize) -> Result<Self> {
        let side = side_len(m, n)? as u32;
        let _ = side;
        let levels = (0..=n)
            .map(|k| {
                let s = (m as u32).pow(k as u32);
                (0..s).flat_map(|x| (0..s).map(move |y| (x, y))).collect()
            })
            .collect();
        Realization::from_levels(m, levels)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// `(seed, stream)` that produced it, if simulated.
    pub fn seed(&self) -> Option<(u64, u64)> {
        self.seed
    }

    pub fn level(&self, k: usize) -> &[(u32, u32)] {
        &self.levels[k]
    }

    pub fn side(&self) -> u32 {
        (self.m as u32).pow(self.depth() as u32)
    }

    /// Plain PBM of the finest level, top row first.
    pub fn to_pbm(&self) -> String {
        let side = self.side() as usize;
        let mut grid = vec![false; side * side];
        for &(x, y) in self.level(self.depth()) {
            grid[y as usize * side + x as usize] = true;
        }
        let mut out = format!("P1\n{side} {side}\n");
        for y in (0..side).rev() {
            let row: Vec<&str> = (0..side).map(|x| if grid[y * side + x] { "1" } else { "0" }).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

/// Simulates `K_n` with stream `trial` of generator `seed`.
pub fn simulate_trial(m: usize, p: f64, n: usize, seed: u64, trial: u64) -> Result<Realization> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    if m < 2 {
        return Err(Error::Config(format!("M = {m} must be at least 2")));
    }
    side_len(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut levels = vec![vec![(0u32, 0u32)]];
    for _ in 0..n {
        let prev = levels.last().expect("root level");
        let mut next = Vec::with_capacity(prev.len() * m * m);
        for &(x, y) in prev {
            for dy in 0..m as u32 {
                for dx in 0..m as u32 {
                    if rng.random::<f64>() < p {
                        next.push((x * m as u32 + dx, y * m as u32 + dy));
                    }
                }
            }
        }
        next.sort_unstable();
        levels.push(next);
    }
    Ok(Realization { m, levels, seed: Some((seed, trial)) })
}

/// Simulates `K_n` reproducibly from `seed`.
pub fn simulate_k(m: usize, p: f64, n: usize, seed: u64) -> Result<Realization> {
    simulate_trial(m, p, n, seed, 0)
}

/// Components of the finest level seen from the boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityReport {
    /// Finest-level squares per side.
    pub side: u32,
    /// Component label of each boundary square position, clockwise from the
    /// origin: left side upwards, top rightwards, right downwards, bottom
    /// leftwards. Corner squares appear once on each of their sides.
    pub boundary: Vec<Option<u32>>,
    /// Some component meets both the left and the right side.
    pub percolates: bool,
    /// Some component meets two distinct sides.
    pub two_sides_connected: bool,
}

/// Boundary position `i` (clockwise) as square coordinates.
fn boundary_square(side: u32, i: usize) -> (u32, u32) {
    let s = side as usize;
    let (k, j) = (i / s, (i % s) as u32);
    match k {
        0 => (0, j),
        1 => (j, side - 1),
        2 => (side - 1, side - 1 - j),
        _ => (side - 1 - j, 0),
    }
}

pub fn connectivity(r: &Realization) -> ConnectivityReport {
    let side = r.side();
    let cells = r.level(r.depth());
    let index: HashMap<(u32, u32), usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut dsu = Dsu::new(cells.len());
    for (i, &(x, y)) in cells.iter().enumerate() {
        if let Some(&j) = index.get(&(x + 1, y)) {
            dsu.union(i, j);
        }
        if let Some(&j) = index.get(&(x, y + 1)) {
            dsu.union(i, j);
        }
    }
    let mut labels: HashMap<usize, u32> = HashMap::new();
    let boundary: Vec<Option<u32>> = (0..4 * side as usize)
        .map(|i| {
            index.get(&boundary_square(side, i)).map(|&c| {
                let root = dsu.find(c);
                let next = labels.len() as u32;
                *labels.entry(root).or_insert(next)
            })
        })
        .collect();
    let s = side as usize;
    let mut sides_of: HashMap<u32, u8> = HashMap::new();
    for (i, l) in boundary.iter().enumerate() {
        if let Some(l) = l {
            *sides_of.entry(*l).or_insert(0) |= 1 << (i / s);
        }
    }
    let percolates = sides_of.values().any(|&b| b & 0b0101 == 0b0101);
    let two_sides_connected = sides_of.values().any(|&b| b.count_ones() >= 2);
    ConnectivityReport { side, boundary, percolates, two_sides_connected }
}

impl ConnectivityReport {
    /// Pairwise connection of boundary elements when each side is cut into
    /// `per_side` equal arcs: `i` and `j` are connected when some surviving
    /// squares on their arcs share a component (`[i][i]`: the arc meets `K_n`).
    pub fn element_connections(&self, per_side: usize) -> Result<Vec<Vec<bool>>> {
        let s = self.side as usize;
        if per_side == 0 || !s.is_multiple_of(per_side) {
            return Err(Error::Config(format!("{per_side} elements per side do not divide {s} squares")));
        }
        let arc = s / per_side;
        let n = 4 * per_side;
        let comps: Vec<Vec<u32>> = (0..n)
            .map(|e| {
                let mut v: Vec<u32> = self.boundary[e * arc..(e + 1) * arc].iter().flatten().copied().collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        Ok((0..n)
            .map(|i| (0..n).map(|j| comps[i].iter().any(|c| comps[j].binary_search(c).is_ok())).collect())
            .collect())
    }
}

/// `C_n(K_n)`: level-`n` squares are `max`, missing squares `min`, and every
/// surviving square takes the code of its `M × M` children.
pub fn classify_realization(r: &Realization, alphabet: &Alphabet, coder: &impl WordCoder) -> Result<LetterId> {
    let m = r.m();
    let n = r.depth();
    let mut below: HashMap<(u32, u32), LetterId> = r.level(n).iter().map(|&c| (c, alphabet.max())).collect();
    for k in (0..n).rev() {
        let mut here = HashMap::with_capacity(r.level(k).len());
        for &(x, y) in r.level(k) {
            let mut cells = Vec::with_capacity(m * m);
            for dy in 0..m as u32 {
                for dx in 0..m as u32 {
                    let child = (x * m as u32 + dx, y * m as u32 + dy);
                    cells.push(below.get(&child).copied().unwrap_or(alphabet.min()));
                }
            }
            here.insert((x, y), coder.code_word(&WordGrid::new(m, cells)?)?);
        }
        below = here;
    }
    Ok(below.get(&(0, 0)).copied().unwrap_or(alphabet.max()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    /// Two sides connected.
    Pi,
    /// Left-right crossing.
    Theta,
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Statistic::Pi => "pi",
            Statistic::Theta => "theta",
        })
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pi" => Ok(Statistic::Pi),
            "theta" => Ok(Statistic::Theta),
            _ => Err(Error::Config(format!("unknown statistic {s:?}"))),
        }
    }
}

/// Exact two-sided Clopper-Pearson interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    let alpha = 1.0 - confidence;
    let (k, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).expect("valid shape").inverse_cdf(alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).expect("valid shape").inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

pub const CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub m: usize,
    pub p: f64,
    pub n: usize,
    pub trials: u64,
    pub statistic: Statistic,
    pub successes: u64,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Estimate {
    pub fn covers(&self, value: f64) -> bool {
        self.ci_lo <= value && value <= self.ci_hi
    }

    pub const CSV_HEADER: &'static str = "M,p,n,trials,stat,mean,ci_lo,ci_hi";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{},{},{},{:?},{:?},{:?}",
            self.m, self.p, self.n, self.trials, self.statistic, self.mean, self.ci_lo, self.ci_hi
        )
    }
}

/// Estimates `π_n` or `θ_n` with a 99% Clopper-Pearson interval.
pub fn estimate(m: usize, p: f64, n: usize, trials: u64, statistic: Statistic, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let r = simulate_trial(m, p, n, seed, t)?;
            let c = connectivity(&r);
            Ok(u64::from(match statistic {
                Statistic::Pi => c.two_sides_connected,
                Statistic::Theta => c.percolates,
            }))
        })
        .sum::<Result<u64>>()?;
    let (ci_lo, ci_hi) = clopper_pearson(successes, trials, CONFIDENCE);
    Ok(Estimate { m, p, n, trials, statistic, successes, mean: successes as f64 / trials as f64, ci_lo, ci_hi })
}

/// How one realization relates to its weak and strong classifications over
/// the uniform alphabet whose sides are cut into `per_side` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PropertyCheck {
    /// Connected elements are equivalent in the weak class.
    pub weak_holds: bool,
    /// Elements equivalent in the strong class are connected.
    pub strong_holds: bool,
    pub strong_is_max: bool,
    pub percolates: bool,
    pub two_sides_connected: bool,
    pub weak_two_sides: bool,
}

impl PropertyCheck {
    /// `{strong = max} ⊆ {crossing} ⊆ {two sides} ⊆ {weak ∈ A_π}`.
    pub fn sandwich_holds(&self) -> bool {
        (!self.strong_is_max || self.percolates)
            && (!self.percolates || self.two_sides_connected)
            && (!self.two_sides_connected || self.weak_two_sides)
    }
}

pub fn check_properties(
    r: &Realization,
    alphabet: &Alphabet,
    weak: &impl WordCoder,
    strong: &impl WordCoder,
) -> Result<PropertyCheck> {
    let profile = alphabet.profile();
    if profile.left != profile.top {
        return Err(Error::Config("property checks need a uniform profile".into()));
    }
    let report = connectivity(r);
    let conn = report.element_connections(profile.left)?;
    let w = alphabet.letter(classify_realization(r, alphabet, weak)?);
    let s_id = classify_realization(r, alphabet, strong)?;
    let s = alphabet.letter(s_id);
    let n = conn.len();
    let mut check = PropertyCheck {
        weak_holds: true,
        strong_holds: true,
        strong_is_max: s_id == alphabet.max(),
        percolates: report.percolates,
        two_sides_connected: report.two_sides_connected,
        weak_two_sides: alphabet.two_sides_connected(alphabet.id_of(w).expect("letter of alphabet")),
    };
    for i in 0..n {
        for j in i + 1..n {
            if conn[i][j] && !w.same_block(i, j) {
                check.weak_holds = false;
            }
            if s.same_block(i, j) && !conn[i][j] {
                check.strong_holds = false;
            }
        }
    }
    Ok(check)
}
