//! Stochastic dominance by exact max-flow.
//!
//! `u ⪰ v` on a finite poset iff `v` can be transported onto `u` moving mass
//! only upwards. Mass enters at every letter with capacity `u_a`, may flow
//! down cover edges without limit, and leaves at letter `b` with capacity
//! `v_b`; dominance holds iff the maximum flow saturates every exit. Flows
//! along cover chains compose to pairs `a ⪰ b`, so the decomposition of an
//! optimal flow into source-sink paths is a coupling.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::alphabet::{Alphabet, LetterId};
use crate::error::{Error, Result};

/// Coupling weights `γ(a, b)` with `a ⪰ b`: row sums give the dominating
/// vector, column sums the dominated one.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceWitness {
    pub pairs: Vec<(LetterId, LetterId, BigRational)>,
}

impl DominanceWitness {
    /// Checks non-negativity, comparability and both marginals exactly.
    pub fn check(&self, alphabet: &Alphabet, upper: &[BigRational], lower: &[BigRational]) -> bool {
        let n = alphabet.len();
        if upper.len() != n || lower.len() != n {
            return false;
        }
        let mut rows = vec![BigRational::zero(); n];
        let mut cols = vec![BigRational::zero(); n];
        for (a, b, w) in &self.pairs {
            let (a, b) = (*a as usize, *b as usize);
            if a >= n || b >= n || w.is_negative() || !alphabet.leq(b as LetterId, a as LetterId) {
                return false;
            }
            rows[a] += w;
            cols[b] += w;
        }
        rows.as_slice() == upper && cols.as_slice() == lower
    }
}

struct Edge {
    to: usize,
    cap: BigInt,
}

/// Dinic's algorithm on exact integer capacities.
struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    next: Vec<usize>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork { edges: Vec::new(), adj: vec![Vec::new(); nodes], level: vec![0; nodes], next: vec![0; nodes] }
    }

    /// Returns the index of the forward edge; its reverse is `index ^ 1`.
    fn add_edge(&mut self, from: usize, to: usize, cap: BigInt) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap });
        self.adj[from].push(id);
        self.edges.push(Edge { to: from, cap: BigInt::zero() });
        self.adj[to].push(id + 1);
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if self.level[v] < 0 && self.edges[e].cap.is_positive() {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    /// Finds one augmenting path in the level graph and pushes its
    /// bottleneck.
    fn augment(&mut self, s: usize, t: usize) -> Option<BigInt> {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let bottleneck = path.iter().map(|&e| &self.edges[e].cap).min().cloned()?;
                for &e in &path {
                    self.edges[e].cap -= &bottleneck;
                    self.edges[e ^ 1].cap += &bottleneck;
                }
                return Some(bottleneck);
            }
            let mut advanced = false;
            while self.next[u] < self.adj[u].len() {
                let e = self.adj[u][self.next[u]];
                let v = self.edges[e].to;
                if self.edges[e].cap.is_positive() && self.level[v] == self.level[u] + 1 {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                self.next[u] += 1;
            }
            if !advanced {
                // dead end: retreat and skip the edge that led here
                let e = path.pop()?;
                u = self.edges[e ^ 1].to;
                self.next[u] += 1;
            }
        }
    }

    fn max_flow(&mut self, s: usize, t: usize) -> BigInt {
        let mut total = BigInt::zero();
        while self.bfs(s, t) {
            self.next.iter_mut().for_each(|n| *n = 0);
            while let Some(f) = self.augment(s, t) {
                total += f;
            }
        }
        total
    }
}

/// Scales rationals to integers over their least common denominator.
fn to_common_denominator(values: &[&BigRational]) -> (Vec<BigInt>, BigInt) {
    let denom = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints = values.iter().map(|v| v.numer() * (&denom / v.denom())).collect();
    (ints, denom)
}

/// Decides `upper ⪰ lower` for non-negative vectors over `alphabet`.
///
/// Returns a coupling when every up-set has at least as much `upper` mass
/// as `lower` mass, and `None` otherwise.
pub fn dominates(
    alphabet: &Alphabet,
    upper: &[BigRational],
    lower: &[BigRational],
) -> Result<Option<DominanceWitness>> {
    let n = alphabet.len();
    for v in [upper, lower] {
        if v.len() != n {
            return Err(Error::AlphabetMismatch { expected: n, got: v.len() });
        }
        if v.iter().any(Signed::is_negative) {
            return Err(Error::Config("negative mass in dominance check".into()));
        }
    }
    let all: Vec<&BigRational> = upper.iter().chain(lower).collect();
    let (ints, denom) = to_common_denominator(&all);
    let (u, v) = ints.split_at(n);
    let need: BigInt = v.iter().sum();
    let supply: BigInt = u.iter().sum();
    if supply != need {
        return Err(Error::Config("dominance compares vectors of equal total mass".into()));
    }
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    let infinite = &supply + BigInt::one();
    let mut entry = vec![None; n];
    let mut exit = vec![None; n];
    let mut down = Vec::new();
    for a in 0..n {
        if u[a].is_positive() {
            entry[a] = Some(net.add_edge(s, a, u[a].clone()));
        }
        if v[a].is_positive() {
            exit[a] = Some(net.add_edge(a, t, v[a].clone()));
        }
    }
    for (b, covers) in alphabet.upper_covers().iter().enumerate() {
        for &a in covers {
            down.push((net.add_edge(a as usize, b, infinite.clone()), a as usize, b));
        }
    }
    if net.max_flow(s, t) != need {
        return Ok(None);
    }

    // flow on each edge = capacity of its reverse
    let flow = |net: &FlowNetwork, e: usize| net.edges[e ^ 1].cap.clone();
    let mut source_left: Vec<BigInt> = entry.iter().map(|e| e.map_or_else(BigInt::zero, |e| flow(&net, e))).collect();
    let mut sink_left: Vec<BigInt> = exit.iter().map(|e| e.map_or_else(BigInt::zero, |e| flow(&net, e))).collect();
    let mut out_edges: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); n];
    for &(e, a, b) in &down {
        let f = flow(&net, e);
        if f.is_positive() {
            out_edges[a].push((b, f));
        }
    }

    let mut pairs: Vec<(LetterId, LetterId, BigInt)> = Vec::new();
    for a in 0..n {
        while source_left[a].is_positive() {
            // follow positive flow downwards until a letter with exit flow left
            let mut path = Vec::new();
            let mut x = a;
            let mut bottleneck = source_left[a].clone();
            while !sink_left[x].is_positive() {
                let Some(k) = out_edges[x].iter().position(|(_, f)| f.is_positive()) else {
                    break;
                };
                bottleneck = bottleneck.min(out_edges[x][k].1.clone());
                path.push((x, k));
                x = out_edges[x][k].0;
            }
            debug_assert!(sink_left[x].is_positive(), "flow conservation");
            bottleneck = bottleneck.min(sink_left[x].clone());
            for &(y, k) in &path {
                out_edges[y][k].1 -= &bottleneck;
            }
            source_left[a] -= &bottleneck;
            sink_left[x] -= &bottleneck;
            pairs.push((a as LetterId, x as LetterId, bottleneck));
        }
    }
    let mut merged: std::collections::BTreeMap<(LetterId, LetterId), BigInt> = Default::default();
    for (a, b, w) in pairs {
        *merged.entry((a, b)).or_insert_with(BigInt::zero) += w;
    }
    let pairs = merged.into_iter().map(|((a, b), w)| (a, b, BigRational::new(w, denom.clone()))).collect();
    Ok(Some(DominanceWitness { pairs }))
}

/// Up-set enumeration decision of `upper ⪰ lower`; exponential, kept for
/// cross-checking.
pub fn dominates_by_upsets(alphabet: &Alphabet, upper: &[BigRational], lower: &[BigRational]) -> Result<bool> {
    for set in alphabet.upsets()? {
        let mu: BigRational = set.iter().map(|a| &upper[a as usize]).sum();
        let mv: BigRational = set.iter().map(|a| &lower[a as usize]).sum();
        if mu < mv {
            return Ok(false);
        }
    }
    Ok(true)
}
