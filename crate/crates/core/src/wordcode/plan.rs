//! Frontier dynamic program for word codes.
//!
//! Cells of an `M × M` word are added one at a time in row-major order from
//! the origin corner. A DP state describes everything about the processed
//! region that can still influence the code output: how the elements of the
//! frontier (edges shared with unprocessed cells) are connected to each other
//! and to the parent groups of the word boundary. Outer boundary elements are
//! folded into their groups as soon as they appear, so states stay small.
//!
//! Weak states are a partition of `groups ∪ frontier` in restricted-growth
//! form. Strong states keep, per open class, a count of members of each group
//! (capped at the majority threshold), the partition of groups already
//! decided by closed classes, and a flag per decided group.

use std::collections::HashMap;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{validate_code, CodeKind, Dsu, WordGeometry};
use crate::alphabet::{Alphabet, AlphabetKind, BoundaryProfile, Letter, LetterId};
use crate::error::{Error, Result};

pub const DEFAULT_STATE_CAP: usize = 4_000_000;

#[derive(Debug, Clone)]
pub struct PlanOptions {
    /// Abort when any step has more states than this.
    pub state_cap: usize,
    /// Emit per-step progress on stderr.
    pub verbose: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { state_cap: DEFAULT_STATE_CAP, verbose: false }
    }
}

/// Which frontier slots exist before a given cell is placed.
#[derive(Debug, Clone)]
struct Layout {
    /// Offset of each column's slots (its pending top edge), if present.
    col: Vec<Option<usize>>,
    /// Offset of the vertical slots (right edge of the previous cell).
    vert: Option<usize>,
    len: usize,
}

/// Precompiled transition tables of a word code.
#[derive(Debug, Clone)]
pub struct CompositionPlan {
    pub(crate) m: usize,
    pub(crate) profile: BoundaryProfile,
    pub(crate) code: CodeKind,
    pub(crate) alphabet_kind: AlphabetKind,
    pub(crate) letters: usize,
    pub(crate) alphabet_checksum: [u8; 32],
    /// Interned state keys before each cell.
    pub(crate) states: Vec<Vec<Box<[u8]>>>,
    /// `tables[s][state * letters + letter]`: successor state, or output
    /// letter id after the last cell.
    pub(crate) tables: Vec<Vec<u32>>,
    pub(crate) checksum: [u8; 32],
}

/// Transition rules shared by table construction and single-word evaluation.
pub(crate) struct Kernel<'a> {
    geo: WordGeometry,
    strong: bool,
    threshold: u8,
    layouts: Vec<Layout>,
    /// `remaining[s][g]`: members of group `g` in cells after cell `s`.
    remaining: Vec<Vec<u8>>,
    alphabet: &'a Alphabet,
}

/// Reusable buffers for one transition.
#[derive(Default)]
pub(crate) struct Scratch {
    dsu: Option<Dsu>,
    first: Vec<usize>,
    counts: Vec<u8>,
    label: Vec<u8>,
    open: Vec<bool>,
}

const UNSET: usize = usize::MAX;

impl<'a> Kernel<'a> {
    pub fn new(alphabet: &'a Alphabet, m: usize, code: CodeKind) -> Kernel<'a> {
        let profile = alphabet.profile();
        let geo = WordGeometry::new(m, profile);
        let steps = m * m;
        let layouts = (0..=steps).map(|s| layout(m, profile, s)).collect();
        let n = profile.total();
        let mut remaining = vec![vec![0u8; n]; steps];
        for e in 0..m * n {
            let c = geo.outer_to_cell(e);
            let cell = c.row * m + c.col;
            for rem in remaining.iter_mut().take(cell) {
                rem[geo.group_of(e)] += 1;
            }
        }
        Kernel {
            geo,
            strong: code.is_strong(),
            threshold: (m / 2 + 1) as u8,
            layouts,
            remaining,
            alphabet,
        }
    }

    pub fn steps(&self) -> usize {
        self.geo.m * self.geo.m
    }

    pub fn initial_state(&self) -> Box<[u8]> {
        let n = self.geo.n();
        if self.strong {
            // no frontier, no open blocks, singleton final partition, nothing decided
            let mut key: Vec<u8> = (0..n as u8).collect();
            key.extend(std::iter::repeat_n(0u8, n));
            key.into()
        } else {
            (0..n as u8).collect()
        }
    }

    /// Output letter of a final key (no frontier).
    fn final_letter(&self, key: &[u8]) -> Letter {
        let n = self.geo.n();
        Letter::from_labels(&key[..n])
    }

    pub fn output_id(&self, key: &[u8]) -> Result<LetterId> {
        let out = self.final_letter(key);
        match self.alphabet.kind() {
            AlphabetKind::Extremes => {
                let up = super::project_to_extremes(self.strong, &out);
                Ok(if up { self.alphabet.max() } else { self.alphabet.min() })
            }
            _ => self
                .alphabet
                .id_of(&out)
                .ok_or_else(|| Error::InvalidLetter(format!("code output {out} missing from alphabet"))),
        }
    }

    /// Successor key after placing `letter` as cell `s`.
    pub fn next(&self, s: usize, key: &[u8], letter: &Letter, scratch: &mut Scratch, out: &mut Vec<u8>) {
        if self.strong {
            self.next_strong(s, key, letter, scratch, out)
        } else {
            self.next_weak(s, key, letter, scratch, out)
        }
    }

    /// Unions a letter's blocks and glues its left and bottom sides to the
    /// frontier; calls `outer(node, element)` for letter elements on the word
    /// boundary. Letter nodes start at `base`.
    fn glue_letter(
        &self,
        s: usize,
        letter: &Letter,
        base: usize,
        frontier_base: usize,
        dsu: &mut Dsu,
        first: &mut Vec<usize>,
        mut outer: impl FnMut(&mut Dsu, usize, usize),
    ) {
        let m = self.geo.m;
        let (col, row) = (s % m, s / m);
        let p = self.geo.profile;
        let (l, t) = (p.left, p.top);
        let n = p.total();
        first.clear();
        first.resize(n, UNSET);
        for e in 0..n {
            let b = letter.block_of(e);
            if first[b] == UNSET {
                first[b] = base + e;
            } else {
                dsu.union(first[b], base + e);
            }
        }
        let lay = &self.layouts[s];
        for i in 0..l {
            match lay.vert {
                Some(off) => dsu.union(frontier_base + off + i, base + i),
                None => outer(dsu, base + i, i),
            }
        }
        for q in 0..t {
            let e = 2 * l + t + q;
            match lay.col[col] {
                Some(off) if row > 0 => dsu.union(frontier_base + off + (t - 1 - q), base + e),
                _ => outer(dsu, base + e, e),
            }
        }
        if row == m - 1 {
            for j in 0..t {
                outer(dsu, base + l + j, l + j);
            }
        }
        if col == m - 1 {
            for k in 0..l {
                outer(dsu, base + l + t + k, l + t + k);
            }
        }
    }

    /// Node ids of the next layout's frontier slots, in slot order.
    fn new_frontier_nodes(&self, s: usize, old_base: usize, letter_base: usize, nodes: &mut Vec<usize>) {
        let m = self.geo.m;
        let (col, _row) = (s % m, s / m);
        let p = self.geo.profile;
        let (l, t) = (p.left, p.top);
        let old = &self.layouts[s];
        let new = &self.layouts[s + 1];
        nodes.clear();
        for c in 0..m {
            if new.col[c].is_some() {
                if c == col {
                    nodes.extend((0..t).map(|j| letter_base + l + j));
                } else {
                    let off = old.col[c].expect("column slots persist");
                    nodes.extend((0..t).map(|j| old_base + off + j));
                }
            }
        }
        if new.vert.is_some() {
            // slot i holds height i from the bottom: right element l-1-i from the top
            nodes.extend((0..l).map(|i| letter_base + l + t + (l - 1 - i)));
        }
        debug_assert_eq!(nodes.len(), new.len);
    }

    fn next_weak(&self, s: usize, key: &[u8], letter: &Letter, sc: &mut Scratch, out: &mut Vec<u8>) {
        let n = self.geo.n();
        let old_len = n + self.layouts[s].len;
        let letter_base = old_len;
        let total = old_len + n;
        let dsu = sc.dsu.get_or_insert_with(|| Dsu::new(total));
        dsu.reset(total);
        sc.first.clear();
        sc.first.resize(old_len + 1, UNSET);
        for (i, &b) in key.iter().enumerate() {
            let f = &mut sc.first[b as usize];
            if *f == UNSET {
                *f = i;
            } else {
                dsu.union(*f, i);
            }
        }
        let geo = self.geo;
        let (col, row) = (s % geo.m, s / geo.m);
        let mut first = std::mem::take(&mut sc.first);
        self.glue_letter(s, letter, letter_base, n, dsu, &mut first, |dsu, node, e| {
            let outer = geo.cell_to_outer(col, row, e).expect("outer element");
            dsu.union(geo.group_of(outer), node);
        });
        sc.first = first;
        let mut nodes = Vec::with_capacity(n + self.layouts[s + 1].len);
        nodes.extend(0..n);
        let mut fr = Vec::new();
        self.new_frontier_nodes(s, n, letter_base, &mut fr);
        nodes.extend(fr);
        relabel(dsu, &nodes, &mut sc.label, out);
    }

    fn next_strong(&self, s: usize, key: &[u8], letter: &Letter, sc: &mut Scratch, out: &mut Vec<u8>) {
        let n = self.geo.n();
        let thr = self.threshold;
        let f_old = self.layouts[s].len;
        let blocks = key[..f_old].iter().map(|&b| b as usize + 1).max().unwrap_or(0);
        let counts_old = &key[f_old..f_old + blocks * n];
        let fin = &key[f_old + blocks * n..f_old + blocks * n + n];
        let decided_old = &key[f_old + blocks * n + n..];
        let letter_base = f_old;
        let total = f_old + n;

        let dsu = sc.dsu.get_or_insert_with(|| Dsu::new(total));
        dsu.reset(total);
        sc.first.clear();
        sc.first.resize(blocks.max(n) + 1, UNSET);
        for (i, &b) in key[..f_old].iter().enumerate() {
            let f = &mut sc.first[b as usize];
            if *f == UNSET {
                *f = i;
            } else {
                dsu.union(*f, i);
            }
        }
        let block_rep: Vec<usize> = sc.first[..blocks].to_vec();

        let geo = self.geo;
        let (col, row) = (s % geo.m, s / geo.m);
        let mut outer_members: Vec<(usize, usize)> = Vec::new();
        let mut first = std::mem::take(&mut sc.first);
        self.glue_letter(s, letter, letter_base, 0, dsu, &mut first, |_, node, e| {
            let outer = geo.cell_to_outer(col, row, e).expect("outer element");
            outer_members.push((node, geo.group_of(outer)));
        });
        sc.first = first;

        // per-root counts
        let counts = &mut sc.counts;
        counts.clear();
        counts.resize(total * n, 0);
        let add = |counts: &mut Vec<u8>, root: usize, g: usize, c: u8| {
            let slot = &mut counts[root * n + g];
            *slot = (*slot + c).min(thr);
        };
        for (b, &rep) in block_rep.iter().enumerate() {
            let r = dsu.find(rep);
            for g in 0..n {
                let c = counts_old[b * n + g];
                if c > 0 {
                    add(counts, r, g, c);
                }
            }
        }
        for &(node, g) in &outer_members {
            if decided_old[g] == 0 {
                let r = dsu.find(node);
                add(counts, r, g, 1);
            }
        }

        let mut fr = Vec::new();
        let last = s + 1 == self.steps();
        if !last {
            self.new_frontier_nodes(s, 0, letter_base, &mut fr);
        }
        let open = &mut sc.open;
        open.clear();
        open.resize(total, false);
        for &node in &fr {
            let r = dsu.find(node);
            open[r] = true;
        }

        // closed classes decide their majority groups
        let mut group_dsu = Dsu::new(n);
        let mut decided: Vec<u8> = decided_old.to_vec();
        {
            let mut first_of = [UNSET; 256];
            for g in 0..n {
                let b = fin[g] as usize;
                if first_of[b] == UNSET {
                    first_of[b] = g;
                } else {
                    group_dsu.union(first_of[b], g);
                }
            }
        }
        for r in 0..total {
            if open[r] || dsu.find(r) != r {
                continue;
            }
            let mut lead = UNSET;
            for g in 0..n {
                if counts[r * n + g] >= thr {
                    decided[g] = 1;
                    if lead == UNSET {
                        lead = g;
                    } else {
                        group_dsu.union(lead, g);
                    }
                }
            }
        }

        // drop counts that can no longer matter
        let rem = if last { None } else { Some(&self.remaining[s]) };
        let open_roots: Vec<usize> = (0..total).filter(|&r| open[r]).collect();
        for g in 0..n {
            if decided[g] == 1 {
                for &r in &open_roots {
                    counts[r * n + g] = 0;
                }
                continue;
            }
            if let Some(&holder) = open_roots.iter().find(|&&r| counts[r * n + g] >= thr) {
                for &r in &open_roots {
                    if r != holder {
                        counts[r * n + g] = 0;
                    }
                }
                continue;
            }
            let sum: u32 = open_roots.iter().map(|&r| counts[r * n + g] as u32).sum();
            let future = rem.map_or(0, |rem| rem[g] as u32);
            if sum + future < thr as u32 {
                decided[g] = 1;
                for &r in &open_roots {
                    counts[r * n + g] = 0;
                }
            }
        }

        out.clear();
        if last {
            push_group_rgs(&mut group_dsu, n, out);
            return;
        }
        // frontier RGS, then counts per block in RGS order
        relabel(dsu, &fr, &mut sc.label, out);
        let nblocks = out.iter().map(|&b| b as usize + 1).max().unwrap_or(0);
        let mut block_root = vec![UNSET; nblocks];
        for (i, &node) in fr.iter().enumerate() {
            let b = out[i] as usize;
            if block_root[b] == UNSET {
                block_root[b] = dsu.find(node);
            }
        }
        for &r in &block_root {
            out.extend_from_slice(&counts[r * n..(r + 1) * n]);
        }
        push_group_rgs(&mut group_dsu, n, out);
        out.extend_from_slice(&decided);
    }
}

/// Restricted-growth labels of `nodes` by union-find root.
fn relabel(dsu: &mut Dsu, nodes: &[usize], label: &mut Vec<u8>, out: &mut Vec<u8>) {
    label.clear();
    label.resize(dsu_len(dsu), u8::MAX);
    out.clear();
    let mut next = 0u8;
    for &node in nodes {
        let r = dsu.find(node);
        if label[r] == u8::MAX {
            label[r] = next;
            next += 1;
        }
        out.push(label[r]);
    }
}

fn dsu_len(dsu: &Dsu) -> usize {
    dsu.len()
}

fn push_group_rgs(groups: &mut Dsu, n: usize, out: &mut Vec<u8>) {
    let mut label = [u8::MAX; 256];
    let mut next = 0u8;
    for g in 0..n {
        let r = groups.find(g);
        if label[r] == u8::MAX {
            label[r] = next;
            next += 1;
        }
        out.push(label[r]);
    }
}

fn layout(m: usize, profile: BoundaryProfile, s: usize) -> Layout {
    let (l, t) = (profile.left, profile.top);
    if s >= m * m {
        return Layout { col: vec![None; m], vert: None, len: 0 };
    }
    let (col, row) = (s % m, s / m);
    let mut off = 0;
    let mut cols = Vec::with_capacity(m);
    for c in 0..m {
        let present = if c < col { row < m - 1 } else { row >= 1 };
        if present {
            cols.push(Some(off));
            off += t;
        } else {
            cols.push(None);
        }
    }
    let vert = (col > 0).then(|| {
        let o = off;
        off += l;
        o
    });
    Layout { col: cols, vert, len: off }
}

const BUILD_CHUNK: usize = 512;

impl CompositionPlan {
    /// Compiles the transition tables for `M × M` words over `alphabet`.
    pub fn build(alphabet: &Alphabet, m: usize, code: CodeKind, opts: &PlanOptions) -> Result<CompositionPlan> {
        validate_code(alphabet, code, Some(m))?;
        if m < 2 {
            return Err(Error::InvalidWord(format!("word size {m} < 2")));
        }
        let kernel = Kernel::new(alphabet, m, code);
        let letters: Vec<&Letter> = alphabet.letters().iter().collect();
        let nl = letters.len();
        let steps = kernel.steps();
        let mut states: Vec<Vec<Box<[u8]>>> = vec![vec![kernel.initial_state()]];
        let mut tables = Vec::with_capacity(steps);
        for s in 0..steps {
            let current = &states[s];
            let last = s + 1 == steps;
            let mut dict: HashMap<Box<[u8]>, u32> = HashMap::new();
            let mut next_states: Vec<Box<[u8]>> = Vec::new();
            let mut table = Vec::with_capacity(current.len() * nl);
            for chunk in current.chunks(BUILD_CHUNK) {
                let keys: Vec<Vec<Vec<u8>>> = chunk
                    .par_iter()
                    .map_init(Scratch::default, |sc, key| {
                        letters
                            .iter()
                            .map(|l| {
                                let mut out = Vec::new();
                                kernel.next(s, key, l, sc, &mut out);
                                out
                            })
                            .collect()
                    })
                    .collect();
                for row in keys {
                    for k in row {
                        if last {
                            table.push(kernel.output_id(&k)?);
                        } else if let Some(&id) = dict.get(k.as_slice()) {
                            table.push(id);
                        } else {
                            let id = next_states.len() as u32;
                            let boxed: Box<[u8]> = k.into();
                            dict.insert(boxed.clone(), id);
                            next_states.push(boxed);
                            table.push(id);
                        }
                    }
                }
                if next_states.len() > opts.state_cap {
                    return Err(Error::StateCap { step: s + 1, count: next_states.len(), cap: opts.state_cap });
                }
            }
            if opts.verbose {
                if last {
                    eprintln!("step {}/{}: {} states -> letters", s + 1, steps, current.len());
                } else {
                    eprintln!("step {}/{}: {} states -> {} states", s + 1, steps, current.len(), next_states.len());
                }
            }
            tables.push(table);
            if !last {
                states.push(next_states);
            }
        }
        let mut plan = CompositionPlan {
            m,
            profile: alphabet.profile(),
            code,
            alphabet_kind: alphabet.kind(),
            letters: nl,
            alphabet_checksum: alphabet_checksum(alphabet),
            states,
            tables,
            checksum: [0; 32],
        };
        plan.checksum = plan.compute_checksum();
        Ok(plan)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn profile(&self) -> BoundaryProfile {
        self.profile
    }

    pub fn code(&self) -> CodeKind {
        self.code
    }

    pub fn alphabet_kind(&self) -> AlphabetKind {
        self.alphabet_kind
    }

    /// Number of letters in the alphabet the plan was built for.
    pub fn alphabet_len(&self) -> usize {
        self.letters
    }

    pub fn steps(&self) -> usize {
        self.tables.len()
    }

    /// States before cell `s`.
    pub fn state_count(&self, s: usize) -> usize {
        self.states[s].len()
    }

    pub fn total_states(&self) -> usize {
        self.states.iter().map(Vec::len).sum()
    }

    /// Successors of `state` at step `s`, indexed by letter.
    #[inline]
    pub fn row(&self, s: usize, state: usize) -> &[u32] {
        &self.tables[s][state * self.letters..(state + 1) * self.letters]
    }

    /// SHA-256 over the serialized plan.
    pub fn checksum(&self) -> [u8; 32] {
        self.checksum
    }

    pub fn checksum_hex(&self) -> String {
        hex::encode(self.checksum)
    }

    pub fn alphabet_checksum(&self) -> [u8; 32] {
        self.alphabet_checksum
    }

    /// Whether `alphabet` is the one the tables were compiled for.
    pub fn matches(&self, alphabet: &Alphabet) -> bool {
        alphabet.len() == self.letters
            && alphabet.profile() == self.profile
            && alphabet.kind() == self.alphabet_kind
            && alphabet_checksum(alphabet) == self.alphabet_checksum
    }

    pub(crate) fn check_alphabet(&self, alphabet: &Alphabet) -> Result<()> {
        if self.matches(alphabet) {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch { expected: self.letters, got: alphabet.len() })
        }
    }

    /// Follows one word through the tables.
    pub fn code_word(&self, cells: &[LetterId]) -> Result<LetterId> {
        if cells.len() != self.steps() {
            return Err(Error::InvalidWord(format!("{} cells for a {}x{} plan", cells.len(), self.m, self.m)));
        }
        let mut state = 0u32;
        for (s, &a) in cells.iter().enumerate() {
            if a as usize >= self.letters {
                return Err(Error::InvalidWord(format!("letter id {a}")));
            }
            state = self.row(s, state as usize)[a as usize];
        }
        Ok(state)
    }

    fn compute_checksum(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        super::cache::write_body(self, &mut HashWriter(&mut h)).expect("hashing cannot fail");
        h.finalize().into()
    }
}

pub(crate) struct HashWriter<'a>(pub &'a mut Sha256);

impl std::io::Write for HashWriter<'_> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

pub fn alphabet_checksum(alphabet: &Alphabet) -> [u8; 32] {
    let mut h = Sha256::new();
    let p = alphabet.profile();
    h.update(format!("profile {} {} {} {}\n", p.left, p.top, p.right, p.bottom));
    for l in alphabet.letters() {
        h.update(l.as_rgs());
        h.update([0xff]);
    }
    h.finalize().into()
}
