//! Independent oracles shared by the integration tests. Boundary elements
//! are placed by coordinates and glued by geometric overlap, never by the
//! library's index arithmetic.

#![allow(dead_code)]

use std::collections::HashMap;

use pcbounds::alphabet::{Alphabet, BoundaryProfile, Letter, LetterId};
use rand::Rng;

/// Axis-aligned boundary segment with integer endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Seg {
    /// `x` fixed, `y` in `[lo, hi]`.
    V { x: i64, lo: i64, hi: i64 },
    /// `y` fixed, `x` in `[lo, hi]`.
    H { y: i64, lo: i64, hi: i64 },
}

impl Seg {
    pub fn shift(self, dx: i64, dy: i64) -> Seg {
        match self {
            Seg::V { x, lo, hi } => Seg::V { x: x + dx, lo: lo + dy, hi: hi + dy },
            Seg::H { y, lo, hi } => Seg::H { y: y + dy, lo: lo + dx, hi: hi + dx },
        }
    }

    pub fn scale(self, k: i64) -> Seg {
        match self {
            Seg::V { x, lo, hi } => Seg::V { x: x * k, lo: lo * k, hi: hi * k },
            Seg::H { y, lo, hi } => Seg::H { y: y * k, lo: lo * k, hi: hi * k },
        }
    }

    /// Shares a piece of positive length with `other`.
    pub fn overlaps(self, other: Seg) -> bool {
        match (self, other) {
            (Seg::V { x: a, lo: l1, hi: h1 }, Seg::V { x: b, lo: l2, hi: h2 })
            | (Seg::H { y: a, lo: l1, hi: h1 }, Seg::H { y: b, lo: l2, hi: h2 }) => {
                a == b && l1.max(l2) < h1.min(h2)
            }
            _ => false,
        }
    }

    pub fn contains(self, other: Seg) -> bool {
        match (self, other) {
            (Seg::V { x: a, lo: l1, hi: h1 }, Seg::V { x: b, lo: l2, hi: h2 })
            | (Seg::H { y: a, lo: l1, hi: h1 }, Seg::H { y: b, lo: l2, hi: h2 }) => {
                a == b && l1 <= l2 && h2 <= h1
            }
            _ => false,
        }
    }

    /// Clockwise position of the segment's start on the boundary of `[0, s]²`,
    /// starting at the origin and going up the left side.
    pub fn clockwise_key(self, s: i64) -> Option<i64> {
        match self {
            Seg::V { x: 0, lo, .. } => Some(lo),
            Seg::H { y, lo, .. } if y == s => Some(s + lo),
            Seg::V { x, hi, .. } if x == s => Some(2 * s + (s - hi)),
            Seg::H { y: 0, hi, .. } => Some(3 * s + (s - hi)),
            _ => None,
        }
    }

    /// Image under a symmetry of `[0, s]²`.
    pub fn transform(self, sym: Symmetry, s: i64) -> Seg {
        let (a, b) = match self {
            Seg::V { x, lo, hi } => ((x, lo), (x, hi)),
            Seg::H { y, lo, hi } => ((lo, y), (hi, y)),
        };
        let (a, b) = (sym.apply(a, s), sym.apply(b, s));
        if a.0 == b.0 {
            Seg::V { x: a.0, lo: a.1.min(b.1), hi: a.1.max(b.1) }
        } else {
            Seg::H { y: a.1, lo: a.0.min(b.0), hi: a.0.max(b.0) }
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Side length making every element endpoint of `profile` an integer.
pub fn unit(profile: BoundaryProfile) -> i64 {
    [profile.left, profile.top, profile.right, profile.bottom]
        .iter()
        .fold(1i64, |acc, &c| acc / gcd(acc, c as i64) * c as i64)
}

/// Element segments of a cell `[0, u]²`, in letter order.
pub fn cell_segments(profile: BoundaryProfile, u: i64) -> Vec<Seg> {
    let (l, t, r, b) = (profile.left as i64, profile.top as i64, profile.right as i64, profile.bottom as i64);
    let mut out = Vec::new();
    for j in 0..l {
        out.push(Seg::V { x: 0, lo: j * u / l, hi: (j + 1) * u / l });
    }
    for j in 0..t {
        out.push(Seg::H { y: u, lo: j * u / t, hi: (j + 1) * u / t });
    }
    for j in 0..r {
        out.push(Seg::V { x: u, lo: u - (j + 1) * u / r, hi: u - j * u / r });
    }
    for j in 0..b {
        out.push(Seg::H { y: 0, lo: u - (j + 1) * u / b, hi: u - j * u / b });
    }
    out
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Outer boundary relation of a word, in clockwise order, plus the parent
/// group of each outer element. `cells[row][col]`, row 0 at the bottom.
pub struct GluedWord {
    pub classes: Vec<usize>,
    pub groups: Vec<usize>,
    pub group_count: usize,
}

pub fn glue_word(alphabet: &Alphabet, cells: &[Vec<LetterId>]) -> GluedWord {
    let m = cells.len() as i64;
    let profile = alphabet.profile();
    let u = unit(profile);
    let base = cell_segments(profile, u);
    let per = base.len();
    let mut segs = Vec::new();
    let mut dsu = Dsu::new(cells.len() * cells.len() * per);
    for (row, line) in cells.iter().enumerate() {
        for (col, &id) in line.iter().enumerate() {
            let offset = (row * cells.len() + col) * per;
            let letter = alphabet.letter(id);
            for i in 0..per {
                for j in 0..i {
                    if letter.same_block(i, j) {
                        dsu.union(offset + i, offset + j);
                    }
                }
                segs.push(base[i].shift(col as i64 * u, row as i64 * u));
            }
        }
    }
    for i in 0..segs.len() {
        for j in 0..i {
            if segs[i].overlaps(segs[j]) {
                dsu.union(i, j);
            }
        }
    }
    let side = m * u;
    let mut outer: Vec<(i64, usize)> =
        segs.iter().enumerate().filter_map(|(i, s)| s.clockwise_key(side).map(|k| (k, i))).collect();
    outer.sort();
    let parents: Vec<Seg> = base.iter().map(|s| s.scale(m)).collect();
    let groups = outer
        .iter()
        .map(|&(_, i)| parents.iter().position(|p| p.contains(segs[i])).expect("outer element inside a parent"))
        .collect();
    GluedWord { classes: outer.iter().map(|&(_, i)| dsu.find(i)).collect(), groups, group_count: per }
}

/// Groups joined through chains of groups sharing a class.
pub fn weak_oracle(w: &GluedWord) -> Letter {
    let mut dsu = Dsu::new(w.group_count);
    let mut first: HashMap<usize, usize> = HashMap::new();
    for (e, &c) in w.classes.iter().enumerate() {
        let g = w.groups[e];
        match first.get(&c) {
            Some(&h) => dsu.union(g, h),
            None => {
                first.insert(c, g);
            }
        }
    }
    let labels: Vec<usize> = (0..w.group_count).map(|g| dsu.find(g)).collect();
    Letter::from_labels(&labels)
}

/// Class holding strictly more than half of each group, if any.
pub fn majority_classes(w: &GluedWord) -> Vec<Option<usize>> {
    (0..w.group_count)
        .map(|g| {
            let members: Vec<usize> = (0..w.classes.len()).filter(|&e| w.groups[e] == g).map(|e| w.classes[e]).collect();
            let mut counts: HashMap<usize, usize> = HashMap::new();
            for c in &members {
                *counts.entry(*c).or_default() += 1;
            }
            counts.into_iter().find(|&(_, k)| 2 * k > members.len()).map(|(c, _)| c)
        })
        .collect()
}

/// Groups joined when one class holds a strict majority of both.
pub fn strong_oracle(w: &GluedWord) -> Letter {
    let maj = majority_classes(w);
    let labels: Vec<(usize, usize)> =
        maj.iter().enumerate().map(|(g, m)| m.map_or((1, g), |c| (0, c))).collect();
    Letter::from_labels(&labels)
}

/// Word of min/max cells rendered as pixels (max = filled `r × r` block,
/// min = empty) with 4-adjacency. Returns, for each side of the word and
/// each of its `m` unit segments, the component touching it.
pub fn pixel_sides(cells: &[Vec<bool>], r: usize) -> Vec<Vec<Option<usize>>> {
    let m = cells.len();
    let s = m * r;
    let filled = |x: usize, y: usize| cells[y / r][x / r];
    let mut dsu = Dsu::new(s * s);
    for y in 0..s {
        for x in 0..s {
            if !filled(x, y) {
                continue;
            }
            if x + 1 < s && filled(x + 1, y) {
                dsu.union(y * s + x, y * s + x + 1);
            }
            if y + 1 < s && filled(x, y + 1) {
                dsu.union(y * s + x, (y + 1) * s + x);
            }
        }
    }
    let mut comp = |x: usize, y: usize| if filled(x, y) { Some(dsu.find(y * s + x)) } else { None };
    let mid = r / 2;
    let mut sides = vec![Vec::new(); 4];
    for j in 0..m {
        sides[0].push(comp(0, j * r + mid));
        sides[1].push(comp(j * r + mid, s - 1));
        sides[2].push(comp(s - 1, s - 1 - (j * r + mid)));
        sides[3].push(comp(s - 1 - (j * r + mid), 0));
    }
    sides
}

/// Dihedral symmetries of a square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Symmetry {
    pub quarter_turns: u8,
    pub mirror: bool,
}

impl Symmetry {
    pub fn all() -> Vec<Symmetry> {
        (0..4).flat_map(|q| [false, true].map(|m| Symmetry { quarter_turns: q, mirror: m })).collect()
    }

    pub fn apply(self, (mut x, mut y): (i64, i64), s: i64) -> (i64, i64) {
        if self.mirror {
            x = s - x;
        }
        for _ in 0..self.quarter_turns {
            (x, y) = (y, s - x);
        }
        (x, y)
    }

    /// Maps cell `(col, row)` of an `m × m` word.
    pub fn apply_cell(self, col: usize, row: usize, m: usize) -> (usize, usize) {
        let (x, y) = self.apply((2 * col as i64 + 1, 2 * row as i64 + 1), 2 * m as i64);
        ((x / 2) as usize, (y / 2) as usize)
    }

    /// Transforms a letter of a uniform profile.
    pub fn letter(self, alphabet: &Alphabet, id: LetterId) -> LetterId {
        let profile = alphabet.profile();
        let u = unit(profile);
        let segs = cell_segments(profile, u);
        let letter = alphabet.letter(id);
        let mut labels = vec![0usize; segs.len()];
        for (e, s) in segs.iter().enumerate() {
            let img = s.transform(self, u);
            let f = segs.iter().position(|t| *t == img).expect("profile is symmetric");
            labels[f] = letter.block_of(e);
        }
        alphabet.id_of(&Letter::from_labels(&labels)).expect("transformed letter")
    }

    /// Transforms a word given as `cells[row][col]`.
    pub fn word(self, alphabet: &Alphabet, cells: &[Vec<LetterId>]) -> Vec<Vec<LetterId>> {
        let m = cells.len();
        let mut out = vec![vec![0; m]; m];
        for (row, line) in cells.iter().enumerate() {
            for (col, &id) in line.iter().enumerate() {
                let (c, r) = self.apply_cell(col, row, m);
                out[r][c] = self.letter(alphabet, id);
            }
        }
        out
    }
}

pub fn random_word(rng: &mut impl Rng, alphabet: &Alphabet, m: usize) -> Vec<Vec<LetterId>> {
    (0..m).map(|_| (0..m).map(|_| rng.random_range(0..alphabet.len() as LetterId)).collect()).collect()
}

pub fn flatten(cells: &[Vec<LetterId>]) -> Vec<LetterId> {
    cells.iter().flatten().copied().collect()
}

pub fn square() -> BoundaryProfile {
    BoundaryProfile::uniform(1).unwrap()
}
