//! Words of letters and the word codes that map them back to letters.
//!
//! A word is an `M × M` grid of letters tiling `[0,M]²`. Cells are indexed
//! row-major from the origin corner: `cells[row * M + col]`, row 0 at the
//! bottom. Gluing the letters along shared edges gives an equivalence
//! relation on the word's own boundary, which the weak and strong codes then
//! compress onto the letter profile by grouping `M` consecutive boundary
//! elements per parent element.

mod cache;
mod plan;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alphabet::{is_non_crossing, Alphabet, AlphabetKind, BoundaryProfile, Letter, LetterId};
use crate::error::{Error, Result};

pub use cache::{default_cache_dir, CACHE_FORMAT_VERSION};
pub use plan::{alphabet_checksum, CompositionPlan, PlanOptions, DEFAULT_STATE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    /// `Φ`: groups joined by chains of connected groups.
    Weak,
    /// `Ψ`: groups joined when one class holds a strict majority of both.
    Strong,
    /// Two-letter code: `max` iff all four side groups are strongly
    /// connected.
    StrongAllSides,
    /// `Ψ_{4,0}` applied to `4 × 4` words whose cells follow two levels of
    /// `M = 2` fractal percolation.
    EmbeddedM2Via4,
}

impl CodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            CodeKind::Weak => "weak",
            CodeKind::Strong => "strong",
            CodeKind::StrongAllSides => "strong_all_sides",
            CodeKind::EmbeddedM2Via4 => "embedded_m2_via_4",
        }
    }

    /// Whether the underlying connectivity rule is the strong one.
    pub fn is_strong(&self) -> bool {
        !matches!(self, CodeKind::Weak)
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(CodeKind::Weak),
            "strong" => Ok(CodeKind::Strong),
            "strong_all_sides" | "strong-all-sides" => Ok(CodeKind::StrongAllSides),
            "embedded_m2_via_4" | "embedded-m2-via-4" | "embedded" => Ok(CodeKind::EmbeddedM2Via4),
            _ => Err(Error::Config(format!("unknown code kind {s:?}"))),
        }
    }
}

/// An `M × M` word of letter ids over one alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordGrid {
    m: usize,
    cells: Vec<LetterId>,
}

impl WordGrid {
    /// `cells` in row-major order, bottom row first.
    pub fn new(m: usize, cells: Vec<LetterId>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidWord(format!("word size {m} < 2")));
        }
        if cells.len() != m * m {
            return Err(Error::InvalidWord(format!("{} cells for a {m}x{m} word", cells.len())));
        }
        Ok(WordGrid { m, cells })
    }

    /// Rows listed top to bottom, as a word is usually drawn.
    pub fn from_rows_top_down(rows: &[&[LetterId]]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidWord("word is not square".into()));
        }
        let cells = rows.iter().rev().flat_map(|r| r.iter().copied()).collect();
        Self::new(m, cells)
    }

    pub fn filled(m: usize, letter: LetterId) -> Result<Self> {
        Self::new(m, vec![letter; m * m])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> &[LetterId] {
        &self.cells
    }

    pub fn get(&self, col: usize, row: usize) -> LetterId {
        self.cells[row * self.m + col]
    }
}

/// Location of a letter element inside a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct CellElement {
    pub col: usize,
    pub row: usize,
    pub element: usize,
}

/// Index bookkeeping for `M × M` words over one profile.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WordGeometry {
    pub m: usize,
    pub profile: BoundaryProfile,
}

impl WordGeometry {
    pub fn new(m: usize, profile: BoundaryProfile) -> Self {
        WordGeometry { m, profile }
    }

    pub fn n(&self) -> usize {
        self.profile.total()
    }

    fn lt(&self) -> (usize, usize) {
        (self.profile.left, self.profile.top)
    }

    /// Cell and letter element for word boundary element `e`.
    pub fn outer_to_cell(&self, e: usize) -> CellElement {
        let m = self.m;
        let (l, t) = self.lt();
        if e < m * l {
            CellElement { col: 0, row: e / l, element: e % l }
        } else if e < m * (l + t) {
            let j = e - m * l;
            CellElement { col: j / t, row: m - 1, element: l + j % t }
        } else if e < m * (2 * l + t) {
            let k = e - m * (l + t);
            CellElement { col: m - 1, row: m - 1 - k / l, element: l + t + k % l }
        } else {
            let q = e - m * (2 * l + t);
            CellElement { col: m - 1 - q / t, row: 0, element: 2 * l + t + q % t }
        }
    }

    /// Word boundary index of a letter element, if it lies on the outer
    /// boundary of the word.
    pub fn cell_to_outer(&self, col: usize, row: usize, element: usize) -> Option<usize> {
        let m = self.m;
        let (l, t) = self.lt();
        if element < l {
            (col == 0).then(|| row * l + element)
        } else if element < l + t {
            (row == m - 1).then(|| m * l + col * t + (element - l))
        } else if element < 2 * l + t {
            (col == m - 1).then(|| m * (l + t) + (m - 1 - row) * l + (element - l - t))
        } else {
            (row == 0).then(|| m * (2 * l + t) + (m - 1 - col) * t + (element - 2 * l - t))
        }
    }

    /// Pairs of letter elements identified across the shared edge of
    /// horizontally adjacent cells: `(right side element of the left cell,
    /// left side element of the right cell)`.
    pub fn horizontal_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let (l, t) = self.lt();
        (0..l).map(move |k| (l + t + k, l - 1 - k))
    }

    /// `(top element of the lower cell, bottom element of the upper cell)`.
    pub fn vertical_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let (l, t) = self.lt();
        (0..t).map(move |j| (l + j, 2 * l + t + (t - 1 - j)))
    }

    /// Parent element (group) of a word boundary element.
    pub fn group_of(&self, outer: usize) -> usize {
        outer / self.m
    }
}

/// Minimal union-find used by word assembly.
#[derive(Debug, Clone)]
pub(crate) struct Dsu {
    parent: Vec<u32>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu { parent: (0..n as u32).collect() }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn reset(&mut self, n: usize) {
        self.parent.clear();
        self.parent.extend(0..n as u32);
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index stays root so roots are stable across runs
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo as u32;
        }
    }
}

/// The equivalence relation a word induces on its own boundary `E_w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordBoundaryRelation {
    m: usize,
    profile: BoundaryProfile,
    relation: Letter,
}

impl WordBoundaryRelation {
    /// Relation over the word boundary as a letter of the scaled profile.
    pub fn relation(&self) -> &Letter {
        &self.relation
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The letter profile (one cell), not the scaled word profile.
    pub fn profile(&self) -> BoundaryProfile {
        self.profile
    }
}

/// Groups of `M` consecutive word boundary elements, one per parent element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupingScheme {
    m: usize,
    profile: BoundaryProfile,
}

impl GroupingScheme {
    pub fn new(m: usize, profile: BoundaryProfile) -> Self {
        GroupingScheme { m, profile }
    }

    pub fn for_relation(rel: &WordBoundaryRelation) -> Self {
        Self::new(rel.m, rel.profile)
    }

    pub fn group_count(&self) -> usize {
        self.profile.total()
    }

    pub fn group_size(&self) -> usize {
        self.m
    }

    pub fn group_of(&self, outer: usize) -> usize {
        outer / self.m
    }

    pub fn members(&self, group: usize) -> std::ops::Range<usize> {
        group * self.m..(group + 1) * self.m
    }

    fn check(&self, rel: &WordBoundaryRelation) -> Result<()> {
        if rel.m != self.m || rel.profile != self.profile {
            return Err(Error::ProfileMismatch(format!(
                "grouping for M={} {} applied to relation for M={} {}",
                self.m, self.profile, rel.m, rel.profile
            )));
        }
        Ok(())
    }
}

/// Glues the cells of a word and restricts the result to the word boundary.
pub fn assemble_word(alphabet: &Alphabet, grid: &WordGrid) -> Result<WordBoundaryRelation> {
    let m = grid.m();
    let profile = alphabet.profile();
    let n = profile.total();
    let geo = WordGeometry::new(m, profile);
    if let Some(&bad) = grid.cells().iter().find(|&&c| c as usize >= alphabet.len()) {
        return Err(Error::InvalidWord(format!("letter id {bad} not in alphabet of {}", alphabet.len())));
    }
    let node = |col: usize, row: usize, e: usize| (row * m + col) * n + e;
    let mut dsu = Dsu::new(m * m * n);
    for row in 0..m {
        for col in 0..m {
            let letter = alphabet.letter(grid.get(col, row));
            let mut first = [usize::MAX; 256];
            for e in 0..n {
                let b = letter.block_of(e);
                if first[b] == usize::MAX {
                    first[b] = e;
                } else {
                    dsu.union(node(col, row, first[b]), node(col, row, e));
                }
            }
            if col + 1 < m {
                for (a, b) in geo.horizontal_pairs() {
                    dsu.union(node(col, row, a), node(col + 1, row, b));
                }
            }
            if row + 1 < m {
                for (a, b) in geo.vertical_pairs() {
                    dsu.union(node(col, row, a), node(col, row + 1, b));
                }
            }
        }
    }
    let roots: Vec<usize> = (0..m * n)
        .map(|e| {
            let c = geo.outer_to_cell(e);
            dsu.find(node(c.col, c.row, c.element))
        })
        .collect();
    let relation = Letter::from_labels(&roots);
    debug_assert!(is_non_crossing(relation.as_rgs()));
    Ok(WordBoundaryRelation { m, profile, relation })
}

/// `Φ`: parents `i ~ j` iff their groups are joined by a chain of groups that
/// share a class.
pub fn weak_code(rel: &WordBoundaryRelation, grouping: &GroupingScheme) -> Result<Letter> {
    grouping.check(rel)?;
    let n = grouping.group_count();
    let classes = rel.relation.block_count();
    // nodes: groups 0..n, classes n..n+classes
    let mut dsu = Dsu::new(n + classes);
    for e in 0..rel.relation.len() {
        dsu.union(grouping.group_of(e), n + rel.relation.block_of(e));
    }
    let labels: Vec<usize> = (0..n).map(|g| dsu.find(g)).collect();
    Ok(Letter::from_labels(&labels))
}

/// Class holding a strict majority of each group, if any.
fn majority_classes(rel: &WordBoundaryRelation, grouping: &GroupingScheme) -> Vec<Option<usize>> {
    let m = grouping.group_size();
    (0..grouping.group_count())
        .map(|g| {
            let mut counts = std::collections::HashMap::new();
            for e in grouping.members(g) {
                *counts.entry(rel.relation.block_of(e)).or_insert(0usize) += 1;
            }
            counts.into_iter().find(|&(_, c)| 2 * c > m).map(|(b, _)| b)
        })
        .collect()
}

/// `Ψ`: parents `i ~ j` iff one class contains strictly more than half of
/// both groups.
pub fn strong_code(rel: &WordBoundaryRelation, grouping: &GroupingScheme) -> Result<Letter> {
    grouping.check(rel)?;
    let n = grouping.group_count();
    let m = grouping.group_size();
    let rgs = rel.relation.as_rgs();
    let members: Vec<Vec<u8>> = (0..n).map(|g| grouping.members(g).map(|e| rgs[e]).collect()).collect();
    let strongly = |i: usize, j: usize| {
        (0..rel.relation.block_count() as u8).any(|b| {
            let ci = members[i].iter().filter(|&&x| x == b).count();
            let cj = members[j].iter().filter(|&&x| x == b).count();
            2 * ci > m && 2 * cj > m
        })
    };
    let mut related = vec![vec![false; n]; n];
    for i in 0..n {
        related[i][i] = true;
        for j in i + 1..n {
            let r = strongly(i, j);
            related[i][j] = r;
            related[j][i] = r;
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if related[i][j] && related[j][k] && !related[i][k] {
                    return Err(Error::StrongNotTransitive(format!(
                        "relation {} groups {i},{j},{k}",
                        rel.relation
                    )));
                }
            }
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| (0..n).find(|&j| related[i][j]).unwrap_or(i)).collect();
    let out = Letter::from_labels(&labels);
    debug_assert_eq!(out, strong_code_by_majority(rel, grouping));
    Ok(out)
}

fn strong_code_by_majority(rel: &WordBoundaryRelation, grouping: &GroupingScheme) -> Letter {
    let maj = majority_classes(rel, grouping);
    let labels: Vec<usize> =
        maj.iter().enumerate().map(|(g, c)| c.map_or(usize::MAX - g, |b| b)).collect();
    Letter::from_labels(&labels)
}

/// `true` (`max`) iff all four side groups are pairwise strongly connected.
pub fn strong_all_sides_code(rel: &WordBoundaryRelation, grouping: &GroupingScheme) -> Result<bool> {
    if rel.profile != BoundaryProfile::uniform(1)? {
        return Err(Error::UnsupportedCode {
            code: CodeKind::StrongAllSides.to_string(),
            reason: format!("needs profile 1,1,1,1, got {}", rel.profile),
        });
    }
    let out = strong_code(rel, grouping)?;
    Ok(out.block_count() == 1)
}

/// Maps a code output onto a two-letter target: weak codes round up (any
/// connection becomes `max`), strong codes round down.
pub(crate) fn project_to_extremes(strong: bool, output: &Letter) -> bool {
    if strong {
        output.block_count() == 1
    } else {
        output.block_count() < output.len()
    }
}

/// Anything that maps a word to a letter of its alphabet.
pub trait WordCoder {
    fn code_word(&self, grid: &WordGrid) -> Result<LetterId>;
}

impl WordCoder for DirectCoder<'_> {
    fn code_word(&self, grid: &WordGrid) -> Result<LetterId> {
        DirectCoder::code_word(self, grid)
    }
}

impl WordCoder for CompositionPlan {
    fn code_word(&self, grid: &WordGrid) -> Result<LetterId> {
        if grid.m() != self.m() {
            return Err(Error::InvalidWord(format!("{0}x{0} word for a {1}x{1} plan", grid.m(), self.m())));
        }
        CompositionPlan::code_word(self, grid.cells())
    }
}

/// Evaluates a word code on one word by direct assembly, without tables.
#[derive(Debug, Clone, Copy)]
pub struct DirectCoder<'a> {
    alphabet: &'a Alphabet,
    code: CodeKind,
}

impl<'a> DirectCoder<'a> {
    pub fn new(alphabet: &'a Alphabet, code: CodeKind) -> Result<Self> {
        validate_code(alphabet, code, None)?;
        Ok(DirectCoder { alphabet, code })
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.alphabet
    }

    pub fn code(&self) -> CodeKind {
        self.code
    }

    pub fn output_letter(&self, grid: &WordGrid) -> Result<Letter> {
        let rel = assemble_word(self.alphabet, grid)?;
        let grouping = GroupingScheme::for_relation(&rel);
        if self.code.is_strong() {
            strong_code(&rel, &grouping)
        } else {
            weak_code(&rel, &grouping)
        }
    }

    pub fn code_word(&self, grid: &WordGrid) -> Result<LetterId> {
        let out = self.output_letter(grid)?;
        match self.alphabet.kind() {
            AlphabetKind::Extremes => {
                let up = project_to_extremes(self.code.is_strong(), &out);
                Ok(if up { self.alphabet.max() } else { self.alphabet.min() })
            }
            _ => self.alphabet.id_of(&out).ok_or_else(|| {
                Error::InvalidLetter(format!("code output {out} missing from alphabet"))
            }),
        }
    }
}

/// Checks that a code is meaningful for an alphabet and word size.
pub(crate) fn validate_code(alphabet: &Alphabet, code: CodeKind, m: Option<usize>) -> Result<()> {
    let unsupported = |reason: String| Err(Error::UnsupportedCode { code: code.to_string(), reason });
    if alphabet.kind() == AlphabetKind::Subset {
        return unsupported("word codes need the full alphabet or {min, max}".into());
    }
    match code {
        CodeKind::StrongAllSides => {
            if alphabet.kind() != AlphabetKind::Extremes || alphabet.profile() != BoundaryProfile::uniform(1)? {
                return unsupported("requires the two-letter alphabet over profile 1,1,1,1".into());
            }
        }
        CodeKind::EmbeddedM2Via4 => {
            if alphabet.profile() != BoundaryProfile::uniform(1)? {
                return unsupported("requires profile 1,1,1,1".into());
            }
            if m.is_some_and(|m| m != 4) {
                return unsupported("words are 4x4".into());
            }
        }
        CodeKind::Weak | CodeKind::Strong => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Alphabet {
        Alphabet::enumerate(BoundaryProfile::uniform(1).unwrap()).unwrap()
    }

    #[test]
    fn geometry_round_trip() {
        for profile in [BoundaryProfile::uniform(1).unwrap(), BoundaryProfile::new(3, 1, 3, 1).unwrap()] {
            for m in 2..=4 {
                let geo = WordGeometry::new(m, profile);
                for e in 0..m * profile.total() {
                    let c = geo.outer_to_cell(e);
                    assert_eq!(geo.cell_to_outer(c.col, c.row, c.element), Some(e));
                }
            }
        }
    }

    #[test]
    fn uniform_words() {
        let a = square();
        for m in 2..=3 {
            let coder = DirectCoder::new(&a, CodeKind::Weak).unwrap();
            let rel = assemble_word(&a, &WordGrid::filled(m, a.min()).unwrap()).unwrap();
            assert_eq!(rel.relation(), &Letter::singletons(4 * m));
            let rel = assemble_word(&a, &WordGrid::filled(m, a.max()).unwrap()).unwrap();
            assert_eq!(rel.relation(), &Letter::full(4 * m));
            assert_eq!(coder.code_word(&WordGrid::filled(m, a.max()).unwrap()).unwrap(), a.max());
            assert_eq!(coder.code_word(&WordGrid::filled(m, a.min()).unwrap()).unwrap(), a.min());
        }
    }

    #[test]
    fn corner_max_joins_left_and_top() {
        let a = square();
        let (mx, mn) = (a.max(), a.min());
        let grid = WordGrid::from_rows_top_down(&[&[mx, mn], &[mn, mn]]).unwrap();
        let rel = assemble_word(&a, &grid).unwrap();
        // word boundary: left 0,1 (bottom to top), top 2,3, right 4,5, bottom 6,7
        let r = rel.relation();
        assert!(r.same_block(1, 2));
        assert!(!r.same_block(1, 4));
        assert_eq!(r.block_count(), 7);
        let out = weak_code(&rel, &GroupingScheme::for_relation(&rel)).unwrap();
        assert_eq!(out, Letter::from_labels(&[0, 0, 1, 2]));
        let out = strong_code(&rel, &GroupingScheme::for_relation(&rel)).unwrap();
        assert_eq!(out, Letter::singletons(4));
    }

    #[test]
    fn weak_two_letter_is_any_max() {
        let a = Alphabet::extremes(BoundaryProfile::uniform(1).unwrap());
        let coder = DirectCoder::new(&a, CodeKind::Weak).unwrap();
        for mask in 0..16u32 {
            let cells = (0..4).map(|i| if mask >> i & 1 == 1 { a.max() } else { a.min() }).collect();
            let grid = WordGrid::new(2, cells).unwrap();
            let expected = if mask != 0 { a.max() } else { a.min() };
            assert_eq!(coder.code_word(&grid).unwrap(), expected);
        }
    }

    #[test]
    fn strong_m2_needs_both_elements() {
        // M = 2: a majority of a 2-element group is the whole group
        let a = square();
        let coder = DirectCoder::new(&a, CodeKind::Strong).unwrap();
        let lr = a.id_of(&Letter::from_labels(&[0, 1, 0, 2])).unwrap();
        // two stacked horizontal bars: left side joined to right side
        let grid = WordGrid::from_rows_top_down(&[&[lr, lr], &[lr, lr]]).unwrap();
        let out = coder.output_letter(&grid).unwrap();
        assert_eq!(out, Letter::singletons(4));
        // a full top row joins left top element only: still no majority
        let grid = WordGrid::from_rows_top_down(&[&[a.max(), a.max()], &[lr, lr]]).unwrap();
        let out = coder.output_letter(&grid).unwrap();
        assert!(!out.same_block(1, 3));
    }

    #[test]
    fn strong_all_sides_requires_square_profile() {
        let a = Alphabet::extremes(BoundaryProfile::uniform(2).unwrap());
        assert!(DirectCoder::new(&a, CodeKind::StrongAllSides).is_err());
        let a = square();
        assert!(DirectCoder::new(&a, CodeKind::StrongAllSides).is_err());
    }

    #[test]
    fn strong_all_sides_polynomial_by_enumeration() {
        let a = Alphabet::extremes(BoundaryProfile::uniform(1).unwrap());
        // count words with max by number of dead cells
        let mut by_dead = [0u32; 10];
        for mask in 0u32..512 {
            let cells = (0..9).map(|i| if mask >> i & 1 == 1 { a.max() } else { a.min() }).collect();
            let rel = assemble_word(&a, &WordGrid::new(3, cells).unwrap()).unwrap();
            if strong_all_sides_code(&rel, &GroupingScheme::for_relation(&rel)).unwrap() {
                by_dead[9 - mask.count_ones() as usize] += 1;
            }
        }
        assert_eq!(&by_dead[..], &[1, 9, 20, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn grouping_mismatch_is_rejected() {
        let a = square();
        let rel = assemble_word(&a, &WordGrid::filled(2, a.max()).unwrap()).unwrap();
        let g = GroupingScheme::new(3, a.profile());
        assert!(weak_code(&rel, &g).is_err());
    }
}
