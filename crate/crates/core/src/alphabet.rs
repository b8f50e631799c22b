//! Letters are non-crossing partitions of the subdivided boundary of the unit
//! square, ordered by refinement.
//!
//! Boundary elements are numbered clockwise from the corner `(0,0)`: the left
//! side bottom to top, the top side left to right, the right side top to
//! bottom and the bottom side right to left. A letter is stored as its
//! restricted-growth string: element `i` carries the id of its block, block
//! ids are assigned in order of first occurrence.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type LetterId = u32;

/// Default maximum number of boundary elements for full enumeration.
pub const ENUMERATION_CAP: usize = 16;

/// Default maximum alphabet size for [`Alphabet::upsets`].
pub const UPSET_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Top,
    Right,
    Bottom,
}

/// Number of boundary elements on each side of the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub left: usize,
    pub top: usize,
    pub right: usize,
    pub bottom: usize,
}

impl BoundaryProfile {
    pub fn new(left: usize, top: usize, right: usize, bottom: usize) -> Result<Self> {
        let p = BoundaryProfile { left, top, right, bottom };
        if left == 0 || top == 0 || right == 0 || bottom == 0 {
            return Err(Error::InvalidProfile(p.to_string(), "side counts must be positive"));
        }
        if left != right || top != bottom {
            return Err(Error::InvalidProfile(
                p.to_string(),
                "opposite sides must have equal counts",
            ));
        }
        if p.total() > u8::MAX as usize {
            return Err(Error::InvalidProfile(p.to_string(), "too many boundary elements"));
        }
        Ok(p)
    }

    pub fn uniform(per_side: usize) -> Result<Self> {
        Self::new(per_side, per_side, per_side, per_side)
    }

    /// The profile of `A_{M,k}`: every side split into `M^k` elements.
    pub fn for_level(m: usize, k: u32) -> Result<Self> {
        let c = m
            .checked_pow(k)
            .ok_or_else(|| Error::InvalidProfile(format!("M={m}, k={k}"), "overflow"))?;
        Self::uniform(c)
    }

    pub fn total(&self) -> usize {
        self.left + self.top + self.right + self.bottom
    }

    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::Left => self.left,
            Side::Top => self.top,
            Side::Right => self.right,
            Side::Bottom => self.bottom,
        }
    }

    /// Index of the first element of `side`.
    pub fn side_start(&self, side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Top => self.left,
            Side::Right => self.left + self.top,
            Side::Bottom => self.left + self.top + self.right,
        }
    }

    pub fn side_of(&self, element: usize) -> Side {
        if element < self.left {
            Side::Left
        } else if element < self.left + self.top {
            Side::Top
        } else if element < self.left + self.top + self.right {
            Side::Right
        } else {
            Side::Bottom
        }
    }

    /// Profile of the boundary of an `m × m` word of letters with this profile.
    pub fn scaled(&self, m: usize) -> BoundaryProfile {
        BoundaryProfile {
            left: self.left * m,
            top: self.top * m,
            right: self.right * m,
            bottom: self.bottom * m,
        }
    }
}

impl fmt::Display for BoundaryProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.left, self.top, self.right, self.bottom)
    }
}

impl FromStr for BoundaryProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidProfile(s.to_string(), "expected four integers"))?;
        match parts[..] {
            [l, t, r, b] => BoundaryProfile::new(l, t, r, b),
            _ => Err(Error::InvalidProfile(s.to_string(), "expected four integers")),
        }
    }
}

/// A partition of boundary elements in restricted-growth form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(Box<[u8]>);

impl Letter {
    /// Canonicalizes arbitrary block labels (one per element).
    pub fn from_labels<T: Copy + Eq + std::hash::Hash>(labels: &[T]) -> Letter {
        let mut ids: HashMap<T, u8> = HashMap::new();
        let rgs = labels
            .iter()
            .map(|l| {
                let next = ids.len() as u8;
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        Letter(rgs)
    }

    /// Accepts an already canonical restricted-growth string of a non-crossing
    /// partition.
    pub fn from_rgs(rgs: &[u8]) -> Result<Letter> {
        let mut next = 0u8;
        for &b in rgs {
            if b > next {
                return Err(Error::InvalidLetter(format!("{rgs:?} is not a restricted-growth string")));
            }
            if b == next {
                next += 1;
            }
        }
        if !is_non_crossing(rgs) {
            return Err(Error::InvalidLetter(format!("{rgs:?} is crossing")));
        }
        Ok(Letter(rgs.into()))
    }

    pub fn singletons(n: usize) -> Letter {
        Letter((0..n as u8).collect())
    }

    pub fn full(n: usize) -> Letter {
        Letter(vec![0; n].into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_rgs(&self) -> &[u8] {
        &self.0
    }

    pub fn block_of(&self, element: usize) -> usize {
        self.0[element] as usize
    }

    pub fn block_count(&self) -> usize {
        self.0.iter().map(|&b| b as usize + 1).max().unwrap_or(0)
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (i, &b) in self.0.iter().enumerate() {
            blocks[b as usize].push(i);
        }
        blocks
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.0[i] == self.0[j]
    }

    /// `self ⪯ other`: every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Letter) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut image = [u8::MAX; 256];
        for (&a, &b) in self.0.iter().zip(other.0.iter()) {
            let slot = &mut image[a as usize];
            if *slot == u8::MAX {
                *slot = b;
            } else if *slot != b {
                return false;
            }
        }
        true
    }

    /// Letter obtained by merging two blocks.
    pub fn merge_blocks(&self, a: usize, b: usize) -> Letter {
        let (a, b) = (a as u8, b as u8);
        let labels: Vec<u8> = self.0.iter().map(|&x| if x == b { a } else { x }).collect();
        Letter::from_labels(&labels)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in self.0.iter() {
            let c = std::char::from_digit(b as u32, 36).unwrap_or('?');
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rgs: Vec<u8> = s
            .trim()
            .chars()
            .map(|c| c.to_digit(36).map(|d| d as u8))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidLetter(s.to_string()))?;
        Letter::from_rgs(&rgs)
    }
}

/// Single stack scan: a block may only be revisited while it is still open.
pub fn is_non_crossing(labels: &[u8]) -> bool {
    let mut stack: Vec<u8> = Vec::new();
    let mut closed = [false; 256];
    let mut seen = [false; 256];
    for &b in labels {
        if !seen[b as usize] {
            seen[b as usize] = true;
            stack.push(b);
            continue;
        }
        if closed[b as usize] {
            return false;
        }
        while let Some(&top) = stack.last() {
            if top == b {
                break;
            }
            closed[top as usize] = true;
            stack.pop();
        }
    }
    true
}

/// Exact Catalan number `C(2n, n) / (n + 1)`.
pub fn catalan(n: u64) -> BigUint {
    let mut c = BigUint::from(1u32);
    // C_{k+1} = C_k * 2(2k+1) / (k+2)
    for k in 0..n {
        c = c * (2 * (2 * k + 1)) / (k + 2);
    }
    c
}

/// All non-crossing partitions of `n` elements in lexicographic RGS order.
pub fn non_crossing_partitions(n: usize) -> Vec<Letter> {
    fn rec(pos: usize, n: usize, rgs: &mut Vec<u8>, stack: &mut Vec<u8>, next: u8, out: &mut Vec<Letter>) {
        if pos == n {
            out.push(Letter(rgs.clone().into()));
            return;
        }
        for depth in 0..stack.len() {
            let b = stack[depth];
            let saved: Vec<u8> = stack[depth + 1..].to_vec();
            stack.truncate(depth + 1);
            rgs.push(b);
            rec(pos + 1, n, rgs, stack, next, out);
            rgs.pop();
            stack.extend_from_slice(&saved);
        }
        stack.push(next);
        rgs.push(next);
        rec(pos + 1, n, rgs, stack, next + 1, out);
        rgs.pop();
        stack.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::with_capacity(n), &mut Vec::new(), 0, &mut out);
    out
}

/// Which letters an alphabet contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphabetKind {
    /// Every non-crossing partition of the profile.
    Full,
    /// Only `min` and `max`.
    Extremes,
    /// An arbitrary subset containing `min` and `max`.
    Subset,
}

/// An immutable, indexed set of letters with the refinement order.
#[derive(Debug)]
pub struct Alphabet {
    profile: BoundaryProfile,
    kind: AlphabetKind,
    letters: Vec<Letter>,
    index: HashMap<Letter, LetterId>,
    min: LetterId,
    max: LetterId,
    covers: OnceLock<Vec<Vec<LetterId>>>,
}

impl Alphabet {
    /// Every non-crossing partition of the profile's boundary elements.
    pub fn enumerate(profile: BoundaryProfile) -> Result<Alphabet> {
        Self::enumerate_with_cap(profile, ENUMERATION_CAP)
    }

    pub fn enumerate_with_cap(profile: BoundaryProfile, cap: usize) -> Result<Alphabet> {
        let n = profile.total();
        if n > cap {
            return Err(Error::EnumerationCap { n, cap });
        }
        let letters = non_crossing_partitions(n);
        Ok(Self::from_letters(profile, AlphabetKind::Full, letters))
    }

    /// The two-letter alphabet `{min, max}` over a profile.
    pub fn extremes(profile: BoundaryProfile) -> Alphabet {
        let n = profile.total();
        let letters = vec![Letter::full(n), Letter::singletons(n)];
        Self::from_letters(profile, AlphabetKind::Extremes, letters)
    }

    /// A sub-poset of the full alphabet; must contain `min` and `max`.
    pub fn subset(profile: BoundaryProfile, letters: Vec<Letter>) -> Result<Alphabet> {
        let n = profile.total();
        for l in &letters {
            if l.len() != n || !is_non_crossing(l.as_rgs()) {
                return Err(Error::InvalidLetter(format!("{l} for profile {profile}")));
            }
        }
        let mut letters = letters;
        letters.sort();
        letters.dedup();
        if letters.binary_search(&Letter::full(n)).is_err()
            || letters.binary_search(&Letter::singletons(n)).is_err()
        {
            return Err(Error::InvalidLetter("subset must contain min and max".into()));
        }
        Ok(Self::from_letters(profile, AlphabetKind::Subset, letters))
    }

    pub fn build(profile: BoundaryProfile, kind: AlphabetKind) -> Result<Alphabet> {
        match kind {
            AlphabetKind::Full => Self::enumerate(profile),
            AlphabetKind::Extremes => Ok(Self::extremes(profile)),
            AlphabetKind::Subset => Err(Error::Config("subset alphabets are built from explicit letters".into())),
        }
    }

    fn from_letters(profile: BoundaryProfile, kind: AlphabetKind, mut letters: Vec<Letter>) -> Alphabet {
        letters.sort();
        let n = profile.total();
        let index: HashMap<Letter, LetterId> =
            letters.iter().enumerate().map(|(i, l)| (l.clone(), i as LetterId)).collect();
        let min = index[&Letter::singletons(n)];
        let max = index[&Letter::full(n)];
        Alphabet { profile, kind, letters, index, min, max, covers: OnceLock::new() }
    }

    pub fn profile(&self) -> BoundaryProfile {
        self.profile
    }

    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn min(&self) -> LetterId {
        self.min
    }

    pub fn max(&self) -> LetterId {
        self.max
    }

    pub fn letter(&self, id: LetterId) -> &Letter {
        &self.letters[id as usize]
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn id_of(&self, letter: &Letter) -> Option<LetterId> {
        self.index.get(letter).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = LetterId> {
        0..self.letters.len() as LetterId
    }

    /// `a ⪯ b`.
    pub fn leq(&self, a: LetterId, b: LetterId) -> bool {
        self.letter(a).refines(self.letter(b))
    }

    /// Compares letters that may come from different alphabets.
    pub fn leq_letters(&self, a: &Letter, b: &Letter) -> Result<bool> {
        let n = self.profile.total();
        if a.len() != n || b.len() != n {
            return Err(Error::ProfileMismatch(format!(
                "letters of length {} and {} for profile {}",
                a.len(),
                b.len(),
                self.profile
            )));
        }
        Ok(a.refines(b))
    }

    /// Membership in `A_π`: some block touches two different sides.
    pub fn two_sides_connected(&self, id: LetterId) -> bool {
        two_sides_connected(self.letter(id), &self.profile)
    }

    /// `A_π` as a membership vector.
    pub fn pi_set(&self) -> LetterSet {
        LetterSet::from_fn(self.len(), |id| self.two_sides_connected(id))
    }

    /// Letters directly above each letter in the refinement order.
    pub fn upper_covers(&self) -> &[Vec<LetterId>] {
        self.covers.get_or_init(|| {
            if self.kind != AlphabetKind::Full {
                return self.reduced_covers();
            }
            self.letters
                .iter()
                .map(|l| {
                    let k = l.block_count();
                    let mut ups = Vec::new();
                    for a in 0..k {
                        for b in a + 1..k {
                            if let Some(id) = self.id_of(&l.merge_blocks(a, b)) {
                                ups.push(id);
                            }
                        }
                    }
                    ups.sort_unstable();
                    ups
                })
                .collect()
        })
    }

    fn reduced_covers(&self) -> Vec<Vec<LetterId>> {
        let above = |a: LetterId, b: LetterId| a != b && self.leq(a, b);
        self.ids()
            .map(|a| {
                self.ids()
                    .filter(|&b| above(a, b) && !self.ids().any(|c| above(a, c) && above(c, b)))
                    .collect()
            })
            .collect()
    }

    /// Whether `set` is increasing (closed upward).
    pub fn is_upset(&self, set: &LetterSet) -> bool {
        let covers = self.upper_covers();
        self.ids().all(|a| !set.contains(a) || covers[a as usize].iter().all(|&b| set.contains(b)))
    }

    /// All increasing subsets, for small alphabets.
    pub fn upsets(&self) -> Result<Vec<LetterSet>> {
        self.upsets_with_cap(UPSET_CAP)
    }

    pub fn upsets_with_cap(&self, cap: usize) -> Result<Vec<LetterSet>> {
        if self.len() > cap {
            return Err(Error::UpsetCap { len: self.len(), cap });
        }
        // Fewer blocks means higher in the order; deciding letters top-down
        // lets each decision look only at already-decided upper covers.
        let mut order: Vec<LetterId> = self.ids().collect();
        order.sort_by_key(|&id| (self.letter(id).block_count(), id));
        let covers = self.upper_covers();
        let mut out = Vec::new();
        let mut current = LetterSet::empty(self.len());
        fn rec(
            pos: usize,
            order: &[LetterId],
            covers: &[Vec<LetterId>],
            current: &mut LetterSet,
            out: &mut Vec<LetterSet>,
        ) {
            if pos == order.len() {
                out.push(current.clone());
                return;
            }
            let a = order[pos];
            rec(pos + 1, order, covers, current, out);
            if covers[a as usize].iter().all(|&b| current.contains(b)) {
                current.insert(a);
                rec(pos + 1, order, covers, current, out);
                current.remove(a);
            }
        }
        rec(0, &order, covers, &mut current, &mut out);
        Ok(out)
    }

    /// Writes the dump format: `profile l t r b` then one RGS per line.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let p = self.profile;
        writeln!(w, "profile {} {} {} {}", p.left, p.top, p.right, p.bottom)?;
        for l in &self.letters {
            writeln!(w, "{l}")?;
        }
        Ok(())
    }

    /// Reads the dump format back.
    pub fn load<R: BufRead>(r: R) -> Result<Alphabet> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::InvalidLetter("empty dump".into()))??;
        let rest = header
            .strip_prefix("profile ")
            .ok_or_else(|| Error::InvalidLetter(format!("bad header {header:?}")))?;
        let profile: BoundaryProfile = rest.parse()?;
        let mut letters = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let l: Letter = line.parse()?;
            if l.len() != profile.total() {
                return Err(Error::ProfileMismatch(format!("letter {l} in profile {profile}")));
            }
            letters.push(l);
        }
        if letters.len() == 2 {
            return Ok(Self::extremes(profile));
        }
        let full = BigUint::from(letters.len()) == catalan(profile.total() as u64);
        if full {
            Ok(Self::from_letters(profile, AlphabetKind::Full, letters))
        } else {
            Self::subset(profile, letters)
        }
    }
}

pub fn two_sides_connected(letter: &Letter, profile: &BoundaryProfile) -> bool {
    let mut side_of_block: [Option<Side>; 256] = [None; 256];
    for (i, &b) in letter.as_rgs().iter().enumerate() {
        let s = profile.side_of(i);
        match side_of_block[b as usize] {
            None => side_of_block[b as usize] = Some(s),
            Some(prev) if prev != s => return true,
            _ => {}
        }
    }
    false
}

/// A set of letters of one alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LetterSet(Vec<bool>);

impl LetterSet {
    pub fn empty(len: usize) -> Self {
        LetterSet(vec![false; len])
    }

    pub fn all(len: usize) -> Self {
        LetterSet(vec![true; len])
    }

    pub fn from_fn(len: usize, f: impl Fn(LetterId) -> bool) -> Self {
        LetterSet((0..len as LetterId).map(f).collect())
    }

    pub fn from_ids(len: usize, ids: &[LetterId]) -> Self {
        let mut s = Self::empty(len);
        for &id in ids {
            s.insert(id);
        }
        s
    }

    pub fn universe_len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, id: LetterId) -> bool {
        self.0[id as usize]
    }

    pub fn insert(&mut self, id: LetterId) {
        self.0[id as usize] = true;
    }

    pub fn remove(&mut self, id: LetterId) {
        self.0[id as usize] = false;
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = LetterId> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as LetterId)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Alphabet {
        Alphabet::enumerate(BoundaryProfile::uniform(1).unwrap()).unwrap()
    }

    #[test]
    fn catalan_values() {
        assert_eq!(catalan(1), BigUint::from(1u32));
        assert_eq!(catalan(4), BigUint::from(14u32));
        assert_eq!(catalan(8), BigUint::from(1430u32));
        assert_eq!(catalan(16), BigUint::from(35_357_670u32));
    }

    #[test]
    fn enumeration_counts_match_catalan() {
        for n in 1..=10 {
            assert_eq!(BigUint::from(non_crossing_partitions(n).len()), catalan(n as u64), "n = {n}");
        }
        assert_eq!(non_crossing_partitions(5).len(), 42);
    }

    #[test]
    fn enumeration_is_sorted_and_canonical() {
        let all = non_crossing_partitions(7);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for l in &all {
            assert_eq!(&Letter::from_rgs(l.as_rgs()).unwrap(), l);
            assert_eq!(&l.to_string().parse::<Letter>().unwrap(), l);
        }
    }

    #[test]
    fn crossing_detection() {
        assert!(is_non_crossing(&[0, 0, 1, 1]));
        assert!(is_non_crossing(&[0, 1, 1, 0]));
        assert!(!is_non_crossing(&[0, 1, 0, 1]));
        assert!(!is_non_crossing(&[0, 1, 2, 1, 0, 2]));
        assert!(Letter::from_rgs(&[0, 1, 0, 1]).is_err());
        assert!(Letter::from_rgs(&[1, 0]).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(BoundaryProfile::new(3, 1, 3, 1).is_ok());
        assert!(BoundaryProfile::new(3, 1, 2, 1).is_err());
        assert!(BoundaryProfile::new(0, 1, 0, 1).is_err());
        assert_eq!("2,2,2,2".parse::<BoundaryProfile>().unwrap(), BoundaryProfile::uniform(2).unwrap());
        assert!("1,2,3".parse::<BoundaryProfile>().is_err());
    }

    #[test]
    fn enumeration_cap() {
        let p = BoundaryProfile::uniform(5).unwrap();
        assert!(matches!(Alphabet::enumerate(p), Err(Error::EnumerationCap { n: 20, cap: 16 })));
    }

    #[test]
    fn fourteen_letters_with_extremes() {
        let a = square();
        assert_eq!(a.len(), 14);
        assert_eq!(a.letter(a.min()).as_rgs(), &[0, 1, 2, 3]);
        assert_eq!(a.letter(a.max()).as_rgs(), &[0, 0, 0, 0]);
        for x in a.ids() {
            assert!(a.leq(a.min(), x));
            assert!(a.leq(x, a.max()));
            assert!(a.leq(x, x));
        }
    }

    #[test]
    fn leq_left_top_below_left_top_right() {
        let a = square();
        // elements: 0 = left, 1 = top, 2 = right, 3 = bottom
        let lt = a.id_of(&Letter::from_labels(&[0, 0, 1, 2])).unwrap();
        let ltr = a.id_of(&Letter::from_labels(&[0, 0, 0, 1])).unwrap();
        assert!(a.leq(lt, ltr));
        assert!(!a.leq(ltr, lt));
    }

    #[test]
    fn leq_is_a_partial_order() {
        for n in 1..=6 {
            let l = non_crossing_partitions(n);
            for a in &l {
                assert!(a.refines(a));
                for b in &l {
                    if a.refines(b) && b.refines(a) {
                        assert_eq!(a, b);
                    }
                    for c in &l {
                        if a.refines(b) && b.refines(c) {
                            assert!(a.refines(c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn two_sides_examples() {
        let a = square();
        assert!(!a.two_sides_connected(a.min()));
        assert!(a.two_sides_connected(a.max()));
        let p = BoundaryProfile::uniform(2).unwrap();
        // both left elements joined, all else singleton
        let l = Letter::from_labels(&[0, 0, 1, 2, 3, 4, 5, 6]);
        assert!(!two_sides_connected(&l, &p));
        let l = Letter::from_labels(&[0, 1, 1, 2, 3, 4, 5, 6]);
        assert!(two_sides_connected(&l, &p));
    }

    #[test]
    fn pi_set_is_an_upset() {
        for per_side in [1, 2] {
            let a = Alphabet::enumerate(BoundaryProfile::uniform(per_side).unwrap()).unwrap();
            let pi = a.pi_set();
            assert!(a.is_upset(&pi));
            for x in pi.iter() {
                for y in a.ids() {
                    if a.leq(x, y) {
                        assert!(pi.contains(y));
                    }
                }
            }
            assert!(pi.contains(a.max()));
            assert!(!pi.contains(a.min()));
        }
    }

    #[test]
    fn covers_generate_the_order() {
        let a = Alphabet::enumerate(BoundaryProfile::new(2, 1, 2, 1).unwrap()).unwrap();
        let covers = a.upper_covers();
        // reachability through covers equals leq
        for x in a.ids() {
            let mut reach = LetterSet::empty(a.len());
            let mut stack = vec![x];
            while let Some(y) = stack.pop() {
                if reach.contains(y) {
                    continue;
                }
                reach.insert(y);
                stack.extend(&covers[y as usize]);
            }
            for y in a.ids() {
                assert_eq!(reach.contains(y), a.leq(x, y));
            }
        }
    }

    #[test]
    fn upsets_of_a_chain() {
        let a = Alphabet::extremes(BoundaryProfile::uniform(1).unwrap());
        let ups = a.upsets().unwrap();
        assert_eq!(ups.len(), 3);
    }

    #[test]
    fn upsets_of_a_diamond() {
        let p = BoundaryProfile::uniform(1).unwrap();
        let letters = vec![
            Letter::singletons(4),
            Letter::full(4),
            Letter::from_labels(&[0, 0, 1, 2]),
            Letter::from_labels(&[0, 1, 2, 2]),
        ];
        let a = Alphabet::subset(p, letters).unwrap();
        assert_eq!(a.upsets().unwrap().len(), 6);
    }

    #[test]
    fn upsets_match_brute_force() {
        let a = square();
        let brute = (0u32..1 << 14)
            .map(|mask| LetterSet::from_fn(14, |i| mask >> i & 1 == 1))
            .filter(|s| a.is_upset(s))
            .count();
        assert_eq!(a.upsets().unwrap().len(), brute);
        for s in a.upsets().unwrap() {
            assert!(a.is_upset(&s));
        }
    }

    #[test]
    fn upset_cap() {
        let a = Alphabet::enumerate(BoundaryProfile::new(2, 1, 2, 1).unwrap()).unwrap();
        assert!(matches!(a.upsets(), Err(Error::UpsetCap { .. })));
    }

    #[test]
    fn dump_round_trip() {
        let a = square();
        let mut buf = Vec::new();
        a.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("profile 1 1 1 1\n0000\n"));
        assert_eq!(text.lines().count(), 15);
        let b = Alphabet::load(&buf[..]).unwrap();
        assert_eq!(a.letters(), b.letters());
    }
}
