mod common;

use common::*;
use pcbounds::alphabet::{is_non_crossing, non_crossing_partitions, Alphabet, BoundaryProfile, Letter, LetterId};
use pcbounds::wordcode::PlanOptions;
use pcbounds::{CodeKind, CompositionPlan};
use proptest::prelude::*;
use std::sync::OnceLock;

struct Codes {
    alphabet: Alphabet,
    weak: Vec<CompositionPlan>,
    strong: Vec<CompositionPlan>,
}

/// Plans for M = 2, 3 over the square alphabet, built once.
fn codes() -> &'static Codes {
    static CODES: OnceLock<Codes> = OnceLock::new();
    CODES.get_or_init(|| {
        let alphabet = Alphabet::enumerate(square()).unwrap();
        let build = |code| {
            (2..=3).map(|m| CompositionPlan::build(&alphabet, m, code, &PlanOptions::default()).unwrap()).collect()
        };
        let weak = build(CodeKind::Weak);
        let strong = build(CodeKind::Strong);
        Codes { alphabet, weak, strong }
    })
}

#[test]
fn strong_is_below_weak_on_every_m2_word() {
    let c = codes();
    let a = &c.alphabet;
    let n = a.len() as LetterId;
    for w in 0..n.pow(4) {
        let cells: Vec<LetterId> = (0..4).map(|i| w / n.pow(i) % n).collect();
        let s = c.strong[0].code_word(&cells).unwrap();
        let wk = c.weak[0].code_word(&cells).unwrap();
        assert!(a.leq(s, wk), "{cells:?}");
        if s == a.max() {
            assert_eq!(wk, a.max());
        }
    }
}

/// Brute-force crossing test over all quadruples.
fn crosses(labels: &[u8]) -> bool {
    let n = labels.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    if labels[i] == labels[k] && labels[j] == labels[l] && labels[i] != labels[j] {
                        return true;
                    }
                }
            }
        }
    }
    false
}

#[test]
fn enumeration_is_every_non_crossing_partition() {
    // all set partitions of 7 elements as restricted-growth strings
    fn rgs(n: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            prefix.push(b);
            rgs(n, prefix, out);
            prefix.pop();
        }
    }
    let mut all = Vec::new();
    rgs(7, &mut Vec::new(), &mut all);
    let mut expected: Vec<Letter> =
        all.iter().filter(|l| !crosses(l)).map(|l| Letter::from_rgs(l).unwrap()).collect();
    expected.sort();
    let mut got = non_crossing_partitions(7);
    got.sort();
    assert_eq!(got, expected);
    assert_eq!(got.len(), 429);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn crossing_test_matches_brute_force(labels in prop::collection::vec(0u8..4, 1..12)) {
        let letter = Letter::from_labels(&labels);
        prop_assert_eq!(is_non_crossing(letter.as_rgs()), !crosses(letter.as_rgs()));
    }

    #[test]
    fn strong_is_below_weak_on_3x3_words(cells in prop::collection::vec(0u32..14, 9)) {
        let c = codes();
        let s = c.strong[1].code_word(&cells).unwrap();
        let w = c.weak[1].code_word(&cells).unwrap();
        prop_assert!(c.alphabet.leq(s, w));
    }

    #[test]
    fn codes_are_monotone_in_each_cell(
        m in 2usize..=3,
        cells in prop::collection::vec(0u32..14, 9),
        pos in 0usize..9,
        pick in 0usize..8,
    ) {
        let c = codes();
        let a = &c.alphabet;
        let mut cells = cells;
        cells.truncate(m * m);
        let pos = pos % (m * m);
        let covers = &a.upper_covers()[cells[pos] as usize];
        prop_assume!(!covers.is_empty());
        let mut larger = cells.clone();
        larger[pos] = covers[pick % covers.len()];
        for plans in [&c.weak, &c.strong] {
            let plan = &plans[m - 2];
            let lo = plan.code_word(&cells).unwrap();
            let hi = plan.code_word(&larger).unwrap();
            prop_assert!(a.leq(lo, hi), "{:?} -> {:?}", cells, larger);
        }
    }

    #[test]
    fn codes_commute_with_symmetries(m in 2usize..=3, cells in prop::collection::vec(0u32..14, 9)) {
        let c = codes();
        let a = &c.alphabet;
        let word: Vec<Vec<LetterId>> = (0..m).map(|r| cells[r * m..(r + 1) * m].to_vec()).collect();
        for sym in Symmetry::all() {
            let moved = sym.word(a, &word);
            for plans in [&c.weak, &c.strong] {
                let plan = &plans[m - 2];
                let out = plan.code_word(&flatten(&word)).unwrap();
                let out_moved = plan.code_word(&flatten(&moved)).unwrap();
                prop_assert_eq!(sym.letter(a, out), out_moved, "{:?}", sym);
            }
        }
    }

    #[test]
    fn refined_codes_commute_with_symmetries(cells in prop::collection::vec(0u32..1430, 4)) {
        let a = refined();
        let word = vec![cells[..2].to_vec(), cells[2..].to_vec()];
        let weak = pcbounds::wordcode::DirectCoder::new(a, CodeKind::Weak).unwrap();
        let strong = pcbounds::wordcode::DirectCoder::new(a, CodeKind::Strong).unwrap();
        for sym in Symmetry::all() {
            let moved = sym.word(a, &word);
            for coder in [&weak, &strong] {
                let g = |w: &[Vec<LetterId>]| pcbounds::wordcode::WordGrid::new(2, flatten(w)).unwrap();
                let out = coder.code_word(&g(&word)).unwrap();
                prop_assert_eq!(sym.letter(a, out), coder.code_word(&g(&moved)).unwrap());
            }
        }
    }
}

fn refined() -> &'static Alphabet {
    static A: OnceLock<Alphabet> = OnceLock::new();
    A.get_or_init(|| Alphabet::enumerate(BoundaryProfile::uniform(2).unwrap()).unwrap())
}
