//! Weak and strong codes of a few 2x2 and 3x3 words.

use pcbounds::wordcode::{DirectCoder, WordGrid};
use pcbounds::{Alphabet, BoundaryProfile, CodeKind, Letter};

fn main() -> pcbounds::Result<()> {
    let alphabet = Alphabet::enumerate(BoundaryProfile::uniform(1)?)?;
    let id = |s: &str| alphabet.id_of(&s.parse::<Letter>().unwrap()).unwrap();
    let (x, o) = (alphabet.max(), alphabet.min());
    let weak = DirectCoder::new(&alphabet, CodeKind::Weak)?;
    let strong = DirectCoder::new(&alphabet, CodeKind::Strong)?;

    // rows listed top first
    let words: Vec<(&str, WordGrid)> = vec![
        ("top-left max", WordGrid::from_rows_top_down(&[&[x, o], &[o, o]])?),
        ("diagonal", WordGrid::from_rows_top_down(&[&[o, x], &[x, o]])?),
        ("bottom row", WordGrid::from_rows_top_down(&[&[o, o], &[x, x]])?),
        ("left-right pieces", WordGrid::from_rows_top_down(&[&[id("0102"), id("0102")], &[o, o]])?),
        ("cross", WordGrid::from_rows_top_down(&[&[o, x, o], &[x, x, x], &[o, x, o]])?),
        ("all max", WordGrid::filled(3, x)?),
    ];
    for (name, word) in &words {
        let w = alphabet.letter(weak.code_word(word)?);
        let s = alphabet.letter(strong.code_word(word)?);
        println!("{name:>18}: weak {w}  strong {s}");
    }
    Ok(())
}
