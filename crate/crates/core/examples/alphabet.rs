//! Enumerates the letters of a boundary profile and shows the refinement order.
//!
//! cargo run --example alphabet -- 2,2,2,2

use pcbounds::alphabet::catalan;
use pcbounds::{Alphabet, BoundaryProfile};

fn main() -> pcbounds::Result<()> {
    let profile: BoundaryProfile = std::env::args().nth(1).as_deref().unwrap_or("1,1,1,1").parse()?;
    let alphabet = Alphabet::enumerate(profile)?;
    println!("profile {profile}: {} letters (Catalan {})", alphabet.len(), catalan(profile.total() as u64));
    println!("max = {}, min = {}", alphabet.letter(alphabet.max()), alphabet.letter(alphabet.min()));

    let shown = alphabet.len().min(14);
    for id in alphabet.ids().take(shown) {
        let covers: Vec<String> = alphabet.upper_covers()[id as usize].iter().map(|&c| alphabet.letter(c).to_string()).collect();
        let pi = if alphabet.two_sides_connected(id) { "two sides" } else { "" };
        println!("{:>4}  {}  covered by [{}] {pi}", id, alphabet.letter(id), covers.join(" "));
    }
    if alphabet.len() <= 14 {
        println!("{} up-sets", alphabet.upsets()?.len());
    }
    Ok(())
}
