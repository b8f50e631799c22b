//! Rigorous lower and upper bounds for the critical probability `p_c(M)` of
//! two-dimensional fractal percolation.
//!
//! Realizations of the fractal percolation set are classified into a finite,
//! partially ordered alphabet of boundary connectivity patterns. The random
//! substitution process then induces a recursion on probability vectors over
//! that alphabet, which is iterated with one-sided rounding:
//!
//! * [`alphabet`] enumerates the letters (non-crossing partitions of the
//!   subdivided square boundary) and their refinement order.
//! * [`wordcode`] glues `M × M` words of letters and applies the weak and
//!   strong word codes, and compiles them into a frontier dynamic program.
//! * [`iterate`] pushes letter distributions through that program.
//! * [`certify`] turns iterations into checkable lower and upper bound
//!   certificates.
//! * [`mc`] is a Monte Carlo simulator used as an independent oracle.
//! * [`cli`] backs the `pcbounds` binary.

pub mod alphabet;
pub mod certify;
pub mod cli;
pub mod error;
pub mod exact;
pub mod iterate;
pub mod mc;
pub mod rounding;
pub mod wordcode;

pub use alphabet::{Alphabet, AlphabetKind, BoundaryProfile, Letter, LetterId, LetterSet};
pub use error::{Error, Result};
pub use iterate::{Direction, LetterDistribution, Sink};
pub use wordcode::{CodeKind, CompositionPlan};
