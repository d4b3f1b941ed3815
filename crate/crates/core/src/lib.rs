//! Structure extraction for lattice point sets that occupy few residue
//! classes modulo primes.
//!
//! The crate generates such sets, profiles their residue classes over a
//! window of primes, samples a small characteristic tuple representing most
//! of the set modulo many of those primes, and builds a low-degree integer
//! polynomial of controlled height that vanishes on the tuple. Every
//! vanishing claim is then checked by exact evaluation.
//!
//! Modules, bottom-up:
//!
//! * [`lattice_sets`] and [`format`]: point sets in `[N]^d`, generators, files.
//! * [`residue`]: prime windows, occupancy profiles, good/bad tuples.
//! * [`sampling`]: the randomized characteristic tuple and its coverage.
//! * [`siegel`]: polynomials, the coefficient bound, the vanishing solver.
//! * [`pipeline`]: the end-to-end run and its iteration to `(1 - eps)` coverage.

pub mod arith;
pub mod error;
pub mod format;
pub mod lattice_sets;
pub mod pipeline;
pub mod primes;
pub mod residue;
pub mod sampling;
pub mod siegel;

pub use error::{Error, Result};
pub use lattice_sets::{make_set, LatticePointSet, Point};
pub use residue::{primes_in_window, PrimeWindow, ResidueProfile};
pub use sampling::{CharacteristicSample, SamplingParams};
pub use siegel::{IntegerPolynomial, Monomial};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for `(seed, stream)`. Independent streams let
/// parallel workers draw without sharing state.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
