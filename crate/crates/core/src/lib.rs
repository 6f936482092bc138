//! Concatenative command synthesis from forced-aligned speech.
//!
//! The pipeline: parse Praat TextGrid alignments ([`textgrid`]), cut diphone
//! and word units out of the paired audio ([`inventory`]), plan utterances
//! against a pronunciation dictionary ([`lexicon`]), splice units back into
//! command audio ([`synth`]), and score the result with a word-error-rate,
//! intent-matching, and simulated-confidence harness ([`eval`]).
//! [`coverage`] answers how much source speech a command set needs.

pub mod audio;
pub mod catalog;
pub mod coverage;
pub mod eval;
pub mod inventory;
pub mod lexicon;
pub mod phones;
pub mod synth;
pub mod textgrid;

pub use phones::{Diphone, Phoneme};
