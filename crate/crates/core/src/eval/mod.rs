//! Attack evaluation: transcripts, intents, simulated confidence, and the
//! cross-profile experiment grid.

pub mod confidence;
pub mod config;
pub mod experiment;
pub mod intent;
pub mod wer;

pub use confidence::{
    simulate_confidence, ConfidenceLevel, ConfidenceThresholds, SIMULATION_NOTE,
};
pub use config::{load_config, parse_config, EvalConfig, NoiseWeights};
pub use experiment::{
    cross_matrix, cross_matrix_over, read_results_csv, run_experiment, write_results_csv,
    CrossMatrix, ExperimentOutcome, ExperimentSpec, TranscriptOverrides, TrialFailure,
    TrialRecord,
};
pub use intent::{intent_templates, match_intent, match_intent_text, IntentMatch, IntentTemplate};
pub use wer::{edit_distance, word_error_rate, WerError};
