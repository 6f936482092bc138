//! Cross-profile attack evaluation.
//!
//! For every (attacked profile, recording source, command) cell we synthesize
//! the command from the source's inventory, optionally masked to the most
//! popular diphones and backfilled from a donor profile, then score the
//! result: simulated recognizer confidence from how much of the audio is the
//! attacked profile's own voice, word error rate of a provenance-driven
//! noisy transcript, and whether the command's intent still matches.
//!
//! Every cell draws its randomness from a seed derived with FNV-1a over the
//! cell coordinates and the global seed, so results are independent of
//! evaluation order and thread count.

use std::collections::{BTreeMap, BTreeSet};
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::CatalogEntry;
use crate::coverage::{CoverageError, DiphoneFrequencyTable};
use crate::eval::confidence::simulate_confidence;
use crate::eval::config::{ConfigError, EvalConfig};
use crate::eval::intent::{intent_templates, match_intent, IntentTemplate};
use crate::eval::wer::word_error_rate;
use crate::inventory::{Inventory, ProfileId};
use crate::lexicon::Lexicon;
use crate::phones::Diphone;
use crate::synth::{synthesize, SynthesisRequest, SynthesisResult};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("mask_fraction is set but no frequency table was provided")]
    MissingFrequencyTable,
    #[error("donor profile {profile:?} is not among the loaded inventories")]
    UnknownDonor { profile: String },
    #[error("experiment needs at least one profile and one command")]
    EmptyGrid,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error("malformed results CSV at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentSpec<'a> {
    pub lexicon: &'a Lexicon,
    pub catalog: &'a [CatalogEntry],
    /// Profiles under test; every profile is used both as an attacked target
    /// and as a recording source.
    pub profiles: &'a [Inventory],
    pub config: &'a EvalConfig,
    /// Required when `config.mask_fraction` is set.
    pub frequency: Option<&'a DiphoneFrequencyTable>,
    /// Transcripts from an external recognizer. Cells present here skip the
    /// synthetic noise channel and are scored against these words instead.
    pub transcripts: Option<&'a TranscriptOverrides>,
}

/// External recognizer output keyed by (target, source, command id).
pub type TranscriptOverrides = BTreeMap<(ProfileId, ProfileId, String), Vec<String>>;

/// One evaluated (target, source, command) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub target: ProfileId,
    pub source: ProfileId,
    pub command: String,
    pub intent_hit: bool,
    pub wer: f64,
    pub confidence: u32,
    /// Fraction of synthesis units voiced by the attacked profile.
    pub target_fraction: f64,
}

/// A cell whose synthesis failed; the grid keeps going without it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub target: ProfileId,
    pub source: ProfileId,
    pub command: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub results: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome, ExperimentError> {
    spec.config.validate()?;
    if spec.profiles.is_empty() || spec.catalog.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }

    let mask: Option<BTreeSet<Diphone>> = match spec.config.mask_fraction {
        Some(fraction) => {
            let table = spec
                .frequency
                .ok_or(ExperimentError::MissingFrequencyTable)?;
            Some(table.top_fraction(fraction)?)
        }
        None => None,
    };
    let donor: Option<&Inventory> = match &spec.config.donor_profile {
        Some(id) => Some(
            spec.profiles
                .iter()
                .find(|inv| inv.profile.as_str() == id)
                .ok_or_else(|| ExperimentError::UnknownDonor {
                    profile: id.clone(),
                })?,
        ),
        None => None,
    };
    let templates = intent_templates(spec.catalog);

    let mut cells = Vec::new();
    for target in spec.profiles {
        for source in spec.profiles {
            for entry in spec.catalog {
                cells.push((target, source, entry));
            }
        }
    }

    let outcomes: Vec<Result<TrialRecord, TrialFailure>> = cells
        .par_iter()
        .map(|&(target, source, entry)| {
            run_cell(spec, &templates, mask.as_ref(), donor, target, source, entry)
        })
        .collect();

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(record) => results.push(record),
            Err(failure) => failures.push(failure),
        }
    }
    Ok(ExperimentOutcome { results, failures })
}

fn run_cell(
    spec: &ExperimentSpec,
    templates: &[IntentTemplate],
    mask: Option<&BTreeSet<Diphone>>,
    donor: Option<&Inventory>,
    target: &Inventory,
    source: &Inventory,
    entry: &CatalogEntry,
) -> Result<TrialRecord, TrialFailure> {
    let tokens = entry.tokens();
    let donor = donor.filter(|d| d.profile != source.profile);
    let request = SynthesisRequest {
        lexicon: spec.lexicon,
        tokens: &tokens,
        target: source,
        donor,
        mask,
        crossfade_ms: spec.config.crossfade_ms,
    };
    let synthesis = synthesize(&request).map_err(|e| TrialFailure {
        target: target.profile.clone(),
        source: source.profile.clone(),
        command: entry.id.clone(),
        error: e.to_string(),
    })?;

    let target_fraction = profile_fraction(&synthesis, &target.profile);
    let realized = external_transcript(spec, target, source, entry)
        .unwrap_or_else(|| noisy_transcript(spec, &synthesis, target, source, entry));

    let wer = word_error_rate(&tokens, &realized).expect("command tokens are never empty");
    let intent_hit = match_intent(templates, &realized).is_some_and(|m| m.id == entry.id);

    let mut confidence_rng = cell_rng("confidence", spec, target, source, entry);
    let confidence =
        simulate_confidence(target_fraction, &spec.config.confidence, &mut confidence_rng)
            .value();

    Ok(TrialRecord {
        target: target.profile.clone(),
        source: source.profile.clone(),
        command: entry.id.clone(),
        intent_hit,
        wer,
        confidence,
        target_fraction,
    })
}

/// Share of trace units voiced by `profile`.
fn profile_fraction(synthesis: &SynthesisResult, profile: &ProfileId) -> f64 {
    let hits = synthesis
        .trace
        .iter()
        .filter(|e| &e.source_profile == profile)
        .count();
    hits as f64 / synthesis.trace.len() as f64
}

fn external_transcript(
    spec: &ExperimentSpec,
    target: &Inventory,
    source: &Inventory,
    entry: &CatalogEntry,
) -> Option<Vec<String>> {
    let key = (
        target.profile.clone(),
        source.profile.clone(),
        entry.id.clone(),
    );
    spec.transcripts?.get(&key).cloned()
}

/// The transcript an imperfect recognizer would hear: each word garbles with
/// probability `donor_share * donor_weight + joins * join_weight`.
fn noisy_transcript(
    spec: &ExperimentSpec,
    synthesis: &SynthesisResult,
    target: &Inventory,
    source: &Inventory,
    entry: &CatalogEntry,
) -> Vec<String> {
    let weights = spec.config.noise;
    let mut rng = cell_rng("noise", spec, target, source, entry);
    synthesis
        .tokens
        .iter()
        .map(|provenance| {
            let donor_share = provenance.donor_units as f64 / provenance.units as f64;
            let joins = provenance.units.saturating_sub(1) as f64;
            let p = (donor_share * weights.donor_weight + joins * weights.join_weight)
                .clamp(0.0, 1.0);
            if rng.gen::<f64>() < p {
                corrupt_word(&provenance.token)
            } else {
                provenance.token.clone()
            }
        })
        .collect()
}

/// A garbled stand-in for a misheard word that never equals the original.
fn corrupt_word(word: &str) -> String {
    let reversed: String = word.chars().rev().collect();
    if reversed != word {
        reversed
    } else if word.ends_with('x') {
        format!("{word}z")
    } else {
        format!("{word}x")
    }
}

fn cell_rng(
    tag: &str,
    spec: &ExperimentSpec,
    target: &Inventory,
    source: &Inventory,
    entry: &CatalogEntry,
) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cell_seed(
        tag,
        target.profile.as_str(),
        source.profile.as_str(),
        &entry.id,
        spec.config.seed,
    ))
}

/// FNV-1a over the cell coordinates: stable across platforms and releases,
/// so a given (seed, cell) pair always replays identically.
fn cell_seed(tag: &str, target: &str, source: &str, command: &str, global_seed: u64) -> u64 {
    let mut hash = FNV_OFFSET;
    for part in [tag.as_bytes(), target.as_bytes(), source.as_bytes(), command.as_bytes()] {
        hash = fnv1a64(hash, part);
        hash = fnv1a64(hash, &[0]);
    }
    fnv1a64(hash, &global_seed.to_le_bytes())
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a64(mut hash: u64, bytes: &[u8]) -> u64 {
    for &byte in bytes {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Per (target, source) confidence medians, for the cross-profile grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossMatrix {
    pub targets: Vec<ProfileId>,
    pub sources: Vec<ProfileId>,
    /// `confidence[t][s]` is the lower-median confidence over commands, or
    /// `None` when every cell for that pair failed.
    pub confidence: Vec<Vec<Option<u32>>>,
}

pub fn cross_matrix(records: &[TrialRecord]) -> CrossMatrix {
    let targets: Vec<ProfileId> = records
        .iter()
        .map(|r| r.target.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let sources: Vec<ProfileId> = records
        .iter()
        .map(|r| r.source.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    cross_matrix_over(records, &targets, &sources)
}

/// Builds the grid over explicit axes, so a full experiment stays square over
/// its profile set even when some profile never produced a successful cell.
pub fn cross_matrix_over(
    records: &[TrialRecord],
    targets: &[ProfileId],
    sources: &[ProfileId],
) -> CrossMatrix {
    let confidence = targets
        .iter()
        .map(|t| {
            sources
                .iter()
                .map(|s| {
                    let mut values: Vec<u32> = records
                        .iter()
                        .filter(|r| &r.target == t && &r.source == s)
                        .map(|r| r.confidence)
                        .collect();
                    values.sort_unstable();
                    (!values.is_empty()).then(|| values[(values.len() - 1) / 2])
                })
                .collect()
        })
        .collect();

    CrossMatrix {
        targets: targets.to_vec(),
        sources: sources.to_vec(),
        confidence,
    }
}

pub const RESULTS_CSV_HEADER: [&str; 7] = [
    "target",
    "source",
    "command",
    "intent_hit",
    "wer",
    "confidence",
    "target_fraction",
];

pub fn write_results_csv<W: io::Write>(
    records: &[TrialRecord],
    writer: W,
) -> Result<(), ExperimentError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(RESULTS_CSV_HEADER).map_err(csv_io)?;
    for record in records {
        out.write_record([
            record.target.as_str().to_string(),
            record.source.as_str().to_string(),
            record.command.clone(),
            record.intent_hit.to_string(),
            format!("{:.4}", record.wer),
            record.confidence.to_string(),
            format!("{:.4}", record.target_fraction),
        ])
        .map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_results_csv<R: io::Read>(reader: R) -> Result<Vec<TrialRecord>, ExperimentError> {
    let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut records = Vec::new();
    for (index, row) in input.records().enumerate() {
        let line = index + 2;
        let malformed = |message: String| ExperimentError::Malformed { line, message };
        let row = row.map_err(|e| ExperimentError::Malformed {
            line,
            message: e.to_string(),
        })?;
        if row.len() != RESULTS_CSV_HEADER.len() {
            return Err(malformed(format!(
                "expected {} fields, found {}",
                RESULTS_CSV_HEADER.len(),
                row.len()
            )));
        }
        records.push(TrialRecord {
            target: ProfileId::new(&row[0]),
            source: ProfileId::new(&row[1]),
            command: row[2].to_string(),
            intent_hit: row[3]
                .parse()
                .map_err(|_| malformed(format!("bad intent_hit {:?}", &row[3])))?,
            wer: row[4]
                .parse()
                .map_err(|_| malformed(format!("bad wer {:?}", &row[4])))?,
            confidence: row[5]
                .parse()
                .map_err(|_| malformed(format!("bad confidence {:?}", &row[5])))?,
            target_fraction: row[6]
                .parse()
                .map_err(|_| malformed(format!("bad target_fraction {:?}", &row[6])))?,
        });
    }
    Ok(records)
}

fn csv_io(err: csv::Error) -> ExperimentError {
    match err.into_kind() {
        csv::ErrorKind::Io(io_err) => ExperimentError::Io(io_err),
        other => ExperimentError::Malformed {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::corpus_diphone_stream;
    use crate::inventory::{DiphoneUnit, Gender};

    fn lexicon() -> Lexicon {
        Lexicon::load("AGAIN AH0 G EH1 N\nMY M AY1\nNAME N EY1 M\n".as_bytes()).unwrap()
    }

    fn catalog() -> Vec<CatalogEntry> {
        vec![
            CatalogEntry {
                id: "A".to_string(),
                text: "again".to_string(),
                required_keywords: ["again".to_string()].into(),
                slot_words: BTreeSet::new(),
            },
            CatalogEntry {
                id: "MN".to_string(),
                text: "my name".to_string(),
                required_keywords: ["name".to_string()].into(),
                slot_words: BTreeSet::new(),
            },
        ]
    }

    fn all_diphones(lexicon: &Lexicon) -> Vec<Diphone> {
        let stream = corpus_diphone_stream(lexicon, ["again", "my name"]);
        stream.tokens.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
    }

    fn inventory_covering(profile: &str, diphones: &[Diphone]) -> Inventory {
        let profile = ProfileId::new(profile);
        let mut inv = Inventory::new(profile.clone(), Gender::Unspecified);
        for &diphone in diphones {
            inv.insert_diphone_unit(DiphoneUnit {
                diphone,
                clip: crate::audio::AudioClip::new(vec![100; 400], 16000),
                source_utterance: "utt".to_string(),
                cut_start: 0.0,
                cut_end: 0.025,
                profile: profile.clone(),
            });
        }
        inv
    }

    fn spec_parts() -> (Lexicon, Vec<CatalogEntry>, Vec<Inventory>) {
        let lex = lexicon();
        let all = all_diphones(&lex);
        let profiles = vec![
            inventory_covering("p1", &all),
            inventory_covering("p2", &all),
        ];
        (lex, catalog(), profiles)
    }

    #[test]
    fn full_grid_scores_diagonal_high_and_off_diagonal_zero() {
        let (lex, catalog, profiles) = spec_parts();
        let config = EvalConfig::default();
        let spec = ExperimentSpec {
            lexicon: &lex,
            catalog: &catalog,
            profiles: &profiles,
            config: &config,
            frequency: None,
            transcripts: None,
        };
        let outcome = run_experiment(&spec).unwrap();
        assert_eq!(outcome.results.len(), 8);
        assert!(outcome.failures.is_empty());

        for record in &outcome.results {
            assert!(record.intent_hit, "{record:?}");
            assert_eq!(record.wer, 0.0);
            if record.target == record.source {
                assert_eq!(record.target_fraction, 1.0);
                assert_eq!(record.confidence, 300);
            } else {
                assert_eq!(record.target_fraction, 0.0);
                assert_eq!(record.confidence, 0);
            }
        }

        let matrix = cross_matrix(&outcome.results);
        assert_eq!(matrix.targets.len(), 2);
        assert_eq!(matrix.confidence[0][0], Some(300));
        assert_eq!(matrix.confidence[0][1], Some(0));
        assert_eq!(matrix.confidence[1][1], Some(300));
    }

    #[test]
    fn runs_are_deterministic() {
        let (lex, catalog, profiles) = spec_parts();
        let mut config = EvalConfig::default();
        config.noise.join_weight = 0.08;
        let spec = ExperimentSpec {
            lexicon: &lex,
            catalog: &catalog,
            profiles: &profiles,
            config: &config,
            frequency: None,
            transcripts: None,
        };
        let first = run_experiment(&spec).unwrap();
        let second = run_experiment(&spec).unwrap();
        assert_eq!(first, second);

        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_results_csv(&first.results, &mut csv_a).unwrap();
        write_results_csv(&second.results, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn failed_cells_are_isolated() {
        let (lex, catalog, mut profiles) = spec_parts();
        let stream = corpus_diphone_stream(&lex, ["my name"]);
        let mn_only: Vec<Diphone> =
            stream.tokens.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        profiles[1] = inventory_covering("p3", &mn_only);

        let config = EvalConfig::default();
        let spec = ExperimentSpec {
            lexicon: &lex,
            catalog: &catalog,
            profiles: &profiles,
            config: &config,
            frequency: None,
            transcripts: None,
        };
        let outcome = run_experiment(&spec).unwrap();
        assert_eq!(outcome.results.len() + outcome.failures.len(), 8);
        assert_eq!(outcome.failures.len(), 2);
        for failure in &outcome.failures {
            assert_eq!(failure.source.as_str(), "p3");
            assert_eq!(failure.command, "A");
            assert!(failure.error.contains("diphone"), "{}", failure.error);
        }
    }

    #[test]
    fn masking_moves_units_to_the_donor() {
        let (lex, catalog, profiles) = spec_parts();
        let stream = corpus_diphone_stream(&lex, ["again", "my name"]);
        let mut table = DiphoneFrequencyTable::new("toy");
        for &token in &stream.tokens {
            table.add(token);
        }

        let mut config = EvalConfig::default();
        config.mask_fraction = Some(0.2);
        config.donor_profile = Some("p2".to_string());
        let spec = ExperimentSpec {
            lexicon: &lex,
            catalog: &catalog,
            profiles: &profiles,
            config: &config,
            frequency: Some(&table),
            transcripts: None,
        };
        let outcome = run_experiment(&spec).unwrap();
        // Source p1 backfills masked-out diphones from the donor p2. Source
        // p2 is the donor itself, so it gets no fallback and its masked
        // inventory cannot speak either command.
        assert_eq!(outcome.results.len(), 4);
        assert_eq!(outcome.failures.len(), 4);
        assert!(outcome.failures.iter().all(|f| f.source.as_str() == "p2"));

        for record in &outcome.results {
            assert_eq!(record.source.as_str(), "p1");
            if record.target.as_str() == "p1" {
                assert!(
                    record.target_fraction < 1.0,
                    "masking should push some units to the donor: {record:?}"
                );
            } else {
                assert!(
                    record.target_fraction > 0.0,
                    "donor units belong to the attacked profile: {record:?}"
                );
            }
        }
    }

    #[test]
    fn noise_garbles_transcripts_and_breaks_intent() {
        let (lex, catalog, profiles) = spec_parts();
        let mut config = EvalConfig::default();
        config.noise.join_weight = 1.0;
        let spec = ExperimentSpec {
            lexicon: &lex,
            catalog: &catalog,
            profiles: &profiles,
            config: &config,
            frequency: None,
            transcripts: None,
        };
        let outcome = run_experiment(&spec).unwrap();
        for record in &outcome.results {
            assert_eq!(record.wer, 1.0, "{record:?}");
            assert!(!record.intent_hit);
        }
    }

    #[test]
    fn corrupt_word_never_returns_the_input() {
        assert_eq!(corrupt_word("name"), "eman");
        assert_eq!(corrupt_word("level"), "levelx");
        assert_eq!(corrupt_word("xanax"), "xanaxz");
        for word in ["a", "xx", "again", "noon"] {
            assert_ne!(corrupt_word(word), word);
        }
    }

    #[test]
    fn cell_seeds_separate_tags_and_coordinates() {
        assert_eq!(fnv1a64(FNV_OFFSET, b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(FNV_OFFSET, b"a"), 0xaf63dc4c8601ec8c);

        let base = cell_seed("noise", "t", "s", "c", 7);
        assert_ne!(base, cell_seed("confidence", "t", "s", "c", 7));
        assert_ne!(base, cell_seed("noise", "t2", "s", "c", 7));
        assert_ne!(base, cell_seed("noise", "t", "s2", "c", 7));
        assert_ne!(base, cell_seed("noise", "t", "s", "c2", 7));
        assert_ne!(base, cell_seed("noise", "t", "s", "c", 8));
        assert_eq!(base, cell_seed("noise", "t", "s", "c", 7));
    }

    #[test]
    fn cross_matrix_uses_lower_medians_and_none_for_missing_pairs() {
        let record = |t: &str, s: &str, c: &str, confidence: u32| TrialRecord {
            target: ProfileId::new(t),
            source: ProfileId::new(s),
            command: c.to_string(),
            intent_hit: true,
            wer: 0.0,
            confidence,
            target_fraction: 1.0,
        };
        let records = vec![
            record("t1", "s1", "a", 300),
            record("t1", "s1", "b", 100),
            record("t1", "s1", "c", 200),
            record("t1", "s2", "a", 0),
            record("t1", "s2", "b", 300),
            record("t2", "s2", "a", 100),
        ];
        let matrix = cross_matrix(&records);
        assert_eq!(matrix.targets, vec![ProfileId::new("t1"), ProfileId::new("t2")]);
        assert_eq!(matrix.confidence[0][0], Some(200));
        assert_eq!(matrix.confidence[0][1], Some(0));
        assert_eq!(matrix.confidence[1][0], None);
        assert_eq!(matrix.confidence[1][1], Some(100));
    }

    #[test]
    fn results_csv_round_trips() {
        let records = vec![
            TrialRecord {
                target: ProfileId::new("p1"),
                source: ProfileId::new("p2"),
                command: "AC0".to_string(),
                intent_hit: true,
                wer: 0.25,
                confidence: 200,
                target_fraction: 0.5,
            },
            TrialRecord {
                target: ProfileId::new("p2"),
                source: ProfileId::new("p2"),
                command: "PC1".to_string(),
                intent_hit: false,
                wer: 1.0,
                confidence: 0,
                target_fraction: 0.0,
            },
        ];
        let mut buffer = Vec::new();
        write_results_csv(&records, &mut buffer).unwrap();
        let text = String::from_utf8(buffer.clone()).unwrap();
        assert!(text.starts_with(
            "target,source,command,intent_hit,wer,confidence,target_fraction\n"
        ));
        assert!(text.contains("p1,p2,AC0,true,0.2500,200,0.5000\n"));

        let reread = read_results_csv(buffer.as_slice()).unwrap();
        assert_eq!(reread, records);

        assert!(matches!(
            read_results_csv("target,source\nx,y\n".as_bytes()),
            Err(ExperimentError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn configuration_errors_surface_before_any_cell_runs() {
        let (lex, catalog, profiles) = spec_parts();
        let mut config = EvalConfig::default();
        config.mask_fraction = Some(0.5);
        let spec = ExperimentSpec {
            lexicon: &lex,
            catalog: &catalog,
            profiles: &profiles,
            config: &config,
            frequency: None,
            transcripts: None,
        };
        assert!(matches!(
            run_experiment(&spec),
            Err(ExperimentError::MissingFrequencyTable)
        ));

        let mut config = EvalConfig::default();
        config.donor_profile = Some("ghost".to_string());
        let spec = ExperimentSpec {
            lexicon: &lex,
            catalog: &catalog,
            profiles: &profiles,
            config: &config,
            frequency: None,
            transcripts: None,
        };
        assert!(matches!(
            run_experiment(&spec),
            Err(ExperimentError::UnknownDonor { profile }) if profile == "ghost"
        ));

        let config = EvalConfig::default();
        let spec = ExperimentSpec {
            lexicon: &lex,
            catalog: &[],
            profiles: &profiles,
            config: &config,
            frequency: None,
            transcripts: None,
        };
        assert!(matches!(run_experiment(&spec), Err(ExperimentError::EmptyGrid)));
    }

    #[test]
    fn external_transcripts_replace_the_noise_channel_per_cell() {
        let (lex, catalog, profiles) = spec_parts();
        let config = EvalConfig::default();

        let mut overrides = TranscriptOverrides::new();
        overrides.insert(
            (ProfileId::new("p1"), ProfileId::new("p2"), "MN".to_string()),
            vec!["my".to_string(), "fame".to_string()],
        );
        let spec = ExperimentSpec {
            lexicon: &lex,
            catalog: &catalog,
            profiles: &profiles,
            config: &config,
            frequency: None,
            transcripts: Some(&overrides),
        };
        let outcome = run_experiment(&spec).unwrap();

        let overridden = outcome
            .results
            .iter()
            .find(|r| r.target.as_str() == "p1" && r.source.as_str() == "p2" && r.command == "MN")
            .unwrap();
        assert_eq!(overridden.wer, 0.5);
        assert!(!overridden.intent_hit, "required keyword was replaced");

        for record in &outcome.results {
            if record.command != overridden.command
                || record.target != overridden.target
                || record.source != overridden.source
            {
                assert!(record.intent_hit);
                assert_eq!(record.wer, 0.0);
            }
        }
    }

    #[test]
    fn explicit_axes_keep_the_matrix_square_without_records() {
        let records = vec![TrialRecord {
            target: ProfileId::new("p1"),
            source: ProfileId::new("p1"),
            command: "A".to_string(),
            intent_hit: true,
            wer: 0.0,
            confidence: 300,
            target_fraction: 1.0,
        }];
        let axis = vec![ProfileId::new("p1"), ProfileId::new("p2")];
        let matrix = cross_matrix_over(&records, &axis, &axis);
        assert_eq!(matrix.targets, matrix.sources);
        assert_eq!(matrix.confidence.len(), 2);
        assert!(matrix.confidence.iter().all(|row| row.len() == 2));
        assert_eq!(matrix.confidence[0][0], Some(300));
        assert_eq!(matrix.confidence[0][1], None);
        assert_eq!(matrix.confidence[1][0], None);
        assert_eq!(matrix.confidence[1][1], None);
    }
}
