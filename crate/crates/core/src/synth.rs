//! Concatenative command synthesis from unit inventories.
//!
//! Each command word is rendered by the first strategy that succeeds:
//!
//! 1. a whole-word unit from the target inventory,
//! 2. target diphone units for the word's span, restricted to an optional
//!    popularity mask,
//! 3. donor diphone units, unrestricted.
//!
//! Selected unit clips are joined with a short equal-gain crossfade. The
//! result records where every unit came from, so downstream evaluation can
//! reason about how much of the output is the target speaker's own voice.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::audio::{self, AudioClip, AudioError};
use crate::inventory::{Inventory, ProfileId};
use crate::lexicon::{Lexicon, LexiconError};
use crate::phones::Diphone;

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("cannot synthesize an empty command")]
    EmptyCommand,
    #[error("word {word:?} is not in the lexicon")]
    OutOfVocabulary { word: String },
    #[error("no unit available for diphone {diphone}")]
    UnsynthesizableDiphone { diphone: Diphone },
    #[error(transparent)]
    Audio(#[from] AudioError),
}

impl From<LexiconError> for SynthesisError {
    fn from(err: LexiconError) -> SynthesisError {
        match err {
            LexiconError::OutOfVocabulary { word } => SynthesisError::OutOfVocabulary { word },
            other => panic!("utterance planning cannot fail with {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    Word,
    Diphone,
}

/// One selected unit, in playback order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTraceEntry {
    /// Word text for word units, `LEFT-RIGHT` for diphone units.
    pub key: String,
    pub kind: UnitKind,
    pub source_profile: ProfileId,
    pub source_utterance: String,
    pub duration_seconds: f64,
}

/// Unit counts for one command word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenProvenance {
    pub token: String,
    /// Units spent on this word (1 for a whole-word unit).
    pub units: usize,
    /// How many of those came from the donor inventory.
    pub donor_units: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub audio: AudioClip,
    pub trace: Vec<UnitTraceEntry>,
    pub tokens: Vec<TokenProvenance>,
    /// Fraction of units drawn from the target inventory.
    pub target_fraction: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SynthesisRequest<'a> {
    pub lexicon: &'a Lexicon,
    /// Command words, already normalized to lexicon form.
    pub tokens: &'a [String],
    pub target: &'a Inventory,
    /// Fallback inventory for diphones the (masked) target cannot supply.
    pub donor: Option<&'a Inventory>,
    /// When set, only these diphones may come from the target inventory.
    /// Whole-word units are never masked.
    pub mask: Option<&'a BTreeSet<Diphone>>,
    pub crossfade_ms: f64,
}

impl SynthesisRequest<'_> {
    fn mask_allows(&self, diphone: Diphone) -> bool {
        self.mask.map_or(true, |mask| mask.contains(&diphone))
    }
}

pub fn synthesize(request: &SynthesisRequest) -> Result<SynthesisResult, SynthesisError> {
    if request.tokens.is_empty() {
        return Err(SynthesisError::EmptyCommand);
    }
    let plan = request.lexicon.plan_utterance(request.tokens)?;
    let spans = plan.word_diphone_spans();

    let mut clips: Vec<AudioClip> = Vec::new();
    let mut trace: Vec<UnitTraceEntry> = Vec::new();
    let mut tokens: Vec<TokenProvenance> = Vec::new();
    let mut target_units = 0usize;

    for (word, span) in plan.words.iter().zip(spans) {
        if let Some(unit) = request.target.pick_word(word) {
            clips.push(unit.clip.clone());
            trace.push(UnitTraceEntry {
                key: unit.word.clone(),
                kind: UnitKind::Word,
                source_profile: unit.profile.clone(),
                source_utterance: unit.source_utterance.clone(),
                duration_seconds: unit.clip.duration_seconds(),
            });
            target_units += 1;
            tokens.push(TokenProvenance {
                token: word.clone(),
                units: 1,
                donor_units: 0,
            });
            continue;
        }

        let mut units = 0usize;
        let mut donor_units = 0usize;
        for &diphone in &plan.diphones[span] {
            let unit = if request.mask_allows(diphone) {
                request.target.pick_diphone(diphone)
            } else {
                None
            };
            let unit = match unit {
                Some(unit) => {
                    target_units += 1;
                    unit
                }
                None => {
                    let fallback = request.donor.and_then(|d| d.pick_diphone(diphone));
                    donor_units += 1;
                    fallback.ok_or(SynthesisError::UnsynthesizableDiphone { diphone })?
                }
            };
            units += 1;
            clips.push(unit.clip.clone());
            trace.push(UnitTraceEntry {
                key: unit.diphone.to_string(),
                kind: UnitKind::Diphone,
                source_profile: unit.profile.clone(),
                source_utterance: unit.source_utterance.clone(),
                duration_seconds: unit.clip.duration_seconds(),
            });
        }
        tokens.push(TokenProvenance {
            token: word.clone(),
            units,
            donor_units,
        });
    }

    let audio = audio::concat(&clips, request.crossfade_ms)?;
    let total_units = trace.len();
    Ok(SynthesisResult {
        audio,
        trace,
        tokens,
        target_fraction: target_units as f64 / total_units as f64,
    })
}

/// Diphones the masked target inventory cannot supply: for every word
/// without a whole-word unit, the span diphones missing from the target
/// before any donor fallback. This is the list a donor would have to fill.
pub fn synthesis_gap(request: &SynthesisRequest) -> Result<BTreeSet<Diphone>, SynthesisError> {
    gap_with(request, |request, diphone| {
        request.mask_allows(diphone) && request.target.has_diphone(diphone)
    })
}

/// Diphones neither the masked target nor the donor can supply. Empty
/// exactly when [`synthesize`] would succeed.
pub fn residual_gap(request: &SynthesisRequest) -> Result<BTreeSet<Diphone>, SynthesisError> {
    gap_with(request, |request, diphone| {
        (request.mask_allows(diphone) && request.target.has_diphone(diphone))
            || request.donor.is_some_and(|d| d.has_diphone(diphone))
    })
}

fn gap_with(
    request: &SynthesisRequest,
    satisfied: impl Fn(&SynthesisRequest, Diphone) -> bool,
) -> Result<BTreeSet<Diphone>, SynthesisError> {
    if request.tokens.is_empty() {
        return Err(SynthesisError::EmptyCommand);
    }
    let plan = request.lexicon.plan_utterance(request.tokens)?;
    let spans = plan.word_diphone_spans();

    let mut gap = BTreeSet::new();
    for (word, span) in plan.words.iter().zip(spans) {
        if request.target.pick_word(word).is_some() {
            continue;
        }
        for &diphone in &plan.diphones[span] {
            if !satisfied(request, diphone) {
                gap.insert(diphone);
            }
        }
    }
    Ok(gap)
}
