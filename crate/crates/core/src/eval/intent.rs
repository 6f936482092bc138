//! Keyword-gated intent matching against the command catalog.
//!
//! A template is a candidate only when every required keyword appears in the
//! transcript. Candidates are ranked by token-set overlap (Jaccard) with the
//! template's canonical wording, then by word error rate, then by catalog
//! order, so slot words and filler can garble without losing the intent.

use std::collections::BTreeSet;

use crate::catalog::CatalogEntry;
use crate::eval::wer::word_error_rate;
use crate::lexicon::normalize_text;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntentTemplate {
    pub id: String,
    pub canonical_tokens: Vec<String>,
    pub canonical_set: BTreeSet<String>,
    pub required_keywords: BTreeSet<String>,
}

impl From<&CatalogEntry> for IntentTemplate {
    fn from(entry: &CatalogEntry) -> IntentTemplate {
        let canonical_tokens = entry.tokens();
        let canonical_set = canonical_tokens.iter().cloned().collect();
        IntentTemplate {
            id: entry.id.clone(),
            canonical_tokens,
            canonical_set,
            required_keywords: entry.required_keywords.clone(),
        }
    }
}

pub fn intent_templates(catalog: &[CatalogEntry]) -> Vec<IntentTemplate> {
    catalog.iter().map(IntentTemplate::from).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntentMatch {
    pub id: String,
    /// Jaccard overlap between transcript and canonical token sets.
    pub score: f64,
    /// Word error rate of the transcript against the canonical wording.
    pub wer: f64,
}

/// Picks the best template for a transcript, or `None` when no template's
/// required keywords are all present.
pub fn match_intent(templates: &[IntentTemplate], transcript: &[String]) -> Option<IntentMatch> {
    let transcript_set: BTreeSet<&str> = transcript.iter().map(String::as_str).collect();

    let mut best: Option<IntentMatch> = None;
    for template in templates {
        if !template
            .required_keywords
            .iter()
            .all(|k| transcript_set.contains(k.as_str()))
        {
            continue;
        }
        let intersection = template
            .canonical_set
            .iter()
            .filter(|t| transcript_set.contains(t.as_str()))
            .count();
        let union = template.canonical_set.len() + transcript_set.len() - intersection;
        let score = intersection as f64 / union as f64;
        let wer = word_error_rate(&template.canonical_tokens, transcript)
            .expect("catalog texts are never empty");

        let better = match &best {
            None => true,
            Some(current) => {
                score > current.score || (score == current.score && wer < current.wer)
            }
        };
        if better {
            best = Some(IntentMatch {
                id: template.id.clone(),
                score,
                wer,
            });
        }
    }
    best
}

/// Convenience wrapper that normalizes raw text first.
pub fn match_intent_text(templates: &[IntentTemplate], text: &str) -> Option<IntentMatch> {
    match_intent(templates, &normalize_text(text))
}
