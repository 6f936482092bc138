//! The built-in command catalog and its tab-separated file format.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use crate::lexicon::normalize_text;

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("malformed catalog line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate catalog id {id:?}")]
    DuplicateId { id: String },
    #[error("catalog entry {id:?}: {message}")]
    Invalid { id: String, message: String },
    #[error("failed to read catalog: {0}")]
    Io(#[from] std::io::Error),
}

/// One spoken command: an id like `AC3`, the exact text, the keywords that
/// gate its intent, and the slot words an attacker may vary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub id: String,
    pub text: String,
    pub required_keywords: BTreeSet<String>,
    pub slot_words: BTreeSet<String>,
}

impl CatalogEntry {
    /// The normalized token sequence of the command text.
    pub fn tokens(&self) -> Vec<String> {
        normalize_text(&self.text)
    }
}

/// The catalog bundled with the crate.
pub fn builtin_catalog() -> &'static [CatalogEntry] {
    static CACHE: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CACHE.get_or_init(|| {
        parse_catalog(include_str!("../data/commands.tsv"))
            .expect("bundled catalog is well formed")
    })
}

pub fn load_catalog<P: AsRef<Path>>(path: P) -> Result<Vec<CatalogEntry>, CatalogError> {
    parse_catalog(&fs::read_to_string(path)?)
}

pub fn parse_catalog(text: &str) -> Result<Vec<CatalogEntry>, CatalogError> {
    let mut entries: Vec<CatalogEntry> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim_end();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(CatalogError::Malformed {
                line,
                message: format!("expected 3 or 4 tab-separated fields, got {}", fields.len()),
            });
        }
        let id = fields[0].trim().to_string();
        let text = fields[1].trim().to_string();
        if id.is_empty() || text.is_empty() {
            return Err(CatalogError::Malformed {
                line,
                message: "empty id or text".to_string(),
            });
        }
        if entries.iter().any(|e| e.id == id) {
            return Err(CatalogError::DuplicateId { id });
        }
        let entry = CatalogEntry {
            id,
            text,
            required_keywords: split_words(fields[2]),
            slot_words: fields.get(3).map(|f| split_words(f)).unwrap_or_default(),
        };
        validate(&entry)?;
        entries.push(entry);
    }
    Ok(entries)
}

fn split_words(field: &str) -> BTreeSet<String> {
    field
        .split(',')
        .map(|w| w.trim().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

fn validate(entry: &CatalogEntry) -> Result<(), CatalogError> {
    let invalid = |message: String| CatalogError::Invalid {
        id: entry.id.clone(),
        message,
    };
    if entry.required_keywords.is_empty() {
        return Err(invalid("no required keywords".to_string()));
    }
    let tokens: BTreeSet<String> = entry.tokens().into_iter().collect();
    for word in &entry.required_keywords {
        if !tokens.contains(word) {
            return Err(invalid(format!("required keyword {word:?} not in text")));
        }
    }
    for word in &entry.slot_words {
        if !tokens.contains(word) {
            return Err(invalid(format!("slot word {word:?} not in text")));
        }
        if entry.required_keywords.contains(word) {
            return Err(invalid(format!("{word:?} is both required and a slot")));
        }
    }
    Ok(())
}
