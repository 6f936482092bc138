//! Pronunciation dictionary and utterance planning.
//!
//! Plans interleave the silence pseudo-phone `PAU` between every pair of
//! adjacent words and at both utterance edges, so word-boundary diphones are
//! ordinary `PAU`-adjacent pairs and an utterance with `n` phones always
//! yields `n - 1` diphones.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use crate::phones::{Diphone, Phoneme};

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("malformed dictionary line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("unknown phone {token:?} on dictionary line {line}")]
    UnknownPhone { line: usize, token: String },
    #[error("word {word:?} is not in the dictionary")]
    OutOfVocabulary { word: String },
    #[error("failed to read dictionary: {0}")]
    Io(#[from] std::io::Error),
}

/// One dictionary entry: a lowercase word and its stress-free phone sequence.
/// The sequence is non-empty and never contains `PAU`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pronunciation {
    pub word: String,
    pub phones: Vec<Phoneme>,
}

/// A pronunciation dictionary with case-insensitive lookup.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, Pronunciation>,
}

/// The diphone plan for one utterance: the normalized words, the phone
/// sequence with `PAU` at the edges and between words, and every adjacent
/// phone pair in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtterancePlan {
    pub words: Vec<String>,
    pub phones_with_pauses: Vec<Phoneme>,
    pub diphones: Vec<Diphone>,
}

impl UtterancePlan {
    /// Index ranges into `diphones` owned by each word, in word order. Word
    /// `k`'s range runs from its leading `PAU`-boundary diphone through its
    /// trailing one; the ranges partition the whole diphone sequence.
    pub fn word_diphone_spans(&self) -> Vec<Range<usize>> {
        let pau_positions: Vec<usize> = self
            .phones_with_pauses
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_pau())
            .map(|(i, _)| i)
            .collect();
        pau_positions
            .windows(2)
            .map(|pair| pair[0]..pair[1])
            .collect()
    }
}

impl Lexicon {
    /// Loads a CMUdict-format dictionary: one `WORD PHONE PHONE ...` entry per
    /// line, `;;;` comments, `WORD(2)` alternate pronunciations (the first
    /// listed entry for a word wins), stress digits stripped.
    pub fn load<R: Read>(reader: R) -> Result<Lexicon, LexiconError> {
        let mut entries = HashMap::new();
        for (index, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = index + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with(";;;") {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let head = tokens.next().expect("non-empty line has a first token");
            let word = strip_variant(head).to_lowercase();
            if word.is_empty() {
                return Err(LexiconError::MalformedLine {
                    line: line_no,
                    message: "entry has no word".to_string(),
                });
            }
            let mut phones = Vec::new();
            for token in tokens {
                let phone = Phoneme::from_arpabet(token).ok_or_else(|| LexiconError::UnknownPhone {
                    line: line_no,
                    token: token.to_string(),
                })?;
                if phone.is_pau() {
                    return Err(LexiconError::UnknownPhone {
                        line: line_no,
                        token: token.to_string(),
                    });
                }
                phones.push(phone);
            }
            if phones.is_empty() {
                return Err(LexiconError::MalformedLine {
                    line: line_no,
                    message: format!("entry {word:?} has no phones"),
                });
            }
            entries
                .entry(word.clone())
                .or_insert(Pronunciation { word, phones });
        }
        Ok(Lexicon { entries })
    }

    pub fn load_path<P: AsRef<Path>>(path: P) -> Result<Lexicon, LexiconError> {
        Lexicon::load(File::open(path)?)
    }

    /// The dictionary bundled with the toy corpus, compiled into the binary.
    pub fn builtin() -> &'static Lexicon {
        static BUILTIN: OnceLock<Lexicon> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Lexicon::load(include_str!("../data/lexicon.dict").as_bytes())
                .expect("bundled lexicon is well formed")
        })
    }

    pub fn lookup(&self, word: &str) -> Option<&Pronunciation> {
        self.entries.get(&word.to_lowercase())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup(word).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Plans an utterance over already-normalized tokens. An empty token list
    /// plans to a lone `PAU` and no diphones.
    pub fn plan_utterance<S: AsRef<str>>(&self, tokens: &[S]) -> Result<UtterancePlan, LexiconError> {
        let mut words = Vec::with_capacity(tokens.len());
        let mut phones = vec![Phoneme::PAU];
        for token in tokens {
            let token = token.as_ref();
            let entry = self
                .lookup(token)
                .ok_or_else(|| LexiconError::OutOfVocabulary {
                    word: token.to_string(),
                })?;
            words.push(entry.word.clone());
            phones.extend_from_slice(&entry.phones);
            phones.push(Phoneme::PAU);
        }
        let diphones = phones
            .windows(2)
            .map(|pair| Diphone::new(pair[0], pair[1]))
            .collect();
        Ok(UtterancePlan {
            words,
            phones_with_pauses: phones,
            diphones,
        })
    }

    /// Normalizes raw text and plans it in one step.
    pub fn plan_text(&self, text: &str) -> Result<UtterancePlan, LexiconError> {
        self.plan_utterance(&normalize_text(text))
    }

    /// The union of plan diphones over a set of command texts, in canonical
    /// order. This is the coverage denominator for a command list.
    pub fn required_diphones<S: AsRef<str>>(
        &self,
        commands: &[S],
    ) -> Result<BTreeSet<Diphone>, LexiconError> {
        let mut required = BTreeSet::new();
        for command in commands {
            required.extend(self.plan_text(command.as_ref())?.diphones.iter().copied());
        }
        Ok(required)
    }
}

fn strip_variant(head: &str) -> &str {
    match head.find('(') {
        Some(open) if head.ends_with(')') => &head[..open],
        _ => head,
    }
}

/// Lowercases, strips punctuation, and splits on whitespace. Apostrophes
/// survive inside tokens (`dentist's` stays one token) but are trimmed from
/// token edges.
pub fn normalize_text(raw: &str) -> Vec<String> {
    raw.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '\'' { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .map(|token| token.trim_matches('\''))
        .filter(|token| !token.is_empty())
        .map(str::to_string)
        .collect()
}
