//! Diphone coverage analytics over transcript corpora.
//!
//! A frequency table counts diphone tokens in planned utterances. From it we
//! rank diphones by popularity, mask inventories down to a popular subset,
//! measure how much of a required diphone set an inventory covers, and
//! estimate how many minutes of recorded speech reach a target coverage at an
//! assumed speaking rate.

use std::collections::{BTreeMap, BTreeSet};
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lexicon::Lexicon;
use crate::phones::Diphone;

/// Assumed speaking rate when converting token counts to recording time.
pub const DIPHONES_PER_MINUTE: f64 = 750.0;

#[derive(Debug, thiserror::Error)]
pub enum CoverageError {
    #[error("frequency table is empty")]
    EmptyTable,
    #[error("fraction {fraction} is outside (0, 1]")]
    InvalidFraction { fraction: f64 },
    #[error("coverage {requested} is unreachable; the corpus tops out at {max_fraction}")]
    Unreachable { requested: f64, max_fraction: f64 },
    #[error("malformed frequency CSV at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Diphone token counts for a transcript corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiphoneFrequencyTable {
    pub corpus_label: String,
    counts: BTreeMap<Diphone, u64>,
    total_tokens: u64,
}

impl DiphoneFrequencyTable {
    pub fn new(corpus_label: impl Into<String>) -> DiphoneFrequencyTable {
        DiphoneFrequencyTable {
            corpus_label: corpus_label.into(),
            counts: BTreeMap::new(),
            total_tokens: 0,
        }
    }

    pub fn from_counts(
        corpus_label: impl Into<String>,
        counts: impl IntoIterator<Item = (Diphone, u64)>,
    ) -> DiphoneFrequencyTable {
        let mut table = DiphoneFrequencyTable::new(corpus_label);
        for (diphone, count) in counts {
            table.add_count(diphone, count);
        }
        table
    }

    pub fn add(&mut self, diphone: Diphone) {
        self.add_count(diphone, 1);
    }

    pub fn add_count(&mut self, diphone: Diphone, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(diphone).or_insert(0) += count;
        self.total_tokens += count;
    }

    pub fn count(&self, diphone: Diphone) -> u64 {
        self.counts.get(&diphone).copied().unwrap_or(0)
    }

    /// Number of distinct diphones observed at least once.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> impl Iterator<Item = (Diphone, u64)> + '_ {
        self.counts.iter().map(|(&d, &c)| (d, c))
    }

    /// Diphones ordered by descending count; ties break toward the
    /// alphabetically earlier diphone so the ranking is total.
    pub fn by_popularity(&self) -> Vec<(Diphone, u64)> {
        let mut ranked: Vec<(Diphone, u64)> = self.counts().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked
    }

    /// The `ceil(fraction * distinct)` most popular diphones.
    pub fn top_fraction(&self, fraction: f64) -> Result<BTreeSet<Diphone>, CoverageError> {
        if self.is_empty() {
            return Err(CoverageError::EmptyTable);
        }
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(CoverageError::InvalidFraction { fraction });
        }
        let keep = (fraction * self.distinct() as f64).ceil() as usize;
        Ok(self
            .by_popularity()
            .into_iter()
            .take(keep)
            .map(|(d, _)| d)
            .collect())
    }

    pub fn merge(&mut self, other: &DiphoneFrequencyTable) {
        for (diphone, count) in other.counts() {
            self.add_count(diphone, count);
        }
    }
}

/// Diphone tokens of a transcript corpus in reading order, one planned
/// utterance per input line. Words missing from the lexicon are dropped from
/// their line and counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStream {
    pub tokens: Vec<Diphone>,
    pub skipped_words: usize,
}

pub fn corpus_diphone_stream<S: AsRef<str>>(
    lexicon: &Lexicon,
    lines: impl IntoIterator<Item = S>,
) -> CorpusStream {
    let mut tokens = Vec::new();
    let mut skipped_words = 0;
    for line in lines {
        let (line_tokens, skipped) = line_diphones(lexicon, line.as_ref());
        tokens.extend(line_tokens);
        skipped_words += skipped;
    }
    CorpusStream {
        tokens,
        skipped_words,
    }
}

fn line_diphones(lexicon: &Lexicon, line: &str) -> (Vec<Diphone>, usize) {
    let words = crate::lexicon::normalize_text(line);
    let mut known = Vec::with_capacity(words.len());
    let mut skipped = 0;
    for word in words {
        if lexicon.contains(&word) {
            known.push(word);
        } else {
            skipped += 1;
        }
    }
    if known.is_empty() {
        return (Vec::new(), skipped);
    }
    let plan = lexicon
        .plan_utterance(&known)
        .expect("planned words were filtered to the lexicon");
    (plan.diphones, skipped)
}

/// Builds a frequency table over many transcript lines in parallel. The
/// result is identical to counting the lines sequentially.
pub fn build_frequency_table<S: AsRef<str> + Sync>(
    corpus_label: impl Into<String>,
    lexicon: &Lexicon,
    lines: &[S],
) -> (DiphoneFrequencyTable, usize) {
    let (counts, skipped) = lines
        .par_iter()
        .map(|line| {
            let (tokens, skipped) = line_diphones(lexicon, line.as_ref());
            let mut counts: BTreeMap<Diphone, u64> = BTreeMap::new();
            for token in tokens {
                *counts.entry(token).or_insert(0) += 1;
            }
            (counts, skipped)
        })
        .reduce(
            || (BTreeMap::new(), 0),
            |(mut acc, acc_skipped), (counts, skipped)| {
                for (diphone, count) in counts {
                    *acc.entry(diphone).or_insert(0) += count;
                }
                (acc, acc_skipped + skipped)
            },
        );
    (
        DiphoneFrequencyTable::from_counts(corpus_label, counts),
        skipped,
    )
}

/// How well an available diphone set covers a required one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub required: BTreeSet<Diphone>,
    pub available: BTreeSet<Diphone>,
    pub covered: BTreeSet<Diphone>,
    pub missing: BTreeSet<Diphone>,
    /// `|covered| / |required|`, or 1.0 when nothing is required.
    pub fraction: f64,
}

impl CoverageReport {
    pub fn compute(available: &BTreeSet<Diphone>, required: &BTreeSet<Diphone>) -> CoverageReport {
        let covered: BTreeSet<Diphone> = required.intersection(available).copied().collect();
        let missing: BTreeSet<Diphone> = required.difference(available).copied().collect();
        let fraction = if required.is_empty() {
            1.0
        } else {
            covered.len() as f64 / required.len() as f64
        };
        CoverageReport {
            required: required.clone(),
            available: available.clone(),
            covered,
            missing,
            fraction,
        }
    }
}

/// Fraction of `required` present in `available`. An empty requirement is
/// trivially covered.
pub fn coverage_of(available: &BTreeSet<Diphone>, required: &BTreeSet<Diphone>) -> f64 {
    if required.is_empty() {
        return 1.0;
    }
    let hit = required.intersection(available).count();
    hit as f64 / required.len() as f64
}

/// Walks a corpus token stream and reports how many minutes of speech (at
/// [`DIPHONES_PER_MINUTE`]) it takes until the distinct diphones seen so far
/// cover `fraction` of `required`. Tokens outside the required set still cost
/// recording time.
pub fn estimate_minutes_for_coverage(
    tokens: &[Diphone],
    required: &BTreeSet<Diphone>,
    fraction: f64,
) -> Result<f64, CoverageError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CoverageError::InvalidFraction { fraction });
    }
    if required.is_empty() {
        return Ok(0.0);
    }
    let needed = required.len() as f64;
    let reached = |hit: usize| hit as f64 / needed + 1e-12 >= fraction;

    if reached(0) {
        return Ok(0.0);
    }
    let mut seen: BTreeSet<Diphone> = BTreeSet::new();
    let mut hit = 0usize;
    for (index, &token) in tokens.iter().enumerate() {
        if required.contains(&token) && seen.insert(token) {
            hit += 1;
            if reached(hit) {
                return Ok((index + 1) as f64 / DIPHONES_PER_MINUTE);
            }
        }
    }
    Err(CoverageError::Unreachable {
        requested: fraction,
        max_fraction: hit as f64 / needed,
    })
}

/// Writes `diphone,count` rows in popularity order.
pub fn write_frequency_csv<W: io::Write>(
    table: &DiphoneFrequencyTable,
    writer: W,
) -> Result<(), CoverageError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["diphone", "count"]).map_err(csv_io)?;
    for (diphone, count) in table.by_popularity() {
        out.write_record([diphone.to_string(), count.to_string()])
            .map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_frequency_csv<R: io::Read>(
    reader: R,
    corpus_label: impl Into<String>,
) -> Result<DiphoneFrequencyTable, CoverageError> {
    let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut table = DiphoneFrequencyTable::new(corpus_label);
    for (index, record) in input.records().enumerate() {
        let line = index + 2;
        let record = record.map_err(|e| CoverageError::Malformed {
            line,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(CoverageError::Malformed {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let diphone: Diphone = record[0].parse().map_err(|e| CoverageError::Malformed {
            line,
            message: format!("{e}"),
        })?;
        let count: u64 = record[1].parse().map_err(|_| CoverageError::Malformed {
            line,
            message: format!("bad count {:?}", &record[1]),
        })?;
        table.add_count(diphone, count);
    }
    Ok(table)
}

fn csv_io(err: csv::Error) -> CoverageError {
    match err.into_kind() {
        csv::ErrorKind::Io(io_err) => CoverageError::Io(io_err),
        other => CoverageError::Malformed {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diphone(s: &str) -> Diphone {
        s.parse().unwrap()
    }

    fn diphones(specs: &[&str]) -> Vec<Diphone> {
        specs.iter().map(|s| diphone(s)).collect()
    }

    fn toy_lexicon() -> Lexicon {
        let source = "AGAIN AH0 G EH1 N\nMY M AY1\nNAME N EY1 M\n";
        Lexicon::load(source.as_bytes()).unwrap()
    }

    #[test]
    fn counts_tokens_from_planned_utterances() {
        let lexicon = toy_lexicon();
        let (table, skipped) = build_frequency_table("toy", &lexicon, &["again"]);
        assert_eq!(skipped, 0);
        assert_eq!(table.total_tokens(), 5);
        assert_eq!(table.distinct(), 5);
        for d in ["PAU-AH", "AH-G", "G-EH", "EH-N", "N-PAU"] {
            assert_eq!(table.count(diphone(d)), 1, "{d}");
        }
    }

    #[test]
    fn oov_words_are_skipped_and_counted() {
        let lexicon = toy_lexicon();
        let stream = corpus_diphone_stream(&lexicon, ["my gazorp name", "blorp"]);
        assert_eq!(stream.skipped_words, 2);
        // "my name" plans as PAU M AY PAU N EY M PAU: seven diphones.
        assert_eq!(stream.tokens.len(), 7);
        assert_eq!(stream.tokens[0], diphone("PAU-M"));
        assert_eq!(stream.tokens[2], diphone("AY-PAU"));
    }

    #[test]
    fn popularity_ranks_by_count_then_diphone() {
        let table = DiphoneFrequencyTable::from_counts(
            "toy",
            [
                (diphone("S-T"), 3),
                (diphone("AH-G"), 5),
                (diphone("AA-B"), 3),
                (diphone("N-PAU"), 1),
            ],
        );
        let ranked: Vec<Diphone> = table.by_popularity().into_iter().map(|(d, _)| d).collect();
        assert_eq!(ranked, diphones(&["AH-G", "AA-B", "S-T", "N-PAU"]));
    }

    #[test]
    fn top_fraction_takes_the_ceiling() {
        let counts = (0..7u64).map(|i| {
            (
                Diphone::new(crate::Phoneme::ALL[i as usize], crate::Phoneme::ALL[0]),
                7 - i,
            )
        });
        let table = DiphoneFrequencyTable::from_counts("toy", counts);
        assert_eq!(table.distinct(), 7);
        assert_eq!(table.top_fraction(0.5).unwrap().len(), 4);
        assert_eq!(table.top_fraction(1.0).unwrap().len(), 7);
        assert_eq!(table.top_fraction(0.01).unwrap().len(), 1);

        assert!(matches!(
            table.top_fraction(0.0),
            Err(CoverageError::InvalidFraction { .. })
        ));
        assert!(matches!(
            table.top_fraction(1.5),
            Err(CoverageError::InvalidFraction { .. })
        ));
        assert!(matches!(
            table.top_fraction(f64::NAN),
            Err(CoverageError::InvalidFraction { .. })
        ));
        assert!(matches!(
            DiphoneFrequencyTable::new("empty").top_fraction(0.5),
            Err(CoverageError::EmptyTable)
        ));
    }

    #[test]
    fn top_fraction_breaks_count_ties_alphabetically() {
        let table = DiphoneFrequencyTable::from_counts(
            "toy",
            [
                (diphone("Z-ZH"), 2),
                (diphone("AA-AE"), 2),
                (diphone("M-N"), 2),
            ],
        );
        let top = table.top_fraction(0.3).unwrap();
        assert_eq!(top.into_iter().collect::<Vec<_>>(), diphones(&["AA-AE"]));
        let two = table.top_fraction(0.6).unwrap();
        assert_eq!(two.into_iter().collect::<Vec<_>>(), diphones(&["AA-AE", "M-N"]));
    }

    #[test]
    fn coverage_is_a_simple_hit_rate() {
        let available: BTreeSet<Diphone> = diphones(&["AH-G", "G-EH"]).into_iter().collect();
        let required: BTreeSet<Diphone> =
            diphones(&["AH-G", "G-EH", "EH-N", "N-PAU"]).into_iter().collect();
        assert_eq!(coverage_of(&available, &required), 0.5);
        assert_eq!(coverage_of(&available, &BTreeSet::new()), 1.0);
        assert_eq!(coverage_of(&BTreeSet::new(), &required), 0.0);
    }

    #[test]
    fn estimate_walks_the_stream_until_coverage() {
        let tokens = diphones(&["S-T", "AH-G", "S-T", "G-EH", "S-T"]);
        let required: BTreeSet<Diphone> = diphones(&["AH-G", "G-EH"]).into_iter().collect();

        let half = estimate_minutes_for_coverage(&tokens, &required, 0.5).unwrap();
        assert!((half - 2.0 / DIPHONES_PER_MINUTE).abs() < 1e-12);
        let full = estimate_minutes_for_coverage(&tokens, &required, 1.0).unwrap();
        assert!((full - 4.0 / DIPHONES_PER_MINUTE).abs() < 1e-12);
        assert!(full > half);
    }

    #[test]
    fn estimate_reports_unreachable_coverage() {
        let tokens = diphones(&["AH-G"]);
        let required: BTreeSet<Diphone> = diphones(&["AH-G", "ZH-PAU"]).into_iter().collect();
        match estimate_minutes_for_coverage(&tokens, &required, 1.0) {
            Err(CoverageError::Unreachable {
                requested,
                max_fraction,
            }) => {
                assert_eq!(requested, 1.0);
                assert_eq!(max_fraction, 0.5);
            }
            other => panic!("expected Unreachable, got {other:?}"),
        }

        assert_eq!(
            estimate_minutes_for_coverage(&tokens, &BTreeSet::new(), 0.9).unwrap(),
            0.0
        );
        assert!(matches!(
            estimate_minutes_for_coverage(&tokens, &required, 0.0),
            Err(CoverageError::InvalidFraction { .. })
        ));
    }

    #[test]
    fn csv_round_trips_in_popularity_order() {
        let table = DiphoneFrequencyTable::from_counts(
            "toy",
            [
                (diphone("AH-G"), 5),
                (diphone("S-T"), 3),
                (diphone("N-PAU"), 1),
            ],
        );
        let mut buffer = Vec::new();
        write_frequency_csv(&table, &mut buffer).unwrap();
        let text = String::from_utf8(buffer.clone()).unwrap();
        assert!(text.starts_with("diphone,count\nAH-G,5\n"), "{text}");

        let reread = read_frequency_csv(buffer.as_slice(), "toy").unwrap();
        assert_eq!(reread, table);
    }

    #[test]
    fn malformed_csv_is_reported_with_line_numbers() {
        let bad_diphone = "diphone,count\nAH-G,5\nNOPE,2\n";
        match read_frequency_csv(bad_diphone.as_bytes(), "x") {
            Err(CoverageError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected Malformed, got {other:?}"),
        }
        let bad_count = "diphone,count\nAH-G,many\n";
        assert!(matches!(
            read_frequency_csv(bad_count.as_bytes(), "x"),
            Err(CoverageError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn parallel_build_matches_sequential_counting() {
        let lexicon = toy_lexicon();
        let lines: Vec<String> = (0..200)
            .map(|i| match i % 4 {
                0 => "my name again".to_string(),
                1 => "again again".to_string(),
                2 => "name gazorp my".to_string(),
                _ => "my".to_string(),
            })
            .collect();

        let (parallel, skipped) = build_frequency_table("toy", &lexicon, &lines);
        let stream = corpus_diphone_stream(&lexicon, &lines);
        let mut sequential = DiphoneFrequencyTable::new("toy");
        for &token in &stream.tokens {
            sequential.add(token);
        }
        assert_eq!(parallel, sequential);
        assert_eq!(skipped, stream.skipped_words);
        assert_eq!(skipped, 50);
    }

    #[test]
    fn coverage_report_partitions_the_required_set() {
        let required: BTreeSet<Diphone> = diphones(&["PAU-M", "M-AY", "AY-PAU"]).into_iter().collect();
        let available: BTreeSet<Diphone> =
            diphones(&["PAU-M", "M-AY", "N-EY"]).into_iter().collect();

        let report = CoverageReport::compute(&available, &required);
        assert_eq!(report.covered, diphones(&["PAU-M", "M-AY"]).into_iter().collect());
        assert_eq!(report.missing, diphones(&["AY-PAU"]).into_iter().collect());
        assert!(report.covered.is_disjoint(&report.missing));
        assert_eq!(report.covered.len() + report.missing.len(), required.len());
        assert_eq!(report.fraction, coverage_of(&available, &required));

        let disjoint = CoverageReport::compute(&BTreeSet::new(), &required);
        assert_eq!(disjoint.fraction, 0.0);
        assert_eq!(disjoint.missing, required);

        let trivial = CoverageReport::compute(&available, &BTreeSet::new());
        assert_eq!(trivial.fraction, 1.0);
    }
}
