//! Praat TextGrid parsing for forced-alignment output.
//!
//! Accepts both the long (`key = value`) and short (bare values) text
//! syntaxes, interval tiers only. Phone labels are normalized at parse time:
//! silence markers become the reserved `PAU` label and ARPAbet stress digits
//! are stripped, so everything downstream works with stress-free symbols.

use std::fs;
use std::io::Read;
use std::path::Path;

/// Silence markers normalized to `PAU`, compared case-insensitively after
/// trimming. These are the markers MFA-style aligners emit.
const SILENCE_LABELS: [&str; 3] = ["sil", "sp", "spn"];

/// Tolerance for word intervals spanning whole phone intervals, in seconds.
pub const WORD_SPAN_TOLERANCE: f64 = 1e-3;

/// Interval ends may overshoot the stated duration by at most this much.
const DURATION_TOLERANCE: f64 = 1e-6;

/// Upper bound on the tier count a file may declare; anything larger is
/// treated as corrupt rather than allocated.
const MAX_TIERS: usize = 1_000;

#[derive(Debug, thiserror::Error)]
pub enum TextGridError {
    #[error("malformed TextGrid at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("TextGrid has no {name:?} tier")]
    MissingTier { name: String },
    #[error("non-monotone intervals in tier {tier:?} at line {line}")]
    NonMonotoneIntervals { tier: String, line: usize },
    #[error("unsupported tier class {class:?} at line {line}, only IntervalTier is supported")]
    UnsupportedTier { class: String, line: usize },
    #[error("word {word:?} at {start:.3}s does not span a contiguous run of whole phone intervals")]
    WordPhoneMismatch { word: String, start: f64 },
    #[error("failed to read TextGrid: {0}")]
    Io(#[from] std::io::Error),
}

/// One labeled time span. Times are in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub label: String,
}

/// A named sequence of intervals, sorted by start and non-overlapping.
#[derive(Debug, Clone, PartialEq)]
pub struct Tier {
    pub name: String,
    pub intervals: Vec<Interval>,
}

/// A parsed alignment: every tier of the TextGrid plus the total duration.
/// `audio_path` is empty after parsing; callers pairing the grid with a WAV
/// fill it in.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub audio_path: String,
    pub duration: f64,
    pub tiers: Vec<Tier>,
}

impl Alignment {
    /// Looks a tier up by name, case-insensitively.
    pub fn tier(&self, name: &str) -> Option<&Tier> {
        self.tiers
            .iter()
            .find(|t| t.name.eq_ignore_ascii_case(name))
    }
}

/// Normalizes a phone-tier label: silence markers (empty, `sil`, `sp`, `spn`)
/// map to `PAU`; otherwise trailing stress digits are stripped and the symbol
/// is uppercased, so `AH0` becomes `AH`.
pub fn normalize_label(raw: &str) -> String {
    let trimmed = raw.trim();
    if is_silence(trimmed) {
        return "PAU".to_string();
    }
    let stripped = trimmed.trim_end_matches(|c: char| c.is_ascii_digit());
    if stripped.is_empty() {
        // All-digit labels are garbage, not stress-marked phones; keep them
        // so normalization stays idempotent and the error surfaces later.
        return trimmed.to_ascii_uppercase();
    }
    stripped.to_ascii_uppercase()
}

fn is_silence(trimmed: &str) -> bool {
    trimmed.is_empty() || SILENCE_LABELS.iter().any(|s| trimmed.eq_ignore_ascii_case(s))
}

/// Normalizes a word-tier label: silence markers map to `PAU`, anything else
/// is kept verbatim apart from trimming.
fn normalize_word_label(raw: &str) -> String {
    let trimmed = raw.trim();
    if is_silence(trimmed) {
        return "PAU".to_string();
    }
    trimmed.to_string()
}

pub fn parse_textgrid_file<P: AsRef<Path>>(path: P) -> Result<Alignment, TextGridError> {
    let bytes = fs::read(path)?;
    parse_textgrid(bytes.as_slice())
}

/// Parses a TextGrid from raw bytes (UTF-8, or UTF-16 with a BOM).
pub fn parse_textgrid<R: Read>(mut reader: R) -> Result<Alignment, TextGridError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let text = decode(&bytes)?;
    parse_textgrid_str(&text)
}

pub fn parse_textgrid_str(text: &str) -> Result<Alignment, TextGridError> {
    let mut values = ValueStream::new(text);

    let (line, file_type) = values.expect_text("file type header")?;
    if file_type != "ooTextFile" {
        return Err(malformed(line, format!("expected ooTextFile, got {file_type:?}")));
    }
    let (line, class) = values.expect_text("object class header")?;
    if class != "TextGrid" {
        return Err(malformed(line, format!("expected TextGrid object, got {class:?}")));
    }

    let (_, xmin) = values.expect_number("global xmin")?;
    let (line, xmax) = values.expect_number("global xmax")?;
    if xmax < xmin {
        return Err(malformed(line, "global xmax is before xmin".to_string()));
    }
    let duration = xmax;

    let (_, has_tiers) = values.expect_flag("tiers flag")?;
    let mut tiers = Vec::new();
    if has_tiers {
        let (line, count) = values.expect_number("tier count")?;
        let count = integer_count(count, MAX_TIERS)
            .ok_or_else(|| malformed(line, format!("implausible tier count {count}")))?;
        for _ in 0..count {
            tiers.push(parse_tier(&mut values, duration)?);
        }
    }

    if let Some((line, _)) = values.next_value()? {
        return Err(malformed(line, "trailing content after final tier".to_string()));
    }

    for required in ["words", "phones"] {
        if !tiers.iter().any(|t| t.name.eq_ignore_ascii_case(required)) {
            return Err(TextGridError::MissingTier {
                name: required.to_string(),
            });
        }
    }

    let alignment = Alignment {
        audio_path: String::new(),
        duration,
        tiers,
    };
    validate_word_spans(&alignment)?;
    Ok(alignment)
}

fn parse_tier(values: &mut ValueStream<'_>, duration: f64) -> Result<Tier, TextGridError> {
    let (line, class) = values.expect_text("tier class")?;
    match class.as_str() {
        "IntervalTier" => {}
        "TextTier" | "PointTier" => {
            return Err(TextGridError::UnsupportedTier { class, line });
        }
        _ => return Err(malformed(line, format!("unknown tier class {class:?}"))),
    }

    let (_, name) = values.expect_text("tier name")?;
    let (_, tier_xmin) = values.expect_number("tier xmin")?;
    let (line, tier_xmax) = values.expect_number("tier xmax")?;
    if tier_xmax < tier_xmin {
        return Err(malformed(line, format!("tier {name:?} xmax is before xmin")));
    }

    let (line, count) = values.expect_number("interval count")?;
    let count = integer_count(count, usize::MAX)
        .ok_or_else(|| malformed(line, format!("implausible interval count {count}")))?;

    let phone_tier = name.eq_ignore_ascii_case("phones");
    let mut intervals: Vec<Interval> = Vec::new();
    for _ in 0..count {
        let (_, start) = values.expect_number("interval xmin")?;
        let (end_line, end) = values.expect_number("interval xmax")?;
        let (_, raw_label) = values.expect_text("interval text")?;

        if end <= start {
            return Err(TextGridError::NonMonotoneIntervals {
                tier: name.clone(),
                line: end_line,
            });
        }
        if let Some(prev) = intervals.last() {
            if start < prev.end - 1e-9 {
                return Err(TextGridError::NonMonotoneIntervals {
                    tier: name.clone(),
                    line: end_line,
                });
            }
        }
        if end > duration + DURATION_TOLERANCE {
            return Err(malformed(
                end_line,
                format!("interval ends at {end} but the grid ends at {duration}"),
            ));
        }

        let label = if phone_tier {
            normalize_label(&raw_label)
        } else {
            normalize_word_label(&raw_label)
        };
        intervals.push(Interval { start, end, label });
    }

    Ok(Tier { name, intervals })
}

/// Every word interval must equal the union of a contiguous run of phone
/// intervals, within [`WORD_SPAN_TOLERANCE`].
fn validate_word_spans(alignment: &Alignment) -> Result<(), TextGridError> {
    let words = alignment.tier("words").expect("checked above");
    let phones = alignment.tier("phones").expect("checked above");
    let tol = WORD_SPAN_TOLERANCE;

    let mut i = 0;
    for word in &words.intervals {
        let mismatch = || TextGridError::WordPhoneMismatch {
            word: word.label.clone(),
            start: word.start,
        };
        while i < phones.intervals.len() && phones.intervals[i].start < word.start - tol {
            i += 1;
        }
        if i >= phones.intervals.len() || (phones.intervals[i].start - word.start).abs() > tol {
            return Err(mismatch());
        }
        let mut j = i;
        loop {
            let phone = &phones.intervals[j];
            if (phone.end - word.end).abs() <= tol {
                break;
            }
            if phone.end > word.end + tol {
                return Err(mismatch());
            }
            match phones.intervals.get(j + 1) {
                Some(next) if next.start - phone.end <= tol => j += 1,
                _ => return Err(mismatch()),
            }
        }
        i = j + 1;
    }
    Ok(())
}

/// Renders an alignment back to long-format TextGrid text. Parsing the result
/// reproduces the alignment field for field.
pub fn serialize_textgrid(alignment: &Alignment) -> String {
    let mut out = String::new();
    out.push_str("File type = \"ooTextFile\"\n");
    out.push_str("Object class = \"TextGrid\"\n\n");
    out.push_str("xmin = 0\n");
    out.push_str(&format!("xmax = {}\n", alignment.duration));
    out.push_str("tiers? <exists>\n");
    out.push_str(&format!("size = {}\n", alignment.tiers.len()));
    out.push_str("item []:\n");
    for (t, tier) in alignment.tiers.iter().enumerate() {
        out.push_str(&format!("    item [{}]:\n", t + 1));
        out.push_str("        class = \"IntervalTier\"\n");
        out.push_str(&format!("        name = \"{}\"\n", quote(&tier.name)));
        out.push_str("        xmin = 0\n");
        out.push_str(&format!("        xmax = {}\n", alignment.duration));
        out.push_str(&format!("        intervals: size = {}\n", tier.intervals.len()));
        for (k, interval) in tier.intervals.iter().enumerate() {
            out.push_str(&format!("        intervals [{}]:\n", k + 1));
            out.push_str(&format!("            xmin = {}\n", interval.start));
            out.push_str(&format!("            xmax = {}\n", interval.end));
            out.push_str(&format!("            text = \"{}\"\n", quote(&interval.label)));
        }
    }
    out
}

fn quote(label: &str) -> String {
    label.replace('"', "\"\"")
}

fn malformed(line: usize, message: String) -> TextGridError {
    TextGridError::Malformed { line, message }
}

fn integer_count(value: f64, cap: usize) -> Option<usize> {
    if !value.is_finite() || value < 0.0 || value.fract() != 0.0 || value > 1e9 {
        return None;
    }
    let n = value as usize;
    (n <= cap).then_some(n)
}

fn decode(bytes: &[u8]) -> Result<String, TextGridError> {
    if bytes.starts_with(&[0xFF, 0xFE]) || bytes.starts_with(&[0xFE, 0xFF]) {
        let big_endian = bytes[0] == 0xFE;
        let units: Vec<u16> = bytes[2..]
            .chunks(2)
            .map(|pair| {
                let lo = *pair.first().unwrap_or(&0);
                let hi = *pair.get(1).unwrap_or(&0);
                if big_endian {
                    u16::from_be_bytes([lo, hi])
                } else {
                    u16::from_le_bytes([lo, hi])
                }
            })
            .collect();
        char::decode_utf16(units.iter().copied())
            .collect::<Result<String, _>>()
            .map_err(|_| malformed(1, "invalid UTF-16 text".to_string()))
    } else {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| malformed(1, "not valid UTF-8 text".to_string()))?;
        Ok(text.trim_start_matches('\u{FEFF}').to_string())
    }
}

enum Value {
    Number(f64),
    Text(String),
    Flag(bool),
}

struct ValueStream<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> ValueStream<'a> {
    fn new(text: &'a str) -> ValueStream<'a> {
        ValueStream {
            lines: text.lines().enumerate(),
            last_line: 0,
        }
    }

    /// Pulls the next value line, skipping blank and structural lines
    /// (`item [1]:`, `intervals [2]:`). Long-format `key = value` lines and
    /// bare short-format lines yield the same value sequence.
    fn next_value(&mut self) -> Result<Option<(usize, Value)>, TextGridError> {
        for (index, raw) in self.lines.by_ref() {
            let line = index + 1;
            self.last_line = line;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed.contains("<exists>") {
                return Ok(Some((line, Value::Flag(true))));
            }
            if trimmed.contains("<absent>") {
                return Ok(Some((line, Value::Flag(false))));
            }
            let payload = if trimmed.starts_with('"') {
                trimmed
            } else if let Some(eq) = trimmed.find('=') {
                trimmed[eq + 1..].trim()
            } else if is_structural(trimmed) {
                continue;
            } else {
                trimmed
            };
            if payload.starts_with('"') {
                let text = parse_quoted(payload, line)?;
                return Ok(Some((line, Value::Text(text))));
            }
            if let Ok(number) = payload.parse::<f64>() {
                if !number.is_finite() {
                    return Err(malformed(line, format!("non-finite number {payload:?}")));
                }
                return Ok(Some((line, Value::Number(number))));
            }
            return Err(malformed(line, format!("unrecognized content {trimmed:?}")));
        }
        Ok(None)
    }

    fn expect_number(&mut self, what: &str) -> Result<(usize, f64), TextGridError> {
        match self.next_value()? {
            Some((line, Value::Number(n))) => Ok((line, n)),
            Some((line, _)) => Err(malformed(line, format!("expected a number for {what}"))),
            None => Err(self.eof(what)),
        }
    }

    fn expect_text(&mut self, what: &str) -> Result<(usize, String), TextGridError> {
        match self.next_value()? {
            Some((line, Value::Text(s))) => Ok((line, s)),
            Some((line, _)) => Err(malformed(line, format!("expected a string for {what}"))),
            None => Err(self.eof(what)),
        }
    }

    fn expect_flag(&mut self, what: &str) -> Result<(usize, bool), TextGridError> {
        match self.next_value()? {
            Some((line, Value::Flag(b))) => Ok((line, b)),
            Some((line, _)) => Err(malformed(line, format!("expected <exists> for {what}"))),
            None => Err(self.eof(what)),
        }
    }

    fn eof(&self, what: &str) -> TextGridError {
        malformed(
            self.last_line.max(1),
            format!("unexpected end of file while reading {what}"),
        )
    }
}

/// Long-format structural lines that carry no value of their own.
fn is_structural(trimmed: &str) -> bool {
    let Some(head) = trimmed.split([' ', '\t', '[']).next() else {
        return false;
    };
    matches!(head, "item" | "intervals" | "points") && trimmed.ends_with(':')
}

fn parse_quoted(payload: &str, line: usize) -> Result<String, TextGridError> {
    let inner = &payload[1..];
    let mut out = String::new();
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '"' {
            if chars.peek() == Some(&'"') {
                chars.next();
                out.push('"');
                continue;
            }
            let rest: String = chars.collect();
            if !rest.trim().is_empty() {
                return Err(malformed(line, format!("trailing content after string: {rest:?}")));
            }
            return Ok(out);
        }
        out.push(c);
    }
    Err(malformed(line, "unterminated string".to_string()))
}
