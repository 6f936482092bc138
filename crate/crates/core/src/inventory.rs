//! Unit inventories: diphone and word units cut from aligned audio.
//!
//! Diphone units run from the midpoint of the left phone to the midpoint of
//! the right phone, so `n` phone intervals always yield `n - 1` units. Word
//! units keep a half-phone margin on both sides (halves of the neighboring
//! `PAU` intervals at utterance edges). Stored cut times re-slice the source
//! audio to the exact unit clip.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audio::{self, AudioClip, AudioError};
use crate::phones::{Diphone, Phoneme};
use crate::textgrid::{Alignment, Tier, WORD_SPAN_TOLERANCE};

/// Alignment and audio durations may disagree by at most this much.
pub const ALIGNMENT_AUDIO_TOLERANCE_SECONDS: f64 = 0.050;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const UNITS_DIR: &str = "units";

#[derive(Debug, thiserror::Error)]
pub enum InventoryError {
    #[error("alignment lasts {alignment_seconds:.3}s but audio lasts {audio_seconds:.3}s (tolerance {ALIGNMENT_AUDIO_TOLERANCE_SECONDS}s)")]
    AlignmentAudioMismatch {
        alignment_seconds: f64,
        audio_seconds: f64,
    },
    #[error("alignment has no {name:?} tier")]
    MissingTier { name: String },
    #[error("utterance {utterance:?} has non-phone label {label:?} in its phones tier")]
    UnknownPhoneLabel { label: String, utterance: String },
    #[error("utterance {utterance:?}: word {word:?} does not line up with the phones tier")]
    WordSpanMismatch { word: String, utterance: String },
    #[error("cannot merge inventories for {found} into {expected}")]
    ProfileMismatch { expected: ProfileId, found: ProfileId },
    #[error("corrupt inventory manifest {path}: {message}")]
    CorruptManifest { path: PathBuf, message: String },
    #[error("unit blob missing: {path}")]
    MissingBlob { path: PathBuf },
    #[error("unit blob fails its checksum: {path}")]
    ChecksumMismatch { path: PathBuf },
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Opaque speaker-profile identifier, e.g. `p288`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProfileId(String);

impl ProfileId {
    pub fn new(id: impl Into<String>) -> ProfileId {
        ProfileId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ProfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ProfileId {
    fn from(s: &str) -> ProfileId {
        ProfileId::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    #[default]
    Unspecified,
}

impl std::str::FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "male" | "m" => Ok(Gender::Male),
            "female" | "f" => Ok(Gender::Female),
            "unspecified" => Ok(Gender::Unspecified),
            other => Err(format!("unknown gender {other:?}")),
        }
    }
}

/// One diphone cut: the second half of the left phone plus the first half of
/// the right phone.
#[derive(Debug, Clone, PartialEq)]
pub struct DiphoneUnit {
    pub diphone: Diphone,
    pub clip: AudioClip,
    pub source_utterance: String,
    pub cut_start: f64,
    pub cut_end: f64,
    pub profile: ProfileId,
}

/// One whole-word cut with half-phone margins on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct WordUnit {
    pub word: String,
    pub clip: AudioClip,
    pub source_utterance: String,
    pub cut_start: f64,
    pub cut_end: f64,
    pub lead_margin: f64,
    pub tail_margin: f64,
    pub profile: ProfileId,
}

/// All units extracted for one speaker profile. Unit lists are kept sorted by
/// clip duration (ties by source utterance, then cut time) so median picking
/// and serialization are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Inventory {
    pub profile: ProfileId,
    pub gender: Gender,
    diphones: BTreeMap<Diphone, Vec<DiphoneUnit>>,
    words: BTreeMap<String, Vec<WordUnit>>,
}

impl Inventory {
    pub fn new(profile: ProfileId, gender: Gender) -> Inventory {
        Inventory {
            profile,
            gender,
            diphones: BTreeMap::new(),
            words: BTreeMap::new(),
        }
    }

    pub fn insert_diphone_unit(&mut self, unit: DiphoneUnit) {
        let list = self.diphones.entry(unit.diphone).or_default();
        list.push(unit);
        list.sort_by(diphone_unit_order);
    }

    pub fn insert_word_unit(&mut self, unit: WordUnit) {
        let list = self.words.entry(unit.word.clone()).or_default();
        list.push(unit);
        list.sort_by(word_unit_order);
    }

    pub fn insert_units(&mut self, diphones: Vec<DiphoneUnit>, words: Vec<WordUnit>) {
        for unit in diphones {
            self.insert_diphone_unit(unit);
        }
        for unit in words {
            self.insert_word_unit(unit);
        }
    }

    pub fn diphone_units(&self, diphone: Diphone) -> &[DiphoneUnit] {
        self.diphones.get(&diphone).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn word_units(&self, word: &str) -> &[WordUnit] {
        self.words
            .get(&word.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn has_diphone(&self, diphone: Diphone) -> bool {
        !self.diphone_units(diphone).is_empty()
    }

    /// Distinct diphones with at least one unit.
    pub fn covered_diphones(&self) -> std::collections::BTreeSet<Diphone> {
        self.diphones
            .iter()
            .filter(|(_, units)| !units.is_empty())
            .map(|(&d, _)| d)
            .collect()
    }

    pub fn diphone_unit_count(&self) -> usize {
        self.diphones.values().map(Vec::len).sum()
    }

    pub fn word_unit_count(&self) -> usize {
        self.words.values().map(Vec::len).sum()
    }

    pub fn distinct_words(&self) -> impl Iterator<Item = &str> {
        self.words.keys().map(String::as_str)
    }

    /// The representative unit for a diphone: median clip duration, lower
    /// median on ties, so one outlier cut cannot skew selection.
    pub fn pick_diphone(&self, diphone: Diphone) -> Option<&DiphoneUnit> {
        let units = self.diphone_units(diphone);
        units.get(median_index(units.len())?)
    }

    pub fn pick_word(&self, word: &str) -> Option<&WordUnit> {
        let units = self.word_units(word);
        units.get(median_index(units.len())?)
    }

    /// Merges several per-utterance inventories for the same profile.
    pub fn merge(parts: Vec<Inventory>) -> Result<Inventory, InventoryError> {
        let mut parts = parts.into_iter();
        let mut merged = parts.next().unwrap_or_else(|| {
            Inventory::new(ProfileId::new(""), Gender::Unspecified)
        });
        for part in parts {
            if part.profile != merged.profile {
                return Err(InventoryError::ProfileMismatch {
                    expected: merged.profile.clone(),
                    found: part.profile,
                });
            }
            merged.gender = match (merged.gender, part.gender) {
                (g, Gender::Unspecified) => g,
                (Gender::Unspecified, g) => g,
                (a, b) if a == b => a,
                (_, found) => {
                    return Err(InventoryError::ProfileMismatch {
                        expected: merged.profile.clone(),
                        found: ProfileId::new(format!("{} ({found:?})", part.profile)),
                    })
                }
            };
            for (diphone, units) in part.diphones {
                let list = merged.diphones.entry(diphone).or_default();
                list.extend(units);
                list.sort_by(diphone_unit_order);
            }
            for (word, units) in part.words {
                let list = merged.words.entry(word).or_default();
                list.extend(units);
                list.sort_by(word_unit_order);
            }
        }
        Ok(merged)
    }
}

/// Lower median: for 3 units the middle one, for 4 the second.
fn median_index(len: usize) -> Option<usize> {
    (len > 0).then(|| (len - 1) / 2)
}

fn diphone_unit_order(a: &DiphoneUnit, b: &DiphoneUnit) -> std::cmp::Ordering {
    a.clip
        .len()
        .cmp(&b.clip.len())
        .then_with(|| a.source_utterance.cmp(&b.source_utterance))
        .then_with(|| a.cut_start.total_cmp(&b.cut_start))
}

fn word_unit_order(a: &WordUnit, b: &WordUnit) -> std::cmp::Ordering {
    a.clip
        .len()
        .cmp(&b.clip.len())
        .then_with(|| a.source_utterance.cmp(&b.source_utterance))
        .then_with(|| a.cut_start.total_cmp(&b.cut_start))
}

/// Cuts every diphone and word unit out of one aligned utterance.
///
/// The alignment's phones tier must already be normalized (`PAU` silences,
/// stress-free labels), which [`crate::textgrid::parse_textgrid`] guarantees.
pub fn extract_units(
    alignment: &Alignment,
    clip: &AudioClip,
    profile: &ProfileId,
) -> Result<(Vec<DiphoneUnit>, Vec<WordUnit>), InventoryError> {
    let audio_seconds = clip.duration_seconds();
    if (alignment.duration - audio_seconds).abs() > ALIGNMENT_AUDIO_TOLERANCE_SECONDS {
        return Err(InventoryError::AlignmentAudioMismatch {
            alignment_seconds: alignment.duration,
            audio_seconds,
        });
    }

    let utterance = utterance_id(alignment);
    let phones_tier = tier(alignment, "phones")?;
    let words_tier = tier(alignment, "words")?;

    let mut phones = Vec::with_capacity(phones_tier.intervals.len());
    for interval in &phones_tier.intervals {
        let phone = Phoneme::from_arpabet(&interval.label).ok_or_else(|| {
            InventoryError::UnknownPhoneLabel {
                label: interval.label.clone(),
                utterance: utterance.clone(),
            }
        })?;
        phones.push((phone, interval.start, interval.end));
    }

    let clamp = |t: f64| t.clamp(0.0, audio_seconds);
    let midpoint = |idx: usize| {
        let (_, start, end) = phones[idx];
        clamp((start + end) / 2.0)
    };
    let cut = |start: f64, end: f64| -> Result<AudioClip, InventoryError> {
        if end <= start {
            // An alignment overrunning the audio can collapse a cut entirely.
            return Ok(AudioClip::new(Vec::new(), clip.sample_rate));
        }
        Ok(clip.slice(start, end)?)
    };

    let mut diphone_units = Vec::new();
    for idx in 0..phones.len().saturating_sub(1) {
        let cut_start = midpoint(idx);
        let cut_end = midpoint(idx + 1);
        diphone_units.push(DiphoneUnit {
            diphone: Diphone::new(phones[idx].0, phones[idx + 1].0),
            clip: cut(cut_start, cut_end)?,
            source_utterance: utterance.clone(),
            cut_start,
            cut_end,
            profile: profile.clone(),
        });
    }

    let mut word_units = Vec::new();
    for word in &words_tier.intervals {
        if word.label == "PAU" {
            continue;
        }
        let (first, last) =
            locate_phone_run(&phones, word.start, word.end).ok_or_else(|| {
                InventoryError::WordSpanMismatch {
                    word: word.label.clone(),
                    utterance: utterance.clone(),
                }
            })?;
        let cut_start = if first > 0 { midpoint(first - 1) } else { clamp(phones[first].1) };
        let cut_end = if last + 1 < phones.len() {
            midpoint(last + 1)
        } else {
            clamp(phones[last].2)
        };
        word_units.push(WordUnit {
            word: word.label.to_lowercase(),
            clip: cut(cut_start, cut_end)?,
            source_utterance: utterance.clone(),
            cut_start,
            cut_end,
            lead_margin: (word.start - cut_start).max(0.0),
            tail_margin: (cut_end - word.end).max(0.0),
            profile: profile.clone(),
        });
    }

    Ok((diphone_units, word_units))
}

fn tier<'a>(alignment: &'a Alignment, name: &str) -> Result<&'a Tier, InventoryError> {
    alignment.tier(name).ok_or_else(|| InventoryError::MissingTier {
        name: name.to_string(),
    })
}

fn utterance_id(alignment: &Alignment) -> String {
    let path = Path::new(&alignment.audio_path);
    path.file_stem()
        .map(|stem| stem.to_string_lossy().into_owned())
        .unwrap_or_else(|| alignment.audio_path.clone())
}

/// Finds the contiguous phone run whose union is `[start, end]` within
/// [`WORD_SPAN_TOLERANCE`]. Returns the inclusive index range.
fn locate_phone_run(
    phones: &[(Phoneme, f64, f64)],
    start: f64,
    end: f64,
) -> Option<(usize, usize)> {
    let tol = WORD_SPAN_TOLERANCE;
    let first = phones.iter().position(|&(_, s, _)| (s - start).abs() <= tol)?;
    let mut last = first;
    loop {
        let (_, _, phone_end) = phones[last];
        if (phone_end - end).abs() <= tol {
            return Some((first, last));
        }
        if phone_end > end + tol {
            return None;
        }
        let (_, next_start, _) = *phones.get(last + 1)?;
        if next_start - phone_end > tol {
            return None;
        }
        last += 1;
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    profile: String,
    gender: Gender,
    units: Vec<ManifestUnit>,
}

#[derive(Serialize, Deserialize)]
struct ManifestUnit {
    kind: String,
    key: String,
    source_utterance: String,
    cut_start: f64,
    cut_end: f64,
    samples: usize,
    sample_rate: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lead_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail_margin: Option<f64>,
    blob: String,
}

/// Writes `manifest.json` plus content-addressed WAV blobs under `units/`.
/// Identical inventories produce byte-identical manifests.
pub fn save_inventory(inventory: &Inventory, dir: &Path) -> Result<(), InventoryError> {
    let units_dir = dir.join(UNITS_DIR);
    fs::create_dir_all(&units_dir)?;

    let mut units = Vec::new();
    let write_blob = |clip: &AudioClip| -> Result<String, InventoryError> {
        let bytes = audio::wav_bytes(clip);
        let hash = hex::encode(Sha256::digest(&bytes));
        let path = units_dir.join(format!("{hash}.wav"));
        if !path.exists() {
            fs::write(&path, &bytes)?;
        }
        Ok(hash)
    };

    for unit_list in inventory.diphones.values() {
        for unit in unit_list {
            units.push(ManifestUnit {
                kind: "diphone".to_string(),
                key: unit.diphone.to_string(),
                source_utterance: unit.source_utterance.clone(),
                cut_start: unit.cut_start,
                cut_end: unit.cut_end,
                samples: unit.clip.len(),
                sample_rate: unit.clip.sample_rate,
                lead_margin: None,
                tail_margin: None,
                blob: write_blob(&unit.clip)?,
            });
        }
    }
    for unit_list in inventory.words.values() {
        for unit in unit_list {
            units.push(ManifestUnit {
                kind: "word".to_string(),
                key: unit.word.clone(),
                source_utterance: unit.source_utterance.clone(),
                cut_start: unit.cut_start,
                cut_end: unit.cut_end,
                samples: unit.clip.len(),
                sample_rate: unit.clip.sample_rate,
                lead_margin: Some(unit.lead_margin),
                tail_margin: Some(unit.tail_margin),
                blob: write_blob(&unit.clip)?,
            });
        }
    }

    let manifest = Manifest {
        format_version: MANIFEST_FORMAT_VERSION,
        profile: inventory.profile.as_str().to_string(),
        gender: inventory.gender,
        units,
    };
    let mut json = serde_json::to_string_pretty(&manifest)
        .expect("manifest serialization cannot fail");
    json.push('\n');
    fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(())
}

/// Loads an inventory directory, verifying every blob checksum.
pub fn load_inventory(dir: &Path) -> Result<Inventory, InventoryError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let corrupt = |message: String| InventoryError::CorruptManifest {
        path: manifest_path.clone(),
        message,
    };

    let raw = fs::read_to_string(&manifest_path).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            corrupt("manifest not found".to_string())
        } else {
            InventoryError::Io(e)
        }
    })?;
    let manifest: Manifest =
        serde_json::from_str(&raw).map_err(|e| corrupt(e.to_string()))?;
    if manifest.format_version != MANIFEST_FORMAT_VERSION {
        return Err(corrupt(format!(
            "format version {} is not {MANIFEST_FORMAT_VERSION}",
            manifest.format_version
        )));
    }

    let mut inventory = Inventory::new(ProfileId::new(manifest.profile), manifest.gender);
    for unit in manifest.units {
        let blob_path = dir.join(UNITS_DIR).join(format!("{}.wav", unit.blob));
        let bytes = fs::read(&blob_path).map_err(|e| {
            if e.kind() == io::ErrorKind::NotFound {
                InventoryError::MissingBlob { path: blob_path.clone() }
            } else {
                InventoryError::Io(e)
            }
        })?;
        if hex::encode(Sha256::digest(&bytes)) != unit.blob {
            return Err(InventoryError::ChecksumMismatch { path: blob_path });
        }
        let clip = audio::read_wav(bytes.as_slice())?;
        if clip.len() != unit.samples || clip.sample_rate != unit.sample_rate {
            return Err(corrupt(format!(
                "unit {} audio does not match its manifest record",
                unit.key
            )));
        }
        match unit.kind.as_str() {
            "diphone" => {
                let diphone: Diphone = unit
                    .key
                    .parse()
                    .map_err(|e| corrupt(format!("bad diphone key: {e}")))?;
                inventory.insert_diphone_unit(DiphoneUnit {
                    diphone,
                    clip,
                    source_utterance: unit.source_utterance,
                    cut_start: unit.cut_start,
                    cut_end: unit.cut_end,
                    profile: inventory.profile.clone(),
                });
            }
            "word" => {
                inventory.insert_word_unit(WordUnit {
                    word: unit.key,
                    clip,
                    source_utterance: unit.source_utterance,
                    cut_start: unit.cut_start,
                    cut_end: unit.cut_end,
                    lead_margin: unit.lead_margin.unwrap_or(0.0),
                    tail_margin: unit.tail_margin.unwrap_or(0.0),
                    profile: inventory.profile.clone(),
                });
            }
            other => return Err(corrupt(format!("unknown unit kind {other:?}"))),
        }
    }
    Ok(inventory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textgrid::{Interval, Tier};

    fn interval(start: f64, end: f64, label: &str) -> Interval {
        Interval {
            start,
            end,
            label: label.to_string(),
        }
    }

    /// 0.3 s utterance: PAU [0,0.1), AH [0.1,0.2), G [0.2,0.3) with the word
    /// "ag" spanning the two phones.
    fn toy_alignment() -> (Alignment, AudioClip) {
        let alignment = Alignment {
            audio_path: "utt001.wav".to_string(),
            duration: 0.3,
            tiers: vec![
                Tier {
                    name: "words".to_string(),
                    intervals: vec![interval(0.0, 0.1, "PAU"), interval(0.1, 0.3, "ag")],
                },
                Tier {
                    name: "phones".to_string(),
                    intervals: vec![
                        interval(0.0, 0.1, "PAU"),
                        interval(0.1, 0.2, "AH"),
                        interval(0.2, 0.3, "G"),
                    ],
                },
            ],
        };
        let clip = AudioClip::new((0..4800).map(|i| (i % 251) as i16 - 125).collect(), 16000);
        (alignment, clip)
    }

    fn diphone(s: &str) -> Diphone {
        s.parse().unwrap()
    }

    fn toy_unit(d: &str, samples: usize, utt: &str) -> DiphoneUnit {
        DiphoneUnit {
            diphone: diphone(d),
            clip: AudioClip::new(vec![0; samples], 16000),
            source_utterance: utt.to_string(),
            cut_start: 0.0,
            cut_end: samples as f64 / 16000.0,
            profile: ProfileId::new("p000"),
        }
    }

    #[test]
    fn cuts_diphones_at_phone_midpoints() {
        let (alignment, clip) = toy_alignment();
        let (diphones, _) = extract_units(&alignment, &clip, &ProfileId::new("p000")).unwrap();
        assert_eq!(diphones.len(), 2);

        assert_eq!(diphones[0].diphone, diphone("PAU-AH"));
        assert!((diphones[0].cut_start - 0.05).abs() < 1e-12);
        assert!((diphones[0].cut_end - 0.15).abs() < 1e-12);
        assert_eq!(diphones[0].clip.len(), 1600);

        assert_eq!(diphones[1].diphone, diphone("AH-G"));
        assert!((diphones[1].cut_start - 0.15).abs() < 1e-12);
        assert!((diphones[1].cut_end - 0.25).abs() < 1e-12);
        assert_eq!(diphones[1].source_utterance, "utt001");
    }

    #[test]
    fn stored_cut_times_reslice_to_the_exact_clip() {
        let (alignment, clip) = toy_alignment();
        let (diphones, words) = extract_units(&alignment, &clip, &ProfileId::new("p000")).unwrap();
        for unit in &diphones {
            assert_eq!(clip.slice(unit.cut_start, unit.cut_end).unwrap(), unit.clip);
        }
        for unit in &words {
            assert_eq!(clip.slice(unit.cut_start, unit.cut_end).unwrap(), unit.clip);
        }
    }

    #[test]
    fn word_units_carry_half_phone_margins() {
        let (alignment, clip) = toy_alignment();
        let (_, words) = extract_units(&alignment, &clip, &ProfileId::new("p000")).unwrap();
        assert_eq!(words.len(), 1);
        let word = &words[0];
        assert_eq!(word.word, "ag");
        // Leading margin is half of the preceding 0.1 s PAU; the word is last,
        // so the tail margin collapses to the utterance edge.
        assert_eq!(word.cut_start, 0.05);
        assert_eq!(word.cut_end, 0.3);
        assert!((word.lead_margin - 0.05).abs() < 1e-12);
        assert!((word.tail_margin - 0.0).abs() < 1e-12);
    }

    #[test]
    fn duration_mismatch_is_rejected() {
        let (alignment, clip) = toy_alignment();
        let short = AudioClip::new(clip.samples[..3800].to_vec(), 16000);
        match extract_units(&alignment, &short, &ProfileId::new("p000")) {
            Err(InventoryError::AlignmentAudioMismatch { .. }) => {}
            other => panic!("expected AlignmentAudioMismatch, got {other:?}"),
        }
    }

    #[test]
    fn pick_unit_takes_the_lower_median_duration() {
        let mut inv = Inventory::new(ProfileId::new("p000"), Gender::Unspecified);
        for (samples, utt) in [(4800, "a"), (1280, "b"), (1600, "c")] {
            inv.insert_diphone_unit(toy_unit("AH-G", samples, utt));
        }
        // Durations 80, 100, 300 ms: the median is the 100 ms unit.
        assert_eq!(inv.pick_diphone(diphone("AH-G")).unwrap().clip.len(), 1600);

        inv.insert_diphone_unit(toy_unit("AH-G", 3200, "d"));
        // Even count: lower median, still 100 ms.
        assert_eq!(inv.pick_diphone(diphone("AH-G")).unwrap().clip.len(), 1600);

        assert!(inv.pick_diphone(diphone("G-AH")).is_none());
        assert!(inv.pick_word("missing").is_none());
    }

    #[test]
    fn merge_requires_matching_profiles() {
        let mut a = Inventory::new(ProfileId::new("p000"), Gender::Unspecified);
        a.insert_diphone_unit(toy_unit("AH-G", 100, "a"));
        let mut b = Inventory::new(ProfileId::new("p000"), Gender::Female);
        b.insert_diphone_unit(toy_unit("AH-G", 50, "b"));

        let merged = Inventory::merge(vec![a.clone(), b]).unwrap();
        assert_eq!(merged.diphone_unit_count(), 2);
        assert_eq!(merged.gender, Gender::Female);
        assert_eq!(merged.diphone_units(diphone("AH-G"))[0].clip.len(), 50);

        let other = Inventory::new(ProfileId::new("p999"), Gender::Unspecified);
        assert!(matches!(
            Inventory::merge(vec![a, other]),
            Err(InventoryError::ProfileMismatch { .. })
        ));
    }

    fn extracted_inventory() -> Inventory {
        let (alignment, clip) = toy_alignment();
        let profile = ProfileId::new("p000");
        let (diphones, words) = extract_units(&alignment, &clip, &profile).unwrap();
        let mut inv = Inventory::new(profile, Gender::Female);
        inv.insert_units(diphones, words);
        inv
    }

    #[test]
    fn save_load_round_trips_and_is_deterministic() {
        let inv = extracted_inventory();
        let dir = tempfile::tempdir().unwrap();
        save_inventory(&inv, dir.path()).unwrap();
        let loaded = load_inventory(dir.path()).unwrap();
        assert_eq!(loaded, inv);

        let first = fs::read(dir.path().join(MANIFEST_FILE)).unwrap();
        save_inventory(&inv, dir.path()).unwrap();
        let second = fs::read(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn empty_inventory_round_trips() {
        let inv = Inventory::new(ProfileId::new("p001"), Gender::Male);
        let dir = tempfile::tempdir().unwrap();
        save_inventory(&inv, dir.path()).unwrap();
        let loaded = load_inventory(dir.path()).unwrap();
        assert_eq!(loaded, inv);
    }

    #[test]
    fn corrupt_manifest_missing_blob_and_bad_checksum_are_distinct() {
        let inv = extracted_inventory();
        let dir = tempfile::tempdir().unwrap();
        save_inventory(&inv, dir.path()).unwrap();

        let manifest_path = dir.path().join(MANIFEST_FILE);
        let good_manifest = fs::read_to_string(&manifest_path).unwrap();

        fs::write(&manifest_path, "{not json").unwrap();
        assert!(matches!(
            load_inventory(dir.path()),
            Err(InventoryError::CorruptManifest { .. })
        ));
        fs::write(&manifest_path, &good_manifest).unwrap();

        let blobs: Vec<PathBuf> = fs::read_dir(dir.path().join(UNITS_DIR))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        let victim = &blobs[0];
        let bytes = fs::read(victim).unwrap();

        fs::remove_file(victim).unwrap();
        assert!(matches!(
            load_inventory(dir.path()),
            Err(InventoryError::MissingBlob { .. })
        ));

        let mut flipped = bytes.clone();
        *flipped.last_mut().unwrap() ^= 0x01;
        fs::write(victim, &flipped).unwrap();
        assert!(matches!(
            load_inventory(dir.path()),
            Err(InventoryError::ChecksumMismatch { .. })
        ));
    }
}
