//! Subcommand implementations. Every subcommand writes its outputs under a
//! user-supplied directory together with a run manifest; warnings go to
//! stderr and never change the exit code.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use voxsplice::audio::{read_wav_file, write_wav_file};
use voxsplice::catalog::{builtin_catalog, load_catalog, CatalogEntry};
use voxsplice::coverage::{
    build_frequency_table, corpus_diphone_stream, coverage_of, estimate_minutes_for_coverage,
    read_frequency_csv, write_frequency_csv, CoverageError,
};
use voxsplice::eval::{
    cross_matrix, cross_matrix_over, read_results_csv, run_experiment, write_results_csv,
    CrossMatrix, EvalConfig, ExperimentSpec, TranscriptOverrides, TrialRecord, SIMULATION_NOTE,
};
use voxsplice::inventory::{
    extract_units, load_inventory, save_inventory, Gender, Inventory, ProfileId,
};
use voxsplice::lexicon::{normalize_text, Lexicon};
use voxsplice::synth::{
    synthesis_gap, synthesize, SynthesisRequest, TokenProvenance, UnitTraceEntry,
};
use voxsplice::textgrid::parse_textgrid_file;
use voxsplice::Diphone;

use crate::manifest::{write_run_manifest, ManifestInfo, StageClock};

/// Settings shared by every subcommand, resolved from the config file and
/// the global flags (flags win).
pub struct Session {
    pub config: EvalConfig,
    pub config_path: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Session {
    fn manifest_info<'a>(
        &'a self,
        subcommand: &'a str,
        inputs: &'a [PathBuf],
        outputs: &'a [PathBuf],
    ) -> ManifestInfo<'a> {
        ManifestInfo {
            subcommand,
            seed: self.config.seed,
            jobs: self.jobs,
            config_path: self.config_path.as_deref(),
            inputs,
            outputs,
        }
    }
}

fn warn(message: impl AsRef<str>) {
    eprintln!("warning: {}", message.as_ref());
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn load_lexicon(path: Option<&Path>) -> Result<Cow<'static, Lexicon>> {
    match path {
        Some(path) => {
            let lexicon = Lexicon::load_path(path)
                .with_context(|| format!("loading lexicon {}", path.display()))?;
            Ok(Cow::Owned(lexicon))
        }
        None => Ok(Cow::Borrowed(Lexicon::builtin())),
    }
}

/// Catalog entries from `path` (or the built-in list), optionally narrowed
/// to `ids` while keeping catalog order.
fn catalog_entries(path: Option<&Path>, ids: Option<&[String]>) -> Result<Vec<CatalogEntry>> {
    let entries = match path {
        Some(path) => {
            load_catalog(path).with_context(|| format!("loading commands {}", path.display()))?
        }
        None => builtin_catalog().to_vec(),
    };
    let Some(ids) = ids else {
        return Ok(entries);
    };
    for id in ids {
        if !entries.iter().any(|e| &e.id == id) {
            bail!("unknown command id {id:?}");
        }
    }
    Ok(entries.into_iter().filter(|e| ids.contains(&e.id)).collect())
}

fn read_transcript_lines(paths: &[PathBuf]) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading transcripts {}", path.display()))?;
        lines.extend(text.lines().map(str::to_string));
    }
    Ok(lines)
}

// ---------------------------------------------------------------------------
// extract

#[derive(Args)]
pub struct ExtractArgs {
    /// Directory of paired <stem>.wav / <stem>.TextGrid recordings.
    #[arg(long, value_name = "DIR")]
    corpus: PathBuf,
    /// Profile id stamped on every extracted unit.
    #[arg(long, value_name = "ID")]
    profile: String,
    /// Speaker gender recorded in the inventory (male, female, unspecified).
    #[arg(long, value_name = "GENDER", default_value = "unspecified")]
    gender: Gender,
    /// Output inventory directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

pub fn run_extract(session: &Session, args: &ExtractArgs) -> Result<()> {
    let mut clock = StageClock::new();
    let profile = ProfileId::new(args.profile.as_str());

    let pairs = clock.time("scan", || aligned_pairs(&args.corpus))?;
    if pairs.is_empty() {
        bail!("no aligned pairs found in {}", args.corpus.display());
    }

    let mut inventory = Inventory::new(profile.clone(), args.gender);
    let mut processed = 0usize;
    let mut warnings = 0usize;
    clock.time("extract", || {
        for (grid_path, wav_path) in &pairs {
            match extract_pair(grid_path, wav_path, &profile) {
                Ok((diphones, words)) => {
                    inventory.insert_units(diphones, words);
                    processed += 1;
                }
                Err(err) => {
                    warn(format!("skipping {}: {err:#}", grid_path.display()));
                    warnings += 1;
                }
            }
        }
    });

    ensure_out_dir(&args.out)?;
    clock.time("save", || save_inventory(&inventory, &args.out))?;

    println!(
        "profile {}: {} of {} utterances, {} diphone units ({} distinct diphones), {} word units",
        profile,
        processed,
        pairs.len(),
        inventory.diphone_unit_count(),
        inventory.covered_diphones().len(),
        inventory.word_unit_count(),
    );
    if warnings > 0 {
        warn(format!("{warnings} utterance(s) skipped"));
    }

    let inputs = vec![args.corpus.clone()];
    let outputs = vec![args.out.join("manifest.json"), args.out.join("units")];
    write_run_manifest(
        &args.out,
        session.manifest_info("extract", &inputs, &outputs),
        clock,
    )?;
    Ok(())
}

/// Sorted (TextGrid, wav) pairs under `dir`; unpaired alignments warn.
fn aligned_pairs(dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let entries =
        fs::read_dir(dir).with_context(|| format!("reading corpus directory {}", dir.display()))?;
    let mut grids: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.extension().is_some_and(|ext| ext == "TextGrid"))
        .collect();
    grids.sort();

    let mut pairs = Vec::new();
    for grid in grids {
        let wav = grid.with_extension("wav");
        if wav.is_file() {
            pairs.push((grid, wav));
        } else {
            warn(format!("no paired wav for {}", grid.display()));
        }
    }
    Ok(pairs)
}

fn extract_pair(
    grid_path: &Path,
    wav_path: &Path,
    profile: &ProfileId,
) -> Result<(Vec<voxsplice::inventory::DiphoneUnit>, Vec<voxsplice::inventory::WordUnit>)> {
    let mut alignment = parse_textgrid_file(grid_path)?;
    alignment.audio_path = wav_path.to_string_lossy().into_owned();
    let clip = read_wav_file(wav_path)?;
    Ok(extract_units(&alignment, &clip, profile)?)
}

// ---------------------------------------------------------------------------
// freq

#[derive(Args)]
pub struct FreqArgs {
    /// Transcript files, one utterance per line.
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    transcripts: Vec<PathBuf>,
    /// Corpus label recorded with the table.
    #[arg(long, default_value = "transcripts")]
    label: String,
    /// Pronunciation dictionary; defaults to the bundled one.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Output directory for freq.csv.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

pub fn run_freq(session: &Session, args: &FreqArgs) -> Result<()> {
    let mut clock = StageClock::new();
    let lexicon = load_lexicon(args.lexicon.as_deref())?;

    let lines = clock.time("read", || read_transcript_lines(&args.transcripts))?;
    let (table, skipped) =
        clock.time("count", || build_frequency_table(args.label.clone(), &lexicon, &lines));

    ensure_out_dir(&args.out)?;
    let csv_path = args.out.join("freq.csv");
    clock.time("write", || -> Result<()> {
        let file = File::create(&csv_path)
            .with_context(|| format!("creating {}", csv_path.display()))?;
        write_frequency_csv(&table, file)?;
        Ok(())
    })?;

    println!(
        "counted {} diphone tokens ({} distinct) from {} transcript lines",
        table.total_tokens(),
        table.distinct(),
        lines.len()
    );
    if skipped > 0 {
        warn(format!("{skipped} out-of-vocabulary word(s) skipped"));
    }

    let outputs = vec![csv_path];
    write_run_manifest(
        &args.out,
        session.manifest_info("freq", &args.transcripts, &outputs),
        clock,
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// coverage

#[derive(Args)]
pub struct CoverageArgs {
    /// Transcript files, one utterance per line.
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    transcripts: Vec<PathBuf>,
    /// Command catalog TSV; defaults to the built-in commands.
    #[arg(long, value_name = "FILE")]
    commands: Option<PathBuf>,
    /// Comma-separated command ids whose diphones form the required set.
    #[arg(long, value_name = "IDS", value_delimiter = ',')]
    ids: Option<Vec<String>>,
    /// Popularity fractions, one CSV row each.
    #[arg(
        long,
        value_name = "LIST",
        value_delimiter = ',',
        default_values_t = vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    )]
    fractions: Vec<f64>,
    /// Also write one curve per transcript file next to the pooled one.
    #[arg(long)]
    per_file: bool,
    /// Pronunciation dictionary; defaults to the bundled one.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Output directory for coverage CSVs.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

pub fn run_coverage(session: &Session, args: &CoverageArgs) -> Result<()> {
    let mut clock = StageClock::new();
    let lexicon = load_lexicon(args.lexicon.as_deref())?;
    let entries = catalog_entries(args.commands.as_deref(), args.ids.as_deref())?;
    let texts: Vec<&str> = entries.iter().map(|e| e.text.as_str()).collect();
    let required = lexicon
        .required_diphones(&texts)
        .context("planning the command set")?;

    let lines = clock.time("read", || read_transcript_lines(&args.transcripts))?;
    ensure_out_dir(&args.out)?;

    let mut outputs = Vec::new();
    let pooled = clock.time("pooled", || -> Result<usize> {
        let path = args.out.join("coverage.csv");
        let skipped = write_coverage_curve(&lexicon, &lines, &required, &args.fractions, &path)?;
        outputs.push(path);
        Ok(skipped)
    })?;
    if pooled > 0 {
        warn(format!("{pooled} out-of-vocabulary word(s) skipped"));
    }

    if args.per_file {
        clock.time("per-file", || -> Result<()> {
            for path in &args.transcripts {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "transcripts".to_string());
                let lines = read_transcript_lines(std::slice::from_ref(path))?;
                let out_path = args.out.join(format!("coverage_{stem}.csv"));
                match write_coverage_curve(&lexicon, &lines, &required, &args.fractions, &out_path)
                {
                    Ok(_) => outputs.push(out_path),
                    Err(err) => warn(format!("skipping curve for {}: {err:#}", path.display())),
                }
            }
            Ok(())
        })?;
    }

    println!(
        "required set: {} diphones over {} command(s); wrote {} curve(s)",
        required.len(),
        entries.len(),
        outputs.len()
    );

    write_run_manifest(
        &args.out,
        session.manifest_info("coverage", &args.transcripts, &outputs),
        clock,
    )?;
    Ok(())
}

/// One coverage curve: for each fraction, the share of `required` available
/// in the top-p popularity set and the estimated minutes of recording needed
/// to reach that coverage; unreachable targets leave the cell empty.
fn write_coverage_curve(
    lexicon: &Lexicon,
    lines: &[String],
    required: &std::collections::BTreeSet<Diphone>,
    fractions: &[f64],
    path: &Path,
) -> Result<usize> {
    let (table, _) = build_frequency_table("coverage", lexicon, lines);
    let stream = corpus_diphone_stream(lexicon, lines);

    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(["fraction", "coverage", "estimated_minutes"])?;
    for &fraction in fractions {
        let available = table.top_fraction(fraction)?;
        let covered = coverage_of(&available, required);
        let minutes = match estimate_minutes_for_coverage(&stream.tokens, required, fraction) {
            Ok(minutes) => format!("{minutes:.4}"),
            Err(CoverageError::Unreachable { .. }) => String::new(),
            Err(err) => return Err(err.into()),
        };
        writer.write_record([format!("{fraction}"), format!("{covered:.4}"), minutes])?;
    }
    writer.flush()?;
    Ok(stream.skipped_words)
}

// ---------------------------------------------------------------------------
// synth

#[derive(Args)]
pub struct SynthArgs {
    /// Saved target inventory directory.
    #[arg(long, value_name = "DIR")]
    inventory: PathBuf,
    /// Saved donor inventory directory for fallback units.
    #[arg(long, value_name = "DIR")]
    donor: Option<PathBuf>,
    /// Catalog command id to synthesize.
    #[arg(long, value_name = "ID", required_unless_present = "text", conflicts_with = "text")]
    command: Option<String>,
    /// Free text to synthesize instead of a catalog command.
    #[arg(long, value_name = "WORDS")]
    text: Option<String>,
    /// Command catalog TSV; defaults to the built-in commands.
    #[arg(long, value_name = "FILE")]
    commands: Option<PathBuf>,
    /// Keep only the top fraction of the popularity table in the target.
    #[arg(long, value_name = "F")]
    mask_fraction: Option<f64>,
    /// Frequency CSV from the freq subcommand; required with a mask.
    #[arg(long, value_name = "FILE")]
    freq: Option<PathBuf>,
    /// Pronunciation dictionary; defaults to the bundled one.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Output directory for the WAV and its trace sidecar.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Serialize)]
struct TraceSidecar<'a> {
    profile: &'a str,
    command: &'a str,
    crossfade_ms: f64,
    target_fraction: f64,
    /// Diphones the masked target could not supply, in canonical order.
    gap: Vec<String>,
    units: &'a [UnitTraceEntry],
    tokens: &'a [TokenProvenance],
}

pub fn run_synth(session: &Session, args: &SynthArgs) -> Result<()> {
    let mut clock = StageClock::new();
    let lexicon = load_lexicon(args.lexicon.as_deref())?;

    let (stem, tokens) = match (&args.command, &args.text) {
        (Some(id), None) => {
            let entries = catalog_entries(args.commands.as_deref(), None)?;
            let entry = entries
                .iter()
                .find(|e| &e.id == id)
                .ok_or_else(|| anyhow::anyhow!("unknown command id {id:?}"))?;
            (entry.id.clone(), entry.tokens())
        }
        (None, Some(text)) => {
            let tokens = normalize_text(text);
            if tokens.is_empty() {
                bail!("no words found in --text");
            }
            ("text".to_string(), tokens)
        }
        _ => unreachable!("clap enforces exactly one of --command/--text"),
    };

    let (target, donor) = clock.time("load", || -> Result<(Inventory, Option<Inventory>)> {
        let target = load_inventory(&args.inventory)
            .with_context(|| format!("loading inventory {}", args.inventory.display()))?;
        let donor = match &args.donor {
            Some(dir) => Some(
                load_inventory(dir).with_context(|| format!("loading donor {}", dir.display()))?,
            ),
            None => None,
        };
        Ok((target, donor))
    })?;
    if let Some(donor) = &donor {
        if donor.profile == target.profile {
            bail!("donor profile {} matches the target profile", donor.profile);
        }
    }

    let mask_fraction = args.mask_fraction.or(session.config.mask_fraction);
    let mask = match mask_fraction {
        Some(fraction) => {
            let freq_path = args
                .freq
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("--mask-fraction requires --freq <csv>"))?;
            let file = File::open(freq_path)
                .with_context(|| format!("opening frequency table {}", freq_path.display()))?;
            let table = read_frequency_csv(file, freq_path.display().to_string())?;
            Some(table.top_fraction(fraction)?)
        }
        None => None,
    };

    let request = SynthesisRequest {
        lexicon: &lexicon,
        tokens: &tokens,
        target: &target,
        donor: donor.as_ref(),
        mask: mask.as_ref(),
        crossfade_ms: session.config.crossfade_ms,
    };

    let gap = synthesis_gap(&request)?;
    if gap.is_empty() {
        println!("gap: none");
    } else {
        let listed: Vec<String> = gap.iter().map(|d| d.to_string()).collect();
        println!("gap: {} diphone(s) beyond the target: {}", gap.len(), listed.join(" "));
    }

    let result = clock.time("synthesize", || synthesize(&request))?;
    println!("target_fraction: {:.4}", result.target_fraction);

    ensure_out_dir(&args.out)?;
    let wav_path = args.out.join(format!("{}_{stem}.wav", target.profile));
    let json_path = args.out.join(format!("{}_{stem}.json", target.profile));
    clock.time("write", || -> Result<()> {
        write_wav_file(&result.audio, &wav_path)
            .with_context(|| format!("writing {}", wav_path.display()))?;
        let sidecar = TraceSidecar {
            profile: target.profile.as_str(),
            command: &stem,
            crossfade_ms: session.config.crossfade_ms,
            target_fraction: result.target_fraction,
            gap: gap.iter().map(|d| d.to_string()).collect(),
            units: &result.trace,
            tokens: &result.tokens,
        };
        let mut body = serde_json::to_string_pretty(&sidecar)?;
        body.push('\n');
        fs::write(&json_path, body).with_context(|| format!("writing {}", json_path.display()))?;
        Ok(())
    })?;
    println!("wrote {}", wav_path.display());

    let mut inputs = vec![args.inventory.clone()];
    inputs.extend(args.donor.clone());
    inputs.extend(args.freq.clone());
    let outputs = vec![wav_path, json_path];
    write_run_manifest(
        &args.out,
        session.manifest_info("synth", &inputs, &outputs),
        clock,
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate

#[derive(Args)]
pub struct EvaluateArgs {
    /// Directory whose immediate subdirectories are saved inventories.
    #[arg(long, value_name = "DIR")]
    profiles: PathBuf,
    /// Command catalog TSV; defaults to the built-in commands.
    #[arg(long, value_name = "FILE")]
    commands: Option<PathBuf>,
    /// Comma-separated command ids to evaluate; defaults to every entry.
    #[arg(long, value_name = "IDS", value_delimiter = ',')]
    ids: Option<Vec<String>>,
    /// Frequency CSV; required when the config sets mask_fraction.
    #[arg(long, value_name = "FILE")]
    freq: Option<PathBuf>,
    /// External recognizer transcripts (CSV: target,source,command,transcript).
    #[arg(long, value_name = "FILE")]
    transcripts: Option<PathBuf>,
    /// Pronunciation dictionary; defaults to the bundled one.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Output directory for results and matrices.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

pub fn run_evaluate(session: &Session, args: &EvaluateArgs) -> Result<()> {
    let mut clock = StageClock::new();
    let lexicon = load_lexicon(args.lexicon.as_deref())?;
    let entries = catalog_entries(args.commands.as_deref(), args.ids.as_deref())?;

    let profiles = clock.time("load", || load_profiles(&args.profiles))?;
    if profiles.is_empty() {
        bail!("no inventories found under {}", args.profiles.display());
    }

    let frequency = match &args.freq {
        Some(path) => {
            let file = File::open(path)
                .with_context(|| format!("opening frequency table {}", path.display()))?;
            Some(read_frequency_csv(file, path.display().to_string())?)
        }
        None => {
            if session.config.mask_fraction.is_some() {
                bail!("config sets mask_fraction; pass --freq <csv>");
            }
            None
        }
    };

    let overrides = match &args.transcripts {
        Some(path) => Some(read_transcript_overrides(path)?),
        None => None,
    };

    let spec = ExperimentSpec {
        lexicon: &lexicon,
        catalog: &entries,
        profiles: &profiles,
        config: &session.config,
        frequency: frequency.as_ref(),
        transcripts: overrides.as_ref(),
    };
    let outcome = clock.time("evaluate", || run_experiment(&spec))?;

    for failure in &outcome.failures {
        warn(format!(
            "cell ({}, {}, {}) failed: {}",
            failure.target, failure.source, failure.command, failure.error
        ));
    }

    ensure_out_dir(&args.out)?;
    let axis: Vec<ProfileId> = profiles.iter().map(|p| p.profile.clone()).collect();
    let matrix = cross_matrix_over(&outcome.results, &axis, &axis);

    let mut outputs = Vec::new();
    clock.time("write", || -> Result<()> {
        let results_path = args.out.join("results.csv");
        let file = File::create(&results_path)
            .with_context(|| format!("creating {}", results_path.display()))?;
        write_results_csv(&outcome.results, file)?;
        outputs.push(results_path);

        let matrix_csv = args.out.join("cross_matrix.csv");
        write_matrix_csv(&matrix, &matrix_csv)?;
        outputs.push(matrix_csv);

        let matrix_json = args.out.join("cross_matrix.json");
        let mut body = serde_json::to_string_pretty(&matrix)?;
        body.push('\n');
        fs::write(&matrix_json, body)
            .with_context(|| format!("writing {}", matrix_json.display()))?;
        outputs.push(matrix_json);

        if !outcome.failures.is_empty() {
            let failures_path = args.out.join("failures.csv");
            let file = File::create(&failures_path)
                .with_context(|| format!("creating {}", failures_path.display()))?;
            let mut writer = csv::Writer::from_writer(file);
            writer.write_record(["target", "source", "command", "error"])?;
            for f in &outcome.failures {
                writer.write_record([
                    f.target.as_str(),
                    f.source.as_str(),
                    f.command.as_str(),
                    f.error.as_str(),
                ])?;
            }
            writer.flush()?;
            outputs.push(failures_path);
        }
        Ok(())
    })?;

    let hits = outcome.results.iter().filter(|r| r.intent_hit).count();
    println!(
        "grid {} profiles x {} commands: {} ok, {} failed, intent hits {}/{}",
        profiles.len(),
        entries.len(),
        outcome.results.len(),
        outcome.failures.len(),
        hits,
        outcome.results.len()
    );

    let mut inputs = vec![args.profiles.clone()];
    inputs.extend(args.commands.clone());
    inputs.extend(args.freq.clone());
    inputs.extend(args.transcripts.clone());
    write_run_manifest(
        &args.out,
        session.manifest_info("evaluate", &inputs, &outputs),
        clock,
    )?;
    Ok(())
}

/// Loads every immediate subdirectory of `dir` as an inventory, sorted by
/// directory name.
fn load_profiles(dir: &Path) -> Result<Vec<Inventory>> {
    let entries =
        fs::read_dir(dir).with_context(|| format!("reading profiles directory {}", dir.display()))?;
    let mut subdirs: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.is_dir())
        .collect();
    subdirs.sort();

    let mut profiles = Vec::new();
    for subdir in subdirs {
        let inventory = load_inventory(&subdir)
            .with_context(|| format!("loading inventory {}", subdir.display()))?;
        profiles.push(inventory);
    }
    Ok(profiles)
}

fn read_transcript_overrides(path: &Path) -> Result<TranscriptOverrides> {
    let file =
        File::open(path).with_context(|| format!("opening transcripts {}", path.display()))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut overrides = TranscriptOverrides::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("transcripts line {}", index + 2))?;
        let [target, source, command, transcript] = [0, 1, 2, 3].map(|i| record.get(i));
        let (Some(target), Some(source), Some(command), Some(transcript)) =
            (target, source, command, transcript)
        else {
            bail!(
                "transcripts line {}: expected target,source,command,transcript",
                index + 2
            );
        };
        overrides.insert(
            (
                ProfileId::new(target),
                ProfileId::new(source),
                command.to_string(),
            ),
            normalize_text(transcript),
        );
    }
    Ok(overrides)
}

/// Grid CSV: one row per target, one column per source, empty cells where
/// every trial for the pair failed.
fn write_matrix_csv(matrix: &CrossMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut writer = csv::Writer::from_writer(file);

    let mut header = vec!["target".to_string()];
    header.extend(matrix.sources.iter().map(|s| s.to_string()));
    writer.write_record(&header)?;

    for (target, row) in matrix.targets.iter().zip(&matrix.confidence) {
        let mut record = vec![target.to_string()];
        record.extend(
            row.iter()
                .map(|cell| cell.map(|v| v.to_string()).unwrap_or_default()),
        );
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// report

#[derive(Args)]
pub struct ReportArgs {
    /// results.csv produced by the evaluate subcommand.
    #[arg(long, value_name = "FILE")]
    results: PathBuf,
    /// Output directory for summary.md.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

pub fn run_report(session: &Session, args: &ReportArgs) -> Result<()> {
    let mut clock = StageClock::new();

    let records = clock.time("read", || -> Result<Vec<TrialRecord>> {
        let file = File::open(&args.results)
            .with_context(|| format!("opening results {}", args.results.display()))?;
        Ok(read_results_csv(file)?)
    })?;
    if records.is_empty() {
        bail!("no records in {}", args.results.display());
    }

    let summary = clock.time("summarize", || render_summary(&records));

    ensure_out_dir(&args.out)?;
    let path = args.out.join("summary.md");
    clock.time("write", || {
        fs::write(&path, summary).with_context(|| format!("writing {}", path.display()))
    })?;
    println!("wrote {}", path.display());

    let inputs = vec![args.results.clone()];
    let outputs = vec![path];
    write_run_manifest(
        &args.out,
        session.manifest_info("report", &inputs, &outputs),
        clock,
    )?;
    Ok(())
}

fn render_summary(records: &[TrialRecord]) -> String {
    use std::fmt::Write;

    let total = records.len();
    let hits = records.iter().filter(|r| r.intent_hit).count();
    let mean_wer = records.iter().map(|r| r.wer).sum::<f64>() / total as f64;
    let matrix = cross_matrix(records);

    let mut per_command: BTreeMap<&str, (usize, usize, f64)> = BTreeMap::new();
    for record in records {
        let entry = per_command.entry(record.command.as_str()).or_insert((0, 0, 0.0));
        entry.0 += 1;
        entry.1 += usize::from(record.intent_hit);
        entry.2 += record.wer;
    }

    let mut histogram: BTreeMap<u32, usize> = BTreeMap::new();
    for record in records {
        *histogram.entry(record.confidence).or_insert(0) += 1;
    }

    let mut out = String::new();
    let _ = writeln!(out, "# Evaluation summary\n");
    let _ = writeln!(
        out,
        "{total} scored cells over {} target profile(s), {} source profile(s), {} command(s).\n",
        matrix.targets.len(),
        matrix.sources.len(),
        per_command.len()
    );

    let _ = writeln!(out, "## Intent intelligibility\n");
    let _ = writeln!(
        out,
        "{hits} of {total} cells matched their command intent ({:.1}%); mean word error rate {mean_wer:.4}.\n",
        100.0 * hits as f64 / total as f64
    );
    let _ = writeln!(out, "| command | cells | intent hits | hit rate | mean WER |");
    let _ = writeln!(out, "|---|---|---|---|---|");
    for (command, (cells, hit, wer_sum)) in &per_command {
        let _ = writeln!(
            out,
            "| {command} | {cells} | {hit} | {:.1}% | {:.4} |",
            100.0 * *hit as f64 / *cells as f64,
            wer_sum / *cells as f64
        );
    }

    let _ = writeln!(out, "\n## Confidence levels\n");
    let _ = writeln!(out, "| level | cells |");
    let _ = writeln!(out, "|---|---|");
    for level in [300u32, 200, 100, 0] {
        let _ = writeln!(out, "| {level} | {} |", histogram.get(&level).copied().unwrap_or(0));
    }

    let _ = writeln!(out, "\n## Cross-profile confidence (lower median)\n");
    let mut header = String::from("| target \\ source |");
    for source in &matrix.sources {
        let _ = write!(header, " {source} |");
    }
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "|{}", "---|".repeat(matrix.sources.len() + 1));
    for (target, row) in matrix.targets.iter().zip(&matrix.confidence) {
        let mut line = format!("| {target} |");
        for cell in row {
            match cell {
                Some(value) => {
                    let _ = write!(line, " {value} |");
                }
                None => line.push_str(" - |"),
            }
        }
        let _ = writeln!(out, "{line}");
    }

    let _ = writeln!(out, "\n## Confidence channel\n");
    let _ = writeln!(out, "{SIMULATION_NOTE}");
    out
}
