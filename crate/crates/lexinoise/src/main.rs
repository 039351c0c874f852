//! Command-line entry point wiring the full pipeline:
//! mix → stoi → train-lm → features → analyze-hrs → fit → select → report.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lexinoise::analysis::{
    compare_pairs, compute_hrs, load_responses, JudgeMode, PairComparison, StimulusScore,
};
use lexinoise::audio::{load_wav, mix_at_snr, save_wav, NoiseCondition};
use lexinoise::lexicon::{load_pairs, normalize_word, PronunciationLexicon, SynonymPairRecord};
use lexinoise::ngram::{train_from_lines, NgramModel};
use lexinoise::regression::{
    ols_fit, stepwise_select, DesignMatrix, FitResult, StepDirection, StepRecord,
};
use lexinoise::report::build_report;
use lexinoise::selector::{
    choose, extract_features, FeatureVector, ModelSet, WordAudio, DIFF_LOG_PROB, DIFF_PH_LEN,
    DIFF_STOI, LOG_PROB, PH_LEN, STOI,
};
use lexinoise::stoi::compute_stoi;
use lexinoise::{Error, Result};

/// Environment variable holding the default pronunciation lexicon path.
const LEXICON_ENV: &str = "LEXINOISE_LEXICON";

#[derive(Parser)]
#[command(
    name = "lexinoise",
    version,
    about = "Select the more noise-robust member of a synonym pair"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mix speech with noise at an exact SNR and write the mixture WAV.
    Mix(MixArgs),
    /// Print the STOI intelligibility score of a clean/degraded pair.
    Stoi(StoiArgs),
    /// Train a Kneser-Ney n-gram language model from a line corpus.
    TrainLm(TrainLmArgs),
    /// Emit the per-pair feature CSV consumed by `fit`.
    Features(FeaturesArgs),
    /// Score listener transcripts into HRS tables and pair comparisons.
    AnalyzeHrs(AnalyzeHrsArgs),
    /// Fit a linear model (optionally with AIC stepwise selection).
    Fit(FitArgs),
    /// Choose the noise-robust member of each synonym pair.
    Select(SelectArgs),
    /// Summarize scored experiment data.
    Report(ReportArgs),
}

#[derive(Args)]
struct MixArgs {
    /// Speech WAV path.
    #[arg(long)]
    speech: PathBuf,
    /// Noise WAV path (wrapped circularly if shorter than the speech).
    #[arg(long)]
    noise: PathBuf,
    /// Target SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr: f64,
    /// Noise label recorded in metadata (defaults to the noise file stem).
    #[arg(long)]
    noise_id: Option<String>,
    /// RNG seed for the noise segment offset.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output WAV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StoiArgs {
    #[arg(long)]
    clean: PathBuf,
    #[arg(long)]
    degraded: PathBuf,
}

#[derive(Args)]
struct TrainLmArgs {
    /// UTF-8 text corpus, one utterance per line.
    #[arg(long)]
    corpus: PathBuf,
    /// N-gram order.
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Kneser-Ney discount in (0, 1).
    #[arg(long, default_value_t = 0.75)]
    discount: f64,
    /// Output model path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeaturesArgs {
    /// Synonym pairs CSV.
    #[arg(long)]
    pairs: PathBuf,
    /// Pronunciation lexicon (default: $LEXINOISE_LEXICON).
    #[arg(long, env = LEXICON_ENV)]
    lexicon: PathBuf,
    /// Trained language model path.
    #[arg(long)]
    lm: PathBuf,
    /// Audio manifest CSV
    /// (pair_id,word,clean_path,noisy_path,span_start,span_end); omit for
    /// text-only features.
    #[arg(long)]
    audio_manifest: Option<PathBuf>,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    SingleWord,
    InContext,
}

impl From<Mode> for JudgeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::SingleWord => JudgeMode::SingleWord,
            Mode::InContext => JudgeMode::InContext,
        }
    }
}

#[derive(Args)]
struct AnalyzeHrsArgs {
    /// Listener responses CSV.
    #[arg(long)]
    responses: PathBuf,
    /// Synonym pairs CSV.
    #[arg(long)]
    pairs: PathBuf,
    /// Pronunciation lexicon (default: $LEXINOISE_LEXICON).
    #[arg(long, env = LEXICON_ENV)]
    lexicon: PathBuf,
    /// Transcript judging mode.
    #[arg(long, value_enum, default_value_t = Mode::InContext)]
    mode: Mode,
    /// Per-stimulus HRS CSV output path.
    #[arg(long)]
    scores_out: Option<PathBuf>,
    /// Pair-comparison CSV output path (default: stdout).
    #[arg(long)]
    comparisons_out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Backward,
    Both,
}

#[derive(Args)]
struct FitArgs {
    /// Features CSV (one row per pair, numeric columns).
    #[arg(long)]
    features: PathBuf,
    /// Response column name.
    #[arg(long)]
    response: String,
    /// Comma-separated predictor columns (default: every numeric column
    /// except the response).
    #[arg(long, value_delimiter = ',')]
    predictors: Vec<String>,
    /// Run AIC stepwise selection in this direction; omit for a plain fit.
    #[arg(long, value_enum)]
    direction: Option<Direction>,
    /// Write the JSON fit report here (the text table always prints).
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    /// Synonym pairs CSV.
    #[arg(long)]
    pairs: PathBuf,
    /// Pronunciation lexicon (default: $LEXINOISE_LEXICON).
    #[arg(long, env = LEXICON_ENV)]
    lexicon: PathBuf,
    /// Trained language model path.
    #[arg(long)]
    lm: PathBuf,
    /// Condition-model JSON (default: the built-in canonical models).
    #[arg(long)]
    models: Option<PathBuf>,
    /// Audio manifest CSV
    /// (pair_id,word,clean_path,noisy_path,span_start,span_end).
    #[arg(long)]
    audio_manifest: Option<PathBuf>,
    /// Noise condition SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr: f64,
    /// Decisions CSV output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct ReportArgs {
    /// Listener responses CSV.
    #[arg(long)]
    responses: PathBuf,
    /// Synonym pairs CSV.
    #[arg(long)]
    pairs: PathBuf,
    /// Pronunciation lexicon (default: $LEXINOISE_LEXICON).
    #[arg(long, env = LEXICON_ENV)]
    lexicon: PathBuf,
    /// Transcript judging mode.
    #[arg(long, value_enum, default_value_t = Mode::InContext)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successes; bad usage exits 1.
            match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{err}");
                    std::process::exit(1);
                }
            }
        }
    };
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(2);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Mix(args) => cmd_mix(args),
        Command::Stoi(args) => cmd_stoi(args),
        Command::TrainLm(args) => cmd_train_lm(args),
        Command::Features(args) => cmd_features(args),
        Command::AnalyzeHrs(args) => cmd_analyze_hrs(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Select(args) => cmd_select(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn cmd_mix(args: MixArgs) -> Result<()> {
    let speech = load_wav(&args.speech)?;
    let noise = load_wav(&args.noise)?;
    let noise_id = args.noise_id.unwrap_or_else(|| {
        args.noise
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "noise".to_string())
    });
    let condition = NoiseCondition::new(args.snr, noise_id)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let noise_offset = rng.gen_range(0..noise.len());
    let mixture = mix_at_snr(&speech, &noise, &condition, noise_offset)?;
    save_wav(&args.out, &mixture.signal)?;
    println!(
        "wrote {} (snr {} dB, noise_offset {}, noise_gain {:.6}, rescale {})",
        args.out.display(),
        condition.snr_db,
        noise_offset,
        mixture.noise_gain,
        mixture
            .rescale
            .map_or("none".to_string(), |f| format!("{f:.6}")),
    );
    Ok(())
}

fn cmd_stoi(args: StoiArgs) -> Result<()> {
    let clean = load_wav(&args.clean)?;
    let degraded = load_wav(&args.degraded)?;
    let score = compute_stoi(&clean, &degraded)?;
    println!("{score:.6}");
    Ok(())
}

fn cmd_train_lm(args: TrainLmArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.corpus).map_err(|source| Error::Io {
        path: args.corpus.clone(),
        source,
    })?;
    let lines: Vec<&str> = text.lines().collect();
    let model = train_from_lines(&lines, args.order, args.discount)?;
    model.save(&args.out)?;
    println!(
        "wrote {} (order {}, discount {}, {} event tokens)",
        args.out.display(),
        model.order(),
        model.discount(),
        model.event_tokens().count()
    );
    Ok(())
}

/// Audio manifest rows keyed by (normalized pair_id is exact, normalized word).
type AudioManifest = HashMap<(String, String), WordAudio>;

fn load_audio_manifest(path: &Path) -> Result<AudioManifest> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let headers = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let c_pair = col("pair_id")?;
    let c_word = col("word")?;
    let c_clean = col("clean_path")?;
    let c_noisy = col("noisy_path")?;
    let c_start = col("span_start")?;
    let c_end = col("span_end")?;

    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut manifest = AudioManifest::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let field = |c: usize| record.get(c).unwrap_or_default().trim().to_string();
        let resolve = |p: String| -> PathBuf {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let span = match (field(c_start).as_str(), field(c_end).as_str()) {
            ("", "") => None,
            (s, e) => {
                let parse = |v: &str, name: &str| -> Result<usize> {
                    v.parse().map_err(|_| Error::InvalidRecord {
                        path: path.to_path_buf(),
                        record: idx + 1,
                        detail: format!("bad {name} {v:?}"),
                    })
                };
                Some((parse(s, "span_start")?, parse(e, "span_end")?))
            }
        };
        manifest.insert(
            (field(c_pair), normalize_word(&field(c_word))),
            WordAudio {
                clean: load_wav(resolve(field(c_clean)))?,
                degraded: load_wav(resolve(field(c_noisy)))?,
                span,
            },
        );
    }
    Ok(manifest)
}

fn manifest_audio<'m>(
    manifest: Option<&'m AudioManifest>,
    pair: &SynonymPairRecord,
    word: &str,
) -> Option<&'m WordAudio> {
    manifest.and_then(|m| m.get(&(pair.pair_id.clone(), normalize_word(word))))
}

fn format_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v}"))
}

fn feature_csv_row(pair_id: &str, winner: &str, alternative: &str, fv: &FeatureVector) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        pair_id,
        winner,
        alternative,
        fv.log_prob,
        fv.diff_log_prob,
        fv.ph_len,
        fv.diff_ph_len,
        format_opt(fv.stoi),
        format_opt(fv.diff_stoi),
    )
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, content).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{content}");
            std::io::stdout().flush().map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn cmd_features(args: FeaturesArgs) -> Result<()> {
    let pairs = load_pairs(&args.pairs)?;
    let lexicon = PronunciationLexicon::load(&args.lexicon)?;
    let lm = NgramModel::load(&args.lm)?;
    let manifest = args
        .audio_manifest
        .as_deref()
        .map(load_audio_manifest)
        .transpose()?;

    let mut out = format!(
        "pair_id,winner,alternative,{LOG_PROB},{DIFF_LOG_PROB},{PH_LEN},{DIFF_PH_LEN},{STOI},{DIFF_STOI}\n"
    );
    for pair in &pairs {
        // Features under the word_a-wins hypothesis; the word_b-wins row is
        // its mirror and is derivable by negating the diff columns.
        let fv = extract_features(
            pair,
            &pair.word_a,
            &pair.word_b,
            &lm,
            &lexicon,
            manifest_audio(manifest.as_ref(), pair, &pair.word_a),
            manifest_audio(manifest.as_ref(), pair, &pair.word_b),
        )?;
        out.push_str(&feature_csv_row(&pair.pair_id, &pair.word_a, &pair.word_b, &fv));
        out.push('\n');
    }
    write_output(args.out.as_deref(), &out)
}

fn scores_csv(scores: &[StimulusScore]) -> String {
    let mut out =
        String::from("stimulus_id,target,noise_id,snr_db,n_correct,n_total,hrs\n");
    for s in scores {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.stimulus_id,
            s.target,
            s.condition.noise_id,
            s.condition.snr_db,
            s.n_correct,
            s.n_total,
            s.hrs
        ));
    }
    out
}

fn comparisons_csv(comparisons: &[PairComparison]) -> String {
    let mut out = String::from(
        "pair_id,noise_id,snr_db,hrs_a,hrs_b,diff_hrs,hrs_min,hrs_max,winner,tie\n",
    );
    for c in comparisons {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            c.pair_id,
            c.condition.noise_id,
            c.condition.snr_db,
            c.hrs_a,
            c.hrs_b,
            c.diff_hrs,
            c.hrs_min,
            c.hrs_max,
            c.winner,
            c.tie
        ));
    }
    out
}

fn cmd_analyze_hrs(args: AnalyzeHrsArgs) -> Result<()> {
    let responses = load_responses(&args.responses)?;
    let pairs = load_pairs(&args.pairs)?;
    let lexicon = PronunciationLexicon::load(&args.lexicon)?;
    let scores = compute_hrs(&responses, &lexicon, args.mode.into())?;
    let comparisons = compare_pairs(&scores, &pairs)?;
    if let Some(path) = &args.scores_out {
        write_output(Some(path), &scores_csv(&scores))?;
    }
    write_output(args.comparisons_out.as_deref(), &comparisons_csv(&comparisons))
}

/// Numeric columns of a features CSV, keyed by header name.
#[allow(clippy::type_complexity)]
fn load_numeric_csv(path: &Path) -> Result<(Vec<String>, HashMap<String, Vec<f64>>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        for (c, cell) in raw.iter_mut().enumerate() {
            cell.push(record.get(c).unwrap_or_default().to_string());
        }
    }
    // A column is numeric when every cell parses.
    let mut columns = HashMap::new();
    for (name, cells) in headers.iter().zip(&raw) {
        let parsed: Option<Vec<f64>> = cells.iter().map(|c| c.trim().parse().ok()).collect();
        if let Some(values) = parsed {
            if !values.is_empty() {
                columns.insert(name.clone(), values);
            }
        }
    }
    Ok((headers, columns))
}

fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn fit_table(fit: &FitResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>10} {:>11} {:>8} {:>9}",
        "", "Estimate", "Std. Error", "t value", "Pr(>|t|)"
    );
    for c in &fit.coefficients {
        let _ = writeln!(
            out,
            "{:<16} {:>10.3} {:>11.3} {:>8.3} {:>9.3} {}",
            c.name,
            c.estimate,
            c.std_error,
            c.t_value,
            c.p_value,
            significance_stars(c.p_value)
        );
    }
    let _ = writeln!(out, "---");
    let _ = writeln!(
        out,
        "n = {}, residual df = {}, RSS = {:.6}, AIC = {:.3}",
        fit.n, fit.df_resid, fit.rss, fit.aic
    );
    out
}

#[derive(serde::Serialize)]
struct FitReport<'a> {
    fit: &'a FitResult,
    trace: &'a [StepRecord],
}

use std::fmt::Write as _;

fn cmd_fit(args: FitArgs) -> Result<()> {
    let (headers, columns) = load_numeric_csv(&args.features)?;
    let response = columns
        .get(&args.response)
        .ok_or_else(|| Error::MissingColumn {
            path: args.features.clone(),
            column: args.response.clone(),
        })?
        .clone();
    let predictor_names: Vec<String> = if args.predictors.is_empty() {
        headers
            .iter()
            .filter(|h| **h != args.response && columns.contains_key(*h))
            .cloned()
            .collect()
    } else {
        args.predictors.clone()
    };
    let mut cols = Vec::with_capacity(predictor_names.len());
    for name in &predictor_names {
        cols.push(
            columns
                .get(name)
                .ok_or_else(|| Error::MissingColumn {
                    path: args.features.clone(),
                    column: name.clone(),
                })?
                .clone(),
        );
    }
    let design = DesignMatrix::new(predictor_names, cols, response, args.response.clone())?;
    let (fit, trace) = match args.direction {
        None => (ols_fit(&design)?, Vec::new()),
        Some(Direction::Backward) => stepwise_select(&design, StepDirection::Backward)?,
        Some(Direction::Both) => stepwise_select(&design, StepDirection::Both)?,
    };
    print!("{}", fit_table(&fit));
    if let Some(path) = &args.json_out {
        let report = FitReport {
            fit: &fit,
            trace: &trace,
        };
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Other(e.to_string()))?;
        write_output(Some(path), &json)?;
    }
    Ok(())
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let pairs = load_pairs(&args.pairs)?;
    let lexicon = PronunciationLexicon::load(&args.lexicon)?;
    let lm = NgramModel::load(&args.lm)?;
    let models = match &args.models {
        Some(path) => ModelSet::load(path)?,
        None => ModelSet::canonical(),
    };
    let manifest = args
        .audio_manifest
        .as_deref()
        .map(load_audio_manifest)
        .transpose()?;

    let mut out = format!(
        "pair_id,chosen,alternative,predicted_gain,tie,{LOG_PROB},{DIFF_LOG_PROB},{PH_LEN},{DIFF_PH_LEN},{STOI},{DIFF_STOI}\n"
    );
    for pair in &pairs {
        let decision = choose(
            pair,
            args.snr,
            &models,
            &lm,
            &lexicon,
            manifest_audio(manifest.as_ref(), pair, &pair.word_a),
            manifest_audio(manifest.as_ref(), pair, &pair.word_b),
        )?;
        // Report the features of the winning hypothesis.
        let fv = if decision.chosen == pair.word_a {
            &decision.features_a
        } else {
            &decision.features_b
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            decision.pair_id,
            decision.chosen,
            decision.alternative,
            decision.predicted_gain,
            decision.tie,
            fv.log_prob,
            fv.diff_log_prob,
            fv.ph_len,
            fv.diff_ph_len,
            format_opt(fv.stoi),
            format_opt(fv.diff_stoi),
        );
    }
    write_output(args.out.as_deref(), &out)
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let responses = load_responses(&args.responses)?;
    let pairs = load_pairs(&args.pairs)?;
    let lexicon = PronunciationLexicon::load(&args.lexicon)?;
    let scores = compute_hrs(&responses, &lexicon, args.mode.into())?;
    let comparisons = compare_pairs(&scores, &pairs)?;
    let report = build_report(&scores, &comparisons)?;
    match args.format {
        ReportFormat::Text => print!("{}", report.to_text()),
        ReportFormat::Csv => print!("{}", report.to_condition_csv()),
    }
    Ok(())
}
