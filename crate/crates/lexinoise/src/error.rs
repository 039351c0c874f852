use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("wav error for {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("unsupported wav encoding in {path}: {detail}")]
    UnsupportedEncoding { path: PathBuf, detail: String },
    #[error("zero-length audio")]
    ZeroLengthAudio,
    #[error("empty signal")]
    EmptySignal,
    #[error("invalid sample rate: {0}")]
    InvalidSampleRate(u32),
    #[error("SNR must be finite, got {0}")]
    NonFiniteSnr(f64),
    #[error("sample-rate mismatch: {left} Hz vs {right} Hz")]
    SampleRateMismatch { left: u32, right: u32 },
    #[error("zero-RMS {which} signal")]
    ZeroRms { which: &'static str },
    #[error("signal length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },
    #[error("duration mismatch beyond tolerance: {left} vs {right} samples")]
    DurationMismatch { left: usize, right: usize },
    #[error("all frames silent")]
    AllFramesSilent,
    #[error("silent clean signal")]
    SilentClean,
    #[error("signal shorter than one frame ({len} < {frame_len} samples)")]
    SignalTooShort { len: usize, frame_len: usize },
    #[error("too few frames after silence removal: {frames} < {required} (≈384 ms of speech required)")]
    SegmentTooShort { frames: usize, required: usize },
    #[error("invalid STOI configuration: {0}")]
    InvalidStoiConfig(String),
    #[error("{path}:{line}: malformed lexicon line: {detail}")]
    MalformedLexiconLine {
        path: PathBuf,
        line: usize,
        detail: String,
    },
    #[error("empty lexicon file {path}")]
    EmptyLexicon { path: PathBuf },
    #[error("out-of-vocabulary word: {0}")]
    OovWord(String),
    #[error("pairs file {path}, record {record}: {detail}")]
    InvalidPairRecord {
        path: PathBuf,
        record: usize,
        detail: String,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing column {column}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}, record {record}: {detail}")]
    InvalidRecord {
        path: PathBuf,
        record: usize,
        detail: String,
    },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid n-gram order: {0}")]
    InvalidOrder(usize),
    #[error("discount must lie in (0, 1), got {0}")]
    InvalidDiscount(f64),
    #[error("model file {path}: {detail}")]
    ModelFormat { path: PathBuf, detail: String },
    #[error("model file {path} has unsupported format version {found} (supported: {supported})")]
    ModelVersion {
        path: PathBuf,
        found: u32,
        supported: u32,
    },
    #[error("empty response record list")]
    EmptyResponses,
    #[error("duplicate response for stimulus {stimulus_id}, participant {participant_id}")]
    DuplicateResponse {
        stimulus_id: String,
        participant_id: String,
    },
    #[error("missing score for pair {pair_id}, word {word}, condition snr {snr_db} dB")]
    MissingScore {
        pair_id: String,
        word: String,
        snr_db: f64,
    },
    #[error("insufficient data: need at least {required} points, got {got}")]
    InsufficientData { required: usize, got: usize },
    #[error("design matrix: {0}")]
    InvalidDesign(String),
    #[error("rank-deficient design matrix; offending column(s): {columns:?}")]
    RankDeficient { columns: Vec<String> },
    #[error("feature {0} required by the condition model but absent")]
    MissingFeature(String),
    #[error("no condition model covers SNR {0} dB")]
    NoModelForSnr(f64),
    #[error("condition models do not partition the SNR axis: {0}")]
    InvalidModelSet(String),
    #[error("missing audio for pair {pair_id}, word {word} (the active model uses STOI features)")]
    MissingAudio { pair_id: String, word: String },
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
