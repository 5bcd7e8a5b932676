//! Shared error type for the core library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("{op}: invalid shape {shape:?}: {reason}")]
    InvalidShape {
        op: &'static str,
        shape: Vec<usize>,
        reason: String,
    },

    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),

    #[error("missing gradient for parameter `{0}`")]
    MissingGradient(String),

    #[error("invalid layer map (teacher {teacher_layers}, student {student_layers}): {reason}")]
    InvalidLayerMap {
        teacher_layers: usize,
        student_layers: usize,
        reason: String,
    },

    #[error("layer map references layer {index} absent from a {side} stack of {available} layers")]
    LayerIndexOutOfRange {
        side: &'static str,
        index: usize,
        available: usize,
    },

    #[error("degenerate embedding with near-zero norm at batch index {index}{}", .utt_id.as_ref().map(|u| format!(" (utterance {u})")).unwrap_or_default())]
    DegenerateEmbedding { index: usize, utt_id: Option<String> },

    #[error("invalid encoder config: {0}")]
    InvalidConfig(String),

    #[error("teacher/student config mismatch: {0}")]
    ConfigMismatch(String),

    #[error("training corpus must contain both bonafide and spoof utterances, found only {0}")]
    SingleClassCorpus(String),

    #[error("one-class contract violated: utterance `{0}` is labeled spoof in the student training set")]
    SpoofInStudentCorpus(String),

    #[error("unknown attack family `{0}`")]
    UnknownAttackFamily(String),

    #[error("waveform of {len} samples is shorter than one frame ({frame} samples)")]
    WaveformTooShort { len: usize, frame: usize },

    #[error("utterance `{utt_id}` is entirely below the trim threshold")]
    AllSilence { utt_id: String },

    #[error("trimming `{utt_id}` left {remaining_s:.3} s of audio, less than the 0.2 s minimum")]
    TrimmedTooShort { utt_id: String, remaining_s: f64 },

    #[error("duplicate utterance id `{0}` across corpus splits")]
    DuplicateUttId(String),

    #[error("scores must contain at least one record per class (bonafide {bonafide}, spoof {spoof})")]
    SingleClassScores { bonafide: usize, spoof: usize },

    #[error("non-finite {what}: {detail}")]
    NumericFailure { what: &'static str, detail: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("protocol parse error at {path}:{line}: {reason}")]
    ProtocolParse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("score file parse error at {path}:{line}: {reason}")]
    ScoreParse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("wav error: {0}")]
    Wav(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
