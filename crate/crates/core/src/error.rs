use thiserror::Error;

#[derive(Debug, Error)]
pub enum RicError {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("dimension {0} is not supported (at most 7)")]
    DimensionTooLarge(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("label sets collide on `{0}`")]
    LabelCollision(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("ordering is not a permutation of the register labels")]
    NotAPermutation,

    #[error("expected {expected} amplitudes, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("operator has negative eigenvalue {0:e}")]
    NotPositive(f64),

    #[error("selection of subsystems is empty")]
    EmptySelection,

    #[error("bipartition does not match the register")]
    BipartitionMismatch,

    #[error("label mismatch between states")]
    LabelMismatch,

    #[error("invalid cloning parameters: {0}")]
    InvalidParams(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("joining qudits {0} and {1} is not an allowed unlocking move")]
    JoinNotAllowed(String, String),

    #[error("transcript is incomplete: {0}")]
    IncompleteTranscript(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl RicError {
    /// Stable snake_case name of the variant, for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            RicError::InvalidDimension(_) => "invalid_dimension",
            RicError::DimensionTooLarge(_) => "dimension_too_large",
            RicError::DimensionMismatch(..) => "dimension_mismatch",
            RicError::DuplicateLabel(_) => "duplicate_label",
            RicError::LabelCollision(_) => "label_collision",
            RicError::UnknownLabel(_) => "unknown_label",
            RicError::NotAPermutation => "not_a_permutation",
            RicError::ShapeMismatch { .. } => "shape_mismatch",
            RicError::NotNormalized(_) => "not_normalized",
            RicError::NotHermitian(_) => "not_hermitian",
            RicError::BadTrace(_) => "bad_trace",
            RicError::NotPositive(_) => "not_positive",
            RicError::EmptySelection => "empty_selection",
            RicError::BipartitionMismatch => "bipartition_mismatch",
            RicError::LabelMismatch => "label_mismatch",
            RicError::InvalidParams(_) => "invalid_params",
            RicError::InvalidChannel(_) => "invalid_channel",
            RicError::InvalidAssignment(_) => "invalid_assignment",
            RicError::JoinNotAllowed(..) => "join_not_allowed",
            RicError::IncompleteTranscript(_) => "incomplete_transcript",
            RicError::InvalidConfig(_) => "invalid_config",
            RicError::Io(_) => "io",
            RicError::Json(_) => "json",
            RicError::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = RicError> = std::result::Result<T, E>;
