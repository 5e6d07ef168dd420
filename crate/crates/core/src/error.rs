use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: duplicate edge {parent} -> {child}")]
    DuplicateEdge {
        line: usize,
        parent: String,
        child: String,
    },

    #[error("line {line}: node {child} has two parents ({first} and {second})")]
    TwoParents {
        line: usize,
        child: String,
        first: String,
        second: String,
    },

    #[error("cycle detected through node {0}")]
    Cycle(String),

    #[error("taxonomy has no root")]
    NoRoot,

    #[error("taxonomy has multiple roots: {0:?}")]
    MultipleRoots(Vec<String>),

    #[error("taxonomy is empty")]
    EmptyTaxonomy,

    #[error("root has no children")]
    NoCategories,

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("node {0} is the root")]
    RootNode(String),

    #[error("node {0} is not a leaf")]
    NotALeaf(String),

    #[error("line {line}: unknown label {label}")]
    UnknownLabel { line: usize, label: String },

    #[error("line {line}: label {label} is the root")]
    RootLabel { line: usize, label: String },

    #[error("line {line}: duplicate doc_id {doc_id}")]
    DuplicateDocId { line: usize, doc_id: String },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("validation set is empty")]
    EmptyValidationSet,

    #[error("test set is empty")]
    EmptyTestSet,

    #[error("invalid split fractions: validation {val}, test {test}")]
    InvalidFractions { val: f64, test: f64 },

    #[error("binary centroid mode requires a training policy")]
    MissingPolicy,

    #[error("chosen node {0} is not in the sibling group")]
    NotInGroup(String),

    #[error("no level weight for depth {0}")]
    MissingWeight(usize),

    #[error("equal error rate is undefined: {0}")]
    EerUndefined(&'static str),

    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("model does not match taxonomy: {0}")]
    TaxonomyMismatch(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSyntheticSpec(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}
