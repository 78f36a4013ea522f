use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("member {member} has zero length")]
    DegenerateGeometry { member: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("kinematically unstable structure (reciprocal condition estimate {rcond:.3e})")]
    KinematicInstability { rcond: f64 },

    #[error("problem `{problem}`: field `{field}`: {message}")]
    Load {
        problem: String,
        field: String,
        message: String,
    },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error(
        "geometry validation failed for `{design}`: computed {computed:.4}, published {published:.4} \
         ({relative_error:.3e} relative)"
    )]
    GeometryValidation {
        design: String,
        computed: f64,
        published: f64,
        relative_error: f64,
    },

    #[error("{0}")]
    Usage(String),

    #[error("malformed report: {0}")]
    Report(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn load(problem: &str, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Load {
            problem: problem.to_owned(),
            field: field.into(),
            message: message.into(),
        }
    }
}
