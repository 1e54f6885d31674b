use thiserror::Error;

/// Errors produced by the library.
///
/// Variants split into two families: bad inputs (malformed files, violated
/// invariants, impossible parameter combinations) and numerical failures
/// (no trapped mode, cutoff, singular mapping). [`Error::is_numerical`]
/// tells them apart so front ends can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} = {value} is outside the valid range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("fitted gradient a = {gradient:e} /m is not positive; profile is not a surface duct")]
    NotSurfaceDuct { gradient: f64 },

    #[error("depth spacing {dz} m is too coarse at {frequency} Hz (need dz <= {max_dz} m)")]
    GridTooCoarse {
        dz: f64,
        frequency: f64,
        max_dz: f64,
    },

    #[error("no propagating modes at {frequency} Hz")]
    NoPropagatingModes { frequency: f64 },

    #[error("mode {mode} does not exist at {frequency} Hz")]
    MissingMode { mode: usize, frequency: f64 },

    #[error("mode {mode} is cut off at omega = {omega} rad/s")]
    Cutoff { mode: usize, omega: f64 },

    #[error("no turning point: mode {mode} is not trapped by the profile")]
    NotTrapped { mode: usize },

    #[error("turning depth for mode {mode} lies below the deepest profile sample ({depth} m)")]
    TurningBeyondProfile { mode: usize, depth: f64 },

    #[error("invalid finite-difference stencil: {0}")]
    InvalidStencil(String),

    #[error("mode count changes across the stencil ({below} modes below, {above} above)")]
    ModeCountChanged { below: usize, above: usize },

    #[error("warping map is singular: signal support reaches t_r = {t_r} s (last sample at {t_last} s)")]
    SingularWarp { t_r: f64, t_last: f64 },

    #[error("bands for modes {first} and {second} overlap")]
    OverlappingBands { first: usize, second: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("audio container: {0}")]
    Audio(#[from] hound::Error),
}

impl Error {
    /// True for failures of the numerical model rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoPropagatingModes { .. }
                | Error::MissingMode { .. }
                | Error::Cutoff { .. }
                | Error::NotTrapped { .. }
                | Error::TurningBeyondProfile { .. }
                | Error::ModeCountChanged { .. }
                | Error::SingularWarp { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn out_of_range(what: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::OutOfRange {
            what,
            value,
            range: range.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
