use thiserror::Error;

/// Errors raised by state construction, optical elements, heralded channels
/// and network routing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit amplitudes must satisfy |bh|^2 + |bv|^2 = 1, got {0}")]
    QubitNorm(f64),

    #[error("state norm^2 is {0}, outside the normalization tolerance")]
    StateNorm(f64),

    #[error("mode path label must be non-empty")]
    EmptyPath,

    #[error("tensor factors share the path label `{0}`")]
    PathOverlap(String),

    #[error("output path `{0}` already carries photons unrelated to this element")]
    PathInUse(String),

    #[error("mode list contains duplicate entries")]
    DuplicateModes,

    #[error("matrix must be square over {expected} modes, got {rows}x{cols}")]
    MatrixShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("matrix is not unitary within tolerance")]
    NonUnitaryMatrix,

    #[error("projection outcome has probability below 1e-15; impossible outcome")]
    ImpossibleOutcome,

    #[error("detector model parameter out of range: {0}")]
    DetectorModel(&'static str),

    #[error("path `{0}` must carry exactly one photon in every term")]
    SinglePhotonExpected(String),

    #[error("photon on `{path}` sits at time bin {bin}, outside the supported bins")]
    BinOutOfRange { path: String, bin: u32 },

    #[error("time origin shift would move a photon to a negative bin")]
    NegativeBin,

    #[error("control qubit is not a computational basis state; superposed controls are unsupported")]
    UnsupportedControl,

    #[error("invalid control settings: {0}")]
    InvalidControls(&'static str),

    #[error("state on `{0}` is not a single-photon payload over time bins 0 and 1")]
    NotFused(String),

    #[error("state does not factor into a qubit on `{0}` times a remainder")]
    NotSeparable(String),

    #[error("network size {0} must be a power of two and at least 4")]
    InvalidNetworkSize(usize),

    #[error("packet {0} reuses an input port")]
    DuplicateInputPort(usize),

    #[error("packet {0} reuses a destination port")]
    DuplicateDestination(usize),

    #[error("packet {index} has port {port} out of range for {n} ports")]
    PortOutOfRange {
        index: usize,
        port: usize,
        n: usize,
    },

    #[error("monte carlo requires at least one trial")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
