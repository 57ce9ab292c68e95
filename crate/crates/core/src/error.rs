use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure surfaced by the library.
///
/// Domain errors (bad brackets, missing roots, divergent maps) are kept
/// distinct from I/O and parse errors so the command-line front end can map
/// them onto different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("right-hand side returned a non-finite value at t={t}, x={x}")]
    NonFiniteEvaluation { t: f64, x: f64 },

    #[error("step size underflow at t={t}: required step below h_min={h_min}")]
    StepUnderflow { t: f64, h_min: f64 },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("t={t} lies outside the covered interval [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("trajectory from x={x0} diverged to {direction} at t={t_escape}")]
    Divergence { x0: f64, t_escape: f64, direction: f64 },

    #[error("driver anchor angle {0} is not in (0, 2*pi)")]
    InvalidAnchor(f64),

    #[error("scan window [{lo}, {hi}] too small: |T(x) - x| is smallest at the window edge")]
    WindowTooSmall { lo: f64, hi: f64 },

    #[error("bad bracket: {0}")]
    BadBracket(String),

    #[error("order case is ambiguous: {0}")]
    Ambiguous(String),

    #[error("no sign change of h_yy on (0, {y_max}] at omega={omega}")]
    NoBracket { omega: f64, y_max: f64 },

    #[error("kernel decayed only to {achieved:e} over the horizon (need 1e-12)")]
    NonDecayingKernel { achieved: f64 },

    #[error("expected 3 equilibria of the past equation, found {0}")]
    UnexpectedRootCount(usize),

    #[error("pullback solution not converged: starts disagree by {0:e} at t=0")]
    NotConverged(f64),

    #[error("invalid spline geometry: {0}")]
    InvalidGeometry(String),

    #[error("x={x} outside the spline domain [0, {b}]")]
    OutOfDomain { x: f64, b: f64 },

    #[error("row {row}: current generation P_t={value} must be positive")]
    NonPositiveCurrentGeneration { row: usize, value: f64 },

    #[error("design matrix is rank deficient (rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// `true` for errors caused by the environment (files, parsing) rather
    /// than by the numerical problem itself.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_) | Error::Json(_))
    }
}
