use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("a perfect mirror has no finite permittivity")]
    MirrorHasNoFinitePermittivity,
    #[error("frequency {omega:e} rad/s outside tabulated range [{lo:e}, {hi:e}]")]
    TabulatedOutOfRange { omega: f64, lo: f64, hi: f64 },
    #[error("no surface resonance (Re eps = -1 crossing) found")]
    NoSurfaceResonance,
    #[error("tabulated permittivity parse error at line {line}: {msg}")]
    TableParse { line: usize, msg: String },

    #[error("degenerate Fresnel denominator (|{0}| underflows)")]
    DegenerateDenominator(&'static str),
    #[error("resonant slab denominator |1 - r^2 exp(2i k_zm delta)| = {0:e}")]
    ResonantDenominator(f64),

    #[error("quadrature did not converge: {component} error {error:e} after {subdivisions} subdivisions")]
    QuadratureNoConvergence {
        component: &'static str,
        error: f64,
        subdivisions: usize,
    },
    #[error("evanescent integral diverges at contact (z = {0:e} m)")]
    DivergentAtContact(f64),
    #[error("regime {regime} does not apply: {reason}")]
    RegimeParameterMismatch { regime: &'static str, reason: String },

    #[error("alpha_W + alpha_M = 0: coupling vanishes, effective photon number undefined")]
    BothAlphasZero,

    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("total transition rate is zero")]
    ZeroTotalRate,
    #[error("both lower levels are dark (zero upward rates): steady state not unique")]
    BothChannelsDark,
    #[error("rate matrix is defective")]
    DegenerateRateMatrix,
    #[error("level scheme is degenerate: {0}")]
    DegenerateScheme(String),
    #[error("levels are not connected by allowed transitions: {0}")]
    DisconnectedLevels(String),
    #[error("steady state is not unique for the given rates")]
    NonUniqueSteadyState,
    #[error("closest thermal state requires a diagonal input")]
    NonDiagonalInput,
}

pub type Result<T> = std::result::Result<T, Error>;
