use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed config: {0}")]
    MalformedConfig(String),

    #[error("mode ({nu}, {sigma}) has no matching conjugate mode and realify is off")]
    RealityViolation { nu: i64, sigma: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("omega(A) - p/q has no sign change on [{lo}, {hi}]")]
    NoResonance { lo: f64, hi: f64 },

    #[error("Hypothesis 1 violated: the frequency map is flat at the resonance (omega' = {omega_prime:e})")]
    Hyp1Violated { omega_prime: f64 },

    #[error("Hypothesis 2 violated at t0 = {t0}: M(t0, .) has no real root")]
    Hyp2ViolatedNoRoot { t0: f64 },

    #[error("Hypothesis 2 violated at t0 = {t0}: dM/dC = {d:e} vanishes at the root")]
    Hyp2ViolatedDegenerate { t0: f64, d: f64 },

    #[error("t0 = {t0} is not a simple zero of the Melnikov function (M' = {m_prime:e})")]
    DegenerateZero { t0: f64, m_prime: f64 },

    #[error("t0 = {t0} is not a zero of the Melnikov function (M = {m:e})")]
    NotAZero { t0: f64, m: f64 },

    #[error("order {k}: zero mode {residual:e} of G cannot be cancelled")]
    SolvabilityFailure { k: usize, residual: f64 },

    #[error("every obstruction M_k vanishes identically through order {k}")]
    HierarchyExhausted { k: usize },

    #[error("tree enumeration at order {k} exceeds the cap {cap}")]
    TooLarge { k: usize, cap: usize },

    #[error("the tree expansion only supports a linear frequency map")]
    UnsupportedOmega,

    #[error("integration step underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("shooting did not converge after {iterations} iterations (defect {defect:e})")]
    NoConvergence { iterations: usize, defect: f64 },

    #[error("no orbit with period {target} inside the energy bracket")]
    NoSuchPeriod { target: f64 },

    #[error("sampled orbit does not close (defect {defect:e})")]
    BadOrbit { defect: f64 },

    #[error("C(eps, t0) is constant in t0: every phase is stationary")]
    AllStationary,

    #[error("gamma = {gamma} lies outside the existence interval [{lo}, {hi}]")]
    OutsideRange { gamma: f64, lo: f64, hi: f64 },

    #[error("subharmonic counting is only defined for p = 1 (got p = {p})")]
    CountingNeedsUnitP { p: i64 },

    #[error("no periodic orbit found anywhere in the C bracket")]
    NoExistenceAnywhere,
}

impl Error {
    /// True for the failures that mean an analytic hypothesis does not hold.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::Hyp1Violated { .. }
                | Error::Hyp2ViolatedNoRoot { .. }
                | Error::Hyp2ViolatedDegenerate { .. }
                | Error::DegenerateZero { .. }
                | Error::NotAZero { .. }
                | Error::NoResonance { .. }
                | Error::SolvabilityFailure { .. }
        )
    }

    pub fn is_oracle_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::StepUnderflow { .. }
                | Error::NoExistenceAnywhere
                | Error::NoSuchPeriod { .. }
                | Error::BadOrbit { .. }
        )
    }
}
