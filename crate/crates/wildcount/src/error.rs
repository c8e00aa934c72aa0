use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("extension degree {0} out of supported range 1..=12")]
    DegreeOutOfRange(u32),
    #[error("division by zero in GF(p^d)")]
    DivisionByZero,
    #[error("elements belong to different field/ring parameters")]
    ParamsMismatch,
    #[error("invalid Lie algebra spec: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("enumeration too large: needs {required} steps, guard is {guard} (set WILDCOUNT_SCALE_GUARD to override)")]
    TooLarge { required: u128, guard: u128 },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Enumeration guard, overridable through `WILDCOUNT_SCALE_GUARD`.
pub fn scale_guard(default: u128) -> u128 {
    match std::env::var("WILDCOUNT_SCALE_GUARD") {
        Ok(s) => s.parse().unwrap_or(default),
        Err(_) => default,
    }
}

pub(crate) fn check_guard(required: u128, default: u128) -> Result<()> {
    let guard = scale_guard(default);
    if required > guard {
        return Err(Error::TooLarge { required, guard });
    }
    Ok(())
}
