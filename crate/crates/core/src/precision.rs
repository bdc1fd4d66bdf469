//! Working precision for the big-float backend.

/// Default MPFR precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

/// Environment variable overriding [`DEFAULT_PRECISION`].
pub const PRECISION_ENV: &str = "FPT_PRECISION_BITS";

/// Precision from `FPT_PRECISION_BITS`, falling back to the default.
///
/// Values below 64 bits are clamped; the root finders and series
/// divisions assume at least double-double headroom.
pub fn from_env() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .map(|bits| bits.max(64))
        .unwrap_or(DEFAULT_PRECISION)
}
