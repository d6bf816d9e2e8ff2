//! Locale-independent numeric formatting for the CLI surfaces.
//!
//! All numbers the CLI emits carry 9 significant digits; CSV cells use
//! scientific notation so the digit count is exact, JSON values are rounded
//! to 9 significant digits before serialization.

use odometer_core::odometer::OdometerValue;

pub const SIG_DIGITS: usize = 9;

/// 9-significant-digit cell, "inf" for infinities.
pub fn csv_cell(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_owned()
    } else {
        format!("{:.*e}", SIG_DIGITS - 1, x)
    }
}

pub fn csv_cell_odometer(v: &OdometerValue) -> String {
    v.render(SIG_DIGITS)
}

/// Rounds to 9 significant digits for JSON output.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(SIG_DIGITS as i32 - 1 - magnitude);
    (x * scale).round() / scale
}
