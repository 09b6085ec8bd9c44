//! Number formatting shared by the CSV writers.

/// Fixed 17-significant-digit scientific notation; round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
