//! Number formatting shared by the text file formats.

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Six decimal places, as used by report tables.
pub fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}
