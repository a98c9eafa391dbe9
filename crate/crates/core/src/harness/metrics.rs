use crate::grid::ImageField;

/// Peak signal-to-noise ratio in dB with peak 1. Identical images give `+∞`.
pub fn psnr(u: &ImageField, reference: &ImageField) -> f64 {
    let n = u.values().len() as f64;
    let mse = u
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

/// Formats a PSNR value, writing `inf` for identical images.
pub fn format_psnr(value: f64) -> String {
    if value.is_infinite() {
        "inf".to_string()
    } else {
        format!("{value:.2}")
    }
}

/// Fraction of pixels where two binary images disagree.
pub fn mismatch_fraction(a: &ImageField, b: &ImageField) -> f64 {
    let n = a.values().len() as f64;
    let bad = a
        .values()
        .iter()
        .zip(b.values())
        .filter(|(x, y)| (*x - *y).abs() > 0.5)
        .count();
    bad as f64 / n
}
