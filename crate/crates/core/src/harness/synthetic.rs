//! Deterministic synthetic test images and masks.

use rand::Rng;

use crate::fidelity::Mask;
use crate::grid::{GridShape, ImageField};

use super::noise::rng;

/// Piecewise-constant phantom: a rectangle, a disk, a triangle and a small
/// bright square on a dark background, quantized to 8 bits.
pub fn phantom(shape: GridShape) -> ImageField {
    let (rows, cols) = (shape.rows as f64, shape.cols as f64);
    ImageField::from_fn(shape, |i, j| {
        let (y, x) = ((i as f64 + 0.5) / rows, (j as f64 + 0.5) / cols);
        let v: f64 = if (x - 0.68).powi(2) + (y - 0.32).powi(2) < 0.19f64.powi(2) {
            0.55
        } else if (0.12..0.45).contains(&x) && (0.1..0.42).contains(&y) {
            0.85
        } else if y > 0.55 && y < 0.9 && x > 0.1 && (x - 0.1) < (y - 0.55) * 1.4 {
            0.3
        } else if (0.62..0.82).contains(&x) && (0.64..0.84).contains(&y) {
            1.0
        } else {
            0.1
        };
        (v * 255.0).round() / 255.0
    })
}

/// The 64x64 sample image shipped as `data/sample64.pgm`.
pub fn bundled_sample() -> ImageField {
    phantom(GridShape { rows: 64, cols: 64 })
}

/// Two disks of intensity `inside` on a background of `outside`, with the
/// binary ground truth (1 inside the disks).
pub fn two_disks(shape: GridShape, inside: f64, outside: f64) -> (ImageField, ImageField) {
    let (rows, cols) = (shape.rows as f64, shape.cols as f64);
    let truth = ImageField::from_fn(shape, |i, j| {
        let (y, x) = ((i as f64 + 0.5) / rows, (j as f64 + 0.5) / cols);
        let a = (x - 0.32).powi(2) + (y - 0.35).powi(2) < 0.2f64.powi(2);
        let b = (x - 0.7).powi(2) + (y - 0.68).powi(2) < 0.17f64.powi(2);
        if a || b {
            1.0
        } else {
            0.0
        }
    });
    let image = truth.map(|t| if t > 0.5 { inside } else { outside });
    (image, truth)
}

/// Text-like mask: lines of 3x5 glyphs with one-pixel strokes and one-pixel
/// spacing. Glyph bitmaps are drawn from a seeded generator.
pub fn text_mask(shape: GridShape, seed: u64) -> Mask {
    const GLYPH_W: usize = 3;
    const GLYPH_H: usize = 5;
    const LINE_PITCH: usize = 9;
    let mut r = rng(seed);
    let mut missing = vec![false; shape.pixels()];
    let mut top = 2;
    while top + GLYPH_H <= shape.rows {
        let mut left = 2;
        while left + GLYPH_W <= shape.cols {
            // word gaps
            if r.random_ratio(1, 6) {
                left += GLYPH_W + 1;
                continue;
            }
            let bits: u16 = r.random::<u16>() & 0x7fff;
            for gy in 0..GLYPH_H {
                for gx in 0..GLYPH_W {
                    if bits >> (gy * GLYPH_W + gx) & 1 == 1 {
                        missing[shape.index(top + gy, left + gx)] = true;
                    }
                }
            }
            left += GLYPH_W + 1;
        }
        top += LINE_PITCH;
    }
    Mask::new(shape, missing).expect("length matches shape")
}
