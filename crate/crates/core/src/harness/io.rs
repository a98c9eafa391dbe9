//! 8-bit grayscale image I/O. PGM (P2 and P5) and PNG are supported;
//! intensities map to `[0, 1]` by dividing by 255.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use crate::error::{Result, TvError};
use crate::fidelity::Mask;
use crate::grid::{GridShape, ImageField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmEncoding {
    /// P2
    Ascii,
    /// P5
    Binary,
}

fn decode_gray8(path: &Path) -> Result<(GridShape, Vec<u8>)> {
    let reader = ImageReader::open(path)?.with_guessed_format()?;
    match reader.format() {
        Some(ImageFormat::Pnm) | Some(ImageFormat::Png) => {}
        Some(other) => {
            return Err(TvError::UnsupportedImage(format!(
                "{}: {other:?} files are not supported, use PGM or PNG",
                path.display()
            )))
        }
        None => {
            return Err(TvError::UnsupportedImage(format!(
                "{}: unrecognized image format",
                path.display()
            )))
        }
    }
    let img = reader.decode()?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let shape = GridShape::new(h, w).map_err(|_| {
        TvError::UnsupportedImage(format!("{}: empty image", path.display()))
    })?;
    match img {
        DynamicImage::ImageLuma8(buf) => Ok((shape, buf.into_raw())),
        DynamicImage::ImageLuma16(_) => Err(TvError::UnsupportedImage(format!(
            "{}: 16-bit grayscale is not supported, convert to 8-bit",
            path.display()
        ))),
        other => Err(TvError::UnsupportedImage(format!(
            "{}: expected 8-bit grayscale, got {:?}",
            path.display(),
            other.color()
        ))),
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageField> {
    let (shape, raw) = decode_gray8(path.as_ref())?;
    ImageField::new(shape, raw.into_iter().map(|b| b as f64 / 255.0).collect())
}

/// Loads an inpainting mask; any nonzero pixel marks a missing pixel.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let (shape, raw) = decode_gray8(path.as_ref())?;
    Mask::new(shape, raw.into_iter().map(|b| b != 0).collect())
}

/// Clamps to `[0, 1]`, scales by 255 and rounds half up.
pub fn quantize(u: &ImageField) -> Vec<u8> {
    u.values()
        .iter()
        .map(|&x| (x.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8)
        .collect()
}

/// Saves as PGM (binary) or PNG, chosen by file extension.
pub fn save_image(u: &ImageField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("pgm") => save_pgm(u, path, PgmEncoding::Binary),
        Some("png") => {
            let bytes = quantize(u);
            let shape = u.shape();
            let out = BufWriter::new(File::create(path)?);
            image::codecs::png::PngEncoder::new(out).write_image(
                &bytes,
                shape.cols as u32,
                shape.rows as u32,
                ExtendedColorType::L8,
            )?;
            Ok(())
        }
        _ => Err(TvError::UnsupportedImage(format!(
            "{}: output extension must be .pgm or .png",
            path.display()
        ))),
    }
}

pub fn save_pgm(u: &ImageField, path: impl AsRef<Path>, encoding: PgmEncoding) -> Result<()> {
    let bytes = quantize(u);
    let shape = u.shape();
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    let sample = match encoding {
        PgmEncoding::Ascii => SampleEncoding::Ascii,
        PgmEncoding::Binary => SampleEncoding::Binary,
    };
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(sample))
        .write_image(&bytes, shape.cols as u32, shape.rows as u32, ExtendedColorType::L8)?;
    out.flush()?;
    Ok(())
}

pub fn save_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let shape = mask.shape();
    let field = ImageField::new(
        shape,
        mask.missing().iter().map(|&m| if m { 1.0 } else { 0.0 }).collect(),
    )?;
    save_image(&field, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rounds_half_up_and_clamps() {
        let s = GridShape::new(1, 4).unwrap();
        let u = ImageField::new(s, vec![-0.2, 0.5, 1.7, 2.5 / 255.0]).unwrap();
        assert_eq!(quantize(&u), vec![0, 128, 255, 3]);
    }

    #[test]
    fn ascii_and_binary_pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = GridShape::new(3, 5).unwrap();
        let u = ImageField::from_fn(s, |i, j| ((i * 5 + j) * 17 % 256) as f64 / 255.0);
        for (name, enc) in [("a.pgm", PgmEncoding::Ascii), ("b.pgm", PgmEncoding::Binary)] {
            let path = dir.path().join(name);
            save_pgm(&u, &path, enc).unwrap();
            let magic = std::fs::read(&path).unwrap();
            assert_eq!(&magic[..2], if enc == PgmEncoding::Ascii { b"P2" } else { b"P5" });
            assert_eq!(quantize(&load_image(&path).unwrap()), quantize(&u));
        }
    }

    #[test]
    fn all_zero_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.pgm");
        std::fs::write(&path, b"P2\n2 2\n255\n0 0\n0 0\n").unwrap();
        let u = load_image(&path).unwrap();
        assert_eq!(u.values(), &[0.0; 4]);
    }

    #[test]
    fn rejects_16_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wide.pgm");
        std::fs::write(&path, b"P2\n2 1\n65535\n0 40000\n").unwrap();
        let err = load_image(&path).unwrap_err();
        assert!(err.to_string().contains("16-bit"), "{err}");
    }

    #[test]
    fn rejects_unknown_extension() {
        let dir = tempfile::tempdir().unwrap();
        let u = ImageField::zeros(GridShape::new(1, 1).unwrap());
        assert!(save_image(&u, dir.path().join("x.bmp")).is_err());
    }
}
