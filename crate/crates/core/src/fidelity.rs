//! Separable fidelity terms `F` and their closed-form proximity operators.
//!
//! All five models are pixelwise separable, so the local functional on a
//! subdomain is the same model restricted to the subdomain's pixels.

use crate::decomposition::Subdomain;
use crate::error::{Result, TvError};
use crate::grid::{total_variation, GridShape, ImageField};

/// Per-pixel boolean raster; `true` marks a missing pixel (inpainting domain D).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    shape: GridShape,
    missing: Vec<bool>,
}

impl Mask {
    pub fn new(shape: GridShape, missing: Vec<bool>) -> Result<Self> {
        if missing.len() != shape.pixels() {
            return Err(TvError::LengthMismatch {
                expected: shape.pixels(),
                found: missing.len(),
            });
        }
        Ok(Mask { shape, missing })
    }

    pub fn none(shape: GridShape) -> Self {
        Mask {
            shape,
            missing: vec![false; shape.pixels()],
        }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn missing(&self) -> &[bool] {
        &self.missing
    }

    #[inline]
    pub fn is_missing(&self, k: usize) -> bool {
        self.missing[k]
    }

    pub fn count_missing(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    fn restrict(&self, sub: &Subdomain) -> Mask {
        let shape = sub.shape();
        let mut missing = Vec::with_capacity(shape.pixels());
        for i in 0..shape.rows {
            for j in 0..shape.cols {
                missing.push(self.missing[self.shape.index(sub.row0 + i, sub.col0 + j)]);
            }
        }
        Mask { shape, missing }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FidelityKind {
    RofL2,
    TvL1,
    InpaintL2,
    InpaintL1,
    Segmentation,
}

#[derive(Clone, Debug, PartialEq)]
enum Term {
    RofL2,
    TvL1,
    InpaintL2 { mask: Mask },
    InpaintL1 { mask: Mask },
    Segmentation { c1: f64, c2: f64, weight: ImageField },
}

/// `α F` together with the data it depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityModel {
    alpha: f64,
    data: ImageField,
    term: Term,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(TvError::InvalidParameter(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

impl FidelityModel {
    /// ROF: `F(u) = ½‖u − f‖²`.
    pub fn rof(alpha: f64, f: ImageField) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(FidelityModel {
            alpha,
            data: f,
            term: Term::RofL2,
        })
    }

    /// TV-L1: `F(u) = ‖u − f‖₁`.
    pub fn tv_l1(alpha: f64, f: ImageField) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(FidelityModel {
            alpha,
            data: f,
            term: Term::TvL1,
        })
    }

    /// `F(u) = ½‖Au − f‖²` where `A` zeroes the masked pixels. `f` is set to 0 on the mask.
    pub fn inpaint_l2(alpha: f64, f: ImageField, mask: Mask) -> Result<Self> {
        check_alpha(alpha)?;
        let data = zero_on_mask(f, &mask)?;
        Ok(FidelityModel {
            alpha,
            data,
            term: Term::InpaintL2 { mask },
        })
    }

    /// `F(u) = ‖Au − f‖₁`. `f` is set to 0 on the mask.
    pub fn inpaint_l1(alpha: f64, f: ImageField, mask: Mask) -> Result<Self> {
        check_alpha(alpha)?;
        let data = zero_on_mask(f, &mask)?;
        Ok(FidelityModel {
            alpha,
            data,
            term: Term::InpaintL1 { mask },
        })
    }

    /// Convex Chan–Vese: `F(u) = <u, g> + χ_{0≤u≤1}(u)`, `g = (f−c₁)² − (f−c₂)²`.
    pub fn segmentation(alpha: f64, f: ImageField, c1: f64, c2: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(c1.is_finite() && c2.is_finite()) {
            return Err(TvError::InvalidParameter("c1 and c2 must be finite".into()));
        }
        let weight = segmentation_weight(&f, c1, c2);
        Ok(FidelityModel {
            alpha,
            data: f,
            term: Term::Segmentation { c1, c2, weight },
        })
    }

    pub fn kind(&self) -> FidelityKind {
        match self.term {
            Term::RofL2 => FidelityKind::RofL2,
            Term::TvL1 => FidelityKind::TvL1,
            Term::InpaintL2 { .. } => FidelityKind::InpaintL2,
            Term::InpaintL1 { .. } => FidelityKind::InpaintL1,
            Term::Segmentation { .. } => FidelityKind::Segmentation,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn shape(&self) -> GridShape {
        self.data.shape()
    }

    /// The data `f` (zero on the mask for inpainting models).
    pub fn data(&self) -> &ImageField {
        &self.data
    }

    pub fn mask(&self) -> Option<&Mask> {
        match &self.term {
            Term::InpaintL2 { mask } | Term::InpaintL1 { mask } => Some(mask),
            _ => None,
        }
    }

    /// Segmentation weight `g`, present only for the segmentation model.
    pub fn weight(&self) -> Option<&ImageField> {
        match &self.term {
            Term::Segmentation { weight, .. } => Some(weight),
            _ => None,
        }
    }

    pub fn intensities(&self) -> Option<(f64, f64)> {
        match self.term {
            Term::Segmentation { c1, c2, .. } => Some((c1, c2)),
            _ => None,
        }
    }

    /// The local functional `F_s` as a model on the subdomain's pixels.
    pub fn restrict(&self, sub: &Subdomain) -> FidelityModel {
        let block = |u: &ImageField| {
            ImageField::from_fn(sub.shape(), |i, j| u.get(sub.row0 + i, sub.col0 + j))
        };
        let term = match &self.term {
            Term::RofL2 => Term::RofL2,
            Term::TvL1 => Term::TvL1,
            Term::InpaintL2 { mask } => Term::InpaintL2 {
                mask: mask.restrict(sub),
            },
            Term::InpaintL1 { mask } => Term::InpaintL1 {
                mask: mask.restrict(sub),
            },
            Term::Segmentation { c1, c2, weight } => Term::Segmentation {
                c1: *c1,
                c2: *c2,
                weight: block(weight),
            },
        };
        FidelityModel {
            alpha: self.alpha,
            data: block(&self.data),
            term,
        }
    }

    /// `F(u)` (without α). Returns `+∞` outside the domain of `F`.
    pub fn energy(&self, u: &ImageField) -> Result<f64> {
        u.ensure_shape(self.shape())?;
        let f = self.data.values();
        let u = u.values();
        let e = match &self.term {
            Term::RofL2 => 0.5 * u.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
            Term::TvL1 => u.iter().zip(f).map(|(a, b)| (a - b).abs()).sum(),
            Term::InpaintL2 { mask } => {
                0.5 * u
                    .iter()
                    .zip(f)
                    .zip(mask.missing())
                    .filter(|(_, &m)| !m)
                    .map(|((a, b), _)| (a - b) * (a - b))
                    .sum::<f64>()
            }
            Term::InpaintL1 { mask } => u
                .iter()
                .zip(f)
                .zip(mask.missing())
                .filter(|(_, &m)| !m)
                .map(|((a, b), _)| (a - b).abs())
                .sum(),
            Term::Segmentation { weight, .. } => {
                if u.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                    f64::INFINITY
                } else {
                    u.iter().zip(weight.values()).map(|(a, g)| a * g).sum()
                }
            }
        };
        Ok(e)
    }

    /// `F_s(u_s)` for the restriction of the model to `sub`.
    pub fn energy_local(&self, sub: &Subdomain, u_s: &ImageField) -> Result<f64> {
        self.restrict(sub).energy(u_s)
    }

    /// `J(u) = α F(u) + TV(u)`.
    pub fn energy_total(&self, u: &ImageField) -> Result<f64> {
        Ok(self.alpha * self.energy(u)? + total_variation(u))
    }

    /// `prox_{σF}(u) = argmin_v F(v) + ‖v − u‖²/(2σ)`, pixelwise closed forms.
    ///
    /// The solvers pass `σ = σ₀ α` to obtain the prox of `σ₀ α F`.
    pub fn prox(&self, u: &ImageField, sigma: f64) -> Result<ImageField> {
        u.ensure_shape(self.shape())?;
        if !(sigma > 0.0) {
            return Err(TvError::InvalidParameter(format!(
                "prox step must be positive, got {sigma}"
            )));
        }
        let mut out = u.clone();
        self.prox_in_place(out.values_mut(), sigma);
        Ok(out)
    }

    pub(crate) fn prox_in_place(&self, u: &mut [f64], sigma: f64) {
        let f = self.data.values();
        match &self.term {
            Term::RofL2 => {
                let d = 1.0 / (1.0 + sigma);
                for (x, &fi) in u.iter_mut().zip(f) {
                    *x = (*x + sigma * fi) * d;
                }
            }
            Term::TvL1 => {
                for (x, &fi) in u.iter_mut().zip(f) {
                    *x = fi + soft_threshold(*x - fi, sigma);
                }
            }
            Term::InpaintL2 { mask } => {
                let d = 1.0 / (1.0 + sigma);
                for ((x, &fi), &m) in u.iter_mut().zip(f).zip(mask.missing()) {
                    if !m {
                        *x = (*x + sigma * fi) * d;
                    }
                }
            }
            Term::InpaintL1 { mask } => {
                for ((x, &fi), &m) in u.iter_mut().zip(f).zip(mask.missing()) {
                    if !m {
                        *x = fi + soft_threshold(*x - fi, sigma);
                    }
                }
            }
            Term::Segmentation { weight, .. } => {
                for (x, &g) in u.iter_mut().zip(weight.values()) {
                    *x = (*x - sigma * g).clamp(0.0, 1.0);
                }
            }
        }
    }

    /// `prox_{σF_s}` on subdomain `sub`; equals the global prox restricted.
    pub fn prox_local(&self, sub: &Subdomain, u_s: &ImageField, sigma: f64) -> Result<ImageField> {
        self.restrict(sub).prox(u_s, sigma)
    }

    /// A point of `dom F` to start iterating from: the data, clamped to
    /// `[0, 1]` for segmentation.
    pub fn initial_guess(&self) -> ImageField {
        match self.term {
            Term::Segmentation { .. } => self.data.map(|x| x.clamp(0.0, 1.0)),
            _ => self.data.clone(),
        }
    }
}

fn zero_on_mask(f: ImageField, mask: &Mask) -> Result<ImageField> {
    f.ensure_shape(mask.shape())?;
    let mut f = f;
    for (x, &m) in f.values_mut().iter_mut().zip(mask.missing()) {
        if m {
            *x = 0.0;
        }
    }
    Ok(f)
}

#[inline]
fn soft_threshold(v: f64, sigma: f64) -> f64 {
    let mag = v.abs() - sigma;
    if mag > 0.0 {
        mag.copysign(v)
    } else {
        0.0
    }
}

/// Elementwise shrinkage on `region` (`true` pixels), identity elsewhere.
pub fn shrink(v: &ImageField, sigma: f64, region: &[bool]) -> Result<ImageField> {
    if region.len() != v.shape().pixels() {
        return Err(TvError::LengthMismatch {
            expected: v.shape().pixels(),
            found: region.len(),
        });
    }
    let mut out = v.clone();
    for (x, &r) in out.values_mut().iter_mut().zip(region) {
        if r {
            *x = soft_threshold(*x, sigma);
        }
    }
    Ok(out)
}

/// `g = (f − c₁)² − (f − c₂)²`.
pub fn segmentation_weight(f: &ImageField, c1: f64, c2: f64) -> ImageField {
    f.map(|x| (x - c1) * (x - c1) - (x - c2) * (x - c2))
}

/// Binarizes `u` at `level`; ties go to 1.
pub fn threshold(u: &ImageField, level: f64) -> ImageField {
    u.map(|x| if x >= level { 1.0 } else { 0.0 })
}
