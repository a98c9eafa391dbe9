//! Discrete function spaces on the pixel grid.
//!
//! The primal space holds one value per pixel (piecewise constants on unit
//! squares). The dual space is the lowest-order Raviart–Thomas space with
//! zero normal trace on the image boundary: one normal-component value per
//! interior pixel edge.
//!
//! Edge orientation is global. A vertical edge `(i, j)` separates pixels
//! `(i, j)` and `(i, j + 1)` and its normal points in the +column direction;
//! a horizontal edge `(i, j)` separates `(i, j)` and `(i + 1, j)` with normal
//! in the +row direction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TvError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(TvError::EmptyGrid { rows, cols });
        }
        Ok(GridShape { rows, cols })
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    /// Number of vertical interior edges, `rows * (cols - 1)`.
    pub fn v_edges(&self) -> usize {
        self.rows * (self.cols - 1)
    }

    /// Number of horizontal interior edges, `(rows - 1) * cols`.
    pub fn h_edges(&self) -> usize {
        (self.rows - 1) * self.cols
    }

    pub fn edges(&self) -> usize {
        self.v_edges() + self.h_edges()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// Primal variable: one intensity per pixel, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageField {
    shape: GridShape,
    values: Vec<f64>,
}

impl ImageField {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.pixels() {
            return Err(TvError::LengthMismatch {
                expected: shape.pixels(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(TvError::NonFinite { index });
        }
        Ok(ImageField { shape, values })
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self::constant(shape, 0.0)
    }

    pub fn constant(shape: GridShape, value: f64) -> Self {
        ImageField {
            shape,
            values: vec![value; shape.pixels()],
        }
    }

    pub fn from_fn(shape: GridShape, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(shape.pixels());
        for i in 0..shape.rows {
            for j in 0..shape.cols {
                values.push(f(i, j));
            }
        }
        ImageField { shape, values }
    }

    pub(crate) fn from_vec_unchecked(shape: GridShape, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), shape.pixels());
        ImageField { shape, values }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.shape.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.shape.index(i, j);
        self.values[k] = value;
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ImageField {
        ImageField {
            shape: self.shape,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_shape(&self, expected: GridShape) -> Result<()> {
        if self.shape != expected {
            return Err(TvError::ShapeMismatch {
                expected,
                found: self.shape,
            });
        }
        Ok(())
    }
}

/// Global dual variable in the Raviart–Thomas space with zero boundary
/// normal trace. Boundary edges are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct DualField {
    shape: GridShape,
    v: Vec<f64>,
    h: Vec<f64>,
}

impl DualField {
    pub fn zeros(shape: GridShape) -> Self {
        DualField {
            shape,
            v: vec![0.0; shape.v_edges()],
            h: vec![0.0; shape.h_edges()],
        }
    }

    /// `v` is `rows x (cols - 1)` row-major, `h` is `(rows - 1) x cols` row-major.
    pub fn new(shape: GridShape, v: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if v.len() != shape.v_edges() {
            return Err(TvError::LengthMismatch {
                expected: shape.v_edges(),
                found: v.len(),
            });
        }
        if h.len() != shape.h_edges() {
            return Err(TvError::LengthMismatch {
                expected: shape.h_edges(),
                found: h.len(),
            });
        }
        if let Some(index) = v.iter().chain(h.iter()).position(|x| !x.is_finite()) {
            return Err(TvError::NonFinite { index });
        }
        Ok(DualField { shape, v, h })
    }

    /// Builds a field from a flat dof vector: vertical edges first, then horizontal.
    pub fn from_dofs(shape: GridShape, dofs: &[f64]) -> Result<Self> {
        if dofs.len() != shape.edges() {
            return Err(TvError::LengthMismatch {
                expected: shape.edges(),
                found: dofs.len(),
            });
        }
        let (v, h) = dofs.split_at(shape.v_edges());
        Self::new(shape, v.to_vec(), h.to_vec())
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn v_edges(&self) -> &[f64] {
        &self.v
    }

    pub fn h_edges(&self) -> &[f64] {
        &self.h
    }

    pub fn v_edges_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }

    pub fn h_edges_mut(&mut self) -> &mut [f64] {
        &mut self.h
    }

    /// Vertical edge between pixels `(i, j)` and `(i, j + 1)`.
    #[inline]
    pub fn v(&self, i: usize, j: usize) -> f64 {
        self.v[i * (self.shape.cols - 1) + j]
    }

    /// Horizontal edge between pixels `(i, j)` and `(i + 1, j)`.
    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.shape.cols + j]
    }

    #[inline]
    pub fn set_v(&mut self, i: usize, j: usize, value: f64) {
        let k = i * (self.shape.cols - 1) + j;
        self.v[k] = value;
    }

    #[inline]
    pub fn set_h(&mut self, i: usize, j: usize, value: f64) {
        let k = i * self.shape.cols + j;
        self.h[k] = value;
    }

    pub fn dofs(&self) -> impl Iterator<Item = f64> + '_ {
        self.v.iter().chain(self.h.iter()).copied()
    }

    pub fn dof_count(&self) -> usize {
        self.v.len() + self.h.len()
    }

    pub fn to_dofs(&self) -> Vec<f64> {
        self.dofs().collect()
    }

    /// Membership in the dof-wise unit box.
    pub fn in_unit_ball(&self, tol: f64) -> bool {
        self.dofs().all(|x| x.abs() <= 1.0 + tol)
    }
}

/// `(div p)_{i,j} = v_{i,j} - v_{i,j-1} + h_{i,j} - h_{i-1,j}` with absent
/// (boundary) edges read as zero.
pub fn divergence(p: &DualField) -> ImageField {
    let shape = p.shape;
    let (rows, cols) = (shape.rows, shape.cols);
    let mut out = vec![0.0; shape.pixels()];
    for i in 0..rows {
        for j in 0..cols {
            let mut d = 0.0;
            if j + 1 < cols {
                d += p.v(i, j);
            }
            if j > 0 {
                d -= p.v(i, j - 1);
            }
            if i + 1 < rows {
                d += p.h(i, j);
            }
            if i > 0 {
                d -= p.h(i - 1, j);
            }
            out[i * cols + j] = d;
        }
    }
    ImageField::from_vec_unchecked(shape, out)
}

/// Adjoint of [`divergence`]: the negative forward difference.
pub fn divergence_adjoint(u: &ImageField) -> DualField {
    let shape = u.shape;
    let (rows, cols) = (shape.rows, shape.cols);
    let mut p = DualField::zeros(shape);
    for i in 0..rows {
        for j in 0..cols - 1 {
            p.set_v(i, j, u.get(i, j) - u.get(i, j + 1));
        }
    }
    for i in 0..rows - 1 {
        for j in 0..cols {
            p.set_h(i, j, u.get(i, j) - u.get(i + 1, j));
        }
    }
    p
}

/// Anisotropic discrete total variation: the sum of absolute jumps across
/// interior edges. Equals `max_{p in C} <u, div p>`.
pub fn total_variation(u: &ImageField) -> f64 {
    let (rows, cols) = (u.shape.rows, u.shape.cols);
    let mut tv = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let c = u.get(i, j);
            if j + 1 < cols {
                tv += (c - u.get(i, j + 1)).abs();
            }
            if i + 1 < rows {
                tv += (c - u.get(i + 1, j)).abs();
            }
        }
    }
    tv
}

/// The dual field attaining the maximum in the dual definition of TV.
pub fn tv_maximizer(u: &ImageField) -> DualField {
    let mut p = divergence_adjoint(u);
    // <u, div p> = <div* u, p>, so the maximizer is the sign of div* u.
    for x in p.v.iter_mut().chain(p.h.iter_mut()) {
        *x = sign(*x);
    }
    p
}

#[inline]
pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn clamp_unit(x: f64) -> f64 {
    x / x.abs().max(1.0)
}

/// Dof-wise projection onto `{ |p_i| <= 1 }`.
pub fn project_unit_ball(p: &DualField) -> DualField {
    let mut out = p.clone();
    project_unit_ball_in_place(out.v.as_mut_slice());
    project_unit_ball_in_place(out.h.as_mut_slice());
    out
}

pub(crate) fn project_unit_ball_in_place(dofs: &mut [f64]) {
    for x in dofs {
        *x = clamp_unit(*x);
    }
}

pub fn inner(a: &ImageField, b: &ImageField) -> f64 {
    dot(&a.values, &b.values)
}

pub fn inner_dual(a: &DualField, b: &DualField) -> f64 {
    dot(&a.v, &b.v) + dot(&a.h, &b.h)
}

pub fn norm2(u: &ImageField) -> f64 {
    inner(u, u).sqrt()
}

pub fn norm2_dual(p: &DualField) -> f64 {
    inner_dual(p, p).sqrt()
}

pub fn norm1(u: &ImageField) -> f64 {
    u.values.iter().map(|x| x.abs()).sum()
}

pub fn norm1_dual(p: &DualField) -> f64 {
    p.dofs().map(f64::abs).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
