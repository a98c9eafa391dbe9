//! Brute-force verifiers: dense operator matrices, scalar prox search,
//! exhaustive search on tiny grids, and long-run reference energies.
//!
//! Everything here is built from first principles (edge enumeration,
//! pointwise objectives) rather than by calling the production kernels, so
//! that agreement between the two is meaningful.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::decomposition::{InterfaceMultiplier, LocalLayout, Partition, Subdomain, TornDualField};
use crate::error::{Result, TvError};
use crate::fidelity::{FidelityKind, FidelityModel};
use crate::grid::{DualField, GridShape, ImageField};
use crate::harness::noise::rng;
use crate::solvers::{solve_full_primal_dual, PrimalDualParams};

/// Largest grid extent accepted by the dense builders.
pub const DENSE_LIMIT: usize = 32;

/// A dense matrix standing in for a linear operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(TvError::LengthMismatch {
                expected: self.cols(),
                found: x.len(),
            });
        }
        let y = &self.matrix * DVector::from_column_slice(x);
        Ok(y.as_slice().to_vec())
    }

    pub fn transpose(&self) -> DenseOperator {
        DenseOperator {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.matrix.clone().svd(false, false).singular_values.as_slice().to_vec()
    }

    /// Largest entrywise difference to another operator of the same size.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        if self.matrix.shape() != other.matrix.shape() {
            return f64::INFINITY;
        }
        (&self.matrix - &other.matrix).amax()
    }
}

fn guard(shape: GridShape) -> Result<()> {
    if shape.rows > DENSE_LIMIT || shape.cols > DENSE_LIMIT {
        return Err(TvError::SizeGuard {
            rows: shape.rows,
            cols: shape.cols,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

/// Matrix of `div` mapping edge dofs (vertical then horizontal, row-major)
/// to pixels, assembled edge by edge from the flux balance of each cell.
pub fn densify_divergence(shape: GridShape) -> Result<DenseOperator> {
    guard(shape)?;
    let (rows, cols) = (shape.rows, shape.cols);
    let mut m = DMatrix::zeros(shape.pixels(), shape.edges());
    let mut e = 0;
    // vertical edge (i, j) separates pixel (i, j) from (i, j + 1)
    for i in 0..rows {
        for j in 0..cols - 1 {
            m[(i * cols + j, e)] += 1.0;
            m[(i * cols + j + 1, e)] -= 1.0;
            e += 1;
        }
    }
    // horizontal edge (i, j) separates pixel (i, j) from (i + 1, j)
    for i in 0..rows - 1 {
        for j in 0..cols {
            m[(i * cols + j, e)] += 1.0;
            m[((i + 1) * cols + j, e)] -= 1.0;
            e += 1;
        }
    }
    Ok(DenseOperator { matrix: m })
}

/// Matrix of `div*`, built independently as the negative forward difference.
pub fn densify_divergence_adjoint(shape: GridShape) -> Result<DenseOperator> {
    guard(shape)?;
    let (rows, cols) = (shape.rows, shape.cols);
    let mut m = DMatrix::zeros(shape.edges(), shape.pixels());
    let mut e = 0;
    for i in 0..rows {
        for j in 0..cols - 1 {
            m[(e, i * cols + j)] = 1.0;
            m[(e, i * cols + j + 1)] = -1.0;
            e += 1;
        }
    }
    for i in 0..rows - 1 {
        for j in 0..cols {
            m[(e, i * cols + j)] = 1.0;
            m[(e, (i + 1) * cols + j)] = -1.0;
            e += 1;
        }
    }
    Ok(DenseOperator { matrix: m })
}

/// Flat positions of the genuine dofs of one padded block.
struct SlotMap {
    v: Vec<Option<usize>>,
    h: Vec<Option<usize>>,
    count: usize,
}

fn slot_map(layout: &LocalLayout, offset: usize) -> SlotMap {
    let (r, c) = (layout.shape.rows, layout.shape.cols);
    let sides = layout.interface;
    let mut next = offset;
    let mut v = vec![None; r * (c + 1)];
    for i in 0..r {
        for k in 0..=c {
            let active = (k > 0 && k < c) || (k == 0 && sides.left) || (k == c && sides.right);
            if active {
                v[i * (c + 1) + k] = Some(next);
                next += 1;
            }
        }
    }
    let mut h = vec![None; (r + 1) * c];
    for k in 0..=r {
        let active = (k > 0 && k < r) || (k == 0 && sides.top) || (k == r && sides.bottom);
        if active {
            for j in 0..c {
                h[k * c + j] = Some(next);
                next += 1;
            }
        }
    }
    SlotMap {
        v,
        h,
        count: next - offset,
    }
}

/// Matrix of the local divergence on one subdomain, acting on the block's
/// genuine dofs in flat order.
pub fn densify_local_divergence(layout: &LocalLayout) -> Result<DenseOperator> {
    guard(layout.shape)?;
    let (r, c) = (layout.shape.rows, layout.shape.cols);
    let map = slot_map(layout, 0);
    let mut m = DMatrix::zeros(r * c, map.count);
    for i in 0..r {
        for k in 0..=c {
            if let Some(col) = map.v[i * (c + 1) + k] {
                // slot (i, k) lies left of local pixel (i, k)
                if k > 0 {
                    m[(i * c + k - 1, col)] += 1.0;
                }
                if k < c {
                    m[(i * c + k, col)] -= 1.0;
                }
            }
        }
    }
    for k in 0..=r {
        for j in 0..c {
            if let Some(col) = map.h[k * c + j] {
                if k > 0 {
                    m[((k - 1) * c + j, col)] += 1.0;
                }
                if k < r {
                    m[(k * c + j, col)] -= 1.0;
                }
            }
        }
    }
    Ok(DenseOperator { matrix: m })
}

fn owner(subs: &[Subdomain], i: usize, j: usize) -> usize {
    subs.iter()
        .position(|s| {
            let sh = s.shape();
            i >= s.row0 && i < s.row0 + sh.rows && j >= s.col0 && j < s.col0 + sh.cols
        })
        .expect("every pixel belongs to a subdomain")
}

/// Matrix of the jump operator `B` from flat torn dofs
/// ([`TornDualField::to_flat`]) to interface dofs. Interface edges are found
/// by scanning the global edges for neighbours with different owners.
pub fn densify_jump(partition: &Partition) -> Result<DenseOperator> {
    let shape = partition.shape();
    guard(shape)?;
    let subs = partition.subdomains();
    let mut maps = Vec::with_capacity(subs.len());
    let mut offset = 0;
    for s in subs {
        let m = slot_map(&s.layout, offset);
        offset += m.count;
        maps.push(m);
    }
    let total = offset;

    let mut rows: Vec<(usize, usize)> = Vec::new();
    for i in 0..shape.rows {
        for j in 0..shape.cols - 1 {
            let (a, b) = (owner(subs, i, j), owner(subs, i, j + 1));
            if a != b {
                let (sa, sb) = (&subs[a], &subs[b]);
                let ca = sa.shape().cols;
                let ia = maps[a].v[(i - sa.row0) * (ca + 1) + ca].expect("right copy");
                let cb = sb.shape().cols;
                let ib = maps[b].v[(i - sb.row0) * (cb + 1)].expect("left copy");
                rows.push(if a < b { (ia, ib) } else { (ib, ia) });
            }
        }
    }
    for i in 0..shape.rows - 1 {
        for j in 0..shape.cols {
            let (a, b) = (owner(subs, i, j), owner(subs, i + 1, j));
            if a != b {
                let (sa, sb) = (&subs[a], &subs[b]);
                let (ra, ca) = (sa.shape().rows, sa.shape().cols);
                let ia = maps[a].h[ra * ca + (j - sa.col0)].expect("bottom copy");
                let ib = maps[b].h[j - sb.col0].expect("top copy");
                rows.push(if a < b { (ia, ib) } else { (ib, ia) });
            }
        }
    }

    let mut m = DMatrix::zeros(rows.len(), total);
    for (r, (lo, hi)) in rows.into_iter().enumerate() {
        m[(r, lo)] = 1.0;
        m[(r, hi)] = -1.0;
    }
    Ok(DenseOperator { matrix: m })
}

/// Estimates `‖B‖₂²` by power iteration on `BB*`, matrix-free.
pub fn jump_norm_squared(partition: &Partition, iters: usize, seed: u64) -> Result<f64> {
    let n = partition.interface_len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut r = rng(seed);
    let mut x: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut estimate = 0.0;
    for _ in 0..iters.max(1) {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let y = partition.jump(&partition.jump_adjoint(&InterfaceMultiplier::new(x.clone()))?)?;
        estimate = y.values().iter().zip(&x).map(|(a, b)| a * b).sum();
        x = y.values().to_vec();
    }
    Ok(estimate)
}

/// One pixel's fidelity term, read straight from the model data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarTerm {
    /// `½ (v − f)²`
    Quadratic { f: f64 },
    /// `|v − f|`
    Absolute { f: f64 },
    /// Missing pixel: no data term.
    Free,
    /// `g v` on `[0, 1]`, `+∞` outside.
    LinearBox { g: f64 },
}

impl ScalarTerm {
    pub fn value(&self, v: f64) -> f64 {
        match *self {
            ScalarTerm::Quadratic { f } => 0.5 * (v - f) * (v - f),
            ScalarTerm::Absolute { f } => (v - f).abs(),
            ScalarTerm::Free => 0.0,
            ScalarTerm::LinearBox { g } => {
                if (0.0..=1.0).contains(&v) {
                    g * v
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Interval `[lo, hi]` of the subdifferential at `v`, with `tol` used to
    /// decide whether `v` sits on a kink or a bound.
    pub fn subdifferential(&self, v: f64, tol: f64) -> (f64, f64) {
        match *self {
            ScalarTerm::Quadratic { f } => (v - f, v - f),
            ScalarTerm::Absolute { f } => {
                if (v - f).abs() <= tol {
                    (-1.0, 1.0)
                } else {
                    let s = (v - f).signum();
                    (s, s)
                }
            }
            ScalarTerm::Free => (0.0, 0.0),
            ScalarTerm::LinearBox { g } => {
                let lo = if v <= tol { f64::NEG_INFINITY } else { g };
                let hi = if v >= 1.0 - tol { f64::INFINITY } else { g };
                (lo, hi)
            }
        }
    }

    fn bracket(&self, u: f64) -> (f64, f64) {
        match *self {
            ScalarTerm::Quadratic { f } | ScalarTerm::Absolute { f } => (u.min(f) - 1.0, u.max(f) + 1.0),
            ScalarTerm::Free => (u - 1.0, u + 1.0),
            ScalarTerm::LinearBox { .. } => (0.0, 1.0),
        }
    }
}

/// Per-pixel terms of a model (without `α`).
pub fn scalar_terms(model: &FidelityModel) -> Vec<ScalarTerm> {
    let f = model.data().values();
    let missing = |k: usize| model.mask().is_some_and(|m| m.is_missing(k));
    (0..f.len())
        .map(|k| match model.kind() {
            FidelityKind::RofL2 => ScalarTerm::Quadratic { f: f[k] },
            FidelityKind::TvL1 => ScalarTerm::Absolute { f: f[k] },
            FidelityKind::InpaintL2 if missing(k) => ScalarTerm::Free,
            FidelityKind::InpaintL2 => ScalarTerm::Quadratic { f: f[k] },
            FidelityKind::InpaintL1 if missing(k) => ScalarTerm::Free,
            FidelityKind::InpaintL1 => ScalarTerm::Absolute { f: f[k] },
            FidelityKind::Segmentation => {
                let (c1, c2) = model.intensities().expect("segmentation has intensities");
                let x = f[k];
                ScalarTerm::LinearBox {
                    g: (x - c1) * (x - c1) - (x - c2) * (x - c2),
                }
            }
        })
        .collect()
}

/// Minimizes `v ↦ term(v) + (v − u)² / (2σ)` by golden-section search down to
/// a bracket of width `1e-8`.
pub fn prox_search(term: &ScalarTerm, u: f64, sigma: f64) -> f64 {
    let phi = |v: f64| term.value(v) + (v - u) * (v - u) / (2.0 * sigma);
    let (mut a, mut b) = term.bracket(u);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    while b - a > 1e-8 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = phi(x2);
        }
    }
    0.5 * (a + b)
}

/// Smallest energy seen over `iters` iterations of the single-domain solver.
pub fn reference_energy(model: &FidelityModel, iters: usize) -> Result<f64> {
    let params = PrimalDualParams::default().with_max_iter(iters).with_tol(0.0);
    Ok(solve_full_primal_dual(model, &params, None)?.report.min_energy())
}

/// Anisotropic TV by direct summation of neighbour differences.
pub fn finite_difference_tv(u: &ImageField) -> f64 {
    let GridShape { rows, cols } = u.shape();
    let mut tv = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            if j + 1 < cols {
                tv += (u.get(i, j + 1) - u.get(i, j)).abs();
            }
            if i + 1 < rows {
                tv += (u.get(i + 1, j) - u.get(i, j)).abs();
            }
        }
    }
    tv
}

/// Result of the exhaustive search on a tiny grid.
#[derive(Clone, Debug)]
pub struct TinySaddle {
    pub u: ImageField,
    pub p: DualField,
    pub energy: f64,
    /// Violation of the primal-dual optimality inclusions at `(u, p)`.
    pub residual: f64,
}

/// Pattern search over `dim` coordinates: a coarse grid over the box, then
/// full-neighbourhood moves of ±1, ±2 steps, halving the step whenever the
/// centre is best.
fn box_search(dim: usize, lo: &[f64], hi: &[f64], coarse: usize, min_step: f64, obj: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    if dim == 0 {
        return Vec::new();
    }
    let clamp = |x: &mut [f64]| {
        for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
            *v = v.clamp(*l, *h);
        }
    };

    let mut best = lo.to_vec();
    let mut best_val = f64::INFINITY;
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    loop {
        for d in 0..dim {
            x[d] = lo[d] + (hi[d] - lo[d]) * idx[d] as f64 / (coarse - 1) as f64;
        }
        let v = obj(&x);
        if v < best_val {
            best_val = v;
            best.copy_from_slice(&x);
        }
        let mut d = 0;
        while d < dim {
            idx[d] += 1;
            if idx[d] < coarse {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == dim {
            break;
        }
    }

    let mut step = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| (h - l) / (coarse - 1) as f64)
        .fold(0.0, f64::max);
    let offsets: Vec<Vec<i32>> = {
        let mut all = vec![Vec::new()];
        for _ in 0..dim {
            all = all
                .into_iter()
                .flat_map(|v| {
                    (-2..=2).map(move |k| {
                        let mut w = v.clone();
                        w.push(k);
                        w
                    })
                })
                .collect();
        }
        all
    };
    while step > min_step {
        let centre = best.clone();
        let mut moved = false;
        for off in &offsets {
            for d in 0..dim {
                x[d] = centre[d] + off[d] as f64 * step;
            }
            clamp(&mut x);
            let v = obj(&x);
            if v < best_val {
                best_val = v;
                best.copy_from_slice(&x);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best
}

/// Primal-dual optimality residual of `(u, p)`: for every pixel the distance
/// of `div p` to `α ∂F(u)`, plus for every edge the distance of `p` to the
/// maximizing sign of the forward difference of `u`.
pub fn saddle_residual(model: &FidelityModel, u: &ImageField, p: &DualField, tol: f64) -> f64 {
    ResidualParts::new(model, u).eval(&p.to_dofs(), tol)
}

struct ResidualParts {
    alpha: f64,
    terms: Vec<ScalarTerm>,
    u: Vec<f64>,
    div: DenseOperator,
    forward: Vec<f64>,
}

impl ResidualParts {
    fn new(model: &FidelityModel, u: &ImageField) -> Self {
        let shape = u.shape();
        let div = densify_divergence(shape).expect("tiny grids fit the dense guard");
        let forward = densify_divergence_adjoint(shape)
            .and_then(|d| d.apply(u.values()))
            .expect("tiny grids fit the dense guard")
            .into_iter()
            .map(|g| -g)
            .collect();
        ResidualParts {
            alpha: model.alpha(),
            terms: scalar_terms(model),
            u: u.values().to_vec(),
            div,
            forward,
        }
    }

    fn eval(&self, p: &[f64], tol: f64) -> f64 {
        let div = self.div.apply(p).expect("sized");
        let mut res = 0.0;
        for ((term, &u), d) in self.terms.iter().zip(&self.u).zip(div) {
            let (lo, hi) = term.subdifferential(u, tol);
            let (lo, hi) = (self.alpha * lo, self.alpha * hi);
            res += (lo - d).max(0.0) + (d - hi).max(0.0);
        }
        for (&pe, &fw) in p.iter().zip(&self.forward) {
            res += if fw > tol {
                (1.0 - pe).abs()
            } else if fw < -tol {
                (-1.0 - pe).abs()
            } else {
                0.0
            };
        }
        res
    }
}

/// Solves a model on a grid of at most 4 pixels by exhaustive search over
/// the primal box, then finds the dual field that best satisfies the
/// optimality inclusions by a second search over `[-1, 1]^E`.
pub fn tiny_saddle(model: &FidelityModel) -> Result<TinySaddle> {
    let shape = model.shape();
    if shape.pixels() > 4 {
        return Err(TvError::SizeGuard {
            rows: shape.rows,
            cols: shape.cols,
            limit: 2,
        });
    }
    let terms = scalar_terms(model);
    let alpha = model.alpha();
    let n = shape.pixels();
    let (lo, hi) = if model.kind() == FidelityKind::Segmentation {
        (vec![0.0; n], vec![1.0; n])
    } else {
        let data: Vec<f64> = terms
            .iter()
            .filter_map(|t| match t {
                ScalarTerm::Quadratic { f } | ScalarTerm::Absolute { f } => Some(*f),
                _ => None,
            })
            .collect();
        let a = data.iter().copied().fold(f64::INFINITY, f64::min);
        let b = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (a, b) = if data.is_empty() { (0.0, 0.0) } else { (a, b) };
        (vec![a - 0.5; n], vec![b + 0.5; n])
    };

    let energy = |x: &[f64]| {
        let u = ImageField::from_vec_unchecked(shape, x.to_vec());
        finite_difference_tv(&u) + alpha * terms.iter().zip(x).map(|(t, v)| t.value(*v)).sum::<f64>()
    };
    let coarse = if n <= 2 { 201 } else { 33 };
    let best = box_search(n, &lo, &hi, coarse, 1e-12, energy);
    let u = ImageField::new(shape, best.clone())?;
    let e = energy(&best);

    let edges = shape.edges();
    let tol = 1e-7;
    let parts = ResidualParts::new(model, &u);
    let p_best = box_search(edges, &vec![-1.0; edges], &vec![1.0; edges], 21, 1e-12, |x| {
        parts.eval(x, tol)
    });
    let residual = parts.eval(&p_best, tol);
    let p = DualField::from_dofs(shape, &p_best)?;
    Ok(TinySaddle {
        u,
        p,
        energy: e,
        residual,
    })
}

/// `(αF)*(v) = <f, v> + ‖v‖² / (2α)` for the ROF term.
pub fn rof_conjugate(alpha: f64, f: &ImageField, v: &ImageField) -> f64 {
    f.values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a * b + b * b / (2.0 * alpha))
        .sum()
}

/// Lagrangian of the torn ROF dual problem,
///
/// ```text
/// L(p̃, λ) = Σ_s (αF_s)*(div p̃_s) + χ_C(p̃) + <Bp̃, λ>
/// ```
///
/// returning `+∞` when some dof leaves the unit ball.
pub fn rof_dd_lagrangian(
    model: &FidelityModel,
    partition: &Partition,
    p: &TornDualField,
    lambda: &InterfaceMultiplier,
) -> Result<f64> {
    if model.kind() != FidelityKind::RofL2 {
        return Err(TvError::InvalidParameter("the torn Lagrangian is only available for ROF".into()));
    }
    if p.max_abs() > 1.0 + 1e-12 {
        return Ok(f64::INFINITY);
    }
    let div = partition.torn_divergence(p)?;
    let conj = rof_conjugate(model.alpha(), model.data(), &div);
    Ok(conj + partition.jump(p)?.inner(lambda))
}

/// Outcome of one oracle check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed: worst <= tol,
        detail: format!("worst deviation {worst:.3e} (tolerance {tol:.0e})"),
    }
}

fn random_image(r: &mut impl Rng, shape: GridShape) -> ImageField {
    ImageField::from_fn(shape, |_, _| r.random_range(-1.0..1.0))
}

fn random_shape(r: &mut impl Rng, max: usize) -> GridShape {
    GridShape::new(r.random_range(1..=max), r.random_range(1..=max)).expect("nonzero")
}

fn scalar_model(kind: FidelityKind, f: f64, missing: bool) -> Result<FidelityModel> {
    let shape = GridShape::new(1, 1)?;
    let data = ImageField::constant(shape, f);
    let mask = crate::fidelity::Mask::new(shape, vec![missing])?;
    match kind {
        FidelityKind::RofL2 => FidelityModel::rof(1.0, data),
        FidelityKind::TvL1 => FidelityModel::tv_l1(1.0, data),
        FidelityKind::InpaintL2 => FidelityModel::inpaint_l2(1.0, data, mask),
        FidelityKind::InpaintL1 => FidelityModel::inpaint_l1(1.0, data, mask),
        FidelityKind::Segmentation => FidelityModel::segmentation(1.0, data, 0.6, 0.1),
    }
}

/// Worst disagreement between the closed-form prox of `kind` and the
/// golden-section search over `cases` random scalar instances.
pub fn prox_agreement(kind: FidelityKind, cases: usize, seed: u64) -> Result<f64> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let f = r.random_range(-1.0..2.0);
        let u = r.random_range(-2.0..3.0);
        let sigma = 10f64.powf(r.random_range(-3.0..1.0));
        let model = scalar_model(kind, f, r.random_bool(0.5))?;
        let term = scalar_terms(&model)[0];
        let field = ImageField::constant(model.shape(), u);
        let closed = model.prox(&field, sigma)?.values()[0];
        worst = worst.max((closed - prox_search(&term, u, sigma)).abs());
    }
    Ok(worst)
}

/// Runs the oracle suites and reports one outcome per check.
pub fn run_verify_suite(seed: u64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut push = |o: Result<CheckOutcome>, name: &str| {
        out.push(o.unwrap_or_else(|e| CheckOutcome {
            name: name.to_string(),
            passed: false,
            detail: e.to_string(),
        }))
    };

    let name = "divergence matches dense matrix";
    push(
        (|| {
            let mut r = rng(seed);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let shape = random_shape(&mut r, 12);
                let dense = densify_divergence(shape)?;
                let dofs: Vec<f64> = (0..shape.edges()).map(|_| r.random_range(-1.0..1.0)).collect();
                let a = dense.apply(&dofs)?;
                let b = crate::grid::divergence(&DualField::from_dofs(shape, &dofs)?);
                worst = worst.max(a.iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
                let adj = densify_divergence_adjoint(shape)?;
                worst = worst.max(adj.max_abs_diff(&dense.transpose()));
            }
            Ok(check(name, worst, 1e-13))
        })(),
        name,
    );

    let name = "jump matches dense matrix";
    push(
        (|| {
            let mut r = rng(seed ^ 1);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let shape = random_shape(&mut r, 12);
                let nx = r.random_range(1..=shape.cols.min(4));
                let ny = r.random_range(1..=shape.rows.min(4));
                let part = Partition::uniform(shape, nx, ny)?;
                let dense = densify_jump(&part)?;
                let flat: Vec<f64> = (0..part.torn_dof_count()).map(|_| r.random_range(-1.0..1.0)).collect();
                let a = dense.apply(&flat)?;
                let b = part.jump(&part.torn_from_flat(&flat)?)?;
                worst = worst.max(a.iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
                if dense.rows() > 0 {
                    for s in dense.singular_values() {
                        worst = worst.max((s - 2f64.sqrt()).abs());
                    }
                }
            }
            Ok(check(name, worst, 1e-12))
        })(),
        name,
    );

    let name = "total variation matches finite differences";
    push(
        (|| {
            let mut r = rng(seed ^ 2);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let shape = random_shape(&mut r, 16);
                let u = random_image(&mut r, shape);
                let a = crate::grid::total_variation(&u);
                worst = worst.max((a - finite_difference_tv(&u)).abs() / a.max(1.0));
            }
            Ok(check(name, worst, 1e-12))
        })(),
        name,
    );

    for (i, kind) in [
        FidelityKind::RofL2,
        FidelityKind::TvL1,
        FidelityKind::InpaintL2,
        FidelityKind::InpaintL1,
        FidelityKind::Segmentation,
    ]
    .into_iter()
    .enumerate()
    {
        let name = format!("{kind:?} prox matches golden-section search");
        push(
            prox_agreement(kind, 1000, seed ^ (16 + i as u64)).map(|w| check(&name, w, 1e-6)),
            &name,
        );
    }

    let name = "tiny saddle satisfies optimality inclusions";
    push(
        (|| {
            let f = ImageField::new(GridShape::new(1, 2)?, vec![0.0, 2.0])?;
            let s = tiny_saddle(&FidelityModel::rof(2.0, f)?)?;
            let worst = s.residual.max((s.u.values()[0] - 0.5).abs()).max((s.u.values()[1] - 1.5).abs());
            Ok(check(name, worst, 1e-6))
        })(),
        name,
    );

    out
}
