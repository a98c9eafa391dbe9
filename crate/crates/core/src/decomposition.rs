//! Nonoverlapping rectangular partitions and the torn dual space.
//!
//! Every subdomain carries its own copy of the dual dofs on the interface
//! edges it touches; outer-boundary edges carry none. Local dual blocks are
//! stored padded, with one slot per local edge including the four sides, so
//! that the local divergence uses the same stencil as the global one. Slots
//! on the outer image boundary are structurally zero.
//!
//! Both copies of an interface dof store the value with respect to the
//! global edge orientation. The jump is `(lower id copy) - (higher id copy)`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TvError};
use crate::grid::{dot, DualField, GridShape, ImageField};

/// Neighbor slots of a subdomain, in the order left, right, top, bottom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Sides {
    pub left: bool,
    pub right: bool,
    pub top: bool,
    pub bottom: bool,
}

/// Shape of a local torn dual block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalLayout {
    pub shape: GridShape,
    pub interface: Sides,
}

impl LocalLayout {
    fn v_len(&self) -> usize {
        self.shape.rows * (self.shape.cols + 1)
    }

    fn h_len(&self) -> usize {
        (self.shape.rows + 1) * self.shape.cols
    }

    #[inline]
    fn v_active(&self, k: usize) -> bool {
        if k == 0 {
            self.interface.left
        } else if k == self.shape.cols {
            self.interface.right
        } else {
            true
        }
    }

    #[inline]
    fn h_active(&self, k: usize) -> bool {
        if k == 0 {
            self.interface.top
        } else if k == self.shape.rows {
            self.interface.bottom
        } else {
            true
        }
    }

    /// Number of genuine dofs (interior edges plus interface copies).
    pub fn dof_count(&self) -> usize {
        let (r, c) = (self.shape.rows, self.shape.cols);
        let sides = &self.interface;
        r * (c - 1)
            + (r - 1) * c
            + r * (sides.left as usize + sides.right as usize)
            + c * (sides.top as usize + sides.bottom as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Subdomain {
    pub id: usize,
    pub row0: usize,
    pub col0: usize,
    pub layout: LocalLayout,
}

impl Subdomain {
    pub fn shape(&self) -> GridShape {
        self.layout.shape
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct InterfaceEdge {
    vertical: bool,
    lower: usize,
    lower_index: usize,
    higher: usize,
    higher_index: usize,
    /// Index of this edge in the global `v` or `h` array.
    global_index: usize,
}

/// Rectangular partition of the pixel grid into `nx * ny` subdomains.
///
/// `nx` counts subdomains along the columns and `ny` along the rows.
/// Subdomain ids are row-major over the block grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    shape: GridShape,
    nx: usize,
    ny: usize,
    row_splits: Vec<usize>,
    col_splits: Vec<usize>,
    subdomains: Vec<Subdomain>,
    interface: Vec<InterfaceEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub nx: usize,
    pub ny: usize,
}

impl std::fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.nx, self.ny)
    }
}

impl std::str::FromStr for PartitionSpec {
    type Err = TvError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || TvError::InvalidPartition(format!("expected NxM, got {s:?}"));
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let nx = a.trim().parse().map_err(|_| bad())?;
        let ny = b.trim().parse().map_err(|_| bad())?;
        if nx == 0 || ny == 0 {
            return Err(bad());
        }
        Ok(PartitionSpec { nx, ny })
    }
}

fn even_splits(len: usize, parts: usize) -> Vec<usize> {
    (0..=parts).map(|k| k * len / parts).collect()
}

impl Partition {
    /// Splits the grid as evenly as possible into `nx` column blocks and `ny` row blocks.
    pub fn uniform(shape: GridShape, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || nx > shape.cols || ny > shape.rows {
            return Err(TvError::InvalidPartition(format!(
                "cannot split a {shape} grid into {nx}x{ny} subdomains"
            )));
        }
        Self::new(shape, even_splits(shape.rows, ny), even_splits(shape.cols, nx))
    }

    pub fn from_spec(shape: GridShape, spec: PartitionSpec) -> Result<Self> {
        Self::uniform(shape, spec.nx, spec.ny)
    }

    pub fn single(shape: GridShape) -> Self {
        Self::uniform(shape, 1, 1).expect("1x1 partition is always valid")
    }

    /// Builds a partition from explicit cut positions. Both lists must start at
    /// 0, end at the grid extent, and be strictly increasing.
    pub fn new(shape: GridShape, row_splits: Vec<usize>, col_splits: Vec<usize>) -> Result<Self> {
        check_splits("row", &row_splits, shape.rows)?;
        check_splits("column", &col_splits, shape.cols)?;
        let ny = row_splits.len() - 1;
        let nx = col_splits.len() - 1;

        let mut subdomains = Vec::with_capacity(nx * ny);
        for by in 0..ny {
            for bx in 0..nx {
                let rows = row_splits[by + 1] - row_splits[by];
                let cols = col_splits[bx + 1] - col_splits[bx];
                subdomains.push(Subdomain {
                    id: by * nx + bx,
                    row0: row_splits[by],
                    col0: col_splits[bx],
                    layout: LocalLayout {
                        shape: GridShape { rows, cols },
                        interface: Sides {
                            left: bx > 0,
                            right: bx + 1 < nx,
                            top: by > 0,
                            bottom: by + 1 < ny,
                        },
                    },
                });
            }
        }

        let mut part = Partition {
            shape,
            nx,
            ny,
            row_splits,
            col_splits,
            subdomains,
            interface: Vec::new(),
        };
        part.interface = part.enumerate_interface();
        Ok(part)
    }

    fn block_of_row(&self, i: usize) -> usize {
        self.row_splits.partition_point(|&s| s <= i) - 1
    }

    fn block_of_col(&self, j: usize) -> usize {
        self.col_splits.partition_point(|&s| s <= j) - 1
    }

    /// Interface edges: vertical ones first, then horizontal, each row-major
    /// over the global edge arrays.
    fn enumerate_interface(&self) -> Vec<InterfaceEdge> {
        let (rows, cols) = (self.shape.rows, self.shape.cols);
        let mut out = Vec::new();
        let col_cuts = &self.col_splits[1..self.nx];
        let row_cuts = &self.row_splits[1..self.ny];
        for i in 0..rows {
            let by = self.block_of_row(i);
            for &cut in col_cuts {
                let j = cut - 1;
                let bx = self.block_of_col(j);
                let lo = &self.subdomains[by * self.nx + bx];
                let hi = &self.subdomains[by * self.nx + bx + 1];
                let li = i - lo.row0;
                out.push(InterfaceEdge {
                    vertical: true,
                    lower: lo.id,
                    lower_index: li * (lo.layout.shape.cols + 1) + lo.layout.shape.cols,
                    higher: hi.id,
                    higher_index: li * (hi.layout.shape.cols + 1),
                    global_index: i * (cols - 1) + j,
                });
            }
        }
        for &cut in row_cuts {
            let i = cut - 1;
            let by = self.block_of_row(i);
            for j in 0..cols {
                let bx = self.block_of_col(j);
                let lo = &self.subdomains[by * self.nx + bx];
                let hi = &self.subdomains[(by + 1) * self.nx + bx];
                let lj = j - lo.col0;
                out.push(InterfaceEdge {
                    vertical: false,
                    lower: lo.id,
                    lower_index: lo.layout.shape.rows * lo.layout.shape.cols + lj,
                    higher: hi.id,
                    higher_index: lj,
                    global_index: i * cols + j,
                });
            }
        }
        out
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spec(&self) -> PartitionSpec {
        PartitionSpec {
            nx: self.nx,
            ny: self.ny,
        }
    }

    pub fn row_splits(&self) -> &[usize] {
        &self.row_splits
    }

    pub fn col_splits(&self) -> &[usize] {
        &self.col_splits
    }

    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomains
    }

    pub fn subdomain(&self, s: usize) -> Result<&Subdomain> {
        self.subdomains.get(s).ok_or(TvError::InvalidSubdomain {
            id: s,
            count: self.subdomains.len(),
        })
    }

    /// Number of interface dofs `|I_Γ|`.
    pub fn interface_len(&self) -> usize {
        self.interface.len()
    }

    /// Number of vertical interface dofs; they precede the horizontal ones.
    pub fn vertical_interface_len(&self) -> usize {
        self.interface.iter().take_while(|e| e.vertical).count()
    }

    /// Total torn dof count `Σ_s |Ĩ_s|`.
    pub fn torn_dof_count(&self) -> usize {
        self.subdomains.iter().map(|s| s.layout.dof_count()).sum()
    }

    pub fn restrict_image(&self, u: &ImageField, s: usize) -> Result<ImageField> {
        u.ensure_shape(self.shape)?;
        let sub = self.subdomain(s)?;
        Ok(restrict_block(u, sub))
    }

    /// Extension by zero, the adjoint of [`Partition::restrict_image`].
    pub fn extend_image(&self, u_s: &ImageField, s: usize) -> Result<ImageField> {
        let sub = self.subdomain(s)?;
        u_s.ensure_shape(sub.shape())?;
        let mut out = ImageField::zeros(self.shape);
        write_block(&mut out, sub, u_s);
        Ok(out)
    }

    /// Assembles `u = ⊕ u_s` from local images given in subdomain order.
    pub fn assemble_image(&self, locals: &[ImageField]) -> Result<ImageField> {
        if locals.len() != self.len() {
            return Err(TvError::LengthMismatch {
                expected: self.len(),
                found: locals.len(),
            });
        }
        let mut out = ImageField::zeros(self.shape);
        for (sub, u_s) in self.subdomains.iter().zip(locals) {
            u_s.ensure_shape(sub.shape())?;
            write_block(&mut out, sub, u_s);
        }
        Ok(out)
    }

    pub fn split_image(&self, u: &ImageField) -> Result<Vec<ImageField>> {
        u.ensure_shape(self.shape)?;
        Ok(self.subdomains.iter().map(|s| restrict_block(u, s)).collect())
    }

    pub fn zero_torn(&self) -> TornDualField {
        TornDualField {
            blocks: self.subdomains.iter().map(|s| LocalDual::zeros(s.layout)).collect(),
        }
    }

    pub fn zero_multiplier(&self) -> InterfaceMultiplier {
        InterfaceMultiplier {
            values: vec![0.0; self.interface.len()],
        }
    }

    fn check_torn(&self, tp: &TornDualField) -> Result<()> {
        if tp.blocks.len() != self.len() {
            return Err(TvError::LengthMismatch {
                expected: self.len(),
                found: tp.blocks.len(),
            });
        }
        for (sub, block) in self.subdomains.iter().zip(&tp.blocks) {
            if block.layout != sub.layout {
                return Err(TvError::ShapeMismatch {
                    expected: sub.layout.shape,
                    found: block.layout.shape,
                });
            }
        }
        Ok(())
    }

    fn check_multiplier(&self, lambda: &InterfaceMultiplier) -> Result<()> {
        if lambda.values.len() != self.interface.len() {
            return Err(TvError::LengthMismatch {
                expected: self.interface.len(),
                found: lambda.values.len(),
            });
        }
        Ok(())
    }

    /// The jump operator `B`.
    pub fn jump(&self, tp: &TornDualField) -> Result<InterfaceMultiplier> {
        self.check_torn(tp)?;
        let values = self
            .interface
            .iter()
            .map(|e| {
                let (a, b) = (&tp.blocks[e.lower], &tp.blocks[e.higher]);
                if e.vertical {
                    a.v[e.lower_index] - b.v[e.higher_index]
                } else {
                    a.h[e.lower_index] - b.h[e.higher_index]
                }
            })
            .collect();
        Ok(InterfaceMultiplier { values })
    }

    /// `B*`: writes `+λ_e` to the lower-id copy and `-λ_e` to the higher-id copy.
    pub fn jump_adjoint(&self, lambda: &InterfaceMultiplier) -> Result<TornDualField> {
        self.check_multiplier(lambda)?;
        let mut tp = self.zero_torn();
        for (e, &l) in self.interface.iter().zip(&lambda.values) {
            if e.vertical {
                tp.blocks[e.lower].v[e.lower_index] += l;
                tp.blocks[e.higher].v[e.higher_index] -= l;
            } else {
                tp.blocks[e.lower].h[e.lower_index] += l;
                tp.blocks[e.higher].h[e.higher_index] -= l;
            }
        }
        Ok(tp)
    }

    /// Duplicates interface dofs of a global dual field into a torn field.
    pub fn tear(&self, p: &DualField) -> Result<TornDualField> {
        if p.shape() != self.shape {
            return Err(TvError::ShapeMismatch {
                expected: self.shape,
                found: p.shape(),
            });
        }
        let cols = self.shape.cols;
        let mut tp = self.zero_torn();
        for (sub, block) in self.subdomains.iter().zip(tp.blocks.iter_mut()) {
            let lay = sub.layout;
            let (r, c) = (lay.shape.rows, lay.shape.cols);
            for i in 0..r {
                for k in 0..=c {
                    if lay.v_active(k) {
                        let gj = sub.col0 + k - 1;
                        block.v[i * (c + 1) + k] = p.v_edges()[(sub.row0 + i) * (cols - 1) + gj];
                    }
                }
            }
            for k in 0..=r {
                if lay.h_active(k) {
                    let gi = sub.row0 + k - 1;
                    for j in 0..c {
                        block.h[k * c + j] = p.h_edges()[gi * cols + sub.col0 + j];
                    }
                }
            }
        }
        Ok(tp)
    }

    /// Inverse of [`Partition::tear`] on `ker B`. Interface dofs are the average
    /// of their two copies; fails if any jump exceeds `tol`.
    pub fn assemble(&self, tp: &TornDualField, tol: f64) -> Result<DualField> {
        let jumps = self.jump(tp)?;
        if let Some((edge, &jump)) = jumps
            .values
            .iter()
            .enumerate()
            .find(|(_, j)| !(j.abs() <= tol))
        {
            return Err(TvError::JumpViolation { edge, jump, tol });
        }
        let cols = self.shape.cols;
        let mut p = DualField::zeros(self.shape);
        for (sub, block) in self.subdomains.iter().zip(&tp.blocks) {
            let lay = sub.layout;
            let (r, c) = (lay.shape.rows, lay.shape.cols);
            for i in 0..r {
                for k in 1..c {
                    let g = (sub.row0 + i) * (cols - 1) + sub.col0 + k - 1;
                    p.v_edges_mut()[g] = block.v[i * (c + 1) + k];
                }
            }
            for k in 1..r {
                for j in 0..c {
                    let g = (sub.row0 + k - 1) * cols + sub.col0 + j;
                    p.h_edges_mut()[g] = block.h[k * c + j];
                }
            }
        }
        for e in &self.interface {
            let (a, b) = (&tp.blocks[e.lower], &tp.blocks[e.higher]);
            if e.vertical {
                p.v_edges_mut()[e.global_index] = 0.5 * (a.v[e.lower_index] + b.v[e.higher_index]);
            } else {
                p.h_edges_mut()[e.global_index] = 0.5 * (a.h[e.lower_index] + b.h[e.higher_index]);
            }
        }
        Ok(p)
    }

    /// Inverse of [`TornDualField::to_flat`].
    pub fn torn_from_flat(&self, flat: &[f64]) -> Result<TornDualField> {
        if flat.len() != self.torn_dof_count() {
            return Err(TvError::LengthMismatch {
                expected: self.torn_dof_count(),
                found: flat.len(),
            });
        }
        let mut tp = self.zero_torn();
        let mut it = flat.iter().copied();
        for block in tp.blocks.iter_mut() {
            let lay = block.layout;
            let (r, c) = (lay.shape.rows, lay.shape.cols);
            for i in 0..r {
                for k in 0..=c {
                    if lay.v_active(k) {
                        block.v[i * (c + 1) + k] = it.next().expect("length checked");
                    }
                }
            }
            for k in 0..=r {
                if lay.h_active(k) {
                    for j in 0..c {
                        block.h[k * c + j] = it.next().expect("length checked");
                    }
                }
            }
        }
        Ok(tp)
    }

    /// `diṽ p̃ = ⊕ div p̃_s` as a global image.
    pub fn torn_divergence(&self, tp: &TornDualField) -> Result<ImageField> {
        self.check_torn(tp)?;
        let locals: Vec<ImageField> = tp.blocks.iter().map(local_divergence).collect();
        self.assemble_image(&locals)
    }
}

fn check_splits(what: &str, splits: &[usize], extent: usize) -> Result<()> {
    if splits.len() < 2 || splits[0] != 0 || *splits.last().unwrap() != extent {
        return Err(TvError::InvalidPartition(format!(
            "{what} cuts must run from 0 to {extent}, got {splits:?}"
        )));
    }
    if splits.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TvError::InvalidPartition(format!(
            "{what} cuts must be strictly increasing, got {splits:?}"
        )));
    }
    Ok(())
}

fn restrict_block(u: &ImageField, sub: &Subdomain) -> ImageField {
    let shape = sub.shape();
    ImageField::from_fn(shape, |i, j| u.get(sub.row0 + i, sub.col0 + j))
}

fn write_block(out: &mut ImageField, sub: &Subdomain, u_s: &ImageField) {
    let shape = sub.shape();
    for i in 0..shape.rows {
        for j in 0..shape.cols {
            out.set(sub.row0 + i, sub.col0 + j, u_s.get(i, j));
        }
    }
}

/// Dual dofs of one subdomain, including its interface copies.
///
/// `v` holds `rows x (cols + 1)` slots where slot `(i, k)` is the vertical
/// edge on the left of local pixel `(i, k)`; `h` holds `(rows + 1) x cols`
/// slots where slot `(k, j)` is the horizontal edge above local pixel `(k, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalDual {
    layout: LocalLayout,
    v: Vec<f64>,
    h: Vec<f64>,
}

impl LocalDual {
    pub fn zeros(layout: LocalLayout) -> Self {
        LocalDual {
            layout,
            v: vec![0.0; layout.v_len()],
            h: vec![0.0; layout.h_len()],
        }
    }

    pub fn layout(&self) -> LocalLayout {
        self.layout
    }

    pub fn shape(&self) -> GridShape {
        self.layout.shape
    }

    #[inline]
    pub fn v(&self, i: usize, k: usize) -> f64 {
        self.v[i * (self.layout.shape.cols + 1) + k]
    }

    #[inline]
    pub fn h(&self, k: usize, j: usize) -> f64 {
        self.h[k * self.layout.shape.cols + j]
    }

    /// Sets a slot. Writes to outer-boundary slots are ignored since those
    /// edges carry no dof.
    pub fn set_v(&mut self, i: usize, k: usize, value: f64) {
        if self.layout.v_active(k) {
            let c = self.layout.shape.cols;
            self.v[i * (c + 1) + k] = value;
        }
    }

    pub fn set_h(&mut self, k: usize, j: usize, value: f64) {
        if self.layout.h_active(k) {
            let c = self.layout.shape.cols;
            self.h[k * c + j] = value;
        }
    }

    /// All slots. Inactive slots are zero, so sums and norms over slots equal
    /// those over genuine dofs.
    pub fn slots(&self) -> impl Iterator<Item = f64> + '_ {
        self.v.iter().chain(self.h.iter()).copied()
    }

    pub(crate) fn slots_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.v.iter_mut().chain(self.h.iter_mut())
    }

    pub fn dof_count(&self) -> usize {
        self.layout.dof_count()
    }

    /// Genuine dofs in flat order (see [`TornDualField::to_flat`]).
    pub fn active_dofs(&self) -> Vec<f64> {
        let lay = self.layout;
        let (r, c) = (lay.shape.rows, lay.shape.cols);
        let mut out = Vec::with_capacity(lay.dof_count());
        for i in 0..r {
            for k in 0..=c {
                if lay.v_active(k) {
                    out.push(self.v[i * (c + 1) + k]);
                }
            }
        }
        for k in 0..=r {
            if lay.h_active(k) {
                out.extend_from_slice(&self.h[k * c..(k + 1) * c]);
            }
        }
        out
    }

    /// Builds a block from its genuine dofs in flat order.
    pub fn from_active_dofs(layout: LocalLayout, dofs: &[f64]) -> Result<LocalDual> {
        if dofs.len() != layout.dof_count() {
            return Err(TvError::LengthMismatch {
                expected: layout.dof_count(),
                found: dofs.len(),
            });
        }
        let (r, c) = (layout.shape.rows, layout.shape.cols);
        let mut p = LocalDual::zeros(layout);
        let mut it = dofs.iter().copied();
        for i in 0..r {
            for k in 0..=c {
                if layout.v_active(k) {
                    p.v[i * (c + 1) + k] = it.next().expect("length checked");
                }
            }
        }
        for k in 0..=r {
            if layout.h_active(k) {
                for j in 0..c {
                    p.h[k * c + j] = it.next().expect("length checked");
                }
            }
        }
        Ok(p)
    }

    pub fn inner(&self, other: &LocalDual) -> f64 {
        dot(&self.v, &other.v) + dot(&self.h, &other.h)
    }

    pub fn norm2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.slots().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub(crate) fn zip_map(&self, other: &LocalDual, f: impl Fn(f64, f64) -> f64) -> LocalDual {
        debug_assert_eq!(self.layout, other.layout);
        LocalDual {
            layout: self.layout,
            v: self.v.iter().zip(&other.v).map(|(&a, &b)| f(a, b)).collect(),
            h: self.h.iter().zip(&other.h).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

/// Local divergence on a subdomain: the global stencil, with interface
/// copies acting as the edge values on `∂Ω_s ∩ Γ` and outer-boundary edges
/// reading as zero.
pub fn local_divergence(p: &LocalDual) -> ImageField {
    let shape = p.layout.shape;
    let (r, c) = (shape.rows, shape.cols);
    let mut out = Vec::with_capacity(shape.pixels());
    for i in 0..r {
        let vrow = &p.v[i * (c + 1)..(i + 1) * (c + 1)];
        let htop = &p.h[i * c..(i + 1) * c];
        let hbot = &p.h[(i + 1) * c..(i + 2) * c];
        for j in 0..c {
            out.push(vrow[j + 1] - vrow[j] + hbot[j] - htop[j]);
        }
    }
    ImageField::from_vec_unchecked(shape, out)
}

/// Adjoint of [`local_divergence`]. Interior edges receive pixel differences,
/// interface edges the one-sided value of their single adjacent pixel.
pub fn local_divergence_adjoint(u: &ImageField, layout: LocalLayout) -> LocalDual {
    let mut p = LocalDual::zeros(layout);
    local_divergence_adjoint_into(u, &mut p);
    p
}

pub(crate) fn local_divergence_adjoint_into(u: &ImageField, p: &mut LocalDual) {
    let layout = p.layout;
    debug_assert_eq!(u.shape(), layout.shape);
    let (r, c) = (layout.shape.rows, layout.shape.cols);
    let vals = u.values();
    for i in 0..r {
        let row = &vals[i * c..(i + 1) * c];
        let vrow = &mut p.v[i * (c + 1)..(i + 1) * (c + 1)];
        vrow[0] = if layout.interface.left { -row[0] } else { 0.0 };
        for k in 1..c {
            vrow[k] = row[k - 1] - row[k];
        }
        vrow[c] = if layout.interface.right { row[c - 1] } else { 0.0 };
    }
    for j in 0..c {
        p.h[j] = if layout.interface.top { -vals[j] } else { 0.0 };
        p.h[r * c + j] = if layout.interface.bottom {
            vals[(r - 1) * c + j]
        } else {
            0.0
        };
    }
    for k in 1..r {
        for j in 0..c {
            p.h[k * c + j] = vals[(k - 1) * c + j] - vals[k * c + j];
        }
    }
}

/// Element of the torn dual space `Ỹ = ⊕ Ỹ_s`, blocks in subdomain order.
#[derive(Clone, Debug, PartialEq)]
pub struct TornDualField {
    blocks: Vec<LocalDual>,
}

impl TornDualField {
    pub fn from_blocks(blocks: Vec<LocalDual>) -> Self {
        TornDualField { blocks }
    }

    pub fn blocks(&self) -> &[LocalDual] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [LocalDual] {
        &mut self.blocks
    }

    pub fn into_blocks(self) -> Vec<LocalDual> {
        self.blocks
    }

    pub fn block(&self, s: usize) -> &LocalDual {
        &self.blocks[s]
    }

    pub fn dof_count(&self) -> usize {
        self.blocks.iter().map(LocalDual::dof_count).sum()
    }

    /// Genuine dofs as a flat vector: blocks in subdomain order; within a
    /// block, active vertical slots row-major, then active horizontal slots
    /// row-major.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dof_count());
        for block in &self.blocks {
            out.extend(block.active_dofs());
        }
        out
    }

    pub fn inner(&self, other: &TornDualField) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.inner(b)).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, b| m.max(b.max_abs()))
    }

    /// `a * self + b * other`, blockwise.
    pub fn lincomb(&self, a: f64, other: &TornDualField, b: f64) -> TornDualField {
        TornDualField {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(x, y)| x.zip_map(y, |p, q| a * p + b * q))
                .collect(),
        }
    }
}

/// Lagrange multiplier on the interface dofs, one value per interface edge.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceMultiplier {
    values: Vec<f64>,
}

impl InterfaceMultiplier {
    pub fn new(values: Vec<f64>) -> Self {
        InterfaceMultiplier { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn inner(&self, other: &InterfaceMultiplier) -> f64 {
        dot(&self.values, &other.values)
    }

    pub fn norm2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::divergence;

    fn shape(r: usize, c: usize) -> GridShape {
        GridShape::new(r, c).unwrap()
    }

    #[test]
    fn restrict_top_left_block() {
        let part = Partition::uniform(shape(2, 2), 2, 2).unwrap();
        let u = ImageField::new(shape(2, 2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(part.restrict_image(&u, 0).unwrap().values(), &[1.0]);
        assert_eq!(part.restrict_image(&u, 3).unwrap().values(), &[4.0]);
        assert!(matches!(
            part.restrict_image(&u, 4),
            Err(TvError::InvalidSubdomain { id: 4, count: 4 })
        ));
    }

    #[test]
    fn extend_restrict_partition_of_unity() {
        let part = Partition::uniform(shape(5, 7), 3, 2).unwrap();
        let u = ImageField::from_fn(part.shape(), |i, j| (i * 7 + j) as f64);
        let mut sum = ImageField::zeros(part.shape());
        for s in 0..part.len() {
            let e = part.extend_image(&part.restrict_image(&u, s).unwrap(), s).unwrap();
            for (a, b) in sum.values_mut().iter_mut().zip(e.values()) {
                *a += b;
            }
        }
        assert_eq!(sum, u);
    }

    #[test]
    fn extend_single_pixel() {
        let part = Partition::uniform(shape(2, 3), 3, 2).unwrap();
        let e = part
            .extend_image(&ImageField::constant(shape(1, 1), 7.0), 4)
            .unwrap();
        assert_eq!(e.values(), &[0.0, 0.0, 0.0, 0.0, 7.0, 0.0]);
        assert!(part.extend_image(&ImageField::zeros(shape(2, 1)), 4).is_err());
    }

    #[test]
    fn interface_enumeration_order() {
        // 2x4 grid, cut after column 1 and after row 0.
        let part = Partition::new(shape(2, 4), vec![0, 1, 2], vec![0, 2, 4]).unwrap();
        assert_eq!(part.interface_len(), 2 + 4);
        assert_eq!(part.vertical_interface_len(), 2);
        let globals: Vec<_> = part.interface.iter().map(|e| e.global_index).collect();
        // v-edge (0,1) -> 1, (1,1) -> 4; h-edges (0,0..4) -> 0..4
        assert_eq!(globals, vec![1, 4, 0, 1, 2, 3]);
    }

    #[test]
    fn jump_of_opposite_copies() {
        let part = Partition::uniform(shape(1, 2), 2, 1).unwrap();
        let mut tp = part.zero_torn();
        tp.blocks_mut()[0].set_v(0, 1, 1.0);
        tp.blocks_mut()[1].set_v(0, 0, -1.0);
        assert_eq!(part.jump(&tp).unwrap().values(), &[2.0]);
    }

    #[test]
    fn jump_adjoint_unit() {
        let part = Partition::uniform(shape(1, 2), 2, 1).unwrap();
        let tp = part.jump_adjoint(&InterfaceMultiplier::new(vec![1.0])).unwrap();
        assert_eq!(tp.block(0).v(0, 1), 1.0);
        assert_eq!(tp.block(1).v(0, 0), -1.0);
        assert_eq!(part.jump(&tp).unwrap().values(), &[2.0]);
        let zero = part.jump_adjoint(&part.zero_multiplier()).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn tear_assemble_round_trip() {
        let s = shape(6, 5);
        let part = Partition::uniform(s, 2, 3).unwrap();
        let dofs: Vec<f64> = (0..s.edges()).map(|k| (k as f64 * 0.37).sin()).collect();
        let p = DualField::from_dofs(s, &dofs).unwrap();
        let tp = part.tear(&p).unwrap();
        assert_eq!(part.jump(&tp).unwrap().max_abs(), 0.0);
        assert_eq!(part.assemble(&tp, 0.0).unwrap(), p);
        assert_eq!(tp.dof_count(), s.edges() + part.interface_len());
    }

    #[test]
    fn assemble_reports_offending_edge() {
        let part = Partition::uniform(shape(2, 2), 2, 1).unwrap();
        let mut tp = part.zero_torn();
        tp.blocks_mut()[0].set_v(1, 1, 0.5);
        match part.assemble(&tp, 1e-8) {
            Err(TvError::JumpViolation { edge, jump, .. }) => {
                assert_eq!(edge, 1);
                assert_eq!(jump, 0.5);
            }
            other => panic!("expected jump violation, got {other:?}"),
        }
    }

    #[test]
    fn assemble_equal_copies() {
        let part = Partition::uniform(shape(1, 2), 2, 1).unwrap();
        let mut tp = part.zero_torn();
        tp.blocks_mut()[0].set_v(0, 1, 0.25);
        tp.blocks_mut()[1].set_v(0, 0, 0.25);
        assert_eq!(part.assemble(&tp, 0.0).unwrap().v_edges(), &[0.25]);
    }

    #[test]
    fn local_divergence_of_torn_matches_global() {
        let s = shape(7, 6);
        let part = Partition::uniform(s, 3, 2).unwrap();
        let dofs: Vec<f64> = (0..s.edges()).map(|k| ((k * 7 % 11) as f64) - 5.0).collect();
        let p = DualField::from_dofs(s, &dofs).unwrap();
        let tp = part.tear(&p).unwrap();
        assert_eq!(part.torn_divergence(&tp).unwrap(), divergence(&p));
    }

    #[test]
    fn corner_interface_copy_hits_one_pixel() {
        let part = Partition::uniform(shape(4, 4), 2, 2).unwrap();
        let mut tp = part.zero_torn();
        // subdomain 0 is the top-left 2x2 block; its right interface slot at row 0
        tp.blocks_mut()[0].set_v(0, 2, 1.0);
        let d = local_divergence(tp.block(0));
        assert_eq!(d.values(), &[0.0, 1.0, 0.0, 0.0]);
        // the matching slot in subdomain 1 is its left side, outward sign negative
        tp.blocks_mut()[1].set_v(0, 0, 1.0);
        assert_eq!(local_divergence(tp.block(1)).values(), &[-1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn outer_boundary_slots_carry_no_dofs() {
        let part = Partition::uniform(shape(3, 3), 1, 1).unwrap();
        let mut tp = part.zero_torn();
        tp.blocks_mut()[0].set_v(0, 0, 5.0);
        tp.blocks_mut()[0].set_h(3, 1, 5.0);
        assert_eq!(tp.max_abs(), 0.0);
        assert_eq!(part.interface_len(), 0);
    }

    #[test]
    fn constant_local_adjoint_is_nonzero_on_interface() {
        let part = Partition::uniform(shape(3, 3), 3, 3).unwrap();
        let center = part.subdomain(4).unwrap().layout;
        let q = local_divergence_adjoint(&ImageField::constant(center.shape, 2.0), center);
        assert_eq!(q.v(0, 0), -2.0);
        assert_eq!(q.v(0, 1), 2.0);
        assert_eq!(q.h(0, 0), -2.0);
        assert_eq!(q.h(1, 0), 2.0);

        let big = Partition::uniform(shape(6, 6), 2, 2).unwrap();
        let lay = big.subdomain(0).unwrap().layout;
        let q = local_divergence_adjoint(&ImageField::constant(lay.shape, 1.5), lay);
        // interior edges vanish, interface edges on the right/bottom carry +c
        assert_eq!(q.v(1, 1), 0.0);
        assert_eq!(q.v(1, 3), 1.5);
        assert_eq!(q.v(1, 0), 0.0);
        assert_eq!(q.h(3, 2), 1.5);
        let zero = local_divergence_adjoint(&ImageField::zeros(lay.shape), lay);
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn uneven_and_invalid_partitions() {
        let part = Partition::uniform(shape(5, 3), 3, 2).unwrap();
        assert_eq!(part.row_splits(), &[0, 2, 5]);
        assert_eq!(part.col_splits(), &[0, 1, 2, 3]);
        assert!(Partition::uniform(shape(2, 2), 3, 1).is_err());
        assert!(Partition::new(shape(4, 4), vec![0, 2, 2, 4], vec![0, 4]).is_err());
        assert!(Partition::new(shape(4, 4), vec![0, 4], vec![0, 3]).is_err());
    }

    #[test]
    fn dof_accounting() {
        for (nx, ny) in [(1, 1), (2, 1), (2, 2), (4, 4), (3, 5)] {
            let s = shape(16, 15);
            let part = Partition::uniform(s, nx, ny).unwrap();
            assert_eq!(part.torn_dof_count(), s.edges() + part.interface_len());
        }
    }

    #[test]
    fn partition_spec_parsing() {
        let p: PartitionSpec = "4x2".parse().unwrap();
        assert_eq!(p, PartitionSpec { nx: 4, ny: 2 });
        assert!("4".parse::<PartitionSpec>().is_err());
        assert!("0x2".parse::<PartitionSpec>().is_err());
        assert_eq!(p.to_string(), "4x2");
    }
}
