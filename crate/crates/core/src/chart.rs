//! Finite-difference calculus on uniform rectangular charts `z = x + iy`.
//!
//! Nodes are stored row-major: `index = j * nx + i` with `x_i = x0 + i·hx`
//! and `y_j = y0 + j·hy`. A periodic direction wraps its stencils; an open
//! direction falls back to one-sided second-order stencils at the edges.

use nalgebra::{Complex, Matrix4, Vector4};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Chart label used when nothing more specific applies.
pub const PLANE_CHART: &str = "plane";

/// Smallest node count accepted in either direction.
pub const MIN_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StencilOrder {
    #[default]
    Second,
    /// Fourth-order central stencils in the interior; second order within two
    /// nodes of an open edge.
    Fourth,
}

impl StencilOrder {
    /// Nodes reached on each side by a central stencil.
    pub fn half_width(self) -> usize {
        match self {
            StencilOrder::Second => 1,
            StencilOrder::Fourth => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartGrid {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub x0: f64,
    pub y0: f64,
    pub periodic_x: bool,
    pub periodic_y: bool,
    pub chart_id: String,
    pub stencil: StencilOrder,
}

impl ChartGrid {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        nx: usize,
        ny: usize,
        hx: f64,
        hy: f64,
        x0: f64,
        y0: f64,
        periodic_x: bool,
        periodic_y: bool,
    ) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes per direction, got {nx}x{ny}"
            )));
        }
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacings must be positive, got {hx}, {hy}")));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            nx,
            ny,
            hx,
            hy,
            x0,
            y0,
            periodic_x,
            periodic_y,
            chart_id: PLANE_CHART.to_string(),
            stencil: StencilOrder::Second,
        })
    }

    /// Open grid whose first and last nodes sit on the given interval ends.
    pub fn open_rect(nx: usize, ny: usize, x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        let hx = (x.1 - x.0) / (nx - 1) as f64;
        let hy = (y.1 - y.0) / (ny - 1) as f64;
        Self::new(nx, ny, hx, hy, x.0, y.0, false, false)
    }

    pub fn with_chart_id(mut self, id: impl Into<String>) -> Self {
        self.chart_id = id.into();
        self
    }

    pub fn with_stencil(mut self, stencil: StencilOrder) -> Self {
        self.stencil = stencil;
        self
    }

    /// Same nodes with both periodic flags cleared (the universal cover view).
    pub fn unwrapped(&self) -> Self {
        Self {
            periodic_x: false,
            periodic_y: false,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }

    pub fn point(&self, index: usize) -> (f64, f64) {
        let (i, j) = self.coords(index);
        (self.x(i), self.y(j))
    }

    /// Larger of the two spacings.
    pub fn h(&self) -> f64 {
        self.hx.max(self.hy)
    }

    pub fn center(&self) -> usize {
        self.index(self.nx / 2, self.ny / 2)
    }

    /// The sub-grid with `margin` nodes removed from every open edge.
    pub fn trimmed(&self, margin: usize) -> Result<Self> {
        let (dx, nx) = if self.periodic_x {
            (0, self.nx)
        } else {
            (margin, self.nx.saturating_sub(2 * margin))
        };
        let (dy, ny) = if self.periodic_y {
            (0, self.ny)
        } else {
            (margin, self.ny.saturating_sub(2 * margin))
        };
        let mut g = Self::new(
            nx,
            ny,
            self.hx,
            self.hy,
            self.x(dx),
            self.y(dy),
            self.periodic_x,
            self.periodic_y,
        )?;
        g.chart_id = self.chart_id.clone();
        g.stencil = self.stencil;
        Ok(g)
    }

    /// Node indices with `margin` nodes removed from every open edge.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        let (ix, jx) = if self.periodic_x {
            (0, self.nx)
        } else {
            (margin.min(self.nx), self.nx.saturating_sub(margin))
        };
        let (iy, jy) = if self.periodic_y {
            (0, self.ny)
        } else {
            (margin.min(self.ny), self.ny.saturating_sub(margin))
        };
        let mut out = Vec::with_capacity(jx.saturating_sub(ix) * jy.saturating_sub(iy));
        for j in iy..jy {
            for i in ix..jx {
                out.push(self.index(i, j));
            }
        }
        out
    }

    /// True when both grids have the same nodes and boundary handling.
    pub fn same_nodes(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.hx == other.hx
            && self.hy == other.hy
            && self.x0 == other.x0
            && self.y0 == other.y0
            && self.periodic_x == other.periodic_x
            && self.periodic_y == other.periodic_y
    }

    pub fn neighbor(&self, i: usize, j: usize, direction: Direction) -> Option<(usize, usize)> {
        let step = |k: usize, n: usize, forward: bool, periodic: bool| -> Option<usize> {
            match (forward, periodic) {
                (true, _) if k + 1 < n => Some(k + 1),
                (true, true) => Some(0),
                (false, _) if k > 0 => Some(k - 1),
                (false, true) => Some(n - 1),
                _ => None,
            }
        };
        match direction {
            Direction::PlusX => step(i, self.nx, true, self.periodic_x).map(|i| (i, j)),
            Direction::MinusX => step(i, self.nx, false, self.periodic_x).map(|i| (i, j)),
            Direction::PlusY => step(j, self.ny, true, self.periodic_y).map(|j| (i, j)),
            Direction::MinusY => step(j, self.ny, false, self.periodic_y).map(|j| (i, j)),
        }
    }
}

/// Values that can be combined linearly by stencils.
pub trait Linear: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
}

macro_rules! impl_linear {
    ($t:ty, $zero:expr) => {
        impl Linear for $t {
            fn zero() -> Self {
                $zero
            }
            fn add(self, other: Self) -> Self {
                self + other
            }
            fn sub(self, other: Self) -> Self {
                self - other
            }
            fn scale(self, s: f64) -> Self {
                self * s
            }
        }
    };
}

impl_linear!(f64, 0.0);
impl_linear!(Complex<f64>, Complex::new(0.0, 0.0));
impl_linear!(Vector4<f64>, Vector4::zeros());
impl_linear!(Matrix4<f64>, Matrix4::zeros());

impl Linear for Vector4<Complex<f64>> {
    fn zero() -> Self {
        Vector4::from_element(Complex::new(0.0, 0.0))
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self.map(|c| c * s)
    }
}

impl Linear for Matrix4<Complex<f64>> {
    fn zero() -> Self {
        Matrix4::from_element(Complex::new(0.0, 0.0))
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self.map(|c| c * s)
    }
}

/// Types whose partial derivatives combine into complex Wirtinger
/// derivatives `½(∂x ∓ i∂y)`.
pub trait Wirtinger: Linear {
    type Complex: Linear;
    /// `½(dx − i·dy)`, or `½(dx + i·dy)` when `bar` is set.
    fn wirtinger(dx: Self, dy: Self, bar: bool) -> Self::Complex;
}

fn half_combine(dx: Complex<f64>, dy: Complex<f64>, bar: bool) -> Complex<f64> {
    let i = Complex::new(0.0, if bar { 1.0 } else { -1.0 });
    (dx + i * dy) * 0.5
}

impl Wirtinger for f64 {
    type Complex = Complex<f64>;
    fn wirtinger(dx: Self, dy: Self, bar: bool) -> Self::Complex {
        half_combine(dx.into(), dy.into(), bar)
    }
}

impl Wirtinger for Complex<f64> {
    type Complex = Complex<f64>;
    fn wirtinger(dx: Self, dy: Self, bar: bool) -> Self::Complex {
        half_combine(dx, dy, bar)
    }
}

impl Wirtinger for Vector4<f64> {
    type Complex = Vector4<Complex<f64>>;
    fn wirtinger(dx: Self, dy: Self, bar: bool) -> Self::Complex {
        Vector4::from_fn(|k, _| half_combine(dx[k].into(), dy[k].into(), bar))
    }
}

impl Wirtinger for Vector4<Complex<f64>> {
    type Complex = Vector4<Complex<f64>>;
    fn wirtinger(dx: Self, dy: Self, bar: bool) -> Self::Complex {
        Vector4::from_fn(|k, _| half_combine(dx[k], dy[k], bar))
    }
}

impl Wirtinger for Matrix4<f64> {
    type Complex = Matrix4<Complex<f64>>;
    fn wirtinger(dx: Self, dy: Self, bar: bool) -> Self::Complex {
        Matrix4::from_fn(|r, c| half_combine(dx[(r, c)].into(), dy[(r, c)].into(), bar))
    }
}

impl Wirtinger for Matrix4<Complex<f64>> {
    type Complex = Matrix4<Complex<f64>>;
    fn wirtinger(dx: Self, dy: Self, bar: bool) -> Self::Complex {
        Matrix4::from_fn(|r, c| half_combine(dx[(r, c)], dy[(r, c)], bar))
    }
}

/// Node values over a [`ChartGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: ChartGrid,
    values: Vec<T>,
}

impl<T> Field<T> {
    pub fn new(grid: ChartGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, index: usize) -> &T {
        &self.values[index]
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.values[self.grid.index(i, j)]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Restriction to [`ChartGrid::trimmed`].
    pub fn trimmed(&self, margin: usize) -> Result<Self>
    where
        T: Clone,
    {
        let grid = self.grid.trimmed(margin)?;
        let values = self
            .grid
            .interior(margin)
            .into_iter()
            .map(|k| self.values[k].clone())
            .collect();
        Field::new(grid, values)
    }

    /// Rebinds the values to another grid with the same node count.
    pub fn regrid(self, grid: ChartGrid) -> Result<Self> {
        Field::new(grid, self.values)
    }
}

impl<T: Send + Sync> Field<T> {
    pub fn from_fn<F>(grid: ChartGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> T + Sync + Send,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (x, y) = grid.point(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn from_index_fn<F>(grid: ChartGrid, f: F) -> Self
    where
        F: Fn(usize) -> T + Sync + Send,
    {
        let values = (0..grid.len()).into_par_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn constant(grid: ChartGrid, value: T) -> Self
    where
        T: Clone,
    {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    pub fn map<U: Send, F>(&self, f: F) -> Field<U>
    where
        F: Fn(&T) -> U + Sync + Send,
    {
        Field {
            grid: self.grid.clone(),
            values: self.values.par_iter().map(f).collect(),
        }
    }

    pub fn zip_map<S: Sync, U: Send, F>(&self, other: &Field<S>, f: F) -> Result<Field<U>>
    where
        F: Fn(&T, &S) -> U + Sync + Send,
    {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .par_iter()
                .zip(other.values.par_iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }
}

pub fn check_same_grid<A, B>(a: &Field<A>, b: &Field<B>) -> Result<()> {
    if a.grid.same_nodes(&b.grid) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

struct Line {
    n: usize,
    h: f64,
    periodic: bool,
    stride: usize,
}

fn line_for(grid: &ChartGrid, axis: Axis) -> Line {
    match axis {
        Axis::X => Line {
            n: grid.nx,
            h: grid.hx,
            periodic: grid.periodic_x,
            stride: 1,
        },
        Axis::Y => Line {
            n: grid.ny,
            h: grid.hy,
            periodic: grid.periodic_y,
            stride: grid.nx,
        },
    }
}

fn first_derivative_at<T: Linear>(values: &[T], base: usize, k: usize, line: &Line, order: StencilOrder) -> T {
    let n = line.n;
    let at = |m: isize| -> T {
        let m = if line.periodic {
            m.rem_euclid(n as isize) as usize
        } else {
            m as usize
        };
        values[base + m * line.stride]
    };
    let k = k as isize;
    let h = line.h;
    let interior4 = line.periodic || (k >= 2 && k + 2 < n as isize);
    let interior2 = line.periodic || (k >= 1 && k + 1 < n as isize);
    if order == StencilOrder::Fourth && interior4 {
        let s = at(k - 2).sub(at(k + 2)).add(at(k + 1).sub(at(k - 1)).scale(8.0));
        s.scale(1.0 / (12.0 * h))
    } else if interior2 {
        at(k + 1).sub(at(k - 1)).scale(0.5 / h)
    } else if k == 0 {
        at(1).scale(4.0).sub(at(0).scale(3.0)).sub(at(2)).scale(0.5 / h)
    } else {
        at(k).scale(3.0).sub(at(k - 1).scale(4.0)).add(at(k - 2)).scale(0.5 / h)
    }
}

fn second_derivative_at<T: Linear>(values: &[T], base: usize, k: usize, line: &Line, order: StencilOrder) -> T {
    let n = line.n;
    let at = |m: isize| -> T {
        let m = if line.periodic {
            m.rem_euclid(n as isize) as usize
        } else {
            m as usize
        };
        values[base + m * line.stride]
    };
    let k = k as isize;
    let h2 = line.h * line.h;
    let interior4 = line.periodic || (k >= 2 && k + 2 < n as isize);
    let interior2 = line.periodic || (k >= 1 && k + 1 < n as isize);
    if order == StencilOrder::Fourth && interior4 {
        let s = at(k + 1)
            .add(at(k - 1))
            .scale(16.0)
            .sub(at(k + 2))
            .sub(at(k - 2))
            .sub(at(k).scale(30.0));
        s.scale(1.0 / (12.0 * h2))
    } else if interior2 {
        at(k + 1).add(at(k - 1)).sub(at(k).scale(2.0)).scale(1.0 / h2)
    } else if k == 0 {
        at(0)
            .scale(2.0)
            .sub(at(1).scale(5.0))
            .add(at(2).scale(4.0))
            .sub(at(3))
            .scale(1.0 / h2)
    } else {
        at(k)
            .scale(2.0)
            .sub(at(k - 1).scale(5.0))
            .add(at(k - 2).scale(4.0))
            .sub(at(k - 3))
            .scale(1.0 / h2)
    }
}

fn along_axis<T: Linear>(f: &Field<T>, axis: Axis, second: bool) -> Field<T> {
    let grid = f.grid.clone();
    let line = line_for(&grid, axis);
    let order = grid.stencil;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            let (k, base) = match axis {
                Axis::X => (i, grid.index(0, j)),
                Axis::Y => (j, grid.index(i, 0)),
            };
            if second {
                second_derivative_at(&f.values, base, k, &line, order)
            } else {
                first_derivative_at(&f.values, base, k, &line, order)
            }
        })
        .collect();
    Field { grid, values }
}

pub fn d_x<T: Linear>(f: &Field<T>) -> Field<T> {
    along_axis(f, Axis::X, false)
}

pub fn d_y<T: Linear>(f: &Field<T>) -> Field<T> {
    along_axis(f, Axis::Y, false)
}

pub fn d_xx<T: Linear>(f: &Field<T>) -> Field<T> {
    along_axis(f, Axis::X, true)
}

pub fn d_yy<T: Linear>(f: &Field<T>) -> Field<T> {
    along_axis(f, Axis::Y, true)
}

pub fn d_xy<T: Linear>(f: &Field<T>) -> Field<T> {
    d_y(&d_x(f))
}

fn combine<T: Wirtinger>(a: &Field<T>, b: &Field<T>, bar: bool, factor: f64) -> Field<T::Complex> {
    let values = a
        .values
        .par_iter()
        .zip(b.values.par_iter())
        .map(|(p, q)| T::wirtinger(*p, *q, bar).scale(factor))
        .collect();
    Field {
        grid: a.grid.clone(),
        values,
    }
}

/// `∂/∂z = ½(∂x − i∂y)`.
pub fn d_dz<T: Wirtinger>(f: &Field<T>) -> Field<T::Complex> {
    combine(&d_x(f), &d_y(f), false, 1.0)
}

/// `∂/∂z̄ = ½(∂x + i∂y)`.
pub fn d_dzbar<T: Wirtinger>(f: &Field<T>) -> Field<T::Complex> {
    combine(&d_x(f), &d_y(f), true, 1.0)
}

/// `∂²/∂z∂z̄ = ¼Δ`, using the compact second-difference stencils.
pub fn d_zzbar<T: Linear>(f: &Field<T>) -> Field<T> {
    let xx = d_xx(f);
    let yy = d_yy(f);
    let values = xx
        .values
        .par_iter()
        .zip(yy.values.par_iter())
        .map(|(a, b)| a.add(*b).scale(0.25))
        .collect();
    Field {
        grid: f.grid.clone(),
        values,
    }
}

/// `∂²/∂z² = ¼(∂xx − ∂yy − 2i∂xy)`.
pub fn d_zz<T: Wirtinger>(f: &Field<T>) -> Field<T::Complex> {
    let xx = d_xx(f);
    let yy = d_yy(f);
    let xy = d_xy(f);
    let diff = Field {
        grid: f.grid.clone(),
        values: xx.values.iter().zip(&yy.values).map(|(a, b)| a.sub(*b)).collect(),
    };
    let twice_xy = xy.map(|v| v.scale(2.0));
    combine(&diff, &twice_xy, false, 0.5)
}

/// Σ f·weight·hx·hy with trapezoid end weights on open directions and a
/// plain sum on periodic ones.
pub fn integrate(f: &Field<f64>, weight: &Field<f64>) -> Result<f64> {
    check_same_grid(f, weight)?;
    let g = &f.grid;
    let end = |k: usize, n: usize, periodic: bool| -> f64 {
        if !periodic && (k == 0 || k + 1 == n) {
            0.5
        } else {
            1.0
        }
    };
    let terms: Vec<f64> = (0..g.len())
        .map(|idx| {
            let (i, j) = g.coords(idx);
            let w = end(i, g.nx, g.periodic_x) * end(j, g.ny, g.periodic_y);
            f.values[idx] * weight.values[idx] * w
        })
        .collect();
    Ok(pairwise_sum(&terms) * g.hx * g.hy)
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Linear average of node `(i, j)` and its neighbour in `direction`.
pub fn midpoint<T: Linear>(f: &Field<T>, i: usize, j: usize, direction: Direction) -> Result<T> {
    let (ni, nj) = f
        .grid
        .neighbor(i, j, direction)
        .ok_or(Error::OutOfRange { i, j, direction })?;
    Ok(f.get(i, j).add(*f.get(ni, nj)).scale(0.5))
}

/// Max, mean and root-mean-square of a scalar sample.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Stats {
    pub max: f64,
    pub mean: f64,
    pub l2: f64,
}

impl Stats {
    pub fn of(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let n = samples.len() as f64;
        let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = pairwise_sum(samples) / n;
        let sq: Vec<f64> = samples.iter().map(|v| v * v).collect();
        Self {
            max,
            mean,
            l2: (pairwise_sum(&sq) / n).sqrt(),
        }
    }
}

/// Statistics of `norm(value)` over the interior with the given margin.
pub fn interior_stats<T, F>(f: &Field<T>, margin: usize, norm: F) -> Stats
where
    F: Fn(&T) -> f64,
{
    let samples: Vec<f64> = f
        .grid
        .interior(margin)
        .into_iter()
        .map(|k| norm(&f.values[k]))
        .collect();
    Stats::of(&samples)
}

/// Largest `norm(value)` over the interior with the given margin.
pub fn interior_max<T, F>(f: &Field<T>, margin: usize, norm: F) -> f64
where
    F: Fn(&T) -> f64,
{
    f.grid
        .interior(margin)
        .into_iter()
        .map(|k| norm(&f.values[k]))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(ChartGrid::new(7, 10, 0.1, 0.1, 0.0, 0.0, false, false).is_err());
        assert!(ChartGrid::new(10, 10, 0.0, 0.1, 0.0, 0.0, false, false).is_err());
        assert!(ChartGrid::new(10, 10, 0.1, -0.1, 0.0, 0.0, false, false).is_err());
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let g = ChartGrid::open_rect(12, 10, (0.0, 1.0), (-1.0, 1.0)).unwrap();
        let f = Field::constant(g, c(2.0, -1.0));
        for v in d_dz(&f).values().iter().chain(d_dzbar(&f).values()) {
            assert!(v.norm() < 1e-13);
        }
    }

    #[test]
    fn identity_map_is_holomorphic() {
        let g = ChartGrid::open_rect(16, 16, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let f = Field::from_fn(g, c);
        let dz = d_dz(&f);
        let dzb = d_dzbar(&f);
        for k in 0..f.len() {
            assert_abs_diff_eq!(dz.at(k).re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(dz.at(k).im, 0.0, epsilon = 1e-12);
            assert!(dzb.at(k).norm() < 1e-12);
        }
    }

    #[test]
    fn z_squared_is_differentiated_exactly() {
        let g = ChartGrid::open_rect(17, 17, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let f = Field::from_fn(g, |x, y| c(x, y) * c(x, y));
        let dz = d_dz(&f);
        for k in 0..f.len() {
            let (x, y) = f.grid().point(k);
            assert!((dz.at(k) - c(x, y) * 2.0).norm() < 1e-12);
        }
    }

    // Leading central-difference errors cancel in ∂z of a holomorphic
    // function, so the order check uses z²·exp(z̄).
    fn mixed_error(n: usize) -> f64 {
        let g = ChartGrid::open_rect(n, n, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let f = Field::from_fn(g, |x, y| {
            let z = c(x, y);
            z * z * z.conj().exp()
        });
        let dz = d_dz(&f);
        let mut err: f64 = 0.0;
        for k in f.grid().interior(1) {
            let (x, y) = f.grid().point(k);
            let z = c(x, y);
            let exact = z * 2.0 * z.conj().exp();
            err = err.max((dz.at(k) - exact).norm());
        }
        err
    }

    #[test]
    fn second_order_convergence() {
        let ratio = mixed_error(41) / mixed_error(81);
        assert!(ratio > 3.6 && ratio < 4.4, "ratio {ratio}");
    }

    #[test]
    fn fourth_order_flag_converges_faster() {
        let err = |n: usize| {
            let g = ChartGrid::new(n, n, 2.0 * PI / n as f64, 2.0 * PI / n as f64, 0.0, 0.0, true, true)
                .unwrap()
                .with_stencil(StencilOrder::Fourth);
            let f = Field::from_fn(g, |x, y| x.sin() * y.cos());
            let dx = d_x(&f);
            (0..f.len())
                .map(|k| {
                    let (x, y) = f.grid().point(k);
                    (dx.at(k) - x.cos() * y.cos()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(16) / err(32);
        assert!(ratio > 14.0, "ratio {ratio}");
    }

    #[test]
    fn conjugation_swaps_wirtinger_derivatives() {
        let g = ChartGrid::new(12, 14, 0.3, 0.2, -1.0, 0.5, true, false).unwrap();
        let f = Field::from_fn(g, |x, y| c((x * y).sin(), x - y * y));
        let conj = f.map(|v| v.conj());
        let lhs = d_dz(&f).map(|v| v.conj());
        let rhs = d_dzbar(&conj);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mixed_derivatives_commute_to_second_order() {
        let err = |n: usize| {
            let g = ChartGrid::open_rect(n, n, (0.0, 1.0), (0.0, 1.0)).unwrap();
            let f = Field::from_fn(g, |x, y| c((x + 2.0 * y).sin(), (x * y).exp()));
            let a = d_dzbar(&d_dz(&f));
            let b = d_dz(&d_dzbar(&f));
            interior_max(&a.zip_map(&b, |p, q| (p - q).norm()).unwrap(), 2, |v| *v)
        };
        // the two orders agree exactly in the interior for tensor stencils
        assert!(err(21) < 1e-10);
    }

    #[test]
    fn laplacian_stencil_matches_wirtinger_product() {
        let g = ChartGrid::open_rect(41, 41, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let f = Field::from_fn(g, |x, y| (x * x - y) * (x + y).cos());
        let compact = d_zzbar(&f);
        let exact = |x: f64, y: f64| {
            // ¼Δ of (x²−y)cos(x+y)
            let s = (x + y).sin();
            let co = (x + y).cos();
            let fxx = 2.0 * co - 4.0 * x * s - (x * x - y) * co;
            let fyy = 2.0 * s - (x * x - y) * co;
            0.25 * (fxx + fyy)
        };
        for k in f.grid().interior(1) {
            let (x, y) = f.grid().point(k);
            assert!((compact.at(k) - exact(x, y)).abs() < 2e-3);
        }
    }

    #[test]
    fn integrate_unit_square() {
        let g = ChartGrid::open_rect(11, 17, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let one = Field::constant(g.clone(), 1.0);
        assert_abs_diff_eq!(integrate(&one, &one).unwrap(), 1.0, epsilon = 1e-12);
        let zero = Field::constant(g, 0.0);
        assert_eq!(integrate(&zero, &one).unwrap(), 0.0);
    }

    #[test]
    fn periodic_trapezoid_is_spectral() {
        let n = 32;
        let h = 2.0 * PI / n as f64;
        let g = ChartGrid::new(n, n, h, h, 0.0, 0.0, true, true).unwrap();
        let f = Field::from_fn(g.clone(), |x, _| x.sin().powi(2));
        let one = Field::constant(g, 1.0);
        assert_abs_diff_eq!(integrate(&f, &one).unwrap(), PI * 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn midpoint_cases() {
        let g = ChartGrid::new(8, 8, 0.5, 0.25, 1.0, 0.0, true, false).unwrap();
        let lin = Field::from_fn(g.clone(), |x, y| 3.0 * x - y);
        let m = midpoint(&lin, 2, 3, Direction::PlusY).unwrap();
        assert_abs_diff_eq!(m, 3.0 * 2.0 - 0.875, epsilon = 1e-14);
        let wrap = midpoint(&lin, 7, 0, Direction::PlusX).unwrap();
        assert_abs_diff_eq!(wrap, 0.5 * (lin.get(7, 0) + lin.get(0, 0)), epsilon = 1e-14);
        assert!(matches!(
            midpoint(&lin, 0, 7, Direction::PlusY),
            Err(Error::OutOfRange { .. })
        ));
        let k = Field::constant(g, 4.5);
        assert_eq!(midpoint(&k, 3, 3, Direction::MinusX).unwrap(), 4.5);
    }

    #[test]
    fn interior_trims_only_open_edges() {
        let g = ChartGrid::new(10, 12, 0.1, 0.1, 0.0, 0.0, true, false).unwrap();
        assert_eq!(g.interior(2).len(), 10 * 8);
        assert_eq!(g.unwrapped().interior(2).len(), 6 * 8);
    }

    #[test]
    fn trimmed_field_keeps_coordinates() {
        let g = ChartGrid::new(10, 12, 0.1, 0.2, 1.0, -1.0, true, false).unwrap();
        let f = Field::from_fn(g, |x, y| x + 10.0 * y);
        let t = f.trimmed(2).unwrap();
        assert_eq!((t.grid().nx, t.grid().ny), (10, 8));
        for k in 0..t.len() {
            let (x, y) = t.grid().point(k);
            assert!((t.at(k) - (x + 10.0 * y)).abs() < 1e-12);
        }
        assert!(f.trimmed(6).is_err());
    }
}
