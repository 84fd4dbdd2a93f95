//! Adapted frames, Maurer–Cartan connection matrices and the λ-family.
//!
//! An adapted frame is `F = [f | F₂ | F₃ | n]` with `f_z = (eᵘ/√2)(F₂ − iF₃)`.
//! It satisfies `F_z = F A`, `F_z̄ = F B` where, writing `a = eᵘ/√2`,
//!
//! ```text
//!          |  0     −a      ia      0  |
//!     A =  |  a      0     iu_z     p  |      p = (e^{−u}ξ + eᵘH)/√2
//!          | −ia  −iu_z     0       q  |      q = i(e^{−u}ξ − eᵘH)/√2
//!          |  0      p      q       0  |
//! ```
//!
//! and `B = conj(A)`. The (2,3)/(3,2) entries form the `k` part.

use nalgebra::{Complex, Matrix4};
use rayon::prelude::*;
use std::f64::consts::SQRT_2;

use crate::chart::{check_same_grid, d_dz, d_dzbar, d_x, d_y, interior_max, midpoint, ChartGrid, Direction, Field};
use crate::error::{Error, Result};
use crate::lorentz::{
    bracket_complex, i31, lorentz_orthonormalize, project_k_complex, project_p_complex, ComplexMatrix, GroupElement,
    MinkowskiVector,
};
use crate::surface::{
    analyze, cmc_check, codazzi_residual, gauss_residual, residual_margin, Analysis, ConformalImmersion, SurfaceData,
};

/// Default reconstruction guard on Gauss and Codazzi residuals.
pub const CONSISTENCY_THRESHOLD: f64 = 1e-3;

/// Tolerance on `|λ| = 1`.
pub const LAMBDA_TOL: f64 = 1e-12;

fn czero() -> Complex<f64> {
    Complex::new(0.0, 0.0)
}

fn cmat(m: &Matrix4<f64>) -> ComplexMatrix {
    m.map(|v| Complex::new(v, 0.0))
}

/// Frobenius norm of a complex 4×4 matrix.
pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Per-node `(A, B)` with the loop parameter they were twisted by.
#[derive(Clone, Debug)]
pub struct ConnectionForm {
    pub a: Field<ComplexMatrix>,
    pub b: Field<ComplexMatrix>,
    pub lambda: Complex<f64>,
}

impl ConnectionForm {
    pub fn new(a: Field<ComplexMatrix>, b: Field<ComplexMatrix>) -> Result<Self> {
        check_same_grid(&a, &b)?;
        Ok(Self {
            a,
            b,
            lambda: Complex::new(1.0, 0.0),
        })
    }

    pub fn grid(&self) -> &ChartGrid {
        self.a.grid()
    }

    pub fn a_p(&self) -> Field<ComplexMatrix> {
        self.a.map(project_p_complex)
    }

    pub fn a_k(&self) -> Field<ComplexMatrix> {
        self.a.map(project_k_complex)
    }

    pub fn b_p(&self) -> Field<ComplexMatrix> {
        self.b.map(project_p_complex)
    }

    pub fn b_k(&self) -> Field<ComplexMatrix> {
        self.b.map(project_k_complex)
    }

    /// Largest `‖B − conj(A)‖` over all nodes.
    pub fn reality_defect(&self) -> f64 {
        self.a
            .values()
            .iter()
            .zip(self.b.values())
            .map(|(a, b)| frobenius(&(b - a.map(|c| c.conj()))))
            .fold(0.0, f64::max)
    }
}

/// `F = [f | f_x/(√2eᵘ) | f_y/(√2eᵘ) | n]`, re-orthonormalized per node.
pub fn adapted_frame(
    f: &Field<MinkowskiVector>,
    n: &Field<MinkowskiVector>,
    u: &Field<f64>,
) -> Result<Field<GroupElement>> {
    check_same_grid(f, n)?;
    check_same_grid(f, u)?;
    let fx = d_x(f);
    let fy = d_y(f);
    let frames: Vec<Result<GroupElement>> = (0..f.len())
        .into_par_iter()
        .map(|k| {
            let s = 1.0 / (SQRT_2 * u.at(k).exp());
            let m = Matrix4::from_columns(&[*f.at(k), fx.at(k) * s, fy.at(k) * s, *n.at(k)]);
            lorentz_orthonormalize(&m).map_err(|e| Error::Frame {
                node: k,
                source: Box::new(e),
            })
        })
        .collect();
    Field::new(f.grid().clone(), frames.into_iter().collect::<Result<Vec<_>>>()?)
}

/// Adapted frame of analyzed data; requires `f` and `n`.
pub fn adapted_frame_of(data: &SurfaceData) -> Result<Field<GroupElement>> {
    match (&data.f, &data.n) {
        (Some(f), Some(n)) => adapted_frame(f, n, &data.u),
        _ => Err(Error::InvalidArgument("surface data carries no immersion".into())),
    }
}

/// The connection matrix `A` at one node from `(u, u_z, H, ξ)`.
pub fn connection_matrix(u: f64, u_z: Complex<f64>, h: f64, xi: Complex<f64>) -> ComplexMatrix {
    let i = Complex::new(0.0, 1.0);
    let eu = u.exp();
    let a = Complex::new(eu / SQRT_2, 0.0);
    let p = (xi / eu + eu * h) / SQRT_2;
    let q = i * (xi / eu - eu * h) / SQRT_2;
    let mut m = Matrix4::from_element(czero());
    m[(0, 1)] = -a;
    m[(0, 2)] = i * a;
    m[(1, 0)] = a;
    m[(2, 0)] = -i * a;
    m[(1, 2)] = i * u_z;
    m[(2, 1)] = -i * u_z;
    m[(1, 3)] = p;
    m[(3, 1)] = p;
    m[(2, 3)] = q;
    m[(3, 2)] = q;
    m
}

/// The connection built from `(u, H, ξ)` in closed form; `B = conj(A)`.
pub fn analytic_connection(u: &Field<f64>, h: &Field<f64>, xi: &Field<Complex<f64>>) -> Result<ConnectionForm> {
    check_same_grid(u, h)?;
    check_same_grid(u, xi)?;
    let u_z = d_dz(u);
    let a = Field::from_index_fn(u.grid().clone(), |k| {
        connection_matrix(*u.at(k), *u_z.at(k), *h.at(k), *xi.at(k))
    });
    let b = a.map(|m| m.map(|c| c.conj()));
    ConnectionForm::new(a, b)
}

pub fn analytic_connection_of(data: &SurfaceData) -> Result<ConnectionForm> {
    analytic_connection(&data.u, &data.h, &data.xi)
}

/// `A = F⁻¹ F_z`, `B = F⁻¹ F_z̄` by finite differences.
pub fn numeric_connection(frames: &Field<GroupElement>) -> ConnectionForm {
    let m = frames.map(|g| *g.matrix());
    let dz = d_dz(&m);
    let dzb = d_dzbar(&m);
    let inv = frames.map(|g| cmat(g.inverse().matrix()));
    let a = inv.zip_map(&dz, |gi, d| gi * d).expect("same grid");
    let b = inv.zip_map(&dzb, |gi, d| gi * d).expect("same grid");
    ConnectionForm {
        a,
        b,
        lambda: Complex::new(1.0, 0.0),
    }
}

/// `∂_z̄ A_p + [B_k, A_p]` per node.
pub fn harmonicity_residual(cf: &ConnectionForm) -> Field<ComplexMatrix> {
    let ap = cf.a_p();
    let bk = cf.b_k();
    let d = d_dzbar(&ap);
    Field::from_index_fn(cf.grid().clone(), |k| d.at(k) + bracket_complex(bk.at(k), ap.at(k)))
}

/// Closed-form Frobenius norm of the harmonicity residual,
/// `√2·√(e^{−2u}|ξ_z̄|² + e^{2u}|H_z̄|²)`, given the derivatives.
pub fn harmonicity_prediction(
    u: &Field<f64>,
    h_zbar: &Field<Complex<f64>>,
    xi_zbar: &Field<Complex<f64>>,
) -> Result<Field<f64>> {
    check_same_grid(u, h_zbar)?;
    check_same_grid(u, xi_zbar)?;
    Ok(Field::from_index_fn(u.grid().clone(), |k| {
        let e = u.at(k).exp();
        let a = xi_zbar.at(k).norm() / e;
        let b = h_zbar.at(k).norm() * e;
        SQRT_2 * (a * a + b * b).sqrt()
    }))
}

/// `‖[A_p, B_p]_p‖` per node.
pub fn structural_residual(cf: &ConnectionForm) -> Field<f64> {
    let ap = cf.a_p();
    let bp = cf.b_p();
    ap.zip_map(&bp, |a, b| frobenius(&project_p_complex(&bracket_complex(a, b))))
        .expect("same grid")
}

pub fn check_lambda(lambda: Complex<f64>) -> Result<()> {
    let modulus = lambda.norm();
    if (modulus - 1.0).abs() > LAMBDA_TOL || !modulus.is_finite() {
        return Err(Error::LambdaNotUnit { modulus });
    }
    Ok(())
}

/// `A_λ = λ⁻¹A_p + A_k`, `B_λ = λB_p + B_k`.
pub fn lambda_connection(cf: &ConnectionForm, lambda: Complex<f64>) -> Result<ConnectionForm> {
    check_lambda(lambda)?;
    let inv = lambda.inv();
    let a = cf.a.map(|m| project_p_complex(m) * inv + project_k_complex(m));
    let b = cf.b.map(|m| project_p_complex(m) * lambda + project_k_complex(m));
    Ok(ConnectionForm {
        a,
        b,
        lambda: cf.lambda * lambda,
    })
}

/// `∂_z B − ∂_z̄ A + [A, B]` per node.
pub fn zcc_residual(cf: &ConnectionForm) -> Field<ComplexMatrix> {
    let bz = d_dz(&cf.b);
    let azb = d_dzbar(&cf.a);
    Field::from_index_fn(cf.grid().clone(), |k| {
        bz.at(k) - azb.at(k) + bracket_complex(cf.a.at(k), cf.b.at(k))
    })
}

/// The eight default loop parameters `e^{ikπ/4}`.
pub fn roots_of_unity(count: usize) -> Vec<Complex<f64>> {
    (0..count)
        .map(|k| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / count as f64))
        .collect()
}

/// Output of [`integrate_frame`].
#[derive(Clone, Debug)]
pub struct ExtendedFrameField {
    pub frames: Field<GroupElement>,
    pub lambda: Complex<f64>,
    pub base_node: usize,
    /// Largest interior `‖F − F'‖` between the x-first and y-first path orders.
    pub path_dependence: f64,
    /// Largest `‖F(x+P)F(x)⁻¹ − I‖` across a periodic direction.
    pub monodromy_x: Option<f64>,
    pub monodromy_y: Option<f64>,
}

/// Real coefficients `F_x = F X`, `F_y = F Y` of `dF = F(A dz + B dz̄)`.
fn real_coefficients(cf: &ConnectionForm) -> (Field<Matrix4<f64>>, Field<Matrix4<f64>>) {
    let i = Complex::new(0.0, 1.0);
    let x = cf.a.zip_map(&cf.b, |a, b| (a + b).map(|c| c.re)).expect("same grid");
    let y =
        cf.a.zip_map(&cf.b, |a, b| ((a - b) * i).map(|c| c.re))
            .expect("same grid");
    (x, y)
}

fn rk4_step(f: &Matrix4<f64>, m0: &Matrix4<f64>, mm: &Matrix4<f64>, m1: &Matrix4<f64>, h: f64) -> Matrix4<f64> {
    let k1 = f * m0;
    let k2 = (f + k1 * (0.5 * h)) * mm;
    let k3 = (f + k2 * (0.5 * h)) * mm;
    let k4 = (f + k3 * h) * m1;
    f + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

struct Stepper<'a> {
    grid: &'a ChartGrid,
    x: &'a Field<Matrix4<f64>>,
    y: &'a Field<Matrix4<f64>>,
}

impl Stepper<'_> {
    /// One RK4 step from node `(i, j)` to its neighbour in `dir`.
    fn step(&self, f: &GroupElement, i: usize, j: usize, dir: Direction) -> Result<(GroupElement, usize, usize)> {
        let (field, h) = match dir {
            Direction::PlusX => (self.x, self.grid.hx),
            Direction::MinusX => (self.x, -self.grid.hx),
            Direction::PlusY => (self.y, self.grid.hy),
            Direction::MinusY => (self.y, -self.grid.hy),
        };
        let (ni, nj) = self
            .grid
            .neighbor(i, j, dir)
            .ok_or(Error::OutOfRange { i, j, direction: dir })?;
        let mm = midpoint(field, i, j, dir)?;
        let next = rk4_step(f.matrix(), field.get(i, j), &mm, field.get(ni, nj), h);
        let node = self.grid.index(ni, nj);
        let g = lorentz_orthonormalize(&next).map_err(|e| Error::Integration {
            node,
            source: Box::new(e),
        })?;
        Ok((g, ni, nj))
    }

    /// March from `start` at `(i, j)` to every node of the line in both
    /// directions; `along_x` selects the line.
    fn march_line(&self, start: GroupElement, i: usize, j: usize, along_x: bool) -> Result<Vec<(usize, GroupElement)>> {
        let (fwd, back, n, k0) = if along_x {
            (Direction::PlusX, Direction::MinusX, self.grid.nx, i)
        } else {
            (Direction::PlusY, Direction::MinusY, self.grid.ny, j)
        };
        let mut out = Vec::with_capacity(n);
        out.push((self.grid.index(i, j), start));
        for (dir, count) in [(fwd, n - 1 - k0), (back, k0)] {
            let (mut g, mut ci, mut cj) = (start, i, j);
            for _ in 0..count {
                let (ng, ni, nj) = self.step(&g, ci, cj, dir)?;
                out.push((self.grid.index(ni, nj), ng));
                g = ng;
                ci = ni;
                cj = nj;
            }
        }
        Ok(out)
    }

    /// Base line first, then the transverse lines in parallel.
    fn sweep(&self, base: GroupElement, i0: usize, j0: usize, x_first: bool) -> Result<Vec<GroupElement>> {
        let first = self.march_line(base, i0, j0, x_first)?;
        let legs: Vec<Result<Vec<(usize, GroupElement)>>> = first
            .par_iter()
            .map(|&(node, g)| {
                let (i, j) = self.grid.coords(node);
                self.march_line(g, i, j, !x_first)
            })
            .collect();
        let mut values = vec![GroupElement::identity(); self.grid.len()];
        for leg in legs {
            for (node, g) in leg? {
                values[node] = g;
            }
        }
        Ok(values)
    }
}

fn monodromy(stepper: &Stepper, frames: &[GroupElement], along_x: bool) -> Result<f64> {
    let g = stepper.grid;
    let mut worst: f64 = 0.0;
    let count = if along_x { g.ny } else { g.nx };
    for line in 0..count {
        let (i, j, dir) = if along_x {
            (g.nx - 1, line, Direction::PlusX)
        } else {
            (line, g.ny - 1, Direction::PlusY)
        };
        let (wrapped, ni, nj) = stepper.step(&frames[g.index(i, j)], i, j, dir)?;
        let start = frames[g.index(ni, nj)];
        let m = wrapped.matrix() * start.inverse().matrix() - Matrix4::identity();
        worst = worst.max(m.norm());
    }
    Ok(worst)
}

/// Integrates `dF = F(A dz + B dz̄)` with `F(base_node) = base_frame`.
///
/// The march goes along the base row in x, then up and down each column;
/// the grid is treated as its universal cover. The y-first order is
/// integrated as well and its largest deviation reported.
pub fn integrate_frame(cf: &ConnectionForm, base_node: usize, base_frame: GroupElement) -> Result<ExtendedFrameField> {
    let grid = cf.grid();
    if base_node >= grid.len() {
        return Err(Error::InvalidArgument(format!("base node {base_node} outside grid")));
    }
    let (x, y) = real_coefficients(cf);
    let cover = grid.unwrapped();
    let x_open = x.clone().regrid(cover.clone())?;
    let y_open = y.clone().regrid(cover.clone())?;
    let open = Stepper {
        grid: &cover,
        x: &x_open,
        y: &y_open,
    };
    let (i0, j0) = cover.coords(base_node);
    let main = open.sweep(base_frame, i0, j0, true)?;
    let transposed = open.sweep(base_frame, i0, j0, false)?;
    // open edges carry one-sided stencil errors that either path order only
    // crosses on its last steps
    let mut nodes = grid.interior(residual_margin(grid));
    if nodes.is_empty() {
        nodes = (0..grid.len()).collect();
    }
    let path_dependence = nodes
        .into_iter()
        .map(|k| (main[k].matrix() - transposed[k].matrix()).norm())
        .fold(0.0, f64::max);
    let wrapping = Stepper { grid, x: &x, y: &y };
    let monodromy_x = if grid.periodic_x {
        Some(monodromy(&wrapping, &main, true)?)
    } else {
        None
    };
    let monodromy_y = if grid.periodic_y {
        Some(monodromy(&wrapping, &main, false)?)
    } else {
        None
    };
    Ok(ExtendedFrameField {
        frames: Field::new(cover, main)?,
        lambda: cf.lambda,
        base_node,
        path_dependence,
        monodromy_x,
        monodromy_y,
    })
}

/// A member of the associated family together with its extended frame.
#[derive(Clone, Debug)]
pub struct Deformation {
    pub analysis: Analysis,
    pub frame: ExtendedFrameField,
    /// Nodes where `F_λ e₄` is not future-pointing.
    pub past_pointing_nodes: usize,
}

/// Base frame for integration: the adapted frame at `base_node` when the
/// data carries an immersion, the identity otherwise.
pub fn default_base_frame(data: &SurfaceData, base_node: usize) -> Result<GroupElement> {
    match (&data.f, &data.n) {
        (Some(_), Some(_)) => Ok(*adapted_frame_of(data)?.at(base_node)),
        _ => Ok(GroupElement::identity()),
    }
}

fn surface_from_frames(frames: &Field<GroupElement>, euler_char: Option<i32>) -> Result<(ConformalImmersion, usize)> {
    let f = frames.map(|g| g.column(1));
    let past = frames.values().iter().filter(|g| !(g.column(4)[3] > 0.0)).count();
    Ok((ConformalImmersion::new(f)?.with_euler_char(euler_char), past))
}

/// `f_λ = F_λ e₁` for CMC data, re-analyzed.
pub fn associated_family(data: &SurfaceData, lambda: Complex<f64>, base_node: Option<usize>) -> Result<Deformation> {
    check_lambda(lambda)?;
    let cmc = cmc_check(data)?;
    if !cmc.is_cmc {
        return Err(Error::NotCmc {
            spread: cmc.spread,
            tolerance: cmc.tolerance,
        });
    }
    let base = base_node.unwrap_or_else(|| data.grid().center());
    let cf = lambda_connection(&analytic_connection_of(data)?, lambda)?;
    let frame = integrate_frame(&cf, base, default_base_frame(data, base)?)?;
    let (imm, past_pointing_nodes) = surface_from_frames(&frame.frames, None)?;
    Ok(Deformation {
        analysis: analyze(&imm)?,
        frame,
        past_pointing_nodes,
    })
}

/// Interior deviations of a deformed surface from the predicted invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyReport {
    pub lambda: Complex<f64>,
    pub h_dev: f64,
    pub xi_dev: f64,
    pub u_dev: f64,
    pub k_dev: f64,
}

/// Compares `(H_λ, ξ_λ, u_λ, K_λ)` with `(H, λ⁻²ξ, u, K)`.
pub fn verify_family(original: &SurfaceData, deformed: &Analysis, lambda: Complex<f64>) -> Result<FamilyReport> {
    let g0 = original.grid();
    let g1 = deformed.data.grid();
    if g0.nx != g1.nx || g0.ny != g1.ny {
        return Err(Error::GridMismatch);
    }
    let l2 = lambda.powi(-2);
    let k0 = crate::surface::gaussian_curvature(&original.u);
    // the deformed chart is open, so use its interior for both
    let nodes = g1.interior(residual_margin(g1));
    let d = &deformed.data;
    let mut r = FamilyReport {
        lambda,
        h_dev: 0.0,
        xi_dev: 0.0,
        u_dev: 0.0,
        k_dev: 0.0,
    };
    for k in nodes {
        r.h_dev = r.h_dev.max((d.h.at(k) - original.h.at(k)).abs());
        r.xi_dev = r.xi_dev.max((d.xi.at(k) - original.xi.at(k) * l2).norm());
        r.u_dev = r.u_dev.max((d.u.at(k) - original.u.at(k)).abs());
        r.k_dev = r.k_dev.max((deformed.k.at(k) - k0.at(k)).abs());
    }
    Ok(r)
}

/// Largest interior Gauss and Codazzi residuals of `(u, H, ξ)`.
pub fn consistency(data: &SurfaceData) -> Result<(f64, f64)> {
    let g = gauss_residual(&data.u, &data.h, &data.xi)?;
    let c = codazzi_residual(&data.u, &data.h, &data.xi)?;
    Ok((
        interior_max(&g, residual_margin(data.grid()), |v| v.abs()),
        interior_max(&c, residual_margin(data.grid()), |v| v.norm()),
    ))
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub immersion: ConformalImmersion,
    pub frame: ExtendedFrameField,
}

/// Integrates the connection of consistent `(u, H, ξ)` at `λ = 1` and
/// returns `f = F e₁`. Data whose Gauss or Codazzi residual exceeds
/// `threshold` is rejected.
pub fn reconstruct_surface(
    data: &SurfaceData,
    base_node: usize,
    base_frame: GroupElement,
    threshold: f64,
) -> Result<Reconstruction> {
    let (gauss, codazzi) = consistency(data)?;
    if !(gauss <= threshold && codazzi <= threshold) {
        return Err(Error::Inconsistent {
            gauss,
            codazzi,
            threshold,
        });
    }
    let cf = analytic_connection_of(data)?;
    let frame = integrate_frame(&cf, base_node, base_frame)?;
    let (immersion, _) = surface_from_frames(&frame.frames, data.euler_char)?;
    Ok(Reconstruction { immersion, frame })
}

/// Frobenius deviation of a connection from `A + B` being real so(3,1).
pub fn real_part_defect(cf: &ConnectionForm) -> f64 {
    let i = i31();
    cf.a.values()
        .iter()
        .zip(cf.b.values())
        .map(|(a, b)| {
            let s = a + b;
            let im = s.map(|c| c.im).norm();
            let re = s.map(|c| c.re);
            im + (re.transpose() * i + i * re).norm()
        })
        .fold(0.0, f64::max)
}
