//! Conformal spacelike immersions `f: M → S³₁` and their invariants.
//!
//! Conventions: `e^{2u} = ⟨f_z, f_z̄⟩ᶜ`, so the induced metric is
//! `g = 2e^{2u}(dx² + dy²)` and the area element is `dA = 2e^{2u} dx dy`.
//! The normal `n` is the future-pointing unit timelike normal, and
//!
//! ```text
//!     H = −e^{−2u} ⟨f_z̄z, n⟩        ξ = −⟨f_zz, n⟩ᶜ        K = −2e^{−2u} u_z̄z
//! ```

use nalgebra::{Complex, Matrix3, Vector4};
use std::f64::consts::PI;

use crate::chart::{d_dz, d_dzbar, d_zz, d_zzbar, interior_max, interior_stats, ChartGrid, Field, Stats};
use crate::error::{Error, Result};
use crate::lorentz::{complex_bilinear, i31, minkowski_inner, ComplexVector, MinkowskiVector};

/// Cartesian stereographic chart `z = x + iy`.
pub const STEREO_CHART: &str = "stereo";
/// Logarithmic stereographic chart `z = e^{x+iy}`, periodic in `y`.
pub const STEREO_LOG_CHART: &str = "stereo-log";
pub const CYLINDER_CHART: &str = "cylinder";

/// Nodes trimmed from each open edge before residual statistics are taken.
///
/// Analyzed `u` carries a one-sided stencil error on node 0. A derivative of
/// a derivative of it (the connection, its curvature, a reconstructed surface
/// re-analyzed) reaches node 2.
pub const RESIDUAL_MARGIN: usize = 3;

/// [`RESIDUAL_MARGIN`] scaled by the stencil half-width of `grid`.
pub fn residual_margin(grid: &ChartGrid) -> usize {
    RESIDUAL_MARGIN * grid.stencil.half_width()
}

/// Tolerance on `|⟨f,f⟩ − 1| / max(1, |f|²)` for points of de Sitter space.
/// The Euclidean scale accounts for cancellation on far-out boosted points.
pub const DESITTER_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ConformalImmersion {
    f: Field<MinkowskiVector>,
    euler_char: Option<i32>,
}

impl ConformalImmersion {
    pub fn new(f: Field<MinkowskiVector>) -> Result<Self> {
        for (node, p) in f.values().iter().enumerate() {
            let defect = minkowski_inner(p, p) - 1.0;
            if !(defect.abs() < DESITTER_TOL * p.norm_squared().max(1.0)) {
                return Err(Error::NotOnDeSitter { node, defect });
            }
        }
        Ok(Self { f, euler_char: None })
    }

    /// Marks the chart as covering (up to a small tail) a closed surface.
    pub fn with_euler_char(mut self, chi: Option<i32>) -> Self {
        self.euler_char = chi;
        self
    }

    pub fn grid(&self) -> &ChartGrid {
        self.f.grid()
    }

    pub fn f(&self) -> &Field<MinkowskiVector> {
        &self.f
    }

    pub fn euler_char(&self) -> Option<i32> {
        self.euler_char
    }
}

/// The data `(u, H, ξ)` with optional immersion and normal.
#[derive(Clone, Debug)]
pub struct SurfaceData {
    pub u: Field<f64>,
    pub h: Field<f64>,
    pub xi: Field<Complex<f64>>,
    pub f: Option<Field<MinkowskiVector>>,
    pub n: Option<Field<MinkowskiVector>>,
    pub euler_char: Option<i32>,
    /// Set by [`perturb_h`]; such data deliberately violates Codazzi.
    pub perturbed: bool,
}

impl SurfaceData {
    pub fn from_invariants(u: Field<f64>, h: Field<f64>, xi: Field<Complex<f64>>) -> Result<Self> {
        crate::chart::check_same_grid(&u, &h)?;
        crate::chart::check_same_grid(&u, &xi)?;
        Ok(Self {
            u,
            h,
            xi,
            f: None,
            n: None,
            euler_char: None,
            perturbed: false,
        })
    }

    /// Constant `(u, H, ξ)` on a grid.
    pub fn constant(grid: &ChartGrid, u: f64, h: f64, xi: Complex<f64>) -> Self {
        Self {
            u: Field::constant(grid.clone(), u),
            h: Field::constant(grid.clone(), h),
            xi: Field::constant(grid.clone(), xi),
            f: None,
            n: None,
            euler_char: None,
            perturbed: false,
        }
    }

    pub fn grid(&self) -> &ChartGrid {
        self.u.grid()
    }
}

fn d_vectors(f: &Field<MinkowskiVector>) -> (Field<ComplexVector>, Field<ComplexVector>, Field<MinkowskiVector>) {
    (d_dz(f), d_zz(f), d_zzbar(f))
}

fn pair(a: &ComplexVector, b: &ComplexVector) -> Complex<f64> {
    complex_bilinear(a, b)
}

fn conj_v(a: &ComplexVector) -> ComplexVector {
    a.map(|c| c.conj())
}

fn real_to_complex(v: &MinkowskiVector) -> ComplexVector {
    v.map(|x| Complex::new(x, 0.0))
}

/// `|⟨f_z, f_z⟩ᶜ|` per node.
pub fn conformality_residual(imm: &ConformalImmersion) -> Field<f64> {
    d_dz(&imm.f).map(|fz| pair(fz, fz).norm())
}

fn conformal_factor_from(f_z: &Field<ComplexVector>) -> Result<Field<f64>> {
    let g = f_z.map(|fz| pair(fz, &conj_v(fz)));
    for (node, v) in g.values().iter().enumerate() {
        if !(v.re > 1e-12) {
            return Err(Error::NotImmersion {
                node,
                reason: format!("<f_z, f_zbar> = {:e} is not positive", v.re),
            });
        }
        if v.im.abs() > 1e-8 {
            return Err(Error::NotImmersion {
                node,
                reason: format!("<f_z, f_zbar> has imaginary part {:e}", v.im),
            });
        }
    }
    Ok(g.map(|v| 0.5 * v.re.ln()))
}

/// `u = ½ log ⟨f_z, f_z̄⟩ᶜ`.
pub fn conformal_factor(imm: &ConformalImmersion) -> Result<Field<f64>> {
    conformal_factor_from(&d_dz(&imm.f))
}

/// Euclidean generalized cross product: `N·a = N·b = N·c = 0`.
fn cross3(a: &MinkowskiVector, b: &MinkowskiVector, c: &MinkowskiVector) -> MinkowskiVector {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&k| k != skip).collect();
        Matrix3::from_fn(|r, s| {
            let v = [a, b, c][r];
            v[cols[s]]
        })
        .determinant()
    };
    Vector4::new(minor(0), -minor(1), minor(2), -minor(3))
}

/// Future unit timelike normal from `f`, `f_x`, `f_y` at one node.
pub fn normal_at(
    node: usize,
    f: &MinkowskiVector,
    fx: &MinkowskiVector,
    fy: &MinkowskiVector,
) -> Result<MinkowskiVector> {
    let raw = cross3(f, fx, fy);
    let scale = f.norm() * fx.norm() * fy.norm();
    if !(raw.norm() > 1e-12 * scale) {
        return Err(Error::NotImmersion {
            node,
            reason: "f, f_x, f_y are linearly dependent".into(),
        });
    }
    // lower the index so that ⟨n, ·⟩ reproduces the Euclidean orthogonality
    let n = i31() * raw;
    let nn = minkowski_inner(&n, &n);
    if !(nn < 0.0) {
        return Err(Error::NotImmersion {
            node,
            reason: format!("normal is not timelike (<n,n> = {nn:e}); surface is not spacelike"),
        });
    }
    let n = n / (-nn).sqrt();
    Ok(if n[3] < 0.0 { -n } else { n })
}

fn unit_normal_from(f: &Field<MinkowskiVector>, f_z: &Field<ComplexVector>) -> Result<Field<MinkowskiVector>> {
    // f_x = 2 Re f_z, f_y = −2 Im f_z
    let results: Vec<Result<MinkowskiVector>> = (0..f.len())
        .map(|k| {
            let fz = f_z.at(k);
            let fx = fz.map(|c| 2.0 * c.re);
            let fy = fz.map(|c| -2.0 * c.im);
            normal_at(k, f.at(k), &fx, &fy)
        })
        .collect();
    let values = results.into_iter().collect::<Result<Vec<_>>>()?;
    Field::new(f.grid().clone(), values)
}

/// Unique `n` with `⟨n,f⟩ = ⟨n,f_x⟩ = ⟨n,f_y⟩ = 0`, `⟨n,n⟩ = −1`, `n₄ > 0`.
pub fn unit_normal(imm: &ConformalImmersion) -> Result<Field<MinkowskiVector>> {
    unit_normal_from(&imm.f, &d_dz(&imm.f))
}

fn mean_curvature_from(
    f_zzbar: &Field<MinkowskiVector>,
    n: &Field<MinkowskiVector>,
    u: &Field<f64>,
) -> Result<Field<f64>> {
    let fn_ = f_zzbar.zip_map(n, minkowski_inner)?;
    fn_.zip_map(u, |p, u| -(-2.0 * u).exp() * p)
}

/// `H = −e^{−2u} ⟨f_z̄z, n⟩`.
pub fn mean_curvature(imm: &ConformalImmersion, n: &Field<MinkowskiVector>, u: &Field<f64>) -> Result<Field<f64>> {
    mean_curvature_from(&d_zzbar(&imm.f), n, u)
}

fn hopf_xi_from(f_zz: &Field<ComplexVector>, n: &Field<MinkowskiVector>) -> Result<Field<Complex<f64>>> {
    f_zz.zip_map(n, |a, b| -pair(a, &real_to_complex(b)))
}

/// `ξ = −⟨f_zz, n⟩ᶜ`.
pub fn hopf_xi(imm: &ConformalImmersion, n: &Field<MinkowskiVector>) -> Result<Field<Complex<f64>>> {
    hopf_xi_from(&d_zz(&imm.f), n)
}

/// `K = −2e^{−2u} u_z̄z`.
pub fn gaussian_curvature(u: &Field<f64>) -> Field<f64> {
    let lap = d_zzbar(u);
    lap.zip_map(u, |l, u| -2.0 * (-2.0 * u).exp() * l).expect("same grid")
}

/// `2u_z̄z − (H²−1)e^{2u} + |ξ|²e^{−2u}`.
pub fn gauss_residual(u: &Field<f64>, h: &Field<f64>, xi: &Field<Complex<f64>>) -> Result<Field<f64>> {
    crate::chart::check_same_grid(u, h)?;
    crate::chart::check_same_grid(u, xi)?;
    let lap = d_zzbar(u);
    Ok(Field::from_index_fn(u.grid().clone(), |k| {
        let uu = *u.at(k);
        let hh = *h.at(k);
        2.0 * lap.at(k) - (hh * hh - 1.0) * (2.0 * uu).exp() + xi.at(k).norm_sqr() * (-2.0 * uu).exp()
    }))
}

/// `ξ_z̄ − e^{2u} H_z`.
pub fn codazzi_residual(u: &Field<f64>, h: &Field<f64>, xi: &Field<Complex<f64>>) -> Result<Field<Complex<f64>>> {
    crate::chart::check_same_grid(u, h)?;
    crate::chart::check_same_grid(u, xi)?;
    let xi_zb = d_dzbar(xi);
    let h_z = d_dz(h);
    Ok(Field::from_index_fn(u.grid().clone(), |k| {
        xi_zb.at(k) - h_z.at(k) * (2.0 * u.at(k)).exp()
    }))
}

/// `K − (1 − H² + |ξ|²e^{−4u})`.
pub fn gauss_identity_residual(
    k: &Field<f64>,
    h: &Field<f64>,
    xi: &Field<Complex<f64>>,
    u: &Field<f64>,
) -> Result<Field<f64>> {
    crate::chart::check_same_grid(k, h)?;
    crate::chart::check_same_grid(k, xi)?;
    crate::chart::check_same_grid(k, u)?;
    Ok(Field::from_index_fn(k.grid().clone(), |i| {
        let hh = *h.at(i);
        k.at(i) - (1.0 - hh * hh + xi.at(i).norm_sqr() * (-4.0 * u.at(i)).exp())
    }))
}

/// `|ξ|²e^{−4u} = ¼(λ₁ − λ₂)²`.
pub fn principal_gap(u: &Field<f64>, xi: &Field<Complex<f64>>) -> Result<Field<f64>> {
    u.zip_map(xi, |u, x| x.norm_sqr() * (-4.0 * u).exp())
}

/// `‖f_z̄z + e^{2u} f − e^{2u} H n‖` (Euclidean norm of the 4-vector).
pub fn structure_defect(
    f: &Field<MinkowskiVector>,
    u: &Field<f64>,
    h: &Field<f64>,
    n: &Field<MinkowskiVector>,
) -> Result<Field<f64>> {
    crate::chart::check_same_grid(f, u)?;
    crate::chart::check_same_grid(f, h)?;
    crate::chart::check_same_grid(f, n)?;
    let lap = d_zzbar(f);
    Ok(Field::from_index_fn(f.grid().clone(), |k| {
        let e = (2.0 * u.at(k)).exp();
        (lap.at(k) + f.at(k) * e - n.at(k) * (e * h.at(k))).norm()
    }))
}

/// Normal recovered from the Hopf coefficient, `(f_zz − 2u_z f_z)/ξ`.
///
/// Only meaningful away from umbilic points; nodes with `|ξ| < min_xi` get
/// `None`.
pub fn normal_from_hopf(
    f: &Field<MinkowskiVector>,
    u: &Field<f64>,
    xi: &Field<Complex<f64>>,
    min_xi: f64,
) -> Result<Field<Option<ComplexVector>>> {
    crate::chart::check_same_grid(f, u)?;
    crate::chart::check_same_grid(f, xi)?;
    let f_z = d_dz(f);
    let f_zz = d_zz(f);
    let u_z = d_dz(u);
    Ok(Field::from_index_fn(f.grid().clone(), |k| {
        let x = *xi.at(k);
        if x.norm() < min_xi {
            None
        } else {
            let v = f_zz.at(k) - f_z.at(k) * (u_z.at(k) * 2.0);
            Some(v.map(|c| c / x))
        }
    }))
}

/// Whether `H` is constant up to discretization noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmcCheck {
    pub spread: f64,
    pub tolerance: f64,
    pub is_cmc: bool,
}

/// Relative floor for the constancy tolerance of `H`.
pub const CMC_FLOOR: f64 = 1e-9;

/// `max H − min H` over the interior against
/// `max(10·median|Codazzi residual|, CMC_FLOOR·max(1, max|H|))`.
/// Data flagged as perturbed is never CMC.
pub fn cmc_check(data: &SurfaceData) -> Result<CmcCheck> {
    let grid = data.grid();
    let nodes = grid.interior(residual_margin(grid));
    let (mut lo, mut hi, mut amp) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &k in &nodes {
        let v = *data.h.at(k);
        lo = lo.min(v);
        hi = hi.max(v);
        amp = amp.max(v.abs());
    }
    let spread = if nodes.is_empty() { 0.0 } else { hi - lo };
    let cod = codazzi_residual(&data.u, &data.h, &data.xi)?;
    let mut mags: Vec<f64> = nodes.iter().map(|&k| cod.at(k).norm()).collect();
    mags.sort_by(|a, b| a.total_cmp(b));
    let median = if mags.is_empty() { 0.0 } else { mags[mags.len() / 2] };
    let tolerance = (10.0 * median).max(CMC_FLOOR * amp.max(1.0));
    Ok(CmcCheck {
        spread,
        tolerance,
        is_cmc: !data.perturbed && spread < tolerance,
    })
}

/// Residual fields evaluated by [`analyze`].
#[derive(Clone, Debug)]
pub struct Residuals {
    pub conformality: Field<f64>,
    pub gauss: Field<f64>,
    pub codazzi: Field<Complex<f64>>,
    pub structure: Field<f64>,
    pub gauss_identity: Field<f64>,
}

/// Interior statistics of [`Residuals`].
#[derive(Clone, Copy, Debug)]
pub struct ResidualSummary {
    pub conformality: Stats,
    pub gauss: Stats,
    pub codazzi: Stats,
    pub structure: Stats,
    pub gauss_identity: Stats,
    /// Largest violation of the four normal constraints over all nodes.
    pub normal_constraints: f64,
    pub cmc: CmcCheck,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub data: SurfaceData,
    pub k: Field<f64>,
    pub residuals: Residuals,
    pub summary: ResidualSummary,
}

impl Residuals {
    pub fn summarize(&self, margin: usize) -> (Stats, Stats, Stats, Stats, Stats) {
        (
            interior_stats(&self.conformality, margin, |v| *v),
            interior_stats(&self.gauss, margin, |v| v.abs()),
            interior_stats(&self.codazzi, margin, |v| v.norm()),
            interior_stats(&self.structure, margin, |v| *v),
            interior_stats(&self.gauss_identity, margin, |v| v.abs()),
        )
    }
}

fn normal_constraint_defect(f: &Field<MinkowskiVector>, n: &Field<MinkowskiVector>, f_z: &Field<ComplexVector>) -> f64 {
    (0..f.len())
        .map(|k| {
            let nk = n.at(k);
            let fz = f_z.at(k);
            let fx = fz.map(|c| 2.0 * c.re);
            let fy = fz.map(|c| -2.0 * c.im);
            let scale = fx.norm().max(fy.norm()).max(1.0);
            let a = minkowski_inner(nk, f.at(k)).abs();
            let b = minkowski_inner(nk, &fx).abs() / scale;
            let c = minkowski_inner(nk, &fy).abs() / scale;
            let d = (minkowski_inner(nk, nk) + 1.0).abs();
            a.max(b).max(c).max(d)
        })
        .fold(0.0, f64::max)
}

/// Computes `(u, n, H, ξ, K)` and every structure-equation residual.
pub fn analyze(imm: &ConformalImmersion) -> Result<Analysis> {
    let f = &imm.f;
    let (f_z, f_zz, f_zzbar) = d_vectors(f);
    let u = conformal_factor_from(&f_z)?;
    let n = unit_normal_from(f, &f_z)?;
    let h = mean_curvature_from(&f_zzbar, &n, &u)?;
    let xi = hopf_xi_from(&f_zz, &n)?;
    let k = gaussian_curvature(&u);
    let conformality = f_z.map(|fz| pair(fz, fz).norm());
    let residuals = Residuals {
        conformality,
        gauss: gauss_residual(&u, &h, &xi)?,
        codazzi: codazzi_residual(&u, &h, &xi)?,
        structure: structure_defect(f, &u, &h, &n)?,
        gauss_identity: gauss_identity_residual(&k, &h, &xi, &u)?,
    };
    let normal_constraints = normal_constraint_defect(f, &n, &f_z);
    let data = SurfaceData {
        u,
        h,
        xi,
        f: Some(f.clone()),
        n: Some(n),
        euler_char: imm.euler_char,
        perturbed: false,
    };
    let cmc = cmc_check(&data)?;
    let (conformality, gauss, codazzi, structure, gauss_identity) = residuals.summarize(residual_margin(f.grid()));
    Ok(Analysis {
        data,
        k,
        residuals,
        summary: ResidualSummary {
            conformality,
            gauss,
            codazzi,
            structure,
            gauss_identity,
            normal_constraints,
            cmc,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbMode {
    /// `H + ε`
    Constant,
    /// `H + ε sin x`
    SinX,
    /// `H + ε sin y`
    SinY,
}

/// Replaces `H` by `H + ε·mode`, leaving `u` and `ξ`. The result is flagged
/// as perturbed and carries no immersion.
pub fn perturb_h(data: &SurfaceData, eps: f64, mode: PerturbMode) -> SurfaceData {
    if eps == 0.0 {
        return data.clone();
    }
    let grid = data.grid().clone();
    let h = Field::from_index_fn(grid.clone(), |k| {
        let (x, y) = grid.point(k);
        let bump = match mode {
            PerturbMode::Constant => 1.0,
            PerturbMode::SinX => x.sin(),
            PerturbMode::SinY => y.sin(),
        };
        data.h.at(k) + eps * bump
    });
    SurfaceData {
        u: data.u.clone(),
        h,
        xi: data.xi.clone(),
        f: None,
        n: None,
        euler_char: data.euler_char,
        perturbed: true,
    }
}

/// The two closed-form test surfaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Generator {
    /// Totally umbilic sphere `(√(1+c²)·σ(z), c)` with `H = c/√(1+c²)`.
    UmbilicSphere { c: f64 },
    /// `(r cos(x/r), r sin(x/r), ρ sinh(y/ρ), ρ cosh(y/ρ))`, `r = √(1+ρ²)`.
    HyperbolicCylinder { rho: f64 },
}

/// Inverse stereographic projection onto the unit 2-sphere.
pub fn sigma(x: f64, y: f64) -> [f64; 3] {
    let r2 = x * x + y * y;
    let d = 1.0 + r2;
    [2.0 * x / d, 2.0 * y / d, (1.0 - r2) / d]
}

impl Generator {
    pub fn mean_curvature(&self) -> f64 {
        match *self {
            Generator::UmbilicSphere { c } => c / (1.0 + c * c).sqrt(),
            Generator::HyperbolicCylinder { rho } => {
                let r = (1.0 + rho * rho).sqrt();
                0.5 * (rho / r + r / rho)
            }
        }
    }

    /// Hopf coefficient in the generator's own chart.
    pub fn hopf_xi(&self) -> Complex<f64> {
        match *self {
            Generator::UmbilicSphere { .. } => Complex::new(0.0, 0.0),
            Generator::HyperbolicCylinder { rho } => {
                let r = (1.0 + rho * rho).sqrt();
                Complex::new(0.25 * (rho / r - r / rho), 0.0)
            }
        }
    }

    pub fn gaussian_curvature(&self) -> f64 {
        match *self {
            Generator::UmbilicSphere { c } => 1.0 / (1.0 + c * c),
            Generator::HyperbolicCylinder { .. } => 0.0,
        }
    }

    pub fn euler_char(&self) -> Option<i32> {
        match self {
            Generator::UmbilicSphere { .. } => Some(2),
            Generator::HyperbolicCylinder { .. } => None,
        }
    }

    fn validate(&self, grid: &ChartGrid) -> Result<()> {
        match *self {
            Generator::UmbilicSphere { c } => {
                if !c.is_finite() {
                    return Err(Error::InvalidArgument(format!("sphere parameter c = {c}")));
                }
                if grid.chart_id == STEREO_LOG_CHART {
                    let period = grid.ny as f64 * grid.hy;
                    if grid.periodic_x || !grid.periodic_y || (period - 2.0 * PI).abs() > 1e-9 {
                        return Err(Error::InvalidGrid(
                            "logarithmic sphere chart must be open in x and 2π-periodic in y".into(),
                        ));
                    }
                } else if grid.periodic_x || grid.periodic_y {
                    return Err(Error::InvalidGrid("stereographic chart must be open".into()));
                }
            }
            Generator::HyperbolicCylinder { rho } => {
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(Error::InvalidArgument(format!("cylinder needs rho > 0, got {rho}")));
                }
                let r = (1.0 + rho * rho).sqrt();
                if grid.periodic_y {
                    return Err(Error::InvalidGrid("cylinder chart must be open in y".into()));
                }
                if grid.periodic_x && (grid.nx as f64 * grid.hx - 2.0 * PI * r).abs() > 1e-9 * r {
                    return Err(Error::InvalidGrid(format!(
                        "periodic cylinder chart needs period 2πr = {}",
                        2.0 * PI * r
                    )));
                }
            }
        }
        Ok(())
    }

    /// Point of the immersion at chart coordinates `(x, y)`.
    pub fn point(&self, chart_id: &str, x: f64, y: f64) -> MinkowskiVector {
        match *self {
            Generator::UmbilicSphere { c } => {
                let (zx, zy) = if chart_id == STEREO_LOG_CHART {
                    let r = x.exp();
                    (r * y.cos(), r * y.sin())
                } else {
                    (x, y)
                };
                let s = sigma(zx, zy);
                let a = (1.0 + c * c).sqrt();
                Vector4::new(a * s[0], a * s[1], a * s[2], c)
            }
            Generator::HyperbolicCylinder { rho } => {
                let r = (1.0 + rho * rho).sqrt();
                Vector4::new(
                    r * (x / r).cos(),
                    r * (x / r).sin(),
                    rho * (y / rho).sinh(),
                    rho * (y / rho).cosh(),
                )
            }
        }
    }

    /// Closed-form future normal at chart coordinates `(x, y)`.
    pub fn normal(&self, chart_id: &str, x: f64, y: f64) -> MinkowskiVector {
        match *self {
            Generator::UmbilicSphere { c } => {
                let (zx, zy) = if chart_id == STEREO_LOG_CHART {
                    let r = x.exp();
                    (r * y.cos(), r * y.sin())
                } else {
                    (x, y)
                };
                let s = sigma(zx, zy);
                Vector4::new(c * s[0], c * s[1], c * s[2], (1.0 + c * c).sqrt())
            }
            Generator::HyperbolicCylinder { rho } => {
                let r = (1.0 + rho * rho).sqrt();
                Vector4::new(
                    rho * (x / r).cos(),
                    rho * (x / r).sin(),
                    r * (y / rho).sinh(),
                    r * (y / rho).cosh(),
                )
            }
        }
    }

    /// Closed-form conformal factor at chart coordinates `(x, y)`.
    pub fn conformal_factor(&self, chart_id: &str, x: f64, y: f64) -> f64 {
        match *self {
            Generator::UmbilicSphere { c } => {
                let a2 = 1.0 + c * c;
                if chart_id == STEREO_LOG_CHART {
                    // e^{2u} = (1+c²)/(2cosh²x)
                    0.5 * (a2 / 2.0).ln() - x.cosh().ln()
                } else {
                    let r2 = x * x + y * y;
                    0.5 * (2.0 * a2).ln() - (1.0 + r2).ln()
                }
            }
            Generator::HyperbolicCylinder { .. } => 0.5 * 0.5f64.ln(),
        }
    }

    pub fn immersion(&self, grid: &ChartGrid) -> Result<ConformalImmersion> {
        self.validate(grid)?;
        let id = grid.chart_id.clone();
        let f = Field::from_fn(grid.clone(), |x, y| self.point(&id, x, y));
        Ok(ConformalImmersion::new(f)?.with_euler_char(self.euler_char()))
    }

    /// Closed-form `(u, H, ξ, f, n)` on the grid.
    pub fn exact(&self, grid: &ChartGrid) -> Result<SurfaceData> {
        let imm = self.immersion(grid)?;
        let id = grid.chart_id.clone();
        Ok(SurfaceData {
            u: Field::from_fn(grid.clone(), |x, y| self.conformal_factor(&id, x, y)),
            h: Field::constant(grid.clone(), self.mean_curvature()),
            xi: Field::constant(grid.clone(), self.hopf_xi()),
            f: Some(imm.f),
            n: Some(Field::from_fn(grid.clone(), |x, y| self.normal(&id, x, y))),
            euler_char: self.euler_char(),
            perturbed: false,
        })
    }
}

pub fn gen_umbilic_sphere(c: f64, grid: &ChartGrid) -> Result<ConformalImmersion> {
    Generator::UmbilicSphere { c }.immersion(grid)
}

pub fn gen_hyperbolic_cylinder(rho: f64, grid: &ChartGrid) -> Result<ConformalImmersion> {
    Generator::HyperbolicCylinder { rho }.immersion(grid)
}

/// Open Cartesian stereographic grid on `[−half_width, half_width]²`.
pub fn stereo_grid(n: usize, half_width: f64) -> Result<ChartGrid> {
    Ok(ChartGrid::open_rect(n, n, (-half_width, half_width), (-half_width, half_width))?.with_chart_id(STEREO_CHART))
}

/// Logarithmic stereographic grid covering `1/radius ≤ |z| ≤ radius`.
pub fn stereo_log_grid(nx: usize, ny: usize, radius: f64) -> Result<ChartGrid> {
    if !(radius > 1.0) {
        return Err(Error::InvalidGrid(format!("radius must exceed 1, got {radius}")));
    }
    let s = radius.ln();
    let hx = 2.0 * s / (nx.max(2) - 1) as f64;
    let hy = 2.0 * PI / ny as f64;
    Ok(ChartGrid::new(nx, ny, hx, hy, -s, 0.0, false, true)?.with_chart_id(STEREO_LOG_CHART))
}

/// Area of the unit-curvature sphere of radius `√(1+c²)` missing from the
/// stereographic chart of the given radius (both caps for the log chart).
pub fn omitted_cap_area(c: f64, chart_id: &str, radius: f64) -> f64 {
    let full = 4.0 * PI * (1.0 + c * c);
    let caps = if chart_id == STEREO_LOG_CHART { 2.0 } else { 1.0 };
    caps * full / (1.0 + radius * radius)
}

/// Cylinder chart periodic in `x` (period `2πr`), `y ∈ [y_min, y_max]`.
pub fn cylinder_grid(rho: f64, nx: usize, ny: usize, y_range: (f64, f64)) -> Result<ChartGrid> {
    let r = (1.0 + rho * rho).sqrt();
    let hx = 2.0 * PI * r / nx as f64;
    let hy = (y_range.1 - y_range.0) / (ny.max(2) - 1) as f64;
    Ok(ChartGrid::new(nx, ny, hx, hy, 0.0, y_range.0, true, false)?.with_chart_id(CYLINDER_CHART))
}

/// Open cylinder strip `[x_min, x_max] × [y_min, y_max]` with spacing `h`.
pub fn cylinder_strip(h: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Result<ChartGrid> {
    let nx = ((x_range.1 - x_range.0) / h).round() as usize + 1;
    let ny = ((y_range.1 - y_range.0) / h).round() as usize + 1;
    Ok(ChartGrid::new(nx, ny, h, h, x_range.0, y_range.0, false, false)?.with_chart_id(CYLINDER_CHART))
}

/// Largest interior value of `|a − b|` for scalar fields.
pub fn max_deviation(a: &Field<f64>, b: &Field<f64>, margin: usize) -> Result<f64> {
    let d = a.zip_map(b, |p, q| (p - q).abs())?;
    Ok(interior_max(&d, margin, |v| *v))
}
