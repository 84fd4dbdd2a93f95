//! Twistor and Willmore energies and the Gauss equation solver.
//!
//! The energy density of the lift is `½‖df̂‖² = 1 − H² − e^{−4u}|ξ|²` and the
//! energies are integrated against `dA = 2e^{2u} dx dy`. Pointwise,
//! `E-density + 2(K + H² − 1) = K` is the Gauss equation, which integrates
//! to `2W = 2πχ − E` on closed surfaces.
//!
//! Integrals skip [`residual_margin`] nodes on open edges, where `K` carries
//! the one-sided stencil error of `u` amplified by `e^{−2u}`.

use nalgebra::Complex;
use rayon::prelude::*;

use crate::chart::{check_same_grid, integrate, interior_max, pairwise_sum, ChartGrid, Field};
use crate::error::{Error, Result};
use crate::frames::{analytic_connection_of, frobenius, harmonicity_residual, reconstruct_surface, Reconstruction};
use crate::lorentz::GroupElement;
use crate::surface::residual_margin;
use crate::surface::{analyze, gaussian_curvature, Analysis, SurfaceData};

/// `1 − H² − e^{−4u}|ξ|²` per node.
pub fn energy_density(u: &Field<f64>, h: &Field<f64>, xi: &Field<Complex<f64>>) -> Result<Field<f64>> {
    check_same_grid(u, h)?;
    check_same_grid(u, xi)?;
    Ok(Field::from_index_fn(u.grid().clone(), |k| {
        let hh = *h.at(k);
        1.0 - hh * hh - (-4.0 * u.at(k)).exp() * xi.at(k).norm_sqr()
    }))
}

/// Area density `2e^{2u}` with respect to `dx dy`.
pub fn area_weight(u: &Field<f64>) -> Field<f64> {
    u.map(|v| 2.0 * (2.0 * v).exp())
}

fn integrate_trimmed(f: &Field<f64>, weight: &Field<f64>) -> Result<f64> {
    let m = residual_margin(f.grid());
    integrate(&f.trimmed(m)?, &weight.trimmed(m)?)
}

/// `E = ∫ (1 − H² − e^{−4u}|ξ|²) dA` over the chart.
pub fn twistor_energy(data: &SurfaceData) -> Result<f64> {
    integrate_trimmed(&energy_density(&data.u, &data.h, &data.xi)?, &area_weight(&data.u))
}

/// `W = ∫ (K + H² − 1) dA` over the chart, with `K` from `u`.
pub fn willmore_energy(data: &SurfaceData) -> Result<f64> {
    let k = gaussian_curvature(&data.u);
    let integrand = k.zip_map(&data.h, |k, h| k + h * h - 1.0)?;
    integrate_trimmed(&integrand, &area_weight(&data.u))
}

/// `2(K + H² − 1) + (1 − H² − e^{−4u}|ξ|²) − K`.
pub fn pointwise_identity_residual(data: &SurfaceData, k: &Field<f64>) -> Result<Field<f64>> {
    let density = energy_density(&data.u, &data.h, &data.xi)?;
    check_same_grid(k, &density)?;
    Ok(Field::from_index_fn(k.grid().clone(), |i| {
        let hh = *data.h.at(i);
        2.0 * (k.at(i) + hh * hh - 1.0) + density.at(i) - k.at(i)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    pub twistor_energy: f64,
    pub willmore_energy: f64,
    /// `∫ K dA` over the chart.
    pub curvature_integral: f64,
    pub area: f64,
    /// `|E + 2W − ∫K dA|`.
    pub local_defect: f64,
    /// `|2W + E − 2πχ|` when `χ` is known.
    pub identity_defect: Option<f64>,
    pub density_min: f64,
    pub density_max: f64,
    pub euler_char_used: Option<i32>,
}

/// Energies of `data`; `chi` overrides the Euler characteristic carried by
/// the data.
pub fn energy_report(data: &SurfaceData, chi: Option<i32>) -> Result<EnergyReport> {
    let density = energy_density(&data.u, &data.h, &data.xi)?;
    let weight = area_weight(&data.u);
    let one = Field::constant(data.grid().clone(), 1.0);
    let k = gaussian_curvature(&data.u);
    let e = integrate_trimmed(&density, &weight)?;
    let w = willmore_energy(data)?;
    let kint = integrate_trimmed(&k, &weight)?;
    let nodes = data.grid().interior(residual_margin(data.grid()));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &n in &nodes {
        lo = lo.min(*density.at(n));
        hi = hi.max(*density.at(n));
    }
    let chi = chi.or(data.euler_char);
    Ok(EnergyReport {
        twistor_energy: e,
        willmore_energy: w,
        curvature_integral: kint,
        area: integrate_trimmed(&one, &weight)?,
        local_defect: (e + 2.0 * w - kint).abs(),
        identity_defect: chi.map(|c| (2.0 * w + e - 2.0 * std::f64::consts::PI * c as f64).abs()),
        density_min: lo,
        density_max: hi,
        euler_char_used: chi,
    })
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Convergence when `max |G(u)| < newton_tol`.
    pub newton_tol: f64,
    /// Initial Newton step length; halved until the residual decreases.
    pub damping: f64,
    /// Starting guess; zero when absent.
    pub initial_u: Option<Field<f64>>,
    pub linear_tol: f64,
    pub linear_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 30,
            newton_tol: 1e-10,
            damping: 1.0,
            initial_u: None,
            linear_tol: 1e-14,
            linear_max_iter: 5000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GaussSolution {
    pub u: Field<f64>,
    /// Newton steps taken.
    pub iterations: usize,
    /// `max |G|` at the start and after every step.
    pub history: Vec<f64>,
    /// `κ = |ξ|√(H²−1)` for constant data in the monotone regime.
    pub kappa: Option<f64>,
    /// `max |v_z̄z − 2κ sinh v| / (2κ)` with `v = 2u − log(|ξ|/√(H²−1))`.
    pub normalized_residual: Option<f64>,
    /// False when `H² ≤ 1` with `ξ ≠ 0` somewhere (Jacobian may be indefinite).
    pub monotone_regime: bool,
}

impl GaussSolution {
    /// Estimated convergence order from the last three residuals.
    pub fn observed_order(&self) -> Option<f64> {
        let r: Vec<f64> = self.history.iter().cloned().filter(|v| *v > 0.0).collect();
        if r.len() < 3 {
            return None;
        }
        let n = r.len();
        // skip the final iterate when it sits at rounding level
        let end = if r[n - 1] < 1e-13 && n >= 4 { n - 1 } else { n };
        let (a, b, c) = (r[end - 3], r[end - 2], r[end - 1]);
        Some((c / b).ln() / (b / a).ln())
    }
}

/// Five-point Laplacian with periodic wrap; open-edge nodes are Dirichlet.
struct Operator<'a> {
    grid: &'a ChartGrid,
    unknown: Vec<bool>,
}

impl<'a> Operator<'a> {
    fn new(grid: &'a ChartGrid) -> Self {
        let unknown = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.coords(k);
                let open_x = !grid.periodic_x && (i == 0 || i + 1 == grid.nx);
                let open_y = !grid.periodic_y && (j == 0 || j + 1 == grid.ny);
                !(open_x || open_y)
            })
            .collect();
        Self { grid, unknown }
    }

    fn laplacian_at(&self, v: &[f64], k: usize) -> f64 {
        let g = self.grid;
        let (i, j) = g.coords(k);
        let wrap = |a: usize, d: isize, n: usize| ((a as isize + d).rem_euclid(n as isize)) as usize;
        let c = v[k];
        let e = v[g.index(wrap(i, 1, g.nx), j)];
        let w = v[g.index(wrap(i, -1, g.nx), j)];
        let n = v[g.index(i, wrap(j, 1, g.ny))];
        let s = v[g.index(i, wrap(j, -1, g.ny))];
        (e + w - 2.0 * c) / (g.hx * g.hx) + (n + s - 2.0 * c) / (g.hy * g.hy)
    }

    fn residual(&self, u: &[f64], h: &[f64], xi2: &[f64]) -> Vec<f64> {
        (0..u.len())
            .into_par_iter()
            .map(|k| {
                if !self.unknown[k] {
                    return 0.0;
                }
                0.5 * self.laplacian_at(u, k) - (h[k] * h[k] - 1.0) * (2.0 * u[k]).exp() + xi2[k] * (-2.0 * u[k]).exp()
            })
            .collect()
    }

    /// `M δ = −½Δδ + c δ`, the negated Jacobian.
    fn apply(&self, c: &[f64], d: &[f64]) -> Vec<f64> {
        (0..d.len())
            .into_par_iter()
            .map(|k| {
                if !self.unknown[k] {
                    return 0.0;
                }
                -0.5 * self.laplacian_at(d, k) + c[k] * d[k]
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&p)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Jacobi-preconditioned conjugate gradients for `M δ = rhs`.
fn conjugate_gradient(op: &Operator, c: &[f64], rhs: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let g = op.grid;
    let diag_lap = 1.0 / (g.hx * g.hx) + 1.0 / (g.hy * g.hy);
    let inv_diag: Vec<f64> = c
        .iter()
        .zip(&op.unknown)
        .map(|(ck, &u)| if u { 1.0 / (diag_lap + ck).max(1e-300) } else { 0.0 })
        .collect();
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let target = tol * dot(rhs, rhs).sqrt().max(1e-300);
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= target {
            break;
        }
        let mp = op.apply(c, &p);
        let pmp = dot(&p, &mp);
        if !(pmp > 0.0) {
            break;
        }
        let alpha = rz / pmp;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * mp[k];
        }
        z = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    x
}

/// Damped Newton on `½Δ_h u − (H²−1)e^{2u} + |ξ|²e^{−2u} = 0`, the Gauss
/// equation `2u_z̄z = (H²−1)e^{2u} − |ξ|²e^{−2u}` on the five-point stencil.
/// Open edges keep the initial values (Dirichlet).
pub fn solve_gauss(h: &Field<f64>, xi: &Field<Complex<f64>>, cfg: &SolverConfig) -> Result<GaussSolution> {
    check_same_grid(h, xi)?;
    if !(cfg.newton_tol > 0.0) {
        return Err(Error::InvalidArgument("newton_tol must be positive".into()));
    }
    if !(cfg.damping > 0.0 && cfg.damping <= 1.0) {
        return Err(Error::InvalidArgument("damping must lie in (0, 1]".into()));
    }
    let grid = h.grid();
    let op = Operator::new(grid);
    let hv = h.values();
    let xi2: Vec<f64> = xi.values().iter().map(|x| x.norm_sqr()).collect();
    let mut u: Vec<f64> = match &cfg.initial_u {
        Some(f) => {
            check_same_grid(f, h)?;
            f.values().to_vec()
        }
        None => vec![0.0; grid.len()],
    };
    let monotone_regime = hv.iter().zip(&xi2).all(|(h, x)| h * h > 1.0 || *x == 0.0);
    let mut g = op.residual(&u, hv, &xi2);
    let mut history = vec![max_abs(&g)];
    let mut iterations = 0;
    while history[iterations] >= cfg.newton_tol {
        if iterations == cfg.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: history[iterations],
            });
        }
        let c: Vec<f64> = (0..u.len())
            .map(|k| 2.0 * (hv[k] * hv[k] - 1.0) * (2.0 * u[k]).exp() + 2.0 * xi2[k] * (-2.0 * u[k]).exp())
            .collect();
        let delta = conjugate_gradient(&op, &c, &g, cfg.linear_tol, cfg.linear_max_iter);
        let current = history[iterations];
        let mut t = cfg.damping;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + t * d).collect();
            let gt = op.residual(&trial, hv, &xi2);
            let m = max_abs(&gt);
            if m < current {
                accepted = Some((trial, gt, m));
                break;
            }
            t *= 0.5;
        }
        let Some((nu, ng, m)) = accepted else {
            return Err(Error::NoConvergence {
                iterations,
                residual: current,
            });
        };
        u = nu;
        g = ng;
        history.push(m);
        iterations += 1;
    }
    let first_h = hv[0];
    let first_xi = xi2[0].sqrt();
    let constant = hv.iter().all(|v| *v == first_h) && xi2.iter().all(|v| (v.sqrt() - first_xi).abs() == 0.0);
    let (kappa, normalized_residual) = if constant && first_h * first_h > 1.0 && first_xi > 0.0 {
        let kappa = first_xi * (first_h * first_h - 1.0).sqrt();
        // v = 2u − log(|ξ|/√(H²−1)) turns G into v_z̄z − 2κ sinh v
        (Some(kappa), Some(history[iterations] / (2.0 * kappa)))
    } else {
        (None, None)
    };
    Ok(GaussSolution {
        u: Field::new(grid.clone(), u)?,
        iterations,
        history,
        kappa,
        normalized_residual,
        monotone_regime,
    })
}

/// Result of the solve → reconstruct → analyze chain.
#[derive(Clone, Debug)]
pub struct CmcSurface {
    pub solution: GaussSolution,
    pub reconstruction: Reconstruction,
    pub analysis: Analysis,
    pub energy: EnergyReport,
    /// Interior max Frobenius norm of the harmonicity residual of the lift.
    pub harmonicity_max: f64,
    /// Whether `H² ≥ 1` and the density is `≤ 0` at every interior node.
    pub density_nonpositive: bool,
}

/// Solves the Gauss equation for constant `(H, ξ)`, reconstructs the surface
/// from the base node with the identity frame, and re-analyzes it.
pub fn cmc_pipeline(
    h: f64,
    xi: Complex<f64>,
    grid: &ChartGrid,
    cfg: &SolverConfig,
    threshold: f64,
) -> Result<CmcSurface> {
    let hf = Field::constant(grid.clone(), h);
    let xf = Field::constant(grid.clone(), xi);
    let solution = solve_gauss(&hf, &xf, cfg)?;
    let data = SurfaceData::from_invariants(solution.u.clone(), hf, xf)?;
    let reconstruction = reconstruct_surface(&data, grid.center(), GroupElement::identity(), threshold)?;
    let analysis = analyze(&reconstruction.immersion)?;
    let energy = energy_report(&analysis.data, None)?;
    let cf = analytic_connection_of(&analysis.data)?;
    let harmonicity_max = interior_max(&harmonicity_residual(&cf), residual_margin(grid), frobenius);
    let density_nonpositive = h * h >= 1.0 && energy.density_max <= 0.0;
    Ok(CmcSurface {
        solution,
        reconstruction,
        analysis,
        energy,
        harmonicity_max,
        density_nonpositive,
    })
}
