use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use desitter_twistor::chart::{interior_max, ChartGrid, Field};
use desitter_twistor::energy::{cmc_pipeline, energy_report, pointwise_identity_residual, SolverConfig};
use desitter_twistor::frames::{
    adapted_frame_of, analytic_connection_of, associated_family, integrate_frame, reconstruct_surface, verify_family,
    CONSISTENCY_THRESHOLD,
};
use desitter_twistor::lorentz::GroupElement;
use desitter_twistor::surface::{
    analyze, cylinder_grid, cylinder_strip, perturb_h, residual_margin, stereo_grid, stereo_log_grid, Analysis,
    Generator, PerturbMode,
};
use desitter_twistor::Error;
use nalgebra::Complex;

const CYLINDER: Generator = Generator::HyperbolicCylinder { rho: 1.0 };

fn analyzed(gen: Generator, g: &ChartGrid) -> Analysis {
    analyze(&gen.immersion(g).unwrap()).unwrap()
}

#[test]
fn equator_energy_is_sphere_area() {
    let g = stereo_log_grid(128, 128, 100.0).unwrap();
    let a = analyzed(Generator::UmbilicSphere { c: 0.0 }, &g);
    let r = energy_report(&a.data, None).unwrap();
    assert!((r.twistor_energy / (4.0 * PI) - 1.0).abs() < 0.01, "{r:?}");
    assert!(r.willmore_energy.abs() < 0.05);
    assert_eq!(r.euler_char_used, Some(2));
    assert!((r.twistor_energy - r.area).abs() < 1e-12);
}

#[test]
fn cylinder_strip_energies() {
    let g = cylinder_strip(0.02, (0.0, 1.0), (-0.5, 0.5)).unwrap();
    let a = analyzed(CYLINDER, &g);
    let r = energy_report(&a.data, None).unwrap();
    assert!(r.twistor_energy < 0.0);
    assert!((r.twistor_energy + 0.25 * r.area).abs() < 1e-3 * r.area);
    assert!((r.willmore_energy - 0.125 * r.area).abs() < 1e-3 * r.area);
    // the integrated Gauss residual of analyzed data
    assert!(r.local_defect < 1e-3 * r.area);
    assert!(r.identity_defect.is_none());
    let res = pointwise_identity_residual(&a.data, &a.k).unwrap();
    assert!(interior_max(&res, residual_margin(&g), |v| v.abs()) < 1e-3);
}

#[test]
fn sphere_pointwise_identity_is_second_order() {
    let err = |n: usize| {
        let g = stereo_grid(n, 1.5).unwrap();
        let a = analyzed(Generator::UmbilicSphere { c: 0.75 }, &g);
        let res = pointwise_identity_residual(&a.data, &a.k).unwrap();
        interior_max(&res, residual_margin(&g), |v| v.abs())
    };
    let (e1, e2) = (err(61), err(121));
    assert!(e1 / e2 > 3.5, "{e1} {e2}");
}

#[test]
fn family_at_eighth_root_keeps_metric_and_mean_curvature() {
    let g = cylinder_grid(1.0, 256, 65, (-1.0, 1.0)).unwrap();
    let a = analyzed(CYLINDER, &g);
    let l = Complex::from_polar(1.0, FRAC_PI_4);
    let d = associated_family(&a.data, l, None).unwrap();
    let r = verify_family(&a.data, &d.analysis, l).unwrap();
    assert!(r.h_dev < 1e-4 && r.u_dev < 1e-4, "{r:?}");
    assert!(r.xi_dev < 1e-4 && r.k_dev < 1e-3, "{r:?}");
    assert_eq!(d.past_pointing_nodes, 0);
}

#[test]
fn family_at_i_flips_hopf_differential() {
    let g = cylinder_grid(1.0, 256, 65, (-1.0, 1.0)).unwrap();
    let a = analyzed(CYLINDER, &g);
    let l = Complex::new(0.0, 1.0);
    let d = associated_family(&a.data, l, None).unwrap();
    let m = residual_margin(&g);
    let target = Complex::new(1.0 / (4.0 * SQRT_2), 0.0);
    assert!(interior_max(&d.analysis.data.xi, m, |v| (v - target).norm()) < 1e-4);
}

#[test]
fn trivial_twist_reproduces_the_surface() {
    let g = cylinder_grid(1.0, 128, 41, (-0.6, 0.6)).unwrap();
    let a = analyzed(CYLINDER, &g);
    let d = associated_family(&a.data, Complex::new(1.0, 0.0), None).unwrap();
    let f0 = a.data.f.as_ref().unwrap();
    let f1 = d.analysis.data.f.as_ref().unwrap();
    let h = g.h();
    for k in g.interior(residual_margin(&g)) {
        assert!((f0.at(k) - f1.at(k)).norm() < h * h);
    }
}

#[test]
fn perturbed_connection_is_path_dependent() {
    let g = cylinder_strip(0.02, (-1.0, 1.0), (-0.5, 0.5)).unwrap();
    let a = analyzed(CYLINDER, &g);
    let base = g.center();
    let flat = integrate_frame(
        &analytic_connection_of(&a.data).unwrap(),
        base,
        GroupElement::identity(),
    )
    .unwrap();
    let p = perturb_h(&a.data, 1e-2, PerturbMode::SinX);
    let bent = integrate_frame(&analytic_connection_of(&p).unwrap(), base, GroupElement::identity()).unwrap();
    assert!(
        bent.path_dependence >= 10.0 * flat.path_dependence,
        "{} {}",
        bent.path_dependence,
        flat.path_dependence
    );
    assert!(matches!(
        associated_family(&p, Complex::new(0.0, 1.0), None),
        Err(Error::NotCmc { .. })
    ));
}

#[test]
fn sphere_roundtrip_is_second_order() {
    let drift = |n: usize| {
        let g = stereo_grid(n, 1.0).unwrap();
        let first = analyzed(Generator::UmbilicSphere { c: 0.75 }, &g);
        let base = g.center();
        let frame = *adapted_frame_of(&first.data).unwrap().at(base);
        let rec = reconstruct_surface(&first.data, base, frame, 10.0 * g.h() * g.h()).unwrap();
        let f0 = first.data.f.as_ref().unwrap();
        g.interior(residual_margin(&g))
            .into_iter()
            .map(|k| (f0.at(k) - rec.immersion.f().at(k)).norm())
            .fold(0.0, f64::max)
    };
    let (a, b) = (drift(81), drift(161));
    // h = 0.025 on the coarse grid
    assert!(a < 5.0 * 0.025 * 0.025, "{a}");
    assert!(a / b > 3.0, "{a} {b}");
}

#[test]
fn pipeline_produces_negative_density_surface() {
    let n = 64;
    let h = 2.0 * PI / n as f64;
    let g = ChartGrid::new(n, n, h, h, 0.0, 0.0, true, true).unwrap();
    let cfg = SolverConfig {
        initial_u: Some(Field::from_fn(g.clone(), |x, y| 0.08 * (x + y).cos())),
        ..SolverConfig::default()
    };
    let out = cmc_pipeline(SQRT_2, Complex::new(1.0, 0.0), &g, &cfg, CONSISTENCY_THRESHOLD).unwrap();
    let d = &out.analysis.data;
    let m = residual_margin(d.grid());
    let h2 = h * h;
    assert!(interior_max(&d.h, m, |v| (v - SQRT_2).abs()) < 2.0 * h2);
    assert!(interior_max(&d.xi, m, |v| (v.norm() - 1.0).abs()) < 2.0 * h2);
    assert!(out.density_nonpositive);
    assert!((out.energy.density_max + 2.0).abs() < 10.0 * h2);
    assert!(out.harmonicity_max < 1e-3);
    assert!(out.solution.normalized_residual.unwrap() < 1e-10);
}

#[test]
fn pipeline_refuses_inconsistent_data() {
    let g = ChartGrid::new(16, 16, 0.1, 0.1, 0.0, 0.0, true, true).unwrap();
    let cfg = SolverConfig {
        max_iter: 0,
        initial_u: Some(Field::from_fn(g.clone(), |x, _| (5.0 * x).sin())),
        ..SolverConfig::default()
    };
    assert!(matches!(
        cmc_pipeline(SQRT_2, Complex::new(1.0, 0.0), &g, &cfg, CONSISTENCY_THRESHOLD),
        Err(Error::NoConvergence { .. })
    ));
}
