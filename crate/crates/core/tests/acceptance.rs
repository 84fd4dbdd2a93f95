//! End-to-end acceptance suite. Prints one line per criterion.

use std::f64::consts::{PI, SQRT_2};

use desitter_twistor::chart::d_dzbar;
use desitter_twistor::chart::{interior_max, ChartGrid, Field, StencilOrder};
use desitter_twistor::energy::{cmc_pipeline, energy_report, solve_gauss, SolverConfig};
use desitter_twistor::frames::{
    adapted_frame_of, analytic_connection_of, associated_family, frobenius, harmonicity_prediction,
    harmonicity_residual, lambda_connection, reconstruct_surface, roots_of_unity, structural_residual, verify_family,
    zcc_residual, CONSISTENCY_THRESHOLD,
};
use desitter_twistor::lorentz::{normal_metric, AlgebraElement, MEMBERSHIP_TOL};
use desitter_twistor::surface::{
    analyze, cylinder_grid, cylinder_strip, perturb_h, residual_margin, stereo_grid, stereo_log_grid, Analysis,
    Generator, PerturbMode, RESIDUAL_MARGIN,
};
use desitter_twistor::twistor::{holomorphicity_report, j_dprime, j_prime, HorizontalVector, TwistorPoint};
use nalgebra::Complex;

struct Outcome {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

const CYLINDER: Generator = Generator::HyperbolicCylinder { rho: 1.0 };

fn analyzed(gen: Generator, grid: &ChartGrid) -> Analysis {
    analyze(&gen.immersion(grid).unwrap()).unwrap()
}

fn sphere_errors(h: f64) -> (f64, f64, f64) {
    let n = (6.4 / h).round() as usize + 1;
    let g = stereo_grid(n, 3.2).unwrap();
    let a = analyzed(Generator::UmbilicSphere { c: 0.75 }, &g);
    let (mut eh, mut ek, mut ex) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..g.len() {
        let (x, y) = g.point(k);
        if x * x + y * y > 9.0 {
            continue;
        }
        eh = eh.max((a.data.h.at(k) - 0.6).abs());
        ek = ek.max((a.k.at(k) - 0.64).abs());
        ex = ex.max(a.data.xi.at(k).norm());
    }
    (eh, ek, ex)
}

fn generator_fidelity() -> Outcome {
    let (h1, k1, x1) = sphere_errors(0.02);
    let (h2, k2, x2) = sphere_errors(0.01);
    let ratios = [h1 / h2, k1 / k2, x1 / x2];
    let pass = h1 < 2e-3 && k1 < 5e-3 && x1 <= 5e-3 && ratios.iter().all(|r| *r >= 3.5);
    Outcome {
        id: 1,
        name: "generator fidelity",
        pass,
        detail: format!(
            "h=0.02: |dH| {h1:.2e}, |dK| {k1:.2e}, |xi| {x1:.2e}; halving ratios {:.2} {:.2} {:.2}",
            ratios[0], ratios[1], ratios[2]
        ),
    }
}

fn sphere_energy() -> Outcome {
    let g = stereo_log_grid(256, 256, 100.0).unwrap();
    let a = analyzed(Generator::UmbilicSphere { c: 0.75 }, &g);
    let r = energy_report(&a.data, Some(2)).unwrap();
    let four_pi = 4.0 * PI;
    let rel_e = (r.twistor_energy - four_pi).abs() / four_pi;
    let rel_id = r.identity_defect.unwrap() / four_pi;
    let pass = rel_e < 0.01 && r.willmore_energy.abs() < 0.05 && rel_id < 0.01;
    Outcome {
        id: 2,
        name: "energy of the CMC sphere",
        pass,
        detail: format!(
            "E/4pi {:.5}, W {:.2e}, |2W+E-4pi|/4pi {rel_id:.2e}",
            r.twistor_energy / four_pi,
            r.willmore_energy
        ),
    }
}

fn harmonicity_max(a: &desitter_twistor::surface::SurfaceData) -> f64 {
    let cf = analytic_connection_of(a).unwrap();
    interior_max(&harmonicity_residual(&cf), RESIDUAL_MARGIN, frobenius)
}

fn harmonic_iff_cmc() -> Outcome {
    let sphere = analyzed(Generator::UmbilicSphere { c: 0.75 }, &stereo_grid(201, 2.0).unwrap());
    let cyl = analyzed(CYLINDER, &cylinder_grid(1.0, 256, 65, (-1.0, 1.0)).unwrap());
    let hs = harmonicity_max(&sphere.data);
    let hc = harmonicity_max(&cyl.data);

    let eps = 1e-2;
    let strip = cylinder_strip(0.01, (-1.5, 1.5), (-0.5, 0.5)).unwrap();
    let base = analyzed(CYLINDER, &strip);
    let p = perturb_h(&base.data, eps, PerturbMode::SinX);
    let hp = harmonicity_max(&p);
    // eᵘ·ε·max|cos x|, the collapse of the residual when Codazzi holds
    let u0 = (0.5f64).sqrt().ln();
    let codazzi_prediction = u0.exp() * eps;
    // the same closed form without assuming Codazzi: ξ is untouched by the perturbation
    let hz = d_dzbar(&p.h);
    let xz = d_dzbar(&p.xi);
    let exact = harmonicity_prediction(&p.u, &hz, &xz).unwrap();
    let direct = interior_max(&exact, RESIDUAL_MARGIN, |v| *v);
    let mismatch = (hp - codazzi_prediction).abs() / codazzi_prediction;
    let pass = hs < 1e-3 && hc < 1e-3 && hp > 5e-3 && mismatch < 0.15;
    Outcome {
        id: 3,
        name: "harmonic iff CMC",
        pass,
        detail: format!(
            "sphere {hs:.2e}, cylinder {hc:.2e}, perturbed {hp:.6e} vs e^u*eps {codazzi_prediction:.4e} \
             (off {:.1}%), vs non-Codazzi closed form {direct:.6e}",
            100.0 * mismatch
        ),
    }
}

fn zero_curvature_loop() -> Outcome {
    let strip = cylinder_strip(0.01, (-1.5, 1.5), (-0.5, 0.5)).unwrap();
    let base = analyzed(CYLINDER, &strip);
    let cf = analytic_connection_of(&base.data).unwrap();
    let zmax =
        |cf: &desitter_twistor::frames::ConnectionForm| interior_max(&zcc_residual(cf), RESIDUAL_MARGIN, frobenius);
    let levels: Vec<f64> = roots_of_unity(8)
        .into_iter()
        .map(|l| zmax(&lambda_connection(&cf, l).unwrap()))
        .collect();
    let worst = levels.iter().cloned().fold(0.0, f64::max);
    let i = Complex::new(0.0, 1.0);
    let cmc_i = zmax(&lambda_connection(&cf, i).unwrap());
    let p = perturb_h(&base.data, 1e-2, PerturbMode::SinX);
    let pert_i = zmax(&lambda_connection(&analytic_connection_of(&p).unwrap(), i).unwrap());
    let pass = worst < 1e-3 && pert_i >= 10.0 * cmc_i;
    Outcome {
        id: 4,
        name: "zero-curvature loop",
        pass,
        detail: format!("max over 8 roots {worst:.2e}; lambda=i perturbed {pert_i:.2e} vs CMC {cmc_i:.2e}"),
    }
}

fn associated_family_flip() -> Outcome {
    let g = cylinder_grid(1.0, 256, 65, (-1.0, 1.0)).unwrap();
    let a = analyzed(CYLINDER, &g);
    let i = Complex::new(0.0, 1.0);
    let def = associated_family(&a.data, i, None).unwrap();
    let rep = verify_family(&a.data, &def.analysis, i).unwrap();
    let target_xi = 1.0 / (4.0 * SQRT_2);
    let target_h = 3.0 * SQRT_2 / 4.0;
    let nodes = def.analysis.data.grid().interior(RESIDUAL_MARGIN);
    let (mut dxi, mut dh) = (0.0f64, 0.0f64);
    for &k in &nodes {
        dxi = dxi.max((def.analysis.data.xi.at(k) - Complex::new(target_xi, 0.0)).norm());
        dh = dh.max((def.analysis.data.h.at(k) - target_h).abs());
    }
    let pass = dxi < 1e-3 && dh < 1e-3 && rep.u_dev < 1e-3;
    Outcome {
        id: 5,
        name: "associated family",
        pass,
        detail: format!(
            "|xi - 1/(4 sqrt2)| {dxi:.2e}, |H - 3sqrt2/4| {dh:.2e}, u drift {:.2e}",
            rep.u_dev
        ),
    }
}

fn bonnet_roundtrip() -> Outcome {
    let g = cylinder_strip(0.005, (0.0, 1.0), (-0.5, 0.5)).unwrap();
    let first = analyzed(CYLINDER, &g);
    let base = g.center();
    let frame = *adapted_frame_of(&first.data).unwrap().at(base);
    let rec = reconstruct_surface(&first.data, base, frame, CONSISTENCY_THRESHOLD).unwrap();
    let second = analyze(&rec.immersion).unwrap();
    let f0 = first.data.f.as_ref().unwrap();
    let nodes = g.interior(RESIDUAL_MARGIN);
    let dist = nodes
        .iter()
        .map(|&k| (f0.at(k) - rec.immersion.f().at(k)).norm())
        .fold(0.0, f64::max);
    let mut drift = 0.0f64;
    for &k in &nodes {
        drift = drift
            .max((first.data.u.at(k) - second.data.u.at(k)).abs())
            .max((first.data.h.at(k) - second.data.h.at(k)).abs())
            .max((first.data.xi.at(k) - second.data.xi.at(k)).norm());
    }
    let pass = dist < 1e-5 && drift < 1e-4;
    Outcome {
        id: 6,
        name: "Bonnet roundtrip",
        pass,
        detail: format!("node distance {dist:.2e}, (u,H,xi) drift {drift:.2e}"),
    }
}

fn solver() -> Outcome {
    let n = 128;
    let h = 2.0 * PI / n as f64;
    let g = ChartGrid::new(n, n, h, h, 0.0, 0.0, true, true).unwrap();
    let cfg = SolverConfig {
        initial_u: Some(Field::from_fn(g.clone(), |x, _| 0.05 * x.sin())),
        ..SolverConfig::default()
    };
    let hf = Field::constant(g.clone(), SQRT_2);
    let xf = Field::constant(g.clone(), Complex::new(1.0, 0.0));
    let sol = solve_gauss(&hf, &xf, &cfg).unwrap();
    let umax = sol.u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let xi = Complex::new(1.0, 0.0);
    let h_error = |out: &desitter_twistor::energy::CmcSurface| {
        let d = &out.analysis.data;
        interior_max(&d.h, residual_margin(d.grid()), |v| (v - SQRT_2).abs())
    };
    // the O(h²) analysis bias at this spacing is about 0.95h², above the bound
    let second = cmc_pipeline(SQRT_2, xi, &g, &cfg, CONSISTENCY_THRESHOLD).unwrap();
    let g4 = g.clone().with_stencil(StencilOrder::Fourth);
    let cfg4 = SolverConfig {
        initial_u: cfg.initial_u.clone().map(|u| u.regrid(g4.clone()).unwrap()),
        ..cfg.clone()
    };
    let fourth = cmc_pipeline(SQRT_2, xi, &g4, &cfg4, CONSISTENCY_THRESHOLD).unwrap();
    let hdev = h_error(&fourth);
    let pass = umax < 1e-9 && sol.iterations <= 8 && hdev < 2e-3 && fourth.harmonicity_max < 1e-3;
    Outcome {
        id: 7,
        name: "Gauss solver",
        pass,
        detail: format!(
            "{} Newton steps, max|u| {umax:.1e}, order {:.2}; fourth-order analysis |H - sqrt2| {hdev:.2e}, \
             harmonicity {:.2e}; second-order analysis |H - sqrt2| {:.2e}, harmonicity {:.2e}",
            sol.iterations,
            sol.observed_order().unwrap_or(f64::NAN),
            fourth.harmonicity_max,
            h_error(&second),
            second.harmonicity_max
        ),
    }
}

fn holomorphicity() -> Outcome {
    let tol = 1e-3;
    let g = stereo_grid(201, 2.0).unwrap();
    let s = holomorphicity_report(&analyzed(Generator::UmbilicSphere { c: 0.75 }, &g).data).unwrap();
    let e = holomorphicity_report(&analyzed(Generator::UmbilicSphere { c: 0.0 }, &g).data).unwrap();
    let c =
        holomorphicity_report(&analyzed(CYLINDER, &cylinder_grid(1.0, 256, 65, (-1.0, 1.0)).unwrap()).data).unwrap();
    let sphere_ok = s.j_prime_holomorphic(tol) && s.j_prime_from_frames < tol && !s.j_dprime_holomorphic(tol);
    let equator_ok = e.j_prime_holomorphic(tol)
        && e.j_dprime_holomorphic(tol)
        && e.conformal(tol)
        && e.j_prime_from_frames < tol
        && e.j_dprime_from_frames < tol;
    let cyl_fails = !c.j_prime_holomorphic(tol) && !c.j_dprime_holomorphic(tol) && !c.conformal(tol);
    let scalar_ok = (c.conformal_max - 0.375).abs() < 5e-3 && (c.conformal_from_frames - 0.375).abs() < 5e-3;
    Outcome {
        id: 8,
        name: "holomorphicity trichotomy",
        pass: sphere_ok && equator_ok && cyl_fails && scalar_ok,
        detail: format!(
            "sphere |xi| {:.1e} |H| {:.3}; equator |xi| {:.1e} |H| {:.1e}; cylinder |2 xi H| {:.5} (frames {:.5})",
            s.xi_max, s.h_max, e.xi_max, e.h_max, c.conformal_max, c.conformal_from_frames
        ),
    }
}

fn algebra() -> Outcome {
    let mut worst = 0.0f64;
    let samples = [
        AlgebraElement::from_p_coords(0.3, -1.2, 0.7, 2.0, -0.4) + AlgebraElement::from_k_coord(1.1),
        AlgebraElement::from_p_coords(-2.0, 0.5, 1.5, -0.3, 0.9) + AlgebraElement::from_k_coord(-0.6),
    ];
    for x in &samples {
        let (p, k) = (x.project_p(), x.project_k());
        worst = worst.max(((p + k) - *x).matrix().norm());
        worst = worst.max(normal_metric(&p, &k).abs());
        for y in &samples {
            let (q, l) = (y.project_p(), y.project_k());
            worst = worst.max(k.bracket(&l).project_p().matrix().norm());
            worst = worst.max(k.bracket(&q).project_k().matrix().norm());
        }
    }
    // (x2, x3, x4, y2, y3) basis of p: Gram matrix diag(1, 1, −1, −1, −1)
    let basis: Vec<AlgebraElement> = (0..5)
        .map(|i| {
            let mut c = [0.0; 5];
            c[i] = 1.0;
            AlgebraElement::from_p_coords(c[0], c[1], c[2], c[3], c[4])
        })
        .collect();
    let signs = [1.0, 1.0, -1.0, -1.0, -1.0];
    for i in 0..5 {
        for j in 0..5 {
            let want = if i == j { signs[i] } else { 0.0 };
            worst = worst.max((normal_metric(&basis[i], &basis[j]) - want).abs());
        }
    }
    // E14 + E41
    let hopf = AlgebraElement::generator(1, 4);
    worst = worst.max((normal_metric(&hopf, &hopf) + 1.0).abs());
    // kernels of the two projections at the origin
    let o = TwistorPoint::origin();
    let ker_base: Vec<&AlgebraElement> = basis
        .iter()
        .filter(|b| (b.matrix() * o.v()).norm() < MEMBERSHIP_TOL)
        .collect();
    let ker_hyp: Vec<&AlgebraElement> = basis
        .iter()
        .filter(|b| (b.matrix() * o.w()).norm() < MEMBERSHIP_TOL)
        .collect();
    let kernels_ok = ker_base.len() == 2 && ker_hyp.len() == 2;
    for a in &ker_base {
        for b in &ker_hyp {
            worst = worst.max(normal_metric(a, b).abs());
        }
    }
    for c in [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.3, -0.7, 1.1, 2.0],
    ] {
        let x = HorizontalVector::from_coords(c[0], c[1], c[2], c[3]);
        for twice in [j_prime(&j_prime(&x)), j_dprime(&j_dprime(&x))] {
            let got = twice.coords();
            for m in 0..4 {
                worst = worst.max((got[m] + c[m]).abs());
            }
        }
    }
    let sg = stereo_grid(41, 1.0).unwrap();
    let cg = cylinder_grid(1.0, 64, 21, (-1.0, 1.0)).unwrap();
    for (gen, g) in [(Generator::UmbilicSphere { c: 0.75 }, &sg), (CYLINDER, &cg)] {
        let cf = analytic_connection_of(&gen.exact(g).unwrap()).unwrap();
        worst = worst.max(structural_residual(&cf).values().iter().cloned().fold(0.0, f64::max));
    }
    Outcome {
        id: 9,
        name: "algebraic exactness",
        pass: kernels_ok && worst < 1e-10,
        detail: format!("largest defect {worst:.1e}"),
    }
}

fn energy_sign(previous: &[Outcome]) -> Outcome {
    let g = cylinder_grid(1.0, 256, 65, (-1.0, 1.0)).unwrap();
    let a = analyzed(CYLINDER, &g);
    let cyl = energy_report(&a.data, None).unwrap();
    let n = 64;
    let h = 2.0 * PI / n as f64;
    let pg = ChartGrid::new(n, n, h, h, 0.0, 0.0, true, true).unwrap();
    let out = cmc_pipeline(
        1.5,
        Complex::new(0.3, 0.4),
        &pg,
        &SolverConfig::default(),
        CONSISTENCY_THRESHOLD,
    )
    .unwrap();
    let prior = previous.iter().filter(|o| o.id == 1 || o.id == 2).all(|o| o.pass);
    Outcome {
        id: 10,
        name: "classification properties",
        pass: prior && cyl.density_max <= 0.0 && cyl.twistor_energy < 0.0 && out.density_nonpositive,
        detail: format!(
            "items 1,2 {}; cylinder density max {:.4}, E {:.3}; solved H=1.5 density max {:.4}",
            if prior { "pass" } else { "fail" },
            cyl.density_max,
            cyl.twistor_energy,
            out.energy.density_max
        ),
    }
}

// Criteria that cannot hold as stated. The perturbed data keeps ξ constant,
// so the residual is √2·eᵘ|H_z̄| = (ε/2)|cos x| (times the stencil factor
// sin h/h), while the reference value eᵘε assumes Codazzi.
const UNATTAINABLE: &[u8] = &[3];

fn main() {
    let mut outcomes = vec![
        generator_fidelity(),
        sphere_energy(),
        harmonic_iff_cmc(),
        zero_curvature_loop(),
        associated_family_flip(),
        bonnet_roundtrip(),
        solver(),
        holomorphicity(),
        algebra(),
    ];
    let last = energy_sign(&outcomes);
    outcomes.push(last);
    for o in &outcomes {
        println!(
            "criterion {:>2} {}: {} ({})",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    let unexpected: Vec<u8> = outcomes
        .iter()
        .filter(|o| !o.pass && !UNATTAINABLE.contains(&o.id))
        .map(|o| o.id)
        .collect();
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
    let flipped: Vec<u8> = outcomes
        .iter()
        .filter(|o| o.pass && UNATTAINABLE.contains(&o.id))
        .map(|o| o.id)
        .collect();
    assert!(
        flipped.is_empty(),
        "criteria listed as unattainable now pass: {flipped:?}"
    );
}
