//! The twistor bundle `Z = {(v, w) ∈ S³₁ × H³₊ : ⟨v, w⟩ = 0}` and its
//! invariant structures.
//!
//! Tangent vectors at the base point `o = (e₁, e₄)` are modeled by `p`. The
//! Hopf direction is the `x4` slot, the fibre of `π: (v,w) ↦ v` is spanned by
//! the `y2`, `y3` slots, and the horizontal space `𝓗` is
//!
//! ```text
//!     |  0   x   y   0 |
//!     | −x   0   0   z |          J′(x, y, z, w) = (−y, x, −w,  z)
//!     | −y   0   0   w |          J″(x, y, z, w) = (−y, x,  w, −z)
//!     |  0   z   w   0 |
//! ```

use nalgebra::{Complex, Matrix4};

use crate::chart::{interior_max, Field};
use crate::error::{Error, Result};
use crate::frames::{adapted_frame_of, analytic_connection_of, frobenius, numeric_connection, ConnectionForm};
use crate::lorentz::{
    adjoint, i31, is_future_unit_timelike, is_unit_spacelike, minkowski_inner, AlgebraElement, ComplexMatrix,
    GroupElement, MinkowskiVector, GROUP_TOL, MEMBERSHIP_TOL,
};
use crate::surface::{residual_margin, SurfaceData};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistorPoint {
    v: MinkowskiVector,
    w: MinkowskiVector,
}

fn check_point(node: usize, v: &MinkowskiVector, w: &MinkowskiVector) -> Result<()> {
    let fail = |reason: String| Err(Error::InvalidTwistorPoint { node, reason });
    if !is_unit_spacelike(v, GROUP_TOL) {
        return fail(format!("<v,v> = {} is not 1", minkowski_inner(v, v)));
    }
    if !is_future_unit_timelike(w, GROUP_TOL) {
        return fail(format!(
            "w is not future unit timelike (<w,w> = {}, w4 = {})",
            minkowski_inner(w, w),
            w[3]
        ));
    }
    let vw = minkowski_inner(v, w);
    if vw.abs() > GROUP_TOL {
        return fail(format!("<v,w> = {vw:e} is not 0"));
    }
    Ok(())
}

impl TwistorPoint {
    pub fn new(v: MinkowskiVector, w: MinkowskiVector) -> Result<Self> {
        check_point(0, &v, &w)?;
        Ok(Self { v, w })
    }

    /// The base point `o = (e₁, e₄)`.
    pub fn origin() -> Self {
        Self {
            v: MinkowskiVector::new(1.0, 0.0, 0.0, 0.0),
            w: MinkowskiVector::new(0.0, 0.0, 0.0, 1.0),
        }
    }

    pub fn v(&self) -> &MinkowskiVector {
        &self.v
    }

    pub fn w(&self) -> &MinkowskiVector {
        &self.w
    }

    /// `g·(v, w) = (gv, gw)`.
    pub fn left_action(&self, g: &GroupElement) -> Self {
        Self {
            v: g.apply(&self.v),
            w: g.apply(&self.w),
        }
    }

    /// `g·o` is `(g e₁, g e₄)`.
    pub fn from_frame(g: &GroupElement) -> Self {
        Self {
            v: g.column(1),
            w: g.column(4),
        }
    }
}

/// The lift `(f, n)` of a surface.
#[derive(Clone, Debug)]
pub struct TwistorLiftField {
    pub points: Field<TwistorPoint>,
}

/// Pairs `(f, n)` per node, reporting the first node that is not in `Z`.
pub fn lift(f: &Field<MinkowskiVector>, n: &Field<MinkowskiVector>) -> Result<TwistorLiftField> {
    crate::chart::check_same_grid(f, n)?;
    for k in 0..f.len() {
        check_point(k, f.at(k), n.at(k))?;
    }
    let points = f.zip_map(n, |v, w| TwistorPoint { v: *v, w: *w })?;
    Ok(TwistorLiftField { points })
}

/// The Hopf field at `(v, w)` is `(w, v)`.
pub fn hopf_vector(p: &TwistorPoint) -> (MinkowskiVector, MinkowskiVector) {
    (p.w, p.v)
}

/// `(cosh t·v + sinh t·w, sinh t·v + cosh t·w)`.
pub fn right_action(p: &TwistorPoint, t: f64) -> TwistorPoint {
    let (c, s) = (t.cosh(), t.sinh());
    TwistorPoint {
        v: p.v * c + p.w * s,
        w: p.v * s + p.w * c,
    }
}

pub fn project_base(p: &TwistorPoint) -> MinkowskiVector {
    p.v
}

pub fn project_hyperbolic(p: &TwistorPoint) -> MinkowskiVector {
    p.w
}

/// Metric projector onto `[v ∧ w]^⊥`: `u ↦ u − ⟨u,v⟩v + ⟨u,w⟩w`.
pub fn project_plane(p: &TwistorPoint) -> Matrix4<f64> {
    let i = i31();
    Matrix4::identity() - p.v * (i * p.v).transpose() + p.w * (i * p.w).transpose()
}

/// An element of `𝓗 ⊂ p` (no Hopf or `k` component).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizontalVector(AlgebraElement);

/// Largest entry that keeps `m` out of `𝓗`.
pub fn horizontal_defect(m: &Matrix4<f64>) -> f64 {
    let off = [m[(0, 3)], m[(3, 0)], m[(1, 2)], m[(2, 1)]]
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    off.max(crate::lorentz::membership_defect(m))
}

impl HorizontalVector {
    pub fn new(x: AlgebraElement) -> Result<Self> {
        let defect = horizontal_defect(x.matrix());
        if defect > MEMBERSHIP_TOL {
            return Err(Error::NotHorizontal { defect });
        }
        Ok(Self(x))
    }

    pub fn from_coords(x: f64, y: f64, z: f64, w: f64) -> Self {
        Self(AlgebraElement::from_p_coords(x, y, 0.0, z, w))
    }

    pub fn coords(&self) -> [f64; 4] {
        let [x2, x3, _, y2, y3] = self.0.p_coords();
        [x2, x3, y2, y3]
    }

    pub fn element(&self) -> &AlgebraElement {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// Fibre rotation kept.
    JPrime,
    /// Fibre rotation reversed.
    JDoublePrime,
}

fn rotate<T: Copy + std::ops::Neg<Output = T>>(c: [T; 4], which: Structure) -> [T; 4] {
    let [x, y, z, w] = c;
    match which {
        Structure::JPrime => [-y, x, -w, z],
        Structure::JDoublePrime => [-y, x, w, -z],
    }
}

pub fn apply_structure(x: &HorizontalVector, which: Structure) -> HorizontalVector {
    let [a, b, c, d] = rotate(x.coords(), which);
    HorizontalVector::from_coords(a, b, c, d)
}

pub fn j_prime(x: &HorizontalVector) -> HorizontalVector {
    apply_structure(x, Structure::JPrime)
}

pub fn j_dprime(x: &HorizontalVector) -> HorizontalVector {
    apply_structure(x, Structure::JDoublePrime)
}

/// J applied to the horizontal part of a complex `p` matrix; the Hopf slot
/// maps to zero.
pub fn apply_structure_complex(m: &ComplexMatrix, which: Structure) -> ComplexMatrix {
    let c = [m[(0, 1)], m[(0, 2)], m[(1, 3)], m[(2, 3)]];
    let [x, y, z, w] = rotate(c, which);
    let zero = Complex::new(0.0, 0.0);
    let mut out = Matrix4::from_element(zero);
    out[(0, 1)] = x;
    out[(1, 0)] = -x;
    out[(0, 2)] = y;
    out[(2, 0)] = -y;
    out[(1, 3)] = z;
    out[(3, 1)] = z;
    out[(2, 3)] = w;
    out[(3, 2)] = w;
    out
}

/// The invariant extension `Ad(g) J Ad(g⁻¹) X`.
pub fn j_at(g: &GroupElement, x: &AlgebraElement, which: Structure) -> Result<AlgebraElement> {
    let local = HorizontalVector::new(adjoint(&g.inverse(), x))?;
    Ok(adjoint(g, apply_structure(&local, which).element()))
}

/// Holomorphicity diagnostics of a lift, computed from the invariants and
/// from the eigen-defects `‖J A_p − i A_p‖` of a connection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolomorphicityReport {
    /// `max |ξ|`: zero iff J′-holomorphic.
    pub xi_max: f64,
    /// `max |H|`: zero iff J″-holomorphic.
    pub h_max: f64,
    /// `max |2ξH|`: zero iff the lift is conformal.
    pub conformal_max: f64,
    /// `max ‖J′A_p − iA_p‖ / (2√2 e^{−u})`, an estimate of `max |ξ|`.
    pub j_prime_from_frames: f64,
    /// `max ‖J″A_p − iA_p‖ / (2√2 eᵘ)`, an estimate of `max |H|`.
    pub j_dprime_from_frames: f64,
    /// `max |−½ tr(A_p²)|`, an estimate of `max |2ξH|`.
    pub conformal_from_frames: f64,
    /// Largest pointwise disagreement between the two computations.
    pub disagreement: f64,
    /// True when the frame estimates came from a finite-difference frame.
    pub numeric_frames: bool,
}

impl HolomorphicityReport {
    pub fn j_prime_holomorphic(&self, tol: f64) -> bool {
        self.xi_max < tol
    }

    pub fn j_dprime_holomorphic(&self, tol: f64) -> bool {
        self.h_max < tol
    }

    pub fn conformal(&self, tol: f64) -> bool {
        self.conformal_max < tol
    }
}

fn eigen_defect(ap: &ComplexMatrix, which: Structure) -> f64 {
    let i = Complex::new(0.0, 1.0);
    let mut horizontal = *ap;
    horizontal[(0, 3)] = Complex::new(0.0, 0.0);
    horizontal[(3, 0)] = Complex::new(0.0, 0.0);
    frobenius(&(apply_structure_complex(ap, which) - horizontal * i))
}

/// Interior statistics of both computations. The connection is the
/// finite-difference one of the adapted frame when `f` and `n` are present,
/// the closed-form one otherwise.
pub fn holomorphicity_report(data: &SurfaceData) -> Result<HolomorphicityReport> {
    let (cf, numeric_frames): (ConnectionForm, bool) = match adapted_frame_of(data) {
        Ok(frames) => (numeric_connection(&frames), true),
        Err(_) => (analytic_connection_of(data)?, false),
    };
    let ap = cf.a_p();
    let nodes = data.grid().interior(residual_margin(data.grid()));
    let sqrt8 = 8f64.sqrt();
    let mut r = HolomorphicityReport {
        xi_max: 0.0,
        h_max: 0.0,
        conformal_max: 0.0,
        j_prime_from_frames: 0.0,
        j_dprime_from_frames: 0.0,
        conformal_from_frames: 0.0,
        disagreement: 0.0,
        numeric_frames,
    };
    for k in nodes {
        let u = *data.u.at(k);
        let xi = data.xi.at(k).norm();
        let h = data.h.at(k).abs();
        let c = (data.xi.at(k) * data.h.at(k) * 2.0).norm();
        let a = ap.at(k);
        let jp = eigen_defect(a, Structure::JPrime) / (sqrt8 * (-u).exp());
        let jd = eigen_defect(a, Structure::JDoublePrime) / (sqrt8 * u.exp());
        let cc = ((a * a).trace() * -0.5).norm();
        r.xi_max = r.xi_max.max(xi);
        r.h_max = r.h_max.max(h);
        r.conformal_max = r.conformal_max.max(c);
        r.j_prime_from_frames = r.j_prime_from_frames.max(jp);
        r.j_dprime_from_frames = r.j_dprime_from_frames.max(jd);
        r.conformal_from_frames = r.conformal_from_frames.max(cc);
        r.disagreement = r
            .disagreement
            .max((jp - xi).abs())
            .max((jd - h).abs())
            .max((cc - c).abs());
    }
    Ok(r)
}

/// `|(A_p)₁₄|` per node: the Hopf component of `∂_z` of the lift seen
/// through its frame.
pub fn horizontality_from_connection(cf: &ConnectionForm) -> Field<f64> {
    cf.a.map(|a| a[(0, 3)].norm())
}

/// Horizontality of the lift of analyzed data through the closed-form
/// connection (a structural zero).
pub fn horizontality_residual(data: &SurfaceData) -> Result<Field<f64>> {
    Ok(horizontality_from_connection(&analytic_connection_of(data)?))
}

/// Horizontality of an arbitrary map into `Z` given by frames `g` with
/// points `g·o`.
pub fn horizontality_of_frames(frames: &Field<crate::lorentz::GroupElement>) -> Field<f64> {
    horizontality_from_connection(&numeric_connection(frames))
}

/// Largest interior horizontality residual.
pub fn max_horizontality(field: &Field<f64>) -> f64 {
    interior_max(field, residual_margin(field.grid()), |v| *v)
}
