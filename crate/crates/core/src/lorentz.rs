//! Lorentzian linear algebra on R⁴₁ with signature (+,+,+,−).
//!
//! The Lie algebra so(3,1) carries the reductive split `so(3,1) = k ⊕ p`
//! where `k` is the rotation block in the (2,3) plane (the isotropy algebra of
//! the base point `o = (e1, e4)` of twistor space) and `p` is the tangent model
//!
//! ```text
//!     |  0    x2   x3   x4 |
//!     | -x2   0    0    y2 |
//!     | -x3   0    0    y3 |
//!     |  x4   y2   y3   0  |
//! ```
//!
//! Indices in doc comments are 1-based to match the matrix notation above;
//! code indices are 0-based.

use nalgebra::{Complex, Matrix4, Vector4};

use crate::error::{Error, Result};

pub type MinkowskiVector = Vector4<f64>;
pub type ComplexVector = Vector4<Complex<f64>>;
pub type ComplexMatrix = Matrix4<Complex<f64>>;

/// Tolerance for membership checks in so(3,1).
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Tolerance for group and constraint checks after numerical work.
pub const GROUP_TOL: f64 = 1e-10;
/// Columns with |⟨c,c⟩| below this are treated as degenerate by Gram–Schmidt.
pub const DEGENERATE_NORM: f64 = 1e-8;

const SIGN: [f64; 4] = [1.0, 1.0, 1.0, -1.0];

/// `I₃₁ = diag(1,1,1,−1)`.
pub fn i31() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0))
}

/// Standard basis vector `e_k`, `k ∈ 1..=4`.
pub fn basis(k: usize) -> MinkowskiVector {
    assert!((1..=4).contains(&k), "basis index must be in 1..=4");
    let mut v = MinkowskiVector::zeros();
    v[k - 1] = 1.0;
    v
}

pub fn minkowski_inner(a: &MinkowskiVector, b: &MinkowskiVector) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3]
}

/// Complex bilinear (not Hermitian) extension of the Minkowski pairing.
pub fn complex_bilinear(z: &ComplexVector, w: &ComplexVector) -> Complex<f64> {
    z[0] * w[0] + z[1] * w[1] + z[2] * w[2] - z[3] * w[3]
}

pub fn complexify(v: &MinkowskiVector) -> ComplexVector {
    v.map(|x| Complex::new(x, 0.0))
}

pub fn is_unit_spacelike(v: &MinkowskiVector, tol: f64) -> bool {
    (minkowski_inner(v, v) - 1.0).abs() < tol
}

pub fn is_future_unit_timelike(w: &MinkowskiVector, tol: f64) -> bool {
    (minkowski_inner(w, w) + 1.0).abs() < tol && w[3] > 0.0
}

/// Element of so(3,1), stored as a real 4×4 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraElement(Matrix4<f64>);

impl AlgebraElement {
    /// Checked constructor; rejects matrices off so(3,1) by more than
    /// [`MEMBERSHIP_TOL`].
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let defect = membership_defect(&m);
        if defect > MEMBERSHIP_TOL {
            return Err(Error::NotInAlgebra { defect });
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is known to lie in so(3,1) by construction.
    pub fn from_matrix_unchecked(m: Matrix4<f64>) -> Self {
        Self(m)
    }

    pub fn zero() -> Self {
        Self(Matrix4::zeros())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// Rotation generator `E_ij − E_ji` for spatial indices `1 ≤ i,j ≤ 3`,
    /// boost generator `E_i4 + E_4i` when `j = 4`.
    pub fn generator(i: usize, j: usize) -> Self {
        assert!(i != j && (1..=4).contains(&i) && (1..=4).contains(&j));
        let (i, j) = (i - 1, j - 1);
        let mut m = Matrix4::zeros();
        if i == 3 || j == 3 {
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
        } else {
            m[(i, j)] = 1.0;
            m[(j, i)] = -1.0;
        }
        Self(m)
    }

    /// Builds the `p` element with coordinates `(x2, x3, x4, y2, y3)`.
    pub fn from_p_coords(x2: f64, x3: f64, x4: f64, y2: f64, y3: f64) -> Self {
        Self(Matrix4::new(
            0.0, x2, x3, x4, //
            -x2, 0.0, 0.0, y2, //
            -x3, 0.0, 0.0, y3, //
            x4, y2, y3, 0.0,
        ))
    }

    /// `(x2, x3, x4, y2, y3)` read from the `p` entry pattern.
    pub fn p_coords(&self) -> [f64; 5] {
        let m = &self.0;
        [m[(0, 1)], m[(0, 2)], m[(0, 3)], m[(1, 3)], m[(2, 3)]]
    }

    /// Generator of `k`: `a·(E32 − E23)`.
    pub fn from_k_coord(a: f64) -> Self {
        let mut m = Matrix4::zeros();
        m[(1, 2)] = -a;
        m[(2, 1)] = a;
        Self(m)
    }

    pub fn k_coord(&self) -> f64 {
        self.0[(2, 1)]
    }

    pub fn project_p(&self) -> Self {
        Self(project_p_matrix(&self.0))
    }

    pub fn project_k(&self) -> Self {
        Self(project_k_matrix(&self.0))
    }

    pub fn bracket(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0 * s)
    }

    pub fn complexify(&self) -> ComplexMatrix {
        self.0.map(|x| Complex::new(x, 0.0))
    }
}

impl std::ops::Add for AlgebraElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::ops::Sub for AlgebraElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

/// Largest entry of `mᵀ I₃₁ + I₃₁ m`.
pub fn membership_defect(m: &Matrix4<f64>) -> f64 {
    let i = i31();
    (m.transpose() * i + i * m).abs().max()
}

pub fn project_p_matrix(m: &Matrix4<f64>) -> Matrix4<f64> {
    let mut out = *m;
    out[(1, 2)] = 0.0;
    out[(2, 1)] = 0.0;
    out
}

pub fn project_k_matrix(m: &Matrix4<f64>) -> Matrix4<f64> {
    let mut out = Matrix4::zeros();
    out[(1, 2)] = m[(1, 2)];
    out[(2, 1)] = m[(2, 1)];
    out
}

/// `p` part of a complexified algebra element.
pub fn project_p_complex(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = *m;
    out[(1, 2)] = Complex::new(0.0, 0.0);
    out[(2, 1)] = Complex::new(0.0, 0.0);
    out
}

/// `k` part of a complexified algebra element.
pub fn project_k_complex(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros();
    out[(1, 2)] = m[(1, 2)];
    out[(2, 1)] = m[(2, 1)];
    out
}

/// The normal metric `−½ tr(A·B)`.
///
/// Intended for `p`; a nonzero `k` part is tolerated and the trace is taken
/// over the full matrices.
pub fn normal_metric(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
    -0.5 * (a.0 * b.0).trace()
}

/// Complex bilinear extension of the normal metric.
pub fn normal_metric_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex<f64> {
    -(a * b).trace() * 0.5
}

pub fn bracket_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Element of the identity component SO₀(3,1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement(Matrix4<f64>);

impl GroupElement {
    /// Checked constructor: `gᵀ I₃₁ g = I₃₁`, `g₄₄ > 0`, `det g = 1`, all to
    /// [`GROUP_TOL`].
    pub fn new(g: Matrix4<f64>) -> Result<Self> {
        let defect = group_defect(&g);
        if defect > GROUP_TOL {
            return Err(Error::NotInGroup { defect });
        }
        if g[(3, 3)] <= 0.0 {
            return Err(Error::Orientation {
                what: "entry (4,4) is not positive",
            });
        }
        if g.determinant() < 0.0 {
            return Err(Error::Orientation {
                what: "determinant is negative",
            });
        }
        Ok(Self(g))
    }

    pub fn from_matrix_unchecked(g: Matrix4<f64>) -> Self {
        Self(g)
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// `g⁻¹ = I₃₁ gᵀ I₃₁`.
    pub fn inverse(&self) -> Self {
        let i = i31();
        Self(i * self.0.transpose() * i)
    }

    pub fn apply(&self, v: &MinkowskiVector) -> MinkowskiVector {
        self.0 * v
    }

    pub fn column(&self, k: usize) -> MinkowskiVector {
        self.0.column(k - 1).into_owned()
    }
}

impl std::ops::Mul for GroupElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

/// Largest entry of `gᵀ I₃₁ g − I₃₁`.
pub fn group_defect(g: &Matrix4<f64>) -> f64 {
    let i = i31();
    (g.transpose() * i * g - i).abs().max()
}

/// `Ad(g)X = g X g⁻¹`.
pub fn adjoint(g: &GroupElement, x: &AlgebraElement) -> AlgebraElement {
    AlgebraElement(g.0 * x.0 * g.inverse().0)
}

pub fn adjoint_complex(g: &GroupElement, x: &ComplexMatrix) -> ComplexMatrix {
    let gc = g.0.map(|v| Complex::new(v, 0.0));
    let gi = g.inverse().0.map(|v| Complex::new(v, 0.0));
    gc * x * gi
}

/// Exponential by scaling and squaring with a truncated Taylor series,
/// followed by re-orthonormalization onto the group.
pub fn matrix_exp(x: &AlgebraElement) -> GroupElement {
    let raw = exp_real(&x.0);
    lorentz_orthonormalize(&raw).unwrap_or(GroupElement(raw))
}

/// Plain scaling-and-squaring exponential of a real 4×4 matrix.
pub fn exp_real(m: &Matrix4<f64>) -> Matrix4<f64> {
    let norm = m.abs().row_sum().max();
    let mut squarings = 0u32;
    let mut scaled = *m;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
        scaled = m / f64::powi(2.0, squarings as i32);
    }
    // ‖scaled‖ ≤ 0.5: 18 Taylor terms leave a remainder below 1e-19.
    let mut term = Matrix4::identity();
    let mut sum = Matrix4::identity();
    for k in 1..=18 {
        term = term * scaled / k as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Gram–Schmidt with respect to the Minkowski pairing, columns in order
/// 1, 2, 3, 4. Columns 1–3 are normalized spacelike, column 4 timelike.
///
/// Fails if a column degenerates or has the wrong causal type, if column 4
/// ends up past-pointing, or if the result has determinant −1.
pub fn lorentz_orthonormalize(m: &Matrix4<f64>) -> Result<GroupElement> {
    let mut cols: [MinkowskiVector; 4] = [
        m.column(0).into_owned(),
        m.column(1).into_owned(),
        m.column(2).into_owned(),
        m.column(3).into_owned(),
    ];
    for k in 0..4 {
        for j in 0..k {
            let (head, tail) = cols.split_at_mut(k);
            let c = &mut tail[0];
            let v = &head[j];
            // ⟨v,v⟩ = +1 for j < 3
            let coeff = minkowski_inner(c, v);
            *c -= v * coeff;
        }
        let norm2 = minkowski_inner(&cols[k], &cols[k]);
        let want = SIGN[k];
        if norm2.abs() < DEGENERATE_NORM || norm2 * want <= 0.0 {
            return Err(Error::DegenerateColumn { column: k + 1, norm2 });
        }
        cols[k] /= (norm2 * want).sqrt();
    }
    // second pass cleans up rounding left by the first
    for k in 0..4 {
        for j in 0..k {
            let (head, tail) = cols.split_at_mut(k);
            let coeff = minkowski_inner(&tail[0], &head[j]);
            tail[0] -= head[j] * coeff;
        }
        let norm2 = minkowski_inner(&cols[k], &cols[k]);
        cols[k] /= (norm2 * SIGN[k]).sqrt();
    }
    let g = Matrix4::from_columns(&cols);
    if g[(3, 3)] <= 0.0 {
        return Err(Error::Orientation {
            what: "column 4 is past-pointing",
        });
    }
    if g.determinant() < 0.0 {
        return Err(Error::Orientation {
            what: "determinant is negative",
        });
    }
    Ok(GroupElement(g))
}
