//! Matrix-manifold primitives for the orthogonal group 𝕆(N) and the unit
//! sphere 𝕊^{N-1}.
//!
//! Everything here is a pure function of its arguments. The two certified
//! types, [`OrthoDict`] and [`UnitVector`], can only be built through
//! constructors that check their defining invariant, so downstream code may
//! rely on `DᵀD = I` and `‖d‖ = 1` without re-checking.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{check_dims, HrpError, Result};

/// Dense real N×N matrix used for gradients and unconstrained iterates.
pub type SquareMatrix = DMatrix<f64>;

/// Default absolute tolerance on `max |DᵀD - I|`.
pub const DEFAULT_ORTHO_TOL: f64 = 1e-10;

/// Allowed deviation of `‖d‖` from one for a [`UnitVector`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Norms below this are treated as zero by [`normalize_to_sphere`].
pub const MIN_NORM: f64 = 1e-300;

/// An N×N matrix certified to satisfy `max |DᵀD - I| ≤ ortho_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoDict {
    data: DMatrix<f64>,
    ortho_tol: f64,
}

impl OrthoDict {
    /// Certifies `data` with the default tolerance.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(data, DEFAULT_ORTHO_TOL)
    }

    pub fn with_tolerance(data: DMatrix<f64>, ortho_tol: f64) -> Result<Self> {
        if !(ortho_tol >= 0.0) {
            return Err(HrpError::InvalidInput(format!(
                "orthogonality tolerance must be nonnegative, got {ortho_tol}"
            )));
        }
        if !data.is_square() || data.nrows() == 0 {
            return Err(HrpError::InvalidInput(format!(
                "orthogonal dictionary must be square and nonempty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        ensure_finite(&data)?;
        let residual = orthogonality_residual(&data);
        if residual > ortho_tol {
            return Err(HrpError::NotOrthogonal {
                residual,
                tol: ortho_tol,
            });
        }
        Ok(Self { data, ortho_tol })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self {
            data: DMatrix::identity(n, n),
            ortho_tol: DEFAULT_ORTHO_TOL,
        }
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn ortho_tol(&self) -> f64 {
        self.ortho_tol
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    /// `max |DᵀD - I|` of the stored matrix.
    pub fn residual(&self) -> f64 {
        orthogonality_residual(&self.data)
    }

    /// Column `j` as a unit vector.
    pub fn atom(&self, j: usize) -> Result<UnitVector> {
        if j >= self.n() {
            return Err(HrpError::IndexOutOfRange {
                index: j,
                dim: self.n(),
            });
        }
        UnitVector::new(self.data.column(j).into_owned())
    }

    /// Left multiplication by another orthogonal matrix, `Q·D`.
    pub fn left_mul(&self, q: &OrthoDict) -> Result<OrthoDict> {
        check_dims("left factor", (self.n(), self.n()), q.data.shape())?;
        OrthoDict::new(&q.data * &self.data)
    }

    pub fn transpose(&self) -> OrthoDict {
        Self {
            data: self.data.transpose(),
            ortho_tol: self.ortho_tol,
        }
    }
}

/// A vector with `|‖d‖ - 1| ≤ 1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    data: DVector<f64>,
}

impl UnitVector {
    pub fn new(data: DVector<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(HrpError::InvalidInput(
                "unit vector must be nonempty".into(),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(HrpError::InvalidInput(
                "unit vector has non-finite entries".into(),
            ));
        }
        let norm = data.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(HrpError::InvalidInput(format!(
                "vector norm {norm} is not within {UNIT_NORM_TOL:e} of 1"
            )));
        }
        Ok(Self { data })
    }

    /// The standard basis vector `e_index` (zero-based).
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(HrpError::IndexOutOfRange { index, dim: n });
        }
        let mut v = DVector::zeros(n);
        v[index] = 1.0;
        Ok(Self { data: v })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Membership query for the good subset 𝒮^{(n±)}_ζ.
///
/// `atom_index` is zero-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodSubsetQuery {
    atom_index: usize,
    sign: Sign,
    zeta: f64,
}

impl GoodSubsetQuery {
    pub fn new(atom_index: usize, sign: Sign, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0) || !zeta.is_finite() {
            return Err(HrpError::InvalidInput(format!(
                "zeta must be positive, got {zeta}"
            )));
        }
        Ok(Self {
            atom_index,
            sign,
            zeta,
        })
    }

    pub fn atom_index(&self) -> usize {
        self.atom_index
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }
}

/// `max |DᵀD - I|` for an arbitrary square matrix.
pub fn orthogonality_residual(d: &DMatrix<f64>) -> f64 {
    let gram = d.transpose() * d;
    let n = gram.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(HrpError::InvalidInput(
            "matrix has non-finite entries".into(),
        ))
    }
}

/// Orthogonal polar factor `U·Vᵀ` of `C = U Σ Vᵀ`.
///
/// This is the maximizer of `⟨S, C⟩` over S ∈ 𝕆(N), with maximum value
/// `Σ σᵢ(C)`. Rank-deficient inputs are accepted; the returned factor is
/// then one of several maximizers, chosen deterministically by the SVD.
pub fn polar(c: &SquareMatrix) -> Result<OrthoDict> {
    if !c.is_square() || c.nrows() == 0 {
        return Err(HrpError::InvalidInput(format!(
            "polar decomposition needs a nonempty square matrix, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    ensure_finite(c)?;
    let svd = SVD::try_new(c.clone(), true, true, f64::EPSILON, 0).ok_or_else(|| {
        HrpError::InvalidInput("singular value decomposition did not converge".into())
    })?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => unreachable!("SVD requested with both factors"),
    };
    OrthoDict::new(u * v_t)
}

/// Nearest orthogonal matrix to `d` in Frobenius norm.
pub fn project_orthogonal(d: &SquareMatrix) -> Result<OrthoDict> {
    polar(d)
}

/// Projection onto the tangent space of 𝕆(N) at `r`: `½(A - R Aᵀ R)`.
///
/// The output `P` satisfies `RᵀP + PᵀR = 0`, i.e. `RᵀP` is skew-symmetric.
pub fn tangent_project(r: &OrthoDict, a: &SquareMatrix) -> Result<SquareMatrix> {
    let n = r.n();
    check_dims("tangent argument", (n, n), a.shape())?;
    let r = r.as_matrix();
    Ok((a - r * a.transpose() * r) * 0.5)
}

/// Projection onto the tangent space of the sphere at `r`: `(I - r rᵀ) a`.
pub fn sphere_tangent_project(r: &UnitVector, a: &DVector<f64>) -> Result<DVector<f64>> {
    check_dims("sphere tangent argument", (r.len(), 1), (a.len(), 1))?;
    let r = r.as_vector();
    Ok(a - r * r.dot(a))
}

/// Rescales `d` to unit length.
pub fn normalize_to_sphere(d: &DVector<f64>) -> Result<UnitVector> {
    if d.iter().any(|v| !v.is_finite()) {
        return Err(HrpError::InvalidInput(
            "vector has non-finite entries".into(),
        ));
    }
    let norm = d.norm();
    if !(norm > MIN_NORM) {
        return Err(HrpError::Degenerate(format!(
            "cannot normalize a vector of norm {norm:e}"
        )));
    }
    UnitVector::new(d / norm)
}

/// Whether `d` lies in 𝒮^{(n±)}_ζ: the sign of `d_n` matches and
/// `d_n² / ‖d_{-n}‖²_∞ ≥ 1 + ζ`.
///
/// A zero `‖d_{-n}‖_∞` counts as an infinite ratio.
pub fn in_good_subset(d: &UnitVector, q: &GoodSubsetQuery) -> Result<bool> {
    let v = d.as_vector();
    let n = q.atom_index;
    if n >= v.len() {
        return Err(HrpError::IndexOutOfRange {
            index: n,
            dim: v.len(),
        });
    }
    let dn = v[n];
    if dn * q.sign.value() <= 0.0 {
        return Ok(false);
    }
    let rest_inf = v
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != n)
        .fold(0.0f64, |acc, (_, x)| acc.max(x.abs()));
    if rest_inf == 0.0 {
        return Ok(true);
    }
    Ok(dn * dn / (rest_inf * rest_inf) >= 1.0 + q.zeta)
}
