//! Self-adjoint linear relations in a finite-dimensional boundary space.
//!
//! A relation `Λ ⊂ G ⊕ G` is described either by a pair `(A, B)` through
//! `Λ = {(x₁, x₂) : A x₁ = B x₂}` or by a unitary Cayley transform `U` through
//! `Λ = {(x₁, x₂) : i(1 + U) x₁ = (1 − U) x₂}`. Relations are compared as
//! subspaces via their orthogonal projectors in `G ⊕ G`.

use crate::error::{check_finite, Error, Result};
use crate::linalg;
use crate::{CMatrix, C64};

/// Default relative threshold for numerical rank decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

const I: C64 = C64::new(0.0, 1.0);

/// Boundary condition `A Γ₁f = B Γ₂f` with square `A`, `B` of equal size.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPair {
    a: CMatrix,
    b: CMatrix,
}

impl BoundaryPair {
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        if !a.is_square() || !b.is_square() || a.shape() != b.shape() {
            return Err(Error::Dimension(format!(
                "boundary pair needs square matrices of equal size, got A {:?} and B {:?}",
                a.shape(),
                b.shape()
            )));
        }
        if a.nrows() == 0 {
            return Err(Error::Dimension("boundary space must be non-trivial".into()));
        }
        check_finite(a.iter().chain(b.iter()).flat_map(|v| [v.re, v.im]), "boundary pair")?;
        Ok(Self { a, b })
    }

    /// `(Λ, I)`: the graph of a Hermitian operator `Λ`.
    pub fn from_operator(lambda: CMatrix) -> Result<Self> {
        let n = lambda.nrows();
        Self::new(lambda, CMatrix::identity(n, n))
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// The `n × 2n` map `(x₁, x₂) ↦ A x₁ − B x₂` whose kernel is the relation.
    fn defining_map(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, n)).copy_from(&(-&self.b));
        m
    }

    /// Orthonormal basis `[X₁; X₂]` (a `2n × k` matrix) of the relation.
    pub fn relation_basis(&self, tol: f64) -> CMatrix {
        linalg::kernel_basis(&self.defining_map(), tol)
    }

    /// Same pair with both matrices multiplied from the left by `c`.
    pub fn left_multiply(&self, c: &CMatrix) -> Result<Self> {
        Self::new(c * &self.a, c * &self.b)
    }
}

/// Outcome of [`validate_boundary_pair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub self_adjoint: bool,
    /// Spectral norm of `AB* − BA*`.
    pub symmetry_defect: f64,
    /// `n − rank(A | B)`.
    pub rank_defect: usize,
}

/// Check `AB* = BA*` and `rank(A | B) = n` at tolerance `tol`.
pub fn validate_boundary_pair(pair: &BoundaryPair, tol: f64) -> Result<ValidationReport> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Input(format!("tolerance must be positive, got {tol}")));
    }
    let (a, b) = (&pair.a, &pair.b);
    let comm = a * b.adjoint() - b * a.adjoint();
    let symmetry_defect = spectral_norm(&comm);
    let scale = spectral_norm(a) * spectral_norm(b) + 1.0;
    let n = pair.dim();
    let rank = linalg::numerical_rank(&pair.defining_map(), tol);
    let rank_defect = n - rank.min(n);
    Ok(ValidationReport {
        self_adjoint: symmetry_defect <= tol * scale && rank_defect == 0,
        symmetry_defect,
        rank_defect,
    })
}

fn spectral_norm(m: &CMatrix) -> f64 {
    linalg::singular_values(m).first().copied().unwrap_or(0.0)
}

/// Unitary Cayley transform of a self-adjoint relation.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyRelation {
    u: CMatrix,
}

impl CayleyRelation {
    /// Wrap `u` after checking `‖U*U − I‖ ≤ tol` (Frobenius).
    pub fn new(u: CMatrix, tol: f64) -> Result<Self> {
        if !u.is_square() || u.nrows() == 0 {
            return Err(Error::Dimension(format!("Cayley transform must be square, got {:?}", u.shape())));
        }
        check_finite(u.iter().flat_map(|v| [v.re, v.im]), "Cayley transform")?;
        let defect = unitarity_defect(&u);
        if defect > tol {
            return Err(Error::Precondition {
                what: "Cayley transform is not unitary".into(),
                defect,
            });
        }
        Ok(Self { u })
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}

/// `A = i(1 + U)`, `B = 1 − U`.
pub fn cayley_to_pair(rel: &CayleyRelation) -> BoundaryPair {
    let n = rel.dim();
    let id = CMatrix::identity(n, n);
    let a = (&id + &rel.u) * I;
    let b = &id - &rel.u;
    BoundaryPair { a, b }
}

/// Recover the Cayley transform from a self-adjoint pair.
///
/// With an orthonormal relation basis `[X₁; X₂]`, the relation equals
/// `{((1 − U)y, i(1 + U)y)}`, hence `X₂ − iX₁ = 2iUY` and `X₂ + iX₁ = 2iY`,
/// which gives `U = (X₂ − iX₁)(X₂ + iX₁)⁻¹`.
pub fn pair_to_cayley(pair: &BoundaryPair, tol: f64) -> Result<CayleyRelation> {
    let report = validate_boundary_pair(pair, tol)?;
    if !report.self_adjoint {
        return Err(Error::Precondition {
            what: format!("boundary pair is not self-adjoint (rank defect {})", report.rank_defect),
            defect: report.symmetry_defect,
        });
    }
    let n = pair.dim();
    let basis = pair.relation_basis(tol);
    if basis.ncols() != n {
        return Err(Error::Numerical(format!(
            "relation has dimension {} instead of {n}",
            basis.ncols()
        )));
    }
    let x1 = basis.rows(0, n).clone_owned();
    let x2 = basis.rows(n, n).clone_owned();
    let num = &x2 - &x1 * I;
    let den = &x2 + &x1 * I;
    let den_inv = linalg::inverse(&den)
        .ok_or_else(|| Error::Numerical("X₂ + iX₁ is singular; relation is not self-adjoint".into()))?;
    let u = num * den_inv;
    let defect = unitarity_defect(&u);
    if defect > tol.max(1e-8) * (n as f64) {
        return Err(Error::Numerical(format!("recovered Cayley transform not unitary (defect {defect:.3e})")));
    }
    Ok(CayleyRelation { u })
}

/// Orthogonal projector in `G ⊕ G` onto a relation.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationProjector {
    p: CMatrix,
}

impl RelationProjector {
    pub fn matrix(&self) -> &CMatrix {
        &self.p
    }

    pub fn trace(&self) -> f64 {
        self.p.trace().re
    }

    /// Frobenius distance to another projector.
    pub fn distance(&self, other: &RelationProjector) -> f64 {
        (&self.p - &other.p).norm()
    }
}

pub fn relation_projector(pair: &BoundaryPair) -> RelationProjector {
    relation_projector_with_tol(pair, DEFAULT_TOL)
}

pub fn relation_projector_with_tol(pair: &BoundaryPair, tol: f64) -> RelationProjector {
    let basis = pair.relation_basis(tol);
    RelationProjector {
        p: linalg::projector_from_basis(&basis),
    }
}

/// The `2n × 2n` block matrix `½[[i(1+U), U−1], [1−U, i(1+U)]]`, unitary for
/// unitary `U`.
pub fn cayley_block(u: &CMatrix) -> CMatrix {
    let n = u.nrows();
    let id = CMatrix::identity(n, n);
    let half = C64::new(0.5, 0.0);
    let diag = (&id + u) * I * half;
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&diag);
    m.view_mut((0, n), (n, n)).copy_from(&((u - &id) * half));
    m.view_mut((n, 0), (n, n)).copy_from(&((&id - u) * half));
    m.view_mut((n, n), (n, n)).copy_from(&diag);
    m
}

/// Decomposition of a self-adjoint relation into an operator part on
/// `dom Λ = (mul Λ)^⊥` and the multivalued part `mul Λ`.
#[derive(Debug, Clone)]
pub struct OperatorPart {
    /// Orthonormal basis (`n × r`) of `dom Λ`.
    pub domain: CMatrix,
    /// Hermitian `r × r` matrix of the operator part in that basis.
    pub operator: CMatrix,
}

impl OperatorPart {
    pub fn rank(&self) -> usize {
        self.domain.ncols()
    }
}

/// Split a self-adjoint relation into operator and multivalued parts. For a
/// pair with invertible `B` the domain is the whole space and the operator is
/// `B⁻¹A`.
pub fn operator_part(pair: &BoundaryPair, tol: f64) -> Result<OperatorPart> {
    let n = pair.dim();
    let basis = pair.relation_basis(tol);
    if basis.ncols() != n {
        return Err(Error::Precondition {
            what: "relation is not maximal (not self-adjoint)".into(),
            defect: (basis.ncols() as f64 - n as f64).abs(),
        });
    }
    let x1 = basis.rows(0, n).clone_owned();
    let x2 = basis.rows(n, n).clone_owned();
    let svd = x1.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] > tol * smax.max(1.0)).collect();
    let r = keep.len();
    let mut domain = CMatrix::zeros(n, r);
    let mut image = CMatrix::zeros(n, r);
    for (j, &k) in keep.iter().enumerate() {
        domain.set_column(j, &u.column(k));
        // Combination of relation vectors whose first component is u_k.
        let coeffs = v_t.row(k).adjoint() / C64::new(sigma[k], 0.0);
        image.set_column(j, &(&x2 * coeffs));
    }
    let op = domain.adjoint() * image;
    let op = (&op + op.adjoint()) * C64::new(0.5, 0.0);
    Ok(OperatorPart { domain, operator: op })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn mat(n: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(n, n, &data.iter().map(|&v| c(v)).collect::<Vec<_>>())
    }

    #[test]
    fn diagonal_real_pair_is_self_adjoint() {
        let pair = BoundaryPair::new(mat(3, &[1.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.5]), CMatrix::identity(3, 3)).unwrap();
        let r = validate_boundary_pair(&pair, 1e-10).unwrap();
        assert!(r.self_adjoint);
        assert_eq!(r.rank_defect, 0);
    }

    #[test]
    fn dirichlet_type_pair_is_self_adjoint() {
        let pair = BoundaryPair::new(CMatrix::identity(2, 2), CMatrix::zeros(2, 2)).unwrap();
        assert!(validate_boundary_pair(&pair, 1e-10).unwrap().self_adjoint);
    }

    #[test]
    fn nilpotent_pair_is_rejected_with_unit_defect() {
        let pair = BoundaryPair::new(mat(2, &[0.0, 1.0, 0.0, 0.0]), CMatrix::identity(2, 2)).unwrap();
        let r = validate_boundary_pair(&pair, 1e-10).unwrap();
        assert!(!r.self_adjoint);
        assert!((r.symmetry_defect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_pair_has_rank_defect() {
        let pair = BoundaryPair::new(CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)).unwrap();
        let r = validate_boundary_pair(&pair, 1e-10).unwrap();
        assert_eq!(r.rank_defect, 2);
        assert!(!r.self_adjoint);
    }

    #[test]
    fn dimension_and_nan_errors() {
        assert!(matches!(
            BoundaryPair::new(CMatrix::zeros(2, 2), CMatrix::zeros(3, 3)),
            Err(Error::Dimension(_))
        ));
        let mut a = CMatrix::identity(2, 2);
        a[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(BoundaryPair::new(a, CMatrix::identity(2, 2)), Err(Error::Input(_))));
    }

    #[test]
    fn cayley_minus_identity_is_zero_operator() {
        let rel = CayleyRelation::new(-CMatrix::identity(2, 2), 1e-12).unwrap();
        let pair = cayley_to_pair(&rel);
        assert!(pair.a().norm() < 1e-15);
        assert!((pair.b() - CMatrix::identity(2, 2) * c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn cayley_identity_is_dirichlet_relation() {
        let rel = CayleyRelation::new(CMatrix::identity(1, 1), 1e-12).unwrap();
        let pair = cayley_to_pair(&rel);
        assert_eq!(pair.a()[(0, 0)], C64::new(0.0, 2.0));
        assert_eq!(pair.b()[(0, 0)], c(0.0));
    }

    #[test]
    fn scalar_cayley_gives_cotangent_operator() {
        // U = e^{-2iθ} encodes the graph of cot θ.
        for theta in [0.3_f64, 1.1, 2.5] {
            let u = CMatrix::from_element(1, 1, C64::from_polar(1.0, -2.0 * theta));
            let pair = cayley_to_pair(&CayleyRelation::new(u, 1e-12).unwrap());
            let graph = BoundaryPair::from_operator(CMatrix::from_element(1, 1, c(1.0 / theta.tan()))).unwrap();
            assert!(relation_projector(&pair).distance(&relation_projector(&graph)) < 1e-12);
        }
    }

    #[test]
    fn non_unitary_cayley_rejected() {
        let err = CayleyRelation::new(mat(1, &[2.0]), 1e-10).unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
    }

    #[test]
    fn pair_to_cayley_scalar_operator() {
        for lambda in [-3.0, 0.0, 0.7] {
            let pair = BoundaryPair::from_operator(mat(1, &[lambda])).unwrap();
            let u = pair_to_cayley(&pair, 1e-10).unwrap();
            let expect = C64::new(lambda, -1.0) / C64::new(lambda, 1.0);
            assert!((u.u()[(0, 0)] - expect).norm() < 1e-12);
        }
        let zero = BoundaryPair::new(CMatrix::zeros(2, 2), CMatrix::identity(2, 2)).unwrap();
        let u = pair_to_cayley(&zero, 1e-10).unwrap();
        assert!((u.u() + CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn pair_to_cayley_rejects_non_self_adjoint() {
        let pair = BoundaryPair::new(mat(2, &[0.0, 1.0, 0.0, 0.0]), CMatrix::identity(2, 2)).unwrap();
        assert!(pair_to_cayley(&pair, 1e-10).is_err());
    }

    #[test]
    fn projector_examples() {
        let dir = BoundaryPair::new(mat(1, &[1.0]), mat(1, &[0.0])).unwrap();
        let p = relation_projector(&dir);
        assert!((p.matrix() - mat(2, &[0.0, 0.0, 0.0, 1.0])).norm() < 1e-14);
        let zero = BoundaryPair::new(mat(1, &[0.0]), mat(1, &[1.0])).unwrap();
        assert!((relation_projector(&zero).matrix() - mat(2, &[1.0, 0.0, 0.0, 0.0])).norm() < 1e-14);
        let one = BoundaryPair::new(mat(1, &[1.0]), mat(1, &[1.0])).unwrap();
        assert!((relation_projector(&one).matrix() - mat(2, &[0.5, 0.5, 0.5, 0.5])).norm() < 1e-14);
    }

    #[test]
    fn operator_part_of_glued_vertex() {
        // f(0) = f(1), f'(0) − f'(1) = α f(0)
        let alpha = 1.5;
        let a = mat(2, &[1.0, -1.0, alpha / 2.0, alpha / 2.0]);
        let b = mat(2, &[0.0, 0.0, 1.0, 1.0]);
        let pair = BoundaryPair::new(a, b).unwrap();
        assert!(validate_boundary_pair(&pair, 1e-10).unwrap().self_adjoint);
        let op = operator_part(&pair, 1e-10).unwrap();
        assert_eq!(op.rank(), 1);
        assert!((op.operator[(0, 0)].re - alpha / 2.0).abs() < 1e-12);
        let d = &op.domain;
        assert!((d[(0, 0)] - d[(1, 0)]).norm() < 1e-12);
    }

    #[test]
    fn operator_part_of_invertible_b() {
        let lam = mat(2, &[1.0, 2.0, 2.0, -1.0]);
        let c2 = mat(2, &[2.0, 1.0, 0.0, 1.0]);
        let pair = BoundaryPair::new(&c2 * &lam, c2.clone()).unwrap();
        let op = operator_part(&pair, 1e-10).unwrap();
        let full = &op.domain * &op.operator * op.domain.adjoint();
        assert!((full - lam).norm() < 1e-12);
    }
}
