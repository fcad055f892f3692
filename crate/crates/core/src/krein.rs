//! Q-functions and the spectrum of `H_Λ` in the gaps of `H⁰`.
//!
//! For `z ∉ spec H⁰` the Krein formula
//! `(H⁰ − z)⁻¹ − (H_Λ − z)⁻¹ = γ(z)(Q(z) − Λ)⁻¹γ*(z̄)` reduces questions about
//! `H_Λ` to the finite matrix `Q(z) − Λ`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_defect, hermitian_eigen, imaginary_fraction, HermitianEigen};
use crate::linrel::{operator_part, BoundaryPair, DEFAULT_TOL};
use crate::quadrature::richardson;
use crate::spectrum::{Multiplicity, SpectralBand, SpectralPoint, SpectralTypes, SpectrumDescription};
use crate::{CMatrix, CVector, C64};

/// Relative threshold below which eigen/singular values count as zero.
pub const KERNEL_TOL: f64 = 1e-8;

/// A matrix-valued Nevanlinna function on a finite boundary space.
pub trait QFunction: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, z: C64) -> Result<CMatrix>;

    /// `Q′(x)` for real `x` off the singular set.
    fn derivative(&self, x: f64) -> Result<CMatrix> {
        complex_step_derivative(self, x)
    }

    /// Laurent data at known isolated poles.
    fn pole_data(&self) -> Vec<PoleData> {
        Vec::new()
    }
}

impl<T: QFunction + ?Sized> QFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: C64) -> Result<CMatrix> {
        (**self).eval(z)
    }
    fn derivative(&self, x: f64) -> Result<CMatrix> {
        (**self).derivative(x)
    }
    fn pole_data(&self) -> Vec<PoleData> {
        (**self).pole_data()
    }
}

/// Derivative on the real axis. Uses the complex step `Im Q(x + ih)/h` when
/// `Q(x)` is a real matrix; otherwise the symmetric quotient
/// `(Q(x+iy) − Q(x−iy))/2iy`, extrapolated in `y`.
pub fn complex_step_derivative<Q: QFunction + ?Sized>(q: &Q, x: f64) -> Result<CMatrix> {
    let at = q.eval(C64::new(x, 0.0))?;
    if imaginary_fraction(&at) < 1e-14 {
        let h = 1e-20 * (x.abs() + 1.0);
        let v = q.eval(C64::new(x, h))?;
        return Ok(v.map(|e| C64::new(e.im / h, 0.0)));
    }
    imaginary_difference(|z| q.eval(z), x)
}

fn imaginary_difference(f: impl Fn(C64) -> Result<CMatrix>, x: f64) -> Result<CMatrix> {
    let base = 1e-3 * (1.0 + x.abs());
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for k in 0..5 {
        let y = base / f64::from(1u32 << k);
        let d = (f(C64::new(x, y))? - f(C64::new(x, -y))?) / C64::new(0.0, 2.0 * y);
        ts.push(y * y);
        vs.push(d);
    }
    let (v, _) = richardson(&ts, &vs);
    Ok((&v + v.adjoint()) * C64::new(0.5, 0.0))
}

/// Laurent data at an isolated real pole `ε⁰`:
/// `Q(z) = residue/(z − ε⁰) + regular_value + O(z − ε⁰)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleData {
    pub epsilon0: f64,
    /// Hermitian negative semidefinite.
    pub residue: CMatrix,
    pub regular_value: CMatrix,
}

/// A scalar Nevanlinna function.
pub trait ScalarQ: Sync {
    fn eval(&self, z: C64) -> Result<C64>;

    fn derivative(&self, x: f64) -> Result<f64> {
        let h = 1e-20 * (x.abs() + 1.0);
        Ok(self.eval(C64::new(x, h))?.im / h)
    }

    /// Poles inside `[lo, hi]`, ascending; `None` if the pole set is unknown.
    fn poles_in(&self, _lo: f64, _hi: f64) -> Option<Vec<f64>> {
        None
    }
}

/// A scalar Q-function viewed as a 1×1 matrix function.
#[derive(Debug, Clone)]
pub struct ScalarAsMatrix<S>(pub S);

impl<S: ScalarQ> QFunction for ScalarAsMatrix<S> {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, z: C64) -> Result<CMatrix> {
        Ok(CMatrix::from_element(1, 1, self.0.eval(z)?))
    }
    fn derivative(&self, x: f64) -> Result<CMatrix> {
        Ok(CMatrix::from_element(1, 1, C64::new(self.0.derivative(x)?, 0.0)))
    }
}

/// `Q(z) = C + zD + Σ_k W_k/(p_k − z)` with `D, W_k ⪰ 0` Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalNevanlinna {
    constant: CMatrix,
    slope: CMatrix,
    poles: Vec<(f64, CMatrix)>,
}

fn check_psd(m: &CMatrix, what: &str) -> Result<()> {
    let d = hermitian_defect(m);
    if d > 1e-10 {
        return Err(Error::Precondition { what: format!("{what} is not Hermitian"), defect: d });
    }
    let ev = linalg::hermitian_eigenvalues(m)?;
    let lo = ev.first().copied().unwrap_or(0.0);
    if lo < -1e-10 * m.norm().max(1.0) {
        return Err(Error::Precondition { what: format!("{what} is not positive semidefinite"), defect: -lo });
    }
    Ok(())
}

impl RationalNevanlinna {
    pub fn new(constant: CMatrix, slope: CMatrix, poles: Vec<(f64, CMatrix)>) -> Result<Self> {
        let n = constant.nrows();
        let shapes_ok = constant.is_square()
            && slope.shape() == (n, n)
            && poles.iter().all(|(_, w)| w.shape() == (n, n));
        if !shapes_ok {
            return Err(Error::Dimension("all coefficients must be n×n".into()));
        }
        let d = hermitian_defect(&constant);
        if d > 1e-10 {
            return Err(Error::Precondition { what: "constant term is not Hermitian".into(), defect: d });
        }
        check_psd(&slope, "slope")?;
        let mut merged: Vec<(f64, CMatrix)> = Vec::new();
        let mut sorted = poles;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (p, w) in sorted {
            if !p.is_finite() {
                return Err(Error::Input("pole location is not finite".into()));
            }
            check_psd(&w, "pole weight")?;
            match merged.last_mut() {
                Some((q, acc)) if *q == p => *acc += w,
                _ => merged.push((p, w)),
            }
        }
        Ok(Self { constant, slope, poles: merged })
    }

    /// Scalar `c + s·z + Σ w_k/(p_k − z)`.
    pub fn scalar(constant: f64, slope: f64, poles: &[(f64, f64)]) -> Result<Self> {
        let m = |v: f64| CMatrix::from_element(1, 1, C64::new(v, 0.0));
        Self::new(m(constant), m(slope), poles.iter().map(|&(p, w)| (p, m(w))).collect())
    }

    pub fn poles(&self) -> impl Iterator<Item = f64> + '_ {
        self.poles.iter().map(|(p, _)| *p)
    }

    fn pole_scale(p: f64) -> f64 {
        1e-14 * p.abs().max(1.0)
    }
}

impl QFunction for RationalNevanlinna {
    fn dim(&self) -> usize {
        self.constant.nrows()
    }

    fn eval(&self, z: C64) -> Result<CMatrix> {
        let mut q = &self.constant + &self.slope * z;
        for (p, w) in &self.poles {
            let d = C64::new(*p, 0.0) - z;
            if d.norm() < Self::pole_scale(*p) {
                return Err(Error::PoleProximity { z: z.to_string(), pole: *p });
            }
            q += w / d;
        }
        Ok(q)
    }

    fn derivative(&self, x: f64) -> Result<CMatrix> {
        let mut d = self.slope.clone();
        for (p, w) in &self.poles {
            let gap = p - x;
            if gap.abs() < Self::pole_scale(*p) {
                return Err(Error::PoleProximity { z: x.to_string(), pole: *p });
            }
            d += w * C64::new(1.0 / (gap * gap), 0.0);
        }
        Ok(d)
    }

    fn pole_data(&self) -> Vec<PoleData> {
        self.poles
            .iter()
            .enumerate()
            .map(|(k, (p, w))| {
                let mut regular = &self.constant + &self.slope * C64::new(*p, 0.0);
                for (j, (pj, wj)) in self.poles.iter().enumerate() {
                    if j != k {
                        regular += wj * C64::new(1.0 / (pj - p), 0.0);
                    }
                }
                PoleData { epsilon0: *p, residue: -w, regular_value: regular }
            })
            .collect()
    }
}

impl ScalarQ for RationalNevanlinna {
    fn eval(&self, z: C64) -> Result<C64> {
        if self.dim() != 1 {
            return Err(Error::Dimension(format!("scalar evaluation of a {}-dimensional Q", self.dim())));
        }
        Ok(QFunction::eval(self, z)?[(0, 0)])
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        Ok(QFunction::derivative(self, x)?[(0, 0)].re)
    }

    fn poles_in(&self, lo: f64, hi: f64) -> Option<Vec<f64>> {
        Some(self.poles().filter(|p| (lo..=hi).contains(p)).collect())
    }
}

/// Finite model: `H⁰` Hermitian on `ℂᴺ`, `Q(z) = C + G*(H⁰ − z)⁻¹G`,
/// `γ(z) = (H⁰ − z)⁻¹G`. For Hermitian `Λ` with `Λ − C` invertible the
/// extension is `H_Λ = H⁰ − G(Λ − C)⁻¹G*`.
#[derive(Debug, Clone)]
pub struct FiniteModel {
    h0: CMatrix,
    g: CMatrix,
    c: CMatrix,
    h0_eigen: HermitianEigen,
    q: RationalNevanlinna,
}

impl FiniteModel {
    pub fn new(h0: CMatrix, g: CMatrix, c: CMatrix) -> Result<Self> {
        let big_n = h0.nrows();
        let n = g.ncols();
        if !h0.is_square() || g.nrows() != big_n || c.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "H⁰ {:?}, G {:?}, C {:?} are not compatible",
                h0.shape(),
                g.shape(),
                c.shape()
            )));
        }
        let d = hermitian_defect(&h0);
        if d > 1e-10 {
            return Err(Error::Precondition { what: "H⁰ is not Hermitian".into(), defect: d });
        }
        let h0_eigen = hermitian_eigen(&h0)?;
        let scale = h0_eigen.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let mut poles: Vec<(f64, CMatrix)> = Vec::new();
        let mut k = 0;
        while k < big_n {
            let mut j = k + 1;
            while j < big_n && h0_eigen.values[j] - h0_eigen.values[k] <= 1e-10 * scale {
                j += 1;
            }
            let idx: Vec<usize> = (k..j).collect();
            let v = linalg::columns(&h0_eigen.vectors, &idx);
            let gv = g.adjoint() * &v;
            let w = &gv * gv.adjoint();
            let mean = h0_eigen.values[k..j].iter().sum::<f64>() / (j - k) as f64;
            poles.push((mean, (&w + w.adjoint()) * C64::new(0.5, 0.0)));
            k = j;
        }
        let q = RationalNevanlinna::new(c.clone(), CMatrix::zeros(n, n), poles)?;
        Ok(Self { h0, g, c, h0_eigen, q })
    }

    pub fn h0(&self) -> &CMatrix {
        &self.h0
    }

    pub fn h0_eigen(&self) -> &HermitianEigen {
        &self.h0_eigen
    }

    pub fn q_function(&self) -> &RationalNevanlinna {
        &self.q
    }

    /// `H_Λ = H⁰ − G(Λ − C)⁻¹G*`.
    pub fn extension(&self, lambda: &CMatrix) -> Result<CMatrix> {
        let shift = lambda - &self.c;
        let sv = linalg::singular_values(&shift);
        if sv.last().is_some_and(|&s| s <= 1e-10 * sv[0].max(1.0)) {
            return Err(Error::Input("Λ − C is numerically singular; extension is not a bounded perturbation".into()));
        }
        let inv = linalg::inverse(&shift)
            .ok_or_else(|| Error::Input("Λ − C is singular; extension is not a bounded perturbation".into()))?;
        let h = &self.h0 - &self.g * inv * self.g.adjoint();
        Ok((&h + h.adjoint()) * C64::new(0.5, 0.0))
    }

    fn shifted(&self, z: C64) -> CMatrix {
        let n = self.h0.nrows();
        &self.h0 - CMatrix::identity(n, n) * z
    }

    /// `γ(z)ξ = (H⁰ − z)⁻¹Gξ`.
    pub fn gamma(&self, z: C64, xi: &CVector) -> Result<CVector> {
        linalg::solve(&self.shifted(z), &(&self.g * xi))
            .ok_or_else(|| Error::InSpectrum(format!("{z} (of H⁰)")))
    }

    /// `γ(w)*φ = G*(H⁰ − w̄)⁻¹φ`.
    pub fn gamma_adjoint(&self, w: C64, phi: &CVector) -> Result<CVector> {
        let r = linalg::solve(&self.shifted(w.conj()), phi)
            .ok_or_else(|| Error::InSpectrum(format!("{w} (of H⁰)")))?;
        Ok(self.g.adjoint() * r)
    }
}

impl QFunction for FiniteModel {
    fn dim(&self) -> usize {
        self.g.ncols()
    }
    fn eval(&self, z: C64) -> Result<CMatrix> {
        QFunction::eval(&self.q, z)
    }
    fn derivative(&self, x: f64) -> Result<CMatrix> {
        QFunction::derivative(&self.q, x)
    }
    fn pole_data(&self) -> Vec<PoleData> {
        self.q.pole_data()
    }
}

/// `W*Q(z)W` for an orthonormal `W`: the Q-function seen on `dom Λ`.
#[derive(Debug, Clone)]
pub struct CompressedQ<Q> {
    inner: Q,
    domain: CMatrix,
}

impl<Q: QFunction> CompressedQ<Q> {
    pub fn domain(&self) -> &CMatrix {
        &self.domain
    }
}

impl<Q: QFunction> QFunction for CompressedQ<Q> {
    fn dim(&self) -> usize {
        self.domain.ncols()
    }
    fn eval(&self, z: C64) -> Result<CMatrix> {
        Ok(self.domain.adjoint() * self.inner.eval(z)? * &self.domain)
    }
    fn derivative(&self, x: f64) -> Result<CMatrix> {
        Ok(self.domain.adjoint() * self.inner.derivative(x)? * &self.domain)
    }
}

/// Reduce `(Q, Λ)` with `Λ` a self-adjoint relation to `(W*QW, Λ_op)` on
/// `dom Λ`, where spectral questions only involve the operator part.
pub fn compress<Q: QFunction>(q: Q, pair: &BoundaryPair) -> Result<(CompressedQ<Q>, CMatrix)> {
    if q.dim() != pair.dim() {
        return Err(Error::Dimension(format!(
            "Q acts on ℂ^{} but the boundary pair on ℂ^{}",
            q.dim(),
            pair.dim()
        )));
    }
    let part = operator_part(pair, DEFAULT_TOL)?;
    Ok((CompressedQ { inner: q, domain: part.domain }, part.operator))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    /// Number of scan cells across the window.
    pub grid: usize,
    /// Relative tolerance on the located energies.
    pub tol: f64,
    pub kernel_tol: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self { grid: 256, tol: 1e-12, kernel_tol: KERNEL_TOL }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectedEigenvalue {
    pub energy: f64,
    pub multiplicity: usize,
    /// Orthonormal `n × multiplicity` basis of `ker(BQ(E) − A)`.
    pub kernel_basis: CMatrix,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Detection {
    pub eigenvalues: Vec<DetectedEigenvalue>,
    pub warnings: Vec<String>,
}

impl Detection {
    pub fn energies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.energy).collect()
    }

    pub fn to_spectrum(&self) -> SpectrumDescription {
        SpectrumDescription {
            points: self
                .eigenvalues
                .iter()
                .map(|e| SpectralPoint {
                    energy: e.energy,
                    multiplicity: Multiplicity::Finite(e.multiplicity),
                    types: SpectralTypes::discrete(),
                })
                .collect(),
            bands: Vec::new(),
        }
    }
}

struct Pencil<'a, Q: ?Sized> {
    q: &'a Q,
    domain: CMatrix,
    lambda: CMatrix,
}

impl<Q: QFunction + ?Sized> Pencil<'_, Q> {
    fn matrix(&self, x: f64) -> Result<CMatrix> {
        let m = self.domain.adjoint() * self.q.eval(C64::new(x, 0.0))? * &self.domain - &self.lambda;
        Ok((&m + m.adjoint()) * C64::new(0.5, 0.0))
    }

    fn derivative(&self, x: f64) -> Result<CMatrix> {
        Ok(self.domain.adjoint() * self.q.derivative(x)? * &self.domain)
    }

    /// Number of negative eigenvalues of `W*Q(x)W − Λ_op`; strictly
    /// decreasing across eigenvalues of `H_Λ` since `Q′ ≻ 0`.
    fn negatives(&self, x: f64) -> Result<usize> {
        let ev = linalg::hermitian_eigenvalues(&self.matrix(x)?)?;
        Ok(ev.iter().filter(|&&v| v < 0.0).count())
    }

    fn isolate(&self, a: f64, na: usize, b: f64, nb: usize, tol: f64, out: &mut Vec<(f64, f64, usize)>) -> Result<()> {
        if na == nb {
            return Ok(());
        }
        if b - a <= tol * (1.0 + a.abs().max(b.abs())) {
            out.push((a, b, na - nb));
            return Ok(());
        }
        let m = 0.5 * (a + b);
        let nm = self.negatives(m)?;
        if nm > na || nm < nb {
            return Err(Error::Bracketing {
                lo: a,
                hi: b,
                reason: "eigenvalue count is not monotone: Q has a singularity here".into(),
            });
        }
        self.isolate(a, na, m, nm, tol, out)?;
        self.isolate(m, nm, b, nb, tol, out)
    }
}

/// Eigenvalues of `H_Λ` in the open window `(lo, hi) ⊂ res H⁰`, with
/// multiplicities and boundary kernels.
pub fn detect_eigenvalues<Q: QFunction + ?Sized>(
    q: &Q,
    bc: &BoundaryPair,
    window: (f64, f64),
    opts: &DetectOptions,
) -> Result<Detection> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Input(format!("invalid window ({lo}, {hi})")));
    }
    if opts.grid < 2 {
        return Err(Error::Input("scan grid needs at least 2 cells".into()));
    }
    if q.dim() != bc.dim() {
        return Err(Error::Dimension(format!("Q acts on ℂ^{} but the boundary pair on ℂ^{}", q.dim(), bc.dim())));
    }
    let part = operator_part(bc, DEFAULT_TOL)?;
    let mut detection = Detection::default();
    if part.rank() == 0 {
        // Λ = {0} ⊕ G: H_Λ = H⁰ and there is nothing in the gaps.
        return Ok(detection);
    }
    let pencil = Pencil { q, domain: part.domain.clone(), lambda: part.operator.clone() };
    let xs: Vec<f64> = (0..=opts.grid)
        .map(|i| if i == opts.grid { hi } else { lo + (hi - lo) * i as f64 / opts.grid as f64 })
        .collect();
    let counts = xs.par_iter().map(|&x| pencil.negatives(x)).collect::<Result<Vec<_>>>()?;

    let mut leaves: Vec<(f64, f64, usize)> = Vec::new();
    for i in 0..opts.grid {
        if counts[i + 1] > counts[i] {
            return Err(Error::Bracketing {
                lo: xs[i],
                hi: xs[i + 1],
                reason: "eigenvalue count increases: Q has a pole in the window".into(),
            });
        }
        let before = leaves.len();
        pencil.isolate(xs[i], counts[i], xs[i + 1], counts[i + 1], opts.tol, &mut leaves)?;
        let found = leaves.len() - before;
        if found > 1 {
            let suggested = opts.grid * (found + 1);
            detection.warnings.push(format!(
                "scan cell [{}, {}] held {found} distinct eigenvalues; a grid of {suggested} would separate them",
                xs[i],
                xs[i + 1]
            ));
        }
    }

    // Merge leaves that resolve the same eigenvalue.
    let mut merged: Vec<(f64, f64, usize)> = Vec::new();
    for leaf in leaves {
        match merged.last_mut() {
            Some(last) if leaf.0 - last.1 <= 1e-10 * (1.0 + leaf.0.abs()) => {
                last.1 = leaf.1;
                last.2 += leaf.2;
            }
            _ => merged.push(leaf),
        }
    }

    for (a, b, mult) in merged {
        let mut energy = 0.5 * (a + b);
        let f = pencil.matrix(energy)?;
        let eig = hermitian_eigen(&f)?;
        if mult == 1 {
            // One safeguarded Newton step on the branch through zero.
            let k = (0..eig.dim())
                .min_by(|&i, &j| eig.values[i].abs().total_cmp(&eig.values[j].abs()))
                .expect("non-empty pencil");
            let v = eig.vectors.column(k).clone_owned();
            let slope = (v.adjoint() * pencil.derivative(energy)? * &v)[(0, 0)].re;
            if slope > 0.0 {
                let step = energy - eig.values[k] / slope;
                let pad = 1e-12 * (1.0 + energy.abs());
                if step >= a - pad && step <= b + pad {
                    energy = step;
                }
            }
        }
        let f = pencil.matrix(energy)?;
        let eig = hermitian_eigen(&f)?;
        let mut order: Vec<usize> = (0..eig.dim()).collect();
        order.sort_by(|&i, &j| eig.values[i].abs().total_cmp(&eig.values[j].abs()));
        let chosen = &order[..mult.min(order.len())];
        let kernel = &part.domain * linalg::columns(&eig.vectors, chosen);
        let scale = eig.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let numerical = eig.values.iter().filter(|v| v.abs() <= opts.kernel_tol * scale).count();
        if numerical != mult {
            detection.warnings.push(format!(
                "eigenvalue {energy}: branch count gives multiplicity {mult}, numerical kernel has dimension {numerical}"
            ));
        }
        detection.eigenvalues.push(DetectedEigenvalue { energy, multiplicity: mult, kernel_basis: kernel });
    }
    Ok(detection)
}

/// Boundary data of the eigenprojector of `H_Λ` at an isolated eigenvalue `E`:
/// `P_Λ = γ(E) S Π S γ*(E)` with `S = Q′(E)^{−1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenProjector {
    /// Orthoprojector onto `ker S(Q(E) − Λ)S`.
    pub pi: CMatrix,
    /// `S` times an orthonormal basis of that kernel; `γ(E)` of its columns
    /// is an orthonormal eigenbasis.
    pub boundary_factor: CMatrix,
    pub rank: usize,
}

pub fn eigenprojector<Q: QFunction + ?Sized>(q: &Q, lambda: &CMatrix, e: f64) -> Result<EigenProjector> {
    let n = q.dim();
    if lambda.shape() != (n, n) {
        return Err(Error::Dimension(format!("Λ is {:?}, Q acts on ℂ^{n}", lambda.shape())));
    }
    let dq = q.derivative(e)?;
    let dq = (&dq + dq.adjoint()) * C64::new(0.5, 0.0);
    let deig = hermitian_eigen(&dq)?;
    let top = deig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let bottom = deig.values.first().copied().unwrap_or(0.0);
    if bottom <= 1e-12 * top.max(1.0) {
        return Err(Error::Precondition { what: format!("Q′({e}) is not positive definite"), defect: -bottom });
    }
    let s = deig.apply_fn(|v| 1.0 / v.sqrt());
    let m = &s * (q.eval(C64::new(e, 0.0))? - lambda) * &s;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let meig = hermitian_eigen(&m)?;
    let scale = meig.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let kernel = meig.select(|v| v.abs() <= KERNEL_TOL * scale);
    Ok(EigenProjector {
        pi: linalg::projector_from_basis(&kernel),
        boundary_factor: &s * &kernel,
        rank: kernel.ncols(),
    })
}

/// `γ(z)(Q(z) − Λ)⁻¹γ*(z̄)φ`, the difference `(H⁰ − z)⁻¹φ − (H_Λ − z)⁻¹φ`.
/// `gamma_adj(w, φ)` must return `γ(w)*φ`.
pub fn resolvent_difference_apply<Q, S>(
    q: &Q,
    gamma: impl Fn(C64, &CVector) -> Result<S>,
    gamma_adj: impl Fn(C64, &S) -> Result<CVector>,
    lambda: &CMatrix,
    z: C64,
    phi: &S,
) -> Result<S>
where
    Q: QFunction + ?Sized,
{
    let xi = gamma_adj(z.conj(), phi)?;
    let m = q.eval(z)? - lambda;
    let sv = linalg::singular_values(&m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smin <= 1e-13 * smax.max(1.0) {
        return Err(Error::InSpectrum(z.to_string()));
    }
    let eta = linalg::solve(&m, &xi).ok_or_else(|| Error::InSpectrum(z.to_string()))?;
    gamma(z, &eta)
}

type RealMap<'a> = Box<dyn Fn(f64) -> Result<f64> + Sync + 'a>;

/// `Q(z) − Λ = (A − m(z))/n(z)` on a gap: `spec_• H_Λ = m⁻¹(spec_• A)` there.
pub struct SpecialQ<'a> {
    pub m: RealMap<'a>,
    pub n_fun: RealMap<'a>,
    /// Label of the operator `A` whose spectrum is pulled back.
    pub operator: String,
}

impl<'a> SpecialQ<'a> {
    pub fn new(
        operator: impl Into<String>,
        m: impl Fn(f64) -> Result<f64> + Sync + 'a,
        n_fun: impl Fn(f64) -> Result<f64> + Sync + 'a,
    ) -> Self {
        Self { m: Box::new(m), n_fun: Box::new(n_fun), operator: operator.into() }
    }
}

const PULLBACK_SAMPLES: usize = 400;

fn sample(f: &(dyn Fn(f64) -> Result<f64> + Sync), lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs: Vec<f64> = (0..=PULLBACK_SAMPLES)
        .map(|i| if i == PULLBACK_SAMPLES { hi } else { lo + (hi - lo) * i as f64 / PULLBACK_SAMPLES as f64 })
        .collect();
    let ys = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    Ok((xs, ys))
}

fn check_monotone(f: &(dyn Fn(f64) -> Result<f64> + Sync), xs: &[f64], ys: &[f64]) -> Result<bool> {
    let increasing = ys[1] > ys[0];
    for i in 1..ys.len() {
        let ok = if increasing { ys[i] > ys[i - 1] } else { ys[i] < ys[i - 1] };
        if !ok {
            // The extremum lies in the two cells around xs[i − 1].
            let a = xs[i.saturating_sub(2)];
            let b = xs[i];
            let sign = if increasing { -1.0 } else { 1.0 };
            let (x, _) = crate::roots::golden_min(|x| f(x).map(|v| sign * v).unwrap_or(f64::NAN), a, b, 1e-10);
            return Err(Error::NotMonotone(x));
        }
    }
    Ok(increasing)
}

/// Invert a strictly monotone `f` on `[lo, hi]` at value `v` by bisection to
/// full precision.
fn invert_monotone(f: &(dyn Fn(f64) -> Result<f64> + Sync), v: f64, lo: f64, hi: f64, increasing: bool) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let below = f(m)? < v;
        if below == increasing {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * (1.0 + m.abs()) {
            break;
        }
    }
    let (fa, fb) = (f(a)?, f(b)?);
    Ok(if (fa - v).abs() <= (fb - v).abs() { a } else { b })
}

fn monotone_pullback(
    f: &(dyn Fn(f64) -> Result<f64> + Sync),
    spec: &SpectrumDescription,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
    increasing: bool,
) -> Result<SpectrumDescription> {
    let (vmin, vmax) = if increasing { (f_lo, f_hi) } else { (f_hi, f_lo) };
    let inv = |v: f64| invert_monotone(f, v, lo, hi, increasing);
    let mut out = SpectrumDescription::new();
    for p in &spec.points {
        if p.energy > vmin && p.energy < vmax {
            out.points.push(SpectralPoint { energy: inv(p.energy)?, ..p.clone() });
        }
    }
    for band in &spec.bands {
        if band.hi <= vmin || band.lo >= vmax {
            continue;
        }
        let map_end = |v: f64, at_min: bool| -> Result<f64> {
            let clipped = if at_min { v <= vmin } else { v >= vmax };
            if clipped {
                // The preimage runs out to the window boundary.
                Ok(if at_min == increasing { lo } else { hi })
            } else {
                inv(v)
            }
        };
        let x1 = map_end(band.lo, true)?;
        let x2 = map_end(band.hi, false)?;
        let (a, b) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        if a < b {
            out.bands.push(SpectralBand { lo: a, hi: b, types: band.types });
        }
    }
    out.sort();
    Ok(out)
}

/// `m⁻¹(spec A) ∩ window` with type tags transported.
pub fn pullback_special(sq: &SpecialQ<'_>, spec_a: &SpectrumDescription, window: (f64, f64)) -> Result<SpectrumDescription> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Input(format!("invalid window ({lo}, {hi})")));
    }
    let (xs, ns) = sample(&*sq.n_fun, lo, hi)?;
    let positive = ns[0] > 0.0;
    if let Some(i) = ns.iter().position(|&v| v == 0.0 || (v > 0.0) != positive) {
        return Err(Error::Hypothesis(format!(
            "denominator n(z) of {} vanishes or changes sign near {}",
            sq.operator, xs[i]
        )));
    }
    let (xs, ms) = sample(&*sq.m, lo, hi)?;
    let increasing = check_monotone(&*sq.m, &xs, &ms)?;
    monotone_pullback(&*sq.m, spec_a, lo, hi, ms[0], ms[ms.len() - 1], increasing)
}

/// `q⁻¹(spec Λ) ∩ window` for a scalar-type Q-function, split at the poles
/// of `q`.
pub fn pullback_scalar<S: ScalarQ + ?Sized>(
    q: &S,
    spec_lambda: &SpectrumDescription,
    window: (f64, f64),
) -> Result<SpectrumDescription> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Input(format!("invalid window ({lo}, {hi})")));
    }
    if spec_lambda.is_empty() {
        return Ok(SpectrumDescription::new());
    }
    let f = |x: f64| q.eval(C64::new(x, 0.0)).map(|v| v.re);
    let mut cuts = vec![lo];
    match q.poles_in(lo, hi) {
        Some(poles) => {
            for p in poles {
                let guard = 1e-9 * p.abs().max(1.0);
                let left = p - guard;
                let right = p + guard;
                if left > *cuts.last().unwrap() {
                    cuts.push(left);
                }
                cuts.push(right.min(hi));
            }
        }
        None => {
            let (xs, ys) = sample(&f, lo, hi)?;
            if let Some(i) = (1..ys.len()).find(|&i| ys[i] < ys[i - 1]) {
                return Err(Error::Bracketing {
                    lo: xs[i - 1],
                    hi: xs[i],
                    reason: "q decreases here, indicating a pole, and no pole data is available".into(),
                });
            }
        }
    }
    cuts.push(hi);
    let mut out = SpectrumDescription::new();
    // Cuts come in (start, end) pairs around the guarded poles.
    for pair in cuts.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if !(a < b) {
            continue;
        }
        let (xs, ys) = sample(&f, a, b)?;
        let increasing = check_monotone(&f, &xs, &ys)?;
        if !increasing {
            return Err(Error::NotMonotone(a));
        }
        out.extend(monotone_pullback(&f, spec_lambda, a, b, ys[0], ys[ys.len() - 1], true)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleAnalysis {
    /// Always true for finite boundary spaces.
    pub isolated: bool,
    /// `dim G ⊖ G_r`, equal to `dim H⁰_ε ⊖ H_old`.
    pub dim_old_deficit: usize,
    /// `dim ker(Q_r(ε⁰) − Λ_r)`.
    pub dim_new: usize,
    /// Basis of that kernel, embedded in `G`.
    pub new_boundary_kernel: CMatrix,
    /// Whether `ε⁰` is an eigenvalue of `H_Λ`.
    pub persists: bool,
}

/// Fate of an eigenvalue `ε⁰` of `H⁰` (a pole of `Q`) under the extension.
pub fn pole_analysis(pole: &PoleData, lambda: &CMatrix, dim_h0_eigenspace: Multiplicity) -> Result<PoleAnalysis> {
    let n = pole.residue.nrows();
    if pole.residue.shape() != (n, n) || pole.regular_value.shape() != (n, n) || lambda.shape() != (n, n) {
        return Err(Error::Dimension("residue, regular value and Λ must share one square shape".into()));
    }
    let d = hermitian_defect(&pole.residue);
    if d > 1e-10 {
        return Err(Error::Precondition { what: "residue is not Hermitian".into(), defect: d });
    }
    let reig = hermitian_eigen(&pole.residue)?;
    let rscale = reig.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let top = reig.values.last().copied().unwrap_or(0.0);
    if top > 1e-10 * rscale {
        return Err(Error::Precondition {
            what: "invalid Laurent data: residue has a positive eigenvalue".into(),
            defect: top,
        });
    }
    let k = reig.select(|v| v.abs() <= KERNEL_TOL * rscale);
    let r = k.ncols();
    let (dim_new, new_boundary_kernel) = if r == 0 {
        (0, CMatrix::zeros(n, 0))
    } else {
        let m = k.adjoint() * (&pole.regular_value - lambda) * &k;
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let meig = hermitian_eigen(&m)?;
        let mscale = meig.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let ker = meig.select(|v| v.abs() <= KERNEL_TOL * mscale);
        (ker.ncols(), &k * ker)
    };
    let dim_old_deficit = n - r;
    let persists = dim_new > 0
        || match dim_h0_eigenspace {
            Multiplicity::Infinite => true,
            Multiplicity::Finite(d) => d > dim_old_deficit,
        };
    Ok(PoleAnalysis { isolated: true, dim_old_deficit, dim_new, new_boundary_kernel, persists })
}
