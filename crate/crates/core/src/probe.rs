//! Boundary-value probes of spectral measures.
//!
//! For `φ = γ(ζ₀)(Q(ζ₀) − Λ)⁻¹h` the spectral measure of `H_Λ` is recovered
//! from `N(x, y) = ‖Q′(x)^{1/2}(Q(x+iy) − Λ)⁻¹h‖²` as `y → 0⁺`:
//!
//! - `μ_φ([a, b]) = lim (y/π) ∫ₐᵇ N(x, y)/|ζ₀ − x|² dx`,
//! - ac density `lim y N(x, y) / (π|ζ₀ − x|²)`,
//! - atoms from `lim y² N(a, y)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::krein::{detect_eigenvalues, DetectOptions, QFunction, ScalarQ};
use crate::linalg::{self, hermitian_eigen};
use crate::linrel::BoundaryPair;
use crate::quadrature::{integrate, richardson};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    None,
    /// Polynomial extrapolation in `y` over the tail of the sequence.
    Richardson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    /// Strictly decreasing positive `y` values.
    pub y_sequence: Vec<f64>,
    pub extrapolation: Extrapolation,
    /// Initial panel count for `x`-integrals.
    pub quadrature: usize,
    /// Number of smallest `y` values entering the extrapolation.
    pub richardson_points: usize,
    /// Relative tolerance deciding `converged`.
    pub tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            y_sequence: Self::geometric(1e-1, 1e-6, 0.5),
            extrapolation: Extrapolation::Richardson,
            quadrature: 64,
            richardson_points: 4,
            tol: 1e-6,
        }
    }
}

impl ProbeConfig {
    /// `start, start·ratio, …` down to (not below) `floor`.
    pub fn geometric(start: f64, floor: f64, ratio: f64) -> Vec<f64> {
        let mut ys = Vec::new();
        let mut y = start;
        while y >= floor && ys.len() < 200 {
            ys.push(y);
            y *= ratio;
        }
        ys
    }

    pub fn validate(&self) -> Result<()> {
        if self.y_sequence.is_empty() {
            return Err(Error::Input("empty y sequence".into()));
        }
        if self.y_sequence.iter().any(|&y| !(y > 0.0 && y.is_finite())) {
            return Err(Error::Input("y values must be positive and finite".into()));
        }
        if self.y_sequence.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Input("y sequence must be strictly decreasing".into()));
        }
        if self.richardson_points == 0 || self.quadrature == 0 {
            return Err(Error::Input("richardson_points and quadrature must be positive".into()));
        }
        Ok(())
    }

    fn tail(&self) -> &[f64] {
        let k = self.richardson_points.min(self.y_sequence.len());
        &self.y_sequence[self.y_sequence.len() - k..]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureEstimate {
    pub value: f64,
    /// Extrapolation spread plus quadrature error.
    pub uncertainty: f64,
    pub converged: bool,
    /// `(y, value at y)` for every evaluated `y`, largest first.
    pub trend: Vec<(f64, f64)>,
}

fn limit(trend: Vec<(f64, f64)>, extra_error: f64, cfg: &ProbeConfig) -> MeasureEstimate {
    let k = cfg.richardson_points.min(trend.len());
    let tail = &trend[trend.len() - k..];
    let (value, spread) = match cfg.extrapolation {
        Extrapolation::None => {
            let last = tail[tail.len() - 1].1;
            let prev = if tail.len() > 1 { tail[tail.len() - 2].1 } else { last };
            (last, (last - prev).abs())
        }
        Extrapolation::Richardson => {
            let ts: Vec<f64> = tail.iter().map(|p| p.0).collect();
            let vs: Vec<f64> = tail.iter().map(|p| p.1).collect();
            richardson(&ts, &vs)
        }
    };
    let uncertainty = spread + extra_error;
    let converged = value.is_finite() && uncertainty <= cfg.tol * value.abs().max(1.0);
    MeasureEstimate { value, uncertainty, converged, trend }
}

/// The probed quantity `N(x, y)` of a concrete model.
pub trait ProbeKernel: Sync {
    /// `‖Q′(x)^{1/2}(Q(x+iy) − Λ)⁻¹h‖²`.
    fn weighted_norm(&self, x: f64, y: f64) -> Result<f64>;

    /// Possible atoms inside `(a, b)`, used as quadrature breakpoints.
    fn atoms(&self, _a: f64, _b: f64) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }
}

/// Probe of a finite-dimensional `(Q, Λ)` with Hermitian `Λ`.
pub struct MatrixProbe<'a, Q: ?Sized> {
    q: &'a Q,
    lambda: CMatrix,
    h: CVector,
}

impl<'a, Q: QFunction + ?Sized> MatrixProbe<'a, Q> {
    pub fn new(q: &'a Q, lambda: CMatrix, h: CVector) -> Result<Self> {
        let n = q.dim();
        if lambda.shape() != (n, n) || h.len() != n {
            return Err(Error::Dimension(format!(
                "Q acts on ℂ^{n}, Λ is {:?}, h has length {}",
                lambda.shape(),
                h.len()
            )));
        }
        let d = linalg::hermitian_defect(&lambda);
        if d > 1e-10 {
            return Err(Error::Precondition { what: "Λ is not Hermitian".into(), defect: d });
        }
        Ok(Self { q, lambda, h })
    }

    fn sqrt_derivative(&self, x: f64) -> Result<CMatrix> {
        let d = self.q.derivative(x)?;
        let d = (&d + d.adjoint()) * C64::new(0.5, 0.0);
        Ok(hermitian_eigen(&d)?.apply_fn(|v| v.max(0.0).sqrt()))
    }
}

impl<Q: QFunction + ?Sized> ProbeKernel for MatrixProbe<'_, Q> {
    fn weighted_norm(&self, x: f64, y: f64) -> Result<f64> {
        let m = self.q.eval(C64::new(x, y))? - &self.lambda;
        let r = linalg::solve(&m, &self.h).ok_or_else(|| Error::InSpectrum(format!("{x}+{y}i")))?;
        Ok((self.sqrt_derivative(x)? * r).norm_squared())
    }

    fn atoms(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        let bc = BoundaryPair::from_operator(self.lambda.clone())?;
        Ok(detect_eigenvalues(self.q, &bc, (a, b), &DetectOptions::default())?.energies())
    }
}

/// `r(u) = ⟨δ₀, (L₁ − u)⁻¹δ₀⟩` for the 1D hopping `λ(S + S*)` with symbol
/// `2λ cos k`; principal roots give the branch analytic off `[−2λ, 2λ]`.
fn chain_green(l1: f64, u: C64) -> C64 {
    let a = 2.0 * l1.abs();
    -((u - a).sqrt() * (u + a).sqrt()).inv()
}

/// `‖(L − w)⁻¹δ₀‖²` for the ℤ² hopping operator `L` with symbol
/// `2λ₁cos k₁ + 2λ₂cos k₂` and `Im w > 0`, as the positive integral
/// `(1/π)∫₀^π Im r(w − 2λ₂cos k)/Im w dk`.
pub fn lattice_resolvent_norm(l1: f64, l2: f64, w: C64) -> Result<f64> {
    if !(w.im > 0.0) {
        return Err(Error::Input(format!("lattice resolvent needs Im w > 0, got {w}")));
    }
    let f = |k: f64| (chain_green(l1, w - 2.0 * l2 * k.cos())).im / w.im;
    if l2 == 0.0 {
        return Ok(f(0.0));
    }
    let q = integrate(f, 0.0, PI, 16, 0.0, 1e-11, 20_000);
    if !q.converged {
        return Err(Error::Numerical(format!(
            "lattice Green integral at w = {w} did not converge (error {:.3e})",
            q.error
        )));
    }
    Ok(q.value / PI)
}

/// Scalar-type probe `Q = q·I`, `Λ = L(0)` on `ℓ²(ℤ²)`, `h = δ₀`.
pub struct LatticeProbe<'a, S: ?Sized> {
    q: &'a S,
    lambda1: f64,
    lambda2: f64,
}

impl<'a, S: ScalarQ + ?Sized> LatticeProbe<'a, S> {
    pub fn new(q: &'a S, lambda1: f64, lambda2: f64) -> Self {
        Self { q, lambda1, lambda2 }
    }
}

impl<S: ScalarQ + ?Sized> ProbeKernel for LatticeProbe<'_, S> {
    fn weighted_norm(&self, x: f64, y: f64) -> Result<f64> {
        let w = self.q.eval(C64::new(x, y))?;
        let dq = self.q.derivative(x)?;
        Ok(dq * lattice_resolvent_norm(self.lambda1, self.lambda2, w)?)
    }
}

fn check_zeta(zeta0: C64) -> Result<()> {
    if zeta0.im == 0.0 || !zeta0.re.is_finite() || !zeta0.im.is_finite() {
        return Err(Error::Input(format!("ζ₀ = {zeta0} must be finite and non-real")));
    }
    Ok(())
}

/// `μ_φ([a, b])`; `a`, `b` must not be atoms.
pub fn interval_measure<K: ProbeKernel + ?Sized>(
    kernel: &K,
    zeta0: C64,
    a: f64,
    b: f64,
    cfg: &ProbeConfig,
) -> Result<MeasureEstimate> {
    cfg.validate()?;
    check_zeta(zeta0)?;
    if !(a < b) {
        return Err(Error::Input(format!("empty interval [{a}, {b}]")));
    }
    let mut cuts = vec![a];
    cuts.extend(kernel.atoms(a, b)?.into_iter().filter(|&e| e > a && e < b));
    cuts.push(b);
    let panels = (cfg.quadrature / (cuts.len() - 1)).max(2);
    let mut trend = Vec::new();
    let mut quad_error: f64 = 0.0;
    let mut all_converged = true;
    for &y in cfg.tail() {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let integrand = |x: f64| match kernel.weighted_norm(x, y) {
            Ok(v) => v / (zeta0 - x).norm_sqr(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        let mut total = 0.0;
        let mut err = 0.0;
        for w in cuts.windows(2) {
            let q = integrate(&integrand, w[0], w[1], panels, 1e-11 * PI / y, 1e-11, 50_000);
            all_converged &= q.converged;
            total += q.value;
            err += q.error;
        }
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        trend.push((y, y / PI * total));
        quad_error = quad_error.max(y / PI * err);
    }
    let mut est = limit(trend, quad_error, cfg);
    est.converged &= all_converged;
    Ok(est)
}

/// Density of the ac part at `x`, `lim y N(x, y)/(π|ζ₀ − x|²)`.
pub fn ac_density<K: ProbeKernel + ?Sized>(kernel: &K, zeta0: C64, x: f64, cfg: &ProbeConfig) -> Result<MeasureEstimate> {
    cfg.validate()?;
    check_zeta(zeta0)?;
    let scale = PI * (zeta0 - x).norm_sqr();
    let trend = cfg
        .y_sequence
        .iter()
        .map(|&y| kernel.weighted_norm(x, y).map(|n| (y, y * n / scale)))
        .collect::<Result<Vec<_>>>()?;
    Ok(limit(trend, 0.0, cfg))
}

/// Atom at `a`: the literal limit `lim y² N(a, y)` and the mass
/// `μ_φ({a})`, which carries the extra factor `|ζ₀ − a|⁻²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    pub raw: MeasureEstimate,
    pub mass: MeasureEstimate,
}

pub fn point_mass<K: ProbeKernel + ?Sized>(kernel: &K, zeta0: C64, a: f64, cfg: &ProbeConfig) -> Result<PointMass> {
    cfg.validate()?;
    check_zeta(zeta0)?;
    let trend = cfg
        .y_sequence
        .iter()
        .map(|&y| kernel.weighted_norm(a, y).map(|n| (y, y * y * n)))
        .collect::<Result<Vec<_>>>()?;
    let w = (zeta0 - a).norm_sqr();
    let scaled = trend.iter().map(|&(y, v)| (y, v / w)).collect();
    Ok(PointMass { raw: limit(trend, 0.0, cfg), mass: limit(scaled, 0.0, cfg) })
}

/// Growth signature of `N(x, y)` as `y → 0⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    /// `N ~ y⁻²`: an atom.
    Point,
    /// `N ~ y⁻¹`: positive ac density.
    AbsolutelyContinuous,
    /// `N` bounded: `x` is outside the support.
    Regular,
    /// None of the above; never asserted to be singular continuous.
    Indeterminate,
}

/// Advisory classification from the log-log slope of `N` over the tail.
pub fn classify<K: ProbeKernel + ?Sized>(kernel: &K, x: f64, cfg: &ProbeConfig) -> Result<Signature> {
    cfg.validate()?;
    let ys = cfg.tail();
    if ys.len() < 2 {
        return Ok(Signature::Indeterminate);
    }
    let (y0, y1) = (ys[0], ys[ys.len() - 1]);
    let (n0, n1) = (kernel.weighted_norm(x, y0)?, kernel.weighted_norm(x, y1)?);
    if n0 <= 0.0 || n1 <= 0.0 {
        return Ok(Signature::Regular);
    }
    let slope = (n1.ln() - n0.ln()) / (y1.ln() - y0.ln());
    Ok(if (slope + 2.0).abs() < 0.25 {
        Signature::Point
    } else if (slope + 1.0).abs() < 0.25 {
        Signature::AbsolutelyContinuous
    } else if slope.abs() < 0.25 {
        Signature::Regular
    } else {
        Signature::Indeterminate
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoneEstimate {
    pub vector: CVector,
    pub uncertainty: f64,
    pub converged: bool,
}

/// `½[P_[a,b] + P_(a,b)]φ` for a Hermitian matrix from the Stone formula
/// `lim (1/π) ∫ₐᵇ Im R(x+iy)φ dx`, `Im R = (R(z) − R(z̄))/2i`.
///
/// Each line integral `∫ R(x ± iy)φ dx` is evaluated on the contour through
/// `a ± iY`, `b ± iY`, which is equal by analyticity and keeps quadrature
/// away from the poles of `R`.
pub fn stone_projector_oracle(h: &CMatrix, a: f64, b: f64, phi: &CVector, cfg: &ProbeConfig) -> Result<StoneEstimate> {
    cfg.validate()?;
    let n = h.nrows();
    if !h.is_square() || phi.len() != n {
        return Err(Error::Dimension(format!("H is {:?}, φ has length {}", h.shape(), phi.len())));
    }
    if !(a < b) {
        return Err(Error::Input(format!("empty interval [{a}, {b}]")));
    }
    let id = CMatrix::identity(n, n);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let resolvent = |z: C64| -> CVector {
        match linalg::solve(&(h - &id * z), phi) {
            Some(v) => v,
            None => {
                failure.borrow_mut().get_or_insert(Error::InSpectrum(z.to_string()));
                CVector::zeros(n)
            }
        }
    };
    let big_y = (b - a).max(1.0);
    let (atol, rtol, maxp) = (1e-13, 1e-12, 20_000);
    let top = integrate(
        |x| (resolvent(C64::new(x, big_y)) - resolvent(C64::new(x, -big_y))) * C64::new(0.0, -1.0 / (2.0 * PI)),
        a,
        b,
        cfg.quadrature,
        atol,
        rtol,
        maxp,
    );
    let mut values = Vec::new();
    let mut quad_err = top.error;
    let mut ok = top.converged;
    let side = |x: f64, t: f64| (resolvent(C64::new(x, t)) + resolvent(C64::new(x, -t))) * C64::new(1.0 / (2.0 * PI), 0.0);
    let ys = cfg.tail();
    for &y in ys {
        let left = integrate(|t| side(a, t), y, big_y, cfg.quadrature, atol, rtol, maxp);
        let right = integrate(|t| side(b, t), y, big_y, cfg.quadrature, atol, rtol, maxp);
        ok &= left.converged && right.converged;
        quad_err = quad_err.max(top.error + left.error + right.error);
        values.push(&top.value + &left.value - &right.value);
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (vector, spread) = match cfg.extrapolation {
        Extrapolation::Richardson => richardson(ys, &values),
        Extrapolation::None => {
            let last = values[values.len() - 1].clone();
            let spread = if values.len() > 1 { (&last - &values[values.len() - 2]).norm() } else { 0.0 };
            (last, spread)
        }
    };
    let uncertainty = spread + quad_err;
    Ok(StoneEstimate { converged: ok && uncertainty <= cfg.tol * phi.norm().max(1.0), vector, uncertainty })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::RationalNevanlinna;
    use crate::linalg::hermitian_eigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(v))
    }

    #[test]
    fn config_validation() {
        let mut cfg = ProbeConfig::default();
        assert!(cfg.validate().is_ok());
        assert!(cfg.y_sequence.last().copied().unwrap() >= 1e-6);
        cfg.y_sequence = vec![1e-2, 1e-1];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn scalar_pole_point_mass_is_exact() {
        let q = RationalNevanlinna::scalar(0.0, 1.0, &[]).unwrap();
        let lambda = 0.3;
        let h = C64::new(1.5, -0.5);
        let probe = MatrixProbe::new(&q, scalar(lambda), CVector::from_element(1, h)).unwrap();
        let zeta = C64::new(0.0, 1.0);
        let pm = point_mass(&probe, zeta, lambda, &ProbeConfig::default()).unwrap();
        for &(_, v) in &pm.raw.trend {
            assert!((v - h.norm_sqr()).abs() < 1e-12);
        }
        assert!(pm.raw.converged);
        let expect = h.norm_sqr() / (zeta - lambda).norm_sqr();
        assert!((pm.mass.value - expect).abs() < 1e-12);

        let inside = interval_measure(&probe, zeta, -1.0, 1.0, &ProbeConfig::default()).unwrap();
        assert!((inside.value - expect).abs() < 1e-6, "{inside:?}");
        let outside = interval_measure(&probe, zeta, 1.0, 2.0, &ProbeConfig::default()).unwrap();
        assert!(outside.value.abs() < 1e-8);
        let off = point_mass(&probe, zeta, 0.8, &ProbeConfig::default()).unwrap();
        assert!(off.raw.value.abs() < 1e-10);
    }

    #[test]
    fn density_diverges_at_atom() {
        let q = RationalNevanlinna::scalar(0.0, 1.0, &[]).unwrap();
        let probe = MatrixProbe::new(&q, scalar(0.0), CVector::from_element(1, c(1.0))).unwrap();
        let d = ac_density(&probe, C64::new(0.0, 1.0), 0.0, &ProbeConfig::default()).unwrap();
        assert!(!d.converged);
        assert_eq!(classify(&probe, 0.0, &ProbeConfig::default()).unwrap(), Signature::Point);
        let gap = ac_density(&probe, C64::new(0.0, 1.0), 0.5, &ProbeConfig::default()).unwrap();
        assert!(gap.value.abs() < 1e-8 && gap.converged);
    }

    #[test]
    fn interval_additivity_with_poles() {
        // Q(z) = z − 1/(2 − z): two eigenvalues of H_Λ per Λ.
        let q = RationalNevanlinna::scalar(0.0, 1.0, &[(2.0, 1.0)]).unwrap();
        let probe = MatrixProbe::new(&q, scalar(0.5), CVector::from_element(1, c(1.0))).unwrap();
        let zeta = C64::new(0.2, 1.0);
        let cfg = ProbeConfig::default();
        let whole = interval_measure(&probe, zeta, -3.0, 1.9, &cfg).unwrap();
        let left = interval_measure(&probe, zeta, -3.0, 0.4, &cfg).unwrap();
        let right = interval_measure(&probe, zeta, 0.4, 1.9, &cfg).unwrap();
        let slack = whole.uncertainty + left.uncertainty + right.uncertainty + 1e-9;
        assert!((whole.value - left.value - right.value).abs() <= slack);
        assert!(whole.value > 0.0);
    }

    #[test]
    fn lattice_norm_matches_brillouin_sum() {
        let (l1, l2) = (1.0, 0.6);
        let w = C64::new(0.4, 0.5);
        let m = 256;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let k1 = 2.0 * PI * i as f64 / m as f64;
                let k2 = 2.0 * PI * j as f64 / m as f64;
                let e = 2.0 * l1 * k1.cos() + 2.0 * l2 * k2.cos();
                acc += 1.0 / (c(e) - w).norm_sqr();
            }
        }
        acc /= (m * m) as f64;
        let v = lattice_resolvent_norm(l1, l2, w).unwrap();
        assert!((v - acc).abs() < 1e-10 * acc, "{v} vs {acc}");
    }

    #[test]
    fn lattice_density_integrates_to_measure() {
        let q = RationalNevanlinna::scalar(0.0, 1.0, &[]).unwrap();
        let probe = LatticeProbe::new(&q, 1.0, 0.0);
        let zeta = C64::new(0.0, 1.0);
        let cfg = ProbeConfig::default();
        // 1D band [−2, 2]: density of states 1/(π√(4 − x²)).
        let d = ac_density(&probe, zeta, 0.5, &cfg).unwrap();
        let dos = 1.0 / (PI * (4.0f64 - 0.25).sqrt());
        assert!((d.value - dos / 1.25).abs() < 1e-6, "{d:?}");
        let m = interval_measure(&probe, zeta, -1.0, 1.0, &cfg).unwrap();
        let exact = integrate(|x: f64| 1.0 / (PI * (4.0 - x * x).sqrt() * (1.0 + x * x)), -1.0, 1.0, 8, 1e-14, 1e-14, 1000).value;
        assert!((m.value - exact).abs() < 1e-6 * exact, "{} vs {exact}", m.value);
    }

    fn exact_projector(h: &CMatrix, a: f64, b: f64) -> CMatrix {
        let e = hermitian_eigen(h).unwrap();
        e.apply_fn(|v| {
            if v > a && v < b {
                1.0
            } else if v == a || v == b {
                0.5
            } else {
                0.0
            }
        })
    }

    #[test]
    fn stone_diagonal_example() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0), c(1.0)]));
        let phi = CVector::from_vec(vec![c(1.0), c(1.0)]);
        let s = stone_projector_oracle(&h, -0.5, 0.5, &phi, &ProbeConfig::default()).unwrap();
        assert!((s.vector[0] - 1.0).norm() < 1e-8 && s.vector[1].norm() < 1e-8, "{s:?}");
        let half = stone_projector_oracle(&h, 0.0, 0.5, &phi, &ProbeConfig::default()).unwrap();
        assert!((half.vector[0] - 0.5).norm() < 1e-6, "{half:?}");
    }

    #[test]
    fn stone_matches_eigendecomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let n = rng.gen_range(2..=8);
            let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let h = (&g + g.adjoint()) * c(0.5);
            let phi = CVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let ev = linalg::hermitian_eigenvalues(&h).unwrap();
            let (a, b) = (ev[0] + 0.37 * (ev[1] - ev[0]), ev[n - 1] + 0.1);
            let s = stone_projector_oracle(&h, a, b, &phi, &ProbeConfig::default()).unwrap();
            let exact = exact_projector(&h, a, b) * &phi;
            assert!((&s.vector - exact).norm() < 1e-6);
        }
    }
}
