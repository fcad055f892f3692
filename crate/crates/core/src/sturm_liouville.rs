//! Sturm–Liouville segments `−f″ + U f = z f` on `[0, 1]`.
//!
//! The boundary triple uses `Γ₁f = (f(0), f(1))` and `Γ₂f = (f′(0), −f′(1))`,
//! so the distinguished extension is the Dirichlet operator and the
//! Q-function is
//!
//! ```text
//! Q(z) = 1/s(1;z) · [[−c(1;z), 1], [1, −s′(1;z)]]
//! ```
//!
//! with `s`, `c` the solutions with `s(0) = c′(0) = 0`, `s′(0) = c(0) = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::krein::{complex_step_derivative, QFunction};
use crate::roots;
use crate::{CMatrix, C64};

const RK_TOL: f64 = 1e-12;
const PRUFER_TOL: f64 = 1e-10;
const MAX_RK_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Order 0: nearest sample.
    Nearest,
    /// Order 1: piecewise linear.
    Linear,
}

/// Real potential on `[0, 1]`.
#[derive(Clone)]
pub enum Potential {
    Constant(f64),
    /// Value `values[i]` on `[breakpoints[i], breakpoints[i+1]]`; breakpoints
    /// run from 0 to 1.
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
    /// Samples at `i/(N−1)`, `i = 0..N`.
    Grid { samples: Vec<f64>, interpolation: Interpolation },
    /// Arbitrary smooth function; not serialisable.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Constant(v) => write!(f, "Constant({v})"),
            Potential::Piecewise { breakpoints, values } => f
                .debug_struct("Piecewise")
                .field("breakpoints", breakpoints)
                .field("values", values)
                .finish(),
            Potential::Grid { samples, interpolation } => f
                .debug_struct("Grid")
                .field("samples", &samples.len())
                .field("interpolation", interpolation)
                .finish(),
            Potential::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Const { a: f64, b: f64, v: f64 },
    Linear { a: f64, b: f64, v0: f64, v1: f64 },
    Smooth { a: f64, b: f64 },
}

impl Piece {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Piece::Const { a, b, .. } | Piece::Linear { a, b, .. } | Piece::Smooth { a, b } => (a, b),
        }
    }
}

impl Potential {
    pub fn zero() -> Self {
        Potential::Constant(0.0)
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let p = Potential::Piecewise { breakpoints, values };
        p.validate()?;
        Ok(p)
    }

    pub fn grid(samples: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        let p = Potential::Grid { samples, interpolation };
        p.validate()?;
        Ok(p)
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Potential::Function(Arc::new(f))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Potential::Constant(v) => {
                if !v.is_finite() {
                    return Err(Error::Input("constant potential is not finite".into()));
                }
            }
            Potential::Piecewise { breakpoints, values } => {
                if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
                    return Err(Error::Input(format!(
                        "piecewise potential needs n+1 breakpoints for n values (got {} and {})",
                        breakpoints.len(),
                        values.len()
                    )));
                }
                if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
                    return Err(Error::Input("breakpoints must start at 0 and end at 1".into()));
                }
                if !breakpoints.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::Input("breakpoints must be strictly increasing".into()));
                }
                if !values.iter().all(|v| v.is_finite()) {
                    return Err(Error::Input("piecewise potential has non-finite values".into()));
                }
            }
            Potential::Grid { samples, .. } => {
                if samples.is_empty() {
                    return Err(Error::Input("grid potential needs at least one sample".into()));
                }
                if !samples.iter().all(|v| v.is_finite()) {
                    return Err(Error::Input("grid potential has non-finite samples".into()));
                }
            }
            Potential::Function(_) => {}
        }
        Ok(())
    }

    /// `U(x)` for `x ∈ [0, 1]`.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::Constant(v) => *v,
            Potential::Piecewise { breakpoints, values } => {
                let idx = breakpoints[1..].iter().position(|&b| x < b).unwrap_or(values.len() - 1);
                values[idx]
            }
            Potential::Grid { samples, interpolation } => {
                let n = samples.len();
                if n == 1 {
                    return samples[0];
                }
                let t = x.clamp(0.0, 1.0) * (n - 1) as f64;
                match interpolation {
                    Interpolation::Nearest => samples[(t.round() as usize).min(n - 1)],
                    Interpolation::Linear => {
                        let i = (t.floor() as usize).min(n - 2);
                        let w = t - i as f64;
                        samples[i] * (1.0 - w) + samples[i + 1] * w
                    }
                }
            }
            Potential::Function(f) => f(x),
        }
    }

    fn pieces(&self) -> Vec<Piece> {
        match self {
            Potential::Constant(v) => vec![Piece::Const { a: 0.0, b: 1.0, v: *v }],
            Potential::Piecewise { breakpoints, values } => values
                .iter()
                .enumerate()
                .map(|(i, &v)| Piece::Const { a: breakpoints[i], b: breakpoints[i + 1], v })
                .collect(),
            Potential::Grid { samples, interpolation } => {
                let n = samples.len();
                if n == 1 {
                    return vec![Piece::Const { a: 0.0, b: 1.0, v: samples[0] }];
                }
                let h = 1.0 / (n - 1) as f64;
                match interpolation {
                    Interpolation::Nearest => (0..n)
                        .map(|i| Piece::Const {
                            a: ((i as f64 - 0.5) * h).max(0.0),
                            b: if i + 1 == n { 1.0 } else { (i as f64 + 0.5) * h },
                            v: samples[i],
                        })
                        .collect(),
                    Interpolation::Linear => (0..n - 1)
                        .map(|i| Piece::Linear {
                            a: i as f64 * h,
                            b: if i + 2 == n { 1.0 } else { (i + 1) as f64 * h },
                            v0: samples[i],
                            v1: samples[i + 1],
                        })
                        .collect(),
                }
            }
            Potential::Function(_) => vec![Piece::Smooth { a: 0.0, b: 1.0 }],
        }
    }

    fn piece_value(&self, piece: &Piece, x: f64) -> f64 {
        match *piece {
            Piece::Const { v, .. } => v,
            Piece::Linear { a, b, v0, v1 } => v0 + (v1 - v0) * (x - a) / (b - a),
            Piece::Smooth { .. } => self.value(x),
        }
    }

    /// Lower and upper bounds of `U` (sampled for function potentials).
    pub fn bounds(&self) -> (f64, f64) {
        let fold = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        match self {
            Potential::Constant(v) => (*v, *v),
            Potential::Piecewise { values, .. } => fold(&mut values.iter().copied()),
            Potential::Grid { samples, .. } => fold(&mut samples.iter().copied()),
            Potential::Function(f) => fold(&mut (0..=4000).map(|i| f(i as f64 / 4000.0))),
        }
    }

    /// `|U(x) − U(1 − x)| ≤ tol` on a sampling grid.
    pub fn is_even(&self, tol: f64) -> bool {
        (0..=2000).all(|i| {
            // Offset the grid slightly so samples avoid breakpoints.
            let x = (i as f64 + 0.5) / 2001.0;
            (self.value(x) - self.value(1.0 - x)).abs() <= tol
        })
    }
}

/// Transfer data of the fundamental system at some point `x`:
/// `c(x)`, `c′(x)`, `s(x)`, `s′(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub c: C64,
    pub cp: C64,
    pub s: C64,
    pub sp: C64,
}

impl Transfer {
    fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Transfer { c: one, cp: zero, s: zero, sp: one }
    }

    /// `self ∘ prev`: propagate `prev` further by `self`.
    fn compose(&self, prev: &Transfer) -> Transfer {
        Transfer {
            c: self.c * prev.c + self.s * prev.cp,
            cp: self.cp * prev.c + self.sp * prev.cp,
            s: self.c * prev.s + self.s * prev.sp,
            sp: self.cp * prev.s + self.sp * prev.sp,
        }
    }

    /// `s′c − sc′`, identically 1.
    pub fn wronskian(&self) -> C64 {
        self.sp * self.c - self.s * self.cp
    }
}

/// Values `s(1;z)`, `c(1;z)`, `s′(1;z)`, `c′(1;z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalSystem {
    pub z: C64,
    pub s1: C64,
    pub c1: C64,
    pub s1p: C64,
    pub c1p: C64,
}

impl FundamentalSystem {
    pub fn wronskian(&self) -> C64 {
        self.s1p * self.c1 - self.s1 * self.c1p
    }
}

fn sinc(t: C64) -> C64 {
    if t.norm() < 1e-3 {
        let t2 = t * t;
        C64::new(1.0, 0.0) - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0
    } else {
        t.sin() / t
    }
}

/// Exact transfer over length `d` with constant `U = v`; written through even
/// functions of `κ = √(z − v)` so the branch of the root is irrelevant.
fn constant_transfer(z: C64, v: f64, d: f64) -> Transfer {
    let w = z - v;
    let kd = w.sqrt() * d;
    let cos = kd.cos();
    let sn = sinc(kd);
    Transfer {
        c: cos,
        cp: -w * d * sn,
        s: sn * d,
        sp: cos,
    }
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of `y′ = f(x, y)` from `a` to `b`.
pub(crate) fn dormand_prince<const N: usize>(
    mut f: impl FnMut(f64, &[C64; N]) -> [C64; N],
    a: f64,
    b: f64,
    y0: [C64; N],
    tol: f64,
    h0: f64,
) -> Result<[C64; N]> {
    let zero = C64::new(0.0, 0.0);
    let mut x = a;
    let mut y = y0;
    let mut h = h0.min(b - a).max(1e-12 * (b - a));
    let mut k = [[zero; N]; 7];
    k[0] = f(x, &y);
    let mut steps = 0usize;
    while x < b {
        if steps > MAX_RK_STEPS {
            return Err(Error::Numerical(format!(
                "integrator exceeded {MAX_RK_STEPS} steps at x = {x:.6} (step {h:.3e})"
            )));
        }
        if x + h > b {
            h = b - x;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let c = DP_A[s][j];
                if c != 0.0 {
                    for i in 0..N {
                        ys[i] += kj[i] * (h * c);
                    }
                }
            }
            k[s] = f(x + DP_C[s] * h, &ys);
        }
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let c = DP_A[6][j];
            if c != 0.0 {
                for i in 0..N {
                    y_new[i] += kj[i] * (h * c);
                }
            }
        }
        let mut err = 0.0_f64;
        for i in 0..N {
            let mut e = zero;
            for (j, kj) in k.iter().enumerate() {
                e += kj[i] * DP_E[j];
            }
            let scale = tol + tol * y[i].norm().max(y_new[i].norm());
            err = err.max((e * h).norm() / scale);
        }
        steps += 1;
        if err <= 1.0 {
            x += h;
            y = y_new;
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * (b - a).max(1.0) && x < b {
            return Err(Error::Numerical(format!(
                "step size underflow at x = {x:.6} (h = {h:.3e}, error ratio {err:.3e})"
            )));
        }
    }
    Ok(y)
}

fn rk_transfer(u: &Potential, piece: &Piece, z: C64, a: f64, b: f64) -> Result<Transfer> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let h0 = 0.05 / (1.0 + z.norm().sqrt());
    let y = dormand_prince(
        |x, y: &[C64; 4]| {
            let q = C64::new(u.piece_value(piece, x), 0.0) - z;
            [y[1], q * y[0], y[3], q * y[2]]
        },
        a,
        b,
        [one, zero, zero, one],
        RK_TOL,
        h0,
    )?;
    Ok(Transfer { c: y[0], cp: y[1], s: y[2], sp: y[3] })
}

fn piece_transfer(u: &Potential, piece: &Piece, z: C64, a: f64, b: f64) -> Result<Transfer> {
    if b <= a {
        return Ok(Transfer::identity());
    }
    match *piece {
        Piece::Const { v, .. } => Ok(constant_transfer(z, v, b - a)),
        Piece::Linear { v0, v1, .. } if v0 == v1 => Ok(constant_transfer(z, v0, b - a)),
        _ => rk_transfer(u, piece, z, a, b),
    }
}

/// Transfer data at each of the sorted points `xs ⊂ [0, 1]`.
pub fn transfer_on_grid(u: &Potential, z: C64, xs: &[f64]) -> Result<Vec<Transfer>> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Input(format!("spectral parameter {z} is not finite")));
    }
    if xs.windows(2).any(|w| w[0] > w[1]) || xs.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::Input("grid points must be sorted and lie in [0, 1]".into()));
    }
    let pieces = u.pieces();
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = Transfer::identity();
    let mut pos = 0.0;
    let mut pi = 0;
    for &target in xs {
        while pos < target {
            let piece = &pieces[pi];
            let (_, pb) = piece.bounds();
            let end = pb.min(target);
            acc = piece_transfer(u, piece, z, pos, end)?.compose(&acc);
            pos = end;
            if pos >= pb && pi + 1 < pieces.len() {
                pi += 1;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// `s(1;z)`, `c(1;z)` and their derivatives.
pub fn fundamental_system(u: &Potential, z: C64) -> Result<FundamentalSystem> {
    let t = transfer_on_grid(u, z, &[1.0])?[0];
    Ok(FundamentalSystem { z, s1: t.s, c1: t.c, s1p: t.sp, c1p: t.cp })
}

/// Number of Dirichlet eigenvalues strictly below real `z`, from the modified
/// Prüfer angle of `s(·; z)`.
pub fn dirichlet_count_below(u: &Potential, z: f64) -> Result<usize> {
    let (umin, _) = u.bounds();
    let scale = (z - umin).max(1.0).sqrt();
    let mut theta = 0.0_f64;
    for piece in u.pieces() {
        let (a, b) = piece.bounds();
        let y = dormand_prince(
            |x, th: &[C64; 1]| {
                let t = th[0].re;
                let (s, c) = t.sin_cos();
                let d = scale * c * c + (z - u.piece_value(&piece, x)) / scale * s * s;
                [C64::new(d, 0.0)]
            },
            a,
            b,
            [C64::new(theta, 0.0)],
            PRUFER_TOL,
            0.1 / scale,
        )?;
        theta = y[0].re;
    }
    Ok((theta / PI).floor().max(0.0) as usize)
}

/// The `k`-th Dirichlet eigenvalue (1-based).
pub fn dirichlet_eigenvalue(u: &Potential, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Input("Dirichlet eigenvalues are indexed from 1".into()));
    }
    let (umin, umax) = u.bounds();
    let base = PI * PI * (k * k) as f64;
    let pad = 1e-6 * (1.0 + base + umax.abs() + umin.abs());
    let mut lo = umin + base - pad;
    let mut hi = umax + base + pad;
    let mut widen = 0;
    while dirichlet_count_below(u, lo)? >= k || dirichlet_count_below(u, hi)? < k {
        widen += 1;
        if widen > 20 {
            return Err(Error::Bracketing {
                lo,
                hi,
                reason: format!("could not bracket Dirichlet eigenvalue {k}"),
            });
        }
        let w = (hi - lo).max(1.0);
        lo -= w;
        hi += w;
    }
    // Shrink until exactly one eigenvalue remains in (lo, hi].
    for _ in 0..200 {
        let (clo, chi) = (dirichlet_count_below(u, lo)?, dirichlet_count_below(u, hi)?);
        if clo == k - 1 && chi == k {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if dirichlet_count_below(u, mid)? >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s1 = |x: f64| fundamental_system(u, C64::new(x, 0.0)).map(|f| f.s1.re).unwrap_or(f64::NAN);
    let root = roots::brent(s1, lo, hi, 0.0, 400)
        .or_else(|| roots::bisect(s1, lo, hi, 0.0))
        .ok_or_else(|| Error::Bracketing {
            lo,
            hi,
            reason: format!("s(1;z) has no sign change around Dirichlet eigenvalue {k}"),
        })?;
    Ok(root)
}

/// The first `k` Dirichlet eigenvalues, ascending.
pub fn dirichlet_spectrum(u: &Potential, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Input("requested zero eigenvalues".into()));
    }
    u.validate()?;
    (1..=k).map(|j| dirichlet_eigenvalue(u, j)).collect()
}

/// Dirichlet eigenvalue closest to real `x`.
pub fn nearest_dirichlet_eigenvalue(u: &Potential, x: f64) -> Result<f64> {
    let below = dirichlet_count_below(u, x)?;
    let above = dirichlet_eigenvalue(u, below + 1)?;
    if below == 0 {
        return Ok(above);
    }
    let under = dirichlet_eigenvalue(u, below)?;
    Ok(if (x - under).abs() <= (above - x).abs() { under } else { above })
}

/// The 2×2 segment Q-matrix together with the fundamental data it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentQ {
    pub q: CMatrix,
    pub fundamental: FundamentalSystem,
}

/// `Q(z) = (1/s₁)[[−c₁, 1], [1, −s₁′]]`.
pub fn segment_q_matrix(u: &Potential, z: C64) -> Result<SegmentQ> {
    let fs = fundamental_system(u, z)?;
    let threshold = 1e-8 * 1f64.max(fs.c1.norm()).max(fs.s1p.norm());
    if fs.s1.norm() < threshold {
        let pole = nearest_dirichlet_eigenvalue(u, z.re).unwrap_or(f64::NAN);
        return Err(Error::PoleProximity { z: z.to_string(), pole });
    }
    let inv = fs.s1.inv();
    let one = C64::new(1.0, 0.0);
    let q = CMatrix::from_row_slice(2, 2, &[-fs.c1 * inv, one * inv, one * inv, -fs.s1p * inv]);
    Ok(SegmentQ { q, fundamental: fs })
}

/// `η(z) = ½(s′(1;z) + c(1;z) + α s(1;z))`.
pub fn eta_map(u: &Potential, alpha: f64, z: C64) -> Result<C64> {
    let fs = fundamental_system(u, z)?;
    Ok((fs.s1p + fs.c1 + fs.s1 * alpha) * 0.5)
}

/// The segment Q-function as a [`QFunction`], with the induced Γ-field.
#[derive(Debug, Clone)]
pub struct SegmentQFunction {
    pub potential: Potential,
}

impl SegmentQFunction {
    pub fn new(potential: Potential) -> Result<Self> {
        potential.validate()?;
        Ok(Self { potential })
    }

    /// `(γ(z)ξ)(x) = (ξ₂ − ξ₁c(1))/s(1) · s(x) + ξ₁ c(x)` on sorted `xs`.
    pub fn gamma_values(&self, z: C64, xi: [C64; 2], xs: &[f64]) -> Result<Vec<C64>> {
        let fs = fundamental_system(&self.potential, z)?;
        let coef = (xi[1] - xi[0] * fs.c1) / fs.s1;
        let grid = transfer_on_grid(&self.potential, z, xs)?;
        Ok(grid.iter().map(|t| coef * t.s + xi[0] * t.c).collect())
    }
}

impl QFunction for SegmentQFunction {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, z: C64) -> Result<CMatrix> {
        Ok(segment_q_matrix(&self.potential, z)?.q)
    }

    fn derivative(&self, x: f64) -> Result<CMatrix> {
        complex_step_derivative(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn free_solutions_at_zero_energy() {
        let fs = fundamental_system(&Potential::zero(), c(0.0)).unwrap();
        assert!((fs.s1 - 1.0).norm() < 1e-15);
        assert!((fs.c1 - 1.0).norm() < 1e-15);
        assert!((fs.s1p - 1.0).norm() < 1e-15);
        assert!(fs.c1p.norm() < 1e-15);
    }

    #[test]
    fn free_solutions_at_pi_squared() {
        let fs = fundamental_system(&Potential::zero(), c(PI * PI)).unwrap();
        assert!(fs.s1.norm() < 1e-15);
        assert!((fs.c1 + 1.0).norm() < 1e-14);
    }

    #[test]
    fn rk_path_matches_constant_closed_form() {
        let v0 = 3.7;
        let smooth = Potential::function(move |_| v0);
        for z in [c(-4.0), c(25.0), C64::new(12.0, 3.0), C64::new(-1.0, -7.5)] {
            let k = (z - v0).sqrt();
            let s1 = k.sin() / k;
            let c1 = k.cos();
            let fs = fundamental_system(&smooth, z).unwrap();
            assert!((fs.s1 - s1).norm() < 1e-10, "{z}: {} vs {}", fs.s1, s1);
            assert!((fs.c1 - c1).norm() < 1e-10);
            let exact = fundamental_system(&Potential::Constant(v0), z).unwrap();
            assert!((exact.s1 - s1).norm() < 1e-13);
        }
    }

    #[test]
    fn linear_grid_agrees_with_function() {
        let g = Potential::grid(vec![0.0, 2.0], Interpolation::Linear).unwrap();
        let f = Potential::function(|x| 2.0 * x);
        let z = C64::new(7.0, 0.5);
        let a = fundamental_system(&g, z).unwrap();
        let b = fundamental_system(&f, z).unwrap();
        assert!((a.s1 - b.s1).norm() < 1e-10);
        assert!((a.c1p - b.c1p).norm() < 1e-10);
    }

    #[test]
    fn piecewise_and_nearest_grid_coincide() {
        let pw = Potential::piecewise(vec![0.0, 0.25, 0.75, 1.0], vec![1.0, -2.0, 1.0]).unwrap();
        let grid = Potential::grid(vec![1.0, -2.0, 1.0], Interpolation::Nearest).unwrap();
        let z = c(13.0);
        let a = fundamental_system(&pw, z).unwrap();
        let b = fundamental_system(&grid, z).unwrap();
        assert!((a.s1 - b.s1).norm() < 1e-13);
        assert!((a.wronskian() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn invalid_potentials() {
        assert!(Potential::piecewise(vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(Potential::piecewise(vec![0.0, 0.7, 0.5, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(Potential::grid(vec![], Interpolation::Linear).is_err());
        assert!(Potential::Constant(f64::NAN).validate().is_err());
        assert!(fundamental_system(&Potential::zero(), C64::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn free_dirichlet_spectrum() {
        let ev = dirichlet_spectrum(&Potential::zero(), 5).unwrap();
        for (n, e) in ev.iter().enumerate() {
            let exact = PI * PI * ((n + 1) * (n + 1)) as f64;
            assert!((e - exact).abs() <= 1e-10 * exact);
        }
    }

    #[test]
    fn count_below_is_step_function() {
        let u = Potential::zero();
        assert_eq!(dirichlet_count_below(&u, 5.0).unwrap(), 0);
        assert_eq!(dirichlet_count_below(&u, 10.0).unwrap(), 1);
        assert_eq!(dirichlet_count_below(&u, 40.0).unwrap(), 2);
        assert_eq!(dirichlet_count_below(&u, 1000.0).unwrap(), 10);
    }

    #[test]
    fn q_matrix_free_closed_form() {
        for z in [c(-1.0), c(2.0), C64::new(3.0, 1.0)] {
            let q = segment_q_matrix(&Potential::zero(), z).unwrap().q;
            let k = z.sqrt();
            let f = k / k.sin();
            assert!((q[(0, 0)] + f * k.cos()).norm() < 1e-12);
            assert!((q[(0, 1)] - f).norm() < 1e-12);
            assert!((q[(1, 1)] - q[(0, 0)]).norm() < 1e-12);
        }
        // z = −1: √z = i, Q₁₁ = −cosh 1 / sinh 1, Q₁₂ = 1 / sinh 1.
        let q = segment_q_matrix(&Potential::zero(), c(-1.0)).unwrap().q;
        assert!((q[(0, 0)].re + 1f64.cosh() / 1f64.sinh()).abs() < 1e-12);
        assert!((q[(0, 1)].re - 1.0 / 1f64.sinh()).abs() < 1e-12);
    }

    #[test]
    fn q_matrix_pole_reports_dirichlet_eigenvalue() {
        let err = segment_q_matrix(&Potential::zero(), c(4.0 * PI * PI)).unwrap_err();
        match err {
            Error::PoleProximity { pole, .. } => assert!((pole - 4.0 * PI * PI).abs() < 1e-8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn even_potential_gives_equal_diagonal() {
        let u = Potential::function(|x| (2.0 * PI * x).cos());
        assert!(u.is_even(1e-12));
        let q = segment_q_matrix(&u, C64::new(5.0, 0.3)).unwrap().q;
        assert!((q[(0, 0)] - q[(1, 1)]).norm() < 1e-10);
        let odd = Potential::function(|x| x);
        assert!(!odd.is_even(1e-6));
    }

    #[test]
    fn eta_closed_forms() {
        let z = c(3.3);
        let k = z.sqrt();
        assert!((eta_map(&Potential::zero(), 0.0, z).unwrap() - k.cos()).norm() < 1e-14);
        let alpha = 1.7;
        let expect = k.cos() + k.sin() / k * (alpha / 2.0);
        assert!((eta_map(&Potential::zero(), alpha, z).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn gamma_field_has_prescribed_boundary_values() {
        let q = SegmentQFunction::new(Potential::function(|x| x * x)).unwrap();
        let xi = [C64::new(0.4, -0.2), C64::new(-1.1, 0.3)];
        let vals = q.gamma_values(C64::new(2.0, 1.0), xi, &[0.0, 0.5, 1.0]).unwrap();
        assert!((vals[0] - xi[0]).norm() < 1e-12);
        assert!((vals[2] - xi[1]).norm() < 1e-10);
    }
}
