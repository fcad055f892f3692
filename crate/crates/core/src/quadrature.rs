//! Adaptive Gauss–Kronrod quadrature and Richardson extrapolation.

use crate::{CMatrix, CVector, C64};

/// Values that can be integrated: a vector space with a norm.
pub trait Integrand: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, other: &Self, w: f64);
    fn norm(&self) -> f64;
}

impl Integrand for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += w * other;
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += other * w;
    }
    fn norm(&self) -> f64 {
        C64::norm(*self)
    }
}

impl Integrand for CVector {
    fn zero_like(&self) -> Self {
        CVector::zeros(self.len())
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        self.axpy(C64::new(w, 0.0), other, C64::new(1.0, 0.0));
    }
    fn norm(&self) -> f64 {
        self.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Integrand for CMatrix {
    fn zero_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += other * C64::new(w, 0.0);
    }
    fn norm(&self) -> f64 {
        CMatrix::norm(self)
    }
}

// 15-point Kronrod nodes (non-negative half) and weights; the 7-point Gauss
// rule uses the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<V: Integrand>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = fc.zero_like();
    gauss.add_scaled(&fc, WG[3]);
    let mut kron = fc.zero_like();
    kron.add_scaled(&fc, WGK[7]);
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron.add_scaled(&f1, WGK[j]);
        kron.add_scaled(&f2, WGK[j]);
        if j % 2 == 1 {
            gauss.add_scaled(&f1, WG[j / 2]);
            gauss.add_scaled(&f2, WG[j / 2]);
        }
    }
    let mut diff = kron.clone();
    diff.add_scaled(&gauss, -1.0);
    let mut out = kron.zero_like();
    out.add_scaled(&kron, h);
    (out, diff.norm() * h.abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Quadrature<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Globally adaptive G7–K15 integration of `f` over `[a, b]`, starting from
/// `initial_panels` equal panels and bisecting the worst panel until the
/// summed error estimate drops below `max(abs_tol, rel_tol·‖I‖)`.
pub fn integrate<V: Integrand>(
    mut f: impl FnMut(f64) -> V,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Quadrature<V> {
    let panels = initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut segs: Vec<(f64, f64, V, f64)> = (0..panels)
        .map(|k| {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == panels { b } else { lo + width };
            let (v, e) = kronrod(&mut f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    let mut evaluations = 15 * panels;
    loop {
        let mut total = segs[0].2.zero_like();
        let mut err = 0.0;
        for s in &segs {
            total.add_scaled(&s.2, 1.0);
            err += s.3;
        }
        let target = abs_tol.max(rel_tol * total.norm());
        if err <= target || segs.len() >= max_panels {
            return Quadrature {
                value: total,
                error: err,
                evaluations,
                converged: err <= target,
            };
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = segs.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Quadrature {
                value: total,
                error: err,
                evaluations,
                converged: false,
            };
        }
        let (v1, e1) = kronrod(&mut f, lo, mid);
        let (v2, e2) = kronrod(&mut f, mid, hi);
        evaluations += 30;
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
}

/// Polynomial extrapolation to `t = 0` of samples `(t_k, v_k)` by Neville's
/// scheme. Returns the extrapolated value and the difference between the two
/// highest-order estimates as an error proxy.
pub fn richardson<V: Integrand>(ts: &[f64], vs: &[V]) -> (V, f64) {
    assert_eq!(ts.len(), vs.len());
    assert!(!ts.is_empty());
    let n = ts.len();
    let mut table: Vec<V> = vs.to_vec();
    let mut prev_top = table[n - 1].clone();
    let mut last_diff = f64::INFINITY;
    for level in 1..n {
        let mut next = Vec::with_capacity(n - level);
        for i in 0..n - level {
            let (t0, t1) = (ts[i], ts[i + level]);
            // P(0) = (t1·P_i − t0·P_{i+1}) / (t1 − t0)
            let mut v = table[i].zero_like();
            v.add_scaled(&table[i], t1 / (t1 - t0));
            v.add_scaled(&table[i + 1], -t0 / (t1 - t0));
            next.push(v);
        }
        let top = next[next.len() - 1].clone();
        let mut d = top.clone();
        d.add_scaled(&prev_top, -1.0);
        last_diff = d.norm();
        prev_top = top;
        table = next;
    }
    if n == 1 {
        last_diff = 0.0;
    }
    (prev_top, last_diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let q = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1, 1e-14, 1e-14, 100);
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((q.value - exact).abs() < 1e-12);
        assert!(q.converged);
    }

    #[test]
    fn resolves_narrow_lorentzian() {
        let y = 1e-6;
        let q = integrate(|x: f64| y / ((x - 0.3) * (x - 0.3) + y * y), 0.0, 1.0, 4, 1e-12, 1e-12, 4000);
        let exact = ((1.0 - 0.3) / y).atan() - ((0.0 - 0.3) / y).atan();
        assert!((q.value - exact).abs() < 1e-9, "{} vs {}", q.value, exact);
    }

    #[test]
    fn richardson_removes_linear_and_quadratic_terms() {
        let ts = [0.1, 0.05, 0.025, 0.0125];
        let vs: Vec<f64> = ts.iter().map(|t| 2.0 + 3.0 * t - 5.0 * t * t).collect();
        let (v, err) = richardson(&ts, &vs);
        assert!((v - 2.0).abs() < 1e-12);
        assert!(err < 1e-10);
    }
}
