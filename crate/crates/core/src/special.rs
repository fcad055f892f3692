//! Digamma and trigamma functions of a complex argument.

use std::f64::consts::PI;

use crate::C64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// B_{2k} / (2k) for k = 1..6.
const PSI_ASYMP: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
];
// B_{2k} for k = 1..6.
const BERNOULLI: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

const SHIFT_THRESHOLD: f64 = 10.0;

/// `ψ(w) = Γ′(w)/Γ(w)`. Poles at non-positive integers yield non-finite values.
pub fn digamma(w: C64) -> C64 {
    if w.re < 0.5 {
        // ψ(w) = ψ(1 − w) − π cot(πw)
        let pw = w * PI;
        return digamma(C64::new(1.0, 0.0) - w) - PI * pw.cos() / pw.sin();
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut x = w;
    while x.re < SHIFT_THRESHOLD {
        acc -= x.inv();
        x += 1.0;
    }
    let inv = x.inv();
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut p = inv2;
    for c in PSI_ASYMP {
        series += p * c;
        p *= inv2;
    }
    acc + x.ln() - inv * 0.5 - series
}

/// `ψ′(w)`, the derivative of [`digamma`].
pub fn trigamma(w: C64) -> C64 {
    if w.re < 0.5 {
        // ψ′(1 − w) + ψ′(w) = π² / sin²(πw)
        let s = (w * PI).sin();
        return PI * PI / (s * s) - trigamma(C64::new(1.0, 0.0) - w);
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut x = w;
    while x.re < SHIFT_THRESHOLD {
        acc += (x * x).inv();
        x += 1.0;
    }
    let inv = x.inv();
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut p = inv2 * inv;
    for b in BERNOULLI {
        series += p * b;
        p *= inv2;
    }
    acc + inv + inv2 * 0.5 + series
}

/// Real digamma.
pub fn digamma_real(x: f64) -> f64 {
    digamma(C64::new(x, 0.0)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_values() {
        let e1 = (digamma_real(1.0) + EULER_GAMMA).abs();
        assert!(e1 < 1e-14, "{e1:e}");
        let half = -EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
        assert!((digamma_real(0.5) - half).abs() < 1e-13);
        // ψ(1/4) = −γ − π/2 − 3 ln 2
        let quarter = -EULER_GAMMA - PI / 2.0 - 3.0 * std::f64::consts::LN_2;
        assert!((digamma_real(0.25) - quarter).abs() < 1e-13);
    }

    #[test]
    fn recurrence_and_reflection() {
        for w in [C64::new(0.3, 0.7), C64::new(-2.7, 0.1), C64::new(-7.25, -3.0), C64::new(12.0, 40.0)] {
            let lhs = digamma(w + 1.0);
            let rhs = digamma(w) + w.inv();
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()), "{w}");
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let w = C64::new(-1.3, 0.4);
        assert!((digamma(w.conj()) - digamma(w).conj()).norm() < 1e-13);
    }

    #[test]
    fn trigamma_matches_difference_quotient() {
        for x in [-3.4, -0.7, 0.2, 1.5, 9.0, 30.0] {
            let h = 1e-5;
            let fd = (digamma_real(x + h) - digamma_real(x - h)) / (2.0 * h);
            let tg = trigamma(C64::new(x, 0.0)).re;
            assert!((fd - tg).abs() < 1e-6 * tg.abs().max(1.0), "x={x}: {fd} vs {tg}");
        }
        // ψ′(1) = π²/6
        assert!((trigamma(C64::new(1.0, 0.0)).re - PI * PI / 6.0).abs() < 1e-13);
    }

    #[test]
    fn poles_are_not_finite() {
        assert!(!digamma_real(-2.0).is_finite() || digamma_real(-2.0).abs() > 1e14);
    }
}
