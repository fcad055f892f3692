//! Arrays of quantum dots in a uniform magnetic field.
//!
//! A single dot has Fock–Darwin levels `E_mn = ½(n+m+1)Ω + (n−m)ξ` with
//! `Ω = 2√(π²ξ² + ω²)` and scalar Q-function
//! `q(z) = −(1/2π)[ψ(½ − z/Ω) + log(Ω/2π) + 2γ]`. Coupling the dots through the
//! lattice operator `L(η)` gives `spec H ∖ spec H⁰ = q⁻¹(spec L(η))`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::discrete_graph::{z2_bloch_bands, FluxModel};
use crate::error::{Error, Result};
use crate::krein::{pullback_scalar, ScalarQ};
use crate::special::{digamma, trigamma, EULER_GAMMA};
use crate::spectrum::{Multiplicity, SpectralPoint, SpectralTypes, SpectrumDescription};
use crate::C64;

/// Most levels [`fock_levels`] or the level listing will enumerate.
pub const MAX_LEVELS: usize = 1_000_000;
/// Largest denominator accepted by [`butterfly_dataset`].
pub const MAX_BUTTERFLY_Q: u64 = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotArrayModel {
    pub xi: f64,
    pub omega: f64,
    pub flux: FluxModel,
}

impl DotArrayModel {
    pub fn new(xi: f64, omega: f64, flux: FluxModel) -> Result<Self> {
        crate::error::check_finite([xi, omega], "dot parameters")?;
        if omega <= 0.0 {
            return Err(Error::Input(format!("dot strength ω = {omega} must be positive")));
        }
        Ok(Self { xi, omega, flux })
    }

    /// `Ω = 2√(π²ξ² + ω²)`.
    pub fn omega_cap(&self) -> f64 {
        2.0 * (PI * PI * self.xi * self.xi + self.omega * self.omega).sqrt()
    }

    pub fn q(&self) -> DotQ {
        DotQ { omega_cap: self.omega_cap() }
    }

    /// `E_mn`.
    pub fn level(&self, m: usize, n: usize) -> f64 {
        0.5 * (n + m + 1) as f64 * self.omega_cap() + (n as f64 - m as f64) * self.xi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockLevel {
    pub energy: f64,
    pub labels: Vec<(usize, usize)>,
}

/// All `E_mn` with `m + n < cutoff`, coincident energies grouped.
pub fn fock_levels(model: &DotArrayModel, cutoff: usize) -> Result<Vec<FockLevel>> {
    if cutoff == 0 {
        return Err(Error::Input("cutoff must be at least 1".into()));
    }
    if cutoff.saturating_mul(cutoff + 1) / 2 > MAX_LEVELS {
        return Err(Error::Guard(format!("cutoff {cutoff} would enumerate more than {MAX_LEVELS} levels")));
    }
    let mut all: Vec<(f64, (usize, usize))> = Vec::new();
    for k in 0..cutoff {
        for m in 0..=k {
            all.push((model.level(m, k - m), (m, k - m)));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<FockLevel> = Vec::new();
    for (e, lab) in all {
        match out.last_mut() {
            Some(last) if (e - last.energy).abs() <= 1e-12 * (1.0 + e.abs()) => last.labels.push(lab),
            _ => out.push(FockLevel { energy: e, labels: vec![lab] }),
        }
    }
    Ok(out)
}

/// Energies `E_mn` inside the open interval `(lo, hi)`, ascending, deduplicated.
pub fn levels_in(model: &DotArrayModel, lo: f64, hi: f64) -> Result<Vec<f64>> {
    // E_mn ≥ (m+n+1)(Ω/2 − |ξ|), and Ω/2 ≥ π|ξ| so the slope is positive.
    let slope = 0.5 * model.omega_cap() - model.xi.abs();
    let kmax = (hi / slope).ceil().max(1.0);
    if kmax > (2 * MAX_LEVELS) as f64 {
        return Err(Error::Guard(format!("window reaches level index {kmax}")));
    }
    let cutoff = (kmax as usize + 1).min(((2 * MAX_LEVELS) as f64).sqrt() as usize);
    Ok(fock_levels(model, cutoff)?
        .into_iter()
        .map(|l| l.energy)
        .filter(|&e| e > lo && e < hi)
        .collect())
}

/// The single-dot Q-function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotQ {
    pub omega_cap: f64,
}

impl DotQ {
    /// `Ω(n + ½)`.
    pub fn pole(&self, n: usize) -> f64 {
        self.omega_cap * (n as f64 + 0.5)
    }

    fn nearest_pole(&self, x: f64) -> Option<f64> {
        let n = (x / self.omega_cap - 0.5).round();
        (n >= 0.0).then(|| self.pole(n as usize))
    }

    /// The gap `(Ω(n − ½), Ω(n + ½))`; gap 0 is `(−∞, Ω/2)`.
    pub fn gap(&self, n: usize) -> (f64, f64) {
        let lo = if n == 0 { f64::NEG_INFINITY } else { self.pole(n - 1) };
        (lo, self.pole(n))
    }

    /// The unique solution of `q(z) = value` in gap `n`.
    pub fn inverse_in_gap(&self, value: f64, n: usize) -> Result<f64> {
        let (glo, ghi) = self.gap(n);
        let f = |x: f64| self.eval(C64::new(x, 0.0)).map(|v| v.re);
        let guard = |p: f64| 1e-10 * p.abs().max(1.0);
        let hi = ghi - guard(ghi);
        let mut lo = if n == 0 { ghi - self.omega_cap } else { glo + guard(glo) };
        if n == 0 {
            let mut step = self.omega_cap;
            while f(lo)? > value {
                step *= 2.0;
                lo -= step;
                if !lo.is_finite() || step > 1e300 {
                    return Err(Error::Bracketing { lo, hi, reason: format!("q never drops below {value}") });
                }
            }
        }
        let (flo, fhi) = (f(lo)?, f(hi)?);
        if !(flo <= value && value <= fhi) {
            return Err(Error::Bracketing {
                lo,
                hi,
                reason: format!("q ranges over [{flo}, {fhi}] in gap {n}, missing {value}"),
            });
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if f(m)? < value {
                a = m;
            } else {
                b = m;
            }
        }
        let (fa, fb) = (f(a)?, f(b)?);
        Ok(if (fa - value).abs() <= (fb - value).abs() { a } else { b })
    }
}

impl ScalarQ for DotQ {
    fn eval(&self, z: C64) -> Result<C64> {
        if let Some(p) = self.nearest_pole(z.re) {
            if (z - p).norm() <= 1e-12 * p.abs().max(1.0) {
                return Err(Error::PoleProximity { z: z.to_string(), pole: p });
            }
        }
        let w = C64::new(0.5, 0.0) - z / self.omega_cap;
        let c = (self.omega_cap / (2.0 * PI)).ln() + 2.0 * EULER_GAMMA;
        Ok(-(digamma(w) + c) / (2.0 * PI))
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        self.eval(C64::new(x, 0.0))?;
        let w = C64::new(0.5 - x / self.omega_cap, 0.0);
        Ok(trigamma(w).re / (2.0 * PI * self.omega_cap))
    }

    fn poles_in(&self, lo: f64, hi: f64) -> Option<Vec<f64>> {
        let first = (lo / self.omega_cap - 0.5).ceil().max(0.0) as usize;
        let mut out = Vec::new();
        let mut n = first;
        while self.pole(n) <= hi {
            if self.pole(n) >= lo {
                out.push(self.pole(n));
            }
            n += 1;
        }
        Some(out)
    }
}

/// `q(z)` for the model.
pub fn dot_q(model: &DotArrayModel, z: C64) -> Result<C64> {
    model.q().eval(z)
}

/// `spec L(η)` as ac bands; bands that collapse to a point become
/// eigenvalues of infinite multiplicity.
pub fn lattice_spectrum(flux: &FluxModel, grid: usize) -> Result<SpectrumDescription> {
    let bands = z2_bloch_bands(flux, (grid, grid))?;
    let mut out = SpectrumDescription::new();
    let mut intervals = Vec::new();
    for &(lo, hi) in &bands.bands {
        if hi - lo <= 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
            let e = 0.5 * (lo + hi);
            if !out.points.iter().any(|p| (p.energy - e).abs() <= 1e-12 * (1.0 + e.abs())) {
                out.points.push(SpectralPoint {
                    energy: e,
                    multiplicity: Multiplicity::Infinite,
                    types: SpectralTypes::infinite_eigenvalue(),
                });
            }
        } else {
            intervals.push((lo, hi));
        }
    }
    out.extend(SpectrumDescription::from_bands(&intervals, SpectralTypes::ac_band()));
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArraySpectrum {
    pub spectrum: SpectrumDescription,
    /// Single-dot levels inside the window. The pullback says nothing about
    /// these points; bands are reported as closures across them.
    pub excluded_levels: Vec<f64>,
}

/// Default momentum grid (per axis) for the lattice bands.
pub const DEFAULT_GRID: usize = 64;

/// `q⁻¹(spec L(η)) ∩ window`, split at the poles of `q`. Windows whose ends
/// sit on a level `E_mn` are refused.
pub fn array_spectrum(model: &DotArrayModel, window: (f64, f64)) -> Result<ArraySpectrum> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Input(format!("invalid window ({lo}, {hi})")));
    }
    let guard = |e: f64| 1e-9 * e.abs().max(1.0);
    let near = levels_in(model, lo - 1.0, hi + 1.0)?;
    if let Some(e) = near.iter().find(|&&e| (e - lo).abs() <= guard(e) || (e - hi).abs() <= guard(e)) {
        return Err(Error::Input(format!("window end touches the single-dot level {e}")));
    }
    let spec_l = lattice_spectrum(&model.flux, DEFAULT_GRID)?;
    let spectrum = pullback_scalar(&model.q(), &spec_l, window)?;
    let excluded_levels = near.into_iter().filter(|&e| e > lo && e < hi).collect();
    Ok(ArraySpectrum { spectrum, excluded_levels })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButterflyRow {
    pub p: i64,
    pub q: u64,
    pub gap: usize,
    /// Band edges in units of `Ω`.
    pub lo: f64,
    pub hi: f64,
}

pub const BUTTERFLY_HEADER: &str = "p,q,gap,lo,hi";

/// For every reduced `p/q ∈ [0, 1]` with `q ≤ q_max`, the bands of `L(p/q)`
/// mapped into gap `gap` of `q(z)`. Rows are ordered by `(q, p)` then energy.
pub fn butterfly_dataset(model: &DotArrayModel, q_max: u64, gap: usize) -> Result<Vec<ButterflyRow>> {
    if q_max == 0 || q_max > MAX_BUTTERFLY_Q {
        return Err(Error::Guard(format!("q_max = {q_max} must lie in 1..={MAX_BUTTERFLY_Q}")));
    }
    let mut fractions = Vec::new();
    for q in 1..=q_max {
        for p in 0..=q as i64 {
            if let Ok(f) = FluxModel::new(p, q, model.flux.lambda1, model.flux.lambda2) {
                fractions.push(f);
            }
        }
    }
    let dq = model.q();
    let scale = dq.omega_cap;
    let rows = fractions
        .par_iter()
        .map(|f| -> Result<Vec<ButterflyRow>> {
            let bands = z2_bloch_bands(f, (16, 16))?;
            bands
                .bands
                .iter()
                .map(|&(lo, hi)| {
                    Ok(ButterflyRow {
                        p: f.p,
                        q: f.q,
                        gap,
                        lo: dq.inverse_in_gap(lo, gap)? / scale,
                        hi: dq.inverse_in_gap(hi, gap)? / scale,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}
