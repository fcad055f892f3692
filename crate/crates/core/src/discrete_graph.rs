//! Discrete magnetic Laplacians: finite directed multigraphs with edge phases,
//! the ℤ² lattice at rational flux, and almost-Mathieu chains.
//!
//! On a graph, `Δ_G h(v) = (1/deg v)(Σ_{ιe=v} e^{−iβ(e)} h(τe) + Σ_{τe=v} e^{iβ(e)} h(ιe))`
//! is self-adjoint in `ℓ²` with weights `deg v`; we return the unitarily
//! equivalent `D^{1/2} Δ_G D^{−1/2}`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_defect, hermitian_eigen, HermitianEigen};
use crate::spectrum::{SpectralTypes, SpectrumDescription};
use crate::{CMatrix, C64};

/// Largest admissible vertex degree.
pub const MAX_DEGREE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticEdge {
    pub src: usize,
    pub dst: usize,
    /// Phase `β(e)` in radians.
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagneticGraph {
    vertex_count: usize,
    edges: Vec<MagneticEdge>,
    alpha: Vec<f64>,
}

impl MagneticGraph {
    /// `alpha` may be empty (all couplings zero).
    pub fn new(vertex_count: usize, edges: Vec<MagneticEdge>, alpha: Vec<f64>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Input("graph has no vertices".into()));
        }
        let alpha = if alpha.is_empty() { vec![0.0; vertex_count] } else { alpha };
        if alpha.len() != vertex_count {
            return Err(Error::Input(format!(
                "alpha has {} entries for {vertex_count} vertices",
                alpha.len()
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.src >= vertex_count || e.dst >= vertex_count {
                return Err(Error::Input(format!(
                    "edge {i} ({} → {}) refers to a vertex outside 0..{vertex_count}",
                    e.src, e.dst
                )));
            }
            if !e.beta.is_finite() {
                return Err(Error::Input(format!("edge {i} has a non-finite phase")));
            }
        }
        crate::error::check_finite(alpha.iter().copied(), "alpha")?;
        let g = Self { vertex_count, edges, alpha };
        for v in 0..vertex_count {
            let d = g.degree(v);
            if d == 0 {
                return Err(Error::Input(format!("vertex {v} is isolated")));
            }
            if d > MAX_DEGREE {
                return Err(Error::Input(format!("vertex {v} has degree {d} > {MAX_DEGREE}")));
            }
        }
        Ok(g)
    }

    /// Oriented cycle `0 → 1 → … → n−1 → 0` with phase `beta` on every edge.
    pub fn cycle(n: usize, beta: f64) -> Result<Self> {
        let edges = (0..n).map(|i| MagneticEdge { src: i, dst: (i + 1) % n, beta }).collect();
        Self::new(n, edges, Vec::new())
    }

    /// Path `0 → 1 → … → n−1`.
    pub fn path(n: usize) -> Result<Self> {
        let edges = (0..n.saturating_sub(1)).map(|i| MagneticEdge { src: i, dst: i + 1, beta: 0.0 }).collect();
        Self::new(n, edges, Vec::new())
    }

    /// Star with centre 0 and `k` outward edges.
    pub fn star(k: usize) -> Result<Self> {
        let edges = (1..=k).map(|i| MagneticEdge { src: 0, dst: i, beta: 0.0 }).collect();
        Self::new(k + 1, edges, Vec::new())
    }

    /// One vertex carrying one loop.
    pub fn self_loop(beta: f64) -> Result<Self> {
        Self::new(1, vec![MagneticEdge { src: 0, dst: 0, beta }], Vec::new())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[MagneticEdge] {
        &self.edges
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn with_alpha(mut self, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != self.vertex_count {
            return Err(Error::Input(format!("alpha has {} entries for {} vertices", alpha.len(), self.vertex_count)));
        }
        crate::error::check_finite(alpha.iter().copied(), "alpha")?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn outdegree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.src == v).count()
    }

    pub fn indegree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.dst == v).count()
    }

    /// `indeg + outdeg`; a loop counts twice.
    pub fn degree(&self, v: usize) -> usize {
        self.indegree(v) + self.outdegree(v)
    }

    /// `β(e) ↦ β(e) + φ(ιe) − φ(τe)`, a unitary equivalence of `Δ_G`.
    pub fn gauge_transform(&self, phi: &[f64]) -> Result<Self> {
        if phi.len() != self.vertex_count {
            return Err(Error::Dimension(format!("gauge has {} entries for {} vertices", phi.len(), self.vertex_count)));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| MagneticEdge { beta: e.beta + phi[e.src] - phi[e.dst], ..*e })
            .collect();
        Ok(Self { edges, ..self.clone() })
    }
}

/// `D^{1/2} Δ_G D^{−1/2}`.
pub fn magnetic_laplacian_matrix(g: &MagneticGraph) -> CMatrix {
    let n = g.vertex_count();
    let mut a = CMatrix::zeros(n, n);
    for e in g.edges() {
        let phase = C64::from_polar(1.0, -e.beta);
        a[(e.src, e.dst)] += phase;
        a[(e.dst, e.src)] += phase.conj();
    }
    let sq: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] /= sq[i] * sq[j];
        }
    }
    a
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn weighted_hermitian_spectrum(m: &CMatrix) -> Result<HermitianEigen> {
    let d = hermitian_defect(m);
    if d > 1e-10 {
        return Err(Error::Precondition { what: "matrix is not Hermitian".into(), defect: d });
    }
    hermitian_eigen(m)
}

/// Spectrum of `Δ_G` as discrete points with multiplicities.
pub fn graph_spectrum(g: &MagneticGraph) -> Result<SpectrumDescription> {
    let values = weighted_hermitian_spectrum(&magnetic_laplacian_matrix(g))?.values;
    Ok(SpectrumDescription::from_eigenvalues(&values, 1e-10))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Rational flux `η = p/q` with hopping amplitudes `λ₁`, `λ₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxModel {
    pub p: i64,
    pub q: u64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl FluxModel {
    pub fn new(p: i64, q: u64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Input("flux denominator must be positive".into()));
        }
        if gcd(p.unsigned_abs(), q) != 1 {
            return Err(Error::Input(format!("flux {p}/{q} is not in lowest terms")));
        }
        crate::error::check_finite([lambda1, lambda2], "hopping amplitudes")?;
        Ok(Self { p, q, lambda1, lambda2 })
    }

    pub fn eta(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// Landau-gauge Bloch matrix of `L(p/q)` on the magnetic unit cell of `q`
/// sites: diagonal `2λ₂cos(k₂ + 2πpj/q)`, hopping `λ₁`, closing phase `e^{ik₁}`.
pub fn bloch_matrix(fm: &FluxModel, k1: f64, k2: f64) -> CMatrix {
    let q = fm.q as usize;
    let mut h = CMatrix::zeros(q, q);
    for j in 0..q {
        let phase = k2 + 2.0 * PI * (fm.p as f64) * j as f64 / fm.q as f64;
        h[(j, j)] = C64::new(2.0 * fm.lambda2 * phase.cos(), 0.0);
    }
    let t = C64::new(fm.lambda1, 0.0);
    let wrap = C64::from_polar(fm.lambda1, k1);
    if q == 1 {
        h[(0, 0)] += wrap + wrap.conj();
        return h;
    }
    for j in 0..q - 1 {
        h[(j, j + 1)] += t;
        h[(j + 1, j)] += t;
    }
    h[(q - 1, 0)] += wrap;
    h[(0, q - 1)] += wrap.conj();
    h
}

/// `q` bands of `L(p/q)` as `(lo, hi)` ranges, ascending by band index.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochBands {
    pub bands: Vec<(f64, f64)>,
}

impl BlochBands {
    pub fn to_spectrum(&self) -> SpectrumDescription {
        SpectrumDescription::from_bands(&self.bands, SpectralTypes::ac_band())
    }

    /// Union of the bands as disjoint closed intervals.
    pub fn union(&self) -> Vec<(f64, f64)> {
        merge_intervals(&self.bands)
    }
}

pub fn merge_intervals(intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in sorted {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Band ranges from an `n₁ × n₂` momentum grid over the torus, plus the
/// points `k₁ ∈ {0, π}`, `k₂ ∈ {0, π/q}` where the band edges are attained.
pub fn z2_bloch_bands(fm: &FluxModel, grid: (usize, usize)) -> Result<BlochBands> {
    let (n1, n2) = grid;
    if n1 == 0 || n2 == 0 {
        return Err(Error::Input("momentum grid must be non-empty".into()));
    }
    let q = fm.q as usize;
    let mut ks: Vec<(f64, f64)> = Vec::with_capacity(n1 * n2 + 4);
    for i in 0..n1 {
        for j in 0..n2 {
            ks.push((2.0 * PI * i as f64 / n1 as f64, 2.0 * PI * j as f64 / n2 as f64));
        }
    }
    for k1 in [0.0, PI] {
        for k2 in [0.0, PI / fm.q as f64] {
            ks.push((k1, k2));
        }
    }
    let init = || (vec![f64::INFINITY; q], vec![f64::NEG_INFINITY; q]);
    let (lo, hi) = ks
        .par_iter()
        .map(|&(k1, k2)| linalg::hermitian_eigenvalues(&bloch_matrix(fm, k1, k2)))
        .try_fold(init, |(mut lo, mut hi), ev| {
            let ev = ev?;
            for b in 0..q {
                lo[b] = lo[b].min(ev[b]);
                hi[b] = hi[b].max(ev[b]);
            }
            Ok::<_, Error>((lo, hi))
        })
        .try_reduce(init, |(mut lo, mut hi), (l2, h2)| {
            for b in 0..q {
                lo[b] = lo[b].min(l2[b]);
                hi[b] = hi[b].max(h2[b]);
            }
            Ok((lo, hi))
        })?;
    Ok(BlochBands { bands: lo.into_iter().zip(hi).collect() })
}

fn mathieu_diagonal(fm: &FluxModel, theta: f64, n: usize) -> Vec<f64> {
    let eta = fm.eta();
    (0..n).map(|k| 2.0 * fm.lambda2 * (2.0 * PI * eta * k as f64 + theta).cos()).collect()
}

/// Eigenvalues of `M(η, θ)` truncated to `n` sites with zero boundary values.
pub fn almost_mathieu_spectrum(fm: &FluxModel, theta: f64, truncation: usize) -> Result<Vec<f64>> {
    if truncation < 64 {
        return Err(Error::Input(format!("truncation {truncation} is below the minimum of 64")));
    }
    let d = mathieu_diagonal(fm, theta, truncation);
    let e = vec![fm.lambda1; truncation - 1];
    linalg::tridiagonal_eigenvalues(&d, &e)
}

/// Like [`almost_mathieu_spectrum`] but drops eigenvalues whose eigenvector
/// carries more than half its mass in the outer eighths of the chain. The
/// truncation creates such boundary-localised states inside spectral gaps.
pub fn almost_mathieu_bulk_spectrum(fm: &FluxModel, theta: f64, truncation: usize) -> Result<Vec<f64>> {
    let values = almost_mathieu_spectrum(fm, theta, truncation)?;
    let d = mathieu_diagonal(fm, theta, truncation);
    let e = vec![fm.lambda1; truncation - 1];
    let edge = truncation / 8;
    let scale = d.iter().fold(fm.lambda1.abs(), |m, v| m.max(v.abs())).max(1.0);
    Ok(values
        .into_iter()
        .filter(|&lam| {
            let v = inverse_iteration(&d, &e, lam + 1e-10 * scale);
            let total: f64 = v.iter().map(|x| x * x).sum();
            let outer: f64 = v[..edge].iter().chain(&v[truncation - edge..]).map(|x| x * x).sum();
            outer <= 0.5 * total
        })
        .collect())
}

/// Two steps of inverse iteration for the symmetric tridiagonal `(d, e)` at
/// shift `s`, via Gaussian elimination with partial pivoting.
fn inverse_iteration(d: &[f64], e: &[f64], s: f64) -> Vec<f64> {
    let n = d.len();
    let mut x = vec![1.0; n];
    for _ in 0..2 {
        x = linalg::tridiagonal_solve(d, e, s, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            x.iter_mut().for_each(|v| *v /= norm);
        }
    }
    x
}

/// Hausdorff distance between a finite point set and a union of intervals.
pub fn hausdorff_points_bands(points: &[f64], bands: &[(f64, f64)]) -> f64 {
    let union = merge_intervals(bands);
    if points.is_empty() || union.is_empty() {
        return f64::INFINITY;
    }
    let to_bands = |x: f64| {
        union
            .iter()
            .map(|&(lo, hi)| if x < lo { lo - x } else if x > hi { x - hi } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    };
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let d1 = sorted.iter().map(|&x| to_bands(x)).fold(0.0, f64::max);
    let mut d2: f64 = 0.0;
    for &(lo, hi) in &union {
        // The farthest band point from the set is an endpoint or the midpoint
        // of a gap between consecutive set points inside the band.
        let nearest = |x: f64| {
            let i = sorted.partition_point(|&p| p < x);
            let mut best = f64::INFINITY;
            if i < sorted.len() {
                best = best.min((sorted[i] - x).abs());
            }
            if i > 0 {
                best = best.min((x - sorted[i - 1]).abs());
            }
            best
        };
        d2 = d2.max(nearest(lo)).max(nearest(hi));
        let inside: Vec<f64> = sorted.iter().copied().filter(|&p| p >= lo && p <= hi).collect();
        for w in inside.windows(2) {
            d2 = d2.max(0.5 * (w[1] - w[0]));
        }
    }
    d1.max(d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(g: &MagneticGraph) -> Vec<f64> {
        weighted_hermitian_spectrum(&magnetic_laplacian_matrix(g)).unwrap().values
    }

    #[test]
    fn self_loop_is_cos_beta() {
        let g = MagneticGraph::self_loop(0.7).unwrap();
        assert_eq!(g.degree(0), 2);
        let m = magnetic_laplacian_matrix(&g);
        assert!((m[(0, 0)] - C64::new(0.7f64.cos(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cycle_spectrum_is_circulant() {
        let n = 7;
        let mut ev = spectrum(&MagneticGraph::cycle(n, 0.0).unwrap());
        let mut exact: Vec<f64> = (0..n).map(|k| (2.0 * PI * k as f64 / n as f64).cos()).collect();
        exact.sort_by(f64::total_cmp);
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_edges() {
        let beta = 1.1;
        let g = MagneticGraph::new(
            2,
            vec![MagneticEdge { src: 0, dst: 1, beta: 0.0 }, MagneticEdge { src: 0, dst: 1, beta }],
            vec![],
        )
        .unwrap();
        let ev = spectrum(&g);
        let c = (beta / 2.0).cos().abs();
        assert!((ev[0] + c).abs() < 1e-12 && (ev[1] - c).abs() < 1e-12);
    }

    #[test]
    fn invalid_graphs() {
        assert!(MagneticGraph::new(2, vec![MagneticEdge { src: 0, dst: 2, beta: 0.0 }], vec![]).is_err());
        assert!(MagneticGraph::new(3, vec![MagneticEdge { src: 0, dst: 1, beta: 0.0 }], vec![]).is_err());
        assert!(MagneticGraph::new(2, vec![MagneticEdge { src: 0, dst: 1, beta: 0.0 }], vec![1.0]).is_err());
    }

    #[test]
    fn eigensolver_basics() {
        let id = CMatrix::identity(4, 4);
        assert!(weighted_hermitian_spectrum(&id).unwrap().values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(3.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
        ]));
        assert_eq!(weighted_hermitian_spectrum(&d).unwrap().values, vec![1.0, 2.0, 3.0]);
        let mut bad = CMatrix::identity(2, 2);
        bad[(0, 1)] = C64::new(1.0, 0.0);
        assert!(weighted_hermitian_spectrum(&bad).is_err());
    }

    #[test]
    fn zero_flux_single_band() {
        let fm = FluxModel::new(0, 1, 1.0, 1.0).unwrap();
        let b = z2_bloch_bands(&fm, (16, 16)).unwrap();
        assert_eq!(b.bands.len(), 1);
        assert!((b.bands[0].0 + 4.0).abs() < 1e-12 && (b.bands[0].1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn half_flux_bands() {
        let fm = FluxModel::new(1, 2, 1.0, 1.0).unwrap();
        let b = z2_bloch_bands(&fm, (32, 32)).unwrap();
        let r = 2.0 * 2f64.sqrt();
        assert!((b.bands[0].0 + r).abs() < 1e-12 && b.bands[0].1.abs() < 1e-12);
        assert!(b.bands[1].0.abs() < 1e-12 && (b.bands[1].1 - r).abs() < 1e-12);
    }

    #[test]
    fn flux_must_be_reduced() {
        assert!(FluxModel::new(2, 4, 1.0, 1.0).is_err());
        assert!(FluxModel::new(0, 2, 1.0, 1.0).is_err());
        assert!(FluxModel::new(-1, 3, 1.0, 1.0).is_ok());
    }

    #[test]
    fn mathieu_limits() {
        let free = FluxModel::new(1, 3, 1.0, 0.0).unwrap();
        let ev = almost_mathieu_spectrum(&free, 0.3, 256).unwrap();
        assert!(ev[0] > -2.0 && ev[255] < 2.0 && ev[0] < -1.99);
        let diag = FluxModel::new(1, 3, 0.0, 1.0).unwrap();
        let ev = almost_mathieu_spectrum(&diag, 0.3, 64).unwrap();
        let mut exact: Vec<f64> = (0..64).map(|n| 2.0 * (2.0 * PI * n as f64 / 3.0 + 0.3).cos()).collect();
        exact.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(almost_mathieu_spectrum(&diag, 0.0, 10).is_err());
    }

    #[test]
    fn bulk_filter_removes_gap_states() {
        let fm = FluxModel::new(1, 3, 1.0, 1.0).unwrap();
        let bands = z2_bloch_bands(&fm, (16, 16)).unwrap();
        let raw = almost_mathieu_spectrum(&fm, 0.9, 512).unwrap();
        let bulk = almost_mathieu_bulk_spectrum(&fm, 0.9, 512).unwrap();
        assert!(bulk.len() < raw.len());
        let union = bands.union();
        for x in bulk {
            assert!(union.iter().any(|&(l, h)| x >= l - 1e-2 && x <= h + 1e-2), "{x} lies in a gap");
        }
    }

    #[test]
    fn hausdorff_basic() {
        let d = hausdorff_points_bands(&[0.0, 0.5, 1.0, 3.0], &[(0.0, 1.0)]);
        assert!((d - 2.0).abs() < 1e-15);
        let d = hausdorff_points_bands(&[0.0, 1.0], &[(0.0, 1.0)]);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_iteration_finds_eigenvector() {
        let d = vec![2.0, 2.0, 2.0, 2.0];
        let e = vec![-1.0, -1.0, -1.0];
        let ev = linalg::tridiagonal_eigenvalues(&d, &e).unwrap();
        let v = inverse_iteration(&d, &e, ev[0] + 1e-12);
        // Tv = λv
        for i in 0..4 {
            let mut tv = d[i] * v[i];
            if i > 0 {
                tv += e[i - 1] * v[i - 1];
            }
            if i < 3 {
                tv += e[i] * v[i + 1];
            }
            assert!((tv - ev[0] * v[i]).abs() < 1e-9);
        }
    }
}
