//! Equilateral magnetic quantum graphs with δ-couplings `α(v) = (deg v/2)·α`.
//!
//! Every edge is `[0, 1]` carrying the same potential `U`. Vertex conditions:
//! `e^{iβ(e)} f_e(1) = f_b(0) =: f(v)` for `ιb = τe = v`, and
//! `Σ_{ιe=v} f_e′(0) − Σ_{τe=v} e^{iβ(e)} f_e′(1) = α(v) f(v)`.
//!
//! Three routes to the spectrum: pulling back `spec Δ_G` through
//! `η(z) = ½(s′(1;z) + c(1;z) + α s(1;z))`, the vertex secular system, and a
//! finite-difference discretisation.

use rayon::prelude::*;

use crate::discrete_graph::{graph_spectrum, MagneticGraph};
use crate::error::{Error, Result};
use crate::krein::{pullback_special, SpecialQ, KERNEL_TOL};
use crate::linalg;
use crate::roots::golden_min;
use crate::spectrum::SpectrumDescription;
use crate::sturm_liouville::{dirichlet_count_below, dirichlet_eigenvalue, eta_map, fundamental_system, Potential};
use crate::{CMatrix, C64};

/// Sampling tolerance for the even-potential branch of the symmetry check.
pub const EVEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct QuantumGraphModel {
    pub graph: MagneticGraph,
    pub potential: Potential,
    pub alpha_scale: f64,
}

impl QuantumGraphModel {
    pub fn new(graph: MagneticGraph, potential: Potential, alpha_scale: f64) -> Result<Self> {
        potential.validate()?;
        if !alpha_scale.is_finite() {
            return Err(Error::Input("alpha scale must be finite".into()));
        }
        Ok(Self { graph, potential, alpha_scale })
    }

    /// Takes the coupling from the graph's per-vertex `alpha`, which must be
    /// of the form `(deg v/2)·α`.
    pub fn from_graph_alpha(graph: MagneticGraph, potential: Potential) -> Result<Self> {
        let ratios: Vec<f64> = (0..graph.vertex_count())
            .map(|v| 2.0 * graph.alpha()[v] / graph.degree(v) as f64)
            .collect();
        let a = ratios[0];
        if let Some(v) = ratios.iter().position(|r| (r - a).abs() > 1e-12 * (1.0 + a.abs())) {
            return Err(Error::Hypothesis(format!(
                "vertex {v} has coupling {} but the duality needs α(v) = (deg v/2)·{a}",
                graph.alpha()[v]
            )));
        }
        Self::new(graph, potential, a)
    }

    /// `α(v) = (deg v/2)·α`.
    pub fn vertex_alpha(&self, v: usize) -> f64 {
        0.5 * self.graph.degree(v) as f64 * self.alpha_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryBranch {
    Degree,
    EvenPotential,
    Both,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetryCheck {
    pub holds: bool,
    pub which: SymmetryBranch,
}

/// `indeg v = outdeg v` everywhere, or `U(x) = U(1 − x)`.
pub fn symmetry_check(model: &QuantumGraphModel) -> SymmetryCheck {
    let g = &model.graph;
    let degree = (0..g.vertex_count()).all(|v| g.indegree(v) == g.outdegree(v));
    let even = model.potential.is_even(EVEN_TOL);
    let which = match (degree, even) {
        (true, true) => SymmetryBranch::Both,
        (true, false) => SymmetryBranch::Degree,
        (false, true) => SymmetryBranch::EvenPotential,
        (false, false) => SymmetryBranch::Neither,
    };
    SymmetryCheck { holds: degree || even, which }
}

/// Dirichlet eigenvalues inside the open interval `(lo, hi)`.
pub fn dirichlet_in(u: &Potential, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let first = dirichlet_count_below(u, lo)? + 1;
    let last = dirichlet_count_below(u, hi)?;
    (first..=last)
        .map(|k| dirichlet_eigenvalue(u, k))
        .filter(|d| !matches!(d, Ok(x) if *x <= lo || *x >= hi))
        .collect()
}

fn dirichlet_guard(d: f64) -> f64 {
    1e-7 * d.abs().max(1.0)
}

fn pull_piece(sq: &SpecialQ<'_>, spec: &SpectrumDescription, lo: f64, hi: f64, depth: usize) -> Result<SpectrumDescription> {
    match pullback_special(sq, spec, (lo, hi)) {
        // η turns around outside the range of spec Δ_G; split there.
        Err(Error::NotMonotone(x)) if depth < 16 && x > lo && x < hi => {
            let mut left = pull_piece(sq, spec, lo, x, depth + 1)?;
            left.extend(pull_piece(sq, spec, x, hi, depth + 1)?);
            Ok(left)
        }
        other => other,
    }
}

/// `η⁻¹(spec Δ_G) ∩ window`, excluding `spec D` (cut out with a small guard).
pub fn duality_spectrum(
    model: &QuantumGraphModel,
    window: (f64, f64),
    spec_source: &SpectrumDescription,
) -> Result<SpectrumDescription> {
    let sym = symmetry_check(model);
    if !sym.holds {
        return Err(Error::Hypothesis(
            "symmetry condition fails: some vertex has indeg ≠ outdeg and U is not even".into(),
        ));
    }
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Input(format!("invalid window ({lo}, {hi})")));
    }
    let u = &model.potential;
    let alpha = model.alpha_scale;
    let sq = SpecialQ::new(
        "Δ_G",
        move |z| eta_map(u, alpha, C64::new(z, 0.0)).map(|v| v.re),
        move |z| fundamental_system(u, C64::new(z, 0.0)).map(|f| f.s1.re),
    );
    let mut cuts = vec![lo];
    for d in dirichlet_in(u, lo, hi)? {
        let g = dirichlet_guard(d);
        cuts.push(d - g);
        cuts.push(d + g);
    }
    cuts.push(hi);
    let mut out = SpectrumDescription::new();
    for pair in cuts.chunks(2) {
        if pair[0] < pair[1] {
            out.extend(pull_piece(&sq, spec_source, pair[0], pair[1], 0)?);
        }
    }
    out.sort();
    Ok(out)
}

/// [`duality_spectrum`] with `spec Δ_G` computed from the model's graph.
pub fn duality_spectrum_auto(model: &QuantumGraphModel, window: (f64, f64)) -> Result<SpectrumDescription> {
    duality_spectrum(model, window, &graph_spectrum(&model.graph)?)
}

/// The `2|E| × 2|E|` vertex system in the coefficients of
/// `f_e = a_e c(·; z) + b_e s(·; z)`. Rows are scaled by the largest term
/// entering them.
pub fn secular_matrix(model: &QuantumGraphModel, z: f64) -> Result<CMatrix> {
    let fs = fundamental_system(&model.potential, C64::new(z, 0.0))?;
    let g = &model.graph;
    let ne = g.edges().len();
    let mut m = CMatrix::zeros(2 * ne, 2 * ne);
    let one = C64::new(1.0, 0.0);
    let mut row = 0;
    for v in 0..g.vertex_count() {
        // Endpoint values and (signed) outgoing derivatives at v.
        let mut values: Vec<Vec<(usize, C64)>> = Vec::new();
        let mut flux: Vec<(usize, C64)> = Vec::new();
        for (i, e) in g.edges().iter().enumerate() {
            if e.src == v {
                values.push(vec![(2 * i, one)]);
                flux.push((2 * i + 1, one));
            }
            if e.dst == v {
                let ph = C64::from_polar(1.0, e.beta);
                values.push(vec![(2 * i, ph * fs.c1), (2 * i + 1, ph * fs.s1)]);
                flux.push((2 * i, -ph * fs.c1p));
                flux.push((2 * i + 1, -ph * fs.s1p));
            }
        }
        // Rows are scaled by the size of their terms before cancellation, so
        // a row that vanishes identically at some z stays small there.
        let scale = |row: usize, terms: &mut dyn Iterator<Item = &(usize, C64)>, m: &mut CMatrix| {
            let s = terms.fold(0.0_f64, |acc, (_, x)| acc.max(x.norm()));
            if s > 0.0 {
                m.row_mut(row).iter_mut().for_each(|x| *x /= s);
            }
        };
        for k in 1..values.len() {
            for &(c, x) in &values[k] {
                m[(row, c)] += x;
            }
            for &(c, x) in &values[0] {
                m[(row, c)] -= x;
            }
            scale(row, &mut values[k].iter().chain(&values[0]), &mut m);
            row += 1;
        }
        for &(c, x) in &flux {
            m[(row, c)] += x;
        }
        let a = model.vertex_alpha(v);
        let coupled: Vec<(usize, C64)> = values[0].iter().map(|&(c, x)| (c, x * a)).collect();
        for &(c, x) in &coupled {
            m[(row, c)] -= x;
        }
        scale(row, &mut flux.iter().chain(&coupled), &mut m);
        row += 1;
    }
    debug_assert_eq!(row, 2 * ne);
    Ok(m)
}

/// Singular values of the secular matrix at `z`, relative to `max(σ_max, 1)`.
fn secular_sigma(model: &QuantumGraphModel, z: f64) -> Result<Vec<f64>> {
    let sv = linalg::singular_values(&secular_matrix(model, z)?);
    let top = sv[0].max(1.0);
    Ok(sv.into_iter().map(|s| s / top).collect())
}

#[derive(Debug, Clone, Default)]
pub struct SecularSpectrum {
    /// Roots off `spec D`.
    pub eigenvalues: SpectrumDescription,
    /// Roots that coincide with a Dirichlet eigenvalue of the edge.
    pub dirichlet_coincident: SpectrumDescription,
    pub warnings: Vec<String>,
}

/// Zeros of the smallest singular value of [`secular_matrix`] in the open
/// window: local minima on a `grid`-cell scan, refined by golden section.
pub fn secular_oracle(model: &QuantumGraphModel, window: (f64, f64), grid: usize) -> Result<SecularSpectrum> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Input(format!("invalid window ({lo}, {hi})")));
    }
    if model.graph.edges().is_empty() {
        return Err(Error::Input("graph has no edges".into()));
    }
    let mut warnings = Vec::new();
    if grid < 100 {
        warnings.push(format!("grid of {grid} cells is coarse; close roots may be missed"));
    }
    let grid = grid.max(4);
    let xs: Vec<f64> = (0..=grid).map(|i| lo + (hi - lo) * i as f64 / grid as f64).collect();
    let smin = |z: f64| secular_sigma(model, z).map(|s| *s.last().unwrap());
    let ys = xs.par_iter().map(|&z| smin(z)).collect::<Result<Vec<_>>>()?;
    let mut roots: Vec<(f64, usize)> = Vec::new();
    for i in 0..=grid {
        let left = if i == 0 { f64::INFINITY } else { ys[i - 1] };
        let right = if i == grid { f64::INFINITY } else { ys[i + 1] };
        if !(ys[i] <= left && ys[i] <= right) {
            continue;
        }
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(grid)];
        let (z, _) = golden_min(|z| smin(z).unwrap_or(f64::INFINITY), a, b, 1e-14 * (1.0 + a.abs().max(b.abs())));
        let sv = secular_sigma(model, z)?;
        let mult = sv.iter().filter(|&&s| s <= KERNEL_TOL).count();
        if mult == 0 || z <= lo || z >= hi {
            continue;
        }
        // In an end cell, a minimum pinned against the window edge is a root
        // just outside the window: σ barely drops from its value at the edge.
        if i == 0 || i == grid {
            let edge = ys[i];
            if *sv.last().unwrap() > 0.5 * edge {
                continue;
            }
        }
        if let Some(last) = roots.last_mut() {
            if (z - last.0).abs() <= 1e-9 * (1.0 + z.abs()) {
                last.1 = last.1.max(mult);
                continue;
            }
        }
        roots.push((z, mult));
    }
    let cell = (hi - lo) / grid as f64;
    for w in roots.windows(2) {
        if w[1].0 - w[0].0 < 2.0 * cell {
            warnings.push(format!(
                "roots {} and {} are within two grid cells; refine the grid to be sure none are missed",
                w[0].0, w[1].0
            ));
        }
    }
    let dirichlet = dirichlet_in(&model.potential, lo - 1.0, hi + 1.0)?;
    let mut out = SecularSpectrum { warnings, ..Default::default() };
    for (z, mult) in roots {
        let target = if dirichlet.iter().any(|&d| (z - d).abs() <= 1e-6 * d.abs().max(1.0)) {
            &mut out.dirichlet_coincident
        } else {
            &mut out.eigenvalues
        };
        let mut p = SpectrumDescription::from_eigenvalues(&[z], 0.0);
        p.points[0].multiplicity = crate::Multiplicity::Finite(mult);
        target.extend(p);
    }
    out.eigenvalues.sort();
    out.dirichlet_coincident.sort();
    Ok(out)
}

/// Upper bound on the number of finite-difference unknowns.
pub const FD_MAX_UNKNOWNS: usize = 20_000_000;

/// Lumped-mass P1 discretisation: `K u = λ M u` with the quadratic form
/// `Σ_e ∫ |f′|² + U|f|² + Σ_v α(v)|f(v)|²`.
struct FdSystem<'a> {
    model: &'a QuantumGraphModel,
    n: usize,
    h: f64,
    u_interior: Vec<f64>,
    u_ends: (f64, f64),
}

impl<'a> FdSystem<'a> {
    fn new(model: &'a QuantumGraphModel, h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 0.01) {
            return Err(Error::Input(format!("mesh size {h} must lie in (0, 1/100]")));
        }
        let n = (1.0 / h).round() as usize;
        let unknowns = model.graph.edges().len() * n;
        if unknowns > FD_MAX_UNKNOWNS {
            return Err(Error::Guard(format!("{unknowns} finite-difference unknowns exceed {FD_MAX_UNKNOWNS}")));
        }
        let h = 1.0 / n as f64;
        let u = &model.potential;
        let u_interior = (1..n).map(|j| u.value(j as f64 * h)).collect();
        Ok(Self { model, n, h, u_interior, u_ends: (u.value(0.0), u.value(1.0)) })
    }

    /// Number of generalized eigenvalues strictly below `lam`, by Haynsworth
    /// inertia: edge interiors (tridiagonal) plus the vertex Schur complement.
    fn count_below(&self, lam: f64) -> Result<usize> {
        let (n, h) = (self.n, self.h);
        let g = &self.model.graph;
        let diag: Vec<f64> = self.u_interior.iter().map(|&u| 2.0 / h + h * (u - lam)).collect();
        let off = vec![-1.0 / h; n - 2];
        let interior = linalg::tridiagonal_count_below(&diag, &off, 0.0);
        let mut e1 = vec![0.0; n - 1];
        e1[0] = 1.0;
        let y = linalg::tridiagonal_solve(&diag, &off, 0.0, &e1);
        let (t11, t1n, tnn) = if n - 1 == 1 {
            (y[0], y[0], y[0])
        } else {
            let mut en = vec![0.0; n - 1];
            en[n - 2] = 1.0;
            let yn = linalg::tridiagonal_solve(&diag, &off, 0.0, &en);
            (y[0], y[n - 2], yn[n - 2])
        };
        let nv = g.vertex_count();
        let mut s = CMatrix::zeros(nv, nv);
        let h2 = 1.0 / (h * h);
        for v in 0..nv {
            s[(v, v)] += C64::new(self.model.vertex_alpha(v), 0.0);
        }
        for e in g.edges() {
            let (a, b) = (e.src, e.dst);
            let end_a = 1.0 / h + 0.5 * h * (self.u_ends.0 - lam);
            let end_b = 1.0 / h + 0.5 * h * (self.u_ends.1 - lam);
            s[(a, a)] += C64::new(end_a - h2 * t11, 0.0);
            s[(b, b)] += C64::new(end_b - h2 * tnn, 0.0);
            let c = C64::from_polar(h2 * t1n, -e.beta);
            s[(a, b)] -= c;
            s[(b, a)] -= c.conj();
        }
        let schur = linalg::hermitian_eigenvalues(&s)?.into_iter().filter(|&x| x < 0.0).count();
        Ok(interior * g.edges().len() + schur)
    }

    /// The `k`-th generalized eigenvalue (0-based) by bisection on the count.
    fn eigenvalue(&self, k: usize, lo: f64, hi: f64) -> Result<f64> {
        let (mut a, mut b) = (lo, hi);
        while b - a > 1e-13 * (1.0 + a.abs().max(b.abs())) {
            let m = 0.5 * (a + b);
            if self.count_below(m)? > k {
                b = m;
            } else {
                a = m;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Eigenvalues with their global indices in `(lo, hi)`.
    fn eigenvalues_in(&self, lo: f64, hi: f64) -> Result<(usize, Vec<f64>)> {
        let first = self.count_below(lo)?;
        let end = self.count_below(hi)?;
        let vals = (first..end).map(|k| self.eigenvalue(k, lo, hi)).collect::<Result<Vec<_>>>()?;
        Ok((first, vals))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdEigenvalues {
    /// Richardson-extrapolated values from meshes `h` and `h/2`.
    pub values: Vec<f64>,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
}

impl FdEigenvalues {
    pub fn to_spectrum(&self, merge_tol: f64) -> SpectrumDescription {
        SpectrumDescription::from_eigenvalues(&self.values, merge_tol)
    }
}

/// Eigenvalues in `window` on meshes `h` and `h/2`, paired by global index
/// and Richardson-extrapolated assuming `O(h²)` error.
pub fn finite_difference_oracle(model: &QuantumGraphModel, h: f64, window: (f64, f64)) -> Result<FdEigenvalues> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Input(format!("invalid window ({lo}, {hi})")));
    }
    if model.graph.edges().is_empty() {
        return Err(Error::Input("graph has no edges".into()));
    }
    let coarse = FdSystem::new(model, h)?;
    let fine = FdSystem::new(model, 0.5 * coarse.h)?;
    // Widen so that eigenvalues near the window edges still pair up.
    let pad = 0.05 * (hi - lo) + 1e-3 * hi.abs();
    let (wlo, whi) = (lo - pad, hi + pad);
    let (c, f) = rayon::join(|| coarse.eigenvalues_in(wlo, whi), || fine.eigenvalues_in(wlo, whi));
    let ((c0, cv), (f0, fv)) = (c?, f?);
    let mut out = FdEigenvalues { values: Vec::new(), coarse: Vec::new(), fine: Vec::new() };
    for (i, &fz) in fv.iter().enumerate() {
        let k = f0 + i;
        let Some(&cz) = k.checked_sub(c0).and_then(|j| cv.get(j)) else { continue };
        let r = (4.0 * fz - cz) / 3.0;
        if r > lo && r < hi {
            out.values.push(r);
            out.coarse.push(cz);
            out.fine.push(fz);
        }
    }
    Ok(out)
}

/// First `count` eigenvalues of `−f″ + Uf` on one edge with Dirichlet ends,
/// central differences on mesh `h`.
pub fn fd_dirichlet_edge(u: &Potential, h: f64, count: usize) -> Result<Vec<f64>> {
    if !(h > 0.0 && h <= 0.01) {
        return Err(Error::Input(format!("mesh size {h} must lie in (0, 1/100]")));
    }
    let n = (1.0 / h).round() as usize;
    let h = 1.0 / n as f64;
    let diag: Vec<f64> = (1..n).map(|j| 2.0 / (h * h) + u.value(j as f64 * h)).collect();
    let off = vec![-1.0 / (h * h); n - 2];
    let mut ev = linalg::tridiagonal_eigenvalues(&diag, &off)?;
    ev.truncate(count);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_graph::MagneticEdge;
    use crate::spectrum::Multiplicity;
    use std::f64::consts::PI;

    fn model(g: MagneticGraph) -> QuantumGraphModel {
        QuantumGraphModel::new(g, Potential::zero(), 0.0).unwrap()
    }

    const WINDOW: (f64, f64) = (1e-6, PI * PI - 1e-3);

    #[test]
    fn symmetry_branches() {
        let c = model(MagneticGraph::cycle(3, 0.0).unwrap());
        assert_eq!(symmetry_check(&c).which, SymmetryBranch::Both);
        let star = MagneticGraph::star(3).unwrap();
        let even = QuantumGraphModel::new(star.clone(), Potential::function(|x| (2.0 * PI * x).cos()), 0.0).unwrap();
        assert_eq!(symmetry_check(&even).which, SymmetryBranch::EvenPotential);
        let odd = QuantumGraphModel::new(star, Potential::function(|x| x), 0.0).unwrap();
        let chk = symmetry_check(&odd);
        assert_eq!(chk.which, SymmetryBranch::Neither);
        assert!(!chk.holds);
        assert!(matches!(duality_spectrum_auto(&odd, WINDOW), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn c3_duality() {
        let m = model(MagneticGraph::cycle(3, 0.0).unwrap());
        let s = duality_spectrum_auto(&m, WINDOW).unwrap();
        assert_eq!(s.points.len(), 1);
        let e = (2.0 * PI / 3.0).powi(2);
        assert!((s.points[0].energy - e).abs() < 1e-12);
        assert_eq!(s.points[0].multiplicity, Multiplicity::Finite(2));
    }

    #[test]
    fn c3_secular_matches() {
        let m = model(MagneticGraph::cycle(3, 0.0).unwrap());
        let s = secular_oracle(&m, WINDOW, 400).unwrap();
        assert_eq!(s.eigenvalues.points.len(), 1);
        let p = &s.eigenvalues.points[0];
        assert!((p.energy - (2.0 * PI / 3.0).powi(2)).abs() < 1e-9);
        assert_eq!(p.multiplicity, Multiplicity::Finite(2));
    }

    #[test]
    fn self_loop_circle() {
        let m = model(MagneticGraph::self_loop(0.0).unwrap());
        // cos√z = 1 at z = (2π)², a Dirichlet eigenvalue: outside the duality.
        assert!(duality_spectrum_auto(&m, (1.0, 50.0)).unwrap().is_empty());
        let sec = secular_oracle(&m, (1.0, 50.0), 400).unwrap();
        assert!(sec.eigenvalues.is_empty());
        assert_eq!(sec.dirichlet_coincident.points.len(), 1);
        assert!((sec.dirichlet_coincident.points[0].energy - 4.0 * PI * PI).abs() < 1e-9);
        assert_eq!(sec.dirichlet_coincident.points[0].multiplicity, Multiplicity::Finite(2));
    }

    #[test]
    fn magnetic_self_loop() {
        // cos√z = cos β.
        let beta = 1.0;
        let m = model(MagneticGraph::self_loop(beta).unwrap());
        let d = duality_spectrum_auto(&m, (0.5, 50.0)).unwrap();
        let s = secular_oracle(&m, (0.5, 50.0), 400).unwrap();
        let exact = [1.0, (2.0 * PI - 1.0).powi(2)];
        assert_eq!(d.points.len(), 2);
        assert_eq!(s.eigenvalues.points.len(), 2);
        for i in 0..2 {
            assert!((d.points[i].energy - exact[i]).abs() < 1e-10);
            assert!((s.eigenvalues.points[i].energy - exact[i]).abs() < 1e-9);
            assert_eq!(s.eigenvalues.points[i].multiplicity, Multiplicity::Finite(1));
        }
    }

    #[test]
    fn neumann_interval() {
        let m = model(MagneticGraph::path(2).unwrap());
        let sec = secular_oracle(&m, (-5.0, PI * PI - 1e-3), 400).unwrap();
        assert_eq!(sec.eigenvalues.points.len(), 1);
        assert!(sec.eigenvalues.points[0].energy.abs() < 1e-9);
        // The root at 0 sits just outside these windows.
        for lo in [1e-9, 1e-12] {
            assert!(secular_oracle(&m, (lo, PI * PI - 1e-3), 400).unwrap().eigenvalues.is_empty());
        }
        assert!(secular_oracle(&m, (-5.0, -1e-9), 400).unwrap().eigenvalues.is_empty());
    }

    #[test]
    fn magnetic_cycle_flux() {
        // C₄ with total flux Φ: cos√z ∈ {cos((Φ + 2πk)/4)}.
        let phi = 1.3;
        let g = MagneticGraph::new(
            4,
            (0..4).map(|i| MagneticEdge { src: i, dst: (i + 1) % 4, beta: if i == 0 { phi } else { 0.0 } }).collect(),
            vec![],
        )
        .unwrap();
        let m = model(g);
        let s = duality_spectrum_auto(&m, WINDOW).unwrap();
        let mut expected: Vec<f64> = (0..4)
            .map(|k| ((phi + 2.0 * PI * k as f64) / 4.0).cos().acos().powi(2))
            .filter(|&z| z > WINDOW.0 && z < WINDOW.1)
            .collect();
        expected.sort_by(f64::total_cmp);
        let got: Vec<f64> = s.points.iter().map(|p| p.energy).collect();
        assert_eq!(got.len(), expected.len());
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn delta_coupling_secular_vs_duality() {
        let g = MagneticGraph::cycle(6, 0.4).unwrap();
        let m = QuantumGraphModel::new(g, Potential::zero(), 2.5).unwrap();
        let d = duality_spectrum_auto(&m, WINDOW).unwrap();
        let s = secular_oracle(&m, WINDOW, 800).unwrap();
        assert_eq!(d.points.len(), s.eigenvalues.points.len());
        for (a, b) in d.points.iter().zip(&s.eigenvalues.points) {
            assert!((a.energy - b.energy).abs() < 1e-9);
            assert_eq!(a.multiplicity, b.multiplicity);
        }
    }

    #[test]
    fn fd_dirichlet_mode() {
        let ev = fd_dirichlet_edge(&Potential::zero(), 1e-3, 3).unwrap();
        for (n, e) in ev.iter().enumerate() {
            let exact = PI * PI * ((n + 1) * (n + 1)) as f64;
            assert!((e / exact - 1.0).abs() < 1e-4);
        }
        assert!(fd_dirichlet_edge(&Potential::zero(), 0.02, 3).is_err());
    }

    #[test]
    fn fd_c3() {
        let m = model(MagneticGraph::cycle(3, 0.0).unwrap());
        let fd = finite_difference_oracle(&m, 1e-2, WINDOW).unwrap();
        let e = (2.0 * PI / 3.0).powi(2);
        assert_eq!(fd.values.len(), 2);
        for (&r, &c) in fd.values.iter().zip(&fd.coarse) {
            assert!((r / e - 1.0).abs() < 1e-6);
            // Extrapolation gains at least an order.
            assert!((r - e).abs() * 10.0 < (c - e).abs());
        }
    }

    #[test]
    fn gauge_invariance() {
        let g = MagneticGraph::cycle(5, 0.3).unwrap();
        let gg = g.gauge_transform(&[0.1, -2.0, 0.7, 3.0, 1.1]).unwrap();
        let a = duality_spectrum_auto(&model(g), WINDOW).unwrap();
        let b = duality_spectrum_auto(&model(gg), WINDOW).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!((x.energy - y.energy).abs() < 1e-10);
        }
    }

    #[test]
    fn graph_alpha_must_scale_with_degree() {
        let g = MagneticGraph::star(3).unwrap().with_alpha(vec![3.0, 1.0, 1.0, 1.0]).unwrap();
        let m = QuantumGraphModel::from_graph_alpha(g, Potential::zero()).unwrap();
        assert!((m.alpha_scale - 2.0).abs() < 1e-15);
        let bad = MagneticGraph::star(3).unwrap().with_alpha(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(QuantumGraphModel::from_graph_alpha(bad, Potential::zero()).is_err());
    }
}
