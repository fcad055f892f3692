//! Descriptions of spectra as tagged points and bands.

use std::fmt;

use bitflags::bitflags;

use crate::error::{Error, Result};

bitflags! {
    /// Spectral-type tags carried by points and bands.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct SpectralTypes: u8 {
        /// Eigenvalue (pure point).
        const PP = 1 << 0;
        /// Discrete: isolated eigenvalue of finite multiplicity.
        const DIS = 1 << 1;
        /// Essential.
        const ESS = 1 << 2;
        /// Closure of the pure point part.
        const P = 1 << 3;
        /// Absolutely continuous.
        const AC = 1 << 4;
        /// Singular continuous.
        const SC = 1 << 5;
        /// Singular.
        const S = 1 << 6;
        /// Continuous.
        const C = 1 << 7;
    }
}

impl SpectralTypes {
    /// Tags of an isolated eigenvalue of finite multiplicity.
    pub fn discrete() -> Self {
        Self::PP | Self::DIS | Self::P | Self::S
    }

    /// Tags of an isolated eigenvalue of infinite multiplicity.
    pub fn infinite_eigenvalue() -> Self {
        Self::PP | Self::ESS | Self::P | Self::S
    }

    /// Tags of a purely absolutely continuous band.
    pub fn ac_band() -> Self {
        Self::AC | Self::C | Self::ESS
    }

    pub fn labels(self) -> Vec<&'static str> {
        const NAMES: [(SpectralTypes, &str); 8] = [
            (SpectralTypes::PP, "pp"),
            (SpectralTypes::DIS, "dis"),
            (SpectralTypes::ESS, "ess"),
            (SpectralTypes::P, "p"),
            (SpectralTypes::AC, "ac"),
            (SpectralTypes::SC, "sc"),
            (SpectralTypes::S, "s"),
            (SpectralTypes::C, "c"),
        ];
        NAMES.iter().filter(|(t, _)| self.contains(*t)).map(|(_, n)| *n).collect()
    }
}

impl fmt::Display for SpectralTypes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels().join("|"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(k) => write!(f, "{k}"),
            Multiplicity::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    pub energy: f64,
    pub multiplicity: Multiplicity,
    pub types: SpectralTypes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBand {
    pub lo: f64,
    pub hi: f64,
    pub types: SpectralTypes,
}

/// A spectrum as a sorted list of points and a sorted list of closed bands.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumDescription {
    pub points: Vec<SpectralPoint>,
    pub bands: Vec<SpectralBand>,
}

impl SpectrumDescription {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.bands.is_empty()
    }

    /// Discrete eigenvalues with multiplicities, e.g. the spectrum of a matrix.
    /// Coincident values (within `merge_tol`) are merged.
    pub fn from_eigenvalues(values: &[f64], merge_tol: f64) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut points: Vec<SpectralPoint> = Vec::new();
        let mut cluster: Vec<f64> = Vec::new();
        let flush = |cluster: &mut Vec<f64>, points: &mut Vec<SpectralPoint>| {
            if cluster.is_empty() {
                return;
            }
            let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
            points.push(SpectralPoint {
                energy: mean,
                multiplicity: Multiplicity::Finite(cluster.len()),
                types: SpectralTypes::discrete(),
            });
            cluster.clear();
        };
        for v in sorted {
            if let Some(&last) = cluster.last() {
                if (v - last).abs() > merge_tol * (1.0 + v.abs()) {
                    flush(&mut cluster, &mut points);
                }
            }
            cluster.push(v);
        }
        flush(&mut cluster, &mut points);
        Self { points, bands: Vec::new() }
    }

    /// Bands from closed intervals; overlapping or touching intervals are kept
    /// separate so that band counts stay visible.
    pub fn from_bands(intervals: &[(f64, f64)], types: SpectralTypes) -> Self {
        let mut bands: Vec<SpectralBand> = intervals
            .iter()
            .map(|&(lo, hi)| SpectralBand { lo, hi, types })
            .collect();
        bands.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        Self { points: Vec::new(), bands }
    }

    pub fn sort(&mut self) {
        self.points.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        self.bands
            .sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    }

    /// Concatenate two descriptions (e.g. pieces from disjoint windows).
    pub fn extend(&mut self, other: SpectrumDescription) {
        self.points.extend(other.points);
        self.bands.extend(other.bands);
        self.sort();
    }

    /// Restrict to the open interval `(lo, hi)`; bands are clipped.
    pub fn restrict(&self, lo: f64, hi: f64) -> SpectrumDescription {
        let points = self
            .points
            .iter()
            .filter(|p| p.energy > lo && p.energy < hi)
            .cloned()
            .collect();
        let bands = self
            .bands
            .iter()
            .filter(|b| b.hi > lo && b.lo < hi)
            .map(|b| SpectralBand {
                lo: b.lo.max(lo),
                hi: b.hi.min(hi),
                types: b.types,
            })
            .collect();
        SpectrumDescription { points, bands }
    }

    /// Smallest and largest spectral values, if any.
    pub fn hull(&self) -> Option<(f64, f64)> {
        let it = self
            .points
            .iter()
            .map(|p| (p.energy, p.energy))
            .chain(self.bands.iter().map(|b| (b.lo, b.hi)));
        it.fold(None, |acc, (lo, hi)| match acc {
            None => Some((lo, hi)),
            Some((a, b)) => Some((f64::min(a, lo), f64::max(b, hi))),
        })
    }

    /// Distance from `x` to the spectrum (points and bands).
    pub fn distance_to(&self, x: f64) -> f64 {
        let dp = self.points.iter().map(|p| (p.energy - x).abs());
        let db = self.bands.iter().map(|b| {
            if x < b.lo {
                b.lo - x
            } else if x > b.hi {
                x - b.hi
            } else {
                0.0
            }
        });
        dp.chain(db).fold(f64::INFINITY, f64::min)
    }

    /// Check ordering and tag consistency.
    pub fn validate(&self) -> Result<()> {
        for b in &self.bands {
            if !(b.lo < b.hi) {
                return Err(Error::Input(format!("degenerate band [{}, {}]", b.lo, b.hi)));
            }
        }
        let sorted_bands = self.bands.windows(2).all(|w| w[0].lo <= w[1].lo);
        let sorted_points = self.points.windows(2).all(|w| w[0].energy <= w[1].energy);
        if !sorted_bands || !sorted_points {
            return Err(Error::Input("spectrum description is not sorted".into()));
        }
        for p in &self.points {
            if p.types.contains(SpectralTypes::DIS) && !p.types.contains(SpectralTypes::PP) {
                return Err(Error::Input(format!("point {} tagged dis without pp", p.energy)));
            }
        }
        Ok(())
    }

    /// Total multiplicity of points, `None` if any is infinite.
    pub fn point_count(&self) -> Option<usize> {
        self.points.iter().try_fold(0, |acc, p| match p.multiplicity {
            Multiplicity::Finite(k) => Some(acc + k),
            Multiplicity::Infinite => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_clusters_merge() {
        let s = SpectrumDescription::from_eigenvalues(&[1.0, -0.5, -0.5 + 1e-14], 1e-10);
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.points[0].multiplicity, Multiplicity::Finite(2));
        assert!(s.validate().is_ok());
    }

    #[test]
    fn restrict_is_open_and_clips_bands() {
        let mut s = SpectrumDescription::from_bands(&[(-1.0, 1.0)], SpectralTypes::ac_band());
        s.points.push(SpectralPoint {
            energy: 2.0,
            multiplicity: Multiplicity::Finite(1),
            types: SpectralTypes::discrete(),
        });
        let r = s.restrict(0.0, 2.0);
        assert!(r.points.is_empty());
        assert_eq!(r.bands[0].lo, 0.0);
    }

    #[test]
    fn degenerate_band_rejected() {
        let s = SpectrumDescription::from_bands(&[(1.0, 1.0)], SpectralTypes::AC);
        assert!(s.validate().is_err());
    }

    #[test]
    fn labels_roundtrip() {
        assert_eq!(SpectralTypes::discrete().to_string(), "pp|dis|p|s");
    }
}
