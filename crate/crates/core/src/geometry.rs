//! Multi-barrier, multi-slit apparatus and its path set.
//!
//! A photon leaves the source, passes through exactly one point slit on every
//! barrier and arrives at the detector. Each such slit choice is one path;
//! region `j` of a path is the straight segment between its `j`-th and
//! `(j+1)`-th points, so a geometry with `B` barriers has `B + 1` regions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of enumerated paths.
pub const DEFAULT_PATH_CAP: u64 = 10_000_000;

/// A point in the plane: `z` is the axial coordinate, `x` the transverse one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub z: f64,
    pub x: f64,
}

impl Point {
    pub fn new(z: f64, x: f64) -> Self {
        Self { z, x }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.z - other.z).hypot(self.x - other.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Barrier {
    /// Axial position of the barrier plane.
    pub z: f64,
    /// Transverse positions of the point slits.
    pub slits: Vec<f64>,
}

impl Barrier {
    pub fn new(z: f64, slits: Vec<f64>) -> Self {
        Self { z, slits }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitGeometry {
    pub source: Point,
    pub barriers: Vec<Barrier>,
    pub detector: Point,
    pub wavelength: f64,
}

/// One slit choice per barrier together with the per-region segment lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub slit_choices: Vec<usize>,
    pub segment_lengths: Vec<f64>,
}

pub type PathSet = Vec<Path>;

/// Refraction indices of the `B + 1` media crossed by every path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MediumVector(Vec<f64>);

impl MediumVector {
    pub fn new(indices: Vec<f64>) -> Result<Self> {
        for (region, &index) in indices.iter().enumerate() {
            if !(index.is_finite() && index > 0.0) {
                return Err(Error::NonPositiveIndex { region, index });
            }
        }
        Ok(Self(indices))
    }

    /// A vector of `len` identical indices.
    pub fn uniform(len: usize, index: f64) -> Result<Self> {
        Self::new(vec![index; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for MediumVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<MediumVector> for Vec<f64> {
    fn from(value: MediumVector) -> Self {
        value.0
    }
}

impl SlitGeometry {
    pub fn new(source: Point, barriers: Vec<Barrier>, detector: Point, wavelength: f64) -> Self {
        Self {
            source,
            barriers,
            detector,
            wavelength,
        }
    }

    /// Number of media regions, one more than the number of barriers.
    pub fn region_count(&self) -> usize {
        self.barriers.len() + 1
    }

    /// `2π/λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    pub fn slit_count(&self) -> usize {
        self.barriers.iter().map(|b| b.slits.len()).sum()
    }

    /// Checks every geometric invariant and reports the first one violated.
    pub fn validate(&self) -> Result<()> {
        let finite = |p: &Point| p.z.is_finite() && p.x.is_finite();
        if !finite(&self.source) {
            return Err(Error::NonFiniteCoordinate("source".into()));
        }
        if !finite(&self.detector) {
            return Err(Error::NonFiniteCoordinate("detector".into()));
        }
        for (i, b) in self.barriers.iter().enumerate() {
            if !b.z.is_finite() || b.slits.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteCoordinate(format!("barrier {i}")));
            }
        }

        let mut prev = ("source".to_string(), self.source.z);
        let axial = self
            .barriers
            .iter()
            .enumerate()
            .map(|(i, b)| (format!("barrier {i}"), b.z))
            .chain(std::iter::once(("detector".to_string(), self.detector.z)));
        for (name, z) in axial {
            if z <= prev.1 {
                return Err(Error::NonMonotonicBarriers(format!(
                    "{name} at z={z} does not follow {} at z={}",
                    prev.0, prev.1
                )));
            }
            prev = (name, z);
        }

        for (i, b) in self.barriers.iter().enumerate() {
            if b.slits.is_empty() {
                return Err(Error::EmptyBarrier(i));
            }
            for (k, &x) in b.slits.iter().enumerate() {
                if b.slits[..k].contains(&x) {
                    return Err(Error::DuplicateSlit {
                        barrier: i,
                        position: x,
                    });
                }
            }
        }

        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::NonPositiveWavelength(self.wavelength));
        }
        Ok(())
    }

    /// Product of slit counts, checked against `cap`.
    pub fn count_paths_capped(&self, cap: u64) -> Result<u64> {
        let mut count: u128 = 1;
        for b in &self.barriers {
            count = count.saturating_mul(b.slits.len() as u128);
            if count > cap as u128 {
                // keep multiplying so the error reports the full product
                let full = self
                    .barriers
                    .iter()
                    .fold(1u128, |acc, b| acc.saturating_mul(b.slits.len() as u128));
                return Err(Error::PathExplosion { count: full, cap });
            }
        }
        Ok(count as u64)
    }

    pub fn count_paths(&self) -> Result<u64> {
        self.count_paths_capped(DEFAULT_PATH_CAP)
    }

    /// Slit choices of the path at lexicographic position `index`
    /// (the last barrier varies fastest).
    pub fn slit_choices_at(&self, mut index: u64, out: &mut [usize]) {
        for (slot, b) in out.iter_mut().zip(&self.barriers).rev() {
            let s = b.slits.len() as u64;
            *slot = (index % s) as usize;
            index /= s;
        }
    }

    /// Ordered points visited by the path with the given slit choices.
    pub fn path_points(&self, choices: &[usize]) -> Vec<Point> {
        let mut pts = Vec::with_capacity(self.barriers.len() + 2);
        pts.push(self.source);
        for (b, &c) in self.barriers.iter().zip(choices) {
            pts.push(Point::new(b.z, b.slits[c]));
        }
        pts.push(self.detector);
        pts
    }

    /// Writes the segment lengths for the given slit choices into `out`.
    pub fn segment_lengths_into(&self, choices: &[usize], out: &mut [f64]) {
        let mut prev = self.source;
        for ((b, &c), len) in self.barriers.iter().zip(choices).zip(out.iter_mut()) {
            let here = Point::new(b.z, b.slits[c]);
            *len = prev.distance(&here);
            prev = here;
        }
        out[self.barriers.len()] = prev.distance(&self.detector);
    }

    pub fn path(&self, choices: Vec<usize>) -> Path {
        let mut segment_lengths = vec![0.0; self.region_count()];
        self.segment_lengths_into(&choices, &mut segment_lengths);
        Path {
            slit_choices: choices,
            segment_lengths,
        }
    }

    /// Streams every path in canonical lexicographic order.
    pub fn paths(&self) -> Result<PathIter<'_>> {
        self.validate()?;
        let total = self.count_paths()?;
        Ok(PathIter {
            geometry: self,
            next: 0,
            total,
        })
    }

    pub fn enumerate_paths_capped(&self, cap: u64) -> Result<PathSet> {
        self.validate()?;
        let total = self.count_paths_capped(cap)?;
        Ok(PathIter {
            geometry: self,
            next: 0,
            total,
        }
        .collect())
    }

    /// Every path exactly once, in lexicographic order of slit indices.
    pub fn enumerate_paths(&self) -> Result<PathSet> {
        self.enumerate_paths_capped(DEFAULT_PATH_CAP)
    }

    /// The geometry mirrored through `x = 0`.
    pub fn mirrored(&self) -> Self {
        let flip = |p: Point| Point::new(p.z, -p.x);
        Self {
            source: flip(self.source),
            barriers: self
                .barriers
                .iter()
                .map(|b| Barrier::new(b.z, b.slits.iter().map(|x| -x).collect()))
                .collect(),
            detector: flip(self.detector),
            wavelength: self.wavelength,
        }
    }

    pub fn translated(&self, dz: f64, dx: f64) -> Self {
        let shift = |p: Point| Point::new(p.z + dz, p.x + dx);
        Self {
            source: shift(self.source),
            barriers: self
                .barriers
                .iter()
                .map(|b| Barrier::new(b.z + dz, b.slits.iter().map(|x| x + dx).collect()))
                .collect(),
            detector: shift(self.detector),
            wavelength: self.wavelength,
        }
    }

    /// Flat list of slit positions, barrier by barrier.
    pub fn slit_positions(&self) -> Vec<f64> {
        self.barriers.iter().flat_map(|b| b.slits.iter().copied()).collect()
    }

    /// Replaces slit positions from a flat list in [`Self::slit_positions`] order.
    pub fn with_slit_positions(&self, positions: &[f64]) -> Result<Self> {
        if positions.len() != self.slit_count() {
            return Err(Error::DimensionMismatch {
                expected: self.slit_count(),
                got: positions.len(),
            });
        }
        let mut out = self.clone();
        let mut it = positions.iter();
        for b in &mut out.barriers {
            for x in &mut b.slits {
                *x = *it.next().unwrap();
            }
        }
        Ok(out)
    }
}

/// Lazy lexicographic path enumerator.
pub struct PathIter<'a> {
    geometry: &'a SlitGeometry,
    next: u64,
    total: u64,
}

impl Iterator for PathIter<'_> {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        if self.next >= self.total {
            return None;
        }
        let mut choices = vec![0; self.geometry.barriers.len()];
        self.geometry.slit_choices_at(self.next, &mut choices);
        self.next += 1;
        Some(self.geometry.path(choices))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.total - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for PathIter<'_> {}
