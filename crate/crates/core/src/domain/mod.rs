//! Domains as an ambient box minus complementary continua, and their
//! discretization into a quotient grid where each continuum is one vertex.

mod grid;

pub use grid::{CellStatus, Endpoints, QuotientGrid, MOVES};

use crate::geom::{GeomError, PlanarSet, Point};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Pairwise gap below which two continua count as touching.
pub const DISJOINT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("continuum {0}: {1}")]
    BadContinuum(usize, GeomError),
    #[error("continua {0} and {1} are not disjoint")]
    NotDisjoint(usize, usize),
    #[error("grid spacing {h} too coarse: continua {i} and {j} touch through the grid")]
    SpacingTooCoarse { h: f64, i: usize, j: usize },
    #[error("complement of the continua splits into {0} grid components")]
    DisconnectedComplement(usize),
    #[error("{0} set misses every free cell")]
    EmptyEndpointSet(&'static str),
    #[error("invalid curve family: {0}")]
    InvalidFamily(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn new(min: Point, max: Point) -> Self {
        BBox { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn as_set(&self) -> PlanarSet {
        PlanarSet::rect(self.min.x, self.max.x, self.min.y, self.max.y)
    }
}

/// Ambient box minus the continua `K_i`; isolated point components are
/// carried along but play no role in the discretization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(default)]
    pub label: String,
    pub ambient: BBox,
    #[serde(default)]
    pub continua: Vec<PlanarSet>,
    #[serde(default)]
    pub points: Vec<Point>,
    /// Treat the ambient boundary as one more continuum `K₀`, indexed after
    /// the listed ones.
    #[serde(default)]
    pub outer: bool,
}

impl DomainSpec {
    pub fn new(label: &str, ambient: BBox, continua: Vec<PlanarSet>) -> Self {
        DomainSpec {
            label: label.to_string(),
            ambient,
            continua,
            points: Vec::new(),
            outer: false,
        }
    }

    /// Number of contracted vertices, including `K₀` when `outer` is set.
    pub fn n_contracted(&self) -> usize {
        self.continua.len() + usize::from(self.outer)
    }

    /// Index of `K₀`, if present.
    pub fn outer_index(&self) -> Option<usize> {
        self.outer.then_some(self.continua.len())
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let a = &self.ambient;
        if !(a.min.is_finite() && a.max.is_finite() && a.width() > 0.0 && a.height() > 0.0) {
            return Err(DomainError::Invalid("ambient box must have positive finite size".into()));
        }
        for (i, k) in self.continua.iter().enumerate() {
            k.validate().map_err(|e| DomainError::BadContinuum(i, e))?;
            let (lo, hi) = k.bbox();
            if !(a.contains(lo) && a.contains(hi)) {
                return Err(DomainError::Invalid(format!("continuum {i} leaves the ambient box")));
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            if !p.is_finite() || !a.contains(*p) {
                return Err(DomainError::Invalid(format!("point component {i} is outside the ambient box")));
            }
            if let Some(j) = self.continua.iter().position(|k| k.contains(*p)) {
                return Err(DomainError::Invalid(format!("point component {i} lies in continuum {j}")));
            }
        }
        for i in 0..self.continua.len() {
            for j in (i + 1)..self.continua.len() {
                if self.continua[i].dist(&self.continua[j]) <= DISJOINT_TOL {
                    return Err(DomainError::NotDisjoint(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, DomainError> {
        let spec: DomainSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("domain serializes")
    }

    pub fn load(path: &Path) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path).map_err(|source| DomainError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// The family Γ(E, F; Ω ∖ ∪_{j ∈ J} K_j) of curves joining `source` to
/// `sink` that avoid the forbidden continua.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFamilySpec {
    pub source: PlanarSet,
    pub sink: PlanarSet,
    #[serde(default)]
    pub forbidden: Vec<usize>,
    #[serde(default)]
    pub ambient_restriction: Option<BBox>,
}

impl CurveFamilySpec {
    pub fn new(source: PlanarSet, sink: PlanarSet) -> Self {
        CurveFamilySpec {
            source,
            sink,
            forbidden: Vec::new(),
            ambient_restriction: None,
        }
    }

    pub fn forbid(mut self, forbidden: Vec<usize>) -> Self {
        self.forbidden = forbidden;
        self
    }

    pub fn from_json(text: &str) -> Result<Self, DomainError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family serializes")
    }

    pub fn validate(&self, spec: &DomainSpec) -> Result<(), DomainError> {
        self.source
            .validate()
            .and_then(|_| self.sink.validate())
            .map_err(|e| DomainError::InvalidFamily(e.to_string()))?;
        if self.source.intersects(&self.sink) {
            return Err(DomainError::InvalidFamily("source and sink intersect".into()));
        }
        for &j in &self.forbidden {
            if j >= spec.n_contracted() {
                return Err(DomainError::InvalidFamily(format!("forbidden index {j} out of range")));
            }
        }
        Ok(())
    }
}
