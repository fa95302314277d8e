//! Discrete classical and transboundary 2-modulus.
//!
//! The discrete family lives on a resistor network over the quotient grid
//! (see [`network`]). A single family is solved through its potential; a
//! union of families by constraint generation, where each path is a row of
//! the quadratic program `min mass` s.t. `length ≥ 1`, solved in the dual by
//! Hildreth's coordinate ascent with new rows from a Dijkstra oracle. Both
//! return a certificate pair: the mass of an admissible density above, a
//! dual bound below.

pub(crate) mod network;
mod path;
mod potential;
mod solver;
mod verify;

pub use path::{shortest_path, transboundary_length, PathConstraint};
pub use solver::{modulus, modulus_endpoints, modulus_union};

pub use verify::{verify_admissible, AdmissibilityReport};

use crate::domain::{CellStatus, DomainError, QuotientGrid};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

/// Density on free cells (units 1/length) and weights on contracted vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassDistribution {
    pub rho_cells: Vec<f64>,
    pub rho_contracted: Vec<f64>,
}

impl MassDistribution {
    pub fn zeros(grid: &QuotientGrid) -> Self {
        MassDistribution {
            rho_cells: vec![0.0; grid.n_free()],
            rho_contracted: vec![0.0; grid.n_contracted()],
        }
    }

    pub fn uniform(grid: &QuotientGrid, cell: f64, contracted: f64) -> Self {
        MassDistribution {
            rho_cells: vec![cell; grid.n_free()],
            rho_contracted: vec![contracted; grid.n_contracted()],
        }
    }

    /// `Σ ρ_c² h² + Σ ρ_i²`.
    pub fn mass(&self, grid: &QuotientGrid) -> f64 {
        let h2 = grid.h * grid.h;
        self.rho_cells.iter().map(|r| r * r * h2).sum::<f64>()
            + self.rho_contracted.iter().map(|r| r * r).sum::<f64>()
    }

    pub fn is_valid(&self) -> bool {
        self.rho_cells
            .iter()
            .chain(&self.rho_contracted)
            .all(|v| v.is_finite() && *v >= 0.0)
    }

    /// Text grid: one row per grid row, top row first; `nan` marks cells
    /// that are not free. Contracted weights follow as comment lines.
    pub fn dump(&self, grid: &QuotientGrid) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# h {} nx {} ny {} origin {} {}",
            fmt17(grid.h),
            grid.nx,
            grid.ny,
            fmt17(grid.origin.x),
            fmt17(grid.origin.y)
        );
        for j in (0..grid.ny).rev() {
            let row: Vec<String> = (0..grid.nx)
                .map(|i| match grid.free_at(i, j) {
                    Some(f) => format!("{:.6e}", self.rho_cells[f as usize]),
                    None => "nan".to_string(),
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        for (k, w) in self.rho_contracted.iter().enumerate() {
            let _ = writeln!(out, "# rho_k {k} {}", fmt17(*w));
        }
        out
    }
}

/// Number formatting for CSV output: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Potential for a single family, paths for unions.
    Auto,
    Potential,
    Paths,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    /// Converged once the shortest path has length at least `1 - path_tol`.
    pub path_tol: f64,
    /// Required relative certificate gap `(upper - lower) / value`.
    pub gap_tol: f64,
    /// Cap on active paths; `None` means 20 times the grid diameter in cells.
    pub max_paths: Option<usize>,
    /// Relative dual-objective change at which a QP solve stops.
    pub qp_tol: f64,
    pub max_sweeps: usize,
    /// Paths added per oracle call.
    pub batch: usize,
    /// Cap on Newton steps of the potential solver.
    pub max_newton: usize,
    /// Seed for the randomized admissibility check.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Auto,
            path_tol: 1e-3,
            gap_tol: 0.02,
            max_paths: None,
            qp_tol: 1e-8,
            max_sweeps: 20_000,
            batch: 32,
            max_newton: 100,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.path_tol > 0.0 && self.path_tol < 1.0) {
            return Err(SolveError::Config(format!("path_tol must lie in (0,1), got {}", self.path_tol)));
        }
        if !(self.gap_tol > 0.0) {
            return Err(SolveError::Config(format!("gap_tol must be positive, got {}", self.gap_tol)));
        }
        if !(self.qp_tol > 0.0) || self.batch == 0 || self.max_sweeps == 0 || self.max_newton == 0 {
            return Err(SolveError::Config(
                "qp_tol, batch, max_sweeps and max_newton must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn max_paths_for(&self, grid: &QuotientGrid) -> usize {
        self.max_paths.unwrap_or(20 * grid.diameter_cells())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    IterationCap,
    InfeasibleFamily,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::IterationCap => "iteration_cap",
            Status::InfeasibleFamily => "infeasible_family",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub paths: usize,
    pub lower: f64,
    pub upper: f64,
    pub shortest: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusResult {
    pub value: f64,
    /// Mass of `density`, which is admissible on the grid.
    pub upper_bound: f64,
    /// Dual objective of the active-set program.
    pub lower_bound: f64,
    pub density: MassDistribution,
    pub iterations: usize,
    pub shortest_final: f64,
    pub status: Status,
    pub n_paths: usize,
    pub trace: Vec<TraceEntry>,
}

impl ModulusResult {
    pub(crate) fn infeasible(net: &network::Network) -> Self {
        ModulusResult {
            value: 0.0,
            upper_bound: 0.0,
            lower_bound: 0.0,
            density: MassDistribution {
                rho_cells: vec![0.0; net.nf],
                rho_contracted: vec![0.0; net.nk],
            },
            iterations: 0,
            shortest_final: f64::INFINITY,
            status: Status::InfeasibleFamily,
            n_paths: 0,
            trace: Vec::new(),
        }
    }

    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }

    pub const CSV_HEADER: &'static str = "label,h,value,lower,upper,iterations,status";

    pub fn csv_row(&self, label: &str, h: f64) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record([
            label.to_string(),
            fmt17(h),
            fmt17(self.value),
            fmt17(self.lower_bound),
            fmt17(self.upper_bound),
            self.iterations.to_string(),
            self.status.as_str().to_string(),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// Cells of `grid` with their status, for plotting.
pub fn cell_statuses(grid: &QuotientGrid) -> impl Iterator<Item = ((usize, usize), CellStatus)> + '_ {
    (0..grid.ny).flat_map(move |j| (0..grid.nx).map(move |i| ((i, j), grid.status[j * grid.nx + i])))
}
