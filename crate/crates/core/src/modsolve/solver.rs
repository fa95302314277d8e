use super::network::{Network, Oracle};
use super::{potential, Method, ModulusResult, SolveError, SolverConfig, Status, TraceEntry};
use crate::domain::{CurveFamilySpec, Endpoints, QuotientGrid};
use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};

/// Active rows in compressed form plus their dual variables.
struct Rows {
    ptr: Vec<usize>,
    idx: Vec<u32>,
    val: Vec<f64>,
    nrm2: Vec<f64>,
    lambda: Vec<f64>,
}

impl Rows {
    fn new() -> Self {
        Rows {
            ptr: vec![0],
            idx: Vec::new(),
            val: Vec::new(),
            nrm2: Vec::new(),
            lambda: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.lambda.len()
    }

    fn push(&mut self, row: &[(u32, f64)]) {
        for &(i, c) in row {
            self.idx.push(i);
            self.val.push(c);
        }
        self.ptr.push(self.idx.len());
        self.nrm2.push(row.iter().map(|r| r.1 * r.1).sum());
        self.lambda.push(0.0);
    }

    fn dot(&self, k: usize, z: &[f64]) -> f64 {
        let (a, b) = (self.ptr[k], self.ptr[k + 1]);
        self.idx[a..b]
            .iter()
            .zip(&self.val[a..b])
            .map(|(&i, &c)| c * z[i as usize])
            .sum()
    }

    fn axpy(&self, k: usize, s: f64, z: &mut [f64]) {
        let (a, b) = (self.ptr[k], self.ptr[k + 1]);
        for (&i, &c) in self.idx[a..b].iter().zip(&self.val[a..b]) {
            z[i as usize] += s * c;
        }
    }

    /// `z = Nᵀλ / 2`.
    fn primal(&self, n: usize) -> Vec<f64> {
        let mut z = vec![0.0; n];
        for k in 0..self.len() {
            if self.lambda[k] > 0.0 {
                self.axpy(k, 0.5 * self.lambda[k], &mut z);
            }
        }
        z
    }

    /// Dual objective `Σλ − ‖z‖²`.
    fn dual(&self, z: &[f64]) -> f64 {
        self.lambda.iter().sum::<f64>() - norm2(z)
    }

    fn sweep(&mut self, z: &mut [f64], only_active: bool) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            let l = self.dot(k, z);
            if only_active && self.lambda[k] == 0.0 && l >= 1.0 {
                continue;
            }
            let old = self.lambda[k];
            let new = (old + 2.0 * (1.0 - l) / self.nrm2[k]).max(0.0);
            if new != old {
                self.axpy(k, 0.5 * (new - old), z);
                self.lambda[k] = new;
            }
            let res = if old > 0.0 { (1.0 - l).abs() } else { (1.0 - l).max(0.0) };
            worst = worst.max(res);
        }
        worst
    }

    /// Hildreth iterations until the KKT residual drops below `res_tol` or
    /// the dual objective stalls at relative rate `qp_tol`.
    fn solve(&mut self, z: &mut Vec<f64>, res_tol: f64, qp_tol: f64, max_sweeps: usize) -> usize {
        let n = z.len();
        let mut prev = self.dual(z);
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            let full = sweeps % 8 == 0;
            let res = self.sweep(z, !full);
            sweeps += 1;
            if full {
                *z = self.primal(n);
                let d = self.dual(z);
                let stalled = (d - prev).abs() <= qp_tol * d.abs().max(1e-300);
                prev = d;
                if res <= res_tol || (stalled && sweeps > 8) {
                    break;
                }
            }
        }
        *z = self.primal(n);
        sweeps
    }
}

fn norm2(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

fn path_hash(v: &[u32]) -> u64 {
    let mut h = DefaultHasher::new();
    v.hash(&mut h);
    h.finish()
}

/// Modulus of a single family.
pub fn modulus(grid: &QuotientGrid, fam: &CurveFamilySpec, cfg: &SolverConfig) -> Result<ModulusResult, SolveError> {
    modulus_union(grid, std::slice::from_ref(fam), cfg)
}

/// Modulus of the union of several families on one grid.
pub fn modulus_union(
    grid: &QuotientGrid,
    fams: &[CurveFamilySpec],
    cfg: &SolverConfig,
) -> Result<ModulusResult, SolveError> {
    let eps = fams
        .iter()
        .map(|f| grid.family_endpoints(f))
        .collect::<Result<Vec<_>, _>>()?;
    modulus_endpoints(grid, &eps, cfg)
}

/// Modulus of the union of families given by prepared endpoint sets.
pub fn modulus_endpoints(grid: &QuotientGrid, eps: &[Endpoints], cfg: &SolverConfig) -> Result<ModulusResult, SolveError> {
    cfg.validate()?;
    if eps.is_empty() {
        return Err(SolveError::Config("no curve family given".into()));
    }
    let net = Network::new(grid, eps);
    match (cfg.method, eps.len()) {
        (Method::Potential | Method::Auto, 1) => Ok(potential::solve(&net, &eps[0], cfg)),
        (Method::Potential, _) => Err(SolveError::Config(
            "the potential method handles a single family; use paths for unions".into(),
        )),
        (Method::Paths, _) | (Method::Auto, _) => Ok(constraint_generation(grid, &net, eps, cfg)),
    }
}

fn constraint_generation(grid: &QuotientGrid, net: &Network, eps: &[Endpoints], cfg: &SolverConfig) -> ModulusResult {
    let n = net.n_vars();
    let nv = grid.n_vertices();
    // Work in `y = √σ·x`, so that the mass is `‖y‖²`.
    let isq: Vec<f64> = (0..n).map(|i| 1.0 / net.var_sigma(i).sqrt()).collect();
    let max_paths = cfg.max_paths_for(grid);
    let thr = 1.0 - cfg.path_tol;
    // The upper bound carries a factor `1/ℓ²`, so a tight gap needs rows
    // for paths shorter than the admissibility threshold as well.
    let gen = 1.0 - cfg.path_tol.min(0.25 * cfg.gap_tol);
    let mut oracle = Oracle::new(nv);
    let mut rows = Rows::new();
    let mut seen: HashSet<u64> = HashSet::new();
    let mut y = vec![0.0; n];
    let mut trace = Vec::new();
    let mut res_tol = 0.1 * cfg.path_tol;
    let mut iterations = 0;
    let mut last = (0.0, f64::INFINITY, 0.0);
    let mut used = vec![false; nv];
    let status = loop {
        iterations += 1;
        let x: Vec<f64> = y.iter().zip(&isq).map(|(a, b)| a * b).collect();
        let mut shortest = f64::INFINITY;
        let mut fresh: Vec<Vec<(u32, f64)>> = Vec::new();
        let per_family = cfg.batch.div_ceil(eps.len());
        for ep in eps {
            let reached = oracle.search(net, ep, &x, gen);
            let Some(first) = reached.first() else { continue };
            shortest = shortest.min(first.0);
            used.iter_mut().for_each(|u| *u = false);
            let mut taken = 0;
            for &(len, _, t) in &reached {
                if len >= gen || taken >= per_family {
                    break;
                }
                let path = oracle.trace(net, t);
                // Prefer paths that are mostly new to this batch.
                let new = path.vertices.iter().filter(|&&v| !used[v as usize]).count();
                if 2 * new < path.vertices.len() {
                    continue;
                }
                for &v in &path.vertices {
                    used[v as usize] = true;
                }
                if seen.insert(path_hash(&path.vars)) {
                    let mut row: Vec<(u32, f64)> = path.vars.iter().map(|&i| (i, isq[i as usize])).collect();
                    row.sort_by_key(|r| r.0);
                    fresh.push(row);
                    taken += 1;
                }
            }
        }
        if !shortest.is_finite() {
            break Status::InfeasibleFamily;
        }
        let mass = norm2(&y);
        let lower = rows.dual(&y).max(0.0);
        let upper = if shortest > 0.0 { mass / (shortest * shortest) } else { f64::INFINITY };
        // Both bounds are rounded estimates of the same optimum near convergence.
        let upper = upper.max(lower);
        last = (lower, upper, shortest);
        trace.push(TraceEntry {
            paths: rows.len(),
            lower,
            upper,
            shortest,
        });
        let value = mass.clamp(lower, upper);
        if shortest >= thr && upper - lower <= cfg.gap_tol * value {
            break Status::Converged;
        }
        if rows.len() + fresh.len() > max_paths {
            break Status::IterationCap;
        }
        if fresh.is_empty() {
            // Violations only on known rows, or a loose gap: solve harder.
            if res_tol < 1e-12 {
                break Status::IterationCap;
            }
            res_tol *= 0.1;
        }
        for r in &fresh {
            rows.push(r);
        }
        rows.solve(&mut y, res_tol, cfg.qp_tol, cfg.max_sweeps);
    };
    if status == Status::InfeasibleFamily {
        return ModulusResult::infeasible(net);
    }
    let (lower, upper, shortest) = last;
    let scale = if shortest > 0.0 { 1.0 / shortest } else { 0.0 };
    let x: Vec<f64> = y.iter().zip(&isq).map(|(a, b)| a * b * scale).collect();
    ModulusResult {
        value: norm2(&y).clamp(lower, upper),
        upper_bound: upper,
        lower_bound: lower,
        density: net.cells_of(&x),
        iterations,
        shortest_final: shortest,
        status,
        n_paths: rows.len(),
        trace,
    }
}
