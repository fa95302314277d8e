use super::path::{shortest_path, transboundary_length, PathConstraint};
use super::MassDistribution;
use crate::domain::{Endpoints, QuotientGrid, MOVES};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// Minimum over all tested paths.
    pub min_length: f64,
    /// Length of the ρ-shortest path.
    pub shortest_length: f64,
    /// Minimum over the random paths alone.
    pub random_min: f64,
    pub paths_tested: usize,
    pub admissible: bool,
}

/// Hop distance to the sink set, used to steer random walks.
fn hops_to_sink(grid: &QuotientGrid, ep: &Endpoints) -> Vec<u32> {
    let nf = grid.n_free() as u32;
    let mut d = vec![u32::MAX; grid.n_vertices()];
    let mut q = VecDeque::new();
    for &t in &ep.sinks {
        d[t as usize] = 0;
        q.push_back(t);
    }
    while let Some(u) = q.pop_front() {
        let mut push = |v: u32, q: &mut VecDeque<u32>| {
            if !ep.blocked[v as usize] && d[v as usize] == u32::MAX {
                d[v as usize] = d[u as usize] + 1;
                q.push_back(v);
            }
        };
        if u < nf {
            for mv in 0..4 {
                if let Some(v) = grid.move_target(u, mv) {
                    push(v, &mut q);
                }
            }
            for &k in grid.contracted_of(u) {
                push(nf + k, &mut q);
            }
        } else {
            for &w in grid.free_of((u - nf) as usize) {
                push(w, &mut q);
            }
        }
    }
    d
}

fn neighbors(grid: &QuotientGrid, ep: &Endpoints, u: u32, out: &mut Vec<u32>) {
    out.clear();
    let nf = grid.n_free() as u32;
    if u < nf {
        for mv in 0..MOVES.len() {
            if let Some(v) = grid.move_target(u, mv) {
                if !ep.blocked[v as usize] {
                    out.push(v);
                }
            }
        }
        for &k in grid.contracted_of(u) {
            if !ep.blocked[(nf + k) as usize] {
                out.push(nf + k);
            }
        }
    } else {
        out.extend(grid.free_of((u - nf) as usize).iter().filter(|&&w| !ep.blocked[w as usize]));
    }
}

/// Erase loops so that each vertex occurs once.
fn loop_erase(walk: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::new();
    let mut pos: HashMap<u32, usize> = HashMap::new();
    for &v in walk {
        if let Some(&p) = pos.get(&v) {
            for w in out.drain(p + 1..) {
                pos.remove(&w);
            }
        } else {
            pos.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

/// Minimum transboundary length of `rho` over the ρ-shortest path and
/// `n_random` loop-erased random walks biased toward the sink.
pub fn verify_admissible(
    grid: &QuotientGrid,
    rho: &MassDistribution,
    ep: &Endpoints,
    n_random: usize,
    path_tol: f64,
    seed: u64,
) -> AdmissibilityReport {
    let shortest_length = shortest_path(grid, rho, ep).map_or(f64::INFINITY, |p| p.1);
    let hop = hops_to_sink(grid, ep);
    let starts: Vec<u32> = ep
        .sources
        .iter()
        .copied()
        .filter(|&s| hop[s as usize] != u32::MAX)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_min = f64::INFINITY;
    let mut tested = 0;
    let cap = 50 * (grid.nx + grid.ny) + 100;
    let mut nb = Vec::new();
    if !starts.is_empty() {
        for _ in 0..n_random {
            let mut u = starts[rng.random_range(0..starts.len())];
            let mut walk = vec![u];
            let greedy = rng.random_range(0.3..0.9);
            while !ep.is_sink[u as usize] && walk.len() < cap {
                neighbors(grid, ep, u, &mut nb);
                if nb.is_empty() {
                    break;
                }
                let closer: Vec<u32> = nb.iter().copied().filter(|&v| hop[v as usize] < hop[u as usize]).collect();
                u = if !closer.is_empty() && rng.random::<f64>() < greedy {
                    closer[rng.random_range(0..closer.len())]
                } else {
                    nb[rng.random_range(0..nb.len())]
                };
                walk.push(u);
            }
            if !ep.is_sink[u as usize] {
                continue;
            }
            let path = loop_erase(&walk);
            if let Ok(p) = PathConstraint::from_vertices(grid, path) {
                random_min = random_min.min(transboundary_length(grid, rho, &p));
                tested += 1;
            }
        }
    }
    let min_length = shortest_length.min(random_min);
    AdmissibilityReport {
        min_length,
        shortest_length,
        random_min,
        paths_tested: tested + usize::from(shortest_length.is_finite()),
        admissible: min_length >= 1.0 - path_tol,
    }
}
