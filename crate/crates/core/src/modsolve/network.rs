//! The resistor network behind both solvers.
//!
//! Densities live on edges: an edge between 4-adjacent free cells spans one
//! cell length and one cell width (conductance 1); an edge from a free cell
//! to an adjacent continuum spans half a cell per occupied side
//! (conductance 2 per side); a terminal edge joins a source or sink cell to
//! its endpoint set over half a cell (conductance 2). Each contracted
//! continuum carries its own weight. A variable `x` is the length a path
//! picks up on that edge, so the mass is `Σ σ x²`.

use super::MassDistribution;
use crate::domain::{Endpoints, QuotientGrid};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

const NONE: u32 = u32::MAX;

pub(crate) struct Network {
    pub nf: usize,
    pub nk: usize,
    pub h: f64,
    /// `(a, b)` with `a` free; `b` free or contracted.
    pub ends: Vec<(u32, u32)>,
    pub sigma: Vec<f64>,
    adj_off: Vec<u32>,
    adj: Vec<(u32, u32)>,
    /// Terminal edges as `(cell, is_sink)`.
    pub terms: Vec<(u32, bool)>,
    src_term: Vec<u32>,
    snk_term: Vec<u32>,
}

impl Network {
    /// All grid edges, plus terminal edges for every family in `eps`.
    pub fn new(grid: &QuotientGrid, eps: &[Endpoints]) -> Self {
        let nf = grid.n_free();
        let nk = grid.n_contracted();
        let mut ends = Vec::new();
        let mut sigma = Vec::new();
        for f in 0..nf as u32 {
            for d in [0, 2] {
                if let Some(g) = grid.move_target(f, d) {
                    ends.push((f, g));
                    sigma.push(1.0);
                }
            }
            for (&k, &m) in grid.contracted_of(f).iter().zip(grid.contact_sides(f)) {
                ends.push((f, nf as u32 + k));
                sigma.push(2.0 * m as f64);
            }
        }
        let nv = nf + nk;
        let mut deg = vec![0u32; nv + 1];
        for &(a, b) in &ends {
            deg[a as usize + 1] += 1;
            deg[b as usize + 1] += 1;
        }
        for i in 0..nv {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut adj = vec![(0, 0); ends.len() * 2];
        for (e, &(a, b)) in ends.iter().enumerate() {
            adj[fill[a as usize] as usize] = (e as u32, b);
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = (e as u32, a);
            fill[b as usize] += 1;
        }
        let mut terms = Vec::new();
        let mut src_term = vec![NONE; nf];
        let mut snk_term = vec![NONE; nf];
        for ep in eps {
            for f in ep.free_sources(grid) {
                if src_term[f as usize] == NONE {
                    src_term[f as usize] = terms.len() as u32;
                    terms.push((f, false));
                }
            }
            for f in ep.free_sinks(grid) {
                if snk_term[f as usize] == NONE {
                    snk_term[f as usize] = terms.len() as u32;
                    terms.push((f, true));
                }
            }
        }
        Network {
            nf,
            nk,
            h: grid.h,
            ends,
            sigma,
            adj_off: deg,
            adj,
            terms,
            src_term,
            snk_term,
        }
    }

    pub fn n_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn n_vars(&self) -> usize {
        self.ends.len() + self.nk + self.terms.len()
    }

    /// Variable of contracted vertex `v` (a vertex id `≥ nf`).
    pub fn k_var(&self, v: u32) -> usize {
        self.ends.len() + v as usize - self.nf
    }

    pub fn term_var(&self, t: u32) -> usize {
        self.ends.len() + self.nk + t as usize
    }

    pub fn src_var(&self, f: u32) -> Option<usize> {
        let t = self.src_term[f as usize];
        (t != NONE).then(|| self.term_var(t))
    }

    pub fn snk_var(&self, f: u32) -> Option<usize> {
        let t = self.snk_term[f as usize];
        (t != NONE).then(|| self.term_var(t))
    }

    /// `(edge, other end)` pairs at vertex `v`.
    pub fn neighbors(&self, v: u32) -> &[(u32, u32)] {
        &self.adj[self.adj_off[v as usize] as usize..self.adj_off[v as usize + 1] as usize]
    }

    pub fn var_sigma(&self, i: usize) -> f64 {
        let ne = self.ends.len();
        if i < ne {
            self.sigma[i]
        } else if i < ne + self.nk {
            1.0
        } else {
            2.0
        }
    }

    pub fn mass(&self, x: &[f64]) -> f64 {
        x.iter().enumerate().map(|(i, v)| self.var_sigma(i) * v * v).sum()
    }

    /// Edge lengths that a cell density induces: each half-step inside a
    /// cell costs half its `h·ρ`.
    pub fn lengths_of(&self, rho: &MassDistribution) -> Vec<f64> {
        let hz = |f: u32| 0.5 * self.h * rho.rho_cells[f as usize];
        let mut x = Vec::with_capacity(self.n_vars());
        for &(a, b) in &self.ends {
            let mut v = hz(a);
            if (b as usize) < self.nf {
                v += hz(b);
            }
            x.push(v);
        }
        x.extend_from_slice(&rho.rho_contracted);
        x.extend(self.terms.iter().map(|&(f, _)| hz(f)));
        x
    }

    /// Cell density of equal mass whose cell-path lengths dominate the
    /// edge-path lengths of `x`: each cell takes the root of its share of
    /// edge mass, half of every edge between free cells and all of its
    /// continuum and terminal edges.
    pub fn cells_of(&self, x: &[f64]) -> MassDistribution {
        let mut m = vec![0.0; self.nf];
        for (e, &(a, b)) in self.ends.iter().enumerate() {
            let w = self.sigma[e] * x[e] * x[e];
            if (b as usize) < self.nf {
                m[a as usize] += 0.5 * w;
                m[b as usize] += 0.5 * w;
            } else {
                m[a as usize] += w;
            }
        }
        for (t, &(f, _)) in self.terms.iter().enumerate() {
            let v = x[self.term_var(t as u32)];
            m[f as usize] += 2.0 * v * v;
        }
        let ne = self.ends.len();
        MassDistribution {
            rho_cells: m.iter().map(|w| w.sqrt() / self.h).collect(),
            rho_contracted: x[ne..ne + self.nk].to_vec(),
        }
    }
}

/// A path through the network: its vertices and the variables it pays for,
/// in order.
#[derive(Clone, Debug)]
pub(crate) struct NetPath {
    pub vertices: Vec<u32>,
    pub vars: Vec<u32>,
}

/// Reusable Dijkstra state.
pub(crate) struct Oracle {
    dist: Vec<f64>,
    hops: Vec<u32>,
    parent: Vec<u32>,
    via: Vec<u32>,
    done: Vec<bool>,
    heap: BinaryHeap<Reverse<(u64, u32, u32)>>,
    touched: Vec<u32>,
}

/// `(full length, hops, sink)` for every sink settled, ascending.
pub(crate) type Reached = Vec<(f64, u32, u32)>;

impl Oracle {
    pub fn new(n: usize) -> Self {
        Oracle {
            dist: vec![f64::INFINITY; n],
            hops: vec![0; n],
            parent: vec![NONE; n],
            via: vec![NONE; n],
            done: vec![false; n],
            heap: BinaryHeap::new(),
            touched: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            let v = v as usize;
            self.dist[v] = f64::INFINITY;
            self.hops[v] = 0;
            self.parent[v] = NONE;
            self.via[v] = NONE;
            self.done[v] = false;
        }
        self.touched.clear();
        self.heap.clear();
    }

    fn relax(&mut self, v: u32, d: f64, hops: u32, parent: u32, via: u32) {
        let vi = v as usize;
        if self.done[vi] {
            return;
        }
        // Ties: fewer hops, then the smaller predecessor.
        let better = d < self.dist[vi]
            || (d == self.dist[vi] && (hops < self.hops[vi] || (hops == self.hops[vi] && parent < self.parent[vi])));
        if better {
            if self.dist[vi] == f64::INFINITY {
                self.touched.push(v);
            }
            self.dist[vi] = d;
            self.hops[vi] = hops;
            self.parent[vi] = parent;
            self.via[vi] = via;
            self.heap.push(Reverse((d.to_bits(), hops, v)));
        }
    }

    /// Multi-source search with absorbing sinks under edge lengths `x`.
    /// Stops once every unsettled vertex is at least `max(stop, best)` away,
    /// so the first entry returned is a shortest path and every sink closer
    /// than `stop` is listed.
    pub fn search(&mut self, net: &Network, ep: &Endpoints, x: &[f64], stop: f64) -> Reached {
        self.reset();
        let nf = net.nf as u32;
        for &s in &ep.sources {
            let d = if s < nf {
                x[net.src_var(s).expect("terminal for every free source")]
            } else {
                x[net.k_var(s)]
            };
            self.relax(s, d, 0, NONE - 1, NONE);
        }
        let mut reached = Vec::new();
        let mut best = f64::INFINITY;
        while let Some(Reverse((bits, hops, u))) = self.heap.pop() {
            let ui = u as usize;
            let d = f64::from_bits(bits);
            if self.done[ui] || d != self.dist[ui] || hops != self.hops[ui] {
                continue;
            }
            if d >= stop.max(best) {
                break;
            }
            self.done[ui] = true;
            if ep.is_sink[ui] {
                let full = if u < nf {
                    d + x[net.snk_var(u).expect("terminal for every free sink")]
                } else {
                    d
                };
                best = best.min(full);
                reached.push((full, hops, u));
                continue;
            }
            for &(e, v) in net.neighbors(u) {
                if ep.blocked[v as usize] || self.done[v as usize] {
                    continue;
                }
                let mut c = d + x[e as usize];
                if v >= nf {
                    c += x[net.k_var(v)];
                }
                self.relax(v, c, hops + 1, u, e);
            }
        }
        reached.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        reached
    }

    /// Path to sink `t` in the last search tree.
    pub fn trace(&self, net: &Network, t: u32) -> NetPath {
        let nf = net.nf as u32;
        let mut vertices = vec![t];
        let mut vars = Vec::new();
        if t < nf {
            vars.push(net.snk_var(t).expect("sink terminal") as u32);
        }
        let mut v = t;
        loop {
            if v >= nf {
                vars.push(net.k_var(v) as u32);
            }
            let p = self.parent[v as usize];
            if p >= NONE - 1 {
                if v < nf {
                    vars.push(net.src_var(v).expect("source terminal") as u32);
                }
                break;
            }
            vars.push(self.via[v as usize]);
            v = p;
            vertices.push(v);
        }
        vertices.reverse();
        vars.reverse();
        NetPath { vertices, vars }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BBox, CurveFamilySpec, DomainSpec};
    use crate::geom::{PlanarSet, Point};

    fn setup() -> (QuotientGrid, Endpoints) {
        let spec = DomainSpec::new(
            "k",
            BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
            vec![PlanarSet::rect(0.3, 0.7, 0.3, 0.7)],
        );
        let g = QuotientGrid::rasterize(&spec, 1.0 / 10.0).unwrap();
        let fam = CurveFamilySpec::new(
            PlanarSet::segment(Point::new(0.0, 0.0), Point::new(0.0, 1.0)),
            PlanarSet::segment(Point::new(1.0, 0.0), Point::new(1.0, 1.0)),
        );
        let ep = g.family_endpoints(&fam).unwrap();
        (g, ep)
    }

    #[test]
    fn cell_density_keeps_mass_and_dominates_lengths() {
        let (g, ep) = setup();
        let net = Network::new(&g, std::slice::from_ref(&ep));
        let x: Vec<f64> = (0..net.n_vars()).map(|i| ((i * 37 % 11) as f64) / 10.0).collect();
        let rho = net.cells_of(&x);
        assert!((rho.mass(&g) - net.mass(&x)).abs() < 1e-12 * net.mass(&x));
        // Any network path is at least as long under the cell density.
        let xc = net.lengths_of(&rho);
        let mut o = Oracle::new(g.n_vertices());
        let r = o.search(&net, &ep, &x, f64::INFINITY);
        let rc = o.search(&net, &ep, &xc, f64::INFINITY);
        assert!(rc[0].0 >= r[0].0 - 1e-12);
    }

    #[test]
    fn trace_pays_terminals_and_contracted_weight() {
        let (g, ep) = setup();
        let net = Network::new(&g, std::slice::from_ref(&ep));
        let mut x = vec![1.0; net.n_vars()];
        x[net.k_var(g.contracted_vertex(0))] = 0.0;
        let mut o = Oracle::new(g.n_vertices());
        let r = o.search(&net, &ep, &x, 0.0);
        let p = o.trace(&net, r[0].2);
        let len: f64 = p.vars.iter().map(|&i| x[i as usize]).sum();
        assert_eq!(len, r[0].0);
        assert!(p.vertices.contains(&g.contracted_vertex(0)));
        // Terminal, two cell edges, the contact edge in and out, two cell
        // edges, terminal.
        assert_eq!(len, 8.0);
    }
}
