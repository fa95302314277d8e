//! Modulus of a single family through its dual potential.
//!
//! With densities on network edges the modulus is the least energy
//!
//! ```text
//! J(u, a, b) = Σ σ (u_f − u_g)²            cell edges
//!            + Σ σ [(a_k − u_f)₊² + (u_f − b_k)₊²]   contact edges
//!            + Σ (b_k − a_k)²               continua
//!            + Σ 2 u_f² + Σ 2 (1 − u_f)²      terminals
//! ```
//!
//! over potentials `u` on free cells and intervals `[a_k, b_k]` on continua
//! (a source continuum has `a_k = 0`, a sink continuum `b_k = 1`). Any
//! potential yields an admissible density: every path climbs from 0 to 1 and
//! pays at least each rise. `J` is convex and piecewise quadratic; it is
//! minimized by a semismooth Newton iteration whose linear systems are graph
//! Laplacians, factored by sparse Cholesky. The lower certificate is
//! Thomson's bound `|F|²/E(F)` for the induced flow, repaired to exact
//! conservation.

use super::network::{Network, Oracle};
use super::{ModulusResult, SolverConfig, Status, TraceEntry};
use crate::domain::Endpoints;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};
use std::collections::VecDeque;

const NONE: u32 = u32::MAX;
/// Proximal weight keeping every Newton system definite.
const PROX: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Side3 {
    Low,
    Mid,
    High,
}

/// Potentials: cells, then continuum interval ends.
#[derive(Clone)]
struct Point3 {
    u: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

struct Problem<'a> {
    net: &'a Network,
    ep: &'a Endpoints,
    /// Cell edges and contact edges with both ends open.
    cell_edges: Vec<u32>,
    contact_edges: Vec<u32>,
    live_k: Vec<bool>,
    pin_a: Vec<bool>,
    pin_b: Vec<bool>,
    /// Unknown index of each cell and continuum end, or `NONE`.
    iu: Vec<u32>,
    ia: Vec<u32>,
    ib: Vec<u32>,
    n: usize,
}

impl<'a> Problem<'a> {
    fn new(net: &'a Network, ep: &'a Endpoints) -> Self {
        let nf = net.nf;
        let open = |v: u32| !ep.blocked[v as usize];
        let mut cell_edges = Vec::new();
        let mut contact_edges = Vec::new();
        let mut live_k = vec![false; net.nk];
        for (e, &(a, b)) in net.ends.iter().enumerate() {
            if !(open(a) && open(b)) {
                continue;
            }
            if (b as usize) < nf {
                cell_edges.push(e as u32);
            } else {
                contact_edges.push(e as u32);
                live_k[b as usize - nf] = true;
            }
        }
        let mut pin_a = vec![false; net.nk];
        let mut pin_b = vec![false; net.nk];
        for k in 0..net.nk {
            let v = nf + k;
            if !ep.blocked[v] && (ep.is_source[v] || ep.is_sink[v]) {
                live_k[k] = true;
            }
            pin_a[k] = ep.is_source[v];
            pin_b[k] = ep.is_sink[v];
        }
        let mut n = 0u32;
        let mut iu = vec![NONE; nf];
        for f in 0..nf {
            if open(f as u32) {
                iu[f] = n;
                n += 1;
            }
        }
        let mut ia = vec![NONE; net.nk];
        let mut ib = vec![NONE; net.nk];
        for k in 0..net.nk {
            if !live_k[k] {
                continue;
            }
            if !pin_a[k] {
                ia[k] = n;
                n += 1;
            }
            if !pin_b[k] {
                ib[k] = n;
                n += 1;
            }
        }
        Problem {
            net,
            ep,
            cell_edges,
            contact_edges,
            live_k,
            pin_a,
            pin_b,
            iu,
            ia,
            ib,
            n: n as usize,
        }
    }

    fn start(&self) -> Point3 {
        let nk = self.net.nk;
        Point3 {
            u: vec![0.5; self.net.nf],
            a: (0..nk).map(|k| if self.pin_a[k] { 0.0 } else { 0.5 }).collect(),
            b: (0..nk).map(|k| if self.pin_b[k] { 1.0 } else { 0.5 }).collect(),
        }
    }

    fn k_of(&self, e: u32) -> usize {
        self.net.ends[e as usize].1 as usize - self.net.nf
    }

    fn sides(&self, p: &Point3) -> Vec<Side3> {
        self.contact_edges
            .iter()
            .map(|&e| {
                let (f, _) = self.net.ends[e as usize];
                let k = self.k_of(e);
                let uf = p.u[f as usize];
                if uf <= p.a[k] {
                    Side3::Low
                } else if uf > p.b[k] {
                    Side3::High
                } else {
                    Side3::Mid
                }
            })
            .collect()
    }

    fn energy(&self, p: &Point3) -> f64 {
        let net = self.net;
        let mut j = 0.0;
        for &e in &self.cell_edges {
            let (f, g) = net.ends[e as usize];
            let d = p.u[f as usize] - p.u[g as usize];
            j += net.sigma[e as usize] * d * d;
        }
        for &e in &self.contact_edges {
            let (f, _) = net.ends[e as usize];
            let k = self.k_of(e);
            let uf = p.u[f as usize];
            let lo = (p.a[k] - uf).max(0.0);
            let hi = (uf - p.b[k]).max(0.0);
            j += net.sigma[e as usize] * (lo * lo + hi * hi);
        }
        for k in 0..net.nk {
            if self.live_k[k] {
                let d = p.b[k] - p.a[k];
                j += d * d;
            }
        }
        for &(f, sink) in &net.terms {
            if self.iu[f as usize] != NONE {
                let d = if sink { 1.0 - p.u[f as usize] } else { p.u[f as usize] };
                j += 2.0 * d * d;
            }
        }
        j
    }

    /// Lower-triangle pattern, in the order `values` fills it.
    fn pattern(&self) -> Vec<Pair<usize, usize>> {
        let mut pat: Vec<Pair<usize, usize>> = (0..self.n).map(|i| Pair::new(i, i)).collect();
        let mut off = |i: u32, j: u32| {
            if i != NONE && j != NONE {
                pat.push(Pair::new(i.max(j) as usize, i.min(j) as usize));
            }
        };
        for &e in &self.cell_edges {
            let (f, g) = self.net.ends[e as usize];
            off(self.iu[f as usize], self.iu[g as usize]);
        }
        for &e in &self.contact_edges {
            let (f, _) = self.net.ends[e as usize];
            let k = self.k_of(e);
            off(self.iu[f as usize], self.ia[k]);
            off(self.iu[f as usize], self.ib[k]);
        }
        for k in 0..self.net.nk {
            if self.live_k[k] {
                off(self.ia[k], self.ib[k]);
            }
        }
        pat
    }

    /// Matrix values (pattern order) and right-hand side of the quadratic
    /// model for fixed contact sides, centred at `p`.
    fn system(&self, p: &Point3, sides: &[Side3]) -> (Vec<f64>, Vec<f64>) {
        let net = self.net;
        let mut diag = vec![PROX; self.n];
        let mut rhs = vec![0.0; self.n];
        let mut offv: Vec<f64> = Vec::new();
        for f in 0..net.nf {
            if self.iu[f] != NONE {
                rhs[self.iu[f] as usize] = PROX * p.u[f];
            }
        }
        for k in 0..net.nk {
            if self.ia[k] != NONE {
                rhs[self.ia[k] as usize] = PROX * p.a[k];
            }
            if self.ib[k] != NONE {
                rhs[self.ib[k] as usize] = PROX * p.b[k];
            }
        }
        // Couple unknown-or-pinned `i` (value `vi`) with `j` (value `vj`).
        let mut couple = |i: u32, vi: f64, j: u32, vj: f64, w: f64, offv: &mut Vec<f64>, present: bool| {
            if i != NONE {
                diag[i as usize] += w;
                if j == NONE {
                    rhs[i as usize] += w * vj;
                }
            }
            if j != NONE {
                diag[j as usize] += w;
                if i == NONE {
                    rhs[j as usize] += w * vi;
                }
            }
            if present {
                offv.push(if i != NONE && j != NONE { -w } else { 0.0 });
            }
        };
        for &e in &self.cell_edges {
            let (f, g) = net.ends[e as usize];
            let (i, j) = (self.iu[f as usize], self.iu[g as usize]);
            couple(i, p.u[f as usize], j, p.u[g as usize], net.sigma[e as usize], &mut offv, true);
        }
        for (s, &e) in self.contact_edges.iter().enumerate() {
            let (f, _) = net.ends[e as usize];
            let k = self.k_of(e);
            let i = self.iu[f as usize];
            let w = net.sigma[e as usize];
            let (wa, wb) = match sides[s] {
                Side3::Low => (w, 0.0),
                Side3::High => (0.0, w),
                Side3::Mid => (0.0, 0.0),
            };
            let has_a = self.ia[k] != NONE;
            let has_b = self.ib[k] != NONE;
            couple(i, p.u[f as usize], self.ia[k], p.a[k], wa, &mut offv, has_a);
            couple(i, p.u[f as usize], self.ib[k], p.b[k], wb, &mut offv, has_b);
        }
        for k in 0..net.nk {
            if self.live_k[k] {
                let present = self.ia[k] != NONE && self.ib[k] != NONE;
                couple(self.ia[k], p.a[k], self.ib[k], p.b[k], 1.0, &mut offv, present);
            }
        }
        for &(f, sink) in &net.terms {
            let i = self.iu[f as usize];
            if i != NONE {
                diag[i as usize] += 2.0;
                if sink {
                    rhs[i as usize] += 2.0;
                }
            }
        }
        let mut vals = diag;
        vals.extend(offv);
        (vals, rhs)
    }

    fn unpack(&self, base: &Point3, sol: &[f64]) -> Point3 {
        let mut q = base.clone();
        for f in 0..self.net.nf {
            if self.iu[f] != NONE {
                q.u[f] = sol[self.iu[f] as usize];
            }
        }
        for k in 0..self.net.nk {
            if self.ia[k] != NONE {
                q.a[k] = sol[self.ia[k] as usize];
            }
            if self.ib[k] != NONE {
                q.b[k] = sol[self.ib[k] as usize];
            }
        }
        q
    }

    /// Edge lengths of the admissible density induced by `p`.
    fn lengths(&self, p: &Point3) -> Vec<f64> {
        let net = self.net;
        let mut x = vec![0.0; net.n_vars()];
        let (lo, hi) = intervals(p);
        for &e in &self.cell_edges {
            let (f, g) = net.ends[e as usize];
            x[e as usize] = (p.u[f as usize] - p.u[g as usize]).abs();
        }
        for &e in &self.contact_edges {
            let (f, _) = net.ends[e as usize];
            let k = self.k_of(e);
            let uf = p.u[f as usize];
            x[e as usize] = (lo[k] - uf).max(uf - hi[k]).max(0.0);
        }
        for k in 0..net.nk {
            if self.live_k[k] {
                x[net.k_var((net.nf + k) as u32)] = hi[k] - lo[k];
            }
        }
        for (t, &(f, sink)) in net.terms.iter().enumerate() {
            if self.iu[f as usize] != NONE {
                let uf = p.u[f as usize];
                x[net.term_var(t as u32)] = if sink { (1.0 - uf).abs() } else { uf.abs() };
            }
        }
        x
    }
}

fn intervals(p: &Point3) -> (Vec<f64>, Vec<f64>) {
    let lo = p.a.iter().zip(&p.b).map(|(a, b)| a.min(*b)).collect();
    let hi = p.a.iter().zip(&p.b).map(|(a, b)| a.max(*b)).collect();
    (lo, hi)
}

/// Thomson lower bound `|F|²/E(F)` for the flow that `p` induces, after
/// routing every conservation defect to a terminal along breadth-first trees.
fn flow_bound(pb: &Problem, p: &Point3) -> f64 {
    let net = pb.net;
    let ep = pb.ep;
    let nf = net.nf;
    let nv = nf + net.nk;
    let (lo, hi) = intervals(p);
    // Flow on each edge from its first end to its second.
    let mut flow = vec![0.0; net.n_edges()];
    for &e in &pb.cell_edges {
        let (f, g) = net.ends[e as usize];
        flow[e as usize] = net.sigma[e as usize] * (p.u[g as usize] - p.u[f as usize]);
    }
    for &e in &pb.contact_edges {
        let (f, _) = net.ends[e as usize];
        let k = pb.k_of(e);
        let uf = p.u[f as usize];
        let s = net.sigma[e as usize];
        flow[e as usize] = if uf < lo[k] {
            s * (lo[k] - uf)
        } else if uf > hi[k] {
            -s * (uf - hi[k])
        } else {
            0.0
        };
    }
    let mut inj = vec![0.0; nv];
    let mut ext = vec![0.0; nv];
    for &(f, sink) in &net.terms {
        if pb.iu[f as usize] == NONE {
            continue;
        }
        let uf = p.u[f as usize];
        if sink {
            ext[f as usize] += 2.0 * (1.0 - uf).max(0.0);
        } else {
            inj[f as usize] += 2.0 * uf.max(0.0);
        }
    }
    let open = |v: usize| !ep.blocked[v] && (v < nf || pb.live_k[v - nf]);
    // Only components holding both a source and a sink carry family flow.
    let mut comp = vec![NONE; nv];
    let mut good = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..nv {
        if !open(s) || comp[s] != NONE {
            continue;
        }
        let c = good.len() as u32;
        let (mut src, mut snk) = (false, false);
        comp[s] = c;
        queue.push_back(s as u32);
        while let Some(v) = queue.pop_front() {
            src |= ep.is_source[v as usize];
            snk |= ep.is_sink[v as usize];
            for &(_, w) in net.neighbors(v) {
                if open(w as usize) && comp[w as usize] == NONE {
                    comp[w as usize] = c;
                    queue.push_back(w);
                }
            }
        }
        good.push(src && snk);
    }
    let live = |v: usize| comp[v] != NONE && good[comp[v] as usize];
    for (e, &(a, _)) in net.ends.iter().enumerate() {
        if !live(a as usize) {
            flow[e] = 0.0;
        }
    }
    for v in 0..nv {
        if !live(v) {
            inj[v] = 0.0;
            ext[v] = 0.0;
        }
    }
    let balance = |flow: &[f64], inj: &[f64], ext: &[f64]| {
        let mut r: Vec<f64> = (0..nv).map(|v| inj[v] - ext[v]).collect();
        for (e, &(a, b)) in net.ends.iter().enumerate() {
            r[a as usize] -= flow[e];
            r[b as usize] += flow[e];
        }
        r
    };
    // Continuum endpoints absorb their own defects where the sign allows.
    let r = balance(&flow, &inj, &ext);
    for k in 0..net.nk {
        let v = nf + k;
        if !live(v) {
            continue;
        }
        if ep.is_source[v] && r[v] < 0.0 {
            inj[v] -= r[v];
        } else if ep.is_sink[v] && r[v] > 0.0 {
            ext[v] += r[v];
        }
    }
    let r = balance(&flow, &inj, &ext);
    // Excess flows down the sink tree, deficits are drawn up the source tree.
    for (to_sink, roots) in [(true, &ep.sinks), (false, &ep.sources)] {
        let mut parent = vec![NONE; nv];
        let mut via = vec![NONE; nv];
        let mut order = Vec::new();
        let mut seen = vec![false; nv];
        for &s in roots.iter() {
            if live(s as usize) {
                seen[s as usize] = true;
                order.push(s);
            }
        }
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(e, w) in net.neighbors(v) {
                if live(w as usize) && !seen[w as usize] {
                    seen[w as usize] = true;
                    parent[w as usize] = v;
                    via[w as usize] = e;
                    order.push(w);
                }
            }
        }
        let mut acc: Vec<f64> = r.iter().map(|&x| if to_sink { x.max(0.0) } else { (-x).max(0.0) }).collect();
        for &v in order.iter().rev() {
            let vi = v as usize;
            let amount = acc[vi];
            if amount == 0.0 {
                continue;
            }
            let pa = parent[vi];
            if pa == NONE {
                if to_sink {
                    ext[vi] += amount;
                } else {
                    inj[vi] += amount;
                }
                continue;
            }
            let e = via[vi] as usize;
            // Sink tree: send v → parent. Source tree: send parent → v.
            let forward = (net.ends[e].0 == v) == to_sink;
            flow[e] += if forward { amount } else { -amount };
            acc[pa as usize] += amount;
        }
    }
    let total: f64 = inj.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut energy = 0.0;
    let mut through = vec![0.0; net.nk];
    for (e, &(_, b)) in net.ends.iter().enumerate() {
        let f = flow[e];
        energy += f * f / net.sigma[e];
        if b as usize >= nf && f > 0.0 {
            through[b as usize - nf] += f;
        }
    }
    for k in 0..net.nk {
        let v = nf + k;
        let t = through[k] + inj[v];
        energy += t * t;
    }
    for f in 0..nf {
        energy += 0.5 * (inj[f] * inj[f] + ext[f] * ext[f]);
    }
    total * total / energy
}

pub(crate) fn solve(net: &Network, ep: &Endpoints, cfg: &SolverConfig) -> ModulusResult {
    let pb = Problem::new(net, ep);
    let mut oracle = Oracle::new(net.nf + net.nk);
    let zero = vec![0.0; net.n_vars()];
    if oracle.search(net, ep, &zero, 0.0).is_empty() {
        return ModulusResult::infeasible(net);
    }
    let pat = pb.pattern();
    let (sym, argsort) =
        SymbolicSparseColMat::try_new_from_indices(pb.n, pb.n, &pat).expect("valid Laplacian pattern");
    let sym_llt = SymbolicLlt::try_new(sym.as_ref(), Side::Lower).expect("symbolic factorization");
    let mut p = pb.start();
    let mut j = pb.energy(&p);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut stable = false;
    while iterations < cfg.max_newton {
        iterations += 1;
        let sides = pb.sides(&p);
        let (vals, rhs) = pb.system(&p, &sides);
        let mat = SparseColMat::new_from_argsort(sym.clone(), &argsort, &vals).expect("matrix values");
        let llt = Llt::try_new_with_symbolic(sym_llt.clone(), mat.as_ref(), Side::Lower).expect("Laplacian is definite");
        let mut b = Mat::<f64>::from_fn(pb.n, 1, |i, _| rhs[i]);
        llt.solve_in_place(&mut b);
        let sol: Vec<f64> = (0..pb.n).map(|i| b[(i, 0)]).collect();
        let mut q = pb.unpack(&p, &sol);
        let mut jq = pb.energy(&q);
        let full = jq <= j * (1.0 + 1e-13) + 1e-300;
        if !full {
            // Backtrack along the Newton direction.
            let mut t = 0.5;
            let mut found = false;
            while t > 1e-6 {
                let r = blend(&p, &q, t);
                let jr = pb.energy(&r);
                if jr < j {
                    q = r;
                    jq = jr;
                    found = true;
                    break;
                }
                t *= 0.5;
            }
            if !found {
                trace.push(TraceEntry { paths: 0, lower: 0.0, upper: j, shortest: 1.0 });
                break;
            }
        }
        p = q;
        j = jq;
        trace.push(TraceEntry { paths: 0, lower: 0.0, upper: j, shortest: 1.0 });
        if full && pb.sides(&p) == sides {
            stable = true;
            break;
        }
    }
    let lower = flow_bound(&pb, &p);
    if let Some(last) = trace.last_mut() {
        last.lower = lower;
    }
    let mut x = pb.lengths(&p);
    let reached = oracle.search(net, ep, &x, 0.0);
    let shortest = reached.first().map_or(f64::INFINITY, |r| r.0);
    let scale = if shortest > 0.0 && shortest.is_finite() { 1.0 / shortest } else { 1.0 };
    for v in x.iter_mut() {
        *v *= scale;
    }
    let upper = net.mass(&x);
    let value = j.clamp(lower.min(upper), upper);
    let converged = stable && shortest >= 1.0 - cfg.path_tol && upper - lower <= cfg.gap_tol * value;
    ModulusResult {
        value,
        upper_bound: upper,
        lower_bound: lower.min(upper),
        density: net.cells_of(&x),
        iterations,
        shortest_final: shortest,
        status: if converged { Status::Converged } else { Status::IterationCap },
        n_paths: 0,
        trace,
    }
}

fn blend(p: &Point3, q: &Point3, t: f64) -> Point3 {
    let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
    Point3 {
        u: mix(&p.u, &q.u),
        a: mix(&p.a, &q.a),
        b: mix(&p.b, &q.b),
    }
}
