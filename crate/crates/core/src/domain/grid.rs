use super::{BBox, CurveFamilySpec, DomainError, DomainSpec};
use crate::geom::{PlanarSet, Point};
use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Free,
    Inside(usize),
    OutsideAmbient,
}

/// Grid moves between 4-adjacent cells.
pub const MOVES: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

const NONE: u32 = u32::MAX;

/// Cell-centred grid over the ambient box with each continuum contracted to
/// a single vertex. Vertices `0..n_free()` are free cells; vertex
/// `n_free() + i` is the contracted continuum `i`.
#[derive(Clone, Debug)]
pub struct QuotientGrid {
    pub spec: DomainSpec,
    pub h: f64,
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    pub status: Vec<CellStatus>,
    free_id: Vec<u32>,
    free_cells: Vec<u32>,
    dir_mask: Vec<u8>,
    fc_off: Vec<u32>,
    fc: Vec<u32>,
    sides: Vec<u8>,
    cf_off: Vec<u32>,
    cf: Vec<u32>,
    present: Vec<bool>,
}

/// Source and sink vertex sets of a curve family on a grid.
#[derive(Clone, Debug)]
pub struct Endpoints {
    pub sources: Vec<u32>,
    pub sinks: Vec<u32>,
    pub is_source: Vec<bool>,
    pub is_sink: Vec<bool>,
    /// Untraversable vertices: forbidden continua and cells outside the
    /// family's ambient restriction.
    pub blocked: Vec<bool>,
}

impl Endpoints {
    pub fn free_sources<'a>(&'a self, g: &'a QuotientGrid) -> impl Iterator<Item = u32> + 'a {
        self.sources.iter().copied().filter(|&v| (v as usize) < g.n_free())
    }

    pub fn free_sinks<'a>(&'a self, g: &'a QuotientGrid) -> impl Iterator<Item = u32> + 'a {
        self.sinks.iter().copied().filter(|&v| (v as usize) < g.n_free())
    }
}

fn is_one_dimensional(k: &PlanarSet) -> bool {
    !k.has_interior()
}

impl QuotientGrid {
    /// Classify cells by their centres, contract each continuum, and build the
    /// move graph.
    pub fn rasterize(spec: &DomainSpec, h: f64) -> Result<Self, DomainError> {
        spec.validate()?;
        if !(h.is_finite() && h > 0.0) {
            return Err(DomainError::Invalid(format!("grid spacing must be positive, got {h}")));
        }
        let amb = spec.ambient;
        let nx = (amb.width() / h - 1e-9).ceil().max(1.0) as usize;
        let ny = (amb.height() / h - 1e-9).ceil().max(1.0) as usize;
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(DomainError::Invalid(format!("grid of {nx}x{ny} cells is too large")));
        }
        let origin = amb.min;
        let center = |i: usize, j: usize| origin + Point::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
        let mut status = vec![CellStatus::Free; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let c = center(i, j);
                if c.x > amb.max.x || c.y > amb.max.y {
                    status[j * nx + i] = CellStatus::OutsideAmbient;
                }
            }
        }
        let cell_range = |lo: f64, hi: f64, o: f64, n: usize| {
            let a = (((lo - o) / h - 1.0).floor().max(0.0) as usize).min(n);
            let b = (((hi - o) / h + 1.0).ceil().max(0.0) as usize).min(n);
            a..b
        };
        for (k, set) in spec.continua.iter().enumerate() {
            let (lo, hi) = set.bbox();
            let thin = is_one_dimensional(set);
            let mut hit = false;
            for j in cell_range(lo.y, hi.y, origin.y, ny) {
                for i in cell_range(lo.x, hi.x, origin.x, nx) {
                    let c = center(i, j);
                    let inside = if thin { set.dist_point(c) <= 0.5 * h } else { set.contains(c) };
                    if !inside {
                        continue;
                    }
                    match status[j * nx + i] {
                        CellStatus::Free => status[j * nx + i] = CellStatus::Inside(k),
                        CellStatus::Inside(o) => return Err(DomainError::SpacingTooCoarse { h, i: o, j: k }),
                        CellStatus::OutsideAmbient => {}
                    }
                    hit = true;
                }
            }
            if !hit {
                // Too small to own a cell centre: it takes the cell it sits in.
                let p = set.representative();
                let i = (((p.x - origin.x) / h).floor().max(0.0) as usize).min(nx - 1);
                let j = (((p.y - origin.y) / h).floor().max(0.0) as usize).min(ny - 1);
                match status[j * nx + i] {
                    CellStatus::Inside(o) => return Err(DomainError::SpacingTooCoarse { h, i: o, j: k }),
                    _ => status[j * nx + i] = CellStatus::Inside(k),
                }
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                if let CellStatus::Inside(a) = status[j * nx + i] {
                    for (di, dj) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                            continue;
                        }
                        if let CellStatus::Inside(b) = status[jj as usize * nx + ii as usize] {
                            if a != b {
                                return Err(DomainError::SpacingTooCoarse { h, i: a.min(b), j: a.max(b) });
                            }
                        }
                    }
                }
            }
        }
        let mut free_id = vec![NONE; nx * ny];
        let mut free_cells = Vec::new();
        for (c, s) in status.iter().enumerate() {
            if *s == CellStatus::Free {
                free_id[c] = free_cells.len() as u32;
                free_cells.push(c as u32);
            }
        }
        let mut grid = QuotientGrid {
            spec: spec.clone(),
            h,
            origin,
            nx,
            ny,
            status,
            free_id,
            free_cells,
            dir_mask: Vec::new(),
            fc_off: Vec::new(),
            fc: Vec::new(),
            sides: Vec::new(),
            cf_off: Vec::new(),
            cf: Vec::new(),
            present: Vec::new(),
        };
        grid.build_moves();
        grid.build_contracted();
        let comps = grid.free_components();
        if comps > 1 {
            return Err(DomainError::DisconnectedComplement(comps));
        }
        Ok(grid)
    }

    fn is_free(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.nx
            && (j as usize) < self.ny
            && self.free_id[j as usize * self.nx + i as usize] != NONE
    }

    fn build_moves(&mut self) {
        let mut mask = vec![0u8; self.free_cells.len()];
        for (f, &c) in self.free_cells.iter().enumerate() {
            let (i, j) = ((c as usize % self.nx) as i64, (c as usize / self.nx) as i64);
            for (d, (di, dj)) in MOVES.iter().enumerate() {
                if self.is_free(i + di, j + dj) {
                    mask[f] |= 1 << d;
                }
            }
        }
        self.dir_mask = mask;
    }

    fn build_contracted(&mut self) {
        let nk = self.spec.n_contracted();
        let outer = self.spec.outer_index();
        // (continuum, number of cell sides it occupies) per free cell.
        let mut lists: Vec<Vec<(u32, u8)>> = vec![Vec::new(); self.free_cells.len()];
        let mut present = vec![false; nk];
        for s in &self.status {
            if let CellStatus::Inside(k) = s {
                present[*k] = true;
            }
        }
        let bump = |l: &mut Vec<(u32, u8)>, k: u32| match l.iter_mut().find(|e| e.0 == k) {
            Some(e) => e.1 += 1,
            None => l.push((k, 1)),
        };
        for (f, &c) in self.free_cells.iter().enumerate() {
            let (i, j) = ((c as usize % self.nx) as i64, (c as usize / self.nx) as i64);
            for (di, dj) in MOVES {
                let (ii, jj) = (i + di, j + dj);
                let st = if ii < 0 || jj < 0 || ii >= self.nx as i64 || jj >= self.ny as i64 {
                    CellStatus::OutsideAmbient
                } else {
                    self.status[jj as usize * self.nx + ii as usize]
                };
                match st {
                    CellStatus::Inside(k) => bump(&mut lists[f], k as u32),
                    CellStatus::OutsideAmbient => {
                        if let Some(o) = outer {
                            bump(&mut lists[f], o as u32);
                            present[o] = true;
                        }
                    }
                    CellStatus::Free => {}
                }
            }
            lists[f].sort_unstable();
        }
        let mut fc_off = vec![0u32];
        let mut fc = Vec::new();
        let mut sides = Vec::new();
        let mut back: Vec<Vec<u32>> = vec![Vec::new(); nk];
        for (f, l) in lists.iter().enumerate() {
            for &(k, m) in l {
                fc.push(k);
                sides.push(m);
                back[k as usize].push(f as u32);
            }
            fc_off.push(fc.len() as u32);
        }
        let mut cf_off = vec![0u32];
        let mut cf = Vec::new();
        for l in &back {
            cf.extend_from_slice(l);
            cf_off.push(cf.len() as u32);
        }
        self.fc_off = fc_off;
        self.fc = fc;
        self.sides = sides;
        self.cf_off = cf_off;
        self.cf = cf;
        self.present = present;
    }

    fn free_components(&self) -> usize {
        let mut seen = vec![false; self.free_cells.len()];
        let mut comps = 0;
        let mut queue = VecDeque::new();
        // Without an outer component the window is a chart of the plane, and
        // cells on its frame are joined through the exterior.
        let frame: Vec<u32> = if self.spec.outer {
            Vec::new()
        } else {
            (0..self.free_cells.len() as u32)
                .filter(|&f| {
                    let (i, j) = self.cell_of(f);
                    i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
                })
                .collect()
        };
        let seeds = std::iter::once(frame).chain((0..self.free_cells.len() as u32).map(|s| vec![s]));
        for group in seeds {
            let group: Vec<u32> = group.into_iter().filter(|&s| !seen[s as usize]).collect();
            if group.is_empty() {
                continue;
            }
            comps += 1;
            for &s in &group {
                seen[s as usize] = true;
                queue.push_back(s);
            }
            while let Some(f) = queue.pop_front() {
                for d in 0..4 {
                    if let Some(t) = self.move_target(f, d) {
                        if !seen[t as usize] {
                            seen[t as usize] = true;
                            queue.push_back(t);
                        }
                    }
                }
            }
        }
        comps
    }

    pub fn n_free(&self) -> usize {
        self.free_cells.len()
    }

    pub fn n_contracted(&self) -> usize {
        self.present.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_free() + self.n_contracted()
    }

    /// Vertex id of contracted continuum `k`.
    pub fn contracted_vertex(&self, k: usize) -> u32 {
        (self.n_free() + k) as u32
    }

    pub fn is_present(&self, k: usize) -> bool {
        self.present[k]
    }

    pub fn n_present(&self) -> usize {
        self.present.iter().filter(|p| **p).count()
    }

    /// Grid coordinates of free cell `f`.
    pub fn cell_of(&self, f: u32) -> (usize, usize) {
        let c = self.free_cells[f as usize] as usize;
        (c % self.nx, c / self.nx)
    }

    pub fn free_at(&self, i: usize, j: usize) -> Option<u32> {
        let f = self.free_id[j * self.nx + i];
        (f != NONE).then_some(f)
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        self.origin + Point::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    pub fn free_center(&self, f: u32) -> Point {
        let (i, j) = self.cell_of(f);
        self.center(i, j)
    }

    pub fn free_area(&self) -> f64 {
        self.n_free() as f64 * self.h * self.h
    }

    /// Number of cells along the grid diagonal.
    pub fn diameter_cells(&self) -> usize {
        ((self.nx * self.nx + self.ny * self.ny) as f64).sqrt().ceil() as usize
    }

    pub fn move_mask(&self, f: u32) -> u8 {
        self.dir_mask[f as usize]
    }

    /// Free cell reached from `f` by move `d`, if any.
    pub fn move_target(&self, f: u32, d: usize) -> Option<u32> {
        if self.dir_mask[f as usize] & (1 << d) == 0 {
            return None;
        }
        let (i, j) = self.cell_of(f);
        let (di, dj) = MOVES[d];
        self.free_at((i as i64 + di) as usize, (j as i64 + dj) as usize)
    }

    /// Contracted continua 4-adjacent to free cell `f`.
    pub fn contracted_of(&self, f: u32) -> &[u32] {
        &self.fc[self.fc_off[f as usize] as usize..self.fc_off[f as usize + 1] as usize]
    }

    /// For each entry of `contracted_of(f)`, the number of sides of `f` it
    /// occupies.
    pub fn contact_sides(&self, f: u32) -> &[u8] {
        &self.sides[self.fc_off[f as usize] as usize..self.fc_off[f as usize + 1] as usize]
    }

    /// Free cells 4-adjacent to contracted continuum `k`.
    pub fn free_of(&self, k: usize) -> &[u32] {
        &self.cf[self.cf_off[k] as usize..self.cf_off[k + 1] as usize]
    }

    /// Source and sink vertex sets of `fam`: free cells whose centre lies
    /// within `h/2` of the set, plus non-forbidden continua meeting it.
    pub fn family_endpoints(&self, fam: &CurveFamilySpec) -> Result<Endpoints, DomainError> {
        fam.validate(&self.spec)?;
        let nv = self.n_vertices();
        let nf = self.n_free();
        let mut blocked = vec![false; nv];
        for &k in &fam.forbidden {
            blocked[nf + k] = true;
        }
        if let Some(b) = fam.ambient_restriction {
            for f in 0..nf {
                if !b.contains(self.free_center(f as u32)) {
                    blocked[f] = true;
                }
            }
        }
        let collect = |set: &PlanarSet| {
            let (lo, hi) = set.bbox();
            let mut out = Vec::new();
            let i0 = (((lo.x - self.origin.x) / self.h - 1.0).floor().max(0.0) as usize).min(self.nx);
            let i1 = (((hi.x - self.origin.x) / self.h + 1.0).ceil().max(0.0) as usize).min(self.nx);
            let j0 = (((lo.y - self.origin.y) / self.h - 1.0).floor().max(0.0) as usize).min(self.ny);
            let j1 = (((hi.y - self.origin.y) / self.h + 1.0).ceil().max(0.0) as usize).min(self.ny);
            for j in j0..j1 {
                for i in i0..i1 {
                    if let Some(f) = self.free_at(i, j) {
                        if !blocked[f as usize] && set.dist_point(self.center(i, j)) <= 0.5 * self.h + 1e-12 {
                            out.push(f);
                        }
                    }
                }
            }
            let frees = out.len();
            for (k, kset) in self.spec.continua.iter().enumerate() {
                if self.present[k] && !blocked[nf + k] && kset.intersects(set) {
                    out.push((nf + k) as u32);
                }
            }
            if let Some(o) = self.spec.outer_index() {
                if self.present[o] && !blocked[nf + o] && !inside_open(&self.spec.ambient, set) {
                    out.push((nf + o) as u32);
                }
            }
            out.sort_unstable();
            (out, frees)
        };
        let (sources, ns) = collect(&fam.source);
        let (sinks, nt) = collect(&fam.sink);
        if ns == 0 {
            return Err(DomainError::EmptyEndpointSet("source"));
        }
        if nt == 0 {
            return Err(DomainError::EmptyEndpointSet("sink"));
        }
        let mut is_source = vec![false; nv];
        let mut is_sink = vec![false; nv];
        for &v in &sources {
            is_source[v as usize] = true;
        }
        for &v in &sinks {
            if is_source[v as usize] {
                return Err(DomainError::InvalidFamily(format!(
                    "source and sink share grid vertex {v}; refine the grid"
                )));
            }
            is_sink[v as usize] = true;
        }
        Ok(Endpoints {
            sources,
            sinks,
            is_source,
            is_sink,
            blocked,
        })
    }
}

/// True when `set` stays strictly inside the box.
fn inside_open(b: &BBox, set: &PlanarSet) -> bool {
    let (lo, hi) = set.bbox();
    lo.x > b.min.x + 1e-12 && lo.y > b.min.y + 1e-12 && hi.x < b.max.x - 1e-12 && hi.y < b.max.y - 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BBox;
    use std::f64::consts::PI;

    fn unit() -> BBox {
        BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0))
    }

    #[test]
    fn empty_box_counts() {
        let g = QuotientGrid::rasterize(&DomainSpec::new("e", unit(), vec![]), 0.25).unwrap();
        assert_eq!(g.n_free(), 16);
        assert_eq!(g.n_present(), 0);
        let f = g.free_at(0, 0).unwrap();
        assert_eq!(g.move_mask(f).count_ones(), 2);
        assert_eq!(g.move_target(f, 0), g.free_at(1, 0));
    }

    #[test]
    fn disk_area_against_fine_raster() {
        let spec = DomainSpec::new("d", unit(), vec![PlanarSet::disk(Point::new(0.5, 0.5), 0.3)]);
        let g = QuotientGrid::rasterize(&spec, 0.05).unwrap();
        assert_eq!(g.n_present(), 1);
        let fine = QuotientGrid::rasterize(&spec, 0.005).unwrap().free_area();
        let exact = 1.0 - PI * 0.09;
        assert!((fine - exact).abs() < 0.005 * 2.0 * PI * 0.3);
        assert!((g.free_area() - exact).abs() <= 0.05 * 2.0 * PI * 0.3);
        assert_eq!(g.free_of(0).len() > 0, true);
    }

    #[test]
    fn contracted_count_stable_under_refinement() {
        let spec = DomainSpec::new(
            "three",
            unit(),
            vec![
                PlanarSet::disk(Point::new(0.25, 0.25), 0.1),
                PlanarSet::rect(0.6, 0.9, 0.6, 0.7),
                PlanarSet::disk(Point::new(0.2, 0.8), 0.004),
            ],
        );
        for k in 4..8 {
            let g = QuotientGrid::rasterize(&spec, 1.0 / (1 << k) as f64).unwrap();
            assert_eq!(g.n_present(), 3, "h = 1/{}", 1 << k);
        }
    }

    #[test]
    fn touching_through_grid_is_rejected() {
        let spec = DomainSpec::new(
            "close",
            unit(),
            vec![PlanarSet::rect(0.1, 0.5, 0.1, 0.9), PlanarSet::rect(0.51, 0.9, 0.1, 0.9)],
        );
        assert!(matches!(
            QuotientGrid::rasterize(&spec, 0.05),
            Err(DomainError::SpacingTooCoarse { .. })
        ));
        assert!(QuotientGrid::rasterize(&spec, 0.002).is_ok());
    }

    #[test]
    fn enclosed_pocket_is_disconnected() {
        let ring = PlanarSet::polar_rect(Point::new(0.5, 0.5), 0.2, 0.3, 0.0, 2.0 * PI);
        let spec = DomainSpec::new("ring", unit(), vec![ring]);
        assert!(matches!(
            QuotientGrid::rasterize(&spec, 0.02),
            Err(DomainError::DisconnectedComplement(2))
        ));
    }

    #[test]
    fn opposite_edges_give_columns() {
        let g = QuotientGrid::rasterize(&DomainSpec::new("e", unit(), vec![]), 1.0 / 16.0).unwrap();
        let fam = CurveFamilySpec::new(
            PlanarSet::segment(Point::new(0.0, 0.0), Point::new(0.0, 1.0)),
            PlanarSet::segment(Point::new(1.0, 0.0), Point::new(1.0, 1.0)),
        );
        let ep = g.family_endpoints(&fam).unwrap();
        assert_eq!(ep.sources.len(), 16);
        assert!(ep.sources.iter().all(|&v| g.cell_of(v).0 == 0));
        assert!(ep.sinks.iter().all(|&v| g.cell_of(v).0 == 15));
    }

    #[test]
    fn source_inside_continuum_is_empty() {
        let spec = DomainSpec::new("d", unit(), vec![PlanarSet::disk(Point::new(0.5, 0.5), 0.3)]);
        let g = QuotientGrid::rasterize(&spec, 0.02).unwrap();
        let fam = CurveFamilySpec::new(
            PlanarSet::segment(Point::new(0.45, 0.5), Point::new(0.55, 0.5)),
            PlanarSet::segment(Point::new(1.0, 0.0), Point::new(1.0, 1.0)),
        );
        assert!(matches!(g.family_endpoints(&fam), Err(DomainError::EmptyEndpointSet("source"))));
    }

    #[test]
    fn forbidden_vertices_blocked_and_touching_continua_are_endpoints() {
        let spec = DomainSpec::new(
            "two",
            BBox::new(Point::new(0.0, 0.0), Point::new(2.0, 1.0)),
            vec![PlanarSet::disk(Point::new(0.5, 0.5), 0.2), PlanarSet::disk(Point::new(1.5, 0.5), 0.2)],
        );
        let g = QuotientGrid::rasterize(&spec, 1.0 / 32.0).unwrap();
        let fam = CurveFamilySpec::new(
            PlanarSet::segment(Point::new(0.0, 0.0), Point::new(0.0, 1.0)),
            PlanarSet::segment(Point::new(1.5, 0.5), Point::new(2.0, 0.5)),
        )
        .forbid(vec![0]);
        let ep = g.family_endpoints(&fam).unwrap();
        assert!(ep.blocked[g.contracted_vertex(0) as usize]);
        assert!(ep.is_sink[g.contracted_vertex(1) as usize]);
    }

    #[test]
    fn outer_component_touches_frame() {
        let mut spec = DomainSpec::new("o", unit(), vec![]);
        spec.outer = true;
        let g = QuotientGrid::rasterize(&spec, 0.125).unwrap();
        assert!(g.is_present(0));
        assert_eq!(g.free_of(0).len(), 28);
        let corner = g.free_at(0, 0).unwrap();
        assert_eq!(g.contact_sides(corner), &[2]);
    }
}
