use super::network::{Network, Oracle};
use super::MassDistribution;
use crate::domain::{Endpoints, QuotientGrid, MOVES};

/// A grid path with its length functional `ℓ = Σ coeff · w[var]`, where `w`
/// is `h·ρ` on free cells and `ρ_i` on contracted vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct PathConstraint {
    pub vertices: Vec<u32>,
    /// Sorted by variable, merged.
    pub coeffs: Vec<(u32, f64)>,
}

impl PathConstraint {
    /// Build the constraint of a vertex sequence. Each step into or out of a
    /// free cell costs half a cell length there, and the two end cells pay
    /// the half that joins them to their endpoint sets.
    pub fn from_vertices(grid: &QuotientGrid, vertices: Vec<u32>) -> Result<Self, String> {
        if vertices.is_empty() {
            return Err("empty path".into());
        }
        let nf = grid.n_free() as u32;
        let mut raw: Vec<(u32, f64)> = Vec::new();
        for w in vertices.windows(2) {
            let (u, v) = (w[0], w[1]);
            match (u < nf, v < nf) {
                (true, true) => {
                    if !(0..MOVES.len()).any(|d| grid.move_target(u, d) == Some(v)) {
                        return Err(format!("cells {u} and {v} are not adjacent"));
                    }
                    raw.push((u, 0.5));
                    raw.push((v, 0.5));
                }
                (true, false) => {
                    if !grid.contracted_of(u).contains(&(v - nf)) {
                        return Err(format!("cell {u} is not adjacent to continuum {}", v - nf));
                    }
                    raw.push((u, 0.5));
                }
                (false, true) => {
                    if !grid.contracted_of(v).contains(&(u - nf)) {
                        return Err(format!("cell {v} is not adjacent to continuum {}", u - nf));
                    }
                    raw.push((v, 0.5));
                }
                (false, false) => return Err("consecutive contracted vertices".into()),
            }
        }
        for &v in &vertices {
            if v >= nf {
                raw.push((v, 1.0));
            }
        }
        for end in [vertices[0], *vertices.last().unwrap()] {
            if end < nf {
                raw.push((end, 0.5));
            }
        }
        raw.sort_by_key(|p| p.0);
        let mut coeffs: Vec<(u32, f64)> = Vec::with_capacity(raw.len());
        for (i, c) in raw {
            match coeffs.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => coeffs.push((i, c)),
            }
        }
        Ok(PathConstraint { vertices, coeffs })
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, c)| c * z[i as usize]).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs.iter().map(|&(_, c)| c * c).sum()
    }
}

/// `ℓ_ρ(γ ∖ K) + Σ_{k_i ∈ γ} ρ_i` for a grid path.
pub fn transboundary_length(grid: &QuotientGrid, rho: &MassDistribution, path: &PathConstraint) -> f64 {
    let nf = grid.n_free() as u32;
    path.coeffs
        .iter()
        .map(|&(i, c)| {
            if i < nf {
                c * grid.h * rho.rho_cells[i as usize]
            } else {
                c * rho.rho_contracted[(i - nf) as usize]
            }
        })
        .sum()
}

/// Minimum-length source-to-sink path under `rho`, with its length; `None`
/// when the family has no path on the grid.
pub fn shortest_path(grid: &QuotientGrid, rho: &MassDistribution, ep: &Endpoints) -> Option<(PathConstraint, f64)> {
    let net = Network::new(grid, std::slice::from_ref(ep));
    let x = net.lengths_of(rho);
    let mut oracle = Oracle::new(grid.n_vertices());
    let &(len, _, t) = oracle.search(&net, ep, &x, 0.0).first()?;
    let path = oracle.trace(&net, t);
    let path = PathConstraint::from_vertices(grid, path.vertices).expect("search tree paths are valid");
    Some((path, len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BBox, CurveFamilySpec, DomainSpec};
    use crate::geom::{PlanarSet, Point};

    fn unit_grid(h: f64) -> QuotientGrid {
        QuotientGrid::rasterize(
            &DomainSpec::new("u", BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)), vec![]),
            h,
        )
        .unwrap()
    }

    fn lr() -> CurveFamilySpec {
        CurveFamilySpec::new(
            PlanarSet::segment(Point::new(0.0, 0.0), Point::new(0.0, 1.0)),
            PlanarSet::segment(Point::new(1.0, 0.0), Point::new(1.0, 1.0)),
        )
    }

    #[test]
    fn straight_path_has_unit_length() {
        let g = unit_grid(1.0 / 16.0);
        let row: Vec<u32> = (0..16).map(|i| g.free_at(i, 3).unwrap()).collect();
        let p = PathConstraint::from_vertices(&g, row).unwrap();
        let ones = MassDistribution::uniform(&g, 1.0, 0.0);
        assert!((transboundary_length(&g, &ones, &p) - 1.0).abs() < 1e-14);
        let zero = MassDistribution::zeros(&g);
        assert_eq!(transboundary_length(&g, &zero, &p), 0.0);
    }

    #[test]
    fn contracted_weight_counts_once() {
        let spec = DomainSpec::new(
            "k",
            BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
            vec![PlanarSet::rect(0.25, 0.75, 0.25, 0.75)],
        );
        let g = QuotientGrid::rasterize(&spec, 1.0 / 8.0).unwrap();
        let a = g.free_at(1, 3).unwrap();
        let b = g.free_at(6, 3).unwrap();
        let k = g.contracted_vertex(0);
        let p = PathConstraint::from_vertices(&g, vec![a, k, b]).unwrap();
        let mut rho = MassDistribution::zeros(&g);
        rho.rho_contracted[0] = 1.0;
        assert_eq!(transboundary_length(&g, &rho, &p), 1.0);
    }

    #[test]
    fn uniform_density_crossing() {
        let g = unit_grid(1.0 / 64.0);
        let ep = g.family_endpoints(&lr()).unwrap();
        let (p, len) = shortest_path(&g, &MassDistribution::uniform(&g, 1.0, 0.0), &ep).unwrap();
        assert!((len - 1.0).abs() < 1e-12);
        assert_eq!(p.vertices.len(), 64);
        let (_, zero) = shortest_path(&g, &MassDistribution::zeros(&g), &ep).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn diagonal_crossing_is_manhattan() {
        let g = unit_grid(1.0 / 64.0);
        let fam = CurveFamilySpec::new(
            PlanarSet::point(Point::new(0.5 / 64.0, 0.5 / 64.0)),
            PlanarSet::point(Point::new(1.0 - 0.5 / 64.0, 1.0 - 0.5 / 64.0)),
        );
        let ep = g.family_endpoints(&fam).unwrap();
        let (p, len) = shortest_path(&g, &MassDistribution::uniform(&g, 1.0, 0.0), &ep).unwrap();
        assert!((len - 127.0 / 64.0).abs() < 1e-12, "{len}");
        assert_eq!(p.vertices.len(), 127);
    }

    #[test]
    fn rejects_non_adjacent_cells() {
        let g = unit_grid(1.0 / 8.0);
        let p = PathConstraint::from_vertices(&g, vec![g.free_at(0, 0).unwrap(), g.free_at(1, 1).unwrap()]);
        assert!(p.is_err());
    }

    #[test]
    fn forbidden_bridge_leaves_no_path() {
        // The wall spans the window; the two halves meet only outside it.
        let spec = DomainSpec::new(
            "wall",
            BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
            vec![PlanarSet::rect(0.45, 0.55, 0.0, 1.0)],
        );
        let g = QuotientGrid::rasterize(&spec, 1.0 / 32.0).unwrap();
        let ep = g.family_endpoints(&lr()).unwrap();
        let (p, len) = shortest_path(&g, &MassDistribution::uniform(&g, 1.0, 0.5), &ep).unwrap();
        assert!(p.vertices.contains(&g.contracted_vertex(0)));
        assert!((len - (0.5 + 28.0 / 32.0)).abs() < 1e-9, "{len}");
        let ep = g.family_endpoints(&lr().forbid(vec![0])).unwrap();
        assert!(shortest_path(&g, &MassDistribution::uniform(&g, 1.0, 0.5), &ep).is_none());
    }
}
