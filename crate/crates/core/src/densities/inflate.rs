use super::DensityError;
use crate::domain::QuotientGrid;
use crate::geom::{disk_lens_area, Point};
use crate::modsolve::MassDistribution;
use serde::{Deserialize, Serialize};

/// Inner ball `B(center, r) ⊂ K_i ⊂ B(center, λr)` of a quasiround continuum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiroundBall {
    pub center: Point,
    pub r: f64,
}

/// `c = (1 + 12λ + 4λ²) / τ`.
pub fn inflation_constant(tau: f64, lambda: f64) -> f64 {
    (1.0 + 12.0 * lambda + 4.0 * lambda * lambda) / tau
}

/// Classical density `g = 2(ρ 1_{Ω∖K} + Σ ρ_i/(λ r_i) 1_{B(x_i, 2λ r_i)})` on
/// `plain`, the grid of the same window with no continua removed. A cell
/// counts as inside a ball when any part of it is.
///
/// Fails with `NotInRegime` when `A_K(ρ) > 1/(4c²)`.
pub fn inflate_density(
    grid: &QuotientGrid,
    rho: &MassDistribution,
    plain: &QuotientGrid,
    balls: &[QuasiroundBall],
    tau: f64,
    lambda: f64,
) -> Result<MassDistribution, DensityError> {
    if !(tau > 0.0 && tau <= 1.0 && lambda >= 1.0) {
        return Err(DensityError::Domain(format!(
            "need tau in (0,1] and lambda >= 1, got tau={tau}, lambda={lambda}"
        )));
    }
    if balls.len() != rho.rho_contracted.len() {
        return Err(DensityError::Domain(format!(
            "{} balls for {} continua",
            balls.len(),
            rho.rho_contracted.len()
        )));
    }
    if (grid.h, grid.nx, grid.ny, grid.origin) != (plain.h, plain.nx, plain.ny, plain.origin) {
        return Err(DensityError::Domain("grids cover different windows".into()));
    }
    let c = inflation_constant(tau, lambda);
    let threshold = 1.0 / (4.0 * c * c);
    let mass = rho.mass(grid);
    if mass > threshold {
        return Err(DensityError::NotInRegime { mass, threshold });
    }
    let half = 0.5 * plain.h;
    let rho_cells = (0..plain.n_free() as u32)
        .map(|f| {
            let (i, j) = plain.cell_of(f);
            let base = grid.free_at(i, j).map_or(0.0, |g| rho.rho_cells[g as usize]);
            let p = plain.center(i, j);
            let bumps: f64 = balls
                .iter()
                .zip(&rho.rho_contracted)
                .filter(|(b, &w)| {
                    let dx = ((p.x - b.center.x).abs() - half).max(0.0);
                    let dy = ((p.y - b.center.y).abs() - half).max(0.0);
                    w > 0.0 && dx.hypot(dy) < 2.0 * lambda * b.r
                })
                .map(|(b, &w)| w / (lambda * b.r))
                .sum();
            2.0 * (base + bumps)
        })
        .collect();
    Ok(MassDistribution {
        rho_cells,
        rho_contracted: vec![0.0; plain.n_contracted()],
    })
}

/// `∫ (Σ a_i 1_{B(x_i, r_i)})² dA`, exactly, through pairwise lens areas.
pub fn ball_sum_l2(balls: &[QuasiroundBall], a: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, (bi, ai)) in balls.iter().zip(a).enumerate() {
        s += ai * ai * std::f64::consts::PI * bi.r * bi.r;
        for (bj, aj) in balls[i + 1..].iter().zip(&a[i + 1..]) {
            s += 2.0 * ai * aj * disk_lens_area(bi.r, bj.r, bi.center.dist(bj.center));
        }
    }
    s
}

/// `∫(Σ a_i 1_{sB_i})² / ∫(Σ a_i 1_{B_i})²`.
pub fn bojarski_ratio(balls: &[QuasiroundBall], a: &[f64], s: f64) -> f64 {
    let grown: Vec<QuasiroundBall> = balls
        .iter()
        .map(|b| QuasiroundBall {
            center: b.center,
            r: s * b.r,
        })
        .collect();
    ball_sum_l2(&grown, a) / ball_sum_l2(balls, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BBox, DomainSpec};
    use crate::geom::PlanarSet;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn balls() -> Vec<QuasiroundBall> {
        vec![
            QuasiroundBall { center: Point::new(0.3, 0.3), r: 0.1 },
            QuasiroundBall { center: Point::new(0.7, 0.6), r: 0.15 },
        ]
    }

    #[test]
    fn disjoint_balls_integral_by_quadrature() {
        let b = balls();
        let a = [2.0, 0.5];
        let exact = ball_sum_l2(&b, &a);
        let pi = std::f64::consts::PI;
        assert!((exact - pi * (4.0 * 0.01 + 0.25 * 0.0225)).abs() < 1e-12);
        let n = 2000;
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                let p = Point::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                let v: f64 = b.iter().zip(&a).filter(|(b, _)| p.dist(b.center) < b.r).map(|(_, a)| a).sum();
                q += v * v;
            }
        }
        q /= (n * n) as f64;
        assert!((q - exact).abs() < 1e-3 * exact, "{q} {exact}");
    }

    #[test]
    fn doubling_ratio_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let mut b: Vec<QuasiroundBall> = Vec::new();
            while b.len() < 6 {
                let c = Point::new(rng.random::<f64>(), rng.random::<f64>());
                let r = rng.random_range(0.01..0.1);
                if b.iter().all(|o| o.center.dist(c) > o.r + r) {
                    b.push(QuasiroundBall { center: c, r });
                }
            }
            let a: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let ratio = bojarski_ratio(&b, &a, 2.0);
            assert!(ratio >= 1.0);
            worst = worst.max(ratio);
        }
        assert!(worst < 4.0 * 6.0, "{worst}");
    }

    #[test]
    fn zero_weights_double_the_density() {
        let spec = DomainSpec::new(
            "d",
            BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
            vec![PlanarSet::disk(Point::new(0.5, 0.5), 0.1)],
        );
        let g = QuotientGrid::rasterize(&spec, 1.0 / 16.0).unwrap();
        let plain = QuotientGrid::rasterize(&DomainSpec::new("p", spec.ambient, vec![]), 1.0 / 16.0).unwrap();
        let rho = MassDistribution::uniform(&g, 0.005, 0.0);
        let b = [QuasiroundBall { center: Point::new(0.5, 0.5), r: 0.1 }];
        let out = inflate_density(&g, &rho, &plain, &b, 0.25, 1.0).unwrap();
        for f in 0..plain.n_free() as u32 {
            let (i, j) = plain.cell_of(f);
            let want = if g.free_at(i, j).is_some() { 0.01 } else { 0.0 };
            assert_eq!(out.rho_cells[f as usize], want);
        }
        let heavy = MassDistribution::uniform(&g, 1.0, 0.0);
        assert!(matches!(
            inflate_density(&g, &heavy, &plain, &b, 0.25, 1.0),
            Err(DensityError::NotInRegime { .. })
        ));
    }

    #[test]
    fn weights_spread_over_doubled_ball() {
        let spec = DomainSpec::new(
            "d",
            BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
            vec![PlanarSet::disk(Point::new(0.5, 0.5), 0.1)],
        );
        let g = QuotientGrid::rasterize(&spec, 1.0 / 32.0).unwrap();
        let plain = QuotientGrid::rasterize(&DomainSpec::new("p", spec.ambient, vec![]), 1.0 / 32.0).unwrap();
        let mut rho = MassDistribution::zeros(&g);
        rho.rho_contracted[0] = 1e-5;
        let b = [QuasiroundBall { center: Point::new(0.5, 0.5), r: 0.1 }];
        let out = inflate_density(&g, &rho, &plain, &b, 0.25, 1.0).unwrap();
        let at = |x: f64, y: f64| {
            let f = plain.free_at((x * 32.0) as usize, (y * 32.0) as usize).unwrap();
            out.rho_cells[f as usize]
        };
        assert!((at(0.5, 0.5) - 2e-4).abs() < 1e-15);
        assert!((at(0.68, 0.5) - 2e-4).abs() < 1e-15);
        assert_eq!(at(0.9, 0.9), 0.0);
    }
}
