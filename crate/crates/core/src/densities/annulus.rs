use super::DensityError;
use crate::domain::{BBox, CurveFamilySpec, DomainSpec, QuotientGrid};
use crate::geom::measure::polar_integral;
use crate::geom::{relative_distance, Annulus, PlanarSet, Point};
use crate::modsolve::MassDistribution;
use crate::quad;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// `(2π + 32) / log(14)^{2/3} + 32`.
pub const PHI_CONSTANT: f64 = 52.046_667_283_845_75;

/// Smallest relative distance at which the subannulus search is attempted.
const MIN_DELTA: f64 = 2744.0;

/// The logarithmic density `1/(L |x - z|)` on `A' = A[x, r', R']`,
/// `L = log(R'/r')`, with weight `w_{A'}(K_i) / L` on each continuum outside
/// the forbidden set `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusCertificate {
    pub annulus: Annulus,
    /// `J`, at most two continuum indices.
    pub forbidden: Vec<usize>,
    /// One weight per contracted vertex of the domain.
    pub weights: Vec<f64>,
    pub delta: f64,
    /// True when `log Δ > log(14)^27`, the range in which every narrowing
    /// stage provably keeps the ratio above 14.
    pub guaranteed: bool,
}

/// A certificate's family posed on a window around `B[x, R']`.
#[derive(Clone, Debug)]
pub struct LocalProblem {
    pub spec: DomainSpec,
    pub family: CurveFamilySpec,
    /// Index of each local contracted vertex in the original domain.
    pub index: Vec<usize>,
}

/// Radial reach `[inf |x - y|, sup |x - y|]` over `y ∈ K_k`. For `K₀` this
/// is the complement of the ambient box.
fn reach(spec: &DomainSpec, k: usize, x: Point) -> (f64, f64) {
    match spec.continua.get(k) {
        Some(c) => (c.dist_point(x), c.far_dist(x)),
        None => {
            let a = &spec.ambient;
            let inner = (x.x - a.min.x).min(a.max.x - x.x).min(x.y - a.min.y).min(a.max.y - x.y);
            (inner.max(0.0), f64::INFINITY)
        }
    }
}

/// `[r^A_C, R^A_C]`, or `None` when `C` misses `A`.
fn clipped(a: &Annulus, (lo, hi): (f64, f64)) -> Option<(f64, f64)> {
    let tol = 1e-12 * a.big_r;
    if lo > a.big_r + tol || hi < a.r - tol {
        return None;
    }
    Some((lo.max(a.r), hi.min(a.big_r)))
}

fn width(a: &Annulus, r: (f64, f64)) -> f64 {
    match clipped(a, r) {
        Some((lo, hi)) if hi > lo => (hi / lo).ln(),
        _ => 0.0,
    }
}

/// Point of `E` from which the annuli are drawn: the lexicographically
/// smaller end of a diameter.
fn base_point(e: &PlanarSet) -> Point {
    let (_, p, q) = e.diam_pair();
    if p.lex_cmp(&q).is_le() {
        p
    } else {
        q
    }
}

/// Narrow `A[x, diam E, dist(E, F)]` at most twice around a wide continuum.
/// `Ok(None)` means a third wide continuum appeared, which is impossible for
/// disjoint disks.
pub fn find_wide_subannulus(
    spec: &DomainSpec,
    e: &PlanarSet,
    f: &PlanarSet,
) -> Result<Option<AnnulusCertificate>, DensityError> {
    let delta = relative_distance(e, f)?;
    if delta <= MIN_DELTA {
        return Err(DensityError::NotApplicable(delta));
    }
    let (e, f) = if e.diam() <= f.diam() { (e, f) } else { (f, e) };
    let x = base_point(e);
    let mut ann = Annulus::new(x, e.diam(), e.dist(f))?;
    let n = spec.n_contracted();
    let reaches: Vec<(f64, f64)> = (0..n).map(|k| reach(spec, k, x)).collect();
    let mut forbidden: Vec<usize> = Vec::new();
    loop {
        let thr = ann.log_ratio().ln() / 3.0;
        // Widest offender, ties to the lower index; near-ties count as wide.
        let wide = (0..n)
            .filter(|k| !forbidden.contains(k))
            .map(|k| (k, width(&ann, reaches[k])))
            .filter(|&(_, w)| w > 0.0 && w.ln() > thr - 1e-12)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((d, _)) = wide else { break };
        if forbidden.len() == 2 {
            return Ok(None);
        }
        let (lo, hi) = clipped(&ann, reaches[d]).expect("wide continuum meets the annulus");
        forbidden.push(d);
        ann = Annulus::new(x, lo, hi)?;
    }
    let l = ann.log_ratio();
    let weights = (0..n)
        .map(|k| if forbidden.contains(&k) { 0.0 } else { width(&ann, reaches[k]) / l })
        .collect();
    Ok(Some(AnnulusCertificate {
        annulus: ann,
        forbidden,
        weights,
        delta,
        guaranteed: delta.ln() > 14f64.ln().powi(27),
    }))
}

/// `2π/L + 32/L + 32/L^{1/3}`.
pub fn reference_mass_bound(l: f64) -> f64 {
    (TAU + 32.0) / l + 32.0 / l.cbrt()
}

/// `Φ(t) = (log t)^{-1/27} · PHI_CONSTANT`.
pub fn phi(t: f64) -> Result<f64, DensityError> {
    if !(t > 1.0) {
        return Err(DensityError::Domain(format!("phi needs t > 1, got {t}")));
    }
    Ok(t.ln().powf(-1.0 / 27.0) * PHI_CONSTANT)
}

/// `A_K(ϱ) = ∫_{A'∖K} ρ² + Σ ρ_i²`, the radial integral in closed form
/// minus the part of each continuum inside `A'`.
pub fn certificate_mass(cert: &AnnulusCertificate, spec: &DomainSpec) -> f64 {
    let a = &cert.annulus;
    let l = a.log_ratio();
    let clip = |s: f64, t: f64| {
        let (lo, hi) = (s.max(a.r), t.min(a.big_r));
        if hi > lo {
            (hi / lo).ln()
        } else {
            0.0
        }
    };
    let tol = 1e-6 * l;
    let mut inside_k = 0.0;
    for (k, c) in spec.continua.iter().enumerate() {
        if !c.has_interior() || clipped(a, reach(spec, k, a.center)).is_none() {
            continue;
        }
        inside_k += polar_integral(c, &c.boundary(), a.center, clip, tol);
    }
    if let Some(o) = spec.outer_index() {
        if clipped(a, reach(spec, o, a.center)).is_some() {
            let b = spec.ambient;
            let exit = |th: f64| {
                let d = Point::polar(th);
                let tx = if d.x > 0.0 { (b.max.x - a.center.x) / d.x } else if d.x < 0.0 { (b.min.x - a.center.x) / d.x } else { f64::INFINITY };
                let ty = if d.y > 0.0 { (b.max.y - a.center.y) / d.y } else if d.y < 0.0 { (b.min.y - a.center.y) / d.y } else { f64::INFINITY };
                clip(tx.min(ty).max(0.0), f64::INFINITY)
            };
            inside_k += quad::integrate(&exit, 0.0, TAU, 64, tol);
        }
    }
    (TAU * l - inside_k) / (l * l) + cert.weights.iter().map(|w| w * w).sum::<f64>()
}

impl AnnulusCertificate {
    pub fn log_ratio(&self) -> f64 {
        self.annulus.log_ratio()
    }

    pub fn density_at(&self, z: Point) -> f64 {
        if self.annulus.contains(z) {
            1.0 / (self.log_ratio() * z.dist(self.annulus.center))
        } else {
            0.0
        }
    }

    pub fn reference_bound(&self) -> f64 {
        reference_mass_bound(self.log_ratio())
    }

    /// `Γ(E', F'; Ω' ∖ J)` with `E' = B[x, r']` and `F'` outside `B(x, R')`.
    pub fn family(&self) -> CurveFamilySpec {
        let a = &self.annulus;
        CurveFamilySpec::new(PlanarSet::circle(a.center, a.r), PlanarSet::circle(a.center, a.big_r))
            .forbid(self.forbidden.clone())
    }

    /// The family on a box around `B[x, R']` holding only the continua that
    /// meet that ball, so the grid need not cover the whole domain. Falls back
    /// to the full domain when the ball leaves the ambient box.
    pub fn local_problem(&self, spec: &DomainSpec) -> LocalProblem {
        let a = &self.annulus;
        let pad = 0.05 * a.big_r;
        let (mut lo, mut hi) = (
            Point::new(a.center.x - a.big_r - pad, a.center.y - a.big_r - pad),
            Point::new(a.center.x + a.big_r + pad, a.center.y + a.big_r + pad),
        );
        if !(spec.ambient.contains(lo) && spec.ambient.contains(hi)) {
            return LocalProblem {
                spec: spec.clone(),
                family: self.family(),
                index: (0..spec.n_contracted()).collect(),
            };
        }
        let index: Vec<usize> = (0..spec.continua.len())
            .filter(|&k| spec.continua[k].dist_point(a.center) <= a.big_r)
            .collect();
        for &k in &index {
            let (p, q) = spec.continua[k].bbox();
            lo = Point::new(lo.x.min(p.x - pad), lo.y.min(p.y - pad));
            hi = Point::new(hi.x.max(q.x + pad), hi.y.max(q.y + pad));
        }
        let mut local = DomainSpec::new(
            &format!("{}-local", spec.label),
            BBox::new(lo, hi),
            index.iter().map(|&k| spec.continua[k].clone()).collect(),
        );
        local.points = spec.points.iter().copied().filter(|p| local.ambient.contains(*p)).collect();
        let forbidden = self
            .forbidden
            .iter()
            .filter_map(|j| index.iter().position(|k| k == j))
            .collect();
        LocalProblem {
            family: CurveFamilySpec::new(PlanarSet::circle(a.center, a.r), PlanarSet::circle(a.center, a.big_r))
                .forbid(forbidden),
            spec: local,
            index,
        }
    }

    /// Grid version of the density: each free cell meeting `A'` takes the
    /// supremum of `ρ` over the cell, so polygonal paths through cell
    /// centres are no shorter than in the continuum. `index` maps the grid's
    /// contracted vertices to the certificate's.
    pub fn discretize(&self, grid: &QuotientGrid, index: &[usize]) -> MassDistribution {
        let a = &self.annulus;
        let l = self.log_ratio();
        let half = 0.5 * grid.h;
        let rho_cells = (0..grid.n_free() as u32)
            .map(|f| {
                let c = grid.free_center(f);
                let dx = ((c.x - a.center.x).abs() - half).max(0.0);
                let dy = ((c.y - a.center.y).abs() - half).max(0.0);
                let near = dx.hypot(dy);
                let far = ((c.x - a.center.x).abs() + half).hypot((c.y - a.center.y).abs() + half);
                if near > a.big_r || far < a.r {
                    0.0
                } else {
                    1.0 / (l * near.max(a.r))
                }
            })
            .collect();
        let rho_contracted = index.iter().map(|&k| self.weights[k]).collect();
        MassDistribution {
            rho_cells,
            rho_contracted,
        }
    }
}
