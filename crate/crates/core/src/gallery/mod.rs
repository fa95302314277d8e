//! Generators for the extremal domains: separation failure by nearly
//! touching squares, the slit ring, twin squares, kissing disks, and random
//! separated circle domains.

use crate::domain::{BBox, CurveFamilySpec, DomainSpec};
use crate::geom::{relative_distance, PlanarSet, Point};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GalleryError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("placed {placed} of {count} disks before giving up")]
    PackingFailed { placed: usize, count: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBound {
    pub kind: BoundKind,
    pub value: f64,
    /// Where the number comes from, in words.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCase {
    pub name: String,
    pub domain: DomainSpec,
    pub family: CurveFamilySpec,
    pub reference_bound: ReferenceBound,
    pub n: u32,
    /// `Δ(E, F)` of the unthickened connecting sets.
    pub delta: f64,
    /// Grid spacing at which the case is meant to be solved.
    pub h: f64,
}

impl ScenarioCase {
    /// Write `<name>.domain.json` and `<name>.family.json` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<(PathBuf, PathBuf), GalleryError> {
        let io = |path: &Path| {
            let p = path.display().to_string();
            move |source| GalleryError::Io { path: p, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let d = dir.join(format!("{}.domain.json", self.name));
        let f = dir.join(format!("{}.family.json", self.name));
        std::fs::write(&d, self.domain.to_json() + "\n").map_err(io(&d))?;
        std::fs::write(&f, self.family.to_json() + "\n").map_err(io(&f))?;
        Ok((d, f))
    }
}

/// `ε_k = 1/(k+2)`.
pub fn bonk_epsilon(k: u32) -> f64 {
    1.0 / (k as f64 + 2.0)
}

/// `Q_k = [k, k+1-ε_k] × [0, 1-ε_k]`.
pub fn bonk_square(k: u32) -> PlanarSet {
    let e = bonk_epsilon(k);
    PlanarSet::rect(k as f64, k as f64 + 1.0 - e, 0.0, 1.0 - e)
}

/// `(1/n)/(1/8) + (1/n)/(1/4) + (1/n)/(1/8)`-type bound for a channel of
/// width `w` and height `height` split into bands at eighths.
fn channel_bound(w: f64, height: f64) -> f64 {
    w / (height / 8.0) + w / (height / 4.0) + w / (height / 8.0)
}

/// Squares `Q_1 … Q_{n+1}`, so that the gap of width `ε_n` after `Q_n` has
/// both walls. The family joins two vertical segments stacked in that gap
/// and may not enter `Q_n` or `Q_{n+1}`; every such curve crosses one of
/// three bands of the gap lengthwise.
pub fn bonk_squares(n: u32) -> Result<ScenarioCase, GalleryError> {
    if n < 1 {
        return Err(GalleryError::Parameter(format!("bonk_squares needs n >= 1, got {n}")));
    }
    let e = bonk_epsilon(n);
    let height = 1.0 - e;
    let x = n as f64 + 1.0 - 0.5 * e;
    let src = PlanarSet::segment(Point::new(x, height / 8.0), Point::new(x, 3.0 * height / 8.0));
    let snk = PlanarSet::segment(Point::new(x, 5.0 * height / 8.0), Point::new(x, 7.0 * height / 8.0));
    let squares: Vec<PlanarSet> = (1..=n + 1).map(bonk_square).collect();
    let ambient = BBox::new(Point::new(0.5, -0.75), Point::new(n as f64 + 2.5, 1.75));
    let delta = relative_distance(&src, &snk).expect("disjoint segments");
    Ok(ScenarioCase {
        name: format!("bonk_{n}"),
        domain: DomainSpec::new(&format!("bonk_{n}"), ambient, squares),
        family: CurveFamilySpec::new(src, snk).forbid(vec![n as usize - 1, n as usize]),
        reference_bound: ReferenceBound {
            kind: BoundKind::Upper,
            value: channel_bound(e, height),
            source: "three bands of the gap after Q_n: 20 ε_n / (1 - ε_n)".into(),
        },
        n,
        delta,
        h: (e / 16.0).min(1.0 / 64.0),
    })
}

/// The ring `1 ≤ |z - c| ≤ 2` missing the angle `2π - 1/n ≤ θ`, centred at
/// `c = (6n, 0)`, with the circles of radius 0.9 and 2.1 as connecting sets.
/// The ring is forbidden, so curves pass through the slit.
pub fn polar_rectangle_domain(n: u32) -> Result<ScenarioCase, GalleryError> {
    if n < 1 {
        return Err(GalleryError::Parameter(format!("polar_rectangle_domain needs n >= 1, got {n}")));
    }
    let c = Point::new(6.0 * n as f64, 0.0);
    let ring = PlanarSet::polar_rect(c, 1.0, 2.0, 0.0, 2.0 * PI - 1.0 / n as f64);
    let src = PlanarSet::circle(c, 0.9);
    let snk = PlanarSet::circle(c, 2.1);
    let m = 2.4;
    let ambient = BBox::new(Point::new(c.x - m, c.y - m), Point::new(c.x + m, c.y + m));
    let delta = relative_distance(&src, &snk).expect("disjoint circles");
    Ok(ScenarioCase {
        name: format!("polar_rect_{n}"),
        domain: DomainSpec::new(&format!("polar_rect_{n}"), ambient, vec![ring]),
        family: CurveFamilySpec::new(src, snk).forbid(vec![0]),
        reference_bound: ReferenceBound {
            kind: BoundKind::Upper,
            value: (1.0 / n as f64) / LN_2,
            source: "slit of angle 1/n in the ring 1 <= r <= 2: (1/n)/log 2".into(),
        },
        n,
        delta,
        h: 1.0 / 128.0,
    })
}

/// `S_n = [3n, 3n+1] × [0,1]`, `T_n = [3n+1+1/n, 3n+2+1/n] × [0,1]`, and two
/// vertical segments in the gap between them.
pub fn twin_squares_domain(n: u32) -> Result<ScenarioCase, GalleryError> {
    if n < 2 {
        return Err(GalleryError::Parameter(format!("twin_squares_domain needs n >= 2, got {n}")));
    }
    let (nf, w) = (n as f64, 1.0 / n as f64);
    let s = PlanarSet::rect(3.0 * nf, 3.0 * nf + 1.0, 0.0, 1.0);
    let t = PlanarSet::rect(3.0 * nf + 1.0 + w, 3.0 * nf + 2.0 + w, 0.0, 1.0);
    let x = 3.0 * nf + 1.0 + 0.5 * w;
    let src = PlanarSet::segment(Point::new(x, 0.125), Point::new(x, 0.375));
    let snk = PlanarSet::segment(Point::new(x, 0.625), Point::new(x, 0.875));
    let ambient = BBox::new(Point::new(3.0 * nf - 0.5, -0.75), Point::new(3.0 * nf + 2.5 + w, 1.75));
    let delta = relative_distance(&src, &snk).expect("disjoint segments");
    Ok(ScenarioCase {
        name: format!("twin_squares_{n}"),
        domain: DomainSpec::new(&format!("twin_squares_{n}"), ambient, vec![s, t]),
        family: CurveFamilySpec::new(src, snk).forbid(vec![0, 1]),
        reference_bound: ReferenceBound {
            kind: BoundKind::Upper,
            value: 20.0 / nf,
            source: "three bands of the gap: 8/n + 4/n + 8/n".into(),
        },
        n,
        delta,
        h: 1.0 / 128.0,
    })
}

/// Geometry of a kissing pair: unit-diameter disks centred on the x-axis at
/// relative distance `Δ`, and the good rectangles between them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KissingGeometry {
    pub delta: f64,
    /// `diam(C) √(1 - (1 - Δ)²)`.
    pub alpha: f64,
    /// Width of the α-good rectangle.
    pub w: f64,
    pub c_center: Point,
    pub d_center: Point,
}

impl KissingGeometry {
    pub fn new(delta: f64) -> Self {
        let alpha = (1.0 - (1.0 - delta).powi(2)).sqrt();
        let d_center = Point::new(1.0 + delta, 0.0);
        let mut g = KissingGeometry {
            delta,
            alpha,
            w: 0.0,
            c_center: Point::ORIGIN,
            d_center,
        };
        g.w = g.good_rect(alpha).1 - g.good_rect(alpha).0;
        g
    }

    /// `[x_left, x_right]` of the `a`-good rectangle, whose half-height is `a/2`.
    pub fn good_rect(&self, a: f64) -> (f64, f64) {
        let x = (0.25 - 0.25 * a * a).max(0.0).sqrt();
        (self.c_center.x + x, self.d_center.x - x)
    }

    /// `(160/π) √(Δ/(2-Δ))`.
    pub fn sharp_bound(&self) -> f64 {
        160.0 / PI * (self.delta / (2.0 - self.delta)).sqrt()
    }
}

/// `(160/π) √(1/(2n-1))`.
pub fn kissing_bound(n: u32) -> f64 {
    160.0 / PI * (1.0 / (2.0 * n as f64 - 1.0)).sqrt()
}

/// Disks `C_n`, `D_n` of diameter 1 at relative distance `1/(n+1)`. `E_n`
/// joins the top edges of the `3α/4`- and `α/4`-good rectangles, `F_n` the
/// bottom edges, both along the vertical through the middle of the gap.
pub fn kissing_disks_domain(n: u32) -> Result<ScenarioCase, GalleryError> {
    if n < 1 {
        return Err(GalleryError::Parameter(format!("kissing_disks_domain needs n >= 1, got {n}")));
    }
    let g = KissingGeometry::new(1.0 / (n as f64 + 1.0));
    let a = g.alpha;
    let x = 0.5 * (g.c_center.x + g.d_center.x);
    let src = PlanarSet::segment(Point::new(x, a / 8.0), Point::new(x, 3.0 * a / 8.0));
    let snk = PlanarSet::segment(Point::new(x, -3.0 * a / 8.0), Point::new(x, -a / 8.0));
    let c = PlanarSet::disk(g.c_center, 0.5);
    let d = PlanarSet::disk(g.d_center, 0.5);
    let ambient = BBox::new(Point::new(-0.75, -0.75), Point::new(g.d_center.x + 0.75, 0.75));
    let delta = relative_distance(&src, &snk).expect("disjoint segments");
    // Resolve the gap by at least 16 cells.
    let h = (1.0 / 128.0f64).min(g.delta / 16.0);
    let h = 1.0 / (1.0 / h).ceil();
    Ok(ScenarioCase {
        name: format!("kissing_{n}"),
        domain: DomainSpec::new(&format!("kissing_{n}"), ambient, vec![c, d]),
        family: CurveFamilySpec::new(src, snk).forbid(vec![0, 1]),
        reference_bound: ReferenceBound {
            kind: BoundKind::Upper,
            value: kissing_bound(n),
            source: "good rectangles between nearly touching disks: (160/pi) sqrt(1/(2n-1))".into(),
        },
        n,
        delta,
        h,
    })
}

/// A random circle domain in the unit box with its smallest pairwise
/// relative distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleDomain {
    pub spec: DomainSpec,
    pub separation: f64,
}

/// Rejection-sample `count` disks in the unit box with pairwise relative
/// distance above `c`. Radii are uniform in `[0.02, 0.1]`; each disk keeps
/// a margin of its own radius from the box.
pub fn circle_domain_random(seed: u64, count: usize, c: f64) -> Result<CircleDomain, GalleryError> {
    if count < 1 || !(c > 0.0) {
        return Err(GalleryError::Parameter(format!("need count >= 1 and c > 0, got {count}, {c}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disks: Vec<PlanarSet> = Vec::with_capacity(count);
    let mut tries = 0;
    while disks.len() < count {
        tries += 1;
        if tries > 2000 * count {
            return Err(GalleryError::PackingFailed {
                placed: disks.len(),
                count,
            });
        }
        let r = rng.random_range(0.02..0.1);
        let p = Point::new(rng.random_range(2.0 * r..1.0 - 2.0 * r), rng.random_range(2.0 * r..1.0 - 2.0 * r));
        let cand = PlanarSet::disk(p, r);
        if disks.iter().all(|d| d.dist(&cand) > c * 2.0 * r.min(d.diam() / 2.0)) {
            disks.push(cand);
        }
    }
    let mut separation = f64::INFINITY;
    for i in 0..disks.len() {
        for j in (i + 1)..disks.len() {
            separation = separation.min(relative_distance(&disks[i], &disks[j]).expect("separated disks"));
        }
    }
    let unit = BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
    Ok(CircleDomain {
        spec: DomainSpec::new(&format!("circles_{seed}_{count}"), unit, disks),
        separation,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Every generator at a few parameters, for listing and fixture export.
pub fn corpus() -> Vec<ScenarioCase> {
    let mut out = Vec::new();
    for n in [1, 3] {
        out.push(bonk_squares(n).expect("valid n"));
    }
    for n in [2, 5, 10, 20] {
        out.push(polar_rectangle_domain(n).expect("valid n"));
    }
    for n in [2, 5, 10, 20] {
        out.push(twin_squares_domain(n).expect("valid n"));
    }
    for n in [2, 8, 32] {
        out.push(kissing_disks_domain(n).expect("valid n"));
    }
    out
}
