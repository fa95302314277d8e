//! Planar primitives and the geometric functionals of the modulus estimates:
//! relative distance, fatness, quasiroundness, annular width and the two
//! counting bounds.

pub(crate) mod measure;
mod point;
pub(crate) mod prim;

pub use measure::{
    annular_width, count_crossing_disks, count_fat_meeting, disk_lens_area, fat_count_bound,
    is_tau_fat, quasiroundness, relative_distance, FatnessReport,
};
pub use point::Point;

use prim::{prim_dist, prim_far_pair, Arc, Prim, EPS};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate continuum: diameter is zero")]
    DegenerateContinuum,
    #[error("sets are not disjoint")]
    NotDisjoint,
    #[error("set has empty interior")]
    EmptyInterior,
    #[error("disks {0} and {1} overlap")]
    OverlappingDisks(usize, usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid set: {0}")]
    InvalidSet(String),
}

/// A compact connected subset of the plane.
///
/// `Segment` and `Circle` are one-dimensional continua; they are used for the
/// connecting sets of curve families, never as complementary components that
/// must capture area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanarSet {
    Disk {
        center: Point,
        radius: f64,
    },
    Point {
        at: Point,
    },
    AxisRect {
        corner: Point,
        width: f64,
        height: f64,
    },
    PolarRect {
        center: Point,
        r_in: f64,
        r_out: f64,
        theta_min: f64,
        theta_max: f64,
    },
    Polygon {
        vertices: Vec<Point>,
    },
    Segment {
        a: Point,
        b: Point,
    },
    Circle {
        center: Point,
        radius: f64,
    },
}

impl PlanarSet {
    pub fn disk(center: Point, radius: f64) -> Self {
        PlanarSet::Disk { center, radius }
    }

    pub fn point(at: Point) -> Self {
        PlanarSet::Point { at }
    }

    pub fn axis_rect(corner: Point, width: f64, height: f64) -> Self {
        PlanarSet::AxisRect {
            corner,
            width,
            height,
        }
    }

    /// Rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        PlanarSet::axis_rect(Point::new(x0, y0), x1 - x0, y1 - y0)
    }

    pub fn polar_rect(center: Point, r_in: f64, r_out: f64, theta_min: f64, theta_max: f64) -> Self {
        PlanarSet::PolarRect {
            center,
            r_in,
            r_out,
            theta_min,
            theta_max,
        }
    }

    pub fn polygon(vertices: Vec<Point>) -> Self {
        PlanarSet::Polygon { vertices }
    }

    pub fn segment(a: Point, b: Point) -> Self {
        PlanarSet::Segment { a, b }
    }

    pub fn circle(center: Point, radius: f64) -> Self {
        PlanarSet::Circle { center, radius }
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        let bad = |m: &str| Err(GeomError::InvalidSet(m.to_string()));
        let finite = |p: &Point| p.is_finite();
        match self {
            PlanarSet::Disk { center, radius } | PlanarSet::Circle { center, radius } => {
                if !finite(center) || !(radius.is_finite() && *radius > 0.0) {
                    return bad("radius must be finite and positive");
                }
            }
            PlanarSet::Point { at } => {
                if !finite(at) {
                    return bad("non-finite point");
                }
            }
            PlanarSet::AxisRect {
                corner,
                width,
                height,
            } => {
                if !finite(corner) || !(*width > 0.0 && *height > 0.0) || !(width.is_finite() && height.is_finite()) {
                    return bad("rectangle sides must be finite and positive");
                }
            }
            PlanarSet::PolarRect {
                center,
                r_in,
                r_out,
                theta_min,
                theta_max,
            } => {
                if !finite(center) || !(0.0 < *r_in && r_in < r_out && r_out.is_finite()) {
                    return bad("polar rectangle needs 0 < r_in < r_out");
                }
                if !(theta_min < theta_max && *theta_max <= theta_min + TAU + 1e-12) {
                    return bad("polar rectangle needs theta_min < theta_max <= theta_min + 2π");
                }
            }
            PlanarSet::Polygon { vertices } => {
                if vertices.len() < 3 || !vertices.iter().all(finite) {
                    return bad("polygon needs at least three finite vertices");
                }
                if signed_area(vertices).abs() <= EPS {
                    return bad("polygon has zero area");
                }
                if !polygon_is_simple(vertices) {
                    return bad("polygon is not simple");
                }
            }
            PlanarSet::Segment { a, b } => {
                if !finite(a) || !finite(b) || a.dist(*b) == 0.0 {
                    return bad("segment endpoints must be finite and distinct");
                }
            }
        }
        Ok(())
    }

    pub(crate) fn boundary(&self) -> Vec<Prim> {
        match self {
            PlanarSet::Disk { center, radius } | PlanarSet::Circle { center, radius } => {
                vec![Prim::Arc(Arc::full(*center, *radius))]
            }
            PlanarSet::Point { at } => vec![Prim::Pt(*at)],
            PlanarSet::AxisRect { .. } | PlanarSet::Polygon { .. } => {
                let v = self.vertices();
                (0..v.len())
                    .map(|i| Prim::Seg(v[i], v[(i + 1) % v.len()]))
                    .collect()
            }
            PlanarSet::Segment { a, b } => vec![Prim::Seg(*a, *b)],
            PlanarSet::PolarRect {
                center,
                r_in,
                r_out,
                theta_min,
                theta_max,
            } => {
                let sweep = theta_max - theta_min;
                if sweep >= TAU - 1e-12 {
                    return vec![
                        Prim::Arc(Arc::full(*center, *r_in)),
                        Prim::Arc(Arc::full(*center, *r_out)),
                    ];
                }
                let (u0, u1) = (Point::polar(*theta_min), Point::polar(*theta_max));
                vec![
                    Prim::Arc(Arc::new(*center, *r_in, *theta_min, sweep)),
                    Prim::Arc(Arc::new(*center, *r_out, *theta_min, sweep)),
                    Prim::Seg(*center + u0 * *r_in, *center + u0 * *r_out),
                    Prim::Seg(*center + u1 * *r_in, *center + u1 * *r_out),
                ]
            }
        }
    }

    /// Polygonal vertices (rectangles and polygons only).
    fn vertices(&self) -> Vec<Point> {
        match self {
            PlanarSet::AxisRect {
                corner,
                width,
                height,
            } => vec![
                *corner,
                *corner + Point::new(*width, 0.0),
                *corner + Point::new(*width, *height),
                *corner + Point::new(0.0, *height),
            ],
            PlanarSet::Polygon { vertices } => vertices.clone(),
            _ => Vec::new(),
        }
    }

    /// True when the set has two-dimensional interior.
    pub fn has_interior(&self) -> bool {
        matches!(
            self,
            PlanarSet::Disk { .. }
                | PlanarSet::AxisRect { .. }
                | PlanarSet::PolarRect { .. }
                | PlanarSet::Polygon { .. }
        )
    }

    /// Closed-set membership.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            PlanarSet::Disk { center, radius } => p.dist(*center) <= radius + EPS,
            PlanarSet::AxisRect {
                corner,
                width,
                height,
            } => {
                p.x >= corner.x - EPS
                    && p.x <= corner.x + width + EPS
                    && p.y >= corner.y - EPS
                    && p.y <= corner.y + height + EPS
            }
            PlanarSet::PolarRect {
                center,
                r_in,
                r_out,
                theta_min,
                theta_max,
            } => {
                let v = p - *center;
                let r = v.norm();
                if r < r_in - EPS || r > r_out + EPS {
                    return false;
                }
                let arc = Arc::new(*center, 1.0, *theta_min, theta_max - theta_min);
                arc.contains_angle(v.angle())
                    || self.boundary().iter().any(|b| b.dist_point(p) <= EPS)
            }
            PlanarSet::Polygon { vertices } => {
                point_in_polygon(vertices, p) || self.boundary().iter().any(|b| b.dist_point(p) <= EPS)
            }
            PlanarSet::Point { .. } | PlanarSet::Segment { .. } | PlanarSet::Circle { .. } => {
                self.boundary()[0].dist_point(p) <= EPS
            }
        }
    }

    /// Euclidean distance from `p` to the set (zero inside).
    pub fn dist_point(&self, p: Point) -> f64 {
        match self {
            PlanarSet::Disk { center, radius } => (p.dist(*center) - radius).max(0.0),
            _ => {
                if self.has_interior() && self.contains(p) {
                    return 0.0;
                }
                self.boundary()
                    .iter()
                    .map(|b| b.dist_point(p))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// `sup_{y in S} |p - y|` together with a maximizer.
    pub fn far_point(&self, p: Point) -> (f64, Point) {
        let mut best = (f64::NEG_INFINITY, p);
        for b in self.boundary() {
            let (d, q) = b.far_point(p);
            if d > best.0 {
                best = (d, q);
            }
        }
        best
    }

    pub fn far_dist(&self, p: Point) -> f64 {
        self.far_point(p).0
    }

    /// Distance from `p` to the topological boundary (the inradius at `p`
    /// when `p` is an interior point).
    pub fn boundary_dist(&self, p: Point) -> f64 {
        self.boundary()
            .iter()
            .map(|b| b.dist_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Diameter and a lexicographically ordered realizing pair; ties go to
    /// the lexicographically smallest pair.
    pub fn diam_pair(&self) -> (f64, Point, Point) {
        let bd = self.boundary();
        let mut best = (0.0, bd[0].anchor(), bd[0].anchor());
        for (i, p) in bd.iter().enumerate() {
            for q in &bd[i..] {
                let (d, x, y) = prim_far_pair(p, q);
                let lex_smaller = x.lex_cmp(&best.1).then(y.lex_cmp(&best.2)).is_lt();
                if d > best.0 + 1e-15 || ((d - best.0).abs() <= 1e-15 && lex_smaller) {
                    best = (d, x, y);
                }
            }
        }
        best
    }

    pub fn diam(&self) -> f64 {
        match self {
            PlanarSet::Disk { radius, .. } | PlanarSet::Circle { radius, .. } => 2.0 * radius,
            PlanarSet::Point { .. } => 0.0,
            _ => self.diam_pair().0,
        }
    }

    /// True when the sets share a point.
    pub fn intersects(&self, other: &PlanarSet) -> bool {
        self.dist(other) <= EPS
    }

    /// `dist(E, F) = inf |x - y|` over `x in E`, `y in F`.
    pub fn dist(&self, other: &PlanarSet) -> f64 {
        if let (
            PlanarSet::Disk { center: c1, radius: r1 },
            PlanarSet::Disk { center: c2, radius: r2 },
        ) = (self, other)
        {
            return (c1.dist(*c2) - r1 - r2).max(0.0);
        }
        let (ba, bb) = (self.boundary(), other.boundary());
        if (self.has_interior() && self.contains(bb[0].anchor()))
            || (other.has_interior() && other.contains(ba[0].anchor()))
        {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for p in &ba {
            for q in &bb {
                best = best.min(prim_dist(p, q));
                if best <= EPS {
                    return 0.0;
                }
            }
        }
        best
    }

    /// Area (zero for one-dimensional kinds).
    pub fn area(&self) -> f64 {
        match self {
            PlanarSet::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            PlanarSet::AxisRect { width, height, .. } => width * height,
            PlanarSet::PolarRect {
                r_in,
                r_out,
                theta_min,
                theta_max,
                ..
            } => 0.5 * (theta_max - theta_min) * (r_out * r_out - r_in * r_in),
            PlanarSet::Polygon { vertices } => signed_area(vertices).abs(),
            _ => 0.0,
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut add = |p: Point| {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        };
        for b in self.boundary() {
            match b {
                Prim::Pt(p) => add(p),
                Prim::Seg(a, c) => {
                    add(a);
                    add(c);
                }
                Prim::Arc(arc) => {
                    if let Some([a, c]) = arc.endpoints() {
                        add(a);
                        add(c);
                    }
                    for k in 0..4 {
                        let phi = k as f64 * std::f64::consts::FRAC_PI_2;
                        if arc.contains_angle(phi) {
                            add(arc.point_at(phi));
                        }
                    }
                }
            }
        }
        (lo, hi)
    }

    /// A point guaranteed to lie in the set.
    pub fn representative(&self) -> Point {
        match self {
            PlanarSet::Disk { center, .. } => *center,
            PlanarSet::Point { at } => *at,
            PlanarSet::AxisRect {
                corner,
                width,
                height,
            } => *corner + Point::new(width / 2.0, height / 2.0),
            PlanarSet::PolarRect {
                center,
                r_in,
                r_out,
                theta_min,
                theta_max,
            } => *center + Point::polar(0.5 * (theta_min + theta_max)) * (0.5 * (r_in + r_out)),
            PlanarSet::Segment { a, b } => *a + (*b - *a) * 0.5,
            PlanarSet::Circle { center, radius } => *center + Point::new(*radius, 0.0),
            PlanarSet::Polygon { vertices } => {
                let c = vertices
                    .iter()
                    .fold(Point::ORIGIN, |acc, v| acc + *v)
                    * (1.0 / vertices.len() as f64);
                if self.contains(c) {
                    return c;
                }
                // Midpoint of a short diagonal step inward from an ear-like vertex.
                let n = vertices.len();
                for i in 0..n {
                    let m = (vertices[(i + n - 1) % n] + vertices[(i + 1) % n]) * 0.5;
                    for s in [0.5, 0.25, 0.1, 0.01] {
                        let q = vertices[i] + (m - vertices[i]) * s;
                        if point_in_polygon(vertices, q) {
                            return q;
                        }
                    }
                }
                vertices[0]
            }
        }
    }

    /// Sorted ray parameters where `origin + t * dir` (unit `dir`) crosses
    /// into or out of the set, paired into inside intervals `[t0, t1]`.
    pub(crate) fn ray_intervals(&self, origin: Point, dir: Point, bd: &[Prim]) -> Vec<(f64, f64)> {
        let mut ts = vec![0.0];
        for b in bd {
            b.ray_hits(origin, dir, &mut ts);
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in ts.windows(2) {
            let mid = origin + dir * (0.5 * (w[0] + w[1]));
            if self.contains(mid) {
                match out.last_mut() {
                    Some(last) if (last.1 - w[0]).abs() <= 1e-13 => last.1 = w[1],
                    _ => out.push((w[0], w[1])),
                }
            }
        }
        out
    }

    /// Translate and scale about the origin: `p -> s * p + shift`.
    pub fn transformed(&self, s: f64, shift: Point) -> PlanarSet {
        let t = |p: &Point| *p * s + shift;
        match self {
            PlanarSet::Disk { center, radius } => PlanarSet::disk(t(center), radius * s),
            PlanarSet::Circle { center, radius } => PlanarSet::circle(t(center), radius * s),
            PlanarSet::Point { at } => PlanarSet::point(t(at)),
            PlanarSet::AxisRect {
                corner,
                width,
                height,
            } => PlanarSet::axis_rect(t(corner), width * s, height * s),
            PlanarSet::PolarRect {
                center,
                r_in,
                r_out,
                theta_min,
                theta_max,
            } => PlanarSet::polar_rect(t(center), r_in * s, r_out * s, *theta_min, *theta_max),
            PlanarSet::Polygon { vertices } => PlanarSet::polygon(vertices.iter().map(t).collect()),
            PlanarSet::Segment { a, b } => PlanarSet::segment(t(a), t(b)),
        }
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn point_in_polygon(v: &[Point], p: Point) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn polygon_is_simple(v: &[Point]) -> bool {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (v[j], v[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if prim_dist(&Prim::Seg(a, b), &Prim::Seg(c, d)) <= EPS {
                return false;
            }
        }
    }
    true
}

/// Closed annulus `A[center, r, R] = { z : r <= |z - center| <= R }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub center: Point,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

impl Annulus {
    pub fn new(center: Point, r: f64, big_r: f64) -> Result<Self, GeomError> {
        if !(r > 0.0 && big_r > r && big_r.is_finite()) || !center.is_finite() {
            return Err(GeomError::InvalidSet(format!(
                "annulus needs 0 < r < R, got r={r}, R={big_r}"
            )));
        }
        Ok(Annulus { center, r, big_r })
    }

    pub fn log_ratio(&self) -> f64 {
        (self.big_r / self.r).ln()
    }

    pub fn contains(&self, p: Point) -> bool {
        let d = p.dist(self.center);
        d >= self.r - EPS && d <= self.big_r + EPS
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn diam_of_each_kind() {
        assert_eq!(PlanarSet::disk(Point::ORIGIN, 0.5).diam(), 1.0);
        assert!((PlanarSet::rect(0.0, 3.0, 0.0, 4.0).diam() - 5.0).abs() < 1e-14);
        let slit_ring = PlanarSet::polar_rect(Point::ORIGIN, 1.0, 2.0, 0.0, 2.0 * PI - 0.1);
        assert!((slit_ring.diam() - 4.0).abs() < 1e-12);
        // Quarter ring: the chord between outer endpoints dominates.
        let quarter = PlanarSet::polar_rect(Point::ORIGIN, 1.0, 2.0, 0.0, PI / 2.0);
        assert!((quarter.diam() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn thin_polar_rect_diam_uses_corner_pairs() {
        // Narrow wedge: diameter is max over the four corners' pairings.
        let w = PlanarSet::polar_rect(Point::ORIGIN, 1.0, 3.0, 0.0, 0.2);
        let corners = [
            Point::polar(0.0),
            Point::polar(0.0) * 3.0,
            Point::polar(0.2),
            Point::polar(0.2) * 3.0,
        ];
        let mut brute: f64 = 0.0;
        for a in &corners {
            for b in &corners {
                brute = brute.max(a.dist(*b));
            }
        }
        // Outer arc sagitta does not exceed the corner pairs for a thin wedge.
        assert!((w.diam() - brute).abs() < 1e-12);
    }

    #[test]
    fn contains_and_dist_polygon() {
        let l = PlanarSet::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ]);
        l.validate().unwrap();
        assert!(l.contains(Point::new(0.5, 1.5)));
        assert!(!l.contains(Point::new(1.5, 1.5)));
        assert!((l.dist_point(Point::new(1.5, 1.5)) - 0.5).abs() < 1e-14);
        assert!((l.area() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(PlanarSet::disk(Point::ORIGIN, 0.0).validate().is_err());
        assert!(PlanarSet::polar_rect(Point::ORIGIN, 2.0, 1.0, 0.0, 1.0)
            .validate()
            .is_err());
        let bowtie = PlanarSet::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(bowtie.validate().is_err());
    }

    #[test]
    fn ray_intervals_reenter_nonconvex() {
        let u = PlanarSet::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 1.0),
            Point::new(2.0, 1.0),
            Point::new(2.0, 0.5),
            Point::new(1.0, 0.5),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]);
        let bd = u.boundary();
        let iv = u.ray_intervals(Point::new(-1.0, 0.75), Point::new(1.0, 0.0), &bd);
        assert_eq!(iv.len(), 2);
        assert!((iv[0].0 - 1.0).abs() < 1e-12 && (iv[0].1 - 2.0).abs() < 1e-12);
        assert!((iv[1].0 - 3.0).abs() < 1e-12 && (iv[1].1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn json_kind_tags() {
        let s = PlanarSet::disk(Point::new(1.0, 2.0), 0.5);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"kind":"disk","center":[1.0,2.0],"radius":0.5}"#);
    }
}
