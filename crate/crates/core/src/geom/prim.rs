//! Boundary primitives (points, segments, circular arcs) and the pairwise
//! distance / farthest-pair case analysis every set operation reduces to.

use super::Point;
use std::f64::consts::TAU;

pub(crate) const EPS: f64 = 1e-12;
const ANG_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Arc {
    pub center: Point,
    pub radius: f64,
    /// Start angle in `[0, 2π)`.
    pub start: f64,
    /// Angular extent in `(0, 2π]`, counterclockwise from `start`.
    pub sweep: f64,
}

impl Arc {
    pub fn full(center: Point, radius: f64) -> Self {
        Arc {
            center,
            radius,
            start: 0.0,
            sweep: TAU,
        }
    }

    pub fn new(center: Point, radius: f64, start: f64, sweep: f64) -> Self {
        Arc {
            center,
            radius,
            start: start.rem_euclid(TAU),
            sweep: sweep.min(TAU),
        }
    }

    pub fn is_full(&self) -> bool {
        self.sweep >= TAU - ANG_EPS
    }

    pub fn contains_angle(&self, phi: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let d = (phi - self.start).rem_euclid(TAU);
        d <= self.sweep + ANG_EPS || d >= TAU - ANG_EPS
    }

    pub fn point_at(&self, phi: f64) -> Point {
        self.center + Point::polar(phi) * self.radius
    }

    pub fn endpoints(&self) -> Option<[Point; 2]> {
        if self.is_full() {
            None
        } else {
            Some([
                self.point_at(self.start),
                self.point_at(self.start + self.sweep),
            ])
        }
    }

    fn dist_point(&self, p: Point) -> f64 {
        let v = p - self.center;
        let n = v.norm();
        if n < EPS {
            return self.radius;
        }
        if self.contains_angle(v.angle()) {
            return (n - self.radius).abs();
        }
        self.endpoints()
            .map(|[a, b]| p.dist(a).min(p.dist(b)))
            .unwrap_or(f64::INFINITY)
    }

    /// Farthest point of the arc from `p`.
    fn far_point(&self, p: Point) -> (f64, Point) {
        let v = p - self.center;
        let n = v.norm();
        let mut best = (f64::NEG_INFINITY, self.point_at(self.start));
        let mut consider = |q: Point| {
            let d = p.dist(q);
            if d > best.0 || (d == best.0 && q.lex_cmp(&best.1).is_lt()) {
                best = (d, q);
            }
        };
        if n < EPS {
            consider(self.point_at(self.start));
            return best;
        }
        let anti = (-v).angle();
        if self.contains_angle(anti) {
            consider(self.point_at(anti));
        }
        if let Some([a, b]) = self.endpoints() {
            consider(a);
            consider(b);
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Prim {
    Pt(Point),
    Seg(Point, Point),
    Arc(Arc),
}

impl Prim {
    pub fn dist_point(&self, p: Point) -> f64 {
        match *self {
            Prim::Pt(q) => p.dist(q),
            Prim::Seg(a, b) => seg_point_dist(a, b, p),
            Prim::Arc(ref arc) => arc.dist_point(p),
        }
    }

    pub fn far_point(&self, p: Point) -> (f64, Point) {
        match *self {
            Prim::Pt(q) => (p.dist(q), q),
            Prim::Seg(a, b) => {
                let (da, db) = (p.dist(a), p.dist(b));
                if da > db || (da == db && a.lex_cmp(&b).is_le()) {
                    (da, a)
                } else {
                    (db, b)
                }
            }
            Prim::Arc(ref arc) => arc.far_point(p),
        }
    }

    /// Some point on the primitive.
    pub fn anchor(&self) -> Point {
        match *self {
            Prim::Pt(q) => q,
            Prim::Seg(a, _) => a,
            Prim::Arc(ref arc) => arc.point_at(arc.start),
        }
    }

    /// Points that must be examined by any extremal case analysis.
    fn vertices(&self) -> Vec<Point> {
        match *self {
            Prim::Pt(q) => vec![q],
            Prim::Seg(a, b) => vec![a, b],
            Prim::Arc(ref arc) => arc.endpoints().map(|e| e.to_vec()).unwrap_or_default(),
        }
    }

    /// Evenly spaced sample points (including endpoints) used by the
    /// sampling-based classifiers.
    pub fn samples(&self, n: usize) -> Vec<Point> {
        let n = n.max(2);
        match *self {
            Prim::Pt(q) => vec![q],
            Prim::Seg(a, b) => (0..n)
                .map(|k| a + (b - a) * (k as f64 / (n - 1) as f64))
                .collect(),
            Prim::Arc(ref arc) => {
                let m = if arc.is_full() { n } else { n - 1 };
                (0..n)
                    .map(|k| arc.point_at(arc.start + arc.sweep * k as f64 / m as f64))
                    .collect()
            }
        }
    }

    /// Ray parameters `t >= 0` where `origin + t * dir` meets the primitive.
    /// Tangential and collinear contacts are skipped; they are measure-zero
    /// in every angular integral that consumes this.
    pub fn ray_hits(&self, origin: Point, dir: Point, out: &mut Vec<f64>) {
        match *self {
            Prim::Pt(_) => {}
            Prim::Seg(a, b) => {
                let e = b - a;
                let denom = dir.cross(e);
                if denom.abs() < 1e-300 {
                    return;
                }
                let w = a - origin;
                let t = w.cross(e) / denom;
                let s = w.cross(dir) / denom;
                if t >= 0.0 && (-1e-14..=1.0 + 1e-14).contains(&s) {
                    out.push(t);
                }
            }
            Prim::Arc(ref arc) => {
                let w = origin - arc.center;
                let bq = dir.dot(w);
                let cq = w.norm2() - arc.radius * arc.radius;
                let disc = bq * bq - cq;
                if disc <= 0.0 {
                    return;
                }
                let sq = disc.sqrt();
                for t in [-bq - sq, -bq + sq] {
                    if t >= 0.0 {
                        let q = origin + dir * t;
                        if arc.contains_angle((q - arc.center).angle()) {
                            out.push(t);
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn seg_closest(a: Point, b: Point, p: Point) -> Point {
    let e = b - a;
    let l2 = e.norm2();
    if l2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(e) / l2).clamp(0.0, 1.0);
    a + e * t
}

pub(crate) fn seg_point_dist(a: Point, b: Point, p: Point) -> f64 {
    p.dist(seg_closest(a, b, p))
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn segs_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    seg_point_dist(c, d, a) <= EPS
        || seg_point_dist(c, d, b) <= EPS
        || seg_point_dist(a, b, c) <= EPS
        || seg_point_dist(a, b, d) <= EPS
}

fn seg_seg_dist(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segs_intersect(a, b, c, d) {
        return 0.0;
    }
    seg_point_dist(c, d, a)
        .min(seg_point_dist(c, d, b))
        .min(seg_point_dist(a, b, c))
        .min(seg_point_dist(a, b, d))
}

/// Points where segment `ab` meets the full circle of `arc`.
fn seg_circle_points(a: Point, b: Point, arc: &Arc) -> Vec<Point> {
    let e = b - a;
    let w = a - arc.center;
    let qa = e.norm2();
    if qa == 0.0 {
        return Vec::new();
    }
    let qb = e.dot(w);
    let qc = w.norm2() - arc.radius * arc.radius;
    let disc = qb * qb - qa * qc;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    [(-qb - sq) / qa, (-qb + sq) / qa]
        .into_iter()
        .filter(|t| (-1e-14..=1.0 + 1e-14).contains(t))
        .map(|t| a + e * t)
        .collect()
}

fn circle_circle_points(p: &Arc, q: &Arc) -> Vec<Point> {
    let d = q.center - p.center;
    let dn = d.norm();
    if dn < EPS {
        return Vec::new();
    }
    let (r1, r2) = (p.radius, q.radius);
    if dn > r1 + r2 + EPS || dn < (r1 - r2).abs() - EPS {
        return Vec::new();
    }
    let along = (dn * dn + r1 * r1 - r2 * r2) / (2.0 * dn);
    let h = (r1 * r1 - along * along).max(0.0).sqrt();
    let u = d * (1.0 / dn);
    let base = p.center + u * along;
    let perp = Point::new(-u.y, u.x);
    vec![base + perp * h, base - perp * h]
}

fn on_arc(arc: &Arc, q: Point) -> bool {
    arc.contains_angle((q - arc.center).angle())
}

fn seg_arc_dist(a: Point, b: Point, arc: &Arc) -> f64 {
    if seg_circle_points(a, b, arc).iter().any(|&q| on_arc(arc, q)) {
        return 0.0;
    }
    let mut best = arc.dist_point(a).min(arc.dist_point(b));
    if let Some([p, q]) = arc.endpoints() {
        best = best
            .min(seg_point_dist(a, b, p))
            .min(seg_point_dist(a, b, q));
    }
    let foot = seg_closest(a, b, arc.center);
    let v = foot - arc.center;
    if v.norm() >= EPS && arc.contains_angle(v.angle()) {
        best = best.min((v.norm() - arc.radius).abs());
    }
    best
}

fn arc_arc_dist(p: &Arc, q: &Arc) -> f64 {
    if circle_circle_points(p, q)
        .iter()
        .any(|&x| on_arc(p, x) && on_arc(q, x))
    {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for v in Prim::Arc(*p).vertices() {
        best = best.min(q.dist_point(v));
    }
    for v in Prim::Arc(*q).vertices() {
        best = best.min(p.dist_point(v));
    }
    let d = q.center - p.center;
    if d.norm() < EPS {
        // Concentric: radial gap wherever the angular ranges overlap.
        if angular_overlap(p, q) {
            best = best.min((p.radius - q.radius).abs());
        }
        return best;
    }
    let u = d * (1.0 / d.norm());
    for sp in [1.0, -1.0] {
        for sq in [1.0, -1.0] {
            let x = p.center + u * (sp * p.radius);
            let y = q.center + u * (sq * q.radius);
            if on_arc(p, x) && on_arc(q, y) {
                best = best.min(x.dist(y));
            }
        }
    }
    best
}

fn angular_overlap(p: &Arc, q: &Arc) -> bool {
    p.is_full()
        || q.is_full()
        || p.contains_angle(q.start)
        || q.contains_angle(p.start)
}

/// Minimum distance between two primitives.
pub(crate) fn prim_dist(p: &Prim, q: &Prim) -> f64 {
    use Prim::*;
    match (p, q) {
        (Pt(a), other) | (other, Pt(a)) => other.dist_point(*a),
        (Seg(a, b), Seg(c, d)) => seg_seg_dist(*a, *b, *c, *d),
        (Seg(a, b), Arc(arc)) | (Arc(arc), Seg(a, b)) => seg_arc_dist(*a, *b, arc),
        (Arc(x), Arc(y)) => arc_arc_dist(x, y),
    }
}

/// Farthest pair of points between two primitives.
pub(crate) fn prim_far_pair(p: &Prim, q: &Prim) -> (f64, Point, Point) {
    let mut best = (f64::NEG_INFINITY, p.anchor(), q.anchor());
    let mut consider = |d: f64, x: Point, y: Point| {
        let (x, y) = if x.lex_cmp(&y).is_le() { (x, y) } else { (y, x) };
        let lex_smaller = x.lex_cmp(&best.1).then(y.lex_cmp(&best.2)).is_lt();
        if d > best.0 + 1e-15 || ((d - best.0).abs() <= 1e-15 && lex_smaller) {
            best = (d, x, y);
        }
    };
    for v in p.vertices() {
        let (d, w) = q.far_point(v);
        consider(d, v, w);
    }
    for v in q.vertices() {
        let (d, w) = p.far_point(v);
        consider(d, w, v);
    }
    if let (Prim::Arc(a), Prim::Arc(b)) = (p, q) {
        let d = b.center - a.center;
        if d.norm() < EPS {
            // Concentric: antipodal pairs where a direction and its opposite
            // are both covered.
            for phi in [a.start, b.start + std::f64::consts::PI, b.start + b.sweep + std::f64::consts::PI] {
                if a.contains_angle(phi) && b.contains_angle(phi + std::f64::consts::PI) {
                    let x = a.point_at(phi);
                    let y = b.point_at(phi + std::f64::consts::PI);
                    consider(x.dist(y), x, y);
                }
            }
            if a.is_full() && b.is_full() {
                let x = a.point_at(std::f64::consts::PI);
                let y = b.point_at(0.0);
                consider(x.dist(y), x, y);
            }
        } else {
            let u = d * (1.0 / d.norm());
            let x = a.center - u * a.radius;
            let y = b.center + u * b.radius;
            if on_arc(a, x) && on_arc(b, y) {
                consider(x.dist(y), x, y);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn seg_seg_parallel_and_crossing() {
        let p = Prim::Seg(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        let q = Prim::Seg(Point::new(0.0, 2.0), Point::new(1.0, 2.0));
        assert!((prim_dist(&p, &q) - 2.0).abs() < 1e-15);
        let r = Prim::Seg(Point::new(0.5, -1.0), Point::new(0.5, 1.0));
        assert_eq!(prim_dist(&p, &r), 0.0);
    }

    #[test]
    fn arc_arc_along_center_line() {
        let a = Prim::Arc(Arc::full(Point::new(0.0, 0.0), 1.0));
        let b = Prim::Arc(Arc::full(Point::new(5.0, 0.0), 1.0));
        assert!((prim_dist(&a, &b) - 3.0).abs() < 1e-14);
        let (d, _, _) = prim_far_pair(&a, &b);
        assert!((d - 7.0).abs() < 1e-14);
    }

    #[test]
    fn partial_arc_falls_back_to_endpoints() {
        // Upper half circle versus a point far below the center.
        let a = Arc::new(Point::ORIGIN, 1.0, 0.0, PI);
        let p = Point::new(0.0, -3.0);
        assert!((a.dist_point(p) - 10f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn seg_arc_interior_critical_point() {
        let arc = Prim::Arc(Arc::full(Point::ORIGIN, 1.0));
        let s = Prim::Seg(Point::new(-1.0, 3.0), Point::new(1.0, 3.0));
        assert!((prim_dist(&arc, &s) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ray_hits_circle_twice_from_outside() {
        let arc = Prim::Arc(Arc::full(Point::new(3.0, 0.0), 1.0));
        let mut hits = Vec::new();
        arc.ray_hits(Point::ORIGIN, Point::new(1.0, 0.0), &mut hits);
        hits.sort_by(f64::total_cmp);
        assert_eq!(hits.len(), 2);
        assert!((hits[0] - 2.0).abs() < 1e-14 && (hits[1] - 4.0).abs() < 1e-14);
    }
}
