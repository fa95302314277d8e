use proptest::prelude::*;
use transmod::domain::{BBox, CurveFamilySpec, DomainSpec, QuotientGrid};
use transmod::geom::{PlanarSet, Point};
use transmod::modsolve::{modulus, verify_admissible, SolverConfig, Status};

/// Up to three disks in the middle band of the unit square, kept apart.
fn domain() -> impl Strategy<Value = DomainSpec> {
    proptest::collection::vec((0.25..0.75f64, 0.15..0.85f64, 0.05..0.12f64), 0..4).prop_map(|raw| {
        let mut disks: Vec<PlanarSet> = Vec::new();
        for (x, y, r) in raw {
            let d = PlanarSet::disk(Point::new(x, y), r);
            if disks.iter().all(|o| o.dist(&d) > 0.15) {
                disks.push(d);
            }
        }
        DomainSpec::new("p", BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)), disks)
    })
}

fn seg(x0: f64, y0: f64, x1: f64, y1: f64) -> PlanarSet {
    PlanarSet::segment(Point::new(x0, y0), Point::new(x1, y1))
}

fn lr() -> CurveFamilySpec {
    CurveFamilySpec::new(seg(0.0, 0.0, 0.0, 1.0), seg(1.0, 0.0, 1.0, 1.0))
}

const H: f64 = 1.0 / 24.0;

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bounds_bracket_and_density_is_admissible(spec in domain()) {
        let g = QuotientGrid::rasterize(&spec, H).unwrap();
        let r = modulus(&g, &lr(), &SolverConfig::default()).unwrap();
        prop_assert_eq!(r.status, Status::Converged);
        prop_assert!(r.lower_bound <= r.value && r.value <= r.upper_bound);
        prop_assert!(r.density.is_valid());
        prop_assert!((r.density.mass(&g) - r.upper_bound).abs() <= 1e-8 * r.upper_bound);
        let ep = g.family_endpoints(&lr()).unwrap();
        let rep = verify_admissible(&g, &r.density, &ep, 32, 1e-9, 5);
        prop_assert!(rep.admissible, "{:?}", rep);
    }

    #[test]
    fn swapping_ends_keeps_the_value(spec in domain()) {
        let g = QuotientGrid::rasterize(&spec, H).unwrap();
        let cfg = SolverConfig::default();
        let a = modulus(&g, &lr(), &cfg).unwrap().value;
        let rl = CurveFamilySpec::new(seg(1.0, 0.0, 1.0, 1.0), seg(0.0, 0.0, 0.0, 1.0));
        let b = modulus(&g, &rl, &cfg).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-6 * a);
    }

    #[test]
    fn forbidding_a_continuum_never_helps(spec in domain()) {
        prop_assume!(!spec.continua.is_empty());
        let g = QuotientGrid::rasterize(&spec, H).unwrap();
        let cfg = SolverConfig::default();
        let all = modulus(&g, &lr(), &cfg).unwrap().value;
        let avoid = modulus(&g, &lr().forbid(vec![0]), &cfg).unwrap().value;
        prop_assert!(avoid <= all * (1.0 + 1e-6));
    }

    #[test]
    fn similarity_invariance(spec in domain(), s in 0.25..4.0f64, dx in -3.0..3.0f64, dy in -3.0..3.0f64) {
        // Scaling the picture and the spacing together maps the grid onto itself.
        let shift = Point::new(dx, dy);
        let moved = DomainSpec::new(
            "q",
            BBox::new(spec.ambient.min * s + shift, spec.ambient.max * s + shift),
            spec.continua.iter().map(|c| c.transformed(s, shift)).collect(),
        );
        let fam = CurveFamilySpec::new(
            lr().source.transformed(s, shift),
            lr().sink.transformed(s, shift),
        );
        let cfg = SolverConfig::default();
        let a = modulus(&QuotientGrid::rasterize(&spec, H).unwrap(), &lr(), &cfg).unwrap().value;
        let b = modulus(&QuotientGrid::rasterize(&moved, H * s).unwrap(), &fam, &cfg).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-6 * a, "{} {}", a, b);
    }

    #[test]
    fn domain_json_round_trips(spec in domain(), pts in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 0..5)) {
        let mut spec = spec;
        spec.points = pts
            .into_iter()
            .map(|(x, y)| Point::new(x, y))
            .filter(|&p| spec.continua.iter().all(|c| !c.contains(p)))
            .collect();
        let back = DomainSpec::from_json(&spec.to_json()).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_json(), spec.to_json());
    }
}

#[test]
fn results_are_deterministic() {
    let spec = DomainSpec::new(
        "d",
        BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
        vec![PlanarSet::disk(Point::new(0.5, 0.4), 0.1)],
    );
    let g = QuotientGrid::rasterize(&spec, H).unwrap();
    let a = modulus(&g, &lr(), &SolverConfig::default()).unwrap();
    let b = modulus(&g, &lr(), &SolverConfig::default()).unwrap();
    assert_eq!(a, b);
}
