//! The verification campaign: every numerical check the engine can make
//! against a closed-form value, a stated bound, or an axiom, flattened into
//! one row per check.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, TAU};
use std::io::Write;
use transmod::densities::{certificate_mass, find_wide_subannulus};
use transmod::domain::{BBox, CurveFamilySpec, DomainSpec, QuotientGrid};
use transmod::gallery::{
    circle_domain_random, kissing_disks_domain, loglog_slope, polar_rectangle_domain, twin_squares_domain,
    BoundKind, ScenarioCase,
};
use transmod::geom::{count_crossing_disks, count_fat_meeting, fat_count_bound, Annulus, PlanarSet, Point};
use transmod::modsolve::{fmt17, modulus, modulus_union, verify_admissible, ModulusResult, SolverConfig, Status};

/// Groups of checks, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Oracle,
    #[serde(rename = "polar")]
    PolarDecay,
    #[serde(rename = "twin")]
    TwinDecay,
    #[serde(rename = "kissing")]
    KissingDecay,
    Sandwich,
    Packing,
    Axioms,
    Certificate,
    Singleton,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Oracle,
        Suite::PolarDecay,
        Suite::TwinDecay,
        Suite::KissingDecay,
        Suite::Sandwich,
        Suite::Packing,
        Suite::Axioms,
        Suite::Certificate,
        Suite::Singleton,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::PolarDecay => "polar",
            Suite::TwinDecay => "twin",
            Suite::KissingDecay => "kissing",
            Suite::Sandwich => "sandwich",
            Suite::Packing => "packing",
            Suite::Axioms => "axioms",
            Suite::Certificate => "certificate",
            Suite::Singleton => "singleton",
        }
    }
}

/// One check. `slack` is signed headroom: the check passes iff `slack >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub suite: Suite,
    pub id: String,
    pub citation: String,
    pub expected: f64,
    pub observed: f64,
    pub slack: f64,
    pub pass: bool,
}

impl Row {
    fn new(suite: Suite, id: impl Into<String>, citation: &str, expected: f64, observed: f64, slack: f64) -> Self {
        Row {
            suite,
            id: format!("{}.{}", suite.as_str(), id.into()),
            citation: citation.to_string(),
            expected,
            observed,
            slack,
            pass: slack >= 0.0,
        }
    }

    /// `observed <= bound + allowance`.
    fn at_most(suite: Suite, id: impl Into<String>, citation: &str, bound: f64, allowance: f64, observed: f64) -> Self {
        Row::new(suite, id, citation, bound, observed, bound + allowance - observed)
    }

    /// `|observed - target| <= tol`.
    fn near(suite: Suite, id: impl Into<String>, citation: &str, target: f64, tol: f64, observed: f64) -> Self {
        Row::new(suite, id, citation, target, observed, tol - (observed - target).abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Multiplies every reference grid spacing.
    pub h_scale: f64,
    /// Numerator of the twin-squares bound `constant / n`.
    pub twin_constant: f64,
    pub packing_trials: usize,
    pub sandwich_domains: usize,
    pub certificate_fixtures: usize,
    pub solver: SolverConfig,
    /// Restrict the run to these suites; empty means all.
    pub suites: Vec<Suite>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 1,
            h_scale: 1.0,
            twin_constant: 20.0,
            packing_trials: 10_000,
            sandwich_domains: 20,
            certificate_fixtures: 6,
            solver: SolverConfig::default(),
            suites: Vec::new(),
        }
    }
}

impl CampaignConfig {
    fn wants(&self, s: Suite) -> bool {
        self.suites.is_empty() || self.suites.contains(&s)
    }

    /// Reference spacing `h` scaled, kept an exact reciprocal where it was one.
    fn scaled(&self, h: f64) -> f64 {
        let n = (1.0 / (h * self.h_scale)).round();
        if n >= 1.0 && ((1.0 / n) - h * self.h_scale).abs() < 1e-12 {
            1.0 / n
        } else {
            h * self.h_scale
        }
    }
}

/// Independent units of work; each is deterministic on its own.
enum Task {
    Square,
    Annulus,
    Decay(Suite, ScenarioCase),
    Sandwich(usize),
    FatPacking,
    CrossingPacking,
    Axioms(usize),
    Certificate(usize),
    Singleton(usize),
}

enum Output {
    Rows(Vec<Row>),
    Decay(Suite, ScenarioCase, ModulusResult),
    Sandwich(usize, f64, f64, f64),
}

pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn suite(&self, s: Suite) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.suite == s)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["check_id", "citation", "expected", "observed", "slack", "pass"])?;
        for r in &self.rows {
            w.write_record([
                r.id.as_str(),
                r.citation.as_str(),
                &fmt17(r.expected),
                &fmt17(r.observed),
                &fmt17(r.slack),
                if r.pass { "pass" } else { "fail" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for suite in Suite::ALL {
            let (n, ok) = self.suite(suite).fold((0, 0), |(n, ok), r| (n + 1, ok + r.pass as usize));
            if n > 0 {
                s.push_str(&format!("{:<12} {ok}/{n} pass\n", suite.as_str()));
            }
        }
        s
    }
}

/// Worker count from `TRANSMOD_THREADS`, if set.
pub fn thread_cap() -> Option<usize> {
    std::env::var("TRANSMOD_THREADS").ok()?.parse().ok().filter(|&n| n > 0)
}

pub fn run(cfg: &CampaignConfig) -> Report {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().expect("thread pool");
    let tasks = tasks(cfg);
    let outputs: Vec<Output> = pool.install(|| tasks.into_par_iter().map(|t| execute(t, cfg)).collect());
    let mut rows = assemble(outputs, cfg);
    rows.sort_by(|a, b| a.suite.cmp(&b.suite).then_with(|| a.id.cmp(&b.id)));
    Report { rows }
}

fn tasks(cfg: &CampaignConfig) -> Vec<Task> {
    let mut t = Vec::new();
    if cfg.wants(Suite::Oracle) {
        t.push(Task::Square);
        t.push(Task::Annulus);
    }
    let decay: [(Suite, &[u32], fn(u32) -> Result<ScenarioCase, transmod::gallery::GalleryError>); 3] = [
        (Suite::PolarDecay, &[2, 5, 10, 20], polar_rectangle_domain),
        (Suite::TwinDecay, &[2, 5, 10, 20], twin_squares_domain),
        (Suite::KissingDecay, &[2, 8, 32], kissing_disks_domain),
    ];
    for (suite, ns, make) in decay {
        if cfg.wants(suite) {
            for &n in ns {
                t.push(Task::Decay(suite, make(n).expect("gallery parameter")));
            }
        }
    }
    if cfg.wants(Suite::Sandwich) {
        t.extend((0..cfg.sandwich_domains).map(Task::Sandwich));
    }
    if cfg.wants(Suite::Packing) {
        t.push(Task::FatPacking);
        t.push(Task::CrossingPacking);
    }
    if cfg.wants(Suite::Axioms) {
        t.extend((0..3).map(Task::Axioms));
    }
    if cfg.wants(Suite::Certificate) {
        t.extend((0..cfg.certificate_fixtures).map(Task::Certificate));
    }
    if cfg.wants(Suite::Singleton) {
        t.extend((0..5).map(Task::Singleton));
    }
    t
}

fn solve(spec: &DomainSpec, fam: &CurveFamilySpec, h: f64, cfg: &SolverConfig) -> ModulusResult {
    let grid = QuotientGrid::rasterize(spec, h).expect("fixture rasterizes");
    modulus(&grid, fam, cfg).expect("fixture solves")
}

fn unit_box() -> BBox {
    BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0))
}

fn seg(x0: f64, y0: f64, x1: f64, y1: f64) -> PlanarSet {
    PlanarSet::segment(Point::new(x0, y0), Point::new(x1, y1))
}

fn left_right() -> CurveFamilySpec {
    CurveFamilySpec::new(seg(0.0, 0.0, 0.0, 1.0), seg(1.0, 0.0, 1.0, 1.0))
}

fn execute(task: Task, cfg: &CampaignConfig) -> Output {
    let sc = &cfg.solver;
    match task {
        Task::Square => {
            let spec = DomainSpec::new("square", unit_box(), vec![]);
            let r = solve(&spec, &left_right(), cfg.scaled(1.0 / 128.0), sc);
            Output::Rows(vec![Row::near(
                Suite::Oracle,
                "square",
                "unit square side-to-side family, classical modulus 1, within 10%",
                1.0,
                0.1,
                r.value,
            )])
        }
        Task::Annulus => {
            let spec = DomainSpec::new("annulus", BBox::new(Point::new(-E, -E), Point::new(E, E)), vec![]);
            let fam = CurveFamilySpec::new(PlanarSet::circle(Point::ORIGIN, 1.0), PlanarSet::circle(Point::ORIGIN, E));
            let r = solve(&spec, &fam, cfg.scaled(1.0 / 128.0), sc);
            Output::Rows(vec![Row::near(
                Suite::Oracle,
                "annulus",
                "round annulus of modulus ratio e, classical modulus 2pi, within 10%",
                TAU,
                0.1 * TAU,
                r.value,
            )])
        }
        Task::Decay(suite, case) => {
            let r = solve(&case.domain, &case.family, cfg.scaled(case.h), sc);
            Output::Decay(suite, case, r)
        }
        Task::Sandwich(i) => sandwich_domain(i, cfg),
        Task::FatPacking => Output::Rows(fat_packing(cfg)),
        Task::CrossingPacking => Output::Rows(crossing_packing(cfg)),
        Task::Axioms(k) => Output::Rows(axioms(k, cfg)),
        Task::Certificate(k) => Output::Rows(certificate(k, cfg)),
        Task::Singleton(k) => Output::Rows(singleton(k, cfg)),
    }
}

fn assemble(outputs: Vec<Output>, cfg: &CampaignConfig) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut decay: Vec<(Suite, ScenarioCase, ModulusResult)> = Vec::new();
    let mut sandwich: Vec<(usize, f64, f64, f64)> = Vec::new();
    for o in outputs {
        match o {
            Output::Rows(r) => rows.extend(r),
            Output::Decay(s, c, r) => decay.push((s, c, r)),
            Output::Sandwich(i, mk, m, sep) => sandwich.push((i, mk, m, sep)),
        }
    }
    for suite in [Suite::PolarDecay, Suite::TwinDecay, Suite::KissingDecay] {
        let mut cases: Vec<&(Suite, ScenarioCase, ModulusResult)> = decay.iter().filter(|d| d.0 == suite).collect();
        if cases.is_empty() {
            continue;
        }
        cases.sort_by_key(|d| d.1.n);
        rows.extend(decay_rows(suite, &cases, cfg));
    }
    if !sandwich.is_empty() {
        rows.extend(sandwich_rows(&mut sandwich));
    }
    rows
}

fn decay_rows(suite: Suite, cases: &[&(Suite, ScenarioCase, ModulusResult)], cfg: &CampaignConfig) -> Vec<Row> {
    let mut rows = Vec::new();
    let (cite, target) = match suite {
        Suite::PolarDecay => ("slit polar rectangle, value at most (1/n)/log 2 plus gap", -1.0),
        Suite::TwinDecay => ("twin squares, value at most 20/n plus gap", -1.0),
        _ => ("kissing disks, value at most (160/pi) sqrt(1/(2n-1)) plus gap", -0.5),
    };
    for (_, case, r) in cases {
        let bound = if suite == Suite::TwinDecay {
            cfg.twin_constant / case.n as f64
        } else {
            case.reference_bound.value
        };
        debug_assert_eq!(case.reference_bound.kind, BoundKind::Upper);
        rows.push(Row::at_most(suite, format!("n{:02}.bound", case.n), cite, bound, r.gap(), r.value));
        rows.push(Row::new(
            suite,
            format!("n{:02}.status", case.n),
            "solver reached its tolerances",
            0.0,
            if r.status == Status::Converged { 0.0 } else { 1.0 },
            if r.status == Status::Converged { 0.0 } else { -1.0 },
        ));
        match suite {
            Suite::TwinDecay => rows.push(Row::new(
                suite,
                format!("n{:02}.delta", case.n),
                "relative distance of the endpoint segments is exactly 1",
                1.0,
                case.delta,
                if case.delta == 1.0 { 0.0 } else { -(case.delta - 1.0).abs() },
            )),
            Suite::KissingDecay => rows.push(Row::at_most(
                suite,
                format!("n{:02}.delta", case.n),
                "relative distance of the endpoint segments at most 4 sqrt 5",
                4.0 * 5f64.sqrt(),
                0.0,
                case.delta,
            )),
            _ => {}
        }
    }
    let ns: Vec<f64> = cases.iter().map(|c| c.1.n as f64).collect();
    let vs: Vec<f64> = cases.iter().map(|c| c.2.value).collect();
    rows.push(Row::near(
        suite,
        "slope",
        "log-log slope of value against n, within 0.15",
        target,
        0.15,
        loglog_slope(&ns, &vs),
    ));
    rows
}

/// `τ = 1/4`, `λ = 1` for disks: `c = 68`, `c₁ = 1/(8c²)`.
pub const SANDWICH_C: f64 = 68.0;

pub fn sandwich_c1() -> f64 {
    1.0 / (8.0 * SANDWICH_C * SANDWICH_C)
}

fn sandwich_domain(i: usize, cfg: &CampaignConfig) -> Output {
    let dom = circle_domain_random(cfg.seed.wrapping_mul(1000).wrapping_add(i as u64), 8, 1.0)
        .expect("eight separated disks fit in the unit box");
    let h = cfg.scaled(1.0 / 64.0);
    let plain = DomainSpec::new("plain", dom.spec.ambient, vec![]);
    let mk = solve(&dom.spec, &left_right(), h, &cfg.solver).value;
    let m = solve(&plain, &left_right(), h, &cfg.solver).value;
    Output::Sandwich(i, mk, m, dom.separation)
}

fn sandwich_rows(data: &mut [(usize, f64, f64, f64)]) -> Vec<Row> {
    data.sort_by_key(|d| d.0);
    let c1 = sandwich_c1();
    let c2 = data.iter().map(|d| d.1 / d.2).fold(f64::INFINITY, f64::min);
    let mut rows = Vec::new();
    let mut in_regime = 0;
    for &(i, mk, m, sep) in data.iter() {
        let floor = c1.min(c2 * m);
        rows.push(Row::new(
            Suite::Sandwich,
            format!("d{i:02}.lower"),
            "transboundary modulus at least min(c1, c2 times classical modulus)",
            floor,
            mk,
            mk - floor,
        ));
        rows.push(Row::new(
            Suite::Sandwich,
            format!("d{i:02}.separation"),
            "disks uniformly relatively separated at level 1",
            1.0,
            sep,
            sep - 1.0,
        ));
        if c2 * m >= c1 {
            in_regime += 1;
            rows.push(Row::new(
                Suite::Sandwich,
                format!("d{i:02}.c1_branch"),
                "where c2 times classical modulus reaches c1, transboundary modulus at least c1",
                c1,
                mk,
                mk - c1,
            ));
        }
    }
    rows.push(Row::new(Suite::Sandwich, "c2", "measured infimum of the modulus ratio, positive", 0.0, c2, c2));
    rows.push(Row::new(
        Suite::Sandwich,
        "c1_branch_count",
        "domains on which the c1 branch is exercised",
        0.0,
        in_regime as f64,
        0.0,
    ));
    rows
}

fn fat_packing(cfg: &CampaignConfig) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0001);
    let e = seg(0.0, 0.0, 1.0, 0.0);
    let (tau, lambda) = (0.25, 1.0);
    let bound = fat_count_bound(tau, lambda);
    let mut worst = 0usize;
    for _ in 0..cfg.packing_trials {
        let mut disks: Vec<PlanarSet> = Vec::new();
        for _ in 0..60 {
            let r = rng.random_range(0.5..1.5);
            // Centre within distance r of E, so the disk meets it.
            let t = rng.random_range(0.0..1.0);
            let a = rng.random_range(0.0..TAU);
            let s = r * rng.random::<f64>().sqrt();
            let c = Point::new(t + s * a.cos(), s * a.sin());
            let d = PlanarSet::disk(c, r);
            if disks.iter().all(|o| !o.intersects(&d)) {
                disks.push(d);
            }
        }
        worst = worst.max(count_fat_meeting(&e, &disks, tau, lambda).expect("valid packing"));
    }
    vec![Row::at_most(
        Suite::Packing,
        "fat_meeting",
        "disjoint 1/4-fat sets of diameter at least diam E meeting E: at most (l^2+6l+1)/tau",
        bound,
        0.0,
        worst as f64,
    )]
}

fn crossing_packing(cfg: &CampaignConfig) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0002);
    let mut worst = 0usize;
    for _ in 0..cfg.packing_trials {
        let ratio = rng.random_range(14.0..40.0);
        let a = Annulus::new(Point::ORIGIN, 1.0, ratio).expect("annulus");
        let mut disks: Vec<PlanarSet> = Vec::new();
        for _ in 0..40 {
            let rad = rng.random_range(0.5 * (ratio - 1.0)..3.0 * ratio);
            // Centre distance in [R - ρ, 1 + ρ] makes the disk cross.
            let lo = (ratio - rad).max(0.0);
            let dist = rng.random_range(lo..=1.0 + rad);
            let th = rng.random_range(0.0..TAU);
            let d = PlanarSet::disk(Point::new(dist * th.cos(), dist * th.sin()), rad);
            if disks.iter().all(|o| !o.intersects(&d)) {
                disks.push(d);
            }
        }
        worst = worst.max(count_crossing_disks(&a, &disks).expect("disjoint disks"));
    }
    let a = Annulus::new(Point::ORIGIN, 1.0, 3.0).expect("annulus");
    let witness: Vec<PlanarSet> = (0..3)
        .map(|k| PlanarSet::disk(Point::polar(k as f64 * TAU / 3.0) * 2.0, 1.05))
        .collect();
    let three = count_crossing_disks(&a, &witness).expect("disjoint witness");
    vec![
        Row::at_most(
            Suite::Packing,
            "crossing",
            "disjoint disks crossing an annulus of ratio at least 14: at most 2",
            2.0,
            0.0,
            worst as f64,
        ),
        Row::new(
            Suite::Packing,
            "witness",
            "three disjoint disks cross an annulus of ratio 3",
            3.0,
            three as f64,
            three as f64 - 3.0,
        ),
    ]
}

/// Hand-built fixtures for the axiom and singleton batteries. Every
/// continuum lies within one horizontal half and off the line `x = 1/2`.
pub fn axiom_fixture(k: usize) -> DomainSpec {
    let continua = match k {
        0 => vec![],
        1 => vec![
            PlanarSet::disk(Point::new(0.3, 0.25), 0.12),
            PlanarSet::disk(Point::new(0.7, 0.75), 0.12),
        ],
        _ => vec![
            PlanarSet::rect(0.15, 0.35, 0.1, 0.35),
            PlanarSet::disk(Point::new(0.75, 0.75), 0.1),
        ],
    };
    DomainSpec::new(&format!("axiom_{k}"), unit_box(), continua)
}

fn axioms(k: usize, cfg: &CampaignConfig) -> Vec<Row> {
    let spec = axiom_fixture(k);
    let grid = QuotientGrid::rasterize(&spec, cfg.scaled(1.0 / 32.0)).expect("fixture rasterizes");
    let sc = &cfg.solver;
    let one = |f: &CurveFamilySpec| modulus(&grid, f, sc).expect("fixture solves");
    let union = |fs: &[CurveFamilySpec]| modulus_union(&grid, fs, sc).expect("fixture solves");
    let lr = left_right();
    let partial = CurveFamilySpec::new(seg(0.0, 0.2, 0.0, 0.6), seg(1.0, 0.0, 1.0, 1.0));
    let to_mid = CurveFamilySpec::new(seg(0.0, 0.0, 0.0, 1.0), seg(0.5, 0.0, 0.5, 1.0));
    let bt = CurveFamilySpec::new(seg(0.0, 0.0, 1.0, 0.0), seg(0.0, 1.0, 1.0, 1.0));
    let restricted = |y0: f64, y1: f64| {
        let mut f = left_right();
        f.ambient_restriction = Some(BBox::new(Point::new(0.0, y0), Point::new(1.0, y1)));
        f
    };
    let (lower, upper) = (restricted(0.0, 0.45), restricted(0.55, 1.0));

    let r_lr = one(&lr);
    let r_partial = one(&partial);
    let r_mid = one(&to_mid);
    let r_bt = one(&bt);
    let r_cross = union(&[lr.clone(), bt]);
    let r_lo = one(&lower);
    let r_up = one(&upper);
    let r_split = union(&[lower, upper]);

    let id = |s: &str| format!("f{k}.{s}");
    let mut rows = vec![
        Row::at_most(
            Suite::Axioms,
            id("monotone"),
            "subfamily has no larger modulus",
            r_lr.value,
            2.0 * (r_lr.gap() + r_partial.gap()),
            r_partial.value,
        ),
        Row::at_most(
            Suite::Axioms,
            id("overflow"),
            "family whose curves contain curves of another has no larger modulus",
            r_mid.value,
            2.0 * (r_lr.gap() + r_mid.gap()),
            r_lr.value,
        ),
        Row::at_most(
            Suite::Axioms,
            id("subadditive"),
            "modulus of a union at most the sum",
            r_lr.value + r_bt.value,
            2.0 * (r_cross.gap() + r_lr.gap() + r_bt.gap()),
            r_cross.value,
        ),
    ];
    let sum = r_lo.value + r_up.value;
    let tol = 2.0 * (r_split.gap() + r_lo.gap() + r_up.gap());
    rows.push(Row::near(
        Suite::Axioms,
        id("disjoint_additive"),
        "families in disjoint regions: modulus of the union equals the sum",
        sum,
        tol,
        r_split.value,
    ));
    rows
}

/// A circle-domain fixture around a tiny segment `E` at the origin with
/// `F` the unit circle: one or two disks span most of the scales between
/// them, plus a few small disks scattered by `seed`.
pub fn certificate_fixture(k: usize, seed: u64) -> (DomainSpec, PlanarSet, PlanarSet) {
    let mut disks = if k % 2 == 0 {
        vec![PlanarSet::disk(Point::new(0.475, 0.0), 0.425)]
    } else {
        vec![
            PlanarSet::disk(Point::new(0.31, 0.0), 0.29),
            PlanarSet::disk(Point::new(-0.33, 0.0), 0.27),
        ]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(7919).wrapping_add(k as u64));
    let mut placed = 0;
    while placed < 6 {
        let r = rng.random_range(0.01..0.04);
        let c = Point::polar(rng.random_range(0.0..TAU)) * rng.random_range(0.15..1.3);
        let n = c.norm();
        let clear_of_f = n + r < 0.95 || n - r > 1.05;
        let d = PlanarSet::disk(c, r);
        if n > 0.15 && clear_of_f && disks.iter().all(|o| o.dist(&d) > 2.0 * r) {
            disks.push(d);
            placed += 1;
        }
    }
    let spec = DomainSpec::new(&format!("circles_{k}"), BBox::new(Point::new(-2.0, -2.0), Point::new(2.0, 2.0)), disks);
    let e = seg(0.0, 0.0, 1e-4, 0.0);
    let f = PlanarSet::circle(Point::ORIGIN, 1.0);
    (spec, e, f)
}

fn certificate(k: usize, cfg: &CampaignConfig) -> Vec<Row> {
    let (spec, e, f) = certificate_fixture(k, cfg.seed);
    let id = |s: &str| format!("c{k}.{s}");
    let cert = match find_wide_subannulus(&spec, &e, &f) {
        Ok(Some(c)) => c,
        _ => {
            return vec![Row::new(Suite::Certificate, id("found"), "certificate exists", 1.0, 0.0, -1.0)];
        }
    };
    let mass = certificate_mass(&cert, &spec);
    let lp = cert.local_problem(&spec);
    let h = cfg.scaled(cert.annulus.r / 8.0);
    let grid = QuotientGrid::rasterize(&lp.spec, h).expect("local problem rasterizes");
    let r = modulus(&grid, &lp.family, &cfg.solver).expect("local problem solves");
    let ep = grid.family_endpoints(&lp.family).expect("endpoints");
    let rho = cert.discretize(&grid, &lp.index);
    let adm = verify_admissible(&grid, &rho, &ep, 64, 0.0, cfg.seed);
    vec![
        Row::at_most(
            Suite::Certificate,
            id("solver"),
            "solver value at most certificate mass times 1.02",
            1.02 * mass,
            0.0,
            r.value,
        ),
        Row::at_most(
            Suite::Certificate,
            id("mass"),
            "certificate mass at most 2pi/L + 32/L + 32/L^(1/3)",
            cert.reference_bound(),
            0.0,
            mass,
        ),
        Row::new(
            Suite::Certificate,
            id("admissible"),
            "discretized certificate gives every grid curve length at least 1",
            1.0,
            adm.min_length,
            adm.min_length - 1.0,
        ),
        Row::new(
            Suite::Certificate,
            id("delta"),
            "relative distance above 14^3",
            14f64.powi(3),
            cert.delta,
            cert.delta - 14f64.powi(3),
        ),
    ]
}

/// Singleton battery: three axiom fixtures, a twin-squares case, and a
/// random circle domain, each solved with and without 10 extra points.
fn singleton(k: usize, cfg: &CampaignConfig) -> Vec<Row> {
    let (mut spec, fam, h) = match k {
        0..=2 => (axiom_fixture(k), left_right(), 1.0 / 32.0),
        3 => {
            let c = twin_squares_domain(5).expect("valid n");
            (c.domain, c.family, 1.0 / 64.0)
        }
        _ => {
            let d = circle_domain_random(cfg.seed.wrapping_add(77), 8, 1.0).expect("fits");
            (d.spec, left_right(), 1.0 / 64.0)
        }
    };
    let h = cfg.scaled(h);
    let before = solve(&spec, &fam, h, &cfg.solver);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0x5100 + k as u64));
    let a = spec.ambient;
    while spec.points.len() < 10 {
        let p = Point::new(rng.random_range(a.min.x..a.max.x), rng.random_range(a.min.y..a.max.y));
        if spec.continua.iter().all(|c| !c.contains(p)) {
            spec.points.push(p);
        }
    }
    let after = solve(&spec, &fam, h, &cfg.solver);
    let diff = (after.value - before.value).abs();
    let gap = before.gap().max(after.gap());
    vec![Row::new(
        Suite::Singleton,
        format!("f{k}"),
        "ten added point components change the value by less than the certificate gap",
        before.value,
        after.value,
        if diff == 0.0 { gap } else { gap - diff },
    )]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_sort_by_suite_then_id() {
        let cfg = CampaignConfig {
            suites: vec![Suite::Packing, Suite::Oracle],
            packing_trials: 50,
            h_scale: 4.0,
            ..CampaignConfig::default()
        };
        let rep = run(&cfg);
        let ids: Vec<&str> = rep.rows.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(
            ids,
            ["oracle.annulus", "oracle.square", "packing.crossing", "packing.fat_meeting", "packing.witness"]
        );
    }

    #[test]
    fn suite_names_match_config_spelling() {
        for s in Suite::ALL {
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.as_str()));
        }
    }

    #[test]
    fn scaled_keeps_reciprocals() {
        let cfg = CampaignConfig {
            h_scale: 2.0,
            ..CampaignConfig::default()
        };
        assert_eq!(cfg.scaled(1.0 / 128.0), 1.0 / 64.0);
        assert_eq!(cfg.scaled(0.03), 0.06);
    }

    #[test]
    fn witness_disks_are_disjoint() {
        let w: Vec<PlanarSet> = (0..3)
            .map(|k| PlanarSet::disk(Point::polar(k as f64 * TAU / 3.0) * 2.0, 1.05))
            .collect();
        // Centres sit 2 sqrt 3 apart.
        assert!((w[0].dist(&w[1]) - (2.0 * 3f64.sqrt() - 2.1)).abs() < 1e-12);
    }

    #[test]
    fn certificate_fixtures_narrow() {
        for k in 0..2 {
            let (spec, e, f) = certificate_fixture(k, 1);
            spec.validate().unwrap();
            let cert = find_wide_subannulus(&spec, &e, &f).unwrap().unwrap();
            assert_eq!(cert.forbidden.len(), k + 1);
        }
    }
}
