use bcoh_core::eightmodel::{GeometryParams, ModelGeometry, Point, RegionLabel, TransformationElement};
use bcoh_core::homotopy::{gamma, gamma_piecewise, gamma_traced, CutSystem};
use bcoh_core::rng::{self, Domain};
use bcoh_core::Word;
use rand::Rng;

fn setup() -> (ModelGeometry, CutSystem) {
    let g = ModelGeometry::new(GeometryParams::default()).unwrap();
    let c = CutSystem::new(&g).unwrap();
    (g, c)
}

fn sample<R: Rng>(geom: &ModelGeometry, rng: &mut R) -> Point {
    let r = geom.ambient_radius();
    loop {
        let p = Point::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if geom.contains(p) {
            return p;
        }
    }
}

/// Points concentrated near the tubes, where γ is nontrivial.
fn sample_near_tubes<R: Rng>(geom: &ModelGeometry, rng: &mut R) -> Point {
    loop {
        let p = Point::new(rng.gen_range(-2.8..2.8), rng.gen_range(-1.8..1.8));
        if geom.contains(p) {
            return p;
        }
    }
}

#[test]
fn cocycle_identity_holds_exactly() {
    let (geom, cuts) = setup();
    for i in 0..1000u64 {
        let mut rng = rng::stream(41, Domain::Manifold, i);
        let g1: TransformationElement = Word::random_up_to(&mut rng, 6).into();
        let g2: TransformationElement = Word::random_up_to(&mut rng, 6).into();
        let x = if i % 2 == 0 { sample_near_tubes(&geom, &mut rng) } else { sample(&geom, &mut rng) };
        let lhs = gamma(&geom, &cuts, &g1.multiply(&g2), x).unwrap();
        let rhs = gamma(&geom, &cuts, &g1, geom.apply(&g2, x))
            .unwrap()
            .multiply(&gamma(&geom, &cuts, &g2, x).unwrap());
        assert_eq!(lhs, rhs, "g1={g1} g2={g2} x={x:?}");
    }
}

#[test]
fn piecewise_table_matches_tracer() {
    let (geom, cuts) = setup();
    let mut checked = 0;
    let mut i = 0u64;
    while checked < 10_000 {
        let mut rng = rng::stream(42, Domain::Manifold, i);
        i += 1;
        let x = sample_near_tubes(&geom, &mut rng);
        if geom.classify_region(x) == RegionLabel::Collar {
            continue;
        }
        let w = Word::random_up_to(&mut rng, 6);
        let traced = gamma(&geom, &cuts, &w.clone().into(), x).unwrap();
        let table = gamma_piecewise(&geom, &cuts, &w, x).unwrap();
        assert_eq!(traced, table, "w={w} x={x:?} region={}", geom.classify_region(x));
        checked += 1;
    }
}

#[test]
fn refining_trajectories_keeps_the_class() {
    let (geom, cuts) = setup();
    for i in 0..1000u64 {
        let mut rng = rng::stream(43, Domain::Manifold, i);
        let g: TransformationElement = Word::random_up_to(&mut rng, 6).into();
        let x = sample_near_tubes(&geom, &mut rng);
        let coarse = gamma_traced(&geom, &cuts, &g, x, 16).unwrap().word;
        let fine = gamma_traced(&geom, &cuts, &g, x, 64).unwrap().word;
        assert_eq!(coarse, fine);
    }
}

#[test]
fn word_length_is_linearly_bounded() {
    let (geom, cuts) = setup();
    let mut ratio: f64 = 0.0;
    for i in 0..2000u64 {
        let mut rng = rng::stream(44, Domain::Manifold, i);
        let n = rng.gen_range(1..=8);
        let g: TransformationElement = Word::random(&mut rng, n).into();
        let x = sample_near_tubes(&geom, &mut rng);
        let len = gamma(&geom, &cuts, &g, x).unwrap().len();
        assert!(len <= g.len() + 4, "|γ| = {len} for |g| = {}", g.len());
        ratio = ratio.max(len as f64 / g.len() as f64);
    }
    assert!(ratio <= 5.0);
}
