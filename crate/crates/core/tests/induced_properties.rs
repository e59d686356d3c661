use std::sync::Arc;

use bcoh_core::cochains::{coboundary, qm_to_two_cocycle, Cochain};
use bcoh_core::eightmodel::{GeometryParams, ModelGeometry, RegionLabel, TransformationElement};
use bcoh_core::hypervol::{loxodromic_pair, volume_cocycle, ActionParams, KleinPoint};
use bcoh_core::induce::{Induction, Integrator};
use bcoh_core::rng::{self, Domain};
use bcoh_core::{Letter, Quasimorphism, Word};
use rand::Rng;

fn setup() -> Induction {
    Induction::new(ModelGeometry::new(GeometryParams::default()).unwrap()).unwrap()
}

fn random_tuple(seed: u64, i: u64, len: usize, max_len: usize) -> Vec<TransformationElement> {
    let mut rng = rng::stream(seed, Domain::Tuples, i);
    (0..len).map(|_| Word::random_up_to(&mut rng, max_len).into()).collect()
}

fn qm_cocycle() -> impl Cochain {
    qm_to_two_cocycle(&Quasimorphism::brooks_homogeneous(&"ab".parse().unwrap()).unwrap()).unwrap()
}

#[test]
fn induced_qm_cocycle_is_closed_and_homogeneous() {
    let ind = setup();
    let c = qm_cocycle();
    let dc = coboundary(&c);
    let integ = Integrator::monte_carlo(4000, 11);
    for i in 0..10u64 {
        let t = random_tuple(51, i, 4, 4);
        let v = ind.induce(&dc, &t, &integ).unwrap();
        assert!(v.value.abs() <= 3.0 * v.stat_error + 1e-9, "{v:?}");

        let mut rng = rng::stream(52, Domain::Tuples, i);
        let h = TransformationElement::push(Letter::ALL[rng.gen_range(0..4)]);
        let base = &t[..3];
        let shifted: Vec<_> = base.iter().map(|g| g.multiply(&h)).collect();
        let a = ind.induce(&c, base, &integ).unwrap();
        let b = ind.induce(&c, &shifted, &integ).unwrap();
        let sigma = (a.stat_error.powi(2) + b.stat_error.powi(2)).sqrt();
        assert!((a.value - b.value).abs() <= 3.0 * sigma + 1e-9, "{a:?} {b:?}");
        let sup = c.sup_bound().unwrap();
        assert!(a.value.abs() <= sup * ind.geometry().area() + 3.0 * a.stat_error);
    }
}

#[test]
fn regions_and_mc_agree_for_qm_cocycle() {
    let ind = setup();
    let c = qm_cocycle();
    for i in 0..10u64 {
        let t = random_tuple(53, i, 3, 4);
        let mc = ind.induce(&c, &t, &Integrator::monte_carlo(1_000_000, 12)).unwrap();
        let rg = ind.induce(&c, &t, &Integrator::regions(20_000, 13)).unwrap();
        let sigma = (mc.stat_error.powi(2) + rg.stat_error.powi(2)).sqrt();
        assert!((mc.value - rg.value).abs() <= 3.0 * sigma + 1e-9, "{mc:?} {rg:?}");
    }
}

#[test]
fn volume_pipeline_is_a_finite_weighted_sum() {
    let ind = setup();
    let p = ActionParams::default();
    let action = Arc::new(loxodromic_pair(p.translation_length, p.rotation_angle, p.axis_separation).unwrap());
    let vol = volume_cocycle(action, KleinPoint::origin(), 1e-6).unwrap();
    let t: Vec<TransformationElement> = ["ab", "b", "A", "e"].iter().map(|s| s.parse().unwrap()).collect();
    let terms = ind.region_terms(&vol, &t, 7).unwrap();
    assert!(terms.len() <= 4 * 5);
    let core: f64 = terms.iter().map(|t| t.weight * t.cochain_value).sum();
    let rg = ind.induce(&vol, &t, &Integrator::regions(2000, 14)).unwrap();
    let collar = rg.region_breakdown.iter().find(|r| r.region == RegionLabel::Collar).unwrap().contribution;
    assert!((rg.value - core - collar).abs() < 1e-9);
    let mc = ind.induce(&vol, &t, &Integrator::monte_carlo(20_000, 15)).unwrap();
    let sigma = (mc.stat_error.powi(2) + rg.stat_error.powi(2)).sqrt();
    assert!((mc.value - rg.value).abs() <= 3.0 * sigma, "{mc:?} {rg:?}");
    assert!(rg.value.abs() <= 1.015 * ind.geometry().area());
}

#[test]
fn essential_image_of_a_push() {
    let ind = setup();
    let g = TransformationElement::push(Letter::A);
    let img = ind.essential_image(&g, 20_000, 16).unwrap();
    let total: f64 = img.iter().map(|(_, f)| f).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let geom = ind.geometry();
    let p_out = geom.region_measure(RegionLabel::Outside) / geom.area();
    let freq_e = img.iter().find(|(w, _)| w.is_identity()).map_or(0.0, |(_, f)| *f);
    let sigma = (p_out * (1.0 - p_out) / 20_000.0).sqrt();
    assert!(freq_e >= p_out - 3.0 * sigma);
    // Words carrying more mass than the whole collar come from the closed form.
    let collar_share = geom.region_measure(RegionLabel::Collar) / geom.area();
    let a = Word::letter(Letter::A);
    let allowed = [
        Word::identity(),
        a.clone(),
        a.conjugate_by(&Word::letter(Letter::B)),
        a.conjugate_by(&Word::letter(Letter::BInv)),
    ];
    for (w, f) in &img {
        if *f > collar_share {
            assert!(allowed.contains(w), "{w} with frequency {f}");
        }
    }
    let small = ind.essential_image(&g, 100_000, 17).unwrap();
    let large = ind.essential_image(&g, 200_000, 17).unwrap();
    assert_eq!(small.len(), large.len());
}
