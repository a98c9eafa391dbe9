#![cfg(feature = "oracle")]

use proptest::prelude::*;
use tvdd::fidelity::shrink;
use tvdd::oracle::{prox_search, scalar_terms, ScalarTerm};
use tvdd::prelude::*;

const KINDS: [FidelityKind; 5] = [
    FidelityKind::RofL2,
    FidelityKind::TvL1,
    FidelityKind::InpaintL2,
    FidelityKind::InpaintL1,
    FidelityKind::Segmentation,
];

fn model(kind: FidelityKind, alpha: f64, f: ImageField, mask: Mask) -> FidelityModel {
    match kind {
        FidelityKind::RofL2 => FidelityModel::rof(alpha, f),
        FidelityKind::TvL1 => FidelityModel::tv_l1(alpha, f),
        FidelityKind::InpaintL2 => FidelityModel::inpaint_l2(alpha, f, mask),
        FidelityKind::InpaintL1 => FidelityModel::inpaint_l1(alpha, f, mask),
        FidelityKind::Segmentation => FidelityModel::segmentation(alpha, f, 0.6, 0.1),
    }
    .unwrap()
}

fn scalar(kind: FidelityKind, f: f64, missing: bool) -> FidelityModel {
    let shape = GridShape::new(1, 1).unwrap();
    model(kind, 1.0, ImageField::constant(shape, f), Mask::new(shape, vec![missing]).unwrap())
}

fn objective(term: &ScalarTerm, u: f64, sigma: f64, v: f64) -> f64 {
    term.value(v) + (v - u) * (v - u) / (2.0 * sigma)
}

fn kind_strategy() -> impl Strategy<Value = FidelityKind> {
    prop::sample::select(KINDS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn prox_beats_grid_and_matches_golden_section(
        kind in kind_strategy(),
        f in -1.0..2.0f64,
        u in -2.0..3.0f64,
        log_sigma in -3.0..1.0f64,
        missing in any::<bool>(),
    ) {
        let sigma = 10f64.powf(log_sigma);
        let m = scalar(kind, f, missing);
        let term = scalar_terms(&m)[0];
        let closed = m.prox(&ImageField::constant(m.shape(), u), sigma).unwrap().values()[0];
        let best = objective(&term, u, sigma, closed);
        let lo = u.min(f).min(0.0) - 1.0;
        let hi = u.max(f).max(1.0) + 1.0;
        let steps = ((hi - lo) / 1e-3).ceil() as usize;
        for k in 0..=steps {
            let v = lo + k as f64 * 1e-3;
            prop_assert!(best <= objective(&term, u, sigma, v) + 1e-12);
        }
        prop_assert!((closed - prox_search(&term, u, sigma)).abs() <= 1e-6);
    }

    #[test]
    fn energy_is_separable_and_prox_commutes_with_restriction(
        kind in kind_strategy(),
        values in prop::collection::vec(-0.5..1.5f64, 48),
        mask_bits in prop::collection::vec(any::<bool>(), 48),
        sigma in 0.01..5.0f64,
        (nx, ny) in (1usize..=4, 1usize..=3),
    ) {
        let shape = GridShape::new(6, 8).unwrap();
        let f = ImageField::new(shape, values.clone()).unwrap();
        let m = model(kind, 2.5, f, Mask::new(shape, mask_bits).unwrap());
        let u = m.initial_guess().map(|x| (x * 0.7 + 0.1).clamp(0.0, 1.0));
        let part = Partition::uniform(shape, nx, ny).unwrap();
        let whole = m.energy(&u).unwrap();
        let mut sum = 0.0;
        let mut blocks = Vec::new();
        for sub in part.subdomains() {
            let u_s = part.restrict_image(&u, sub.id).unwrap();
            sum += m.energy_local(sub, &u_s).unwrap();
            blocks.push(m.prox_local(sub, &u_s, sigma).unwrap());
            prop_assert_eq!(m.restrict(sub).energy(&u_s).unwrap(), m.energy_local(sub, &u_s).unwrap());
        }
        prop_assert!((whole - sum).abs() <= 1e-12 * whole.abs().max(1.0));
        prop_assert_eq!(part.assemble_image(&blocks).unwrap(), m.prox(&u, sigma).unwrap());
    }

    #[test]
    fn prox_is_firmly_nonexpansive(
        kind in kind_strategy(),
        a in prop::collection::vec(-2.0..3.0f64, 12),
        b in prop::collection::vec(-2.0..3.0f64, 12),
        f in prop::collection::vec(0.0..1.0f64, 12),
        sigma in 0.01..5.0f64,
    ) {
        let shape = GridShape::new(3, 4).unwrap();
        let mask = Mask::new(shape, (0..12).map(|k| k % 3 == 0).collect()).unwrap();
        let m = model(kind, 1.5, ImageField::new(shape, f).unwrap(), mask);
        let ua = ImageField::new(shape, a).unwrap();
        let ub = ImageField::new(shape, b).unwrap();
        let pa = m.prox(&ua, sigma).unwrap();
        let pb = m.prox(&ub, sigma).unwrap();
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for k in 0..12 {
            let dp = pa.values()[k] - pb.values()[k];
            lhs += dp * dp;
            rhs += dp * (ua.values()[k] - ub.values()[k]);
        }
        prop_assert!(lhs <= rhs + 1e-12);
    }
}

#[test]
fn energy_examples() {
    let shape = GridShape::new(1, 2).unwrap();
    let f = ImageField::new(shape, vec![0.0, 0.0]).unwrap();
    let u = ImageField::new(shape, vec![0.0, 1.0]).unwrap();
    // TV = 1, αF = ½ (0 + 1)
    assert_eq!(FidelityModel::rof(1.0, f).unwrap().energy_total(&u).unwrap(), 1.5);

    let f = ImageField::new(shape, vec![0.0, 0.0]).unwrap();
    let u = ImageField::new(shape, vec![0.3, -0.4]).unwrap();
    assert!((FidelityModel::tv_l1(1.0, f).unwrap().energy(&u).unwrap() - 0.7).abs() < 1e-15);
}

#[test]
fn prox_examples() {
    let shape = GridShape::new(1, 1).unwrap();
    let one = ImageField::constant(shape, 1.0);
    let rof = FidelityModel::rof(1.0, ImageField::zeros(shape)).unwrap();
    assert_eq!(rof.prox(&one, 1.0).unwrap().values(), &[0.5]);

    let v = ImageField::new(GridShape::new(1, 3).unwrap(), vec![2.0, -0.3, -2.0]).unwrap();
    let s = shrink(&v, 1.0, &[true, true, false]).unwrap();
    assert_eq!(s.values(), &[1.0, 0.0, -2.0]);

    let seg = FidelityModel::segmentation(1.0, ImageField::constant(shape, 0.6), 0.6, 0.1).unwrap();
    // g = 0 - 0.25 = -0.25, prox = clamp(u + 0.25σ)
    assert_eq!(seg.prox(&ImageField::constant(shape, 0.9), 1.0).unwrap().values(), &[1.0]);
    assert_eq!(seg.prox(&ImageField::constant(shape, -3.0), 1.0).unwrap().values(), &[0.0]);
}

#[test]
fn segmentation_energy_is_infinite_outside_the_box() {
    let shape = GridShape::new(2, 2).unwrap();
    let m = FidelityModel::segmentation(10.0, ImageField::constant(shape, 0.3), 0.6, 0.1).unwrap();
    assert!(m.energy(&ImageField::constant(shape, 0.5)).unwrap().is_finite());
    assert_eq!(m.energy(&ImageField::constant(shape, 1.5)).unwrap(), f64::INFINITY);
}

#[test]
fn inpainting_zeroes_data_on_the_mask() {
    let shape = GridShape::new(1, 3).unwrap();
    let mask = Mask::new(shape, vec![false, true, false]).unwrap();
    let f = ImageField::new(shape, vec![0.2, 0.9, 0.4]).unwrap();
    let m = FidelityModel::inpaint_l2(1.0, f, mask).unwrap();
    assert_eq!(m.data().values(), &[0.2, 0.0, 0.4]);
    // missing pixels are left alone by the prox
    let u = ImageField::new(shape, vec![1.0, 5.0, 1.0]).unwrap();
    assert_eq!(m.prox(&u, 1.0).unwrap().values()[1], 5.0);
}

#[test]
fn invalid_models_are_rejected() {
    let shape = GridShape::new(2, 2).unwrap();
    let f = ImageField::zeros(shape);
    assert!(FidelityModel::rof(0.0, f.clone()).is_err());
    assert!(FidelityModel::tv_l1(-1.0, f.clone()).is_err());
    let wrong = Mask::none(GridShape::new(3, 2).unwrap());
    assert!(FidelityModel::inpaint_l1(1.0, f, wrong).is_err());
}
