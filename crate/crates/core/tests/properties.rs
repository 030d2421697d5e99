use std::sync::OnceLock;

use orbindex::groups::{parse_permutation_text, Affine, GroupElement, WallpaperKind};
use orbindex::index_engine::{evaluate, index_by_cyclic, pair_twist};
use orbindex::oracle::{closed_form_L, kernel_character, lefschetz_average};
use orbindex::strata::{instantiate, ManifoldModel, ModelId, Operator, SpinLift, Twist};
use orbindex::{GroupModel, Representation};
use proptest::prelude::*;

fn catalog() -> &'static Vec<ManifoldModel> {
    static MODELS: OnceLock<Vec<ManifoldModel>> = OnceLock::new();
    MODELS.get_or_init(|| {
        let mut ids: Vec<ModelId> = (1..=8).map(ModelId::Football).collect();
        ids.extend([2, 3, 4, 6].map(ModelId::TorusRot));
        ids.push(ModelId::SymProdS2);
        ids.extend(WallpaperKind::ALL.map(ModelId::Wallpaper));
        ids.iter().map(|id| instantiate(id).unwrap()).collect()
    })
}

/// A supported (operator, twist) on the model, chosen from the raw draws.
fn pick_case(m: &ManifoldModel, op_pick: usize, degree: i64, weight: i64) -> (Operator, Twist) {
    let op = m.operators[op_pick % m.operators.len()];
    let twist = Twist::line(degree, weight);
    if m.check_twist(op, &twist).is_ok() {
        return (op, twist);
    }
    let weight_only = Twist::line(0, weight);
    if m.check_twist(op, &weight_only).is_ok() {
        return (op, weight_only);
    }
    (op, Twist::trivial())
}

fn order(m: &ManifoldModel) -> i64 {
    m.group.finite_quotient_order() as i64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn groupings_agree_and_are_integral(
        model in 0..17usize, op in 0..4usize, degree in -4..=4i64, weight in 0..12i64, rho in 0..12i64,
    ) {
        let m = &catalog()[model];
        let (op, twist) = pick_case(m, op, degree, weight);
        let rho = Representation::Character(rho % order(m));
        let e = evaluate(m, op, &twist, &rho).unwrap();
        prop_assert_eq!(&e.by_elements.total, &e.by_cyclic.total);
        prop_assert!(e.by_elements.total.is_integer());
        prop_assert_eq!(e.oracle.as_ref(), Some(&e.by_elements.total));
    }

    #[test]
    fn index_is_additive(model in 0..17usize, a in -3..=3i64, b in -3..=3i64, wa in 0..6i64, wb in 0..6i64) {
        let m = &catalog()[model];
        let (_, ta) = pick_case(m, 1, a, wa);
        let (_, tb) = pick_case(m, 1, b, wb);
        let op = Operator::Dolbeault;
        prop_assume!(m.supports(op));
        let rho = Representation::Trivial;
        let sum = index_by_cyclic(m, op, &ta.direct_sum(&tb), &rho).unwrap().total;
        let parts = index_by_cyclic(m, op, &ta, &rho).unwrap().total + index_by_cyclic(m, op, &tb, &rho).unwrap().total;
        prop_assert_eq!(sum, parts);
        let paired = pair_twist(m, op, &ta.direct_sum(&tb), &rho).unwrap().total;
        prop_assert_eq!(paired, index_by_cyclic(m, op, &ta.direct_sum(&tb), &rho).unwrap().total);
    }

    #[test]
    fn fourier_inversion(model in 0..17usize, op in 0..4usize, degree in -3..=3i64, weight in 0..6i64, power in 0..12u32) {
        let m = &catalog()[model];
        let (op, twist) = pick_case(m, op, degree, weight);
        let n = order(m);
        let g = match &m.group {
            GroupModel::Finite(fg) => GroupElement::Finite(fg.pow(fg.cyclic_generator().unwrap(), power as i64)),
            GroupModel::Wallpaper(_) => m
                .group
                .finite_order_classes()
                .into_iter()
                .map(|c| c.rep)
                .nth(power as usize % m.group.finite_order_classes().len())
                .unwrap(),
        };
        let mut acc = orbindex::Cyclotomic::zero();
        for j in 0..n {
            let rho = Representation::Character(j);
            let index = index_by_cyclic(m, op, &twist, &rho).unwrap().total;
            acc = acc + orbindex::groups::character_value(&m.group, &rho, &g).unwrap().conj().scale(&index);
        }
        prop_assert_eq!(acc, closed_form_L(&m.group, &m.id, op, &twist, &g).unwrap());
    }

    #[test]
    fn regular_average_is_dimension(model in 0..17usize, op in 0..4usize, degree in -3..=3i64, weight in 0..6i64) {
        let m = &catalog()[model];
        let (op, twist) = pick_case(m, op, degree, weight);
        let chi = kernel_character(&m.id, op, &twist).unwrap();
        let regular = lefschetz_average(&m.id, op, &twist, &Representation::Regular).unwrap();
        prop_assert_eq!(regular, chi.dimension().unwrap());
    }

    #[test]
    fn spin_lifts_both_vanish(n in 1..=12u32, rho in 0..12i64) {
        let m = instantiate(&ModelId::Football(n)).unwrap();
        for lift in [SpinLift::Plus, SpinLift::Minus] {
            let rho = Representation::Character(rho % n as i64);
            let r = index_by_cyclic(&m, Operator::Spin(lift), &Twist::trivial(), &rho).unwrap();
            prop_assert_eq!(r.total_int, Some(0));
        }
    }

    #[test]
    fn wallpaper_classes_are_conjugation_invariant(kind in 0..5usize, power in 0..6u32, s0 in -3..=3i64, s1 in -3..=3i64, h0 in -3..=3i64, h1 in -3..=3i64, hp in 0..6u32) {
        let kind = WallpaperKind::ALL[kind];
        let g = GroupModel::wallpaper(kind).unwrap();
        let n = kind.point_order();
        let x = GroupElement::Affine(Affine { power: power % n, shift: [s0, s1] });
        prop_assume!(g.element_order(&x).is_some());
        let h = GroupElement::Affine(Affine { power: hp % n, shift: [h0, h1] });
        let cyclic = g.cyclic_subgroup_classes();
        prop_assert_eq!(g.locate(&cyclic, &x), g.locate(&cyclic, &g.conjugate(&h, &x)));
    }

    #[test]
    fn finite_classes_are_conjugation_invariant(x in 0..24usize, h in 0..24usize) {
        let g = GroupModel::finite(parse_permutation_text("1 2 3 0\n1 0 2 3").unwrap());
        let (x, h) = (GroupElement::Finite(x), GroupElement::Finite(h));
        let cyclic = g.cyclic_subgroup_classes();
        prop_assert_eq!(g.locate(&cyclic, &x), g.locate(&cyclic, &g.conjugate(&h, &x)));
    }
}
