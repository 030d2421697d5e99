use orbindex::exact_arith::int;
use orbindex::groups::Representation;
use orbindex::index_engine::{decompose, evaluate, pair_twist};
use orbindex::strata::{ManifoldModel, Operator, StrataFile, Twist};
use orbindex::{Cyclotomic, Error, GroupModel};

const D3_SPHERE: &str = include_str!("../../cli/tests/data/d3_sphere.json");

fn d3_sphere() -> ManifoldModel {
    let file: StrataFile = serde_json::from_str(D3_SPHERE).unwrap();
    ManifoldModel::from_strata_file(&file).unwrap()
}

#[test]
fn dihedral_sphere_loads() {
    let m = d3_sphere();
    assert_eq!(m.cyclic.len(), 3);
    let GroupModel::Finite(g) = &m.group else { panic!("finite group expected") };
    assert_eq!(g.order(), 6);
    let c3 = m.cyclic.iter().find(|c| c.order == 3).unwrap();
    assert_eq!(c3.weyl_multipliers, vec![1, 2]);
    assert_eq!(c3.weyl_orbits.len(), 1);
}

#[test]
fn dihedral_sphere_indices() {
    let m = d3_sphere();
    let e = evaluate(&m, Operator::DeRham, &Twist::trivial(), &Representation::Trivial).unwrap();
    assert_eq!(e.by_elements.total, int(2));
    assert!(e.oracle.is_none());
    assert!(e.is_ok());
    let e = evaluate(&m, Operator::Dolbeault, &Twist::trivial(), &Representation::Trivial).unwrap();
    assert_eq!(e.by_cyclic.total, int(1));
    let r = pair_twist(&m, Operator::Dolbeault, &Twist::trivial(), &Representation::Regular).unwrap();
    // regular ρ recovers the index upstairs
    assert_eq!(r.total, int(1));
}

#[test]
fn dihedral_sign_representation() {
    let m = d3_sphere();
    let GroupModel::Finite(g) = &m.group else { unreachable!() };
    // sign of a permutation of three points as a 1x1 matrix representation
    let sign = |p: usize| if g.element_order(p) == 2 { -1 } else { 1 };
    let gens = g.generators().iter().map(|&p| vec![vec![Cyclotomic::from_int(sign(p))]]).collect();
    let rho = Representation::from_matrices(&m.group, gens).unwrap();
    // H^0(S^2) and H^2(S^2) are trivial: no sign-isotypic part
    let e = evaluate(&m, Operator::DeRham, &Twist::trivial(), &rho).unwrap();
    assert_eq!(e.by_elements.total, int(0));
}

#[test]
fn dihedral_decomposition_is_weyl_equivariant() {
    let m = d3_sphere();
    let d = decompose(&m, Operator::Dolbeault).unwrap();
    assert!(d.classes.iter().all(|u| u.is_weyl_equivariant()));
}

#[test]
fn broken_weyl_data_is_rejected() {
    let mut file: StrataFile = serde_json::from_str(D3_SPHERE).unwrap();
    // both poles rotated the same way cannot be swapped by a flip
    let north = file.strata[1].components[0].eigenvalues.clone();
    file.strata[1].components[1].eigenvalues = north;
    let m = ManifoldModel::from_strata_file(&file).unwrap();
    assert!(matches!(decompose(&m, Operator::Dolbeault), Err(Error::ReconstructionFailure(_))));
}

#[test]
fn missing_stratum_is_rejected() {
    let mut file: StrataFile = serde_json::from_str(D3_SPHERE).unwrap();
    file.strata.pop();
    assert!(matches!(ManifoldModel::from_strata_file(&file), Err(Error::ValidationFailure(_))));
}
