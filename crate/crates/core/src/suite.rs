//! The catalog verification suite: one runner per acceptance criterion.

use std::fmt;

use num_traits::{One, Zero};

use crate::charform::{equiv_chern, CharSeries, PowerSeries};
use crate::error::Result;
use crate::exact_arith::{fmt_rational, int, rat, Cyclotomic, Rational};
use crate::groups::{character_value, irreducible_representations, parse_permutation_text, GroupModel, Representation, WallpaperKind};
use crate::index_engine::{aggregate_elements, decompose, evaluate, index_by_cyclic, pair_twist, spanning_family};
use crate::oracle::closed_form_L;
use crate::strata::{instantiate, ManifoldModel, ModelId, Operator, SpinLift, Twist};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "criterion {} [{status}] {} ({} cases", self.id, self.name, self.cases)?;
        if !self.passed() {
            write!(f, ", {} failing; first: {}", self.failures.len(), self.failures[0])?;
        }
        write!(f, ")")
    }
}

pub const CRITERIA: [(u8, &str); 8] = [
    (1, "orbifold index equals invariant index"),
    (2, "spot values"),
    (3, "crystallographic and finite presentations agree"),
    (4, "grouping invariance"),
    (5, "twisting coherence"),
    (6, "decomposition, Weyl equivariance, Fourier inversion"),
    (7, "series library"),
    (8, "group machinery"),
];

struct Tally {
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, failures: vec![] }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn result<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.cases += 1;
                self.failures.push(format!("{}: {e}", what()));
                None
            }
        }
    }
}

/// Models of the suite: football 1..6, the four torus rotations, the
/// symmetric square and the five wallpaper groups.
pub fn suite_models() -> Vec<ModelId> {
    let mut ids: Vec<ModelId> = (1..=6).map(ModelId::Football).collect();
    ids.extend([2, 3, 4, 6].map(ModelId::TorusRot));
    ids.push(ModelId::SymProdS2);
    ids.extend(WallpaperKind::ALL.map(ModelId::Wallpaper));
    ids
}

/// Supported (operator, twist) pairs: de Rham, Dolbeault with `O(k)` for
/// `-3 ≤ k ≤ 3` where defined, and both spin lifts where defined.
pub fn suite_cases(model: &ManifoldModel) -> Vec<(Operator, Twist)> {
    let mut out = Vec::new();
    for op in &model.operators {
        match op {
            Operator::Dolbeault => {
                for k in -3..=3 {
                    let t = Twist::line(k, 0);
                    if model.check_twist(*op, &t).is_ok() {
                        out.push((*op, t));
                    }
                }
            }
            _ => out.push((*op, Twist::trivial())),
        }
    }
    out
}

fn load(id: &ModelId, tally: &mut Tally) -> Option<ManifoldModel> {
    tally.result(instantiate(id), || format!("{id}"))
}

fn irreps(model: &ManifoldModel) -> Vec<Representation> {
    irreducible_representations(&model.group).expect("catalog groups are cyclic")
}

fn describe(id: &ModelId, op: Operator, t: &Twist, rho: &Representation) -> String {
    format!("{id} {op} {t} {}", rho.name())
}

pub fn criterion_1() -> CriterionOutcome {
    let mut tally = Tally::new();
    for id in suite_models() {
        let Some(model) = load(&id, &mut tally) else { continue };
        for (op, t) in suite_cases(&model) {
            for rho in irreps(&model) {
                let what = || describe(&id, op, &t, &rho);
                let Some(e) = tally.result(evaluate(&model, op, &t, &rho), what) else { continue };
                let ok = e.oracle.as_ref() == Some(&e.by_elements.total) && e.by_elements.total == e.by_cyclic.total;
                tally.check(ok, || {
                    format!(
                        "{}: elements {} cyclic {} oracle {}",
                        describe(&id, op, &t, &rho),
                        fmt_rational(&e.by_elements.total),
                        fmt_rational(&e.by_cyclic.total),
                        e.oracle.as_ref().map(fmt_rational).unwrap_or_default()
                    )
                });
            }
        }
    }
    finish(1, tally)
}

fn expect_total(tally: &mut Tally, model: &ManifoldModel, op: Operator, t: Twist, rho: Representation, expected: Rational) {
    let what = || describe(&model.id, op, &t, &rho);
    let Some(e) = tally.result(evaluate(model, op, &t, &rho), what) else { return };
    let ok = e.by_elements.total == expected && e.by_cyclic.total == expected && e.is_ok();
    tally.check(ok, || format!("{}: got {}, expected {}", what(), fmt_rational(&e.by_cyclic.total), fmt_rational(&expected)));
}

pub fn criterion_2() -> CriterionOutcome {
    let mut tally = Tally::new();
    let triv = Representation::Trivial;
    let spots = [
        (ModelId::Football(3), Operator::Dolbeault, Twist::line(4, 0), 2),
        (ModelId::TorusRot(4), Operator::DeRham, Twist::trivial(), 2),
        (ModelId::Wallpaper(WallpaperKind::P4), Operator::DeRham, Twist::trivial(), 2),
        (ModelId::SymProdS2, Operator::Dolbeault, Twist::trivial(), 1),
    ];
    for (id, op, t, expected) in spots {
        if let Some(model) = load(&id, &mut tally) {
            expect_total(&mut tally, &model, op, t, triv.clone(), int(expected));
        }
    }
    for n in 1..=12 {
        let Some(model) = load(&ModelId::Football(n), &mut tally) else { continue };
        for lift in [SpinLift::Plus, SpinLift::Minus] {
            for rho in irreps(&model) {
                expect_total(&mut tally, &model, Operator::Spin(lift), Twist::trivial(), rho, int(0));
            }
        }
    }
    finish(2, tally)
}

pub fn criterion_3() -> CriterionOutcome {
    let mut tally = Tally::new();
    for kind in WallpaperKind::ALL {
        let n = kind.point_order();
        let wid = ModelId::Wallpaper(kind);
        let tid = ModelId::TorusRot(n);
        let (Some(w), Some(t)) = (load(&wid, &mut tally), load(&tid, &mut tally)) else { continue };
        let mut cases = vec![(Operator::DeRham, Twist::trivial())];
        cases.extend((0..n as i64).map(|m| (Operator::Dolbeault, Twist::line(0, m))));
        for (op, twist) in cases {
            for rho in irreps(&w) {
                let what = || describe(&wid, op, &twist, &rho);
                let (Some(a), Some(b)) = (
                    tally.result(index_by_cyclic(&w, op, &twist, &rho), what),
                    tally.result(index_by_cyclic(&t, op, &twist, &rho), what),
                ) else {
                    continue;
                };
                tally.check(a.total == b.total, || {
                    format!("{}: wallpaper {} torus {}", what(), fmt_rational(&a.total), fmt_rational(&b.total))
                });
            }
        }
    }
    finish(3, tally)
}

pub fn criterion_4() -> CriterionOutcome {
    let mut tally = Tally::new();
    for id in suite_models() {
        let Some(model) = load(&id, &mut tally) else { continue };
        for (op, t) in suite_cases(&model) {
            for rho in irreps(&model) {
                let what = || describe(&id, op, &t, &rho);
                let (Some(agg), Some(cyc)) = (
                    tally.result(aggregate_elements(&model, op, &t, &rho), what),
                    tally.result(index_by_cyclic(&model, op, &t, &rho), what),
                ) else {
                    continue;
                };
                let ok = agg.iter().zip(&cyc.contributions).all(|(a, c)| *a == c.value);
                tally.check(ok, || format!("{}: per-class contributions differ", what()));
            }
        }
    }
    finish(4, tally)
}

/// Bundles exercised by the twisting checks: the spanning family plus sums.
fn twist_family(model: &ManifoldModel, op: Operator) -> Vec<Twist> {
    let mut family = spanning_family(model, op);
    if op == Operator::Dolbeault {
        for extra in ["sum:O:1,O:-2", "sum:O:0,O:0@1", "sum:O:3,O:-3,O:1@1"] {
            let t = Twist::parse(extra).expect("fixed twist grammar");
            if model.check_twist(op, &t).is_ok() {
                family.push(t);
            }
        }
    }
    family
}

pub fn criterion_5() -> CriterionOutcome {
    let mut tally = Tally::new();
    for id in suite_models() {
        let Some(model) = load(&id, &mut tally) else { continue };
        for op in model.operators.clone() {
            let family = twist_family(&model, op);
            for t in &family {
                for rho in irreps(&model) {
                    let what = || describe(&id, op, t, &rho);
                    let Some(paired) = tally.result(pair_twist(&model, op, t, &rho), what) else { continue };
                    let Some(direct) = tally.result(index_by_cyclic(&model, op, t, &rho), what) else { continue };
                    tally.check(paired.total == direct.total, || format!("{}: pairing differs", what()));
                }
            }
            if op != Operator::Dolbeault {
                continue;
            }
            // additivity of the index and multiplicativity of ch, on the
            // family's lines of weight 0 and 1
            let small: Vec<&Twist> = family.iter().filter(|t| t.summands.len() == 1 && t.summands[0].weight <= 1).collect();
            for &a in &small {
                for &b in &small {
                    let what = || format!("{id} {a} with {b}");
                    let sum = a.direct_sum(b);
                    let rho = Representation::Trivial;
                    let parts = [a, b, &sum].map(|t| index_by_cyclic(&model, op, t, &rho).map(|r| r.total));
                    if let [Ok(x), Ok(y), Ok(s)] = &parts {
                        tally.check(&(x + y) == s, || format!("{}: index not additive", what()));
                    }
                    let (Some(ea), Some(eb)) = (
                        tally.result(model.bundle(a), what),
                        tally.result(model.bundle(b), what),
                    ) else {
                        continue;
                    };
                    let product = ea.tensor(&eb);
                    if let Ok(direct) = model.bundle(&a.tensor(b)) {
                        tally.check(product == direct, || format!("{}: tensor of restrictions differs", what()));
                    }
                    for (s, stratum) in model.strata.iter().enumerate() {
                        let class = &model.cyclic[stratum.class];
                        for (y, comp) in stratum.components.iter().enumerate() {
                            for &k in &class.gen_powers {
                                let ch = |b: &crate::strata::EquivariantBundle| equiv_chern(&b.lines[s][y], k, comp);
                                let (Ok(ca), Ok(cb), Ok(cp)) = (ch(&ea), ch(&eb), ch(&product)) else {
                                    tally.check(false, || format!("{}: ch failed", what()));
                                    continue;
                                };
                                tally.check(ca.mul(&cb) == cp, || format!("{}: ch not multiplicative on {}", what(), comp.label));
                            }
                        }
                    }
                }
            }
        }
    }
    finish(5, tally)
}

pub fn criterion_6() -> CriterionOutcome {
    let mut tally = Tally::new();
    for id in suite_models() {
        let Some(model) = load(&id, &mut tally) else { continue };
        for op in model.operators.clone() {
            let Some(d) = tally.result(decompose(&model, op), || format!("{id} {op}")) else { continue };
            tally.check(d.classes.iter().all(|u| u.is_weyl_equivariant()), || format!("{id} {op}: Weyl equivariance"));
        }
        let reps = irreps(&model);
        let elements: Vec<_> = match &model.group {
            GroupModel::Finite(fg) => (0..fg.order()).map(crate::groups::GroupElement::Finite).collect(),
            GroupModel::Wallpaper(_) => model.group.finite_order_classes().into_iter().map(|c| c.rep).collect(),
        };
        for (op, t) in suite_cases(&model) {
            let what = || format!("{id} {op} {t}");
            let Some(indices) = tally.result(
                reps.iter().map(|r| index_by_cyclic(&model, op, &t, r).map(|x| x.total)).collect::<Result<Vec<_>>>(),
                what,
            ) else {
                continue;
            };
            for g in &elements {
                let inversion: Result<Cyclotomic> = reps
                    .iter()
                    .zip(&indices)
                    .map(|(r, i)| Ok(character_value(&model.group, r, g)?.conj().scale(i)))
                    .sum();
                let Some(inversion) = tally.result(inversion, what) else { continue };
                let Some(l) = tally.result(closed_form_L(&model.group, &id, op, &t, g), what) else { continue };
                tally.check(inversion == l, || {
                    format!("{} at {}: inversion {inversion} vs L {l}", what(), model.group.label(g))
                });
            }
        }
    }
    finish(6, tally)
}

/// `1/f` for a rational series with `f_0 = 1`, by the Taylor recursion
/// `b_n = -Σ_{k≥1} f_k b_{n-k}`.
fn reciprocal(f: &[Rational]) -> Vec<Rational> {
    let mut b: Vec<Rational> = vec![Rational::one()];
    for n in 1..f.len() {
        let s: Rational = (1..=n).map(|k| &f[k] * &b[n - k]).sum();
        b.push(-s);
    }
    b
}

fn factorial(n: usize) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * int(k as i64))
}

/// `(x/2)/sinh(x/2)` and `x/(1 - e^{-x})` to `x^6`, from their reciprocals.
pub fn taylor_ahat_todd() -> (Vec<Rational>, Vec<Rational>) {
    let len = 7;
    // sinh(x/2)/(x/2) = Σ (x/2)^{2j} / (2j+1)!
    let sinhc: Vec<Rational> = (0..len)
        .map(|n| if n % 2 == 0 { rat(1, 1 << n) / factorial(n + 1) } else { Rational::zero() })
        .collect();
    // (1 - e^{-x})/x = Σ (-1)^n x^n / (n+1)!
    let expc: Vec<Rational> = (0..len)
        .map(|n| if n % 2 == 0 { Rational::one() } else { -Rational::one() } / factorial(n + 1))
        .collect();
    (reciprocal(&sinhc), reciprocal(&expc))
}

fn rational_series(s: &PowerSeries) -> Option<Vec<Rational>> {
    s.iter().map(|c| c.to_rational().ok()).collect()
}

pub fn criterion_7() -> CriterionOutcome {
    let mut tally = Tally::new();
    let (ahat, todd) = taylor_ahat_todd();
    for (series, oracle, name) in [(CharSeries::AhatRoot, &ahat, "Ahat"), (CharSeries::TdRoot, &todd, "Td")] {
        let got = series.coefficients(7).ok().and_then(|s| rational_series(&s));
        tally.check(got.as_ref() == Some(oracle), || format!("{name} coefficients differ from the Taylor recursion"));
    }
    tally.check(ahat[2] == rat(-1, 24), || "Ahat x^2 coefficient".into());
    tally.check(todd[..3] == [int(1), rat(1, 2), rat(1, 12)], || "Td to x^2".into());

    let len = 7;
    for n in 2..=12u64 {
        for j in 1..n {
            let lambda = Cyclotomic::root(n, j as i64);
            let half = Cyclotomic::root(2 * n, j as i64);
            for s in [half.clone(), -half] {
                let what = || format!("normal-factor identity at lambda = {lambda}, s = {s}");
                let (Some(dol), Some(spin)) = (
                    tally.result(CharSeries::DolbeaultNormal(lambda.clone()).coefficients(len), what),
                    tally.result(CharSeries::SpinNormal(s.clone()).coefficients(len), what),
                ) else {
                    continue;
                };
                let shift: PowerSeries =
                    crate::charform::exp_series(&Cyclotomic::from_rational(rat(1, 2)), len).iter().map(|c| c * &s).collect();
                let rhs = crate::charform::series_mul(&spin, &shift, len);
                tally.check(dol == rhs, what);
            }
        }
    }
    finish(7, tally)
}

pub fn criterion_8() -> CriterionOutcome {
    let mut tally = Tally::new();
    if let Some(p4) = tally.result(GroupModel::wallpaper(WallpaperKind::P4), || "p4".into()) {
        tally.check(p4.finite_order_classes().len() == 8, || "p4 element classes".into());
        tally.check(p4.cyclic_subgroup_classes().len() == 6, || "p4 cyclic classes".into());
    }
    let signatures: [(WallpaperKind, &[u32]); 4] = [
        (WallpaperKind::P2, &[2, 2, 2, 2]),
        (WallpaperKind::P3, &[3, 3, 3]),
        (WallpaperKind::P4, &[4, 4, 2]),
        (WallpaperKind::P6, &[6, 3, 2]),
    ];
    for (kind, expected) in signatures {
        let Some(GroupModel::Wallpaper(w)) = tally.result(GroupModel::wallpaper(kind), || kind.name().into()) else {
            continue;
        };
        let got = w.rotation_signature();
        tally.check(got == expected, || format!("{} signature {got:?}", kind.name()));
    }
    let mut groups: Vec<(String, GroupModel)> = Vec::new();
    for kind in WallpaperKind::ALL {
        groups.push((kind.name().into(), GroupModel::wallpaper(kind).expect("wallpaper groups build")));
    }
    for n in 1..=12 {
        groups.push((format!("Z/{n}"), GroupModel::cyclic(n).expect("cyclic groups build")));
    }
    for (name, text) in [("S3", "1 0 2\n1 2 0"), ("D4", "1 2 3 0\n3 2 1 0"), ("A4", "1 2 0 3\n0 2 3 1")] {
        groups.push((name.into(), GroupModel::finite(parse_permutation_text(text).expect("fixed generators"))));
    }
    for (name, g) in &groups {
        for c in g.cyclic_subgroup_classes() {
            tally.check(c.element_classes.len() == c.weyl_orbits.len(), || {
                format!("{name} class {}: {} element classes, {} Weyl orbits", c.label, c.element_classes.len(), c.weyl_orbits.len())
            });
        }
    }
    finish(8, tally)
}

fn finish(id: u8, tally: Tally) -> CriterionOutcome {
    CriterionOutcome { id, name: CRITERIA[id as usize - 1].1, cases: tally.cases, failures: tally.failures }
}

pub fn run_criterion(id: u8) -> Option<CriterionOutcome> {
    Some(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        _ => return None,
    })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=8).filter_map(run_criterion).collect()
}

