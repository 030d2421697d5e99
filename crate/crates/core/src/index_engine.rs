//! Evaluation of the fixed-point index formula.
//!
//! A component `Y` of `M^C` with setwise stabilizer of order `s` in
//! `Z_G(C)` contributes `(1/s) ∫_Y U(g)` to the class of `g ∈ gen(C)`. The
//! cyclic grouping writes the same weight as `(1/|C|)·(|C|/s)`, where
//! `|C|/s` is the orbifold measure of `Y` in `Z_G(C)\M^C`.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::charform::{equiv_chern, integrate, local_density, monomial_basis, GradedClass, Monomial};
use crate::error::{Error, Result};
use crate::exact_arith::{fmt_rational, rational_to_i64, Cyclotomic, Rational};
use crate::groups::{
    character_value, epsilon_trivial, irreducible_representations, ClassFunction, CyclicClass, FiniteGroup,
    Representation,
};
use crate::oracle;
use crate::strata::{BundleLine, EquivariantBundle, FixedComponent, ManifoldModel, ModelId, Operator, Twist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Grouping {
    #[serde(rename = "byElements")]
    ByElements,
    #[serde(rename = "byCyclic")]
    ByCyclic,
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grouping::ByElements => "byElements",
            Grouping::ByCyclic => "byCyclic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub class: String,
    pub value: Cyclotomic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexReport {
    pub model: String,
    pub operator: String,
    pub twist: String,
    pub rho: String,
    pub grouping: Grouping,
    pub contributions: Vec<Contribution>,
    #[serde(with = "crate::exact_arith::rational_string")]
    pub total: Rational,
    pub total_int: Option<i64>,
    pub integral: bool,
    pub oracle: Option<String>,
    pub verdict: String,
}

impl IndexReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("report: {e}")))
    }

    pub fn is_ok(&self) -> bool {
        self.verdict == "ok"
    }

    pub fn render_human(&self) -> String {
        let mut out = format!(
            "model {}  operator {}  twist {}  rho {}  grouping {}\n",
            self.model, self.operator, self.twist, self.rho, self.grouping
        );
        let width = self.contributions.iter().map(|c| c.class.len()).max().unwrap_or(5).max(5);
        out.push_str(&format!("  {:<width$}  contribution\n", "class"));
        for c in &self.contributions {
            out.push_str(&format!("  {:<width$}  {}\n", c.class, c.value));
        }
        out.push_str(&format!("  total   {}\n", fmt_rational(&self.total)));
        if let Some(o) = &self.oracle {
            out.push_str(&format!("  oracle  {o}\n"));
        }
        out.push_str(&format!("  verdict {}\n", self.verdict));
        out
    }

    fn finish(&mut self) {
        self.integral = self.total.is_integer();
        self.total_int = rational_to_i64(&self.total);
        self.verdict = if !self.integral {
            format!("non-integral total {}", fmt_rational(&self.total))
        } else if self.oracle.as_ref().is_some_and(|o| *o != fmt_rational(&self.total)) {
            format!("oracle mismatch: engine {} vs oracle {}", fmt_rational(&self.total), self.oracle.as_ref().unwrap())
        } else {
            "ok".into()
        };
    }
}

fn bundle_for(model: &ManifoldModel, op: Operator, twist: &Twist) -> Result<Option<EquivariantBundle>> {
    model.check_twist(op, twist)?;
    if twist.is_trivial() {
        Ok(None)
    } else {
        Ok(Some(model.bundle(twist)?))
    }
}

fn stratum_position(model: &ManifoldModel, class: usize) -> usize {
    model.strata.iter().position(|s| s.class == class).expect("validated model has every stratum")
}

fn lines<'a>(bundle: &'a Option<EquivariantBundle>, s: usize, y: usize) -> Option<&'a [BundleLine]> {
    bundle.as_ref().map(|b| b.lines[s][y].as_slice())
}

fn recip(n: u64) -> Rational {
    Rational::new(One::one(), (n as i64).into())
}

/// `∫_Y U(g0^k)` per stratum position, power `k` and component.
pub type ComponentIntegrals = Vec<BTreeMap<u64, Vec<Cyclotomic>>>;

/// Per-model memo of component integrals and `[Û]` classes. Cloning a
/// model starts from an empty cache, so edited copies never see stale values.
#[derive(Default)]
pub struct EvalCache {
    integrals: Mutex<HashMap<(Operator, Twist), Arc<ComponentIntegrals>>>,
    uhat: Mutex<HashMap<(Operator, usize), Arc<UhatClass>>>,
}

impl Clone for EvalCache {
    fn clone(&self) -> Self {
        EvalCache::default()
    }
}

impl fmt::Debug for EvalCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EvalCache")
    }
}

/// Component integrals of the (twisted) density, memoized on the model.
pub fn component_integrals(model: &ManifoldModel, op: Operator, twist: &Twist) -> Result<Arc<ComponentIntegrals>> {
    let key = (op, twist.clone());
    if let Some(hit) = model.cache.integrals.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let bundle = bundle_for(model, op, twist)?;
    let mut out = Vec::with_capacity(model.strata.len());
    for (s, stratum) in model.strata.iter().enumerate() {
        let class = &model.cyclic[stratum.class];
        let mut per_k = BTreeMap::new();
        for &k in &class.gen_powers {
            let values = stratum
                .components
                .iter()
                .enumerate()
                .map(|(y, comp)| Ok(integrate(comp, &local_density(op, comp, k, lines(&bundle, s, y))?)))
                .collect::<Result<Vec<_>>>()?;
            per_k.insert(k, values);
        }
        out.push(per_k);
    }
    let out = Arc::new(out);
    model.cache.integrals.lock().unwrap().insert(key, out.clone());
    Ok(out)
}

/// `Σ_Y (1/s_Y) ∫_Y U(g0^k)` over the components of class `class`.
fn stacky_sum(model: &ManifoldModel, integrals: &ComponentIntegrals, class: usize, k: u64) -> Cyclotomic {
    let s = stratum_position(model, class);
    model.strata[s]
        .components
        .iter()
        .zip(&integrals[s][&k])
        .map(|(comp, v)| v.scale(&recip(comp.stabilizer_order)))
        .sum()
}

/// `(1/|C|) Σ_{W\gen(C)} tr ρ(g) Σ_Y (|C|/s_Y) ∫_Y U(g)` for one cyclic class.
fn cyclic_term(
    model: &ManifoldModel,
    integrals: &ComponentIntegrals,
    rho: &Representation,
    c: &CyclicClass,
) -> Result<Cyclotomic> {
    let s = stratum_position(model, c.index);
    let mut acc = Cyclotomic::zero();
    for orbit in &c.weyl_orbits {
        let k = orbit.rep_power;
        let g = model.group.pow(&c.generator, k as i64);
        let tr = character_value(&model.group, rho, &g)?;
        let inner: Cyclotomic = model.strata[s]
            .components
            .iter()
            .zip(&integrals[s][&k])
            .map(|(comp, v)| {
                v.scale(&Rational::new((c.order as i64).into(), (comp.stabilizer_order as i64).into()))
            })
            .sum();
        acc = acc + &tr * &inner;
    }
    Ok(acc.scale(&recip(c.order)))
}

fn empty_report(model: &ManifoldModel, op: Operator, twist: &Twist, rho: &Representation, grouping: Grouping) -> IndexReport {
    IndexReport {
        model: model.id.to_string(),
        operator: op.to_string(),
        twist: twist.to_string(),
        rho: rho.name(),
        grouping,
        contributions: vec![],
        total: Rational::zero(),
        total_int: None,
        integral: false,
        oracle: None,
        verdict: String::new(),
    }
}

fn total_of(contributions: &[Contribution]) -> Result<Rational> {
    let sum: Cyclotomic = contributions.iter().map(|c| &c.value).sum();
    sum.to_rational()
}

/// Per element class: `(cyclic class index, contribution)`.
fn element_terms(
    model: &ManifoldModel,
    op: Operator,
    twist: &Twist,
    rho: &Representation,
) -> Result<Vec<(usize, String, Cyclotomic)>> {
    let integrals = component_integrals(model, op, twist)?;
    let mut out = Vec::new();
    for ec in model.group.finite_order_classes() {
        let (ci, k) = model
            .group
            .locate(&model.cyclic, &ec.rep)
            .ok_or_else(|| Error::ValidationFailure(format!("{} has no cyclic class", model.group.label(&ec.rep))))?;
        let tr = character_value(&model.group, rho, &ec.rep)?;
        let value = &tr * &stacky_sum(model, &integrals, ci, k);
        out.push((ci, model.group.label(&ec.rep), value));
    }
    Ok(out)
}

pub fn index_by_elements(model: &ManifoldModel, op: Operator, twist: &Twist, rho: &Representation) -> Result<IndexReport> {
    let mut report = empty_report(model, op, twist, rho, Grouping::ByElements);
    report.contributions = element_terms(model, op, twist, rho)?
        .into_iter()
        .map(|(_, class, value)| Contribution { class, value })
        .collect();
    report.total = total_of(&report.contributions)?;
    report.finish();
    Ok(report)
}

pub fn index_by_cyclic(model: &ManifoldModel, op: Operator, twist: &Twist, rho: &Representation) -> Result<IndexReport> {
    let integrals = component_integrals(model, op, twist)?;
    let mut report = empty_report(model, op, twist, rho, Grouping::ByCyclic);
    for c in &model.cyclic {
        report.contributions.push(Contribution { class: c.label.clone(), value: cyclic_term(model, &integrals, rho, c)? });
    }
    report.total = total_of(&report.contributions)?;
    report.finish();
    Ok(report)
}

/// Element-class contributions summed per cyclic class, in cyclic-class order.
pub fn aggregate_elements(model: &ManifoldModel, op: Operator, twist: &Twist, rho: &Representation) -> Result<Vec<Cyclotomic>> {
    let mut sums = vec![Cyclotomic::zero(); model.cyclic.len()];
    for (ci, _, v) in element_terms(model, op, twist, rho)? {
        sums[ci] = &sums[ci] + &v;
    }
    Ok(sums)
}

/// Oracle value, when the model has a closed-form kernel.
pub fn oracle_value(model: &ManifoldModel, op: Operator, twist: &Twist, rho: &Representation) -> Result<Option<Rational>> {
    if matches!(model.id, ModelId::Custom(_)) {
        return Ok(None);
    }
    oracle::lefschetz_average(&model.id, op, twist, rho).map(Some)
}

/// Both groupings plus the oracle; fails if the groupings disagree.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub by_elements: IndexReport,
    pub by_cyclic: IndexReport,
    pub oracle: Option<Rational>,
}

impl Evaluation {
    pub fn is_ok(&self) -> bool {
        self.by_elements.is_ok() && self.by_cyclic.is_ok()
    }
}

pub fn evaluate(model: &ManifoldModel, op: Operator, twist: &Twist, rho: &Representation) -> Result<Evaluation> {
    let mut by_elements = index_by_elements(model, op, twist, rho)?;
    let mut by_cyclic = index_by_cyclic(model, op, twist, rho)?;
    if by_elements.total != by_cyclic.total {
        return Err(Error::GroupingMismatch {
            by_elements: fmt_rational(&by_elements.total),
            by_cyclic: fmt_rational(&by_cyclic.total),
        });
    }
    let oracle = oracle_value(model, op, twist, rho)?;
    for r in [&mut by_elements, &mut by_cyclic] {
        r.oracle = oracle.as_ref().map(fmt_rational);
        r.finish();
    }
    Ok(Evaluation { by_elements, by_cyclic, oracle })
}

// ---------------------------------------------------------------------------
// the classes [Û(g)]

/// Functional on the monomial basis of one component.
pub type Functional = BTreeMap<Monomial, Cyclotomic>;

#[derive(Debug, Clone)]
pub struct UhatClass {
    pub class: usize,
    pub label: String,
    pub order: u64,
    pub components: Vec<String>,
    /// `functionals[k][y]`: `ω ↦ (|C|/s_Y) ∫_Y U(g0^k) ω` for `ω` a basis monomial.
    pub functionals: BTreeMap<u64, Vec<Functional>>,
    pub weyl_multipliers: Vec<u64>,
}

impl UhatClass {
    /// `⟨ch(g0^k, E), Û(g0^k)⟩` summed over components.
    pub fn pair(&self, k: u64, ch: &[GradedClass]) -> Cyclotomic {
        self.functionals[&k]
            .iter()
            .zip(ch)
            .map(|(f, c)| c.terms().map(|(m, v)| v * &f[m]).sum::<Cyclotomic>())
            .sum()
    }

    /// `W_G(C)` permutes components: the functionals of `g^k` and `g^{ka}`
    /// agree up to a permutation of components for every Weyl multiplier `a`.
    pub fn is_weyl_equivariant(&self) -> bool {
        self.functionals.iter().all(|(k, fs)| {
            self.weyl_multipliers.iter().all(|a| {
                let ka = if self.order == 1 { 1 } else { k * a % self.order };
                self.functionals.get(&ka).is_some_and(|gs| same_up_to_permutation(fs, gs))
            })
        })
    }

    pub fn dump(&self) -> String {
        let mut out = format!("class {} (order {})\n", self.label, self.order);
        for (k, fs) in &self.functionals {
            for (name, f) in self.components.iter().zip(fs) {
                let values: Vec<String> = f.iter().map(|(m, v)| format!("{m:?} -> {v}")).collect();
                out.push_str(&format!("  g^{k} on {name}: {}\n", values.join(", ")));
            }
        }
        out
    }
}

fn same_up_to_permutation(a: &[Functional], b: &[Functional]) -> bool {
    let mut used = vec![false; b.len()];
    a.len() == b.len()
        && a.iter().all(|f| match (0..b.len()).find(|&i| !used[i] && b[i] == *f) {
            Some(i) => {
                used[i] = true;
                true
            }
            None => false,
        })
}

fn component_functional(op: Operator, comp: &FixedComponent, k: u64, order: u64) -> Result<Functional> {
    let density = local_density(op, comp, k, None)?;
    let (nvars, deg) = (comp.symbols.len(), comp.dim / 2);
    let measure = Rational::new((order as i64).into(), (comp.stabilizer_order as i64).into());
    Ok(monomial_basis(nvars, deg)
        .into_iter()
        .map(|m| {
            let omega = GradedClass::monomial(nvars, deg, m.clone(), Cyclotomic::one());
            (m, integrate(comp, &density.mul(&omega)).scale(&measure))
        })
        .collect())
}

pub fn uhat_classes(model: &ManifoldModel, op: Operator, class: usize) -> Result<Arc<UhatClass>> {
    if let Some(hit) = model.cache.uhat.lock().unwrap().get(&(op, class)) {
        return Ok(hit.clone());
    }
    let u = Arc::new(compute_uhat(model, op, class)?);
    model.cache.uhat.lock().unwrap().insert((op, class), u.clone());
    Ok(u)
}

fn compute_uhat(model: &ManifoldModel, op: Operator, class: usize) -> Result<UhatClass> {
    if !model.supports(op) {
        return Err(Error::UnsupportedParams(format!("{} does not support {op}", model.id)));
    }
    let c = &model.cyclic[class];
    let stratum = &model.strata[stratum_position(model, class)];
    let mut functionals = BTreeMap::new();
    for &k in &c.gen_powers {
        let fs = stratum
            .components
            .iter()
            .map(|comp| component_functional(op, comp, k, c.order))
            .collect::<Result<Vec<_>>>()?;
        functionals.insert(k, fs);
    }
    Ok(UhatClass {
        class,
        label: c.label.clone(),
        order: c.order,
        components: stratum.components.iter().map(|y| y.label.clone()).collect(),
        functionals,
        weyl_multipliers: c.weyl_multipliers.clone(),
    })
}

/// `ch(g0^k, E)` on every component of the class.
fn chern_on_class(model: &ManifoldModel, bundle: &EquivariantBundle, class: usize, k: u64) -> Result<Vec<GradedClass>> {
    let s = stratum_position(model, class);
    model.strata[s]
        .components
        .iter()
        .enumerate()
        .map(|(y, comp)| equiv_chern(&bundle.lines[s][y], k, comp))
        .collect()
}

/// Twisted index from the pairing `Σ_C (1/|C|) Σ_{W\gen} ⟨ch(g,E), Û(g)⟩ tr ρ(g)`,
/// cross-checked against the directly twisted density.
pub fn pair_twist(model: &ManifoldModel, op: Operator, twist: &Twist, rho: &Representation) -> Result<IndexReport> {
    model.check_twist(op, twist)?;
    let bundle = model.bundle(twist)?;
    let mut report = empty_report(model, op, twist, rho, Grouping::ByCyclic);
    for c in &model.cyclic {
        let uhat = uhat_classes(model, op, c.index)?;
        let mut acc = Cyclotomic::zero();
        for orbit in &c.weyl_orbits {
            let k = orbit.rep_power;
            let g = model.group.pow(&c.generator, k as i64);
            let tr = character_value(&model.group, rho, &g)?;
            acc = acc + &tr * &uhat.pair(k, &chern_on_class(model, &bundle, c.index, k)?);
        }
        report.contributions.push(Contribution { class: c.label.clone(), value: acc.scale(&recip(c.order)) });
    }
    report.total = total_of(&report.contributions)?;
    let direct = index_by_cyclic(model, op, twist, rho)?;
    if direct.total != report.total {
        return Err(Error::TwistMismatch {
            pairing: fmt_rational(&report.total),
            direct: fmt_rational(&direct.total),
        });
    }
    report.oracle = oracle_value(model, op, twist, rho)?.as_ref().map(fmt_rational);
    report.finish();
    Ok(report)
}

/// `ε(Σ_i a_i · e_i · χ_ρ)` on a finite group `H`: homology-side class
/// functions `a_i` paired with cohomology-side `e_i` over the same basis.
pub fn pair_inform(h: &FiniteGroup, a: &[ClassFunction], e: &[ClassFunction], rho: &ClassFunction) -> Result<Cyclotomic> {
    if a.len() != e.len() {
        return Err(Error::BasisMismatch(format!("{} homology vs {} cohomology basis elements", a.len(), e.len())));
    }
    let mut total = ClassFunction::from_fn(h, |_| Cyclotomic::zero());
    for (x, y) in a.iter().zip(e) {
        total = total.add(&x.pointwise(y)?)?;
    }
    epsilon_trivial(h, &total.pointwise(rho)?)
}

// ---------------------------------------------------------------------------
// decomposition and reconstruction

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub classes: Vec<Arc<UhatClass>>,
    pub family: Vec<Twist>,
    pub representations: Vec<String>,
    pub columns: usize,
    pub rows: usize,
    pub rank: usize,
    /// Whether the family determines every functional value uniquely.
    pub separating: bool,
}

impl Decomposition {
    pub fn verdict(&self) -> String {
        format!(
            "reconstruction ok: {} bundles x {} representations, rank {}/{}{}",
            self.family.len(),
            self.representations.len(),
            self.rank,
            self.columns,
            if self.separating { " (separating)" } else { "" }
        )
    }
}

/// Spanning family: `O(k) ⊗ χ^m` with `|k| ≤ 2` where the model has line
/// bundles and every character weight `m` of a cyclic (point) group.
pub fn spanning_family(model: &ManifoldModel, op: Operator) -> Vec<Twist> {
    if op != Operator::Dolbeault {
        return vec![Twist::trivial()];
    }
    let degrees: Vec<i64> = if model.strata.iter().flat_map(|s| &s.components).all(|c| c.line_root.is_some()) {
        (-2..=2).collect()
    } else {
        vec![0]
    };
    let weights: Vec<i64> = if model.group.cyclic_log(&model.group.identity()).is_some() {
        (0..model.group.finite_quotient_order() as i64).collect()
    } else {
        vec![0]
    };
    degrees
        .iter()
        .flat_map(|&d| weights.iter().map(move |&m| Twist::line(d, m)))
        .filter(|t| model.check_twist(op, t).is_ok())
        .collect()
}

/// Incremental row echelon form over the cyclotomics.
struct Echelon {
    rows: Vec<(usize, Vec<Cyclotomic>)>,
}

impl Echelon {
    /// Reduces and inserts `row` (with the right-hand side as last entry);
    /// returns false if it reduces to `0 = nonzero`.
    fn insert(&mut self, mut row: Vec<Cyclotomic>) -> Result<bool> {
        let n = row.len() - 1;
        for (pivot, basis) in &self.rows {
            if !row[*pivot].is_zero() {
                let f = row[*pivot].clone();
                for j in 0..=n {
                    if !basis[j].is_zero() {
                        row[j] = &row[j] - &(&f * &basis[j]);
                    }
                }
            }
        }
        match (0..n).find(|&j| !row[j].is_zero()) {
            None => Ok(row[n].is_zero()),
            Some(p) => {
                let inv = row[p].inv()?;
                let row: Vec<Cyclotomic> = row.iter().map(|x| x * &inv).collect();
                for (_, basis) in self.rows.iter_mut() {
                    if !basis[p].is_zero() {
                        let f = basis[p].clone();
                        for j in 0..=n {
                            if !row[j].is_zero() {
                                basis[j] = &basis[j] - &(&f * &row[j]);
                            }
                        }
                    }
                }
                self.rows.push((p, row));
                Ok(true)
            }
        }
    }

    fn solution(&self, ncols: usize) -> Vec<Cyclotomic> {
        let mut x = vec![Cyclotomic::zero(); ncols];
        for (p, row) in &self.rows {
            x[*p] = row[ncols].clone();
        }
        x
    }
}

/// All `[Û]` classes, with the reconstruction check: every functional value
/// is an unknown, each (bundle, ρ) pair gives one linear equation whose
/// right-hand side is the oracle (or direct) index, and the computed classes
/// must solve the system. When the system has full column rank its unique
/// solution must be the computed classes.
pub fn decompose(model: &ManifoldModel, op: Operator) -> Result<Decomposition> {
    let classes = model
        .cyclic
        .iter()
        .map(|c| uhat_classes(model, op, c.index))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = classes.iter().find(|u| !u.is_weyl_equivariant()) {
        return Err(Error::ReconstructionFailure(format!("class {} is not Weyl-equivariant", bad.label)));
    }

    // unknowns: (class, orbit representative, component, monomial)
    let mut columns: Vec<(usize, u64, usize, Monomial)> = Vec::new();
    let mut known: Vec<Cyclotomic> = Vec::new();
    for (u, c) in classes.iter().zip(&model.cyclic) {
        for orbit in &c.weyl_orbits {
            for (y, f) in u.functionals[&orbit.rep_power].iter().enumerate() {
                for (m, v) in f {
                    columns.push((c.index, orbit.rep_power, y, m.clone()));
                    known.push(v.clone());
                }
            }
        }
    }
    let column_of: BTreeMap<(usize, u64, usize, Monomial), usize> =
        columns.iter().cloned().enumerate().map(|(i, key)| (key, i)).collect();

    let family = spanning_family(model, op);
    let reps = irreducible_representations(&model.group).unwrap_or_else(|_| vec![Representation::Trivial]);
    let mut echelon = Echelon { rows: Vec::new() };
    let mut rows = 0;
    for twist in &family {
        let bundle = model.bundle(twist)?;
        for rho in &reps {
            let rhs = match oracle_value(model, op, twist, rho)? {
                Some(v) => v,
                None => index_by_cyclic(model, op, twist, rho)?.total,
            };
            let mut row = vec![Cyclotomic::zero(); columns.len() + 1];
            for c in &model.cyclic {
                for orbit in &c.weyl_orbits {
                    let k = orbit.rep_power;
                    let g = model.group.pow(&c.generator, k as i64);
                    let tr = character_value(&model.group, rho, &g)?.scale(&recip(c.order));
                    for (y, ch) in chern_on_class(model, &bundle, c.index, k)?.iter().enumerate() {
                        for (m, v) in ch.terms() {
                            let col = column_of[&(c.index, k, y, m.clone())];
                            row[col] = &row[col] + &(&tr * v);
                        }
                    }
                }
            }
            let lhs: Cyclotomic = row.iter().zip(&known).map(|(a, x)| a * x).sum();
            if lhs != Cyclotomic::from_rational(rhs.clone()) {
                return Err(Error::ReconstructionFailure(format!(
                    "{twist} with {}: pairing gives {lhs}, index is {}",
                    rho.name(),
                    fmt_rational(&rhs)
                )));
            }
            row[columns.len()] = Cyclotomic::from_rational(rhs);
            if !echelon.insert(row)? {
                return Err(Error::ReconstructionFailure(format!("inconsistent equations at {twist}, {}", rho.name())));
            }
            rows += 1;
        }
    }
    let rank = echelon.rows.len();
    let separating = rank == columns.len();
    if separating && echelon.solution(columns.len()) != known {
        return Err(Error::ReconstructionFailure("unique solution differs from the computed classes".into()));
    }
    Ok(Decomposition {
        classes,
        family,
        representations: reps.iter().map(|r| r.name()).collect(),
        columns: columns.len(),
        rows,
        rank,
        separating,
    })
}

/// `Σ_ρ index_ρ · conj(χ_ρ(g))` over the irreducibles of a cyclic (point) group.
pub fn fourier_inversion(model: &ManifoldModel, op: Operator, twist: &Twist, g: &crate::groups::GroupElement) -> Result<Cyclotomic> {
    let mut acc = Cyclotomic::zero();
    for rho in irreducible_representations(&model.group)? {
        let index = index_by_cyclic(model, op, twist, &rho)?.total;
        acc = acc + character_value(&model.group, &rho, g)?.conj().scale(&index);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, rat};
    use crate::groups::{GroupElement, WallpaperKind};
    use crate::strata::{instantiate, SpinLift};

    fn model(id: ModelId) -> ManifoldModel {
        instantiate(&id).unwrap()
    }

    fn op(s: &str) -> Operator {
        Operator::parse(s, None).unwrap()
    }

    fn total(id: ModelId, o: &str, twist: Twist, rho: Representation) -> Rational {
        let e = evaluate(&model(id), op(o), &twist, &rho).unwrap();
        assert!(e.is_ok(), "{:?}", e.by_cyclic.verdict);
        e.by_cyclic.total
    }

    #[test]
    fn spot_values() {
        let t = Twist::trivial();
        let triv = Representation::Trivial;
        assert_eq!(total(ModelId::Football(2), "derham", t.clone(), triv.clone()), int(2));
        assert_eq!(total(ModelId::TorusRot(4), "derham", t.clone(), triv.clone()), int(2));
        assert_eq!(total(ModelId::Football(3), "dolbeault", Twist::line(4, 0), triv.clone()), int(2));
        assert_eq!(total(ModelId::Wallpaper(WallpaperKind::P4), "derham", t.clone(), triv.clone()), int(2));
        assert_eq!(total(ModelId::Football(6), "dolbeault", t.clone(), triv.clone()), int(1));
        assert_eq!(total(ModelId::Football(2), "derham", t.clone(), Representation::Regular), int(2));
        assert_eq!(total(ModelId::SymProdS2, "dolbeault", t.clone(), triv.clone()), int(1));
    }

    #[test]
    fn football_two_derham_contributions() {
        let r = index_by_elements(&model(ModelId::Football(2)), op("derham"), &Twist::trivial(), &Representation::Trivial).unwrap();
        let values: Vec<Cyclotomic> = r.contributions.iter().map(|c| c.value.clone()).collect();
        assert_eq!(values, vec![Cyclotomic::one(), Cyclotomic::one()]);
    }

    #[test]
    fn wallpaper_p4_breakdown() {
        let m = model(ModelId::Wallpaper(WallpaperKind::P4));
        let r = index_by_cyclic(&m, op("derham"), &Twist::trivial(), &Representation::Trivial).unwrap();
        let mut by_order: BTreeMap<u64, Cyclotomic> = BTreeMap::new();
        for (c, contrib) in m.cyclic.iter().zip(&r.contributions) {
            let e = by_order.entry(c.order).or_insert_with(Cyclotomic::zero);
            *e = &*e + &contrib.value;
        }
        assert_eq!(by_order[&1], Cyclotomic::zero());
        assert_eq!(by_order[&2], Cyclotomic::one());
        assert_eq!(by_order[&4], Cyclotomic::one());
    }

    #[test]
    fn spin_vanishes() {
        for n in 1..=6 {
            let m = model(ModelId::Football(n));
            for lift in [SpinLift::Plus, SpinLift::Minus] {
                for rho in irreducible_representations(&m.group).unwrap() {
                    let e = evaluate(&m, Operator::Spin(lift), &Twist::trivial(), &rho).unwrap();
                    assert_eq!(e.by_elements.total, int(0));
                }
            }
        }
    }

    #[test]
    fn uhat_football_two() {
        let m = model(ModelId::Football(2));
        let z2 = m.cyclic.iter().position(|c| c.order == 2).unwrap();
        let u = uhat_classes(&m, op("dolbeault"), z2).unwrap();
        let values: Vec<Cyclotomic> = u.functionals[&1].iter().map(|f| f[&vec![]].clone()).collect();
        let half = Cyclotomic::from_rational(rat(1, 2));
        assert_eq!(values, vec![half.clone(), half.clone()]);
        let trivial = uhat_classes(&m, op("dolbeault"), 0).unwrap();
        // Td(S^2) = 1 + h with measure 1/2
        assert_eq!(trivial.functionals[&1][0][&vec![0]], half);
        assert_eq!(trivial.functionals[&1][0][&vec![1]], half);
    }

    #[test]
    fn uhat_symmetric_square_diagonal() {
        let m = model(ModelId::SymProdS2);
        let u = uhat_classes(&m, op("dolbeault"), 1).unwrap();
        let f = &u.functionals[&1][0];
        assert_eq!(f[&vec![0]], Cyclotomic::one());
        assert_eq!(f[&vec![1]], Cyclotomic::from_rational(rat(1, 2)));
    }

    #[test]
    fn pairing_matches_direct() {
        let m = model(ModelId::Football(3));
        let r = pair_twist(&m, op("dolbeault"), &Twist::line(4, 0), &Representation::Trivial).unwrap();
        assert_eq!(r.total, int(2));
        let f2 = model(ModelId::Football(2));
        let r = pair_twist(&f2, op("dolbeault"), &Twist::trivial(), &Representation::Trivial).unwrap();
        let half = Cyclotomic::from_rational(rat(1, 2));
        assert_eq!(r.contributions.iter().map(|c| c.value.clone()).collect::<Vec<_>>(), vec![half.clone(), half]);
        let doubled = pair_twist(&m, op("dolbeault"), &Twist::parse("sum:O:4,O:4").unwrap(), &Representation::Trivial).unwrap();
        assert_eq!(doubled.total, int(4));
    }

    #[test]
    fn inform_pairing() {
        let h = FiniteGroup::cyclic(2).unwrap();
        let cf = |a: i64, b: i64| ClassFunction { values: vec![Cyclotomic::from_int(a), Cyclotomic::from_int(b)] };
        assert_eq!(pair_inform(&h, &[cf(1, -1)], &[cf(1, 1)], &cf(1, 1)).unwrap(), Cyclotomic::zero());
        assert_eq!(pair_inform(&h, &[cf(1, -1)], &[cf(1, 1)], &cf(1, -1)).unwrap(), Cyclotomic::one());
        let trivial = FiniteGroup::cyclic(1).unwrap();
        let one = |a: i64| ClassFunction { values: vec![Cyclotomic::from_int(a)] };
        assert_eq!(pair_inform(&trivial, &[one(2), one(3)], &[one(5), one(7)], &one(1)).unwrap(), Cyclotomic::from_int(31));
        assert!(matches!(pair_inform(&h, &[cf(1, 1)], &[], &cf(1, 1)), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn decomposition_reconstructs() {
        for (id, o) in [
            (ModelId::Football(2), "dolbeault"),
            (ModelId::TorusRot(4), "derham"),
            (ModelId::SymProdS2, "dolbeault"),
        ] {
            let m = model(id.clone());
            let d = decompose(&m, op(o)).unwrap();
            assert_eq!(d.classes.len(), m.cyclic.len(), "{id}");
        }
        let d = decompose(&model(ModelId::Football(2)), op("dolbeault")).unwrap();
        assert!(d.separating);
    }

    #[test]
    fn fourier_inversion_recovers_lefschetz() {
        let m = model(ModelId::Football(4));
        let tw = Twist::line(3, 1);
        for j in 0..4 {
            let g = GroupElement::Finite(j);
            let l = oracle::closed_form_L(&m.group, &m.id, op("dolbeault"), &tw, &g).unwrap();
            assert_eq!(fourier_inversion(&m, op("dolbeault"), &tw, &g).unwrap(), l);
        }
    }

    #[test]
    fn report_round_trip() {
        let e = evaluate(&model(ModelId::Football(5)), op("dolbeault"), &Twist::line(2, 1), &Representation::Character(2)).unwrap();
        let text = e.by_elements.to_json();
        assert_eq!(IndexReport::from_json(&text).unwrap(), e.by_elements);
        assert_eq!(text, e.by_elements.to_json());
    }
}
