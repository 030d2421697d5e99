//! Model geometries with explicit fixed-point data.
//!
//! Every model stores, for each conjugacy class of finite cyclic subgroups
//! `C = <g0>`, the components of `M^C` up to the action of `Z_G(C)`. A
//! component carries its degree-2 generators, tangent and normal Chern roots,
//! normal eigenvalues of each generator `g0^k`, optional spin lifts, and the
//! values of its fundamental class on top monomials.
//!
//! `stabilizer_order` is the order of the setwise stabilizer of the component
//! in `Z_G(C)`, so an orbit-representative component contributes
//! `(1/stabilizer_order) ∫_Y` to the orbifold integral over `M^C / Z_G(C)`.
//! For the identity stratum of a wallpaper model the integrals are taken over
//! `R^2/Λ` and the stabilizer order is the order of the point group, which is
//! the same orbifold integral over `R^2/G`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::charform::{fmt_linear_form, LinearForm, Monomial};
use crate::error::{Error, Result};
use crate::index_engine::EvalCache;
use crate::exact_arith::{int, Cyclotomic, Rational};
use crate::groups::{
    character_value, parse_permutation_text, CyclicClass, GroupElement, GroupModel, Mat2,
    Representation, WallpaperKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinLift {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    DeRham,
    Dolbeault,
    Spin(SpinLift),
}

impl Operator {
    pub fn parse(name: &str, lift: Option<SpinLift>) -> Result<Self> {
        match name {
            "derham" | "deRham" => Ok(Operator::DeRham),
            "dolbeault" => Ok(Operator::Dolbeault),
            "spin" => Ok(Operator::Spin(lift.unwrap_or(SpinLift::Plus))),
            "spin+" => Ok(Operator::Spin(SpinLift::Plus)),
            "spin-" => Ok(Operator::Spin(SpinLift::Minus)),
            _ => Err(Error::Parse(format!("unknown operator '{name}'"))),
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::DeRham => write!(f, "deRham"),
            Operator::Dolbeault => write!(f, "dolbeault"),
            Operator::Spin(SpinLift::Plus) => write!(f, "spin+"),
            Operator::Spin(SpinLift::Minus) => write!(f, "spin-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Football(u32),
    TorusRot(u32),
    SymProdS2,
    Wallpaper(WallpaperKind),
    Custom(String),
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::Football(n) => write!(f, "football({n})"),
            ModelId::TorusRot(n) => write!(f, "torusrot({n})"),
            ModelId::SymProdS2 => write!(f, "symprod_s2"),
            ModelId::Wallpaper(k) => write!(f, "wallpaper({})", k.name()),
            ModelId::Custom(name) => write!(f, "custom({name})"),
        }
    }
}

/// `O(degree) ⊗ χ^weight`: a catalog line bundle twisted by a character of
/// the (point) group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineTwist {
    pub degree: i64,
    pub weight: i64,
}

/// Direct sum of catalog line bundles.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Twist {
    pub summands: Vec<LineTwist>,
}

impl Twist {
    pub fn trivial() -> Self {
        Twist::line(0, 0)
    }

    pub fn line(degree: i64, weight: i64) -> Self {
        Twist { summands: vec![LineTwist { degree, weight }] }
    }

    pub fn is_trivial(&self) -> bool {
        self.summands == [LineTwist { degree: 0, weight: 0 }]
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Twist { summands: self.summands.iter().chain(&other.summands).copied().collect() }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut summands = Vec::new();
        for a in &self.summands {
            for b in &other.summands {
                summands.push(LineTwist { degree: a.degree + b.degree, weight: a.weight + b.weight });
            }
        }
        Twist { summands }
    }

    /// `none`, `O:k`, `O:k@m`, or `sum:O:k,O:j@m,...`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(Twist::trivial());
        }
        let item = |t: &str| -> Result<LineTwist> {
            let bad = || Error::Parse(format!("bad twist '{t}'"));
            let body = t.trim().strip_prefix("O:").ok_or_else(bad)?;
            let (deg, weight) = match body.split_once('@') {
                Some((d, w)) => (d, w.parse().map_err(|_| bad())?),
                None => (body, 0),
            };
            Ok(LineTwist { degree: deg.parse().map_err(|_| bad())?, weight })
        };
        let summands = match s.strip_prefix("sum:") {
            Some(rest) => rest.split(',').map(item).collect::<Result<Vec<_>>>()?,
            None => vec![item(s)?],
        };
        if summands.is_empty() {
            return Err(Error::Parse("empty twist".into()));
        }
        Ok(Twist { summands })
    }
}

impl fmt::Display for Twist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .summands
            .iter()
            .map(|l| match l.weight {
                0 => format!("O:{}", l.degree),
                w => format!("O:{}@{w}", l.degree),
            })
            .collect();
        if items.len() == 1 {
            write!(f, "{}", items[0])
        } else {
            write!(f, "sum:{}", items.join(","))
        }
    }
}

/// One component of a fixed set `M^C`, up to `Z_G(C)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedComponent {
    pub label: String,
    pub dim: u32,
    pub stabilizer_order: u64,
    pub symbols: Vec<String>,
    pub tangent_roots: Vec<LinearForm>,
    pub normal_roots: Vec<LinearForm>,
    /// Normal eigenvalues of `g0^k`, one per normal root, keyed by `k`.
    pub eigenvalues: BTreeMap<u64, Vec<Cyclotomic>>,
    /// Chosen square roots of the normal eigenvalues, per lift variant.
    pub spin_lifts: BTreeMap<SpinLift, BTreeMap<u64, Vec<Cyclotomic>>>,
    /// Top monomial -> value of the fundamental class.
    pub integrals: BTreeMap<Monomial, Rational>,
    /// Chern root and fiber weights of the degree-one catalog line bundle,
    /// when the model has one.
    pub line_root: Option<LinearForm>,
    pub line_weights: BTreeMap<u64, Cyclotomic>,
}

impl FixedComponent {
    fn point(label: String, stabilizer_order: u64, eigenvalues: BTreeMap<u64, Vec<Cyclotomic>>) -> Self {
        let normal = eigenvalues.values().next().map(|v| v.len()).unwrap_or(0);
        FixedComponent {
            label,
            dim: 0,
            stabilizer_order,
            symbols: vec![],
            tangent_roots: vec![],
            normal_roots: vec![LinearForm::zero(0); normal],
            eigenvalues,
            spin_lifts: BTreeMap::new(),
            integrals: BTreeMap::from([(vec![], Rational::one())]),
            line_root: None,
            line_weights: BTreeMap::new(),
        }
    }

    pub fn dump(&self) -> String {
        let mut out = format!(
            "component {} dim={} stabilizer={} symbols=[{}]\n",
            self.label,
            self.dim,
            self.stabilizer_order,
            self.symbols.join(", ")
        );
        let roots: Vec<String> = self.tangent_roots.iter().map(|r| fmt_linear_form(r, &self.symbols)).collect();
        out.push_str(&format!("  tangent roots: [{}]\n", roots.join(", ")));
        let roots: Vec<String> = self.normal_roots.iter().map(|r| fmt_linear_form(r, &self.symbols)).collect();
        out.push_str(&format!("  normal roots: [{}]\n", roots.join(", ")));
        for (k, ev) in &self.eigenvalues {
            let ev: Vec<String> = ev.iter().map(|e| e.to_string()).collect();
            out.push_str(&format!("  g^{k}: eigenvalues [{}]\n", ev.join(", ")));
        }
        for (m, v) in &self.integrals {
            out.push_str(&format!("  integral {:?} = {}\n", m, crate::exact_arith::fmt_rational(v)));
        }
        out
    }
}

/// Fixed-point data of one cyclic class.
#[derive(Debug, Clone)]
pub struct Stratum {
    pub class: usize,
    pub components: Vec<FixedComponent>,
}

/// Chern root and per-generator fiber weight of one line summand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleLine {
    pub root: LinearForm,
    pub weights: BTreeMap<u64, Cyclotomic>,
}

/// Restriction of an equivariant bundle to every fixed component:
/// `lines[stratum][component]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivariantBundle {
    pub lines: Vec<Vec<Vec<BundleLine>>>,
}

impl EquivariantBundle {
    pub fn rank(&self) -> usize {
        self.lines.first().and_then(|s| s.first()).map(|c| c.len()).unwrap_or(0)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        EquivariantBundle {
            lines: self
                .lines
                .iter()
                .zip(&other.lines)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.iter().chain(y).cloned().collect()).collect())
                .collect(),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let tensor_lines = |x: &Vec<BundleLine>, y: &Vec<BundleLine>| -> Vec<BundleLine> {
            let mut out = Vec::new();
            for a in x {
                for b in y {
                    out.push(BundleLine {
                        root: a.root.add(&b.root),
                        weights: a
                            .weights
                            .iter()
                            .map(|(k, w)| (*k, w * &b.weights[k]))
                            .collect(),
                    });
                }
            }
            out
        };
        EquivariantBundle {
            lines: self
                .lines
                .iter()
                .zip(&other.lines)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| tensor_lines(x, y)).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ManifoldModel {
    pub id: ModelId,
    pub group: GroupModel,
    pub cyclic: Vec<CyclicClass>,
    pub dimension: u32,
    pub operators: Vec<Operator>,
    pub strata: Vec<Stratum>,
    /// Memoized fixed-point integrals; cleared on clone.
    pub cache: EvalCache,
}

/// Catalog listing entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelDescriptor {
    pub family: &'static str,
    pub params: &'static str,
    pub dimension: u32,
    pub operators: &'static str,
    pub twists: &'static str,
}

pub fn catalog() -> Vec<ModelDescriptor> {
    vec![
        ModelDescriptor {
            family: "football",
            params: "n in 1..=12 (S^2 with Z/n rotating about the poles)",
            dimension: 2,
            operators: "deRham, dolbeault, spin (lifts plus/minus)",
            twists: "O:k@m for any k (dolbeault)",
        },
        ModelDescriptor {
            family: "torusrot",
            params: "n in {2, 3, 4, 6} (flat torus with a rotation of order n)",
            dimension: 2,
            operators: "deRham, dolbeault",
            twists: "O:0@m (dolbeault)",
        },
        ModelDescriptor {
            family: "symprod_s2",
            params: "(S^2 x S^2 with the factor swap)",
            dimension: 4,
            operators: "deRham, dolbeault",
            twists: "O:k@m meaning O(k,k) (dolbeault)",
        },
        ModelDescriptor {
            family: "wallpaper",
            params: "name in {p1, p2, p3, p4, p6} (plane with a crystallographic group)",
            dimension: 2,
            operators: "deRham, dolbeault",
            twists: "O:0@m (dolbeault)",
        },
    ]
}

/// Admissible catalog ids, in a fixed order.
pub fn catalog_ids() -> Vec<ModelId> {
    let mut ids: Vec<ModelId> = (1..=12).map(ModelId::Football).collect();
    ids.extend([2, 3, 4, 6].map(ModelId::TorusRot));
    ids.push(ModelId::SymProdS2);
    ids.extend(WallpaperKind::ALL.map(ModelId::Wallpaper));
    ids
}

pub fn instantiate(id: &ModelId) -> Result<ManifoldModel> {
    let model = match id {
        ModelId::Football(n) if (1..=12).contains(n) => football(*n)?,
        ModelId::TorusRot(n) if [1, 2, 3, 4, 6].contains(n) => torus_rotation(*n)?,
        ModelId::SymProdS2 => symmetric_square()?,
        ModelId::Wallpaper(kind) => wallpaper(*kind)?,
        ModelId::Custom(_) => {
            return Err(Error::UnsupportedParams("custom models are loaded from a strata file".into()))
        }
        other => return Err(Error::UnsupportedParams(format!("{other} is not in the catalog"))),
    };
    validate_model(&model)?;
    Ok(model)
}

fn generator_log(group: &GroupModel, c: &CyclicClass) -> i64 {
    group.cyclic_log(&c.generator).expect("catalog groups are cyclic") as i64
}

fn football(n: u32) -> Result<ManifoldModel> {
    let group = GroupModel::cyclic(n as usize)?;
    let cyclic = group.cyclic_subgroup_classes();
    let n64 = n as u64;
    let mut strata = Vec::new();
    for c in &cyclic {
        let mut components = Vec::new();
        if c.is_trivial() {
            let sphere = FixedComponent {
                label: "S2".into(),
                dim: 2,
                stabilizer_order: n64,
                symbols: vec!["h".into()],
                tangent_roots: vec![LinearForm::from_ints(&[2])],
                normal_roots: vec![],
                eigenvalues: BTreeMap::from([(1, vec![])]),
                spin_lifts: [SpinLift::Plus, SpinLift::Minus]
                    .into_iter()
                    .map(|l| (l, BTreeMap::from([(1, vec![])])))
                    .collect(),
                integrals: BTreeMap::from([(vec![1], Rational::one())]),
                line_root: Some(LinearForm::from_ints(&[1])),
                line_weights: BTreeMap::from([(1, Cyclotomic::one())]),
            };
            components.push(sphere);
        } else {
            // g0 rotates by 2π j0/n: tangent eigenvalue ζ_n^{j0} at the north pole,
            // its inverse at the south pole
            let j0 = generator_log(&group, c);
            for north in [true, false] {
                let sign = if north { 1 } else { -1 };
                let eig = |k: u64| Cyclotomic::root(n64, sign * j0 * k as i64);
                let mut comp = FixedComponent::point(
                    if north { "north".into() } else { "south".into() },
                    n64,
                    c.gen_powers.iter().map(|&k| (k, vec![eig(k)])).collect(),
                );
                let plus = Cyclotomic::root(2 * n64, sign * j0);
                let minus = (-Cyclotomic::root(2 * n64, 1)).powi(j0)?;
                let minus = if north { minus } else { minus.inv()? };
                for (lift, s) in [(SpinLift::Plus, plus), (SpinLift::Minus, minus)] {
                    let table = c.gen_powers.iter().map(|&k| (k, vec![s.pow(k)])).collect();
                    comp.spin_lifts.insert(lift, table);
                }
                comp.line_root = Some(LinearForm::zero(0));
                comp.line_weights = c
                    .gen_powers
                    .iter()
                    .map(|&k| (k, if north { eig(k) } else { Cyclotomic::one() }))
                    .collect();
                components.push(comp);
            }
        }
        strata.push(Stratum { class: c.index, components });
    }
    Ok(ManifoldModel {
        id: ModelId::Football(n),
        group,
        cyclic,
        dimension: 2,
        operators: vec![
            Operator::DeRham,
            Operator::Dolbeault,
            Operator::Spin(SpinLift::Plus),
            Operator::Spin(SpinLift::Minus),
        ],
        strata,
        cache: EvalCache::default(),
    })
}

/// Integer matrix of rotation by `ζ_n` in the lattice basis `(1, i)` for
/// n ∈ {1, 2, 4} and `(1, ζ_6)` for n ∈ {3, 6}.
pub fn torus_rotation_matrix(n: u32) -> Option<Mat2> {
    match n {
        1 => Some([[1, 0], [0, 1]]),
        2 => Some([[-1, 0], [0, -1]]),
        3 => Some([[-1, -1], [1, 0]]),
        4 => Some([[0, -1], [1, 0]]),
        6 => Some([[0, -1], [1, 1]]),
        _ => None,
    }
}

fn mat_pow(a: &Mat2, e: u32) -> Mat2 {
    let mut acc: Mat2 = [[1, 0], [0, 1]];
    for _ in 0..e {
        let mut c = [[0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * acc[0][j] + a[i][1] * acc[1][j];
            }
        }
        acc = c;
    }
    acc
}

/// Fixed points of `A` on `R^2/Z^2`, as exact coordinates in `[0,1)^2`.
pub fn torus_fixed_points(a: &Mat2) -> Vec<[Rational; 2]> {
    let m = [[1 - a[0][0], -a[0][1]], [-a[1][0], 1 - a[1][1]]];
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
    assert!(det != 0, "rotation has a fixed direction");
    let mut out = Vec::new();
    for p in 0..det {
        for q in 0..det {
            let (x, y) = (Rational::new(p.into(), det.into()), Rational::new(q.into(), det.into()));
            let image = [
                &x * int(m[0][0]) + &y * int(m[0][1]),
                &x * int(m[1][0]) + &y * int(m[1][1]),
            ];
            if image.iter().all(|v| v.is_integer()) {
                out.push([x, y]);
            }
        }
    }
    out
}

fn torus_apply(a: &Mat2, x: &[Rational; 2]) -> [Rational; 2] {
    let y = [
        &x[0] * int(a[0][0]) + &x[1] * int(a[0][1]),
        &x[0] * int(a[1][0]) + &x[1] * int(a[1][1]),
    ];
    [&y[0] - y[0].floor(), &y[1] - y[1].floor()]
}

fn flat_surface(label: &str, stabilizer_order: u64) -> FixedComponent {
    FixedComponent {
        label: label.into(),
        dim: 2,
        stabilizer_order,
        symbols: vec!["h".into()],
        tangent_roots: vec![LinearForm::zero(1)],
        normal_roots: vec![],
        eigenvalues: BTreeMap::from([(1, vec![])]),
        spin_lifts: BTreeMap::new(),
        integrals: BTreeMap::from([(vec![1], Rational::one())]),
        line_root: None,
        line_weights: BTreeMap::new(),
    }
}

fn torus_rotation(n: u32) -> Result<ManifoldModel> {
    let rot = torus_rotation_matrix(n)
        .ok_or_else(|| Error::UnsupportedParams(format!("torusrot({n}): order must be 1, 2, 3, 4 or 6")))?;
    let group = GroupModel::cyclic(n as usize)?;
    let cyclic = group.cyclic_subgroup_classes();
    let n64 = n as u64;
    let mut strata = Vec::new();
    for c in &cyclic {
        let mut components = Vec::new();
        if c.is_trivial() {
            components.push(flat_surface("T2", n64));
        } else {
            let j0 = generator_log(&group, c);
            let fixed = torus_fixed_points(&mat_pow(&rot, j0 as u32));
            let mut orbits: Vec<[Rational; 2]> = Vec::new();
            for x in fixed {
                let seen = (0..n).any(|i| orbits.contains(&torus_apply(&mat_pow(&rot, i), &x)));
                if !seen {
                    orbits.push(x);
                }
            }
            for x in orbits {
                let stab = (0..n).filter(|&i| torus_apply(&mat_pow(&rot, i), &x) == x).count() as u64;
                let label = format!(
                    "({}, {})",
                    crate::exact_arith::fmt_rational(&x[0]),
                    crate::exact_arith::fmt_rational(&x[1])
                );
                let eig = c
                    .gen_powers
                    .iter()
                    .map(|&k| (k, vec![Cyclotomic::root(n64, j0 * k as i64)]))
                    .collect();
                components.push(FixedComponent::point(label, stab, eig));
            }
        }
        strata.push(Stratum { class: c.index, components });
    }
    Ok(ManifoldModel {
        id: ModelId::TorusRot(n),
        group,
        cyclic,
        dimension: 2,
        operators: vec![Operator::DeRham, Operator::Dolbeault],
        strata,
        cache: EvalCache::default(),
    })
}

fn symmetric_square() -> Result<ManifoldModel> {
    let group = GroupModel::cyclic(2)?;
    let cyclic = group.cyclic_subgroup_classes();
    let product = FixedComponent {
        label: "S2xS2".into(),
        dim: 4,
        stabilizer_order: 2,
        symbols: vec!["a".into(), "b".into()],
        tangent_roots: vec![LinearForm::from_ints(&[2, 0]), LinearForm::from_ints(&[0, 2])],
        normal_roots: vec![],
        eigenvalues: BTreeMap::from([(1, vec![])]),
        spin_lifts: BTreeMap::new(),
        integrals: BTreeMap::from([
            (vec![1, 1], Rational::one()),
            (vec![2, 0], Rational::zero()),
            (vec![0, 2], Rational::zero()),
        ]),
        line_root: Some(LinearForm::from_ints(&[1, 1])),
        line_weights: BTreeMap::from([(1, Cyclotomic::one())]),
    };
    // the diagonal: normal bundle ≅ tangent bundle, swap acts by -1 on it
    let diagonal = FixedComponent {
        label: "diagonal".into(),
        dim: 2,
        stabilizer_order: 2,
        symbols: vec!["h".into()],
        tangent_roots: vec![LinearForm::from_ints(&[2])],
        normal_roots: vec![LinearForm::from_ints(&[2])],
        eigenvalues: BTreeMap::from([(1, vec![Cyclotomic::from_int(-1)])]),
        spin_lifts: BTreeMap::new(),
        integrals: BTreeMap::from([(vec![1], Rational::one())]),
        line_root: Some(LinearForm::from_ints(&[2])),
        line_weights: BTreeMap::from([(1, Cyclotomic::one())]),
    };
    let strata = vec![
        Stratum { class: 0, components: vec![product] },
        Stratum { class: 1, components: vec![diagonal] },
    ];
    Ok(ManifoldModel {
        id: ModelId::SymProdS2,
        group,
        cyclic,
        dimension: 4,
        operators: vec![Operator::DeRham, Operator::Dolbeault],
        strata,
        cache: EvalCache::default(),
    })
}

fn wallpaper(kind: WallpaperKind) -> Result<ManifoldModel> {
    let group = GroupModel::wallpaper(kind)?;
    let cyclic = group.cyclic_subgroup_classes();
    let n = kind.point_order() as u64;
    let mut strata = Vec::new();
    for c in &cyclic {
        let comp = match (&c.center, &c.generator) {
            (None, _) => flat_surface("R2/L", n),
            (Some(x), GroupElement::Affine(g0)) => {
                let eig = c
                    .gen_powers
                    .iter()
                    .map(|&k| (k, vec![Cyclotomic::root(n, g0.power as i64 * k as i64)]))
                    .collect();
                let stab = c.centralizer.order().expect("rotation centralizers are finite") as u64;
                FixedComponent::point(
                    format!(
                        "center ({}, {})",
                        crate::exact_arith::fmt_rational(&x[0]),
                        crate::exact_arith::fmt_rational(&x[1])
                    ),
                    stab,
                    eig,
                )
            }
            _ => unreachable!("wallpaper classes carry affine generators"),
        };
        strata.push(Stratum { class: c.index, components: vec![comp] });
    }
    Ok(ManifoldModel {
        id: ModelId::Wallpaper(kind),
        group,
        cyclic,
        dimension: 2,
        operators: vec![Operator::DeRham, Operator::Dolbeault],
        strata,
        cache: EvalCache::default(),
    })
}

impl ManifoldModel {
    pub fn supports(&self, op: Operator) -> bool {
        self.operators.contains(&op)
    }

    /// Rejects operator/twist combinations the model does not define.
    pub fn check_twist(&self, op: Operator, twist: &Twist) -> Result<()> {
        if !self.supports(op) {
            return Err(Error::UnsupportedParams(format!("{} does not support {op}", self.id)));
        }
        if twist.is_trivial() {
            return Ok(());
        }
        if op != Operator::Dolbeault {
            return Err(Error::UnsupportedTwist(format!("{op} is only evaluated untwisted")));
        }
        let needs_line = twist.summands.iter().any(|l| l.degree != 0);
        let has_line = self.strata.iter().flat_map(|s| &s.components).all(|c| c.line_root.is_some());
        if needs_line && !has_line {
            return Err(Error::UnsupportedTwist(format!("{} has no line bundles of nonzero degree", self.id)));
        }
        if twist.summands.iter().any(|l| l.weight != 0) && self.group.cyclic_log(&self.group.identity()).is_none() {
            return Err(Error::UnsupportedTwist("character twists need a cyclic group".into()));
        }
        Ok(())
    }

    /// `O(degree) ⊗ χ^weight` restricted to every fixed component.
    pub fn line_bundle(&self, degree: i64, weight: i64) -> Result<EquivariantBundle> {
        let chi = Representation::Character(weight);
        let mut lines = Vec::new();
        for stratum in &self.strata {
            let class = &self.cyclic[stratum.class];
            let mut per_comp = Vec::new();
            for comp in &stratum.components {
                let nvars = comp.symbols.len();
                let root = match (&comp.line_root, degree) {
                    (_, 0) => LinearForm::zero(nvars),
                    (Some(r), d) => r.scale(d),
                    (None, _) => {
                        return Err(Error::UnsupportedTwist(format!("{} has no line bundle O(1)", self.id)))
                    }
                };
                let mut weights = BTreeMap::new();
                for &k in &class.gen_powers {
                    let g = self.group.pow(&class.generator, k as i64);
                    let base = match degree {
                        0 => Cyclotomic::one(),
                        d => comp
                            .line_weights
                            .get(&k)
                            .ok_or_else(|| Error::ValidationFailure(format!("{}: missing line weight", comp.label)))?
                            .powi(d)?,
                    };
                    let twist = if weight == 0 {
                        Cyclotomic::one()
                    } else {
                        character_value(&self.group, &chi, &g)
                            .map_err(|e| Error::UnsupportedTwist(e.to_string()))?
                    };
                    weights.insert(k, &base * &twist);
                }
                per_comp.push(vec![BundleLine { root, weights }]);
            }
            lines.push(per_comp);
        }
        Ok(EquivariantBundle { lines })
    }

    pub fn bundle(&self, twist: &Twist) -> Result<EquivariantBundle> {
        let mut parts = twist.summands.iter().map(|l| self.line_bundle(l.degree, l.weight));
        let first = parts.next().ok_or_else(|| Error::UnsupportedTwist("empty twist".into()))??;
        parts.try_fold(first, |acc, b| Ok(acc.direct_sum(&b?)))
    }

    /// Largest cyclotomic order the model's data needs (spin lifts double it).
    pub fn required_order(&self, op: Operator) -> u64 {
        let e = self.group.exponent();
        match op {
            Operator::Spin(_) => 2 * e,
            _ => e,
        }
    }

    pub fn dump(&self) -> String {
        let mut out = format!("model {} ({}), dimension {}\n", self.id, self.group, self.dimension);
        for s in &self.strata {
            let c = &self.cyclic[s.class];
            out.push_str(&format!("class {} order {} generator {}\n", c.label, c.order, self.group.label(&c.generator)));
            for comp in &s.components {
                out.push_str(&comp.dump());
            }
        }
        out
    }
}

/// Names of the checks that passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<String>,
}

fn fail(msg: String) -> Error {
    Error::ValidationFailure(msg)
}

fn multiset_eq(a: &[Cyclotomic], b: &[Cyclotomic]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        match (0..b.len()).find(|&i| !used[i] && b[i] == *x) {
            Some(i) => {
                used[i] = true;
                true
            }
            None => false,
        }
    })
}

pub fn validate_model(m: &ManifoldModel) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    if m.strata.len() != m.cyclic.len() {
        return Err(fail(format!("{} strata for {} cyclic classes", m.strata.len(), m.cyclic.len())));
    }
    let mut lift_signs: BTreeMap<SpinLift, Cyclotomic> = BTreeMap::new();
    for s in &m.strata {
        let c = &m.cyclic[s.class];
        let d = c.order;
        for comp in &s.components {
            let at = |what: &str| format!("{} / {}: {what}", c.label, comp.label);
            let nvars = comp.symbols.len();
            if comp.stabilizer_order == 0 || comp.stabilizer_order % d != 0 {
                return Err(fail(at("stabilizer order is not a multiple of |C|")));
            }
            if comp.dim != 2 * comp.tangent_roots.len() as u32
                || comp.dim + 2 * comp.normal_roots.len() as u32 != m.dimension
            {
                return Err(fail(at("tangent/normal rank does not match the dimensions")));
            }
            if comp.tangent_roots.iter().chain(&comp.normal_roots).any(|r| r.nvars() != nvars) {
                return Err(fail(at("root uses the wrong number of generators")));
            }
            if comp.integrals.keys().any(|mono| mono.len() != nvars || mono.iter().sum::<u32>() != comp.dim / 2) {
                return Err(fail(at("integral given on a non-top monomial")));
            }
            let base = comp.eigenvalues.get(&1).ok_or_else(|| fail(at("no eigenvalues for g0")))?;
            for &k in &c.gen_powers {
                let ev = comp.eigenvalues.get(&k).ok_or_else(|| fail(at(&format!("no eigenvalues for g0^{k}"))))?;
                if ev.len() != comp.normal_roots.len() {
                    return Err(fail(at("eigenvalue count differs from normal rank")));
                }
                for (lam, lam1) in ev.iter().zip(base) {
                    if lam.is_one() {
                        return Err(fail(at(&format!("normal eigenvalue 1 for g0^{k}"))));
                    }
                    if !lam.pow(d).is_one() {
                        return Err(fail(at(&format!("eigenvalue {lam} is not a |C|-th root of unity"))));
                    }
                    if *lam != lam1.pow(k) {
                        return Err(fail(at(&format!("eigenvalues of g0^{k} are not powers of those of g0"))));
                    }
                }
                if let Some(w1) = comp.line_weights.get(&1) {
                    if comp.line_weights.get(&k).is_none_or(|w| *w != w1.pow(k)) {
                        return Err(fail(at("line-bundle weights are not power compatible")));
                    }
                }
            }
            for (lift, table) in &comp.spin_lifts {
                let s1 = table.get(&1).ok_or_else(|| fail(at("spin lift missing for g0")))?;
                for &k in &c.gen_powers {
                    let sk = table.get(&k).ok_or_else(|| fail(at(&format!("spin lift missing for g0^{k}"))))?;
                    for ((s, lam), base) in sk.iter().zip(&comp.eigenvalues[&k]).zip(s1) {
                        if &(s * s) != lam {
                            return Err(fail(at(&format!("spin lift {s} does not square to {lam}"))));
                        }
                        if *s != base.pow(k) {
                            return Err(fail(at("spin lifts are not power compatible")));
                        }
                    }
                }
                for s in s1 {
                    let sign = s.pow(d);
                    if !(sign.is_one() || (-&sign).is_one()) {
                        return Err(fail(at("spin lift of g0 has order not dividing 2|C|")));
                    }
                    match lift_signs.get(lift) {
                        Some(prev) if *prev != sign => {
                            return Err(fail(at("spin lift signs are not uniform across classes")))
                        }
                        _ => {
                            lift_signs.insert(*lift, sign);
                        }
                    }
                }
            }
        }
    }
    checks.push("component invariants".to_string());
    checks.push("power compatibility".to_string());
    if !lift_signs.is_empty() {
        checks.push("spin lifts".to_string());
    }

    // subgroup coherence: a component of M^C lies in a component of M^{C'}
    // for every C' ⊂ C, whose dimension grows by the directions on which the
    // generator of C' acts trivially
    for s in &m.strata {
        let c = &m.cyclic[s.class];
        for e in (1..c.order).filter(|e| c.order % e == 0) {
            let sub = m.group.pow(&c.generator, (c.order / e) as i64);
            let (ci, k) = m
                .group
                .locate(&m.cyclic, &sub)
                .ok_or_else(|| fail(format!("{}: subgroup of order {e} not found", c.label)))?;
            let target = &m.strata.iter().find(|t| t.class == ci).unwrap().components;
            for comp in &s.components {
                let restricted: Vec<Cyclotomic> = comp.eigenvalues[&1].iter().map(|l| l.pow(c.order / e)).collect();
                let trivial = restricted.iter().filter(|l| l.is_one()).count() as u32;
                let moving: Vec<Cyclotomic> = restricted.into_iter().filter(|l| !l.is_one()).collect();
                let dim = comp.dim + 2 * trivial;
                let found = target.iter().any(|t| t.dim == dim && multiset_eq(&t.eigenvalues[&k], &moving));
                if !found {
                    return Err(fail(format!(
                        "{} / {}: no containing component in the fixed set of the order-{e} subgroup",
                        c.label, comp.label
                    )));
                }
            }
        }
    }
    checks.push("subgroup coherence".to_string());
    Ok(ValidationReport { checks })
}

// ---------------------------------------------------------------------------
// strata file format (JSON), used for dumps and user-supplied models

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSpec {
    /// `Z/n`; class generators are referenced by element exponent.
    Cyclic(u32),
    /// Generator permutations, 0-based images; class generators are permutations.
    Permutations(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub label: String,
    pub dim: u32,
    pub stabilizer_order: u64,
    pub symbols: Vec<String>,
    /// Rows of rational coefficients over `symbols`, as strings.
    pub tangent_roots: Vec<Vec<String>>,
    pub normal_roots: Vec<Vec<String>>,
    /// Generator exponent `k` (as a string key) to eigenvalue strings.
    pub eigenvalues: BTreeMap<String, Vec<Cyclotomic>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spin_lifts: BTreeMap<SpinLift, BTreeMap<String, Vec<Cyclotomic>>>,
    /// Pairs of (monomial exponents, value).
    pub integrals: Vec<(Vec<u32>, String)>,
    /// Chern root of `O(1)` restricted to the component, if the model has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_root: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub line_weights: BTreeMap<String, Cyclotomic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumRecord {
    /// `Cyclic`: exponent `j` of the generator `g^j`; `Permutations`: the permutation.
    pub generator: serde_json::Value,
    pub components: Vec<ComponentRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrataFile {
    pub name: String,
    pub group: GroupSpec,
    pub dimension: u32,
    pub operators: Vec<String>,
    pub strata: Vec<StratumRecord>,
}

fn form_strings(f: &LinearForm) -> Vec<String> {
    f.0.iter().map(crate::exact_arith::fmt_rational).collect()
}

fn parse_form(v: &[String]) -> Result<LinearForm> {
    Ok(LinearForm(v.iter().map(|s| crate::exact_arith::parse_rational(s)).collect::<Result<_>>()?))
}

fn parse_power_map<T: Clone>(m: &BTreeMap<String, T>) -> Result<BTreeMap<u64, T>> {
    m.iter()
        .map(|(k, v)| Ok((k.parse().map_err(|_| Error::Parse(format!("bad power '{k}'")))?, v.clone())))
        .collect()
}

impl ComponentRecord {
    fn from_component(c: &FixedComponent) -> Self {
        ComponentRecord {
            label: c.label.clone(),
            dim: c.dim,
            stabilizer_order: c.stabilizer_order,
            symbols: c.symbols.clone(),
            tangent_roots: c.tangent_roots.iter().map(form_strings).collect(),
            normal_roots: c.normal_roots.iter().map(form_strings).collect(),
            eigenvalues: c.eigenvalues.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            spin_lifts: c
                .spin_lifts
                .iter()
                .map(|(l, t)| (*l, t.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()))
                .collect(),
            integrals: c
                .integrals
                .iter()
                .map(|(m, v)| (m.clone(), crate::exact_arith::fmt_rational(v)))
                .collect(),
            line_root: c.line_root.as_ref().map(form_strings),
            line_weights: c.line_weights.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    /// Rebuilds the component with powers re-keyed by `remap(k)`.
    fn to_component(&self, remap: &dyn Fn(u64) -> u64) -> Result<FixedComponent> {
        let rekey = |m: BTreeMap<u64, Vec<Cyclotomic>>| m.into_iter().map(|(k, v)| (remap(k), v)).collect();
        Ok(FixedComponent {
            label: self.label.clone(),
            dim: self.dim,
            stabilizer_order: self.stabilizer_order,
            symbols: self.symbols.clone(),
            tangent_roots: self.tangent_roots.iter().map(|r| parse_form(r)).collect::<Result<_>>()?,
            normal_roots: self.normal_roots.iter().map(|r| parse_form(r)).collect::<Result<_>>()?,
            eigenvalues: rekey(parse_power_map(&self.eigenvalues)?),
            spin_lifts: self
                .spin_lifts
                .iter()
                .map(|(l, t)| Ok((*l, rekey(parse_power_map(t)?))))
                .collect::<Result<_>>()?,
            integrals: self
                .integrals
                .iter()
                .map(|(m, v)| Ok((m.clone(), crate::exact_arith::parse_rational(v)?)))
                .collect::<Result<_>>()?,
            line_root: self.line_root.as_deref().map(parse_form).transpose()?,
            line_weights: self
                .line_weights
                .iter()
                .map(|(k, v)| Ok((remap(k.parse().map_err(|_| Error::Parse(format!("bad power '{k}'")))?), v.clone())))
                .collect::<Result<_>>()?,
        })
    }
}

impl ManifoldModel {
    /// Strata file for a model on a cyclic group.
    pub fn to_strata_file(&self) -> Result<StrataFile> {
        let n = match &self.group {
            GroupModel::Finite(g) if g.cyclic_generator().is_some() => g.order() as u32,
            _ => return Err(Error::UnsupportedModel("only models on cyclic groups can be dumped".into())),
        };
        let strata = self
            .strata
            .iter()
            .map(|s| {
                let c = &self.cyclic[s.class];
                StratumRecord {
                    generator: serde_json::json!(self.group.cyclic_log(&c.generator).unwrap()),
                    components: s.components.iter().map(ComponentRecord::from_component).collect(),
                }
            })
            .collect();
        Ok(StrataFile {
            name: self.id.to_string(),
            group: GroupSpec::Cyclic(n),
            dimension: self.dimension,
            operators: self.operators.iter().map(|o| o.to_string()).collect(),
            strata,
        })
    }

    /// Builds and validates a model from a strata file. Strata may name any
    /// generator of any conjugate of the class's subgroup; the data is
    /// re-keyed onto the engine's class representative.
    pub fn from_strata_file(file: &StrataFile) -> Result<Self> {
        let group = match &file.group {
            GroupSpec::Cyclic(n) => GroupModel::cyclic(*n as usize)?,
            GroupSpec::Permutations(p) => {
                let text: Vec<String> = p
                    .iter()
                    .map(|perm| perm.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                GroupModel::finite(parse_permutation_text(&text.join("\n"))?)
            }
        };
        let GroupModel::Finite(fg) = &group else { unreachable!() };
        let cyclic = group.cyclic_subgroup_classes();
        let mut strata: Vec<Option<Stratum>> = vec![None; cyclic.len()];
        for record in &file.strata {
            let g = match (&file.group, &record.generator) {
                (GroupSpec::Cyclic(_), v) => {
                    let j = v.as_u64().ok_or_else(|| Error::Parse("generator must be an exponent".into()))?;
                    GroupElement::Finite(fg.pow(fg.cyclic_generator().unwrap(), j as i64))
                }
                (GroupSpec::Permutations(gens), v) => {
                    let perm: Vec<usize> = serde_json::from_value(v.clone())
                        .map_err(|e| Error::Parse(format!("generator permutation: {e}")))?;
                    let degree = gens.first().map(|p| p.len()).unwrap_or(0);
                    let label = crate::groups::cycle_notation(&perm);
                    let el = (0..fg.order())
                        .find(|&a| perm.len() == degree && fg.label(a) == label)
                        .ok_or_else(|| Error::Parse(format!("permutation {perm:?} is not in the group")))?;
                    GroupElement::Finite(el)
                }
            };
            let (ci, k0) = group
                .locate(&cyclic, &g)
                .ok_or_else(|| Error::ValidationFailure("stratum generator has no cyclic class".into()))?;
            let order = cyclic[ci].order;
            let remap = move |k: u64| if order == 1 { 1 } else { (k * k0) % order };
            let components = record
                .components
                .iter()
                .map(|c| c.to_component(&remap))
                .collect::<Result<Vec<_>>>()?;
            if strata[ci].is_some() {
                return Err(Error::ValidationFailure(format!("class {} given twice", cyclic[ci].label)));
            }
            strata[ci] = Some(Stratum { class: ci, components });
        }
        let strata = strata
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| Error::ValidationFailure(format!("no stratum for class {}", cyclic[i].label))))
            .collect::<Result<Vec<_>>>()?;
        let operators = file
            .operators
            .iter()
            .map(|o| Operator::parse(o, None))
            .collect::<Result<Vec<_>>>()?;
        let model = ManifoldModel {
            id: ModelId::Custom(file.name.clone()),
            group,
            cyclic,
            dimension: file.dimension,
            operators,
            strata,
            cache: EvalCache::default(),
        };
        validate_model(&model)?;
        Ok(model)
    }
}
