//! Finite groups and orientation-preserving wallpaper groups: finite-order
//! conjugacy classes, conjugacy classes of finite cyclic subgroups,
//! centralizers, Weyl-group orbits on generators, and class-function calculus.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use num_traits::One;

use crate::error::{Error, Result};
use crate::exact_arith::{fmt_rational, int, Cyclotomic, Rational};

/// Upper bound on the order of finite groups we ingest.
pub const MAX_FINITE_ORDER: usize = 10_000;

pub type Mat2 = [[i64; 2]; 2];

const IDENTITY2: Mat2 = [[1, 0], [0, 1]];

fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mat2_apply(a: &Mat2, v: &[i64; 2]) -> [i64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn mat2_apply_q(a: &Mat2, v: &[Rational; 2]) -> [Rational; 2] {
    [
        &v[0] * int(a[0][0]) + &v[1] * int(a[0][1]),
        &v[0] * int(a[1][0]) + &v[1] * int(a[1][1]),
    ]
}

fn is_lattice_vector(v: &[Rational; 2]) -> bool {
    v[0].is_integer() && v[1].is_integer()
}

fn fract(v: &[Rational; 2]) -> [Rational; 2] {
    [&v[0] - v[0].floor(), &v[1] - v[1].floor()]
}

fn fmt_point(v: &[Rational; 2]) -> String {
    format!("({}, {})", fmt_rational(&v[0]), fmt_rational(&v[1]))
}

// ---------------------------------------------------------------------------
// finite groups

/// A finite group given by its multiplication table.
#[derive(Debug)]
pub struct FiniteGroup {
    table: Vec<Vec<u32>>,
    inverse: Vec<u32>,
    identity: usize,
    generators: Vec<usize>,
    labels: Vec<String>,
    cyclic_generator: Option<usize>,
    class_ids: OnceLock<Vec<usize>>,
}

impl FiniteGroup {
    /// `Z/n` with elements `g^0, ..., g^(n-1)`; element `j` is `g^j`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_FINITE_ORDER {
            return Err(Error::InvalidGroup(format!("cyclic group of order {n}")));
        }
        let table = (0..n)
            .map(|a| (0..n).map(|b| ((a + b) % n) as u32).collect())
            .collect();
        let labels = (0..n)
            .map(|j| match j {
                0 => "e".to_string(),
                1 => "g".to_string(),
                _ => format!("g^{j}"),
            })
            .collect();
        let gens = if n == 1 { vec![] } else { vec![1] };
        Self::build(table, gens, labels)
    }

    /// Validates a multiplication table (closure, identity, inverses,
    /// associativity via Light's test over a generating set).
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || n > MAX_FINITE_ORDER {
            return Err(Error::InvalidGroup(format!("table of size {n}")));
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::InvalidGroup("table is not closed".into()));
        }
        let table: Vec<Vec<u32>> = table
            .into_iter()
            .map(|r| r.into_iter().map(|x| x as u32).collect())
            .collect();
        let labels = (0..n).map(|i| format!("#{i}")).collect();
        // greedy generating set
        let mut gens = Vec::new();
        let mut span: BTreeSet<usize> = BTreeSet::new();
        let id = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] as usize == x && table[x][e] as usize == x))
            .ok_or_else(|| Error::InvalidGroup("no identity".into()))?;
        span.insert(id);
        for x in 0..n {
            if span.contains(&x) {
                continue;
            }
            gens.push(x);
            let mut queue: VecDeque<usize> = span.iter().copied().collect();
            while let Some(a) = queue.pop_front() {
                for &s in &gens {
                    let b = table[a][s] as usize;
                    if span.insert(b) {
                        queue.push_back(b);
                    }
                }
            }
        }
        Self::build(table, gens, labels)
    }

    /// Closure of permutation generators given as 0-based image lists.
    pub fn from_permutations(perms: Vec<Vec<usize>>) -> Result<Self> {
        let degree = perms.first().map(|p| p.len()).unwrap_or(0);
        for p in &perms {
            let mut seen = vec![false; p.len()];
            if p.len() != degree || p.iter().any(|&x| x >= degree || std::mem::replace(&mut seen[x], true)) {
                return Err(Error::InvalidGroup(format!("not a permutation of 0..{degree}: {p:?}")));
            }
        }
        let identity: Vec<usize> = (0..degree).collect();
        let mut elements = vec![identity.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(identity, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(a) = queue.pop_front() {
            for p in &perms {
                let prod: Vec<usize> = (0..degree).map(|x| elements[a][p[x]]).collect();
                if !index.contains_key(&prod) {
                    if elements.len() >= MAX_FINITE_ORDER {
                        return Err(Error::InvalidGroup(format!("group exceeds {MAX_FINITE_ORDER} elements")));
                    }
                    index.insert(prod.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(prod);
                }
            }
        }
        let n = elements.len();
        let table = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        // (ab)(x) = a(b(x))
                        let prod: Vec<usize> = (0..degree).map(|x| elements[a][elements[b][x]]).collect();
                        index[&prod] as u32
                    })
                    .collect()
            })
            .collect();
        let labels = elements.iter().map(|p| cycle_notation(p)).collect();
        let gens = perms.iter().map(|p| index[p]).filter(|&g| g != 0).collect();
        Self::build(table, gens, labels)
    }

    fn build(table: Vec<Vec<u32>>, generators: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        let n = table.len();
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] as usize == x && table[x][e] as usize == x))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = vec![0u32; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| table[a][b] as usize == identity && table[b][a] as usize == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
            inverse[a] = b as u32;
        }
        // Light's associativity test: (x s) y = x (s y) for s in a generating set
        for &s in &generators {
            for x in 0..n {
                let xs = table[x][s] as usize;
                for y in 0..n {
                    let sy = table[s][y] as usize;
                    if table[xs][y] != table[x][sy] {
                        return Err(Error::InvalidGroup("multiplication is not associative".into()));
                    }
                }
            }
        }
        let mut group = FiniteGroup {
            table,
            inverse,
            identity,
            generators,
            labels,
            cyclic_generator: None,
            class_ids: OnceLock::new(),
        };
        group.cyclic_generator = if n == 1 {
            Some(identity)
        } else {
            (0..n).find(|&g| group.element_order(g) == n as u64)
        };
        Ok(group)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(a) } else { a };
        (0..k.unsigned_abs()).fold(self.identity, |acc, _| self.mul(acc, base))
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    /// An element generating the whole group, if the group is cyclic.
    pub fn cyclic_generator(&self) -> Option<usize> {
        self.cyclic_generator
    }

    pub fn conjugate(&self, h: usize, g: usize) -> usize {
        self.mul(self.mul(h, g), self.inv(h))
    }

    /// Conjugacy class id of every element, ids numbered by first occurrence.
    pub fn class_ids(&self) -> &[usize] {
        self.class_ids.get_or_init(|| {
            let n = self.order();
            let mut ids = vec![usize::MAX; n];
            let mut next = 0;
            for g in 0..n {
                if ids[g] != usize::MAX {
                    continue;
                }
                for h in 0..n {
                    ids[self.conjugate(h, g)] = next;
                }
                next += 1;
            }
            ids
        })
    }

    pub fn centralizer(&self, g: usize) -> Vec<usize> {
        (0..self.order()).filter(|&h| self.mul(h, g) == self.mul(g, h)).collect()
    }
}

pub fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut x = p[start];
        while x != start {
            seen[x] = true;
            cycle.push(x);
            x = p[x];
        }
        let body: Vec<String> = cycle.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("({})", body.join(" ")));
    }
    if out.is_empty() {
        "e".into()
    } else {
        out
    }
}

/// Parses permutation generators, one per line as 0-based images; `#` starts a comment.
pub fn parse_permutation_text(text: &str) -> Result<FiniteGroup> {
    let mut perms = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perm = line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse(format!("line {}: expected integers", no + 1)))?;
        perms.push(perm);
    }
    if perms.is_empty() {
        return Err(Error::Parse("no generators".into()));
    }
    FiniteGroup::from_permutations(perms)
}

// ---------------------------------------------------------------------------
// wallpaper groups

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WallpaperKind {
    P1,
    P2,
    P3,
    P4,
    P6,
}

impl WallpaperKind {
    pub const ALL: [WallpaperKind; 5] = [Self::P1, Self::P2, Self::P3, Self::P4, Self::P6];

    pub fn point_order(self) -> u32 {
        match self {
            Self::P1 => 1,
            Self::P2 => 2,
            Self::P3 => 3,
            Self::P4 => 4,
            Self::P6 => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::P1 => "p1",
            Self::P2 => "p2",
            Self::P3 => "p3",
            Self::P4 => "p4",
            Self::P6 => "p6",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnsupportedParams(format!("unknown wallpaper group '{name}'")))
    }

    /// Square lattice for p1/p2/p4, hexagonal for p3/p6.
    pub fn default_basis(self) -> [Cyclotomic; 2] {
        match self {
            Self::P3 | Self::P6 => [Cyclotomic::one(), Cyclotomic::root(6, 1)],
            _ => [Cyclotomic::one(), Cyclotomic::root(4, 1)],
        }
    }
}

/// A symmorphic orientation-preserving wallpaper group `Z^2 x| Z/n`, the point
/// group generated by the rotation `z -> zeta_n z` written in lattice coordinates.
#[derive(Debug, Clone)]
pub struct WallpaperGroup {
    kind: WallpaperKind,
    basis: [Cyclotomic; 2],
    rotation_powers: Vec<Mat2>,
}

impl WallpaperGroup {
    pub fn new(kind: WallpaperKind) -> Result<Self> {
        Self::with_basis(kind, kind.default_basis())
    }

    /// Checks that rotation by `zeta_n` maps the lattice spanned by `basis` to itself.
    pub fn with_basis(kind: WallpaperKind, basis: [Cyclotomic; 2]) -> Result<Self> {
        let [e1, e2] = &basis;
        let det = e1 * &e2.conj() - e1.conj() * e2;
        if det.is_zero() {
            return Err(Error::InvalidGroup("degenerate lattice basis".into()));
        }
        let n = kind.point_order() as u64;
        let zeta = Cyclotomic::root(n, 1);
        let mut generator = [[0i64; 2]; 2];
        for (col, e) in basis.iter().enumerate() {
            let z = &zeta * e;
            // z = a e1 + b e2 with a, b real
            let a = (&z * &e2.conj() - z.conj() * e2).checked_div(&det)?;
            let b = (&z * &e1.conj() - z.conj() * e1).checked_div(&-&det)?;
            for (row, c) in [a, b].iter().enumerate() {
                let c = c.to_rational().ok().filter(|c| c.is_integer()).ok_or_else(|| {
                    Error::InvalidGroup(format!(
                        "rotation of order {n} does not preserve the lattice"
                    ))
                })?;
                generator[row][col] = crate::exact_arith::rational_to_i64(&c).unwrap();
            }
        }
        let mut rotation_powers = vec![IDENTITY2];
        for _ in 1..n {
            let last = *rotation_powers.last().unwrap();
            rotation_powers.push(mat2_mul(&generator, &last));
        }
        if mat2_mul(&generator, rotation_powers.last().unwrap()) != IDENTITY2 {
            return Err(Error::InvalidGroup("point group generator has wrong order".into()));
        }
        Ok(WallpaperGroup { kind, basis, rotation_powers })
    }

    pub fn kind(&self) -> WallpaperKind {
        self.kind
    }

    pub fn basis(&self) -> &[Cyclotomic; 2] {
        &self.basis
    }

    pub fn point_order(&self) -> u32 {
        self.kind.point_order()
    }

    /// Integer matrix of the `p`-th power of the point-group generator.
    pub fn rotation(&self, p: u32) -> &Mat2 {
        &self.rotation_powers[(p % self.point_order()) as usize]
    }

    fn one_minus(&self, p: u32) -> Mat2 {
        let r = self.rotation(p);
        [[1 - r[0][0], -r[0][1]], [-r[1][0], 1 - r[1][1]]]
    }

    /// `|det(1 - R^p)|`, the number of fixed points of `R^p` on the torus.
    pub fn fixed_count(&self, p: u32) -> i64 {
        let m = self.one_minus(p);
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs()
    }

    /// Solves `(1 - R^p) x = t` for `p != 0`.
    pub fn solve_center(&self, p: u32, t: &[i64; 2]) -> [Rational; 2] {
        let m = self.one_minus(p);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!(det != 0, "rotation part is trivial");
        let d = int(det);
        [
            int(m[1][1] * t[0] - m[0][1] * t[1]) / &d,
            int(-m[1][0] * t[0] + m[0][0] * t[1]) / &d,
        ]
    }

    pub fn apply(&self, g: &Affine, x: &[Rational; 2]) -> [Rational; 2] {
        let y = mat2_apply_q(self.rotation(g.power), x);
        [&y[0] + int(g.shift[0]), &y[1] + int(g.shift[1])]
    }

    pub fn mul(&self, a: &Affine, b: &Affine) -> Affine {
        let rt = mat2_apply(self.rotation(a.power), &b.shift);
        Affine {
            power: (a.power + b.power) % self.point_order(),
            shift: [rt[0] + a.shift[0], rt[1] + a.shift[1]],
        }
    }

    pub fn inv(&self, a: &Affine) -> Affine {
        let n = self.point_order();
        let p = (n - a.power % n) % n;
        let rt = mat2_apply(self.rotation(p), &a.shift);
        Affine { power: p, shift: [-rt[0], -rt[1]] }
    }

    pub fn center(&self, g: &Affine) -> Option<[Rational; 2]> {
        (g.power % self.point_order() != 0).then(|| self.solve_center(g.power, &g.shift))
    }

    /// Stabilizer of a point of the plane: `{(R^i, x - R^i x)}` with lattice shifts.
    pub fn stabilizer(&self, x: &[Rational; 2]) -> Vec<Affine> {
        (0..self.point_order())
            .filter_map(|i| {
                let rx = mat2_apply_q(self.rotation(i), x);
                let s = [&x[0] - &rx[0], &x[1] - &rx[1]];
                is_lattice_vector(&s).then(|| Affine {
                    power: i,
                    shift: [
                        crate::exact_arith::rational_to_i64(&s[0]).unwrap(),
                        crate::exact_arith::rational_to_i64(&s[1]).unwrap(),
                    ],
                })
            })
            .collect()
    }

    /// Whether `y` lies in the orbit of `x` under the full group.
    pub fn same_orbit(&self, x: &[Rational; 2], y: &[Rational; 2]) -> bool {
        (0..self.point_order()).any(|i| {
            let rx = mat2_apply_q(self.rotation(i), x);
            is_lattice_vector(&[&y[0] - &rx[0], &y[1] - &rx[1]])
        })
    }

    /// Orbifold cone-point orders: one entry per group orbit of points with
    /// nontrivial stabilizer, sorted descending. Computed by enumerating
    /// rotation centers in the unit cell.
    pub fn rotation_signature(&self) -> Vec<u32> {
        let mut points: Vec<[Rational; 2]> = Vec::new();
        for p in 1..self.point_order() {
            let d = self.fixed_count(p);
            for a in 0..d {
                for b in 0..d {
                    let x = fract(&self.solve_center(p, &[a, b]));
                    if !points.contains(&x) {
                        points.push(x);
                    }
                }
            }
        }
        let mut orbits: Vec<[Rational; 2]> = Vec::new();
        for x in points {
            if !orbits.iter().any(|y| self.same_orbit(y, &x)) {
                orbits.push(x);
            }
        }
        let mut sig: Vec<u32> = orbits.iter().map(|x| self.stabilizer(x).len() as u32).collect();
        sig.sort_unstable_by(|a, b| b.cmp(a));
        sig
    }
}

/// Wallpaper group element `x -> R^power x + shift`, shift in lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Affine {
    pub power: u32,
    pub shift: [i64; 2],
}

// ---------------------------------------------------------------------------
// the common interface

#[derive(Debug, Clone)]
pub enum GroupModel {
    Finite(Arc<FiniteGroup>),
    Wallpaper(Arc<WallpaperGroup>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Finite(usize),
    Affine(Affine),
}

impl GroupElement {
    fn finite(&self) -> usize {
        match self {
            GroupElement::Finite(i) => *i,
            GroupElement::Affine(_) => panic!("wallpaper element used with a finite group"),
        }
    }

    fn affine(&self) -> &Affine {
        match self {
            GroupElement::Affine(a) => a,
            GroupElement::Finite(_) => panic!("finite element used with a wallpaper group"),
        }
    }
}

/// Centralizer of a finite-order element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Centralizer {
    /// The whole group (the identity of an infinite group).
    Whole,
    Elements(Vec<GroupElement>),
}

impl Centralizer {
    pub fn order(&self) -> Option<usize> {
        match self {
            Centralizer::Whole => None,
            Centralizer::Elements(e) => Some(e.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementClass {
    pub rep: GroupElement,
    pub order: u64,
    /// Number of elements; `None` when the class is infinite.
    pub size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylOrbit {
    /// Exponent `k` of the representative `g0^k`.
    pub rep_power: u64,
    pub powers: Vec<u64>,
}

impl WeylOrbit {
    pub fn size(&self) -> usize {
        self.powers.len()
    }
}

/// A conjugacy class of finite cyclic subgroups, represented by `C = <generator>`.
#[derive(Debug, Clone)]
pub struct CyclicClass {
    pub index: usize,
    pub generator: GroupElement,
    pub order: u64,
    /// Exponents `k` with `generator^k` generating `C`.
    pub gen_powers: Vec<u64>,
    /// Indices into `finite_order_classes()` of the element classes mapping to `(C)`.
    pub element_classes: Vec<usize>,
    pub centralizer: Centralizer,
    /// Multipliers `a` such that some element of `N_G(C)` conjugates `g` to `g^a`.
    pub weyl_multipliers: Vec<u64>,
    pub weyl_orbits: Vec<WeylOrbit>,
    /// Rotation center for wallpaper subgroups.
    pub center: Option<[Rational; 2]>,
    pub label: String,
}

impl CyclicClass {
    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }
}

pub fn coprime_residues(d: u64) -> Vec<u64> {
    if d == 1 {
        return vec![1];
    }
    (1..d).filter(|k| k.gcd(&d) == 1).collect()
}

impl GroupModel {
    pub fn cyclic(n: usize) -> Result<Self> {
        Ok(GroupModel::Finite(Arc::new(FiniteGroup::cyclic(n)?)))
    }

    pub fn finite(g: FiniteGroup) -> Self {
        GroupModel::Finite(Arc::new(g))
    }

    pub fn wallpaper(kind: WallpaperKind) -> Result<Self> {
        Ok(GroupModel::Wallpaper(Arc::new(WallpaperGroup::new(kind)?)))
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupModel::Finite(g) => GroupElement::Finite(g.identity()),
            GroupModel::Wallpaper(_) => GroupElement::Affine(Affine { power: 0, shift: [0, 0] }),
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match self {
            GroupModel::Finite(g) => GroupElement::Finite(g.mul(a.finite(), b.finite())),
            GroupModel::Wallpaper(w) => GroupElement::Affine(w.mul(a.affine(), b.affine())),
        }
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        match self {
            GroupModel::Finite(g) => GroupElement::Finite(g.inv(a.finite())),
            GroupModel::Wallpaper(w) => GroupElement::Affine(w.inv(a.affine())),
        }
    }

    pub fn pow(&self, a: &GroupElement, k: i64) -> GroupElement {
        let base = if k < 0 { self.inv(a) } else { *a };
        let mut acc = self.identity();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        acc
    }

    /// `h g h^-1`.
    pub fn conjugate(&self, h: &GroupElement, g: &GroupElement) -> GroupElement {
        self.mul(&self.mul(h, g), &self.inv(h))
    }

    /// Order of `a`, or `None` for infinite order (translations).
    pub fn element_order(&self, a: &GroupElement) -> Option<u64> {
        match self {
            GroupModel::Finite(g) => Some(g.element_order(a.finite())),
            GroupModel::Wallpaper(w) => {
                let a = a.affine();
                let n = w.point_order() as u64;
                let p = a.power as u64 % n;
                if p == 0 {
                    (a.shift == [0, 0]).then_some(1)
                } else {
                    Some(n / p.gcd(&n))
                }
            }
        }
    }

    pub fn is_identity(&self, a: &GroupElement) -> bool {
        *a == self.identity()
    }

    /// Order of the group (finite kind) or of the point group (wallpaper kind).
    pub fn finite_quotient_order(&self) -> usize {
        match self {
            GroupModel::Finite(g) => g.order(),
            GroupModel::Wallpaper(w) => w.point_order() as usize,
        }
    }

    /// Least common multiple of all finite element orders.
    pub fn exponent(&self) -> u64 {
        match self {
            GroupModel::Finite(g) => (0..g.order()).fold(1, |acc, a| acc.lcm(&g.element_order(a))),
            GroupModel::Wallpaper(w) => w.point_order() as u64,
        }
    }

    pub fn label(&self, a: &GroupElement) -> String {
        match self {
            GroupModel::Finite(g) => g.label(a.finite()).to_string(),
            GroupModel::Wallpaper(w) => {
                let a = a.affine();
                if a.power == 0 && a.shift == [0, 0] {
                    return "e".into();
                }
                let n = w.point_order();
                let r = match a.power {
                    0 => "1".to_string(),
                    p => format!("R{}^{}", n, p),
                };
                format!("({r}, [{}, {}])", a.shift[0], a.shift[1])
            }
        }
    }

    /// Conjugacy test for finite-order elements. For wallpaper groups two
    /// rotations are conjugate iff they have equal rotation part and their
    /// centers lie in one group orbit.
    pub fn is_conjugate(&self, a: &GroupElement, b: &GroupElement) -> bool {
        match self {
            GroupModel::Finite(g) => {
                let ids = g.class_ids();
                ids[a.finite()] == ids[b.finite()]
            }
            GroupModel::Wallpaper(w) => {
                let (a, b) = (a.affine(), b.affine());
                let n = w.point_order();
                if a.power % n != b.power % n {
                    return false;
                }
                match (w.center(a), w.center(b)) {
                    (Some(x), Some(y)) => w.same_orbit(&x, &y),
                    // translations: conjugate iff the shifts lie in one point-group orbit
                    _ => (0..n).any(|i| mat2_apply(w.rotation(i), &a.shift) == b.shift),
                }
            }
        }
    }

    /// All conjugacy classes of finite-order elements, sorted by element order.
    pub fn finite_order_classes(&self) -> Vec<ElementClass> {
        match self {
            GroupModel::Finite(g) => {
                let ids = g.class_ids();
                let mut reps: Vec<ElementClass> = Vec::new();
                let mut sizes: Vec<usize> = Vec::new();
                for a in 0..g.order() {
                    let id = ids[a];
                    if id == reps.len() {
                        reps.push(ElementClass {
                            rep: GroupElement::Finite(a),
                            order: g.element_order(a),
                            size: None,
                        });
                        sizes.push(0);
                    }
                    sizes[id] += 1;
                }
                for (c, s) in reps.iter_mut().zip(sizes) {
                    c.size = Some(s);
                }
                reps.sort_by_key(|c| c.order);
                reps
            }
            GroupModel::Wallpaper(w) => {
                let mut reps = vec![ElementClass { rep: self.identity(), order: 1, size: Some(1) }];
                let n = w.point_order();
                for p in 1..n {
                    let d = w.fixed_count(p);
                    let mut found: Vec<GroupElement> = Vec::new();
                    for a in 0..d {
                        for b in 0..d {
                            let g = GroupElement::Affine(Affine { power: p, shift: [a, b] });
                            if !found.iter().any(|f| self.is_conjugate(f, &g)) {
                                found.push(g);
                            }
                        }
                    }
                    let order = (n / p.gcd(&n)) as u64;
                    reps.extend(found.into_iter().map(|rep| ElementClass { rep, order, size: None }));
                }
                reps.sort_by_key(|c| c.order);
                reps
            }
        }
    }

    /// Index into `classes` of the class containing `g`.
    pub fn class_index(&self, classes: &[ElementClass], g: &GroupElement) -> Option<usize> {
        classes.iter().position(|c| self.is_conjugate(&c.rep, g))
    }

    pub fn centralizer(&self, g: &GroupElement) -> Centralizer {
        match self {
            GroupModel::Finite(fg) => Centralizer::Elements(
                fg.centralizer(g.finite()).into_iter().map(GroupElement::Finite).collect(),
            ),
            GroupModel::Wallpaper(w) => match w.center(g.affine()) {
                None if self.is_identity(g) => Centralizer::Whole,
                None => panic!("centralizer of a translation requested"),
                Some(x) => Centralizer::Elements(
                    w.stabilizer(&x).into_iter().map(GroupElement::Affine).collect(),
                ),
            },
        }
    }

    /// Elements normalizing `<g>` (finite kind: all of them; wallpaper kind:
    /// the stabilizer of the rotation center, which contains the normalizer).
    fn normalizer_candidates(&self, g: &GroupElement) -> Vec<GroupElement> {
        match self {
            GroupModel::Finite(fg) => (0..fg.order()).map(GroupElement::Finite).collect(),
            GroupModel::Wallpaper(w) => match w.center(g.affine()) {
                Some(x) => w.stabilizer(&x).into_iter().map(GroupElement::Affine).collect(),
                None => vec![self.identity()],
            },
        }
    }

    /// Orbits of `W_G(C) = N_G(C)/Z_G(C)` on the generators of `C = <g>`,
    /// together with the multipliers realized by the normalizer.
    pub fn weyl_data(&self, g: &GroupElement, order: u64) -> (Vec<u64>, Vec<WeylOrbit>) {
        let powers: Vec<(u64, GroupElement)> =
            coprime_residues(order).into_iter().map(|k| (k, self.pow(g, k as i64))).collect();
        let mut multipliers = BTreeSet::new();
        for h in self.normalizer_candidates(g) {
            let c = self.conjugate(&h, g);
            if let Some((k, _)) = powers.iter().find(|(_, x)| *x == c) {
                multipliers.insert(*k);
            }
        }
        let multipliers: Vec<u64> = multipliers.into_iter().collect();
        let mut orbits: Vec<WeylOrbit> = Vec::new();
        for (k, _) in &powers {
            if orbits.iter().any(|o| o.powers.contains(k)) {
                continue;
            }
            let mut orbit: BTreeSet<u64> = BTreeSet::new();
            for a in &multipliers {
                orbit.insert((k * a) % order.max(1) + if order == 1 { 1 } else { 0 });
            }
            orbits.push(WeylOrbit { rep_power: *k, powers: orbit.into_iter().collect() });
        }
        (multipliers, orbits)
    }

    /// One [`CyclicClass`] per conjugacy class of finite cyclic subgroups,
    /// trivial subgroup first. Built by merging element classes under `g ~ g^k`
    /// for `k` coprime to the order.
    pub fn cyclic_subgroup_classes(&self) -> Vec<CyclicClass> {
        let classes = self.finite_order_classes();
        let mut owner: Vec<Option<usize>> = vec![None; classes.len()];
        let mut out: Vec<CyclicClass> = Vec::new();
        for (i, ec) in classes.iter().enumerate() {
            if owner[i].is_some() {
                continue;
            }
            let idx = out.len();
            let gen_powers = coprime_residues(ec.order);
            let mut members = BTreeSet::new();
            for &k in &gen_powers {
                let gk = self.pow(&ec.rep, k as i64);
                let j = self.class_index(&classes, &gk).expect("power of a finite-order element");
                owner[j] = Some(idx);
                members.insert(j);
            }
            let (weyl_multipliers, weyl_orbits) = self.weyl_data(&ec.rep, ec.order);
            let center = match (self, &ec.rep) {
                (GroupModel::Wallpaper(w), GroupElement::Affine(a)) => w.center(a),
                _ => None,
            };
            let label = match &center {
                Some(x) => format!("C{}@{}", ec.order, fmt_point(x)),
                None if ec.order == 1 => "1".into(),
                None => format!("<{}>", self.label(&ec.rep)),
            };
            out.push(CyclicClass {
                index: idx,
                generator: ec.rep,
                order: ec.order,
                gen_powers,
                element_classes: members.into_iter().collect(),
                centralizer: self.centralizer(&ec.rep),
                weyl_multipliers,
                weyl_orbits,
                center,
                label,
            });
        }
        out
    }

    /// Finds the cyclic class and the exponent `k` with `g ~ generator^k`.
    pub fn locate(&self, cyclic: &[CyclicClass], g: &GroupElement) -> Option<(usize, u64)> {
        let order = self.element_order(g)?;
        cyclic.iter().filter(|c| c.order == order).find_map(|c| {
            c.gen_powers
                .iter()
                .find(|&&k| self.is_conjugate(&self.pow(&c.generator, k as i64), g))
                .map(|&k| (c.index, k))
        })
    }

    /// Image in the finite quotient used for representations: the element
    /// itself (finite kind) or the exponent of the rotation part (wallpaper kind).
    pub fn quotient_index(&self, g: &GroupElement) -> usize {
        match (self, g) {
            (GroupModel::Finite(_), GroupElement::Finite(i)) => *i,
            (GroupModel::Wallpaper(w), GroupElement::Affine(a)) => (a.power % w.point_order()) as usize,
            _ => panic!("element kind does not match group kind"),
        }
    }

    /// Exponent `j` with `g = c^j` for the cyclic generator `c` of the finite
    /// quotient, when that quotient is cyclic.
    pub fn cyclic_log(&self, g: &GroupElement) -> Option<u64> {
        match self {
            GroupModel::Finite(fg) => {
                let c = fg.cyclic_generator()?;
                let target = g.finite();
                let mut x = fg.identity();
                for j in 0..fg.order() as u64 {
                    if x == target {
                        return Some(j);
                    }
                    x = fg.mul(x, c);
                }
                None
            }
            GroupModel::Wallpaper(_) => Some(self.quotient_index(g) as u64),
        }
    }
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupModel::Finite(g) => write!(f, "finite group of order {}", g.order()),
            GroupModel::Wallpaper(w) => write!(f, "wallpaper group {}", w.kind().name()),
        }
    }
}

// ---------------------------------------------------------------------------
// representations and class functions

pub type Matrix = Vec<Vec<Cyclotomic>>;

fn mat_identity(d: usize) -> Matrix {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { Cyclotomic::one() } else { Cyclotomic::zero() }).collect())
        .collect()
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

fn mat_trace(a: &Matrix) -> Cyclotomic {
    (0..a.len()).map(|i| a[i][i].clone()).sum()
}

/// Traces of a validated matrix representation, indexed like
/// [`GroupModel::quotient_index`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentationTraces {
    pub degree: usize,
    pub traces: Vec<Cyclotomic>,
}

/// A finite-dimensional representation; for wallpaper groups it factors
/// through the point group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Representation {
    Trivial,
    Regular,
    /// `c^j -> zeta_N^(m j)` on a cyclic group (or point group) of order `N`.
    Character(i64),
    Matrices(Arc<RepresentationTraces>),
}

impl Representation {
    /// Validates matrices on the group's generators (finite kind) or on the
    /// point-group generator (wallpaper kind) and tabulates all traces.
    pub fn from_matrices(group: &GroupModel, generators: Vec<Matrix>) -> Result<Self> {
        let degree = generators.first().map(|m| m.len()).unwrap_or(0);
        if degree == 0 || generators.iter().any(|m| m.len() != degree || m.iter().any(|r| r.len() != degree)) {
            return Err(Error::InvalidRepresentation("matrices must be square of equal size".into()));
        }
        let (n, gens, mul): (usize, Vec<usize>, Box<dyn Fn(usize, usize) -> usize>) = match group {
            GroupModel::Finite(fg) => {
                let fg2 = fg.clone();
                (fg.order(), fg.generators().to_vec(), Box::new(move |a, b| fg2.mul(a, b)))
            }
            GroupModel::Wallpaper(w) => {
                let n = w.point_order() as usize;
                (n, if n == 1 { vec![] } else { vec![1] }, Box::new(move |a, b| (a + b) % n))
            }
        };
        if gens.len() != generators.len() {
            return Err(Error::InvalidRepresentation(format!(
                "expected {} generator matrices, got {}",
                gens.len(),
                generators.len()
            )));
        }
        let identity = match group {
            GroupModel::Finite(fg) => fg.identity(),
            GroupModel::Wallpaper(_) => 0,
        };
        let mut images: Vec<Option<Matrix>> = vec![None; n];
        images[identity] = Some(mat_identity(degree));
        let mut queue = VecDeque::from([identity]);
        while let Some(a) = queue.pop_front() {
            for (s, m) in gens.iter().zip(&generators) {
                let b = mul(*s, a);
                let img = mat_mul(m, images[a].as_ref().unwrap());
                match &images[b] {
                    None => {
                        images[b] = Some(img);
                        queue.push_back(b);
                    }
                    Some(existing) if *existing != img => {
                        return Err(Error::InvalidRepresentation(
                            "matrices violate the group relations".into(),
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
        let traces = images
            .iter()
            .map(|m| m.as_ref().map(mat_trace))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidRepresentation("generators do not reach every element".into()))?;
        Ok(Representation::Matrices(Arc::new(RepresentationTraces { degree, traces })))
    }

    pub fn name(&self) -> String {
        match self {
            Representation::Trivial => "trivial".into(),
            Representation::Regular => "regular".into(),
            Representation::Character(m) => format!("char:{m}"),
            Representation::Matrices(r) => format!("matrices(dim {})", r.degree),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "trivial" => Ok(Representation::Trivial),
            "regular" => Ok(Representation::Regular),
            "sign" => Ok(Representation::Character(1)),
            _ => s
                .strip_prefix("char:")
                .and_then(|m| m.parse().ok())
                .map(Representation::Character)
                .ok_or_else(|| Error::Parse(format!("unknown representation '{s}'"))),
        }
    }
}

/// `tr rho(g)`; for wallpaper groups `tr rho((A, t)) = tr rho_bar(A)`.
pub fn character_value(group: &GroupModel, rho: &Representation, g: &GroupElement) -> Result<Cyclotomic> {
    match rho {
        Representation::Trivial => Ok(Cyclotomic::one()),
        Representation::Regular => {
            let q = group.quotient_index(g);
            let id = group.quotient_index(&group.identity());
            Ok(if q == id {
                Cyclotomic::from_int(group.finite_quotient_order() as i64)
            } else {
                Cyclotomic::zero()
            })
        }
        Representation::Character(m) => {
            let j = group.cyclic_log(g).ok_or_else(|| {
                Error::InvalidRepresentation("characters by weight need a cyclic group".into())
            })?;
            let n = group.finite_quotient_order() as u64;
            Ok(Cyclotomic::root(n, m * j as i64))
        }
        Representation::Matrices(r) => r
            .traces
            .get(group.quotient_index(g))
            .cloned()
            .ok_or_else(|| Error::InvalidRepresentation("representation built for another group".into())),
    }
}

/// Irreducible representations of a cyclic group or of a wallpaper point group.
pub fn irreducible_representations(group: &GroupModel) -> Result<Vec<Representation>> {
    let cyclic = match group {
        GroupModel::Finite(fg) => fg.cyclic_generator().is_some(),
        GroupModel::Wallpaper(_) => true,
    };
    if !cyclic {
        return Err(Error::UnsupportedParams("irreducibles are tabulated for cyclic groups only".into()));
    }
    let n = group.finite_quotient_order() as i64;
    Ok((0..n).map(Representation::Character).collect())
}

/// Function on the elements of a finite group, indexed by element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFunction {
    pub values: Vec<Cyclotomic>,
}

impl ClassFunction {
    pub fn from_fn(group: &FiniteGroup, f: impl Fn(usize) -> Cyclotomic) -> Self {
        ClassFunction { values: (0..group.order()).map(f).collect() }
    }

    pub fn character(group: &GroupModel, rho: &Representation) -> Result<Self> {
        match group {
            GroupModel::Finite(fg) => Ok(ClassFunction {
                values: (0..fg.order())
                    .map(|a| character_value(group, rho, &GroupElement::Finite(a)))
                    .collect::<Result<_>>()?,
            }),
            GroupModel::Wallpaper(_) => Err(Error::UnsupportedParams(
                "class functions are tabulated on finite groups".into(),
            )),
        }
    }

    pub fn is_class_function(&self, group: &FiniteGroup) -> bool {
        let ids = group.class_ids();
        (0..group.order()).all(|a| (0..group.order()).all(|b| ids[a] != ids[b] || self.values[a] == self.values[b]))
    }

    pub fn pointwise(&self, other: &Self) -> Result<Self> {
        if self.values.len() != other.values.len() {
            return Err(Error::BasisMismatch("class functions on different groups".into()));
        }
        Ok(ClassFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.values.len() != other.values.len() {
            return Err(Error::BasisMismatch("class functions on different groups".into()));
        }
        Ok(ClassFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() })
    }
}

/// Multiplicity of the trivial representation: `(1/|H|) sum_h f(h)`.
pub fn epsilon_trivial(group: &FiniteGroup, f: &ClassFunction) -> Result<Cyclotomic> {
    if f.values.len() != group.order() {
        return Err(Error::BasisMismatch(format!(
            "class function has {} values, group has {} elements",
            f.values.len(),
            group.order()
        )));
    }
    let sum: Cyclotomic = f.values.iter().sum();
    Ok(sum.scale(&Rational::new(One::one(), (group.order() as i64).into())))
}

/// Extends a function on `gen(C)` by zero to the cyclic group `C`, whose
/// element `g^j` sits at index `j`.
pub fn extend_by_zero(class: &CyclicClass, f: &HashMap<u64, Cyclotomic>) -> ClassFunction {
    let d = class.order;
    ClassFunction {
        values: (0..d)
            .map(|j| {
                let k = if d == 1 { 1 } else { j };
                if class.gen_powers.contains(&k) {
                    f.get(&k).cloned().unwrap_or_else(Cyclotomic::zero)
                } else {
                    Cyclotomic::zero()
                }
            })
            .collect(),
    }
}
