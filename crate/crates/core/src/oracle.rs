//! Closed-form kernel characters for the catalog models.
//!
//! Nothing here touches fixed-point data: characters come from the known
//! cohomology of `S^2`, `T^2` and `S^2 x S^2` with the induced action, and
//! invariant indices come from averaging over the finite (point) group.
//! Wallpaper models are evaluated on `T^2 = R^2/Λ` with the point group.

use crate::error::{Error, Result};
use crate::exact_arith::{Cyclotomic, Rational};
use crate::groups::{character_value, epsilon_trivial, ClassFunction, GroupElement, GroupModel, Representation, WallpaperKind};
use crate::strata::{ModelId, Operator, Twist};

/// Virtual character of `ker D+ - ker D-` on the (point) group `Z/n`,
/// indexed by element.
#[derive(Debug, Clone)]
pub struct EquivariantCharacter {
    pub group: GroupModel,
    pub values: ClassFunction,
}

impl EquivariantCharacter {
    pub fn dimension(&self) -> Result<Rational> {
        self.values.values[self.group_index(0)].to_rational()
    }

    fn group_index(&self, j: u64) -> usize {
        match &self.group {
            GroupModel::Finite(fg) => fg.pow(fg.cyclic_generator().expect("cyclic"), j as i64),
            GroupModel::Wallpaper(_) => unreachable!("oracle groups are finite"),
        }
    }

    /// `χ(c^j)` for the cyclic generator `c`.
    pub fn at_power(&self, j: u64) -> Cyclotomic {
        self.values.values[self.group_index(j)].clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Surface {
    Sphere(u32),
    Torus(u32),
    SphereSquare,
}

fn surface(id: &ModelId) -> Result<Surface> {
    match id {
        ModelId::Football(n) if (1..=12).contains(n) => Ok(Surface::Sphere(*n)),
        ModelId::TorusRot(n) if [1, 2, 3, 4, 6].contains(n) => Ok(Surface::Torus(*n)),
        ModelId::SymProdS2 => Ok(Surface::SphereSquare),
        ModelId::Wallpaper(kind) => Ok(Surface::Torus(match kind {
            WallpaperKind::P1 => 1,
            WallpaperKind::P2 => 2,
            WallpaperKind::P3 => 3,
            WallpaperKind::P4 => 4,
            WallpaperKind::P6 => 6,
        })),
        other => Err(Error::UnsupportedModel(format!("no closed-form kernel for {other}"))),
    }
}

fn group_order(s: Surface) -> u32 {
    match s {
        Surface::Sphere(n) | Surface::Torus(n) => n,
        Surface::SphereSquare => 2,
    }
}

/// Character of `H^0(O(k)) - H^1(O(k))` on `P^1` where the generator acts
/// on the fiber over the north pole with weight `λ`.
fn sphere_line(lambda: &Cyclotomic, k: i64) -> Cyclotomic {
    if k >= 0 {
        (0..=k).map(|j| lambda.pow(j as u64)).sum()
    } else {
        -(1..=(-k - 1)).map(|j| lambda.powi(-j).expect("root of unity")).sum::<Cyclotomic>()
    }
}

fn value(s: Surface, op: Operator, twist: &Twist, j: u64) -> Result<Cyclotomic> {
    let n = group_order(s) as u64;
    let omega = Cyclotomic::root(n, j as i64);
    let untwisted = || {
        if twist.is_trivial() {
            Ok(())
        } else {
            Err(Error::UnsupportedTwist(format!("{op} is only evaluated untwisted")))
        }
    };
    match (s, op) {
        (_, Operator::DeRham) => {
            untwisted()?;
            Ok(match s {
                Surface::Sphere(_) => Cyclotomic::from_int(2),
                // H^1(T^2) ⊗ C has eigenvalues ω, ω^{-1}
                Surface::Torus(_) => Cyclotomic::from_int(2) - &omega - omega.conj(),
                // the swap exchanges the two classes in H^2
                Surface::SphereSquare => Cyclotomic::from_int(if j == 0 { 4 } else { 2 }),
            })
        }
        (Surface::Sphere(_), Operator::Spin(_)) => {
            untwisted()?;
            Ok(Cyclotomic::zero())
        }
        (_, Operator::Spin(_)) => Err(Error::UnsupportedParams("spin is only defined on football models".into())),
        (_, Operator::Dolbeault) => twist
            .summands
            .iter()
            .map(|line| {
                let chi = Cyclotomic::root(n, line.weight * j as i64);
                let base = match s {
                    Surface::Sphere(_) => sphere_line(&omega, line.degree),
                    Surface::Torus(_) if line.degree == 0 => Cyclotomic::one() - &omega,
                    Surface::Torus(_) => {
                        return Err(Error::UnsupportedTwist("torus models only carry degree-0 lines".into()))
                    }
                    Surface::SphereSquare => {
                        // super-trace of the swap on V ⊗ V is sdim V
                        let sdim = Cyclotomic::from_int(line.degree + 1);
                        if j == 0 {
                            &sdim * &sdim
                        } else {
                            sdim
                        }
                    }
                };
                Ok(&base * &chi)
            })
            .sum::<Result<Cyclotomic>>(),
    }
}

pub fn kernel_character(id: &ModelId, op: Operator, twist: &Twist) -> Result<EquivariantCharacter> {
    let s = surface(id)?;
    let group = GroupModel::cyclic(group_order(s) as usize)?;
    let GroupModel::Finite(fg) = &group else { unreachable!() };
    let values = (0..fg.order())
        .map(|a| value(s, op, twist, group.cyclic_log(&GroupElement::Finite(a)).expect("cyclic")))
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivariantCharacter { group: group.clone(), values: ClassFunction { values } })
}

/// Equivariant index `L(g)` for an element of the model's own group.
#[allow(non_snake_case)]
pub fn closed_form_L(model_group: &GroupModel, id: &ModelId, op: Operator, twist: &Twist, g: &GroupElement) -> Result<Cyclotomic> {
    let s = surface(id)?;
    let j = model_group
        .cyclic_log(g)
        .ok_or_else(|| Error::UnsupportedModel("element outside the cyclic (point) group".into()))?;
    value(s, op, twist, j % group_order(s) as u64)
}

/// `(1/|G|) Σ_g χ(g) tr ρ(g)`, which must be an integer.
pub fn lefschetz_average(id: &ModelId, op: Operator, twist: &Twist, rho: &Representation) -> Result<Rational> {
    let chi = kernel_character(id, op, twist)?;
    let GroupModel::Finite(fg) = &chi.group else { unreachable!() };
    let trace = ClassFunction::character(&chi.group, rho)?;
    let avg = epsilon_trivial(fg, &chi.values.pointwise(&trace)?)?;
    let avg = avg.to_rational()?;
    if !avg.is_integer() {
        return Err(Error::NonIntegral(format!(
            "oracle average {} for {id} {op} {twist}",
            crate::exact_arith::fmt_rational(&avg)
        )));
    }
    Ok(avg)
}

/// Convenience: the trivial-ρ oracle as an integer.
pub fn invariant_index(id: &ModelId, op: Operator, twist: &Twist) -> Result<Rational> {
    lefschetz_average(id, op, twist, &Representation::Trivial)
}

/// `tr ρ(c^j)` on the oracle's group, for callers that index by exponent.
pub fn trace_at_power(n: u32, rho: &Representation, j: u64) -> Result<Cyclotomic> {
    let group = GroupModel::cyclic(n as usize)?;
    let GroupModel::Finite(fg) = &group else { unreachable!() };
    let el = fg.pow(fg.cyclic_generator().expect("cyclic"), j as i64);
    character_value(&group, rho, &GroupElement::Finite(el))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::int;
    use crate::strata::SpinLift;

    fn op(s: &str) -> Operator {
        Operator::parse(s, None).unwrap()
    }

    #[test]
    fn football_weight_sums() {
        let chi = kernel_character(&ModelId::Football(3), op("dolbeault"), &Twist::line(4, 0)).unwrap();
        let z = Cyclotomic::root(3, 1);
        assert_eq!(chi.at_power(1), Cyclotomic::one() + z);
        assert_eq!(chi.at_power(0), Cyclotomic::from_int(5));
        let zero = kernel_character(&ModelId::Football(5), op("dolbeault"), &Twist::line(-1, 0)).unwrap();
        assert!(zero.values.values.iter().all(Cyclotomic::is_zero));
        // O(-3): H^1 has dimension 2
        let neg = kernel_character(&ModelId::Football(4), op("dolbeault"), &Twist::line(-3, 0)).unwrap();
        assert_eq!(neg.dimension().unwrap(), int(-2));
    }

    #[test]
    fn torus_rotation_on_cohomology() {
        let chi = kernel_character(&ModelId::TorusRot(4), op("derham"), &Twist::trivial()).unwrap();
        assert_eq!(chi.at_power(1), Cyclotomic::from_int(2));
        assert_eq!(chi.at_power(2), Cyclotomic::from_int(4));
        assert_eq!(chi.at_power(0), Cyclotomic::zero());
    }

    #[test]
    fn spot_averages() {
        let t = Twist::trivial();
        assert_eq!(lefschetz_average(&ModelId::Football(3), op("dolbeault"), &Twist::line(4, 0), &Representation::Trivial).unwrap(), int(2));
        assert_eq!(invariant_index(&ModelId::SymProdS2, op("dolbeault"), &t).unwrap(), int(1));
        assert_eq!(invariant_index(&ModelId::Football(2), op("derham"), &t).unwrap(), int(2));
        for n in [2, 3, 4, 6] {
            assert_eq!(invariant_index(&ModelId::TorusRot(n), op("derham"), &t).unwrap(), int(2));
        }
        assert_eq!(invariant_index(&ModelId::Wallpaper(WallpaperKind::P1), op("derham"), &t).unwrap(), int(0));
        for lift in [SpinLift::Plus, SpinLift::Minus] {
            assert_eq!(invariant_index(&ModelId::Football(5), Operator::Spin(lift), &t).unwrap(), int(0));
        }
    }

    #[test]
    fn regular_average_is_dimension() {
        for id in [ModelId::Football(4), ModelId::TorusRot(3), ModelId::SymProdS2] {
            for tw in [Twist::trivial(), Twist::line(0, 1)] {
                let chi = kernel_character(&id, op("dolbeault"), &tw).unwrap();
                let avg = lefschetz_average(&id, op("dolbeault"), &tw, &Representation::Regular).unwrap();
                assert_eq!(avg, chi.dimension().unwrap(), "{id}");
            }
        }
    }

    #[test]
    fn galois_coherence() {
        // χ(g^k) is the k-th Galois conjugate of χ(g) for weight-listed kernels
        let chi = kernel_character(&ModelId::Football(5), op("dolbeault"), &Twist::line(3, 2)).unwrap();
        for k in 1..5 {
            assert_eq!(chi.at_power(k), chi.at_power(1).galois(k as i64));
        }
    }

    #[test]
    fn unsupported_combinations() {
        assert!(matches!(
            kernel_character(&ModelId::TorusRot(4), op("dolbeault"), &Twist::line(1, 0)),
            Err(Error::UnsupportedTwist(_))
        ));
        assert!(matches!(
            kernel_character(&ModelId::Football(2), op("derham"), &Twist::line(1, 0)),
            Err(Error::UnsupportedTwist(_))
        ));
        assert!(kernel_character(&ModelId::Custom("x".into()), op("derham"), &Twist::trivial()).is_err());
    }
}
