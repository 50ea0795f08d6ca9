//! Shannon information measures over named axes of a [`JointPmf`], in bits.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::prob::JointPmf;

/// Absolute tolerance for comparing information quantities.
pub const INFO_TOL: f64 = 1e-9;

/// `-p log2 p` with `0 log 0 = 0`. Masses at or above one contribute zero.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 && p < 1.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entropy of a mass vector in bits.
pub fn entropy_of(masses: &[f64]) -> f64 {
    masses.iter().map(|&p| plogp(p)).sum()
}

/// Binary entropy function.
pub fn binary_entropy(q: f64) -> f64 {
    plogp(q) + plogp(1.0 - q)
}

fn joint_entropy(pmf: &JointPmf, axes: &[&str]) -> Result<f64> {
    Ok(entropy_of(pmf.marginalize(axes)?.mass()))
}

fn check_disjoint(sets: &[&[&str]]) -> Result<()> {
    let mut seen = HashSet::new();
    for set in sets {
        for name in *set {
            if !seen.insert(*name) {
                return Err(Error::OverlappingAxes(name.to_string()));
            }
        }
    }
    Ok(())
}

fn union<'a>(sets: &[&[&'a str]]) -> Vec<&'a str> {
    sets.iter().flat_map(|s| s.iter().copied()).collect()
}

/// `H(axes)`: entropy of the marginal on `axes`.
pub fn entropy(pmf: &JointPmf, axes: &[&str]) -> Result<f64> {
    if axes.is_empty() {
        return Err(Error::EmptyAxisSet);
    }
    check_disjoint(&[axes])?;
    joint_entropy(pmf, axes)
}

/// `H(target | given)`. An empty `given` yields the plain entropy.
pub fn conditional_entropy(pmf: &JointPmf, target: &[&str], given: &[&str]) -> Result<f64> {
    if target.is_empty() {
        return Err(Error::EmptyAxisSet);
    }
    check_disjoint(&[target, given])?;
    let h = joint_entropy(pmf, &union(&[target, given]))? - joint_entropy(pmf, given)?;
    Ok(if h < 0.0 && h > -INFO_TOL { 0.0 } else { h })
}

/// `I(a; b | given)`, with round-off below [`INFO_TOL`] clamped to zero.
pub fn mutual_information(pmf: &JointPmf, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyAxisSet);
    }
    check_disjoint(&[a, b, given])?;
    let i = joint_entropy(pmf, &union(&[a, given]))? + joint_entropy(pmf, &union(&[b, given]))?
        - joint_entropy(pmf, &union(&[a, b, given]))?
        - joint_entropy(pmf, given)?;
    Ok(if i < 0.0 && i > -INFO_TOL { 0.0 } else { i })
}

/// Corner quantities of the Slepian-Wolf region for two encoders with
/// decoder side information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlepianWolfBounds {
    /// `H(1 | 2, given)`
    pub first: f64,
    /// `H(2 | 1, given)`
    pub second: f64,
    /// `H(1, 2 | given)`
    pub sum: f64,
}

impl SlepianWolfBounds {
    /// Whether the rate pair lies in the (closed) region.
    pub fn admits(&self, r1: f64, r2: f64) -> bool {
        r1 >= self.first - INFO_TOL && r2 >= self.second - INFO_TOL && r1 + r2 >= self.sum - INFO_TOL
    }
}

pub fn slepian_wolf_bounds(
    pmf: &JointPmf,
    first: &[&str],
    second: &[&str],
    given: &[&str],
) -> Result<SlepianWolfBounds> {
    check_disjoint(&[first, second, given])?;
    Ok(SlepianWolfBounds {
        first: conditional_entropy(pmf, first, &union(&[second, given]))?,
        second: conditional_entropy(pmf, second, &union(&[first, given]))?,
        sum: conditional_entropy(pmf, &union(&[first, second]), given)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{Alphabet, Kernel};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn off_diagonal() -> JointPmf {
        let a = Alphabet::new("u1", ["1", "2", "3"]).unwrap();
        JointPmf::from_fn(vec![a.clone(), a.renamed("u2")], |i| {
            if i[0] != i[1] {
                1.0 / 6.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    fn fair_bits() -> JointPmf {
        JointPmf::uniform(vec![
            Alphabet::indexed("a", 2).unwrap(),
            Alphabet::indexed("b", 2).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn off_diagonal_joint_entropy_is_log6() {
        let h = entropy(&off_diagonal(), &["u1", "u2"]).unwrap();
        assert_abs_diff_eq!(h, 6f64.log2(), epsilon = 1e-12);
        assert!((h - 2.58).abs() < 5e-3);
    }

    #[test]
    fn point_mass_has_zero_entropy() {
        let p = JointPmf::point_mass(vec![Alphabet::indexed("a", 4).unwrap()], &[2]).unwrap();
        assert_eq!(entropy(&p, &["a"]).unwrap(), 0.0);
    }

    #[test]
    fn two_thirds_one_third() {
        let p = JointPmf::new(vec![Alphabet::indexed("c", 2).unwrap()], vec![2.0 / 3.0, 1.0 / 3.0])
            .unwrap();
        assert_abs_diff_eq!(entropy(&p, &["c"]).unwrap(), 0.918_295_834, epsilon = 1e-9);
    }

    #[test]
    fn empty_and_overlapping_sets_error() {
        let p = fair_bits();
        assert!(matches!(entropy(&p, &[]), Err(Error::EmptyAxisSet)));
        assert!(matches!(
            conditional_entropy(&p, &["a"], &["a"]),
            Err(Error::OverlappingAxes(_))
        ));
        assert!(matches!(
            mutual_information(&p, &["a"], &["b"], &["b"]),
            Err(Error::OverlappingAxes(_))
        ));
    }

    #[test]
    fn self_conditioning_is_zero() {
        let p = off_diagonal();
        let k = Kernel::identity(p.axis("u1").unwrap(), "x").unwrap();
        let j = p.compose(&[k]).unwrap();
        assert_abs_diff_eq!(conditional_entropy(&j, &["x"], &["u1"]).unwrap(), 0.0, epsilon = 1e-12);
        // injective map: I(X;U1) = H(U1)
        assert_abs_diff_eq!(
            mutual_information(&j, &["x"], &["u1"], &[]).unwrap(),
            3f64.log2(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn independent_bits() {
        let p = fair_bits();
        assert_abs_diff_eq!(conditional_entropy(&p, &["a"], &["b"]).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(mutual_information(&p, &["a"], &["b"], &[]).unwrap(), 0.0);
        let sw = slepian_wolf_bounds(&p, &["a"], &["b"], &[]).unwrap();
        assert_abs_diff_eq!(sw.first, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sw.second, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sw.sum, 2.0, epsilon = 1e-12);
        assert!(sw.admits(1.0, 1.0));
        assert!(!sw.admits(0.9, 1.1));
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(binary_entropy(0.25), 0.811_278_124_459_132_8, epsilon = 1e-12);
    }

    fn random_pmf(weights: Vec<f64>, dims: (usize, usize, usize)) -> JointPmf {
        let s: f64 = weights.iter().sum();
        let axes = vec![
            Alphabet::indexed("a", dims.0).unwrap(),
            Alphabet::indexed("b", dims.1).unwrap(),
            Alphabet::indexed("c", dims.2).unwrap(),
        ];
        JointPmf::new(axes, weights.iter().map(|w| w / s).collect()).unwrap()
    }

    fn pmf_strategy() -> impl Strategy<Value = JointPmf> {
        (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|d| {
            proptest::collection::vec(0.0f64..1.0, d.0 * d.1 * d.2)
                .prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)
                .prop_map(move |w| random_pmf(w, d))
        })
    }

    proptest! {
        #[test]
        fn chain_rule(p in pmf_strategy()) {
            let hab = entropy(&p, &["a", "b"]).unwrap();
            let ha = entropy(&p, &["a"]).unwrap();
            let hb_a = conditional_entropy(&p, &["b"], &["a"]).unwrap();
            prop_assert!((hab - ha - hb_a).abs() < 1e-9);
        }

        #[test]
        fn mutual_information_symmetric_nonnegative(p in pmf_strategy()) {
            let i_ab = mutual_information(&p, &["a"], &["b"], &["c"]).unwrap();
            let i_ba = mutual_information(&p, &["b"], &["a"], &["c"]).unwrap();
            prop_assert!(i_ab >= 0.0);
            prop_assert!((i_ab - i_ba).abs() < 1e-9);
        }

        #[test]
        fn entropy_bounded_by_log_alphabet(p in pmf_strategy()) {
            let n = p.axis("a").unwrap().len() as f64;
            let h = entropy(&p, &["a"]).unwrap();
            prop_assert!(h >= 0.0 && h <= n.log2() + 1e-12);
        }
    }
}
