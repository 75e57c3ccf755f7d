//! Index sets for compressing the cross terms of the reference string, and
//! access policies compiled to linear secret sharing matrices.

mod lsss;
mod pfset;
mod policy;

pub use lsss::LsssMatrix;
pub use pfset::{verify_set, CrossIndexSet, ProgressionFreeSet};
pub use policy::AccessPolicy;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("empty policy")]
    Empty,
    #[error("policy syntax: {0}")]
    Syntax(String),
    #[error("attribute {0:?} is not in the universe")]
    UnknownAttribute(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{MockScalar, ScalarField};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

    fn formula() -> impl Strategy<Value = AccessPolicy> {
        let leaf = (0..NAMES.len()).prop_map(|i| AccessPolicy::attr(NAMES[i]));
        leaf.prop_recursive(4, 10, 2, |inner| {
            (inner.clone(), inner, any::<bool>()).prop_map(|(l, r, is_and)| {
                if is_and {
                    AccessPolicy::and(l, r)
                } else {
                    AccessPolicy::or(l, r)
                }
            })
        })
    }

    fn check_all_subsets<F: ScalarField>(p: &AccessPolicy) {
        let m = LsssMatrix::from_policy(p);
        assert_eq!(m.num_rows(), p.leaves().len());
        for mask in 0u32..(1 << NAMES.len()) {
            let attrs: BTreeSet<&str> = NAMES
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, n)| *n)
                .collect();
            let omega = m.reconstruction_coefficients::<F, _>(&attrs);
            assert_eq!(omega.is_some(), p.satisfied_by(&attrs), "{p} with {attrs:?}");
            if let Some(omega) = omega {
                for c in 0..m.num_cols() {
                    let sum = omega.iter().fold(F::zero(), |acc, (&j, &w)| {
                        assert!(attrs.contains(m.label(j)));
                        acc + w * F::from_i64(m.row(j)[c])
                    });
                    let want = if c == 0 { F::one() } else { F::zero() };
                    assert_eq!(sum, want);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn reconstruction_iff_satisfied_mock(p in formula()) {
            check_all_subsets::<MockScalar>(&p);
        }

        #[test]
        fn reconstruction_iff_satisfied_bls(p in formula()) {
            check_all_subsets::<ark_bls12_381::Fr>(&p);
        }
    }
}
