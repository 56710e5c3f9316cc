//! Exact tower-vector weights.
//!
//! The probability that a uniform DAG on `n` sites has layer-size vector
//! `h = (h_1, ..., h_T)` is
//!
//! ```text
//! w(h) = multinomial(n; h) / |D_n| * prod_i 2^(h_i * s_{i-1}) * (1 - 2^(-h_{i-1}))^(h_i)
//! ```
//!
//! where `s_{i-1} = h_1 + ... + h_{i-1}` and the boundary factor at `i = 1`
//! is 1 (sinks need no out-edge). The product term counts, per vertex of
//! layer `i`, the free edges into layers at distance two or more and the
//! nonempty out-neighborhoods into layer `i - 1`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

use crate::enumerate::count_dags;
use crate::error::{Error, Result};
use crate::tower::TowerVector;

/// `(1 - 2^-p)^x` as an exact rational.
fn boundary_factor(p: usize, x: usize) -> BigRational {
    let num = (BigInt::one() << p) - BigInt::one();
    BigRational::new(num.pow(x as u32), BigInt::one() << (p * x))
}

/// Unnormalized weight: the exact number of DAGs on `|h|` labeled sites
/// whose tower vector equals `h`.
pub fn tower_vector_dag_count(h: &TowerVector) -> BigUint {
    let n = h.n();
    // multinomial(n; h) * prod_i 2^(h_i s_{i-1}) (1 - 2^-h_{i-1})^{h_i}
    // is an integer: each boundary factor combines with part of the power
    // of two into (2^{h_{i-1}} - 1)^{h_i} * 2^{h_i s_{i-2}}.
    let mut acc = BigRational::from_integer(factorial(n));
    for hi in h.sizes() {
        acc /= BigRational::from_integer(factorial(*hi));
    }
    let mut below = 0usize;
    let mut prev: Option<usize> = None;
    for &hi in h.sizes() {
        acc *= BigRational::from_integer(BigInt::one() << (hi * below));
        if let Some(p) = prev {
            acc *= boundary_factor(p, hi);
        }
        below += hi;
        prev = Some(hi);
    }
    debug_assert!(acc.is_integer());
    let (sign, mag) = acc.to_integer().into_parts();
    debug_assert_ne!(sign, num_bigint::Sign::Minus);
    mag
}

/// `P_n(h(G) = h)` as an exact rational. Rejects `|h| != n`.
pub fn tower_vector_weight(h: &TowerVector, n: usize) -> Result<BigRational> {
    if h.n() != n {
        return Err(Error::SizeMismatch {
            got: h.n(),
            expected: n,
        });
    }
    let count = BigInt::from(tower_vector_dag_count(h));
    let total = BigInt::from(count_dags(n));
    Ok(BigRational::new(count, total))
}

pub(crate) fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Lossy f64 view of an exact rational, for reporting and diagnostics.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// All compositions of `n` into positive parts, lexicographic by separator
/// mask. There are `2^(n-1)` of them; intended for small `n` only.
pub fn compositions(n: usize) -> impl Iterator<Item = TowerVector> {
    assert!(n >= 1 && n <= 24, "compositions() is an oracle-scale helper");
    (0u32..(1 << (n - 1))).map(move |mask| {
        let mut parts = Vec::new();
        let mut run = 1usize;
        for bit in 0..(n - 1) {
            if mask >> bit & 1 == 1 {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        parts.push(run);
        TowerVector::new(parts).expect("parts are positive")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_dags;
    use crate::tower::tower_decompose;
    use num_traits::Zero;
    use std::collections::HashMap;

    fn tv(sizes: &[usize]) -> TowerVector {
        TowerVector::new(sizes.to_vec()).unwrap()
    }

    #[test]
    fn n2_weights() {
        let w2 = tower_vector_weight(&tv(&[2]), 2).unwrap();
        let w11 = tower_vector_weight(&tv(&[1, 1]), 2).unwrap();
        assert_eq!(w2, BigRational::new(1.into(), 3.into()));
        assert_eq!(w11, BigRational::new(2.into(), 3.into()));
    }

    #[test]
    fn n1_weight() {
        assert_eq!(
            tower_vector_weight(&tv(&[1]), 1).unwrap(),
            BigRational::one()
        );
    }

    #[test]
    fn size_mismatch_rejected() {
        assert!(tower_vector_weight(&tv(&[1, 1]), 3).is_err());
    }

    #[test]
    fn normalization_up_to_12() {
        for n in 1..=12 {
            let mut total = BigRational::zero();
            for h in compositions(n) {
                total += tower_vector_weight(&h, n).unwrap();
            }
            assert_eq!(total, BigRational::one(), "n = {n}");
        }
    }

    #[test]
    fn counts_match_enumeration() {
        for n in 1..=5 {
            let mut by_vector: HashMap<Vec<usize>, usize> = HashMap::new();
            for g in enumerate_dags(n).unwrap() {
                let (_, h) = tower_decompose(&g);
                *by_vector.entry(h.sizes().to_vec()).or_insert(0) += 1;
            }
            for (sizes, count) in by_vector {
                let h = tv(&sizes);
                assert_eq!(
                    tower_vector_dag_count(&h),
                    BigUint::from(count),
                    "n = {n}, h = {sizes:?}"
                );
            }
        }
    }
}
