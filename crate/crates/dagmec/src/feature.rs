//! Features: the maximal runs of layers of size >= 2 between regeneration
//! layers of a tower vector, and their exact weights.
//!
//! A vector with regeneration points `tau_1 < ... < tau_R` splits into
//! blocks `G_0` (before `tau_1`), `G_i` (strictly between `tau_i` and
//! `tau_{i+1}`), and `G_R` (after `tau_R`). Each block is a composition
//! into parts >= 2, possibly empty. The weight of a feature is the ratio
//! of the tower weight of a vector containing it (wired between two
//! single-site layers) to the weight of the all-ones vector of the same
//! size; free-boundary variants drop the wiring on one side for the first
//! and last block.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::tower::TowerVector;
use crate::weights::factorial;

/// A composition into parts `>= 2`; the empty feature has size 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feature(Vec<usize>);

impl Feature {
    /// The empty feature.
    pub fn empty() -> Self {
        Feature(Vec::new())
    }

    /// Builds a feature from parts, all `>= 2`.
    pub fn new(parts: Vec<usize>) -> Option<Self> {
        if parts.iter().any(|&g| g < 2) {
            return None;
        }
        Some(Feature(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Size `|G|`: the total number of sites.
    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// Length `L(G)`: the number of layers.
    pub fn len(&self) -> usize {
        self.0.len()
    }
}

/// The feature sequence of a tower vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureDecomposition {
    /// `G_0, ..., G_R`; a single block when `R = 0`.
    pub features: Vec<Feature>,
    /// `R(h)`.
    pub regenerations: usize,
    /// True iff the vector has no regeneration layer at all, in which case
    /// `features` holds one block with free boundaries on both sides.
    pub free_free: bool,
}

/// Splits `h` at its regeneration layers.
pub fn extract_features(h: &TowerVector) -> FeatureDecomposition {
    let taus = h.regeneration_points();
    if taus.is_empty() {
        return FeatureDecomposition {
            features: vec![Feature(h.sizes().to_vec())],
            regenerations: 0,
            free_free: true,
        };
    }
    let mut features = Vec::with_capacity(taus.len() + 1);
    let mut start = 0usize; // 0-based slice start
    for &tau in &taus {
        features.push(Feature(h.sizes()[start..tau - 1].to_vec()));
        start = tau;
    }
    features.push(Feature(h.sizes()[start..].to_vec()));
    FeatureDecomposition {
        features,
        regenerations: taus.len(),
        free_free: false,
    }
}

impl FeatureDecomposition {
    /// Inverse of [`extract_features`]: interleave single-1 separators.
    pub fn reassemble(&self) -> TowerVector {
        if self.free_free {
            return TowerVector::new(self.features[0].0.clone()).expect("nonempty block");
        }
        let mut sizes = Vec::new();
        for (i, f) in self.features.iter().enumerate() {
            if i > 0 {
                sizes.push(1);
            }
            sizes.extend_from_slice(&f.0);
        }
        TowerVector::new(sizes).expect("at least one separator")
    }
}

/// `2^e` for a possibly negative exponent.
fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << (e as usize))
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << ((-e) as usize))
    }
}

/// `(1 - 2^-p)^x` exactly.
fn boundary(p: usize, x: usize) -> BigRational {
    let num: BigInt = (BigInt::one() << p) - 1;
    BigRational::new(num.pow(x as u32), BigInt::one() << (p * x))
}

/// Wired-boundary weight `w(G)`; `w(empty) = 1`.
///
/// Equal to the tower-weight ratio of `(..., 1, g_1, ..., g_m, 1, ...)`
/// against the all-ones vector of the same size, which is where all three
/// weight variants are pinned down exactly (see the consistency tests).
pub fn feature_weight(g: &Feature) -> BigRational {
    if g.is_empty() {
        return BigRational::one();
    }
    let k = g.size() as i64;
    let parts = g.parts();
    let m = parts.len();
    // Product over i = 1..=m+1 with g_0 = g_{m+1} = 1.
    let mut acc = pow2(-(k * (k - 1) / 2) - k);
    let mut prefix = 1usize; // g_0 + ... + g_{i-1}, starts at g_0 = 1
    for i in 1..=m + 1 {
        let gi = if i <= m { parts[i - 1] } else { 1 };
        let gprev = if i == 1 { 1 } else { parts[i - 2] };
        acc *= BigRational::new(BigInt::one() << (gi * prefix), factorial(gi));
        acc *= boundary(gprev, gi);
        prefix += gi;
    }
    acc
}

/// Free-left-boundary weight: no wiring below `g_1`.
///
/// The product skips the `i = 1` boundary and prefix factors but keeps the
/// `1/g_1!` multinomial share; dropping it would break both the exact
/// consistency with tower weights and the `2^{g_1}` comparison against the
/// wired weight.
pub fn feature_weight_free_left(g: &Feature) -> BigRational {
    if g.is_empty() {
        return BigRational::one();
    }
    let k = g.size() as i64;
    let parts = g.parts();
    let m = parts.len();
    let mut acc = pow2(-(k * (k - 1) / 2));
    acc /= BigRational::from_integer(factorial(parts[0]));
    let mut prefix = parts[0]; // g_1 + ... + g_{i-1}; sums start at j = 1
    for i in 2..=m + 1 {
        let gi = if i <= m { parts[i - 1] } else { 1 };
        let gprev = parts[i - 2];
        acc *= BigRational::new(BigInt::one() << (gi * prefix), factorial(gi));
        acc *= boundary(gprev, gi);
        prefix += gi;
    }
    acc
}

/// Free-right-boundary weight: the product stops at `i = m`, no wiring
/// above `g_m`.
pub fn feature_weight_free_right(g: &Feature) -> BigRational {
    if g.is_empty() {
        return BigRational::one();
    }
    let k = g.size() as i64;
    let parts = g.parts();
    let m = parts.len();
    let mut acc = pow2(-(k * (k - 1) / 2));
    let mut prefix = 1usize; // g_0 = 1 included
    for i in 1..=m {
        let gi = parts[i - 1];
        let gprev = if i == 1 { 1 } else { parts[i - 2] };
        acc *= BigRational::new(BigInt::one() << (gi * prefix), factorial(gi));
        acc *= boundary(gprev, gi);
        prefix += gi;
    }
    acc
}

/// All features of size `k`: compositions of `k` into parts `>= 2`.
/// `k = 0` yields only the empty feature; `k = 1` yields nothing.
pub fn enumerate_features_of_size(k: usize) -> Vec<Feature> {
    let mut out = Vec::new();
    if k == 0 {
        out.push(Feature::empty());
        return out;
    }
    let mut stack = Vec::new();
    fn rec(remaining: usize, stack: &mut Vec<usize>, out: &mut Vec<Feature>) {
        if remaining == 0 {
            out.push(Feature(stack.clone()));
            return;
        }
        for part in 2..=remaining {
            if remaining - part == 1 {
                continue; // a trailing 1 can never be completed
            }
            stack.push(part);
            rec(remaining - part, stack, out);
            stack.pop();
        }
    }
    rec(k, &mut stack, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::tower_vector_dag_count;

    fn tv(sizes: &[usize]) -> TowerVector {
        TowerVector::new(sizes.to_vec()).unwrap()
    }

    fn feat(parts: &[usize]) -> Feature {
        Feature::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn figure_decomposition() {
        let h = tv(&[2, 1, 2, 3, 1, 1, 2]);
        let d = extract_features(&h);
        assert_eq!(d.regenerations, 3);
        assert_eq!(
            d.features,
            vec![feat(&[2]), feat(&[2, 3]), Feature::empty(), feat(&[2])]
        );
        assert_eq!(d.reassemble(), h);
    }

    #[test]
    fn all_ones() {
        let h = tv(&[1, 1, 1]);
        let d = extract_features(&h);
        assert_eq!(d.regenerations, 3);
        assert_eq!(d.features, vec![Feature::empty(); 4]);
        assert_eq!(d.reassemble(), h);
    }

    #[test]
    fn free_free_block() {
        let h = tv(&[5]);
        let d = extract_features(&h);
        assert!(d.free_free);
        assert_eq!(d.features, vec![feat(&[5])]);
        assert_eq!(d.reassemble(), h);

        let h = tv(&[2, 3, 2]);
        let d = extract_features(&h);
        assert!(d.free_free);
        assert_eq!(d.reassemble(), h);
    }

    #[test]
    fn reassembly_round_trip_everywhere() {
        for n in 1..=10 {
            for h in crate::weights::compositions(n) {
                assert_eq!(extract_features(&h).reassemble(), h);
            }
        }
    }

    #[test]
    fn weight_of_empty_and_small() {
        assert_eq!(feature_weight(&Feature::empty()), BigRational::one());
        assert_eq!(
            feature_weight_free_left(&Feature::empty()),
            BigRational::one()
        );
        assert_eq!(
            feature_weight_free_right(&Feature::empty()),
            BigRational::one()
        );
        assert_eq!(
            feature_weight(&feat(&[2])),
            BigRational::new(3.into(), 8.into())
        );
        assert_eq!(
            feature_weight_free_left(&feat(&[2])),
            BigRational::new(3.into(), 4.into())
        );
        assert_eq!(
            feature_weight_free_right(&feat(&[2])),
            BigRational::new(1.into(), 4.into())
        );
    }

    /// Every weight variant is the ratio of the tower-vector count for the
    /// appropriately wired embedding to the count of the all-ones vector.
    #[test]
    fn weights_match_tower_ratios() {
        let count = |sizes: &[usize]| -> BigRational {
            BigRational::from_integer(BigInt::from(tower_vector_dag_count(&tv(sizes))))
        };
        let ones = |n: usize| -> BigRational {
            BigRational::from_integer(BigInt::from(tower_vector_dag_count(&tv(&vec![1; n]))))
        };
        for f in (0..=7).flat_map(enumerate_features_of_size) {
            if f.is_empty() {
                continue;
            }
            let k = f.size();
            // Wired: 1 g_1 .. g_m 1, size k + 2.
            let mut wired = vec![1];
            wired.extend_from_slice(f.parts());
            wired.push(1);
            assert_eq!(
                feature_weight(&f),
                count(&wired) / ones(k + 2),
                "wired {f:?}"
            );
            // Free left: g_1 .. g_m 1, size k + 1.
            let mut left = f.parts().to_vec();
            left.push(1);
            assert_eq!(
                feature_weight_free_left(&f),
                count(&left) / ones(k + 1),
                "free-left {f:?}"
            );
            // Free right: 1 g_1 .. g_m, size k + 1.
            let mut right = vec![1];
            right.extend_from_slice(f.parts());
            assert_eq!(
                feature_weight_free_right(&f),
                count(&right) / ones(k + 1),
                "free-right {f:?}"
            );
        }
    }

    #[test]
    fn free_left_versus_wired_bound() {
        for f in (2..=8).flat_map(enumerate_features_of_size) {
            let g1 = f.parts()[0];
            let lhs = feature_weight_free_left(&f);
            let rhs = pow2(g1 as i64) * feature_weight(&f);
            assert!(lhs <= rhs, "feature {f:?}");
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_features_of_size(0), vec![Feature::empty()]);
        assert!(enumerate_features_of_size(1).is_empty());
        let k4: Vec<_> = enumerate_features_of_size(4);
        assert_eq!(k4, vec![feat(&[2, 2]), feat(&[4])]);
        assert_eq!(enumerate_features_of_size(6).len(), 5);
        // Compositions into parts >= 2 follow the Fibonacci recurrence.
        let counts: Vec<usize> = (0..=12)
            .map(|k| enumerate_features_of_size(k).len())
            .collect();
        for k in 4..=12 {
            assert_eq!(counts[k], counts[k - 1] + counts[k - 2], "k = {k}");
        }
    }

    #[test]
    fn parts_below_two_rejected() {
        assert!(Feature::new(vec![2, 1]).is_none());
        assert!(Feature::new(vec![0]).is_none());
    }
}
