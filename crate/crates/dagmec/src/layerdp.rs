//! Dynamic program over layer sizes driving the exact uniform-DAG sampler.
//!
//! State `(m, p)`: `m` sites remain to be placed, the previous layer held
//! `p` sites (`p = START` before the first layer). With `a = n - m` sites
//! already placed, the per-layer factor for choosing the next layer of size
//! `x` is
//!
//! ```text
//! f(x; a, p) = 1/x! * 2^(x*a) * (1 - 2^-p)^x        (last factor 1 at START)
//! ```
//!
//! and `Z(m, p) = sum_x f(x; n-m, p) * Z(m-x, x)` with `Z(0, .) = 1`. The
//! induced sequential law over complete layer vectors is exactly the
//! tower-vector law of a uniform DAG, and `n! * Z(n, START)` equals the
//! number of DAGs on `n` sites.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tower::TowerVector;
use crate::weights::factorial;

/// Numeric mode for the DP table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DpMode {
    /// Exact rationals; the induced sampler is exactly uniform. Intended
    /// for `n` up to a few dozen.
    Exact,
    /// Base-2 log-space doubles; uniform up to float rounding. The raw
    /// weights contain factors like `2^(x*a)` that overflow any fixed-width
    /// float almost immediately, so only logarithms are stored.
    LogF64,
}

/// Column cap for the log-space table: `1 - 2^-p` rounds to 1.0 in f64 for
/// p >= 54 and its log-correction is below f64 resolution of the dominant
/// terms long before that, so columns beyond the cap coincide.
const P_CAP: usize = 64;

struct ExactTable {
    /// `Z(m, p)`, `p` index 0 = START.
    z: Vec<Vec<BigRational>>,
    /// Per state `(m, p)`: integer-scaled transition weights over
    /// `x = 1..=m` and their total, for exact ticket sampling.
    tickets: Vec<Vec<(Vec<BigUint>, BigUint)>>,
}

enum Table {
    Exact(ExactTable),
    /// `log2 Z(m, min(p, P_CAP))`.
    LogF64(Vec<Vec<f64>>),
}

/// The built DP for a fixed `n`. Read-only after construction; safe to
/// share across threads.
pub struct LayerDp {
    n: usize,
    mode: DpMode,
    table: Table,
    /// `log2(x!)` for `x` in `0..=n` (log mode only).
    log2_fact: Vec<f64>,
}

/// Builds the layer-size DP for `n >= 1` sites.
pub fn build_layer_dp(n: usize, mode: DpMode) -> Result<LayerDp> {
    if n == 0 {
        return Err(Error::EmptyGraph(0));
    }
    if n > crate::dag::MAX_VERTICES {
        return Err(Error::TooManyVertices(n));
    }
    match mode {
        DpMode::Exact => {
            let mut z = vec![vec![BigRational::zero(); n + 1]; n + 1];
            for cell in z[0].iter_mut() {
                *cell = BigRational::one();
            }
            let mut tickets: Vec<Vec<(Vec<BigUint>, BigUint)>> = vec![Vec::new(); n + 1];
            tickets[0] = vec![(Vec::new(), BigUint::zero()); n + 1];
            for m in 1..=n {
                let a = n - m;
                let mut row = Vec::with_capacity(n + 1);
                for p_idx in 0..=n {
                    let terms: Vec<BigRational> = (1..=m)
                        .map(|x| exact_factor(x, a, p_idx) * &z[m - x][x])
                        .collect();
                    let denom_lcm = terms.iter().fold(BigUint::one(), |acc, t| {
                        num_integer::lcm(acc, t.denom().magnitude().clone())
                    });
                    let numers: Vec<BigUint> = terms
                        .iter()
                        .map(|t| t.numer().magnitude() * (&denom_lcm / t.denom().magnitude()))
                        .collect();
                    let total: BigUint = numers.iter().sum();
                    z[m][p_idx] = terms.into_iter().sum();
                    row.push((numers, total));
                }
                tickets[m] = row;
            }
            Ok(LayerDp {
                n,
                mode,
                table: Table::Exact(ExactTable { z, tickets }),
                log2_fact: Vec::new(),
            })
        }
        DpMode::LogF64 => {
            let log2_fact = log2_factorials(n);
            let cols = n.min(P_CAP) + 1;
            let mut z = vec![vec![f64::NEG_INFINITY; cols]; n + 1];
            for cell in z[0].iter_mut() {
                *cell = 0.0;
            }
            for m in 1..=n {
                let a = n - m;
                for p_idx in 0..cols {
                    let mut terms = Vec::with_capacity(m);
                    for x in 1..=m {
                        let lf = log2_factor(x, a, p_idx, &log2_fact);
                        terms.push(lf + z[m - x][x.min(P_CAP)]);
                    }
                    z[m][p_idx] = log2_sum_exp(&terms);
                }
            }
            Ok(LayerDp {
                n,
                mode,
                table: Table::LogF64(z),
                log2_fact,
            })
        }
    }
}

/// `f(x; a, p)` exactly; `p_idx = 0` means START.
fn exact_factor(x: usize, a: usize, p_idx: usize) -> BigRational {
    let mut f = BigRational::new(BigInt::one() << (x * a), factorial(x));
    if p_idx > 0 {
        let num: BigInt = (BigInt::one() << p_idx) - 1;
        f *= BigRational::new(num.pow(x as u32), BigInt::one() << (p_idx * x));
    }
    f
}

/// `log2 f(x; a, p)`; `p_idx = 0` means START.
fn log2_factor(x: usize, a: usize, p_idx: usize, log2_fact: &[f64]) -> f64 {
    let mut lf = (x * a) as f64 - log2_fact[x];
    if p_idx > 0 && p_idx < 64 {
        lf += x as f64 * (-(2f64.powi(-(p_idx as i32)))).ln_1p() / std::f64::consts::LN_2;
    }
    lf
}

fn log2_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for x in 1..=n {
        v[x] = v[x - 1] + (x as f64).log2();
    }
    v
}

fn log2_sum_exp(terms: &[f64]) -> f64 {
    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    let sum: f64 = terms.iter().map(|t| (t - mx).exp2()).sum();
    mx + sum.log2()
}

impl LayerDp {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> DpMode {
        self.mode
    }

    /// `Z(n, START)`; available in exact mode only.
    pub fn root_exact(&self) -> Option<&BigRational> {
        match &self.table {
            Table::Exact(t) => Some(&t.z[self.n][0]),
            Table::LogF64(_) => None,
        }
    }

    /// Samples a complete layer vector from the sequential law.
    pub fn sample_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> TowerVector {
        let mut sizes = Vec::new();
        let mut m = self.n;
        let mut p_idx = 0usize; // START
        while m > 0 {
            let x = match &self.table {
                Table::Exact(t) => draw_exact(t, m, p_idx, rng),
                Table::LogF64(z) => self.draw_log(z, m, p_idx, rng),
            };
            sizes.push(x);
            m -= x;
            p_idx = x;
        }
        TowerVector::new(sizes).expect("sampled sizes are positive")
    }

    fn draw_log<R: Rng + ?Sized>(
        &self,
        z: &[Vec<f64>],
        m: usize,
        p_idx: usize,
        rng: &mut R,
    ) -> usize {
        let a = self.n - m;
        let zref = z[m][p_idx.min(P_CAP)];
        // Per-state normalized cumulative walk; weights die off super fast
        // in x, so the scan almost always stops within a few steps.
        let u: f64 = rng.gen::<f64>();
        let mut cum = 0.0;
        let mut weights = Vec::new();
        for x in 1..=m {
            let lw = log2_factor(x, a, p_idx, &self.log2_fact) + z[m - x][x.min(P_CAP)] - zref;
            let w = lw.exp2();
            weights.push(w);
            cum += w;
            if u < cum {
                return x;
            }
        }
        // Float rounding left a sliver above the cumulative sum.
        let total: f64 = weights.iter().sum();
        let mut target = u * total;
        for (i, w) in weights.iter().enumerate() {
            target -= w;
            if target <= 0.0 {
                return i + 1;
            }
        }
        m
    }

    /// Exact probability of drawing exactly `h` (exact mode only).
    pub fn exact_vector_probability(&self, h: &TowerVector) -> Option<BigRational> {
        let t = match &self.table {
            Table::Exact(t) => t,
            Table::LogF64(_) => return None,
        };
        if h.n() != self.n {
            return None;
        }
        let mut prob = BigRational::one();
        let mut m = self.n;
        let mut p_idx = 0usize;
        for &x in h.sizes() {
            let a = self.n - m;
            let num = exact_factor(x, a, p_idx) * &t.z[m - x][x];
            prob *= num / &t.z[m][p_idx];
            m -= x;
            p_idx = x;
        }
        Some(prob)
    }
}

fn draw_exact<R: Rng + ?Sized>(t: &ExactTable, m: usize, p_idx: usize, rng: &mut R) -> usize {
    let (numers, total) = &t.tickets[m][p_idx];
    let mut ticket = random_biguint_below(total, rng);
    for (i, w) in numers.iter().enumerate() {
        if &ticket < w {
            return i + 1;
        }
        ticket -= w;
    }
    unreachable!("ticket below total")
}

/// Uniform `BigUint` in `[0, bound)` by rejection on the bit length.
fn random_biguint_below<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    assert!(!bound.is_zero());
    let bits = bound.bits();
    let words = bits.div_ceil(64) as usize;
    loop {
        let mut raw: Vec<u64> = (0..words).map(|_| rng.gen::<u64>()).collect();
        let excess = words as u64 * 64 - bits;
        if excess > 0 {
            if let Some(last) = raw.last_mut() {
                *last >>= excess;
            }
        }
        let bytes: Vec<u8> = raw.iter().flat_map(|w| w.to_le_bytes()).collect();
        let candidate = BigUint::from_bytes_le(&bytes);
        if &candidate < bound {
            return candidate;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{compositions, tower_vector_weight};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn base_case_and_root() {
        let dp = build_layer_dp(2, DpMode::Exact).unwrap();
        // n! * Z(n, START) = |D_n|: 2 * 3/2 = 3.
        assert_eq!(
            dp.root_exact().unwrap(),
            &BigRational::new(3.into(), 2.into())
        );
    }

    #[test]
    fn rejects_zero() {
        assert!(build_layer_dp(0, DpMode::Exact).is_err());
        assert!(build_layer_dp(0, DpMode::LogF64).is_err());
    }

    #[test]
    fn dp_law_equals_tower_weight() {
        for n in 1..=12 {
            let dp = build_layer_dp(n, DpMode::Exact).unwrap();
            for h in compositions(n) {
                let p = dp.exact_vector_probability(&h).unwrap();
                let w = tower_vector_weight(&h, n).unwrap();
                assert_eq!(p, w, "n = {n}, h = {:?}", h.sizes());
            }
        }
    }

    #[test]
    fn n2_forward_probabilities() {
        let dp = build_layer_dp(2, DpMode::Exact).unwrap();
        let h2 = TowerVector::new(vec![2]).unwrap();
        let h11 = TowerVector::new(vec![1, 1]).unwrap();
        assert_eq!(
            dp.exact_vector_probability(&h2).unwrap(),
            BigRational::new(1.into(), 3.into())
        );
        assert_eq!(
            dp.exact_vector_probability(&h11).unwrap(),
            BigRational::new(2.into(), 3.into())
        );
    }

    #[test]
    fn exact_sampler_n1() {
        let dp = build_layer_dp(1, DpMode::Exact).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..10 {
            assert_eq!(dp.sample_vector(&mut rng).sizes(), &[1]);
        }
    }

    #[test]
    fn exact_sampler_n2_frequency() {
        let dp = build_layer_dp(2, DpMode::Exact).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let draws = 100_000;
        let mut split = 0usize;
        for _ in 0..draws {
            if dp.sample_vector(&mut rng).height() == 2 {
                split += 1;
            }
        }
        // Expect 2/3 within 3 binomial sigma.
        let p = split as f64 / draws as f64;
        let sigma = (2.0 / 3.0 * (1.0 / 3.0) / draws as f64).sqrt();
        assert!((p - 2.0 / 3.0).abs() < 3.0 * sigma, "p = {p}");
    }

    #[test]
    fn log_mode_sizes_are_consistent() {
        let n = 30;
        let dp = build_layer_dp(n, DpMode::LogF64).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..200 {
            assert_eq!(dp.sample_vector(&mut rng).n(), n);
        }
    }

    #[test]
    fn log_mode_matches_exact_law_at_small_n() {
        // Total-variation distance between the exact law and the empirical
        // law from the log-space sampler at n = 6 stays tiny.
        let n = 6;
        let exact = build_layer_dp(n, DpMode::Exact).unwrap();
        let log = build_layer_dp(n, DpMode::LogF64).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let draws = 200_000usize;
        let mut counts: std::collections::HashMap<Vec<usize>, usize> = Default::default();
        for _ in 0..draws {
            let h = log.sample_vector(&mut rng);
            *counts.entry(h.sizes().to_vec()).or_insert(0) += 1;
        }
        let mut tv = 0.0;
        for h in compositions(n) {
            let truth =
                crate::weights::rational_to_f64(&exact.exact_vector_probability(&h).unwrap());
            let emp = *counts.get(h.sizes()).unwrap_or(&0) as f64 / draws as f64;
            tv += (truth - emp).abs();
        }
        assert!(tv / 2.0 < 0.01, "tv = {tv}");
    }
}
