//! The RM and AMM sequential estimators, seeded batch sampling, and exact
//! moments over the estimators' own coin tosses.
//!
//! Both estimators walk the rows of the matrix. At each row the choice set
//! `W` is the row's support among surviving columns; AMM adds a "skip this
//! row" option. One option is picked uniformly and the running product is
//! multiplied by `|W|`. RM returns 0 as soon as `W` is empty. The product
//! is an unbiased sample of `per(A)` (RM) or of `AM(A)` (AMM).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{ExactCount, ExactRational};
use crate::error::{Error, Result};
use crate::exact::{am_dp, permanent, MAX_DP_WIDTH};
use crate::matrix::ZeroOneMatrix;
use crate::rng;

/// Largest row count accepted by [`path_distribution`].
pub const MAX_PATH_ENUM_ROWS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Rasmussen's permanent estimator.
    Rm,
    /// The all-matchings variant with a skip option at every row.
    Amm,
}

impl Algorithm {
    /// Checks the shape each estimator is defined on: RM needs a square
    /// matrix, AMM needs `m <= n`.
    pub fn validate(self, a: &ZeroOneMatrix) -> Result<()> {
        match self {
            Algorithm::Rm if !a.is_square() => Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            }),
            Algorithm::Amm if a.rows() > a.cols() => Err(Error::TooManyRows {
                rows: a.rows(),
                cols: a.cols(),
            }),
            _ => Ok(()),
        }
    }

    fn has_skip(self) -> bool {
        self == Algorithm::Amm
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Rm => "rm",
            Algorithm::Amm => "amm",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rm" => Ok(Algorithm::Rm),
            "amm" => Ok(Algorithm::Amm),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm {other:?} (expected rm or amm)"
            ))),
        }
    }
}

/// Running product of small factors, spilling into a big integer.
struct Product {
    big: BigUint,
    small: u64,
}

impl Product {
    fn new() -> Self {
        Product {
            big: BigUint::one(),
            small: 1,
        }
    }

    fn mul(&mut self, factor: u64) {
        match self.small.checked_mul(factor) {
            Some(v) => self.small = v,
            None => {
                self.big *= self.small;
                self.small = factor;
            }
        }
    }

    fn finish(self) -> BigUint {
        self.big * self.small
    }
}

/// Index of the `k`-th (0-based) set bit in `words[w] & mask[w]` order.
fn nth_common_bit(row: &[u64], avail: &[u64], mut k: u32) -> usize {
    for (w, (&r, &a)) in row.iter().zip(avail).enumerate() {
        let mut bits = r & a;
        let c = bits.count_ones();
        if k < c {
            for _ in 0..k {
                bits &= bits - 1;
            }
            return w * 64 + bits.trailing_zeros() as usize;
        }
        k -= c;
    }
    unreachable!("k exceeds the number of common bits")
}

fn full_columns(cols: usize) -> Vec<u64> {
    let mut words = vec![u64::MAX; cols.div_ceil(64)];
    if !cols.is_multiple_of(64) {
        *words.last_mut().expect("nonzero width") = (1u64 << (cols % 64)) - 1;
    }
    words
}

fn sample_unchecked<R: Rng + ?Sized>(a: &ZeroOneMatrix, alg: Algorithm, rng: &mut R) -> BigUint {
    let mut avail = full_columns(a.cols());
    let mut product = Product::new();
    for i in 0..a.rows() {
        let row = a.row_words(i);
        let support: u32 = row.iter().zip(&avail).map(|(r, v)| (r & v).count_ones()).sum();
        let options = support + u32::from(alg.has_skip());
        if options == 0 {
            return BigUint::zero();
        }
        product.mul(u64::from(options));
        let pick = rng.random_range(0..options);
        if pick < support {
            let j = nth_common_bit(row, &avail, pick);
            avail[j / 64] &= !(1u64 << (j % 64));
        }
    }
    product.finish()
}

/// One RM sample; its expectation over the coin tosses is `per(A)`.
pub fn rm_sample<R: Rng + ?Sized>(a: &ZeroOneMatrix, rng: &mut R) -> Result<ExactCount> {
    Algorithm::Rm.validate(a)?;
    Ok(sample_unchecked(a, Algorithm::Rm, rng))
}

/// One AMM sample; its expectation over the coin tosses is `AM(A)`.
/// Always at least 1 since the skip option keeps `W` nonempty.
pub fn amm_sample<R: Rng + ?Sized>(a: &ZeroOneMatrix, rng: &mut R) -> Result<ExactCount> {
    Algorithm::Amm.validate(a)?;
    Ok(sample_unchecked(a, Algorithm::Amm, rng))
}

pub fn sample<R: Rng + ?Sized>(a: &ZeroOneMatrix, alg: Algorithm, rng: &mut R) -> Result<ExactCount> {
    alg.validate(a)?;
    Ok(sample_unchecked(a, alg, rng))
}

/// Exact sums over a batch of samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleStats {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub n_samples: u64,
    pub sum: ExactCount,
    pub sum_sq: ExactCount,
}

impl SampleStats {
    pub fn mean(&self) -> ExactRational {
        BigRational::new(BigInt::from(self.sum.clone()), BigInt::from(self.n_samples))
    }

    pub fn mean_f64(&self) -> f64 {
        self.mean().to_f64().unwrap_or(f64::NAN)
    }

    /// `n * sum(x^2) / sum(x)^2`, the plug-in estimate of `E(X^2)/E(X)^2`.
    pub fn empirical_critical_ratio(&self) -> Option<ExactRational> {
        if self.sum.is_zero() {
            return None;
        }
        let num = BigInt::from(&self.sum_sq * self.n_samples);
        let den = BigInt::from(&self.sum * &self.sum);
        Some(BigRational::new(num, den))
    }

    /// Unbiased sample variance; needs at least two samples.
    pub fn sample_variance(&self) -> Option<ExactRational> {
        if self.n_samples < 2 {
            return None;
        }
        let n = BigInt::from(self.n_samples);
        let s = BigInt::from(self.sum.clone());
        let q = BigInt::from(self.sum_sq.clone());
        let num = &n * q - &s * &s;
        Some(BigRational::new(num, &n * (&n - 1)))
    }

    /// Standard error of the mean, `sqrt(var / n)`.
    pub fn standard_error(&self) -> f64 {
        match self.sample_variance() {
            Some(v) => {
                let v = v / BigRational::from_integer(BigInt::from(self.n_samples));
                v.to_f64().unwrap_or(f64::INFINITY).sqrt()
            }
            None => f64::NAN,
        }
    }
}

/// Runs `n_samples` independent samples on rayon's current pool.
///
/// Sample `i` draws from [`rng::stream`]`(seed, i)` and the sums are exact,
/// so the result does not depend on the number of threads.
pub fn run_batch(a: &ZeroOneMatrix, alg: Algorithm, n_samples: u64, seed: u64) -> Result<SampleStats> {
    alg.validate(a)?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let (sum, sum_sq) = (0..n_samples)
        .into_par_iter()
        .fold(
            || (BigUint::zero(), BigUint::zero()),
            |(mut s, mut q), i| {
                let x = sample_unchecked(a, alg, &mut rng::stream(seed, i));
                q += &x * &x;
                s += x;
                (s, q)
            },
        )
        .reduce(
            || (BigUint::zero(), BigUint::zero()),
            |(s1, q1), (s2, q2)| (s1 + s2, q1 + q2),
        );
    Ok(SampleStats {
        algorithm: alg,
        seed,
        n_samples,
        sum,
        sum_sq,
    })
}

/// [`run_batch`] on a dedicated pool of `workers` threads.
pub fn run_batch_with_workers(
    a: &ZeroOneMatrix,
    alg: Algorithm,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<SampleStats> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| run_batch(a, alg, n_samples, seed))
}

fn require_dp_width(a: &ZeroOneMatrix) -> Result<()> {
    if a.cols() > MAX_DP_WIDTH {
        return Err(Error::capability(
            "moment DP width",
            MAX_DP_WIDTH as u128,
            a.cols() as u128,
            Some("use run_batch for an empirical estimate"),
        ));
    }
    Ok(())
}

/// `E(X)` over the coin tosses: `AM(A)` for AMM, `per(A)` for RM.
pub fn exact_mean(a: &ZeroOneMatrix, alg: Algorithm) -> Result<ExactCount> {
    alg.validate(a)?;
    match alg {
        Algorithm::Amm => am_dp(a),
        Algorithm::Rm => permanent(a),
    }
}

/// `E(X^2)` over the coin tosses, from `E(X_A^2) = |W| * sum_{w in W} E(X_{A_w}^2)`.
///
/// Memoized on (row, used columns). Needs `cols <= MAX_DP_WIDTH`.
pub fn exact_second_moment(a: &ZeroOneMatrix, alg: Algorithm) -> Result<ExactCount> {
    alg.validate(a)?;
    require_dp_width(a)?;
    let mut memo = HashMap::new();
    Ok(second_moment_from(a, alg, 0, 0, &mut memo))
}

fn second_moment_from(
    a: &ZeroOneMatrix,
    alg: Algorithm,
    row: usize,
    used: u64,
    memo: &mut HashMap<(usize, u64), BigUint>,
) -> BigUint {
    if row == a.rows() {
        return BigUint::one();
    }
    if let Some(v) = memo.get(&(row, used)) {
        return v.clone();
    }
    let mut support = a.row_mask(row) & !used;
    let options = support.count_ones() as u64 + u64::from(alg.has_skip());
    let value = if options == 0 {
        BigUint::zero()
    } else {
        let mut acc = if alg.has_skip() {
            second_moment_from(a, alg, row + 1, used, memo)
        } else {
            BigUint::zero()
        };
        while support != 0 {
            let b = support & support.wrapping_neg();
            acc += second_moment_from(a, alg, row + 1, used | b, memo);
            support ^= b;
        }
        acc * options
    };
    memo.insert((row, used), value.clone());
    value
}

/// `E(X^2) / E(X)^2` over the estimator's coin tosses.
pub fn critical_ratio_exact(a: &ZeroOneMatrix, alg: Algorithm) -> Result<ExactRational> {
    let mean = exact_mean(a, alg)?;
    if mean.is_zero() {
        return Err(Error::ZeroMean);
    }
    let second = exact_second_moment(a, alg)?;
    Ok(BigRational::new(
        BigInt::from(second),
        BigInt::from(&mean * &mean),
    ))
}

/// Value -> probability map of an estimator's output.
pub type PathDistribution = BTreeMap<ExactCount, ExactRational>;

/// Full distribution of an estimator's output, by enumerating every
/// coin-toss path with explicit branch probabilities.
///
/// Works on the matrix through row and column removal only, sharing no code
/// with the samplers or the moment DP. Gated to `rows <= MAX_PATH_ENUM_ROWS`.
pub fn path_distribution(a: &ZeroOneMatrix, alg: Algorithm) -> Result<PathDistribution> {
    alg.validate(a)?;
    if a.rows() > MAX_PATH_ENUM_ROWS {
        return Err(Error::capability(
            "path enumeration rows",
            MAX_PATH_ENUM_ROWS as u128,
            a.rows() as u128,
            None,
        ));
    }
    let mut out = PathDistribution::new();
    enumerate_paths(a, alg, BigRational::one(), BigUint::one(), &mut out);
    Ok(out)
}

fn enumerate_paths(
    a: &ZeroOneMatrix,
    alg: Algorithm,
    prob: BigRational,
    value: BigUint,
    out: &mut PathDistribution,
) {
    if a.rows() == 0 {
        *out.entry(value).or_insert_with(BigRational::zero) += prob;
        return;
    }
    let support = a.first_row_support().expect("nonempty");
    let mut branches: Vec<ZeroOneMatrix> = support
        .iter()
        .map(|j| a.remove_first_row_and_column(j).expect("valid column"))
        .collect();
    if alg == Algorithm::Amm {
        branches.push(a.remove_first_row().expect("nonempty"));
    }
    if branches.is_empty() {
        *out.entry(BigUint::zero()).or_insert_with(BigRational::zero) += prob;
        return;
    }
    let q = branches.len();
    let step = &prob / BigRational::from_integer(BigInt::from(q));
    for b in branches {
        enumerate_paths(&b, alg, step.clone(), &value * q, out);
    }
}

/// `(E(X), E(X^2))` of a distribution.
pub fn distribution_moments(dist: &PathDistribution) -> (ExactRational, ExactRational) {
    let mut first = BigRational::zero();
    let mut second = BigRational::zero();
    for (v, p) in dist {
        let v = BigRational::from_integer(BigInt::from(v.clone()));
        first += &v * p;
        second += &v * &v * p;
    }
    (first, second)
}
