//! Random 0-1 matrix ensembles and exhaustive enumeration.
//!
//! * `Bernoulli(p)`: i.i.d. entries equal to 1 with probability `p`.
//! * `FixedOnes(k)`: uniform over matrices with exactly `k` ones. On square
//!   shapes this is also the uniform bipartite graph with `k` edges.
//! * `Exhaustive`: uniform over all `2^(mn)` matrices (same law as
//!   `Bernoulli(1/2)`), only meant for enumeration.
//!
//! Enumeration order is ascending in the flattened row-major bit string read
//! as a binary number with entry `(0, 0)` as the most significant bit, which
//! is the lexicographic order of the strings.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, ExactRational};
use crate::error::{Error, Result};
use crate::matrix::ZeroOneMatrix;
use crate::rational;
use crate::rng;

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    Bernoulli {
        #[serde(with = "rational::as_string")]
        p: ExactRational,
    },
    FixedOnes {
        m_ones: usize,
    },
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct EnsembleSpec {
    kind: EnsembleKind,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    kind: EnsembleKind,
    rows: usize,
    cols: usize,
}

impl TryFrom<RawSpec> for EnsembleSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        EnsembleSpec::new(raw.kind, raw.rows, raw.cols)
    }
}

impl From<EnsembleSpec> for RawSpec {
    fn from(s: EnsembleSpec) -> Self {
        RawSpec {
            kind: s.kind,
            rows: s.rows,
            cols: s.cols,
        }
    }
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, rows: usize, cols: usize) -> Result<Self> {
        match &kind {
            EnsembleKind::Bernoulli { p } => {
                if *p < BigRational::zero() || *p > BigRational::one() {
                    return Err(Error::InvalidArgument(format!(
                        "Bernoulli p must lie in [0, 1], got {}",
                        rational::format_rational(p)
                    )));
                }
                if p.denom().to_u64().is_none() {
                    return Err(Error::InvalidArgument(
                        "Bernoulli p denominator must fit in 64 bits".into(),
                    ));
                }
            }
            EnsembleKind::FixedOnes { m_ones } => {
                if *m_ones > rows * cols {
                    return Err(Error::InvalidArgument(format!(
                        "FixedOnes needs m_ones <= rows*cols = {}, got {m_ones}",
                        rows * cols
                    )));
                }
            }
            EnsembleKind::Exhaustive => {}
        }
        Ok(EnsembleSpec { kind, rows, cols })
    }

    pub fn bernoulli(p: ExactRational, rows: usize, cols: usize) -> Result<Self> {
        Self::new(EnsembleKind::Bernoulli { p }, rows, cols)
    }

    pub fn half(rows: usize, cols: usize) -> Self {
        Self::bernoulli(BigRational::new(1.into(), 2.into()), rows, cols).expect("valid p")
    }

    pub fn fixed_ones(m_ones: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::new(EnsembleKind::FixedOnes { m_ones }, rows, cols)
    }

    pub fn exhaustive(rows: usize, cols: usize) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Exhaustive,
            rows,
            cols,
        }
    }

    pub fn kind(&self) -> &EnsembleKind {
        &self.kind
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Same law on a different shape. `FixedOnes` keeps its count, which
    /// must still fit.
    pub fn with_shape(&self, rows: usize, cols: usize) -> Result<Self> {
        Self::new(self.kind.clone(), rows, cols)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec json")
    }

    /// True when the law is uniform over all `2^(mn)` matrices.
    pub fn is_uniform_all(&self) -> bool {
        match &self.kind {
            EnsembleKind::Exhaustive => true,
            EnsembleKind::Bernoulli { p } => *p == BigRational::new(1.into(), 2.into()),
            EnsembleKind::FixedOnes { .. } => false,
        }
    }

    /// Number of matrices [`enumerate`] visits.
    pub fn support_size(&self) -> BigUint {
        let cells = (self.rows * self.cols) as u64;
        match self.kind {
            EnsembleKind::FixedOnes { m_ones } => binomial(cells, m_ones as u64),
            _ => BigUint::one() << cells,
        }
    }

    /// Probability of drawing `a` under this law.
    pub fn probability(&self, a: &ZeroOneMatrix) -> ExactRational {
        if a.rows() != self.rows || a.cols() != self.cols {
            return BigRational::zero();
        }
        let cells = self.rows * self.cols;
        let ones = a.count_ones();
        match &self.kind {
            EnsembleKind::Exhaustive => {
                BigRational::new(BigInt::one(), BigInt::from(BigUint::one() << cells))
            }
            EnsembleKind::Bernoulli { p } => {
                let q = BigRational::one() - p;
                num_traits::pow(p.clone(), ones) * num_traits::pow(q, cells - ones)
            }
            EnsembleKind::FixedOnes { m_ones } => {
                if ones == *m_ones {
                    BigRational::new(BigInt::one(), BigInt::from(self.support_size()))
                } else {
                    BigRational::zero()
                }
            }
        }
    }
}

/// Draws one matrix from `spec`.
pub fn sample<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<ZeroOneMatrix> {
    let (rows, cols) = (spec.rows, spec.cols);
    match &spec.kind {
        EnsembleKind::Exhaustive => Err(Error::InvalidArgument(
            "the exhaustive ensemble cannot be sampled; use enumerate".into(),
        )),
        EnsembleKind::Bernoulli { p } => {
            let num = p.numer().to_u64().expect("0 <= p <= 1");
            let den = p.denom().to_u64().expect("validated");
            Ok(ZeroOneMatrix::from_fn(rows, cols, |_, _| {
                if num == 0 {
                    false
                } else if num == den {
                    true
                } else {
                    rng.random_range(0..den) < num
                }
            }))
        }
        EnsembleKind::FixedOnes { m_ones } => {
            // Partial Fisher-Yates over cell indices.
            let mut cells: Vec<usize> = (0..rows * cols).collect();
            for t in 0..*m_ones {
                let r = rng.random_range(t..cells.len());
                cells.swap(t, r);
            }
            let mut chosen = vec![false; rows * cols];
            for &c in &cells[..*m_ones] {
                chosen[c] = true;
            }
            Ok(ZeroOneMatrix::from_fn(rows, cols, |i, j| chosen[i * cols + j]))
        }
    }
}

/// All matrices in the support of `spec`, capped at [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate(spec: &EnsembleSpec) -> Result<Enumeration> {
    enumerate_with_cap(spec, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_with_cap(spec: &EnsembleSpec, cap: u64) -> Result<Enumeration> {
    let count = spec.support_size();
    if count > BigUint::from(cap) {
        return Err(Error::Capability {
            what: "ensemble enumeration",
            limit: cap as u128,
            found: count.to_u128().unwrap_or(u128::MAX),
            hint: Some("use sampled mode"),
        });
    }
    let cells = spec.rows * spec.cols;
    if cells > 128 {
        return Err(Error::capability("enumeration cells", 128, cells as u128, None));
    }
    let ones = match spec.kind {
        EnsembleKind::FixedOnes { m_ones } => Some(m_ones as u32),
        _ => None,
    };
    let first = match ones {
        Some(k) if k > 0 => (1u128 << (k - 1) << 1).wrapping_sub(1),
        _ => 0,
    };
    Ok(Enumeration {
        rows: spec.rows,
        cols: spec.cols,
        ones,
        next: Some(first),
        remaining: count.to_u64().expect("count under cap"),
    })
}

/// Iterator returned by [`enumerate`].
#[derive(Debug)]
pub struct Enumeration {
    rows: usize,
    cols: usize,
    ones: Option<u32>,
    next: Option<u128>,
    remaining: u64,
}

impl Enumeration {
    fn decode(&self, code: u128) -> ZeroOneMatrix {
        let cells = self.rows * self.cols;
        ZeroOneMatrix::from_fn(self.rows, self.cols, |i, j| {
            code >> (cells - 1 - (i * self.cols + j)) & 1 == 1
        })
    }
}

/// Next integer with the same popcount (Gosper's hack).
fn next_same_popcount(x: u128) -> Option<u128> {
    if x == 0 {
        return None;
    }
    let c = x & x.wrapping_neg();
    let r = x.checked_add(c)?;
    Some((((r ^ x) >> 2) / c) | r)
}

impl Iterator for Enumeration {
    type Item = ZeroOneMatrix;

    fn next(&mut self) -> Option<ZeroOneMatrix> {
        if self.remaining == 0 {
            return None;
        }
        let code = self.next?;
        self.remaining -= 1;
        self.next = match self.ones {
            None => code.checked_add(1),
            Some(_) => next_same_popcount(code),
        };
        Some(self.decode(code))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

impl ExactSizeIterator for Enumeration {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    Exact(ExactRational),
    Estimated {
        mean: ExactRational,
        standard_error: f64,
        samples: u64,
    },
}

impl Expectation {
    pub fn mean(&self) -> &ExactRational {
        match self {
            Expectation::Exact(m) => m,
            Expectation::Estimated { mean, .. } => mean,
        }
    }
}

/// Ensemble mean of `f`, either exactly over the whole support or by
/// Monte Carlo over matrices drawn from [`rng::stream`]`(seed, i)`.
pub fn empirical_expectation<F>(spec: &EnsembleSpec, f: F, mode: ExpectationMode) -> Result<Expectation>
where
    F: Fn(&ZeroOneMatrix) -> Result<ExactRational> + Sync,
{
    match mode {
        ExpectationMode::Exhaustive => {
            let uniform = !matches!(spec.kind, EnsembleKind::Bernoulli { .. }) || spec.is_uniform_all();
            let mut acc = BigRational::zero();
            for a in enumerate(spec)? {
                let v = f(&a)?;
                if uniform {
                    acc += v;
                } else {
                    acc += v * spec.probability(&a);
                }
            }
            if uniform {
                acc /= BigRational::from_integer(BigInt::from(spec.support_size()));
            }
            Ok(Expectation::Exact(acc))
        }
        ExpectationMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("samples must be at least 1".into()));
            }
            let values: Vec<ExactRational> = (0..samples)
                .into_par_iter()
                .map(|i| sample(spec, &mut rng::stream(seed, i)).and_then(|a| f(&a)))
                .collect::<Result<_>>()?;
            let n = BigRational::from_integer(BigInt::from(samples));
            let sum: ExactRational = values.iter().sum();
            let mean = &sum / &n;
            let standard_error = if samples > 1 {
                let ss: ExactRational = values.iter().map(|v| (v - &mean) * (v - &mean)).sum();
                let var = ss / (&n - BigRational::one());
                rational::to_f64(&(var / &n)).sqrt()
            } else {
                f64::NAN
            };
            Ok(Expectation::Estimated {
                mean,
                standard_error,
                samples,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::am_dp;
    use std::collections::HashSet;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn am(a: &ZeroOneMatrix) -> Result<ExactRational> {
        Ok(BigRational::from_integer(BigInt::from(am_dp(a)?)))
    }

    #[test]
    fn sample_examples() {
        let mut g = rng::stream(1, 0);
        let one = EnsembleSpec::bernoulli(r(1, 1), 2, 2).unwrap();
        assert_eq!(sample(&one, &mut g).unwrap(), ZeroOneMatrix::ones(2, 2));
        let zero = EnsembleSpec::bernoulli(r(0, 1), 2, 2).unwrap();
        assert_eq!(sample(&zero, &mut g).unwrap(), ZeroOneMatrix::zeros(2, 2));
        let full = EnsembleSpec::fixed_ones(4, 2, 2).unwrap();
        for _ in 0..10 {
            assert_eq!(sample(&full, &mut g).unwrap(), ZeroOneMatrix::ones(2, 2));
        }
        assert!(sample(&EnsembleSpec::exhaustive(2, 2), &mut g).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::bernoulli(r(3, 2), 2, 2).is_err());
        assert!(EnsembleSpec::bernoulli(r(-1, 2), 2, 2).is_err());
        assert!(EnsembleSpec::fixed_ones(5, 2, 2).is_err());
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate(&EnsembleSpec::exhaustive(1, 2)).unwrap().count(), 4);
        assert_eq!(enumerate(&EnsembleSpec::fixed_ones(1, 2, 2).unwrap()).unwrap().count(), 4);
        assert_eq!(enumerate(&EnsembleSpec::exhaustive(2, 2)).unwrap().count(), 16);
        assert_eq!(enumerate(&EnsembleSpec::fixed_ones(0, 2, 2).unwrap()).unwrap().count(), 1);
        let order: Vec<String> = enumerate(&EnsembleSpec::fixed_ones(2, 2, 2).unwrap())
            .unwrap()
            .map(|a| a.to_text().replace('\n', ""))
            .collect();
        assert_eq!(order, ["0011", "0101", "0110", "1001", "1010", "1100"]);
        let order: Vec<String> = enumerate(&EnsembleSpec::exhaustive(1, 2))
            .unwrap()
            .map(|a| a.to_text().replace('\n', ""))
            .collect();
        assert_eq!(order, ["00", "01", "10", "11"]);
    }

    #[test]
    fn enumerate_cap() {
        let err = enumerate(&EnsembleSpec::exhaustive(5, 5)).unwrap_err();
        assert!(err.is_capability());
        assert!(err.to_string().contains("33554432"), "{err}");
        assert!(enumerate_with_cap(&EnsembleSpec::exhaustive(2, 2), 15).is_err());
    }

    #[test]
    fn enumerate_has_no_duplicates() {
        for (r_, c_) in [(2, 3), (3, 3), (1, 4)] {
            let all: Vec<_> = enumerate(&EnsembleSpec::exhaustive(r_, c_)).unwrap().collect();
            let set: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(all.len(), 1 << (r_ * c_));
            assert_eq!(set.len(), all.len());
            for k in 0..=r_ * c_ {
                let spec = EnsembleSpec::fixed_ones(k, r_, c_).unwrap();
                let got: Vec<_> = enumerate(&spec).unwrap().collect();
                let set: HashSet<_> = got.iter().cloned().collect();
                assert_eq!(BigUint::from(got.len()), spec.support_size());
                assert_eq!(set.len(), got.len());
                assert!(got.iter().all(|a| a.count_ones() == k));
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let e = empirical_expectation(&EnsembleSpec::exhaustive(1, 1), am, ExpectationMode::Exhaustive).unwrap();
        assert_eq!(e, Expectation::Exact(r(3, 2)));
        let e = empirical_expectation(&EnsembleSpec::exhaustive(1, 2), am, ExpectationMode::Exhaustive).unwrap();
        assert_eq!(e, Expectation::Exact(r(2, 1)));
        let spec = EnsembleSpec::fixed_ones(4, 2, 2).unwrap();
        let e = empirical_expectation(&spec, am, ExpectationMode::Exhaustive).unwrap();
        assert_eq!(e, Expectation::Exact(r(7, 1)));
        // Weighted enumeration for p != 1/2: E[AM] of a 1x1 matrix is 1 + p.
        let spec = EnsembleSpec::bernoulli(r(1, 3), 1, 1).unwrap();
        let e = empirical_expectation(&spec, am, ExpectationMode::Exhaustive).unwrap();
        assert_eq!(e, Expectation::Exact(r(4, 3)));
    }

    #[test]
    fn sampled_expectation_is_reproducible() {
        let spec = EnsembleSpec::half(3, 3);
        let mode = ExpectationMode::Sampled { samples: 2000, seed: 42 };
        let a = empirical_expectation(&spec, am, mode).unwrap();
        let b = empirical_expectation(&spec, am, mode).unwrap();
        assert_eq!(a, b);
        if let Expectation::Estimated { mean, standard_error, .. } = a {
            // Exact value is 1 + 9/2 + 18/4 + 6/8 = 43/4.
            let dev = (rational::to_f64(&mean) - 10.75).abs();
            assert!(dev < 6.0 * standard_error, "dev {dev} se {standard_error}");
        } else {
            panic!("expected an estimate");
        }
    }

    #[test]
    fn fixed_ones_sampler_is_uniform() {
        let spec = EnsembleSpec::fixed_ones(1, 2, 2).unwrap();
        let mut counts = [0u32; 4];
        for i in 0..100_000 {
            let a = sample(&spec, &mut rng::stream(2024, i)).unwrap();
            let cell = (0..4).find(|&c| a.get(c / 2, c % 2)).unwrap();
            counts[cell] += 1;
        }
        for c in counts {
            let freq = f64::from(c) / 100_000.0;
            assert!((freq - 0.25).abs() <= 0.01, "{counts:?}");
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let s = EnsembleSpec::from_json(r#"{"kind":"bernoulli","p":"1/2","rows":3,"cols":4}"#).unwrap();
        assert_eq!(s, EnsembleSpec::half(3, 4));
        assert_eq!(s.to_json(), r#"{"kind":"bernoulli","p":"1/2","rows":3,"cols":4}"#);
        let s = EnsembleSpec::from_json(r#"{"kind":"fixed_ones","m_ones":2,"rows":2,"cols":2}"#).unwrap();
        assert_eq!(s, EnsembleSpec::fixed_ones(2, 2, 2).unwrap());
        assert_eq!(EnsembleSpec::from_json(&s.to_json()).unwrap(), s);
        let s = EnsembleSpec::from_json(r#"{"kind":"exhaustive","rows":2,"cols":2}"#).unwrap();
        assert_eq!(s, EnsembleSpec::exhaustive(2, 2));
        assert!(EnsembleSpec::from_json(r#"{"kind":"fixed_ones","m_ones":9,"rows":2,"cols":2}"#).is_err());
        assert!(EnsembleSpec::from_json(r#"{"kind":"bernoulli","p":"3/2","rows":2,"cols":2}"#).is_err());
    }
}
