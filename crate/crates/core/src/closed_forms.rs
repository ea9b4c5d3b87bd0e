//! Exact evaluation of the ensemble moment formulas.
//!
//! Everything here is exact rational arithmetic. The two-index recursion
//! `f(m, n) = a_n f(m-1, n) + c_n f(m-1, n-1)`, `f(0, l) = 1`, is evaluated by
//! a table DP instead of summing its composition expansion term by term,
//! which keeps `n = 40` cheap.
//!
//! Notation used in the doc comments below:
//! * `A(m, n)` is the uniform law on `m x n` 0-1 matrices (i.i.d. Bernoulli(1/2));
//! * `B(k, n)` is the uniform law on `n x n` 0-1 matrices with exactly `k` ones;
//! * `X` is the AMM output, and `E_s` the expectation over its coin tosses.

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::Serialize;

use crate::combinatorics::{binomial, factorial, falling, ExactRational};
use crate::error::{Error, Result};
use crate::exact::fit_count;

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Per-level coefficients `a_l`, `c_l` of the two-index recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientPlan {
    a: Vec<Option<ExactRational>>,
    c: Vec<Option<ExactRational>>,
}

impl CoefficientPlan {
    /// Empty plan; add levels with [`CoefficientPlan::set`].
    pub fn new() -> Self {
        CoefficientPlan { a: Vec::new(), c: Vec::new() }
    }

    /// Plan with levels `1..=max_level` filled from the two closures.
    pub fn from_fn(
        max_level: usize,
        a: impl Fn(u64) -> ExactRational,
        c: impl Fn(u64) -> ExactRational,
    ) -> Result<Self> {
        let mut plan = Self::new();
        for l in 1..=max_level {
            plan.set(l, a(l as u64), c(l as u64))?;
        }
        Ok(plan)
    }

    /// Sets level `l`; both coefficients must be positive.
    pub fn set(&mut self, level: usize, a: ExactRational, c: ExactRational) -> Result<()> {
        if !a.is_positive() || !c.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "coefficients at level {level} must be positive"
            )));
        }
        if self.a.len() <= level {
            self.a.resize(level + 1, None);
            self.c.resize(level + 1, None);
        }
        self.a[level] = Some(a);
        self.c[level] = Some(c);
        Ok(())
    }

    fn level(&self, l: usize) -> Result<(&ExactRational, &ExactRational)> {
        match (self.a.get(l).and_then(Option::as_ref), self.c.get(l).and_then(Option::as_ref)) {
            (Some(a), Some(c)) => Ok((a, c)),
            _ => Err(Error::InvalidArgument(format!("coefficient plan has no level {l}"))),
        }
    }

    /// `a_l = 1`, `c_l = l/2`: the recursion for `E[AM]` over `A(m, n)`.
    pub fn mean_plan(max_level: usize) -> Self {
        Self::from_fn(max_level, |_| rat(1), |l| ratio(l, 2)).expect("positive")
    }

    /// `a_l = (l+2)/2`, `c_l = (l^2+3l)/4`: the recursion for `E[E_s(X^2)]`
    /// over `A(m, n)`.
    pub fn second_moment_plan(max_level: usize) -> Self {
        Self::from_fn(max_level, |l| ratio(l + 2, 2), |l| ratio(l * l + 3 * l, 4)).expect("positive")
    }
}

impl Default for CoefficientPlan {
    fn default() -> Self {
        Self::new()
    }
}

fn require_m_le_n(m: usize, n: usize) -> Result<()> {
    if m > n {
        return Err(Error::TooManyRows { rows: m, cols: n });
    }
    Ok(())
}

/// `f(m, n)` of the two-index recursion, by table DP over levels `1..=n`.
pub fn lemma1_eval(m: usize, n: usize, plan: &CoefficientPlan) -> Result<ExactRational> {
    require_m_le_n(m, n)?;
    // prev[l] = f(i-1, l); f(i, l) only exists for l >= i.
    let mut prev = vec![rat(1); n + 1];
    for i in 1..=m {
        let mut cur = vec![BigRational::zero(); n + 1];
        for l in i..=n {
            let (a, c) = plan.level(l)?;
            cur[l] = a * &prev[l] + c * &prev[l - 1];
        }
        prev = cur;
    }
    Ok(prev[n].clone())
}

/// `E[AM]` over `A(m, n)`: `sum_k C(m,k) P(n,k) / 2^k`.
pub fn t3_mean(m: usize, n: usize) -> Result<ExactRational> {
    require_m_le_n(m, n)?;
    let (m, n) = (m as u64, n as u64);
    Ok((0..=m)
        .map(|k| ratio(binomial(m, k) * falling(n, k), BigUint::one() << k))
        .sum())
}

/// `E[E_s(X^2)]` over `A(m, n)`.
pub fn t4_second_moment(m: usize, n: usize) -> Result<ExactRational> {
    require_m_le_n(m, n)?;
    lemma1_eval(m, n, &CoefficientPlan::second_moment_plan(n))
}

/// Peak-term bounds on `E[AM]` over `A(n, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct T5Bounds {
    pub n: usize,
    /// `floor(-1 + sqrt(2n + 3))`, the index of the largest `b_k`.
    pub k_star: usize,
    /// `b_k = 2^k / ((n-k)! (k!)^2)` at `k_star`.
    pub b_max: ExactRational,
    /// `(n!)^2 / 2^n * b_{k*}`.
    pub h: ExactRational,
    pub mean: ExactRational,
    /// `n * h`, the upper bound as printed; fails at `n = 1`.
    pub upper_nh: ExactRational,
    /// `(n + 1) * h`: `n + 1` summands each at most the peak.
    pub upper_rigorous: ExactRational,
}

impl T5Bounds {
    pub fn rigorous_holds(&self) -> bool {
        self.h <= self.mean && self.mean <= self.upper_rigorous
    }

    pub fn nh_upper_holds(&self) -> bool {
        self.mean <= self.upper_nh
    }
}

/// `b_k = 2^k / ((n-k)! (k!)^2)` for `k = 0..=n`.
pub fn t5_terms(n: usize) -> Vec<ExactRational> {
    let n = n as u64;
    (0..=n)
        .map(|k| {
            let kf = factorial(k);
            ratio(BigUint::one() << k, factorial(n - k) * &kf * &kf)
        })
        .collect()
}

pub fn t5_bounds(n: usize) -> Result<T5Bounds> {
    if n == 0 {
        return Err(Error::InvalidArgument("t5 bounds need n >= 1".into()));
    }
    // floor(-1 + sqrt(x)) = isqrt(x) - 1 for integer x.
    let k_star = (2 * n + 3).sqrt() - 1;
    let terms = t5_terms(n);
    let b_max = terms[k_star].clone();
    assert!(
        terms.iter().all(|b| *b <= b_max),
        "b_k peaks at k* for n = {n}"
    );
    let nf = factorial(n as u64);
    let scale = ratio(&nf * &nf, BigUint::one() << n);
    let h = &scale * &b_max;
    let mean = t3_mean(n, n)?;
    debug_assert_eq!(mean, &scale * terms.iter().sum::<ExactRational>());
    Ok(T5Bounds {
        n,
        k_star,
        upper_nh: &h * rat(n),
        upper_rigorous: &h * rat(n + 1),
        b_max,
        h,
        mean,
    })
}

/// Outcome of comparing an exact rational with the irrational `n^(sqrt(n)/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    /// Bracketing never separated the two sides within the refinement budget.
    Undecided,
}

/// Exact decision of `value >= n^(sqrt(n)/2)`.
///
/// Writes `sqrt(n)` between dyadic bounds `s_lo = a/2^k <= sqrt(n) <= s_hi`
/// and compares `value^(2*2^k)` with `n^a` in integers: `value^2 >= n^s_hi`
/// proves the inequality, `value^2 < n^s_lo` refutes it. `k` grows until
/// the bracket separates or `max_k` is reached. Perfect squares are exact.
pub fn power_threshold_verdict(value: &ExactRational, n: u64, max_k: u32) -> Verdict {
    if !value.is_positive() {
        return Verdict::Fails;
    }
    let root = n.sqrt();
    // value^2 >= n^(a/b)  <=>  num^(2b) >= n^a * den^(2b)
    let at_least = |a: &BigUint, b: u64| -> bool {
        let e = u32::try_from(2 * b).expect("exponent");
        let lhs = Pow::pow(value.numer().magnitude(), e);
        let rhs = Pow::pow(BigUint::from(n), a) * Pow::pow(value.denom().magnitude(), e);
        lhs >= rhs
    };
    if root * root == n {
        return if at_least(&BigUint::from(root), 1) {
            Verdict::Holds
        } else {
            Verdict::Fails
        };
    }
    for k in 2..=max_k {
        let b = 1u64 << k;
        // floor(sqrt(n) * 2^k) = isqrt(n * 4^k)
        let lo = (BigUint::from(n) << (2 * k)).sqrt();
        let hi = &lo + 1u32;
        if at_least(&hi, b) {
            return Verdict::Holds;
        }
        if !at_least(&lo, b) {
            return Verdict::Fails;
        }
    }
    Verdict::Undecided
}

/// Refinement budget for [`power_threshold_verdict`] in [`t6_ratio`].
pub const THRESHOLD_MAX_REFINEMENT: u32 = 12;

/// `E[E_s(X^2)] / E[E_s(X)]^2` over `A(n, n)` against `n^(sqrt(n)/2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioReport {
    pub n: usize,
    pub numerator: ExactRational,
    pub denominator: ExactRational,
    pub ratio: ExactRational,
    /// Display value of `n^(sqrt(n)/2)`; the verdict never uses it.
    pub threshold: ThresholdValue,
    pub verdict: Verdict,
}

/// Float wrapper so [`RatioReport`] can derive `Eq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdValue(pub f64);

impl Eq for ThresholdValue {}

impl RatioReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

pub fn t6_ratio(n: usize) -> Result<RatioReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("t6 ratio needs n >= 1".into()));
    }
    let numerator = t4_second_moment(n, n)?;
    let mean = t3_mean(n, n)?;
    let denominator = &mean * &mean;
    let ratio = &numerator / &denominator;
    let nf = n as f64;
    Ok(RatioReport {
        n,
        verdict: power_threshold_verdict(&ratio, n as u64, THRESHOLD_MAX_REFINEMENT),
        threshold: ThresholdValue(nf.powf(nf.sqrt() / 2.0)),
        numerator,
        denominator,
        ratio,
    })
}

fn require_edges(m_ones: usize, n: usize) -> Result<()> {
    if m_ones > n * n {
        return Err(Error::InvalidArgument(format!(
            "edge count {m_ones} exceeds n^2 = {}",
            n * n
        )));
    }
    Ok(())
}

/// `P(a fixed set of t cells are all ones)` under `B(m_ones, n)`:
/// `C(n^2 - t, m - t) / C(n^2, m)`, zero when `t > m`.
pub fn edge_set_probability(t: usize, m_ones: usize, n: usize) -> ExactRational {
    let cells = (n * n) as u64;
    if t > m_ones || t as u64 > cells {
        return BigRational::zero();
    }
    ratio(
        binomial(cells - t as u64, (m_ones - t) as u64),
        binomial(cells, m_ones as u64),
    )
}

/// `E[AM]` over `B(m_ones, n)`: `sum_k C(n,k)^2 k! C(n^2-k, m-k) / C(n^2, m)`.
pub fn lemma2_mean(m_ones: usize, n: usize) -> Result<ExactRational> {
    require_edges(m_ones, n)?;
    let nn = n as u64;
    let cells = nn * nn;
    let total = binomial(cells, m_ones as u64);
    Ok((0..=nn)
        .filter(|&k| k as usize <= m_ones)
        .map(|k| {
            let ck = binomial(nn, k);
            let num = &ck * &ck * factorial(k) * binomial(cells - k, m_ones as u64 - k);
            ratio(num, total.clone())
        })
        .sum())
}

/// First and second moments of `AM` over `B(m_edges, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct T8Moments {
    pub mean: ExactRational,
    pub second: ExactRational,
}

/// Moments of `AM(G)` for a uniform bipartite graph on `n + n` vertices
/// with `m_edges` edges.
///
/// The second moment sums `E[X_M X_M']` over ordered pairs of a `k`-matching
/// `M` and an `i`-matching `M'`. For `i <= k`, `M'` is built from `p` rows
/// outside `M` and `i - p` rows of `M`, of which `j` reuse their `M` edge
/// and the other `i - p - j` avoid it (`F_{n-j}(i-p-j)` ways); the union
/// then has `k + i - j` edges. Pairs with `i > k` mirror those with `i < k`.
pub fn t8_moments(m_edges: usize, n: usize) -> Result<T8Moments> {
    require_edges(m_edges, n)?;
    let nn = n as u64;
    let edge_p: Vec<ExactRational> = (0..=2 * n)
        .map(|t| edge_set_probability(t, m_edges, n))
        .collect();
    let matchings_of_size =
        |k: u64| -> BigUint { binomial(nn, k) * binomial(nn, k) * factorial(k) };

    let mean: ExactRational = (0..=nn)
        .map(|k| rat(matchings_of_size(k)) * &edge_p[k as usize])
        .sum();

    // Fits F_{n-j}(q) indexed by (n - j, q).
    let mut fits = vec![vec![BigUint::zero(); n + 1]; n + 1];
    for (env, row) in fits.iter_mut().enumerate() {
        for (q, slot) in row.iter_mut().enumerate().take(env + 1) {
            *slot = fit_count(env, q)?;
        }
    }

    // inner(k, i) = sum over M' of E[X_M X_M'] for a fixed k-matching M, i <= k.
    let inner = |k: u64, i: u64| -> ExactRational {
        let mut acc = BigRational::zero();
        for p in 0..=i.min(nn - k) {
            let labeled = i - p;
            if labeled > k {
                continue;
            }
            let ways = binomial(nn - k, p) * binomial(k, labeled) * falling(nn - labeled, p);
            if ways.is_zero() {
                continue;
            }
            for j in 0..=labeled {
                let union = (k + i - j) as usize;
                if edge_p[union].is_zero() {
                    continue;
                }
                let placed = binomial(labeled, j) * &fits[(nn - j) as usize][(labeled - j) as usize];
                acc += rat(&ways * placed) * &edge_p[union];
            }
        }
        acc
    };

    let mut second = BigRational::zero();
    for k in 0..=nn {
        let weight = rat(matchings_of_size(k));
        for i in 0..=k {
            let term = &weight * inner(k, i);
            if i < k {
                second += &term * rat(2);
            } else {
                second += term;
            }
        }
    }
    Ok(T8Moments { mean, second })
}

/// `E[AM^2] / E[AM]^2` over `B(m_edges, n)`.
pub fn lemma2_ratio(m_edges: usize, n: usize) -> Result<ExactRational> {
    let t = t8_moments(m_edges, n)?;
    Ok(&t.second / (&t.mean * &t.mean))
}

/// `P(Binomial(n^2, 1/2) >= ceil((1/2 + eps) n^2))`.
pub fn t7_tail(n: usize, eps: &ExactRational) -> Result<ExactRational> {
    let half = ratio(1, 2);
    if eps.is_negative() || *eps > half {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in [0, 1/2], got {}",
            crate::rational::format_rational(eps)
        )));
    }
    let cells = (n * n) as u64;
    let start = ((half + eps) * rat(cells)).ceil().to_integer();
    let start: u64 = u64::try_from(start).expect("0 <= start <= n^2");
    let count: BigUint = (start..=cells).map(|i| binomial(cells, i)).sum();
    Ok(ratio(count, BigUint::one() << cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        ratio(a, b)
    }

    #[test]
    fn lemma1_examples() {
        let plan = CoefficientPlan::mean_plan(5);
        for n in 0..=5 {
            assert_eq!(lemma1_eval(0, n, &plan).unwrap(), r(1, 1));
        }
        assert_eq!(lemma1_eval(1, 1, &plan).unwrap(), r(3, 2));
        let plan = CoefficientPlan::second_moment_plan(1);
        assert_eq!(lemma1_eval(1, 1, &plan).unwrap(), r(5, 2));
        assert!(lemma1_eval(2, 3, &CoefficientPlan::second_moment_plan(2)).is_err());
        assert!(lemma1_eval(3, 2, &plan).is_err());
    }

    #[test]
    fn plan_rejects_nonpositive() {
        let mut p = CoefficientPlan::new();
        assert!(p.set(1, r(0, 1), r(1, 1)).is_err());
        assert!(p.set(1, r(1, 1), r(-1, 1)).is_err());
        assert!(p.set(1, r(1, 1), r(1, 1)).is_ok());
    }

    #[test]
    fn t3_t4_examples() {
        assert_eq!(t3_mean(1, 1).unwrap(), r(3, 2));
        assert_eq!(t3_mean(1, 2).unwrap(), r(2, 1));
        assert_eq!(t3_mean(0, 4).unwrap(), r(1, 1));
        assert!(t3_mean(3, 2).is_err());
        assert_eq!(t4_second_moment(1, 1).unwrap(), r(5, 2));
        assert_eq!(t4_second_moment(0, 3).unwrap(), r(1, 1));
        assert!(t4_second_moment(2, 1).is_err());
    }

    #[test]
    fn t5_examples() {
        assert_eq!(t5_bounds(3).unwrap().k_star, 2);
        let b = t5_bounds(1).unwrap();
        assert_eq!(b.k_star, 1);
        assert_eq!(b.h, r(1, 1));
        assert_eq!(b.mean, r(3, 2));
        assert_eq!(b.upper_rigorous, r(2, 1));
        assert!(b.rigorous_holds());
        assert!(!b.nh_upper_holds());
        assert!(t5_bounds(0).is_err());
    }

    #[test]
    fn t6_examples() {
        let rep = t6_ratio(1).unwrap();
        assert_eq!(rep.ratio, r(10, 9));
        assert_eq!(rep.threshold.0, 1.0);
        assert!(rep.holds());
    }

    #[test]
    fn power_threshold_cases() {
        // n = 4: threshold 4^1 = 4.
        assert_eq!(power_threshold_verdict(&r(4, 1), 4, 12), Verdict::Holds);
        assert_eq!(power_threshold_verdict(&r(399, 100), 4, 12), Verdict::Fails);
        // n = 9: threshold 9^(3/2) = 27.
        assert_eq!(power_threshold_verdict(&r(27, 1), 9, 12), Verdict::Holds);
        assert_eq!(power_threshold_verdict(&r(2699, 100), 9, 12), Verdict::Fails);
        // n = 2: threshold 2^(sqrt(2)/2) = 1.632526919...
        assert_eq!(power_threshold_verdict(&r(16330, 10000), 2, 12), Verdict::Holds);
        assert_eq!(power_threshold_verdict(&r(16320, 10000), 2, 12), Verdict::Fails);
        // n = 40: threshold ~ 115_000.
        assert_eq!(power_threshold_verdict(&r(743, 1), 40, 12), Verdict::Fails);
        assert_eq!(power_threshold_verdict(&r(200_000, 1), 40, 12), Verdict::Holds);
        // Too close to separate with a tiny budget.
        assert_eq!(power_threshold_verdict(&r(16326, 10000), 2, 3), Verdict::Undecided);
    }

    #[test]
    fn lemma2_examples() {
        assert_eq!(lemma2_mean(4, 2).unwrap(), r(7, 1));
        assert_eq!(lemma2_mean(0, 3).unwrap(), r(1, 1));
        assert_eq!(lemma2_mean(1, 2).unwrap(), r(2, 1));
        assert!(lemma2_mean(5, 2).is_err());
    }

    #[test]
    fn t8_examples() {
        let t = t8_moments(4, 2).unwrap();
        assert_eq!((t.mean, t.second), (r(7, 1), r(49, 1)));
        let t = t8_moments(0, 3).unwrap();
        assert_eq!((t.mean, t.second), (r(1, 1), r(1, 1)));
        assert_eq!(lemma2_ratio(4, 2).unwrap(), r(1, 1));
        assert_eq!(lemma2_ratio(0, 5).unwrap(), r(1, 1));
        for n in 1..=6 {
            for m in (0..=n * n).step_by(3) {
                assert_eq!(t8_moments(m, n).unwrap().mean, lemma2_mean(m, n).unwrap());
            }
        }
    }

    #[test]
    fn t7_examples() {
        assert_eq!(t7_tail(1, &r(0, 1)).unwrap(), r(1, 2));
        for n in 1..=4usize {
            assert_eq!(t7_tail(n, &r(1, 2)).unwrap(), ratio(1, BigInt::one() << (n * n)));
        }
        assert_eq!(t7_tail(2, &r(1, 100)).unwrap(), r(5, 16));
        assert!(t7_tail(2, &r(3, 4)).is_err());
        assert!(t7_tail(2, &r(-1, 4)).is_err());
    }
}
