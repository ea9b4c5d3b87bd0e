//! Exact counting: all matchings, k-matchings, permanents and the
//! letters-in-envelopes count `F_n(p)`.
//!
//! Two independent routes compute `AM(A)`, the number of all matchings
//! (empty matching included): [`am_recursive`] follows the row expansion
//! `AM(A) = AM(A without row 1) + sum_j a_1j AM(A without row 1, column j)`
//! literally, and [`am_dp`] runs a subset DP. The first is slow and serves
//! as the oracle for the second.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::combinatorics::{binomial, factorial, falling, ExactCount};
use crate::error::{Error, Result};
use crate::matrix::ZeroOneMatrix;

/// Largest side length that may carry the subset-DP state (`2^w` cells).
pub const MAX_DP_WIDTH: usize = 24;

/// Largest order accepted by [`permanent`]. Inclusion-exclusion runs in
/// wrapping 128-bit arithmetic, which is exact while `n! < 2^127`.
pub const MAX_PERMANENT_N: usize = 28;

/// Largest order accepted by [`verify_corollary3`] (its permanent is `2n x 2n`).
pub const MAX_COROLLARY3_N: usize = MAX_PERMANENT_N / 2;

/// `#S_0, #S_1, ..., #S_min(m,n)`: the number of k-matchings for each k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingVector {
    counts: Vec<ExactCount>,
}

impl MatchingVector {
    pub fn counts(&self) -> &[ExactCount] {
        &self.counts
    }

    /// Number of k-matchings; zero beyond the vector.
    pub fn get(&self, k: usize) -> ExactCount {
        self.counts.get(k).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> ExactCount {
        self.counts.iter().sum()
    }

    pub fn max_matching_size(&self) -> usize {
        self.counts.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }
}

fn require_rows_le_cols(a: &ZeroOneMatrix) -> Result<()> {
    if a.rows() > a.cols() {
        return Err(Error::TooManyRows {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok(())
}

/// Literal row expansion of `AM`. Exponential; intended for `m <= ~12`.
pub fn am_recursive(a: &ZeroOneMatrix) -> Result<ExactCount> {
    require_rows_le_cols(a)?;
    Ok(am_expand(a))
}

fn am_expand(a: &ZeroOneMatrix) -> ExactCount {
    if a.rows() == 0 {
        return BigUint::one();
    }
    let mut total = am_expand(&a.remove_first_row().expect("nonempty"));
    for j in a.first_row_support().expect("nonempty").iter() {
        total += am_expand(&a.remove_first_row_and_column(j).expect("valid column"));
    }
    total
}

/// Number of all matchings by subset DP.
///
/// `AM` is symmetric under transposition, so the DP state ranges over
/// subsets of the shorter side, which must not exceed [`MAX_DP_WIDTH`].
/// Any shape is accepted. Runs in `O(max(m,n) * 2^w * w)`.
pub fn am_dp(a: &ZeroOneMatrix) -> Result<ExactCount> {
    Ok(subset_table(a)?.total())
}

/// The k-matching counts of `a`. Same limits as [`am_dp`].
pub fn matching_vector(a: &ZeroOneMatrix) -> Result<MatchingVector> {
    let table = subset_table(a)?;
    let width = a.rows().min(a.cols());
    let mut counts = vec![BigUint::zero(); width + 1];
    table.for_each(|mask, v| counts[mask.count_ones() as usize] += v);
    Ok(MatchingVector { counts })
}

/// Final DP table `f(S)`: matchings whose endpoints on the short side are exactly `S`.
enum SubsetTable {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

impl SubsetTable {
    fn total(&self) -> ExactCount {
        match self {
            SubsetTable::Small(f) => f.iter().map(|&v| BigUint::from(v)).sum(),
            SubsetTable::Big(f) => f.iter().sum(),
        }
    }

    fn for_each(&self, mut visit: impl FnMut(u64, &BigUint)) {
        match self {
            SubsetTable::Small(f) => {
                for (s, &v) in f.iter().enumerate() {
                    if v != 0 {
                        visit(s as u64, &BigUint::from(v));
                    }
                }
            }
            SubsetTable::Big(f) => {
                for (s, v) in f.iter().enumerate() {
                    visit(s as u64, v);
                }
            }
        }
    }
}

/// Masks of the long side's lines over the short side, plus the short width.
fn short_side_masks(a: &ZeroOneMatrix) -> (usize, Vec<u64>) {
    if a.cols() <= a.rows() {
        (a.cols(), (0..a.rows()).map(|i| a.row_mask(i)).collect())
    } else {
        let masks = (0..a.cols())
            .map(|j| {
                (0..a.rows())
                    .filter(|&i| a.get(i, j))
                    .fold(0u64, |m, i| m | 1 << i)
            })
            .collect();
        (a.rows(), masks)
    }
}

fn subset_table(a: &ZeroOneMatrix) -> Result<SubsetTable> {
    let width = a.rows().min(a.cols());
    if width > MAX_DP_WIDTH {
        return Err(Error::capability(
            "subset DP width",
            MAX_DP_WIDTH as u128,
            width as u128,
            Some("use am_recursive for small row counts or the AMM estimator"),
        ));
    }
    let (width, masks) = short_side_masks(a);
    if let Some(f) = run_subset_dp_u128(width, &masks) {
        return Ok(SubsetTable::Small(f));
    }
    Ok(SubsetTable::Big(run_subset_dp_big(width, &masks)))
}

// f(i, S) = f(i-1, S) + sum_{j in S, a_ij = 1} f(i-1, S \ {j}). Updating S in
// decreasing order lets one array hold both layers, since S \ {j} < S.
fn run_subset_dp_u128(width: usize, masks: &[u64]) -> Option<Vec<u128>> {
    let mut f = vec![0u128; 1 << width];
    f[0] = 1;
    for &row in masks {
        for s in (1..f.len()).rev() {
            let mut bits = s as u64 & row;
            let mut acc = f[s];
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                acc = acc.checked_add(f[s ^ b as usize])?;
                bits ^= b;
            }
            f[s] = acc;
        }
    }
    Some(f)
}

fn run_subset_dp_big(width: usize, masks: &[u64]) -> Vec<BigUint> {
    let mut f = vec![BigUint::zero(); 1 << width];
    f[0] = BigUint::one();
    for &row in masks {
        for s in (1..f.len()).rev() {
            let mut bits = s as u64 & row;
            let mut acc = std::mem::take(&mut f[s]);
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                acc += &f[s ^ b as usize];
                bits ^= b;
            }
            f[s] = acc;
        }
    }
    f
}

/// Permanent by Ryser inclusion-exclusion over column subsets, visited in
/// Gray-code order so each step toggles one column of the row sums.
pub fn permanent(a: &ZeroOneMatrix) -> Result<ExactCount> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > MAX_PERMANENT_N {
        return Err(Error::capability(
            "permanent order",
            MAX_PERMANENT_N as u128,
            n as u128,
            Some("use the RM estimator"),
        ));
    }
    if n == 0 {
        return Ok(BigUint::one());
    }
    let columns: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&i| a.get(i, j)).collect())
        .collect();
    let mut row_sums = vec![0u64; n];
    let mut in_set = vec![false; n];
    // per(A) = sum_S (-1)^(n-|S|) prod_i rowsum_S(i); every term is taken
    // mod 2^128, which is exact because 0 <= per(A) <= n! < 2^127.
    let mut total: u128 = 0;
    let mut size = 0usize;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let add = !in_set[j];
        in_set[j] = add;
        for &i in &columns[j] {
            if add {
                row_sums[i] += 1;
            } else {
                row_sums[i] -= 1;
            }
        }
        if add {
            size += 1;
        } else {
            size -= 1;
        }
        if row_sums.contains(&0) {
            continue;
        }
        let prod = row_sums
            .iter()
            .fold(1u128, |p, &r| p.wrapping_mul(r as u128));
        if (n - size).is_multiple_of(2) {
            total = total.wrapping_add(prod);
        } else {
            total = total.wrapping_sub(prod);
        }
    }
    Ok(BigUint::from(total))
}

/// Both sides of `n! * AM(A) = per([[A, I], [J, J]])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corollary3Check {
    pub holds: bool,
    pub all_matchings: ExactCount,
    /// `n! * AM(A)`.
    pub scaled_all_matchings: ExactCount,
    pub extended_permanent: ExactCount,
}

pub fn verify_corollary3(a: &ZeroOneMatrix) -> Result<Corollary3Check> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() > MAX_COROLLARY3_N {
        return Err(Error::capability(
            "extended permanent order",
            MAX_COROLLARY3_N as u128,
            a.rows() as u128,
            None,
        ));
    }
    let all_matchings = am_dp(a)?;
    let scaled = factorial(a.rows() as u64) * &all_matchings;
    let extended_permanent = permanent(&a.extend_transform()?)?;
    Ok(Corollary3Check {
        holds: scaled == extended_permanent,
        all_matchings,
        scaled_all_matchings: scaled,
        extended_permanent,
    })
}

/// `F_n(p) = sum_r (-1)^r C(p,r) P(n-r, p-r)`: injective placements of `p`
/// labeled letters into `n` envelopes with no letter in its own envelope.
pub fn fit_count(n: usize, p: usize) -> Result<ExactCount> {
    if p > n {
        return Err(Error::InvalidArgument(format!(
            "fit_count needs p <= n, got n={n}, p={p}"
        )));
    }
    let (n, p) = (n as u64, p as u64);
    let mut acc = BigInt::zero();
    for r in 0..=p {
        let term = BigInt::from(binomial(p, r) * falling(n - r, p - r));
        if r % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc.to_biguint().expect("F_n(p) is a count"))
}
