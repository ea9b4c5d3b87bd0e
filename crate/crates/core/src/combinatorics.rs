//! Exact binomials, falling factorials and factorials over big integers.

use num_bigint::BigUint;
use num_traits::One;

/// Integer counts (matching numbers, permanents, sample values).
pub type ExactCount = BigUint;

/// Exact rationals; `BigRational` keeps lowest terms with a positive denominator.
pub type ExactRational = num_rational::BigRational;

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `P(n, k) = n! / (n-k)!`, zero when `k > n`.
pub fn falling(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    (n - k + 1..=n).fold(BigUint::one(), |acc, v| acc * v)
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(factorial(0), BigUint::from(1u32));
        assert_eq!(factorial(10), BigUint::from(3_628_800u32));
        assert_eq!(falling(5, 2), BigUint::from(20u32));
        assert_eq!(falling(5, 0), BigUint::from(1u32));
        assert_eq!(falling(2, 3), BigUint::ZERO);
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(3, 5), BigUint::ZERO);
        assert_eq!(binomial(0, 0), BigUint::from(1u32));
    }

    #[test]
    fn pascal_rule() {
        for n in 1..40u64 {
            for k in 1..n {
                assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
            }
        }
    }
}
