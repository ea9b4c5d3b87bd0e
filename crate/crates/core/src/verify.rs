//! Self-check suite behind `allmatch verify`.
//!
//! The suite cross-checks the fast routines against brute-force oracles on
//! small matrices and checks the closed forms against exhaustive ensemble
//! averages. The routines under test are passed in as an [`Implementations`]
//! table so a deliberately broken build can be fed through the same suite.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde_json::Value;

use crate::closed_forms::{self, CoefficientPlan};
use crate::combinatorics::{factorial, ExactCount, ExactRational};
use crate::ensembles::{self, EnsembleSpec};
use crate::error::{Error, Result};
use crate::estimator::{self, Algorithm, PathDistribution};
use crate::exact;
use crate::matrix::ZeroOneMatrix;
use crate::rational::format_rational;
use crate::report::{config, ExperimentReport, RowBuilder};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(Error::InvalidArgument(format!("unknown level {s:?}; expected quick|full"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Quick => "quick",
            Level::Full => "full",
        })
    }
}

/// The routines the suite exercises.
#[derive(Clone, Copy)]
pub struct Implementations {
    pub am_dp: fn(&ZeroOneMatrix) -> Result<ExactCount>,
    pub permanent: fn(&ZeroOneMatrix) -> Result<ExactCount>,
    pub second_moment: fn(&ZeroOneMatrix, Algorithm) -> Result<ExactCount>,
    pub t3_mean: fn(usize, usize) -> Result<ExactRational>,
    pub t4_second_moment: fn(usize, usize) -> Result<ExactRational>,
}

impl Default for Implementations {
    fn default() -> Self {
        Implementations {
            am_dp: exact::am_dp,
            permanent: exact::permanent,
            second_moment: estimator::exact_second_moment,
            t3_mean: closed_forms::t3_mean,
            t4_second_moment: closed_forms::t4_second_moment,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: u64,
    /// `None` when the check passed.
    pub failure: Option<Failure>,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub message: String,
    /// Rows of the offending matrix joined by `/`, when there is one.
    pub witness: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub level: Level,
    pub checks: Vec<CheckResult>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn to_report(&self, deterministic: bool) -> ExperimentReport {
        let mut report = ExperimentReport::new("verify", config(&[("level", self.level.to_string().into())]), 0);
        for c in &self.checks {
            let mut row = RowBuilder::new()
                .text("check", c.name)
                .uint("cases", c.cases)
                .flag("passed", c.passed())
                .opt_text("message", c.failure.as_ref().map(|f| f.message.clone()))
                .opt_text("witness", c.failure.as_ref().and_then(|f| f.witness.clone()))
                .finish();
            let ms = if deterministic { 0 } else { c.runtime_ms };
            row.insert("runtime_ms".into(), Value::from(ms));
            report.push(row);
        }
        report
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            match &c.failure {
                None => out += &format!("PASS {} ({} cases)\n", c.name, c.cases),
                Some(f) => {
                    out += &format!("FAIL {}: {}\n", c.name, f.message);
                    if let Some(w) = &f.witness {
                        out += &format!("     witness: {w}\n");
                    }
                }
            }
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        out += &format!("{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

fn witness(a: &ZeroOneMatrix) -> String {
    if a.rows() == 0 {
        return format!("(empty {}x{})", a.rows(), a.cols());
    }
    a.to_text().trim_end().replace('\n', "/")
}

fn q(v: impl Into<BigInt>) -> ExactRational {
    ExactRational::from_integer(v.into())
}

fn all_matrices(rows: usize, cols: usize) -> Vec<ZeroOneMatrix> {
    ensembles::enumerate(&EnsembleSpec::exhaustive(rows, cols))
        .expect("small shapes enumerate")
        .collect()
}

fn random_matrices(n: usize, count: u64, seed: u64) -> Vec<ZeroOneMatrix> {
    (0..count)
        .map(|i| {
            let mut g = rng::stream(seed, i);
            ZeroOneMatrix::from_fn(n, n, |_, _| g.random_bool(0.5))
        })
        .collect()
}

type Outcome = std::result::Result<(), String>;

/// Runs `f` on every matrix and reports the first failure in input order.
fn over(mats: &[ZeroOneMatrix], f: impl Fn(&ZeroOneMatrix) -> Outcome + Sync) -> (u64, Option<Failure>) {
    let failure = mats.par_iter().find_map_first(|a| {
        f(a).err().map(|message| Failure {
            message,
            witness: Some(witness(a)),
        })
    });
    (mats.len() as u64, failure)
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn expect_eq<T: PartialEq + fmt::Display>(what: &str, left: T, right: T) -> Outcome {
    if left == right {
        Ok(())
    } else {
        Err(format!("{what}: {left} != {right}"))
    }
}

fn shapes(max: usize, m_le_n: bool) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for m in 1..=max {
        for n in 1..=max {
            if !m_le_n || m <= n {
                v.push((m, n));
            }
        }
    }
    v
}

fn mats_of_shapes(shapes: &[(usize, usize)]) -> Vec<ZeroOneMatrix> {
    shapes.iter().flat_map(|&(m, n)| all_matrices(m, n)).collect()
}

/// Brute-force lattice-path expansion of the two-index recursion: each of
/// the `m` steps either keeps the level (`a_l`) or drops it (`c_l`).
pub fn composition_sum(m: usize, n: usize, a: impl Fn(usize) -> ExactRational, c: impl Fn(usize) -> ExactRational) -> ExactRational {
    let mut total = ExactRational::zero();
    for choice in 0u64..(1 << m) {
        let mut level = n;
        let mut term = ExactRational::one();
        for step in 0..m {
            if choice >> step & 1 == 1 {
                term *= c(level);
                level -= 1;
            } else {
                term *= a(level);
            }
        }
        total += term;
    }
    total
}

fn brute_fit_count(n: usize, p: usize) -> u64 {
    // Injections of letters 0..p into envelopes 0..n with letter i avoiding envelope i.
    fn go(i: usize, p: usize, n: usize, used: u32) -> u64 {
        if i == p {
            return 1;
        }
        (0..n)
            .filter(|&e| e != i && used >> e & 1 == 0)
            .map(|e| go(i + 1, p, n, used | 1 << e))
            .sum()
    }
    go(0, p, n, 0)
}

fn to_q(v: &ExactCount) -> ExactRational {
    q(BigInt::from(v.clone()))
}

fn distribution_mean(d: &PathDistribution) -> ExactRational {
    estimator::distribution_moments(d).0
}

pub fn run(level: Level, imp: &Implementations) -> Summary {
    let full = level == Level::Full;
    let small = if full { 4 } else { 3 };
    let mut checks = Vec::new();
    let mut record = |name: &'static str, run: &dyn Fn() -> (u64, Option<Failure>)| {
        let t = Instant::now();
        let (cases, failure) = run();
        checks.push(CheckResult {
            name,
            cases,
            failure,
            runtime_ms: t.elapsed().as_millis() as u64,
        });
    };

    record("am_dp = am_recursive = sum of matching vector", &|| {
        let mats = mats_of_shapes(&shapes(small, false));
        over(&mats, |a| {
            let fast = lift((imp.am_dp)(a))?;
            let slow = if a.rows() <= a.cols() {
                lift(exact::am_recursive(a))?
            } else {
                lift(exact::am_recursive(&a.transpose()))?
            };
            let vector = lift(exact::matching_vector(a))?.total();
            expect_eq("am_dp vs am_recursive", &fast, &slow)?;
            expect_eq("am_dp vs matching vector", &fast, &vector)
        })
    });

    record("am_dp >= 1 and monotone in entries", &|| {
        let mats = mats_of_shapes(&shapes(3, false));
        over(&mats, |a| {
            let base = lift((imp.am_dp)(a))?;
            if base.is_zero() {
                return Err("am_dp is 0".into());
            }
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    if !a.get(i, j) {
                        let up = lift((imp.am_dp)(&a.with_entry(i, j, true)))?;
                        if up < base {
                            return Err(format!("setting entry ({}, {}) lowers am_dp {base} -> {up}", i + 1, j + 1));
                        }
                    }
                }
            }
            Ok(())
        })
    });

    let corollary3 = |a: &ZeroOneMatrix| -> Outcome {
        let n = a.rows() as u64;
        let lhs = factorial(n) * lift((imp.am_dp)(a))?;
        let rhs = lift((imp.permanent)(&lift(a.extend_transform())?))?;
        expect_eq("n! * am_dp vs permanent of extended matrix", &lhs, &rhs)
    };
    record("n! * AM(A) = per(extended A), n <= 3", &|| {
        let mats: Vec<_> = (1..=3).flat_map(|n| all_matrices(n, n)).collect();
        over(&mats, corollary3)
    });
    if full {
        record("n! * AM(A) = per(extended A), 1000 random 5x5", &|| {
            over(&random_matrices(5, 1000, 0xC03), corollary3)
        });
    }

    record("permanent = perfect matchings", &|| {
        let mats: Vec<_> = (1..=small).flat_map(|n| all_matrices(n, n)).collect();
        over(&mats, |a| {
            let per = lift((imp.permanent)(a))?;
            let perfect = lift(exact::matching_vector(a))?.get(a.rows());
            expect_eq("permanent vs perfect matchings", &per, &perfect)
        })
    });

    record("estimators unbiased over all coin tosses", &|| {
        let mats = mats_of_shapes(&shapes(small, true));
        over(&mats, |a| {
            let amm = lift(estimator::path_distribution(a, Algorithm::Amm))?;
            expect_eq("AMM path mean vs am_dp", distribution_mean(&amm), to_q(&lift((imp.am_dp)(a))?))?;
            if a.is_square() {
                let rm = lift(estimator::path_distribution(a, Algorithm::Rm))?;
                expect_eq("RM path mean vs permanent", distribution_mean(&rm), to_q(&lift((imp.permanent)(a))?))?;
            }
            Ok(())
        })
    });

    record("second-moment DP = path enumeration", &|| {
        let mats = mats_of_shapes(&shapes(small, true));
        over(&mats, |a| {
            for alg in [Algorithm::Amm, Algorithm::Rm] {
                if alg == Algorithm::Rm && !a.is_square() {
                    continue;
                }
                let d = lift(estimator::path_distribution(a, alg))?;
                let dp = to_q(&lift((imp.second_moment)(a, alg))?);
                expect_eq(&format!("{alg} E(X^2)"), dp, estimator::distribution_moments(&d).1)?;
            }
            Ok(())
        })
    });

    record("RM on extended A / n! has the AMM distribution", &|| {
        let mats: Vec<_> = (1..=3).flat_map(|n| all_matrices(n, n)).collect();
        over(&mats, |a| {
            let scale = factorial(a.rows() as u64);
            let rm = lift(estimator::path_distribution(&lift(a.extend_transform())?, Algorithm::Rm))?;
            let mut scaled = PathDistribution::new();
            for (v, p) in rm {
                if !(&v % &scale).is_zero() {
                    return Err(format!("RM value {v} is not a multiple of {scale}"));
                }
                *scaled.entry(v / &scale).or_insert_with(ExactRational::zero) += p;
            }
            let amm = lift(estimator::path_distribution(a, Algorithm::Amm))?;
            if scaled == amm {
                Ok(())
            } else {
                Err(format!("distributions differ: {} vs {}", show(&scaled), show(&amm)))
            }
        })
    });

    let ratio_bound = |a: &ZeroOneMatrix| -> Outcome {
        let second = to_q(&lift((imp.second_moment)(a, Algorithm::Amm))?);
        let mean = to_q(&lift((imp.am_dp)(a))?);
        let ratio = second / (&mean * &mean);
        let bound = q(Pow::pow(BigUint::from(a.cols() + 1), a.rows() as u32));
        if ratio <= bound {
            Ok(())
        } else {
            Err(format!("critical ratio {} exceeds (n+1)^m = {bound}", format_rational(&ratio)))
        }
    };
    record("AMM critical ratio <= (n+1)^m", &|| {
        over(&mats_of_shapes(&shapes(small, true)), ratio_bound)
    });
    if full {
        record("AMM critical ratio <= (n+1)^m, 200 random 6x6", &|| {
            over(&random_matrices(6, 200, 0x7E2), ratio_bound)
        });
    }

    record("ensemble means of AM and E(X^2) match closed forms", &|| {
        let mut cases = 0;
        for (m, n) in shapes(3, true) {
            let mats = all_matrices(m, n);
            cases += mats.len() as u64;
            let mut am_sum = ExactRational::zero();
            let mut second_sum = ExactRational::zero();
            for a in &mats {
                match ((imp.am_dp)(a), (imp.second_moment)(a, Algorithm::Amm)) {
                    (Ok(x), Ok(y)) => {
                        am_sum += to_q(&x);
                        second_sum += to_q(&y);
                    }
                    (Err(e), _) | (_, Err(e)) => return (cases, Some(Failure { message: e.to_string(), witness: Some(witness(a)) })),
                }
            }
            let size = q(mats.len());
            let checks = [
                ("mean of AM", am_sum / &size, (imp.t3_mean)(m, n)),
                ("mean of E(X^2)", second_sum / &size, (imp.t4_second_moment)(m, n)),
            ];
            for (what, empirical, closed) in checks {
                let ok = matches!(&closed, Ok(c) if *c == empirical);
                if !ok {
                    let closed = closed.map(|c| format_rational(&c)).unwrap_or_else(|e| e.to_string());
                    return (cases, Some(Failure {
                        message: format!("{m}x{n} {what}: exhaustive {} vs closed form {closed}", format_rational(&empirical)),
                        witness: None,
                    }));
                }
            }
        }
        (cases, None)
    });

    record("fixed-edge moments match exhaustive averages", &|| {
        let mut cases = 0;
        let max_n = if full { 3 } else { 2 };
        for n in 1..=max_n {
            for m_ones in 0..=n * n {
                let spec = EnsembleSpec::fixed_ones(m_ones, n, n).expect("valid spec");
                let mats: Vec<_> = ensembles::enumerate(&spec).expect("small").collect();
                cases += mats.len() as u64;
                let mut s1 = ExactRational::zero();
                let mut s2 = ExactRational::zero();
                for a in &mats {
                    match (imp.am_dp)(a) {
                        Ok(v) => {
                            let v = to_q(&v);
                            s2 += &v * &v;
                            s1 += v;
                        }
                        Err(e) => return (cases, Some(Failure { message: e.to_string(), witness: Some(witness(a)) })),
                    }
                }
                let size = q(mats.len());
                let (mean, second) = (s1 / &size, s2 / &size);
                let closed = match closed_forms::t8_moments(m_ones, n) {
                    Ok(t) => t,
                    Err(e) => return (cases, Some(Failure { message: e.to_string(), witness: None })),
                };
                let lemma2 = closed_forms::lemma2_mean(m_ones, n).ok();
                if closed.mean != mean || closed.second != second || lemma2.as_ref() != Some(&mean) {
                    return (cases, Some(Failure {
                        message: format!(
                            "n={n} edges={m_ones}: exhaustive ({}, {}) vs closed form ({}, {})",
                            format_rational(&mean),
                            format_rational(&second),
                            format_rational(&closed.mean),
                            format_rational(&closed.second)
                        ),
                        witness: None,
                    }));
                }
            }
        }
        (cases, None)
    });

    record("fit counts match brute force", &|| {
        let max_n = if full { 6 } else { 4 };
        let mut cases = 0;
        for n in 0..=max_n {
            for p in 0..=n {
                cases += 1;
                let got = exact::fit_count(n, p);
                if got.as_ref().ok() != Some(&BigUint::from(brute_fit_count(n, p))) {
                    return (cases, Some(Failure {
                        message: format!("F_{n}({p}) = {got:?}, brute force {}", brute_fit_count(n, p)),
                        witness: None,
                    }));
                }
            }
        }
        (cases, None)
    });

    record("two-index recursion matches its path expansion", &|| {
        let max_n = if full { 7 } else { 5 };
        let mut cases = 0;
        type Coefficient = fn(usize) -> ExactRational;
        let plans: [(Coefficient, Coefficient); 2] = [
            (|_| q(1), |l| q(l) / q(2)),
            (|l| q(l + 2) / q(2), |l| q(l * l + 3 * l) / q(4)),
        ];
        for (idx, (a, c)) in plans.into_iter().enumerate() {
            let plan = CoefficientPlan::from_fn(max_n, |l| a(l as usize), |l| c(l as usize)).expect("positive");
            for n in 0..=max_n {
                for m in 0..=n {
                    cases += 1;
                    let dp = closed_forms::lemma1_eval(m, n, &plan);
                    let brute = composition_sum(m, n, a, c);
                    let closed = if idx == 0 { (imp.t3_mean)(m, n) } else { (imp.t4_second_moment)(m, n) };
                    if dp.as_ref().ok() != Some(&brute) || closed.as_ref().ok() != Some(&brute) {
                        return (cases, Some(Failure {
                            message: format!("plan {idx}, m={m}, n={n}: path expansion {}", format_rational(&brute)),
                            witness: None,
                        }));
                    }
                }
            }
        }
        (cases, None)
    });

    let max_closed = if full { 40 } else { 10 };
    record("mean over A(n,n) lies within [h(n), (n+1) h(n)]", &|| {
        for n in 1..=max_closed {
            let fail = |message: String| (n as u64, Some(Failure { message, witness: None }));
            match (closed_forms::t5_bounds(n), (imp.t3_mean)(n, n)) {
                (Ok(b), Ok(mean)) => {
                    if b.mean != mean {
                        return fail(format!("n={n}: summed terms {} vs mean {}", format_rational(&b.mean), format_rational(&mean)));
                    }
                    if !b.rigorous_holds() {
                        return fail(format!("n={n}: bounds violated"));
                    }
                }
                (Err(e), _) | (_, Err(e)) => return fail(e.to_string()),
            }
        }
        (max_closed as u64, None)
    });

    record("second-moment ratio over A(n,n) is >= 1 and nondecreasing", &|| {
        let mut prev = ExactRational::one();
        for n in 1..=max_closed {
            let fail = |message: String| (n as u64, Some(Failure { message, witness: None }));
            let ratio = match ((imp.t4_second_moment)(n, n), (imp.t3_mean)(n, n)) {
                (Ok(s), Ok(m)) => s / (&m * &m),
                (Err(e), _) | (_, Err(e)) => return fail(e.to_string()),
            };
            if ratio < prev {
                return fail(format!("n={n}: ratio {} below previous {}", format_rational(&ratio), format_rational(&prev)));
            }
            prev = ratio;
        }
        (max_closed as u64, None)
    });

    record("tail probability matches counting ones", &|| {
        let max_n = if full { 4 } else { 3 };
        let eps = [q(0), ExactRational::new(1.into(), 100.into()), ExactRational::new(2.into(), 100.into())];
        let mut cases = 0;
        for n in 1..=max_n {
            let mats = all_matrices(n, n);
            for e in &eps {
                cases += 1;
                let threshold = (ExactRational::new(1.into(), 2.into()) + e) * q(n * n);
                let hits = mats.iter().filter(|a| q(a.count_ones()) >= threshold).count();
                let direct = q(hits) / q(mats.len());
                let closed = closed_forms::t7_tail(n, e);
                if closed.as_ref().ok() != Some(&direct) {
                    return (cases, Some(Failure {
                        message: format!("n={n} eps={}: counted {}", format_rational(e), format_rational(&direct)),
                        witness: None,
                    }));
                }
            }
        }
        (cases, None)
    });

    record("batch sums identical across worker counts", &|| {
        let mats = random_matrices(6, 3, 0xBA7C);
        let mut cases = 0;
        for a in &mats {
            for alg in [Algorithm::Amm, Algorithm::Rm] {
                cases += 1;
                let runs: Vec<_> = [1, 2, 8]
                    .iter()
                    .map(|&w| estimator::run_batch_with_workers(a, alg, 2000, 11, w))
                    .collect();
                if runs.windows(2).any(|w| w[0] != w[1]) {
                    return (cases, Some(Failure {
                        message: format!("{alg} batch differs between 1, 2 and 8 workers"),
                        witness: Some(witness(a)),
                    }));
                }
            }
        }
        (cases, None)
    });

    Summary { level, checks }
}

fn show(d: &PathDistribution) -> String {
    let parts: Vec<String> = d.iter().map(|(v, p)| format!("{v}:{}", format_rational(p))).collect();
    format!("{{{}}}", parts.join(", "))
}
