//! Report-producing drivers behind the `allmatch` subcommands.
//!
//! Each driver returns an [`Output`]: the structured [`ExperimentReport`]
//! plus a short human-readable rendering used by `--format text`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::Value;

use crate::closed_forms::{self, Verdict};
use crate::combinatorics::{ExactCount, ExactRational};
use crate::ensembles::{self, EnsembleKind, EnsembleSpec, Expectation, ExpectationMode};
use crate::error::{Error, Result};
use crate::estimator::{self, Algorithm};
use crate::exact;
use crate::matrix::ZeroOneMatrix;
use crate::rational::{format_rational, parse_rational, to_f64};
use crate::report::{config, rational_text, ExperimentReport, RowBuilder};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub report: ExperimentReport,
    pub text: String,
}

fn int(v: impl Into<BigInt>) -> ExactRational {
    ExactRational::from_integer(v.into())
}

fn count_q(v: &ExactCount) -> ExactRational {
    int(BigInt::from(v.clone()))
}

macro_rules! named_enum {
    ($name:ident $label:literal { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const NAMES: &'static [&'static str] = &[$($text),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::InvalidArgument(format!(
                        "unknown {} {s:?}; expected one of {}",
                        $label,
                        Self::NAMES.join("|")
                    ))),
                }
            }
        }
    };
}

named_enum!(ExactQuantity "quantity" { Am => "am", Per => "per", Vector => "vector", Corollary3 => "corollary3" });
named_enum!(Formula "formula" {
    T3 => "t3", T4 => "t4", T5 => "t5", T6 => "t6",
    Lemma2 => "lemma2", T7 => "t7", T8 => "t8", L2Ratio => "l2ratio",
});
named_enum!(Stat "stat" { Am => "am", Ratio => "ratio", Am2 => "am2" });
named_enum!(Mode "mode" { Exhaustive => "exhaustive", Sample => "sample" });

/// Parses `"a..b"`, `"a..=b"`, `"a-b"` or a single `"a"` into an inclusive range.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("not a range: {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once('-') {
        (num(a)?, num(b)?)
    } else {
        let v = num(s)?;
        (v, v)
    };
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty range {s:?}")));
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// exact

pub fn cmd_exact(a: &ZeroOneMatrix, what: ExactQuantity) -> Result<Output> {
    let cfg = config(&[
        ("what", what.name().into()),
        ("rows", a.rows().into()),
        ("cols", a.cols().into()),
    ]);
    let mut report = ExperimentReport::new("exact", cfg, 0);
    let text = match what {
        ExactQuantity::Am => {
            let row = RowBuilder::new().uint("rows", a.rows() as u64).uint("cols", a.cols() as u64);
            let v = exact::am_dp(a)?;
            report.push(row.count("am", &v).finish());
            v.to_string()
        }
        ExactQuantity::Per => {
            let row = RowBuilder::new().uint("n", a.rows() as u64);
            let v = exact::permanent(a)?;
            report.push(row.count("permanent", &v).finish());
            v.to_string()
        }
        ExactQuantity::Vector => {
            let mv = exact::matching_vector(a)?;
            for (k, c) in mv.counts().iter().enumerate() {
                report.push(RowBuilder::new().uint("k", k as u64).count("count", c).finish());
            }
            mv.counts().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
        }
        ExactQuantity::Corollary3 => {
            let row = RowBuilder::new().uint("n", a.rows() as u64);
            let c = exact::verify_corollary3(a)?;
            report.push(
                row.count("all_matchings", &c.all_matchings)
                    .count("scaled_all_matchings", &c.scaled_all_matchings)
                    .count("extended_permanent", &c.extended_permanent)
                    .flag("holds", c.holds)
                    .finish(),
            );
            let (sign, verdict) = if c.holds { ("=", "OK") } else { ("!=", "FAIL") };
            format!("{} {sign} {} {verdict}", c.scaled_all_matchings, c.extended_permanent)
        }
    };
    Ok(Output { report, text })
}

// ---------------------------------------------------------------------------
// estimate

pub fn cmd_estimate(a: &ZeroOneMatrix, alg: Algorithm, samples: u64, seed: u64, workers: usize) -> Result<Output> {
    let cfg = config(&[
        ("algorithm", alg.to_string().into()),
        ("samples", samples.into()),
        ("rows", a.rows().into()),
        ("cols", a.cols().into()),
    ]);
    let mut report = ExperimentReport::new("estimate", cfg, seed);
    let row = RowBuilder::new();
    let stats = estimator::run_batch_with_workers(a, alg, samples, seed, workers)?;
    let exact_mean = allow_capability(estimator::exact_mean(a, alg))?;
    let exact_ratio = match &exact_mean {
        Some(m) if !m.is_zero() => allow_capability(estimator::critical_ratio_exact(a, alg))?,
        _ => None,
    };
    let mean = stats.mean();
    let se = stats.standard_error();
    let within = exact_mean.as_ref().map(|m| {
        let dev = to_f64(&(&mean - count_q(m)).abs());
        dev <= 6.0 * se || (se == 0.0 && dev == 0.0)
    });
    let empirical_ratio = stats.empirical_critical_ratio();
    if alg == Algorithm::Rm {
        match &exact_mean {
            Some(m) if m.is_zero() => report.warn("permanent is 0"),
            None if stats.sum.is_zero() => report.warn("all samples are 0; the permanent may be 0"),
            _ => {}
        }
    }
    report.push(
        row.text("algorithm", alg.to_string())
            .uint("rows", a.rows() as u64)
            .uint("cols", a.cols() as u64)
            .uint("samples", samples)
            .count("sum", &stats.sum)
            .count("sum_sq", &stats.sum_sq)
            .rational("mean", &mean)
            .float("standard_error", se)
            .opt_rational("empirical_ratio", empirical_ratio.as_ref())
            .opt_count("exact", exact_mean.as_ref())
            .opt_rational("exact_ratio", exact_ratio.as_ref())
            .opt_flag("within_6se", within)
            .finish(),
    );
    let mut text = format!("mean = {} (~{:.6})\nstandard error = {se:.6}\n", format_rational(&mean), to_f64(&mean));
    match &empirical_ratio {
        Some(r) => text += &format!("empirical critical ratio = {:.6}\n", to_f64(r)),
        None => text += "empirical critical ratio = undefined\n",
    }
    if let Some(m) = &exact_mean {
        text += &format!("exact = {m}\n");
    }
    if let Some(r) = &exact_ratio {
        text += &format!("exact critical ratio = {} (~{:.6})\n", format_rational(r), to_f64(r));
    }
    for w in &report.warnings {
        text += &format!("warning: {w}\n");
    }
    Ok(Output {
        report,
        text: text.trim_end().to_string(),
    })
}

/// Capability limits turn into a missing optional value.
fn allow_capability<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_capability() => Ok(None),
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// closed-form

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormParams {
    pub formula: Formula,
    /// Inclusive range of `n`.
    pub n_range: (usize, usize),
    /// Row count for t3/t4; defaults to `n`.
    pub m: Option<usize>,
    /// Tail offsets for t7.
    pub eps: Vec<ExactRational>,
    /// Fixed edge count for lemma2/t8/l2ratio.
    pub edges: Option<usize>,
    /// Edge count as `ceil(fraction * n^2)` when `edges` is not given.
    pub edge_fraction: ExactRational,
}

impl ClosedFormParams {
    pub fn new(formula: Formula, n_range: (usize, usize)) -> Self {
        ClosedFormParams {
            formula,
            n_range,
            m: None,
            eps: vec![ExactRational::zero()],
            edges: None,
            edge_fraction: parse_rational("0.52").expect("literal"),
        }
    }

    fn edges_for(&self, n: usize) -> usize {
        match self.edges {
            Some(m) => m,
            None => {
                ceil_usize(&(&self.edge_fraction * int(n * n))).unwrap_or(0)
            }
        }
    }
}

pub fn cmd_closed_form(p: &ClosedFormParams) -> Result<Output> {
    let (lo, hi) = p.n_range;
    if p.formula == Formula::T6 && lo == 0 {
        return Err(Error::InvalidArgument("t6 needs n >= 1".into()));
    }
    if p.edge_fraction.is_negative() || p.edge_fraction > ExactRational::one() {
        return Err(Error::InvalidArgument("edge fraction must lie in [0, 1]".into()));
    }
    let cfg = config(&[
        ("formula", p.formula.name().into()),
        ("n_from", lo.into()),
        ("n_to", hi.into()),
        ("m", p.m.map(Value::from).unwrap_or(Value::Null)),
        ("eps", Value::Array(p.eps.iter().map(rational_text).collect())),
        ("edges", p.edges.map(Value::from).unwrap_or(Value::Null)),
        ("edge_fraction", rational_text(&p.edge_fraction)),
    ]);
    let mut report = ExperimentReport::new("closed-form", cfg, 0);
    let mut points: Vec<(usize, Option<&ExactRational>)> = Vec::new();
    for n in lo..=hi {
        if p.formula == Formula::T7 {
            points.extend(p.eps.iter().map(|e| (n, Some(e))));
        } else {
            points.push((n, None));
        }
    }
    let rows: Vec<_> = points
        .par_iter()
        .map(|&(n, eps)| closed_form_row(p, n, eps))
        .collect::<Result<_>>()?;
    let mut text = String::new();
    for (row, line) in rows {
        report.push(row);
        text += &line;
        text.push('\n');
    }
    if p.formula == Formula::T5 && lo <= 1 && 1 <= hi {
        report.warn("the n*h(n) upper bound fails at n = 1; the rigorous (n+1)*h(n) bound is asserted instead");
    }
    Ok(Output {
        report,
        text: text.trim_end().to_string(),
    })
}

fn closed_form_row(p: &ClosedFormParams, n: usize, eps: Option<&ExactRational>) -> Result<(crate::report::Row, String)> {
    let row = RowBuilder::new();
    let q = |r: &ExactRational| format_rational(r);
    Ok(match p.formula {
        Formula::T3 | Formula::T4 => {
            let m = p.m.unwrap_or(n);
            let v = if p.formula == Formula::T3 {
                closed_forms::t3_mean(m, n)?
            } else {
                closed_forms::t4_second_moment(m, n)?
            };
            let key = if p.formula == Formula::T3 { "mean" } else { "second_moment" };
            let line = format!("m={m} n={n} {key}={}", q(&v));
            let row = row.uint("m", m as u64).uint("n", n as u64).rational(key, &v);
            (row.finish(), line)
        }
        Formula::T5 => {
            let b = closed_forms::t5_bounds(n)?;
            let line = format!(
                "n={n} k*={} h={} mean={} rigorous={} nh_upper={}",
                b.k_star,
                q(&b.h),
                q(&b.mean),
                b.rigorous_holds(),
                b.nh_upper_holds()
            );
            let row = row
                .uint("n", n as u64)
                .uint("k_star", b.k_star as u64)
                .rational("h", &b.h)
                .rational("mean", &b.mean)
                .rational("upper_rigorous", &b.upper_rigorous)
                .rational("upper_nh", &b.upper_nh)
                .flag("rigorous_holds", b.rigorous_holds())
                .flag("nh_upper_holds", b.nh_upper_holds());
            (row.finish(), line)
        }
        Formula::T6 => {
            let r = closed_forms::t6_ratio(n)?;
            let holds = match r.verdict {
                Verdict::Holds => Some(true),
                Verdict::Fails => Some(false),
                Verdict::Undecided => None,
            };
            let verdict = serde_json::to_value(r.verdict).expect("verdict serializes");
            let line = format!(
                "n={n} ratio={} (~{:.6}) threshold={:.6} verdict={}",
                q(&r.ratio),
                to_f64(&r.ratio),
                r.threshold.0,
                verdict.as_str().unwrap_or("")
            );
            let row = row
                .uint("n", n as u64)
                .rational("numerator", &r.numerator)
                .rational("denominator", &r.denominator)
                .rational("ratio", &r.ratio)
                .float("threshold", r.threshold.0)
                .opt_flag("holds", holds)
                .text("verdict", verdict.as_str().unwrap_or(""));
            (row.finish(), line)
        }
        Formula::Lemma2 => {
            let m = p.edges_for(n);
            let v = closed_forms::lemma2_mean(m, n)?;
            let line = format!("n={n} edges={m} mean={}", q(&v));
            (row.uint("n", n as u64).uint("edges", m as u64).rational("mean", &v).finish(), line)
        }
        Formula::T7 => {
            let eps = eps.expect("t7 points carry eps");
            let v = closed_forms::t7_tail(n, eps)?;
            let line = format!("n={n} eps={} tail={}", q(eps), q(&v));
            let row = row.uint("n", n as u64).rational("eps", eps).rational("tail", &v);
            (row.finish(), line)
        }
        Formula::T8 | Formula::L2Ratio => {
            let m = p.edges_for(n);
            let t = closed_forms::t8_moments(m, n)?;
            let ratio = if t.mean.is_zero() {
                None
            } else {
                Some(&t.second / (&t.mean * &t.mean))
            };
            let row = row.uint("n", n as u64).uint("edges", m as u64);
            let (row, line) = if p.formula == Formula::T8 {
                let line = format!("n={n} edges={m} mean={} second={}", q(&t.mean), q(&t.second));
                (row.rational("mean", &t.mean).rational("second_moment", &t.second), line)
            } else {
                let line = match &ratio {
                    Some(r) => format!("n={n} edges={m} ratio={} (~{:.6})", q(r), to_f64(r)),
                    None => format!("n={n} edges={m} ratio=undefined"),
                };
                (row, line)
            };
            (row.opt_rational("ratio", ratio.as_ref()).finish(), line)
        }
    })
}

// ---------------------------------------------------------------------------
// experiment

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    pub ensemble: EnsembleSpec,
    pub stat: Stat,
    pub mode: Mode,
    /// Square sizes to run; `None` runs the ensemble's own shape once.
    pub n_range: Option<(usize, usize)>,
    pub samples: u64,
    pub seed: u64,
}

pub fn cmd_experiment(p: &ExperimentParams) -> Result<Output> {
    if p.mode == Mode::Sample && p.samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let cfg = config(&[
        ("ensemble", serde_json::from_str(&p.ensemble.to_json()).expect("spec json")),
        ("stat", p.stat.name().into()),
        ("mode", p.mode.name().into()),
        (
            "n_range",
            p.n_range
                .map(|(a, b)| Value::String(format!("{a}..={b}")))
                .unwrap_or(Value::Null),
        ),
        ("samples", if p.mode == Mode::Sample { p.samples.into() } else { Value::Null }),
    ]);
    let mut report = ExperimentReport::new("experiment", cfg, p.seed);
    let specs: Vec<EnsembleSpec> = match p.n_range {
        None => vec![p.ensemble.clone()],
        Some((lo, hi)) => (lo..=hi).map(|n| p.ensemble.with_shape(n, n)).collect::<Result<_>>()?,
    };
    let mut text = String::new();
    for spec in &specs {
        let row = RowBuilder::new();
        let point = match p.mode {
            Mode::Exhaustive => exhaustive_point(spec, p.stat)?,
            Mode::Sample => sampled_point(spec, p.stat, p.samples, p.seed)?,
        };
        let closed = closed_form_for(spec, p.stat)?;
        let abs_dev = closed.as_ref().map(|c| (&point.value - c).abs());
        let rel_dev = match (&abs_dev, &closed) {
            (Some(d), Some(c)) if !c.is_zero() => Some(to_f64(d) / to_f64(c).abs()),
            _ => None,
        };
        let matches = abs_dev.as_ref().map(|d| match p.mode {
            Mode::Exhaustive => d.is_zero(),
            Mode::Sample => point.standard_error.is_some_and(|se| to_f64(d) <= 6.0 * se),
        });
        text += &format!(
            "{}x{} {}: empirical={} (~{:.6})",
            spec.rows(),
            spec.cols(),
            p.stat,
            format_rational(&point.value),
            to_f64(&point.value)
        );
        if let Some(c) = &closed {
            text += &format!(" closed_form={}", format_rational(c));
        }
        text.push('\n');
        report.push(
            row.uint("rows", spec.rows() as u64)
                .uint("cols", spec.cols() as u64)
                .text("stat", p.stat.name())
                .text("mode", p.mode.name())
                .uint("samples", point.samples)
                .rational("empirical", &point.value)
                .opt_float("standard_error", point.standard_error)
                .opt_rational("reference", point.reference.as_ref())
                .opt_rational("closed_form", closed.as_ref())
                .opt_rational("abs_dev", abs_dev.as_ref())
                .opt_float("rel_dev", rel_dev)
                .opt_flag("matches", matches)
                .finish(),
        );
    }
    Ok(Output {
        report,
        text: text.trim_end().to_string(),
    })
}

struct Point {
    value: ExactRational,
    samples: u64,
    standard_error: Option<f64>,
    /// Sampled mode: the same statistic with exact per-matrix values.
    reference: Option<ExactRational>,
}

fn am_q(a: &ZeroOneMatrix) -> Result<ExactRational> {
    exact::am_dp(a).map(|v| count_q(&v))
}

fn second_q(a: &ZeroOneMatrix) -> Result<ExactRational> {
    estimator::exact_second_moment(a, Algorithm::Amm).map(|v| count_q(&v))
}

fn exhaustive_point(spec: &EnsembleSpec, stat: Stat) -> Result<Point> {
    let mean = |f: fn(&ZeroOneMatrix) -> Result<ExactRational>| -> Result<ExactRational> {
        match ensembles::empirical_expectation(spec, f, ExpectationMode::Exhaustive)? {
            Expectation::Exact(v) => Ok(v),
            Expectation::Estimated { .. } => unreachable!("exhaustive mode is exact"),
        }
    };
    let value = match stat {
        Stat::Am => mean(am_q)?,
        Stat::Ratio => ratio(mean(second_q)?, mean(am_q)?)?,
        Stat::Am2 => ratio(mean(|a| am_q(a).map(|v| &v * &v))?, mean(am_q)?)?,
    };
    let samples = ensembles::enumerate(spec)?.len() as u64;
    Ok(Point {
        value,
        samples,
        standard_error: None,
        reference: None,
    })
}

fn ratio(second: ExactRational, mean: ExactRational) -> Result<ExactRational> {
    if mean.is_zero() {
        return Err(Error::ZeroMean);
    }
    Ok(second / (&mean * &mean))
}

fn sampled_point(spec: &EnsembleSpec, stat: Stat, samples: u64, seed: u64) -> Result<Point> {
    if spec.rows() > spec.cols() {
        return Err(Error::TooManyRows {
            rows: spec.rows(),
            cols: spec.cols(),
        });
    }
    let exact_ok = spec.rows().min(spec.cols()) <= exact::MAX_DP_WIDTH;
    let second_ok = spec.cols() <= exact::MAX_DP_WIDTH;
    // Per draw: (X, X^2, exact AM, exact E(X^2)).
    type Draw = (BigUint, BigUint, Option<BigUint>, Option<BigUint>);
    let draws: Vec<Draw> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Draw> {
            let mut g = rng::stream(seed, i);
            let a = ensembles::sample(spec, &mut g)?;
            let am = if exact_ok || stat == Stat::Am2 { Some(exact::am_dp(&a)?) } else { None };
            let x = match stat {
                Stat::Am2 => am.clone().expect("am2 needs the exact count"),
                _ => estimator::sample(&a, Algorithm::Amm, &mut g)?,
            };
            let second = if stat == Stat::Ratio && second_ok {
                Some(estimator::exact_second_moment(&a, Algorithm::Amm)?)
            } else {
                None
            };
            Ok((x.clone(), &x * &x, am, second))
        })
        .collect::<Result<_>>()?;
    let n = int(samples);
    let sum: BigUint = draws.iter().map(|d| &d.0).sum();
    let sum_sq: BigUint = draws.iter().map(|d| &d.1).sum();
    let sum_q = count_q(&sum);
    let exact_sum: Option<BigUint> = draws.iter().map(|d| d.2.as_ref()).sum();
    let (value, standard_error, reference) = match stat {
        Stat::Am => {
            let mean = &sum_q / &n;
            let se = (samples > 1).then(|| {
                let var = (count_q(&sum_sq) - &sum_q * &sum_q / &n) / (&n - ExactRational::one());
                (to_f64(&var) / samples as f64).sqrt()
            });
            (mean, se, exact_sum.map(|s| count_q(&s) / &n))
        }
        Stat::Ratio => {
            let value = ratio(count_q(&sum_sq) / &n, &sum_q / &n)?;
            let exact_second: Option<BigUint> = draws.iter().map(|d| d.3.as_ref()).sum();
            let reference = match (exact_second, exact_sum) {
                (Some(s2), Some(s1)) => Some(ratio(count_q(&s2) / &n, count_q(&s1) / &n)?),
                _ => None,
            };
            (value, None, reference)
        }
        Stat::Am2 => (ratio(count_q(&sum_sq) / &n, &sum_q / &n)?, None, None),
    };
    Ok(Point {
        value,
        samples,
        standard_error,
        reference,
    })
}

/// Closed-form value of the ensemble statistic, when one exists.
fn closed_form_for(spec: &EnsembleSpec, stat: Stat) -> Result<Option<ExactRational>> {
    let (m, n) = (spec.rows(), spec.cols());
    if spec.is_uniform_all() && m <= n {
        return Ok(match stat {
            Stat::Am => Some(closed_forms::t3_mean(m, n)?),
            Stat::Ratio => Some(ratio(closed_forms::t4_second_moment(m, n)?, closed_forms::t3_mean(m, n)?)?),
            Stat::Am2 => None,
        });
    }
    if let EnsembleKind::FixedOnes { m_ones } = *spec.kind() {
        if m == n {
            return Ok(match stat {
                Stat::Am => Some(closed_forms::lemma2_mean(m_ones, n)?),
                Stat::Am2 => Some(closed_forms::lemma2_ratio(m_ones, n)?),
                Stat::Ratio => None,
            });
        }
    }
    Ok(None)
}

fn ceil_usize(x: &ExactRational) -> Option<usize> {
    let (q, r) = x.numer().div_rem(x.denom());
    let c = if r.is_positive() { q + 1 } else { q };
    c.try_into().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&str]) -> ZeroOneMatrix {
        ZeroOneMatrix::parse_text(&rows.join("\n")).unwrap()
    }

    fn r(a: i64, b: i64) -> ExactRational {
        ExactRational::new(a.into(), b.into())
    }

    #[test]
    fn exact_examples() {
        assert_eq!(cmd_exact(&mat(&["11", "11"]), ExactQuantity::Am).unwrap().text, "7");
        assert_eq!(cmd_exact(&ZeroOneMatrix::identity(2), ExactQuantity::Per).unwrap().text, "1");
        assert_eq!(cmd_exact(&mat(&["1"]), ExactQuantity::Corollary3).unwrap().text, "2 = 2 OK");
        assert_eq!(cmd_exact(&mat(&["11", "11"]), ExactQuantity::Vector).unwrap().text, "1 4 2");
    }

    #[test]
    fn estimate_examples() {
        let out = cmd_estimate(&mat(&["1"]), Algorithm::Amm, 100, 9, 2).unwrap();
        let row = &out.report.rows[0];
        assert_eq!(row["mean"]["num"], "2");
        assert_eq!(row["mean"]["den"], "1");
        assert_eq!(row["empirical_ratio"]["num"], "1");
        let out = cmd_estimate(&mat(&["0"]), Algorithm::Rm, 10, 1, 1).unwrap();
        assert_eq!(out.report.warnings, vec!["permanent is 0".to_string()]);
        assert_eq!(out.report.rows[0]["mean"]["num"], "0");
    }

    #[test]
    fn closed_form_examples() {
        let mut p = ClosedFormParams::new(Formula::T3, (1, 1));
        let out = cmd_closed_form(&p).unwrap();
        assert_eq!(out.report.rows[0]["mean"]["num"], "3");
        assert_eq!(out.report.rows[0]["mean"]["den"], "2");

        p.formula = Formula::T6;
        let row = &cmd_closed_form(&p).unwrap().report.rows[0];
        assert_eq!((row["ratio"]["num"].as_str(), row["ratio"]["den"].as_str()), (Some("10"), Some("9")));
        assert_eq!(row["threshold"], 1.0);
        assert_eq!(row["holds"], true);

        p.formula = Formula::T7;
        p.n_range = (2, 2);
        p.eps = vec![r(1, 100)];
        let row = &cmd_closed_form(&p).unwrap().report.rows[0];
        assert_eq!((row["tail"]["num"].as_str(), row["tail"]["den"].as_str()), (Some("5"), Some("16")));
    }

    #[test]
    fn experiment_exhaustive_matches_closed_forms() {
        let p = ExperimentParams {
            ensemble: EnsembleSpec::exhaustive(2, 2),
            stat: Stat::Am,
            mode: Mode::Exhaustive,
            n_range: None,
            samples: 0,
            seed: 0,
        };
        let row = &cmd_experiment(&p).unwrap().report.rows[0];
        assert_eq!(row["matches"], true);
        assert_eq!(row["empirical"], row["closed_form"]);

        let p = ExperimentParams {
            ensemble: EnsembleSpec::fixed_ones(2, 2, 2).unwrap(),
            ..p
        };
        let row = &cmd_experiment(&p).unwrap().report.rows[0];
        assert_eq!(row["matches"], true);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..40").unwrap(), (1, 40));
        assert_eq!(parse_range("2..=3").unwrap(), (2, 3));
        assert_eq!(parse_range("4-10").unwrap(), (4, 10));
        assert_eq!(parse_range("5").unwrap(), (5, 5));
        assert!(parse_range("3..1").is_err());
        assert_eq!(ceil_usize(&r(13, 25)), Some(1));
        assert_eq!(ceil_usize(&r(4, 2)), Some(2));
    }
}
