use serde::{Deserialize, Serialize};

use super::shapiro::NormalityResult;
use super::{FuzzifyError, Result};

/// Linguistic term. Declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    L,
    M,
    H,
}

impl Term {
    pub const ALL: [Term; 3] = [Term::L, Term::M, Term::H];

    pub fn suffix(self) -> &'static str {
        match self {
            Term::L => "L",
            Term::M => "M",
            Term::H => "H",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Term::L => "Low",
            Term::M => "Medium",
            Term::H => "High",
        }
    }

    /// Accepts either the short suffix or the long name.
    pub fn parse(s: &str) -> Option<Term> {
        Term::ALL.into_iter().find(|t| t.suffix() == s || t.long_name() == s)
    }
}

/// Triangular membership with vertices `a <= b <= c`.
///
/// A degenerate side acts as a shoulder: with `a == b` the membership is 1
/// for every `x <= b`; otherwise with `b == c` it is 1 for every `x >= b`.
pub fn triangular_mu(x: f64, a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a <= b && b <= c) {
        return Err(FuzzifyError::InvalidVertices(a, b, c));
    }
    Ok(tri(x, a, b, c))
}

fn tri(x: f64, a: f64, b: f64, c: f64) -> f64 {
    if a == b && x <= b {
        return 1.0;
    }
    if b == c && a < b && x >= b {
        return 1.0;
    }
    if x <= a || x >= c {
        0.0
    } else if x <= b {
        (x - a) / (b - a)
    } else {
        (c - x) / (c - b)
    }
}

pub fn gaussian_mu(x: f64, center: f64, width: f64) -> Result<f64> {
    if !(width > 0.0) {
        return Err(FuzzifyError::NonpositiveWidth(width));
    }
    Ok(gauss_log(x, center, width).exp())
}

fn gauss_log(x: f64, center: f64, width: f64) -> f64 {
    let d = x - center;
    -(d * d) / (2.0 * width * width)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shoulder {
    None,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermFunction {
    Gaussian { center: f64, width: f64 },
    Triangular { a: f64, b: f64, c: f64, shoulder: Shoulder },
}

impl TermFunction {
    pub fn mu(&self, x: f64) -> f64 {
        match *self {
            TermFunction::Gaussian { center, width } => gauss_log(x, center, width).exp(),
            TermFunction::Triangular { a, b, c, shoulder } => match shoulder {
                Shoulder::None => tri(x, a, b, c),
                Shoulder::Left if x <= b => 1.0,
                Shoulder::Left => {
                    if x >= c {
                        0.0
                    } else {
                        (c - x) / (c - b)
                    }
                }
                Shoulder::Right if x >= b => 1.0,
                Shoulder::Right => {
                    if x <= a {
                        0.0
                    } else {
                        (x - a) / (b - a)
                    }
                }
            },
        }
    }

    /// Value used to rank terms against each other; monotone in `mu` and
    /// free of underflow for Gaussian tails.
    fn score(&self, x: f64) -> f64 {
        match *self {
            TermFunction::Gaussian { center, width } => gauss_log(x, center, width),
            TermFunction::Triangular { .. } => self.mu(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Triangular,
}

/// Training-split statistics a membership set was fitted from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl FittedStats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 };
        Self { n, mean, std: var.sqrt(), min: s[0], median, max: s[n - 1] }
    }
}

/// Low/Medium/High membership functions of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipFunctions {
    pub family: Family,
    pub low: TermFunction,
    pub medium: TermFunction,
    pub high: TermFunction,
    pub stats: FittedStats,
}

impl MembershipFunctions {
    pub fn term(&self, t: Term) -> &TermFunction {
        match t {
            Term::L => &self.low,
            Term::M => &self.medium,
            Term::H => &self.high,
        }
    }

    pub fn memberships(&self, x: f64) -> [f64; 3] {
        [self.low.mu(x), self.medium.mu(x), self.high.mu(x)]
    }

    /// Maximum-membership term; ties resolve as L before M before H.
    pub fn assign(&self, x: f64) -> FuzzyAssignment {
        let mut best = Term::L;
        let mut best_score = self.low.score(x);
        for t in [Term::M, Term::H] {
            let s = self.term(t).score(x);
            if s > best_score {
                best = t;
                best_score = s;
            }
        }
        FuzzyAssignment { term: best, membership: self.term(best).mu(x) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyAssignment {
    pub term: Term,
    pub membership: f64,
}

/// Fits membership functions to training values.
///
/// Gaussian family: centers at mean - std, mean, mean + std with common
/// width std / 2, which puts the term boundaries at mean ± std / 2.
/// Triangular family: Low = (min, min, median), Medium = (min, median, max),
/// High = (median, max, max), with shoulders on the outer terms.
pub fn fit_membership(values: &[f64], normality: &NormalityResult) -> Result<MembershipFunctions> {
    if values.len() < 3 {
        return Err(FuzzifyError::SampleTooSmall(values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FuzzifyError::NonFinite);
    }
    let stats = FittedStats::of(values);
    if stats.min == stats.max {
        return Err(FuzzifyError::DegenerateColumn(String::new()));
    }
    let out = if normality.is_gaussian {
        let (mu, sd) = (stats.mean, stats.std);
        let g = |center| TermFunction::Gaussian { center, width: sd / 2.0 };
        MembershipFunctions {
            family: Family::Gaussian,
            low: g(mu - sd),
            medium: g(mu),
            high: g(mu + sd),
            stats,
        }
    } else {
        let (lo, med, hi) = (stats.min, stats.median, stats.max);
        MembershipFunctions {
            family: Family::Triangular,
            low: TermFunction::Triangular { a: lo, b: lo, c: med, shoulder: Shoulder::Left },
            medium: TermFunction::Triangular { a: lo, b: med, c: hi, shoulder: Shoulder::None },
            high: TermFunction::Triangular { a: med, b: hi, c: hi, shoulder: Shoulder::Right },
            stats,
        }
    };
    Ok(out)
}
