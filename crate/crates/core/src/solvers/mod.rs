//! Construction of optimal code pairs.

mod binary_search;
pub mod bigfloat;
mod ellipsoid;
mod iterative;

use std::fmt::{self, Write as _};
use std::str::FromStr;

pub use binary_search::solve_binary_search;
pub use ellipsoid::{gls_budget, mantissa_bits, solve_ellipsoid, solve_ellipsoid_with, EllipsoidState};
pub use iterative::{default_start, solve_iterative, solve_iterative_with_cap, ITERATION_CAP};

use crate::codec::{entropy, huffman, pair_cost, CodePair};
use crate::error::{Error, Result};
use crate::numeric::{ExactScalar, SourceDist};
use crate::treeopt::exhaustive_optimum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    BinarySearch,
    Ellipsoid,
    Iterative,
    Exhaustive,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::BinarySearch,
        Method::Ellipsoid,
        Method::Iterative,
        Method::Exhaustive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::BinarySearch => "binary-search",
            Method::Ellipsoid => "ellipsoid",
            Method::Iterative => "iterative",
            Method::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidNumber(s.to_string()))
    }
}

/// Result of one solver run. Trees use sorted symbol indices
/// (0 = most probable); see [`SolveReport::input_order_pair`].
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub pair: CodePair,
    pub x_star: Option<ExactScalar>,
    pub cost: ExactScalar,
    pub method: Method,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub degenerate: bool,
}

impl SolveReport {
    pub(crate) fn new(
        pair: CodePair,
        x_star: Option<ExactScalar>,
        method: Method,
        iterations: usize,
        oracle_calls: usize,
        dist: &SourceDist,
    ) -> Self {
        let m0 = pair.t0().metrics_unchecked(dist);
        let m1 = pair.t1().metrics_unchecked(dist);
        Self {
            cost: pair_cost(&m0, &m1),
            degenerate: m0.q1.is_zero(),
            pair,
            x_star,
            method,
            iterations,
            oracle_calls,
        }
    }

    /// The pair with symbols renumbered to the distribution's input order.
    pub fn input_order_pair(&self, dist: &SourceDist) -> CodePair {
        let order = dist.order();
        let t0 = self.pair.t0().relabel(|s| order[s]);
        let t1 = self.pair.t1().relabel(|s| order[s]);
        CodePair::new(t0, t1).expect("relabeling keeps a valid pair")
    }

    pub fn render(&self, dist: &SourceDist) -> String {
        let (_, huff) = huffman(dist);
        let mut out = String::new();
        let dec = |v: &ExactScalar| v.to_decimal(12);
        writeln!(out, "method: {}", self.method).unwrap();
        writeln!(out, "n: {}", dist.len()).unwrap();
        writeln!(out, "b: {}", dist.bits()).unwrap();
        match &self.x_star {
            Some(x) => writeln!(out, "x*: {} ({})", x, dec(x)).unwrap(),
            None => writeln!(out, "x*: -").unwrap(),
        }
        writeln!(out, "cost: {} ({})", self.cost, dec(&self.cost)).unwrap();
        writeln!(out, "huffman: {} ({})", huff, dec(&huff)).unwrap();
        writeln!(out, "entropy: {:.12}", entropy(dist)).unwrap();
        writeln!(out, "iterations: {}", self.iterations).unwrap();
        writeln!(out, "oracle calls: {}", self.oracle_calls).unwrap();
        writeln!(out, "degenerate: {}", self.degenerate).unwrap();
        let pair = self.input_order_pair(dist);
        out.push_str(&pair.t0().to_text());
        out.push_str(&pair.t1().to_text());
        out
    }
}

pub fn solve_exhaustive(dist: &SourceDist) -> Result<SolveReport> {
    let (pair, _) = exhaustive_optimum(dist)?;
    Ok(SolveReport::new(pair, None, Method::Exhaustive, 0, 0, dist))
}

pub fn solve(dist: &SourceDist, method: Method) -> Result<SolveReport> {
    match method {
        Method::BinarySearch => solve_binary_search(dist),
        Method::Ellipsoid => solve_ellipsoid(dist),
        Method::Iterative => solve_iterative(dist, &default_start(dist)),
        Method::Exhaustive => solve_exhaustive(dist),
    }
}
