#![allow(dead_code)]

use aifv2::numeric::{make_dist, parse_prob, random_dist, ExactScalar, SourceDist};
use rand::Rng;

pub fn q(s: &str) -> ExactScalar {
    s.parse().unwrap()
}

pub fn dist(v: &[&str]) -> SourceDist {
    make_dist(v.iter().map(|s| parse_prob(s).unwrap()).collect()).unwrap()
}

/// Random distribution with `n` in `2..=max_n` and `b` in `lo..=hi`, with
/// `b` raised to fit `n` symbols.
pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize, lo: u32, hi: u32) -> SourceDist {
    let n = rng.gen_range(2..=max_n);
    let need = usize::BITS - (n - 1).leading_zeros();
    let b = rng.gen_range(lo.max(need)..=hi.max(need));
    random_dist(rng, n, b).unwrap()
}

/// `x` where `y = a0 + s0 x` meets `y = a1 + s1 x`.
fn meet(a: &(ExactScalar, ExactScalar), b: &(ExactScalar, ExactScalar)) -> ExactScalar {
    (&b.0 - &a.0).checked_div(&(&a.1 - &b.1)).unwrap()
}

/// Breakpoints of the lower envelope of `y = intercept + slope * x` over
/// all of the real line, left to right.
pub fn lower_envelope_breakpoints(lines: &[(ExactScalar, ExactScalar)]) -> Vec<ExactScalar> {
    let mut sorted = lines.to_vec();
    // steepest first; among equal slopes the lowest intercept wins
    sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    sorted.dedup_by(|later, kept| later.1 == kept.1);
    let mut hull: Vec<(ExactScalar, ExactScalar)> = Vec::new();
    for line in sorted {
        while hull.len() >= 2 {
            let k = hull.len();
            if meet(&hull[k - 2], &line) <= meet(&hull[k - 2], &hull[k - 1]) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(line);
    }
    hull.windows(2).map(|w| meet(&w[0], &w[1])).collect()
}

/// Minimum of the lines at `x`, by direct evaluation.
pub fn lower_at(lines: &[(ExactScalar, ExactScalar)], x: &ExactScalar) -> ExactScalar {
    lines.iter().map(|(a, s)| a + s * x).min().unwrap()
}
