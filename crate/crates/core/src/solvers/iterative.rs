use num_bigint::BigInt;
use num_traits::One;

use crate::codec::CodePair;
use crate::error::{Error, Result};
use crate::geometry::envelope_at_unchecked;
use crate::numeric::{ExactScalar, SourceDist};

use super::{Method, SolveReport};

pub const ITERATION_CAP: usize = 1_000_000;

/// `floor(frac(log2 3) * 2^k)`, by repeated squaring in fixed point.
fn frac_log2_3(k: u32) -> BigInt {
    let guard = 64;
    let prec = k as usize + guard;
    let one = BigInt::one() << prec;
    // y = 3/2
    let mut y = (&one * 3) >> 1;
    let mut bits = BigInt::from(0);
    for _ in 0..k {
        y = (&y * &y) >> prec;
        bits <<= 1;
        if y >= (&one << 1) {
            y >>= 1;
            bits += 1;
        }
    }
    bits
}

/// `2 - log2 3` rounded down to a multiple of `2^-2(b+2)`.
pub fn default_start(dist: &SourceDist) -> ExactScalar {
    let k = 2 * (dist.bits() + 2);
    // 1 - frac(log2 3), which is irrational
    let m = (BigInt::one() << k as usize) - frac_log2_3(k) - 1;
    ExactScalar::from_bigint(m) * ExactScalar::pow2(-(k as i64))
}

pub fn solve_iterative(dist: &SourceDist, start: &ExactScalar) -> Result<SolveReport> {
    solve_iterative_with_cap(dist, start, ITERATION_CAP)
}

/// Repeats `C <- (L(T1) - L(T0)) / (q1(T0) + q0(T1))` with `T0`, `T1`
/// optimal at the previous `C` until `C` repeats.
pub fn solve_iterative_with_cap(dist: &SourceDist, start: &ExactScalar, cap: usize) -> Result<SolveReport> {
    if start.is_negative() || *start > ExactScalar::one() {
        return Err(Error::OutOfDomain(start.to_string()));
    }
    let mut c = start.clone();
    let mut iterations = 0;
    loop {
        if iterations == cap {
            return Err(Error::IterationCap(cap));
        }
        iterations += 1;
        let env = envelope_at_unchecked(&c, dist)?;
        let m0 = env.line0.tree.metrics_unchecked(dist);
        let m1 = env.line1.tree.metrics_unchecked(dist);
        let next = (&m1.l - &m0.l).checked_div(&(&m0.q1 + &m1.q0))?;
        if next == c {
            let pair = CodePair::new(env.line0.tree, env.line1.tree)?;
            return Ok(SolveReport::new(pair, Some(c), Method::Iterative, iterations, iterations, dist));
        }
        c = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{dyadic_grid, make_dist, random_dist};
    use crate::solvers::solve_binary_search;
    use rand::{Rng, SeedableRng};

    fn q(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    #[test]
    fn start_value() {
        let d = make_dist(vec![q("1/2"), q("1/2")]).unwrap();
        // b = 1: grid 2^-6, 2 - log2 3 = 0.41504...
        assert_eq!(default_start(&d), q("26/64"));
        let d = make_dist(vec![q("1/2"), q("1/4"), q("1/4")]).unwrap();
        assert_eq!(default_start(&d), q("106/256"));
        let x = default_start(&make_dist(vec![q("1/2"), q("3/8"), q("1/8")]).unwrap());
        let exact = 2.0 - 3f64.log2();
        assert!(x.to_f64() <= exact && exact - x.to_f64() < 2f64.powi(-10));
    }

    #[test]
    fn two_symbol_example() {
        let d = make_dist(vec![q("3/4"), q("1/4")]).unwrap();
        let r = solve_iterative(&d, &q("1/2")).unwrap();
        assert_eq!(r.x_star, Some(q("1/4")));
        assert_eq!(r.cost, q("1"));
        assert_eq!(r.iterations, 2);
        let r = solve_iterative(&d, &q("1/4")).unwrap();
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn rejects_bad_start_and_cap() {
        let d = make_dist(vec![q("3/4"), q("1/4")]).unwrap();
        assert!(solve_iterative(&d, &q("2")).is_err());
        assert!(matches!(
            solve_iterative_with_cap(&d, &q("1/2"), 1),
            Err(Error::IterationCap(1))
        ));
    }

    #[test]
    fn agrees_with_binary_search() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..=5);
            let b = rng.gen_range(3..=5);
            let d = random_dist(&mut rng, n, b).unwrap();
            let a = solve_iterative(&d, &default_start(&d)).unwrap();
            let s = solve_binary_search(&d).unwrap();
            assert_eq!(a.cost, s.cost);
            assert_eq!(a.x_star, s.x_star);
        }
        for d in dyadic_grid(3, 3) {
            for start in ["0", "1", "1/3"] {
                assert_eq!(
                    solve_iterative(&d, &q(start)).unwrap().cost,
                    solve_binary_search(&d).unwrap().cost
                );
            }
        }
    }
}
