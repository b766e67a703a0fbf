use crate::error::Result;
use crate::geometry::{crossing_in_interval, envelope_at};
use crate::numeric::{ExactScalar, SourceDist};

use super::{Method, SolveReport};

/// Halves `[0, 1]` exactly `2(b+1)` times, keeping `E0(l) < E1(l)` and
/// `E0(r) >= E1(r)`, then solves for the crossing on the four witness lines.
pub fn solve_binary_search(dist: &SourceDist) -> Result<SolveReport> {
    let steps = 2 * (dist.bits() as usize + 1);
    let mut l = ExactScalar::zero();
    let mut r = ExactScalar::one();
    let mut at_l = envelope_at(&l, dist)?;
    let mut at_r = envelope_at(&r, dist)?;
    let mut calls = 2;
    for _ in 0..steps {
        let mid = (&l + &r).half();
        let e = envelope_at(&mid, dist)?;
        calls += 1;
        if e.e0 < e.e1 {
            l = mid;
            at_l = e;
        } else {
            r = mid;
            at_r = e;
        }
    }
    debug_assert_eq!(&r - &l, ExactScalar::pow2(-(steps as i64)));
    let cross = crossing_in_interval(
        &l,
        &r,
        &[at_l.line0, at_r.line0],
        &[at_l.line1, at_r.line1],
    )?;
    let fin = envelope_at(&cross.x1, dist)?;
    calls += 1;
    let pair = crate::codec::CodePair::new(fin.line0.tree, fin.line1.tree)?;
    Ok(SolveReport::new(pair, Some(cross.x1), Method::BinarySearch, steps, calls, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::huffman;
    use crate::numeric::{dyadic_grid, make_dist};
    use crate::treeopt::exhaustive_optimum;

    fn q(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    #[test]
    fn two_symbol_closed_form() {
        let d = make_dist(vec![q("3/4"), q("1/4")]).unwrap();
        let r = solve_binary_search(&d).unwrap();
        assert_eq!(r.iterations, 6);
        assert_eq!(r.x_star, Some(q("1/4")));
        assert_eq!(r.cost, q("1"));
        assert!(r.degenerate);
    }

    #[test]
    fn iteration_count_tracks_bits() {
        for b in 2..=8u32 {
            let mut v = vec![q("1/2")];
            v.push(ExactScalar::pow2(-1) - ExactScalar::pow2(-(b as i64)));
            v.push(ExactScalar::pow2(-(b as i64)));
            let d = make_dist(v).unwrap();
            assert_eq!(d.bits(), b);
            assert_eq!(solve_binary_search(&d).unwrap().iterations, 2 * (b as usize + 1));
        }
    }

    #[test]
    fn dyadic_sources_reduce_to_huffman() {
        let d = make_dist(vec![q("1/2"), q("1/4"), q("1/8"), q("1/8")]).unwrap();
        let r = solve_binary_search(&d).unwrap();
        assert_eq!(r.cost, huffman(&d).1);
        assert!(r.degenerate);
    }

    #[test]
    fn matches_oracle_on_small_grid() {
        for n in 2..=4 {
            for d in dyadic_grid(n, 3) {
                let r = solve_binary_search(&d).unwrap();
                assert_eq!(r.cost, exhaustive_optimum(&d).unwrap().1, "{:?}", d.probs());
                let x = r.x_star.clone().unwrap();
                assert!(x.is_positive() && x <= q("1"));
                assert!(r.pair.t1().metrics(&d).unwrap().q0.is_positive());
            }
        }
    }
}
