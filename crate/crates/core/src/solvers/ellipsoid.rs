//! Central-cut ellipsoid method maximizing `x2` over `K`, followed by an
//! exact search over a window of width `2^-2(b+1)` around the best point.

use crate::codec::CodePair;
use crate::error::{Error, Result};
use crate::geometry::{envelope_at, intersect_lines, separation_oracle, CostLine, Intersection, PlanePoint, SeparationResult};
use crate::numeric::{ExactScalar, SourceDist};

use super::bigfloat::BigFloat;
use super::{Method, SolveReport};

/// Environment variable overriding the mantissa width.
pub const PRECISION_ENV: &str = "AIFV2_PRECISION";

/// Oracle-call budget `6(1 + 4 log2(8n) + 6(b+1))`.
pub fn gls_budget(n: usize, b: u32) -> usize {
    let v = 6.0 * (1.0 + 4.0 * (8.0 * n as f64).log2() + 6.0 * (f64::from(b) + 1.0));
    v.floor() as usize
}

/// Default mantissa width: `6(b+1) + ceil(log2 n) + 64`.
pub fn mantissa_bits(n: usize, b: u32) -> u32 {
    let log_n = usize::BITS - (n.max(1) - 1).leading_zeros();
    6 * (b + 1) + log_n + 64
}

/// Center `c` and shape `P` of `{z : (z-c)^T P^-1 (z-c) <= 1}`.
#[derive(Clone, Debug)]
pub struct EllipsoidState {
    pub center: [BigFloat; 2],
    /// `[p11, p12, p22]`
    pub shape: [BigFloat; 3],
    pub iterations: usize,
    prec: u32,
}

impl EllipsoidState {
    pub fn ball(radius: i64, prec: u32) -> Self {
        let r2 = BigFloat::from_int(radius * radius, prec);
        Self {
            center: [BigFloat::zero(), BigFloat::zero()],
            shape: [r2.clone(), BigFloat::zero(), r2],
            iterations: 0,
            prec,
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        let p = self.prec;
        let [a, b, c] = &self.shape;
        a.is_positive() && c.is_positive() && a.mul(c, p).sub(&b.mul(b, p), p).is_positive()
    }

    /// Keeps the half `{z : g.z <= g.c}`. Returns `false` on loss of
    /// positive definiteness.
    pub fn cut(&mut self, g: [&ExactScalar; 2]) -> bool {
        let p = self.prec;
        let g = [BigFloat::from_exact(g[0], p), BigFloat::from_exact(g[1], p)];
        let [p11, p12, p22] = &self.shape;
        let pg = [
            p11.mul(&g[0], p).add(&p12.mul(&g[1], p), p),
            p12.mul(&g[0], p).add(&p22.mul(&g[1], p), p),
        ];
        let gpg = g[0].mul(&pg[0], p).add(&g[1].mul(&pg[1], p), p);
        let Some(norm) = gpg.sqrt(p).filter(BigFloat::is_positive) else {
            return false;
        };
        let bv = [pg[0].div(&norm, p), pg[1].div(&norm, p)];
        let three = BigFloat::from_int(3, p);
        for i in 0..2 {
            self.center[i] = self.center[i].sub(&bv[i].div(&three, p), p);
        }
        // 4/3 (P - 2/3 b b^T)
        let two_thirds = BigFloat::from_int(2, p).div(&three, p);
        let four_thirds = two_thirds.scale2(1);
        let upd = |old: &BigFloat, x: &BigFloat, y: &BigFloat| {
            four_thirds.mul(&old.sub(&two_thirds.mul(&x.mul(y, p), p), p), p)
        };
        self.shape = [
            upd(p11, &bv[0], &bv[0]),
            upd(p12, &bv[0], &bv[1]),
            upd(p22, &bv[1], &bv[1]),
        ];
        self.iterations += 1;
        self.is_positive_definite()
    }

    /// `max x2` over the ellipsoid: `c2 + sqrt(p22)`.
    pub fn top(&self) -> Option<BigFloat> {
        Some(self.center[1].add(&self.shape[2].sqrt(self.prec)?, self.prec))
    }

    pub fn center_exact(&self) -> PlanePoint {
        PlanePoint::new(self.center[0].to_exact(), self.center[1].to_exact())
    }
}

enum Phase1 {
    Done { best: PlanePoint, calls: usize, iterations: usize },
    LostPrecision { calls: usize },
}

fn phase1(dist: &SourceDist, prec: u32, budget: usize) -> Result<Phase1> {
    let n = dist.len();
    let eps1 = ExactScalar::pow2(-3 * (i64::from(dist.bits()) + 1));
    let mut state = EllipsoidState::ball(4 * n as i64, prec);
    let mut best: Option<PlanePoint> = None;
    let mut calls = 0;
    let up = [ExactScalar::zero(), ExactScalar::from_int(-1)];
    loop {
        if calls == budget {
            return Err(Error::OracleBudget(budget));
        }
        let q = state.center_exact();
        calls += 1;
        let sep = separation_oracle(&q, dist)?;
        let ok = match &sep {
            SeparationResult::Inside => {
                if best.as_ref().is_none_or(|b| q.x2 > b.x2) {
                    best = Some(q);
                }
                state.cut([&up[0], &up[1]])
            }
            SeparationResult::Separator { a, .. } => state.cut([&a.0, &a.1]),
        };
        if !ok {
            return Ok(Phase1::LostPrecision { calls });
        }
        if let Some(b) = &best {
            let Some(top) = state.top() else {
                return Ok(Phase1::LostPrecision { calls });
            };
            if top.to_exact() - &b.x2 <= eps1 {
                return Ok(Phase1::Done {
                    best: b.clone(),
                    calls,
                    iterations: state.iterations,
                });
            }
        }
    }
}

fn min_of(lines: &[&CostLine], x: &ExactScalar) -> ExactScalar {
    lines.iter().map(|l| l.eval(x)).min().expect("nonempty")
}

/// Largest `x` maximizing `min(lower(lines0), lower(lines1))` on `[l, r]`.
fn window_argmax(l: &ExactScalar, r: &ExactScalar, lines0: &[&CostLine], lines1: &[&CostLine]) -> ExactScalar {
    let all: Vec<&CostLine> = lines0.iter().chain(lines1).copied().collect();
    let mut cands = vec![l.clone(), r.clone()];
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if let Intersection::Point(p) = intersect_lines(all[i], all[j]) {
                if &p.x1 >= l && &p.x1 <= r {
                    cands.push(p.x1);
                }
            }
        }
    }
    let m = |x: &ExactScalar| min_of(lines0, x).min(min_of(lines1, x));
    let mut best = l.clone();
    let mut best_v = m(l);
    for x in cands {
        let v = m(&x);
        if v > best_v || (v == best_v && x > best) {
            best = x;
            best_v = v;
        }
    }
    best
}

pub fn solve_ellipsoid(dist: &SourceDist) -> Result<SolveReport> {
    let prec = std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|&p| p >= 16);
    solve_ellipsoid_with(dist, prec)
}

/// `prec` overrides the default mantissa width.
pub fn solve_ellipsoid_with(dist: &SourceDist, prec: Option<u32>) -> Result<SolveReport> {
    let n = dist.len();
    let b = dist.bits();
    let budget = gls_budget(n, b);
    let mut prec = prec.unwrap_or_else(|| mantissa_bits(n, b));
    let mut total_calls = 0;
    let (best, iterations) = loop {
        match phase1(dist, prec, budget)? {
            Phase1::Done { best, calls, iterations } => {
                total_calls += calls;
                break (best, iterations);
            }
            Phase1::LostPrecision { calls } => {
                total_calls += calls;
                prec *= 2;
            }
        }
    };

    let half_eps0 = ExactScalar::pow2(-2 * (i64::from(b) + 1) - 1);
    let l = (&best.x1 - &half_eps0).max(ExactScalar::zero());
    let r = (&best.x1 + &half_eps0).min(ExactScalar::one());
    let at_l = envelope_at(&l, dist)?;
    let at_r = envelope_at(&r, dist)?;
    let x = window_argmax(&l, &r, &[&at_l.line0, &at_r.line0], &[&at_l.line1, &at_r.line1]);
    let fin = envelope_at(&x, dist)?;
    let pair = CodePair::new(fin.line0.tree, fin.line1.tree)?;
    Ok(SolveReport::new(pair, Some(x), Method::Ellipsoid, iterations, total_calls, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::huffman;
    use crate::numeric::{dyadic_grid, make_dist};
    use crate::solvers::solve_binary_search;

    fn q(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    #[test]
    fn budget_and_precision_formulas() {
        // 6 * (1 + 4*4 + 6*3) for n = 2, b = 2
        assert_eq!(gls_budget(2, 2), 210);
        assert_eq!(mantissa_bits(2, 2), 18 + 1 + 64);
        assert_eq!(mantissa_bits(5, 4), 30 + 3 + 64);
    }

    #[test]
    fn two_symbol_example() {
        let d = make_dist(vec![q("3/4"), q("1/4")]).unwrap();
        let r = solve_ellipsoid(&d).unwrap();
        assert_eq!(r.cost, q("1"));
        assert!(r.oracle_calls <= gls_budget(2, d.bits()));
    }

    #[test]
    fn flat_top_returns_huffman_cost() {
        let d = make_dist(vec![q("1/2"), q("1/4"), q("1/4")]).unwrap();
        let r = solve_ellipsoid(&d).unwrap();
        assert_eq!(r.cost, huffman(&d).1);
    }

    #[test]
    fn cut_keeps_the_right_half() {
        let mut s = EllipsoidState::ball(4, 80);
        assert!(s.cut([&q("0"), &q("-1")]));
        assert!(s.center[1].to_exact() > q("0"));
        assert!(s.is_positive_definite());
        assert_eq!(s.iterations, 1);
    }

    #[test]
    fn low_precision_still_exact() {
        for d in dyadic_grid(3, 3) {
            let r = solve_ellipsoid_with(&d, Some(24)).unwrap();
            assert_eq!(r.cost, solve_binary_search(&d).unwrap().cost);
        }
    }

    #[test]
    fn agrees_on_small_grid() {
        for n in 2..=4 {
            for d in dyadic_grid(n, 3) {
                let r = solve_ellipsoid(&d).unwrap();
                assert_eq!(r.cost, solve_binary_search(&d).unwrap().cost, "{:?}", d.probs());
                assert!(r.oracle_calls <= gls_budget(n, d.bits()));
            }
        }
    }
}
