//! Cost lines, the envelopes `E0`/`E1`, and the separation oracle for the
//! region `K = {(x1, x2) : 0 <= x1 <= 1, 0 <= x2 <= min(E0(x1), E1(x1))}`.

use std::fmt;

use crate::codetree::{CodeTree, TreeKind};
use crate::error::{Error, Result};
use crate::numeric::{ExactScalar, SourceDist};
use crate::treeopt::{best_tree, best_tree_unchecked, BestTree};

/// `y = intercept + slope * x`, generated by `tree`.
#[derive(Clone, Debug)]
pub struct CostLine {
    pub intercept: ExactScalar,
    pub slope: ExactScalar,
    pub tree: CodeTree,
}

impl CostLine {
    pub fn eval(&self, x: &ExactScalar) -> ExactScalar {
        &self.intercept + &self.slope * x
    }

    fn from_best(best: BestTree) -> Self {
        let slope = match best.tree.kind() {
            TreeKind::T0 => best.metrics.q1.clone(),
            TreeKind::T1 => -&best.metrics.q0,
        };
        Self {
            intercept: best.metrics.l,
            slope,
            tree: best.tree,
        }
    }
}

impl fmt::Display for CostLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*x", self.intercept, self.slope)
    }
}

/// `f(x) = L + q1*x` for a first tree, `g(x) = L - q0*x` for a second tree.
pub fn line_of(tree: &CodeTree, dist: &SourceDist) -> Result<CostLine> {
    let m = tree.metrics(dist)?;
    let slope = match tree.kind() {
        TreeKind::T0 => m.q1,
        TreeKind::T1 => -m.q0,
    };
    Ok(CostLine {
        intercept: m.l,
        slope,
        tree: tree.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlanePoint {
    pub x1: ExactScalar,
    pub x2: ExactScalar,
}

impl PlanePoint {
    pub fn new(x1: ExactScalar, x2: ExactScalar) -> Self {
        Self { x1, x2 }
    }
}

impl fmt::Display for PlanePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Intersection {
    Point(PlanePoint),
    Parallel,
}

pub fn intersect_lines(a: &CostLine, b: &CostLine) -> Intersection {
    let ds = &a.slope - &b.slope;
    if ds.is_zero() {
        return Intersection::Parallel;
    }
    let x = (&b.intercept - &a.intercept)
        .checked_div(&ds)
        .expect("nonzero slope difference");
    let y = a.eval(&x);
    Intersection::Point(PlanePoint::new(x, y))
}

/// Both envelopes at one point, with the minimizing lines as witnesses.
#[derive(Clone, Debug)]
pub struct EnvelopePoint {
    pub x: ExactScalar,
    pub e0: ExactScalar,
    pub e1: ExactScalar,
    pub line0: CostLine,
    pub line1: CostLine,
}

impl EnvelopePoint {
    pub fn m(&self) -> ExactScalar {
        self.e0.clone().min(self.e1.clone())
    }

    pub fn t0(&self) -> &CodeTree {
        &self.line0.tree
    }

    pub fn t1(&self) -> &CodeTree {
        &self.line1.tree
    }
}

pub fn envelope_at(x: &ExactScalar, dist: &SourceDist) -> Result<EnvelopePoint> {
    let b0 = best_tree(x, dist, TreeKind::T0)?;
    let b1 = best_tree(x, dist, TreeKind::T1)?;
    Ok(envelope_from(x, b0, b1))
}

/// Same as [`envelope_at`] but accepts any `x`; the minimizing lines are
/// still exact there, they just leave the region the algorithms use.
pub(crate) fn envelope_at_unchecked(x: &ExactScalar, dist: &SourceDist) -> Result<EnvelopePoint> {
    let b0 = best_tree_unchecked(x, dist, TreeKind::T0)?;
    let b1 = best_tree_unchecked(x, dist, TreeKind::T1)?;
    Ok(envelope_from(x, b0, b1))
}

fn envelope_from(x: &ExactScalar, b0: BestTree, b1: BestTree) -> EnvelopePoint {
    EnvelopePoint {
        x: x.clone(),
        e0: b0.value.clone(),
        e1: b1.value.clone(),
        line0: CostLine::from_best(b0),
        line1: CostLine::from_best(b1),
    }
}

fn lower(lines: &[CostLine], x: &ExactScalar) -> ExactScalar {
    lines
        .iter()
        .map(|l| l.eval(x))
        .min()
        .expect("at least one line")
}

/// The smallest `x` in `[l, r]` where the lower envelope of `lines0`
/// meets the lower envelope of `lines1`. Requires `min0 <= min1` at `l`
/// and `min0 >= min1` at `r`.
pub fn crossing_in_interval(
    l: &ExactScalar,
    r: &ExactScalar,
    lines0: &[CostLine],
    lines1: &[CostLine],
) -> Result<PlanePoint> {
    let no_crossing = || Error::NoCrossing {
        l: l.to_string(),
        r: r.to_string(),
    };
    if lines0.is_empty() || lines1.is_empty() || l > r {
        return Err(no_crossing());
    }
    let h = |x: &ExactScalar| lower(lines0, x) - lower(lines1, x);
    if h(l).is_positive() || h(r).is_negative() {
        return Err(no_crossing());
    }
    // h is linear between consecutive breakpoints of either envelope
    let all: Vec<&CostLine> = lines0.iter().chain(lines1).collect();
    let mut xs = vec![l.clone(), r.clone()];
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if let Intersection::Point(p) = intersect_lines(all[i], all[j]) {
                if &p.x1 > l && &p.x1 < r {
                    xs.push(p.x1);
                }
            }
        }
    }
    xs.sort();
    xs.dedup();
    let mut prev: Option<(ExactScalar, ExactScalar)> = None;
    for x in xs {
        let hx = h(&x);
        if hx.is_zero() {
            let y = lower(lines0, &x);
            return Ok(PlanePoint::new(x, y));
        }
        if let Some((px, ph)) = &prev {
            if ph.is_negative() && hx.is_positive() {
                let t = (-ph).checked_div(&(&hx - ph))?;
                let z = px + &t * (&x - px);
                let y = lower(lines0, &z);
                return Ok(PlanePoint::new(z, y));
            }
        }
        prev = Some((x, hx));
    }
    Err(no_crossing())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// `x1 >= 0`
    Left,
    /// `x1 <= 1`
    Right,
    /// `x2 >= 0`
    Bottom,
}

#[derive(Clone, Debug)]
pub enum Violated {
    Boundary(Boundary),
    Line(CostLine),
}

/// Either the query lies in `K`, or `a . z <= bound` holds for every `z`
/// in `K` while `a . q > bound` for the query `q`.
#[derive(Clone, Debug)]
pub enum SeparationResult {
    Inside,
    Separator {
        a: (ExactScalar, ExactScalar),
        bound: ExactScalar,
        violated: Violated,
    },
}

impl SeparationResult {
    pub fn is_inside(&self) -> bool {
        matches!(self, SeparationResult::Inside)
    }
}

fn boundary(a1: i64, a2: i64, bound: i64, which: Boundary) -> SeparationResult {
    SeparationResult::Separator {
        a: (ExactScalar::from_int(a1), ExactScalar::from_int(a2)),
        bound: ExactScalar::from_int(bound),
        violated: Violated::Boundary(which),
    }
}

pub fn separation_oracle(q: &PlanePoint, dist: &SourceDist) -> Result<SeparationResult> {
    if q.x1.is_negative() {
        return Ok(boundary(-1, 0, 0, Boundary::Left));
    }
    if q.x1 > ExactScalar::one() {
        return Ok(boundary(1, 0, 1, Boundary::Right));
    }
    if q.x2.is_negative() {
        return Ok(boundary(0, -1, 0, Boundary::Bottom));
    }
    let env = envelope_at(&q.x1, dist)?;
    if q.x2 <= env.m() {
        return Ok(SeparationResult::Inside);
    }
    let line = if env.e0 < env.e1 { env.line0 } else { env.line1 };
    // z2 - slope*z1 <= intercept on K
    Ok(SeparationResult::Separator {
        a: (-&line.slope, ExactScalar::one()),
        bound: line.intercept.clone(),
        violated: Violated::Line(line),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codetree::NodeKind;
    use crate::numeric::{dyadic_grid, make_dist};
    use proptest::prelude::*;

    fn q(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    fn dist(v: &[&str]) -> SourceDist {
        make_dist(v.iter().map(|s| q(s)).collect()).unwrap()
    }

    fn line(c: &str, s: &str) -> CostLine {
        let tree = CodeTree::from_codewords(
            TreeKind::T0,
            2,
            &[(Some(0), "0", NodeKind::Leaf), (Some(1), "1", NodeKind::Leaf)],
        )
        .unwrap();
        CostLine {
            intercept: q(c),
            slope: q(s),
            tree,
        }
    }

    #[test]
    fn line_of_examples() {
        let d = dist(&["3/4", "1/4"]);
        let t1 = best_tree(&q("0"), &d, TreeKind::T1).unwrap().tree;
        let g = line_of(&t1, &d).unwrap();
        assert_eq!((g.intercept, g.slope), (q("5/4"), q("-1")));
        let t0 = best_tree(&q("0"), &d, TreeKind::T0).unwrap().tree;
        assert_eq!(line_of(&t0, &d).unwrap().slope, q("0"));

        // L = 3/2, q1 = 1/4
        let d = dist(&["1/2", "1/4", "1/4"]);
        let t = CodeTree::from_codewords(
            TreeKind::T0,
            3,
            &[
                (Some(0), "0", NodeKind::Leaf),
                (Some(1), "1", NodeKind::Master),
                (Some(2), "100", NodeKind::Leaf),
            ],
        )
        .unwrap();
        let f = line_of(&t, &d).unwrap();
        assert_eq!((f.intercept, f.slope), (q("3/2"), q("1/4")));
    }

    #[test]
    fn envelope_examples() {
        let d = dist(&["3/4", "1/4"]);
        let e = envelope_at(&q("1/2"), &d).unwrap();
        assert_eq!((e.e0.clone(), e.e1.clone()), (q("1"), q("3/4")));
        assert_eq!(e.m(), q("3/4"));
        assert!(envelope_at(&q("2"), &d).is_err());
    }

    #[test]
    fn envelope_signs_at_ends() {
        for n in 2..=5 {
            for d in dyadic_grid(n, 4) {
                let e = envelope_at(&q("0"), &d).unwrap();
                assert!(e.e0 < e.e1);
                let e = envelope_at(&q("1"), &d).unwrap();
                assert!(e.e0 >= e.e1);
            }
        }
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(
            intersect_lines(&line("1", "1"), &line("2", "-1")),
            Intersection::Point(PlanePoint::new(q("1/2"), q("3/2")))
        );
        assert_eq!(
            intersect_lines(&line("1", "0"), &line("5/4", "-1")),
            Intersection::Point(PlanePoint::new(q("1/4"), q("1")))
        );
        assert_eq!(intersect_lines(&line("1", "0"), &line("2", "0")), Intersection::Parallel);
    }

    #[test]
    fn crossing_examples() {
        let p = crossing_in_interval(&q("15/64"), &q("1/4"), &[line("1", "0")], &[line("5/4", "-1")]).unwrap();
        assert_eq!(p, PlanePoint::new(q("1/4"), q("1")));

        // y = 1 twice against a line through (3/8, 1)
        let p = crossing_in_interval(
            &q("1/4"),
            &q("1/2"),
            &[line("1", "0"), line("1", "0")],
            &[line("11/8", "-1")],
        )
        .unwrap();
        assert_eq!(p, PlanePoint::new(q("3/8"), q("1")));

        assert!(matches!(
            crossing_in_interval(&q("0"), &q("1/8"), &[line("1", "0")], &[line("5/4", "-1")]),
            Err(Error::NoCrossing { .. })
        ));
    }

    #[test]
    fn crossing_with_breakpoints_inside() {
        // lines0 bend at 1/2, lines1 bend at 3/4, crossing at 5/12
        let l0 = [line("1/2", "1"), line("3/4", "1/2")];
        let l1 = [line("3/2", "-1"), line("9/8", "-1/2")];
        let p = crossing_in_interval(&q("0"), &q("1"), &l0, &l1).unwrap();
        assert_eq!(lower(&l0, &p.x1), lower(&l1, &p.x1));
        assert_eq!(p.x1, q("5/12"));
    }

    #[test]
    fn separation_examples() {
        let d = dist(&["3/4", "1/4"]);
        let r = separation_oracle(&PlanePoint::new(q("-1/10"), q("1/2")), &d).unwrap();
        match r {
            SeparationResult::Separator { a, violated, .. } => {
                assert_eq!(a, (q("-1"), q("0")));
                assert!(matches!(violated, Violated::Boundary(Boundary::Left)));
            }
            _ => panic!("expected separator"),
        }
        assert!(separation_oracle(&PlanePoint::new(q("1/2"), q("1/2")), &d).unwrap().is_inside());
        match separation_oracle(&PlanePoint::new(q("1/2"), q("2")), &d).unwrap() {
            SeparationResult::Separator {
                violated: Violated::Line(l),
                a,
                bound,
            } => {
                assert_eq!((l.intercept, l.slope), (q("5/4"), q("-1")));
                assert_eq!(a, (q("1"), q("1")));
                assert_eq!(bound, q("5/4"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let r = separation_oracle(&PlanePoint::new(q("3/2"), q("0")), &d).unwrap();
        assert!(matches!(r, SeparationResult::Separator { violated: Violated::Boundary(Boundary::Right), .. }));
        let r = separation_oracle(&PlanePoint::new(q("1/2"), q("-1")), &d).unwrap();
        assert!(matches!(r, SeparationResult::Separator { violated: Violated::Boundary(Boundary::Bottom), .. }));
    }

    fn arb_dist() -> impl Strategy<Value = SourceDist> {
        (2usize..=5, 3u32..=5, any::<u64>()).prop_map(|(n, b, seed)| {
            use rand::SeedableRng;
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            crate::numeric::random_dist(&mut rng, n, b).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn separator_is_sound(d in arb_dist(), x1 in -8i64..=40, x2 in -8i64..=120) {
            let query = PlanePoint::new(ExactScalar::ratio(x1, 32).unwrap(), ExactScalar::ratio(x2, 32).unwrap());
            match separation_oracle(&query, &d).unwrap() {
                SeparationResult::Inside => {
                    let m = envelope_at(&query.x1, &d).unwrap().m();
                    prop_assert!(!query.x2.is_negative() && query.x2 <= m);
                }
                SeparationResult::Separator { a, bound, .. } => {
                    prop_assert!(&a.0 * &query.x1 + &a.1 * &query.x2 > bound);
                    for k in 0..=16 {
                        let z1 = ExactScalar::ratio(k, 16).unwrap();
                        let top = envelope_at(&z1, &d).unwrap().m();
                        for z2 in [ExactScalar::zero(), top.half(), top] {
                            prop_assert!(&a.0 * &z1 + &a.1 * &z2 <= bound);
                        }
                    }
                }
            }
        }

        #[test]
        fn region_fits_the_start_ball(d in arb_dist()) {
            let bound = ExactScalar::from_int(3 * d.len() as i64);
            for k in 0..=16 {
                let e = envelope_at(&ExactScalar::ratio(k, 16).unwrap(), &d).unwrap();
                prop_assert!(e.e0 <= bound && e.e1 <= bound);
            }
        }
    }
}
