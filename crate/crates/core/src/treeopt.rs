//! Exact tree optimization for a fixed cost parameter `x`.
//!
//! The first-tree objective is `L(T) + x*q1(T)`, the second-tree objective
//! `L(T) - x*q0(T)`. Both are minimized by enumerating every reduced tree
//! shape and, per shape, placing the largest probabilities on the cheapest
//! slots (slot cost `depth + x` for a master in the first tree, `depth - x`
//! for a leaf in the second tree, plain `depth` otherwise).
//!
//! Shapes are generated from three building blocks: a leaf, a complete
//! node with two sub-shapes, and a master node followed by its slave and a
//! non-empty grandchild sub-shape. The second tree's root always hangs its
//! 0-side sub-shape below a slave on edge `1`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::codec::{pair_cost, CodePair};
use crate::codetree::{CodeTree, Node, NodeKind, TreeKind, TreeMetrics};
use crate::error::{Error, Result};
use crate::numeric::{ExactScalar, SourceDist};

/// Largest alphabet accepted by [`best_tree`].
pub const N_MAX: usize = 8;
/// Largest alphabet accepted by [`exhaustive_optimum`] and [`distinct_lines`].
pub const N_ORACLE: usize = 5;

#[derive(Debug, PartialEq, Eq, Hash)]
enum ShapeNode {
    Leaf,
    Complete(Arc<ShapeNode>, Arc<ShapeNode>),
    /// Master, its slave, and the grandchild sub-shape.
    Master(Arc<ShapeNode>),
    /// Slave that is not below a master; dominated, only generated on request.
    FreeSlave(Arc<ShapeNode>),
    /// Second-tree root: (sub-shape under the slave's 1-edge, 1-child).
    T1Root(Arc<ShapeNode>, Arc<ShapeNode>),
}

impl ShapeNode {
    fn node_count(&self) -> usize {
        match self {
            ShapeNode::Leaf => 1,
            ShapeNode::Complete(a, b) => 1 + a.node_count() + b.node_count(),
            ShapeNode::Master(g) => 2 + g.node_count(),
            ShapeNode::FreeSlave(c) => 1 + c.node_count(),
            ShapeNode::T1Root(a, b) => 2 + a.node_count() + b.node_count(),
        }
    }
}

/// An assignable position in a shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub depth: usize,
    pub is_master: bool,
}

/// A reduced tree skeleton without symbols. Slots are listed in preorder.
#[derive(Clone, Debug)]
pub struct TreeShape {
    kind: TreeKind,
    root: Arc<ShapeNode>,
    slots: Vec<Slot>,
    node_count: usize,
}

impl TreeShape {
    fn new(kind: TreeKind, root: Arc<ShapeNode>) -> Self {
        let mut slots = Vec::new();
        collect_slots(&root, 0, &mut slots);
        let node_count = root.node_count();
        Self {
            kind,
            root,
            slots,
            node_count,
        }
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Materializes the shape with `assignment[slot] = symbol`.
    pub fn to_tree(&self, assignment: &[usize]) -> CodeTree {
        assert_eq!(assignment.len(), self.slots.len());
        let mut nodes = Vec::with_capacity(self.node_count);
        let mut next_slot = 0;
        flatten(&self.root, None, None, assignment, &mut next_slot, &mut nodes);
        CodeTree::new(self.kind, self.slots.len(), nodes)
    }

    /// The shape with no symbols assigned.
    pub fn skeleton(&self) -> CodeTree {
        let mut t = self.to_tree(&(0..self.slots.len()).collect::<Vec<_>>());
        for node in t.nodes_mut() {
            node.symbol = None;
        }
        t
    }
}

fn collect_slots(node: &ShapeNode, depth: usize, out: &mut Vec<Slot>) {
    match node {
        ShapeNode::Leaf => out.push(Slot {
            depth,
            is_master: false,
        }),
        ShapeNode::Complete(a, b) => {
            collect_slots(a, depth + 1, out);
            collect_slots(b, depth + 1, out);
        }
        ShapeNode::Master(g) => {
            out.push(Slot {
                depth,
                is_master: true,
            });
            collect_slots(g, depth + 2, out);
        }
        ShapeNode::FreeSlave(c) => collect_slots(c, depth + 1, out),
        ShapeNode::T1Root(a, b) => {
            collect_slots(a, depth + 2, out);
            collect_slots(b, depth + 1, out);
        }
    }
}

fn flatten(
    node: &ShapeNode,
    parent: Option<usize>,
    edge: Option<u8>,
    assignment: &[usize],
    next_slot: &mut usize,
    nodes: &mut Vec<Node>,
) {
    let id = nodes.len();
    let mut push = |kind, symbol, parent, edge| {
        nodes.push(Node {
            parent,
            edge,
            kind,
            symbol,
        });
        nodes.len() - 1
    };
    match node {
        ShapeNode::Leaf => {
            let s = assignment[*next_slot];
            *next_slot += 1;
            push(NodeKind::Leaf, Some(s), parent, edge);
        }
        ShapeNode::Complete(a, b) => {
            push(NodeKind::Complete, None, parent, edge);
            flatten(a, Some(id), Some(0), assignment, next_slot, nodes);
            flatten(b, Some(id), Some(1), assignment, next_slot, nodes);
        }
        ShapeNode::Master(g) => {
            let s = assignment[*next_slot];
            *next_slot += 1;
            push(NodeKind::Master, Some(s), parent, edge);
            let slave = push(NodeKind::Slave, None, Some(id), Some(0));
            flatten(g, Some(slave), Some(0), assignment, next_slot, nodes);
        }
        ShapeNode::FreeSlave(c) => {
            push(NodeKind::Slave, None, parent, edge);
            flatten(c, Some(id), Some(0), assignment, next_slot, nodes);
        }
        ShapeNode::T1Root(a, b) => {
            push(NodeKind::Complete, None, parent, edge);
            let slave = push(NodeKind::Slave, None, Some(id), Some(0));
            flatten(a, Some(slave), Some(1), assignment, next_slot, nodes);
            flatten(b, Some(id), Some(1), assignment, next_slot, nodes);
        }
    }
}

type SubMemo = HashMap<(usize, bool), Arc<Vec<Arc<ShapeNode>>>>;

/// Sub-shapes with `k` slots whose root is not a slave.
fn non_slave(k: usize, memo: &mut SubMemo, free_slaves: bool) -> Arc<Vec<Arc<ShapeNode>>> {
    if let Some(v) = memo.get(&(k, false)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if k == 1 {
        out.push(Arc::new(ShapeNode::Leaf));
    } else {
        for g in non_slave(k - 1, memo, free_slaves).iter() {
            out.push(Arc::new(ShapeNode::Master(g.clone())));
        }
        for i in 1..k {
            let left = any_root(i, memo, free_slaves);
            let right = any_root(k - i, memo, free_slaves);
            for a in left.iter() {
                for b in right.iter() {
                    out.push(Arc::new(ShapeNode::Complete(a.clone(), b.clone())));
                }
            }
        }
    }
    let out = Arc::new(out);
    memo.insert((k, false), out.clone());
    out
}

/// Sub-shapes with `k` slots that may hang below a complete node.
fn any_root(k: usize, memo: &mut SubMemo, free_slaves: bool) -> Arc<Vec<Arc<ShapeNode>>> {
    if !free_slaves {
        return non_slave(k, memo, false);
    }
    if let Some(v) = memo.get(&(k, true)) {
        return v.clone();
    }
    let base = non_slave(k, memo, true);
    let mut out: Vec<_> = base.iter().cloned().collect();
    out.extend(base.iter().map(|s| Arc::new(ShapeNode::FreeSlave(s.clone()))));
    let out = Arc::new(out);
    memo.insert((k, true), out.clone());
    out
}

pub(crate) fn generate_shapes(n: usize, kind: TreeKind, free_slaves: bool) -> Vec<TreeShape> {
    let mut memo = SubMemo::new();
    let mut out = Vec::new();
    for i in 1..n {
        let right = any_root(n - i, &mut memo, free_slaves);
        let left = match kind {
            TreeKind::T0 => any_root(i, &mut memo, free_slaves),
            TreeKind::T1 => non_slave(i, &mut memo, free_slaves),
        };
        for a in left.iter() {
            for b in right.iter() {
                let root = match kind {
                    TreeKind::T0 => ShapeNode::Complete(a.clone(), b.clone()),
                    TreeKind::T1 => ShapeNode::T1Root(a.clone(), b.clone()),
                };
                if root.node_count() <= 3 * n {
                    out.push(TreeShape::new(kind, Arc::new(root)));
                }
            }
        }
    }
    out
}

fn cached_shapes(n: usize, kind: TreeKind) -> Arc<Vec<TreeShape>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, TreeKind), Arc<Vec<TreeShape>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("shape cache poisoned").get(&(n, kind)) {
        return v.clone();
    }
    let shapes = Arc::new(generate_shapes(n, kind, false));
    cache
        .lock()
        .expect("shape cache poisoned")
        .entry((n, kind))
        .or_insert(shapes)
        .clone()
}

/// Every reduced shape with exactly `n` slots, each once.
pub fn enumerate_shapes(n: usize, kind: TreeKind) -> Result<Vec<TreeShape>> {
    if n > N_MAX {
        return Err(Error::TooLarge {
            what: "shape enumeration",
            n,
            cap: N_MAX,
        });
    }
    if n < 2 {
        return Ok(Vec::new());
    }
    Ok(cached_shapes(n, kind).as_ref().clone())
}

/// Minimizer of the tree objective at a given `x`.
#[derive(Clone, Debug)]
pub struct BestTree {
    pub tree: CodeTree,
    /// `L + x*q1` for the first tree, `L - x*q0` for the second.
    pub value: ExactScalar,
    pub metrics: TreeMetrics,
}

/// `x` as a reduced fraction `num/den` with `den > 0`.
struct Param {
    num: BigInt,
    den: BigInt,
}

impl Param {
    fn new(x: &ExactScalar) -> Self {
        Self {
            num: x.numer().clone(),
            den: x.denom().clone(),
        }
    }

    /// Compares the integer `k` with `x`.
    fn cmp_int(&self, k: i64) -> Ordering {
        (BigInt::from(k) * &self.den).cmp(&self.num)
    }
}

/// Integer bookkeeping for one candidate: everything in units of `2^-b`.
struct Candidate {
    shape: usize,
    assignment: Vec<usize>,
    l_units: BigInt,
    q_units: BigInt,
}

/// Canonical assignment for one shape: slots sorted by cost (ties: leaves
/// first, then preorder), largest probability to the cheapest slot.
fn assign(shape: &TreeShape, kind: TreeKind, x: &Param, units: &[BigInt]) -> (Vec<usize>, BigInt, BigInt) {
    let slots = shape.slots();
    let mut order: Vec<usize> = (0..slots.len()).collect();
    // shift in {0, 1}: cost = depth + sign*x*shift
    let shift = |s: &Slot| -> i64 {
        match kind {
            TreeKind::T0 => i64::from(s.is_master),
            TreeKind::T1 => -i64::from(!s.is_master),
        }
    };
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&slots[a], &slots[b]);
        // depth_a + x*ma  vs  depth_b + x*mb   <=>  (depth_a - depth_b) vs x*(mb - ma)
        let dd = sa.depth as i64 - sb.depth as i64;
        let dm = shift(sb) - shift(sa);
        let by_cost = match dm {
            0 => dd.cmp(&0),
            1 => x.cmp_int(dd),
            -1 => x.cmp_int(-dd).reverse(),
            _ => unreachable!(),
        };
        by_cost
            .then(sa.is_master.cmp(&sb.is_master))
            .then(a.cmp(&b))
    });
    let mut assignment = vec![0; slots.len()];
    let mut l_units = BigInt::zero();
    let mut q_units = BigInt::zero();
    for (sym, &slot) in order.iter().enumerate() {
        assignment[slot] = sym;
        let s = &slots[slot];
        l_units += &units[sym] * BigInt::from(s.depth);
        let counts = match kind {
            TreeKind::T0 => s.is_master,
            TreeKind::T1 => !s.is_master,
        };
        if counts {
            q_units += &units[sym];
        }
    }
    (assignment, l_units, q_units)
}

/// Orders two candidates by objective value, then by the tie rule:
/// smaller `q1` for the first tree, larger `q0` for the second.
fn cmp_candidates(kind: TreeKind, x: &Param, a: &Candidate, b: &Candidate) -> Ordering {
    // value * 2^b * den = l*den +/- num*q
    let sign = match kind {
        TreeKind::T0 => BigInt::one(),
        TreeKind::T1 => -BigInt::one(),
    };
    let va = &a.l_units * &x.den + &sign * &x.num * &a.q_units;
    let vb = &b.l_units * &x.den + &sign * &x.num * &b.q_units;
    va.cmp(&vb).then_with(|| match kind {
        TreeKind::T0 => a.q_units.cmp(&b.q_units),
        TreeKind::T1 => b.q_units.cmp(&a.q_units),
    })
}

pub(crate) fn best_tree_unchecked(x: &ExactScalar, dist: &SourceDist, kind: TreeKind) -> Result<BestTree> {
    let n = dist.len();
    if n > N_MAX {
        return Err(Error::TooLarge {
            what: "tree optimization",
            n,
            cap: N_MAX,
        });
    }
    let shapes = cached_shapes(n, kind);
    let units = dist.units();
    let param = Param::new(x);
    let mut best: Option<Candidate> = None;
    for (idx, shape) in shapes.iter().enumerate() {
        let (assignment, l_units, q_units) = assign(shape, kind, &param, &units);
        let cand = Candidate {
            shape: idx,
            assignment,
            l_units,
            q_units,
        };
        let replace = match &best {
            None => true,
            Some(cur) => match cmp_candidates(kind, &param, &cand, cur) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    let a = shapes[cand.shape].to_tree(&cand.assignment).to_text();
                    let b = shapes[cur.shape].to_tree(&cur.assignment).to_text();
                    a < b
                }
            },
        };
        if replace {
            best = Some(cand);
        }
    }
    let best = best.expect("n >= 2 yields at least one shape");
    let tree = shapes[best.shape].to_tree(&best.assignment);
    let metrics = tree.metrics_unchecked(dist);
    let value = match kind {
        TreeKind::T0 => &metrics.l + x * &metrics.q1,
        TreeKind::T1 => &metrics.l - x * &metrics.q0,
    };
    Ok(BestTree {
        tree,
        value,
        metrics,
    })
}

/// Optimal first-tree (`L + x*q1`) or second-tree (`L - x*q0`) code tree
/// for `x` in `[0, 1]`.
pub fn best_tree(x: &ExactScalar, dist: &SourceDist, kind: TreeKind) -> Result<BestTree> {
    if x.is_negative() || *x > ExactScalar::one() {
        return Err(Error::OutOfDomain(x.to_string()));
    }
    best_tree_unchecked(x, dist, kind)
}

fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    // Heap's algorithm
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// A distinct `(L, q)` pair realised by some tree, with one witness.
/// `q` is `q1` for the first tree and `q0` for the second.
#[derive(Clone, Debug)]
pub struct LineRecord {
    pub l: ExactScalar,
    pub q: ExactScalar,
    pub tree: CodeTree,
}

fn distinct_units(dist: &SourceDist, kind: TreeKind) -> Vec<(BigInt, BigInt, usize, Vec<usize>)> {
    let n = dist.len();
    let shapes = cached_shapes(n, kind);
    let units = dist.units();
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut out = Vec::new();
    for (idx, shape) in shapes.iter().enumerate() {
        let slots = shape.slots();
        for_each_permutation(n, |perm| {
            // perm[slot] = symbol
            let mut l = BigInt::zero();
            let mut q = BigInt::zero();
            for (slot, &sym) in perm.iter().enumerate() {
                l += &units[sym] * BigInt::from(slots[slot].depth);
                let counts = match kind {
                    TreeKind::T0 => slots[slot].is_master,
                    TreeKind::T1 => !slots[slot].is_master,
                };
                if counts {
                    q += &units[sym];
                }
            }
            let key = (l.clone(), q.clone());
            if !seen.contains_key(&key) {
                seen.insert(key, out.len());
                out.push((l, q, idx, perm.to_vec()));
            }
        });
    }
    out
}

/// Every distinct line `(L, q)` over all reduced trees and all symbol
/// assignments, found by full enumeration.
pub fn distinct_lines(dist: &SourceDist, kind: TreeKind) -> Result<Vec<LineRecord>> {
    let n = dist.len();
    if n > N_ORACLE {
        return Err(Error::TooLarge {
            what: "line enumeration",
            n,
            cap: N_ORACLE,
        });
    }
    let shapes = cached_shapes(n, kind);
    let scale = ExactScalar::pow2(-(dist.bits() as i64));
    Ok(distinct_units(dist, kind)
        .into_iter()
        .map(|(l, q, idx, perm)| LineRecord {
            l: ExactScalar::from_bigint(l) * &scale,
            q: ExactScalar::from_bigint(q) * &scale,
            tree: shapes[idx].to_tree(&perm),
        })
        .collect())
}

/// Globally optimal pair by evaluating the asymptotic cost of every
/// combination of distinct first-tree and second-tree lines.
pub fn exhaustive_optimum(dist: &SourceDist) -> Result<(CodePair, ExactScalar)> {
    let n = dist.len();
    if n > N_ORACLE {
        return Err(Error::TooLarge {
            what: "exhaustive optimum",
            n,
            cap: N_ORACLE,
        });
    }
    let lines0 = distinct_units(dist, TreeKind::T0);
    let lines1 = distinct_units(dist, TreeKind::T1);
    // cost * 2^b as num/den:
    //   q1 = 0:  L0
    //   else:    (q0' L0 + q1 L1) / (q0' + q1)
    let mut best: Option<(BigInt, BigInt, usize, usize)> = None;
    for (i, (l0, q1, _, _)) in lines0.iter().enumerate() {
        for (j, (l1, q0, _, _)) in lines1.iter().enumerate() {
            let (num, den) = if q1.is_zero() {
                (l0.clone(), BigInt::one())
            } else {
                (q0 * l0 + q1 * l1, q0 + q1)
            };
            let better = match &best {
                None => true,
                Some((bn, bd, _, _)) => &num * bd < bn * &den,
            };
            if better {
                best = Some((num, den, i, j));
            }
            if q1.is_zero() {
                // cost does not depend on the second tree
                break;
            }
        }
    }
    let (num, den, i, j) = best.expect("nonempty line sets");
    let shapes0 = cached_shapes(n, TreeKind::T0);
    let shapes1 = cached_shapes(n, TreeKind::T1);
    let t0 = shapes0[lines0[i].2].to_tree(&lines0[i].3);
    let t1 = shapes1[lines1[j].2].to_tree(&lines1[j].3);
    let (num, den) = {
        let g = num.gcd(&den);
        (num / &g, den / g)
    };
    let cost = ExactScalar::ratio(num, den)? * ExactScalar::pow2(-(dist.bits() as i64));
    let pair = CodePair::new(t0, t1)?;
    debug_assert_eq!(
        pair_cost(
            &pair.t0().metrics_unchecked(dist),
            &pair.t1().metrics_unchecked(dist)
        ),
        cost
    );
    Ok((pair, cost))
}
