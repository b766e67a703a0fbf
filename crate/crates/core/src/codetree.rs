//! Code trees for the two coding states.
//!
//! A tree is stored as a flat node list (preorder, 0-child first) with
//! parent links and edge labels. Construction does not validate; call
//! [`CodeTree::validate`] or [`CodeTree::check`] before relying on the
//! structure. Symbols are indices into the sorted [`SourceDist`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{ExactScalar, SourceDist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeKind {
    T0,
    T1,
}

impl TreeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TreeKind::T0 => "T0",
            TreeKind::T1 => "T1",
        }
    }
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Complete,
    Master,
    Slave,
    Leaf,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Complete => "complete",
            NodeKind::Master => "master",
            NodeKind::Slave => "slave",
            NodeKind::Leaf => "leaf",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "complete" => NodeKind::Complete,
            "master" => NodeKind::Master,
            "slave" => NodeKind::Slave,
            "leaf" => NodeKind::Leaf,
            _ => return None,
        })
    }

    /// Leaves and masters are the only nodes that can carry a codeword.
    pub fn carries_codeword(self) -> bool {
        matches!(self, NodeKind::Leaf | NodeKind::Master)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub parent: Option<usize>,
    /// Label of the edge from the parent; `None` only for the root.
    pub edge: Option<u8>,
    pub kind: NodeKind,
    pub symbol: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodeTree {
    kind: TreeKind,
    n: usize,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    NoRoot,
    MultipleRoots,
    BadParent,
    BadEdge,
    DuplicateChild,
    Unreachable,
    CompleteMissingChild,
    IncompleteHasOneChild,
    IncompleteMissingChild,
    LeafHasChildren,
    MasterChildNotSlave,
    SymbolOnNonCodeword,
    SymbolOutOfRange,
    SymbolDuplicated,
    SymbolMissing,
    RootNotComplete,
    T1RootZeroChildNotSlave,
    T1RootSlaveShape,
    UnassignedCodeword,
    SlaveUnderSlave,
    TooManyNodes,
    MasterWithoutDescendants,
}

impl ViolationKind {
    pub fn label(self) -> &'static str {
        use ViolationKind::*;
        match self {
            NoRoot => "tree has no root",
            MultipleRoots => "tree has multiple roots",
            BadParent => "parent index out of range",
            BadEdge => "edge label must be 0/1 on non-root nodes and absent on the root",
            DuplicateChild => "two children on the same edge",
            Unreachable => "node unreachable from root (cycle)",
            CompleteMissingChild => "complete node must have both children",
            IncompleteHasOneChild => "master/slave nodes have only a 0-child",
            IncompleteMissingChild => "master/slave node without a child",
            LeafHasChildren => "leaf must not have children",
            MasterChildNotSlave => "master child must be Slave",
            SymbolOnNonCodeword => "symbols only on leaves/masters",
            SymbolOutOfRange => "symbol index out of range",
            SymbolDuplicated => "symbol assigned more than once",
            SymbolMissing => "symbol not assigned",
            RootNotComplete => "root must be complete",
            T1RootZeroChildNotSlave => "T1 root 0-child must be Slave",
            T1RootSlaveShape => "T1 root slave must have only a 1-child",
            UnassignedCodeword => "leaf/master without symbol",
            SlaveUnderSlave => "slave has a slave child",
            TooManyNodes => "more than 3n nodes",
            MasterWithoutDescendants => "master without assigned descendants",
        }
    }

    /// Violations of the reduced-tree conditions only. These are allowed
    /// (as warnings) on user-supplied trees but never on optimizer output.
    pub fn is_reduced_only(self) -> bool {
        use ViolationKind::*;
        matches!(
            self,
            UnassignedCodeword | SlaveUnderSlave | TooManyNodes | MasterWithoutDescendants
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Offending node, or the symbol for `SymbolMissing`.
    pub at: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.at) {
            (ViolationKind::SymbolMissing, Some(s)) => write!(f, "{} (symbol {s})", self.kind.label()),
            (_, Some(i)) => write!(f, "{} (node {i})", self.kind.label()),
            (_, None) => f.write_str(self.kind.label()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMetrics {
    /// Expected codeword length in bits per symbol.
    pub l: ExactScalar,
    /// Probability of returning to the first tree (symbols on leaves).
    pub q0: ExactScalar,
    /// Probability of switching to the second tree (symbols on masters).
    pub q1: ExactScalar,
}

impl CodeTree {
    /// Wraps a raw node list. No validation is performed.
    pub fn new(kind: TreeKind, n: usize, nodes: Vec<Node>) -> Self {
        Self { kind, n, nodes }
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    /// Alphabet size the tree is built for.
    pub fn alphabet_size(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn nodes_mut(&mut self) -> &mut Vec<Node> {
        &mut self.nodes
    }

    pub fn root(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.parent.is_none())
    }

    /// `children()[i] = [0-child, 1-child]` of node `i`. Malformed links
    /// are ignored; use `validate` to detect them.
    pub fn children(&self) -> Vec<[Option<usize>; 2]> {
        let mut ch = vec![[None, None]; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let (Some(p), Some(e)) = (node.parent, node.edge) {
                if p < self.nodes.len() && e <= 1 && ch[p][e as usize].is_none() {
                    ch[p][e as usize] = Some(i);
                }
            }
        }
        ch
    }

    /// Edge labels from the root down to `node`.
    pub fn codeword(&self, node: usize) -> Vec<u8> {
        let mut bits = Vec::new();
        let mut cur = node;
        let mut guard = 0;
        while let Some(p) = self.nodes[cur].parent {
            bits.push(self.nodes[cur].edge.unwrap_or(0));
            cur = p;
            guard += 1;
            if guard > self.nodes.len() {
                break;
            }
        }
        bits.reverse();
        bits
    }

    pub fn depth(&self, node: usize) -> usize {
        self.codeword(node).len()
    }

    /// Node holding each symbol, or `None` when unassigned.
    pub fn symbol_nodes(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(s) = node.symbol {
                if s < self.n && out[s].is_none() {
                    out[s] = Some(i);
                }
            }
        }
        out
    }

    pub fn height(&self) -> usize {
        (0..self.nodes.len()).map(|i| self.depth(i)).max().unwrap_or(0)
    }

    /// Every violated invariant, structural and reduced. An empty list means
    /// the tree is a valid reduced tree.
    pub fn validate(&self) -> Vec<Violation> {
        use ViolationKind::*;
        let mut out = Vec::new();
        let mut push = |kind, at| out.push(Violation { kind, at });
        let len = self.nodes.len();

        // graph shape
        let roots: Vec<usize> = (0..len).filter(|&i| self.nodes[i].parent.is_none()).collect();
        match roots.len() {
            0 => push(NoRoot, None),
            1 => {}
            _ => {
                for &r in &roots[1..] {
                    push(MultipleRoots, Some(r));
                }
            }
        }
        let mut slots = vec![[None::<usize>; 2]; len];
        for (i, node) in self.nodes.iter().enumerate() {
            match (node.parent, node.edge) {
                (None, None) => {}
                (None, Some(_)) => push(BadEdge, Some(i)),
                (Some(p), e) => {
                    if p >= len || p == i {
                        push(BadParent, Some(i));
                    } else {
                        match e {
                            Some(e @ (0 | 1)) => {
                                if slots[p][e as usize].is_some() {
                                    push(DuplicateChild, Some(i));
                                } else {
                                    slots[p][e as usize] = Some(i);
                                }
                            }
                            _ => push(BadEdge, Some(i)),
                        }
                    }
                }
            }
        }
        if roots.len() == 1 {
            let mut seen = vec![false; len];
            let mut stack = vec![roots[0]];
            while let Some(v) = stack.pop() {
                if std::mem::replace(&mut seen[v], true) {
                    continue;
                }
                stack.extend(slots[v].iter().flatten());
            }
            for (i, s) in seen.iter().enumerate() {
                if !s {
                    push(Unreachable, Some(i));
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        let root = roots[0];
        let ch = slots;
        let mut push = |kind, at| out.push(Violation { kind, at });

        let t1_root_slave = match self.kind {
            TreeKind::T1 => ch[root][0],
            TreeKind::T0 => None,
        };

        // per-node structure
        for (i, node) in self.nodes.iter().enumerate() {
            let [c0, c1] = ch[i];
            match node.kind {
                NodeKind::Complete => {
                    if c0.is_none() || c1.is_none() {
                        push(CompleteMissingChild, Some(i));
                    }
                }
                NodeKind::Leaf => {
                    if c0.is_some() || c1.is_some() {
                        push(LeafHasChildren, Some(i));
                    }
                }
                NodeKind::Master | NodeKind::Slave => {
                    if Some(i) == t1_root_slave && node.kind == NodeKind::Slave {
                        // handled with the root rules below
                    } else {
                        if c1.is_some() {
                            push(IncompleteHasOneChild, Some(i));
                        }
                        if c0.is_none() {
                            push(IncompleteMissingChild, Some(i));
                        }
                    }
                    if node.kind == NodeKind::Master {
                        if let Some(c) = c0 {
                            if self.nodes[c].kind != NodeKind::Slave {
                                push(MasterChildNotSlave, Some(i));
                            }
                        }
                    }
                }
            }
        }

        // root rules
        if self.nodes[root].kind != NodeKind::Complete {
            push(RootNotComplete, Some(root));
        }
        if self.kind == TreeKind::T1 {
            if let Some(s) = ch[root][0] {
                if self.nodes[s].kind != NodeKind::Slave {
                    push(T1RootZeroChildNotSlave, Some(s));
                } else if ch[s][0].is_some() || ch[s][1].is_none() {
                    push(T1RootSlaveShape, Some(s));
                }
            }
        }

        // symbols
        let mut owner: Vec<Option<usize>> = vec![None; self.n];
        for (i, node) in self.nodes.iter().enumerate() {
            let Some(s) = node.symbol else { continue };
            if !node.kind.carries_codeword() {
                push(SymbolOnNonCodeword, Some(i));
            }
            if s >= self.n {
                push(SymbolOutOfRange, Some(i));
            } else if owner[s].is_some() {
                push(SymbolDuplicated, Some(i));
            } else {
                owner[s] = Some(i);
            }
        }
        for (s, o) in owner.iter().enumerate() {
            if o.is_none() {
                push(SymbolMissing, Some(s));
            }
        }

        // reduced-tree conditions
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind.carries_codeword() && node.symbol.is_none() {
                push(UnassignedCodeword, Some(i));
            }
            if node.kind == NodeKind::Slave {
                if let Some(p) = node.parent {
                    if self.nodes[p].kind == NodeKind::Slave {
                        push(SlaveUnderSlave, Some(i));
                    }
                }
            }
        }
        if len > 3 * self.n {
            push(TooManyNodes, None);
        }
        let assigned_below = subtree_has_symbol(&self.nodes, &ch, root);
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind == NodeKind::Master {
                let grandchild = ch[i][0].and_then(|s| ch[s][0]);
                if !grandchild.is_some_and(|g| assigned_below[g]) {
                    push(MasterWithoutDescendants, Some(i));
                }
            }
        }
        out
    }

    /// Errors on any violation that makes the tree unusable for coding;
    /// reduced-only violations are returned as warnings.
    pub fn check(&self) -> Result<Vec<Violation>> {
        let (warnings, errors): (Vec<_>, Vec<_>) = self
            .validate()
            .into_iter()
            .partition(|v| v.kind.is_reduced_only());
        if errors.is_empty() {
            Ok(warnings)
        } else {
            Err(Error::InvalidTree(errors))
        }
    }

    /// Expected length and transition probabilities under `dist`.
    pub fn metrics(&self, dist: &SourceDist) -> Result<TreeMetrics> {
        self.check()?;
        if dist.len() != self.n {
            return Err(Error::PairMismatch(format!(
                "tree has {} symbols, distribution has {}",
                self.n,
                dist.len()
            )));
        }
        Ok(self.metrics_unchecked(dist))
    }

    pub(crate) fn metrics_unchecked(&self, dist: &SourceDist) -> TreeMetrics {
        let mut l = ExactScalar::zero();
        let mut q0 = ExactScalar::zero();
        let mut q1 = ExactScalar::zero();
        for (i, node) in self.nodes.iter().enumerate() {
            let Some(s) = node.symbol else { continue };
            let p = dist.prob(s);
            l = l + p * ExactScalar::from_int(self.depth(i) as i64);
            match node.kind {
                NodeKind::Master => q1 = q1 + p,
                _ => q0 = q0 + p,
            }
        }
        TreeMetrics { l, q0, q1 }
    }

    /// Builds a tree from `(symbol, codeword, kind)` entries where `kind`
    /// is `Leaf` or `Master`. Intermediate nodes are inferred: two children
    /// make a complete node, one child a slave, none an unassigned leaf.
    /// Nodes are numbered in preorder.
    pub fn from_codewords(
        kind: TreeKind,
        n: usize,
        entries: &[(Option<usize>, &str, NodeKind)],
    ) -> Result<Self> {
        let mut marks: BTreeMap<Vec<u8>, (NodeKind, Option<usize>)> = BTreeMap::new();
        let mut present: std::collections::BTreeSet<Vec<u8>> = Default::default();
        present.insert(Vec::new());
        for &(sym, word, k) in entries {
            let bits: Vec<u8> = word
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::InvalidNumber(word.to_string())),
                })
                .collect::<Result<_>>()?;
            for j in 0..=bits.len() {
                present.insert(bits[..j].to_vec());
            }
            marks.insert(bits, (k, sym));
        }
        let mut nodes = Vec::new();
        fn walk(
            prefix: &mut Vec<u8>,
            parent: Option<usize>,
            present: &std::collections::BTreeSet<Vec<u8>>,
            marks: &BTreeMap<Vec<u8>, (NodeKind, Option<usize>)>,
            nodes: &mut Vec<Node>,
        ) {
            let has = |b: u8, prefix: &mut Vec<u8>| {
                prefix.push(b);
                let r = present.contains(prefix);
                prefix.pop();
                r
            };
            let h0 = has(0, prefix);
            let h1 = has(1, prefix);
            let (kind, symbol) = match marks.get(prefix) {
                Some(&m) => m,
                None => match (h0, h1) {
                    (true, true) => (NodeKind::Complete, None),
                    (false, false) => (NodeKind::Leaf, None),
                    _ => (NodeKind::Slave, None),
                },
            };
            let id = nodes.len();
            nodes.push(Node {
                parent,
                edge: prefix.last().copied().filter(|_| parent.is_some()),
                kind,
                symbol,
            });
            for (b, h) in [(0u8, h0), (1u8, h1)] {
                if h {
                    prefix.push(b);
                    walk(prefix, Some(id), present, marks, nodes);
                    prefix.pop();
                }
            }
        }
        walk(&mut Vec::new(), None, &present, &marks, &mut nodes);
        Ok(Self::new(kind, n, nodes))
    }

    /// Applies `map` to every assigned symbol.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> Self {
        let mut t = self.clone();
        for node in &mut t.nodes {
            node.symbol = node.symbol.map(&map);
        }
        t
    }

    /// Text form: a `tree` header followed by one `node` line per node.
    pub fn to_text(&self) -> String {
        let mut s = format!("tree {} n={}\n", self.kind, self.n);
        for (i, node) in self.nodes.iter().enumerate() {
            let opt = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
            s.push_str(&format!(
                "node {i} parent={} edge={} kind={} symbol={}\n",
                opt(node.parent),
                opt(node.edge.map(usize::from)),
                node.kind.as_str(),
                opt(node.symbol),
            ));
        }
        s
    }

    /// Parses the text form and rejects trees with structural errors.
    /// Reduced-only violations are tolerated.
    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut header: Option<(TreeKind, usize)> = None;
        let mut nodes: Vec<Node> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut words = line.split_whitespace();
            match words.next() {
                Some("tree") => {
                    if header.is_some() {
                        return Err(err(line_no, "duplicate tree header".into()));
                    }
                    let kind = match words.next() {
                        Some("T0") => TreeKind::T0,
                        Some("T1") => TreeKind::T1,
                        other => return Err(err(line_no, format!("unknown tree kind {other:?}"))),
                    };
                    let n = words
                        .next()
                        .and_then(|w| w.strip_prefix("n="))
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| err(line_no, "expected n=<count>".into()))?;
                    header = Some((kind, n));
                }
                Some("node") => {
                    if header.is_none() {
                        return Err(err(line_no, "node before tree header".into()));
                    }
                    let id: usize = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| err(line_no, "expected node id".into()))?;
                    if id < nodes.len() {
                        return Err(err(line_no, format!("node {id} declared twice (two parents)")));
                    }
                    if id != nodes.len() {
                        return Err(err(line_no, format!("expected node id {}", nodes.len())));
                    }
                    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
                    for w in words {
                        let (k, v) = w
                            .split_once('=')
                            .ok_or_else(|| err(line_no, format!("malformed field {w:?}")))?;
                        if fields.insert(k, v).is_some() {
                            return Err(err(line_no, format!("field {k} given twice")));
                        }
                    }
                    let get = |k: &str| {
                        fields
                            .get(k)
                            .copied()
                            .ok_or_else(|| err(line_no, format!("missing field {k}")))
                    };
                    let opt_num = |k: &str| -> Result<Option<usize>> {
                        match get(k)? {
                            "-" => Ok(None),
                            v => v
                                .parse()
                                .map(Some)
                                .map_err(|_| err(line_no, format!("bad {k} value {v:?}"))),
                        }
                    };
                    let parent = opt_num("parent")?;
                    let edge = match get("edge")? {
                        "-" => None,
                        "0" => Some(0),
                        "1" => Some(1),
                        v => return Err(err(line_no, format!("bad edge {v:?}"))),
                    };
                    let kind = NodeKind::parse(get("kind")?)
                        .ok_or_else(|| err(line_no, "unknown node kind".into()))?;
                    let symbol = opt_num("symbol")?;
                    if fields.len() != 4 {
                        return Err(err(line_no, "unexpected extra fields".into()));
                    }
                    nodes.push(Node {
                        parent,
                        edge,
                        kind,
                        symbol,
                    });
                }
                Some(w) => return Err(err(line_no, format!("unexpected record {w:?}"))),
                None => unreachable!(),
            }
        }
        let (kind, n) = header.ok_or_else(|| err(1, "missing tree header".into()))?;
        let tree = Self::new(kind, n, nodes);
        tree.check()?;
        Ok(tree)
    }
}

fn subtree_has_symbol(nodes: &[Node], ch: &[[Option<usize>; 2]], root: usize) -> Vec<bool> {
    let mut has = vec![false; nodes.len()];
    // iterative postorder
    let mut order = Vec::with_capacity(nodes.len());
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(ch[v].iter().flatten());
    }
    for &v in order.iter().rev() {
        has[v] = nodes[v].symbol.is_some() || ch[v].iter().flatten().any(|&c| has[c]);
    }
    has
}

impl fmt::Display for CodeTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
