//! Encoding and decoding with a pair of code trees, the asymptotic cost of a
//! pair, and the single-tree baselines (Huffman, entropy).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::codetree::{CodeTree, Node, NodeKind, TreeKind, TreeMetrics};
use crate::error::{Error, Result};
use crate::numeric::{ExactScalar, SourceDist};

/// Packed bit sequence, MSB first within each byte.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps packed bytes holding `len` bits. Padding bits must be zero.
    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Result<Self> {
        if len > bytes.len() * 8 || bytes.len() != len.div_ceil(8) {
            return Err(Error::Container(format!(
                "{} bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        if len % 8 != 0 {
            let mask = 0xffu8 >> (len % 8);
            if bytes[bytes.len() - 1] & mask != 0 {
                return Err(Error::Container("nonzero padding bits".into()));
            }
        }
        Ok(Self { bytes, len })
    }

    pub fn from_bit_str(s: &str) -> Result<Self> {
        let mut out = Self::new();
        for c in s.chars().filter(|c| !c.is_whitespace()) {
            match c {
                '0' => out.push(0),
                '1' => out.push(1),
                _ => return Err(Error::InvalidNumber(s.to_string())),
            }
        }
        Ok(out)
    }

    pub fn push(&mut self, bit: u8) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit != 0 {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        (i < self.len).then(|| (self.bytes[i / 8] >> (7 - i % 8)) & 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) == Some(1) { '1' } else { '0' })
            .collect()
    }
}

#[derive(Clone, Debug)]
struct TreeTables {
    nodes: Vec<Node>,
    children: Vec<[Option<usize>; 2]>,
    root: usize,
    /// Per symbol: codeword and whether it ends on a master node.
    book: Vec<(Vec<u8>, bool)>,
}

impl TreeTables {
    fn build(tree: &CodeTree) -> Self {
        let children = tree.children();
        let root = tree.root().expect("checked tree has a root");
        let book = tree
            .symbol_nodes()
            .into_iter()
            .map(|node| {
                let node = node.expect("checked tree assigns every symbol");
                (
                    tree.codeword(node),
                    tree.nodes()[node].kind == NodeKind::Master,
                )
            })
            .collect();
        Self {
            nodes: tree.nodes().to_vec(),
            children,
            root,
            book,
        }
    }
}

/// The two code trees used alternately by the encoder.
#[derive(Clone, Debug)]
pub struct CodePair {
    t0: CodeTree,
    t1: CodeTree,
    tables: [TreeTables; 2],
}

impl CodePair {
    pub fn new(t0: CodeTree, t1: CodeTree) -> Result<Self> {
        if t0.kind() != TreeKind::T0 || t1.kind() != TreeKind::T1 {
            return Err(Error::PairMismatch(format!(
                "expected (T0, T1), got ({}, {})",
                t0.kind(),
                t1.kind()
            )));
        }
        if t0.alphabet_size() != t1.alphabet_size() {
            return Err(Error::PairMismatch(format!(
                "alphabet sizes differ: {} vs {}",
                t0.alphabet_size(),
                t1.alphabet_size()
            )));
        }
        t0.check()?;
        t1.check()?;
        let tables = [TreeTables::build(&t0), TreeTables::build(&t1)];
        Ok(Self { t0, t1, tables })
    }

    pub fn t0(&self) -> &CodeTree {
        &self.t0
    }

    pub fn t1(&self) -> &CodeTree {
        &self.t1
    }

    pub fn alphabet_size(&self) -> usize {
        self.t0.alphabet_size()
    }

    /// Codeword of `symbol` in tree `state` as a `0`/`1` string.
    pub fn codeword(&self, state: usize, symbol: usize) -> String {
        self.tables[state].book[symbol]
            .0
            .iter()
            .map(|b| if *b == 1 { '1' } else { '0' })
            .collect()
    }
}

/// Encodes `message`, starting in the first tree and switching to the
/// second tree after every symbol that ends on a master node.
pub fn encode(message: &[usize], code: &CodePair) -> Result<BitStream> {
    let n = code.alphabet_size();
    let mut out = BitStream::new();
    let mut state = 0;
    for &sym in message {
        if sym >= n {
            return Err(Error::SymbolOutOfRange { symbol: sym, n });
        }
        let (bits, master) = &code.tables[state].book[sym];
        for &b in bits {
            out.push(b);
        }
        state = usize::from(*master);
    }
    Ok(out)
}

/// Decodes exactly `count` symbols. At a master node the decoder looks two
/// bits ahead: `00` continues into the subtree below the master, anything
/// else (or the end of the stream) ends the codeword there, since no
/// second-tree codeword starts with `00`.
pub fn decode(stream: &BitStream, count: usize, code: &CodePair) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    let mut pos = 0usize;
    let mut state = 0usize;
    while out.len() < count {
        let t = &code.tables[state];
        let mut v = t.root;
        loop {
            let node = &t.nodes[v];
            match node.kind {
                NodeKind::Leaf => {
                    let sym = node.symbol.ok_or(Error::Decode {
                        position: pos,
                        reason: "reached an unassigned leaf",
                    })?;
                    out.push(sym);
                    state = 0;
                    break;
                }
                NodeKind::Master
                    if !(stream.get(pos) == Some(0) && stream.get(pos + 1) == Some(0)) =>
                {
                    let sym = node.symbol.ok_or(Error::Decode {
                        position: pos,
                        reason: "reached an unassigned master node",
                    })?;
                    out.push(sym);
                    state = 1;
                    break;
                }
                _ => {
                    let bit = stream.get(pos).ok_or(Error::Decode {
                        position: pos,
                        reason: "stream exhausted",
                    })?;
                    v = t.children[v][bit as usize].ok_or(Error::Decode {
                        position: pos,
                        reason: "no branch for this bit",
                    })?;
                    pos += 1;
                }
            }
        }
    }
    if pos != stream.len() {
        return Err(Error::Decode {
            position: pos,
            reason: "trailing bits after the last symbol",
        });
    }
    Ok(out)
}

/// Long-run probabilities of coding with the first and second tree.
pub fn stationary(m0: &TreeMetrics, m1: &TreeMetrics) -> (ExactScalar, ExactScalar) {
    let den = &m0.q1 + &m1.q0;
    if den.is_zero() {
        // first tree never leaves itself
        return (ExactScalar::one(), ExactScalar::zero());
    }
    (
        m1.q0.checked_div(&den).expect("nonzero"),
        m0.q1.checked_div(&den).expect("nonzero"),
    )
}

/// Cost from metrics alone; `L(T0)` when the second tree is never entered.
pub fn pair_cost(m0: &TreeMetrics, m1: &TreeMetrics) -> ExactScalar {
    if m0.q1.is_zero() {
        return m0.l.clone();
    }
    let (p0, p1) = stationary(m0, m1);
    p0 * &m0.l + p1 * &m1.l
}

/// Average codeword length per symbol as the message length grows.
pub fn aifv_cost(code: &CodePair, dist: &SourceDist) -> Result<ExactScalar> {
    let m0 = code.t0.metrics(dist)?;
    let m1 = code.t1.metrics(dist)?;
    Ok(pair_cost(&m0, &m1))
}

/// Optimal single-tree prefix code (all codewords on leaves of a first
/// tree) and its expected length.
pub fn huffman(dist: &SourceDist) -> (CodeTree, ExactScalar) {
    enum H {
        Leaf(usize),
        Join(usize, usize),
    }
    let n = dist.len();
    let mut arena: Vec<H> = (0..n).map(H::Leaf).collect();
    let mut heap: BinaryHeap<Reverse<(ExactScalar, usize, usize)>> = (0..n)
        .map(|i| Reverse((dist.prob(i).clone(), i, i)))
        .collect();
    while heap.len() > 1 {
        let Reverse((pa, sa, a)) = heap.pop().expect("len > 1");
        let Reverse((pb, sb, b)) = heap.pop().expect("len > 1");
        arena.push(H::Join(a, b));
        heap.push(Reverse((pa + pb, sa.min(sb), arena.len() - 1)));
    }
    let Reverse((_, _, root)) = heap.pop().expect("n >= 1");

    let mut nodes = Vec::new();
    let mut stack = vec![(root, None::<usize>, None::<u8>)];
    while let Some((h, parent, edge)) = stack.pop() {
        let id = nodes.len();
        match arena[h] {
            H::Leaf(s) => nodes.push(Node {
                parent,
                edge,
                kind: NodeKind::Leaf,
                symbol: Some(s),
            }),
            H::Join(a, b) => {
                nodes.push(Node {
                    parent,
                    edge,
                    kind: NodeKind::Complete,
                    symbol: None,
                });
                stack.push((b, Some(id), Some(1)));
                stack.push((a, Some(id), Some(0)));
            }
        }
    }
    let tree = CodeTree::new(TreeKind::T0, n, nodes);
    let cost = tree.metrics_unchecked(dist).l;
    (tree, cost)
}

/// Shannon entropy in bits; for reports only.
pub fn entropy(dist: &SourceDist) -> f64 {
    dist.probs()
        .iter()
        .map(|p| p.to_f64())
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Draws `len` i.i.d. symbols (sorted indices). Requires `b < 64`.
pub fn sample_symbols<R: Rng + ?Sized>(dist: &SourceDist, len: usize, rng: &mut R) -> Result<Vec<usize>> {
    let units = dist
        .units_u64()
        .filter(|_| dist.bits() < 64)
        .ok_or_else(|| Error::InvalidDistribution("bit-width too large for sampling".into()))?;
    let mut cumulative = Vec::with_capacity(units.len());
    let mut acc = 0u64;
    for u in units {
        acc += u;
        cumulative.push(acc);
    }
    let total = acc;
    Ok((0..len)
        .map(|_| {
            let r = rng.gen_range(0..total);
            cumulative.partition_point(|&c| c <= r)
        })
        .collect())
}

/// Serialises an encoded message: a one-line text header followed by the
/// packed bytes.
pub fn write_container(n: usize, count: usize, stream: &BitStream) -> Vec<u8> {
    let mut out = format!("aifv2 n={n} count={count} bits={}\n", stream.len()).into_bytes();
    out.extend_from_slice(stream.as_bytes());
    out
}

/// Inverse of [`write_container`]: returns `(n, count, stream)`.
pub fn read_container(data: &[u8]) -> Result<(usize, usize, BitStream)> {
    let nl = data
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Container("missing header line".into()))?;
    let header = std::str::from_utf8(&data[..nl])
        .map_err(|_| Error::Container("header is not UTF-8".into()))?;
    let mut words = header.split_whitespace();
    if words.next() != Some("aifv2") {
        return Err(Error::Container("bad magic".into()));
    }
    let mut field = |name: &str| -> Result<usize> {
        words
            .next()
            .and_then(|w| w.strip_prefix(name))
            .and_then(|w| w.strip_prefix('='))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Container(format!("expected {name}=<value>")))
    };
    let n = field("n")?;
    let count = field("count")?;
    let bits = field("bits")?;
    let stream = BitStream::from_bytes(data[nl + 1..].to_vec(), bits)?;
    Ok((n, count, stream))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::numeric::make_dist;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use NodeKind::*;

    fn q(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    fn dist(v: &[&str]) -> SourceDist {
        make_dist(v.iter().map(|s| q(s)).collect()).unwrap()
    }

    /// Code with a = 0, b = 1, c = 2, d = 3 matching the worked example.
    pub(crate) fn fig1_code() -> CodePair {
        let t0 = CodeTree::from_codewords(
            TreeKind::T0,
            4,
            &[
                (Some(0), "0", Leaf),
                (Some(1), "10", Master),
                (Some(2), "1000", Leaf),
                (Some(3), "11", Leaf),
            ],
        )
        .unwrap();
        let t1 = CodeTree::from_codewords(
            TreeKind::T1,
            4,
            &[
                (Some(0), "01", Leaf),
                (Some(1), "10", Leaf),
                (Some(2), "11", Master),
                (Some(3), "1100", Leaf),
            ],
        )
        .unwrap();
        CodePair::new(t0, t1).unwrap()
    }

    #[test]
    fn fig1_encode_decode() {
        let code = fig1_code();
        let msg = [1, 3, 1, 2, 0, 0]; // b d b c a a
        let bits = encode(&msg, &code).unwrap();
        assert_eq!(bits.to_bit_string(), "1011001011010");
        assert_eq!(decode(&bits, 6, &code).unwrap(), msg);
    }

    #[test]
    fn empty_message() {
        let code = fig1_code();
        let bits = encode(&[], &code).unwrap();
        assert!(bits.is_empty());
        assert!(decode(&bits, 0, &code).unwrap().is_empty());
    }

    #[test]
    fn all_leaf_first_tree_never_switches() {
        let t0 = CodeTree::from_codewords(TreeKind::T0, 2, &[(Some(0), "0", Leaf), (Some(1), "1", Leaf)])
            .unwrap();
        let t1 = CodeTree::from_codewords(TreeKind::T1, 2, &[(Some(0), "1", Leaf), (Some(1), "01", Leaf)])
            .unwrap();
        let code = CodePair::new(t0, t1).unwrap();
        let bits = encode(&[0, 1, 0], &code).unwrap();
        assert_eq!(bits.to_bit_string(), "010");
        assert_eq!(decode(&bits, 3, &code).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn encode_rejects_out_of_range() {
        assert!(matches!(
            encode(&[4], &fig1_code()),
            Err(Error::SymbolOutOfRange { symbol: 4, n: 4 })
        ));
    }

    #[test]
    fn decode_errors() {
        let code = fig1_code();
        let bits = BitStream::from_bit_str("101").unwrap();
        // b then an incomplete T1 walk
        assert!(matches!(decode(&bits, 2, &code), Err(Error::Decode { .. })));
        let bits = BitStream::from_bit_str("00").unwrap();
        assert!(matches!(
            decode(&bits, 1, &code),
            Err(Error::Decode { reason, .. }) if reason.contains("trailing")
        ));
        // after master b, T1 walk "0" then "0" has no branch under the root slave
        let bits = BitStream::from_bit_str("10 1 00").unwrap();
        assert!(decode(&bits, 2, &code).is_err());
    }

    #[test]
    fn pair_rejects_mismatch() {
        let code = fig1_code();
        assert!(CodePair::new(code.t1().clone(), code.t0().clone()).is_err());
    }

    #[test]
    fn cost_by_substitution() {
        // q1(T0) = 1/4, q0(T1) = 1/2, L0 = 3/2, L1 = 2
        let m0 = TreeMetrics { l: q("3/2"), q0: q("3/4"), q1: q("1/4") };
        let m1 = TreeMetrics { l: q("2"), q0: q("1/2"), q1: q("1/2") };
        let (p0, p1) = stationary(&m0, &m1);
        assert_eq!((p0.clone(), p1.clone()), (q("2/3"), q("1/3")));
        assert_eq!(p0 + p1, q("1"));
        assert_eq!(pair_cost(&m0, &m1), q("5/3"));

        let m0 = TreeMetrics { l: q("5/4"), q0: q("1"), q1: q("0") };
        assert_eq!(pair_cost(&m0, &m1), q("5/4"));
    }

    #[test]
    fn degenerate_pair_costs_first_tree() {
        let d = dist(&["3/4", "1/4"]);
        let t0 = CodeTree::from_codewords(TreeKind::T0, 2, &[(Some(0), "0", Leaf), (Some(1), "1", Leaf)])
            .unwrap();
        let t1 = CodeTree::from_codewords(TreeKind::T1, 2, &[(Some(0), "1", Leaf), (Some(1), "01", Leaf)])
            .unwrap();
        let code = CodePair::new(t0, t1).unwrap();
        assert_eq!(aifv_cost(&code, &d).unwrap(), q("1"));
    }

    #[test]
    fn huffman_examples() {
        assert_eq!(huffman(&dist(&["1/2", "1/4", "1/4"])).1, q("3/2"));
        assert_eq!(huffman(&dist(&["3/4", "1/4"])).1, q("1"));
        let (tree, cost) = huffman(&dist(&["1/2", "3/8", "1/8"]));
        assert_eq!(cost, q("3/2"));
        assert!(tree.validate().is_empty());
        assert!(tree.nodes().iter().all(|n| n.kind != Master));
    }

    /// Minimal expected depth over all full binary trees with the given
    /// number of leaves, by exhaustive depth-profile enumeration.
    fn brute_force_prefix_cost(d: &SourceDist) -> ExactScalar {
        fn profiles(leaves: usize) -> Vec<Vec<usize>> {
            if leaves == 1 {
                return vec![vec![0]];
            }
            let mut out = Vec::new();
            for left in 1..leaves {
                for a in profiles(left) {
                    for b in profiles(leaves - left) {
                        out.push(a.iter().chain(&b).map(|x| x + 1).collect());
                    }
                }
            }
            out
        }
        profiles(d.len())
            .into_iter()
            .map(|mut depths| {
                depths.sort();
                d.probs()
                    .iter()
                    .zip(&depths)
                    .map(|(p, &k)| p * ExactScalar::from_int(k as i64))
                    .sum::<ExactScalar>()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn huffman_matches_brute_force() {
        for n in 2..=6 {
            for d in crate::numeric::dyadic_grid(n, 4) {
                assert_eq!(huffman(&d).1, brute_force_prefix_cost(&d), "{:?}", d.probs());
            }
        }
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&dist(&["1/2", "1/2"])) - 1.0).abs() < 1e-12);
        assert!((entropy(&dist(&["1/2", "1/4", "1/4"])) - 1.5).abs() < 1e-12);
        assert!((entropy(&dist(&["3/4", "1/4"])) - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn container_roundtrip_and_rejects() {
        let bits = BitStream::from_bit_str("101100101101").unwrap();
        let data = write_container(4, 6, &bits);
        assert!(data.starts_with(b"aifv2 n=4 count=6 bits=12\n"));
        let (n, count, back) = read_container(&data).unwrap();
        assert_eq!((n, count), (4, 6));
        assert_eq!(back, bits);
        assert!(read_container(b"aifv3 n=4 count=6 bits=12\n\x00\x00").is_err());
        assert!(read_container(b"aifv2 n=4 count=6 bits=12\n\x00").is_err());
        assert!(read_container(b"aifv2 n=4 count=6 bits=4\n\x0f").is_err());
    }

    #[test]
    fn sampling_frequencies() {
        let d = dist(&["3/4", "1/4"]);
        let mut rng = StdRng::seed_from_u64(7);
        let s = sample_symbols(&d, 100_000, &mut rng).unwrap();
        let ones = s.iter().filter(|&&x| x == 1).count() as f64 / s.len() as f64;
        assert!((ones - 0.25).abs() < 0.01);
    }
}
