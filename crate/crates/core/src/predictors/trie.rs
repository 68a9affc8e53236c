//! Suffix-context count statistics.
//!
//! Node `s` holds counts of the symbols that followed context `s`; its
//! children extend `s` by one older symbol. The root is the empty (order-0)
//! context.
//!
//! Canonical serialization (all integers unsigned LEB128):
//!
//! ```text
//! "LMZT" version=1 alphabet max_order node
//! node  := entry_count (symbol count)* child_count (symbol node)*
//! ```
//!
//! Entries and children appear in increasing symbol order, children depth
//! first, so equal statistics always serialize to equal bytes.

use smallvec::SmallVec;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LMZT";
const VERSION: u8 = 1;

#[derive(Clone, Debug, Default)]
pub(crate) struct Node {
    pub total: u32,
    /// (symbol, count), sorted by symbol.
    pub entries: SmallVec<[(u32, u32); 1]>,
    /// (older symbol, node index), sorted by symbol.
    children: SmallVec<[(u32, u32); 1]>,
}

impl Node {
    #[inline]
    pub fn distinct(&self) -> u32 {
        self.entries.len() as u32
    }

    #[inline]
    pub fn count(&self, symbol: u32) -> u32 {
        match self.entries.binary_search_by_key(&symbol, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    #[inline]
    fn child(&self, symbol: u32) -> Option<u32> {
        self.children
            .binary_search_by_key(&symbol, |c| c.0)
            .ok()
            .map(|i| self.children[i].1)
    }

    fn add(&mut self, symbol: u32) {
        match self.entries.binary_search_by_key(&symbol, |e| e.0) {
            Ok(i) => self.entries[i].1 += 1,
            Err(i) => self.entries.insert(i, (symbol, 1)),
        }
        self.total += 1;
    }
}

/// Per-context symbol counts for every suffix context up to `max_order`.
#[derive(Clone, Debug)]
pub struct ContextStats {
    alphabet_size: u32,
    max_order: usize,
    nodes: Vec<Node>,
}

impl ContextStats {
    pub fn new(alphabet_size: usize, max_order: usize) -> Self {
        ContextStats {
            alphabet_size: alphabet_size as u32,
            max_order,
            nodes: vec![Node::default()],
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size as usize
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes[0].total == 0
    }

    pub fn clear(&mut self) {
        self.nodes.truncate(1);
        self.nodes[0] = Node::default();
    }

    /// Records that `symbol` followed `context` (most recent symbol last), in
    /// every suffix context of `context` up to `max_order`.
    pub fn update(&mut self, context: &[u32], symbol: u32) {
        let mut node = 0usize;
        self.nodes[0].add(symbol);
        for &older in context.iter().rev().take(self.max_order) {
            node = match self.nodes[node].child(older) {
                Some(child) => child as usize,
                None => self.insert_child(node, older),
            };
            self.nodes[node].add(symbol);
        }
    }

    fn insert_child(&mut self, parent: usize, symbol: u32) -> usize {
        let index = self.nodes.len();
        self.nodes.push(Node::default());
        let children = &mut self.nodes[parent].children;
        let pos = children.partition_point(|c| c.0 < symbol);
        children.insert(pos, (symbol, index as u32));
        index
    }

    /// Counts every position of `data`, using up to `max_order` preceding
    /// symbols as context.
    pub fn train(&mut self, data: &[u32]) {
        for i in 0..data.len() {
            let start = i.saturating_sub(self.max_order);
            self.update(&data[start..i], data[i]);
        }
    }

    /// Nodes for contexts of order 0, 1, ... that exist for `context`,
    /// stopping at `limit` or at the first unseen context.
    pub(crate) fn path(&self, context: &[u32], limit: usize, out: &mut Vec<u32>) {
        out.clear();
        out.push(0);
        let mut node = 0usize;
        for &older in context.iter().rev().take(limit.min(self.max_order)) {
            match self.nodes[node].child(older) {
                Some(child) => {
                    node = child as usize;
                    out.push(child);
                }
                None => break,
            }
        }
    }

    #[inline]
    pub(crate) fn node(&self, index: u32) -> &Node {
        &self.nodes[index as usize]
    }

    /// `(n_s, d_s, c_{s,symbol})` for the order-`order` suffix of `context`;
    /// `None` if that context never occurred.
    pub fn context_counts(&self, context: &[u32], order: usize, symbol: u32) -> Option<(u32, u32, u32)> {
        if order > context.len() || order > self.max_order {
            return None;
        }
        let mut node = 0usize;
        for &older in context.iter().rev().take(order) {
            node = self.nodes[node].child(older)? as usize;
        }
        let n = &self.nodes[node];
        Some((n.total, n.distinct(), n.count(symbol)))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.to_bytes_truncated(self.max_order)
    }

    /// Serialization of the statistics restricted to contexts of order
    /// `<= order`.
    pub fn to_bytes_truncated(&self, order: usize) -> Vec<u8> {
        let order = order.min(self.max_order);
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        put_varint(&mut out, u64::from(self.alphabet_size));
        put_varint(&mut out, order as u64);
        // Explicit stack instead of recursion: tries can be deep and wide.
        enum Step {
            Node(usize, usize),
            Edge(u32),
        }
        let mut stack = vec![Step::Node(0, 0)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Edge(symbol) => put_varint(&mut out, u64::from(symbol)),
                Step::Node(index, depth) => {
                    let node = &self.nodes[index];
                    put_varint(&mut out, node.entries.len() as u64);
                    for &(s, c) in &node.entries {
                        put_varint(&mut out, u64::from(s));
                        put_varint(&mut out, u64::from(c));
                    }
                    let children: &[(u32, u32)] = if depth < order { &node.children } else { &[] };
                    put_varint(&mut out, children.len() as u64);
                    for &(s, child) in children.iter().rev() {
                        stack.push(Step::Node(child as usize, depth + 1));
                        stack.push(Step::Edge(s));
                    }
                }
            }
        }
        out
    }

    /// Length of [`to_bytes_truncated`](Self::to_bytes_truncated) for every
    /// order `0..=max_order`, computed without materializing the bytes.
    pub fn serialized_lengths(&self) -> Vec<u64> {
        let orders = self.max_order + 1;
        // own[d]: entry bytes + incoming edge bytes of nodes at depth d.
        // links[d]: child-count varints of nodes at depth d when expanded.
        let mut own = vec![0u64; orders];
        let mut links = vec![0u64; orders];
        let mut count = vec![0u64; orders];
        let mut stack = vec![(0usize, 0usize, None::<u32>)];
        while let Some((index, depth, edge)) = stack.pop() {
            let node = &self.nodes[index];
            let mut bytes = varint_len(node.entries.len() as u64);
            for &(s, c) in &node.entries {
                bytes += varint_len(u64::from(s)) + varint_len(u64::from(c));
            }
            if let Some(s) = edge {
                bytes += varint_len(u64::from(s));
            }
            own[depth] += bytes;
            count[depth] += 1;
            links[depth] += varint_len(node.children.len() as u64);
            if depth + 1 < orders {
                for &(s, child) in &node.children {
                    stack.push((child as usize, depth + 1, Some(s)));
                }
            }
        }
        let header = (MAGIC.len() + 1) as u64 + varint_len(u64::from(self.alphabet_size));
        let mut lengths = Vec::with_capacity(orders);
        let mut body = 0u64;
        for k in 0..orders {
            body += own[k];
            // Nodes at the truncation depth write a zero child count.
            let child_counts: u64 = links[..k].iter().sum::<u64>() + count[k];
            lengths.push(header + varint_len(k as u64) + body + child_counts);
        }
        lengths
    }

    pub fn serialized_len(&self) -> u64 {
        *self.serialized_lengths().last().expect("at least order 0")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut reader = Reader { bytes, pos: 0 };
        if reader.take(4)? != MAGIC {
            return Err(Error::corrupt("not a context statistics dump"));
        }
        let version = reader.take(1)?[0];
        if version != VERSION {
            return Err(Error::UnknownVersion(version));
        }
        let alphabet = reader.varint()?;
        let max_order = reader.varint()? as usize;
        if !(2..=65536).contains(&alphabet) || max_order > 64 {
            return Err(Error::corrupt("implausible statistics header"));
        }
        let mut stats = ContextStats::new(alphabet as usize, max_order);
        // (node index, depth, remaining children)
        let mut stack: Vec<(usize, usize, u64)> = Vec::new();
        let root_children = read_node(&mut reader, &mut stats.nodes[0], alphabet)?;
        stack.push((0, 0, root_children));
        while let Some(top) = stack.last_mut() {
            if top.2 == 0 {
                stack.pop();
                continue;
            }
            top.2 -= 1;
            let (parent, depth) = (top.0, top.1);
            if depth >= max_order {
                return Err(Error::corrupt("context deeper than max_order"));
            }
            let symbol = reader.varint()?;
            if symbol >= alphabet {
                return Err(Error::corrupt("edge symbol outside the alphabet"));
            }
            let symbol = symbol as u32;
            if stats.nodes[parent].children.last().is_some_and(|c| c.0 >= symbol) {
                return Err(Error::corrupt("children out of order"));
            }
            let index = stats.nodes.len();
            let mut node = Node::default();
            let grandchildren = read_node(&mut reader, &mut node, alphabet)?;
            stats.nodes.push(node);
            stats.nodes[parent].children.push((symbol, index as u32));
            stack.push((index, depth + 1, grandchildren));
        }
        if reader.pos != bytes.len() {
            return Err(Error::corrupt("trailing bytes after statistics"));
        }
        Ok(stats)
    }
}

fn read_node(reader: &mut Reader<'_>, node: &mut Node, alphabet: u64) -> Result<u64> {
    let entries = reader.varint()?;
    if entries > alphabet {
        return Err(Error::corrupt("more entries than symbols"));
    }
    for _ in 0..entries {
        let s = reader.varint()?;
        let c = reader.varint()?;
        if s >= alphabet || c == 0 || c > u64::from(u32::MAX) {
            return Err(Error::corrupt("bad count entry"));
        }
        if node.entries.last().is_some_and(|e| u64::from(e.0) >= s) {
            return Err(Error::corrupt("entries out of order"));
        }
        node.entries.push((s as u32, c as u32));
        node.total = node
            .total
            .checked_add(c as u32)
            .ok_or_else(|| Error::corrupt("count overflow"))?;
    }
    reader.varint()
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::corrupt("statistics dump truncated"))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn varint(&mut self) -> Result<u64> {
        let mut value = 0u64;
        for shift in (0..64).step_by(7) {
            let byte = self.take(1)?[0];
            value |= u64::from(byte & 0x7F) << shift;
            if byte & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(Error::corrupt("varint too long"))
    }
}

pub(crate) fn put_varint(out: &mut Vec<u8>, mut value: u64) {
    while value >= 0x80 {
        out.push((value as u8) | 0x80);
        value >>= 7;
    }
    out.push(value as u8);
}

pub(crate) fn varint_len(value: u64) -> u64 {
    let bits = 64 - value.leading_zeros().min(63);
    u64::from(bits.div_ceil(7))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(s: &str) -> Vec<u32> {
        s.bytes().map(u32::from).collect()
    }

    #[test]
    fn counts_follow_suffix_contexts() {
        let mut stats = ContextStats::new(256, 2);
        stats.train(&sym("abab"));
        let a = u32::from(b'a');
        let b = u32::from(b'b');
        // order 0: a twice, b twice
        assert_eq!(stats.context_counts(&[], 0, a), Some((4, 2, 2)));
        // order 1 after "a": b twice
        assert_eq!(stats.context_counts(&[a], 1, b), Some((2, 1, 2)));
        // order 2 after "ba": b once
        assert_eq!(stats.context_counts(&[b, a], 2, b), Some((1, 1, 1)));
        assert_eq!(stats.context_counts(&[a, a], 2, b), None);
    }

    #[test]
    fn count_invariants_hold() {
        let mut stats = ContextStats::new(256, 3);
        stats.train(&sym("the cat sat on the mat with the hat"));
        for node in &stats.nodes {
            let sum: u32 = node.entries.iter().map(|e| e.1).sum();
            assert_eq!(node.total, sum);
            for &(_, child) in &node.children {
                assert!(stats.nodes[child as usize].total <= node.total);
            }
        }
    }

    #[test]
    fn varint_lengths() {
        for v in [0u64, 1, 127, 128, 16383, 16384, u64::from(u32::MAX), u64::MAX] {
            let mut buf = Vec::new();
            put_varint(&mut buf, v);
            assert_eq!(buf.len() as u64, varint_len(v), "{v}");
        }
    }

    #[test]
    fn rejects_corrupt_dumps() {
        let mut stats = ContextStats::new(256, 2);
        stats.train(&sym("hello world"));
        let bytes = stats.to_bytes();
        assert!(ContextStats::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(ContextStats::from_bytes(&extra).is_err());
        let mut bad_version = bytes;
        bad_version[4] = 9;
        assert!(matches!(ContextStats::from_bytes(&bad_version), Err(Error::UnknownVersion(9))));
    }

    proptest! {
        #[test]
        fn dump_round_trips_and_lengths_match(
            data in proptest::collection::vec(0u32..6, 0..300),
            order in 0usize..5,
        ) {
            let mut stats = ContextStats::new(6, order);
            stats.train(&data);
            let bytes = stats.to_bytes();
            let back = ContextStats::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
            let lengths = stats.serialized_lengths();
            for k in 0..=order {
                prop_assert_eq!(lengths[k], stats.to_bytes_truncated(k).len() as u64);
            }
        }
    }
}
