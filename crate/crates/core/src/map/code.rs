//! Canonical codes: a breadth-first relabelling from the root.
//!
//! Byte layout: version, closed flag, `u32` half-edge count (little endian), then for
//! every label `i` the pair `(label(next(i)), label(twin(i)))` as `u32`.

use std::fmt;

use super::{twin, RootedMap, NIL};
use crate::error::{Error, Result};

pub const CODE_VERSION: u8 = 1;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    /// Parses and checks a serialized code.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 6 {
            return Err(Error::Parse("code too short".into()));
        }
        if bytes[0] != CODE_VERSION {
            return Err(Error::Parse(format!("unknown code version {}", bytes[0])));
        }
        if bytes[1] > 1 {
            return Err(Error::Parse("bad closed flag".into()));
        }
        let n = u32::from_le_bytes(bytes[2..6].try_into().unwrap()) as usize;
        if bytes.len() != 6 + 8 * n {
            return Err(Error::Parse(format!("length prefix {n} does not match payload")));
        }
        Ok(CanonicalCode(bytes.to_vec()))
    }

    pub fn half_edge_count(&self) -> usize {
        u32::from_le_bytes(self.0[2..6].try_into().unwrap()) as usize
    }

    pub fn is_closed(&self) -> bool {
        self.0[1] == 1
    }

    /// Rebuilds a map with the coded structure. Half-edge `i` of the result has label `i`
    /// except that twins are re-paired as `(2k, 2k+1)`.
    pub fn decode(&self, mode: super::MapMode) -> Result<RootedMap> {
        let n = self.half_edge_count();
        let word = |i: usize| u32::from_le_bytes(self.0[6 + 4 * i..10 + 4 * i].try_into().unwrap());
        let mut pair = vec![NIL; n];
        let mut k = 0u32;
        let mut label_to_half = vec![NIL; n];
        for i in 0..n {
            let t = word(2 * i + 1) as usize;
            if t >= n || word(2 * t + 1) as usize != i || t == i {
                return Err(Error::Parse("twin is not an involution".into()));
            }
            if pair[i] == NIL {
                pair[i] = k;
                pair[t] = k;
                label_to_half[i] = 2 * k;
                label_to_half[t] = 2 * k + 1;
                k += 1;
            }
        }
        let mut next = vec![NIL; n];
        for i in 0..n {
            let x = word(2 * i) as usize;
            if x >= n {
                return Err(Error::Parse("next out of range".into()));
            }
            next[label_to_half[i] as usize] = label_to_half[x];
        }
        RootedMap::from_next(next, label_to_half[0], !self.is_closed(), mode)
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode(")?;
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl RootedMap {
    /// BFS labels from `root`, following next then twin.
    fn labels_from(&self, root: u32) -> (Vec<u32>, Vec<u32>) {
        let mut label = vec![NIL; self.next.len()];
        let mut order = Vec::with_capacity(2 * self.n_edges);
        label[root as usize] = 0;
        order.push(root);
        let mut i = 0;
        while i < order.len() {
            let h = order[i];
            for x in [self.next[h as usize], twin(h)] {
                if label[x as usize] == NIL {
                    label[x as usize] = order.len() as u32;
                    order.push(x);
                }
            }
            i += 1;
        }
        (label, order)
    }

    fn code_words(&self, root: u32) -> Vec<u32> {
        let (label, order) = self.labels_from(root);
        let mut words = Vec::with_capacity(2 * order.len());
        for &h in &order {
            words.push(label[self.next[h as usize] as usize]);
            words.push(label[twin(h) as usize]);
        }
        words
    }

    fn pack(&self, words: &[u32]) -> CanonicalCode {
        let mut bytes = Vec::with_capacity(6 + 4 * words.len());
        bytes.push(CODE_VERSION);
        bytes.push(u8::from(self.is_closed()));
        bytes.extend_from_slice(&((words.len() / 2) as u32).to_le_bytes());
        for w in words {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        CanonicalCode(bytes)
    }

    /// Code of the map with its root; equal codes iff root-respecting isomorphism.
    pub fn canonical_code(&self) -> CanonicalCode {
        self.pack(&self.code_words(self.root))
    }

    /// Code of the map with the root forgotten: the minimum over admissible roots
    /// (boundary half-edges for a disk, all half-edges for a closed map).
    pub fn unrooted_code(&self) -> CanonicalCode {
        let candidates: Vec<u32> = if self.is_closed() { self.half_edges().collect() } else { self.boundary() };
        let best = candidates
            .into_iter()
            .map(|r| self.code_words(r))
            .min()
            .expect("map has half-edges");
        self.pack(&best)
    }

    /// Number of rootings giving the same rooted code as the minimal one (the order
    /// of the automorphism group for closed maps).
    pub fn automorphism_count(&self) -> usize {
        let candidates: Vec<u32> = if self.is_closed() { self.half_edges().collect() } else { self.boundary() };
        let codes: Vec<Vec<u32>> = candidates.into_iter().map(|r| self.code_words(r)).collect();
        let best = codes.iter().min().unwrap();
        codes.iter().filter(|c| *c == best).count()
    }
}

/// Root-respecting isomorphism search by simultaneous traversal. Returns the
/// half-edge bijection from `a` to `b` when one exists.
pub fn rooted_isomorphism(a: &RootedMap, b: &RootedMap) -> Option<Vec<u32>> {
    if a.n_edges != b.n_edges || a.is_closed() != b.is_closed() {
        return None;
    }
    let mut map = vec![NIL; a.next.len()];
    let mut used = vec![false; b.next.len()];
    let mut stack = vec![(a.root, b.root)];
    while let Some((x, y)) = stack.pop() {
        let cur = map[x as usize];
        if cur != NIL {
            if cur != y {
                return None;
            }
            continue;
        }
        if used[y as usize] {
            return None;
        }
        map[x as usize] = y;
        used[y as usize] = true;
        if a.is_outer(x) != b.is_outer(y) {
            return None;
        }
        stack.push((a.next[x as usize], b.next[y as usize]));
        stack.push((twin(x), twin(y)));
    }
    for h in a.half_edges() {
        let y = map[h as usize];
        if y == NIL || map[a.next[h as usize] as usize] != b.next[y as usize] || map[twin(h) as usize] != twin(y) {
            return None;
        }
    }
    Some(map)
}

#[cfg(test)]
mod tests {
    use super::super::{tutte_move_1, tutte_move_2, MapMode};
    use super::*;

    fn edge() -> RootedMap {
        RootedMap::new_edge_map(MapMode::General)
    }

    #[test]
    fn edge_map_code_is_stable() {
        assert_eq!(edge().canonical_code(), edge().canonical_code());
        let bytes = edge().canonical_code().into_bytes();
        assert_eq!(bytes[0], CODE_VERSION);
        assert_eq!(CanonicalCode::from_bytes(&bytes).unwrap().half_edge_count(), 2);
    }

    #[test]
    fn code_roundtrips_through_decode() {
        let t = tutte_move_2(&edge(), &edge()).unwrap();
        let a = tutte_move_2(&t, &edge()).unwrap();
        let c = a.canonical_code();
        let back = c.decode(MapMode::General).unwrap();
        assert_eq!(back.canonical_code(), c);
    }

    #[test]
    fn two_maps_at_2_4_differ() {
        let e = edge();
        let t = tutte_move_2(&e, &e).unwrap();
        let x = tutte_move_2(&t, &e).unwrap();
        let y = tutte_move_2(&e, &t).unwrap();
        assert_eq!((x.n(), x.m()), (2, 4));
        assert_eq!((y.n(), y.m()), (2, 4));
        assert_ne!(x.canonical_code(), y.canonical_code());
        assert!(rooted_isomorphism(&x, &y).is_none());
        assert!(rooted_isomorphism(&x, &x.compacted()).is_some());
        let z = tutte_move_1(&x).unwrap();
        assert_eq!(z.m(), 3);
    }

    #[test]
    fn corrupted_bytes_are_rejected() {
        let mut b = edge().canonical_code().into_bytes();
        b.pop();
        assert!(CanonicalCode::from_bytes(&b).is_err());
        let mut b = edge().canonical_code().into_bytes();
        b[0] = 9;
        assert!(CanonicalCode::from_bytes(&b).is_err());
    }
}
