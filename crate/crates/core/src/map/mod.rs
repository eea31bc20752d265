//! Rooted planar maps stored as half-edge tables.
//!
//! Half-edges are allocated in pairs, so the twin of `h` is `h ^ 1`. A dead slot has
//! `next == NIL` and sits on a free list. Every inner face is a triangle; a disk map
//! also has one outer face of arbitrary degree `m`, a closed map has none.

mod code;
mod curvature;
mod moves;
mod sphere;

pub use code::{rooted_isomorphism, CanonicalCode, CODE_VERSION};
pub use curvature::{curvature, gauss_bonnet_defect, Curvature};
pub use moves::{tutte_move_1, tutte_move_2, Decomposition, Detached};
pub use sphere::{alexander_move, gv_move, GvMove};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NIL: u32 = u32::MAX;

/// General maps allow loops and multi-edges, simplicial maps forbid them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum MapMode {
    #[default]
    General,
    Simplicial,
}

#[derive(Clone, Debug)]
pub struct RootedMap {
    pub(crate) next: Vec<u32>,
    pub(crate) prev: Vec<u32>,
    pub(crate) origin: Vec<u32>,
    pub(crate) face: Vec<u32>,
    pub(crate) vert_out: Vec<u32>,
    pub(crate) degree: Vec<u32>,
    pub(crate) face_edge: Vec<u32>,
    pub(crate) face_deg: Vec<u32>,
    pub(crate) outer: u32,
    pub(crate) root: u32,
    pub(crate) mode: MapMode,
    free_edges: Vec<u32>,
    free_verts: Vec<u32>,
    free_faces: Vec<u32>,
    n_verts: usize,
    n_edges: usize,
    n_faces: usize,
}

/// Vertex degrees, counted with multiplicity of incident half-edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexDegreeProfile {
    pub q: Vec<u32>,
}

impl VertexDegreeProfile {
    pub fn total(&self) -> u64 {
        self.q.iter().map(|&d| d as u64).sum()
    }
}

#[inline]
pub fn twin(h: u32) -> u32 {
    h ^ 1
}

impl RootedMap {
    /// The edge map: one edge, two vertices, a single outer face of degree 2.
    pub fn new_edge_map(mode: MapMode) -> Self {
        RootedMap {
            next: vec![1, 0],
            prev: vec![1, 0],
            origin: vec![0, 1],
            face: vec![0, 0],
            vert_out: vec![0, 1],
            degree: vec![1, 1],
            face_edge: vec![0],
            face_deg: vec![2],
            outer: 0,
            root: 0,
            mode,
            free_edges: Vec::new(),
            free_verts: Vec::new(),
            free_faces: Vec::new(),
            n_verts: 2,
            n_edges: 1,
            n_faces: 1,
        }
    }

    /// Build a map from a face permutation on `2k` half-edges (twin = `h ^ 1`).
    /// Vertices and faces are recomputed. If `root_face_outer`, the face of `root`
    /// becomes the outer face.
    pub fn from_next(next: Vec<u32>, root: u32, root_face_outer: bool, mode: MapMode) -> Result<Self> {
        let n = next.len();
        if n == 0 || n % 2 != 0 || root as usize >= n {
            return Err(Error::InvalidMap("bad half-edge count or root".into()));
        }
        let mut prev = vec![NIL; n];
        for (h, &x) in next.iter().enumerate() {
            if x as usize >= n || prev[x as usize] != NIL {
                return Err(Error::InvalidMap("next is not a permutation".into()));
            }
            prev[x as usize] = h as u32;
        }
        let mut origin = vec![NIL; n];
        let mut vert_out = Vec::new();
        let mut degree = Vec::new();
        for h in 0..n as u32 {
            if origin[h as usize] != NIL {
                continue;
            }
            let v = vert_out.len() as u32;
            let mut x = h;
            let mut d = 0;
            loop {
                origin[x as usize] = v;
                d += 1;
                x = next[twin(x) as usize];
                if x == h {
                    break;
                }
            }
            vert_out.push(h);
            degree.push(d);
        }
        let mut face = vec![NIL; n];
        let mut face_edge = Vec::new();
        let mut face_deg = Vec::new();
        // Root face first so that the outer face gets id 0.
        let starts = std::iter::once(root).chain(0..n as u32);
        for h in starts {
            if face[h as usize] != NIL {
                continue;
            }
            let f = face_edge.len() as u32;
            let mut x = h;
            let mut d = 0;
            loop {
                face[x as usize] = f;
                d += 1;
                x = next[x as usize];
                if x == h {
                    break;
                }
            }
            face_edge.push(h);
            face_deg.push(d);
        }
        let map = RootedMap {
            n_verts: vert_out.len(),
            n_edges: n / 2,
            n_faces: face_edge.len(),
            next,
            prev,
            origin,
            face,
            vert_out,
            degree,
            face_edge,
            face_deg,
            outer: if root_face_outer { 0 } else { NIL },
            root,
            mode,
            free_edges: Vec::new(),
            free_verts: Vec::new(),
            free_faces: Vec::new(),
        };
        map.validate()?;
        Ok(map)
    }

    // ---- accessors -------------------------------------------------------

    pub fn mode(&self) -> MapMode {
        self.mode
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn next(&self, h: u32) -> u32 {
        self.next[h as usize]
    }

    pub fn prev(&self, h: u32) -> u32 {
        self.prev[h as usize]
    }

    pub fn origin(&self, h: u32) -> u32 {
        self.origin[h as usize]
    }

    pub fn dest(&self, h: u32) -> u32 {
        self.origin[twin(h) as usize]
    }

    pub fn face_of(&self, h: u32) -> u32 {
        self.face[h as usize]
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.degree[v as usize]
    }

    /// One outgoing half-edge of `v`.
    pub fn out_edge(&self, v: u32) -> u32 {
        self.vert_out[v as usize]
    }

    pub fn is_closed(&self) -> bool {
        self.outer == NIL
    }

    pub fn outer_face(&self) -> Option<u32> {
        (self.outer != NIL).then_some(self.outer)
    }

    pub fn is_outer(&self, h: u32) -> bool {
        self.outer != NIL && self.face[h as usize] == self.outer
    }

    pub fn is_alive(&self, h: u32) -> bool {
        (h as usize) < self.next.len() && self.next[h as usize] != NIL
    }

    pub fn vertex_alive(&self, v: u32) -> bool {
        (v as usize) < self.vert_out.len() && self.vert_out[v as usize] != NIL
    }

    /// Number of inner faces.
    pub fn n(&self) -> usize {
        self.n_faces - usize::from(!self.is_closed())
    }

    /// Boundary length, 0 for a closed map.
    pub fn m(&self) -> usize {
        if self.is_closed() {
            0
        } else {
            self.face_deg[self.outer as usize] as usize
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n_verts
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    /// Faces including the outer one.
    pub fn face_count(&self) -> usize {
        self.n_faces
    }

    pub fn half_edge_capacity(&self) -> usize {
        self.next.len()
    }

    pub fn vertex_capacity(&self) -> usize {
        self.vert_out.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_verts as i64 - self.n_edges as i64 + self.n_faces as i64
    }

    pub fn half_edges(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.next.len() as u32).filter(move |&h| self.next[h as usize] != NIL)
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.vert_out.len() as u32).filter(move |&v| self.vert_out[v as usize] != NIL)
    }

    /// Outgoing half-edges of `v` in rotation order.
    pub fn out_edges(&self, v: u32) -> Vec<u32> {
        let start = self.vert_out[v as usize];
        let mut out = Vec::with_capacity(self.degree[v as usize] as usize);
        let mut h = start;
        loop {
            out.push(h);
            h = self.next[twin(h) as usize];
            if h == start {
                break;
            }
        }
        out
    }

    /// Neighbours of `v` in rotation order (with repetition for multi-edges).
    pub fn neighbours(&self, v: u32) -> Vec<u32> {
        self.out_edges(v).into_iter().map(|h| self.dest(h)).collect()
    }

    pub fn are_adjacent(&self, u: u32, w: u32) -> bool {
        self.out_edges(u).into_iter().any(|h| self.dest(h) == w)
    }

    /// Half-edges of the outer face starting at the root.
    pub fn boundary(&self) -> Vec<u32> {
        if self.is_closed() {
            return Vec::new();
        }
        self.face_cycle(self.root)
    }

    pub fn face_cycle(&self, h: u32) -> Vec<u32> {
        let mut out = vec![h];
        let mut x = self.next[h as usize];
        while x != h {
            out.push(x);
            x = self.next[x as usize];
        }
        out
    }

    pub fn degree_profile(&self) -> VertexDegreeProfile {
        VertexDegreeProfile { q: self.vertices().map(|v| self.degree[v as usize]).collect() }
    }

    /// (N, m, V, L).
    pub fn counters(&self) -> (usize, usize, usize, usize) {
        (self.n(), self.m(), self.n_verts, self.n_edges)
    }

    // ---- allocation ------------------------------------------------------

    pub(crate) fn set_next(&mut self, a: u32, b: u32) {
        self.next[a as usize] = b;
        self.prev[b as usize] = a;
    }

    /// Allocates an edge and returns its even half-edge.
    pub(crate) fn alloc_edge(&mut self) -> u32 {
        self.n_edges += 1;
        if let Some(h) = self.free_edges.pop() {
            return h;
        }
        let h = self.next.len() as u32;
        for v in [&mut self.next, &mut self.prev, &mut self.origin, &mut self.face] {
            v.extend([NIL, NIL]);
        }
        h
    }

    pub(crate) fn free_edge(&mut self, h: u32) {
        let h = h & !1;
        for x in [h, h + 1] {
            let i = x as usize;
            self.next[i] = NIL;
            self.prev[i] = NIL;
            self.origin[i] = NIL;
            self.face[i] = NIL;
        }
        self.free_edges.push(h);
        self.n_edges -= 1;
    }

    pub(crate) fn alloc_vertex(&mut self) -> u32 {
        self.n_verts += 1;
        if let Some(v) = self.free_verts.pop() {
            self.degree[v as usize] = 0;
            return v;
        }
        self.vert_out.push(NIL);
        self.degree.push(0);
        (self.vert_out.len() - 1) as u32
    }

    pub(crate) fn free_vertex(&mut self, v: u32) {
        self.vert_out[v as usize] = NIL;
        self.degree[v as usize] = 0;
        self.free_verts.push(v);
        self.n_verts -= 1;
    }

    pub(crate) fn alloc_face(&mut self) -> u32 {
        self.n_faces += 1;
        if let Some(f) = self.free_faces.pop() {
            return f;
        }
        self.face_edge.push(NIL);
        self.face_deg.push(0);
        (self.face_edge.len() - 1) as u32
    }

    pub(crate) fn free_face(&mut self, f: u32) {
        self.face_edge[f as usize] = NIL;
        self.face_deg[f as usize] = 0;
        self.free_faces.push(f);
        self.n_faces -= 1;
    }

    /// Copies `other` into `self` with half-edge offset `self.next.len()`, merging
    /// vertex `other_v` into `self_v` and the outer face of `other` into the outer
    /// face of `self`. Returns the half-edge offset.
    pub(crate) fn absorb(&mut self, other: &RootedMap, other_v: u32, self_v: u32) -> u32 {
        let off = self.next.len() as u32;
        let mut vmap = vec![NIL; other.vert_out.len()];
        for v in other.vertices() {
            vmap[v as usize] = if v == other_v {
                self_v
            } else {
                self.vert_out.push(NIL);
                self.degree.push(0);
                (self.vert_out.len() - 1) as u32
            };
        }
        let mut fmap = vec![NIL; other.face_edge.len()];
        for f in 0..other.face_edge.len() {
            if other.face_edge[f] == NIL {
                continue;
            }
            fmap[f] = if f as u32 == other.outer {
                self.outer
            } else {
                self.face_edge.push(NIL);
                self.face_deg.push(0);
                (self.face_edge.len() - 1) as u32
            };
        }
        let shift = |x: u32| if x == NIL { NIL } else { x + off };
        for h in 0..other.next.len() {
            self.next.push(shift(other.next[h]));
            self.prev.push(shift(other.prev[h]));
            let o = other.origin[h];
            self.origin.push(if o == NIL { NIL } else { vmap[o as usize] });
            let f = other.face[h];
            self.face.push(if f == NIL { NIL } else { fmap[f as usize] });
        }
        for v in other.vertices() {
            let nv = vmap[v as usize] as usize;
            if v == other_v {
                self.degree[nv] += other.degree[v as usize];
            } else {
                self.vert_out[nv] = other.vert_out[v as usize] + off;
                self.degree[nv] = other.degree[v as usize];
            }
        }
        for f in 0..other.face_edge.len() {
            if other.face_edge[f] == NIL || f as u32 == other.outer {
                continue;
            }
            let nf = fmap[f] as usize;
            self.face_edge[nf] = other.face_edge[f] + off;
            self.face_deg[nf] = other.face_deg[f];
        }
        if other.outer != NIL {
            self.face_deg[self.outer as usize] += other.face_deg[other.outer as usize];
        }
        self.free_edges.extend(other.free_edges.iter().map(|&h| h + off));
        self.n_verts += other.n_verts - 1;
        self.n_edges += other.n_edges;
        self.n_faces += other.n_faces - 1;
        off
    }

    /// Returns a copy without dead slots. Half-edge order is preserved.
    pub fn compacted(&self) -> RootedMap {
        if self.free_edges.is_empty() && self.free_verts.is_empty() && self.free_faces.is_empty() {
            return self.clone();
        }
        let mut hmap = vec![NIL; self.next.len()];
        let mut k = 0u32;
        for h in self.half_edges() {
            hmap[h as usize] = k;
            k += 1;
        }
        let next: Vec<u32> = self.half_edges().map(|h| hmap[self.next[h as usize] as usize]).collect();
        let outer = !self.is_closed();
        let mut m = RootedMap::from_next(next, hmap[self.root as usize], outer, self.mode)
            .expect("compaction of a valid map");
        // from_next relabels vertices; keep them in the original order instead.
        let mut vmap = vec![NIL; self.vert_out.len()];
        for (i, v) in self.vertices().enumerate() {
            vmap[v as usize] = i as u32;
        }
        for h in self.half_edges() {
            m.origin[hmap[h as usize] as usize] = vmap[self.origin[h as usize] as usize];
        }
        for v in self.vertices() {
            let nv = vmap[v as usize] as usize;
            m.vert_out[nv] = hmap[self.vert_out[v as usize] as usize];
            m.degree[nv] = self.degree[v as usize];
        }
        m
    }

    /// Full structural check against a traversal recount.
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidMap(s));
        let n = self.next.len();
        let mut alive = 0usize;
        for h in 0..n as u32 {
            let i = h as usize;
            let dead = self.next[i] == NIL;
            if dead != (self.next[twin(h) as usize] == NIL) {
                return bad(format!("half-edge {h} alive without its twin"));
            }
            if dead {
                continue;
            }
            alive += 1;
            let x = self.next[i];
            if !self.is_alive(x) || self.prev[x as usize] != h {
                return bad(format!("next/prev mismatch at {h}"));
            }
            if self.origin[x as usize] != self.origin[twin(h) as usize] {
                return bad(format!("origin of next({h}) is not the head of {h}"));
            }
            if self.face[x as usize] != self.face[i] {
                return bad(format!("face label changes along face at {h}"));
            }
            if !self.vertex_alive(self.origin[i]) {
                return bad(format!("half-edge {h} leaves a dead vertex"));
            }
        }
        if alive != 2 * self.n_edges {
            return bad(format!("edge counter {} but {} live half-edges", self.n_edges, alive));
        }
        let mut seen = 0usize;
        let mut nv = 0usize;
        for v in self.vertices() {
            nv += 1;
            let out = self.out_edges(v);
            if out.iter().any(|&h| self.origin[h as usize] != v) {
                return bad(format!("rotation at {v} leaves the vertex"));
            }
            if out.len() != self.degree[v as usize] as usize {
                return bad(format!("degree counter of {v}"));
            }
            seen += out.len();
        }
        if seen != alive || nv != self.n_verts {
            return bad("vertex rotations do not cover the half-edges".into());
        }
        let mut seen = 0usize;
        let mut nf = 0usize;
        for f in 0..self.face_edge.len() {
            let h = self.face_edge[f];
            if h == NIL {
                continue;
            }
            nf += 1;
            if !self.is_alive(h) || self.face[h as usize] != f as u32 {
                return bad(format!("face {f} anchor"));
            }
            let cyc = self.face_cycle(h);
            if cyc.len() != self.face_deg[f] as usize {
                return bad(format!("face {f} degree counter"));
            }
            if f as u32 != self.outer && cyc.len() != 3 {
                return bad(format!("inner face {f} is not a triangle"));
            }
            seen += cyc.len();
        }
        if seen != alive || nf != self.n_faces {
            return bad("face cycles do not cover the half-edges".into());
        }
        if self.outer != NIL {
            if self.face_edge.get(self.outer as usize).copied().unwrap_or(NIL) == NIL {
                return bad("outer face is dead".into());
            }
            if self.m() < 2 {
                return bad("boundary shorter than 2".into());
            }
            if !self.is_outer(self.root) {
                return bad("root is not on the outer face".into());
            }
        } else if !self.is_alive(self.root) {
            return bad("root is dead".into());
        }
        if self.euler_characteristic() != 2 {
            return bad(format!("Euler characteristic {}", self.euler_characteristic()));
        }
        if self.mode == MapMode::Simplicial {
            for v in self.vertices() {
                let mut nb = self.neighbours(v);
                if nb.contains(&v) {
                    return bad(format!("loop at {v}"));
                }
                nb.sort_unstable();
                if nb.windows(2).any(|w| w[0] == w[1]) {
                    return bad(format!("multi-edge at {v}"));
                }
            }
        }
        Ok(())
    }
}

impl PartialEq for RootedMap {
    /// Root-respecting isomorphism.
    fn eq(&self, other: &Self) -> bool {
        self.canonical_code() == other.canonical_code()
    }
}

impl Eq for RootedMap {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_map_counters() {
        let m = RootedMap::new_edge_map(MapMode::General);
        assert_eq!(m.counters(), (0, 2, 2, 1));
        assert_eq!(m.euler_characteristic(), 2);
        m.validate().unwrap();
        assert_eq!(m.degree_profile().total(), 2);
    }

    #[test]
    fn from_next_rejects_non_permutation() {
        assert!(RootedMap::from_next(vec![0, 0], 0, true, MapMode::General).is_err());
    }

    #[test]
    fn compaction_keeps_code() {
        let e = RootedMap::new_edge_map(MapMode::General);
        let t = tutte_move_2(&e, &e).unwrap();
        let t2 = tutte_move_2(&t, &e).unwrap();
        let c = t2.compacted();
        c.validate().unwrap();
        assert_eq!(c.canonical_code(), t2.canonical_code());
    }
}
