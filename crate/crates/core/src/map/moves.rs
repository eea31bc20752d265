//! Boundary moves: the two Tutte moves, their inverse, and the growth steps used
//! by the boundary dynamics.

use super::{twin, MapMode, RootedMap, NIL};
use crate::error::{Error, Result};

/// Boundary bookkeeping of a triangle deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detached {
    /// An ear was removed together with its degree-2 vertex.
    Ear { removed: (u32, u32), added: u32, vertex: u32 },
    /// A triangle with one boundary edge was removed.
    Opened { removed: u32, added: (u32, u32) },
}

/// Result of undoing the last Tutte move of a rooted map.
#[derive(Debug, Clone)]
pub enum Decomposition {
    EdgeMap,
    Move1(RootedMap),
    Move2(RootedMap, RootedMap),
}

impl RootedMap {
    fn require_disk(&self) -> Result<u32> {
        self.outer_face().ok_or_else(|| Error::NotApplicable("map has no boundary".into()))
    }

    /// Closes the corner at `h` and `next(h)` on the boundary with a new triangle.
    /// Returns the new boundary half-edge, which runs from `origin(h)` to the head of
    /// `next(h)`. The boundary shrinks by one.
    pub fn attach_corner(&mut self, h: u32) -> Result<u32> {
        let outer = self.require_disk()?;
        if !self.is_outer(h) {
            return Err(Error::NotApplicable(format!("half-edge {h} is not on the boundary")));
        }
        if self.m() < 3 {
            return Err(Error::NotApplicable("corner move needs m >= 3".into()));
        }
        let h1 = self.next[h as usize];
        let u = self.origin[h as usize];
        let w = self.dest(h1);
        if self.mode == MapMode::Simplicial && (u == w || self.are_adjacent(u, w)) {
            return Err(Error::NotApplicable("corner move would break simpliciality".into()));
        }
        let p = self.prev[h as usize];
        let n = self.next[h1 as usize];
        let e = self.alloc_edge();
        let (eo, ei) = (e, e + 1);
        let f = self.alloc_face();
        self.origin[eo as usize] = u;
        self.origin[ei as usize] = w;
        self.set_next(p, eo);
        self.set_next(eo, n);
        self.set_next(h1, ei);
        self.set_next(ei, h);
        for x in [h, h1, ei] {
            self.face[x as usize] = f;
        }
        self.face[eo as usize] = outer;
        self.face_edge[f as usize] = h;
        self.face_deg[f as usize] = 3;
        self.face_deg[outer as usize] -= 1;
        self.face_edge[outer as usize] = eo;
        self.degree[u as usize] += 1;
        self.degree[w as usize] += 1;
        if self.root == h || self.root == h1 {
            self.root = eo;
        }
        Ok(eo)
    }

    /// Glues a triangle with one new vertex onto boundary edge `h`. Returns the two
    /// new boundary half-edges in boundary order. The boundary grows by one.
    pub fn attach_edge(&mut self, h: u32) -> Result<(u32, u32)> {
        let outer = self.require_disk()?;
        if !self.is_outer(h) {
            return Err(Error::NotApplicable(format!("half-edge {h} is not on the boundary")));
        }
        let u = self.origin[h as usize];
        let w = self.dest(h);
        let p = self.prev[h as usize];
        let n = self.next[h as usize];
        let x = self.alloc_vertex();
        let a = self.alloc_edge();
        let b = self.alloc_edge();
        let f = self.alloc_face();
        self.origin[a as usize] = u;
        self.origin[(a + 1) as usize] = x;
        self.origin[b as usize] = x;
        self.origin[(b + 1) as usize] = w;
        // Boundary: p -> a -> b -> n (a degenerate m = 2 boundary has p == n == twin side).
        self.set_next(p, a);
        self.set_next(a, b);
        self.set_next(b, n);
        self.set_next(h, b + 1);
        self.set_next(b + 1, a + 1);
        self.set_next(a + 1, h);
        for y in [h, b + 1, a + 1] {
            self.face[y as usize] = f;
        }
        self.face[a as usize] = outer;
        self.face[b as usize] = outer;
        self.face_edge[f as usize] = h;
        self.face_deg[f as usize] = 3;
        self.face_deg[outer as usize] += 1;
        self.face_edge[outer as usize] = a;
        self.vert_out[x as usize] = b;
        self.degree[x as usize] = 2;
        self.degree[u as usize] += 1;
        self.degree[w as usize] += 1;
        if self.root == h {
            self.root = a;
        }
        Ok((a, b))
    }

    /// Removes the inner triangle behind boundary half-edge `h` when the result is
    /// still a disk with at least one triangle. Two shapes are deletable: a triangle
    /// whose only boundary edge is `h` and whose apex is interior (boundary grows by
    /// one), and an ear whose boundary edges are `h` and `next(h)` around a degree-2
    /// vertex (boundary shrinks by one). Each deletable triangle is reached from
    /// exactly one boundary half-edge. Returns `None` when nothing was removed.
    pub fn detach_triangle(&mut self, h: u32) -> Result<Option<Detached>> {
        let outer = self.require_disk()?;
        if !self.is_outer(h) {
            return Err(Error::NotApplicable(format!("half-edge {h} is not on the boundary")));
        }
        let t = twin(h);
        if self.is_outer(t) || self.n() < 2 {
            return Ok(None);
        }
        let f = self.face[t as usize];
        let t1 = self.next[t as usize];
        let t2 = self.next[t1 as usize];
        let b = self.next[h as usize];
        let x = self.dest(h);
        if b == twin(t2) && self.degree[x as usize] == 2 {
            // Ear: h = u->x, b = x->w on the boundary, t1 = u->w becomes boundary.
            // the result would be the edge map or a digon
            if self.is_outer(twin(t1)) || self.m() == 3 {
                return Ok(None);
            }
            let p = self.prev[h as usize];
            let n = self.next[b as usize];
            let (u, w) = (self.origin[h as usize], self.dest(b));
            self.set_next(p, t1);
            self.set_next(t1, n);
            self.face[t1 as usize] = outer;
            self.free_face(f);
            self.free_edge(h);
            self.free_edge(b);
            self.free_vertex(x);
            self.degree[u as usize] -= 1;
            self.degree[w as usize] -= 1;
            self.vert_out[u as usize] = t1;
            self.vert_out[w as usize] = twin(t1);
            self.face_deg[outer as usize] -= 1;
            self.face_edge[outer as usize] = t1;
            if !self.is_alive(self.root) {
                self.root = t1;
            }
            return Ok(Some(Detached::Ear { removed: (h, b), added: t1, vertex: x }));
        }
        if self.is_outer(twin(t1)) || self.is_outer(twin(t2)) {
            return Ok(None);
        }
        let apex = self.dest(t1);
        if self.on_boundary(apex) {
            return Ok(None);
        }
        let p = self.prev[h as usize];
        let n = self.next[h as usize];
        let (u, w) = (self.origin[h as usize], self.dest(h));
        // t = w->u, so t1 = u->apex and t2 = apex->w.
        self.set_next(p, t1);
        self.set_next(t1, t2);
        self.set_next(t2, n);
        self.face[t1 as usize] = outer;
        self.face[t2 as usize] = outer;
        self.free_face(f);
        self.free_edge(h);
        self.degree[u as usize] -= 1;
        self.degree[w as usize] -= 1;
        self.vert_out[u as usize] = t1;
        self.vert_out[w as usize] = n;
        self.face_deg[outer as usize] += 1;
        self.face_edge[outer as usize] = t1;
        if !self.is_alive(self.root) {
            self.root = t1;
        }
        Ok(Some(Detached::Opened { removed: h, added: (t1, t2) }))
    }

    /// Whether `v` lies on the outer face.
    pub fn on_boundary(&self, v: u32) -> bool {
        !self.is_closed() && self.out_edges(v).into_iter().any(|h| self.is_outer(h) || self.is_outer(twin(h)))
    }

    /// Applies Tutte move 1 in place: a triangle closes the corner at the root, and
    /// the new boundary edge becomes the root.
    pub fn apply_move_1(&mut self) -> Result<()> {
        if self.is_closed() {
            return Err(Error::NotApplicable("map has no boundary".into()));
        }
        if self.m() < 3 {
            return Err(Error::NotApplicable("move 1 is impossible at m = 2".into()));
        }
        let r = self.root;
        self.root = self.attach_corner(r)?;
        Ok(())
    }

    /// Glues `b` after the root of `self` and closes the corner with a triangle.
    pub fn apply_move_2(&mut self, b: &RootedMap) -> Result<()> {
        if self.is_closed() || b.is_closed() {
            return Err(Error::NotApplicable("both maps need a boundary".into()));
        }
        let a0 = self.root;
        let a1 = self.next[a0 as usize];
        let v = self.dest(a0);
        let off = self.absorb(b, b.origin(b.root), v);
        let b0 = b.root + off;
        let bl = b.prev(b.root) + off;
        self.set_next(a0, b0);
        self.set_next(bl, a1);
        self.root = self.attach_corner(a0)?;
        Ok(())
    }

    /// Undoes the last Tutte move. Fails for maps outside the generated class.
    pub fn decompose(&self) -> Result<Decomposition> {
        if self.is_closed() {
            return Err(Error::OutsideClass("closed map".into()));
        }
        if self.n() == 0 {
            if self.n_edges == 1 && self.n_verts == 2 {
                return Ok(Decomposition::EdgeMap);
            }
            return Err(Error::OutsideClass("no inner face but not an edge map".into()));
        }
        let r = self.root;
        let t = twin(r);
        if self.is_outer(t) {
            return Err(Error::OutsideClass("root edge is a bridge".into()));
        }
        let h = self.next[t as usize];
        let h1 = self.next[h as usize];
        let v = self.dest(h);
        let p = self.prev[r as usize];
        let n = self.next[r as usize];
        if p == t || n == t {
            return Err(Error::OutsideClass("degenerate root corner".into()));
        }
        let mut next = self.next.clone();
        next[p as usize] = h;
        next[h as usize] = h1;
        next[h1 as usize] = n;
        next[r as usize] = NIL;
        next[t as usize] = NIL;
        // Walk the new boundary after h1 looking for the apex again.
        let mut x = next[h1 as usize];
        let mut hit = None;
        while x != h {
            if self.origin[x as usize] == v {
                if hit.is_some() {
                    return Err(Error::OutsideClass("boundary is not simple".into()));
                }
                hit = Some(x);
            }
            x = next[x as usize];
        }
        match hit {
            None => Ok(Decomposition::Move1(extract(self, &next, h)?)),
            Some(a1) => {
                let bl = {
                    let mut y = h1;
                    while next[y as usize] != a1 {
                        y = next[y as usize];
                    }
                    y
                };
                next[h as usize] = a1;
                next[bl as usize] = h1;
                let a = extract(self, &next, h)?;
                let b = extract(self, &next, h1)?;
                if a.n_edges + b.n_edges + 1 != self.n_edges {
                    return Err(Error::OutsideClass("parts are not disjoint".into()));
                }
                Ok(Decomposition::Move2(a, b))
            }
        }
    }

    /// Boundary vertices in boundary order.
    pub fn boundary_vertices(&self) -> Vec<u32> {
        self.boundary().into_iter().map(|h| self.origin[h as usize]).collect()
    }
}

/// Connected component of `root` under `next` and twin, compacted into a new map.
fn extract(map: &RootedMap, next: &[u32], root: u32) -> Result<RootedMap> {
    let mut edge_id = vec![NIL; next.len() / 2];
    let mut order = Vec::new();
    let mut stack = vec![root];
    while let Some(h) = stack.pop() {
        let e = (h / 2) as usize;
        if edge_id[e] != NIL {
            continue;
        }
        if next[2 * e] == NIL || next[2 * e + 1] == NIL {
            return Err(Error::OutsideClass("component touches a removed edge".into()));
        }
        edge_id[e] = order.len() as u32;
        order.push(e as u32);
        for x in [2 * e as u32, 2 * e as u32 + 1] {
            stack.push(next[x as usize]);
        }
    }
    let relabel = |h: u32| 2 * edge_id[(h / 2) as usize] + (h & 1);
    let mut new_next = vec![NIL; 2 * order.len()];
    for &e in &order {
        for x in [2 * e, 2 * e + 1] {
            new_next[relabel(x) as usize] = relabel(next[x as usize]);
        }
    }
    let _ = map;
    RootedMap::from_next(new_next, relabel(root), true, map.mode)
}

/// Tutte move 1 on a copy: (N, m) -> (N+1, m-1).
pub fn tutte_move_1(map: &RootedMap) -> Result<RootedMap> {
    let mut out = map.clone();
    out.apply_move_1()?;
    Ok(out)
}

/// Tutte move 2 on copies: ((N1, m1), (N2, m2)) -> (N1+N2+1, m1+m2-1).
pub fn tutte_move_2(a: &RootedMap, b: &RootedMap) -> Result<RootedMap> {
    let mut out = a.clone();
    out.apply_move_2(b)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> RootedMap {
        RootedMap::new_edge_map(MapMode::General)
    }

    #[test]
    fn triangle_from_two_edges() {
        let t = tutte_move_2(&edge(), &edge()).unwrap();
        t.validate().unwrap();
        assert_eq!(t.counters(), (1, 3, 3, 3));
    }

    #[test]
    fn move_1_arithmetic_and_rejection() {
        let t = tutte_move_2(&edge(), &edge()).unwrap();
        let m = tutte_move_1(&t).unwrap();
        m.validate().unwrap();
        assert_eq!((m.n(), m.m()), (2, 2));
        assert!(tutte_move_1(&edge()).is_err());
    }

    #[test]
    fn move_2_arithmetic() {
        let t = tutte_move_2(&edge(), &edge()).unwrap();
        let a = tutte_move_2(&t, &edge()).unwrap();
        assert_eq!((a.n(), a.m()), (2, 4));
        let c = tutte_move_2(&a, &edge()).unwrap();
        c.validate().unwrap();
        assert_eq!((c.n(), c.m()), (3, 5));
    }

    #[test]
    fn decompose_inverts_moves() {
        let e = edge();
        let t = tutte_move_2(&e, &e).unwrap();
        let a = tutte_move_2(&t, &e).unwrap();
        let b = tutte_move_1(&a).unwrap();
        match b.decompose().unwrap() {
            Decomposition::Move1(x) => assert_eq!(x.canonical_code(), a.canonical_code()),
            other => panic!("{other:?}"),
        }
        let c = tutte_move_2(&e, &t).unwrap();
        match c.decompose().unwrap() {
            Decomposition::Move2(x, y) => {
                assert_eq!(x.canonical_code(), e.canonical_code());
                assert_eq!(y.canonical_code(), t.canonical_code());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn growth_moves_keep_disk_euler() {
        let mut m = tutte_move_2(&edge(), &edge()).unwrap();
        for i in 0..30 {
            let b = m.boundary();
            let h = b[i % b.len()];
            if i % 3 == 2 && m.m() > 3 {
                m.attach_corner(h).unwrap();
            } else {
                m.attach_edge(h).unwrap();
            }
            m.validate().unwrap();
            let (n, mm, v, l) = m.counters();
            assert_eq!(v as i64 - (l - mm) as i64 + n as i64, 1 + mm as i64);
        }
    }
}
