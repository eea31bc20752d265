//! Typed planar trees coding rooted disk maps.
//!
//! A leaf is an edge map, a unary vertex closes the root corner of its child with
//! a triangle, and a binary vertex glues its two children in order. Trees are
//! stored as their preorder type word.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::map::{Decomposition, MapMode, RootedMap};
use crate::nonlinear::{layered_fixed_point, ProcessParams};
use crate::rng::{substream, Rng};
use crate::stats::{self, Estimate, GeometricTail};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanarTree {
    word: Vec<u8>,
}

/// Per-type vertex counts `(n0, n1, n2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TypeCounts {
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
}

impl TypeCounts {
    /// Inner faces of the coded map.
    pub fn faces(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn edges(&self) -> usize {
        self.n0 + self.n1 + self.n2
    }

    pub fn vertices(&self) -> usize {
        self.n0 + 1
    }

    pub fn boundary(&self) -> usize {
        self.n0 + 1 - self.n1
    }
}

impl PlanarTree {
    pub fn leaf() -> Self {
        PlanarTree { word: vec![0] }
    }

    pub fn unary(child: &PlanarTree) -> Result<Self> {
        let mut word = Vec::with_capacity(child.word.len() + 1);
        word.push(1);
        word.extend_from_slice(&child.word);
        Self::from_preorder(word)
    }

    pub fn binary(a: &PlanarTree, b: &PlanarTree) -> Self {
        let mut word = Vec::with_capacity(a.word.len() + b.word.len() + 1);
        word.push(2);
        word.extend_from_slice(&a.word);
        word.extend_from_slice(&b.word);
        PlanarTree { word }
    }

    /// Checks the word is a complete tree and every unary child has boundary ≥ 3.
    pub fn from_preorder(word: Vec<u8>) -> Result<Self> {
        let mut open = 1usize;
        for (i, &t) in word.iter().enumerate() {
            if t > 2 {
                return Err(Error::Parse(format!("bad vertex type {t}")));
            }
            if open == 0 {
                return Err(Error::Parse(format!("trailing vertices at {i}")));
            }
            open = open - 1 + t as usize;
        }
        if open != 0 {
            return Err(Error::Parse("incomplete tree".into()));
        }
        let t = PlanarTree { word };
        t.boundary_lengths()?;
        Ok(t)
    }

    pub fn preorder(&self) -> &[u8] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn counts(&self) -> TypeCounts {
        let mut c = [0usize; 3];
        for &t in &self.word {
            c[t as usize] += 1;
        }
        TypeCounts { n0: c[0], n1: c[1], n2: c[2] }
    }

    /// Boundary length of the map coded by every subtree, indexed by preorder position.
    pub fn boundary_lengths(&self) -> Result<Vec<usize>> {
        let mut m = vec![0usize; self.word.len()];
        let mut stack: Vec<usize> = Vec::new();
        for i in (0..self.word.len()).rev() {
            m[i] = match self.word[i] {
                0 => 2,
                1 => {
                    let c = stack.pop().ok_or_else(|| Error::Parse("malformed word".into()))?;
                    if c < 3 {
                        return Err(Error::OutsideClass(format!("unary vertex at {i} over a boundary of length {c}")));
                    }
                    c - 1
                }
                _ => {
                    let a = stack.pop().ok_or_else(|| Error::Parse("malformed word".into()))?;
                    let b = stack.pop().ok_or_else(|| Error::Parse("malformed word".into()))?;
                    a + b - 1
                }
            };
            stack.push(m[i]);
        }
        Ok(m)
    }

    pub fn boundary(&self) -> usize {
        self.counts().boundary()
    }

    pub fn faces(&self) -> usize {
        self.counts().faces()
    }

    /// Balanced-parenthesis form: each vertex is `(` type children `)`.
    pub fn to_parens(&self) -> String {
        let mut s = String::with_capacity(3 * self.word.len());
        let mut pending: Vec<u8> = Vec::new();
        for &t in &self.word {
            s.push('(');
            s.push((b'0' + t) as char);
            if t == 0 {
                s.push(')');
                while let Some(top) = pending.last_mut() {
                    *top -= 1;
                    if *top > 0 {
                        break;
                    }
                    pending.pop();
                    s.push(')');
                }
            } else {
                pending.push(t);
            }
        }
        s
    }
}

impl fmt::Display for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_parens())
    }
}

impl fmt::Debug for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlanarTree({})", self.to_parens())
    }
}

impl FromStr for PlanarTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let b = s.trim().as_bytes();
        let mut word = Vec::new();
        // Children still expected by each open vertex.
        let mut open: Vec<u8> = Vec::new();
        let mut i = 0;
        while i < b.len() {
            match b[i] {
                b'(' => {
                    let t = *b.get(i + 1).ok_or_else(|| Error::Parse("missing type digit".into()))?;
                    if !(b'0'..=b'2').contains(&t) {
                        return Err(Error::Parse(format!("bad type digit at {}", i + 1)));
                    }
                    if open.is_empty() && !word.is_empty() {
                        return Err(Error::Parse("more than one root".into()));
                    }
                    if let Some(top) = open.last_mut() {
                        if *top == 0 {
                            return Err(Error::Parse(format!("too many children at {i}")));
                        }
                        *top -= 1;
                    }
                    word.push(t - b'0');
                    open.push(t - b'0');
                    i += 2;
                }
                b')' => {
                    match open.pop() {
                        Some(0) => {}
                        Some(_) => return Err(Error::Parse(format!("missing children at {i}"))),
                        None => return Err(Error::Parse(format!("unbalanced ')' at {i}"))),
                    }
                    i += 1;
                }
                c if c.is_ascii_whitespace() => i += 1,
                c => return Err(Error::Parse(format!("unexpected byte {c:#x} at {i}"))),
            }
        }
        if !open.is_empty() {
            return Err(Error::Parse("unbalanced '('".into()));
        }
        PlanarTree::from_preorder(word)
    }
}

/// The map coded by `tree`.
pub fn decode(tree: &PlanarTree) -> Result<RootedMap> {
    decode_with_leaves(tree).map(|(m, _)| m)
}

/// The coded map plus, for each leaf in preorder, the vertex at the origin of that
/// leaf's edge.
pub fn decode_with_leaves(tree: &PlanarTree) -> Result<(RootedMap, Vec<u32>)> {
    tree.boundary_lengths()?;
    let mut stack: Vec<(RootedMap, Vec<u32>)> = Vec::new();
    for &t in tree.word.iter().rev() {
        match t {
            0 => stack.push((RootedMap::new_edge_map(MapMode::General), vec![0])),
            1 => {
                let (mut m, l) = stack.pop().ok_or_else(|| Error::Parse("malformed word".into()))?;
                m.apply_move_1()?;
                stack.push((m, l));
            }
            _ => {
                let (mut a, mut la) = stack.pop().ok_or_else(|| Error::Parse("malformed word".into()))?;
                let (b, lb) = stack.pop().ok_or_else(|| Error::Parse("malformed word".into()))?;
                let off = a.half_edge_capacity() as u32;
                a.apply_move_2(&b)?;
                la.extend(lb.into_iter().map(|h| h + off));
                stack.push((a, la));
            }
        }
    }
    let (map, halves) = stack.pop().ok_or_else(|| Error::Parse("empty tree".into()))?;
    let leaves = halves.iter().map(|&h| map.origin(h)).collect();
    Ok((map, leaves))
}

/// The tree of a map in the generated class.
pub fn encode(map: &RootedMap) -> Result<PlanarTree> {
    let mut word = Vec::new();
    let mut jobs = vec![map.clone()];
    while let Some(m) = jobs.pop() {
        match m.decompose()? {
            Decomposition::EdgeMap => word.push(0),
            Decomposition::Move1(c) => {
                word.push(1);
                jobs.push(c);
            }
            Decomposition::Move2(a, b) => {
                word.push(2);
                jobs.push(b);
                jobs.push(a);
            }
        }
    }
    PlanarTree::from_preorder(word)
}

/// `r0^n0 · r1^n1 · r2^n2`.
pub fn tree_weight(tree: &PlanarTree, r0: f64, r1: f64, r2: f64) -> Result<f64> {
    if r0 < 0.0 || r1 < 0.0 || r2 < 0.0 {
        return Err(Error::Domain("weights must be nonnegative".into()));
    }
    let c = tree.counts();
    Ok(r0.powi(c.n0 as i32) * r1.powi(c.n1 as i32) * r2.powi(c.n2 as i32))
}

/// All valid trees with at most `max_vertices` vertices, in order of size.
pub fn enumerate_trees(max_vertices: usize) -> Vec<PlanarTree> {
    // by_size[s] holds (word, boundary) for trees with s vertices
    let mut by_size: Vec<Vec<(Vec<u8>, usize)>> = vec![Vec::new(); max_vertices + 1];
    if max_vertices >= 1 {
        by_size[1].push((vec![0], 2));
    }
    for s in 2..=max_vertices {
        let mut out = Vec::new();
        for (w, m) in &by_size[s - 1] {
            if *m >= 3 {
                let mut x = vec![1];
                x.extend_from_slice(w);
                out.push((x, m - 1));
            }
        }
        for s1 in 1..s - 1 {
            let s2 = s - 1 - s1;
            for (wa, ma) in &by_size[s1] {
                for (wb, mb) in &by_size[s2] {
                    let mut x = Vec::with_capacity(s);
                    x.push(2);
                    x.extend_from_slice(wa);
                    x.extend_from_slice(wb);
                    out.push((x, ma + mb - 1));
                }
            }
        }
        by_size[s] = out;
    }
    by_size.into_iter().flatten().map(|(word, _)| PlanarTree { word }).collect()
}

/// All valid trees coding maps with exactly `faces` inner faces.
pub fn trees_with_faces(faces: usize) -> Vec<PlanarTree> {
    let mut by_n: Vec<Vec<(Vec<u8>, usize)>> = vec![vec![(vec![0], 2)]];
    for n in 1..=faces {
        let mut out = Vec::new();
        for (w, m) in &by_n[n - 1] {
            if *m >= 3 {
                let mut x = vec![1];
                x.extend_from_slice(w);
                out.push((x, m - 1));
            }
        }
        for n1 in 0..n {
            for (wa, ma) in &by_n[n1] {
                for (wb, mb) in &by_n[n - 1 - n1] {
                    let mut x = Vec::with_capacity(wa.len() + wb.len() + 1);
                    x.push(2);
                    x.extend_from_slice(wa);
                    x.extend_from_slice(wb);
                    out.push((x, ma + mb - 1));
                }
            }
        }
        by_n.push(out);
    }
    by_n.pop().unwrap_or_default().into_iter().map(|(word, _)| PlanarTree { word }).collect()
}

/// Map counts scaled as `C(N,m)·β^{(N+m)/2}` with `β = 2/27`, on the states reachable
/// from `(n_max, m_top)`.
#[derive(Debug, Clone)]
pub struct ScaledCounts {
    pub n_max: usize,
    pub m_top: usize,
    rows: Vec<Vec<f64>>,
}

impl ScaledCounts {
    pub fn new(n_max: usize, m_top: usize) -> Self {
        let beta = 2.0 / 27.0;
        let width = |n: usize| (n + 2).min(m_top + n_max - n);
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let mut row = vec![0.0; width(n) + 1];
            if n == 0 {
                if row.len() > 2 {
                    row[2] = beta;
                }
                rows.push(row);
                continue;
            }
            for m in 2..row.len() {
                if (n + m) % 2 == 1 {
                    continue;
                }
                let mut c = rows[n - 1].get(m + 1).copied().unwrap_or(0.0);
                for n1 in 0..n {
                    let (a, b) = (&rows[n1], &rows[n - 1 - n1]);
                    for m1 in 2..m.min(a.len()) {
                        let m2 = m + 1 - m1;
                        if m2 < b.len() {
                            c += a[m1] * b[m2];
                        }
                    }
                }
                row[m] = c;
            }
            rows.push(row);
        }
        ScaledCounts { n_max, m_top, rows }
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.rows.get(n).and_then(|r| r.get(m)).copied().unwrap_or(0.0)
    }
}

/// Uniform tree among those coding maps with `n` inner faces and boundary `m`.
pub fn sample_uniform_tree(table: &ScaledCounts, n: usize, m: usize, rng: &mut Rng) -> Result<PlanarTree> {
    if table.get(n, m) == 0.0 {
        return Err(Error::Domain(format!("no map with (N, m) = ({n}, {m}) in the table")));
    }
    let mut word = Vec::with_capacity(2 * n + 2);
    let mut todo = vec![(n, m)];
    while let Some((n, m)) = todo.pop() {
        if n == 0 {
            word.push(0);
            continue;
        }
        let total = table.get(n, m);
        let mut u = rng.random::<f64>() * total;
        let lin = table.get(n - 1, m + 1);
        if u < lin {
            word.push(1);
            todo.push((n - 1, m + 1));
            continue;
        }
        u -= lin;
        let mut last = None;
        let mut chosen = None;
        'outer: for k in 0..n {
            let n1 = if k % 2 == 0 { k / 2 } else { n - 1 - k / 2 };
            let n2 = n - 1 - n1;
            for m1 in 2..m {
                let w = table.get(n1, m1) * table.get(n2, m + 1 - m1);
                if w == 0.0 {
                    continue;
                }
                last = Some((n1, m1));
                if u < w {
                    chosen = Some((n1, m1));
                    break 'outer;
                }
                u -= w;
            }
        }
        let (n1, m1) = chosen.or(last).ok_or_else(|| Error::Domain(format!("empty state ({n}, {m})")))?;
        word.push(2);
        todo.push((n - 1 - n1, m + 1 - m1));
        todo.push((n1, m1));
    }
    Ok(PlanarTree { word })
}

/// Exact sampler for trees weighted by `r0^n0 r1^n1 r2^n2`, normalized by the total
/// mass of the fixed point of the measure process.
#[derive(Debug, Clone, Serialize)]
pub struct TreeSampler {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub mass: f64,
    pub mass_m3: f64,
    pub node_cap: usize,
}

impl TreeSampler {
    pub fn new(r0: f64, r1: f64, r2: f64) -> Result<Self> {
        if (r0 + r1 + r2 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("weights must sum to 1".into()));
        }
        let p = ProcessParams::new(r1, r2)?;
        let q = layered_fixed_point(&p, 400);
        let tail: f64 = q.row(400).iter().sum::<f64>() + q.row(399).iter().sum::<f64>();
        if !(tail < 1e-14) {
            return Err(Error::ResourceCap(format!("weights too close to critical, tail mass {tail:e}")));
        }
        let mass = q.total();
        let mass_m3 = mass - (0..=q.n_max).map(|n| q.get(n, 2)).sum::<f64>();
        Ok(TreeSampler { r0, r1, r2, mass, mass_m3, node_cap: 1_000_000 })
    }

    /// Probability of the tree under the normalized law.
    pub fn probability(&self, tree: &PlanarTree) -> f64 {
        tree_weight(tree, self.r0, self.r1, self.r2).unwrap_or(0.0) / self.mass
    }

    pub fn sample(&self, rng: &mut Rng) -> Result<PlanarTree> {
        enum Task {
            Node { need3: bool },
            AfterUnary { need3: bool, start: usize },
            AfterFirst { need3: bool, start: usize },
            AfterSecond { need3: bool, start: usize },
        }
        let p0 = self.r0 / self.mass;
        let p1 = self.r1 * self.mass_m3 / self.mass;
        let mut word: Vec<u8> = Vec::new();
        let mut tasks = vec![Task::Node { need3: false }];
        let mut results: Vec<usize> = Vec::new();
        let mut generated = 0usize;
        let finish = |need3: bool, start: usize, m: usize, word: &mut Vec<u8>, tasks: &mut Vec<Task>, results: &mut Vec<usize>| {
            if need3 && m < 3 {
                word.truncate(start);
                tasks.push(Task::Node { need3 });
            } else {
                results.push(m);
            }
        };
        while let Some(t) = tasks.pop() {
            match t {
                Task::Node { need3 } => {
                    generated += 1;
                    if generated > self.node_cap {
                        return Err(Error::ResourceCap(format!("more than {} vertices generated", self.node_cap)));
                    }
                    let start = word.len();
                    let u = rng.random::<f64>();
                    if u < p0 {
                        word.push(0);
                        finish(need3, start, 2, &mut word, &mut tasks, &mut results);
                    } else if u < p0 + p1 {
                        word.push(1);
                        tasks.push(Task::AfterUnary { need3, start });
                        tasks.push(Task::Node { need3: true });
                    } else {
                        word.push(2);
                        tasks.push(Task::AfterFirst { need3, start });
                        tasks.push(Task::Node { need3: false });
                    }
                }
                Task::AfterUnary { need3, start } => {
                    let c = results.pop().unwrap_or(3);
                    finish(need3, start, c - 1, &mut word, &mut tasks, &mut results);
                }
                Task::AfterFirst { need3, start } => {
                    tasks.push(Task::AfterSecond { need3, start });
                    tasks.push(Task::Node { need3: false });
                }
                Task::AfterSecond { need3, start } => {
                    let b = results.pop().unwrap_or(2);
                    let a = results.pop().unwrap_or(2);
                    finish(need3, start, a + b - 1, &mut word, &mut tasks, &mut results);
                }
            }
        }
        Ok(PlanarTree { word })
    }
}

/// One tree from the weighted law, replica 0 of `seed`.
pub fn sample_tree(r0: f64, r1: f64, r2: f64, seed: u64) -> Result<PlanarTree> {
    TreeSampler::new(r0, r1, r2)?.sample(&mut substream(seed, 0, 0x7472))
}

/// Leaves whose position `v` in leaf order has `min(v, n0 − v) ≥ fraction · n0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BulkSelector {
    pub fraction: f64,
}

impl Default for BulkSelector {
    fn default() -> Self {
        BulkSelector { fraction: 0.25 }
    }
}

impl BulkSelector {
    pub fn selects(&self, v: usize, leaves: usize) -> bool {
        let l = v.min(leaves - v) as f64;
        l >= self.fraction * leaves as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Covariance {
    pub distance: usize,
    pub value: Estimate,
    pub pairs: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub trees: usize,
    pub samples: u64,
    /// `p[k]` is the share of selected vertices of degree k.
    pub p: Vec<Estimate>,
    pub total: f64,
    pub tail: Option<GeometricTail>,
    pub covariances: Vec<Covariance>,
}

/// Degree law of selected leaf vertices and covariance of degrees `d` leaves apart.
/// Confidence intervals for covariances come from batch means over trees.
pub fn degree_statistics(trees: &[PlanarTree], selector: &BulkSelector, distances: &[usize]) -> Result<DegreeReport> {
    struct PerTree {
        degrees: Vec<u32>,
        pairs: Vec<Vec<(u32, u32)>>,
    }
    let per: Vec<Result<PerTree>> = exec::map_slice(trees, |t| {
        let (map, leaves) = decode_with_leaves(t)?;
        let n0 = leaves.len();
        let q: Vec<u32> = leaves.iter().map(|&v| map.degree(v)).collect();
        let sel: Vec<bool> = (0..n0).map(|v| selector.selects(v, n0)).collect();
        let degrees = (0..n0).filter(|&v| sel[v]).map(|v| q[v]).collect();
        let pairs = distances
            .iter()
            .map(|&d| (0..n0.saturating_sub(d)).filter(|&v| sel[v] && sel[v + d]).map(|v| (q[v], q[v + d])).collect())
            .collect();
        Ok(PerTree { degrees, pairs })
    });
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    let mut hist: Vec<u64> = Vec::new();
    for t in &per {
        for &q in &t.degrees {
            if hist.len() <= q as usize {
                hist.resize(q as usize + 1, 0);
            }
            hist[q as usize] += 1;
        }
    }
    let samples: u64 = hist.iter().sum();
    if samples == 0 {
        return Err(Error::InsufficientData("no selected vertices".into()));
    }
    let p: Vec<Estimate> = hist.iter().map(|&c| Estimate::proportion(c, samples)).collect();
    let total = p.iter().map(|e| e.value).sum();
    let mode = hist.iter().enumerate().max_by_key(|(_, c)| **c).map(|(k, _)| k).unwrap_or(0);
    let tail = stats::geometric_tail(&hist, mode + 1).ok();
    let batches = 50.min(per.len()).max(1);
    let covariances = distances
        .iter()
        .enumerate()
        .map(|(di, &d)| {
            let mut covs = Vec::with_capacity(batches);
            let mut pairs = 0u64;
            for b in 0..batches {
                let (mut n, mut sx, mut sy, mut sxy) = (0f64, 0f64, 0f64, 0f64);
                for t in per.iter().skip(b).step_by(batches) {
                    for &(x, y) in &t.pairs[di] {
                        n += 1.0;
                        sx += x as f64;
                        sy += y as f64;
                        sxy += x as f64 * y as f64;
                    }
                }
                pairs += n as u64;
                if n > 0.0 {
                    covs.push(sxy / n - (sx / n) * (sy / n));
                }
            }
            Covariance { distance: d, value: Estimate::of(&covs), pairs }
        })
        .collect();
    Ok(DegreeReport { trees: trees.len(), samples, p, total, tail, covariances })
}

/// `count` uniform trees at `(n, m)` drawn in parallel, one substream each.
pub fn sample_uniform_batch(n: usize, m: usize, count: usize, seed: u64) -> Result<Vec<PlanarTree>> {
    let table = ScaledCounts::new(n, m);
    exec::map_indices(count, |i| sample_uniform_tree(&table, n, m, &mut substream(seed, i as u64, 0x7566)))
        .into_iter()
        .collect()
}

/// Prefix constraint for urn arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum UrnVariant {
    /// `a1 + … + ak ≤ k`.
    #[default]
    Abstract,
    /// `a1 + … + ak ≤ max(k − 2, 0)`.
    Tree,
}

/// Number of arrays `(a1, …, an)` of nonnegative integers with sum `m` and the prefix
/// constraint of `variant`.
pub fn urn_counts(n: usize, m: usize, variant: UrnVariant) -> Result<BigUint> {
    match variant {
        UrnVariant::Abstract => Ok(ballot(n, m)),
        UrnVariant::Tree => {
            if n < 2 {
                return Ok(if m == 0 { BigUint::one() } else { BigUint::zero() });
            }
            Ok(ballot(n - 2, m))
        }
    }
}

fn ballot(n: usize, m: usize) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    // c(i, j) = c(i, j−1) + c(i−1, j), c(i, 0) = 1, zero above the diagonal
    let mut prev = vec![BigUint::zero(); m + 1];
    prev[0] = BigUint::one();
    for i in 1..=n {
        let mut cur = vec![BigUint::zero(); m + 1];
        cur[0] = BigUint::one();
        for j in 1..=m.min(i) {
            cur[j] = &cur[j - 1] + &prev[j];
        }
        prev = cur;
    }
    prev[m].clone()
}

/// `c(n, m) / c(n, m − 1)` for `m = 1..=n`.
pub fn urn_ratio_report(n: usize) -> Vec<(usize, f64)> {
    (1..=n)
        .map(|m| {
            let a = urn_counts(n, m, UrnVariant::Abstract).unwrap_or_default();
            let b = urn_counts(n, m - 1, UrnVariant::Abstract).unwrap_or_default();
            (m, crate::enumeration::ln_big(&a).exp() / crate::enumeration::ln_big(&b).exp())
        })
        .collect()
}

pub fn catalan(n: u64) -> BigUint {
    let mut c = BigUint::one();
    for k in 0..n {
        c = c * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> PlanarTree {
        s.parse().unwrap()
    }

    #[test]
    fn small_trees_decode() {
        let e = decode(&PlanarTree::leaf()).unwrap();
        assert_eq!((e.n(), e.m()), (0, 2));
        let tri = decode(&t("(2(0)(0))")).unwrap();
        assert_eq!((tri.n(), tri.m()), (1, 3));
        assert_eq!(tri.vertex_count(), 3);
        assert_eq!(encode(&tri).unwrap(), t("(2(0)(0))"));
    }

    #[test]
    fn parens_round_trip() {
        let x = t("(2(1(2(0)(2(0)(0))))(0))");
        assert_eq!(x.preorder(), &[2, 1, 2, 0, 2, 0, 0, 0]);
        assert_eq!(x.to_string().parse::<PlanarTree>().unwrap(), x);
    }

    #[test]
    fn malformed_input() {
        assert!("(1(0))".parse::<PlanarTree>().is_err());
        assert!("(2(0))".parse::<PlanarTree>().is_err());
        assert!("(0)(0)".parse::<PlanarTree>().is_err());
        assert!("(3)".parse::<PlanarTree>().is_err());
        assert!("(0".parse::<PlanarTree>().is_err());
        assert!(PlanarTree::from_preorder(vec![2, 0]).is_err());
    }

    #[test]
    fn weight_of_triangle() {
        let w = tree_weight(&t("(2(0)(0))"), 0.5, 0.2, 0.3).unwrap();
        assert!((w - 0.25 * 0.3).abs() < 1e-15);
        assert_eq!(tree_weight(&PlanarTree::leaf(), 0.5, 0.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn enumeration_sizes() {
        let all = enumerate_trees(5);
        assert!(all.iter().all(|x| x.len() <= 5));
        assert_eq!(trees_with_faces(1).len(), 1);
        // C(3,3) + C(3,5)
        assert_eq!(trees_with_faces(3).len(), 4 + 5);
    }

    #[test]
    fn urns_and_catalan() {
        for k in 1..10 {
            assert_eq!(urn_counts(k, 1, UrnVariant::Abstract).unwrap(), BigUint::from(k));
        }
        assert_eq!(urn_counts(3, 2, UrnVariant::Abstract).unwrap(), BigUint::from(5u32));
        assert_eq!(urn_counts(5, 5, UrnVariant::Abstract).unwrap(), catalan(5));
        assert_eq!(catalan(0), BigUint::one());
        assert_eq!(catalan(3), BigUint::from(5u32));
    }

    #[test]
    fn uniform_sampler_hits_target() {
        let table = ScaledCounts::new(11, 3);
        let mut rng = substream(5, 0, 0);
        for _ in 0..50 {
            let x = sample_uniform_tree(&table, 11, 3, &mut rng).unwrap();
            assert_eq!((x.faces(), x.boundary()), (11, 3));
            let m = decode(&x).unwrap();
            assert_eq!((m.n(), m.m()), (11, 3));
        }
        assert!(sample_uniform_tree(&table, 11, 4, &mut rng).is_err());
    }

    #[test]
    fn near_critical_sampler_rejected() {
        let third = 1.0 / 3.0;
        // still subcritical, so it must construct
        assert!(TreeSampler::new(1.0 - 2.0 * third, third, third).is_ok());
        assert!(TreeSampler::new(0.5, 0.2, 0.2).is_err());
    }
}
