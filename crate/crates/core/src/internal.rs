//! Bulk dynamics on sphere triangulations.
//!
//! Two chains live here. The flip chain (all edges flip at rate λ) keeps `V`, `L` and
//! `N` fixed; the degree of a vertex then follows, as `N → ∞`, the walk on `[3, ∞)`
//! with rates `λi` up and down. The Alexander chain lets every vertex subdivide a
//! random edge of its link at rate λ and undo a subdivision at a degree-4 link vertex
//! at rate μ.

use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::BigRational;
use rand::Rng as _;
use serde::Serialize;

use crate::enumeration::generate_maps;
use crate::error::{Error, Result};
use crate::exec;
use crate::map::{CanonicalCode, MapMode, RootedMap};
use crate::rng::{exp_time, substream, Rng};
use crate::stats::{self, Estimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum Firing {
    /// Every vertex carries its clocks.
    Global,
    /// Only the tracked vertex, its link and the vertices across its link edges fire:
    /// exactly the vertices whose moves change the tracked degree.
    #[default]
    Local,
}

#[derive(Debug, Clone, Serialize)]
pub struct InternalConfig {
    pub lambda: f64,
    pub mu: f64,
    pub mode: MapMode,
    pub horizon: f64,
    pub seed: u64,
    pub firing: Firing,
    /// Stop once the tracked degree reaches this value.
    pub stop_degree: Option<u32>,
    pub max_vertices: usize,
    /// Full validation every this many events, 0 for only at the end.
    pub validate_every: u64,
    pub keep_trace: bool,
}

impl InternalConfig {
    pub fn new(lambda: f64, mu: f64, horizon: f64, seed: u64) -> Self {
        InternalConfig {
            lambda,
            mu,
            mode: MapMode::Simplicial,
            horizon,
            seed,
            firing: Firing::Local,
            stop_degree: None,
            max_vertices: 1 << 22,
            validate_every: 0,
            keep_trace: false,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.mu >= 0.0 && self.lambda + self.mu > 0.0) {
            return Err(Error::Domain("rates must be non-negative and not both zero".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::Domain("horizon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InternalTrace {
    pub seed: u64,
    pub replica: u64,
    /// Tracked degree after every change, with its time.
    pub trace: Vec<(f64, u32)>,
    pub disappeared_at: Option<f64>,
    pub final_degree: u32,
    pub max_degree: u32,
    pub time: f64,
    pub events: u64,
    pub a_moves: u64,
    pub inverse_moves: u64,
    /// Sum, squared sum and count of the changes of the tracked degree; disappearance
    /// counts as a drop to 0.
    pub increment_sum: i64,
    pub increment_sq: u64,
    pub increments: u64,
    pub final_vertices: usize,
    pub gauss_bonnet_ok: bool,
}

fn random_link_subdivision(map: &mut RootedMap, v: u32, rng: &mut Rng) -> Result<u32> {
    let out = map.out_edges(v);
    let o = out[rng.random_range(0..out.len())];
    // the link edge of v opposite to o's triangle
    map.subdivide_edge(map.next(o))
}

/// Undoes a subdivision at a uniform degree-4 link vertex of `v` with a uniform
/// admissible pairing. Returns the removed vertex.
fn random_link_unsubdivision(map: &mut RootedMap, v: u32, rng: &mut Rng) -> Result<Option<u32>> {
    let mut cands: Vec<u32> = map.neighbours(v).into_iter().filter(|&u| map.degree(u) == 4).collect();
    cands.sort_unstable();
    cands.dedup();
    if cands.is_empty() {
        return Ok(None);
    }
    let x = cands[rng.random_range(0..cands.len())];
    let opts = map.unsubdivide_options(x);
    if opts.is_empty() {
        return Ok(None);
    }
    let p = opts[rng.random_range(0..opts.len())];
    map.unsubdivide(x, p)?;
    Ok(Some(x))
}

/// `{i} ∪ link(i) ∪` the vertices across the link edges of `i`.
fn local_set(map: &RootedMap, i: u32, stamp: &mut Vec<u32>, round: u32, out: &mut Vec<u32>) {
    out.clear();
    let mut push = |v: u32, out: &mut Vec<u32>| {
        if stamp.len() <= v as usize {
            stamp.resize(v as usize + 1, 0);
        }
        if stamp[v as usize] != round {
            stamp[v as usize] = round;
            out.push(v);
        }
    };
    push(i, out);
    for o in map.out_edges(i) {
        push(map.dest(o), out);
        let l = map.next(o);
        let across = map.dest(map.next(crate::map::twin(l)));
        push(across, out);
    }
}

/// Alive vertex ids with O(1) insertion and removal.
struct VertexSet {
    list: Vec<u32>,
    pos: Vec<u32>,
}

impl VertexSet {
    fn new(map: &RootedMap) -> Self {
        let mut s = VertexSet { list: Vec::new(), pos: Vec::new() };
        for v in map.vertices() {
            s.insert(v);
        }
        s
    }

    fn insert(&mut self, v: u32) {
        if self.pos.len() <= v as usize {
            self.pos.resize(v as usize + 1, u32::MAX);
        }
        self.pos[v as usize] = self.list.len() as u32;
        self.list.push(v);
    }

    fn remove(&mut self, v: u32) {
        let i = self.pos[v as usize] as usize;
        let last = self.list.pop().expect("non-empty");
        if last != v {
            self.list[i] = last;
            self.pos[last as usize] = i as u32;
        }
        self.pos[v as usize] = u32::MAX;
    }
}

/// One run of the Alexander chain. The tracked vertex is born at time 0 by a
/// subdivision of a random octahedron edge.
pub fn simulate_internal(cfg: &InternalConfig, replica: u64) -> Result<InternalTrace> {
    cfg.check()?;
    let mut rng = substream(cfg.seed, replica, 0x696e);
    let mut map = RootedMap::octahedron().with_mode(cfg.mode)?;
    let hs: Vec<u32> = map.half_edges().collect();
    let i = map.subdivide_edge(hs[rng.random_range(0..hs.len())])?;
    let mut verts = VertexSet::new(&map);
    let mut stamp = Vec::new();
    let mut round = 0u32;
    let mut local = Vec::new();
    let mut tr = InternalTrace {
        seed: cfg.seed,
        replica,
        trace: vec![(0.0, map.degree(i))],
        disappeared_at: None,
        final_degree: map.degree(i),
        max_degree: map.degree(i),
        time: 0.0,
        events: 0,
        a_moves: 0,
        inverse_moves: 0,
        increment_sum: 0,
        increment_sq: 0,
        increments: 0,
        final_vertices: 0,
        gauss_bonnet_ok: true,
    };
    let rate = cfg.lambda + cfg.mu;
    let mut t = 0.0;
    let mut q = map.degree(i);
    loop {
        let pool = match cfg.firing {
            Firing::Global => verts.list.len(),
            Firing::Local => {
                round = round.wrapping_add(1).max(1);
                local_set(&map, i, &mut stamp, round, &mut local);
                local.len()
            }
        };
        t += exp_time(&mut rng, rate * pool as f64);
        if t > cfg.horizon {
            t = cfg.horizon;
            break;
        }
        let v = match cfg.firing {
            Firing::Global => verts.list[rng.random_range(0..pool)],
            Firing::Local => local[rng.random_range(0..pool)],
        };
        tr.events += 1;
        if rng.random::<f64>() * rate < cfg.lambda {
            let x = random_link_subdivision(&mut map, v, &mut rng)?;
            verts.insert(x);
            tr.a_moves += 1;
        } else if let Some(x) = random_link_unsubdivision(&mut map, v, &mut rng)? {
            verts.remove(x);
            tr.inverse_moves += 1;
            if x == i {
                tr.disappeared_at = Some(t);
                // the vertex leaves with its degree
                tr.increment_sum -= q as i64;
                tr.increment_sq += (q as u64) * (q as u64);
                tr.increments += 1;
                q = 0;
                if cfg.keep_trace {
                    tr.trace.push((t, 0));
                }
                break;
            }
        }
        let nq = map.degree(i);
        if nq != q {
            let d = nq as i64 - q as i64;
            tr.increment_sum += d;
            tr.increment_sq += (d * d) as u64;
            tr.increments += 1;
            q = nq;
            tr.max_degree = tr.max_degree.max(q);
            if cfg.keep_trace {
                tr.trace.push((t, q));
            }
        }
        if cfg.validate_every > 0 && tr.events % cfg.validate_every == 0 {
            map.validate()?;
        }
        if map.vertex_count() > cfg.max_vertices {
            return Err(Error::ResourceCap(format!("more than {} vertices", cfg.max_vertices)));
        }
        if cfg.stop_degree.is_some_and(|s| q >= s) {
            break;
        }
    }
    map.validate()?;
    tr.gauss_bonnet_ok = crate::map::gauss_bonnet_defect(&map)? == 12;
    tr.time = t;
    tr.final_degree = q;
    tr.final_vertices = map.vertex_count();
    Ok(tr)
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub lambda: f64,
    pub mu: f64,
    pub seed: u64,
    pub runs: usize,
    pub horizon: f64,
    pub disappeared: usize,
    pub disappeared_fraction: Estimate,
    pub threshold: u32,
    pub exceeded: usize,
    pub exceeded_fraction: Estimate,
    /// Mean change of the tracked degree per jump of it, pooled over runs.
    pub mean_increment: Estimate,
    pub mean_final_degree: f64,
    pub failed_checks: usize,
}

/// Replicated runs with the disappearance and degree-threshold statistics.
pub fn dichotomy(cfg: &InternalConfig, runs: usize, threshold: u32) -> Result<DichotomyReport> {
    let mut c = cfg.clone();
    c.stop_degree = Some(threshold + 1);
    let res: Vec<InternalTrace> =
        exec::map_indices(runs, |r| simulate_internal(&c, r as u64)).into_iter().collect::<Result<_>>()?;
    let disappeared = res.iter().filter(|r| r.disappeared_at.is_some()).count();
    let exceeded = res.iter().filter(|r| r.max_degree > threshold).count();
    let n: u64 = res.iter().map(|r| r.increments).sum();
    let sum: i64 = res.iter().map(|r| r.increment_sum).sum();
    let sq: u64 = res.iter().map(|r| r.increment_sq).sum();
    let nf = n.max(1) as f64;
    let m = sum as f64 / nf;
    let v = (sq as f64 / nf - m * m).max(0.0);
    Ok(DichotomyReport {
        lambda: cfg.lambda,
        mu: cfg.mu,
        seed: cfg.seed,
        runs,
        horizon: cfg.horizon,
        disappeared,
        disappeared_fraction: Estimate::proportion(disappeared as u64, runs as u64),
        threshold,
        exceeded,
        exceeded_fraction: Estimate::proportion(exceeded as u64, runs as u64),
        mean_increment: Estimate { value: m, half_width: 1.96 * (v / nf).sqrt() },
        mean_final_degree: res.iter().map(|r| r.final_degree as f64).sum::<f64>() / runs as f64,
        failed_checks: res.iter().filter(|r| !r.gauss_bonnet_ok).count(),
    })
}

/// Law at time `t` of the walk on `{3, …, k_max}` with rates `λi` up and `λi` down
/// (none below 3, none above `k_max`), started at `start`, by uniformization.
pub fn walk_transient(lambda: f64, start: u32, t: f64, k_max: usize) -> Result<Vec<f64>> {
    if (start as usize) < 3 || start as usize > k_max || lambda < 0.0 || t < 0.0 {
        return Err(Error::Domain("bad walk parameters".into()));
    }
    let mut p = vec![0.0; k_max + 1];
    p[start as usize] = 1.0;
    let big = 2.0 * lambda * k_max as f64;
    if big * t == 0.0 {
        return Ok(p);
    }
    let up = |i: usize| if i < k_max { lambda * i as f64 } else { 0.0 };
    let down = |i: usize| if i > 3 { lambda * i as f64 } else { 0.0 };
    let mut out = vec![0.0; k_max + 1];
    // Poisson weights computed in log space
    let lt = big * t;
    let n_max = (lt + 12.0 * lt.sqrt() + 30.0) as usize;
    let mut log_w = -lt;
    for n in 0..=n_max {
        let w = log_w.exp();
        for (o, x) in out.iter_mut().zip(&p) {
            *o += w * x;
        }
        let mut next = vec![0.0; k_max + 1];
        for i in 3..=k_max {
            let (u, d) = (up(i) / big, down(i) / big);
            next[i] += p[i] * (1.0 - u - d);
            if u > 0.0 {
                next[i + 1] += p[i] * u;
            }
            if d > 0.0 {
                next[i - 1] += p[i] * d;
            }
        }
        p = next;
        log_w += lt.ln() - ((n + 1) as f64).ln();
    }
    Ok(out)
}

/// One path of the walk with rates `λi` up and `λi` down (none below 3) up to time `t`.
pub fn simulate_walk(lambda: f64, start: u32, t: f64, rng: &mut Rng) -> u32 {
    let mut q = start;
    let mut now = 0.0;
    loop {
        let down = if q > 3 { lambda * q as f64 } else { 0.0 };
        let total = lambda * q as f64 + down;
        now += exp_time(rng, total);
        if now > t {
            return q;
        }
        if rng.random::<f64>() * total < lambda * q as f64 {
            q += 1;
        } else {
            q -= 1;
        }
    }
}

/// A simplicial sphere with `n` faces from random vertex insertions and `sweeps`
/// rounds of random flips.
pub fn random_sphere(n: usize, sweeps: usize, rng: &mut Rng) -> Result<RootedMap> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::Domain("a sphere triangulation has an even number ≥ 4 of faces".into()));
    }
    let mut map = RootedMap::tetrahedron();
    while map.face_count() < n {
        let hs: Vec<u32> = map.half_edges().collect();
        map.insert_vertex(hs[rng.random_range(0..hs.len())])?;
    }
    let hs: Vec<u32> = map.half_edges().collect();
    for _ in 0..sweeps * hs.len() / 2 {
        let h = hs[rng.random_range(0..hs.len())];
        if map.can_flip(h) {
            map.flip(h)?;
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkEntry {
    pub faces: usize,
    pub tv: f64,
    /// Expected TV from sampling alone, `Σ_k √(p_k(1−p_k)/R)/2` under the walk law.
    pub noise_tv: f64,
    pub mean_change: Estimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkReport {
    pub lambda: f64,
    pub t: f64,
    pub seed: u64,
    pub replicas: usize,
    pub entries: Vec<WalkEntry>,
    /// Variance of the degree at later times: the fixed-size chain against the walk.
    pub spread: Vec<(f64, f64, f64)>,
}

/// Degree of a uniform vertex after time `t` of the flip chain, against the walk
/// started from the same degree.
pub fn limiting_walk_compare(lambda: f64, sizes: &[usize], t: f64, replicas: usize, seed: u64) -> Result<WalkReport> {
    const K: usize = 120;
    let mut entries = Vec::new();
    for (si, &n) in sizes.iter().enumerate() {
        let runs: Vec<(u32, u32)> = exec::map_indices(replicas, |r| {
            let mut rng = substream(seed, r as u64, 0x7700 + si as u64);
            let mut map = random_sphere(n, 20, &mut rng)?;
            let vs: Vec<u32> = map.vertices().collect();
            let v = vs[rng.random_range(0..vs.len())];
            let q0 = map.degree(v);
            flip_chain(&mut map, lambda, t, &mut rng)?;
            Ok((q0, map.degree(v)))
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let mut walk = vec![0.0; K + 1];
        let mut cache: HashMap<u32, Vec<f64>> = HashMap::new();
        let mut emp = vec![0.0; K + 1];
        for &(q0, q1) in &runs {
            let w = match cache.get(&q0) {
                Some(w) => w,
                None => {
                    let w = walk_transient(lambda, q0.min(K as u32), t, K)?;
                    cache.entry(q0).or_insert(w)
                }
            };
            for (a, b) in walk.iter_mut().zip(w) {
                *a += b / replicas as f64;
            }
            emp[(q1 as usize).min(K)] += 1.0 / replicas as f64;
        }
        let noise = walk.iter().map(|p| (p * (1.0 - p) / replicas as f64).sqrt()).sum::<f64>() * 0.5;
        let changes: Vec<f64> = runs.iter().map(|&(a, b)| b as f64 - a as f64).collect();
        let (m, v) = stats::mean_var(&changes);
        entries.push(WalkEntry {
            faces: n,
            tv: stats::total_variation(&emp, &walk),
            noise_tv: noise,
            mean_change: Estimate { value: m, half_width: 1.96 * (v / replicas as f64).sqrt() },
        });
    }
    // spread at growing times for the smallest size, replicas/10 runs
    let mut spread = Vec::new();
    if let Some(&n) = sizes.first() {
        let r = (replicas / 10).max(50);
        for (k, &tt) in [1.0, 10.0, 100.0].iter().enumerate() {
            let runs: Vec<(u32, u32)> = exec::map_indices(r, |j| {
                let mut rng = substream(seed, j as u64, 0x7800 + k as u64);
                let mut map = random_sphere(n, 20, &mut rng)?;
                let vs: Vec<u32> = map.vertices().collect();
                let v = vs[rng.random_range(0..vs.len())];
                let q0 = map.degree(v);
                flip_chain(&mut map, lambda, tt / lambda.max(1e-300), &mut rng)?;
                Ok((q0, map.degree(v)))
            })
            .into_iter()
            .collect::<Result<_>>()?;
            let chain: Vec<f64> = runs.iter().map(|&(_, b)| b as f64).collect();
            let (_, var_chain) = stats::mean_var(&chain);
            // the walk from the same starting degrees, simulated
            let walk: Vec<f64> = runs
                .iter()
                .enumerate()
                .map(|(j, &(q0, _))| {
                    let mut rng = substream(seed, j as u64, 0x7900 + k as u64);
                    simulate_walk(lambda, q0, tt / lambda.max(1e-300), &mut rng) as f64
                })
                .collect();
            let (_, var_walk) = stats::mean_var(&walk);
            spread.push((tt, var_chain, var_walk));
        }
    }
    Ok(WalkReport { lambda, t, seed, replicas, entries, spread })
}

/// Every edge flips at rate λ where allowed, for time `t`.
pub fn flip_chain(map: &mut RootedMap, lambda: f64, t: f64, rng: &mut Rng) -> Result<u64> {
    let hs: Vec<u32> = map.half_edges().collect();
    let rate = lambda * hs.len() as f64 / 2.0;
    let mut now = 0.0;
    let mut flips = 0;
    if rate == 0.0 {
        return Ok(0);
    }
    loop {
        now += exp_time(rng, rate);
        if now > t {
            return Ok(flips);
        }
        let h = hs[rng.random_range(0..hs.len())];
        if map.can_flip(h) {
            map.flip(h)?;
            flips += 1;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub faces: usize,
    pub states: usize,
    pub components: Vec<usize>,
    /// Simplicial spheres with this many faces, counted by exhaustive enumeration.
    pub class_size: Option<usize>,
    pub move_edges: usize,
    pub unpaired: usize,
    /// Whether the uniform law satisfies the balance equations exactly.
    pub uniform_balanced: bool,
}

/// Flip graph over simplicial spheres with `faces` faces, each distinct neighbouring
/// state reached at rate 1. Starts from every exhaustively enumerated state when
/// `faces ≤ 10`, otherwise from a stacked sphere.
pub fn component_reversibility(faces: usize) -> Result<ComponentReport> {
    const CAP: usize = 500_000;
    if faces < 4 || faces % 2 == 1 {
        return Err(Error::Domain("a sphere triangulation has an even number ≥ 4 of faces".into()));
    }
    let class = if faces <= 10 { Some(simplicial_spheres(faces)?) } else { None };
    let mut seeds: Vec<RootedMap> = match &class {
        Some(c) => c.values().cloned().collect(),
        None => {
            let mut m = RootedMap::tetrahedron();
            while m.face_count() < faces {
                m.insert_vertex(m.out_edges(m.out_edges(0).len() as u32 % 4)[0])?;
            }
            vec![m]
        }
    };
    seeds.sort_by_key(|m| m.unrooted_code());
    let mut index: HashMap<CanonicalCode, usize> = HashMap::new();
    let mut reps: Vec<RootedMap> = Vec::new();
    let mut comp: Vec<usize> = Vec::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut components = Vec::new();
    for s in seeds {
        let code = s.unrooted_code();
        if index.contains_key(&code) {
            continue;
        }
        let c = components.len();
        components.push(0usize);
        index.insert(code, reps.len());
        reps.push(s);
        comp.push(c);
        adj.push(Vec::new());
        let mut queue = VecDeque::from([reps.len() - 1]);
        while let Some(x) = queue.pop_front() {
            components[c] += 1;
            let mut nb = HashSet::new();
            for h in reps[x].half_edges().collect::<Vec<_>>() {
                if h % 2 == 1 || !reps[x].can_flip(h) {
                    continue;
                }
                let mut y = reps[x].clone();
                y.flip(h)?;
                let code = y.unrooted_code();
                let yi = match index.get(&code) {
                    Some(&yi) => yi,
                    None => {
                        let yi = reps.len();
                        index.insert(code, yi);
                        reps.push(y);
                        comp.push(c);
                        adj.push(Vec::new());
                        queue.push_back(yi);
                        if reps.len() > CAP {
                            return Err(Error::ResourceCap(format!("more than {CAP} states")));
                        }
                        yi
                    }
                };
                if yi != x {
                    nb.insert(yi);
                }
            }
            let mut nb: Vec<usize> = nb.into_iter().collect();
            nb.sort_unstable();
            adj[x] = nb;
        }
    }
    let mut unpaired = 0;
    let mut edges = 0;
    for (x, nb) in adj.iter().enumerate() {
        for &y in nb {
            edges += 1;
            if adj[y].binary_search(&x).is_err() {
                unpaired += 1;
            }
        }
    }
    // uniform law: inflow equals outflow at every state, in exact rationals
    let one = BigRational::from_integer(1.into());
    let mut inflow = vec![BigRational::from_integer(0.into()); reps.len()];
    for nb in &adj {
        for &y in nb {
            inflow[y] += &one;
        }
    }
    let uniform_balanced = adj.iter().zip(&inflow).all(|(nb, i)| BigRational::from_integer(nb.len().into()) == *i);
    Ok(ComponentReport {
        faces,
        states: reps.len(),
        components,
        class_size: class.map(|c| c.len()),
        move_edges: edges,
        unpaired,
        uniform_balanced,
    })
}

/// Simplicial spheres with `faces` faces up to isomorphism, by closing every rooted
/// disk with `faces − 1` triangles and a boundary of length 3.
pub fn simplicial_spheres(faces: usize) -> Result<HashMap<CanonicalCode, RootedMap>> {
    let gen = generate_maps(faces - 1)?;
    let mut out = HashMap::new();
    for d in gen.get(faces - 1, 3) {
        let s = d.close_boundary()?;
        if let Ok(s) = s.with_mode(MapMode::Simplicial) {
            out.entry(s.unrooted_code()).or_insert(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_growth_adds_one_vertex_per_move() {
        let mut cfg = InternalConfig::new(1.0, 0.0, 3.0, 1);
        cfg.firing = Firing::Global;
        cfg.validate_every = 10;
        let r = simulate_internal(&cfg, 0).unwrap();
        assert_eq!(r.final_vertices as u64, 7 + r.a_moves);
        assert_eq!(r.inverse_moves, 0);
        assert!(r.gauss_bonnet_ok);
    }

    #[test]
    fn walk_starts_as_point_mass_and_keeps_mass() {
        let p = walk_transient(1.0, 6, 0.0, 50).unwrap();
        assert_eq!(p[6], 1.0);
        let p = walk_transient(1.0, 6, 0.5, 200).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(p[2], 0.0);
    }

    fn mirror(m: &RootedMap) -> RootedMap {
        let m = m.compacted();
        let mut seen = HashSet::new();
        let mut faces = Vec::new();
        for h in m.half_edges() {
            let f = m.face_of(h);
            if seen.insert(f) {
                let c = m.face_cycle(h);
                faces.push([m.origin(c[0]), m.origin(c[2]), m.origin(c[1])]);
            }
        }
        RootedMap::from_triangles(m.vertex_count(), &faces, MapMode::Simplicial).unwrap()
    }

    #[test]
    fn small_sphere_classes() {
        // 1, 1, 2, 5 simplicial spheres with 4, 5, 6, 7 vertices up to reflection
        for (faces, count) in [(4, 1), (6, 1), (8, 2), (10, 5)] {
            let classes = simplicial_spheres(faces).unwrap();
            let unoriented: HashSet<_> =
                classes.values().map(|m| m.unrooted_code().min(mirror(m).unrooted_code())).collect();
            assert_eq!(unoriented.len(), count, "{faces} faces");
        }
    }

    #[test]
    fn octahedron_scale_flip_graph() {
        let r = component_reversibility(8).unwrap();
        assert_eq!(r.components, vec![2]);
        assert_eq!(r.unpaired, 0);
        assert!(r.uniform_balanced);
    }

    #[test]
    fn local_and_global_runs_stay_valid() {
        for firing in [Firing::Local, Firing::Global] {
            let mut cfg = InternalConfig::new(1.0, 1.0, 5.0, 3);
            cfg.firing = firing;
            cfg.validate_every = 1;
            let r = simulate_internal(&cfg, 2).unwrap();
            assert!(r.gauss_bonnet_ok);
        }
    }
}
