//! The quadratic quasi-process on measures over `(N, m)`:
//! `q' = r1·(linear shift) + r2·(self-convolution) + (1 − r1 − r2)·δ(0,2)`.
//!
//! The linear kernel sends `(N,m)` to `(N+1,m−1)` and is defective at `m = 2`: that
//! share of mass leaves the system. The quadratic kernel glues `(N1,m1)` and
//! `(N2,m2)` into `(N1+N2+1, m1+m2−1)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::gf;
use crate::rng::substream;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcessParams {
    pub r1: f64,
    pub r2: f64,
}

impl ProcessParams {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        let ok = r1.is_finite() && r2.is_finite() && r1 >= 0.0 && r2 >= 0.0 && r1 + r2 <= 1.0 + 1e-15;
        if !ok {
            return Err(Error::Domain(format!("need r1, r2 >= 0 and r1 + r2 <= 1, got ({r1}, {r2})")));
        }
        Ok(ProcessParams { r1, r2 })
    }

    /// Continuous-time rates `(λ0, λ1, λ2)` turned into step probabilities.
    pub fn from_rates(l0: f64, l1: f64, l2: f64) -> Result<Self> {
        let s = l0 + l1 + l2;
        if !(s > 0.0) || l0 < 0.0 || l1 < 0.0 || l2 < 0.0 {
            return Err(Error::Domain("rates must be nonnegative with positive sum".into()));
        }
        Self::new(l1 / s, l2 / s)
    }

    pub fn r0(&self) -> f64 {
        (1.0 - self.r1 - self.r2).max(0.0)
    }

    /// `β = (1 − r1 − r2) r2 / r1`, undefined at `r1 = 0`.
    pub fn beta(&self) -> Option<f64> {
        (self.r1 > 0.0).then(|| self.r0() * self.r2 / self.r1)
    }
}

/// Nonnegative values `q(N, m)` on `0 ≤ N ≤ n_max`, `0 ≤ m ≤ m_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureGrid {
    pub n_max: usize,
    pub m_max: usize,
    values: Vec<f64>,
    /// Mass the last step would have put outside the grid.
    pub truncation_loss: f64,
}

impl MeasureGrid {
    pub fn zero(n_max: usize, m_max: usize) -> Self {
        MeasureGrid { n_max, m_max, values: vec![0.0; (n_max + 1) * (m_max + 1)], truncation_loss: 0.0 }
    }

    /// Grid wide enough that no linear move is ever truncated.
    pub fn for_rows(n_max: usize) -> Self {
        Self::zero(n_max, n_max + 2)
    }

    #[inline]
    fn idx(&self, n: usize, m: usize) -> usize {
        n * (self.m_max + 1) + m
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        if n > self.n_max || m > self.m_max {
            0.0
        } else {
            self.values[self.idx(n, m)]
        }
    }

    pub fn set(&mut self, n: usize, m: usize, v: f64) {
        let i = self.idx(n, m);
        self.values[i] = v;
    }

    pub fn row(&self, n: usize) -> &[f64] {
        let s = n * (self.m_max + 1);
        &self.values[s..s + self.m_max + 1]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Mass on `m ≥ 3`, the part that the linear kernel moves.
    pub fn movable_mass(&self) -> f64 {
        (0..=self.n_max).map(|n| self.row(n)[3.min(self.m_max + 1)..].iter().sum::<f64>()).sum()
    }

    pub fn sup_distance(&self, other: &MeasureGrid) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `½ Σ |a − b|`.
    pub fn tv_distance(&self, other: &MeasureGrid) -> f64 {
        0.5 * self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    pub fn is_valid(&self) -> bool {
        self.values.iter().all(|v| v.is_finite() && *v >= 0.0)
    }

    /// CSV `N,m,value` over nonzero entries.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,m,value\n");
        for n in 0..=self.n_max {
            for m in 0..=self.m_max {
                let v = self.get(n, m);
                if v != 0.0 {
                    s.push_str(&format!("{n},{m},{v:e}\n"));
                }
            }
        }
        s
    }
}

/// One row of the image: linear inflow from row `n−1` plus the gluing term.
fn image_row(q: &MeasureGrid, p: &ProcessParams, n: usize) -> Vec<f64> {
    let mw = q.m_max + 1;
    let mut out = vec![0.0; mw];
    if n == 0 {
        out[2] = p.r0();
        return out;
    }
    if p.r1 > 0.0 {
        let prev = q.row(n - 1);
        for m in 2..mw.saturating_sub(1) {
            out[m] += p.r1 * prev[m + 1];
        }
    }
    if p.r2 > 0.0 {
        for n1 in 0..n {
            let a = q.row(n1);
            let b = q.row(n - 1 - n1);
            for (m1, &x) in a.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                for (m2, &y) in b.iter().enumerate() {
                    if y == 0.0 || m1 + m2 == 0 {
                        continue;
                    }
                    let m = m1 + m2 - 1;
                    if m < mw {
                        out[m] += p.r2 * x * y;
                    }
                }
            }
        }
    }
    out
}

/// One application of the transformation.
pub fn step(q: &MeasureGrid, p: &ProcessParams) -> MeasureGrid {
    let rows = exec::map_indices(q.n_max + 1, |n| image_row(q, p, n));
    let mut out = MeasureGrid::zero(q.n_max, q.m_max);
    for (n, r) in rows.into_iter().enumerate() {
        let s = n * (q.m_max + 1);
        out.values[s..s + r.len()].copy_from_slice(&r);
    }
    let mass = q.total();
    let expected = p.r1 * q.movable_mass() + p.r2 * mass * mass + p.r0();
    out.truncation_loss = (expected - out.total()).max(0.0);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPoint {
    pub grid: MeasureGrid,
    pub iterations: usize,
    pub last_change: f64,
    /// `‖T(q) − q‖∞` at the returned grid.
    pub residual: f64,
}

/// Iterate from the zero measure until the sup-norm change drops below `tol`.
pub fn fixed_point(p: &ProcessParams, tol: f64, n_max: usize, m_max: usize, max_iter: usize) -> Result<FixedPoint> {
    let mut q = MeasureGrid::zero(n_max, m_max);
    let mut change = f64::INFINITY;
    for it in 1..=max_iter {
        let next = step(&q, p);
        change = next.sup_distance(&q);
        q = next;
        if !q.is_valid() {
            return Err(Error::NoConvergence(format!("non-finite values after {it} iterations")));
        }
        if change < tol {
            let residual = step(&q, p).sup_distance(&q);
            return Ok(FixedPoint { grid: q, iterations: it, last_change: change, residual });
        }
    }
    Err(Error::NoConvergence(format!(
        "sup change {change:e} after {max_iter} iterations, total mass {:e}",
        q.total()
    )))
}

/// The fixed point on a grid with `m_max = n_max + 2`, solved row by row. Row `N`
/// of the image only depends on rows below `N`, so one pass is exact.
pub fn layered_fixed_point(p: &ProcessParams, n_max: usize) -> MeasureGrid {
    let mut q = MeasureGrid::for_rows(n_max);
    for n in 0..=n_max {
        let r = image_row(&q, p, n);
        let s = n * (q.m_max + 1);
        q.values[s..s + r.len()].copy_from_slice(&r);
    }
    q
}

/// Largest mixed error `|a − b| / max(1, |b|)` between `q*(N,m)·(r2/r1)·r1^{−N}` and the
/// canonical coefficients at `β = r0 r2 / r1`, over `N, m ≤ bound`.
pub fn scaling_deviation(q: &MeasureGrid, p: &ProcessParams, bound: usize) -> Result<f64> {
    let beta = p.beta().filter(|b| *b > 0.0).ok_or_else(|| Error::Domain("need r1, r2, r0 > 0".into()))?;
    let w = gf::canonical_table_f64(beta, bound.min(q.n_max));
    let mut worst = 0.0f64;
    for (n, row) in w.iter().enumerate() {
        let scale = (p.r2 / p.r1) * p.r1.powi(-(n as i32));
        for m in 2..=(n + 2).min(bound).min(q.m_max) {
            let a = q.get(n, m) * scale;
            let b = row[m - 2];
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub trials: usize,
    pub bound: f64,
    pub max_factor: f64,
    pub mean_factor: f64,
    pub violations: usize,
}

fn random_measure<R: rand::Rng>(rng: &mut R, n_sup: usize, m_sup: usize, grid: (usize, usize)) -> MeasureGrid {
    let mut q = MeasureGrid::zero(grid.0, grid.1);
    let mut s = 0.0;
    for n in 0..=n_sup {
        for m in 2..=m_sup.min(n + 2) {
            if (n + m) % 2 == 0 && rng.random::<f64>() < 0.7 {
                let v = -(1.0 - rng.random::<f64>()).ln();
                q.set(n, m, v);
                s += v;
            }
        }
    }
    if s == 0.0 {
        q.set(0, 2, 1.0);
        s = 1.0;
    }
    for v in &mut q.values {
        *v /= s;
    }
    q
}

/// TV contraction factor of one step over random pairs of probability measures.
/// Supports are small enough that the image is never truncated.
pub fn contraction_estimate(p: &ProcessParams, trials: usize, seed: u64) -> ContractionReport {
    let (n_sup, m_sup) = (6, 8);
    let grid = (2 * n_sup + 2, 2 * m_sup + 2);
    let bound = p.r1 + 2.0 * p.r2;
    let factors = exec::map_indices(trials, |i| {
        let mut rng = substream(seed, i as u64, 0x6e6c);
        let a = random_measure(&mut rng, n_sup, m_sup, grid);
        let b = random_measure(&mut rng, n_sup, m_sup, grid);
        let d0 = a.tv_distance(&b);
        let d1 = step(&a, p).tv_distance(&step(&b, p));
        if d0 == 0.0 {
            0.0
        } else {
            d1 / d0
        }
    });
    let max_factor = factors.iter().cloned().fold(0.0, f64::max);
    ContractionReport {
        trials,
        bound,
        max_factor,
        mean_factor: stats::mean(&factors),
        violations: factors.iter().filter(|&&f| f > bound + 1e-12).count(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub r1: f64,
    pub r2: f64,
    pub beta: f64,
    /// Predicted per-column finiteness: `r1 ≤ x1(β)`.
    pub predicted_column_finite: bool,
    /// Measured per-step tail ratio of `q*(N, m_col)` in N.
    pub column_ratio: f64,
    pub empirical_column_finite: bool,
    /// Predicted total finiteness: `y = 1` inside the y-radius at `x = r1`.
    pub predicted_total_finite: bool,
    pub total_ratio: f64,
    pub empirical_total_finite: bool,
}

impl ScanPoint {
    pub fn column_agrees(&self) -> bool {
        self.predicted_column_finite == self.empirical_column_finite
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub n_max: usize,
    pub points: Vec<ScanPoint>,
    pub column_disagreements: usize,
    pub total_disagreements: usize,
}

/// `r1 = k/(g+1)`, `r2 = (1 − r1)·l/(g+1)` for `k, l = 1..=g`.
pub fn default_scan_grid(g: usize) -> Vec<(f64, f64)> {
    let d = (g + 1) as f64;
    let mut out = Vec::with_capacity(g * g);
    for k in 1..=g {
        let r1 = k as f64 / d;
        for l in 1..=g {
            out.push((r1, (1.0 - r1) * l as f64 / d));
        }
    }
    out
}

fn tail_ratio(seq: &[f64]) -> f64 {
    // Seqs live on one parity class, so compare two steps apart.
    let nz: Vec<(usize, f64)> = seq.iter().cloned().enumerate().filter(|(_, v)| *v > 0.0).collect();
    if nz.len() < 2 {
        return 0.0;
    }
    let (n1, a) = nz[nz.len() - 1];
    let (n0, b) = nz[nz.len() - 2];
    (a.ln() - b.ln()).exp().powf(1.0 / (n1 - n0) as f64)
}

fn scan_point(r1: f64, r2: f64, n_max: usize, m_col: usize) -> Result<ScanPoint> {
    let p = ProcessParams::new(r1, r2)?;
    let beta = p.beta().ok_or_else(|| Error::Domain("r1 must be positive".into()))?;
    let x1 = (2.0 / (27.0 * beta)).sqrt();
    let predicted_column_finite = r1 <= x1;
    let predicted_total_finite = predicted_column_finite && r1 < x1 && gf::y_radius(beta, r1).map(|y| y > 1.0).unwrap_or(false);
    let q = layered_fixed_point(&p, n_max);
    let column: Vec<f64> = (0..=n_max).map(|n| q.get(n, m_col)).collect();
    let totals: Vec<f64> = (0..=n_max).map(|n| q.row(n).iter().sum()).collect();
    let column_ratio = tail_ratio(&column);
    let total_ratio = tail_ratio(&totals);
    Ok(ScanPoint {
        r1,
        r2,
        beta,
        predicted_column_finite,
        column_ratio,
        empirical_column_finite: column_ratio < 1.0,
        predicted_total_finite,
        total_ratio,
        empirical_total_finite: total_ratio < 1.0,
    })
}

/// Classify each `(r1, r2)` by predicted and measured finiteness of the fixed point.
pub fn criticality_scan(points: &[(f64, f64)], n_max: usize) -> Result<ScanReport> {
    let res = exec::map_slice(points, |&(r1, r2)| scan_point(r1, r2, n_max, 2));
    let points = res.into_iter().collect::<Result<Vec<_>>>()?;
    let column_disagreements = points.iter().filter(|p| !p.column_agrees()).count();
    let total_disagreements = points.iter().filter(|p| p.predicted_total_finite != p.empirical_total_finite).count();
    Ok(ScanReport { n_max, points, column_disagreements, total_disagreements })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r1: f64, r2: f64) -> ProcessParams {
        ProcessParams::new(r1, r2).unwrap()
    }

    #[test]
    fn first_steps_from_zero() {
        let pp = p(0.3, 0.25);
        let q1 = step(&MeasureGrid::for_rows(6), &pp);
        assert_eq!(q1.get(0, 2), pp.r0());
        assert_eq!(q1.total(), pp.r0());
        let q2 = step(&q1, &pp);
        assert!((q2.get(1, 3) - pp.r2 * pp.r0() * pp.r0()).abs() < 1e-15);
    }

    #[test]
    fn mass_identity_without_truncation() {
        let pp = p(0.3, 0.2);
        let mut rng = substream(1, 0, 0);
        let q = random_measure(&mut rng, 4, 6, (12, 14));
        let q1 = step(&q, &pp);
        let expected = pp.r1 * q.movable_mass() + pp.r2 * q.total().powi(2) + pp.r0();
        assert!((q1.total() - expected).abs() < 1e-14);
        assert!(q1.truncation_loss < 1e-14);
    }

    #[test]
    fn iteration_matches_layered_solve() {
        let pp = p(0.2, 0.2);
        let fp = fixed_point(&pp, 1e-12, 20, 22, 1000).unwrap();
        let direct = layered_fixed_point(&pp, 20);
        assert!(fp.grid.sup_distance(&direct) < 1e-12);
        assert_eq!(fp.grid.get(0, 2), pp.r0());
        assert!((fp.grid.get(0, 2) - 0.6).abs() < 1e-15);
        assert!(scaling_deviation(&direct, &pp, 20).unwrap() < 1e-9);
    }

    #[test]
    fn pure_linear_case() {
        let fp = fixed_point(&p(0.4, 0.0), 1e-14, 8, 10, 100).unwrap();
        assert_eq!(fp.grid.get(0, 2), 1.0 - 0.4);
        assert_eq!(fp.grid.total(), 1.0 - 0.4);
    }

    #[test]
    fn parity_is_preserved() {
        let q = layered_fixed_point(&p(0.25, 0.3), 15);
        for n in 0..=15 {
            for m in 0..=17 {
                if (n + m) % 2 == 1 {
                    assert_eq!(q.get(n, m), 0.0);
                }
            }
        }
    }

    #[test]
    fn contraction_bound_holds() {
        let r = contraction_estimate(&p(0.3, 0.2), 200, 3);
        assert_eq!(r.violations, 0);
        assert!(r.max_factor <= 0.7);
        assert_eq!(contraction_estimate(&p(0.0, 0.0), 10, 3).max_factor, 0.0);
    }

    #[test]
    fn column_tail_ratio_near_prediction() {
        let s = scan_point(0.2, 0.2, 120, 2).unwrap();
        assert!(s.predicted_column_finite && s.empirical_column_finite);
        let x1 = (2.0f64 / (27.0 * 0.6)).sqrt();
        assert!((s.column_ratio - 0.2 / x1).abs() < 0.03, "{}", s.column_ratio);
    }

    #[test]
    fn bad_params_rejected() {
        assert!(ProcessParams::new(0.7, 0.5).is_err());
        assert!(ProcessParams::new(-0.1, 0.5).is_err());
    }
}
