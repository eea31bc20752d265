//! Exact counts C(N, m) of rooted disk triangulations with N inner triangles and
//! boundary length m, plus a brute-force oracle and growth-exponent fits.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::map::{tutte_move_1, tutte_move_2, CanonicalCode, MapMode, RootedMap};
use crate::stats;

/// Default limit on the number of table cells.
pub const DEFAULT_CELL_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub n_max: usize,
    pub m_max: usize,
    counts: Vec<Vec<BigUint>>,
}

impl CountTable {
    /// C(N, m); zero outside the stored window.
    pub fn get(&self, n: usize, m: usize) -> BigUint {
        if n > self.n_max || m < 2 || m > self.m_max {
            return BigUint::zero();
        }
        self.counts[n][m - 2].clone()
    }

    pub fn entry(&self, n: usize, m: usize) -> Option<&BigUint> {
        if n > self.n_max || m < 2 || m > self.m_max {
            return None;
        }
        Some(&self.counts[n][m - 2])
    }

    /// Column C(·, m).
    pub fn column(&self, m: usize) -> Vec<BigUint> {
        (0..=self.n_max).map(|n| self.get(n, m)).collect()
    }

    /// Σ_m C(N, m) over the stored window.
    pub fn row_total(&self, n: usize) -> BigUint {
        self.counts[n].iter().sum()
    }

    /// Restriction to a smaller window.
    pub fn window(&self, n_max: usize, m_max: usize) -> CountTable {
        let counts = (0..=n_max)
            .map(|n| (2..=m_max).map(|m| self.get(n, m)).collect())
            .collect();
        CountTable { n_max, m_max, counts }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,m,count\n");
        for n in 0..=self.n_max {
            for m in 2..=self.m_max {
                let _ = writeln!(s, "{},{},{}", n, m, self.counts[n][m - 2]);
            }
        }
        s
    }

    /// Parses the CSV produced by [`CountTable::to_csv`]; `#` lines are skipped.
    pub fn from_csv(text: &str) -> Result<CountTable> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        if lines.next().map(str::trim) != Some("N,m,count") {
            return Err(Error::Parse("missing header N,m,count".into()));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields", i + 2)));
            }
            let p = |s: &str| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)));
            let c = f[2].trim().parse::<BigUint>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))?;
            rows.push((p(f[0])?, p(f[1])?, c));
        }
        let n_max = rows.iter().map(|r| r.0).max().unwrap_or(0);
        let m_max = rows.iter().map(|r| r.1).max().unwrap_or(2).max(2);
        let mut counts = vec![vec![BigUint::zero(); m_max - 1]; n_max + 1];
        for (n, m, c) in rows {
            if m < 2 {
                return Err(Error::Parse("m must be at least 2".into()));
            }
            counts[n][m - 2] = c;
        }
        Ok(CountTable { n_max, m_max, counts })
    }

    /// Entries (N, m, count) with nonzero count.
    pub fn nonzero(&self) -> Vec<(usize, usize, BigUint)> {
        let mut out = Vec::new();
        for n in 0..=self.n_max {
            for m in 2..=self.m_max {
                let c = &self.counts[n][m - 2];
                if !c.is_zero() {
                    out.push((n, m, c.clone()));
                }
            }
        }
        out
    }
}

/// Tutte recurrence with the default cell cap.
pub fn tutte_table(n_max: usize, m_max: usize) -> Result<CountTable> {
    tutte_table_capped(n_max, m_max, DEFAULT_CELL_CAP)
}

/// C(N,m) = C(N−1,m+1) + Σ C(N1,m1) C(N2,m2) over N1+N2 = N−1, m1+m2 = m+1, with
/// C(0,2) = 1. At m = 2 the convolution is empty. Entries vanish for m > N+2, so the
/// table is computed up to boundary N+2 internally and then cut to `m_max`.
pub fn tutte_table_capped(n_max: usize, m_max: usize, cell_cap: usize) -> Result<CountTable> {
    if m_max < 2 {
        return Err(Error::Domain("m_max must be at least 2".into()));
    }
    let mm = m_max.max(n_max + 2);
    let cells = (n_max + 1).saturating_mul(mm - 1);
    if cells > cell_cap {
        return Err(Error::ResourceCap(format!("{cells} cells exceed cap {cell_cap}")));
    }
    let mut t: Vec<Vec<BigUint>> = Vec::with_capacity(n_max + 1);
    let mut row0 = vec![BigUint::zero(); mm - 1];
    row0[0] = BigUint::one();
    t.push(row0);
    for n in 1..=n_max {
        let prev = &t;
        let row = exec::map_indices(mm - 1, |i| {
            let m = i + 2;
            if (n + m) % 2 == 1 || m > n + 2 {
                return BigUint::zero();
            }
            let mut c = if m < mm { prev[n - 1][m - 1].clone() } else { BigUint::zero() };
            if m >= 3 {
                for n1 in 0..n {
                    let n2 = n - 1 - n1;
                    // m1 ranges over 2..=m-1 with m2 = m+1-m1 >= 2.
                    for m1 in 2..m {
                        let m2 = m + 1 - m1;
                        if (n1 + m1) % 2 == 1 || m1 > n1 + 2 || m2 > n2 + 2 {
                            continue;
                        }
                        let a = &prev[n1][m1 - 2];
                        if a.is_zero() {
                            continue;
                        }
                        c += a * &prev[n2][m2 - 2];
                    }
                }
            }
            c
        });
        t.push(row);
    }
    let counts = t.into_iter().map(|r| r.into_iter().take(m_max - 1).collect()).collect();
    Ok(CountTable { n_max, m_max, counts })
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// C0(N, m) = 2^{j+2} (2m+3j−1)! (2m−3)! / ((j+1)! (2m+2j)! ((m−2)!)²) with N = m+2j.
pub fn closed_form_rooted(m: u64, j: u64) -> Result<BigUint> {
    if m < 2 {
        return Err(Error::Domain(format!("m = {m} must be at least 2")));
    }
    let num = (BigUint::one() << (j + 2)) * factorial(2 * m + 3 * j - 1) * factorial(2 * m - 3);
    let mf = factorial(m - 2);
    let den = factorial(j + 1) * factorial(2 * m + 2 * j) * &mf * &mf;
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() {
        return Err(Error::Domain(format!("closed form is not integral at m={m}, j={j}")));
    }
    Ok(q)
}

/// Distinct maps grouped by (N, m): `layers[N][m]` lists one representative per class.
pub struct GeneratedMaps {
    pub n_max: usize,
    layers: Vec<Vec<Vec<RootedMap>>>,
}

impl GeneratedMaps {
    pub fn get(&self, n: usize, m: usize) -> &[RootedMap] {
        self.layers.get(n).and_then(|r| r.get(m)).map_or(&[], |v| v.as_slice())
    }

    pub fn all(&self) -> impl Iterator<Item = &RootedMap> {
        self.layers.iter().flatten().flatten()
    }

    pub fn counts(&self) -> CountTable {
        let m_max = self.n_max + 2;
        let counts = (0..=self.n_max)
            .map(|n| (2..=m_max).map(|m| BigUint::from(self.get(n, m).len())).collect())
            .collect();
        CountTable { n_max: self.n_max, m_max, counts }
    }
}

/// Largest N accepted by the exhaustive generator.
pub const BRUTE_FORCE_N_MAX: usize = 10;

/// All rooted maps with N ≤ `n_max` produced by Tutte moves from edge maps,
/// deduplicated by canonical code.
pub fn generate_maps(n_max: usize) -> Result<GeneratedMaps> {
    generate_maps_capped(n_max, 5_000_000)
}

pub fn generate_maps_capped(n_max: usize, map_cap: usize) -> Result<GeneratedMaps> {
    if n_max > BRUTE_FORCE_N_MAX {
        return Err(Error::ResourceCap(format!("n_max {n_max} exceeds {BRUTE_FORCE_N_MAX}")));
    }
    let mut layers: Vec<Vec<Vec<RootedMap>>> = Vec::with_capacity(n_max + 1);
    let mut base = vec![Vec::new(); 3];
    base[2].push(RootedMap::new_edge_map(MapMode::General));
    layers.push(base);
    let mut total = 1usize;
    for n in 1..=n_max {
        let mut row: Vec<Vec<RootedMap>> = vec![Vec::new(); n + 3];
        for (m, slot) in row.iter_mut().enumerate().skip(2) {
            let mut jobs: Vec<(&RootedMap, Option<&RootedMap>)> = Vec::new();
            if let Some(src) = layers[n - 1].get(m + 1) {
                jobs.extend(src.iter().map(|x| (x, None)));
            }
            for n1 in 0..n {
                let n2 = n - 1 - n1;
                for m1 in 2..=m.saturating_sub(1) {
                    let m2 = m + 1 - m1;
                    let (Some(aa), Some(bb)) = (layers[n1].get(m1), layers[n2].get(m2)) else { continue };
                    for a in aa {
                        for b in bb {
                            jobs.push((a, Some(b)));
                        }
                    }
                }
            }
            if total + jobs.len() > map_cap {
                return Err(Error::ResourceCap(format!("more than {map_cap} maps")));
            }
            let made: Vec<(CanonicalCode, RootedMap)> = exec::map_slice(&jobs, |&(a, b)| {
                let x = match b {
                    None => tutte_move_1(a),
                    Some(b) => tutte_move_2(a, b),
                }
                .expect("moves apply inside the generated class");
                (x.canonical_code(), x)
            });
            let mut seen: HashSet<CanonicalCode> = HashSet::with_capacity(made.len());
            for (c, x) in made {
                if seen.insert(c) {
                    slot.push(x);
                }
            }
            total += slot.len();
        }
        layers.push(row);
    }
    Ok(GeneratedMaps { n_max, layers })
}

/// Counts by exhaustive generation with canonical-code deduplication.
pub fn brute_force_counts(n_max: usize) -> Result<CountTable> {
    Ok(generate_maps(n_max)?.counts())
}

/// Fit settings for [`fit_growth`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitConfig {
    /// Fraction of the nonzero terms (from the end) used in the fit.
    pub window_fraction: f64,
    /// Number of fitted correction terms n^{-2}, n^{-3}, ... is `levels - 1`.
    pub levels: usize,
    pub min_terms: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { window_fraction: 0.5, levels: 3, min_terms: 50 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticFit {
    pub growth_constant: f64,
    pub exponent: f64,
    pub growth_stderr: f64,
    pub exponent_stderr: f64,
    pub window: (usize, usize),
    pub step: usize,
    pub levels: usize,
    pub residual_rms: f64,
}

/// Natural log of a positive big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 900;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(x: &BigRational) -> f64 {
    ln_big(&x.numer().magnitude().clone()) - ln_big(&x.denom().magnitude().clone())
}

/// Growth fit for a sequence given by values; zero entries are skipped.
pub fn fit_growth(values: &[f64], cfg: &FitConfig) -> Result<AsymptoticFit> {
    let mut pts = Vec::new();
    for (n, &v) in values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        if v < 0.0 || !v.is_finite() {
            return Err(Error::Domain(format!("term {n} is not positive")));
        }
        pts.push((n, v.ln()));
    }
    fit_growth_ln(&pts, cfg)
}

/// Growth fit for big integer counts; zero entries are skipped.
pub fn fit_growth_big(values: &[BigUint], cfg: &FitConfig) -> Result<AsymptoticFit> {
    let pts: Vec<(usize, f64)> =
        values.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(n, v)| (n, ln_big(v))).collect();
    fit_growth_ln(&pts, cfg)
}

/// Fit of a_n ~ c1 n^α c^n from `(n, ln a_n)` pairs on an arithmetic progression.
///
/// With step d, ln ρ_n = (ln a_n − ln a_{n−d})/d = ln c + α u_n + Σ_k b_k n^{−k}
/// where u_n = −ln(1 − d/n)/d. The correction powers k = 2..levels absorb the
/// subleading terms.
pub fn fit_growth_ln(pts: &[(usize, f64)], cfg: &FitConfig) -> Result<AsymptoticFit> {
    if pts.len() < cfg.min_terms.max(cfg.levels + 4) {
        return Err(Error::InsufficientData(format!("{} nonzero terms, need {}", pts.len(), cfg.min_terms)));
    }
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::Domain("non-positive term in sequence".into()));
    }
    let step = pts.windows(2).map(|w| w[1].0 - w[0].0).fold(0, |g, d| g.gcd(&d));
    if step == 0 || pts.windows(2).any(|w| w[1].0 - w[0].0 != step) {
        return Err(Error::Domain("nonzero terms are not evenly spaced".into()));
    }
    let start = ((pts.len() as f64) * (1.0 - cfg.window_fraction)).floor() as usize;
    let start = start.max(1).min(pts.len() - cfg.levels - 3);
    let d = step as f64;
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in start..pts.len() {
        let n = pts[i].0 as f64;
        if n <= d {
            continue;
        }
        y.push((pts[i].1 - pts[i - 1].1) / d);
        let mut r = vec![1.0, -(1.0 - d / n).ln() / d];
        for k in 2..=cfg.levels {
            r.push(n.powi(-(k as i32)));
        }
        rows.push(r);
    }
    let fit = stats::least_squares(&rows, &y)?;
    let c = fit.coef[0].exp();
    Ok(AsymptoticFit {
        growth_constant: c,
        exponent: fit.coef[1],
        growth_stderr: c * fit.stderr[0],
        exponent_stderr: fit.stderr[1],
        window: (pts[start].0, pts[pts.len() - 1].0),
        step,
        levels: cfg.levels,
        residual_rms: fit.residual_rms,
    })
}

/// C0(N)/(3N): the asymptotic count of unrooted objects.
pub fn unrooted_estimate(n: u64, rooted_count: &BigUint) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    Ok(BigRational::new(rooted_count.clone().into(), BigUint::from(3 * n).into()))
}

/// Sphere triangulations with `faces` triangles: (rooted count, unrooted count).
/// A rooted sphere with F faces is a rooted disk with F−1 inner faces and m = 3.
pub fn sphere_counts(faces: usize) -> Result<(usize, usize)> {
    if faces < 2 {
        return Err(Error::Domain("need at least two faces".into()));
    }
    let g = generate_maps(faces - 1)?;
    let disks = g.get(faces - 1, 3);
    let codes: Vec<CanonicalCode> = exec::map_slice(disks, |d| d.close_boundary().expect("m = 3").unrooted_code());
    let unrooted: HashSet<CanonicalCode> = codes.into_iter().collect();
    Ok((disks.len(), unrooted.len()))
}

/// Lower and upper exponential rates of Σ_m C(N, m) over 2 ≤ N ≤ n_max
/// (N = 1 has a single map, so the lower rate there is 1).
#[derive(Debug, Clone, Serialize)]
pub struct ExponentialBounds {
    pub gamma_low: f64,
    pub gamma_high: f64,
    pub log_ratios: Vec<f64>,
}

pub fn exponential_bounds(table: &CountTable) -> ExponentialBounds {
    let lt: Vec<f64> = (0..=table.n_max).map(|n| ln_big(&table.row_total(n))).collect();
    let rates: Vec<f64> = (2..=table.n_max).map(|n| (lt[n] / n as f64).exp()).collect();
    let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rates.iter().cloned().fold(0.0, f64::max);
    ExponentialBounds { gamma_low: lo, gamma_high: hi, log_ratios: lt.windows(2).map(|w| w[1] - w[0]).collect() }
}

/// Cached closed-form evaluations keyed by (m, j).
pub fn closed_form_grid(max_total: u64, m_cap: u64) -> HashMap<(u64, u64), BigUint> {
    let mut out = HashMap::new();
    for m in 2..=m_cap {
        let mut j = 0;
        while m + 2 * j <= max_total {
            out.insert((m, j), closed_form_rooted(m, j).expect("m >= 2"));
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn spot_values() {
        let t = tutte_table(10, 12).unwrap();
        assert_eq!(t.get(0, 2), big(1));
        assert_eq!(t.get(0, 3), big(0));
        assert_eq!(t.get(1, 3), big(1));
        assert_eq!(t.get(2, 4), big(2));
        assert_eq!(t.get(3, 3), big(4));
        assert_eq!(t.get(5, 3), big(24));
        let col: Vec<BigUint> = (0..=10).map(|n| t.get(n, 2)).collect();
        let want = [1u64, 0, 1, 0, 4, 0, 24, 0, 176, 0, 1456];
        assert_eq!(col, want.iter().map(|&x| big(x)).collect::<Vec<_>>());
    }

    #[test]
    fn parity_zeros() {
        let t = tutte_table(12, 14).unwrap();
        for n in 0..=12 {
            for m in 2..=14 {
                if (n + m) % 2 == 1 {
                    assert!(t.get(n, m).is_zero());
                }
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_rooted(3, 0).unwrap(), big(4));
        assert_eq!(closed_form_rooted(3, 1).unwrap(), big(24));
        assert_eq!(closed_form_rooted(2, 1).unwrap(), big(4));
        assert!(closed_form_rooted(1, 0).is_err());
    }

    #[test]
    fn brute_force_small() {
        let b = brute_force_counts(1).unwrap();
        assert_eq!(b.nonzero(), vec![(0, 2, big(1)), (1, 3, big(1))]);
        let b = brute_force_counts(3).unwrap();
        assert_eq!(b.get(3, 3), big(4));
        assert!(brute_force_counts(11).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(tutte_table_capped(100, 10, 50), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn csv_roundtrip() {
        let t = tutte_table(6, 8).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("N,m,count\n"));
        assert_eq!(CountTable::from_csv(&csv).unwrap(), t);
    }

    #[test]
    fn synthetic_fits() {
        let cfg = FitConfig::default();
        let geo: Vec<f64> = (0..200).map(|n| 2f64.powi(n)).collect();
        let f = fit_growth(&geo, &cfg).unwrap();
        assert!((f.growth_constant - 2.0).abs() < 1e-6 && f.exponent.abs() < 1e-6);
        let pw: Vec<(usize, f64)> = (1..300).map(|n| (n, -2.5 * (n as f64).ln() + n as f64 * 3f64.ln())).collect();
        let f = fit_growth_ln(&pw, &cfg).unwrap();
        assert!((f.exponent + 2.5).abs() < 0.05, "{f:?}");
        assert!(fit_growth(&geo[..20], &cfg).is_err());
    }

    #[test]
    fn unrooted_formula() {
        assert_eq!(unrooted_estimate(1, &big(1)).unwrap(), BigRational::new(1.into(), 3.into()));
        assert_eq!(unrooted_estimate(10, &big(60)).unwrap(), BigRational::new(2.into(), 1.into()));
    }
}
