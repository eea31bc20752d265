//! One-dimensional gravity: weighted lattice paths, their Green functions, and the
//! string dynamics that leave the path measure invariant.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::rng::{exp_time, substream};
use crate::stats::{self, Estimate};

fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for k in 0..n {
        let next = &row[k] * BigUint::from(n - k) / BigUint::from(k + 1);
        row.push(next);
    }
    row
}

/// Number of `n`-step nearest-neighbour paths from 0 to `x` in `Z^d`, with `d = x.len()`.
///
/// Steps are split among coordinates; the count for one coordinate using `j` steps to
/// move by `x_k` is `binom(j, (j + x_k)/2)`.
pub fn path_counts(n: usize, x: &[i64]) -> Result<BigUint> {
    if x.is_empty() {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if n > 20_000 {
        return Err(Error::ResourceCap(format!("path length {n} above 20000")));
    }
    let l1: u64 = x.iter().map(|v| v.unsigned_abs()).sum();
    if l1 > n as u64 || (n as u64 - l1) % 2 == 1 {
        return Ok(BigUint::zero());
    }
    let binom: Vec<Vec<BigUint>> = (0..=n).map(binomial_row).collect();
    let one_dim = |j: usize, xk: i64| -> BigUint {
        let a = xk.unsigned_abs() as usize;
        if a > j || (j - a) % 2 == 1 {
            BigUint::zero()
        } else {
            binom[j][(j + a) / 2].clone()
        }
    };
    // f[m]: ordered ways for the coordinates so far to use m steps
    let mut f: Vec<BigUint> = (0..=n).map(|m| one_dim(m, x[0])).collect();
    for &xk in &x[1..] {
        let g: Vec<BigUint> = (0..=n).map(|j| one_dim(j, xk)).collect();
        let mut next = vec![BigUint::zero(); n + 1];
        for (m, slot) in next.iter_mut().enumerate() {
            let mut acc = BigUint::zero();
            for j in 0..=m {
                if !g[j].is_zero() && !f[m - j].is_zero() {
                    acc += &binom[m][j] * &g[j] * &f[m - j];
                }
            }
            *slot = acc;
        }
        f = next;
    }
    Ok(f.swap_remove(n))
}

pub fn mu_critical(d: usize) -> f64 {
    (2.0 * d as f64).ln()
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenValue {
    pub value: f64,
    /// Bound on the omitted terms `N > n_max`.
    pub tail_bound: f64,
}

/// `G(x) = Σ_{N ≤ n_max} C(N; x) e^{−μN}`.
pub fn green_function(mu: f64, x: &[i64], n_max: usize) -> Result<GreenValue> {
    let d = x.len();
    let gap = mu - mu_critical(d);
    if !(gap > 0.0) {
        return Err(Error::Domain(format!("μ = {mu} is not above μ_cr = ln {}", 2 * d)));
    }
    let r = (-gap).exp();
    let mut value = 0.0;
    let mut scale = BigUint::one();
    let base = BigUint::from(2 * d);
    for n in 0..=n_max {
        let c = path_counts(n, x)?;
        if !c.is_zero() {
            // C/(2d)^N is a walk probability; keep it exact until the division
            let p = BigRational::new(c.into(), scale.clone().into()).to_f64().unwrap_or(0.0);
            value += p * r.powi(n as i32);
        }
        scale *= &base;
    }
    Ok(GreenValue { value, tail_bound: r.powi(n_max as i32 + 1) / (1.0 - r) })
}

/// Closed form `χ(μ) = 1/(1 − e^{−(μ − μ_cr)})`.
pub fn susceptibility(mu: f64, mu_cr: f64) -> Result<f64> {
    if !(mu > mu_cr) {
        return Err(Error::Domain("χ diverges for μ ≤ μ_cr".into()));
    }
    Ok(1.0 / (1.0 - (mu_cr - mu).exp()))
}

/// `Σ_x G(x)` summed over the lattice, with the walk law propagated step by step in
/// dimension 1 or 2.
pub fn susceptibility_numeric(d: usize, mu: f64, n_max: usize) -> Result<GreenValue> {
    if d == 0 || d > 2 {
        return Err(Error::Domain("lattice summation supports d = 1, 2".into()));
    }
    let gap = mu - mu_critical(d);
    if !(gap > 0.0) {
        return Err(Error::Domain("χ diverges for μ ≤ μ_cr".into()));
    }
    let side = 2 * n_max + 1;
    let cells = side.pow(d as u32);
    if cells > 50_000_000 {
        return Err(Error::ResourceCap(format!("{cells} lattice cells")));
    }
    let r = (-gap).exp();
    let mut p = vec![0.0; cells];
    let centre = if d == 1 { n_max } else { n_max * side + n_max };
    p[centre] = 1.0;
    let w = 1.0 / (2 * d) as f64;
    let mut total = 0.0;
    let mut rn = 1.0;
    for n in 0..=n_max {
        // G summed over x: each site's G(x) gets p_n(x) r^n
        total += rn * p.iter().sum::<f64>();
        if n == n_max {
            break;
        }
        let mut q = vec![0.0; cells];
        let reach = n + 1;
        if d == 1 {
            for i in (n_max - reach + 1)..=(n_max + reach - 1) {
                let v = p[i] * w;
                if v != 0.0 {
                    q[i - 1] += v;
                    q[i + 1] += v;
                }
            }
        } else {
            for a in (n_max - reach + 1)..=(n_max + reach - 1) {
                for b in (n_max - reach + 1)..=(n_max + reach - 1) {
                    let v = p[a * side + b] * w;
                    if v != 0.0 {
                        q[(a - 1) * side + b] += v;
                        q[(a + 1) * side + b] += v;
                        q[a * side + b - 1] += v;
                        q[a * side + b + 1] += v;
                    }
                }
            }
        }
        p = q;
        rn *= r;
    }
    Ok(GreenValue { value: total, tail_bound: rn * r / (1.0 - r) })
}

/// Least-squares slope of `ln χ` against `ln(μ − μ_cr)` on a log grid.
pub fn gamma_slope(lo: f64, hi: f64, points: usize) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi > lo && points >= 3) {
        return Err(Error::Domain("bad grid".into()));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for k in 0..points {
        let g = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (points - 1) as f64).exp();
        x.push(g.ln());
        y.push(susceptibility(g, 0.0)?.ln());
    }
    let (_, b, se) = stats::linear_fit(&x, &y)?;
    Ok((b, se))
}

/// `π_k λ = π_{k+1} ν` for `π_k ∝ (λ/ν)^k`, checked exactly for `k < k_max`.
pub fn queue_detailed_balance(lambda: &BigRational, nu: &BigRational, k_max: usize) -> bool {
    let rho = lambda / nu;
    let mut pi = BigRational::one() - &rho;
    (0..k_max).all(|_| {
        let next = &pi * &rho;
        let ok = &pi * lambda == &next * nu;
        pi = next;
        ok
    })
}

/// Same check for the insertion chain with rates `λ(n+1)` up and `νn` down.
pub fn grammar_detailed_balance(lambda: &BigRational, nu: &BigRational, k_max: usize) -> bool {
    let rho = lambda / nu;
    let mut pi = BigRational::one() - &rho;
    (0..k_max).all(|k| {
        let next = &pi * &rho;
        let up = BigRational::from_integer((k + 1).into()) * lambda;
        let down = BigRational::from_integer((k + 1).into()) * nu;
        let ok = &pi * up == &next * down;
        pi = next;
        ok
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QueueConfig {
    pub lambda: f64,
    pub nu: f64,
    /// Symbols are the `2d` unit vectors of `Z^d`.
    pub d: usize,
    pub horizon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueueStats {
    pub seed: u64,
    pub events: u64,
    pub final_length: usize,
    /// Time spent at each length.
    pub occupation: Vec<f64>,
    /// `−ln ρ̂` of the geometric law fitted by its mean, with a batch-means interval.
    pub decay_rate: Option<Estimate>,
    /// End point `s_1 + … + s_N` of the final string.
    pub end_point: Vec<i64>,
    /// Symbol counts of the final string.
    pub symbol_counts: Vec<u64>,
    /// Symbol frequencies in the middle 80% of the final string.
    pub bulk_symbols: Vec<u64>,
    /// Frequencies of adjacent symbol pairs there, row-major.
    pub bulk_pairs: Vec<u64>,
}

fn geometric_decay(batches: &[(f64, f64)]) -> Option<Estimate> {
    // each batch gives (time, ∫ n dt); ρ = m/(1+m)
    let rates: Vec<f64> = batches
        .iter()
        .filter(|(t, _)| *t > 0.0)
        .map(|(t, s)| {
            let m = s / t;
            -(m / (1.0 + m)).ln()
        })
        .filter(|v| v.is_finite())
        .collect();
    if rates.len() < 10 {
        return None;
    }
    let (t, s) = batches.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = s / t;
    let (_, v) = stats::mean_var(&rates);
    Some(Estimate { value: -(m / (1.0 + m)).ln(), half_width: 1.96 * (v / rates.len() as f64).sqrt() })
}

/// The string dynamics: append a uniform symbol at rate λ, delete the last at rate ν.
pub fn lifo_queue_sim(cfg: &QueueConfig, replica: u64) -> Result<QueueStats> {
    if !(cfg.lambda > 0.0 && cfg.nu > 0.0 && cfg.d >= 1 && cfg.horizon > 0.0) {
        return Err(Error::Domain("need λ, ν > 0, d ≥ 1, horizon > 0".into()));
    }
    let mut rng = substream(cfg.seed, replica, 0x6c69);
    let alphabet = 2 * cfg.d;
    let mut s: Vec<u8> = Vec::new();
    let mut t = 0.0;
    let mut events = 0u64;
    let mut occ = Vec::new();
    const BATCHES: usize = 50;
    let mut batches = vec![(0.0, 0.0); BATCHES];
    loop {
        let n = s.len();
        let rate = cfg.lambda + if n > 0 { cfg.nu } else { 0.0 };
        let dt = exp_time(&mut rng, rate).min(cfg.horizon - t);
        if occ.len() <= n {
            occ.resize(n + 1, 0.0);
        }
        occ[n] += dt;
        let b = ((t / cfg.horizon) * BATCHES as f64) as usize;
        let bt = &mut batches[b.min(BATCHES - 1)];
        bt.0 += dt;
        bt.1 += dt * n as f64;
        t += dt;
        if t >= cfg.horizon {
            break;
        }
        events += 1;
        if n == 0 || rng.random::<f64>() * rate < cfg.lambda {
            s.push(rng.random_range(0..alphabet) as u8);
        } else {
            s.pop();
        }
    }
    let mut end_point = vec![0i64; cfg.d];
    let mut symbol_counts = vec![0u64; alphabet];
    for &c in &s {
        symbol_counts[c as usize] += 1;
        let (axis, sign) = ((c as usize) / 2, if c % 2 == 0 { 1 } else { -1 });
        end_point[axis] += sign;
    }
    let mut bulk_symbols = vec![0u64; alphabet];
    let mut bulk_pairs = vec![0u64; alphabet * alphabet];
    let (lo, hi) = (s.len() / 10, s.len() - s.len() / 10);
    for k in lo..hi {
        bulk_symbols[s[k] as usize] += 1;
        if k + 1 < hi {
            bulk_pairs[s[k] as usize * alphabet + s[k + 1] as usize] += 1;
        }
    }
    Ok(QueueStats {
        seed: cfg.seed,
        events,
        final_length: s.len(),
        occupation: occ,
        decay_rate: if cfg.nu > cfg.lambda { geometric_decay(&batches) } else { None },
        end_point,
        symbol_counts,
        bulk_symbols,
        bulk_pairs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrammarStats {
    pub seed: u64,
    pub events: u64,
    pub final_length: usize,
    pub occupation: Vec<f64>,
    pub decay_rate: Option<Estimate>,
}

/// Insertion at each of the `n+1` gaps at rate λ, deletion of each symbol at rate ν.
/// Only the length is kept: the symbols do not affect it.
pub fn context_free_sim(lambda: f64, nu: f64, horizon: f64, seed: u64, replica: u64) -> Result<GrammarStats> {
    if !(lambda > 0.0 && nu > 0.0 && horizon > 0.0) {
        return Err(Error::Domain("need λ, ν > 0 and horizon > 0".into()));
    }
    let mut rng = substream(seed, replica, 0x6366);
    let mut n = 0usize;
    let mut t = 0.0;
    let mut events = 0;
    let mut occ = Vec::new();
    const BATCHES: usize = 50;
    let mut batches = vec![(0.0, 0.0); BATCHES];
    loop {
        let up = lambda * (n + 1) as f64;
        let down = nu * n as f64;
        let dt = exp_time(&mut rng, up + down).min(horizon - t);
        if occ.len() <= n {
            occ.resize(n + 1, 0.0);
        }
        occ[n] += dt;
        let b = ((t / horizon) * BATCHES as f64) as usize;
        let bt = &mut batches[b.min(BATCHES - 1)];
        bt.0 += dt;
        bt.1 += dt * n as f64;
        t += dt;
        if t >= horizon {
            break;
        }
        events += 1;
        if rng.random::<f64>() * (up + down) < up {
            n += 1;
        } else {
            n -= 1;
        }
    }
    // the stationary law is geometric on n ≥ 0 with ratio λ/ν
    Ok(GrammarStats {
        seed,
        events,
        final_length: n,
        occupation: occ,
        decay_rate: if nu > lambda { geometric_decay(&batches) } else { None },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalReport {
    pub seed: u64,
    pub replicas: usize,
    pub t: f64,
    /// KS distance of `N(t)/√t` to the best-fit half-normal.
    pub ks_half_normal: f64,
    /// Fitted scale against `√(2λ)` for the reflected walk.
    pub scale: f64,
    pub predicted_scale: f64,
    /// KS distance of one symbol's count over `√t` to its best-fit half-normal.
    pub ks_symbol: f64,
}

/// Final lengths of independent critical LIFO queues, scaled by `√t`.
pub fn critical_queue_clt(lambda: f64, d: usize, t: f64, replicas: usize, seed: u64) -> Result<CriticalReport> {
    let cfg = QueueConfig { lambda, nu: lambda, d, horizon: t, seed };
    let runs: Vec<QueueStats> =
        exec::map_indices(replicas, |r| lifo_queue_sim(&cfg, r as u64)).into_iter().collect::<Result<_>>()?;
    let z: Vec<f64> = runs.iter().map(|r| r.final_length as f64 / t.sqrt()).collect();
    let scale = (z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64).sqrt();
    let first: Vec<f64> = runs.iter().map(|r| r.symbol_counts[0] as f64 / t.sqrt()).collect();
    Ok(CriticalReport {
        seed,
        replicas,
        t,
        ks_half_normal: stats::ks_half_normal_fitted(&z),
        scale,
        predicted_scale: (2.0 * lambda).sqrt(),
        ks_symbol: stats::ks_half_normal_fitted(&first),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrammarCriticalReport {
    pub seed: u64,
    pub replicas: usize,
    pub t: f64,
    pub ks_half_normal_sqrt: f64,
    /// KS distance of `n(t)/t` to the fitted exponential law.
    pub ks_exponential_linear: f64,
    pub mean_over_t: f64,
}

/// The insertion chain at λ = ν: lengths scaled by `√t` and by `t`.
pub fn critical_grammar(lambda: f64, t: f64, replicas: usize, seed: u64) -> Result<GrammarCriticalReport> {
    let runs: Vec<GrammarStats> = exec::map_indices(replicas, |r| context_free_sim(lambda, lambda, t, seed, r as u64))
        .into_iter()
        .collect::<Result<_>>()?;
    let z: Vec<f64> = runs.iter().map(|r| r.final_length as f64 / t.sqrt()).collect();
    let w: Vec<f64> = runs.iter().map(|r| r.final_length as f64 / t).collect();
    let m = stats::mean(&w);
    Ok(GrammarCriticalReport {
        seed,
        replicas,
        t,
        ks_half_normal_sqrt: stats::ks_half_normal_fitted(&z),
        ks_exponential_linear: stats::ks_distance(&w, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x / m).exp() }),
        mean_over_t: m,
    })
}

/// Chi-square p-values of bulk symbol frequencies against uniform and of pair
/// frequencies against the product of the marginals.
pub fn bulk_uniformity(stats_: &QueueStats) -> (f64, f64) {
    let a = stats_.bulk_symbols.len();
    let n: u64 = stats_.bulk_symbols.iter().sum();
    let e = n as f64 / a as f64;
    let s1: f64 = stats_.bulk_symbols.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let np: u64 = stats_.bulk_pairs.iter().sum();
    let mut s2 = 0.0;
    for i in 0..a {
        for j in 0..a {
            let e = np as f64 * stats_.bulk_symbols[i] as f64 * stats_.bulk_symbols[j] as f64 / (n as f64 * n as f64);
            if e > 0.0 {
                s2 += (stats_.bulk_pairs[i * a + j] as f64 - e).powi(2) / e;
            }
        }
    }
    (stats::chi_square_pvalue(s1, a - 1), stats::chi_square_pvalue(s2, (a - 1) * (a - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_path_counts() {
        assert_eq!(path_counts(2, &[0]).unwrap(), BigUint::from(2u32));
        assert_eq!(path_counts(2, &[0, 0]).unwrap(), BigUint::from(4u32));
        assert_eq!(path_counts(3, &[0, 0]).unwrap(), BigUint::zero());
        assert_eq!(path_counts(0, &[0, 0, 0]).unwrap(), BigUint::one());
        // binom(2n, n)^2 in the plane
        assert_eq!(path_counts(6, &[0, 0]).unwrap(), BigUint::from(400u32));
    }

    #[test]
    fn green_at_large_mu_is_one() {
        let g = green_function(20.0, &[0, 0], 10).unwrap();
        assert!((g.value - 1.0).abs() < 1e-8);
        assert!(green_function(1.0, &[0, 0], 10).is_err());
    }

    #[test]
    fn balance_checks() {
        let l = BigRational::from_integer(1.into());
        let n = BigRational::from_integer(3.into());
        assert!(queue_detailed_balance(&l, &n, 50));
        assert!(grammar_detailed_balance(&l, &n, 50));
    }

    #[test]
    fn empty_queue_only_grows() {
        let s = lifo_queue_sim(&QueueConfig { lambda: 1.0, nu: 50.0, d: 1, horizon: 100.0, seed: 1 }, 0).unwrap();
        assert!(s.occupation[0] > 0.0);
        let g = context_free_sim(1.0, 50.0, 100.0, 1, 0).unwrap();
        assert!(g.occupation[0] > 0.0);
    }
}
