//! Small statistics toolbox: moments, KS distances, least squares, tail fits.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v)
}

pub fn normal_cdf(x: f64, mu: f64, sigma: f64) -> f64 {
    0.5 * (1.0 + erf((x - mu) / (sigma * std::f64::consts::SQRT_2)))
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// KS distance to the Gaussian with the sample mean and variance.
pub fn ks_normal_fitted(xs: &[f64]) -> f64 {
    let (m, v) = mean_var(xs);
    let s = v.sqrt();
    ks_distance(xs, |x| normal_cdf(x, m, s))
}

/// KS distance to the half-normal law |σZ| with σ² = mean of x².
pub fn ks_half_normal_fitted(xs: &[f64]) -> f64 {
    let s = (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt();
    ks_distance(xs, |x| if x <= 0.0 { 0.0 } else { erf(x / (s * std::f64::consts::SQRT_2)) })
}

/// Total variation distance between two (sub)probability vectors, padding with zeros.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        * 0.5
}

pub fn chi_square_pvalue(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    match ChiSquared::new(dof as f64) {
        Ok(d) => 1.0 - d.cdf(stat),
        Err(_) => f64::NAN,
    }
}

/// Chi-square test that two histograms share a law. Cells whose pooled expectation is
/// below `min_expected` are merged. Returns `(statistic, dof, p-value)`.
pub fn two_sample_chi_square(a: &[u64], b: &[u64], min_expected: f64) -> (f64, usize, f64) {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for i in 0..n {
        acc.0 += get(a, i);
        acc.1 += get(b, i);
        let tot = acc.0 + acc.1;
        if tot * na.min(nb) / (na + nb) >= min_expected {
            cells.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match cells.last_mut() {
            Some(c) => {
                c.0 += acc.0;
                c.1 += acc.1;
            }
            None => cells.push(acc),
        }
    }
    let mut stat = 0.0;
    for &(x, y) in &cells {
        let tot = x + y;
        let (ea, eb) = (tot * na / (na + nb), tot * nb / (na + nb));
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let dof = cells.len().saturating_sub(1);
    (stat, dof, chi_square_pvalue(stat, dof))
}

/// Ordinary least squares fit.
#[derive(Debug, Clone, Serialize)]
pub struct LsFit {
    pub coef: Vec<f64>,
    pub stderr: Vec<f64>,
    pub residual_rms: f64,
}

/// Least squares for `y ≈ Σ_j coef_j · rows[i][j]` using the normal equations.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<LsFit> {
    let n = rows.len();
    let k = rows.first().map_or(0, |r| r.len());
    if n <= k || k == 0 || y.len() != n {
        return Err(Error::InsufficientData(format!("{n} points for {k} parameters")));
    }
    // Column scaling keeps the normal equations tame.
    let scale: Vec<f64> = (0..k)
        .map(|j| rows.iter().map(|r| r[j].abs()).fold(0.0, f64::max).max(1e-300))
        .collect();
    let mut a = vec![vec![0.0; k]; k];
    let mut b = vec![0.0; k];
    for (r, &yi) in rows.iter().zip(y) {
        for i in 0..k {
            let ri = r[i] / scale[i];
            b[i] += ri * yi;
            for j in 0..k {
                a[i][j] += ri * r[j] / scale[j];
            }
        }
    }
    let inv = invert(&a).ok_or_else(|| Error::InsufficientData("singular design".into()))?;
    let coef_s: Vec<f64> = (0..k).map(|i| (0..k).map(|j| inv[i][j] * b[j]).sum()).collect();
    let coef: Vec<f64> = coef_s.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let rss: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, &yi)| {
            let f: f64 = r.iter().zip(&coef).map(|(x, c)| x * c).sum();
            (yi - f) * (yi - f)
        })
        .sum();
    let sigma2 = rss / (n - k) as f64;
    let stderr = (0..k).map(|i| (sigma2 * inv[i][i]).max(0.0).sqrt() / scale[i]).collect();
    Ok(LsFit { coef, stderr, residual_rms: (rss / n as f64).sqrt() })
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let k = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..k {
        let p = (c..k).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[p][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        let d = m[c][c];
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for j in 0..2 * k {
                        m[r][j] -= f * m[c][j];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[k..].to_vec()).collect())
}

/// Simple linear regression `y ≈ a + b x`, returns (a, b, stderr of b).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&xi| vec![1.0, xi]).collect();
    let f = least_squares(&rows, y)?;
    Ok((f.coef[0], f.coef[1], f.stderr[1]))
}

/// Geometric tail fit beyond `k0`: maximum likelihood rate of P(q = k0 + j) ∝ ρ^j.
#[derive(Debug, Clone, Serialize)]
pub struct GeometricTail {
    pub k0: usize,
    pub rate: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
}

/// `counts[k]` = number of observations equal to k.
pub fn geometric_tail(counts: &[u64], k0: usize) -> Result<GeometricTail> {
    let mut n = 0u64;
    let mut s = 0f64;
    for (k, &c) in counts.iter().enumerate().skip(k0) {
        n += c;
        s += c as f64 * (k - k0) as f64;
    }
    if n < 10 {
        return Err(Error::InsufficientData(format!("{n} samples in tail")));
    }
    let m = s / n as f64;
    let rate = m / (1.0 + m);
    let stderr = (rate * (1.0 - rate) * (1.0 - rate) / n as f64).sqrt();
    Ok(GeometricTail {
        k0,
        rate,
        stderr,
        ci_low: rate - 1.96 * stderr,
        ci_high: rate + 1.96 * stderr,
        samples: n,
    })
}

/// Mean with a 95% normal confidence half-width.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Self {
        let (m, v) = mean_var(xs);
        Estimate { value: m, half_width: 1.96 * (v / xs.len() as f64).sqrt() }
    }

    pub fn proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Estimate { value: p, half_width: 1.96 * (p * (1.0 - p) / n as f64).sqrt() }
    }

    pub fn low(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn high(&self) -> f64 {
        self.value + self.half_width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_line() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| 3.0 - 0.5 * x).collect();
        let (a, b, _) = linear_fit(&x, &y).unwrap();
        assert!((a - 3.0).abs() < 1e-10 && (b + 0.5).abs() < 1e-10);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_distance(&xs, |x| x.clamp(0.0, 1.0)) < 1e-3 + 1e-12);
    }

    #[test]
    fn geometric_tail_exact_counts() {
        let counts: Vec<u64> = (0..60).map(|k| (1e9 * 0.5f64.powi(k)) as u64).collect();
        let g = geometric_tail(&counts, 0).unwrap();
        assert!((g.rate - 0.5).abs() < 1e-3);
    }

    #[test]
    fn chi_square_tail() {
        assert!((chi_square_pvalue(3.841458820694124, 1) - 0.05).abs() < 1e-6);
    }
}
