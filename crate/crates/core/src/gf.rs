//! Exact series solutions of the canonical equation
//! W = β + xyW² + x y⁻¹ (W − S), with U = y²W and S(x) = W(x, 0).

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::enumeration::ln_rational;
use crate::error::{Error, Result};

/// Truncated power series with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesCoeffs {
    pub coeffs: Vec<BigRational>,
    pub variable: char,
}

impl SeriesCoeffs {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rat_to_f64).collect()
    }

    /// Horner evaluation in double precision.
    pub fn eval(&self, x: f64) -> f64 {
        self.to_f64().iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `order,numerator,denominator` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("order,numerator,denominator\n");
        for (k, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", k, c.numer(), c.denom());
        }
        s
    }

    /// `order,value` rows in double precision.
    pub fn to_csv_f64(&self) -> String {
        let mut s = String::from("order,value\n");
        for (k, c) in self.to_f64().iter().enumerate() {
            let _ = writeln!(s, "{k},{c:e}");
        }
        s
    }
}

/// Converts a rational to `f64` without overflowing on large parts.
pub fn rat_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let s = if x.is_negative() { -1.0 } else { 1.0 };
    s * ln_rational(&x.abs()).exp()
}

/// Parses "2/27", "0.6", "3" or "1e-2" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse rational {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| bad())?;
        let d: BigInt = b.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn mul_trunc(a: &[BigRational], b: &[BigRational], len: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn inverse(a: &[BigRational], len: usize) -> Vec<BigRational> {
    let a0 = a[0].recip();
    let mut inv = vec![BigRational::zero(); len];
    inv[0] = a0.clone();
    for n in 1..len {
        let mut s = BigRational::zero();
        for k in 1..=n.min(a.len() - 1) {
            if !a[k].is_zero() && !inv[n - k].is_zero() {
                s += &a[k] * &inv[n - k];
            }
        }
        inv[n] = -(s * &a0);
    }
    inv
}

fn check_beta(beta: &BigRational) -> Result<()> {
    if !beta.is_positive() {
        return Err(Error::Domain("beta must be positive".into()));
    }
    Ok(())
}

/// The branch y(x) with y(0) = 0 of x = y(1 − 2βy²): y = x + 2βx³ + 12β²x⁵ + …
pub fn y_series(beta: &BigRational, order: usize) -> Result<SeriesCoeffs> {
    check_beta(beta)?;
    if order < 1 {
        return Err(Error::Domain("order must be at least 1".into()));
    }
    let len = order + 1;
    let two_beta = beta * BigRational::from_integer(2.into());
    let mut y = vec![BigRational::zero(); len];
    let mut y2 = vec![BigRational::zero(); len];
    for n in 1..len {
        // (y³)_n only involves y_i with i ≤ n−2 and (y²)_j with j ≤ n−1.
        let mut y3 = BigRational::zero();
        for i in 1..n.saturating_sub(1) {
            if !y[i].is_zero() && !y2[n - i].is_zero() {
                y3 += &y[i] * &y2[n - i];
            }
        }
        y[n] = &two_beta * y3;
        if n == 1 {
            y[n] += BigRational::one();
        }
        let mut s = BigRational::zero();
        for i in 1..n {
            if !y[i].is_zero() && !y[n - i].is_zero() {
                s += &y[i] * &y[n - i];
            }
        }
        y2[n] = s;
    }
    Ok(SeriesCoeffs { coeffs: y, variable: 'x' })
}

/// S(x) = β(1 − 3βy²)/(1 − 2βy²)² with y = y(x).
pub fn s_series(beta: &BigRational, order: usize) -> Result<SeriesCoeffs> {
    let y = y_series(beta, order.max(1))?;
    let len = order + 1;
    let y2 = mul_trunc(&y.coeffs, &y.coeffs, len);
    let a: Vec<BigRational> = y2.iter().enumerate().map(|(k, c)| {
        let t = c * beta * rat(3, 1);
        if k == 0 { BigRational::one() - t } else { -t }
    }).collect();
    let b: Vec<BigRational> = y2.iter().enumerate().map(|(k, c)| {
        let t = c * beta * rat(2, 1);
        if k == 0 { BigRational::one() - t } else { -t }
    }).collect();
    let bi = inverse(&b, len);
    let bi2 = mul_trunc(&bi, &bi, len);
    let s: Vec<BigRational> = mul_trunc(&a, &bi2, len).into_iter().map(|c| c * beta).collect();
    Ok(SeriesCoeffs { coeffs: s, variable: 'x' })
}

/// Coefficients w(N, m) of U(x, y) = Σ w(N,m) xᴺ yᵐ from the canonical recurrence
/// w(N,m) = w(N−1,m+1) + Σ w(N1,m1) w(N2,m2) + β δ_{(N,m),(0,2)}.
#[derive(Debug, Clone)]
pub struct CanonicalTable {
    pub n_max: usize,
    coeffs: Vec<Vec<BigRational>>,
}

impl CanonicalTable {
    pub fn get(&self, n: usize, m: usize) -> BigRational {
        if n > self.n_max || m < 2 || m > n + 2 {
            return BigRational::zero();
        }
        self.coeffs[n][m - 2].clone()
    }
}

pub fn canonical_table(beta: &BigRational, n_max: usize) -> Result<CanonicalTable> {
    check_beta(beta)?;
    let mut w: Vec<Vec<BigRational>> = Vec::with_capacity(n_max + 1);
    w.push(vec![beta.clone()]);
    for n in 1..=n_max {
        let mut row = vec![BigRational::zero(); n + 1];
        for m in 2..=n + 2 {
            if (n + m) % 2 == 1 {
                continue;
            }
            let mut c = if m + 1 <= n + 1 { w[n - 1][m - 1].clone() } else { BigRational::zero() };
            for n1 in 0..n {
                let n2 = n - 1 - n1;
                for m1 in 2..m {
                    let m2 = m + 1 - m1;
                    if m1 > n1 + 2 || m2 > n2 + 2 || (n1 + m1) % 2 == 1 {
                        continue;
                    }
                    c += &w[n1][m1 - 2] * &w[n2][m2 - 2];
                }
            }
            row[m - 2] = c;
        }
        w.push(row);
    }
    Ok(CanonicalTable { n_max, coeffs: w })
}

/// Coefficients of the functional-equation residuals up to xᴷ.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub order: usize,
    /// Nonzero coefficients of W − β − xyW² − x y⁻¹(W − S).
    pub functional_nonzero: usize,
    /// Nonzero coefficients of (2xU + x − y)² − [4x²y²S + (x − y)² − 4βxy³].
    pub quadratic_nonzero: usize,
    /// Nonzero coefficients of y₀(1 − 2βy₀²) − x.
    pub cubic_nonzero: usize,
}

impl ResidualReport {
    pub fn all_zero(&self) -> bool {
        self.functional_nonzero == 0 && self.quadratic_nonzero == 0 && self.cubic_nonzero == 0
    }
}

/// Exact residuals of the canonical equation, its quadratic form and the cubic for
/// y₀, with U from the canonical recurrence and S from [`s_series`].
pub fn functional_residuals(beta: &BigRational, order: usize) -> Result<ResidualReport> {
    let k = order;
    let w = canonical_table(beta, k)?;
    let s = s_series(beta, k + 1)?;
    // W[a][b] = w(a, b+2).
    let wc = |a: usize, b: usize| w.get(a, b + 2);
    let mut functional_nonzero = 0;
    for a in 0..=k {
        // y⁻¹ coefficient: x (W(x,0) − S)
        if a >= 1 && wc(a - 1, 0) != s.coeffs[a - 1] {
            functional_nonzero += 1;
        }
        for b in 0..=a {
            let mut r = wc(a, b);
            if a == 0 && b == 0 {
                r -= beta;
            }
            if a >= 1 {
                if b >= 1 {
                    // (W²)[a−1][b−1]
                    let mut sq = BigRational::zero();
                    for a1 in 0..a {
                        for b1 in 0..b {
                            let x = wc(a1, b1);
                            if !x.is_zero() {
                                sq += x * wc(a - 1 - a1, b - 1 - b1);
                            }
                        }
                    }
                    r -= sq;
                }
                r -= wc(a - 1, b + 1);
            }
            if !r.is_zero() {
                functional_nonzero += 1;
            }
        }
    }
    // P = 2xU + x − y, as rows by x-degree.
    let kp = k + 1;
    let mut p: Vec<Vec<BigRational>> = (0..=kp).map(|a| vec![BigRational::zero(); a + 3]).collect();
    for a in 1..=kp {
        for m in 2..=a + 1 {
            p[a][m] = w.get(a - 1, m) * rat(2, 1);
        }
    }
    p[1][0] += BigRational::one();
    p[0][1] -= BigRational::one();
    let mut quadratic_nonzero = 0;
    for a in 0..=kp {
        let width = a + 6;
        let mut row = vec![BigRational::zero(); width];
        for a1 in 0..=a {
            for (b1, x) in p[a1].iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (b2, y) in p[a - a1].iter().enumerate() {
                    if !y.is_zero() {
                        row[b1 + b2] += x * y;
                    }
                }
            }
        }
        // − 4x²y²S
        if a >= 2 {
            row[2] -= &s.coeffs[a - 2] * rat(4, 1);
        }
        // − (x − y)² = −x² + 2xy − y²
        match a {
            0 => row[2] -= BigRational::one(),
            1 => row[1] += rat(2, 1),
            2 => row[0] -= BigRational::one(),
            _ => {}
        }
        // + 4βxy³
        if a == 1 {
            row[3] += beta * rat(4, 1);
        }
        quadratic_nonzero += row.iter().filter(|c| !c.is_zero()).count();
    }
    let y = y_series(beta, k.max(1))?;
    let y3 = mul_trunc(&mul_trunc(&y.coeffs, &y.coeffs, k + 1), &y.coeffs, k + 1);
    let two_beta = beta * rat(2, 1);
    let cubic_nonzero = (0..=k)
        .filter(|&n| {
            let mut r = &y.coeffs[n] - &two_beta * &y3[n];
            if n == 1 {
                r -= BigRational::one();
            }
            !r.is_zero()
        })
        .count();
    Ok(ResidualReport { order: k, functional_nonzero, quadratic_nonzero, cubic_nonzero })
}

/// Discriminant −(4p³ + 27q²) = p²(2/β − 27x²) of y³ + py + q with p = −1/(2β), q = x/(2β).
pub fn cubic_discriminant(beta: &BigRational, x: &BigRational) -> BigRational {
    let p = -(beta * rat(2, 1)).recip();
    let q = x / (beta * rat(2, 1));
    -(&p * &p * &p * rat(4, 1) + &q * &q * rat(27, 1))
}

/// Exact square root of a nonnegative rational when it exists.
pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(BigInt::from(rn), BigInt::from(rd)))
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalData {
    pub beta: f64,
    /// √(2/(27β)).
    pub x1: f64,
    /// x1² = 2/(27β), exact, as "p/q".
    pub x1_squared: String,
    /// x1 as an exact rational when it is one.
    pub x1_exact: Option<String>,
    /// ∛(x1/(2β)).
    pub y_at_x1: f64,
    /// 27·x1/32.
    pub radius_r: f64,
    /// R/x1 as an exact rational.
    pub radius_ratio: String,
    /// Value at x1 of the y(0) = 0 branch, computed from the cubic (= 3x1/2).
    pub y0_at_x1: f64,
    /// Zero of a(x1) + b(x1)y, the y-radius of U(x1, ·) computed from the cubic.
    pub y_radius_at_x1: f64,
}

/// Critical data of the canonical equation for a given β.
pub fn critical_data(beta: &BigRational) -> Result<CriticalData> {
    check_beta(beta)?;
    let x1_sq = rat(2, 27) / beta;
    let b = rat_to_f64(beta);
    let x1 = rat_to_f64(&x1_sq).sqrt();
    let ratio = rat(27, 32);
    let y0 = y0_branch(b, x1)?;
    let (aa, bb) = sqrt_factor_coeffs(b, x1, y0);
    Ok(CriticalData {
        beta: b,
        x1,
        x1_squared: x1_sq.to_string(),
        x1_exact: rational_sqrt(&x1_sq).map(|r| r.to_string()),
        y_at_x1: (x1 / (2.0 * b)).cbrt(),
        radius_r: rat_to_f64(&ratio) * x1,
        radius_ratio: ratio.to_string(),
        y0_at_x1: y0,
        y_radius_at_x1: -aa / bb,
    })
}

/// The root of y(1 − 2βy²) = x on the branch through y(0) = 0, for |x| ≤ x1.
/// On [0, 1/√(6β)] the map y ↦ y − 2βy³ is increasing, so bisection picks the branch.
pub fn y0_branch(beta: f64, x: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::Domain("beta must be positive".into()));
    }
    let x1 = (2.0 / (27.0 * beta)).sqrt();
    if x.abs() > x1 * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("|x| = {} exceeds x1 = {x1}", x.abs())));
    }
    let sign = x.signum();
    let x = x.abs().min(x1);
    let (mut lo, mut hi) = (0.0f64, 1.0 / (6.0 * beta).sqrt());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid - 2.0 * beta * mid * mid * mid < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(sign * 0.5 * (lo + hi))
}

fn sqrt_factor_coeffs(beta: f64, _x: f64, y0: f64) -> (f64, f64) {
    let t = 1.0 - 2.0 * beta * y0 * y0;
    (t * t, -4.0 * beta * y0 * t)
}

/// Radius in y of U(x, ·): the zero x/(4βy₀²) of a(x) + b(x)y.
pub fn y_radius(beta: f64, x: f64) -> Result<f64> {
    let y0 = y0_branch(beta, x)?;
    let (a, b) = sqrt_factor_coeffs(beta, x, y0);
    Ok(-a / b)
}

/// U(x, y) = [y − x − (y − y₀)√(a + by)]/(2x), the branch with U(x, 0) = 0.
pub fn u_expansion(beta: f64, x: f64, y: f64) -> Result<f64> {
    let x1 = (2.0 / (27.0 * beta)).sqrt();
    if !(x > 0.0 && x < x1) {
        return Err(Error::Domain(format!("x = {x} outside (0, x1 = {x1})")));
    }
    let y0 = y0_branch(beta, x)?;
    let (a, b) = sqrt_factor_coeffs(beta, x, y0);
    let r = -a / b;
    if !(0.0..r).contains(&y) {
        return Err(Error::Domain(format!("y = {y} outside [0, {r})")));
    }
    // √(a + by) − √a, written to avoid cancellation near y = 0.
    let sa = a.sqrt();
    let d = b * y / ((a + b * y).sqrt() + sa);
    // y − x − (y − y0)(√a + d) with y0 √a = x.
    Ok((y * (1.0 - sa) - (y - y0) * d) / (2.0 * x))
}

/// Partial sum of Σ w(N,m) xᴺ yᵐ in double precision from the canonical recurrence.
pub fn u_partial_sum(beta: f64, x: f64, y: f64, n_max: usize) -> f64 {
    let w = canonical_table_f64(beta, n_max);
    let mut s = 0.0;
    for (n, row) in w.iter().enumerate() {
        for (i, c) in row.iter().enumerate() {
            s += c * x.powi(n as i32) * y.powi(i as i32 + 2);
        }
    }
    s
}

/// Double-precision canonical coefficients `w[N][m−2]`, m ≤ N+2.
pub fn canonical_table_f64(beta: f64, n_max: usize) -> Vec<Vec<f64>> {
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    w.push(vec![beta]);
    for n in 1..=n_max {
        let mut row = vec![0.0; n + 1];
        for m in 2..=n + 2 {
            if (n + m) % 2 == 1 {
                continue;
            }
            let mut c = if m <= n { w[n - 1][m - 1] } else { 0.0 };
            for n1 in 0..n {
                let n2 = n - 1 - n1;
                for m1 in 2..m {
                    let m2 = m + 1 - m1;
                    if m1 <= n1 + 2 && m2 <= n2 + 2 {
                        c += w[n1][m1 - 2] * w[n2][m2 - 2];
                    }
                }
            }
            row[m - 2] = c;
        }
        w.push(row);
    }
    w
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub window: (usize, usize),
    pub mean: f64,
    /// sup |v_n / mean − 1| over the window, v_n = c_n x1ⁿ n^{b+1}.
    pub sup_relative_deviation: f64,
}

/// Flatness of c_n x1ⁿ n^{b+1} over the last half of the nonzero coefficients.
pub fn coefficient_asymptotics_check(series: &SeriesCoeffs, x1: f64, b: f64) -> Result<AsymptoticsReport> {
    let pts: Vec<(usize, f64)> = series
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_positive())
        .map(|(n, c)| (n, ln_rational(c)))
        .collect();
    if series.coeffs.len() < 100 {
        return Err(Error::InsufficientData(format!("{} coefficients, need 100", series.coeffs.len())));
    }
    coefficient_asymptotics_ln(&pts, x1, b)
}

/// Same check on `(n, ln c_n)` pairs.
pub fn coefficient_asymptotics_ln(pts: &[(usize, f64)], x1: f64, b: f64) -> Result<AsymptoticsReport> {
    if pts.len() < 20 {
        return Err(Error::InsufficientData("too few nonzero coefficients".into()));
    }
    let tail = &pts[pts.len() / 2..];
    let lv: Vec<f64> =
        tail.iter().map(|&(n, l)| l + n as f64 * x1.ln() + (b + 1.0) * (n as f64).ln()).collect();
    let shift = lv.iter().sum::<f64>() / lv.len() as f64;
    let v: Vec<f64> = lv.iter().map(|l| (l - shift).exp()).collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let sup = v.iter().map(|x| (x / mean - 1.0).abs()).fold(0.0, f64::max);
    Ok(AsymptoticsReport {
        window: (tail[0].0, tail[tail.len() - 1].0),
        mean: mean * shift.exp(),
        sup_relative_deviation: sup,
    })
}

/// C(N, 2) as integers, read off the S series at β = 1.
pub fn s_series_integers(order: usize) -> Result<Vec<BigUint>> {
    let s = s_series(&BigRational::one(), order)?;
    s.coeffs
        .iter()
        .map(|c| {
            if !c.is_integer() || c.is_negative() {
                return Err(Error::Domain("coefficient is not a nonnegative integer".into()));
            }
            Ok(c.numer().magnitude().clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &SeriesCoeffs) -> Vec<i64> {
        s.coeffs.iter().map(|c| c.to_integer().try_into().unwrap()).collect()
    }

    #[test]
    fn y_series_small() {
        let y = y_series(&rat(1, 1), 5).unwrap();
        assert_eq!(ints(&y), vec![0, 1, 0, 2, 0, 12]);
        let y = y_series(&rat(3, 7), 9).unwrap();
        assert_eq!(y.coeffs[1], rat(1, 1));
    }

    #[test]
    fn y_series_matches_fixed_point_iteration() {
        let beta = rat(2, 27);
        let order = 15;
        let len = order + 1;
        let mut y = vec![BigRational::zero(); len];
        let mut x = vec![BigRational::zero(); len];
        x[1] = BigRational::one();
        loop {
            let y2 = mul_trunc(&y, &y, len);
            let den: Vec<BigRational> = y2
                .iter()
                .enumerate()
                .map(|(k, c)| if k == 0 { BigRational::one() } else { BigRational::zero() } - c * &beta * rat(2, 1))
                .collect();
            let ny = mul_trunc(&x, &inverse(&den, len), len);
            if ny == y {
                break;
            }
            y = ny;
        }
        assert_eq!(y_series(&beta, order).unwrap().coeffs, y);
    }

    #[test]
    fn s_series_small() {
        let s = s_series(&rat(1, 1), 6).unwrap();
        assert_eq!(ints(&s), vec![1, 0, 1, 0, 4, 0, 24]);
        let s = s_series(&rat(5, 3), 7).unwrap();
        assert_eq!(s.coeffs[0], rat(5, 3));
        assert!(s.coeffs.iter().skip(1).step_by(2).all(|c| c.is_zero()));
    }

    #[test]
    fn the_beta_squared_variant_fails_the_identity() {
        // β(1 − 3β²y²)/(1 − 2βy²)² differs from the solution as soon as β ≠ 1.
        let beta = rat(1, 4);
        let order = 8;
        let len = order + 1;
        let y = y_series(&beta, order).unwrap();
        let y2 = mul_trunc(&y.coeffs, &y.coeffs, len);
        let num: Vec<BigRational> = y2
            .iter()
            .enumerate()
            .map(|(k, c)| if k == 0 { BigRational::one() } else { BigRational::zero() } - c * &beta * &beta * rat(3, 1))
            .collect();
        let den: Vec<BigRational> = y2
            .iter()
            .enumerate()
            .map(|(k, c)| if k == 0 { BigRational::one() } else { BigRational::zero() } - c * &beta * rat(2, 1))
            .collect();
        let inv = inverse(&den, len);
        let alt: Vec<BigRational> =
            mul_trunc(&num, &mul_trunc(&inv, &inv, len), len).into_iter().map(|c| c * &beta).collect();
        let w = canonical_table(&beta, order).unwrap();
        let col: Vec<BigRational> = (0..len).map(|n| w.get(n, 2)).collect();
        assert_ne!(alt, col);
        assert_eq!(s_series(&beta, order).unwrap().coeffs, col);
    }

    #[test]
    fn residuals_vanish() {
        for beta in [rat(1, 1), rat(2, 27), rat(1, 4)] {
            let r = functional_residuals(&beta, 12).unwrap();
            assert!(r.all_zero(), "{r:?}");
        }
    }

    #[test]
    fn discriminant_zero_at_x1() {
        let beta = rat(2, 27);
        assert!(cubic_discriminant(&beta, &rat(1, 1)).is_zero());
        assert!(cubic_discriminant(&beta, &rat(-1, 1)).is_zero());
        assert!(cubic_discriminant(&beta, &rat(1, 2)).is_positive());
    }

    #[test]
    fn critical_values() {
        let c = critical_data(&rat(2, 27)).unwrap();
        assert_eq!(c.x1_exact.as_deref(), Some("1"));
        let c = critical_data(&rat(1, 1)).unwrap();
        assert!((c.x1 - 0.272166).abs() < 1e-6);
        assert!((c.radius_r - 0.229640).abs() < 1e-6);
        assert_eq!(c.radius_ratio, "27/32");
        // double root: bisection accuracy is only ~sqrt(eps)
        assert!((c.y0_at_x1 - 1.5 * c.x1).abs() < 1e-6);
        assert!((c.y_radius_at_x1 - 1.5 * c.x1).abs() < 1e-6);
    }

    #[test]
    fn u_matches_series() {
        let u = u_expansion(1.0, 0.1, 0.1).unwrap();
        let s = u_partial_sum(1.0, 0.1, 0.1, 60);
        assert!((u - s).abs() < 1e-8, "{u} vs {s}");
        assert!(u_expansion(1.0, 0.1, 0.0).unwrap().abs() < 1e-15);
        assert!(u_expansion(1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("2/27").unwrap(), rat(2, 27));
        assert_eq!(parse_rational("0.6").unwrap(), rat(3, 5));
        assert_eq!(parse_rational("1e-2").unwrap(), rat(1, 100));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn synthetic_asymptotics_are_flat() {
        let x1: f64 = 0.3;
        let pts: Vec<(usize, f64)> = (1..400).map(|n| (n, -2.5 * (n as f64).ln() - n as f64 * x1.ln())).collect();
        let r = coefficient_asymptotics_ln(&pts, x1, 1.5).unwrap();
        assert!(r.sup_relative_deviation < 1e-9);
    }
}
