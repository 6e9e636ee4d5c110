//! Closed-form constants of the greedy approximation theory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper end of the search interval for the maximiser of `zeta(c, .)`.
pub const LAMBDA_MAX: f64 = 1e4;

const GRID_POINTS: usize = 4000;

fn check_c(c: f64) -> Result<()> {
    if (0.0..1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::Domain(format!("c must lie in [0, 1), got {c}")))
    }
}

/// `1 - (1 + 1/(1-c)^2)^(-1/(1-c))`.
pub fn mu_a(c: f64) -> Result<f64> {
    check_c(c)?;
    let a = 1.0 - c;
    Ok(1.0 - (1.0 + 1.0 / (a * a)).powf(-1.0 / a))
}

/// `1 - (1 + 1/(1-c))^(-1/(1-c))`: the same expression with an unsquared
/// inner term. Only used to report how the tabulated exponents compare.
pub fn mu_a_unsquared(c: f64) -> Result<f64> {
    check_c(c)?;
    let a = 1.0 - c;
    Ok(1.0 - (1.0 + 1.0 / a).powf(-1.0 / a))
}

/// `1 - exp(-1/(1-c)^2)`.
pub fn mu_e(c: f64) -> Result<f64> {
    check_c(c)?;
    let a = 1.0 - c;
    Ok(1.0 - (-1.0 / (a * a)).exp())
}

/// Smallest admissible `lambda` for a given `mu`: `mu / (1 - mu)`.
pub fn lambda_floor(mu: f64) -> f64 {
    mu / (1.0 - mu)
}

fn zeta_unchecked(c: f64, mu: f64, lambda: f64) -> f64 {
    let num = (1.0 - c) * ((1.0 - mu) * lambda - mu) / (2.0 + lambda);
    num / ((2.0 + lambda) / (2.0 - mu)).ln() + (1.0 - c)
}

/// Decay exponent `zeta(c, lambda)` for `lambda >= mu_a/(1-mu_a)`.
pub fn zeta(c: f64, lambda: f64) -> Result<f64> {
    let mu = mu_a(c)?;
    zeta_with_mu(c, mu, lambda)
}

/// `zeta` with an explicit revisit constant `mu` in `(0, 1)`.
pub fn zeta_with_mu(c: f64, mu: f64, lambda: f64) -> Result<f64> {
    check_c(c)?;
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain(format!("mu must lie in (0, 1), got {mu}")));
    }
    let floor = lambda_floor(mu);
    // relative slack so the floor itself is accepted after rounding
    if !(lambda >= floor * (1.0 - 1e-12)) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "lambda = {lambda} is below the admissible floor {floor}"
        )));
    }
    Ok(zeta_unchecked(c, mu, lambda.max(floor)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub c: f64,
    pub mu_a: f64,
    pub mu_e: f64,
    pub zeta_star: f64,
    pub lambda_star: f64,
    /// `zeta_star / (1 + zeta_star)`.
    pub rate: f64,
}

/// Maximises `zeta(c, .)` over `[mu_a/(1-mu_a), LAMBDA_MAX]`.
pub fn zeta_star(c: f64) -> Result<TheoryConstants> {
    let mu = mu_a(c)?;
    let (lambda_star, zeta_star) = maximise(c, mu)?;
    Ok(TheoryConstants {
        c,
        mu_a: mu,
        mu_e: mu_e(c)?,
        zeta_star,
        lambda_star,
        rate: zeta_star / (1.0 + zeta_star),
    })
}

/// [`zeta_star`] computed with [`mu_a_unsquared`] in place of `mu_a`.
pub fn zeta_star_unsquared(c: f64) -> Result<TheoryConstants> {
    let mu = mu_a_unsquared(c)?;
    let (lambda_star, zeta_star) = maximise(c, mu)?;
    Ok(TheoryConstants {
        c,
        mu_a: mu,
        mu_e: mu_e(c)?,
        zeta_star,
        lambda_star,
        rate: zeta_star / (1.0 + zeta_star),
    })
}

/// Coarse log grid followed by golden-section refinement around the best
/// grid point. Returns `(argmax, max)`.
fn maximise(c: f64, mu: f64) -> Result<(f64, f64)> {
    let lo = lambda_floor(mu);
    if lo >= LAMBDA_MAX {
        return Err(Error::Domain(format!(
            "admissible lambda range [{lo}, {LAMBDA_MAX}] is empty"
        )));
    }
    let f = |l: f64| zeta_unchecked(c, mu, l);
    // offsets t = lambda - lo on a log scale keep resolution near the floor
    let span = LAMBDA_MAX - lo;
    let t_min = 1e-9 * span.max(1.0);
    let grid: Vec<f64> = std::iter::once(lo)
        .chain((0..GRID_POINTS).map(|i| {
            let u = i as f64 / (GRID_POINTS - 1) as f64;
            lo + t_min * (span / t_min).powf(u)
        }))
        .collect();
    let (best, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &l)| (i, f(l)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    let candidates = [(grid[best], f(grid[best])), (x1, f1), (x2, f2)];
    let (l, v) = candidates
        .into_iter()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, cv| if cv.1 > acc.1 { cv } else { acc });
    Ok((l, v))
}

/// Constants for every `c` in `grid`.
pub fn theory_grid(grid: &[f64]) -> Result<Vec<TheoryConstants>> {
    grid.iter().map(|&c| zeta_star(c)).collect()
}

/// Default grid `0.0, 0.05, ..., 0.7`.
pub fn default_grid() -> Vec<f64> {
    (0..=14).map(|i| i as f64 * 0.05).collect()
}

/// Noise level `2 sigma sqrt(log(2p/alpha)/n)`.
pub fn lambda_n(sigma: f64, p: usize, n: usize, alpha: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma must be >= 0, got {sigma}")));
    }
    if p == 0 || n == 0 {
        return Err(Error::Domain(format!("need n, p >= 1 (n={n}, p={p})")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(2.0 * sigma * ((2.0 * p as f64 / alpha).ln() / n as f64).sqrt())
}

/// `prod_{j=0}^{q1-q-1} (1 - (1-c)/(q+j))`.
pub fn delta_naive(q: usize, q1: usize, c: f64) -> Result<f64> {
    check_c(c)?;
    if q == 0 || q1 <= q {
        return Err(Error::Domain(format!("need 1 <= q < q1, got q={q}, q1={q1}")));
    }
    Ok((q..q1).map(|k| 1.0 - (1.0 - c) / k as f64).product())
}

/// Longest admissible run of consecutive non-revisiting steps per unit of
/// `q(m)`: `((1+delta)(2-c)(1+c)/((2+c)(1-c)))^(1/(1-c)) - 1`.
pub fn max_n_run_factor(c: f64, delta: f64) -> Result<f64> {
    check_c(c)?;
    let a = 1.0 - c;
    Ok(((1.0 + delta) * (2.0 - c) * (1.0 + c) / ((2.0 + c) * a)).powf(1.0 / a) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mu_a_examples() {
        assert_abs_diff_eq!(mu_a(0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(mu_a(0.5).unwrap(), 0.96, epsilon = 1e-12);
        let grid: Vec<f64> = (0..999).map(|i| mu_a(i as f64 / 1000.0).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1] >= w[0]));
        assert!(mu_a(0.99).unwrap() > 0.999);
        assert!(mu_a(1.0).is_err() && mu_a(-0.1).is_err());
    }

    #[test]
    fn mu_e_examples() {
        assert_abs_diff_eq!(mu_e(0.0).unwrap(), 0.632121, epsilon = 1e-6);
        assert_abs_diff_eq!(mu_e(0.5).unwrap(), 0.981684, epsilon = 1e-6);
        for i in 0..100 {
            let v = mu_e(i as f64 / 100.0).unwrap();
            assert!(v > 0.63 && v <= 1.0);
            // 1 - exp(-1/(1-c)^2) rounds to 1 in double precision from c ~ 0.83 on
            if i <= 80 {
                assert!(v < 1.0);
            }
        }
    }

    #[test]
    fn zeta_examples() {
        // (1 * (0.5*4 - 0.5) / 6) / ln(6 / 1.5) + 1 = 0.25 / ln 4 + 1
        assert_abs_diff_eq!(zeta(0.0, 4.0).unwrap(), 0.25 / 4f64.ln() + 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(zeta(0.0, 4.0).unwrap(), 1.180, epsilon = 1e-3);
        assert_abs_diff_eq!(zeta(0.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(zeta(0.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn zeta_star_matches_dense_grid() {
        for &c in &[0.0, 0.1, 0.2, 0.3, 0.5] {
            let k = zeta_star(c).unwrap();
            let lo = lambda_floor(k.mu_a);
            let mut best = f64::NEG_INFINITY;
            for i in 0..1_000_000 {
                let l = lo + (LAMBDA_MAX - lo) * (i as f64 / 999_999.0).powi(3);
                best = best.max(zeta(c, l).unwrap());
            }
            assert!((k.zeta_star - best).abs() < 1e-4, "c={c}: {} vs {best}", k.zeta_star);
            assert!(k.zeta_star >= best - 1e-12);
        }
    }

    #[test]
    fn zeta_star_decreasing_on_grid() {
        let table = theory_grid(&default_grid()).unwrap();
        assert!(table.windows(2).all(|w| w[1].zeta_star < w[0].zeta_star));
        for k in &table {
            assert!(k.zeta_star > 0.0 && k.rate > 0.0 && k.rate < 1.0);
            assert!(k.mu_a > 0.0 && k.mu_a < 1.0 && k.mu_e > 0.0 && k.mu_e < 1.0);
        }
    }

    #[test]
    fn lambda_n_examples() {
        assert_abs_diff_eq!(
            lambda_n(2.0, 10, 20, 0.05).unwrap(),
            4.0 * (400f64.ln() / 20.0).sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(lambda_n(2.0, 10, 20, 0.05).unwrap(), 2.189331, epsilon = 1e-6);
        assert_eq!(lambda_n(0.0, 10, 20, 0.05).unwrap(), 0.0);
        assert!(lambda_n(1.0, 20, 20, 0.05).unwrap() > lambda_n(1.0, 10, 20, 0.05).unwrap());
        assert!(lambda_n(1.0, 10, 40, 0.05).unwrap() < lambda_n(1.0, 10, 20, 0.05).unwrap());
        assert!(lambda_n(1.0, 10, 20, 1.0).is_err());
    }

    #[test]
    fn delta_naive_examples() {
        assert_abs_diff_eq!(delta_naive(2, 4, 0.0).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(delta_naive(5, 6, 0.2).unwrap(), 1.0 - 0.8 / 5.0, epsilon = 1e-15);
        // the product sits below (k/k1)^(1-c) and the ratio tends to 1 as k grows
        for k in 1..20 {
            for k1 in k + 1..40 {
                for &c in &[0.0, 0.2, 0.5, 0.8] {
                    let ratio = delta_naive(k, k1, c).unwrap() / (k as f64 / k1 as f64).powf(1.0 - c);
                    assert!(ratio <= 1.0 + 1e-12, "k={k} k1={k1} c={c}: {ratio}");
                }
            }
        }
        for &c in &[0.0, 0.2, 0.5] {
            let ratio = |k: usize| delta_naive(k, 2 * k, c).unwrap() / 0.5f64.powf(1.0 - c);
            assert!(ratio(10) < ratio(100) && ratio(100) < ratio(1000));
            assert!((ratio(1000) - 1.0).abs() < 1e-3);
        }
        assert!(delta_naive(0, 3, 0.0).is_err() && delta_naive(3, 3, 0.0).is_err());
    }
}
