//! Beta moments and product integration against algebraic endpoint weights.

use statrs::function::beta::ln_beta;

use crate::error::{domain, Result};

/// `∫₀^{s0} s^a (s0−s)^b ds = B(a+1, b+1) s0^{a+b+1}`, via log-Gamma.
pub fn beta_moment(a: f64, b: f64, s0: f64) -> Result<f64> {
    if !(a > -1.0 && b > -1.0) {
        return domain(format!("beta_moment needs exponents > −1, got ({a}, {b})"));
    }
    if !(s0 > 0.0) {
        return domain(format!("beta_moment needs s0 > 0, got {s0}"));
    }
    Ok((ln_beta(a + 1.0, b + 1.0) + (a + b + 1.0) * s0.ln()).exp())
}

/// `B(x, y)` for positive arguments.
pub fn beta(x: f64, y: f64) -> f64 {
    ln_beta(x, y).exp()
}

/// `∫_a^b s^e ds` for `0 ≤ a < b`, accurate for narrow cells far from 0.
pub fn power_integral(e: f64, a: f64, b: f64) -> f64 {
    debug_assert!(0.0 <= a && a <= b);
    if a == b {
        return 0.0;
    }
    let k = e + 1.0;
    if a == 0.0 {
        debug_assert!(k > 0.0, "∫₀ s^e diverges for e ≤ −1");
        return b.powf(k) / k;
    }
    let log_ratio = (a / b).ln();
    if k == 0.0 {
        return -log_ratio;
    }
    -b.powf(k) * (k * log_ratio).exp_m1() / k
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; points];
    let mut weights = vec![0.0; points];
    let nf = points as f64;
    for i in 0..points.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=points {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[points - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[points - 1 - i] = w;
    }
    (nodes, weights)
}

const GAUSS_POINTS: usize = 12;
const ORIGIN_NODES: usize = 8;
const DYADIC_LEVELS: usize = 40;

/// `∫₀^h x^c f(x) dx` for smooth `f` and `c > −1`.
///
/// Dyadic cells `[h 2^{−k−1}, h 2^{−k}]` use Gauss–Legendre on the full
/// integrand; the innermost cell `[0, h 2^{−K}]` interpolates `f` and
/// integrates the interpolant against `x^c` exactly.
pub fn origin_weighted_integral(c: f64, h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (gx, gw) = gauss_legendre(GAUSS_POINTS);
    let mut total = 0.0;
    let mut hi = h;
    for _ in 0..DYADIC_LEVELS {
        let lo = 0.5 * hi;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let cell: f64 = gx
            .iter()
            .zip(&gw)
            .map(|(x, w)| {
                let s = mid + half * x;
                w * s.powf(c) * f(s)
            })
            .sum();
        total += half * cell;
        hi = lo;
    }
    total + product_rule_at_origin(c, hi, &f)
}

/// Interpolatory product rule on `[0, h]` with Chebyshev nodes.
fn product_rule_at_origin(c: f64, h: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let nodes: Vec<f64> = (0..ORIGIN_NODES)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * ORIGIN_NODES) as f64;
            0.5 * (1.0 - theta.cos())
        })
        .collect();
    // moments[j] = ∫₀¹ t^{c+j} dt
    let moments: Vec<f64> = (0..ORIGIN_NODES).map(|j| 1.0 / (c + j as f64 + 1.0)).collect();
    let mut total = 0.0;
    for (k, &tk) in nodes.iter().enumerate() {
        // Lagrange basis polynomial ℓ_k in monomial form.
        let mut coeffs = vec![1.0];
        let mut denom = 1.0;
        for (j, &tj) in nodes.iter().enumerate() {
            if j == k {
                continue;
            }
            let mut next = vec![0.0; coeffs.len() + 1];
            for (d, a) in coeffs.iter().enumerate() {
                next[d + 1] += a;
                next[d] -= a * tj;
            }
            coeffs = next;
            denom *= tk - tj;
        }
        let weight: f64 = coeffs.iter().zip(&moments).map(|(a, m)| a * m).sum::<f64>() / denom;
        total += weight * f(h * tk);
    }
    total * h.powf(c + 1.0)
}

/// `∫₀^{s0} s^a (s0−s)^b g(s) ds` for smooth `g` and `a, b > −1`.
pub fn jacobi_weighted_integral(
    a: f64,
    b: f64,
    s0: f64,
    g: impl Fn(f64) -> f64,
) -> Result<f64> {
    if !(a > -1.0 && b > -1.0 && s0 > 0.0) {
        return domain(format!("need a, b > −1 and s0 > 0, got ({a}, {b}, {s0})"));
    }
    let half = 0.5 * s0;
    let left = origin_weighted_integral(a, half, |x| (s0 - x).powf(b) * g(x));
    let right = origin_weighted_integral(b, half, |t| (s0 - t).powf(a) * g(s0 - t));
    Ok(left + right)
}
