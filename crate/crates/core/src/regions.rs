//! Exact parameter-admissibility regions.
//!
//! Everything here is rational arithmetic: the κ-suprema of the blow-up
//! conditions, the admissible window for the moment exponent γ, and the
//! table of κ-suprema for linear diffusion. Intervals are open; membership
//! uses strict inequalities.

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::fmt;

use crate::error::{domain, Error, Result};
use crate::params::Variant;

/// Exact rational.
pub type Q = Ratio<i128>;

pub fn q(numer: i128, denom: i128) -> Q {
    Q::new(numer, denom)
}

pub fn qi(k: i128) -> Q {
    Q::from_integer(k)
}

/// `(x)₊ = max{x, 0}`
pub fn pos(x: Q) -> Q {
    if x.is_negative() {
        Q::zero()
    } else {
        x
    }
}

fn qmin(a: Q, b: Q) -> Q {
    if a <= b {
        a
    } else {
        b
    }
}

fn qmax(a: Q, b: Q) -> Q {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Parses `"1/3"`, `"2"`, `"0.125"` or `"-1.5e-2"` into an exact rational.
pub fn parse_q(text: &str) -> Result<Q> {
    let text = text.trim();
    let bad = || Error::Config(format!("not a rational number: '{text}'"));
    if let Some((a, b)) = text.split_once('/') {
        let a: i128 = a.trim().parse().map_err(|_| bad())?;
        let b: i128 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(q(a, b));
    }
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let numer: i128 = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    if scale.unsigned_abs() > 30 {
        return Err(bad());
    }
    let ten = 10i128.pow(scale.unsigned_abs());
    let mut value = if scale >= 0 { qi(numer * ten) } else { q(numer, ten) };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Exact rational for the shortest decimal representation of `x`.
pub fn q_from_f64(x: f64) -> Result<Q> {
    if !x.is_finite() {
        return Err(Error::Config(format!("non-finite value {x}")));
    }
    parse_q(&format!("{x:e}"))
}

/// Which estimate of the diffusion integral drives the condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `m ≥ 2/p`
    LargeM,
    /// `m < 2/p`
    SmallM,
    /// Parabolic–elliptic condition, evaluated at `p = p₀`.
    PE,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::LargeM => "LargeM",
            Branch::SmallM => "SmallM",
            Branch::PE => "PE",
        };
        f.write_str(s)
    }
}

/// Least upper bound of admissible κ. The admissible set is `[0, sup_kappa)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaBound {
    #[serde(serialize_with = "ser_q")]
    pub sup_kappa: Q,
    pub branch: Branch,
    pub empty: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl KappaBound {
    fn finite(sup_kappa: Q, branch: Branch) -> Self {
        let empty = sup_kappa <= Q::zero();
        KappaBound {
            sup_kappa,
            branch,
            empty,
            reason: empty.then(|| "supremum is not positive".to_string()),
        }
    }

    fn vacuous(branch: Branch, reason: impl Into<String>) -> Self {
        KappaBound {
            sup_kappa: Q::zero(),
            branch,
            empty: true,
            reason: Some(reason.into()),
        }
    }

    pub fn admits(&self, kappa: Q) -> bool {
        !self.empty && kappa >= Q::zero() && kappa < self.sup_kappa
    }
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn check_common(n: u32, m: Q, alpha: Q) -> Result<()> {
    if n < 3 {
        return domain(format!("n = {n} < 3"));
    }
    if m <= Q::zero() {
        return domain(format!("m = {m} must be positive"));
    }
    if alpha.is_negative() {
        return domain(format!("α = {alpha} must be nonnegative"));
    }
    Ok(())
}

/// Supremum of admissible κ for a pointwise bound `u ≤ K|x|^{−p}`, `p ≥ n`.
pub fn kappa_sup_main(n: u32, m: Q, p: Q, alpha: Q) -> Result<KappaBound> {
    check_common(n, m, alpha)?;
    let nq = qi(n as i128);
    if p < nq {
        return domain(format!("p = {p} < n = {n}"));
    }
    let two_over_p = qi(2) / p;
    let branch = if m >= two_over_p { Branch::LargeM } else { Branch::SmallM };
    let m_cap = qi(1) + (nq - qi(2)) / p;
    if m >= m_cap {
        return Ok(KappaBound::vacuous(branch, format!("m < 1 + (n−2)/p = {m_cap} fails")));
    }
    let first = nq / (qi(2) * p);
    let second = match branch {
        Branch::LargeM => (nq - qi(2)) / p - pos(m - qi(1)),
        _ => (nq - qi(1)) / p - m / qi(2),
    };
    Ok(KappaBound::finite(alpha / p + qmin(first, second), branch))
}

/// JL condition: [`kappa_sup_main`] at `p = n`, requiring `m < (2n−2)/n`.
pub fn kappa_sup_jl(n: u32, m: Q, alpha: Q) -> Result<KappaBound> {
    check_common(n, m, alpha)?;
    let nq = qi(n as i128);
    let cap = (qi(2) * nq - qi(2)) / nq;
    if m >= cap {
        let branch = if m >= qi(2) / nq { Branch::LargeM } else { Branch::SmallM };
        return Ok(KappaBound::vacuous(branch, format!("m < (2n−2)/n = {cap} fails")));
    }
    kappa_sup_main(n, m, nq, alpha)
}

/// PE condition, `1 ≤ m < (2n−2)/n`.
pub fn kappa_sup_pe(n: u32, m: Q, alpha: Q) -> Result<KappaBound> {
    check_common(n, m, alpha)?;
    if m < qi(1) {
        return domain(format!("m = {m} < 1"));
    }
    let nq = qi(n as i128);
    let cap = (qi(2) * nq - qi(2)) / nq;
    if m >= cap {
        return Ok(KappaBound::vacuous(Branch::PE, format!("m < (2n−2)/n = {cap} fails")));
    }
    let lift = (m - qi(1)) * nq + qi(1);
    let nn1 = nq * (nq - qi(1));
    let first = lift / (qi(2) * (nq - qi(1)));
    let second = (nq - qi(2) - (m - qi(1)) * nq) / nn1;
    Ok(KappaBound::finite(alpha * lift / nn1 + qmin(first, second), Branch::PE))
}

/// `p₀ = n(n−1)/((m−1)n + 1)`, the pointwise-bound exponent for PE.
pub fn pe_exponent_p0(n: u32, m: Q) -> Result<Q> {
    if n < 3 {
        return domain(format!("n = {n} < 3"));
    }
    let nq = qi(n as i128);
    if m < qi(1) || m >= (qi(2) * nq - qi(2)) / nq {
        return domain(format!("p₀ needs 1 ≤ m < (2n−2)/n, got m = {m}"));
    }
    Ok(nq * (nq - qi(1)) / ((m - qi(1)) * nq + qi(1)))
}

/// Open interval of admissible moment exponents γ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaWindow {
    #[serde(serialize_with = "ser_q")]
    pub lower: Q,
    #[serde(serialize_with = "ser_q")]
    pub upper: Q,
    pub branch: Branch,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl GammaWindow {
    pub fn is_empty(&self) -> bool {
        self.reason.is_some() || self.lower >= self.upper
    }

    pub fn contains(&self, gamma: Q) -> bool {
        !self.is_empty() && self.lower < gamma && gamma < self.upper
    }

    /// Default γ: the exact midpoint.
    pub fn midpoint(&self) -> Q {
        (self.lower + self.upper) / qi(2)
    }
}

/// Admissible γ for given `(n, m, p, κ, α)`; empty with a reason when κ is
/// outside `[0, kappa_sup_main)`.
pub fn gamma_window(n: u32, m: Q, p: Q, kappa: Q, alpha: Q) -> Result<GammaWindow> {
    let bound = kappa_sup_main(n, m, p, alpha)?;
    let nq = qi(n as i128);
    let damping = qi(2) * p * kappa / nq - qi(2) * alpha / nq;
    let (lower, upper) = match bound.branch {
        Branch::SmallM => (
            qmax(Q::zero(), damping),
            qmin(qi(2) - qi(2) / nq - p * m / nq, qi(1)),
        ),
        _ => {
            let q_excess = p / nq * pos(m - qi(1));
            (
                qmax(qmax(Q::zero(), damping), qi(1) - qi(2) / nq - q_excess),
                qmin(qi(2) - qi(4) / nq - qi(2) * q_excess, qi(1)),
            )
        }
    };
    let reason = if bound.empty {
        bound.reason.clone()
    } else if kappa.is_negative() {
        Some(format!("κ = {kappa} < 0"))
    } else if kappa >= bound.sup_kappa {
        Some(format!("κ = {kappa} ≥ sup = {}", bound.sup_kappa))
    } else {
        None
    };
    Ok(GammaWindow { lower, upper, branch: bound.branch, reason })
}

/// A row of the κ-supremum table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub n: u32,
    #[serde(serialize_with = "ser_q")]
    pub m: Q,
    pub variant: Variant,
    #[serde(serialize_with = "ser_q")]
    pub kappa_sup: Q,
}

/// κ-suprema for `m = 1`, `α = 0`, `n ∈ {3, …, 10}`, both variants.
pub fn table1() -> Vec<Table1Row> {
    let m = qi(1);
    let mut rows = Vec::new();
    for n in 3..=10u32 {
        for variant in [Variant::JL, Variant::PE] {
            let bound = match variant {
                Variant::JL => kappa_sup_jl(n, m, Q::zero()),
                Variant::PE => kappa_sup_pe(n, m, Q::zero()),
            }
            .expect("m = 1 is admissible for every n ≥ 3");
            rows.push(Table1Row { n, m, variant, kappa_sup: bound.sup_kappa });
        }
    }
    rows
}

pub fn table1_csv() -> String {
    let mut out = String::from("n,m,variant,kappa_sup,kappa_sup_f64\n");
    for row in table1() {
        out.push_str(&format!(
            "{},{},{},{},{:.17e}\n",
            row.n,
            row.m,
            row.variant,
            row.kappa_sup,
            to_f64(row.kappa_sup)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn main_condition_examples() {
        let b = kappa_sup_main(3, qi(1), qi(3), qi(0)).unwrap();
        assert_eq!((b.sup_kappa, b.branch, b.empty), (q(1, 3), Branch::LargeM, false));
        assert_eq!(kappa_sup_main(4, qi(1), qi(4), qi(0)).unwrap().sup_kappa, q(1, 2));
        let b = kappa_sup_main(5, q(1, 10), qi(5), qi(0)).unwrap();
        assert_eq!((b.sup_kappa, b.branch), (q(1, 2), Branch::SmallM));
        assert!(kappa_sup_main(5, qi(1), qi(4), qi(0)).is_err());
    }

    #[test]
    fn jl_examples() {
        assert_eq!(kappa_sup_jl(3, qi(1), qi(0)).unwrap().sup_kappa, q(1, 3));
        assert_eq!(kappa_sup_jl(5, qi(1), qi(0)).unwrap().sup_kappa, q(1, 2));
        let b = kappa_sup_jl(3, q(4, 3), qi(0)).unwrap();
        assert!(b.empty);
        assert!(b.reason.unwrap().contains("(2n−2)/n"));
        // α shifts the bound by α/n
        assert_eq!(kappa_sup_jl(3, qi(1), qi(1)).unwrap().sup_kappa, q(2, 3));
    }

    #[test]
    fn pe_examples() {
        assert_eq!(kappa_sup_pe(3, qi(1), qi(0)).unwrap().sup_kappa, q(1, 6));
        assert_eq!(kappa_sup_pe(7, qi(1), qi(0)).unwrap().sup_kappa, q(1, 12));
        assert_eq!(kappa_sup_pe(5, q(6, 5), qi(0)).unwrap().sup_kappa, q(1, 10));
        assert!(kappa_sup_pe(3, q(1, 2), qi(0)).is_err());
        assert_eq!(kappa_sup_pe(3, qi(1), qi(1)).unwrap().sup_kappa, q(1, 3));
    }

    #[test]
    fn pe_exponent_examples() {
        assert_eq!(pe_exponent_p0(3, qi(1)).unwrap(), qi(6));
        assert_eq!(pe_exponent_p0(5, qi(1)).unwrap(), qi(20));
        assert_eq!(pe_exponent_p0(4, q(5, 4)).unwrap(), qi(6));
        assert!(pe_exponent_p0(4, q(3, 2)).is_err());
        assert!(pe_exponent_p0(4, q(1, 2)).is_err());
    }

    #[test]
    fn gamma_window_examples() {
        let w = gamma_window(3, qi(1), qi(3), qi(0), qi(0)).unwrap();
        assert_eq!((w.lower, w.upper), (q(1, 3), q(2, 3)));
        assert!(!w.is_empty());
        let w = gamma_window(4, qi(1), qi(4), qi(0), qi(0)).unwrap();
        assert_eq!((w.lower, w.upper), (q(1, 2), qi(1)));
        let w = gamma_window(5, q(1, 10), qi(5), qi(0), qi(0)).unwrap();
        assert_eq!((w.lower, w.upper, w.branch), (qi(0), qi(1), Branch::SmallM));
        let w = gamma_window(3, qi(1), qi(3), q(1, 3), qi(0)).unwrap();
        assert!(w.is_empty());
        assert!(w.reason.is_some());
    }

    #[test]
    fn table_values() {
        let rows = table1();
        assert_eq!(rows.len(), 16);
        for row in rows {
            let expected = match (row.variant, row.n) {
                (Variant::JL, 3) => q(1, 3),
                (Variant::JL, _) => q(1, 2),
                (Variant::PE, 3 | 4) => q(1, 6),
                (Variant::PE, n) => q(1, 2 * (n as i128 - 1)),
            };
            assert_eq!(row.kappa_sup, expected, "{row:?}");
        }
        assert!(table1_csv().starts_with("n,m,variant,kappa_sup"));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_q("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_q("0.2").unwrap(), q(1, 5));
        assert_eq!(parse_q("-1.5e-2").unwrap(), q(-3, 200));
        assert_eq!(parse_q("3").unwrap(), qi(3));
        assert_eq!(q_from_f64(0.1).unwrap(), q(1, 10));
        assert!(parse_q("abc").is_err());
        assert!(parse_q("1/0").is_err());
    }

    fn small_q() -> impl Strategy<Value = Q> {
        (0i128..40, 1i128..12).prop_map(|(a, b)| q(a, b))
    }

    proptest! {
        #[test]
        fn jl_is_main_at_p_equals_n(n in 3u32..=9, m in (1i128..60, 1i128..30), alpha in small_q()) {
            let m = q(m.0, m.1);
            let nq = qi(n as i128);
            if m < (qi(2) * nq - qi(2)) / nq {
                prop_assert_eq!(kappa_sup_jl(n, m, alpha).unwrap(), kappa_sup_main(n, m, nq, alpha).unwrap());
            }
        }

        #[test]
        fn pe_is_main_at_p0(n in 3u32..=9, m in (0i128..40, 1i128..30), alpha in small_q()) {
            let m = qi(1) + q(m.0, m.1) / qi(10);
            if let Ok(p0) = pe_exponent_p0(n, m) {
                prop_assert!(p0 >= qi(n as i128));
                let pe = kappa_sup_pe(n, m, alpha).unwrap();
                let main = kappa_sup_main(n, m, p0, alpha).unwrap();
                prop_assert_eq!(pe.sup_kappa, main.sup_kappa);
            }
        }

        #[test]
        fn suprema_nondecreasing_in_alpha(n in 3u32..=9, m in (1i128..40, 1i128..30), a in small_q(), da in small_q()) {
            let m = q(m.0, m.1);
            let nq = qi(n as i128);
            let lo = kappa_sup_main(n, m, nq, a).unwrap();
            let hi = kappa_sup_main(n, m, nq, a + da).unwrap();
            if !lo.empty {
                prop_assert!(hi.sup_kappa >= lo.sup_kappa);
            }
            if m >= qi(1) {
                let lo = kappa_sup_pe(n, m, a).unwrap();
                let hi = kappa_sup_pe(n, m, a + da).unwrap();
                if !lo.empty {
                    prop_assert!(hi.sup_kappa >= lo.sup_kappa);
                }
            }
        }

        #[test]
        fn window_nonempty_below_sup(n in 3u32..=8, pk in 0i128..20, m in (1i128..50, 1i128..20), alpha in small_q(), frac in 0i128..1000) {
            let nq = qi(n as i128);
            let p = nq + q(pk, 4);
            let m = q(m.0, m.1);
            let bound = kappa_sup_main(n, m, p, alpha).unwrap();
            if !bound.empty {
                let kappa = bound.sup_kappa * q(frac, 1000);
                let w = gamma_window(n, m, p, kappa, alpha).unwrap();
                prop_assert!(!w.is_empty(), "{:?}", w);
                prop_assert!(w.lower >= qi(0) && w.upper <= qi(1) && w.lower < w.upper);
            }
        }
    }
}
