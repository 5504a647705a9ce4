//! Classical communication bounds for DXHOG.
//!
//! * Lower bound: any `m`-bit one-way protocol achieves `F_XEB ≤ ε(m, a)` for
//!   every `a > 1`, given bounds `A ≥ ‖M‖_F` and `B ≥ ‖M‖_op` on Bob's
//!   measurement-averaged projector for the chosen ensemble.
//! * Upper bound: the shared-codebook protocol reaches
//!   `(H_N - 1)(1 - N/(N-1) ∫₀¹ (1 - u^{N-1})^{2^m} du)` with `N = 2^n`; we
//!   report the `1 - x ≤ e^{-x}` variant, which is itself achievable.
//! * Hidden Matching: the best-known noisy-HM lower bound for comparison.

use std::f64::consts::{E, LN_2, PI};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::special::{erfcx, gamma as gamma_fn, gamma_p, harmonic_pow2, integrate};

/// Bob's measurement ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ensemble {
    ProductClifford,
    Clifford,
    /// δ-approximate unitary t-design for every `t ≤ t_max`, assumed
    /// Clifford-invariant.
    Design {
        t_max: u32,
        delta: f64,
    },
    Haar,
}

impl Ensemble {
    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::ProductClifford => "product_clifford",
            Ensemble::Clifford => "clifford",
            Ensemble::Design { .. } => "design",
            Ensemble::Haar => "haar",
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ensemble::Design { t_max, delta } => write!(f, "design(t_max={t_max},delta={delta})"),
            e => f.write_str(e.name()),
        }
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    /// Accepts `product_clifford`, `clifford`, `haar`, `design` (t_max 10,
    /// δ 0) and `design:<t_max>[:<delta>]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let e = match head {
            "product_clifford" | "product-clifford" => Ensemble::ProductClifford,
            "clifford" => Ensemble::Clifford,
            "haar" => Ensemble::Haar,
            "design" => {
                let t_max = match parts.next() {
                    Some(t) => t
                        .parse()
                        .map_err(|_| Error::Malformed(format!("bad design order {t:?}")))?,
                    None => 10,
                };
                let delta = match parts.next() {
                    Some(d) => d
                        .parse()
                        .map_err(|_| Error::Malformed(format!("bad design delta {d:?}")))?,
                    None => 0.0,
                };
                Ensemble::Design { t_max, delta }
            }
            other => return Err(Error::Malformed(format!("unknown ensemble {other:?}"))),
        };
        if parts.next().is_some() {
            return Err(Error::Malformed(format!("bad ensemble {s:?}")));
        }
        Ok(e)
    }
}

/// Frobenius (`a`) and operator (`b`) norm bounds; `t_opt` is the moment order
/// that minimized `b`, when one was optimized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormBounds {
    pub a: f64,
    pub b: f64,
    pub t_opt: Option<u32>,
}

fn check_a(a: f64) -> Result<()> {
    if a.is_nan() || a <= 1.0 {
        return Err(Error::OutOfRange {
            what: "free parameter a",
            value: a,
            range: "(1, ∞)",
        });
    }
    Ok(())
}

/// `γ(a) = a e^{1/a}/(a+1) + 2/(e(a³-a)) - 1`.
pub fn gamma(a: f64) -> Result<f64> {
    check_a(a)?;
    Ok(gamma_unchecked(a))
}

fn gamma_unchecked(a: f64) -> f64 {
    a * (1.0 / a).exp() / (a + 1.0) + 2.0 / (E * (a * a * a - a)) - 1.0
}

/// Clifford operator-norm bound at moment order `t`:
/// `(Π_{i=0}^{t-2} (2^i + 1)/(2^n + 2^i))^{1/t}`.
pub fn clifford_op_bound(n: u32, t: u32) -> f64 {
    let big = 2f64.powi(n as i32);
    let log: f64 = (0..t.saturating_sub(1))
        .map(|i| {
            let small = 2f64.powi(i as i32);
            ((small + 1.0) / (big + small)).ln()
        })
        .sum();
    (log / t as f64).exp()
}

/// Design operator-norm bound at order `t`:
/// `((1+δ) t! / ((2^n+1)···(2^n+t-1)))^{1/t}`.
pub fn design_op_bound(n: u32, t: u32, delta: f64) -> f64 {
    let big = 2f64.powi(n as i32);
    let log = (1.0 + delta).ln() + (1..=t).map(|j| (j as f64).ln()).sum::<f64>()
        - (1..t).map(|j| (big + j as f64).ln()).sum::<f64>();
    (log / t as f64).exp()
}

/// Norm bounds for an ensemble on `n` qubits.
pub fn norm_bounds(ensemble: Ensemble, n: u32) -> Result<NormBounds> {
    if n == 0 || n > 60 {
        return Err(Error::OutOfRange {
            what: "qubit count",
            value: n as f64,
            range: "1..=60",
        });
    }
    let big = 2f64.powi(n as i32);
    let clifford_invariant_a = (2.0 / (big + 1.0)).sqrt();
    let argmin = |f: &dyn Fn(u32) -> f64, t_max: u32| {
        (1..=t_max)
            .map(|t| (t, f(t)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("t range is nonempty")
    };
    Ok(match ensemble {
        Ensemble::ProductClifford => {
            let a = (2.0f64 / 3.0).powf(n as f64 / 2.0);
            NormBounds {
                a,
                b: a,
                t_opt: None,
            }
        }
        Ensemble::Clifford => {
            let (t, b) = argmin(&|t| clifford_op_bound(n, t), n);
            NormBounds {
                a: clifford_invariant_a,
                b,
                t_opt: Some(t),
            }
        }
        Ensemble::Design { t_max, delta } => {
            if t_max == 0 || !(delta >= 0.0) {
                return Err(Error::OutOfRange {
                    what: "design order / delta",
                    value: t_max as f64,
                    range: "t_max ≥ 1, delta ≥ 0",
                });
            }
            let (t, b) = argmin(&|t| design_op_bound(n, t, delta), t_max);
            NormBounds {
                a: clifford_invariant_a,
                b,
                t_opt: Some(t),
            }
        }
        Ensemble::Haar => NormBounds {
            a: clifford_invariant_a,
            b: harmonic_pow2(n) / big,
            t_opt: None,
        },
    })
}

/// Tail bound on `Σ X_i - Σ μ_i ≥ t` for independent exponentials with
/// `Σ μ_i² ≤ A²` and `max μ_i ≤ B`.
pub fn tail_bound(t: f64, a: f64, frob: f64, op: f64) -> Result<f64> {
    let g = gamma(a)?;
    let knee = 2.0 * g * a * frob * frob / op;
    Ok(if t <= knee {
        (-(t * t) / (4.0 * g * a * a * frob * frob)).exp()
    } else {
        (-(t / (a * op) - g * frob * frob / (op * op))).exp()
    })
}

/// The ceiling `ε(m, a)` on `F_XEB` for `m`-bit protocols.
pub fn lb_eps(m: f64, a: f64, bounds: &NormBounds) -> Result<f64> {
    check_a(a)?;
    if !(m >= 0.0) {
        return Err(Error::OutOfRange {
            what: "message length m",
            value: m,
            range: "[0, ∞)",
        });
    }
    Ok(lb_eps_unchecked(m, a, bounds))
}

fn lb_eps_unchecked(m: f64, a: f64, bounds: &NormBounds) -> f64 {
    let NormBounds { a: fa, b: fb, .. } = *bounds;
    let g = gamma_unchecked(a);
    let ratio = g * fa * fa / (fb * fb);
    let mln2 = m * LN_2;
    if mln2 <= ratio {
        let t_star = (mln2 * 4.0 * g * a * a * fa * fa).sqrt();
        // 2^m (erf(x2) - erf(x1)) with x1² = m ln 2 written through erfcx
        let x1 = mln2.sqrt();
        let x2 = ratio.sqrt();
        let erf_gap = erfcx(x1) - (mln2 - ratio).exp() * erfcx(x2);
        t_star + (PI * g).sqrt() * a * fa * erf_gap + a * fb * (mln2 - ratio).exp()
    } else {
        let t_star = a * fb * (mln2 + ratio);
        t_star + a * fb
    }
}

/// Lower end of the `a` search bracket.
pub const A_MIN: f64 = 1.0 + 1e-6;
/// Upper end of the `a` search bracket.
pub const A_MAX: f64 = 64.0;

/// `min_a ε(m, a)` over `a ∈ (1, 64]`: a 64-point log-spaced scan of `a - 1`
/// followed by golden-section refinement around the best grid point.
pub fn lb_eps_opt(m: f64, bounds: &NormBounds) -> (f64, f64) {
    const GRID: usize = 64;
    let lo = (A_MIN - 1.0).ln();
    let hi = (A_MAX - 1.0).ln();
    let grid: Vec<f64> = (0..GRID)
        .map(|i| 1.0 + (lo + (hi - lo) * i as f64 / (GRID - 1) as f64).exp())
        .collect();
    let f = |a: f64| lb_eps_unchecked(m, a, bounds);
    let (best_i, best_v) = grid
        .iter()
        .map(|&a| f(a))
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("nonempty grid");
    let mut left = grid[best_i.saturating_sub(1)];
    let mut right = grid[(best_i + 1).min(GRID - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = right - phi * (right - left);
    let mut d = left + phi * (right - left);
    let (mut fc, mut fd) = (f(c), f(d));
    while right - left > 1e-10 * right {
        if fc < fd {
            right = d;
            d = c;
            fd = fc;
            c = right - phi * (right - left);
            fc = f(c);
        } else {
            left = c;
            c = d;
            fc = fd;
            d = left + phi * (right - left);
            fd = f(d);
        }
    }
    let (a_g, v_g) = if fc < fd { (c, fc) } else { (d, fd) };
    if v_g <= best_v {
        (v_g, a_g)
    } else {
        (best_v, grid[best_i])
    }
}

/// Smallest `m ≥ 1` with `min_a ε(m, a) ≥ target`: no protocol with fewer
/// bits reaches `target`.
pub fn lb_min_m(n: u32, ensemble: Ensemble, target: f64) -> Result<u64> {
    if !(target > 0.0) {
        return Err(Error::OutOfRange {
            what: "target F_XEB",
            value: target,
            range: "(0, ∞)",
        });
    }
    let bounds = norm_bounds(ensemble, n)?;
    let max_m = 1u64 << (n + 2).min(62);
    let reaches = |m: u64| lb_eps_opt(m as f64, &bounds).0 >= target;
    if !reaches(max_m) {
        return Err(Error::Unreachable { target, max_m });
    }
    Ok(bisect_first(1, max_m, reaches))
}

/// First `m` in `lo..=hi` satisfying a monotone predicate known to hold at
/// `hi`.
fn bisect_first(mut lo: u64, mut hi: u64, pred: impl Fn(u64) -> bool) -> u64 {
    if pred(lo) {
        return lo;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `(H_N - 1)(1 - N/(N-1)·I)` for a given codebook integral `I`.
fn ub_from_integral(n: u32, integral: f64) -> f64 {
    let big = 2f64.powi(n as i32);
    (harmonic_pow2(n) - 1.0) * (1.0 - big / (big - 1.0) * integral)
}

/// `∫₀¹ exp(-2^m u^p) du` through the lower incomplete gamma function:
/// `2^{-m/p} Γ(1 + 1/p) P(1/p, 2^m)`.
pub fn exp_integral_closed(m: f64, p: f64) -> f64 {
    let s = 1.0 / p;
    let scale = (-m * s * LN_2).exp();
    let reg = if m * LN_2 > 40.0 {
        1.0
    } else {
        gamma_p(s, m.exp2())
    };
    scale * gamma_fn(1.0 + s) * reg
}

/// Same integral by adaptive quadrature, split where the integrand drops.
pub fn exp_integral_quadrature(m: f64, p: f64) -> f64 {
    let c = m.exp2();
    let u0 = (-m / p).exp2();
    let w = u0 / p;
    integrate(
        |u| (-c * u.powf(p)).exp(),
        0.0,
        1.0,
        &[u0 - 8.0 * w, u0, u0 + 8.0 * w],
        1e-10,
    )
}

/// `∫₀¹ (1 - u^p)^{2^m} du` by adaptive quadrature (moderate `m` only).
pub fn codebook_integral_quadrature(m: f64, p: f64) -> f64 {
    let big_m = m.exp2();
    let u0 = (-m / p).exp2();
    let w = u0 / p;
    integrate(
        |u| (big_m * (-u.powf(p)).ln_1p()).exp(),
        0.0,
        1.0,
        &[u0 - 8.0 * w, u0, u0 + 8.0 * w],
        1e-10,
    )
}

/// `F_XEB` reached by the codebook protocol with `m` bits (exp-inequality
/// form, itself an achievable value).
pub fn ub_eps(n: u32, m: f64) -> f64 {
    let p = 2f64.powi(n as i32) - 1.0;
    let integral = if m * LN_2 > 40.0 {
        exp_integral_closed(m, p)
    } else {
        exp_integral_quadrature(m, p)
    };
    ub_from_integral(n, integral)
}

/// The codebook protocol's exact `F_XEB`, integrating `(1 - u^p)^{2^m}`.
pub fn ub_eps_exact(n: u32, m: f64) -> f64 {
    let p = 2f64.powi(n as i32) - 1.0;
    ub_from_integral(n, codebook_integral_quadrature(m, p))
}

/// `H_{2^n} - 1`, the large-`m` limit of [`ub_eps`].
pub fn ub_asymptote(n: u32) -> f64 {
    harmonic_pow2(n) - 1.0
}

/// Smallest `m ≥ 1` with `ub_eps(n, m) ≥ target`.
pub fn ub_min_m(n: u32, target: f64) -> Result<u64> {
    let cap = ub_asymptote(n);
    if !(target > 0.0) || target >= cap {
        return Err(Error::OutOfRange {
            what: "target F_XEB",
            value: target,
            range: "(0, H_{2^n} - 1)",
        });
    }
    let reaches = |m: u64| ub_eps(n, m as f64) >= target;
    let mut hi = 1u64;
    while !reaches(hi) {
        if hi >= 1 << 62 {
            return Err(Error::Unreachable { target, max_m: hi });
        }
        hi *= 2;
    }
    Ok(bisect_first(1, hi, reaches))
}

/// Best-known noisy Hidden Matching lower bound in bits:
/// `ε (√(2^n) - 1)/2 - 1`.
pub fn hm_lb_bits(n: u32, eps: f64) -> f64 {
    eps * (2f64.powf(n as f64 / 2.0) - 1.0) / 2.0 - 1.0
}

/// One row of a bound sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub n: u32,
    pub ensemble: Ensemble,
    pub m: u64,
    pub eps_lb_opt: f64,
    pub a_star: f64,
    pub eps_ub: f64,
    pub hm_bits: f64,
}

pub const CSV_HEADER: &str = "n,ensemble,m,eps_lb_opt,a_star,eps_ub,hm_bits";

impl BoundRow {
    /// Row at a fixed message length. `hm_bits` is the Hidden Matching cost of
    /// reaching the same fidelity, capped at 1.
    pub fn at_m(n: u32, ensemble: Ensemble, m: u64) -> Result<Self> {
        let bounds = norm_bounds(ensemble, n)?;
        let (eps_lb_opt, a_star) = lb_eps_opt(m as f64, &bounds);
        Ok(Self {
            n,
            ensemble,
            m,
            eps_lb_opt,
            a_star,
            eps_ub: ub_eps(n, m as f64),
            hm_bits: hm_lb_bits(n, eps_lb_opt.min(1.0)),
        })
    }

    /// Row at the minimal `m` reaching `eps`; `hm_bits` is taken at `eps`.
    pub fn at_eps(n: u32, ensemble: Ensemble, eps: f64) -> Result<Self> {
        let m = lb_min_m(n, ensemble, eps)?;
        let mut row = Self::at_m(n, ensemble, m)?;
        row.hm_bits = hm_lb_bits(n, eps);
        Ok(row)
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            self.ensemble.name(),
            self.m,
            fmt_sig(self.eps_lb_opt, 10),
            fmt_sig(self.a_star, 10),
            fmt_sig(self.eps_ub, 10),
            fmt_sig(self.hm_bits, 10)
        )
    }
}

/// Minimal-`m` rows for each `(n, ensemble)` at fixed `eps`; unreachable
/// combinations are skipped.
pub fn sweep_eps(ns: &[u32], ensembles: &[Ensemble], eps: f64) -> Vec<BoundRow> {
    let mut rows = Vec::new();
    for &n in ns {
        for &e in ensembles {
            if let Ok(row) = BoundRow::at_eps(n, e, eps) {
                rows.push(row);
            }
        }
    }
    rows
}

/// Rows over a grid of message lengths.
pub fn sweep_m(ns: &[u32], ensembles: &[Ensemble], ms: &[u64]) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        for &e in ensembles {
            for &m in ms {
                rows.push(BoundRow::at_m(n, e, m)?);
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(mut w: W, rows: &[BoundRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv())?;
    }
    Ok(())
}

/// `printf("%.{digits}g")`-style formatting.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma(1.5).unwrap() - 0.561_045_161_882_344).abs() < 1e-12);
        assert!((gamma(2.0).unwrap() - 0.221_773_994_190_566).abs() < 1e-12);
        assert!(gamma(1.0001).unwrap() > 1e3 * gamma(2.0).unwrap());
        assert!(gamma(1.0).is_err());
        assert!(gamma(0.5).is_err());
    }

    #[test]
    fn clifford_bounds_n12() {
        let b = norm_bounds(Ensemble::Clifford, 12).unwrap();
        assert!((b.a - 2.2094e-2).abs() < 5e-7);
        assert!((b.b - 3.9452e-3).abs() < 5e-8);
        assert_eq!(b.t_opt, Some(5));
    }

    #[test]
    fn haar_and_product_bounds() {
        let h = norm_bounds(Ensemble::Haar, 12).unwrap();
        assert!((h.b - 2.171_656_2e-3).abs() < 1e-10, "{}", h.b);
        let p = norm_bounds(Ensemble::ProductClifford, 2).unwrap();
        assert!((p.a - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.b - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn norm_bound_ordering() {
        for n in 1..=20 {
            for e in [
                Ensemble::ProductClifford,
                Ensemble::Clifford,
                Ensemble::Design {
                    t_max: 10,
                    delta: 0.0,
                },
                Ensemble::Haar,
            ] {
                let b = norm_bounds(e, n).unwrap();
                assert!(0.0 < b.b && b.b <= 1.0 && b.a <= 1.0, "{e} n={n} {b:?}");
                if n >= 2 {
                    assert!(b.b <= b.a + 1e-15, "{e} n={n} {b:?}");
                }
            }
        }
    }

    #[test]
    fn design_prefers_highest_order_at_n12() {
        let b = norm_bounds(
            Ensemble::Design {
                t_max: 10,
                delta: 0.0,
            },
            12,
        )
        .unwrap();
        assert_eq!(b.t_opt, Some(10));
    }

    #[test]
    fn lb_spot_values() {
        let b = norm_bounds(Ensemble::Clifford, 12).unwrap();
        assert!(lb_eps(61.0, 1.53, &b).unwrap() < 0.360);
        assert!(lb_eps(77.0, 1.47, &b).unwrap() < 0.426);
        assert!(lb_eps(10.0, 1.0, &b).is_err());
    }

    #[test]
    fn lb_branches_meet() {
        for e in [
            Ensemble::Clifford,
            Ensemble::Haar,
            Ensemble::ProductClifford,
        ] {
            for n in [6u32, 9, 12] {
                let b = norm_bounds(e, n).unwrap();
                for a in [1.1, 1.5, 2.0, 5.0] {
                    let g = gamma(a).unwrap();
                    let m0 = g * b.a * b.a / (LN_2 * b.b * b.b);
                    let below = lb_eps(m0 * (1.0 - 1e-12), a, &b).unwrap();
                    let above = lb_eps(m0 * (1.0 + 1e-12), a, &b).unwrap();
                    assert!((below / above - 1.0).abs() < 1e-6, "{e} n={n} a={a}");
                }
            }
        }
    }

    #[test]
    fn lb_small_m_branch_is_finite_near_the_pole() {
        let b = norm_bounds(Ensemble::Haar, 12).unwrap();
        let v = lb_eps(50.0, 1.0 + 1e-6, &b).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn optimized_bound_dominates_fixed_a() {
        let b = norm_bounds(Ensemble::Clifford, 12).unwrap();
        for m in [1.0, 10.0, 61.0, 100.0, 400.0] {
            let (v, a) = lb_eps_opt(m, &b);
            assert!(v <= lb_eps(m, 1.5, &b).unwrap() + 1e-12);
            assert!(a > 1.0 && a <= A_MAX);
        }
    }

    #[test]
    fn headline_lower_bounds() {
        assert_eq!(lb_min_m(12, Ensemble::Clifford, 0.427).unwrap(), 78);
        assert_eq!(lb_min_m(12, Ensemble::Clifford, 0.362).unwrap(), 62);
    }

    #[test]
    fn unreachable_target() {
        assert!(matches!(
            lb_min_m(3, Ensemble::Clifford, 1e6),
            Err(Error::Unreachable { .. })
        ));
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for n in [4u32, 8] {
            let p = 2f64.powi(n as i32) - 1.0;
            for m in [10.0, 50.0] {
                let c = exp_integral_closed(m, p);
                let q = exp_integral_quadrature(m, p);
                assert!((c / q - 1.0).abs() < 1e-8, "n={n} m={m} {c} {q}");
            }
        }
    }

    #[test]
    fn upper_bound_values() {
        assert!(ub_eps(12, 330.0) > 0.428);
        assert!(ub_eps(12, 382.0) > 0.493);
        assert_eq!(ub_min_m(12, 0.427).unwrap(), 330);
        assert_eq!(ub_min_m(12, 0.493).unwrap(), 382);
        assert!(ub_min_m(12, 4095.0 / 4097.0).unwrap() <= 801);
        assert!(ub_min_m(12, 10.0).is_err());
    }

    #[test]
    fn upper_bound_asymptote() {
        let n = 8;
        let m = 20.0 * 255.0;
        assert!((ub_eps(n, m) / ub_asymptote(n) - 1.0).abs() < 0.01);
    }

    #[test]
    fn exact_codebook_value_dominates_exp_variant() {
        for m in [1.0, 4.0, 8.0, 20.0] {
            assert!(ub_eps_exact(3, m) >= ub_eps(3, m) - 1e-12);
        }
        // M = 1: the protocol is no better than guessing
        assert!(ub_eps_exact(3, 0.0).abs() < 1e-9);
    }

    #[test]
    fn hidden_matching() {
        assert!((hm_lb_bits(9, 1.0) - 9.813_708_498_984_76).abs() < 1e-12);
        assert!((hm_lb_bits(8, 1.0) - 6.5).abs() < 1e-12);
        assert_eq!(hm_lb_bits(8, 0.0), -1.0);
    }

    #[test]
    fn ensemble_parsing() {
        assert_eq!("clifford".parse::<Ensemble>().unwrap(), Ensemble::Clifford);
        assert_eq!(
            "design:10:0.5".parse::<Ensemble>().unwrap(),
            Ensemble::Design {
                t_max: 10,
                delta: 0.5
            }
        );
        assert!("unitary".parse::<Ensemble>().is_err());
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.4270000000001, 10), "0.427");
        assert_eq!(fmt_sig(1.0 / 3.0, 10), "0.3333333333");
        assert_eq!(fmt_sig(2.2094390007e-2, 10), "0.02209439001");
        assert_eq!(fmt_sig(12345678901.0, 10), "1.23456789e10");
        assert_eq!(fmt_sig(-1.0, 10), "-1");
        assert_eq!(fmt_sig(3.5e-7, 10), "3.5e-7");
    }

    #[test]
    fn csv_row() {
        let row = BoundRow::at_m(12, Ensemble::Clifford, 100).unwrap();
        let line = row.csv();
        assert!(line.starts_with("12,clifford,100,"));
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
    }

    proptest::proptest! {
        #[test]
        fn lb_monotone_in_m(n in 4u32..14, m in 1u64..500, a in 1.01f64..8.0) {
            let b = norm_bounds(Ensemble::Clifford, n).unwrap();
            let lo = lb_eps(m as f64, a, &b).unwrap();
            let hi = lb_eps(m as f64 + 1.0, a, &b).unwrap();
            proptest::prop_assert!(hi >= lo);
        }

        #[test]
        fn tail_bound_is_a_probability(t in 0.0f64..50.0, a in 1.01f64..8.0) {
            let p = tail_bound(t, a, 0.1, 0.01).unwrap();
            proptest::prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
