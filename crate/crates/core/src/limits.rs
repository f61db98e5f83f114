//! Limiting fractions of ignorants and uninterested individuals.
//!
//! For `0 < theta < 1` the limiting ignorant fraction is the unique root in
//! `(0, 1)` of
//!
//! ```text
//! f(x) = ((gamma + delta theta) x^theta - (gamma + delta) theta x - gamma (1 - theta)) / (theta (1 - theta))
//! ```
//!
//! and at `theta = 0` / `theta = 1` of the limits
//!
//! ```text
//! f0(x) = (gamma + delta)(1 - x) + gamma log x
//! f1(x) = -gamma (1 - x) - (gamma + delta) x log x
//! ```
//!
//! Each of these is negative near 0, vanishes at 1 and has a single interior
//! maximum, so the root is bracketed by a small `lo` and the maximiser.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambert::{lambert_w0, lambert_wm1};
use crate::model::ModelParams;

/// `theta` within this distance of 0 or 1 is treated as the boundary case.
pub const THETA_BOUNDARY_TOL: f64 = 1e-9;

/// Bisection stops once the bracket is narrower than this.
const BISECTION_WIDTH: f64 = 1e-8;
/// Newton target: `|f(x)| <= RESIDUAL_TOL * max(1, |f'(x)|)`.
pub const RESIDUAL_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "bisection-newton")]
    BisectionNewton,
    #[serde(rename = "lambert-w")]
    LambertW,
    #[serde(rename = "closed-half")]
    ClosedHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    pub x_inf: f64,
    pub u_inf: f64,
    pub method: Method,
    /// `|f(x_inf)|` for whichever of `f`, `f0`, `f1` applies.
    pub residual: f64,
    #[serde(skip)]
    pub iterations: usize,
}

/// Which of `f`, `f0` and `f1` defines the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Zero,
    Interior(f64),
    One,
}

impl Regime {
    pub fn of(p: &ModelParams) -> Regime {
        let theta = p.theta();
        if theta.abs() <= THETA_BOUNDARY_TOL {
            Regime::Zero
        } else if (theta - 1.0).abs() <= THETA_BOUNDARY_TOL {
            Regime::One
        } else {
            Regime::Interior(theta)
        }
    }
}

fn interior_theta(p: &ModelParams) -> Result<f64> {
    match Regime::of(p) {
        Regime::Interior(t) => Ok(t),
        _ => Err(Error::ThetaBoundary { theta: p.theta() }),
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { domain: "0 <= x <= 1", value: x })
    }
}

fn check_open_unit(x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { domain: "0 < x <= 1", value: x })
    }
}

/// `f` with the `theta` divisions folded into `expm1`, so the value stays
/// accurate as `theta` approaches 0 or 1.
fn f_raw(x: f64, gamma: f64, delta: f64, theta: f64) -> f64 {
    if x == 0.0 {
        return -gamma / theta;
    }
    let lx = x.ln();
    if theta <= 0.5 {
        // ((gamma + delta theta)(x^theta - 1)/theta + (gamma + delta)(1 - x)) / (1 - theta)
        let a = (gamma + delta * theta) * (theta * lx).exp_m1() / theta;
        (a + (gamma + delta) * (1.0 - x)) / (1.0 - theta)
    } else {
        // with eps = 1 - theta:
        // ((gamma + delta) x (x^-eps - 1)/eps + (gamma + delta) x - delta x^theta - gamma) / theta
        let eps = 1.0 - theta;
        let a = (gamma + delta) * x * (-eps * lx).exp_m1() / eps;
        (a + (gamma + delta) * x - delta * (theta * lx).exp() - gamma) / theta
    }
}

fn df_raw(x: f64, gamma: f64, delta: f64, theta: f64) -> f64 {
    // ((gamma + delta theta) x^(theta - 1) - (gamma + delta)) / (1 - theta)
    ((gamma + delta * theta) * ((theta - 1.0) * x.ln()).exp() - (gamma + delta)) / (1.0 - theta)
}

/// `f(x)` for `0 < theta < 1`.
pub fn f_eval(x: f64, p: &ModelParams) -> Result<f64> {
    let theta = interior_theta(p)?;
    check_unit(x)?;
    Ok(f_raw(x, p.gamma(), p.delta(), theta))
}

pub fn f_derivative(x: f64, p: &ModelParams) -> Result<f64> {
    let theta = interior_theta(p)?;
    check_open_unit(x)?;
    Ok(df_raw(x, p.gamma(), p.delta(), theta))
}

pub fn f0_eval(x: f64, p: &ModelParams) -> Result<f64> {
    check_open_unit(x)?;
    Ok(f0_raw(x, p.gamma(), p.delta()))
}

pub fn f1_eval(x: f64, p: &ModelParams) -> Result<f64> {
    check_open_unit(x)?;
    Ok(f1_raw(x, p.gamma(), p.delta()))
}

fn f0_raw(x: f64, gamma: f64, delta: f64) -> f64 {
    (gamma + delta) * (1.0 - x) + gamma * x.ln()
}

fn df0_raw(x: f64, gamma: f64, delta: f64) -> f64 {
    gamma / x - (gamma + delta)
}

fn f1_raw(x: f64, gamma: f64, delta: f64) -> f64 {
    -gamma * (1.0 - x) - (gamma + delta) * x * x.ln()
}

fn df1_raw(x: f64, gamma: f64, delta: f64) -> f64 {
    gamma - (gamma + delta) * (x.ln() + 1.0)
}

/// `f`, `f0` or `f1` according to `theta`. This is also the spreader
/// fraction along the fluid trajectory.
pub fn f_theta(x: f64, p: &ModelParams) -> f64 {
    let (g, d) = (p.gamma(), p.delta());
    match Regime::of(p) {
        Regime::Zero => {
            if x == 0.0 {
                f64::NEG_INFINITY
            } else {
                f0_raw(x, g, d)
            }
        }
        Regime::One => {
            if x == 0.0 {
                -g
            } else {
                f1_raw(x, g, d)
            }
        }
        Regime::Interior(t) => f_raw(x, g, d, t),
    }
}

/// Location of the maximum of `f` on `(0, 1)`:
/// `((gamma + delta theta) / (gamma + delta))^(1 / (1 - theta))`.
pub fn argmax_f(p: &ModelParams) -> Result<f64> {
    let theta = interior_theta(p)?;
    let (g, d) = (p.gamma(), p.delta());
    // log of the base is log1p(-delta (1 - theta) / (gamma + delta))
    let eps = 1.0 - theta;
    Ok(((-d * eps / (g + d)).ln_1p() / eps).exp())
}

/// Maximiser of `f0` (`gamma / (gamma + delta)`) or `f1`
/// (`exp(-delta / (gamma + delta))`); for interior `theta`, [`argmax_f`].
pub fn argmax_f_theta(p: &ModelParams) -> f64 {
    let (g, d) = (p.gamma(), p.delta());
    match Regime::of(p) {
        Regime::Zero => g / (g + d),
        Regime::One => (-d / (g + d)).exp(),
        Regime::Interior(_) => argmax_f(p).expect("interior theta"),
    }
}

pub fn u_infinity(delta: f64, x_inf: f64) -> f64 {
    (1.0 - delta) * (1.0 - x_inf)
}

struct Root {
    x: f64,
    residual: f64,
    iterations: usize,
}

/// Bisection down to [`BISECTION_WIDTH`], then safeguarded Newton.
/// Requires `g(lo) < 0 < g(hi)`.
fn bisect_newton(g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Root {
    let mut iterations = 0;
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut gx = g(x);
    for _ in 0..MAX_NEWTON {
        iterations += 1;
        if gx == 0.0 {
            break;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dg(x);
        let mut next = x - gx / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        gx = g(x);
        if step <= 2.0 * f64::EPSILON * x.abs() || hi - lo <= 2.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    Root { x, residual: gx.abs(), iterations }
}

/// Finds `lo` with `g(lo) < 0`: start at 1e-6 and halve, then shrink faster
/// for models whose root sits extremely close to 0.
fn lower_bracket(g: &impl Fn(f64) -> f64) -> Option<f64> {
    let mut lo = 1e-6;
    for _ in 0..60 {
        if g(lo) < 0.0 {
            return Some(lo);
        }
        lo *= 0.5;
    }
    while lo > f64::MIN_POSITIVE {
        lo *= 2f64.powi(-32);
        if g(lo) < 0.0 {
            return Some(lo);
        }
    }
    None
}

/// The limiting ignorant fraction and the matching uninterested fraction.
pub fn solve_x_infinity(p: &ModelParams) -> Result<LimitResult> {
    let (gamma, delta) = (p.gamma(), p.delta());
    let regime = Regime::of(p);
    let hi = argmax_f_theta(p);
    let root = match regime {
        Regime::Zero => solve_on(|x| f0_raw(x, gamma, delta), |x| df0_raw(x, gamma, delta), hi, p)?,
        Regime::One => solve_on(|x| f1_raw(x, gamma, delta), |x| df1_raw(x, gamma, delta), hi, p)?,
        Regime::Interior(t) => solve_on(|x| f_raw(x, gamma, delta, t), |x| df_raw(x, gamma, delta, t), hi, p)?,
    };
    Ok(LimitResult {
        x_inf: root.x,
        u_inf: u_infinity(delta, root.x),
        method: Method::BisectionNewton,
        residual: root.residual,
        iterations: root.iterations,
    })
}

fn solve_on(g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64, hi: f64, p: &ModelParams) -> Result<Root> {
    let no_bracket = || Error::NoBracket { theta: p.theta() };
    if !(g(hi) > 0.0) {
        return Err(no_bracket());
    }
    let lo = lower_bracket(&g).ok_or_else(no_bracket)?;
    Ok(bisect_newton(g, dg, lo, hi))
}

/// Closed forms: `theta = 0` and `theta = 1` through the Lambert W branches
/// with `h = 1 + delta / gamma`, and `(gamma / (gamma + delta))^2` at
/// `theta = 1/2`.
pub fn x_infinity_closed_form(p: &ModelParams) -> Result<LimitResult> {
    let (gamma, delta) = (p.gamma(), p.delta());
    let h = 1.0 + delta / gamma;
    let (x, method, residual) = match Regime::of(p) {
        Regime::Zero => {
            let x = -lambert_w0(-h * (-h).exp())? / h;
            (x, Method::LambertW, f0_raw(x, gamma, delta).abs())
        }
        Regime::One => {
            let x = -1.0 / (h * lambert_wm1(-(-1.0 / h).exp() / h)?);
            (x, Method::LambertW, f1_raw(x, gamma, delta).abs())
        }
        Regime::Interior(t) if (t - 0.5).abs() <= THETA_BOUNDARY_TOL => {
            let r = gamma / (gamma + delta);
            let x = r * r;
            (x, Method::ClosedHalf, f_raw(x, gamma, delta, t).abs())
        }
        Regime::Interior(t) => {
            return Err(Error::NotApplicable(format!("no closed form for theta = {t}; only theta in {{0, 1/2, 1}}")))
        }
    };
    Ok(LimitResult { x_inf: x, u_inf: u_infinity(delta, x), method, residual, iterations: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;
    use proptest::prelude::*;

    fn params(gamma: f64, theta1: f64, theta2: f64, delta: f64) -> ModelParams {
        ModelParams::new_snapped(1.0, gamma, theta1, theta2, delta).unwrap()
    }

    /// The textbook form of `f`, for comparison with the rearranged one.
    fn f_naive(x: f64, g: f64, d: f64, t: f64) -> f64 {
        ((g + d * t) * x.powf(t) - (g + d) * t * x - g * (1.0 - t)) / (t * (1.0 - t))
    }

    fn residual_ok(r: &LimitResult, p: &ModelParams) -> bool {
        let (g, d) = (p.gamma(), p.delta());
        let slope = match Regime::of(p) {
            Regime::Zero => df0_raw(r.x_inf, g, d),
            Regime::One => df1_raw(r.x_inf, g, d),
            Regime::Interior(t) => df_raw(r.x_inf, g, d, t),
        };
        r.residual <= RESIDUAL_TOL * slope.abs().max(1.0)
    }

    #[test]
    fn f_endpoints() {
        let p = params(1.3, 1.0, 0.6, 0.4);
        assert!(f_eval(1.0, &p).unwrap().abs() < 1e-15);
        let theta = p.theta();
        assert!((f_eval(0.0, &p).unwrap() + 1.3 / theta).abs() < 1e-12);
        let half = params(1.0, 1.5, 0.0, 1.0);
        assert!(f_eval(0.25, &half).unwrap().abs() < 1e-15);
    }

    #[test]
    fn f_rearrangement_matches_definition() {
        for &t in &[0.05, 0.3, 0.5, 0.7, 0.95] {
            for &x in &[0.01, 0.2, 0.5, 0.9] {
                let (g, d) = (0.8, 0.6);
                let a = f_raw(x, g, d, t);
                let b = f_naive(x, g, d, t);
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "t={t} x={x} {a} {b}");
            }
        }
    }

    #[test]
    fn f_rejects_boundary_theta() {
        let mt = Preset::Mt.params().unwrap();
        assert!(matches!(f_eval(0.5, &mt), Err(Error::ThetaBoundary { .. })));
        assert!(matches!(argmax_f(&Preset::Hayes.params().unwrap()), Err(Error::ThetaBoundary { .. })));
    }

    #[test]
    fn f0_f1_values() {
        let p = Preset::Mt.params().unwrap();
        assert_eq!(f0_eval(1.0, &p).unwrap(), 0.0);
        assert_eq!(f1_eval(1.0, &p).unwrap(), 0.0);
        assert!(f0_eval(0.203_188, &p).unwrap().abs() < 5e-6);
        assert!(f1_eval(0.284_668, &p).unwrap().abs() < 5e-6);
        assert!(f0_eval(0.0, &p).is_err());
        assert!(f1_eval(-0.1, &p).is_err());
    }

    #[test]
    fn argmax_values() {
        let p = params(1.0, 1.5, 0.0, 1.0);
        assert!((argmax_f(&p).unwrap() - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn boundary_maximisers_are_critical_points() {
        let p = params(0.7, 0.7, 0.0, 0.4);
        let x0 = argmax_f_theta(&p);
        assert!(df0_raw(x0, 0.7, 0.4).abs() < 1e-14);
        let p = params(0.7, 1.7, 0.0, 0.4);
        let x1 = argmax_f_theta(&p);
        assert!(df1_raw(x1, 0.7, 0.4).abs() < 1e-14);
        assert!(f1_raw(x1, 0.7, 0.4) > 0.0);
    }

    #[test]
    fn interior_argmax_tends_to_boundary_maximisers() {
        let (g, d) = (0.7, 0.4);
        let near0 = argmax_f(&params(g, g + 1e-8, 0.0, d)).unwrap();
        assert!((near0 - g / (g + d)).abs() < 1e-7);
        let near1 = argmax_f(&params(g, g + 1.0 - 1e-8, 0.0, d)).unwrap();
        assert!((near1 - (-d / (g + d)).exp()).abs() < 1e-7);
    }

    #[test]
    fn printed_limits() {
        let mt = solve_x_infinity(&Preset::Rho { rho: 0.3 }.params().unwrap()).unwrap();
        assert!((mt.x_inf - 0.203_188).abs() < 1e-6);
        assert_eq!(mt.u_inf, 0.0);
        let hayes = solve_x_infinity(&Preset::Hayes.params().unwrap()).unwrap();
        assert!((hayes.x_inf - 0.284_668).abs() < 1e-6);
        let half = solve_x_infinity(&params(1.0, 1.5, 0.0, 1.0)).unwrap();
        assert!((half.x_inf - 0.25).abs() < 1e-13);
    }

    #[test]
    fn closed_forms() {
        let p = Preset::Mt.params().unwrap();
        let c = x_infinity_closed_form(&p).unwrap();
        assert_eq!(c.method, Method::LambertW);
        assert!((c.x_inf - 0.203_188).abs() < 1e-6);

        let (q, alpha) = (0.4, 0.7);
        let p = Preset::ApqMt { alpha, p: 1.0, q }.params().unwrap();
        let h = 1.0 + q / alpha;
        let expected = -lambert_w0(-h * (-h).exp()).unwrap() / h;
        assert_eq!(x_infinity_closed_form(&p).unwrap().x_inf, expected);

        let half = x_infinity_closed_form(&params(1.0, 1.5, 0.0, 1.0)).unwrap();
        assert_eq!((half.x_inf, half.method), (0.25, Method::ClosedHalf));

        assert!(matches!(x_infinity_closed_form(&params(1.0, 1.3, 0.0, 1.0)), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn u_infinity_values() {
        assert_eq!(u_infinity(1.0, 0.37), 0.0);
        assert_eq!(u_infinity(0.5, 0.5), 0.25);
        let q = 0.3;
        let p = Preset::ApqDk { alpha: 1.0, p: 1.0, q }.params().unwrap();
        let r = solve_x_infinity(&p).unwrap();
        assert_eq!(r.u_inf, (1.0 - q) * (1.0 - r.x_inf));
    }

    #[test]
    fn continuity_across_theta() {
        let (g, d) = (0.9, 0.6);
        let zero = x_infinity_closed_form(&params(g, g, 0.0, d)).unwrap().x_inf;
        let one = x_infinity_closed_form(&params(g, g + 1.0, 0.0, d)).unwrap().x_inf;
        let half = x_infinity_closed_form(&params(g, g + 0.5, 0.0, d)).unwrap().x_inf;
        for eps in [1e-9, 1e-8, 1e-7] {
            let near0 = solve_x_infinity(&params(g, g + eps, 0.0, d)).unwrap().x_inf;
            assert!((near0 - zero).abs() <= 1e-6, "eps={eps}");
            let near1 = solve_x_infinity(&params(g, g + 1.0 - eps, 0.0, d)).unwrap().x_inf;
            assert!((near1 - one).abs() <= 1e-6, "eps={eps}");
            let near_half = solve_x_infinity(&params(g, g + 0.5 + eps, 0.0, d)).unwrap().x_inf;
            assert!((near_half - half).abs() <= 1e-6, "eps={eps}");
        }
    }

    #[test]
    fn extreme_ratio_still_brackets() {
        // delta / gamma = 100 puts the root near e^-101
        let p = params(0.01, 0.01, 0.0, 1.0);
        let r = solve_x_infinity(&p).unwrap();
        let c = x_infinity_closed_form(&p).unwrap();
        assert!(r.x_inf > 0.0 && r.x_inf < 1e-40);
        assert!((r.x_inf - c.x_inf).abs() <= 1e-9 * c.x_inf);
    }

    /// theta -> (gamma / (gamma + delta theta))^(1/theta) is increasing.
    #[test]
    fn stifling_bound_is_increasing_in_theta() {
        for &(g, d) in &[(1.0, 1.0), (0.2, 1.0), (3.0, 0.1), (0.5, 0.5)] {
            let vals: Vec<f64> =
                (1..200).map(|i| i as f64 / 200.0).map(|t: f64| (g / (g + d * t)).powf(1.0 / t)).collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]), "g={g} d={d}");
        }
    }

    fn arb_params() -> impl Strategy<Value = ModelParams> {
        (0.05f64..3.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.01f64..=1.0, 0.1f64..5.0).prop_filter_map(
            "valid",
            |(gamma, theta, split, delta, lambda)| {
                let total = gamma + theta;
                ModelParams::new(lambda, gamma, split * total, (1.0 - split) * total, delta).ok()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn root_is_bracketed_and_converged(p in arb_params()) {
            if let Regime::Interior(t) = Regime::of(&p) {
                let top = argmax_f(&p).unwrap();
                prop_assert!(top > 0.0 && top < 1.0);
                prop_assert!(f_raw(top, p.gamma(), p.delta(), t) > 0.0);
                prop_assert!(f_raw(1e-6f64.min(top / 2.0), p.gamma(), p.delta(), t) < 0.0
                    || f_raw(1e-300, p.gamma(), p.delta(), t) < 0.0);
            }
            let r = solve_x_infinity(&p).unwrap();
            prop_assert!(residual_ok(&r, &p), "residual {} for {:?}", r.residual, p);
            prop_assert!(r.x_inf > 0.0);
            prop_assert!(r.x_inf < p.gamma() / (p.gamma() + p.delta()));
            prop_assert_eq!(r.u_inf, (1.0 - p.delta()) * (1.0 - r.x_inf));
        }

        #[test]
        fn independent_of_lambda(p in arb_params(), c in 0.01f64..100.0) {
            let a = solve_x_infinity(&p).unwrap();
            let b = solve_x_infinity(&p.with_lambda(p.lambda() * c).unwrap()).unwrap();
            prop_assert_eq!(a.x_inf.to_bits(), b.x_inf.to_bits());
        }

        #[test]
        fn closed_forms_agree_with_root_finding(gamma in 0.05f64..3.0, delta in 0.01f64..=1.0, which in 0usize..3) {
            let theta = [0.0, 0.5, 1.0][which];
            let p = ModelParams::new_snapped(1.0, gamma, gamma + theta, 0.0, delta).unwrap();
            let a = solve_x_infinity(&p).unwrap();
            let b = x_infinity_closed_form(&p).unwrap();
            prop_assert!((a.x_inf - b.x_inf).abs() <= 1e-10, "{} vs {}", a.x_inf, b.x_inf);
        }
    }
}
