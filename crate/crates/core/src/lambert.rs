//! Real branches of the Lambert W function, the inverse of `w -> w e^w`.
//!
//! Both branches meet at the branch point `z = -1/e`, `w = -1`. The principal
//! branch `W0` covers `z >= -1/e` with `w >= -1`; the lower branch `W-1`
//! covers `-1/e <= z < 0` with `w <= -1`.
//!
//! Evaluation is Halley iteration from a branch-specific starting point:
//! the square-root expansion around the branch point when `z` is close to
//! `-1/e`, and the asymptotic `L1 - L2 + L2/L1` form elsewhere.

use crate::error::{Error, Result};

/// `e` split into a double and its rounding error, so that `e z + 1` can be
/// formed without cancellation near the branch point.
const E_HI: f64 = std::f64::consts::E;
const E_LO: f64 = 1.445_646_891_729_250_2e-16;

/// The branch point `-1/e` rounded to the nearest double.
pub const BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

const MAX_ITER: usize = 32;

/// `e z + 1`, accurate near `z = -1/e`.
fn branch_distance(z: f64) -> f64 {
    E_HI.mul_add(z, 1.0) + E_LO * z
}

/// Series `W = -1 + p - p^2/3 + 11 p^3 / 72 - 43 p^4 / 540` with `p = ±sqrt(2 (e z + 1))`.
fn branch_series(p: f64) -> f64 {
    -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))))
}

fn halley(z: f64, mut w: f64) -> f64 {
    let mut best = w;
    let mut best_res = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let r = w * ew - z;
        let res = r.abs();
        if res < best_res {
            best_res = res;
            best = w;
        }
        if r == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * r / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = r / denom;
        let next = w - step;
        if !next.is_finite() || step.abs() <= 1e-16 * w.abs() {
            break;
        }
        w = next;
    }
    best
}

fn check_branch_point(z: f64) -> Result<Option<f64>> {
    if z.is_nan() {
        return Err(Error::Domain { domain: "z >= -1/e", value: z });
    }
    let d = branch_distance(z);
    if d < -4.0 * f64::EPSILON {
        return Err(Error::Domain { domain: "z >= -1/e", value: z });
    }
    if d <= 0.0 {
        return Ok(Some(-1.0));
    }
    Ok(None)
}

/// Principal branch `W0(z)` for `z >= -1/e`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if let Some(w) = check_branch_point(z)? {
        return Ok(w);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let guess = if z < -0.3 {
        branch_series((2.0 * branch_distance(z)).sqrt())
    } else if z < 3.0 {
        // Pade-like start, good on (-0.3, 3)
        z.ln_1p() * (1.0 - z.ln_1p() / (2.0 + z.ln_1p()))
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    Ok(halley(z, guess))
}

/// Lower branch `W-1(z)` for `-1/e <= z < 0`.
pub fn lambert_wm1(z: f64) -> Result<f64> {
    if let Some(w) = check_branch_point(z)? {
        return Ok(w);
    }
    if !(z < 0.0) {
        return Err(Error::Domain { domain: "-1/e <= z < 0", value: z });
    }
    let guess = if z < -0.25 {
        branch_series(-(2.0 * branch_distance(z)).sqrt())
    } else {
        let l1 = (-z).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    Ok(halley(z, guess))
}
