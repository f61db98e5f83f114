//! Gaussian fluctuations of the final fractions.
//!
//! `sqrt(N) (X/N - x_inf, U/N - u_inf)` is asymptotically bivariate normal
//! with covariance [`CovMatrix2`]. The matrix comes from the 3×3 covariance
//! `Λ` of the limiting Gaussian process in `(x, u, y)` coordinates at the
//! fluid absorption time, followed by the linear map
//! `(gx - A gy, gu + A (1 - delta) gy)`.
//!
//! `Λ` has a closed form ([`lambda_matrix`]); [`numerical_lambda_via_ode`]
//! recomputes it by integrating the Lyapunov equation
//! `dΛ/dt = J Λ + Λ Jᵀ + G(v(t))` along the fluid trajectory, which is the
//! independent check on the constants `C` and `D`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambert::{lambert_w0, lambert_wm1};
use crate::limits::{f_theta, solve_x_infinity, LimitResult};
use crate::model::{ModelParams, Preset};
use crate::ode::{integrate, Tolerance};

/// `|theta - 1/2|` at or below which `D` uses its dedicated `theta = 1/2` form.
pub const HALF_SWITCH: f64 = 1e-7;
/// Above [`HALF_SWITCH`] but below this, the general `D` loses digits to
/// cancellation in `2 theta - 1`.
pub const HALF_WARN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltConstants {
    pub kappa: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

/// Symmetric 2×2 covariance of the scaled (ignorant, uninterested) fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovMatrix2 {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl CovMatrix2 {
    pub fn to_array(&self) -> [[f64; 2]; 2] {
        [[self.s11, self.s12], [self.s12, self.s22]]
    }

    pub fn max_abs_diff(&self, other: &CovMatrix2) -> f64 {
        (self.s11 - other.s11).abs().max((self.s12 - other.s12).abs()).max((self.s22 - other.s22).abs())
    }

    pub fn determinant(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }
}

/// Symmetric 3×3 covariance in `(x, u, y)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaMatrix(pub [[f64; 3]; 3]);

impl LambdaMatrix {
    pub fn max_abs_diff(&self, other: &LambdaMatrix) -> f64 {
        let mut m = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidPoint {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub y: f64,
}

pub fn clt_constants(p: &ModelParams, lim: &LimitResult) -> CltConstants {
    let (g, d, th) = (p.gamma(), p.delta(), p.theta());
    let x = lim.x_inf;
    let kappa = 3.0 * p.theta1() + 2.0 * p.theta2() - 4.0 * g;
    let a = x / (g - (g + d) * x);
    let b = g * d * lim.u_inf / (g + d * th);
    let c = (g + d).powi(2) * (4.0 * d * th * th - kappa * (g + 2.0 * d * th)) * x
        + kappa * g * (g + d) * (g + d * (2.0 * th - 1.0))
        - 4.0 * d * g * g * (1.0 - th).powi(2);
    let off_half = (th - 0.5).abs();
    let dd = if off_half <= HALF_SWITCH {
        let log_ratio = (g / (g + d)).ln();
        2.0 * g * (kappa * d * (2.0 * g + d) - 2.0 * g * (d - kappa * (g + d)) * log_ratio) / (g + d).powi(2)
    } else {
        if off_half < HALF_WARN {
            log::warn!("theta = {th} is close to 1/2; D loses accuracy to cancellation");
        }
        c * (1.0 - x) / (2.0 * (2.0 * th - 1.0) * (g + d * th).powi(2))
    };
    CltConstants { kappa, a, b, c, d: dd }
}

pub fn sigma_matrix(consts: &CltConstants, p: &ModelParams, lim: &LimitResult) -> CovMatrix2 {
    let x = lim.x_inf;
    let q = 1.0 - p.delta();
    let ab = consts.a * consts.b;
    let s11 = x * (1.0 - x) + consts.a * consts.a * consts.d;
    let s12 = ab - q * s11;
    let s22 = q * q * s11 + q * (p.delta() * (1.0 - x) - 2.0 * ab);
    CovMatrix2 { s11, s12, s22 }
}

pub fn lambda_matrix(p: &ModelParams, lim: &LimitResult, consts: &CltConstants) -> LambdaMatrix {
    let x = lim.x_inf;
    let q = 1.0 - p.delta();
    let xu = -q * (1.0 - x) * x;
    let uu = q * (1.0 - x) * (q * x + p.delta());
    LambdaMatrix([[x * (1.0 - x), xu, 0.0], [xu, uu, -consts.b], [0.0, -consts.b, consts.d]])
}

/// `M Λ Mᵀ` with `M = [[1, 0, -a], [0, 1, a (1 - delta)]]`.
pub fn sigma_from_lambda(lam: &LambdaMatrix, a: f64, delta: f64) -> CovMatrix2 {
    let m = [[1.0, 0.0, -a], [0.0, 1.0, a * (1.0 - delta)]];
    let l = &lam.0;
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, o) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..3 {
                for n in 0..3 {
                    acc += m[i][k] * l[k][n] * m[j][n];
                }
            }
            *o = acc;
        }
    }
    CovMatrix2 { s11: out[0][0], s12: out[0][1], s22: out[1][1] }
}

/// Fluid limit of the time-changed chain: `x = e^{-lambda t}`,
/// `u = (1 - delta)(1 - x)`, `y = f_theta(x)`.
pub fn fluid_trajectory(t_grid: &[f64], p: &ModelParams) -> Result<Vec<FluidPoint>> {
    t_grid
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(Error::InvalidArgument(format!("time {t} must be >= 0")));
            }
            Ok(fluid_point(t, p))
        })
        .collect()
}

fn fluid_point(t: f64, p: &ModelParams) -> FluidPoint {
    let x = (-p.lambda() * t).exp();
    FluidPoint { t, x, u: (1.0 - p.delta()) * (1.0 - x), y: f_theta(x, p) }
}

/// Time at which the fluid spreader fraction returns to zero.
pub fn t_infinity(p: &ModelParams, lim: &LimitResult) -> f64 {
    -lim.x_inf.ln() / p.lambda()
}

const SYM: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Integrates `dΛ/dt = J Λ + Λ Jᵀ + G(v(t))`, `Λ(0) = 0`, up to the fluid
/// absorption time.
pub fn numerical_lambda_via_ode(p: &ModelParams, lim: &LimitResult) -> Result<LambdaMatrix> {
    numerical_lambda_with(p, lim, Tolerance::default())
}

pub fn numerical_lambda_with(p: &ModelParams, lim: &LimitResult, tol: Tolerance) -> Result<LambdaMatrix> {
    let (lam, g, d, th) = (p.lambda(), p.gamma(), p.delta(), p.theta());
    let kappa = 3.0 * p.theta1() + 2.0 * p.theta2() - 4.0 * g;
    let jac = [[-lam, 0.0, 0.0], [lam * (1.0 - d), 0.0, 0.0], [lam * (g + d), 0.0, -lam * th]];
    let t_end = t_infinity(p, lim);

    let rhs = |t: f64, s: &[f64; 6]| -> [f64; 6] {
        let v = fluid_point(t, p);
        let (x, y) = (v.x, v.y.max(0.0));
        let gm = [
            [lam * x, -lam * (1.0 - d) * x, -lam * d * x],
            [-lam * (1.0 - d) * x, lam * (1.0 - d) * x, 0.0],
            [-lam * d * x, 0.0, lam * (d - g) * x + lam * (kappa - th + 2.0 * g) * y + lam * g],
        ];
        let l = unpack(s);
        let mut out = [0.0; 6];
        for (o, &(i, j)) in out.iter_mut().zip(SYM.iter()) {
            let mut acc = gm[i][j];
            for k in 0..3 {
                acc += jac[i][k] * l[k][j] + l[i][k] * jac[j][k];
            }
            *o = acc;
        }
        out
    };
    let (s, _) = integrate(rhs, 0.0, [0.0; 6], t_end, tol)?;
    Ok(LambdaMatrix(unpack(&s)))
}

fn unpack(s: &[f64; 6]) -> [[f64; 3]; 3] {
    let mut l = [[0.0; 3]; 3];
    for (&v, &(i, j)) in s.iter().zip(SYM.iter()) {
        l[i][j] = v;
        l[j][i] = v;
    }
    l
}

/// Models with a dedicated closed-form covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum SpecialCase {
    /// `(1, 1, q)`-DK: full 2×2 matrix.
    DkQ { q: f64 },
    /// `(1, 1, q)`-MT: full 2×2 matrix.
    MtQ { q: f64 },
    /// `(alpha, 1, 1)`-DK: scalar variance.
    DkAlpha { alpha: f64 },
    /// `(alpha, 1, 1)`-MT: scalar variance.
    MtAlpha { alpha: f64 },
    /// Rho family: scalar variance.
    Rho { rho: f64 },
    /// Hayes' model: scalar variance.
    Hayes,
}

impl SpecialCase {
    pub fn preset(&self) -> Preset {
        match *self {
            SpecialCase::DkQ { q } => Preset::ApqDk { alpha: 1.0, p: 1.0, q },
            SpecialCase::MtQ { q } => Preset::ApqMt { alpha: 1.0, p: 1.0, q },
            SpecialCase::DkAlpha { alpha } => Preset::ApqDk { alpha, p: 1.0, q: 1.0 },
            SpecialCase::MtAlpha { alpha } => Preset::ApqMt { alpha, p: 1.0, q: 1.0 },
            SpecialCase::Rho { rho } => Preset::Rho { rho },
            SpecialCase::Hayes => Preset::Hayes,
        }
    }

    /// Matches a preset to its special case, if it has one.
    pub fn from_preset(preset: &Preset) -> Option<SpecialCase> {
        match *preset {
            Preset::Dk => Some(SpecialCase::Rho { rho: 1.0 }),
            Preset::Mt => Some(SpecialCase::Rho { rho: 0.0 }),
            Preset::Rho { rho } => Some(SpecialCase::Rho { rho }),
            Preset::Hayes => Some(SpecialCase::Hayes),
            Preset::ApqDk { alpha, p, q } if alpha == 1.0 && p == 1.0 => Some(SpecialCase::DkQ { q }),
            Preset::ApqDk { alpha, p, q } if p == 1.0 && q == 1.0 => Some(SpecialCase::DkAlpha { alpha }),
            Preset::ApqMt { alpha, p, q } if alpha == 1.0 && p == 1.0 => Some(SpecialCase::MtQ { q }),
            Preset::ApqMt { alpha, p, q } if p == 1.0 && q == 1.0 => Some(SpecialCase::MtAlpha { alpha }),
            _ => None,
        }
    }
}

/// `-W0(-h e^{-h}) / h`: limiting ignorant fraction at `theta = 0`.
fn x_theta0(h: f64) -> Result<f64> {
    Ok(-lambert_w0(-h * (-h).exp())? / h)
}

/// Specialised covariance formulas, evaluated without going through the
/// general constants.
pub fn sigma_closed_forms(case: &SpecialCase) -> Result<CovMatrix2> {
    let scalar = |v: f64| CovMatrix2 { s11: v, s12: 0.0, s22: 0.0 };
    match *case {
        SpecialCase::DkQ { q } => {
            check_unit_open("q", q)?;
            let x = x_theta0(1.0 + q)?;
            let u = (1.0 - q) * (1.0 - x);
            let den = 2.0 * (1.0 - (1.0 + q) * x).powi(2);
            let q1 = (1.0 + q).powi(2);
            Ok(CovMatrix2 {
                s11: x * (1.0 - x) * (2.0 - (3.0 + q * q) * x + q1 * x * x) / den,
                s12: x * u * (-2.0 * (1.0 - q) + (1.0 - q) * (3.0 + q) * x - q1 * x * x) / den,
                s22: u
                    * (2.0 * q
                        + 2.0 * (1.0 - 5.0 * q) * x
                        + (-3.0 + 9.0 * q + 3.0 * q * q - q * q * q) * x * x
                        + (1.0 - q) * q1 * x * x * x)
                    / den,
            })
        }
        SpecialCase::MtQ { q } => {
            check_unit_open("q", q)?;
            let x = x_theta0(1.0 + q)?;
            let u = (1.0 - q) * (1.0 - x);
            let den = (1.0 - (1.0 + q) * x).powi(2);
            Ok(CovMatrix2 {
                s11: x * (1.0 - x) * (1.0 - (1.0 + q * q) * x) / den,
                s12: -x * u * u / den,
                s22: u * (q + (1.0 - 5.0 * q) * x + (-1.0 + 4.0 * q + q * q) * x * x) / den,
            })
        }
        SpecialCase::DkAlpha { alpha: a } => {
            check_unit_open("alpha", a)?;
            let x = x_theta0(1.0 + 1.0 / a)?;
            let a1 = (1.0 + a).powi(2);
            let num = 2.0 * a * a + (2.0 * (1.0 - a) - a * a1) * x + a * a1 * x * x;
            Ok(scalar(x * (1.0 - x) * num / (2.0 * (a - (1.0 + a) * x).powi(2))))
        }
        SpecialCase::MtAlpha { alpha: a } => {
            check_unit_open("alpha", a)?;
            let x = x_theta0(1.0 + 1.0 / a)?;
            let num = a * a - (a * a + 2.0 * a - 1.0) * x;
            Ok(scalar(x * (1.0 - x) * num / (a - (1.0 + a) * x).powi(2)))
        }
        SpecialCase::Rho { rho } => {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::ConstraintViolation { constraint: "0 <= rho <= 1", value: rho });
            }
            let x = x_theta0(2.0)?;
            Ok(scalar(x * (1.0 - x) * (1.0 - 2.0 * x + 2.0 * rho * x * x) / (1.0 - 2.0 * x).powi(2)))
        }
        SpecialCase::Hayes => {
            let x = -1.0 / (2.0 * lambert_wm1(-(-0.5f64).exp() / 2.0)?);
            Ok(scalar(x * (1.0 - x) * (1.0 - 3.0 * x + 3.0 * x * x) / (1.0 - 2.0 * x).powi(2)))
        }
    }
}

fn check_unit_open(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::NotApplicable(format!("{name} = {v} outside (0, 1]")))
    }
}

/// Everything the `clt` command reports for one model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CltReport {
    pub kappa: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub sigma: [[f64; 2]; 2],
    pub t_inf: f64,
    /// Scalar variance, present when `delta = 1` and the second coordinate is degenerate.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v_inf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<LambdaMatrix>,
    /// Largest entry-wise gap between the closed-form and integrated `Λ`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ode_max_deviation: Option<f64>,
}

/// Bundles limits, constants and covariance for `p`.
#[derive(Debug, Clone, Copy)]
pub struct CltAnalysis {
    pub limit: LimitResult,
    pub constants: CltConstants,
    pub sigma: CovMatrix2,
    pub lambda: LambdaMatrix,
    pub t_inf: f64,
}

impl CltAnalysis {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let limit = solve_x_infinity(p)?;
        let constants = clt_constants(p, &limit);
        Ok(CltAnalysis {
            limit,
            constants,
            sigma: sigma_matrix(&constants, p, &limit),
            lambda: lambda_matrix(p, &limit, &constants),
            t_inf: t_infinity(p, &limit),
        })
    }

    pub fn report(&self, p: &ModelParams, cross_check: bool) -> Result<CltReport> {
        let c = &self.constants;
        let ode_max_deviation = if cross_check {
            let numeric = numerical_lambda_via_ode(p, &self.limit)?;
            Some(numeric.max_abs_diff(&self.lambda))
        } else {
            None
        };
        Ok(CltReport {
            kappa: c.kappa,
            a: c.a,
            b: c.b,
            c: c.c,
            d: c.d,
            sigma: self.sigma.to_array(),
            t_inf: self.t_inf,
            v_inf: (p.delta() == 1.0).then_some(self.sigma.s11),
            lambda: cross_check.then_some(self.lambda),
            ode_max_deviation,
        })
    }
}
