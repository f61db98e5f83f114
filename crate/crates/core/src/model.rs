//! Model parameters, population states and transition rates.
//!
//! The population has `N + 1` individuals split into ignorants (`X`),
//! uninterested (`U`), spreaders (`Y`) and stiflers (`Z`). From a state with
//! `Y > 0` the chain moves by one of four transitions:
//!
//! | transition        | change in (X, U, Y) | rate                                  |
//! |-------------------|---------------------|---------------------------------------|
//! | spread            | (-1, 0, +1)         | λ δ X Y                               |
//! | uninterested      | (-1, +1, 0)         | λ (1 - δ) X Y                         |
//! | both stifle       | (0, 0, -2)          | λ θ₁ Y (Y - 1) / 2                    |
//! | one stifles       | (0, 0, -1)          | λ θ₂ Y (Y - 1) + λ γ Y (N + 1 - X - Y) |
//!
//! The quantity `N + 1 - X - Y` in the last row is `U + Z`: a spreader that
//! meets an uninterested individual or a stifler stops spreading.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from the boundary of `[0, 1]` within which a preset's derived
/// `theta` is snapped onto the boundary.
pub const PRESET_SNAP_TOLERANCE: f64 = 1e-12;

/// The five rate parameters of the general model, with the derived
/// `theta = theta1 + theta2 - gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    lambda: f64,
    gamma: f64,
    theta1: f64,
    theta2: f64,
    delta: f64,
    theta: f64,
}

/// Flat, unvalidated wire form of [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub lambda: f64,
    pub gamma: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub delta: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.lambda, raw.gamma, raw.theta1, raw.theta2, raw.delta)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams { lambda: p.lambda, gamma: p.gamma, theta1: p.theta1, theta2: p.theta2, delta: p.delta }
    }
}

fn violation(constraint: &'static str, value: f64) -> Error {
    Error::ConstraintViolation { constraint, value }
}

impl ModelParams {
    /// Validates the raw parameters. `theta` is checked exactly, with no slack.
    pub fn new(lambda: f64, gamma: f64, theta1: f64, theta2: f64, delta: f64) -> Result<Self> {
        let theta = Self::check_rates(lambda, gamma, theta1, theta2, delta)?;
        if !(theta >= 0.0) {
            return Err(violation("theta out of range: theta1 + theta2 - gamma >= 0", theta));
        }
        if !(theta <= 1.0) {
            return Err(violation("theta out of range: theta1 + theta2 - gamma <= 1", theta));
        }
        Ok(ModelParams { lambda, gamma, theta1, theta2, delta, theta })
    }

    /// Like [`ModelParams::new`], but a `theta` that misses `[0, 1]` by at most
    /// [`PRESET_SNAP_TOLERANCE`] is moved onto the boundary. Used for preset
    /// mappings whose arithmetic can land a rounding error outside the range.
    pub fn new_snapped(lambda: f64, gamma: f64, theta1: f64, theta2: f64, delta: f64) -> Result<Self> {
        let mut theta = Self::check_rates(lambda, gamma, theta1, theta2, delta)?;
        if (-PRESET_SNAP_TOLERANCE..0.0).contains(&theta) {
            theta = 0.0;
        } else if theta > 1.0 && theta <= 1.0 + PRESET_SNAP_TOLERANCE {
            theta = 1.0;
        }
        if !(theta >= 0.0) {
            return Err(violation("theta out of range: theta1 + theta2 - gamma >= 0", theta));
        }
        if !(theta <= 1.0) {
            return Err(violation("theta out of range: theta1 + theta2 - gamma <= 1", theta));
        }
        Ok(ModelParams { lambda, gamma, theta1, theta2, delta, theta })
    }

    fn check_rates(lambda: f64, gamma: f64, theta1: f64, theta2: f64, delta: f64) -> Result<f64> {
        for (name, v) in [
            ("lambda must be finite", lambda),
            ("gamma must be finite", gamma),
            ("theta1 must be finite", theta1),
            ("theta2 must be finite", theta2),
            ("delta must be finite", delta),
        ] {
            if !v.is_finite() {
                return Err(violation(name, v));
            }
        }
        if !(lambda > 0.0) {
            return Err(violation("lambda > 0", lambda));
        }
        if !(gamma > 0.0) {
            return Err(violation("gamma > 0", gamma));
        }
        if !(theta1 >= 0.0) {
            return Err(violation("theta1 >= 0", theta1));
        }
        if !(theta2 >= 0.0) {
            return Err(violation("theta2 >= 0", theta2));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(violation("0 < delta <= 1", delta));
        }
        Ok(theta1 + theta2 - gamma)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn theta1(&self) -> f64 {
        self.theta1
    }
    pub fn theta2(&self) -> f64 {
        self.theta2
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    /// `theta1 + theta2 - gamma`, possibly snapped onto `{0, 1}` for presets.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The same model with a different time scale. The final-state law does
    /// not depend on `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut p = *self;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(violation("lambda > 0", lambda));
        }
        p.lambda = lambda;
        Ok(p)
    }
}

/// Validates five raw numbers into a [`ModelParams`].
pub fn validate_params(lambda: f64, gamma: f64, theta1: f64, theta2: f64, delta: f64) -> Result<ModelParams> {
    ModelParams::new(lambda, gamma, theta1, theta2, delta)
}

/// Counts of a population of `n + 1` individuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PopulationState {
    pub x: u64,
    pub u: u64,
    pub y: u64,
    pub z: u64,
    pub n: u64,
}

impl PopulationState {
    /// `N` ignorants and a single spreader.
    pub fn initial(n: u64) -> Self {
        PopulationState { x: n, u: 0, y: 1, z: 0, n }
    }

    /// Builds a state, checking `x + u + y + z = n + 1` and `x <= n`.
    pub fn new(x: u64, u: u64, y: u64, z: u64, n: u64) -> Result<Self> {
        if x > n {
            return Err(Error::InvalidArgument(format!("x = {x} exceeds n = {n}")));
        }
        if x + u + y + z != n + 1 {
            return Err(Error::InvalidArgument(format!("counts ({x}, {u}, {y}, {z}) do not sum to n + 1 = {}", n + 1)));
        }
        Ok(PopulationState { x, u, y, z, n })
    }

    pub fn is_absorbed(&self) -> bool {
        self.y == 0
    }

    pub fn total(&self) -> u64 {
        self.x + self.u + self.y + self.z
    }

    /// Applies `t`. The caller must only apply transitions with positive rate.
    #[inline]
    pub fn apply(&mut self, t: Transition) {
        match t {
            Transition::Spread => {
                self.x -= 1;
                self.y += 1;
            }
            Transition::Uninterested => {
                self.x -= 1;
                self.u += 1;
            }
            Transition::BothStifle => {
                self.y -= 2;
                self.z += 2;
            }
            Transition::OneStifles => {
                self.y -= 1;
                self.z += 1;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// An ignorant hears the rumour and becomes a spreader.
    Spread,
    /// An ignorant hears the rumour and stifles at once.
    Uninterested,
    /// Two spreaders meet and both stop.
    BothStifle,
    /// A spreader stops after meeting a spreader, stifler or uninterested.
    OneStifles,
}

impl Transition {
    pub const ALL: [Transition; 4] =
        [Transition::Spread, Transition::Uninterested, Transition::BothStifle, Transition::OneStifles];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRates {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl TransitionRates {
    pub fn total(&self) -> f64 {
        self.r0 + self.r1 + self.r2 + self.r3
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r0, self.r1, self.r2, self.r3]
    }

    fn scaled(self, c: f64) -> Self {
        TransitionRates { r0: c * self.r0, r1: c * self.r1, r2: c * self.r2, r3: c * self.r3 }
    }
}

/// Rates divided by `lambda`. These drive the jump chain, so anything built
/// on them is independent of `lambda` bit for bit.
#[inline]
pub fn jump_weights(s: &PopulationState, p: &ModelParams) -> TransitionRates {
    let xy = (s.x * s.y) as f64;
    let pairs = (s.y * s.y.saturating_sub(1)) as f64;
    let others = (s.n + 1 - s.x - s.y) as f64;
    TransitionRates {
        r0: p.delta * xy,
        r1: (1.0 - p.delta) * xy,
        r2: p.theta1 * pairs * 0.5,
        r3: p.theta2 * pairs + p.gamma * s.y as f64 * others,
    }
}

pub fn transition_rates(s: &PopulationState, p: &ModelParams) -> TransitionRates {
    jump_weights(s, p).scaled(p.lambda)
}

/// Named parameterisations of the general model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    /// Basic Daley-Kendall model.
    Dk,
    /// Basic Maki-Thompson model.
    Mt,
    /// One-parameter family interpolating MT (rho = 0) and DK (rho = 1).
    Rho {
        rho: f64,
    },
    /// MT contacts, but two meeting spreaders both stop.
    Hayes,
    /// DK variant: tell with probability p, stop with probability alpha,
    /// become a spreader with probability q.
    ApqDk {
        alpha: f64,
        p: f64,
        q: f64,
    },
    /// MT variant with the same (alpha, p, q) rules.
    ApqMt {
        alpha: f64,
        p: f64,
        q: f64,
    },
    Pearce {
        p: f64,
        q1: f64,
        q2: f64,
        r: f64,
    },
    Kawachi {
        alpha: f64,
        beta: f64,
        gamma: f64,
        theta: f64,
    },
}

fn check_range(name: &'static str, v: f64, lo: f64, lo_open: bool, hi: f64) -> Result<()> {
    let lo_ok = if lo_open { v > lo } else { v >= lo };
    if lo_ok && v <= hi {
        Ok(())
    } else {
        Err(violation(name, v))
    }
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Dk => "dk",
            Preset::Mt => "mt",
            Preset::Rho { .. } => "rho",
            Preset::Hayes => "hayes",
            Preset::ApqDk { .. } => "apq_dk",
            Preset::ApqMt { .. } => "apq_mt",
            Preset::Pearce { .. } => "pearce",
            Preset::Kawachi { .. } => "kawachi",
        }
    }

    /// Checks the auxiliary parameters against their stated ranges.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Preset::Dk | Preset::Mt | Preset::Hayes => Ok(()),
            Preset::Rho { rho } => check_range("0 <= rho <= 1", rho, 0.0, false, 1.0),
            Preset::ApqDk { alpha, p, q } | Preset::ApqMt { alpha, p, q } => {
                check_range("0 < alpha <= 1", alpha, 0.0, true, 1.0)?;
                check_range("0 < p <= 1", p, 0.0, true, 1.0)?;
                check_range("0 < q <= 1", q, 0.0, true, 1.0)
            }
            Preset::Pearce { p, q1, q2, r } => {
                check_range("0 < p <= 1", p, 0.0, true, 1.0)?;
                check_range("0 <= q1 <= 1", q1, 0.0, false, 1.0)?;
                check_range("0 <= q2 <= 1", q2, 0.0, false, 1.0)?;
                check_range("q1 + q2 <= 1", q1 + q2, 0.0, false, 1.0)?;
                check_range("0 < r <= 1", r, 0.0, true, 1.0)
            }
            Preset::Kawachi { alpha, beta, gamma, theta } => {
                check_range("0 < alpha <= 1", alpha, 0.0, true, 1.0)?;
                check_range("0 <= beta <= 1", beta, 0.0, false, 1.0)?;
                check_range("0 < gamma <= 1", gamma, 0.0, true, 1.0)?;
                check_range("0 < theta <= 1", theta, 0.0, true, 1.0)
            }
        }
    }

    /// Maps the preset onto the general five-parameter family.
    pub fn params(&self) -> Result<ModelParams> {
        self.validate()?;
        match *self {
            Preset::Dk => ModelParams::new(1.0, 1.0, 1.0, 0.0, 1.0),
            Preset::Mt => ModelParams::new(1.0, 1.0, 0.0, 1.0, 1.0),
            Preset::Rho { rho } => ModelParams::new_snapped(1.0, 1.0, rho, 1.0 - rho, 1.0),
            Preset::Hayes => ModelParams::new(1.0, 1.0, 2.0, 0.0, 1.0),
            Preset::ApqDk { alpha, p, q } => {
                ModelParams::new_snapped(p, alpha, alpha * alpha * (2.0 - p), alpha * (1.0 - alpha) * (2.0 - p), q)
            }
            Preset::ApqMt { alpha, p, q } => ModelParams::new_snapped(p, alpha, 0.0, alpha, q),
            Preset::Pearce { p, q1, q2, r } => ModelParams::new_snapped(p, r / p, q2 / p, q1 / (2.0 * p), 1.0),
            Preset::Kawachi { alpha, beta, gamma, theta } => {
                ModelParams::new_snapped(alpha, gamma / alpha, 2.0 * beta / alpha, 0.0, theta)
            }
        }
    }

    /// One representative of every preset, for listings.
    pub fn catalog() -> Vec<Preset> {
        vec![
            Preset::Dk,
            Preset::Mt,
            Preset::Rho { rho: 0.5 },
            Preset::Hayes,
            Preset::ApqDk { alpha: 1.0, p: 1.0, q: 1.0 },
            Preset::ApqMt { alpha: 1.0, p: 1.0, q: 1.0 },
            Preset::Pearce { p: 1.0, q1: 0.0, q2: 1.0, r: 1.0 },
            Preset::Kawachi { alpha: 1.0, beta: 1.0, gamma: 1.0, theta: 1.0 },
        ]
    }

    /// Human-readable mapping onto the general parameters.
    pub fn mapping(&self) -> &'static str {
        match self {
            Preset::Dk => "lambda=1, gamma=1, theta1=1, theta2=0, delta=1",
            Preset::Mt => "lambda=1, gamma=1, theta1=0, theta2=1, delta=1",
            Preset::Rho { .. } => "lambda=1, gamma=1, theta1=rho, theta2=1-rho, delta=1",
            Preset::Hayes => "lambda=1, gamma=1, theta1=2, theta2=0, delta=1",
            Preset::ApqDk { .. } => "lambda=p, gamma=alpha, theta1=alpha^2(2-p), theta2=alpha(1-alpha)(2-p), delta=q",
            Preset::ApqMt { .. } => "lambda=p, gamma=alpha, theta1=0, theta2=alpha, delta=q",
            Preset::Pearce { .. } => "lambda=p, gamma=r/p, theta1=q2/p, theta2=q1/(2p), delta=1",
            Preset::Kawachi { .. } => "lambda=alpha, gamma=gamma/alpha, theta1=2beta/alpha, theta2=0, delta=theta",
        }
    }
}

pub fn preset_params(preset: &Preset) -> Result<ModelParams> {
    preset.params()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dk() -> ModelParams {
        Preset::Dk.params().unwrap()
    }

    #[test]
    fn validates_classical_models() {
        let mt = validate_params(1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(mt.theta(), 0.0);
        let hayes = validate_params(1.0, 1.0, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(hayes.theta(), 1.0);
    }

    #[test]
    fn rejects_negative_theta() {
        let err = validate_params(1.0, 1.0, 0.0, 0.0, 1.0).unwrap_err();
        match err {
            Error::ConstraintViolation { constraint, value } => {
                assert!(constraint.contains("theta out of range"));
                assert_eq!(value, -1.0);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_each_constraint() {
        assert!(validate_params(0.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(validate_params(1.0, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(validate_params(1.0, 1.0, -0.1, 1.5, 1.0).is_err());
        assert!(validate_params(1.0, 1.0, 1.5, -0.1, 1.0).is_err());
        assert!(validate_params(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(validate_params(1.0, 1.0, 1.0, 0.0, 1.5).is_err());
        assert!(validate_params(1.0, 1.0, 2.0, 0.5, 1.0).is_err());
        assert!(validate_params(f64::NAN, 1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn rates_match_table() {
        let s = PopulationState::new(10, 0, 3, 0, 12).unwrap();
        let r = transition_rates(&s, &dk());
        assert_eq!(r.as_array(), [30.0, 0.0, 3.0, 0.0]);

        let s = PopulationState::new(5, 0, 2, 1, 7).unwrap();
        let r = transition_rates(&s, &Preset::Hayes.params().unwrap());
        assert_eq!(r.as_array(), [10.0, 0.0, 2.0, 2.0]);
    }

    #[test]
    fn absorbed_state_has_no_rates() {
        let p = Preset::ApqDk { alpha: 0.5, p: 0.5, q: 0.5 }.params().unwrap();
        let s = PopulationState::new(3, 2, 0, 4, 8).unwrap();
        assert_eq!(transition_rates(&s, &p).total(), 0.0);
    }

    #[test]
    fn preset_mappings() {
        let a = Preset::ApqDk { alpha: 1.0, p: 1.0, q: 1.0 }.params().unwrap();
        assert_eq!(a, validate_params(1.0, 1.0, 1.0, 0.0, 1.0).unwrap());
        let b = Preset::ApqMt { alpha: 1.0, p: 1.0, q: 1.0 }.params().unwrap();
        assert_eq!(b, validate_params(1.0, 1.0, 0.0, 1.0, 1.0).unwrap());
        assert_eq!(Preset::Rho { rho: 0.0 }.params().unwrap(), b);
        assert_eq!(Preset::Mt.params().unwrap(), b);
        assert_eq!(Preset::Rho { rho: 1.0 }.params().unwrap(), dk());

        let k = Preset::Kawachi { alpha: 0.5, beta: 0.25, gamma: 0.5, theta: 0.8 }.params().unwrap();
        assert_eq!((k.lambda(), k.gamma(), k.theta1(), k.theta2(), k.delta()), (0.5, 1.0, 1.0, 0.0, 0.8));
        let pe = Preset::Pearce { p: 0.5, q1: 0.2, q2: 0.4, r: 0.5 }.params().unwrap();
        assert_eq!((pe.lambda(), pe.gamma(), pe.theta1(), pe.theta2(), pe.delta()), (0.5, 1.0, 0.8, 0.2, 1.0));
    }

    #[test]
    fn preset_ranges_enforced() {
        assert!(Preset::Rho { rho: 1.2 }.params().is_err());
        assert!(Preset::ApqDk { alpha: 0.0, p: 1.0, q: 1.0 }.params().is_err());
        assert!(Preset::Pearce { p: 1.0, q1: 0.6, q2: 0.6, r: 1.0 }.params().is_err());
        // maps outside the admissible theta range
        assert!(Preset::Pearce { p: 1.0, q1: 0.0, q2: 0.0, r: 1.0 }.params().is_err());
    }

    #[test]
    fn apq_dk_theta_is_snapped() {
        for &(alpha, p) in &[(0.3, 1.0), (0.7, 1.0), (0.9, 1.0), (0.1, 1.0)] {
            let m = Preset::ApqDk { alpha, p, q: 0.4 }.params().unwrap();
            assert!(m.theta() >= 0.0);
            assert!((m.theta() - alpha * (1.0 - p)).abs() <= 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = Preset::ApqDk { alpha: 0.8, p: 0.7, q: 0.6 }.params().unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with("{\"lambda\":0.7,\"gamma\":0.8,"));
        let back: ModelParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);

        let bad = r#"{"lambda":1,"gamma":1,"theta1":0,"theta2":0,"delta":1}"#;
        assert!(serde_json::from_str::<ModelParams>(bad).is_err());

        let pr: Preset = serde_json::from_str(r#"{"preset":"apq_dk","alpha":1,"p":1,"q":0.5}"#).unwrap();
        assert_eq!(pr, Preset::ApqDk { alpha: 1.0, p: 1.0, q: 0.5 });
        let hayes: Preset = serde_json::from_str(r#"{"preset":"hayes"}"#).unwrap();
        assert_eq!(hayes, Preset::Hayes);
    }

    fn arb_params() -> impl Strategy<Value = ModelParams> {
        (0.05f64..5.0, 0.05f64..3.0, 0.0f64..1.0, 0.0f64..1.0, 0.01f64..=1.0).prop_filter_map(
            "theta in range",
            |(lambda, gamma, split, theta, delta)| {
                let total = gamma + theta;
                ModelParams::new(lambda, gamma, split * total, (1.0 - split) * total, delta).ok()
            },
        )
    }

    fn arb_state() -> impl Strategy<Value = PopulationState> {
        (1u64..200).prop_flat_map(|n| {
            (0..=n).prop_flat_map(move |x| {
                (0..=(n + 1 - x)).prop_flat_map(move |y| {
                    (0..=(n + 1 - x - y)).prop_map(move |u| PopulationState { x, u, y, z: n + 1 - x - y - u, n })
                })
            })
        })
    }

    proptest! {
        #[test]
        fn rates_homogeneous_in_lambda(p in arb_params(), s in arb_state(), c in 0.01f64..50.0) {
            let q = p.with_lambda(p.lambda() * c).unwrap();
            let a = transition_rates(&s, &p);
            let b = transition_rates(&s, &q);
            for (ra, rb) in a.as_array().iter().zip(b.as_array()) {
                prop_assert!((rb - c * ra).abs() <= 1e-12 * rb.abs().max(1.0));
            }
            if a.total() > 0.0 {
                for (ra, rb) in a.as_array().iter().zip(b.as_array()) {
                    prop_assert!((ra / a.total() - rb / b.total()).abs() <= 1e-14);
                }
            }
        }

        #[test]
        fn transitions_conserve_population(p in arb_params(), s in arb_state()) {
            let r = transition_rates(&s, &p);
            prop_assert!(r.as_array().iter().all(|&v| v >= 0.0));
            prop_assert_eq!(r.total() == 0.0, s.y == 0);
            for (t, rate) in Transition::ALL.iter().zip(r.as_array()) {
                if rate > 0.0 {
                    let mut next = s;
                    next.apply(*t);
                    prop_assert_eq!(next.total(), s.n + 1);
                }
            }
        }

        #[test]
        fn no_uninterested_when_delta_is_one(s in arb_state(), gamma in 0.1f64..2.0, theta in 0.0f64..1.0) {
            let p = ModelParams::new(1.0, gamma, gamma + theta, 0.0, 1.0).unwrap();
            prop_assert_eq!(transition_rates(&s, &p).r1, 0.0);
        }

        #[test]
        fn apq_dk_and_mt_differ_only_in_spreader_meetings(q in 0.01f64..=1.0) {
            let a = Preset::ApqDk { alpha: 1.0, p: 1.0, q }.params().unwrap();
            let b = Preset::ApqMt { alpha: 1.0, p: 1.0, q }.params().unwrap();
            prop_assert_eq!((a.lambda(), a.gamma(), a.delta()), (b.lambda(), b.gamma(), b.delta()));
            prop_assert_eq!((a.theta1(), a.theta2()), (1.0, 0.0));
            prop_assert_eq!((b.theta1(), b.theta2()), (0.0, 1.0));
            prop_assert_eq!(a.theta(), 0.0);
            prop_assert_eq!(b.theta(), 0.0);
        }
    }
}
