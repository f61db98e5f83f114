//! Mergeable Monte Carlo statistics and the comparison against theory.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::clt::CovMatrix2;
use crate::error::{Error, Result};
use crate::limits::LimitResult;

use super::oracle::FinalDistribution;
use super::SimulationOutcome;

/// Integer power sums of the final counts `X` and `U`. Exact, so merging is
/// associative and commutative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub sum_x: u128,
    pub sum_u: u128,
    pub sum_xx: u128,
    pub sum_xu: u128,
    pub sum_uu: u128,
}

impl Moments {
    fn record(&mut self, x: u64, u: u64) {
        let (x, u) = (x as u128, u as u128);
        self.count += 1;
        self.sum_x += x;
        self.sum_u += u;
        self.sum_xx += x * x;
        self.sum_xu += x * u;
        self.sum_uu += u * u;
    }

    fn add(&mut self, o: &Moments) {
        self.count += o.count;
        self.sum_x += o.sum_x;
        self.sum_u += o.sum_u;
        self.sum_xx += o.sum_xx;
        self.sum_xu += o.sum_xu;
        self.sum_uu += o.sum_uu;
    }

    /// Sample means of `X / n` and `U / n`.
    pub fn means(&self, n: u64) -> (f64, f64) {
        let denom = self.count as f64 * n as f64;
        (self.sum_x as f64 / denom, self.sum_u as f64 / denom)
    }

    /// Unbiased sample covariance of `sqrt(n) (X/n, U/n)`. The centred sums
    /// are formed in exact integer arithmetic before the single division.
    pub fn scaled_covariance(&self, n: u64) -> Option<CovMatrix2> {
        if self.count < 2 {
            return None;
        }
        let m = self.count as i128;
        let centred = |sab: u128, sa: u128, sb: u128| m * sab as i128 - sa as i128 * sb as i128;
        let denom = (m * (m - 1)) as f64 * n as f64;
        Some(CovMatrix2 {
            s11: centred(self.sum_xx, self.sum_x, self.sum_x) as f64 / denom,
            s12: centred(self.sum_xu, self.sum_x, self.sum_u) as f64 / denom,
            s22: centred(self.sum_uu, self.sum_u, self.sum_u) as f64 / denom,
        })
    }
}

/// Sufficient statistics over replications of one `(n, params, seed)` run.
///
/// `all` covers every replication. `major` leaves out minor outbreaks, runs
/// in which the rumour died out early and more than `minor_cutoff` ignorants
/// remain. Those have probability `O(1/n)` but sit at distance `O(1)` from
/// `x_inf`, so they inflate second moments without affecting the limit law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStats {
    pub reps: u64,
    pub n: u64,
    pub master_seed: u64,
    pub minor_cutoff: u64,
    pub all: Moments,
    pub major: Moments,
    /// Sum of absorption times; zero for jump-chain runs.
    pub sum_absorption_time: f64,
    pub timed_reps: u64,
}

impl McStats {
    pub fn empty(n: u64, master_seed: u64, minor_cutoff: u64) -> Self {
        McStats {
            reps: 0,
            n,
            master_seed,
            minor_cutoff,
            all: Moments::default(),
            major: Moments::default(),
            sum_absorption_time: 0.0,
            timed_reps: 0,
        }
    }

    /// Halfway between `n x_inf` and `n`, rounded down.
    pub fn minor_cutoff_for(n: u64, x_inf: f64) -> u64 {
        ((n as f64) * (1.0 + x_inf) / 2.0).floor() as u64
    }

    pub fn record(&mut self, o: &SimulationOutcome) {
        let s = &o.final_state;
        self.reps += 1;
        self.all.record(s.x, s.u);
        if s.x <= self.minor_cutoff {
            self.major.record(s.x, s.u);
        }
        if let Some(t) = o.absorption_time {
            self.sum_absorption_time += t;
            self.timed_reps += 1;
        }
    }

    /// Field-wise sum. Both sides must describe the same `n` and cutoff.
    pub fn merge(mut self, other: &McStats) -> Result<McStats> {
        if other.reps == 0 {
            return Ok(self);
        }
        if self.reps == 0 {
            return Ok(other.clone());
        }
        if self.n != other.n || self.minor_cutoff != other.minor_cutoff {
            return Err(Error::InvalidArgument(format!(
                "cannot merge statistics for n = {} and n = {}",
                self.n, other.n
            )));
        }
        self.reps += other.reps;
        self.all.add(&other.all);
        self.major.add(&other.major);
        self.sum_absorption_time += other.sum_absorption_time;
        self.timed_reps += other.timed_reps;
        Ok(self)
    }

    pub fn minor_outbreaks(&self) -> u64 {
        self.all.count - self.major.count
    }

    pub fn mean_absorption_time(&self) -> Option<f64> {
        (self.timed_reps > 0).then(|| self.sum_absorption_time / self.timed_reps as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Allowed |z| for the sample means.
    pub mean_sigmas: f64,
    /// Relative tolerance on covariance entries.
    pub cov_rel_tol: f64,
    /// Standard errors allowed on covariance entries.
    pub cov_sigmas: f64,
    /// Compare only major outbreaks (see [`McStats`]).
    pub major_only: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { mean_sigmas: 4.0, cov_rel_tol: 0.05, cov_sigmas: 4.0, major_only: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, expected: f64, tolerance: f64) -> Check {
        let pass = (value - expected).abs() <= tolerance;
        Check { name: name.to_string(), value, expected, tolerance, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: u64,
    pub reps: u64,
    pub reps_compared: u64,
    pub minor_outbreaks: u64,
    pub x_inf: f64,
    pub u_inf: f64,
    pub x_mean: f64,
    pub u_mean: f64,
    /// `(mean - limit) / sqrt(sigma_ii / (n reps))`.
    pub x_mean_z: f64,
    pub u_mean_z: f64,
    pub sigma_emp: [[f64; 2]; 2],
    pub sigma_theory: [[f64; 2]; 2],
    /// `(emp - theory) / |theory|` for s11, s12, s22; zero where theory is zero and matched.
    pub sigma_rel_err: [f64; 3],
    /// Unfiltered moments, for reference.
    pub x_mean_all: f64,
    pub u_mean_all: f64,
    pub sigma_emp_all: [[f64; 2]; 2],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_absorption_time: Option<f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn rel_err(emp: f64, theory: f64) -> f64 {
    if theory != 0.0 {
        (emp - theory) / theory.abs()
    } else if emp == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Compares Monte Carlo statistics with the limit and covariance predicted
/// for the model.
pub fn verify(
    stats: &McStats,
    lim: &LimitResult,
    sigma: &CovMatrix2,
    config: &VerifyConfig,
) -> Result<VerificationReport> {
    let used = if config.major_only { &stats.major } else { &stats.all };
    if used.count < 2 {
        return Err(Error::InvalidArgument(format!("need at least two replications to verify, have {}", used.count)));
    }
    let n = stats.n;
    let m = used.count as f64;
    let (x_mean, u_mean) = used.means(n);
    let emp = used.scaled_covariance(n).expect("count >= 2");
    let (x_all, u_all) = stats.all.means(n);
    let emp_all = stats.all.scaled_covariance(n).unwrap_or(emp);

    let mut checks = Vec::new();
    let se_x = (sigma.s11 / (n as f64 * m)).sqrt();
    let se_u = (sigma.s22.max(0.0) / (n as f64 * m)).sqrt();
    checks.push(Check::new("mean x", x_mean, lim.x_inf, config.mean_sigmas * se_x));
    checks.push(Check::new("mean u", u_mean, lim.u_inf, config.mean_sigmas * se_u));

    // sampling standard error of an entry of a sample covariance matrix
    let wishart = |sij: f64, sii: f64, sjj: f64| ((sij * sij + sii * sjj) / (m - 1.0)).sqrt();
    let entries = [
        ("sigma11", emp.s11, sigma.s11, wishart(sigma.s11, sigma.s11, sigma.s11)),
        ("sigma12", emp.s12, sigma.s12, wishart(sigma.s12, sigma.s11, sigma.s22)),
        ("sigma22", emp.s22, sigma.s22, wishart(sigma.s22, sigma.s22, sigma.s22)),
    ];
    for (name, e, t, se) in entries {
        let tol = (config.cov_rel_tol * t.abs()).max(config.cov_sigmas * se);
        checks.push(Check::new(name, e, t, tol));
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        n,
        reps: stats.reps,
        reps_compared: used.count,
        minor_outbreaks: stats.minor_outbreaks(),
        x_inf: lim.x_inf,
        u_inf: lim.u_inf,
        x_mean,
        u_mean,
        x_mean_z: z_score(x_mean - lim.x_inf, se_x),
        u_mean_z: z_score(u_mean - lim.u_inf, se_u),
        sigma_emp: emp.to_array(),
        sigma_theory: sigma.to_array(),
        sigma_rel_err: [rel_err(emp.s11, sigma.s11), rel_err(emp.s12, sigma.s12), rel_err(emp.s22, sigma.s22)],
        x_mean_all: x_all,
        u_mean_all: u_all,
        sigma_emp_all: emp_all.to_array(),
        mean_absorption_time: stats.mean_absorption_time(),
        checks,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
    /// An outcome with zero probability under the oracle was observed.
    pub impossible_outcome: bool,
}

impl GofResult {
    pub fn passes(&self, significance: f64) -> bool {
        !self.impossible_outcome && self.p_value >= significance
    }
}

/// Pearson chi-square test of observed final-state counts against an exact
/// distribution. Cells with expected count below 5 are pooled.
pub fn chi_square_gof(counts: &std::collections::BTreeMap<(u64, u64), u64>, dist: &FinalDistribution) -> GofResult {
    let total: u64 = counts.values().sum();
    let impossible_outcome = counts.iter().any(|(&(x, u), &c)| c > 0 && dist.prob(x, u) == 0.0);
    let mut cells: Vec<(f64, f64)> =
        dist.support().into_iter().map(|(key, p)| (p * total as f64, *counts.get(&key).unwrap_or(&0) as f64)).collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (e, o) in cells {
        if acc.0 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
        if e >= 5.0 && acc.0 == 0.0 {
            pooled.push((e, o));
        } else {
            acc.0 += e;
            acc.1 += o;
        }
    }
    if acc.0 > 0.0 {
        match pooled.last_mut() {
            Some(last) if acc.0 < 5.0 => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            _ => pooled.push(acc),
        }
    }

    let statistic: f64 = pooled.iter().map(|&(e, o)| (o - e) * (o - e) / e).sum();
    let df = pooled.len().saturating_sub(1) as u64;
    let p_value = if df == 0 {
        if statistic <= 1e-9 {
            1.0
        } else {
            0.0
        }
    } else {
        ChiSquared::new(df as f64).map(|d| d.sf(statistic)).unwrap_or(0.0)
    };
    GofResult { statistic, df, p_value, impossible_outcome }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PopulationState;

    fn outcome(x: u64, u: u64, n: u64) -> SimulationOutcome {
        SimulationOutcome {
            final_state: PopulationState { x, u, y: 0, z: n + 1 - x - u, n },
            absorption_time: Some(1.0),
            jump_count: 1,
        }
    }

    #[test]
    fn merge_identity_and_additivity() {
        let mut a = McStats::empty(10, 1, 8);
        let mut b = McStats::empty(10, 1, 8);
        let mut whole = McStats::empty(10, 1, 8);
        for (i, (x, u)) in [(2, 1), (3, 0), (9, 0), (1, 4)].into_iter().enumerate() {
            let o = outcome(x, u, 10);
            whole.record(&o);
            if i % 2 == 0 {
                a.record(&o)
            } else {
                b.record(&o)
            }
        }
        let merged = a.clone().merge(&b).unwrap();
        assert_eq!(merged, whole);
        assert_eq!(a.clone().merge(&McStats::empty(10, 1, 8)).unwrap(), a);
        assert_eq!(merged.minor_outbreaks(), 1);
        assert!(a.merge(&McStats { reps: 1, ..McStats::empty(11, 1, 8) }).is_err());
    }

    #[test]
    fn exact_covariance_from_integer_sums() {
        let mut m = Moments::default();
        for (x, u) in [(1, 2), (3, 5), (4, 4), (10, 0)] {
            m.record(x, u);
        }
        let c = m.scaled_covariance(5).unwrap();
        // direct two-pass computation on X/5, U/5, scaled by 5
        let xs = [1.0, 3.0, 4.0, 10.0].map(|v: f64| v / 5.0);
        let us = [2.0, 5.0, 4.0, 0.0].map(|v: f64| v / 5.0);
        let mx = xs.iter().sum::<f64>() / 4.0;
        let mu = us.iter().sum::<f64>() / 4.0;
        let sxu: f64 = xs.iter().zip(&us).map(|(a, b)| (a - mx) * (b - mu)).sum::<f64>() / 3.0;
        let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>() / 3.0;
        assert!((c.s12 - 5.0 * sxu).abs() < 1e-14);
        assert!((c.s11 - 5.0 * sxx).abs() < 1e-14);
    }

    #[test]
    fn zero_variance_u_is_exact() {
        let mut s = McStats::empty(100, 0, 90);
        for x in [20, 21, 19, 22, 18] {
            s.record(&outcome(x, 0, 100));
        }
        let lim = LimitResult {
            x_inf: 0.2,
            u_inf: 0.0,
            method: crate::limits::Method::BisectionNewton,
            residual: 0.0,
            iterations: 0,
        };
        let sigma = CovMatrix2 { s11: 0.3, s12: 0.0, s22: 0.0 };
        let r = verify(&s, &lim, &sigma, &VerifyConfig::default()).unwrap();
        assert_eq!(r.sigma_emp[1][1], 0.0);
        assert_eq!(r.sigma_emp[0][1], 0.0);
        assert_eq!(r.u_mean_z, 0.0);
        assert!(r.checks.iter().filter(|c| c.name != "sigma11" && c.name != "mean x").all(|c| c.pass));
    }

    #[test]
    fn verify_needs_data() {
        let s = McStats::empty(100, 0, 90);
        let lim = LimitResult {
            x_inf: 0.2,
            u_inf: 0.0,
            method: crate::limits::Method::BisectionNewton,
            residual: 0.0,
            iterations: 0,
        };
        let sigma = CovMatrix2 { s11: 0.3, s12: 0.0, s22: 0.0 };
        assert!(verify(&s, &lim, &sigma, &VerifyConfig::default()).is_err());
    }

    #[test]
    fn stats_json_round_trip() {
        let mut s = McStats::empty(10, 42, 8);
        s.record(&outcome(3, 1, 10));
        let js = serde_json::to_string(&s).unwrap();
        let back: McStats = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
