//! Frequency estimators for Ramsey-type measurements, their exact and sampled
//! outcome statistics, and closed-form squared uncertainties.
//!
//! All `*_uncertainty*` functions return the squared uncertainty (variance) of
//! the frequency estimate.

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::noise::NoiseParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

/// Largest repetition count accepted by exact enumeration.
pub const MAX_EXACT_NU: u64 = 5000;
/// Above this repetition count exact ratio enumeration is flagged as expensive.
pub const EXACT_NU_WARNING: u64 = 2000;
/// Outcomes whose binomial weight is below this fraction of the peak are skipped.
const WEIGHT_CUTOFF: f64 = 1e-25;

/// Survival probabilities of the two GHZ-class probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzProbabilities {
    pub p: f64,
    pub p_prime: f64,
}

impl GhzProbabilities {
    pub fn new(p: f64, p_prime: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("p_prime", p_prime)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "probability must lie in [0, 1]",
                });
            }
        }
        Ok(Self { p, p_prime })
    }
}

/// Mean and variance of an estimator over measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorStats {
    pub mean: f64,
    pub variance: f64,
    /// Probability mass of outcomes for which the estimate is real-valued.
    pub defined_fraction: f64,
}

/// First and second moments of the collective spin in the equatorial plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub jx: f64,
    pub jy: f64,
    pub jx2: f64,
    pub jy2: f64,
}

impl MomentSet {
    pub const CSV_HEADER: &'static str = "tau[1/omega_c],jx,jy,jx2,jy2";

    pub fn var_x(&self) -> f64 {
        self.jx2 - self.jx * self.jx
    }

    pub fn var_y(&self) -> f64 {
        self.jy2 - self.jy * self.jy
    }

    pub fn csv_row(&self, tau: f64) -> String {
        format!(
            "{tau:.10e},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.jx, self.jy, self.jx2, self.jy2
        )
    }
}

/// Which inversion maps counts to a frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    /// Arccos inversion of the GHZ survival fraction assuming decay `gamma_assumed`.
    Standard { gamma_assumed: f64 },
    /// Arctangent of the GHZ and GHZ' fractions; no decay assumption.
    Ratio,
}

/// `p = (1 + cos(N b tau) e^-gamma)/2`, `p' = (1 + sin(N b tau) e^-gamma)/2`.
pub fn ghz_probabilities(n: usize, b: f64, tau: f64, gamma: f64) -> Result<GhzProbabilities> {
    check_non_negative("gamma", gamma)?;
    let phase = n as f64 * b * tau;
    let decay = (-gamma).exp();
    Ok(GhzProbabilities {
        p: 0.5 * (1.0 + phase.cos() * decay),
        p_prime: 0.5 * (1.0 + phase.sin() * decay),
    })
}

fn check_counts(counts: &[u64], nu: u64) -> Result<()> {
    if nu == 0 {
        return Err(Error::InvalidParameter {
            name: "nu",
            value: 0.0,
            reason: "need at least one repetition",
        });
    }
    if let Some(&c) = counts.iter().find(|&&c| c > nu) {
        return Err(Error::InvalidParameter {
            name: "count",
            value: c as f64,
            reason: "count exceeds the number of repetitions",
        });
    }
    Ok(())
}

/// `arccos[e^gamma (2 nu_plus/nu - 1)] / (N tau)`; `None` when the argument leaves [-1, 1].
pub fn standard_estimate(nu_plus: u64, nu: u64, n: usize, tau: f64, gamma_assumed: f64) -> Result<Option<f64>> {
    check_counts(&[nu_plus], nu)?;
    check_positive("tau", tau)?;
    Ok(standard_value(nu_plus, nu, n as f64 * tau, gamma_assumed.exp()))
}

#[inline]
fn standard_value(nu_plus: u64, nu: u64, n_tau: f64, scale: f64) -> Option<f64> {
    let arg = scale * (2.0 * nu_plus as f64 - nu as f64) / nu as f64;
    (arg.abs() <= 1.0).then(|| arg.acos() / n_tau)
}

/// `arctan[(2 nu'_+ - nu)/(2 nu_+ - nu)] / (N tau)` on the branch (-pi/2, pi/2].
/// `None` only when both numerator and denominator vanish.
pub fn ratio_estimate(nu_plus: u64, nu_prime_plus: u64, nu: u64, n: usize, tau: f64) -> Result<Option<f64>> {
    check_counts(&[nu_plus, nu_prime_plus], nu)?;
    check_positive("tau", tau)?;
    Ok(ratio_value(nu_plus, nu_prime_plus, nu, n as f64 * tau))
}

#[inline]
fn ratio_value(nu_plus: u64, nu_prime_plus: u64, nu: u64, n_tau: f64) -> Option<f64> {
    let num = 2 * nu_prime_plus as i64 - nu as i64;
    let den = 2 * nu_plus as i64 - nu as i64;
    match (num, den) {
        (0, 0) => None,
        (_, 0) => Some(std::f64::consts::FRAC_PI_2 / n_tau),
        _ => Some((num as f64 / den as f64).atan() / n_tau),
    }
}

/// Limiting ratio-estimator curve `arctan[tan(N b tau)]/(N tau)`.
pub fn ratio_limit(n: usize, b: f64, tau: f64) -> f64 {
    let n_tau = n as f64 * tau;
    (b * n_tau).tan().atan() / n_tau
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn ln_factorials(nu: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nu as usize + 1);
    let mut acc = CompensatedSum::default();
    out.push(0.0);
    for k in 1..=nu {
        acc.add((k as f64).ln());
        out.push(acc.value());
    }
    out
}

/// Binomial probabilities `C(nu, k) p^k (1-p)^(nu-k)` evaluated in log space.
fn binomial_weights(nu: u64, p: f64, ln_fact: &[f64]) -> Vec<f64> {
    let n = nu as usize;
    if p <= 0.0 || p >= 1.0 {
        let mut w = vec![0.0; n + 1];
        w[if p <= 0.0 { 0 } else { n }] = 1.0;
        return w;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=n)
        .map(|k| (ln_fact[n] - ln_fact[k] - ln_fact[n - k] + k as f64 * lp + (n - k) as f64 * lq).exp())
        .collect()
}

/// Indices carrying non-negligible weight.
fn support(w: &[f64]) -> Vec<usize> {
    let peak = w.iter().cloned().fold(0.0, f64::max);
    (0..w.len()).filter(|&k| w[k] > WEIGHT_CUTOFF * peak).collect()
}

/// Exact mean and variance of the estimator over all outcomes of `nu`
/// repetitions per probe, excluding undefined outcomes.
pub fn exact_outcome_stats(
    kind: EstimatorKind,
    probs: GhzProbabilities,
    nu: u64,
    n: usize,
    tau: f64,
) -> Result<EstimatorStats> {
    check_counts(&[], nu)?;
    check_positive("tau", tau)?;
    GhzProbabilities::new(probs.p, probs.p_prime)?;
    if nu > MAX_EXACT_NU {
        return Err(Error::EnumerationTooLarge { nu, max: MAX_EXACT_NU });
    }
    let ln_fact = ln_factorials(nu);
    let w = binomial_weights(nu, probs.p, &ln_fact);
    let rows = support(&w);
    let n_tau = n as f64 * tau;
    match kind {
        EstimatorKind::Standard { gamma_assumed } => {
            let scale = gamma_assumed.exp();
            let value = |k: usize| standard_value(k as u64, nu, n_tau, scale);
            let (mass, mean) = first_pass(&rows, |k, m, s| {
                if let Some(x) = value(k) {
                    m.add(w[k]);
                    s.add(w[k] * x);
                }
            });
            let mean = finish_mean(mass, mean)?;
            let (_, var) = first_pass(&rows, |k, _, s| {
                if let Some(x) = value(k) {
                    s.add(w[k] * (x - mean) * (x - mean));
                }
            });
            Ok(EstimatorStats {
                mean,
                variance: var / mass,
                defined_fraction: mass.min(1.0),
            })
        }
        EstimatorKind::Ratio => {
            let wp = binomial_weights(nu, probs.p_prime, &ln_fact);
            let cols = support(&wp);
            let (mass, mean) = first_pass(&rows, |k, m, s| {
                for &j in &cols {
                    if let Some(x) = ratio_value(k as u64, j as u64, nu, n_tau) {
                        let wt = w[k] * wp[j];
                        m.add(wt);
                        s.add(wt * x);
                    }
                }
            });
            let mean = finish_mean(mass, mean)?;
            let (_, var) = first_pass(&rows, |k, _, s| {
                for &j in &cols {
                    if let Some(x) = ratio_value(k as u64, j as u64, nu, n_tau) {
                        s.add(w[k] * wp[j] * (x - mean) * (x - mean));
                    }
                }
            });
            Ok(EstimatorStats {
                mean,
                variance: var / mass,
                defined_fraction: mass.min(1.0),
            })
        }
    }
}

/// Parallel over rows with an ordered, compensated final reduction.
fn first_pass<F>(rows: &[usize], body: F) -> (f64, f64)
where
    F: Fn(usize, &mut CompensatedSum, &mut CompensatedSum) + Sync,
{
    let partials: Vec<(CompensatedSum, CompensatedSum)> = rows
        .par_iter()
        .map(|&k| {
            let (mut m, mut s) = (CompensatedSum::default(), CompensatedSum::default());
            body(k, &mut m, &mut s);
            (m, s)
        })
        .collect();
    let (mut m, mut s) = (CompensatedSum::default(), CompensatedSum::default());
    for (pm, ps) in partials {
        m.add(pm.value());
        s.add(ps.value());
    }
    (m.value(), s.value())
}

fn finish_mean(mass: f64, weighted: f64) -> Result<f64> {
    if mass > 0.0 {
        Ok(weighted / mass)
    } else {
        Err(Error::NoDefinedOutcomes)
    }
}

/// Draws `(nu_plus, nu'_plus)` for each of `shots` experiments. Shot `i` uses
/// its own ChaCha stream, so results do not depend on thread scheduling.
pub fn sample_outcomes(probs: GhzProbabilities, nu: u64, shots: usize, seed: u64) -> Result<Vec<(u64, u64)>> {
    GhzProbabilities::new(probs.p, probs.p_prime)?;
    let bin = |p: f64| {
        Binomial::new(nu, p).map_err(|_| Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "invalid binomial probability",
        })
    };
    let (d, dp) = (bin(probs.p)?, bin(probs.p_prime)?);
    Ok((0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shot as u64);
            let a = d.sample(&mut rng);
            (a, dp.sample(&mut rng))
        })
        .collect())
}

/// Sample mean and variance of the estimator over Monte Carlo shots.
pub fn monte_carlo_stats(
    kind: EstimatorKind,
    probs: GhzProbabilities,
    nu: u64,
    n: usize,
    tau: f64,
    shots: usize,
    seed: u64,
) -> Result<EstimatorStats> {
    check_counts(&[], nu)?;
    check_positive("tau", tau)?;
    let samples = sample_outcomes(probs, nu, shots, seed)?;
    let n_tau = n as f64 * tau;
    let values: Vec<f64> = samples
        .iter()
        .filter_map(|&(a, b)| match kind {
            EstimatorKind::Standard { gamma_assumed } => standard_value(a, nu, n_tau, gamma_assumed.exp()),
            EstimatorKind::Ratio => ratio_value(a, b, nu, n_tau),
        })
        .collect();
    if values.is_empty() {
        return Err(Error::NoDefinedOutcomes);
    }
    let count = values.len() as f64;
    let mut s = CompensatedSum::default();
    values.iter().for_each(|&x| s.add(x));
    let mean = s.value() / count;
    let mut v = CompensatedSum::default();
    values.iter().for_each(|&x| v.add((x - mean) * (x - mean)));
    Ok(EstimatorStats {
        mean,
        variance: v.value() / count,
        defined_fraction: count / samples.len().max(1) as f64,
    })
}

/// Error-propagation variance of the standard GHZ estimator at fixed total time `t_total`.
pub fn std_uncertainty_ghz(b: f64, tau: f64, n: usize, gamma: f64, t_total: f64) -> Result<f64> {
    check_positive("tau", tau)?;
    check_positive("t_total", t_total)?;
    let phase = n as f64 * b * tau;
    let s2 = phase.sin().powi(2);
    if s2 < 1e-300 {
        return Err(Error::Singular {
            op: "std_uncertainty_ghz",
            detail: format!("sin(N b tau) = 0 at N b tau = {phase}"),
        });
    }
    let n2 = (n * n) as f64;
    Ok(((2.0 * gamma).exp() - phase.cos().powi(2)) / s2 / (t_total * tau * n2))
}

/// `(e^{2 gamma} - sin^2(2 N b tau)/2) / (T tau N^2)`.
pub fn ratio_uncertainty_ghz(b: f64, tau: f64, n: usize, gamma: f64, t_total: f64) -> Result<f64> {
    check_positive("tau", tau)?;
    check_positive("t_total", t_total)?;
    let n2 = (n * n) as f64;
    let s = (2.0 * n as f64 * b * tau).sin();
    Ok(((2.0 * gamma).exp() - 0.5 * s * s) / (t_total * tau * n2))
}

/// Squared uncertainties of a coherent spin state under collective noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CssUncertainties {
    pub ratio: f64,
    pub standard: f64,
}

/// Collective CSS decay and phase exponents `(kappa0^2 (omega_c tau)^2, xi0^3 (omega_c tau)^3)`.
pub fn css_collective_coefficients(tau: f64, p: &NoiseParams) -> (f64, f64) {
    let wt = p.omega_c() * tau;
    (p.kappa0_sq() * wt * wt, p.xi0_cubed() * wt * wt * wt)
}

/// CSS ratio estimator at phase pi/4 (total time 2T over both quadratures)
/// and method of moments at phase 0 with the same total time.
pub fn css_uncertainties(tau: f64, n: usize, kappa: f64, xi: f64, t_total: f64) -> Result<CssUncertainties> {
    check_positive("tau", tau)?;
    check_positive("t_total", t_total)?;
    let nf = n as f64;
    let c = xi.cos().powi(2 * n as i32 - 2);
    if c.abs() < 1e-300 {
        return Err(Error::Singular {
            op: "css_uncertainties",
            detail: format!("cos(xi)^(2N-2) = 0 at xi = {xi}"),
        });
    }
    let ratio = ((nf + 1.0) * kappa.exp() / (nf * c) - 1.0) / (2.0 * t_total * tau);
    let cross = if n > 1 {
        (nf - 1.0) * (-kappa).exp() * (2.0 * xi).cos().powi(n as i32 - 2)
    } else {
        0.0
    };
    let standard = ((nf + 1.0) * kappa.exp() - cross) / (2.0 * nf * 2.0 * t_total * tau * c);
    Ok(CssUncertainties { ratio, standard })
}

/// Ratio-estimator variance from collective-spin moments.
pub fn ratio_uncertainty_moments(m: &MomentSet, tau: f64, t_total: f64) -> Result<f64> {
    check_positive("tau", tau)?;
    check_positive("t_total", t_total)?;
    let r2 = m.jx * m.jx + m.jy * m.jy;
    if r2 <= 0.0 {
        return Err(Error::Singular {
            op: "ratio_uncertainty_moments",
            detail: "both first moments vanish".into(),
        });
    }
    Ok((m.jx * m.jx * m.var_y() + m.jy * m.jy * m.var_x()) / (t_total * tau * r2 * r2))
}

/// Method-of-moments variance for measuring `Jy` with total time `2T`.
pub fn std_uncertainty_moments(m: &MomentSet, tau: f64, t_total: f64) -> Result<f64> {
    check_positive("tau", tau)?;
    check_positive("t_total", t_total)?;
    if m.jx == 0.0 {
        return Err(Error::Singular {
            op: "std_uncertainty_moments",
            detail: "slope d<Jy>/d(phase) = <Jx> vanishes".into(),
        });
    }
    Ok(m.var_y() / (2.0 * t_total * tau * m.jx * m.jx))
}
