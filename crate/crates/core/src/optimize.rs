//! Precision optimization over interrogation time and lattice spacing.
//!
//! Functions here return the frequency uncertainty itself (a standard
//! deviation), not its square, since they feed scaling fits directly.

use crate::error::{check_positive, Error, Result};
use crate::estimators::{
    css_collective_coefficients, css_uncertainties, ratio_uncertainty_ghz, ratio_uncertainty_moments,
    std_uncertainty_ghz,
};
use crate::noise::{delta1, LatticeGeometry, NoiseParams};
use crate::oat::{moments_short_time, optimal_angles, ExpansionCoefficients};
use crate::specfun::{lambert_w, polygamma, ComplexValue, WBranch};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

/// Absolute tolerance of golden-section searches, in the searched coordinate.
pub const MINIMIZE_ABS_TOL: f64 = 1e-10;
/// Grid points for the coarse log-spaced scans preceding each golden search.
pub const SCAN_POINTS: usize = 48;
const GOLDEN_MAX_ITER: usize = 200;
const COORDINATE_MAX_CYCLES: usize = 60;

/// Interrogation-time search range (units of `1/omega_c`) for GHZ probes.
pub const GHZ_TAU_RANGE: (f64, f64) = (1e-6, 1.0);
/// Lattice-spacing search range for GHZ probes.
pub const GHZ_X0_RANGE: (f64, f64) = (0.05, 5.0);
/// Interrogation-time search range for OAT probes.
pub const OAT_TAU_RANGE: (f64, f64) = (1e-4, 2.0);
/// Lattice-spacing search range for OAT probes.
pub const OAT_X0_RANGE: (f64, f64) = (0.1, 3.0);
/// Interrogation-time search range for collective CSS probes.
pub const CSS_TAU_RANGE: (f64, f64) = (1e-5, 1.0);

/// How an optimum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Numeric,
    Analytic,
}

impl SolveMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveMethod::Numeric => "numeric",
            SolveMethod::Analytic => "analytic",
        }
    }
}

/// Probe family swept over qubit number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFamily {
    Ghz,
    Oat,
    Css,
}

impl StateFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateFamily::Ghz => "ghz",
            StateFamily::Oat => "oat",
            StateFamily::Css => "css",
        }
    }
}

/// Optimal operating point for one qubit number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumRecord {
    pub n: usize,
    pub x0_opt: f64,
    pub tau_opt: f64,
    pub delta_b_opt: f64,
    pub method: SolveMethod,
}

/// Least-squares fit `y = prefactor * N^exponent` in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Smallest and largest N used.
    pub window: (usize, usize),
}

/// `F_N(x0) = kappa0^2 [N + 2 sum_{j=1}^{N-1} (N-j) delta1(j x0)]`.
pub fn f_n_direct(n: usize, x0: f64, p: &NoiseParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: 0.0,
            reason: "need at least one qubit",
        });
    }
    let s = p.s();
    let tail: f64 = (1..n)
        .map(|j| (n - j) as f64 * delta1(p.correlator_argument(j, x0), s))
        .sum();
    Ok(p.kappa0_sq() * (n as f64 + 2.0 * tail))
}

/// `F_N(x0)` for `s = 3` through closed-form polygamma sums at `u = 1/x0`:
/// `S_N = 2 x0^-4 Re[(N + i u) A4 - A3]`, with
/// `A4 = [psi3(1+iu) - psi3(N+iu)]/6` and `A3 = -[psi2(1+iu) - psi2(N+iu)]/2`.
pub fn f_n_polygamma(n: usize, x0: f64, p: &NoiseParams) -> Result<f64> {
    if p.s() != 3.0 {
        return Err(Error::InvalidParameter {
            name: "s",
            value: p.s(),
            reason: "the polygamma series holds for s = 3 only",
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: 0.0,
            reason: "need at least one qubit",
        });
    }
    check_positive("x0", x0)?;
    let x = x0 * p.omega_c() / p.v();
    let u = 1.0 / x;
    let lo = ComplexValue::new(1.0, u);
    let hi = ComplexValue::new(n as f64, u);
    let a4 = (polygamma(3, lo)? - polygamma(3, hi)?) / 6.0;
    let a3 = -(polygamma(2, lo)? - polygamma(2, hi)?) / 2.0;
    let s_n = 2.0 * x.powi(-4) * (hi * a4 - a3).re;
    Ok(p.kappa0_sq() * (n as f64 + s_n))
}

/// Small-spacing approximation `(1/6)[8 N v^4 e^{-2v} + 2 v^2 / pi^2]`, `v = pi/x0`,
/// normalized by `kappa0^2` (valid for `x0` below about 0.4).
pub fn f_n_analytic(n: usize, x0: f64) -> Result<f64> {
    check_positive("x0", x0)?;
    let v = PI / x0;
    Ok((8.0 * n as f64 * v.powi(4) * (-2.0 * v).exp() + 2.0 * v * v / (PI * PI)) / 6.0)
}

fn ghz_w() -> f64 {
    lambert_w(WBranch::Principal, -(-0.5f64).exp() / 4.0).expect("argument lies above -1/e")
}

/// Time minimizing `(e^{2 F (w tau)^2} - 1/2)/tau`: `tau = sqrt(1 + 2W)/(2 omega_c sqrt(F))`,
/// `W = W0(-e^{-1/2}/4)`.
pub fn ghz_optimal_time(f: f64, omega_c: f64) -> Result<f64> {
    check_positive("F", f)?;
    check_positive("omega_c", omega_c)?;
    Ok(0.5 * (1.0 + 2.0 * ghz_w()).sqrt() / (omega_c * f.sqrt()))
}

/// Prefactor `sqrt(2) (1+2W)^{1/4} / sqrt(-W)`, approximately 2.96.
pub fn ghz_published_prefactor() -> f64 {
    let w = ghz_w();
    2f64.sqrt() * (1.0 + 2.0 * w).powf(0.25) / (-w).sqrt()
}

/// Prefactor of the true time minimum, `(1+2W)^{1/4} / sqrt(-2W)`, approximately 1.48.
pub fn ghz_exact_prefactor() -> f64 {
    let w = ghz_w();
    (1.0 + 2.0 * w).powf(0.25) / (-2.0 * w).sqrt()
}

/// `2.96 sqrt(omega_c/T) F^{1/4} / N`.
pub fn ghz_time_optimized_uncertainty(f: f64, omega_c: f64, t_total: f64, n: usize) -> Result<f64> {
    check_positive("F", f)?;
    check_positive("T", t_total)?;
    Ok(ghz_published_prefactor() * (omega_c / t_total).sqrt() * f.powf(0.25) / n as f64)
}

/// Ratio-estimator uncertainty at the exact time minimum, `1.48 sqrt(omega_c/T) F^{1/4} / N`.
pub fn ghz_time_optimized_uncertainty_exact(f: f64, omega_c: f64, t_total: f64, n: usize) -> Result<f64> {
    check_positive("F", f)?;
    check_positive("T", t_total)?;
    Ok(ghz_exact_prefactor() * (omega_c / t_total).sqrt() * f.powf(0.25) / n as f64)
}

fn ghz_lambert_argument(n: usize) -> Result<f64> {
    let c = 3.0 * PI.powf(2.0 / 3.0) * (n as f64).cbrt();
    if 1.0 / c > (-1.0f64).exp() {
        return Err(Error::Domain {
            op: "ghz_x0_analytic",
            value: -1.0 / c,
            expected: "argument at or above -1/e",
        });
    }
    Ok(c)
}

/// Approximate optimal GHZ spacing `x0 = pi / v`, `v = -(3/2)(L1 - L2)`,
/// `L1 = ln(1/c)`, `L2 = ln(-L1)`, `c = 3 pi^{2/3} N^{1/3}`.
pub fn ghz_x0_analytic(n: usize) -> Result<f64> {
    let c = ghz_lambert_argument(n)?;
    let l1 = (1.0 / c).ln();
    let l2 = (-l1).ln();
    Ok(PI / (-1.5 * (l1 - l2)))
}

/// Same spacing with the lower Lambert branch evaluated exactly: `v = -(3/2) W_{-1}(-1/c)`.
pub fn ghz_x0_lambert(n: usize) -> Result<f64> {
    let c = ghz_lambert_argument(n)?;
    Ok(PI / (-1.5 * lambert_w(WBranch::Lower, -1.0 / c)?))
}

/// `2.96 sqrt(omega_c/T) F_an(x0_an)^{1/4} / N`.
pub fn ghz_optimal_uncertainty_analytic(n: usize, omega_c: f64, t_total: f64) -> Result<f64> {
    let f = f_n_analytic(n, ghz_x0_analytic(n)?)?;
    ghz_time_optimized_uncertainty(f, omega_c, t_total, n)
}

/// `tau = sqrt(Delta / (6 a4)) / omega_c`, `Delta = sqrt(12 a0 a4 + a2^2) - a2`.
pub fn oat_optimal_time(c: &ExpansionCoefficients, omega_c: f64) -> Result<f64> {
    check_positive("a4", c.a4)?;
    check_positive("omega_c", omega_c)?;
    let delta = (12.0 * c.a0 * c.a4 + c.a2 * c.a2).sqrt() - c.a2;
    Ok((delta / (6.0 * c.a4)).sqrt() / omega_c)
}

/// Expansion uncertainty at [`oat_optimal_time`].
pub fn oat_optimal_uncertainty(c: &ExpansionCoefficients, p: &NoiseParams, t_total: f64) -> Result<f64> {
    let tau = oat_optimal_time(c, p.omega_c())?;
    Ok(crate::oat::oat_uncertainty_expansion(tau, c, p, t_total)?.sqrt())
}

/// Approximate minimizer of `a2` over spacing: `2 pi / (3 [ln c + ln ln c])`, `c = 3 pi^{2/3} N^{1/3}`.
pub fn oat_x0_analytic(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: n as f64,
            reason: "need at least two qubits",
        });
    }
    let c = 3.0 * PI.powf(2.0 / 3.0) * (n as f64).cbrt();
    Ok(2.0 * PI / (3.0 * (c.ln() + c.ln().ln())))
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64, op: &'static str) -> Result<f64> {
    let v = f(x);
    if v.is_nan() {
        Err(Error::NonFinite { op, at: vec![x] })
    } else {
        Ok(v)
    }
}

/// Golden-section minimization on `[a, b]`. `+inf` marks infeasible points;
/// NaN aborts with the offending argument.
pub fn minimize_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<(f64, f64)> {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = checked(&f, c, "minimize_1d")?;
    let mut fd = checked(&f, d, "minimize_1d")?;
    for _ in 0..GOLDEN_MAX_ITER {
        if (b - a).abs() <= MINIMIZE_ABS_TOL {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = checked(&f, c, "minimize_1d")?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = checked(&f, d, "minimize_1d")?;
        }
    }
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    if !fx.is_finite() {
        return Err(Error::Singular {
            op: "minimize_1d",
            detail: format!("no feasible point in [{a}, {b}]"),
        });
    }
    Ok((x, fx))
}

fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (la, lb) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (la + (lb - la) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Coarse geometric scan of `[lo, hi]` followed by golden refinement in `ln x`
/// around the best grid point.
pub fn minimize_log_scan<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    check_positive("lo", lo)?;
    check_positive("hi", hi)?;
    let grid = geometric_grid(lo, hi, SCAN_POINTS);
    let mut best = (0, f64::INFINITY);
    for (i, &x) in grid.iter().enumerate() {
        let v = checked(&f, x, "minimize_log_scan")?;
        if v < best.1 {
            best = (i, v);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Singular {
            op: "minimize_log_scan",
            detail: format!("no feasible point in [{lo}, {hi}]"),
        });
    }
    let i = best.0;
    let a = grid[i.saturating_sub(1)].ln();
    let b = grid[(i + 1).min(grid.len() - 1)].ln();
    let (lx, fx) = minimize_1d(|l| f(l.exp()), a, b)?;
    Ok((lx.exp(), fx))
}

/// Two-dimensional minimization of `f(tau, x0)` on a coarse grid (geometric in both
/// coordinates) refined by alternating golden searches.
pub fn minimize_2d<F: Fn(f64, f64) -> f64 + Sync>(
    f: F,
    tau_bounds: (f64, f64),
    x0_bounds: (f64, f64),
    n: usize,
) -> Result<OptimumRecord> {
    let taus = geometric_grid(tau_bounds.0, tau_bounds.1, SCAN_POINTS);
    let xs = geometric_grid(x0_bounds.0, x0_bounds.1, SCAN_POINTS);
    let mut best = (0, 0, f64::INFINITY);
    for (i, &t) in taus.iter().enumerate() {
        for (j, &x) in xs.iter().enumerate() {
            let v = f(t, x);
            if v.is_nan() {
                return Err(Error::NonFinite {
                    op: "minimize_2d",
                    at: vec![t, x],
                });
            }
            if v < best.2 {
                best = (i, j, v);
            }
        }
    }
    if !best.2.is_finite() {
        return Err(Error::Singular {
            op: "minimize_2d",
            detail: "no feasible grid point".into(),
        });
    }
    let (mut t, mut x, mut v) = (taus[best.0], xs[best.1], best.2);
    let (lt0, lt1) = (tau_bounds.0.ln(), tau_bounds.1.ln());
    let (lx0, lx1) = (x0_bounds.0.ln(), x0_bounds.1.ln());
    let span = |a: f64, lo: f64, hi: f64| {
        let h = (hi - lo) / (SCAN_POINTS - 1) as f64;
        ((a - 2.0 * h).max(lo), (a + 2.0 * h).min(hi))
    };
    for _ in 0..COORDINATE_MAX_CYCLES {
        let (a, b) = span(t.ln(), lt0, lt1);
        let (lt, _) = minimize_1d(|l| f(l.exp(), x), a, b)?;
        let (a, b) = span(x.ln(), lx0, lx1);
        let (lx, fv) = minimize_1d(|l| f(lt.exp(), l.exp()), a, b)?;
        let moved = (lt - t.ln()).abs().max((lx - x.ln()).abs());
        t = lt.exp();
        x = lx.exp();
        let improved = v - fv;
        v = fv.min(v);
        if moved < 1e-9 || improved.abs() <= 1e-15 * v.abs() {
            break;
        }
    }
    Ok(OptimumRecord {
        n,
        x0_opt: x,
        tau_opt: t,
        delta_b_opt: v,
        method: SolveMethod::Numeric,
    })
}

/// Ratio-estimator uncertainty of a GHZ probe at phase `2 N b tau = pi/2`
/// with short-time decay `(omega_c tau)^2 F`.
pub fn ghz_ratio_objective(tau: f64, f: f64, n: usize, p: &NoiseParams, t_total: f64) -> f64 {
    let wt = p.omega_c() * tau;
    let b = PI / (4.0 * n as f64 * tau);
    ratio_uncertainty_ghz(b, tau, n, wt * wt * f, t_total).map_or(f64::INFINITY, f64::sqrt)
}

/// Standard-estimator uncertainty of a GHZ probe at phase `N b tau = pi/2`, total time `2T`.
pub fn ghz_standard_objective(tau: f64, f: f64, n: usize, p: &NoiseParams, t_total: f64) -> f64 {
    let wt = p.omega_c() * tau;
    let b = FRAC_PI_2 / (n as f64 * tau);
    std_uncertainty_ghz(b, tau, n, wt * wt * f, 2.0 * t_total).map_or(f64::INFINITY, f64::sqrt)
}

/// Numeric time optimum of the GHZ ratio estimator at spacing `x0`.
pub fn ghz_time_optimum(n: usize, x0: f64, p: &NoiseParams, t_total: f64) -> Result<(f64, f64)> {
    let f = f_n_direct(n, x0, p)?;
    minimize_log_scan(
        |t| ghz_ratio_objective(t, f, n, p, t_total),
        GHZ_TAU_RANGE.0,
        GHZ_TAU_RANGE.1,
    )
}

/// Numeric optimum of the GHZ ratio estimator over time and spacing.
pub fn ghz_numeric_optimum(n: usize, p: &NoiseParams, t_total: f64) -> Result<OptimumRecord> {
    let inner = |x0: f64| ghz_time_optimum(n, x0, p, t_total).map_or(f64::INFINITY, |r| r.1);
    let (x0, _) = minimize_log_scan(inner, GHZ_X0_RANGE.0, GHZ_X0_RANGE.1)?;
    let (tau, db) = ghz_time_optimum(n, x0, p, t_total)?;
    Ok(OptimumRecord {
        n,
        x0_opt: x0,
        tau_opt: tau,
        delta_b_opt: db,
        method: SolveMethod::Numeric,
    })
}

/// Closed-form GHZ operating point at the approximate spacing.
pub fn ghz_analytic_optimum(n: usize, p: &NoiseParams, t_total: f64) -> Result<OptimumRecord> {
    let x0 = ghz_x0_analytic(n)?;
    let f = p.kappa0_sq() * f_n_analytic(n, x0)?;
    Ok(OptimumRecord {
        n,
        x0_opt: x0,
        tau_opt: ghz_optimal_time(f, p.omega_c())?,
        delta_b_opt: ghz_optimal_uncertainty_analytic(n, p.omega_c(), t_total)?,
        method: SolveMethod::Analytic,
    })
}

/// Ratio-estimator uncertainty of the optimal OAT state at phase zero from cumulant moments.
pub fn oat_ratio_objective(tau: f64, geom: &LatticeGeometry, p: &NoiseParams, t_total: f64) -> f64 {
    let angles = match optimal_angles(geom.n_qubits()) {
        Ok(a) => a,
        Err(_) => return f64::INFINITY,
    };
    moments_short_time(tau, geom, p, angles, 0.0)
        .and_then(|m| ratio_uncertainty_moments(&m, tau, t_total))
        .map_or(f64::INFINITY, |v| if v > 0.0 { v.sqrt() } else { f64::INFINITY })
}

/// Numeric time optimum of the OAT ratio estimator at spacing `x0`.
pub fn oat_time_optimum(n: usize, x0: f64, p: &NoiseParams, t_total: f64) -> Result<(f64, f64)> {
    let geom = LatticeGeometry::new(n, x0)?;
    minimize_log_scan(
        |t| oat_ratio_objective(t, &geom, p, t_total),
        OAT_TAU_RANGE.0,
        OAT_TAU_RANGE.1,
    )
}

/// Numeric optimum of the OAT ratio estimator over time and spacing.
pub fn oat_numeric_optimum(n: usize, p: &NoiseParams, t_total: f64) -> Result<OptimumRecord> {
    let inner = |x0: f64| oat_time_optimum(n, x0, p, t_total).map_or(f64::INFINITY, |r| r.1);
    let (x0, _) = minimize_log_scan(inner, OAT_X0_RANGE.0, OAT_X0_RANGE.1)?;
    let (tau, db) = oat_time_optimum(n, x0, p, t_total)?;
    Ok(OptimumRecord {
        n,
        x0_opt: x0,
        tau_opt: tau,
        delta_b_opt: db,
        method: SolveMethod::Numeric,
    })
}

/// Numeric time optima of the collective CSS, ratio and standard estimators.
pub fn css_numeric_optimum(n: usize, p: &NoiseParams, t_total: f64) -> Result<(OptimumRecord, OptimumRecord)> {
    let eval = |tau: f64, ratio: bool| {
        let (k, x) = css_collective_coefficients(tau, p);
        css_uncertainties(tau, n, k, x, t_total).map_or(f64::INFINITY, |u| {
            let v = if ratio { u.ratio } else { u.standard };
            if v > 0.0 {
                v.sqrt()
            } else {
                f64::INFINITY
            }
        })
    };
    let record = |(tau, db): (f64, f64)| OptimumRecord {
        n,
        x0_opt: 0.0,
        tau_opt: tau,
        delta_b_opt: db,
        method: SolveMethod::Numeric,
    };
    let r = minimize_log_scan(|t| eval(t, true), CSS_TAU_RANGE.0, CSS_TAU_RANGE.1)?;
    let s = minimize_log_scan(|t| eval(t, false), CSS_TAU_RANGE.0, CSS_TAU_RANGE.1)?;
    Ok((record(r), record(s)))
}

/// Numeric optimum for one family at one qubit number (CSS: ratio estimator).
pub fn numeric_optimum(family: StateFamily, n: usize, p: &NoiseParams, t_total: f64) -> Result<OptimumRecord> {
    match family {
        StateFamily::Ghz => ghz_numeric_optimum(n, p, t_total),
        StateFamily::Oat => oat_numeric_optimum(n, p, t_total),
        StateFamily::Css => css_numeric_optimum(n, p, t_total).map(|r| r.0),
    }
}

/// `delta_b N / sqrt(ln N)`, constant in N for near-Heisenberg scaling.
pub fn ghz_log_normalized(record: &OptimumRecord) -> f64 {
    let n = record.n as f64;
    record.delta_b_opt * n / n.ln().sqrt()
}

/// Log-log least-squares power-law fit.
pub fn fit_power_law(ns: &[usize], values: &[f64]) -> Result<ScalingFit> {
    if ns.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: ns.len(),
            found: values.len(),
        });
    }
    if ns.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "points",
            value: ns.len() as f64,
            reason: "a fit needs at least two points",
        });
    }
    if let Some(&v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain {
            op: "fit_power_law",
            value: v,
            expected: "positive finite values",
        });
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Singular {
            op: "fit_power_law",
            detail: "all N identical".into(),
        });
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        exponent: slope,
        prefactor: (my - slope * mx).exp(),
        r_squared: r2,
        window: (*ns.iter().min().unwrap_or(&0), *ns.iter().max().unwrap_or(&0)),
    })
}

/// Power-law fit that drops the smallest N while the log-log curvature
/// (quadratic coefficient) exceeds `curvature_tol`, keeping at least three points.
pub fn fit_power_law_trimmed(ns: &[usize], values: &[f64], curvature_tol: f64) -> Result<ScalingFit> {
    let mut start = 0;
    while ns.len() - start > 3 && log_curvature(&ns[start..], &values[start..]).abs() > curvature_tol {
        start += 1;
    }
    fit_power_law(&ns[start..], &values[start..])
}

fn log_curvature(ns: &[usize], values: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let mut s = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (x, y) in xs.iter().zip(&ys) {
        let d = x - mx;
        let row = [1.0, d, d * d];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += row[i] * row[j];
            }
            r[i] += row[i] * y;
        }
    }
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(s);
    if d.abs() < 1e-300 {
        return 0.0;
    }
    let mut m = s;
    for i in 0..3 {
        m[i][2] = r[i];
    }
    det(m) / d
}

/// Per-N numeric optima and scaling fit. For GHZ the fit is applied to
/// [`ghz_log_normalized`] values, for which the exponent tends to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub family: StateFamily,
    pub records: Vec<OptimumRecord>,
    pub fit: ScalingFit,
}

/// Optimizes each N in parallel (results kept in input order) and fits.
pub fn sweep_and_fit(family: StateFamily, ns: &[usize], p: &NoiseParams, t_total: f64) -> Result<Sweep> {
    if ns.is_empty() {
        return Err(Error::InvalidParameter {
            name: "N list",
            value: 0.0,
            reason: "sweep needs at least one qubit number",
        });
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "N list",
            value: ns[0] as f64,
            reason: "qubit numbers must be strictly ascending",
        });
    }
    let records: Vec<OptimumRecord> = ns
        .par_iter()
        .map(|&n| numeric_optimum(family, n, p, t_total))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = match family {
        StateFamily::Ghz => records.iter().map(ghz_log_normalized).collect(),
        _ => records.iter().map(|r| r.delta_b_opt).collect(),
    };
    let fit = fit_power_law(ns, &values)?;
    Ok(Sweep { family, records, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oat::expansion_coefficients;

    #[test]
    fn spatial_function_examples() {
        let p = NoiseParams::default();
        assert!((f_n_direct(1, 0.7, &p).unwrap() - 6.0).abs() < 1e-12);
        assert!((f_n_direct(3, 1.0, &p).unwrap() - 11.8656).abs() < 1e-3);
        let tiny = f_n_direct(20, 1e-9, &p).unwrap();
        assert!((tiny / (6.0 * 400.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polygamma_path_matches_direct_sum() {
        let p = NoiseParams::default();
        for (n, x0) in [(3, 1.0), (100, 0.43), (2, 10.0), (500, 0.1)] {
            let a = f_n_direct(n, x0, &p).unwrap();
            let b = f_n_polygamma(n, x0, &p).unwrap();
            assert!(((a - b) / a).abs() < 1e-10, "N={n} x0={x0}: {a} vs {b}");
        }
        let ohmic = NoiseParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(f_n_polygamma(3, 1.0, &ohmic).is_err());
    }

    #[test]
    fn analytic_spatial_function_limits() {
        let x0 = 1e-3;
        assert!((f_n_analytic(50, x0).unwrap() * 3.0 * x0 * x0 - 1.0).abs() < 1e-12);
        let (n, x0) = (40, 0.45);
        let v = PI / x0;
        let diff = f_n_analytic(2 * n, x0).unwrap() - f_n_analytic(n, x0).unwrap();
        assert!((diff - 8.0 * n as f64 * v.powi(4) * (-2.0 * v).exp() / 6.0).abs() < 1e-12);
    }

    #[test]
    fn lambert_time_prefactors() {
        assert!((ghz_published_prefactor() - 2.953).abs() < 0.01);
        assert!((ghz_published_prefactor() / ghz_exact_prefactor() - 2.0).abs() < 1e-12);
        let t1 = ghz_optimal_time(10.0, 1.0).unwrap();
        let t4 = ghz_optimal_time(40.0, 1.0).unwrap();
        assert!((t1 / t4 - 2.0).abs() < 1e-12);
        let a = ghz_time_optimized_uncertainty(10.0, 1.0, 1.0, 50).unwrap();
        let b = ghz_time_optimized_uncertainty(160.0, 1.0, 1.0, 50).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lambert_time_matches_numeric_minimum() {
        let p = NoiseParams::default();
        let (n, f) = (100, 350.0);
        let (tau, db) = minimize_log_scan(
            |t| ghz_ratio_objective(t, f, n, &p, 1.0),
            GHZ_TAU_RANGE.0,
            GHZ_TAU_RANGE.1,
        )
        .unwrap();
        assert!((tau / ghz_optimal_time(f, 1.0).unwrap() - 1.0).abs() < 1e-3);
        assert!((db / ghz_time_optimized_uncertainty_exact(f, 1.0, 1.0, n).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ghz_spacing_examples() {
        assert!((ghz_x0_analytic(100).unwrap() - 0.4533).abs() < 1e-3);
        let small = ghz_x0_analytic(10_000).unwrap();
        assert!(small < ghz_x0_analytic(100).unwrap());
        assert!((ghz_x0_lambert(100).unwrap() - ghz_x0_analytic(100).unwrap()).abs() < 0.05);
    }

    #[test]
    fn oat_time_formula() {
        let p = NoiseParams::default();
        let c = ExpansionCoefficients {
            h0: 10.0,
            a0: 2.0,
            a2: 0.0,
            a4: 3.0,
        };
        let t = oat_optimal_time(&c, 1.0).unwrap();
        assert!((t - (12.0 * 2.0 * 3.0f64).powf(0.25) / (18.0f64).sqrt()).abs() < 1e-12);
        let (tn, vn) = minimize_log_scan(
            |t| crate::oat::oat_uncertainty_expansion(t, &c, &p, 1.0).unwrap(),
            1e-3,
            10.0,
        )
        .unwrap();
        assert!((tn / t - 1.0).abs() < 1e-6);
        assert!((vn.sqrt() / oat_optimal_uncertainty(&c, &p, 1.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oat_spacing_near_a2_minimizer() {
        let p = NoiseParams::default();
        let n = 30;
        let (x_num, _) = minimize_log_scan(
            |x| expansion_coefficients(n, x, &p).map_or(f64::INFINITY, |c| c.a2),
            0.1,
            2.0,
        )
        .unwrap();
        assert!((oat_x0_analytic(n).unwrap() - x_num).abs() < 0.05);
        assert!(oat_x0_analytic(3000).unwrap() < oat_x0_analytic(30).unwrap());
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = minimize_1d(|x| (x - 2.0) * (x - 2.0), 0.0, 5.0).unwrap();
        assert!((x - 2.0).abs() < 1e-6 && fx < 1e-12);
        assert!(matches!(
            minimize_1d(|_| f64::NAN, 0.0, 1.0),
            Err(Error::NonFinite { .. })
        ));
        assert!(minimize_1d(|_| f64::INFINITY, 0.0, 1.0).is_err());
    }

    #[test]
    fn nested_and_grid_2d_agree_for_ghz() {
        let p = NoiseParams::default();
        let n = 100;
        let nested = ghz_numeric_optimum(n, &p, 1.0).unwrap();
        let grid = minimize_2d(
            |t, x| f_n_direct(n, x, &p).map_or(f64::INFINITY, |f| ghz_ratio_objective(t, f, n, &p, 1.0)),
            (1e-4, 1.0),
            GHZ_X0_RANGE,
            n,
        )
        .unwrap();
        assert!((nested.x0_opt - grid.x0_opt).abs() < 1e-4, "{nested:?} {grid:?}");
        assert!(
            (nested.delta_b_opt / grid.delta_b_opt - 1.0).abs() < 1e-8,
            "{nested:?} {grid:?}"
        );
    }

    #[test]
    fn power_law_fit_recovers_exponent() {
        let ns = [10, 20, 40, 80];
        let vals: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-0.75)).collect();
        let fit = fit_power_law(&ns, &vals).unwrap();
        assert!((fit.exponent + 0.75).abs() < 1e-12 && (fit.prefactor - 3.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.window, (10, 80));
        assert!(sweep_and_fit(StateFamily::Css, &[], &NoiseParams::default(), 1.0).is_err());
    }
}
