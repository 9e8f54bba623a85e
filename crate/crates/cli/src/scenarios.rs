//! Registered scenarios and their dataset builders.

use crate::config::{EstimatorChoice, Resolved, StateChoice};
use crate::error::CliError;
use crate::output::{Cell, Table};
use ratiosense_core::estimators::{
    css_collective_coefficients, css_uncertainties, exact_outcome_stats, ghz_probabilities, monte_carlo_stats,
    ratio_limit, ratio_uncertainty_ghz, EstimatorStats,
};
use ratiosense_core::oat::expansion_coefficients;
use ratiosense_core::optimize::{
    css_numeric_optimum, f_n_analytic, f_n_direct, f_n_polygamma, fit_power_law, ghz_analytic_optimum,
    ghz_log_normalized, ghz_optimal_time, ghz_ratio_objective, ghz_standard_objective, ghz_x0_analytic, ghz_x0_lambert,
    minimize_log_scan, oat_numeric_optimum, oat_optimal_time, oat_optimal_uncertainty, oat_x0_analytic, sweep_and_fit,
    GHZ_TAU_RANGE, GHZ_X0_RANGE, OAT_X0_RANGE,
};
use ratiosense_core::{EstimatorKind, NoiseParams, OptimumRecord, ScalingFit, SolveMethod, StateFamily};
use std::f64::consts::PI;
use std::path::PathBuf;

/// Decay levels of the ratio-estimator convergence table.
pub const CONVERGENCE_DECAYS: [f64; 3] = [0.0, 0.3, 1.0];
/// Phases `N b tau` of the ratio-estimator convergence table.
pub const CONVERGENCE_PHASES: [f64; 4] = [0.3, 0.6, 0.9, 1.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Bias,
    RatioCollective,
    CollectiveCompare,
    LatticeScaling,
    Ohmicity,
    SpatialFunction,
    OatSpacing,
}

/// Configuration fields a scenario reads; unused fields are not validated.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uses {
    pub n: bool,
    pub n_list: bool,
    pub x0: bool,
    pub tau: bool,
    pub tau_range: bool,
    pub nu: bool,
    pub nu_list: bool,
    pub s_list: bool,
    pub alpha_list: bool,
    pub short_time: bool,
}

/// Per-scenario fallback values.
#[derive(Debug, Clone)]
pub struct Defaults {
    pub seed: u64,
    pub t_total: f64,
    pub alpha: f64,
    pub s: f64,
    pub omega_c: f64,
    pub speed: f64,
    pub alpha_list: Vec<f64>,
    pub s_list: Vec<f64>,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub x0_range: [f64; 2],
    pub x0_points: usize,
    pub tau: f64,
    pub tau_range: [f64; 2],
    pub tau_points: usize,
    pub estimator: EstimatorChoice,
    pub state: StateChoice,
    pub nu: u64,
    pub nu_list: Vec<u64>,
    pub shots: usize,
    pub out_dir: PathBuf,
}

const GHZ_SWEEP: [usize; 6] = [20, 50, 100, 200, 500, 1000];
const OAT_SWEEP: [usize; 7] = [20, 30, 50, 70, 100, 150, 200];

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Bias,
        Scenario::RatioCollective,
        Scenario::CollectiveCompare,
        Scenario::LatticeScaling,
        Scenario::Ohmicity,
        Scenario::SpatialFunction,
        Scenario::OatSpacing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Bias => "fig1-bias",
            Scenario::RatioCollective => "fig2-ratio-collective",
            Scenario::CollectiveCompare => "fig3-collective-compare",
            Scenario::LatticeScaling => "fig4-lattice-scaling",
            Scenario::Ohmicity => "fig5-ohmicity",
            Scenario::SpatialFunction => "fig6-spatial-function",
            Scenario::OatSpacing => "fig7-oat-x0",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Bias => "standard GHZ estimator mean and spread versus phase for several couplings",
            Scenario::RatioCollective => "ratio GHZ estimator under collective noise: exact, linearized and sampled uncertainty versus tau, convergence in nu",
            Scenario::CollectiveCompare => "collective noise: optimal GHZ and CSS uncertainties versus N, plus a tau scan at fixed N",
            Scenario::LatticeScaling => "lattice optima versus N with power-law fits (numeric and closed form)",
            Scenario::Ohmicity => "lattice optima and fits versus N for each Ohmicity exponent s",
            Scenario::SpatialFunction => "spatial function F_N(x0): direct sum, polygamma and small-spacing forms; optimal spacing versus N",
            Scenario::OatSpacing => "squeezed-state optimal spacing versus N: numeric, closed form, a2 minimizer",
        }
    }

    pub fn from_name(name: &str) -> Option<Scenario> {
        Scenario::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn uses(self) -> Uses {
        let u = Uses::default();
        match self {
            Scenario::Bias => Uses {
                n: true,
                tau: true,
                nu: true,
                alpha_list: true,
                ..u
            },
            Scenario::RatioCollective => Uses {
                n: true,
                tau: true,
                tau_range: true,
                nu: true,
                nu_list: true,
                short_time: true,
                ..u
            },
            Scenario::CollectiveCompare => Uses {
                n: true,
                n_list: true,
                tau_range: true,
                short_time: true,
                ..u
            },
            Scenario::LatticeScaling => Uses { n_list: true, ..u },
            Scenario::Ohmicity => Uses {
                n_list: true,
                s_list: true,
                ..u
            },
            Scenario::SpatialFunction => Uses {
                n: true,
                n_list: true,
                x0: true,
                ..u
            },
            Scenario::OatSpacing => Uses { n_list: true, ..u },
        }
    }

    pub fn defaults(self, state: Option<StateChoice>) -> Defaults {
        let state = state.unwrap_or(match self {
            Scenario::OatSpacing => StateChoice::Oat,
            _ => StateChoice::Ghz,
        });
        let sweep = match state {
            StateChoice::Oat => OAT_SWEEP.to_vec(),
            _ => GHZ_SWEEP.to_vec(),
        };
        let mut d = Defaults {
            seed: 42,
            t_total: 1.0,
            alpha: 1.0,
            s: 3.0,
            omega_c: 1.0,
            speed: 1.0,
            alpha_list: vec![0.0, 1.0, 5.0, 20.0],
            s_list: vec![0.0, 2.0, 3.0, 4.0, 5.0],
            n: 100,
            n_list: sweep,
            x0_range: [0.1, 3.0],
            x0_points: 60,
            tau: 1e-3,
            tau_range: [1e-3, 1e-2],
            tau_points: 37,
            estimator: EstimatorChoice::Ratio,
            state,
            nu: 400,
            nu_list: vec![30, 100, 400],
            shots: 0,
            out_dir: PathBuf::from("out").join(self.name()),
        };
        match self {
            Scenario::Bias => {
                d.estimator = EstimatorChoice::Standard;
                d.tau_points = 61;
            }
            Scenario::RatioCollective => d.shots = 4000,
            Scenario::CollectiveCompare => {
                d.n_list = vec![50, 100, 200, 500, 1000, 2000, 5000];
                d.tau_range = [1e-4, 0.25];
                d.tau_points = 61;
            }
            Scenario::SpatialFunction => d.n_list = vec![20, 50, 100, 200, 500, 1000, 10_000],
            Scenario::OatSpacing => d.n_list = vec![10, 20, 30, 50, 100, 200],
            Scenario::LatticeScaling | Scenario::Ohmicity => {}
        }
        d
    }

    pub fn run(self, r: &Resolved) -> Result<Vec<Table>, CliError> {
        match self {
            Scenario::Bias => bias(r),
            Scenario::RatioCollective => ratio_collective(r),
            Scenario::CollectiveCompare => collective_compare(r),
            Scenario::LatticeScaling => lattice_scaling(r),
            Scenario::Ohmicity => ohmicity(r),
            Scenario::SpatialFunction => spatial_function(r),
            Scenario::OatSpacing => oat_spacing(r),
        }
    }
}

fn geometric(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn linear(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Collective GHZ decay `kappa0^2 N^2 (omega_c tau)^2`; zero coupling gives zero.
fn collective_ghz_decay(alpha: f64, r: &Resolved, n: usize, tau: f64) -> Result<f64, CliError> {
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let p = r.noise_with(alpha, r.s)?;
    Ok(p.kappa0_sq() * (n * n) as f64 * (p.omega_c() * tau).powi(2))
}

/// Standard deviation of the estimate at total time `T` from the per-probe spread over `nu` shots.
fn spread_at_total_time(stats: &EstimatorStats, nu: u64, tau: f64, t_total: f64) -> f64 {
    (stats.variance * nu as f64 * tau / t_total).sqrt()
}

fn monte_carlo(
    r: &Resolved,
    kind: EstimatorKind,
    probs: ratiosense_core::GhzProbabilities,
    n: usize,
    tau: f64,
    stream: u64,
) -> Option<EstimatorStats> {
    if r.shots == 0 {
        return None;
    }
    monte_carlo_stats(kind, probs, r.nu, n, tau, r.shots, r.seed.wrapping_add(stream)).ok()
}

fn bias(r: &Resolved) -> Result<Vec<Table>, CliError> {
    let (n, tau, nu) = (r.n, r.tau, r.nu);
    let n_tau = n as f64 * tau;
    let kind = EstimatorKind::Standard { gamma_assumed: 0.0 };
    let heisenberg = 1.0 / (n as f64 * (r.t_total * tau).sqrt());
    let mut t = Table::new(
        "standard_bias",
        &[
            "alpha",
            "gamma",
            "phase[rad]",
            "b[omega_c]",
            "mean[omega_c]",
            "bias[omega_c]",
            "delta_b[omega_c]",
            "delta_b_heisenberg[omega_c]",
            "defined_fraction",
            "mean_mc[omega_c]",
            "delta_b_mc[omega_c]",
        ],
    );
    let phases: Vec<f64> = (0..r.tau_points)
        .map(|k| PI * (k as f64 + 0.5) / r.tau_points as f64)
        .collect();
    let mut stream = 0u64;
    for &alpha in &r.alpha_list {
        let gamma = collective_ghz_decay(alpha, r, n, tau)?;
        for &phase in &phases {
            let b = phase / n_tau;
            let probs = ghz_probabilities(n, b, tau, gamma)?;
            let exact = exact_outcome_stats(kind, probs, nu, n, tau).ok();
            let mc = monte_carlo(r, kind, probs, n, tau, stream);
            stream += 1;
            t.push(vec![
                alpha.into(),
                gamma.into(),
                phase.into(),
                b.into(),
                exact.map(|s| s.mean).into(),
                exact.map(|s| s.mean - b).into(),
                exact.map(|s| spread_at_total_time(&s, nu, tau, r.t_total)).into(),
                heisenberg.into(),
                exact.map(|s| s.defined_fraction).into(),
                mc.map(|s| s.mean).into(),
                mc.map(|s| spread_at_total_time(&s, nu, tau, r.t_total)).into(),
            ]);
        }
    }
    Ok(vec![t])
}

fn ratio_collective(r: &Resolved) -> Result<Vec<Table>, CliError> {
    let p = r.noise()?;
    let n = r.n;
    let f = p.kappa0_sq() * (n * n) as f64;
    let kind = match r.estimator {
        EstimatorChoice::Ratio => EstimatorKind::Ratio,
        EstimatorChoice::Standard => EstimatorKind::Standard { gamma_assumed: 0.0 },
    };
    let mut scan = Table::new(
        "ratio_tau_scan",
        &[
            "tau[1/omega_c]",
            "gamma",
            "b[omega_c]",
            "delta_b_exact[omega_c]",
            "delta_b_analytic[omega_c]",
            "delta_b_mc[omega_c]",
        ],
    );
    for (k, tau) in geometric(r.tau_range[0], r.tau_range[1], r.tau_points)
        .into_iter()
        .enumerate()
    {
        let gamma = f * (p.omega_c() * tau).powi(2);
        let b = PI / (4.0 * n as f64 * tau);
        let probs = ghz_probabilities(n, b, tau, gamma)?;
        let exact = exact_outcome_stats(kind, probs, r.nu, n, tau).ok();
        let mc = monte_carlo(r, kind, probs, n, tau, k as u64);
        scan.push(vec![
            tau.into(),
            gamma.into(),
            b.into(),
            exact.map(|s| spread_at_total_time(&s, r.nu, tau, r.t_total)).into(),
            Cell::from_result(ratio_uncertainty_ghz(b, tau, n, gamma, r.t_total).map(f64::sqrt)),
            mc.map(|s| spread_at_total_time(&s, r.nu, tau, r.t_total)).into(),
        ]);
    }

    let mut optimum = Table::new(
        "ratio_optimum",
        &[
            "n",
            "tau_opt_closed_form[1/omega_c]",
            "tau_opt_numeric[1/omega_c]",
            "delta_b_opt[omega_c]",
        ],
    );
    let (tau_num, db) = minimize_log_scan(
        |t| ghz_ratio_objective(t, f, n, &p, r.t_total),
        GHZ_TAU_RANGE.0,
        GHZ_TAU_RANGE.1,
    )?;
    optimum.push(vec![
        n.into(),
        Cell::from_result(ghz_optimal_time(f, p.omega_c())),
        tau_num.into(),
        db.into(),
    ]);

    let mut conv = Table::new(
        "ratio_convergence",
        &[
            "gamma",
            "phase[rad]",
            "nu",
            "mean[omega_c]",
            "limit[omega_c]",
            "relative_error",
        ],
    );
    let n_tau = n as f64 * r.tau;
    for &gamma in &CONVERGENCE_DECAYS {
        for &phase in &CONVERGENCE_PHASES {
            let b = phase / n_tau;
            let limit = ratio_limit(n, b, r.tau);
            let probs = ghz_probabilities(n, b, r.tau, gamma)?;
            for &nu in &r.nu_list {
                let mean = exact_outcome_stats(EstimatorKind::Ratio, probs, nu, n, r.tau)
                    .ok()
                    .map(|s| s.mean);
                conv.push(vec![
                    gamma.into(),
                    phase.into(),
                    nu.into(),
                    mean.into(),
                    limit.into(),
                    mean.map(|m| (m - limit).abs() / limit.abs()).into(),
                ]);
            }
        }
    }
    Ok(vec![scan, optimum, conv])
}

fn css_delta_b(tau: f64, n: usize, p: &NoiseParams, t_total: f64, ratio: bool) -> Cell {
    let (k, x) = css_collective_coefficients(tau, p);
    match css_uncertainties(tau, n, k, x, t_total) {
        Ok(u) => {
            let v = if ratio { u.ratio } else { u.standard };
            if v > 0.0 {
                v.sqrt().into()
            } else {
                Cell::Na
            }
        }
        Err(_) => Cell::Na,
    }
}

fn collective_compare(r: &Resolved) -> Result<Vec<Table>, CliError> {
    let p = r.noise()?;
    let mut scaling = Table::new(
        "collective_scaling",
        &[
            "n",
            "ghz_standard_tau[1/omega_c]",
            "ghz_standard_delta_b[omega_c]",
            "ghz_ratio_tau[1/omega_c]",
            "ghz_ratio_delta_b[omega_c]",
            "css_standard_tau[1/omega_c]",
            "css_standard_delta_b[omega_c]",
            "css_ratio_tau[1/omega_c]",
            "css_ratio_delta_b[omega_c]",
        ],
    );
    for &n in &r.n_list {
        let f = p.kappa0_sq() * (n * n) as f64;
        let (ts, ds) = minimize_log_scan(
            |t| ghz_standard_objective(t, f, n, &p, r.t_total),
            GHZ_TAU_RANGE.0,
            GHZ_TAU_RANGE.1,
        )?;
        let (tr, dr) = minimize_log_scan(
            |t| ghz_ratio_objective(t, f, n, &p, r.t_total),
            GHZ_TAU_RANGE.0,
            GHZ_TAU_RANGE.1,
        )?;
        let (css_r, css_s) = css_numeric_optimum(n, &p, r.t_total)?;
        scaling.push(vec![
            n.into(),
            ts.into(),
            ds.into(),
            tr.into(),
            dr.into(),
            css_s.tau_opt.into(),
            css_s.delta_b_opt.into(),
            css_r.tau_opt.into(),
            css_r.delta_b_opt.into(),
        ]);
    }

    let n = r.n;
    let f = p.kappa0_sq() * (n * n) as f64;
    let mut inset = Table::new(
        "collective_tau_scan",
        &[
            "tau[1/omega_c]",
            "ghz_standard_delta_b[omega_c]",
            "ghz_ratio_delta_b[omega_c]",
            "css_standard_delta_b[omega_c]",
            "css_ratio_delta_b[omega_c]",
        ],
    );
    for tau in geometric(r.tau_range[0], r.tau_range[1], r.tau_points) {
        inset.push(vec![
            tau.into(),
            ghz_standard_objective(tau, f, n, &p, r.t_total).into(),
            ghz_ratio_objective(tau, f, n, &p, r.t_total).into(),
            css_delta_b(tau, n, &p, r.t_total, false),
            css_delta_b(tau, n, &p, r.t_total, true),
        ]);
    }
    Ok(vec![scaling, inset])
}

fn family(state: StateChoice) -> StateFamily {
    match state {
        StateChoice::Ghz => StateFamily::Ghz,
        StateChoice::Oat => StateFamily::Oat,
        StateChoice::Css => StateFamily::Css,
    }
}

const RECORD_HEADER: [&str; 8] = [
    "s",
    "family",
    "method",
    "n",
    "x0_opt[lattice]",
    "tau_opt[1/omega_c]",
    "delta_b_opt[omega_c]",
    "delta_b_log_normalized",
];

const FIT_HEADER: [&str; 8] = [
    "s",
    "family",
    "method",
    "fitted_quantity",
    "exponent",
    "prefactor",
    "r_squared",
    "n_range",
];

fn record_row(s: f64, fam: StateFamily, rec: &OptimumRecord) -> Vec<Cell> {
    let normalized = match fam {
        StateFamily::Ghz => ghz_log_normalized(rec).into(),
        _ => Cell::Na,
    };
    let x0 = match fam {
        StateFamily::Css => Cell::Na,
        _ => rec.x0_opt.into(),
    };
    vec![
        s.into(),
        fam.as_str().into(),
        rec.method.as_str().into(),
        rec.n.into(),
        x0,
        rec.tau_opt.into(),
        rec.delta_b_opt.into(),
        normalized,
    ]
}

fn fit_row(s: f64, fam: StateFamily, method: SolveMethod, fit: &ScalingFit) -> Vec<Cell> {
    let quantity = match fam {
        StateFamily::Ghz => "delta_b_log_normalized",
        _ => "delta_b_opt",
    };
    vec![
        s.into(),
        fam.as_str().into(),
        method.as_str().into(),
        quantity.into(),
        fit.exponent.into(),
        fit.prefactor.into(),
        fit.r_squared.into(),
        format!("{}-{}", fit.window.0, fit.window.1).as_str().into(),
    ]
}

/// Closed-form optimum for one N, when the family has one (cubic spectrum only).
fn analytic_record(fam: StateFamily, n: usize, p: &NoiseParams, t_total: f64) -> Option<OptimumRecord> {
    if p.s() != 3.0 {
        return None;
    }
    match fam {
        StateFamily::Ghz => ghz_analytic_optimum(n, p, t_total).ok(),
        StateFamily::Oat => {
            let x0 = oat_x0_analytic(n).ok()?;
            let c = expansion_coefficients(n, x0, p).ok()?;
            Some(OptimumRecord {
                n,
                x0_opt: x0,
                tau_opt: oat_optimal_time(&c, p.omega_c()).ok()?,
                delta_b_opt: oat_optimal_uncertainty(&c, p, t_total).ok()?,
                method: SolveMethod::Analytic,
            })
        }
        StateFamily::Css => None,
    }
}

/// Numeric sweep plus, where available, the closed-form sweep and its fit.
fn scaling_tables(r: &Resolved, s_values: &[f64]) -> Result<(Table, Table), CliError> {
    let fam = family(r.state);
    let mut records = Table::new("lattice_records", &RECORD_HEADER);
    let mut fits = Table::new("lattice_fits", &FIT_HEADER);
    for &s in s_values {
        let p = r.noise_with(r.alpha, s)?;
        let sweep = sweep_and_fit(fam, &r.n_list, &p, r.t_total)?;
        for rec in &sweep.records {
            records.push(record_row(s, fam, rec));
        }
        fits.push(fit_row(s, fam, SolveMethod::Numeric, &sweep.fit));
        let analytic: Vec<OptimumRecord> = r
            .n_list
            .iter()
            .filter_map(|&n| analytic_record(fam, n, &p, r.t_total))
            .collect();
        for rec in &analytic {
            records.push(record_row(s, fam, rec));
        }
        if analytic.len() >= 2 {
            let ns: Vec<usize> = analytic.iter().map(|a| a.n).collect();
            let values: Vec<f64> = analytic
                .iter()
                .map(|a| match fam {
                    StateFamily::Ghz => ghz_log_normalized(a),
                    _ => a.delta_b_opt,
                })
                .collect();
            fits.push(fit_row(s, fam, SolveMethod::Analytic, &fit_power_law(&ns, &values)?));
        }
    }
    Ok((records, fits))
}

fn lattice_scaling(r: &Resolved) -> Result<Vec<Table>, CliError> {
    let (records, fits) = scaling_tables(r, &[r.s])?;
    Ok(vec![records, fits])
}

fn ohmicity(r: &Resolved) -> Result<Vec<Table>, CliError> {
    let (mut records, mut fits) = scaling_tables(r, &r.s_list)?;
    records.name = "ohmicity_records".into();
    fits.name = "ohmicity_fits".into();
    Ok(vec![records, fits])
}

fn spatial_function(r: &Resolved) -> Result<Vec<Table>, CliError> {
    let p = r.noise()?;
    let closed_form = r.s == 3.0;
    let mut curve = Table::new(
        "spatial_function",
        &["x0[lattice]", "f_direct", "f_polygamma", "f_small_spacing"],
    );
    for x0 in linear(r.x0_range[0], r.x0_range[1], r.x0_points) {
        curve.push(vec![
            x0.into(),
            Cell::from_result(f_n_direct(r.n, x0, &p)),
            Cell::from_result(f_n_polygamma(r.n, x0, &p)),
            if closed_form {
                Cell::from_result(f_n_analytic(r.n, x0).map(|v| v * p.kappa0_sq()))
            } else {
                Cell::Na
            },
        ]);
    }
    let mut optimum = Table::new(
        "spatial_optimum",
        &[
            "n",
            "x0_numeric[lattice]",
            "x0_closed_form[lattice]",
            "x0_lambert[lattice]",
        ],
    );
    for &n in &r.n_list {
        let (x0, _) = minimize_log_scan(
            |x| f_n_direct(n, x, &p).unwrap_or(f64::INFINITY),
            GHZ_X0_RANGE.0,
            GHZ_X0_RANGE.1,
        )?;
        let (an, lw) = if closed_form {
            (
                Cell::from_result(ghz_x0_analytic(n)),
                Cell::from_result(ghz_x0_lambert(n)),
            )
        } else {
            (Cell::Na, Cell::Na)
        };
        optimum.push(vec![n.into(), x0.into(), an, lw]);
    }
    Ok(vec![curve, optimum])
}

fn oat_spacing(r: &Resolved) -> Result<Vec<Table>, CliError> {
    let p = r.noise()?;
    let closed_form = r.s == 3.0;
    let mut t = Table::new(
        "oat_spacing",
        &[
            "n",
            "x0_numeric[lattice]",
            "tau_opt[1/omega_c]",
            "delta_b_opt[omega_c]",
            "x0_closed_form[lattice]",
            "x0_a2_min[lattice]",
        ],
    );
    for &n in &r.n_list {
        let rec = oat_numeric_optimum(n, &p, r.t_total)?;
        let a2_min = minimize_log_scan(
            |x| expansion_coefficients(n, x, &p).map_or(f64::INFINITY, |c| c.a2),
            OAT_X0_RANGE.0,
            OAT_X0_RANGE.1,
        )
        .ok()
        .map(|m| m.0);
        t.push(vec![
            n.into(),
            rec.x0_opt.into(),
            rec.tau_opt.into(),
            rec.delta_b_opt.into(),
            if closed_form {
                Cell::from_result(oat_x0_analytic(n))
            } else {
                Cell::Na
            },
            a2_min.into(),
        ]);
    }
    Ok(vec![t])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse, resolve};

    fn run(text: &str) -> Vec<Table> {
        let r = resolve(&parse(text).unwrap()).unwrap();
        r.scenario.run(&r).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_name(s.name()), Some(s));
        }
        assert_eq!(Scenario::from_name("fig8"), None);
    }

    #[test]
    fn noiseless_bias_table_tracks_heisenberg_limit() {
        let t = run("scenario = \"fig1-bias\"\n[noise]\nalpha_list = [0.0]\n[time]\npoints = 9");
        let t = &t[0];
        assert_eq!(t.rows.len(), 9);
        let mid = &t.rows[4];
        let (db, hl) = (mid[6].as_f64().unwrap(), mid[7].as_f64().unwrap());
        assert!((db / hl - 1.0).abs() < 0.03, "{db} vs {hl}");
    }

    #[test]
    fn ratio_optimum_matches_closed_form() {
        let base =
            "scenario = \"fig2-ratio-collective\"\n[time]\npoints = 3\n[measurement]\nshots = 0\nnu_list = [30]\n";
        let t = run(base);
        let opt = &t[1].rows[0];
        let (closed, numeric) = (opt[1].as_f64().unwrap(), opt[2].as_f64().unwrap());
        assert!((numeric / closed - 1.0).abs() < 1e-3, "{numeric} vs {closed}");
        assert!((closed - 0.0016282).abs() < 1e-6, "{closed}");
        assert!(t[0].rows.iter().all(|r| r[5] == Cell::Na));
        let quadratic = run(&format!("{base}[noise]\ns = 2.0\n"));
        let tau = quadratic[1].rows[0][2].as_f64().unwrap();
        assert!((tau - 0.0028).abs() < 5e-5, "{tau}");
    }

    #[test]
    fn non_cubic_spectrum_leaves_closed_forms_undefined() {
        let t = run("scenario = \"fig6-spatial-function\"\n[noise]\ns = 2.0\n[geometry]\nn_list = [50]\npoints = 3");
        assert!(t[0].rows.iter().all(|r| r[3] == Cell::Na));
        assert_eq!(t[1].rows[0][2], Cell::Na);
    }
}
