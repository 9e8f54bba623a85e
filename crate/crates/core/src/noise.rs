//! Spin-boson dephasing model on a 1D lattice.
//!
//! Pairwise decay (`kappa`) and phase (`xi`) coefficients are exposed in the
//! "pair" normalization: [`gamma_pair`] on the all-up/all-down strings returns
//! `(omega_c t)^2 F_N(x0)` in the short-time regime, and a single qubit's
//! coherence decays as `exp(-kappa0^2 (omega_c t)^2)`. Raw overlap integrals
//! ([`kappa_quadrature`], [`xi_quadrature`]) are `1 / PAIR_SCALE` of these.

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::specfun::{chebyshev_t, gamma};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Upper integration limit in units of the cutoff frequency.
pub const QUADRATURE_CUTOFF_MULTIPLE: f64 = 40.0;
/// Absolute tolerance of the overlap-integral quadrature.
pub const QUADRATURE_ABS_TOL: f64 = 1e-10;
/// Short-time limit of `kappa_quadrature(t, 0) / (kappa0^2 (omega_c t)^2)`.
pub const QUADRATURE_KAPPA_NORM: f64 = 1.0 / 16.0;
/// Short-time limit of `xi_quadrature(t, 0) / (xi0^3 (omega_c t)^3)`.
pub const QUADRATURE_XI_NORM: f64 = 1.0 / 4.0;
/// Factor converting overlap integrals to pair coefficients.
pub const PAIR_SCALE: f64 = 4.0;

const QUADRATURE_REL_TOL: f64 = 1e-9;
const QUADRATURE_MAX_INTERVALS: usize = 4000;

/// Spectral-density parameters: coupling `alpha`, Ohmicity `s`, cutoff
/// `omega_c` and bath propagation speed `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    alpha: f64,
    s: f64,
    omega_c: f64,
    v: f64,
    kappa0_sq: f64,
    xi0_cubed: f64,
}

impl NoiseParams {
    pub fn new(alpha: f64, s: f64, omega_c: f64) -> Result<Self> {
        Self::with_speed(alpha, s, omega_c, 1.0)
    }

    pub fn with_speed(alpha: f64, s: f64, omega_c: f64, v: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_non_negative("s", s)?;
        check_positive("omega_c", omega_c)?;
        check_positive("v", v)?;
        Ok(Self {
            alpha,
            s,
            omega_c,
            v,
            kappa0_sq: alpha * gamma(s + 1.0)?,
            xi0_cubed: alpha / 6.0 * gamma(s + 2.0)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// `alpha * Gamma(s + 1)`.
    pub fn kappa0_sq(&self) -> f64 {
        self.kappa0_sq
    }

    /// `(alpha / 6) * Gamma(s + 2)`.
    pub fn xi0_cubed(&self) -> f64 {
        self.xi0_cubed
    }

    /// Single-qubit short-time decay exponent `kappa0^2 (omega_c t)^2`.
    pub fn single_decay(&self, t: f64) -> f64 {
        let wt = self.omega_c * t;
        self.kappa0_sq * wt * wt
    }

    /// Dimensionless correlator argument `omega_c * j * x0 / v` for lattice distance `j`.
    pub fn correlator_argument(&self, j: usize, spacing: f64) -> f64 {
        self.omega_c * j as f64 * spacing / self.v
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self::new(1.0, 3.0, 1.0).expect("default noise parameters are valid")
    }
}

/// Regular 1D lattice: qubit `n` sits at `n * spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeGeometry {
    n_qubits: usize,
    spacing: f64,
}

impl LatticeGeometry {
    pub fn new(n_qubits: usize, spacing: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter {
                name: "n_qubits",
                value: 0.0,
                reason: "need at least one qubit",
            });
        }
        check_non_negative("spacing", spacing)?;
        Ok(Self { n_qubits, spacing })
    }

    /// Zero spacing: every qubit sees the same bath mode.
    pub fn collective(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, 0.0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Bath propagation delay between qubits `n` and `m`.
    pub fn transit_time(&self, n: usize, m: usize, v: f64) -> f64 {
        n.abs_diff(m) as f64 * self.spacing / v
    }
}

/// Pairwise decay and phase coefficients at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicCoefficients {
    time: f64,
    n: usize,
    kappa: Vec<f64>,
    xi: Vec<f64>,
}

impl DynamicCoefficients {
    /// All-zero coefficients (noiseless evolution).
    pub fn zeros(n: usize, time: f64) -> Self {
        Self {
            time,
            n,
            kappa: vec![0.0; n * n],
            xi: vec![0.0; n * n],
        }
    }

    /// Translation-invariant coefficients; `profile[j]` is the value at distance `j`.
    pub fn from_profiles(time: f64, kappa_profile: &[f64], xi_profile: &[f64]) -> Result<Self> {
        let n = kappa_profile.len();
        if xi_profile.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: xi_profile.len(),
            });
        }
        let mut out = Self::zeros(n, time);
        for a in 0..n {
            for b in 0..n {
                let j = a.abs_diff(b);
                out.kappa[a * n + b] = kappa_profile[j];
                out.xi[a * n + b] = xi_profile[j];
            }
        }
        out.check_finite()?;
        Ok(out)
    }

    /// Every pair shares the same coefficients.
    pub fn collective(n: usize, time: f64, kappa: f64, xi: f64) -> Result<Self> {
        Self::from_profiles(time, &vec![kappa; n], &vec![xi; n])
    }

    /// Build from full row-major matrices; both must be symmetric.
    pub fn from_matrices(time: f64, n: usize, kappa: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        for m in [&kappa, &xi] {
            if m.len() != n * n {
                return Err(Error::LengthMismatch {
                    expected: n * n,
                    found: m.len(),
                });
            }
            for a in 0..n {
                for b in 0..a {
                    if m[a * n + b] != m[b * n + a] {
                        return Err(Error::InvalidParameter {
                            name: "coefficient matrix",
                            value: m[a * n + b],
                            reason: "must be symmetric",
                        });
                    }
                }
            }
        }
        let out = Self { time, n, kappa, xi };
        out.check_finite()?;
        Ok(out)
    }

    fn check_finite(&self) -> Result<()> {
        if let Some(v) = self.kappa.iter().chain(&self.xi).find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "coefficient",
                value: *v,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn kappa(&self, n: usize, m: usize) -> f64 {
        self.kappa[n * self.n + m]
    }

    pub fn xi(&self, n: usize, m: usize) -> f64 {
        self.xi[n * self.n + m]
    }

    pub fn kappa_matrix(&self) -> &[f64] {
        &self.kappa
    }

    pub fn xi_matrix(&self) -> &[f64] {
        &self.xi
    }

    /// True when any phase coefficient is nonzero.
    pub fn has_phase(&self) -> bool {
        self.xi.iter().any(|&v| v != 0.0)
    }

    /// Same decay, phase coefficients dropped (classical noise only).
    pub fn without_phase(&self) -> Self {
        Self {
            xi: vec![0.0; self.xi.len()],
            ..self.clone()
        }
    }
}

/// Computational-basis string of `sigma_z` eigenvalues (+1 up, -1 down).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisString {
    signs: Vec<i8>,
}

impl BasisString {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter {
                name: "sign",
                value: bad as f64,
                reason: "entries must be +1 or -1",
            });
        }
        Ok(Self { signs })
    }

    /// Bit `k` of `index` set means qubit `k` is down.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self {
            signs: (0..n).map(|k| if (index >> k) & 1 == 1 { -1 } else { 1 }).collect(),
        }
    }

    pub fn all_up(n: usize) -> Self {
        Self { signs: vec![1; n] }
    }

    pub fn all_down(n: usize) -> Self {
        Self { signs: vec![-1; n] }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

/// `J(omega) = alpha omega_c (omega/omega_c)^s exp(-omega/omega_c)`.
pub fn spectral_density(omega: f64, p: &NoiseParams) -> f64 {
    let r = omega / p.omega_c;
    p.alpha * p.omega_c * r.powf(p.s) * (-r).exp()
}

/// Classical spectrum `4 pi J(|omega|) cos(omega t_nm)`.
pub fn spectrum_plus(omega: f64, t_nm: f64, p: &NoiseParams) -> f64 {
    4.0 * PI * spectral_density(omega.abs(), p) * (omega * t_nm).cos()
}

/// Quantum spectrum `S+ sgn(omega)`.
pub fn spectrum_minus(omega: f64, t_nm: f64, p: &NoiseParams) -> f64 {
    if omega == 0.0 {
        0.0
    } else {
        spectrum_plus(omega, t_nm, p) * omega.signum()
    }
}

/// Overlap integral `(1/32pi) int sin^2(omega t/2)/omega^2 S+(omega) domega`.
pub fn kappa_quadrature(t: f64, t_nm: f64, p: &NoiseParams) -> Result<f64> {
    check_non_negative("t", t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    // the integrand is even in omega; fold onto [0, cutoff]
    let f = |w: f64| {
        let x = w * t;
        let filter = if x < 1e-4 {
            0.25 * t * t * (1.0 - x * x / 12.0)
        } else {
            let s = (0.5 * x).sin();
            s * s / (w * w)
        };
        0.25 * filter * spectral_density(w, p) * (w * t_nm).cos()
    };
    adaptive_gk15(f, 0.0, QUADRATURE_CUTOFF_MULTIPLE * p.omega_c, "kappa_quadrature")
}

/// Overlap integral `(1/32pi) int (omega t - sin omega t)/omega^2 S-(omega) domega`.
pub fn xi_quadrature(t: f64, t_nm: f64, p: &NoiseParams) -> Result<f64> {
    check_non_negative("t", t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let f = |w: f64| {
        let x = w * t;
        let filter = if x < 0.1 {
            let x2 = x * x;
            t * t * x * (1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0 - x2 * x2 * x2 / 362_880.0)
        } else {
            (x - x.sin()) / (w * w)
        };
        0.25 * filter * spectral_density(w, p) * (w * t_nm).cos()
    };
    adaptive_gk15(f, 0.0, QUADRATURE_CUTOFF_MULTIPLE * p.omega_c, "xi_quadrature")
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn gk15_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    let mut abs_value = GK_WEIGHTS[7] * fc.abs();
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let (f1, f2) = (f(c - dx), f(c + dx));
        kronrod += GK_WEIGHTS[i] * (f1 + f2);
        abs_value += GK_WEIGHTS[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * (f1 + f2);
        }
    }
    Panel {
        a,
        b,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
        abs_value: abs_value * h.abs(),
    }
}

/// Globally adaptive Gauss-Kronrod 7-15 quadrature on `[a, b]`.
pub(crate) fn adaptive_gk15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, op: &'static str) -> Result<f64> {
    let mut panels = vec![gk15_panel(&f, a, b)];
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let abs_total: f64 = panels.iter().map(|p| p.abs_value).sum();
        let target = QUADRATURE_ABS_TOL
            .min(QUADRATURE_REL_TOL * total.abs())
            .max(1e-13 * abs_total);
        if !total.is_finite() {
            return Err(Error::NonFinite { op, at: vec![a, b] });
        }
        if err <= target {
            return Ok(total);
        }
        if panels.len() >= QUADRATURE_MAX_INTERVALS {
            return Err(Error::NoConvergence {
                op,
                iterations: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk15_panel(&f, p.a, mid));
        panels.push(gk15_panel(&f, mid, p.b));
    }
}

fn correlator(x: f64, order: f64) -> f64 {
    if order.fract() == 0.0 && order <= 64.0 {
        let u = 1.0 / (1.0 + x * x).sqrt();
        u.powi(order as i32) * chebyshev_t(order as u32, u)
    } else {
        (1.0 + x * x).powf(-0.5 * order) * (order * x.atan()).cos()
    }
}

/// Spatial decay correlator `(1+x^2)^(-(s+1)/2) cos((s+1) atan x)`.
pub fn delta1(x: f64, s: f64) -> f64 {
    correlator(x, s + 1.0)
}

/// Spatial phase correlator `(1+x^2)^(-(s+2)/2) cos((s+2) atan x)`.
pub fn delta2(x: f64, s: f64) -> f64 {
    correlator(x, s + 2.0)
}

/// Short-time pair coefficients:
/// `kappa = kappa0^2 (omega_c t)^2 delta1 / 4`, `xi = xi0^3 (omega_c t)^3 delta2`.
pub fn short_time_coefficients(t: f64, geom: &LatticeGeometry, p: &NoiseParams) -> DynamicCoefficients {
    let wt = p.omega_c * t;
    let k = PAIR_SCALE * QUADRATURE_KAPPA_NORM * p.kappa0_sq * wt * wt;
    let x = PAIR_SCALE * QUADRATURE_XI_NORM * p.xi0_cubed * wt * wt * wt;
    let n = geom.n_qubits;
    let args: Vec<f64> = (0..n).map(|j| p.correlator_argument(j, geom.spacing)).collect();
    let kp: Vec<f64> = args.iter().map(|&a| k * delta1(a, p.s)).collect();
    let xp: Vec<f64> = args.iter().map(|&a| x * delta2(a, p.s)).collect();
    DynamicCoefficients::from_profiles(t, &kp, &xp).unwrap_or_else(|_| DynamicCoefficients::zeros(n, t))
}

/// Pair coefficients from the overlap integrals (valid at any time).
pub fn quadrature_coefficients(t: f64, geom: &LatticeGeometry, p: &NoiseParams) -> Result<DynamicCoefficients> {
    let profiles: Vec<(f64, f64)> = (0..geom.n_qubits)
        .into_par_iter()
        .map(|j| {
            let t_nm = geom.transit_time(0, j, p.v);
            Ok((
                PAIR_SCALE * kappa_quadrature(t, t_nm, p)?,
                PAIR_SCALE * xi_quadrature(t, t_nm, p)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (kp, xp): (Vec<f64>, Vec<f64>) = profiles.into_iter().unzip();
    DynamicCoefficients::from_profiles(t, &kp, &xp)
}

fn check_lengths(a: &BasisString, b: &BasisString, coeffs: &DynamicCoefficients) -> Result<()> {
    for len in [a.len(), b.len()] {
        if len != coeffs.n {
            return Err(Error::LengthMismatch {
                expected: coeffs.n,
                found: len,
            });
        }
    }
    Ok(())
}

/// Decay exponent `sum_{n,m} (a_n - b_n)(a_m - b_m) kappa_nm`.
pub fn gamma_pair(a: &BasisString, b: &BasisString, coeffs: &DynamicCoefficients) -> Result<f64> {
    check_lengths(a, b, coeffs)?;
    let d: Vec<(usize, f64)> = a
        .signs
        .iter()
        .zip(&b.signs)
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(i, (x, y))| (i, (x - y) as f64))
        .collect();
    let mut sum = 0.0;
    for &(n, dn) in &d {
        for &(m, dm) in &d {
            sum += dn * dm * coeffs.kappa(n, m);
        }
    }
    Ok(sum)
}

/// Phase `sum_{n,m} (b_n b_m - a_n a_m) xi_nm`.
pub fn phi0_pair(a: &BasisString, b: &BasisString, coeffs: &DynamicCoefficients) -> Result<f64> {
    check_lengths(a, b, coeffs)?;
    let n = coeffs.n;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = (b.signs[i] * b.signs[j] - a.signs[i] * a.signs[j]) as f64;
            if w != 0.0 {
                sum += w * coeffs.xi(i, j);
            }
        }
    }
    Ok(sum)
}
