//! One-axis-twisted (OAT) probe states: angles, exact initial moments, short-time
//! moments under lattice dephasing, and the quartic-in-time uncertainty expansion.

use crate::error::{check_positive, Error, Result};
use crate::estimators::MomentSet;
use crate::noise::{delta1, LatticeGeometry, NoiseParams};
use crate::specfun::gamma;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Twisting angle `theta` and rotation angle `beta`, both in `[0, 2 pi]`.
///
/// The state is `exp(-i beta Jx) exp(-i theta Jz^2 / 2) |+>^N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OatAngles {
    theta: f64,
    beta: f64,
}

impl OatAngles {
    pub fn new(theta: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("theta", theta), ("beta", beta)] {
            if !(0.0..=TAU).contains(&v) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "angle must lie in [0, 2 pi]",
                });
            }
        }
        Ok(Self { theta, beta })
    }

    /// Untwisted, unrotated coherent spin state.
    pub fn coherent() -> Self {
        Self { theta: 0.0, beta: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Large-N optimal squeezing angles:
/// `theta = 12^(1/6) 2^(2/3) N^(-2/3)`, `beta = pi/2 - 3^(-1/6) N^(-1/3) - 3^(1/6) N^(-2/3) / 2`.
pub fn optimal_angles(n: usize) -> Result<OatAngles> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: n as f64,
            reason: "squeezing needs at least two qubits",
        });
    }
    let nf = n as f64;
    let theta = 12f64.powf(1.0 / 6.0) * 2f64.powf(2.0 / 3.0) * nf.powf(-2.0 / 3.0);
    let beta =
        FRAC_PI_2 - 3f64.powf(-1.0 / 6.0) * nf.powf(-1.0 / 3.0) - 0.5 * 3f64.powf(1.0 / 6.0) * nf.powf(-2.0 / 3.0);
    OatAngles::new(theta, beta.clamp(0.0, TAU))
}

/// Noise-free moments of the OAT state, exact at any N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialMoments {
    /// Mean spin length `<Jx> = (N/2) cos^(N-1)(theta/2)`.
    pub q0: f64,
    pub jx2: f64,
    pub jy2: f64,
    pub jz2: f64,
    /// Pair-correlation weights entering `<Jx^2> + <Jy^2>` and `<Jx^2> - <Jy^2>`.
    pub c1: f64,
    pub c2: f64,
}

pub fn initial_moments(n: usize, angles: OatAngles) -> InitialMoments {
    let nf = n as f64;
    let (th, be) = (angles.theta, angles.beta);
    let half = 0.5 * th;
    let pairs = nf * (nf - 1.0);
    let q0 = 0.5 * nf * half.cos().powi(n as i32 - 1);
    let (jx2_0, jy2_0, anti) = if n >= 2 {
        let twist = th.cos().powi(n as i32 - 2);
        (
            0.25 * nf + pairs / 8.0 * (1.0 + twist),
            0.25 * nf + pairs / 8.0 * (1.0 - twist),
            0.5 * pairs * half.sin() * half.cos().powi(n as i32 - 2),
        )
    } else {
        (0.25, 0.25, 0.0)
    };
    let jz2 = 0.25 * nf;
    let (sb, cb) = be.sin_cos();
    let jy2 = cb * cb * jy2_0 + sb * sb * jz2 - sb * cb * anti;
    let (c1, c2) = if n >= 2 {
        ((jx2_0 + jy2 - 0.5 * nf) / pairs, (jx2_0 - jy2) / pairs)
    } else {
        (0.0, 0.0)
    };
    InitialMoments {
        q0,
        jx2: jx2_0,
        jy2,
        jz2,
        c1,
        c2,
    }
}

/// Lattice sums `G+-(x0) = sum_{j=1}^{N-1} (N-j) exp(+-2 E delta1(j x0))` with `E = kappa0^2 (omega_c tau)^2`.
pub fn lattice_sums(tau: f64, geom: &LatticeGeometry, p: &NoiseParams) -> (f64, f64) {
    let e = p.single_decay(tau);
    let n = geom.n_qubits();
    (1..n).fold((0.0, 0.0), |(gp, gm), j| {
        let w = (n - j) as f64;
        let d = delta1(p.correlator_argument(j, geom.spacing()), p.s());
        (gp + w * (2.0 * e * d).exp(), gm + w * (-2.0 * e * d).exp())
    })
}

/// Cumulant-expansion moments after free evolution for `tau` with field `b`,
/// keeping only the classical (decay) part of the noise.
pub fn moments_short_time(
    tau: f64,
    geom: &LatticeGeometry,
    p: &NoiseParams,
    angles: OatAngles,
    b: f64,
) -> Result<MomentSet> {
    check_positive("tau", tau).or_else(|e| if tau == 0.0 { Ok(0.0) } else { Err(e) })?;
    let n = geom.n_qubits();
    let init = initial_moments(n, angles);
    let e = p.single_decay(tau);
    let phi = b * tau;
    let (gp, gm) = lattice_sums(tau, geom, p);
    let env = (-e).exp();
    let env2 = (-2.0 * e).exp();
    let sym = init.c1 * gp;
    let anti = (2.0 * phi).cos() * init.c2 * gm;
    let quarter = 0.25 * n as f64;
    Ok(MomentSet {
        jx: env * init.q0 * phi.cos(),
        jy: env * init.q0 * phi.sin(),
        jx2: quarter + env2 * (sym + anti),
        jy2: quarter + env2 * (sym - anti),
    })
}

/// Coefficients of `Var(b) ~ [a0 + a2 (w tau)^2 + a4 (w tau)^4] / (T tau h0^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCoefficients {
    pub h0: f64,
    pub a0: f64,
    pub a2: f64,
    pub a4: f64,
}

/// Large-N closed forms of the expansion coefficients at lattice spacing `x0`.
pub fn expansion_coefficients(n: usize, x0: f64, p: &NoiseParams) -> Result<ExpansionCoefficients> {
    check_positive("x0", x0)?;
    let nf = n as f64;
    let s = p.s();
    let g1 = gamma(s + 1.0)?;
    let g3 = gamma(s + 3.0)?;
    let (n13, n23) = (nf.cbrt(), nf.powf(2.0 / 3.0));
    let (c13, c23) = (3f64.cbrt(), 3f64.powf(2.0 / 3.0));
    let v = PI / x0;
    let damp = (-2.0 * v).exp();
    let a0 = c23 / 8.0 * n13;
    let a2 = 0.5
        * g1
        * (1.0 / (6.0 * x0 * x0)
            + 4.0 * v.powi(4) * damp * (n13 / c13 - n23 / c23 + nf / 3.0)
            + 0.5 * (c13 * n23 - c23 * n13));
    let a4 = g3 * (n13 / (16.0 * c13) - n23 / (16.0 * c23)) + 0.5 * nf * g1 * g1 - g3 / (480.0 * x0 * x0)
        + g3 * damp * v.powi(6) * (-n13 / (30.0 * c13) + n23 / (30.0 * c23) + nf / 90.0);
    Ok(ExpansionCoefficients {
        h0: 0.5 * nf,
        a0,
        a2,
        a4,
    })
}

/// Squared ratio-estimator uncertainty from the quartic expansion.
pub fn oat_uncertainty_expansion(tau: f64, c: &ExpansionCoefficients, p: &NoiseParams, t_total: f64) -> Result<f64> {
    check_positive("tau", tau)?;
    check_positive("t_total", t_total)?;
    let w2 = (p.omega_c() * tau).powi(2);
    Ok((c.a0 + c.a2 * w2 + c.a4 * w2 * w2) / (t_total * tau * c.h0 * c.h0))
}
