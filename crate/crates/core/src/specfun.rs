//! Special functions: Gamma, complex polygamma, Lambert W and Chebyshev polynomials.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Complex number type used across the crate.
pub type ComplexValue = Complex64;

/// Polygamma arguments are shifted upward until `Re(z)` reaches this value
/// before the asymptotic series is applied.
pub const POLYGAMMA_SHIFT_THRESHOLD: f64 = 10.0;

/// Iteration cap for the Halley solver in [`lambert_w`].
pub const LAMBERT_W_MAX_ITER: usize = 50;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// B_2, B_4, ..., B_20
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Euler Gamma function for positive real arguments (Lanczos, g = 7).
pub fn gamma(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain {
            op: "gamma",
            value: x,
            expected: "x > 0",
        });
    }
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        let pi = std::f64::consts::PI;
        return Ok(pi / ((pi * x).sin() * lanczos(1.0 - x)));
    }
    Ok(lanczos(x))
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    // split the power so large arguments do not overflow early
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * std::f64::consts::PI).sqrt() * half * half * (-t).exp() * a
}

/// Polygamma function of order `m` at complex `z`.
///
/// Shifts `z` by the recurrence until `Re(z) >= POLYGAMMA_SHIFT_THRESHOLD`,
/// then sums the Bernoulli asymptotic series.
pub fn polygamma(m: u32, z: ComplexValue) -> Result<ComplexValue> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.re < -1.0e7 {
        return Err(Error::Domain {
            op: "polygamma",
            value: z.re,
            expected: "finite z with Re(z) >= -1e7",
        });
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Pole {
            op: "polygamma",
            re: z.re,
            im: z.im,
        });
    }
    let m_fact = factorial(m);
    let sign_m = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    // psi^(m)(z) = psi^(m)(z+1) - (-1)^m m! z^(-m-1)
    while z.re < POLYGAMMA_SHIFT_THRESHOLD {
        shift += z.powi(-(m as i32) - 1);
        z += 1.0;
    }
    let tail = asymptotic_polygamma(m, z, m_fact);
    Ok(tail - sign_m * m_fact * shift)
}

fn asymptotic_polygamma(m: u32, z: Complex64, m_fact: f64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    if m == 0 {
        let mut sum = z.ln() - 0.5 * inv;
        let mut pow = inv2;
        for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
            let term = pow * (b / (2.0 * (k + 1) as f64));
            sum -= term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
            pow *= inv2;
        }
        return sum;
    }
    let mf = m as f64;
    let inv_m = inv.powi(m as i32);
    // (m-1)!/z^m + m!/(2 z^(m+1))
    let mut sum = inv_m * (m_fact / mf) + inv_m * inv * (0.5 * m_fact);
    let mut pow = inv_m * inv2;
    // ratio (2k+m-1)!/(2k)! built incrementally
    let mut ratio = m_fact / mf * (mf + 1.0) * mf / 2.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = pow * (b * ratio);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
        let kk = 2.0 * (k + 1) as f64;
        ratio *= (kk + mf) * (kk + mf + 1.0) / ((kk + 1.0) * (kk + 2.0));
        pow *= inv2;
    }
    if m.is_multiple_of(2) {
        -sum
    } else {
        sum
    }
}

fn factorial(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

/// Branch selector for [`lambert_w`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WBranch {
    /// W_0, defined for x >= -1/e.
    Principal,
    /// W_{-1}, defined for -1/e <= x < 0.
    Lower,
}

/// Real Lambert W function on the requested branch, solved by Halley iteration.
pub fn lambert_w(branch: WBranch, x: f64) -> Result<f64> {
    const INV_E: f64 = 0.367_879_441_171_442_33;
    let out_of_domain = |expected| Error::Domain {
        op: "lambert_w",
        value: x,
        expected,
    };
    if !x.is_finite() {
        return Err(out_of_domain("finite x"));
    }
    let lower = branch == WBranch::Lower;
    if x < -INV_E * (1.0 + 1e-15) {
        return Err(out_of_domain("x >= -1/e"));
    }
    if lower && x >= 0.0 {
        return Err(out_of_domain("-1/e <= x < 0 on the lower branch"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let p2 = 2.0 * (std::f64::consts::E * x + 1.0);
    // arguments within rounding of -1/e are the branch point itself
    if p2 <= 1e-15 {
        return Ok(-1.0);
    }
    let p = p2.sqrt();
    let branch_series = |q: f64| -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q.powi(3) - 43.0 / 540.0 * q.powi(4);
    let mut w = if lower {
        if x < -0.25 {
            branch_series(-p)
        } else {
            let l1 = (-x).ln();
            let l2 = (-l1).ln();
            l1 - l2 + l2 / l1
        }
    } else if x < 0.0 {
        branch_series(p)
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..LAMBERT_W_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if dw.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            return Ok(w);
        }
    }
    Err(Error::NoConvergence {
        op: "lambert_w",
        iterations: LAMBERT_W_MAX_ITER,
    })
}

/// Chebyshev polynomial of the first kind, T_n(x), by three-term recurrence.
pub fn chebyshev_t(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..n {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
