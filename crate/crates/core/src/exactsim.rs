//! Exact small-N oracle: pure-state preparation, element-wise dephasing
//! evolution of the full density matrix, and collective-spin expectation values.

use crate::error::{Error, Result};
use crate::estimators::MomentSet;
use crate::noise::DynamicCoefficients;
use crate::oat::OatAngles;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;

/// Largest register handled by the exact simulator.
pub const MAX_EXACT_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Initial states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind {
    /// `(|up...up> + |down...down>)/sqrt(2)`.
    Ghz,
    /// `(|up...up> + i|down...down>)/sqrt(2)`.
    GhzPrime,
    /// Every qubit in `|+>`.
    CssX,
    /// `exp(-i beta Jx) exp(-i (theta/2) Jz^2) |+>^N`.
    Oat(OatAngles),
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n_qubits",
            value: 0.0,
            reason: "need at least one qubit",
        });
    }
    if n > MAX_EXACT_QUBITS {
        return Err(Error::TooManyQubits {
            qubits: n,
            max: MAX_EXACT_QUBITS,
        });
    }
    Ok(())
}

/// `+1` if qubit `q` of basis index `k` is up, `-1` if down.
#[inline]
fn sign(k: usize, q: usize) -> f64 {
    1.0 - 2.0 * ((k >> q) & 1) as f64
}

/// Pure-state amplitudes in the z basis (bit `q` set = qubit `q` down).
pub fn state_vector(kind: StateKind, n: usize) -> Result<Vec<Complex64>> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut psi = vec![ZERO; dim];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        StateKind::Ghz => {
            psi[0] = Complex64::new(h, 0.0);
            psi[dim - 1] = Complex64::new(h, 0.0);
        }
        StateKind::GhzPrime => {
            psi[0] = Complex64::new(h, 0.0);
            psi[dim - 1] = Complex64::new(0.0, h);
        }
        StateKind::CssX => {
            let a = (dim as f64).sqrt().recip();
            psi.fill(Complex64::new(a, 0.0));
        }
        StateKind::Oat(angles) => {
            let a = (dim as f64).sqrt().recip();
            for (k, amp) in psi.iter_mut().enumerate() {
                let m = 0.5 * (n as f64 - 2.0 * k.count_ones() as f64);
                *amp = Complex64::from_polar(a, -0.5 * angles.theta() * m * m);
            }
            let (c, s) = ((0.5 * angles.beta()).cos(), (0.5 * angles.beta()).sin());
            for q in 0..n {
                let bit = 1usize << q;
                for k in (0..dim).filter(|k| k & bit == 0) {
                    let (up, down) = (psi[k], psi[k | bit]);
                    psi[k] = up * c - Complex64::i() * s * down;
                    psi[k | bit] = down * c - Complex64::i() * s * up;
                }
            }
        }
    }
    Ok(psi)
}

/// Dense `2^N x 2^N` density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|psi><psi|`; `psi` must be normalized.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let dim = psi.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidParameter {
                name: "state dimension",
                value: dim as f64,
                reason: "must be a power of two >= 2",
            });
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "state norm",
                value: norm,
                reason: "pure state must be normalized",
            });
        }
        let mut data = vec![ZERO; dim * dim];
        data.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
            if psi[i] != ZERO {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = psi[i] * psi[j].conj();
                }
            }
        });
        Ok(Self { n_qubits, dim, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest deviation `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..=i {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// Pure-state density matrix for `kind` on `n` qubits.
pub fn build_state(kind: StateKind, n: usize) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(&state_vector(kind, n)?)
}

/// Applies the dephasing map at time `t` with precession frequency `b`:
/// element `(a, c)` is multiplied by
/// `exp(i b t sum(c_n - a_n)/2) exp(-gamma(a, c) + i phi0(a, c))`.
pub fn evolve(rho0: &DensityMatrix, b: f64, t: f64, coeffs: &DynamicCoefficients) -> Result<DensityMatrix> {
    let n = rho0.n_qubits;
    if coeffs.n_qubits() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: coeffs.n_qubits(),
        });
    }
    let dim = rho0.dim;
    let kappa = coeffs.kappa_matrix();
    let xi = coeffs.xi_matrix();
    let with_phase = coeffs.has_phase();
    let bt = b * t;
    let mut data = rho0.data.clone();
    data.par_chunks_mut(dim).enumerate().for_each(|(a, row)| {
        let mut flipped = Vec::with_capacity(n);
        for (c, v) in row.iter_mut().enumerate() {
            if *v == ZERO || a == c {
                continue;
            }
            let diff = a ^ c;
            flipped.clear();
            flipped.extend((0..n).filter(|&q| (diff >> q) & 1 == 1));
            // only flipped qubits carry (a_n - c_n) = 2 a_n
            let mut gamma = 0.0;
            let mut precession = 0.0;
            for &p in &flipped {
                let sp = sign(a, p);
                precession += sp;
                for &q in &flipped {
                    gamma += sp * sign(a, q) * kappa[p * n + q];
                }
            }
            gamma *= 4.0;
            // pairs with exactly one flipped qubit contribute -2 a_n a_m, twice
            let mut phi0 = 0.0;
            if with_phase {
                for &p in &flipped {
                    let sp = sign(a, p);
                    for q in (0..n).filter(|q| (diff >> q) & 1 == 0) {
                        phi0 -= 4.0 * sp * sign(a, q) * xi[p * n + q];
                    }
                }
            }
            *v *= Complex64::from_polar((-gamma).exp(), phi0 - bt * precession);
        }
    });
    Ok(DensityMatrix { n_qubits: n, dim, data })
}

/// Sparse operator in the z basis, stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    fn from_rows(dim: usize, rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `<row|O|col>`.
    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.rows[row]
            .iter()
            .find(|(c, _)| *c == col)
            .map(|(_, v)| *v)
            .unwrap_or(ZERO)
    }

    /// Matrix product `self * other`.
    pub fn product(&self, other: &SparseOp) -> SparseOp {
        let rows = (0..self.dim)
            .map(|i| {
                let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
                for &(j, a) in &self.rows[i] {
                    for &(k, b) in &other.rows[j] {
                        *acc.entry(k).or_insert(ZERO) += a * b;
                    }
                }
                acc.into_iter().filter(|(_, v)| *v != ZERO).collect()
            })
            .collect();
        SparseOp::from_rows(self.dim, rows)
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((v - self.element(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `Tr(rho O)`.
    pub fn trace_with(&self, rho: &DensityMatrix) -> Result<Complex64> {
        if rho.dim != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                found: rho.dim,
            });
        }
        Ok(self
            .rows
            .par_iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|&(j, v)| v * rho.get(j, i)).sum::<Complex64>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum())
    }
}

/// Collective spin operators `J_u = (1/2) sum_n sigma_u^n` and their squares.
#[derive(Debug, Clone)]
pub struct CollectiveSpinOps {
    pub jx: SparseOp,
    pub jy: SparseOp,
    pub jz: SparseOp,
    pub jz2: SparseOp,
    pub jx2: SparseOp,
    pub jy2: SparseOp,
}

impl CollectiveSpinOps {
    pub fn new(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        let mut jx = Vec::with_capacity(dim);
        let mut jy = Vec::with_capacity(dim);
        let mut jz = Vec::with_capacity(dim);
        let mut jz2 = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut rx = Vec::with_capacity(n);
            let mut ry = Vec::with_capacity(n);
            for q in 0..n {
                let j = i ^ (1 << q);
                rx.push((j, Complex64::new(0.5, 0.0)));
                // sigma_y |up> = i|down>, sigma_y |down> = -i|up>
                ry.push((j, Complex64::new(0.0, -0.5 * sign(i, q))));
            }
            rx.sort_by_key(|e| e.0);
            ry.sort_by_key(|e| e.0);
            jx.push(rx);
            jy.push(ry);
            let m = 0.5 * (0..n).map(|q| sign(i, q)).sum::<f64>();
            jz.push(vec![(i, Complex64::new(m, 0.0))]);
            jz2.push(vec![(i, Complex64::new(m * m, 0.0))]);
        }
        let jx = SparseOp::from_rows(dim, jx);
        let jy = SparseOp::from_rows(dim, jy);
        let ops = Self {
            jx2: jx.product(&jx),
            jy2: jy.product(&jy),
            jx,
            jy,
            jz: SparseOp::from_rows(dim, jz),
            jz2: SparseOp::from_rows(dim, jz2),
        };
        if n <= 6 {
            ops.check_commutator()?;
        }
        Ok(ops)
    }

    fn check_commutator(&self) -> Result<()> {
        let xy = self.jx.product(&self.jy);
        let yx = self.jy.product(&self.jx);
        for i in 0..self.jx.dim {
            for j in 0..self.jx.dim {
                let c = xy.element(i, j) - yx.element(i, j) - Complex64::i() * self.jz.element(i, j);
                if c.norm() > 1e-12 {
                    return Err(Error::InvalidParameter {
                        name: "[Jx, Jy] - i Jz",
                        value: c.norm(),
                        reason: "collective spin algebra violated",
                    });
                }
            }
        }
        Ok(())
    }
}

/// Observables accepted by [`expectation`].
#[derive(Debug, Clone, Copy)]
pub enum Observable<'a> {
    Jx,
    Jy,
    Jz,
    Jx2,
    Jy2,
    Jz2,
    /// Projector onto a normalized pure state.
    Projector(&'a [Complex64]),
}

/// `Tr(rho O)` for a Hermitian observable.
pub fn expectation(rho: &DensityMatrix, ops: &CollectiveSpinOps, obs: Observable<'_>) -> Result<f64> {
    let value = match obs {
        Observable::Jx => ops.jx.trace_with(rho)?,
        Observable::Jy => ops.jy.trace_with(rho)?,
        Observable::Jz => ops.jz.trace_with(rho)?,
        Observable::Jx2 => ops.jx2.trace_with(rho)?,
        Observable::Jy2 => ops.jy2.trace_with(rho)?,
        Observable::Jz2 => ops.jz2.trace_with(rho)?,
        Observable::Projector(psi) => {
            if psi.len() != rho.dim {
                return Err(Error::LengthMismatch {
                    expected: rho.dim,
                    found: psi.len(),
                });
            }
            let nz: Vec<usize> = (0..psi.len()).filter(|&i| psi[i] != ZERO).collect();
            let mut acc = ZERO;
            for &i in &nz {
                for &j in &nz {
                    acc += psi[i].conj() * rho.get(i, j) * psi[j];
                }
            }
            acc
        }
    };
    Ok(value.re)
}

/// First and second moments of `Jx`, `Jy`.
pub fn moments(rho: &DensityMatrix, ops: &CollectiveSpinOps) -> Result<MomentSet> {
    Ok(MomentSet {
        jx: expectation(rho, ops, Observable::Jx)?,
        jy: expectation(rho, ops, Observable::Jy)?,
        jx2: expectation(rho, ops, Observable::Jx2)?,
        jy2: expectation(rho, ops, Observable::Jy2)?,
    })
}

/// Writes `(tau, moments)` rows as CSV.
pub fn write_moments_csv<W: Write>(mut out: W, rows: &[(f64, MomentSet)]) -> std::io::Result<()> {
    writeln!(out, "{}", MomentSet::CSV_HEADER)?;
    for (tau, m) in rows {
        writeln!(out, "{}", m.csv_row(*tau))?;
    }
    Ok(())
}
