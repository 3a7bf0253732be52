//! Exact state-vector simulation of d-level systems.
//!
//! Conventions: `ω = e^{2πi/d}`, `X|k⟩ = |k+1⟩`, `Z|k⟩ = ω^k|k⟩`,
//! `F = d^{-1/2} Σ ω^{ij}|i⟩⟨j|` and `|ξ_k⟩ = F|k⟩`. Powers of ω are always
//! looked up from a table indexed by the exponent reduced mod d, so no
//! trigonometric call ever sees a large argument.
//!
//! Joint states are stored row-major with the first subsystem varying
//! slowest. Global phases are kept; nothing here ever discards one.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QssError, Result};

pub type C64 = Complex64;

/// Tolerance on the norm of states handed to constructors.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Measurement refuses states whose norm drifted further than this.
pub const MEASUREMENT_NORM_TOLERANCE: f64 = 1e-6;

/// `ω^k` for `ω = e^{2πi/d}`, with `k` reduced mod `d` first.
pub fn omega_pow(d: usize, k: i64) -> C64 {
    let r = k.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, TAU * r / d as f64)
}

fn omega_table(d: usize) -> Vec<C64> {
    (0..d).map(|k| omega_pow(d, k as i64)).collect()
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(QssError::InvalidDimension(d));
    }
    Ok(())
}

fn check_label(d: usize, k: usize) -> Result<()> {
    check_dim(d)?;
    if k >= d {
        return Err(QssError::LabelOutOfRange { label: k, dim: d });
    }
    Ok(())
}

/// Single-qudit operators understood by both state types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    /// `X^a`
    XPow(usize),
    /// `Z^b`
    ZPow(usize),
    F,
    FInv,
}

/// Measurement basis for a single subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Computational,
    Fourier,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::Computational => Basis::Fourier,
            Basis::Fourier => Basis::Computational,
        }
    }
}

fn apply_kernel(op: Op, input: &[C64], omega: &[C64]) -> Vec<C64> {
    let d = input.len();
    match op {
        Op::XPow(a) => {
            let a = a % d;
            (0..d).map(|k| input[(k + d - a) % d]).collect()
        }
        Op::ZPow(b) => {
            let b = b % d;
            input
                .iter()
                .enumerate()
                .map(|(k, amp)| amp * omega[(k * b) % d])
                .collect()
        }
        Op::F | Op::FInv => {
            let scale = 1.0 / (d as f64).sqrt();
            (0..d)
                .map(|i| {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, amp) in input.iter().enumerate() {
                        let e = (i * j) % d;
                        let e = if op == Op::F { e } else { (d - e) % d };
                        acc += omega[e] * amp;
                    }
                    acc * scale
                })
                .collect()
        }
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MEASUREMENT_NORM_TOLERANCE || !total.is_finite() {
        return Err(QssError::NormCorrupted { norm: total.sqrt() });
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (k, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            last_nonzero = k;
        }
        acc += p;
        if u < acc {
            return Ok(k);
        }
    }
    Ok(last_nonzero)
}

/// Result of a projective measurement: the observed label and the collapsed state.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome<S> {
    pub value: usize,
    pub post_state: S,
}

/// Pure state of one d-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    dim: usize,
    amplitudes: Vec<C64>,
}

impl QuditState {
    /// Computational basis state `|k⟩`.
    pub fn basis_state(d: usize, k: usize) -> Result<Self> {
        check_label(d, k)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); d];
        amplitudes[k] = C64::new(1.0, 0.0);
        Ok(Self { dim: d, amplitudes })
    }

    /// Fourier basis state `|ξ_k⟩ = d^{-1/2} Σ_j ω^{jk}|j⟩`.
    pub fn fourier_basis_state(d: usize, k: usize) -> Result<Self> {
        check_label(d, k)?;
        let omega = omega_table(d);
        let scale = 1.0 / (d as f64).sqrt();
        let amplitudes = (0..d).map(|j| omega[(j * k) % d] * scale).collect();
        Ok(Self { dim: d, amplitudes })
    }

    /// `|+⟩ = |ξ_0⟩`, the uniform superposition.
    pub fn plus(d: usize) -> Result<Self> {
        Self::fourier_basis_state(d, 0)
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QssError::NormCorrupted { norm });
        }
        Ok(Self {
            dim: amplitudes.len(),
            amplitudes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &QuditState) -> Result<C64> {
        if self.dim != other.dim {
            return Err(QssError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| x.conj() * y)
            .sum())
    }

    pub fn apply(&self, op: Op) -> Self {
        let omega = omega_table(self.dim);
        Self {
            dim: self.dim,
            amplitudes: apply_kernel(op, &self.amplitudes, &omega),
        }
    }

    pub fn apply_x_pow(&self, a: usize) -> Self {
        self.apply(Op::XPow(a))
    }

    pub fn apply_z_pow(&self, b: usize) -> Self {
        self.apply(Op::ZPow(b))
    }

    pub fn apply_f(&self) -> Self {
        self.apply(Op::F)
    }

    pub fn apply_f_inv(&self) -> Self {
        self.apply(Op::FInv)
    }

    /// Born-rule measurement in the computational basis.
    pub fn measure_computational<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<MeasurementOutcome<QuditState>> {
        let value = sample_index(&self.probabilities(), rng)?;
        Ok(MeasurementOutcome {
            value,
            post_state: QuditState::basis_state(self.dim, value)?,
        })
    }

    /// True when `self = e^{iφ}·other` amplitudewise within `tol`.
    pub fn equals_up_to_phase(&self, other: &QuditState, tol: f64) -> bool {
        amplitudes_equal_up_to_phase(&self.amplitudes, &other.amplitudes, tol)
    }

    /// Index of the single unit-magnitude amplitude, if the state is a basis state.
    pub fn as_basis_label(&self, tol: f64) -> Option<usize> {
        let mut found = None;
        for (k, amp) in self.amplitudes.iter().enumerate() {
            let p = amp.norm_sqr();
            if (p - 1.0).abs() <= tol {
                found = Some(k);
            } else if p > tol {
                return None;
            }
        }
        found
    }
}

fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// True when `lhs = e^{iφ}·rhs` amplitudewise within `tol`.
pub fn amplitudes_equal_up_to_phase(lhs: &[C64], rhs: &[C64], tol: f64) -> bool {
    if lhs.len() != rhs.len() {
        return false;
    }
    let Some((pivot, _)) = rhs
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))
    else {
        return true;
    };
    if rhs[pivot].norm() <= tol {
        return lhs.iter().all(|a| a.norm() <= tol);
    }
    let ratio = lhs[pivot] / rhs[pivot];
    if (ratio.norm() - 1.0).abs() > tol {
        return false;
    }
    let phase = ratio / ratio.norm();
    lhs.iter()
        .zip(rhs)
        .all(|(l, r)| (l - phase * r).norm() <= tol)
}

/// Pure state of several equal-dimension subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    dim: usize,
    subsystems: usize,
    amplitudes: Vec<C64>,
}

impl From<QuditState> for JointState {
    fn from(q: QuditState) -> Self {
        JointState {
            dim: q.dim,
            subsystems: 1,
            amplitudes: q.amplitudes,
        }
    }
}

impl JointState {
    /// `ancilla ⊗ carried`, ancilla as the first subsystem.
    pub fn embed_with_ancilla(ancilla: &QuditState, carried: &QuditState) -> Result<Self> {
        JointState::from(ancilla.clone()).insert_subsystem(1, carried)
    }

    pub fn from_amplitudes(dim: usize, subsystems: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        let expected = dim.checked_pow(subsystems as u32);
        if subsystems == 0 || expected != Some(amplitudes.len()) {
            return Err(QssError::DimensionMismatch {
                left: expected.unwrap_or(usize::MAX),
                right: amplitudes.len(),
            });
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QssError::NormCorrupted { norm });
        }
        Ok(Self {
            dim,
            subsystems,
            amplitudes,
        })
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.dim; self.subsystems]
    }

    pub fn local_dim(&self) -> usize {
        self.dim
    }

    pub fn subsystem_count(&self) -> usize {
        self.subsystems
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    /// Back to a single qudit when only one subsystem is left.
    pub fn to_qudit(&self) -> Option<QuditState> {
        (self.subsystems == 1).then(|| QuditState {
            dim: self.dim,
            amplitudes: self.amplitudes.clone(),
        })
    }

    fn check_index(&self, which: usize) -> Result<()> {
        if which >= self.subsystems {
            return Err(QssError::SubsystemIndex {
                index: which,
                count: self.subsystems,
            });
        }
        Ok(())
    }

    fn stride(&self, which: usize) -> usize {
        self.dim.pow((self.subsystems - 1 - which) as u32)
    }

    /// Inserts `qudit` so that it becomes subsystem `at`.
    pub fn insert_subsystem(&self, at: usize, qudit: &QuditState) -> Result<Self> {
        if qudit.dim != self.dim {
            return Err(QssError::DimensionMismatch {
                left: self.dim,
                right: qudit.dim,
            });
        }
        if at > self.subsystems {
            return Err(QssError::SubsystemIndex {
                index: at,
                count: self.subsystems + 1,
            });
        }
        let d = self.dim;
        let inner = d.pow((self.subsystems - at) as u32);
        let outer = self.amplitudes.len() / inner;
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * d);
        for hi in 0..outer {
            for q in &qudit.amplitudes {
                amplitudes.extend(
                    self.amplitudes[hi * inner..(hi + 1) * inner]
                        .iter()
                        .map(|a| a * q),
                );
            }
        }
        Ok(Self {
            dim: d,
            subsystems: self.subsystems + 1,
            amplitudes,
        })
    }

    /// Applies `op` to subsystem `which`, identity elsewhere.
    pub fn apply_on_subsystem(&self, which: usize, op: Op) -> Result<Self> {
        self.check_index(which)?;
        let d = self.dim;
        let stride = self.stride(which);
        let block = stride * d;
        let omega = omega_table(d);
        let mut out = self.amplitudes.clone();
        let mut fiber = vec![C64::new(0.0, 0.0); d];
        for base in (0..self.amplitudes.len()).step_by(block) {
            for lo in 0..stride {
                for (k, slot) in fiber.iter_mut().enumerate() {
                    *slot = self.amplitudes[base + k * stride + lo];
                }
                let mapped = apply_kernel(op, &fiber, &omega);
                for (k, amp) in mapped.into_iter().enumerate() {
                    out[base + k * stride + lo] = amp;
                }
            }
        }
        Ok(Self {
            amplitudes: out,
            ..*self
        })
    }

    /// Generalized CNOT on a two-subsystem state: `|i, j⟩ → |i, i+j⟩`.
    pub fn apply_cnot(&self) -> Result<Self> {
        if self.subsystems != 2 {
            return Err(QssError::SubsystemCount {
                expected: 2,
                found: self.subsystems,
            });
        }
        self.apply_cnot_between(0, 1)
    }

    /// Generalized CNOT adding the `control` label onto the `target` label mod d.
    pub fn apply_cnot_between(&self, control: usize, target: usize) -> Result<Self> {
        self.check_index(control)?;
        self.check_index(target)?;
        if control == target {
            return Err(QssError::Config(
                "CNOT control and target must differ".into(),
            ));
        }
        let d = self.dim;
        let cs = self.stride(control);
        let ts = self.stride(target);
        let mut out = vec![C64::new(0.0, 0.0); self.amplitudes.len()];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let i = (idx / cs) % d;
            let j = (idx / ts) % d;
            let shifted = (j + i) % d;
            let dest = idx - j * ts + shifted * ts;
            out[dest] = *amp;
        }
        Ok(Self {
            amplitudes: out,
            ..*self
        })
    }

    /// Marginal distribution of the computational label of subsystem `which`.
    pub fn subsystem_probabilities(&self, which: usize) -> Result<Vec<f64>> {
        self.check_index(which)?;
        let d = self.dim;
        let stride = self.stride(which);
        let mut probs = vec![0.0; d];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            probs[(idx / stride) % d] += amp.norm_sqr();
        }
        Ok(probs)
    }

    /// Projective measurement of one subsystem. A Fourier-basis outcome `v`
    /// means projection onto `|ξ_v⟩` of that subsystem.
    pub fn measure_subsystem<R: Rng + ?Sized>(
        &self,
        which: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<MeasurementOutcome<JointState>> {
        self.check_index(which)?;
        let rotated = match basis {
            Basis::Computational => self.clone(),
            Basis::Fourier => self.apply_on_subsystem(which, Op::FInv)?,
        };
        let probs = rotated.subsystem_probabilities(which)?;
        let value = sample_index(&probs, rng)?;
        let d = self.dim;
        let stride = self.stride(which);
        let scale = 1.0 / probs[value].sqrt();
        let amplitudes = rotated
            .amplitudes
            .iter()
            .enumerate()
            .map(|(idx, amp)| {
                if (idx / stride) % d == value {
                    amp * scale
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let collapsed = Self {
            amplitudes,
            ..*self
        };
        let post_state = match basis {
            Basis::Computational => collapsed,
            Basis::Fourier => collapsed.apply_on_subsystem(which, Op::F)?,
        };
        Ok(MeasurementOutcome { value, post_state })
    }

    pub fn equals_up_to_phase(&self, other: &JointState, tol: f64) -> bool {
        self.dim == other.dim
            && self.subsystems == other.subsystems
            && amplitudes_equal_up_to_phase(&self.amplitudes, &other.amplitudes, tol)
    }
}
