//! Spin-1/2 Hilbert space machinery.
//!
//! Single-particle states are written in the z-basis. Joint states over `n`
//! particles hold `2^n` amplitudes indexed by outcome bit-strings, where the
//! first listed particle is the most significant bit and bit value `0` is
//! spin up along z.

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance on `‖ψ‖² − 1` for a stored joint state.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// A unit direction in physical space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Axis {
    nx: f64,
    ny: f64,
    nz: f64,
}

impl Axis {
    pub const I: Axis = Axis {
        nx: 1.0,
        ny: 0.0,
        nz: 0.0,
    };
    pub const J: Axis = Axis {
        nx: 0.0,
        ny: 1.0,
        nz: 0.0,
    };
    pub const K: Axis = Axis {
        nx: 0.0,
        ny: 0.0,
        nz: 1.0,
    };

    /// Normalizes `(x, y, z)`; the zero vector and non-finite input are rejected.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let len = (x * x + y * y + z * z).sqrt();
        if !len.is_finite() {
            return Err(Error::InvalidAxis(format!(
                "non-finite direction ({x}, {y}, {z})"
            )));
        }
        if len == 0.0 {
            return Err(Error::InvalidAxis("zero vector is not a direction".into()));
        }
        Ok(Axis {
            nx: x / len,
            ny: y / len,
            nz: z / len,
        })
    }

    /// Axis at polar angle `theta` from +z and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Axis::new(st * cp, st * sp, ct).expect("unit vector from angles")
    }

    pub fn components(&self) -> [f64; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn dot(&self, other: &Axis) -> f64 {
        self.nx * other.nx + self.ny * other.ny + self.nz * other.nz
    }

    pub fn opposite(&self) -> Axis {
        Axis {
            nx: -self.nx,
            ny: -self.ny,
            nz: -self.nz,
        }
    }

    /// A fixed unit vector orthogonal to this axis.
    pub fn orthogonal(&self) -> Axis {
        // Gram-Schmidt against the coordinate axis least aligned with self.
        let c = self.components();
        let mut pick = 0;
        for i in 1..3 {
            if c[i].abs() < c[pick].abs() {
                pick = i;
            }
        }
        let mut e = [0.0; 3];
        e[pick] = 1.0;
        let d = c[pick];
        Axis::new(e[0] - d * c[0], e[1] - d * c[1], e[2] - d * c[2])
            .expect("least-aligned coordinate axis is never parallel")
    }

    /// This axis rotated by `angle` towards `towards` (which must be orthogonal).
    pub fn rotated_towards(&self, towards: &Axis, angle: f64) -> Axis {
        let (s, c) = angle.sin_cos();
        let a = self.components();
        let b = towards.components();
        Axis::new(
            c * a[0] + s * b[0],
            c * a[1] + s * b[1],
            c * a[2] + s * b[2],
        )
        .expect("rotation of a unit vector")
    }
}

impl TryFrom<[f64; 3]> for Axis {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Axis::new(v[0], v[1], v[2])
    }
}

impl From<Axis> for [f64; 3] {
    fn from(a: Axis) -> Self {
        a.components()
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.nx, self.ny, self.nz)
    }
}

/// A single-particle spin state in the z-basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState(pub [Complex64; 2]);

impl SpinState {
    pub fn up() -> Self {
        SpinState([ONE, ZERO])
    }

    pub fn down() -> Self {
        SpinState([ZERO, ONE])
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &SpinState) -> Complex64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn scaled(&self, c: Complex64) -> SpinState {
        SpinState([self.0[0] * c, self.0[1] * c])
    }
}

/// A 2×2 operator on one spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOperator(pub [[Complex64; 2]; 2]);

impl SpinOperator {
    pub fn identity() -> Self {
        SpinOperator([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn apply(&self, s: &SpinState) -> SpinState {
        let m = &self.0;
        SpinState([
            m[0][0] * s.0[0] + m[0][1] * s.0[1],
            m[1][0] * s.0[0] + m[1][1] * s.0[1],
        ])
    }

    pub fn matmul(&self, other: &SpinOperator) -> SpinOperator {
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.0[i][0] * other.0[0][j] + self.0[i][1] * other.0[1][j];
            }
        }
        SpinOperator(out)
    }

    pub fn add(&self, other: &SpinOperator) -> SpinOperator {
        let mut out = self.0;
        for (row, other_row) in out.iter_mut().zip(&other.0) {
            for (x, y) in row.iter_mut().zip(other_row) {
                *x += y;
            }
        }
        SpinOperator(out)
    }

    pub fn scale(&self, c: Complex64) -> SpinOperator {
        let mut out = self.0;
        for row in out.iter_mut() {
            for cell in row.iter_mut() {
                *cell *= c;
            }
        }
        SpinOperator(out)
    }

    pub fn max_abs_diff(&self, other: &SpinOperator) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.0;
        (m[0][0].im.abs() <= tol)
            && (m[1][1].im.abs() <= tol)
            && (m[0][1] - m[1][0].conj()).norm() <= tol
    }
}

/// `σ·n`
pub fn spin_operator(n: &Axis) -> SpinOperator {
    let [x, y, z] = n.components();
    SpinOperator([
        [Complex64::new(z, 0.0), Complex64::new(x, -y)],
        [Complex64::new(x, y), Complex64::new(-z, 0.0)],
    ])
}

/// Measurement outcome sign of a spin test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Outcome::Plus => "+",
            Outcome::Minus => "-",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Spectral projector `(I ± σ·n)/2`.
pub fn projector(n: &Axis, sign: Outcome) -> SpinOperator {
    let half = Complex64::new(0.5, 0.0);
    let sigma = spin_operator(n).scale(Complex64::new(sign.value(), 0.0));
    SpinOperator::identity().add(&sigma).scale(half)
}

/// `|v⟩⟨v|`
pub fn projector_onto(v: &SpinState) -> SpinOperator {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = v.0[i] * v.0[j].conj();
        }
    }
    SpinOperator(out)
}

/// Extra phases multiplied onto the `+` and `−` eigenvectors of every axis.
///
/// The default (both zero) is the spherical-angle convention of
/// [`eigenbasis`]; any other choice must leave all probabilities unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseConvention {
    pub plus: f64,
    pub minus: f64,
}

/// Eigenvectors of `σ·n` for eigenvalues `+1` and `−1`.
///
/// With `θ = arccos n_z`, `φ = atan2(n_y, n_x)`:
/// `plus = (cos θ/2, e^{iφ} sin θ/2)`, `minus = (−e^{−iφ} sin θ/2, cos θ/2)`.
pub fn eigenbasis(n: &Axis) -> (SpinState, SpinState) {
    let [x, y, z] = n.components();
    let theta = z.clamp(-1.0, 1.0).acos();
    // `+ 0.0` turns −0.0 into +0.0 so the poles get φ = 0
    let phi = (y + 0.0).atan2(x + 0.0);
    let (s, c) = (theta / 2.0).sin_cos();
    let plus = SpinState([Complex64::new(c, 0.0), Complex64::from_polar(s, phi)]);
    let minus = SpinState([-Complex64::from_polar(s, -phi), Complex64::new(c, 0.0)]);
    (plus, minus)
}

pub fn eigenbasis_with(n: &Axis, convention: PhaseConvention) -> (SpinState, SpinState) {
    let (plus, minus) = eigenbasis(n);
    (
        plus.scaled(Complex64::from_polar(1.0, convention.plus)),
        minus.scaled(Complex64::from_polar(1.0, convention.minus)),
    )
}

/// A dense `2^n × 2^n` operator on a joint spin space, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl Operator {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Operator { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        let dim = self.dim * other.dim;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        data[(i * other.dim + k) * dim + j * other.dim + l] = a * other.get(k, l);
                    }
                }
            }
        }
        Operator { dim, data }
    }

    pub fn matmul(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
        let dim = self.dim;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..dim {
                    data[i * dim + j] += a * other.get(k, j);
                }
            }
        }
        Operator { dim, data }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "operator/vector dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim)
            .all(|i| (0..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl From<SpinOperator> for Operator {
    fn from(op: SpinOperator) -> Self {
        Operator {
            dim: 2,
            data: vec![op.0[0][0], op.0[0][1], op.0[1][0], op.0[1][1]],
        }
    }
}

/// `op` acting on the factor `particle`, identity on every other factor.
pub fn embed(op: &SpinOperator, particle: &str, particles: &[String]) -> Result<Operator> {
    let index = particles
        .iter()
        .position(|p| p == particle)
        .ok_or_else(|| Error::UnknownParticle(particle.to_string()))?;
    let before = Operator::identity(1 << index);
    let after = Operator::identity(1 << (particles.len() - index - 1));
    Ok(before.kron(&Operator::from(*op)).kron(&after))
}

/// Normalized pure state over an ordered list of spin-1/2 particles.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    particles: Vec<String>,
    amplitudes: Vec<Complex64>,
}

impl JointState {
    /// Builds a state, checking shape, label uniqueness and unit norm.
    pub fn new(particles: Vec<String>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &particles {
            if !seen.insert(p.as_str()) {
                return Err(Error::DuplicateLabel(p.clone()));
            }
        }
        if particles.is_empty() || particles.len() >= usize::BITS as usize {
            return Err(Error::InvalidState(format!(
                "unsupported particle count {}",
                particles.len()
            )));
        }
        if amplitudes.len() != 1 << particles.len() {
            return Err(Error::InvalidState(format!(
                "{} particles need {} amplitudes, got {}",
                particles.len(),
                1usize << particles.len(),
                amplitudes.len()
            )));
        }
        let state = JointState {
            particles,
            amplitudes,
        };
        let n2 = state.norm_sqr();
        if !n2.is_finite() || (n2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::DegenerateState { norm: n2.sqrt() });
        }
        Ok(state)
    }

    /// Tensor product of single-particle states in the given order.
    pub fn product(factors: &[(&str, SpinState)]) -> Result<Self> {
        let mut amplitudes = vec![ONE];
        for (_, s) in factors {
            amplitudes = amplitudes
                .iter()
                .flat_map(|a| [a * s.0[0], a * s.0[1]])
                .collect();
        }
        let particles = factors.iter().map(|(p, _)| p.to_string()).collect();
        JointState::new(particles, amplitudes)
    }

    pub(crate) fn from_parts_unchecked(particles: Vec<String>, amplitudes: Vec<Complex64>) -> Self {
        JointState {
            particles,
            amplitudes,
        }
    }

    pub fn particles(&self) -> &[String] {
        &self.particles
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn particle_index(&self, particle: &str) -> Result<usize> {
        self.particles
            .iter()
            .position(|p| p == particle)
            .ok_or_else(|| Error::UnknownParticle(particle.to_string()))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &JointState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Amplitudes of `op` applied to one factor, without forming the full
    /// operator. Equal to `embed(op, particle) · ψ`.
    pub fn apply_local(&self, op: &SpinOperator, particle: &str) -> Result<Vec<Complex64>> {
        let index = self.particle_index(particle)?;
        let mask = 1usize << (self.particles.len() - index - 1);
        let m = &op.0;
        let mut out = self.amplitudes.clone();
        for i in 0..self.amplitudes.len() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
            out[i] = m[0][0] * a + m[0][1] * b;
            out[j] = m[1][0] * a + m[1][1] * b;
        }
        Ok(out)
    }
}

/// The spin-zero state `(e↑p↓ − e↓p↑)/√2` with the electron listed first.
pub fn singlet(electron: &str, positron: &str) -> Result<JointState> {
    if electron == positron {
        return Err(Error::DuplicateLabel(electron.to_string()));
    }
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(JointState::from_parts_unchecked(
        vec![electron.to_string(), positron.to_string()],
        vec![ZERO, h, -h, ZERO],
    ))
}

/// Singlet coefficients in the product eigenbasis of spin along `n`,
/// ordered `(++, +−, −+, −−)`.
pub fn singlet_in_basis(n: &Axis) -> [Complex64; 4] {
    let psi = singlet("e", "p").expect("distinct labels");
    let (plus, minus) = eigenbasis(n);
    let basis = [plus, minus];
    let mut out = [ZERO; 4];
    for (a, ua) in basis.iter().enumerate() {
        for (b, ub) in basis.iter().enumerate() {
            let bra = JointState::product(&[("e", *ua), ("p", *ub)]).expect("unit product");
            out[2 * a + b] = bra.inner(&psi);
        }
    }
    out
}

/// Multiplies `v` by the global phase that best aligns it with `reference`.
pub fn align_global_phase(v: &[Complex64], reference: &[Complex64]) -> Vec<Complex64> {
    let overlap: Complex64 = v.iter().zip(reference).map(|(a, b)| a.conj() * b).sum();
    if overlap.norm() == 0.0 {
        return v.to_vec();
    }
    let phase = overlap / overlap.norm();
    v.iter().map(|a| a * phase).collect()
}
