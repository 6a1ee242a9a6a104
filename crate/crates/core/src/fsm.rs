//! Classical stochastic finite state machine: dp/dt = S p over a vector of
//! occupation probabilities, with the epidemic-model generators (SIS, SIR),
//! closed-form 2x2 propagators, eigenmode decomposition, projective and weak
//! measurement, and coupled two-system machines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, mat_exp, Matrix};

#[derive(Debug, Error)]
pub enum FsmError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("state dimension {state} does not match generator dimension {generator}")]
    Dimension { state: usize, generator: usize },
    #[error("probability component {index} is negative ({value})")]
    NegativeProbability { index: usize, value: f64 },
    #[error("state has non-finite component {0}")]
    NonFinite(usize),
    #[error("all-zero probability vector")]
    AllZero,
    #[error("degenerate spectrum: modes are not unique (gap {gap:.3e})")]
    DegenerateModes { gap: f64 },
    #[error("eigenvector matrix is singular; weights undefined")]
    SingularModes,
    #[error("p2 crosses zero near t = {t:.6}; ratio undefined")]
    SingularRatio { t: f64 },
    #[error("weak measurement requires n1 <= n, got n1 = {n1}, n = {n}")]
    WeakMeasurement { n: usize, n1: usize },
    #[error("total population is zero; SIR generator undefined")]
    ZeroPopulation,
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, FsmError>;

/// Real N x N transition-rate matrix driving dp/dt = S p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    n: usize,
    /// Row-major entries s_ij, units 1/time.
    entries: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(FsmError::Domain("generator must be square".into()));
        }
        let entries: Vec<f64> = rows.iter().flatten().copied().collect();
        if let Some(idx) = entries.iter().position(|x| !x.is_finite()) {
            return Err(FsmError::NonFinite(idx));
        }
        Ok(GeneratorMatrix { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        GeneratorMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| Complex64::new(self.get(i, j), 0.0))
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * p[j]).sum())
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Nonnegative probability (or occurrence-count) vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    p: Vec<f64>,
}

impl ClassicalState {
    /// Construction enforces nonnegativity; evolution may later leave the
    /// positive cone, which is reported as a warning, not an error.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        for (i, &x) in p.iter().enumerate() {
            if !x.is_finite() {
                return Err(FsmError::NonFinite(i));
            }
            if x < 0.0 {
                return Err(FsmError::NegativeProbability { index: i, value: x });
            }
        }
        Ok(ClassicalState { p })
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut p = vec![0.0; n];
        p[k] = 1.0;
        ClassicalState { p }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.p
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.sum() - 1.0).abs() <= 1e-12
    }

    /// Renormalized copy for entropy/measurement use; raw values are kept in
    /// trajectories since general generators do not preserve the total.
    pub fn renormalized(&self) -> Result<Self> {
        let s = self.sum();
        if s <= 0.0 {
            return Err(FsmError::AllZero);
        }
        Ok(ClassicalState {
            p: self.p.iter().map(|x| x / s).collect(),
        })
    }

    /// Kronecker (tensor) product state, A-index major.
    pub fn tensor(&self, other: &ClassicalState) -> ClassicalState {
        let mut p = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.p {
            for &b in &other.p {
                p.push(a * b);
            }
        }
        ClassicalState { p }
    }
}

/// SIS generator [[-lambda, +g], [-g, +lambda]].
pub fn sis_generator(lambda: f64, g: f64) -> GeneratorMatrix {
    GeneratorMatrix::from_rows(&[vec![-lambda, g], vec![-g, lambda]])
        .expect("2x2 with finite rates")
}

/// State-dependent 3x3 SIR generator; meant to be re-evaluated along the
/// trajectory (the machine is nonlinear).
pub fn sir_generator(b: f64, gamma: f64, state: &ClassicalState) -> Result<GeneratorMatrix> {
    if state.dim() != 3 {
        return Err(FsmError::Dimension {
            state: state.dim(),
            generator: 3,
        });
    }
    let total = state.sum();
    if total <= 0.0 {
        return Err(FsmError::ZeroPopulation);
    }
    let infection = b * state.components()[1] / total;
    GeneratorMatrix::from_rows(&[
        vec![-infection, 0.0, 0.0],
        vec![infection, -gamma, 0.0],
        vec![0.0, gamma, 0.0],
    ])
}

/// Sampled probability trajectory. States are stored raw (no renormalization).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// First time and component at which the trajectory left the positive
    /// cone, if it did.
    pub first_negative: Option<(f64, usize)>,
}

impl Trajectory {
    fn record_sign(&mut self) {
        if self.first_negative.is_some() {
            return;
        }
        if let Some(state) = self.states.last() {
            if let Some(idx) = state.iter().position(|&x| x < 0.0) {
                let t = *self.times.last().unwrap();
                log::warn!("component {idx} went negative at t = {t}");
                self.first_negative = Some((t, idx));
            }
        }
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("non-empty trajectory")
    }

    /// CSV with header `t,p1,...,pN`, 17 significant digits, LF endings.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.len());
        let mut out = String::from("t");
        for k in 1..=n {
            out.push_str(&format!(",p{k}"));
        }
        out.push('\n');
        for (t, state) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t:.16e}"));
            for x in state {
                out.push_str(&format!(",{x:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Evolve under a constant generator: p(t) = exp(S (t - t0)) p(t0), sampled
/// at steps+1 uniform points.
pub fn evolve(
    s: &GeneratorMatrix,
    p0: &ClassicalState,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Trajectory> {
    if p0.dim() != s.dim() {
        return Err(FsmError::Dimension {
            state: p0.dim(),
            generator: s.dim(),
        });
    }
    if t1 < t0 {
        return Err(FsmError::Linalg(linalg::LinalgError::Interval { t0, t1 }));
    }
    assert!(steps >= 1);
    let dt = (t1 - t0) / steps as f64;
    let u_step = real_matrix(&mat_exp(&s.to_matrix().scale(Complex64::new(dt, 0.0)))?);

    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![p0.components().to_vec()],
        first_negative: None,
    };
    traj.record_sign();
    let mut p = p0.components().to_vec();
    for k in 0..steps {
        p = mat_apply(&u_step, &p);
        traj.times.push(t0 + (k as f64 + 1.0) * dt);
        traj.states.push(p.clone());
        traj.record_sign();
    }
    Ok(traj)
}

/// Evolve under a time-dependent generator with per-step midpoint
/// exponentials.
pub fn evolve_td(
    s: impl Fn(f64) -> GeneratorMatrix,
    p0: &ClassicalState,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Trajectory> {
    if t1 < t0 {
        return Err(FsmError::Linalg(linalg::LinalgError::Interval { t0, t1 }));
    }
    assert!(steps >= 1);
    let dt = (t1 - t0) / steps as f64;
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![p0.components().to_vec()],
        first_negative: None,
    };
    traj.record_sign();
    let mut p = p0.components().to_vec();
    for k in 0..steps {
        let t_mid = t0 + (k as f64 + 0.5) * dt;
        let sm = s(t_mid);
        if sm.dim() != p.len() {
            return Err(FsmError::Dimension {
                state: p.len(),
                generator: sm.dim(),
            });
        }
        let u = real_matrix(&mat_exp(&sm.to_matrix().scale(Complex64::new(dt, 0.0)))?);
        p = mat_apply(&u, &p);
        traj.times.push(t0 + (k as f64 + 1.0) * dt);
        traj.states.push(p.clone());
        traj.record_sign();
    }
    Ok(traj)
}

/// Nonlinear SIR evolution: classic 4th-order fixed-step integration with the
/// state-dependent generator re-evaluated at every substep.
pub fn evolve_sir(
    b: f64,
    gamma: f64,
    p0: &ClassicalState,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Trajectory> {
    if t1 < t0 {
        return Err(FsmError::Linalg(linalg::LinalgError::Interval { t0, t1 }));
    }
    let deriv = |p: &[f64]| -> Result<Vec<f64>> {
        let state = ClassicalState { p: p.to_vec() };
        Ok(sir_generator(b, gamma, &state)?.apply(p))
    };
    let dt = (t1 - t0) / steps as f64;
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![p0.components().to_vec()],
        first_negative: None,
    };
    let mut p = p0.components().to_vec();
    for k in 0..steps {
        let k1 = deriv(&p)?;
        let k2 = deriv(&axpy(&p, &k1, dt / 2.0))?;
        let k3 = deriv(&axpy(&p, &k2, dt / 2.0))?;
        let k4 = deriv(&axpy(&p, &k3, dt))?;
        for i in 0..p.len() {
            p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        traj.times.push(t0 + (k as f64 + 1.0) * dt);
        traj.states.push(p.clone());
        traj.record_sign();
    }
    Ok(traj)
}

fn axpy(p: &[f64], dp: &[f64], h: f64) -> Vec<f64> {
    p.iter().zip(dp).map(|(x, d)| x + h * d).collect()
}

fn real_matrix(m: &Matrix) -> Vec<Vec<f64>> {
    let (rows, max_im) = m.real_parts();
    debug_assert!(max_im < 1e-9, "propagator of a real generator must be real");
    rows
}

fn mat_apply(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Closed-form propagator exp(M) of a real 2x2 matrix through the
/// sinh/cosh expressions; complex-safe for negative discriminants.
pub fn exp2_closed(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let s11 = Complex64::new(m[0][0], 0.0);
    let s12 = Complex64::new(m[0][1], 0.0);
    let s21 = Complex64::new(m[1][0], 0.0);
    let s22 = Complex64::new(m[1][1], 0.0);
    let half_kappa = ((s11 - s22) * (s11 - s22) + s12 * s21 * 4.0).sqrt() * 0.5;
    let pre = ((s11 + s22) * 0.5).exp();
    let ch = half_kappa.cosh();
    let sinch = if half_kappa.norm() < 1e-6 {
        // sinh(q)/q = 1 + q^2/6 + q^4/120 + ...
        let q2 = half_kappa * half_kappa;
        Complex64::new(1.0, 0.0) + q2 / 6.0 + q2 * q2 / 120.0
    } else {
        half_kappa.sinh() / half_kappa
    };
    let u11 = pre * (ch + (s11 - s22) * 0.5 * sinch);
    let u22 = pre * (ch - (s11 - s22) * 0.5 * sinch);
    let u12 = pre * s12 * sinch;
    let u21 = pre * s21 * sinch;
    debug_assert!(
        u11.im.abs() + u12.im.abs() + u21.im.abs() + u22.im.abs() < 1e-9,
        "real input must give a real exponential"
    );
    [[u11.re, u12.re], [u21.re, u22.re]]
}

/// U(t, t0) = exp(S (t - t0)) for a constant 2x2 generator, in the
/// sinh/cosh closed form.
pub fn closed_form_u(s: &GeneratorMatrix, t: f64, t0: f64) -> Result<[[f64; 2]; 2]> {
    if s.dim() != 2 {
        return Err(FsmError::Dimension {
            state: 2,
            generator: s.dim(),
        });
    }
    let dt = t - t0;
    Ok(exp2_closed([
        [s.get(0, 0) * dt, s.get(0, 1) * dt],
        [s.get(1, 0) * dt, s.get(1, 1) * dt],
    ]))
}

/// Eigenmode data of a 2x2 generator.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    pub e1: Complex64,
    pub e2: Complex64,
    /// Unit-norm eigenvectors.
    pub v1: Vec<Complex64>,
    pub v2: Vec<Complex64>,
    /// Squared norms n_E1, n_E2 of the prefactor-scaled eigenvectors, where
    /// the scaling denominator 2 s21 + (-+sqrt(disc) + s11 - s22) is
    /// non-singular. These are the quantities the projection formulas divide
    /// by; with unit-norm vectors they are not needed.
    pub prefactor_norms: Option<(f64, f64)>,
}

/// Eigenvalues E_{1,2} = (s11 + s22 -+ sqrt((s11-s22)^2 + 4 s12 s21)) / 2 and
/// unit-norm eigenvectors of a 2x2 generator.
pub fn eigenmodes(s: &GeneratorMatrix) -> Result<ModeDecomposition> {
    if s.dim() != 2 {
        return Err(FsmError::Dimension {
            state: 2,
            generator: s.dim(),
        });
    }
    let dec = linalg::eig_small(&s.to_matrix())?;
    let gap = (dec.pairs[0].value - dec.pairs[1].value).norm();
    if gap <= 1e-10 {
        return Err(FsmError::DegenerateModes { gap });
    }
    Ok(ModeDecomposition {
        e1: dec.pairs[0].value,
        e2: dec.pairs[1].value,
        v1: dec.pairs[0].vector.clone(),
        v2: dec.pairs[1].vector.clone(),
        prefactor_norms: prefactor_norms(s),
    })
}

/// n_E1, n_E2 from the printed prefactor form, when defined.
fn prefactor_norms(s: &GeneratorMatrix) -> Option<(f64, f64)> {
    let (s11, s12, s21, s22) = (s.get(0, 0), s.get(0, 1), s.get(1, 0), s.get(1, 1));
    let disc = (s11 - s22).powi(2) + 4.0 * s12 * s21;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let scale = s.max_abs().max(1.0);
    let norm_for = |signed_sq: f64| -> Option<f64> {
        let d = signed_sq + s11 - s22;
        let denom = 2.0 * s21 + d;
        if denom.abs() <= 1e-12 * scale {
            return None;
        }
        Some((d * d + 4.0 * s21 * s21) / (denom * denom))
    };
    Some((norm_for(-sq)?, norm_for(sq)?))
}

/// Bilinear (transpose, no conjugation) inner product of the closed-form prefactor-scaled
/// eigenvectors: equals 1 - s12/s21. Zero exactly when s12 = s21.
pub fn eigenvector_bilinear_product(s: &GeneratorMatrix) -> Result<Complex64> {
    if s.dim() != 2 {
        return Err(FsmError::Dimension {
            state: 2,
            generator: s.dim(),
        });
    }
    let (s11, s12, s21, s22) = (s.get(0, 0), s.get(0, 1), s.get(1, 0), s.get(1, 1));
    if s21 == 0.0 {
        return Err(FsmError::Domain(
            "closed-form eigenvectors require s21 != 0".into(),
        ));
    }
    let disc = Complex64::new((s11 - s22).powi(2) + 4.0 * s12 * s21, 0.0).sqrt();
    let s11c = Complex64::new(s11, 0.0);
    let s22c = Complex64::new(s22, 0.0);
    let s21c = Complex64::new(s21, 0.0);
    // Unscaled columns ((-+disc + s11 - s22) / (2 s21), 1).
    let a1 = (-disc + s11c - s22c) / (s21c * 2.0);
    let a2 = (disc + s11c - s22c) / (s21c * 2.0);
    Ok(a1 * a2 + 1.0)
}

/// Solve p = w1 v1 + w2 v2 for the mode weights (2x2 linear system).
pub fn mode_weights(
    p: &ClassicalState,
    modes: &ModeDecomposition,
) -> Result<(Complex64, Complex64)> {
    if p.dim() != 2 {
        return Err(FsmError::Dimension {
            state: p.dim(),
            generator: 2,
        });
    }
    let m = Matrix::from_rows(&[
        vec![modes.v1[0], modes.v2[0]],
        vec![modes.v1[1], modes.v2[1]],
    ]);
    let rhs: Vec<Complex64> = p
        .components()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let w = m.solve(&rhs).map_err(|_| FsmError::SingularModes)?;
    Ok((w[0], w[1]))
}

/// Pointwise probability ratio p1(t)/p2(t) along a constant-generator
/// trajectory.
#[derive(Debug, Clone)]
pub struct RatioTrajectory {
    pub times: Vec<f64>,
    pub ratio: Vec<f64>,
}

pub fn ratio_trajectory(
    s: &GeneratorMatrix,
    p0: &ClassicalState,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<RatioTrajectory> {
    let traj = evolve(s, p0, t0, t1, steps)?;
    let mut times = Vec::with_capacity(traj.times.len());
    let mut ratio = Vec::with_capacity(traj.times.len());
    let mut prev_sign = 0.0f64;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let p2 = state[1];
        if p2 == 0.0 || (prev_sign != 0.0 && p2.signum() != prev_sign) {
            return Err(FsmError::SingularRatio { t: *t });
        }
        prev_sign = p2.signum();
        times.push(*t);
        ratio.push(state[0] / p2);
    }
    Ok(RatioTrajectory { times, ratio })
}

/// Closed-form ratio p1(t)/p2(t) for constant 2x2 S, in the tanh form
/// (numerator and denominator read off the closed-form U entries).
pub fn ratio_tanh_form(s: &GeneratorMatrix, p0: &ClassicalState, t: f64, t0: f64) -> Result<f64> {
    if s.dim() != 2 || p0.dim() != 2 {
        return Err(FsmError::Dimension {
            state: p0.dim(),
            generator: s.dim(),
        });
    }
    let dt = t - t0;
    let s11 = Complex64::new(s.get(0, 0) * dt, 0.0);
    let s12 = Complex64::new(s.get(0, 1) * dt, 0.0);
    let s21 = Complex64::new(s.get(1, 0) * dt, 0.0);
    let s22 = Complex64::new(s.get(1, 1) * dt, 0.0);
    let p1 = p0.components()[0];
    let p2 = p0.components()[1];
    let kappa = ((s11 - s22) * (s11 - s22) + s12 * s21 * 4.0).sqrt();
    let th = (kappa * 0.5).tanh();
    // For kappa -> 0 use tanh(q)/q -> 1: multiply through by kappa first.
    let (num, den) = if kappa.norm() < 1e-8 {
        (
            ((s11 - s22) * p1 + s12 * 2.0 * p2) * 0.5 + Complex64::new(p1, 0.0),
            (-(s11 - s22) * p2 + s21 * 2.0 * p1) * 0.5 + Complex64::new(p2, 0.0),
        )
    } else {
        (
            ((s11 - s22) * p1 + s12 * 2.0 * p2) * th + kappa * p1,
            (-(s11 - s22) * p2 + s21 * 2.0 * p1) * th + kappa * p2,
        )
    };
    if den.norm() == 0.0 {
        return Err(FsmError::SingularRatio { t });
    }
    let r = num / den;
    Ok(r.re)
}

/// Mode-weight ratio for constant S with unit-norm eigenvectors:
/// w1(t)/w2(t) = (w1(t0)/w2(t0)) exp((E1 - E2)(t - t0)).
pub fn mode_weight_ratio(
    modes: &ModeDecomposition,
    weights0: (Complex64, Complex64),
    t: f64,
    t0: f64,
) -> Complex64 {
    let (w1, w2) = weights0;
    (w1 / w2) * ((modes.e1 - modes.e2) * (t - t0)).exp()
}

/// Projective measurement: collapse onto basis state `outcome`.
pub fn measure_projective(p: &ClassicalState, outcome: usize) -> Result<ClassicalState> {
    if outcome >= p.dim() {
        return Err(FsmError::Domain(format!(
            "outcome {outcome} out of range for {} states",
            p.dim()
        )));
    }
    if p.sum() <= 0.0 {
        return Err(FsmError::AllZero);
    }
    Ok(ClassicalState::basis(p.dim(), outcome))
}

/// Draw a measurement outcome k with probability p_k / sum(p).
pub fn sample_outcome(p: &ClassicalState, rng: &mut impl rand::Rng) -> Result<usize> {
    let total = p.sum();
    if total <= 0.0 {
        return Err(FsmError::AllZero);
    }
    let x: f64 = rng.gen_range(0.0..total);
    let mut acc = 0.0;
    for (k, &w) in p.components().iter().enumerate() {
        acc += w;
        if x < acc {
            return Ok(k);
        }
    }
    Ok(p.dim() - 1)
}

/// The projector onto basis state k, as a matrix.
pub fn projection_matrix(outcome: usize, n: usize) -> Matrix {
    Matrix::from_fn(n, |i, j| {
        if i == j && i == outcome {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Weak measurement on an ensemble of n individuals of which n1 were
/// inspected: p -> ((n - n1) p + n1 p_test) / n, componentwise.
pub fn measure_weak(
    p: &ClassicalState,
    n: usize,
    n1: usize,
    p_test: &ClassicalState,
) -> Result<ClassicalState> {
    if n == 0 || n1 > n {
        return Err(FsmError::WeakMeasurement { n, n1 });
    }
    if p.dim() != p_test.dim() {
        return Err(FsmError::Dimension {
            state: p_test.dim(),
            generator: p.dim(),
        });
    }
    let keep = (n - n1) as f64 / n as f64;
    let mix = n1 as f64 / n as f64;
    ClassicalState::new(
        p.components()
            .iter()
            .zip(p_test.components())
            .map(|(a, b)| keep * a + mix * b)
            .collect(),
    )
}

/// Two 2-state machines coupled through the anti-diagonal pattern:
///
/// ```text
/// [ sa11  sa12  0     c14 ]
/// [ sa21  sa22  c23   0   ]
/// [ 0     c32   sb11  sb12]
/// [ c41   0     sb21  sb22]
/// ```
pub fn coupled_generator(
    sa: [[f64; 2]; 2],
    sb: [[f64; 2]; 2],
    coupling: [f64; 4],
) -> GeneratorMatrix {
    let [c14, c23, c32, c41] = coupling;
    GeneratorMatrix::from_rows(&[
        vec![sa[0][0], sa[0][1], 0.0, c14],
        vec![sa[1][0], sa[1][1], c23, 0.0],
        vec![0.0, c32, sb[0][0], sb[0][1]],
        vec![c41, 0.0, sb[1][0], sb[1][1]],
    ])
    .expect("finite entries")
}

/// Symmetric case: identical subsystems, one coupling rate s everywhere.
pub fn coupled_symmetric(s2: [[f64; 2]; 2], s: f64) -> GeneratorMatrix {
    coupled_generator(s2, s2, [s; 4])
}

/// Analytic eigenvectors V1..V4 of the symmetric coupled generator,
/// unnormalized, valid when the square roots are real and the denominators
/// non-zero.
pub fn coupled_symmetric_eigenvectors(s2: [[f64; 2]; 2], s: f64) -> Result<[Vec<f64>; 4]> {
    let (s11, s12, s21, s22) = (s2[0][0], s2[0][1], s2[1][0], s2[1][1]);
    let km2 = 4.0 * (s - s12) * (s - s21) + (s11 - s22).powi(2);
    let kp2 = 4.0 * (s + s12) * (s + s21) + (s11 - s22).powi(2);
    if km2 < 0.0 || kp2 < 0.0 {
        return Err(FsmError::Domain(
            "complex coupled spectrum; analytic vectors undefined".into(),
        ));
    }
    let km = km2.sqrt();
    let kp = kp2.sqrt();
    let dm = 2.0 * (s - s21);
    let dp = 2.0 * (s + s21);
    if dm.abs() < 1e-14 || dp.abs() < 1e-14 {
        return Err(FsmError::Domain("vanishing denominator 2(s -+ s21)".into()));
    }
    let v1 = vec![-(km - s11 + s22) / dm, -1.0, (km - s11 + s22) / dm, 1.0];
    let v2 = vec![(km + s11 - s22) / dm, -1.0, -(km + s11 - s22) / dm, 1.0];
    let v3 = vec![(-kp + s11 - s22) / dp, 1.0, (-kp + s11 - s22) / dp, 1.0];
    let v4 = vec![(kp + s11 - s22) / dp, 1.0, (kp + s11 - s22) / dp, 1.0];
    Ok([v1, v2, v3, v4])
}

/// Non-interacting pair as a Kronecker sum: S_A (x) I + I (x) S_B.
pub fn tensor_generator(sa: &GeneratorMatrix, sb: &GeneratorMatrix) -> Result<GeneratorMatrix> {
    if sa.dim() != 2 || sb.dim() != 2 {
        return Err(FsmError::Dimension {
            state: sa.dim(),
            generator: sb.dim(),
        });
    }
    let id = Matrix::identity(2);
    let m = sa.to_matrix().kron(&id).add(&id.kron(&sb.to_matrix()));
    let (rows, _) = m.real_parts();
    GeneratorMatrix::from_rows(&rows)
}

/// Continuity-fixed eigenmode pair of a time-dependent 2x2 generator; signs
/// are aligned against `prev` so centered differences are meaningful.
fn tracked_modes(
    s: &GeneratorMatrix,
    prev: Option<&(Vec<f64>, Vec<f64>)>,
) -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
    let modes = eigenmodes(s)?;
    if modes.e1.im.abs() > 1e-12 || modes.e2.im.abs() > 1e-12 {
        return Err(FsmError::Domain(
            "mode-space machinery requires a real spectrum".into(),
        ));
    }
    let to_real = |v: &[Complex64]| -> Vec<f64> { v.iter().map(|z| z.re).collect() };
    let mut v1 = to_real(&modes.v1);
    let mut v2 = to_real(&modes.v2);
    if let Some((p1, p2)) = prev {
        if v1[0] * p1[0] + v1[1] * p1[1] < 0.0 {
            v1.iter_mut().for_each(|x| *x = -*x);
        }
        if v2[0] * p2[0] + v2[1] * p2[1] < 0.0 {
            v2.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok((v1, v2, modes.e1.re, modes.e2.re))
}

/// Residual of the constant-occupancy consistency condition along a
/// time-dependent 2x2 generator, in the cross-multiplied form
/// <v1|dv2> <v2|dv1> = (E1 - <v1|dv1>)(E2 - <v2|dv2>).
///
/// This checks whether a constant mode-occupancy ansatz is compatible with
/// the generator; it does not construct one.
pub fn constant_occupancy_residual(
    s: impl Fn(f64) -> GeneratorMatrix,
    t0: f64,
    t1: f64,
    samples: usize,
) -> Result<f64> {
    assert!(samples >= 2);
    let dt_fd = (t1 - t0) / (samples as f64 * 64.0);
    let mut max_res: f64 = 0.0;
    for k in 0..samples {
        let t = t0 + (t1 - t0) * (k as f64 + 0.5) / samples as f64;
        let (c1, c2, e1, e2) = tracked_modes(&s(t), None)?;
        let anchor = (c1.clone(), c2.clone());
        let (m1, m2, _, _) = tracked_modes(&s(t - dt_fd), Some(&anchor))?;
        let (p1, p2, _, _) = tracked_modes(&s(t + dt_fd), Some(&anchor))?;
        let d1: Vec<f64> = p1
            .iter()
            .zip(&m1)
            .map(|(a, b)| (a - b) / (2.0 * dt_fd))
            .collect();
        let d2: Vec<f64> = p2
            .iter()
            .zip(&m2)
            .map(|(a, b)| (a - b) / (2.0 * dt_fd))
            .collect();
        let dot = |a: &[f64], b: &[f64]| a[0] * b[0] + a[1] * b[1];
        let lhs = dot(&c1, &d2) * dot(&c2, &d1);
        let rhs = (e1 - dot(&c1, &d1)) * (e2 - dot(&c2, &d2));
        max_res = max_res.max((lhs - rhs).abs());
    }
    Ok(max_res)
}

/// Mode-space propagator with user-supplied cross-mode rates e12, e21: the
/// weights (w1, w2) evolve as exp(g) with
/// g11 = int E1 - <v1|dv1>, g12 = int e21 - <v1|dv2>,
/// g21 = int e12 - <v2|dv1>, g22 = int E2 - <v2|dv2>,
/// integrated by the midpoint rule and exponentiated in closed form.
pub fn mode_space_propagator(
    s: impl Fn(f64) -> GeneratorMatrix,
    e12: impl Fn(f64) -> f64,
    e21: impl Fn(f64) -> f64,
    t0: f64,
    t1: f64,
    quad_steps: usize,
) -> Result<[[f64; 2]; 2]> {
    assert!(quad_steps >= 1);
    if t1 < t0 {
        return Err(FsmError::Linalg(linalg::LinalgError::Interval { t0, t1 }));
    }
    let h = (t1 - t0) / quad_steps as f64;
    let dt_fd = h / 64.0;
    let mut g = [[0.0f64; 2]; 2];
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for k in 0..quad_steps {
        let t = t0 + (k as f64 + 0.5) * h;
        let (c1, c2, e1v, e2v) = tracked_modes(&s(t), prev.as_ref())?;
        let anchor = (c1.clone(), c2.clone());
        let (m1, m2, _, _) = tracked_modes(&s(t - dt_fd), Some(&anchor))?;
        let (p1, p2, _, _) = tracked_modes(&s(t + dt_fd), Some(&anchor))?;
        let d1: Vec<f64> = p1
            .iter()
            .zip(&m1)
            .map(|(a, b)| (a - b) / (2.0 * dt_fd))
            .collect();
        let d2: Vec<f64> = p2
            .iter()
            .zip(&m2)
            .map(|(a, b)| (a - b) / (2.0 * dt_fd))
            .collect();
        let dot = |a: &[f64], b: &[f64]| a[0] * b[0] + a[1] * b[1];
        g[0][0] += h * (e1v - dot(&c1, &d1));
        g[0][1] += h * (e21(t) - dot(&c1, &d2));
        g[1][0] += h * (e12(t) - dot(&c2, &d1));
        g[1][1] += h * (e2v - dot(&c2, &d2));
        prev = Some(anchor);
    }
    Ok(exp2_closed(g))
}

/// Scenario import/export payload for a constant-generator run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FsmScenario {
    /// Row-major generator entries.
    pub generator: Vec<Vec<f64>>,
    pub p0: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl FsmScenario {
    pub fn run(&self) -> Result<Trajectory> {
        let s = GeneratorMatrix::from_rows(&self.generator)?;
        let p0 = ClassicalState::new(self.p0.clone())?;
        evolve(&s, &p0, self.t0, self.t1, self.steps)
    }
}
