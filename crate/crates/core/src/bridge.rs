//! The maps between the classical machine and the quantum model.
//!
//! Three constructions live here:
//!   - the sqrt-probability classical Hamiltonian H_c with
//!     H_c[i][j] = (1/2) sqrt(p_j / p_i) s_ij, which drives d sqrt(p)/dt and
//!     gives the classical rank-1 density matrix its transpose-anticommutator
//!     equation of motion,
//!   - the Re/Im probability encoding p_kR = p_k cos^2(Theta_k),
//!     p_kI = p_k sin^2(Theta_k) with tan^2 phase recovery, and
//!   - the synthesis of a 2N x 2N classical generator that reproduces an
//!     N-site quantum trajectory on the encoded vector.
//!
//! The synthesized generator is the exact sandwich 2 D(v) A D(v)^-1 of the
//! real/imaginary split A of -i H / hbar over the interleaved vector
//! v = (Re gamma_1, Im gamma_1, ...): no finite-difference phase velocities
//! enter, they are implicit in the within-site couplings.

use num_complex::Complex64;
use thiserror::Error;

use crate::fsm::{evolve, ClassicalState, FsmError, GeneratorMatrix};
use crate::linalg::{self, eig_small, Matrix};
use crate::quantum::{DensityMatrix, QuantumError, QuantumState, TightBindingHamiltonian};

/// Default clamp below which sqrt(p), cos(Theta) or sin(Theta) counts as an
/// encoding singularity.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Fsm(#[from] FsmError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("probability component {component} = {value:.3e} at or below eps = {eps:.1e}")]
    NearZeroProbability {
        component: usize,
        value: f64,
        eps: f64,
    },
    #[error("phase of component {component} undefined: p_R = {p_re:.3e} at or below eps")]
    PhaseUndefined { component: usize, p_re: f64 },
    #[error(
        "encoding singularity at t = {t:.6e}: component {component} has \
         sqrt(p) = {sqrt_p:.3e}, |cos| = {cos_abs:.3e}, |sin| = {sin_abs:.3e}"
    )]
    SingularWindow {
        t: f64,
        component: usize,
        sqrt_p: f64,
        cos_abs: f64,
        sin_abs: f64,
    },
    #[error("{0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, BridgeError>;

/// H_c[i][j] = (1/2) sqrt(p_j / p_i) s_ij (diagonal (1/2) s_ii), the
/// generator of d sqrt(p)/dt = H_c sqrt(p).
pub fn classical_hamiltonian(
    s: &GeneratorMatrix,
    p: &ClassicalState,
    eps: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = s.dim();
    if p.dim() != n {
        return Err(BridgeError::Dimension(format!(
            "state dim {} vs generator dim {n}",
            p.dim()
        )));
    }
    for (k, &pk) in p.components().iter().enumerate() {
        if pk <= eps {
            return Err(BridgeError::NearZeroProbability {
                component: k,
                value: pk,
                eps,
            });
        }
    }
    let pv = p.components();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.5 * s.get(i, i)
                    } else {
                        0.5 * (pv[j] / pv[i]).sqrt() * s.get(i, j)
                    }
                })
                .collect()
        })
        .collect())
}

/// Rank-1 classical density matrix sqrt(p) sqrt(p)^T.
#[derive(Debug, Clone)]
pub struct ClassicalDensityMatrix {
    pub rho: Vec<Vec<f64>>,
}

impl ClassicalDensityMatrix {
    pub fn dim(&self) -> usize {
        self.rho.len()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.rho[i][i]).sum()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_real_rows(&self.rho)
    }
}

pub fn classical_density(p: &ClassicalState) -> Result<ClassicalDensityMatrix> {
    for (k, &pk) in p.components().iter().enumerate() {
        if pk < 0.0 {
            return Err(BridgeError::NearZeroProbability {
                component: k,
                value: pk,
                eps: 0.0,
            });
        }
    }
    let q: Vec<f64> = p.components().iter().map(|&x| x.sqrt()).collect();
    let rho = q
        .iter()
        .map(|&a| q.iter().map(|&b| a * b).collect())
        .collect();
    Ok(ClassicalDensityMatrix { rho })
}

/// Max residual of d rho_c/dt = H_c rho_c + rho_c H_c^T along the trajectory
/// of dp/dt = S p, with the time derivative taken by centered differences on
/// the sampling grid. Shrinks as O(dt^2).
pub fn classical_density_eom_residual(
    s: &GeneratorMatrix,
    p0: &ClassicalState,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<f64> {
    assert!(steps >= 2);
    let traj = evolve(s, p0, t0, t1, steps)?;
    let dt = (t1 - t0) / steps as f64;
    let n = s.dim();
    let mut max_res: f64 = 0.0;
    for k in 1..steps {
        let state = |idx: usize| -> Result<ClassicalState> {
            Ok(ClassicalState::new(traj.states[idx].clone())?)
        };
        let pm = state(k - 1)?;
        let pc = state(k)?;
        let pp = state(k + 1)?;
        let rho_m = classical_density(&pm)?.rho;
        let rho_p = classical_density(&pp)?.rho;
        let rho_c = classical_density(&pc)?.rho;
        let hc = classical_hamiltonian(s, &pc, DEFAULT_EPS)?;
        for i in 0..n {
            for j in 0..n {
                let ddt = (rho_p[i][j] - rho_m[i][j]) / (2.0 * dt);
                let mut rhs = 0.0;
                for l in 0..n {
                    rhs += hc[i][l] * rho_c[l][j] + rho_c[i][l] * hc[j][l];
                }
                max_res = max_res.max((ddt - rhs).abs());
            }
        }
    }
    Ok(max_res)
}

/// Subsystem entropies of a 4x4 classical density matrix through the same
/// index sums as the quantum reductions. No S_A = S_B relation is implied
/// here; the classical construction is deliberately asymmetric.
pub fn classical_reduced_entropies(rho_c: &ClassicalDensityMatrix) -> Result<(f64, f64)> {
    if rho_c.dim() != 4 {
        return Err(BridgeError::Dimension(format!(
            "reduction needs a 4x4 matrix, got {0}x{0}",
            rho_c.dim()
        )));
    }
    let dm = DensityMatrix {
        rho: rho_c.to_matrix(),
    };
    let ra = crate::quantum::reduce_a(&dm)?;
    let rb = crate::quantum::reduce_b(&dm)?;
    Ok((
        crate::quantum::von_neumann_entropy(&ra)?,
        crate::quantum::von_neumann_entropy(&rb)?,
    ))
}

/// The sqrt-probability image of a classical machine: the classical
/// Hamiltonian at p0 and the phaseless amplitude vector sqrt(p0).
///
/// Real-time dynamics of sqrt(p) under H_c reproduces the machine exactly;
/// the alternative reading of the same generator as a quantum Hamiltonian in
/// rescaled time carries no extra executable content and is noted here only.
pub fn fsm_to_quantum(
    s: &GeneratorMatrix,
    p0: &ClassicalState,
    eps: f64,
) -> Result<(TightBindingHamiltonian, QuantumState)> {
    let hc = classical_hamiltonian(s, p0, eps)?;
    let h = TightBindingHamiltonian::new(Matrix::from_real_rows(&hc));
    let psi = QuantumState::new(
        p0.components()
            .iter()
            .map(|&p| Complex64::new(p.sqrt(), 0.0))
            .collect(),
    );
    Ok((h, psi))
}

/// Evolve q = sqrt(p) under dq_i/dt = (S q^2)_i / (2 q_i), the self-contained
/// sqrt-space route (H_c is re-evaluated implicitly through q). RK4 fixed
/// step; errors out if any component approaches the eps clamp.
pub fn evolve_sqrt(
    s: &GeneratorMatrix,
    p0: &ClassicalState,
    t0: f64,
    t1: f64,
    steps: usize,
    eps: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = s.dim();
    if p0.dim() != n {
        return Err(BridgeError::Dimension(format!(
            "state dim {} vs generator dim {n}",
            p0.dim()
        )));
    }
    let deriv = |q: &[f64], t: f64| -> Result<Vec<f64>> {
        let p: Vec<f64> = q.iter().map(|&x| x * x).collect();
        for (k, &pk) in p.iter().enumerate() {
            if pk <= eps {
                return Err(BridgeError::SingularWindow {
                    t,
                    component: k,
                    sqrt_p: pk.max(0.0).sqrt(),
                    cos_abs: 1.0,
                    sin_abs: 0.0,
                });
            }
        }
        let sp = s.apply(&p);
        Ok(sp.iter().zip(q).map(|(&d, &qi)| d / (2.0 * qi)).collect())
    };
    let dt = (t1 - t0) / steps as f64;
    let mut q: Vec<f64> = p0.components().iter().map(|&x| x.sqrt()).collect();
    let mut times = vec![t0];
    let mut states = vec![q.clone()];
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let k1 = deriv(&q, t)?;
        let k2 = deriv(&step(&q, &k1, dt / 2.0), t + dt / 2.0)?;
        let k3 = deriv(&step(&q, &k2, dt / 2.0), t + dt / 2.0)?;
        let k4 = deriv(&step(&q, &k3, dt), t + dt)?;
        for i in 0..q.len() {
            q[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        times.push(t + dt);
        states.push(q.clone());
    }
    Ok((times, states))
}

fn step(q: &[f64], dq: &[f64], h: f64) -> Vec<f64> {
    q.iter().zip(dq).map(|(x, d)| x + h * d).collect()
}

/// Nonnegative 2N-vector (p_1R, p_1I, ..., p_NR, p_NI) with
/// p_kR = p_k cos^2(Theta_k) and p_kI = p_k sin^2(Theta_k).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedClassicalState {
    pub components: Vec<f64>,
}

impl EncodedClassicalState {
    pub fn sites(&self) -> usize {
        self.components.len() / 2
    }

    pub fn p_re(&self, k: usize) -> f64 {
        self.components[2 * k]
    }

    pub fn p_im(&self, k: usize) -> f64 {
        self.components[2 * k + 1]
    }
}

/// p_kR = (Re gamma_k)^2, p_kI = (Im gamma_k)^2; the split is exact:
/// p_kR + p_kI = |gamma_k|^2.
pub fn encode_state(psi: &QuantumState) -> EncodedClassicalState {
    let mut components = Vec::with_capacity(2 * psi.dim());
    for g in &psi.amplitudes {
        components.push(g.re * g.re);
        components.push(g.im * g.im);
    }
    EncodedClassicalState { components }
}

/// Probabilities p_k = p_kR + p_kI recovered from the encoding.
pub fn decode_probabilities(enc: &EncodedClassicalState) -> Vec<f64> {
    (0..enc.sites())
        .map(|k| enc.p_re(k) + enc.p_im(k))
        .collect()
}

/// tan^2(Theta_k) = p_kI / p_kR; the phase itself is recovered only up to
/// sign and pi-periodicity. Components with p_kR at or below eps are
/// reported as undefined.
pub fn decode_tan_sq(enc: &EncodedClassicalState, eps: f64) -> Result<Vec<f64>> {
    (0..enc.sites())
        .map(|k| {
            let p_re = enc.p_re(k);
            if p_re <= eps {
                Err(BridgeError::PhaseUndefined { component: k, p_re })
            } else {
                Ok(enc.p_im(k) / p_re)
            }
        })
        .collect()
}

/// Interleaved real split (Re gamma_1, Im gamma_1, ...) of a state.
fn split_vector(psi: &QuantumState) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * psi.dim());
    for g in &psi.amplitudes {
        v.push(g.re);
        v.push(g.im);
    }
    v
}

fn check_window(psi: &QuantumState, t: f64, eps: f64) -> Result<()> {
    for (k, g) in psi.amplitudes.iter().enumerate() {
        let sqrt_p = g.norm();
        let cos_abs = if sqrt_p > 0.0 {
            g.re.abs() / sqrt_p
        } else {
            0.0
        };
        let sin_abs = if sqrt_p > 0.0 {
            g.im.abs() / sqrt_p
        } else {
            0.0
        };
        if sqrt_p <= eps || cos_abs <= eps || sin_abs <= eps {
            return Err(BridgeError::SingularWindow {
                t,
                component: k,
                sqrt_p,
                cos_abs,
                sin_abs,
            });
        }
    }
    Ok(())
}

/// Real/imaginary split of -i H (hbar = 1) on the interleaved vector:
/// 2x2 block (k, j) is [[Im H_kj, Re H_kj], [-Re H_kj, Im H_kj]].
pub fn split_generator(h: &Matrix) -> Result<Vec<Vec<f64>>> {
    let n = h.check_square()?;
    let mut a = vec![vec![0.0; 2 * n]; 2 * n];
    for k in 0..n {
        for j in 0..n {
            let re = h[(k, j)].re;
            let im = h[(k, j)].im;
            a[2 * k][2 * j] = im;
            a[2 * k][2 * j + 1] = re;
            a[2 * k + 1][2 * j] = -re;
            a[2 * k + 1][2 * j + 1] = im;
        }
    }
    Ok(a)
}

/// The synthesized 2N x 2N classical generator at one instant:
/// S(t) = 2 diag(v) A diag(v)^-1 with v the interleaved split of psi(t).
/// Evolving the encoded vector under it reproduces d/dt (v_a^2).
pub fn synthesized_generator(
    h: &Matrix,
    psi: &QuantumState,
    t: f64,
    eps: f64,
) -> Result<GeneratorMatrix> {
    if h.rows() != psi.dim() {
        return Err(BridgeError::Dimension(format!(
            "state dim {} vs Hamiltonian dim {}",
            psi.dim(),
            h.rows()
        )));
    }
    check_window(psi, t, eps)?;
    let a = split_generator(h)?;
    let v = split_vector(psi);
    let m = 2 * psi.dim();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| 2.0 * v[i] * a[i][j] / v[j]).collect())
        .collect();
    Ok(GeneratorMatrix::from_rows(&rows)?)
}

/// The four 4x4 blocks of an 8x8 synthesized generator, row-major.
pub fn generator_blocks(s: &GeneratorMatrix) -> Result<[Vec<Vec<f64>>; 4]> {
    if s.dim() != 8 {
        return Err(BridgeError::Dimension(format!(
            "block view is defined for 8x8 generators, got {0}x{0}",
            s.dim()
        )));
    }
    let block = |r0: usize, c0: usize| -> Vec<Vec<f64>> {
        (0..4)
            .map(|i| (0..4).map(|j| s.get(r0 + i, c0 + j)).collect())
            .collect()
    };
    Ok([block(0, 0), block(0, 4), block(4, 0), block(4, 4)])
}

/// Result of the two-route equivalence run.
#[derive(Debug, Clone)]
pub struct TwoRouteReport {
    /// Sampled times (thinned to at most ~1000 rows).
    pub times: Vec<f64>,
    /// Encoded quantum route at the sampled times.
    pub encoded: Vec<Vec<f64>>,
    /// Classical route at the sampled times.
    pub fsm: Vec<Vec<f64>>,
    /// Max |P_fsm - P_quantum| over every step and component.
    pub max_deviation: f64,
    pub steps: usize,
    pub dt: f64,
}

impl TwoRouteReport {
    /// CSV `t,enc1..enc2N,fsm1..fsm2N`.
    pub fn to_csv(&self) -> String {
        let n = self.encoded.first().map_or(0, |r| r.len());
        let mut out = String::from("t");
        for k in 1..=n {
            out.push_str(&format!(",enc{k}"));
        }
        for k in 1..=n {
            out.push_str(&format!(",fsm{k}"));
        }
        out.push('\n');
        for ((t, e), f) in self.times.iter().zip(&self.encoded).zip(&self.fsm) {
            out.push_str(&format!("{t:.16e}"));
            for x in e.iter().chain(f) {
                out.push_str(&format!(",{x:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Integrate the encoded vector under the synthesized generator and compare
/// against the encoded exact quantum trajectory over [0, t1].
///
/// The quantum side is evaluated through the eigendecomposition of the
/// (constant) Hamiltonian, so its error is machine-level; the classical side
/// is a classic 4th-order run with the generator rebuilt at every substep
/// from the quantum state. dt is the classical step.
pub fn verify_two_route(
    h: &Matrix,
    psi0: &QuantumState,
    t1: f64,
    dt: f64,
    eps: f64,
) -> Result<TwoRouteReport> {
    let n = h.check_square()?;
    if psi0.dim() != n {
        return Err(BridgeError::Dimension(format!(
            "state dim {} vs Hamiltonian dim {n}",
            psi0.dim()
        )));
    }
    let dec = eig_small(h)?;
    let vmat = Matrix::from_fn(n, |i, j| dec.pairs[j].vector[i]);
    let coeff = vmat.solve(&psi0.amplitudes)?;
    let psi_at = |t: f64| -> QuantumState {
        let phased: Vec<Complex64> = coeff
            .iter()
            .zip(&dec.pairs)
            .map(|(c, p)| c * (Complex64::new(0.0, -1.0) * p.value * t).exp())
            .collect();
        QuantumState::new(vmat.mul_vec(&phased))
    };

    let a = split_generator(h)?;
    let m = 2 * n;
    // rhs = 2 v o (A (P ./ v)), with the window check folded in.
    let rhs = |t: f64, p: &[f64]| -> Result<Vec<f64>> {
        let psi = psi_at(t);
        check_window(&psi, t, eps)?;
        let v = split_vector(&psi);
        let scaled: Vec<f64> = p.iter().zip(&v).map(|(x, vi)| x / vi).collect();
        Ok((0..m)
            .map(|i| {
                let dot: f64 = a[i].iter().zip(&scaled).map(|(aij, s)| aij * s).sum();
                2.0 * v[i] * dot
            })
            .collect())
    };

    let steps = (t1 / dt).ceil() as usize;
    let steps = steps.max(1);
    let dt = t1 / steps as f64;
    let thin = (steps / 1000).max(1);

    let mut p: Vec<f64> = encode_state(psi0).components;
    let mut report = TwoRouteReport {
        times: vec![0.0],
        encoded: vec![p.clone()],
        fsm: vec![p.clone()],
        max_deviation: 0.0,
        steps,
        dt,
    };
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = rhs(t, &p)?;
        let k2 = rhs(t + dt / 2.0, &step(&p, &k1, dt / 2.0))?;
        let k3 = rhs(t + dt / 2.0, &step(&p, &k2, dt / 2.0))?;
        let k4 = rhs(t + dt, &step(&p, &k3, dt))?;
        for i in 0..m {
            p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (k + 1) as f64 * dt;
        let enc = encode_state(&psi_at(t_next)).components;
        let dev = p
            .iter()
            .zip(&enc)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        report.max_deviation = report.max_deviation.max(dev);
        if (k + 1) % thin == 0 || k + 1 == steps {
            report.times.push(t_next);
            report.encoded.push(enc);
            report.fsm.push(p.clone());
        }
    }
    Ok(report)
}
