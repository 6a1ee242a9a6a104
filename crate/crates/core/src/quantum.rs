//! Tight-binding quantum dynamics for coupled position-based qubits:
//! Hamiltonian construction, unitary and dissipative evolution, density
//! matrices, subsystem reductions, von Neumann entropy and vector-potential
//! phase shifts. hbar = 1 and e = 1 throughout; callers rescale.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, eig_small, mat_exp, Matrix};

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("inter-dot distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("density matrix has zero trace")]
    ZeroTrace,
    #[error("density matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("eigenvalue {value:.3e} below the PSD tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("reduction requires a 4x4 density matrix, got {0}x{0}")]
    WrongReductionSize(usize),
    #[error("{0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, QuantumError>;

/// Site amplitudes gamma_k with the (p_k, Theta_k) views the classical maps
/// work with: p_k = |gamma_k|^2, Theta_k = arg gamma_k.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        QuantumState { amplitudes }
    }

    /// Build from probabilities and phases: gamma_k = sqrt(p_k) exp(i Theta_k).
    pub fn from_polar(probabilities: &[f64], phases: &[f64]) -> Self {
        QuantumState {
            amplitudes: probabilities
                .iter()
                .zip(phases)
                .map(|(&p, &th)| Complex64::from_polar(p.sqrt(), th))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|g| g.norm_sqr()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|g| g.arg()).collect()
    }

    /// Total occupation sum |gamma_k|^2; 1 for normalized states.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|g| g.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> QuantumState {
        let n = self.norm_sq().sqrt();
        QuantumState {
            amplitudes: self.amplitudes.iter().map(|g| g / n).collect(),
        }
    }
}

/// Parameters of two electrostatically coupled two-site (position-based)
/// qubits. Site energies are indexed (1A, 2A, 1B, 2B); distances
/// (1A-1B, 1A-2B, 2A-1B, 2A-2B).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoQubitParams {
    pub e_p: [f64; 4],
    /// Hopping 1A -> 2A as (re, im); the reverse hop is the conjugate.
    pub t_a: (f64, f64),
    /// Hopping 1B -> 2B.
    pub t_b: (f64, f64),
    pub q: f64,
    pub d: [f64; 4],
    /// Optional negative imaginary site energies modelling electron escape.
    pub im_e_p: Option<[f64; 4]>,
}

/// Tight-binding Hamiltonian with its dissipative flag.
#[derive(Debug, Clone)]
pub struct TightBindingHamiltonian {
    pub matrix: Matrix,
    pub dissipative: bool,
}

impl TightBindingHamiltonian {
    pub fn new(matrix: Matrix) -> Self {
        let dissipative = !matrix.is_hermitian();
        TightBindingHamiltonian {
            matrix,
            dissipative,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// The coupled two-qubit Hamiltonian on the basis
/// (1A 1B, 1A 2B, 2A 1B, 2A 2B):
/// diagonal site sums plus Coulomb q^2/d, hoppings on the printed sparsity
/// (zeros at (1,4), (4,1), (2,3), (3,2)).
pub fn two_qubit_hamiltonian(params: &TwoQubitParams) -> Result<TightBindingHamiltonian> {
    for &d in &params.d {
        if d <= 0.0 {
            return Err(QuantumError::NonPositiveDistance(d));
        }
    }
    let [e1a, e2a, e1b, e2b] = params.e_p;
    let q2 = params.q * params.q;
    let ta12 = Complex64::new(params.t_a.0, params.t_a.1); // 1A -> 2A
    let ta21 = ta12.conj();
    let tb12 = Complex64::new(params.t_b.0, params.t_b.1);
    let tb21 = tb12.conj();

    let mut h = Matrix::zeros(4, 4);
    let diag = [
        e1a + e1b + q2 / params.d[0],
        e1a + e2b + q2 / params.d[1],
        e2a + e1b + q2 / params.d[2],
        e2a + e2b + q2 / params.d[3],
    ];
    for (i, &v) in diag.iter().enumerate() {
        h[(i, i)] = Complex64::new(v, 0.0);
    }
    h[(0, 1)] = tb21;
    h[(0, 2)] = ta21;
    h[(1, 0)] = tb12;
    h[(1, 3)] = ta21;
    h[(2, 0)] = ta12;
    h[(2, 3)] = tb21;
    h[(3, 1)] = ta12;
    h[(3, 2)] = tb12;

    if let Some(im) = params.im_e_p {
        let [i1a, i2a, i1b, i2b] = im;
        let imdiag = [i1a + i1b, i1a + i2b, i2a + i1b, i2a + i2b];
        for (i, &v) in imdiag.iter().enumerate() {
            h[(i, i)] += Complex64::new(0.0, v);
        }
    }
    Ok(TightBindingHamiltonian::new(h))
}

/// Sampled quantum trajectory with unwrapped phases.
#[derive(Debug, Clone)]
pub struct QuantumTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
}

impl QuantumTrajectory {
    /// Phases of component k tracked continuously along the trajectory
    /// (2 pi jumps removed), so centered differences of Theta_k stay finite.
    pub fn unwrapped_phases(&self, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.states.len());
        let mut offset = 0.0;
        let mut prev = 0.0;
        for (idx, st) in self.states.iter().enumerate() {
            let raw = st.amplitudes[k].arg();
            if idx > 0 {
                let mut d = raw - prev;
                while d > std::f64::consts::PI {
                    d -= 2.0 * std::f64::consts::PI;
                    offset -= 2.0 * std::f64::consts::PI;
                }
                while d < -std::f64::consts::PI {
                    d += 2.0 * std::f64::consts::PI;
                    offset += 2.0 * std::f64::consts::PI;
                }
            }
            prev = raw;
            out.push(raw + offset);
        }
        out
    }

    /// dTheta_k/dt by centered differences on the sampling grid (one-sided at
    /// the ends).
    pub fn phase_velocities(&self, k: usize) -> Vec<f64> {
        let theta = self.unwrapped_phases(k);
        let n = theta.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            out[i] = (theta[b] - theta[a]) / (self.times[b] - self.times[a]);
        }
        out
    }

    /// CSV `t,p1..p4,theta1..theta4,norm,S_A,S_B` for 4-site trajectories.
    pub fn to_csv(&self) -> Result<String> {
        let n = self.states.first().map(|s| s.dim()).unwrap_or(0);
        if n != 4 {
            return Err(QuantumError::Dimension(format!(
                "trajectory CSV schema is for 4-site states, got {n}"
            )));
        }
        let thetas: Vec<Vec<f64>> = (0..4).map(|k| self.unwrapped_phases(k)).collect();
        let mut out = String::from("t,p1,p2,p3,p4,theta1,theta2,theta3,theta4,norm,S_A,S_B\n");
        for (i, (t, st)) in self.times.iter().zip(&self.states).enumerate() {
            out.push_str(&format!("{t:.16e}"));
            for p in st.probabilities() {
                out.push_str(&format!(",{p:.16e}"));
            }
            for th in &thetas {
                out.push_str(&format!(",{:.16e}", th[i]));
            }
            let rho = density_matrix(st)?;
            let sa = von_neumann_entropy(&reduce_a(&rho)?)?;
            let sb = von_neumann_entropy(&reduce_b(&rho)?)?;
            out.push_str(&format!(",{:.16e},{sa:.16e},{sb:.16e}\n", st.norm_sq()));
        }
        Ok(out)
    }
}

/// Solve i dpsi/dt = H psi (hbar = 1) with per-step exponentials
/// exp(-i H dt); the propagator is computed once for constant H.
pub fn evolve_quantum(
    h: &TightBindingHamiltonian,
    psi0: &QuantumState,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<QuantumTrajectory> {
    if psi0.dim() != h.dim() {
        return Err(QuantumError::Dimension(format!(
            "state dim {} vs Hamiltonian dim {}",
            psi0.dim(),
            h.dim()
        )));
    }
    if t1 < t0 {
        return Err(QuantumError::Linalg(linalg::LinalgError::Interval {
            t0,
            t1,
        }));
    }
    assert!(steps >= 1);
    let dt = (t1 - t0) / steps as f64;
    let u = mat_exp(&h.matrix.scale(Complex64::new(0.0, -dt)))?;
    let mut traj = QuantumTrajectory {
        times: vec![t0],
        states: vec![psi0.clone()],
    };
    let mut psi = psi0.amplitudes.clone();
    for k in 0..steps {
        psi = u.mul_vec(&psi);
        traj.times.push(t0 + (k as f64 + 1.0) * dt);
        traj.states.push(QuantumState::new(psi.clone()));
    }
    Ok(traj)
}

/// Time-dependent variant with midpoint exponentials.
pub fn evolve_quantum_td(
    h: impl Fn(f64) -> Matrix,
    psi0: &QuantumState,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<QuantumTrajectory> {
    if t1 < t0 {
        return Err(QuantumError::Linalg(linalg::LinalgError::Interval {
            t0,
            t1,
        }));
    }
    assert!(steps >= 1);
    let dt = (t1 - t0) / steps as f64;
    let mut traj = QuantumTrajectory {
        times: vec![t0],
        states: vec![psi0.clone()],
    };
    let mut psi = psi0.amplitudes.clone();
    for k in 0..steps {
        let t_mid = t0 + (k as f64 + 0.5) * dt;
        let u = mat_exp(&h(t_mid).scale(Complex64::new(0.0, -dt)))?;
        psi = u.mul_vec(&psi);
        traj.times.push(t0 + (k as f64 + 1.0) * dt);
        traj.states.push(QuantumState::new(psi.clone()));
    }
    Ok(traj)
}

/// Density matrix with trace and purity accessors.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub rho: Matrix,
}

impl DensityMatrix {
    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.rho.mul(&self.rho).trace().re
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }
}

/// rho = |psi><psi| / <psi|psi>.
pub fn density_matrix(psi: &QuantumState) -> Result<DensityMatrix> {
    let nsq = psi.norm_sq();
    if nsq <= 0.0 {
        return Err(QuantumError::ZeroTrace);
    }
    let n = psi.dim();
    let rho = Matrix::from_fn(n, |i, j| psi.amplitudes[i] * psi.amplitudes[j].conj() / nsq);
    Ok(DensityMatrix { rho })
}

/// Reduced density matrix of subsystem A by the index sums
/// [[r11+r22, r13+r24], [r31+r42, r33+r44]], normalized by the total trace.
pub fn reduce_a(rho: &DensityMatrix) -> Result<DensityMatrix> {
    reduce(
        rho,
        [
            [(0, 0), (1, 1), (0, 2), (1, 3)],
            [(2, 0), (3, 1), (2, 2), (3, 3)],
        ],
    )
}

/// Reduced density matrix of subsystem B:
/// [[r11+r33, r12+r34], [r21+r43, r22+r44]], normalized by the total trace.
pub fn reduce_b(rho: &DensityMatrix) -> Result<DensityMatrix> {
    reduce(
        rho,
        [
            [(0, 0), (2, 2), (0, 1), (2, 3)],
            [(1, 0), (3, 2), (1, 1), (3, 3)],
        ],
    )
}

fn reduce(rho: &DensityMatrix, idx: [[(usize, usize); 4]; 2]) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(QuantumError::WrongReductionSize(rho.dim()));
    }
    let tr = rho.rho.trace();
    if tr.norm() <= 0.0 {
        return Err(QuantumError::ZeroTrace);
    }
    let mut out = Matrix::zeros(2, 2);
    for (row, entries) in idx.iter().enumerate() {
        out[(row, 0)] = (rho.rho[entries[0]] + rho.rho[entries[1]]) / tr;
        out[(row, 1)] = (rho.rho[entries[2]] + rho.rho[entries[3]]) / tr;
    }
    Ok(DensityMatrix { rho: out })
}

/// von Neumann entropy -sum lambda ln lambda in nats over eigenvalues above
/// 1e-14; eigenvalues in [-1e-10, 0) are clipped to zero, anything below
/// -1e-8 is rejected as an invalid density matrix.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let defect = rho.rho.hermitian_defect();
    if defect > 1e-10 * rho.rho.max_abs().max(1.0) {
        return Err(QuantumError::NotHermitian(defect));
    }
    let dec = eig_small(&rho.rho)?;
    let mut s = 0.0;
    for pair in &dec.pairs {
        let mut lambda = pair.value.re;
        if lambda < -1e-8 {
            return Err(QuantumError::NegativeEigenvalue { value: lambda });
        }
        if lambda < 0.0 {
            lambda = 0.0;
        }
        if lambda > 1e-14 {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s)
}

/// Same entropy in bits.
pub fn von_neumann_entropy_bits(rho: &DensityMatrix) -> Result<f64> {
    Ok(von_neumann_entropy(rho)? / std::f64::consts::LN_2)
}

/// Aharonov-Bohm phase shifts from site-local vector potential values
/// (A_x at 1A, 2A, 1B, 2B): each node phase picks up the sum over its two
/// occupied sites times delta_l * e_over_hbar. Probabilities are untouched.
pub fn apply_ab_phases(
    psi: &QuantumState,
    a_x: [f64; 4],
    delta_l: f64,
    e_over_hbar: f64,
) -> Result<QuantumState> {
    if psi.dim() != 4 {
        return Err(QuantumError::Dimension(format!(
            "Aharonov-Bohm map is defined on the 4 node states, got {}",
            psi.dim()
        )));
    }
    let [a1a, a2a, a1b, a2b] = a_x;
    let shifts = [a1a + a1b, a1a + a2b, a2a + a1b, a2a + a2b];
    Ok(QuantumState::new(
        psi.amplitudes
            .iter()
            .zip(&shifts)
            .map(|(g, &s)| g * Complex64::from_polar(1.0, s * delta_l * e_over_hbar))
            .collect(),
    ))
}

/// JSON import schema for Hamiltonians, matching the CLI interface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    #[serde(rename = "E_p")]
    pub e_p: [f64; 4],
    pub t_s: HoppingSpec,
    pub q: f64,
    pub d: [f64; 4],
    #[serde(rename = "dissipative_im_Ep", skip_serializing_if = "Option::is_none")]
    pub dissipative_im_ep: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoppingSpec {
    #[serde(rename = "1A2A")]
    pub a: [f64; 2],
    #[serde(rename = "1B2B")]
    pub b: [f64; 2],
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<TightBindingHamiltonian> {
        two_qubit_hamiltonian(&TwoQubitParams {
            e_p: self.e_p,
            t_a: (self.t_s.a[0], self.t_s.a[1]),
            t_b: (self.t_s.b[0], self.t_s.b[1]),
            q: self.q,
            d: self.d,
            im_e_p: self.dissipative_im_ep,
        })
    }
}
