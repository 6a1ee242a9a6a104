//! Runnable invariant suites, one per module, with a machine-readable
//! report. Each entry checks one stated invariant at its pinned tolerance;
//! the CLI exposes the whole thing as `verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bridge;
use crate::fsm;
use crate::linalg::{eig_small, mat_exp, Matrix};
use crate::quantum;
use crate::wannier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantResult {
    pub suite: String,
    pub invariant: String,
    pub status: Status,
    pub residual: f64,
    pub tolerance: f64,
}

impl InvariantResult {
    fn check(suite: &str, invariant: &str, residual: f64, tolerance: f64) -> Self {
        InvariantResult {
            suite: suite.into(),
            invariant: invariant.into(),
            status: if residual <= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            residual,
            tolerance,
        }
    }
}

pub const SUITES: [&str; 5] = ["linalg", "fsm", "quantum", "bridge", "wannier"];

#[derive(Debug, thiserror::Error)]
#[error("unknown suite '{0}'; known suites: linalg, fsm, quantum, bridge, wannier")]
pub struct UnknownSuite(pub String);

/// Run every suite (or one, when filtered), deterministically from the seed.
pub fn run(filter: Option<&str>, seed: u64) -> Result<Vec<InvariantResult>, UnknownSuite> {
    let suites: Vec<&str> = match filter {
        Some(name) => {
            if !SUITES.contains(&name) {
                return Err(UnknownSuite(name.to_string()));
            }
            vec![name]
        }
        None => SUITES.to_vec(),
    };
    let mut out = Vec::new();
    for s in suites {
        match s {
            "linalg" => linalg_suite(&mut out, seed),
            "fsm" => fsm_suite(&mut out, seed),
            "quantum" => quantum_suite(&mut out, seed),
            "bridge" => bridge_suite(&mut out, seed),
            "wannier" => wannier_suite(&mut out, seed),
            _ => unreachable!(),
        }
    }
    Ok(out)
}

pub fn all_passed(results: &[InvariantResult]) -> bool {
    results.iter().all(|r| r.status == Status::Pass)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
        }
    }
    m
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Matrix {
    let a = random_matrix(rng, n, scale);
    a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0))
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> quantum::QuantumState {
    let amps: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    quantum::QuantumState::new(amps).normalized()
}

fn linalg_suite(out: &mut Vec<InvariantResult>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suite = "linalg";

    let mut det_res: f64 = 0.0;
    let mut inv_res: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let a = random_matrix(&mut rng, n, 1.0);
        let e = mat_exp(&a).unwrap();
        let det = e.determinant().unwrap();
        let want = a.trace().exp();
        det_res = det_res.max((det - want).norm() / want.norm());
        let em = mat_exp(&a.scale(Complex64::new(-1.0, 0.0))).unwrap();
        inv_res = inv_res.max(e.mul(&em).sub(&Matrix::identity(n)).max_abs());
    }
    out.push(InvariantResult::check(
        suite,
        "det(exp(A)) = exp(trace A)",
        det_res,
        1e-10,
    ));
    out.push(InvariantResult::check(
        suite,
        "exp(A) exp(-A) = I",
        inv_res,
        1e-10,
    ));

    let mut uni_res: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.gen_range(2..=6);
        let h = random_hermitian(&mut rng, n, 1.5);
        let u = mat_exp(&h.scale(Complex64::new(0.0, -0.8))).unwrap();
        uni_res = uni_res.max(u.adjoint().mul(&u).sub(&Matrix::identity(n)).max_abs());
    }
    out.push(InvariantResult::check(
        suite,
        "exp(-i H tau) is unitary for Hermitian H",
        uni_res,
        1e-10,
    ));

    let mut rec_res: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.gen_range(2..=6);
        let h = random_hermitian(&mut rng, n, 1.0);
        let dec = eig_small(&h).unwrap();
        let mut rec = Matrix::zeros(n, n);
        for p in &dec.pairs {
            for i in 0..n {
                for j in 0..n {
                    rec[(i, j)] += p.value * p.vector[i] * p.vector[j].conj();
                }
            }
        }
        rec_res = rec_res.max(rec.sub(&h).max_abs());
    }
    out.push(InvariantResult::check(
        suite,
        "sum lambda v v* reconstructs Hermitian A",
        rec_res,
        1e-9,
    ));
}

fn fsm_suite(out: &mut Vec<InvariantResult>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5f5f);
    let suite = "fsm";

    // Classical norm inequality for normalized interior states.
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let sq: f64 = p.iter().map(|x| x * x).sum();
        worst = worst.max(sq - 1.0);
    }
    out.push(InvariantResult::check(
        suite,
        "sum p_k^2 < 1 for normalized interior states",
        worst.max(-1.0) + 1.0,
        1.0 - 1e-12,
    ));

    // Bilinear eigenvector product identity.
    let mut id_res: f64 = 0.0;
    let mut sym_res: f64 = 0.0;
    for _ in 0..50 {
        let s = fsm::GeneratorMatrix::from_rows(&[
            vec![rng.gen_range(-1.0..1.0), rng.gen_range(0.1..1.0)],
            vec![rng.gen_range(0.1..1.0), rng.gen_range(-1.0..1.0)],
        ])
        .unwrap();
        let got = fsm::eigenvector_bilinear_product(&s).unwrap();
        let want = 1.0 - s.get(0, 1) / s.get(1, 0);
        id_res = id_res.max((got - Complex64::new(want, 0.0)).norm());
        // Symmetric case vanishes.
        let mut sym = s.clone();
        sym.set(0, 1, s.get(1, 0));
        sym_res = sym_res.max(fsm::eigenvector_bilinear_product(&sym).unwrap().norm());
    }
    out.push(InvariantResult::check(
        suite,
        "eigenvector product equals 1 - s12/s21",
        id_res,
        1e-10,
    ));
    out.push(InvariantResult::check(
        suite,
        "eigenvectors orthogonal when s12 = s21",
        sym_res,
        1e-10,
    ));

    // Constant-S mode weights evolve as pure exponentials.
    let mut w_res: f64 = 0.0;
    for _ in 0..10 {
        let s = fsm::GeneratorMatrix::from_rows(&[
            vec![rng.gen_range(-1.0..0.0), rng.gen_range(0.2..1.0)],
            vec![rng.gen_range(0.2..1.0), rng.gen_range(-1.0..0.0)],
        ])
        .unwrap();
        let modes = match fsm::eigenmodes(&s) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let p0 = fsm::ClassicalState::new(vec![0.7, 0.3]).unwrap();
        let (w10, w20) = fsm::mode_weights(&p0, &modes).unwrap();
        let t = 0.6;
        let traj = fsm::evolve(&s, &p0, 0.0, t, 200).unwrap();
        let pt = fsm::ClassicalState::new(traj.final_state().iter().map(|&x| x.max(0.0)).collect())
            .unwrap();
        let (w1t, w2t) = fsm::mode_weights(&pt, &modes).unwrap();
        w_res = w_res.max((w1t - w10 * (modes.e1 * t).exp()).norm());
        w_res = w_res.max((w2t - w20 * (modes.e2 * t).exp()).norm());
    }
    out.push(InvariantResult::check(
        suite,
        "mode weights evolve as exp(E_k t)",
        w_res,
        1e-8,
    ));

    // SIR conservation.
    let p0 = fsm::ClassicalState::new(vec![0.9, 0.1, 0.0]).unwrap();
    let traj = fsm::evolve_sir(1.2, 0.3, &p0, 0.0, 8.0, 800).unwrap();
    let cons = traj
        .states
        .iter()
        .map(|s| (s.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0f64, f64::max);
    out.push(InvariantResult::check(
        suite,
        "SIR total population conserved",
        cons,
        1e-8,
    ));

    // Projector completeness.
    let sum = fsm::projection_matrix(0, 2).add(&fsm::projection_matrix(1, 2));
    let res = sum.sub(&Matrix::identity(2)).max_abs();
    out.push(InvariantResult::check(suite, "P1 + P2 = I", res, 0.0));
}

fn quantum_suite(out: &mut Vec<InvariantResult>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa0a0);
    let suite = "quantum";

    let params = quantum::TwoQubitParams {
        e_p: [0.3, 0.5, 0.2, 0.4],
        t_a: (0.3, 0.1),
        t_b: (0.2, -0.05),
        q: 0.5,
        d: [1.0, 1.5, 1.5, 1.0],
        im_e_p: None,
    };
    let h = quantum::two_qubit_hamiltonian(&params).unwrap();
    let psi0 = random_state(&mut rng, 4);
    let traj = quantum::evolve_quantum(&h, &psi0, 0.0, 5.0, 5000).unwrap();

    let norm_res = traj
        .states
        .iter()
        .map(|s| (s.norm_sq() - 1.0).abs())
        .fold(0.0f64, f64::max);
    out.push(InvariantResult::check(
        suite,
        "norm conserved under Hermitian evolution",
        norm_res,
        1e-9,
    ));

    let energy = |psi: &quantum::QuantumState| -> f64 {
        let hp = h.matrix.mul_vec(&psi.amplitudes);
        psi.amplitudes
            .iter()
            .zip(&hp)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    };
    let e0 = energy(&traj.states[0]);
    let e_res = traj
        .states
        .iter()
        .map(|s| (energy(s) - e0).abs())
        .fold(0.0f64, f64::max);
    out.push(InvariantResult::check(
        suite,
        "energy conserved under constant Hermitian H",
        e_res,
        1e-9,
    ));

    // Liouville-von Neumann: centered-difference d rho/dt vs -i (H rho - rho H+)
    // converges at second order; check the residual ratio between two grids.
    let lvn_res = |steps: usize| -> f64 {
        let traj = quantum::evolve_quantum(&h, &psi0, 0.0, 0.5, steps).unwrap();
        let dt = 0.5 / steps as f64;
        let mid = steps / 2;
        let rho = |idx: usize| -> Matrix {
            let s = &traj.states[idx];
            Matrix::from_fn(4, |i, j| s.amplitudes[i] * s.amplitudes[j].conj())
        };
        let drho = rho(mid + 1)
            .sub(&rho(mid - 1))
            .scale(Complex64::new(1.0 / (2.0 * dt), 0.0));
        let r = rho(mid);
        let comm = h
            .matrix
            .mul(&r)
            .sub(&r.mul(&h.matrix.adjoint()))
            .scale(Complex64::new(0.0, -1.0));
        drho.sub(&comm).max_abs()
    };
    let r1 = lvn_res(250);
    let r2 = lvn_res(500);
    let ratio = r1 / r2.max(1e-300);
    out.push(InvariantResult::check(
        suite,
        "d rho/dt matches -i[H, rho] at second order",
        (ratio - 4.0).abs(),
        1.5,
    ));

    // Subsystem entropies agree for pure states.
    let mut ent_res: f64 = 0.0;
    for _ in 0..20 {
        let psi = random_state(&mut rng, 4);
        let rho = quantum::density_matrix(&psi).unwrap();
        let sa = quantum::von_neumann_entropy(&quantum::reduce_a(&rho).unwrap()).unwrap();
        let sb = quantum::von_neumann_entropy(&quantum::reduce_b(&rho).unwrap()).unwrap();
        ent_res = ent_res.max((sa - sb).abs());
    }
    out.push(InvariantResult::check(
        suite,
        "S_A = S_B for pure two-qubit states",
        ent_res,
        1e-9,
    ));

    // Dissipative evolution never gains norm.
    let mut params_d = params;
    params_d.im_e_p = Some([-0.08, -0.03, -0.05, -0.02]);
    let hd = quantum::two_qubit_hamiltonian(&params_d).unwrap();
    let traj = quantum::evolve_quantum(&hd, &psi0, 0.0, 4.0, 2000).unwrap();
    let mut gain: f64 = 0.0;
    for w in traj.states.windows(2) {
        gain = gain.max(w[1].norm_sq() - w[0].norm_sq());
    }
    out.push(InvariantResult::check(
        suite,
        "norm non-increasing under negative Im site energies",
        gain.max(0.0),
        1e-12,
    ));
}

fn bridge_suite(out: &mut Vec<InvariantResult>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1b1);
    let suite = "bridge";

    // Probability consistency of the encoding, exact.
    let mut enc_res: f64 = 0.0;
    for _ in 0..30 {
        let psi = random_state(&mut rng, 4);
        let enc = bridge::encode_state(&psi);
        let p = bridge::decode_probabilities(&enc);
        for (got, want) in p.iter().zip(psi.probabilities()) {
            enc_res = enc_res.max((got - want).abs());
        }
    }
    out.push(InvariantResult::check(
        suite,
        "decode(encode(psi)) recovers |gamma|^2",
        enc_res,
        1e-15,
    ));

    // Two-route equivalence tightens with the synthesis grid.
    let (h, psi0) = two_route_scenario();
    let dev_coarse = bridge::verify_two_route(&h, &psi0, 2.0, 4e-3, 1e-9)
        .unwrap()
        .max_deviation;
    let dev_fine = bridge::verify_two_route(&h, &psi0, 2.0, 1e-3, 1e-9)
        .unwrap()
        .max_deviation;
    out.push(InvariantResult::check(
        suite,
        "synthesized machine reproduces the encoded trajectory",
        dev_fine,
        1e-7,
    ));
    out.push(InvariantResult::check(
        suite,
        "two-route deviation shrinks with the grid",
        if dev_fine <= dev_coarse {
            0.0
        } else {
            dev_fine - dev_coarse
        },
        0.0,
    ));

    // d sqrt(p)/dt = H_c sqrt(p) at second order.
    let s = fsm::GeneratorMatrix::from_rows(&[
        vec![-0.5, 0.3, 0.1, 0.1],
        vec![0.2, -0.4, 0.3, 0.1],
        vec![0.2, 0.05, -0.5, 0.2],
        vec![0.1, 0.05, 0.1, -0.4],
    ])
    .unwrap();
    let p0 = fsm::ClassicalState::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    let hc_res = |steps: usize| -> f64 {
        let traj = fsm::evolve(&s, &p0, 0.0, 1.0, steps).unwrap();
        let dt = 1.0 / steps as f64;
        let mid = steps / 2;
        let q = |idx: usize| -> Vec<f64> { traj.states[idx].iter().map(|&x| x.sqrt()).collect() };
        let pc = fsm::ClassicalState::new(traj.states[mid].clone()).unwrap();
        let hc = bridge::classical_hamiltonian(&s, &pc, bridge::DEFAULT_EPS).unwrap();
        let (qm, qc, qp) = (q(mid - 1), q(mid), q(mid + 1));
        (0..4)
            .map(|i| {
                let ddt = (qp[i] - qm[i]) / (2.0 * dt);
                let rhs: f64 = hc[i].iter().zip(&qc).map(|(h, x)| h * x).sum();
                (ddt - rhs).abs()
            })
            .fold(0.0f64, f64::max)
    };
    let c1 = hc_res(200);
    let c2 = hc_res(400);
    out.push(InvariantResult::check(
        suite,
        "d sqrt(p)/dt = H_c sqrt(p) at second order",
        (c1 / c2.max(1e-300) - 4.0).abs(),
        1.5,
    ));

    // Classical density matrix: exact symmetry, rank 1.
    let p = fsm::ClassicalState::new(vec![0.37, 0.23, 0.29, 0.11]).unwrap();
    let rho = bridge::classical_density(&p).unwrap();
    let mut sym_res: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            sym_res = sym_res.max((rho.rho[i][j] - rho.rho[j][i]).abs());
        }
    }
    let dec = eig_small(&rho.to_matrix()).unwrap();
    let mut vals: Vec<f64> = dec.values().iter().map(|z| z.re.abs()).collect();
    vals.sort_by(f64::total_cmp);
    let rank_res = vals[..3].iter().fold(0.0f64, |m, &v| m.max(v));
    out.push(InvariantResult::check(
        suite,
        "rho_c symmetric and rank 1 at construction",
        sym_res.max(rank_res),
        1e-12,
    ));

    // Synthesized generator is 2N x 2N.
    let psi = quantum::QuantumState::from_polar(&[0.25; 4], &[0.7, 0.8, 0.6, 0.9]);
    let sgen = bridge::synthesized_generator(&h, &psi, 0.0, 1e-9).unwrap();
    out.push(InvariantResult::check(
        suite,
        "synthesized generator is 2N x 2N",
        (sgen.dim() as f64 - 8.0).abs(),
        0.0,
    ));
}

/// The in-range two-qubit scenario with a zero eigenvalue: phases of a
/// mostly-zero-mode state stay inside one quadrant, keeping the encoding
/// away from its singularities over a full beat period.
pub fn two_route_scenario() -> (Matrix, quantum::QuantumState) {
    let params = quantum::TwoQubitParams {
        e_p: [0.2, 0.2, 0.2, 0.2],
        t_a: (0.3, 0.0),
        t_b: (0.3, 0.0),
        q: 0.2f64.sqrt(),
        d: [1.0, 1.0, 1.0, 1.0],
        im_e_p: None,
    };
    let h = quantum::two_qubit_hamiltonian(&params).unwrap().matrix;
    // Zero mode (1, -1, -1, 1)/2 seeded at Theta = pi/4 plus small admixtures
    // of the other eigenvectors.
    let quarter = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let zero_mode = [0.5, -0.5, -0.5, 0.5];
    let top_mode = [0.5, 0.5, 0.5, 0.5];
    let mid_mode = [0.5, 0.5, -0.5, -0.5];
    let eps_mix = 0.1;
    let amps: Vec<Complex64> = (0..4)
        .map(|k| quarter * (zero_mode[k] + eps_mix * (top_mode[k] + mid_mode[k])))
        .collect();
    (h, quantum::QuantumState::new(amps).normalized())
}

fn wannier_suite(out: &mut Vec<InvariantResult>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc2c2);
    let suite = "wannier";

    let pot = wannier::double_well(30.0, 1.0, 0.4);
    let half = pot.natural_half_width().unwrap();
    let grid = wannier::Grid1D::symmetric(half, 512).unwrap();
    let report = wannier::solve_1d_eigen(|x| pot.evaluate(x), &grid, 2).unwrap();
    let pair = wannier::localized_pair(&report.pairs[0].psi, &report.pairs[1].psi, &grid).unwrap();

    let ortho = wannier::orthonormality_residuals(&pair, &grid)
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    out.push(InvariantResult::check(
        suite,
        "constructed pair orthonormal",
        ortho,
        1e-8,
    ));

    // Spectrum preservation of the induced tight-binding matrix.
    let (e1, e2) = (report.pairs[0].energy, report.pairs[1].energy);
    let m = wannier::tb_params(e1, e2, pair.r);
    let tr_res = (m[0][0] + m[1][1] - (e1 + e2)).abs();
    let det_res = (m[0][0] * m[1][1] - m[0][1] * m[1][0] - e1 * e2).abs();
    out.push(InvariantResult::check(
        suite,
        "tb matrix spectrum is {E1, E2}",
        tr_res.max(det_res / (e1 * e2).abs().max(1.0)),
        1e-12,
    ));

    // Localization optimality: central difference of the left mass.
    let step = 1e-3;
    let (wl_p, _) = wannier::build_wannier_pair(
        &report.pairs[0].psi,
        &report.pairs[1].psi,
        pair.gamma + step,
    );
    let (wl_m, _) = wannier::build_wannier_pair(
        &report.pairs[0].psi,
        &report.pairs[1].psi,
        pair.gamma - step,
    );
    let mass_p = wannier::half_domain_mass(&wl_p, &grid);
    let mass_m = wannier::half_domain_mass(&wl_m, &grid);
    let first_deriv = (mass_p - mass_m) / (2.0 * step);
    let is_max = (mass_p <= pair.left_mass && mass_m <= pair.left_mass) as u8;
    out.push(InvariantResult::check(
        suite,
        "left mass stationary and locally maximal",
        first_deriv.abs().max(if is_max == 1 { 0.0 } else { 1.0 }),
        1e-3,
    ));

    // 2D similarity and orthogonality over random angles.
    let mut spec_res: f64 = 0.0;
    let mut orth_res: f64 = 0.0;
    for _ in 0..20 {
        let th1 = rng.gen_range(-1.5..1.5);
        let th2 = rng.gen_range(-1.5..1.5);
        let mut e: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let hm = wannier::wannier_hamiltonian(
            [
                Complex64::new(e[0], 0.0),
                Complex64::new(e[1], 0.0),
                Complex64::new(e[2], 0.0),
                Complex64::new(e[3], 0.0),
            ],
            th1,
            th2,
        );
        let dec = eig_small(&hm).unwrap();
        let mut got: Vec<f64> = dec.values().iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        e.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&e) {
            spec_res = spec_res.max((g - w).abs());
        }
        let t = wannier::wannier2d_transform(th1, th2);
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += t.w[k][i] * t.w[k][j];
                }
                orth_res = orth_res.max((acc - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    out.push(InvariantResult::check(
        suite,
        "spectrum(H_w) equals the input energies",
        spec_res,
        1e-10,
    ));
    out.push(InvariantResult::check(
        suite,
        "W^T W = I for real angles",
        orth_res,
        1e-12,
    ));

    // Reduced Bloch ratio equals the componentwise ratio; the ratio also
    // keeps a finite clearance from the excluded value tan(gamma) for any
    // nonzero occupancies (the unreachable pole of the map).
    let r = wannier::LocalizationRatio::Finite(0.8);
    let gamma = wannier::mixing_angle(r);
    let (e1c, e2c) = (Complex64::new(0.4, 0.0), Complex64::new(1.3, 0.0));
    let mut ratio_res: f64 = 0.0;
    let mut clearance = f64::INFINITY;
    for i in 0..200 {
        let t = i as f64 * 0.05;
        let amp = wannier::wannier_amplitudes(e1c, e2c, r, 0.3, 0.7, 0.2, -0.5, t, 0.0);
        if amp.beta.norm() < 1e-6 {
            continue;
        }
        let direct = amp.alpha / amp.beta;
        let reduced = wannier::bloch_ratio(e1c, e2c, r, 0.3, 0.7, 0.2, -0.5, t, 0.0).unwrap();
        ratio_res = ratio_res.max((direct - reduced).norm());
        clearance = clearance.min((direct - Complex64::new(gamma.tan(), 0.0)).norm());
    }
    out.push(InvariantResult::check(
        suite,
        "reduced Bloch ratio equals componentwise ratio",
        ratio_res,
        1e-12,
    ));
    out.push(InvariantResult::check(
        suite,
        "ratio clears the unreachable configuration",
        (1e-3 - clearance).max(0.0),
        0.0,
    ));
}
