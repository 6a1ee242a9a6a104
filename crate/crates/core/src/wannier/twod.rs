//! Four-region Wannier transform W = R(theta1) (x) R(theta2), the induced
//! Hamiltonian, the time-dependent correction term, the stationarity
//! equations for the two angles, and the generalized affine machine the
//! Wannier dynamics maps onto.

use num_complex::Complex64;

use super::{Result, WannierError};
use crate::linalg::{eig_small, Matrix};

/// 2x2 rotation [[cos, sin], [-sin, cos]].
fn rot(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

fn kron2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// The transform, its inverse, and the unit-sphere parameters
/// (u1, u2, u3, u4) = (a1 b1, -a1 b2, -a2 b1, a2 b2) with
/// a = (cos t1, sin t1), b = (cos t2, sin t2); sum u_k^2 = 1.
#[derive(Debug, Clone)]
pub struct Wannier2d {
    pub theta1: f64,
    pub theta2: f64,
    pub w: [[f64; 4]; 4],
    pub w_inv: [[f64; 4]; 4],
    pub u: [f64; 4],
}

pub fn wannier2d_transform(theta1: f64, theta2: f64) -> Wannier2d {
    let w = kron2(rot(theta1), rot(theta2));
    let w_inv = kron2(rot(-theta1), rot(-theta2));
    let (a1, a2) = (theta1.cos(), theta1.sin());
    let (b1, b2) = (theta2.cos(), theta2.sin());
    Wannier2d {
        theta1,
        theta2,
        w,
        w_inv,
        u: [a1 * b1, -a1 * b2, -a2 * b1, a2 * b2],
    }
}

/// Coefficient vector of w_1 in the eigenbasis.
fn coeffs(theta1: f64, theta2: f64) -> [f64; 4] {
    let (a1, a2) = (theta1.cos(), theta1.sin());
    let (b1, b2) = (theta2.cos(), theta2.sin());
    [a1 * b1, a1 * b2, a2 * b1, a2 * b2]
}

/// Region-one mass f1(theta1, theta2) = c^T Gamma c.
pub fn region_mass(gamma: &[[f64; 4]; 4], theta1: f64, theta2: f64) -> f64 {
    let c = coeffs(theta1, theta2);
    let mut m = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m += c[i] * gamma[i][j] * c[j];
        }
    }
    m
}

/// d f1 / d theta_k without tan substitutions (stable at theta = pi/2):
/// 2 (dc/dtheta_k)^T Gamma c.
fn mass_gradient(gamma: &[[f64; 4]; 4], theta1: f64, theta2: f64) -> (f64, f64) {
    let (a1, a2) = (theta1.cos(), theta1.sin());
    let (b1, b2) = (theta2.cos(), theta2.sin());
    let c = coeffs(theta1, theta2);
    let d1 = [-a2 * b1, -a2 * b2, a1 * b1, a1 * b2];
    let d2 = [-a1 * b2, a1 * b1, -a2 * b2, a2 * b1];
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            g1 += 2.0 * d1[i] * gamma[i][j] * c[j];
            g2 += 2.0 * d2[i] * gamma[i][j] * c[j];
        }
    }
    (g1, g2)
}

/// One stationarity equation in tan form: P (1 - t^2) + Q t = 0, i.e.
/// P t^2 - Q t - P = 0. The two roots differ by pi/2 in angle space
/// (their product is -1).
fn angle_candidates(p: f64, q: f64, scale: f64) -> [f64; 2] {
    if p.abs() <= 1e-14 * scale {
        return [0.0, std::f64::consts::FRAC_PI_2];
    }
    let disc = (q * q + 4.0 * p * p).sqrt();
    let t_plus = (q + disc) / (2.0 * p);
    [t_plus.atan(), t_plus.atan() - std::f64::consts::FRAC_PI_2]
}

fn eq1_coeffs(g: &[[f64; 4]; 4], t2: f64) -> (f64, f64) {
    let p = g[0][2] + t2 * (g[0][3] + g[1][2]) + t2 * t2 * g[1][3];
    let q = -g[0][0] - t2 * t2 * g[1][1] + g[2][2] + t2 * t2 * g[3][3] - 2.0 * t2 * g[0][1]
        + 2.0 * t2 * g[2][3];
    (p, q)
}

fn eq2_coeffs(g: &[[f64; 4]; 4], t1: f64) -> (f64, f64) {
    let p = g[0][1] + t1 * (g[0][3] + g[1][2]) + t1 * t1 * g[2][3];
    let q = -g[0][0] + g[1][1] - t1 * t1 * g[2][2] + t1 * t1 * g[3][3] - 2.0 * t1 * g[0][2]
        + 2.0 * t1 * g[1][3];
    (p, q)
}

/// One converged stationary angle pair with its region-one mass and the
/// gradient residuals at the fixed point.
#[derive(Debug, Clone, Copy)]
pub struct AngleSolution {
    pub theta1: f64,
    pub theta2: f64,
    pub mass: f64,
    pub residual: f64,
}

/// Stationary angle pairs of the region-one mass, from alternating
/// closed-form quadratic solves started at theta = 0. All distinct fixed
/// points reached under the four root-branch policies are returned,
/// sorted by descending mass.
pub fn solve_angles_2d(gamma: &[[f64; 4]; 4]) -> Result<Vec<AngleSolution>> {
    let scale = gamma
        .iter()
        .flatten()
        .fold(1e-30f64, |m, &x| m.max(x.abs()));
    let mut found: Vec<AngleSolution> = Vec::new();

    for policy in 0..4 {
        let pick1 = policy & 1 == 0;
        let pick2 = policy & 2 == 0;
        let mut th1 = 0.0f64;
        let mut th2 = 0.0f64;
        let mut converged = false;
        for _iter in 0..200 {
            let (p1, q1) = eq1_coeffs(gamma, th2.tan());
            let cands = angle_candidates(p1, q1, scale);
            let new1 = pick_branch(gamma, cands, th2, true, pick1);
            let (p2, q2) = eq2_coeffs(gamma, new1.tan());
            let cands = angle_candidates(p2, q2, scale);
            let new2 = pick_branch(gamma, cands, new1, false, pick2);
            let delta = (new1 - th1).abs() + (new2 - th2).abs();
            th1 = new1;
            th2 = new2;
            if delta < 1e-12 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(WannierError::NoAngleConvergence {
                iterations: 200,
                last: (th1, th2),
            });
        }
        let (g1, g2) = mass_gradient(gamma, th1, th2);
        let residual = g1.abs().max(g2.abs());
        let sol = AngleSolution {
            theta1: th1,
            theta2: th2,
            mass: region_mass(gamma, th1, th2),
            residual,
        };
        let dup = found.iter().any(|s| {
            angle_dist(s.theta1, sol.theta1) < 1e-9 && angle_dist(s.theta2, sol.theta2) < 1e-9
        });
        if !dup {
            found.push(sol);
        }
    }
    found.sort_by(|a, b| b.mass.total_cmp(&a.mass));
    Ok(found)
}

fn angle_dist(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(std::f64::consts::PI);
    if d > std::f64::consts::FRAC_PI_2 {
        d = std::f64::consts::PI - d;
    }
    d
}

fn pick_branch(
    gamma: &[[f64; 4]; 4],
    candidates: [f64; 2],
    other: f64,
    first_angle: bool,
    maximize: bool,
) -> f64 {
    let mass_of = |th: f64| {
        if first_angle {
            region_mass(gamma, th, other)
        } else {
            region_mass(gamma, other, th)
        }
    };
    let (m0, m1) = (mass_of(candidates[0]), mass_of(candidates[1]));
    if (m0 >= m1) == maximize {
        candidates[0]
    } else {
        candidates[1]
    }
}

/// Exact region-one overlap matrix for the separable box eigenfunctions
/// with level order (1,1), (2,1), (1,2), (2,2) (x index first). The second
/// y mode carries a flipped sign so the upper-left region carries the
/// maximum mass at theta1 = theta2 = pi/4.
pub fn separable_box_region1_overlaps() -> [[f64; 4]; 4] {
    // Half-domain overlap of box modes m, n over the left half in scaled
    // coordinates: 1/2 on the diagonal, else
    // sin((m-n) pi/2)/((m-n) pi) - sin((m+n) pi/2)/((m+n) pi).
    let half = |m: usize, n: usize| -> f64 {
        if m == n {
            0.5
        } else {
            let dm = m as f64 - n as f64;
            let sm = m as f64 + n as f64;
            (dm * std::f64::consts::FRAC_PI_2).sin() / (dm * std::f64::consts::PI)
                - (sm * std::f64::consts::FRAC_PI_2).sin() / (sm * std::f64::consts::PI)
        }
    };
    let x_left = |m: usize, n: usize| half(m, n);
    let y_up = |m: usize, n: usize| -> f64 {
        let flip = |k: usize| if k == 2 { -1.0 } else { 1.0 };
        let total = if m == n { 1.0 } else { 0.0 };
        flip(m) * flip(n) * (total - half(m, n))
    };
    let mx = [1, 2, 1, 2];
    let my = [1, 1, 2, 2];
    let mut g = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            g[i][j] = x_left(mx[i], mx[j]) * y_up(my[i], my[j]);
        }
    }
    g
}

/// Box energies for the same level order, hbar = m = 1, square side l.
pub fn separable_box_energies(l: f64) -> [f64; 4] {
    let unit = std::f64::consts::PI.powi(2) / (2.0 * l * l);
    [2.0 * unit, 5.0 * unit, 5.0 * unit, 8.0 * unit]
}

/// H_w = W diag(E) W^-1; complex energies allowed (dissipative case).
pub fn wannier_hamiltonian(e: [Complex64; 4], theta1: f64, theta2: f64) -> Matrix {
    let t = wannier2d_transform(theta1, theta2);
    let mut h = Matrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..4 {
                acc += e[k] * t.w[i][k] * t.w_inv[k][j];
            }
            h[(i, j)] = acc;
        }
    }
    h
}

/// The time-dependent correction -i (dW/dt) W^-1 by centered differences
/// over three samples of each angle at spacing dt. Zero for constant
/// angles; purely imaginary (an effective potential term) otherwise.
pub fn dissipative_wannier_term(theta1: &[f64], theta2: &[f64], dt: f64) -> Result<Matrix> {
    if theta1.len() < 3 || theta2.len() < 3 {
        return Err(WannierError::NotEnoughSamples);
    }
    let mid = theta1.len() / 2;
    let w_minus = wannier2d_transform(theta1[mid - 1], theta2[mid - 1]).w;
    let w_plus = wannier2d_transform(theta1[mid + 1], theta2[mid + 1]).w;
    let center = wannier2d_transform(theta1[mid], theta2[mid]);
    let mut out = Matrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                let dw = (w_plus[i][k] - w_minus[i][k]) / (2.0 * dt);
                acc += dw * center.w_inv[k][j];
            }
            out[(i, j)] = Complex64::new(0.0, -acc);
        }
    }
    Ok(out)
}

/// The affine machine over (P_1re, P_1im, ..., P_4re, P_4im) carried by a
/// Wannier-basis trajectory: dP/dt = M(t) P, and in the shifted nonnegative
/// variables P_rep = 1 + P (each in (0, 2)), dP_rep/dt = M P_rep + b with
/// b = -M 1.
#[derive(Debug, Clone)]
pub struct AffineFsm {
    pub times: Vec<f64>,
    pub matrices: Vec<[[f64; 8]; 8]>,
}

impl AffineFsm {
    pub fn offset(&self, idx: usize) -> [f64; 8] {
        affine_fsm_offset(&self.matrices[idx])
    }
}

/// M(t) from the occupancies and their rates: diagonal 2x2 blocks
/// [[a_k, h_kk], [-h_kk, a_k]] with a_k = (d eta_k/dt)/(2 eta_k), and
/// off-diagonal blocks [[0, h_kj], [-h_kj, 0]] with
/// h_kj = H_w[k][j] sqrt(eta_k / eta_j) (hbar = 1).
pub fn affine_fsm_matrix(
    h_w: &[[f64; 4]; 4],
    eta: [f64; 4],
    eta_dot: [f64; 4],
    eps: f64,
) -> Result<[[f64; 8]; 8]> {
    for (k, &e) in eta.iter().enumerate() {
        if e <= eps {
            return Err(WannierError::EtaBelowEps {
                component: k,
                value: e,
            });
        }
    }
    let mut m = [[0.0; 8]; 8];
    for k in 0..4 {
        let a = eta_dot[k] / (2.0 * eta[k]);
        m[2 * k][2 * k] = a;
        m[2 * k + 1][2 * k + 1] = a;
        for j in 0..4 {
            let h = h_w[k][j] * (eta[k] / eta[j]).sqrt();
            m[2 * k][2 * j + 1] += h;
            m[2 * k + 1][2 * j] -= h;
        }
    }
    Ok(m)
}

/// b = -M 1 for the shifted variables.
pub fn affine_fsm_offset(m: &[[f64; 8]; 8]) -> [f64; 8] {
    let mut b = [0.0; 8];
    for i in 0..8 {
        b[i] = -m[i].iter().sum::<f64>();
    }
    b
}

/// Renormalized probability view: each shifted component divided by the sum
/// of all eight.
pub fn renormalized_probabilities(p_shifted: &[f64; 8]) -> [f64; 8] {
    let total: f64 = p_shifted.iter().sum();
    let mut out = [0.0; 8];
    for i in 0..8 {
        out[i] = p_shifted[i] / total;
    }
    out
}

/// Build the affine machine along sampled occupancy trajectories; the rates
/// d eta/dt come from centered differences on the samples (one-sided at the
/// ends). The xi trajectory is carried for state encoding; M itself only
/// needs eta.
pub fn fsm_from_wannier(
    h_w: &[[f64; 4]; 4],
    eta_traj: &[[f64; 4]],
    xi_traj: &[[f64; 4]],
    times: &[f64],
    eps: f64,
) -> Result<AffineFsm> {
    if eta_traj.len() < 3 {
        return Err(WannierError::NotEnoughSamples);
    }
    if eta_traj.len() != times.len() || xi_traj.len() != times.len() {
        return Err(WannierError::Domain(
            "eta, xi and time sample counts must match".into(),
        ));
    }
    let n = times.len();
    let mut matrices = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        let dt = times[hi] - times[lo];
        let mut eta_dot = [0.0; 4];
        for k in 0..4 {
            eta_dot[k] = (eta_traj[hi][k] - eta_traj[lo][k]) / dt;
        }
        matrices.push(affine_fsm_matrix(h_w, eta_traj[i], eta_dot, eps)?);
    }
    Ok(AffineFsm {
        times: times.to_vec(),
        matrices,
    })
}

/// Two-route check of the affine machine: the Wannier-basis state evolves
/// exactly (through the eigendecomposition of H_w); the encoded vector is
/// integrated under M(t) with d eta/dt taken by centered differences, and
/// the two are compared.
#[derive(Debug, Clone)]
pub struct AffineFsmReport {
    pub times: Vec<f64>,
    pub encoded: Vec<[f64; 8]>,
    pub fsm: Vec<[f64; 8]>,
    pub max_deviation: f64,
}

pub fn verify_affine_fsm(
    h_w: &[[f64; 4]; 4],
    c0: &[Complex64; 4],
    t1: f64,
    dt: f64,
    eps: f64,
) -> Result<AffineFsmReport> {
    let h = Matrix::from_real_rows(&h_w.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    let dec = eig_small(&h)?;
    let vmat = Matrix::from_fn(4, |i, j| dec.pairs[j].vector[i]);
    let coeff = vmat.solve(c0.as_ref())?;
    let c_at = |t: f64| -> [Complex64; 4] {
        let phased: Vec<Complex64> = coeff
            .iter()
            .zip(&dec.pairs)
            .map(|(c, p)| c * (Complex64::new(0.0, -1.0) * p.value * t).exp())
            .collect();
        let v = vmat.mul_vec(&phased);
        [v[0], v[1], v[2], v[3]]
    };
    let encode = |c: &[Complex64; 4]| -> [f64; 8] {
        let mut p = [0.0; 8];
        for k in 0..4 {
            // P_kre = eta cos(xi) = |c| Re(c), P_kim = |c| Im(c).
            let n = c[k].norm();
            p[2 * k] = n * c[k].re;
            p[2 * k + 1] = n * c[k].im;
        }
        p
    };
    let eta_of = |c: &[Complex64; 4]| -> [f64; 4] {
        [
            c[0].norm_sqr(),
            c[1].norm_sqr(),
            c[2].norm_sqr(),
            c[3].norm_sqr(),
        ]
    };

    let m_at = |t: f64| -> Result<[[f64; 8]; 8]> {
        let eta = eta_of(&c_at(t));
        let em = eta_of(&c_at(t - dt));
        let ep = eta_of(&c_at(t + dt));
        let mut eta_dot = [0.0; 4];
        for k in 0..4 {
            eta_dot[k] = (ep[k] - em[k]) / (2.0 * dt);
        }
        affine_fsm_matrix(h_w, eta, eta_dot, eps)
    };

    let steps = ((t1 / dt).ceil() as usize).max(1);
    let dt = t1 / steps as f64;
    let thin = (steps / 1000).max(1);
    let mut p = encode(&c_at(0.0));
    let mut report = AffineFsmReport {
        times: vec![0.0],
        encoded: vec![p],
        fsm: vec![p],
        max_deviation: 0.0,
    };
    let apply = |m: &[[f64; 8]; 8], x: &[f64; 8]| -> [f64; 8] {
        let mut out = [0.0; 8];
        for i in 0..8 {
            out[i] = m[i].iter().zip(x).map(|(a, b)| a * b).sum();
        }
        out
    };
    for k in 0..steps {
        let t = k as f64 * dt;
        let m0 = m_at(t)?;
        let mh = m_at(t + dt / 2.0)?;
        let m1 = m_at(t + dt)?;
        let k1 = apply(&m0, &p);
        let k2 = apply(&mh, &addh(&p, &k1, dt / 2.0));
        let k3 = apply(&mh, &addh(&p, &k2, dt / 2.0));
        let k4 = apply(&m1, &addh(&p, &k3, dt));
        for i in 0..8 {
            p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (k + 1) as f64 * dt;
        let enc = encode(&c_at(t_next));
        let dev = p
            .iter()
            .zip(&enc)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        report.max_deviation = report.max_deviation.max(dev);
        if (k + 1) % thin == 0 || k + 1 == steps {
            report.times.push(t_next);
            report.encoded.push(enc);
            report.fsm.push(p);
        }
    }
    Ok(report)
}

fn addh(x: &[f64; 8], d: &[f64; 8], h: f64) -> [f64; 8] {
    let mut out = [0.0; 8];
    for i in 0..8 {
        out[i] = x[i] + h * d[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn transform_identities() {
        let t = wannier2d_transform(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(t.w[i][j], want, epsilon = 1e-15);
            }
        }

        let t = wannier2d_transform(FRAC_PI_4, FRAC_PI_4);
        for row in &t.w {
            for x in row {
                assert_abs_diff_eq!(x.abs(), 0.5, epsilon = 1e-15);
            }
        }
        // Sign pattern of the first row/column block structure.
        assert!(t.w[0].iter().all(|&x| x > 0.0));
        assert!(t.w[1][0] < 0.0 && t.w[1][1] > 0.0 && t.w[1][2] < 0.0 && t.w[1][3] > 0.0);

        // W W^-1 = I, unit u for random angles.
        let t = wannier2d_transform(0.83, -1.37);
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += t.w[i][k] * t.w_inv[k][j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(acc, want, epsilon = 1e-14);
            }
        }
        let unorm: f64 = t.u.iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(unorm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn stationarity_equations_match_gradient() {
        // The tan-form coefficients must reproduce the direct derivative of
        // the mass functional up to the cos^2 cos^2 prefactor.
        let g = separable_box_region1_overlaps();
        for &(th1, th2) in &[(0.3, -0.7), (0.9, 0.2), (-1.1, 1.3)] {
            let (grad1, grad2) = mass_gradient(&g, th1, th2);
            let (p1, q1) = eq1_coeffs(&g, th2.tan());
            let t1 = th1.tan();
            let scaled =
                2.0 * th1.cos().powi(2) * th2.cos().powi(2) * (p1 * (1.0 - t1 * t1) + q1 * t1);
            assert_abs_diff_eq!(grad1, scaled, epsilon = 1e-10);
            let (p2, q2) = eq2_coeffs(&g, th1.tan());
            let t2 = th2.tan();
            let scaled =
                2.0 * th1.cos().powi(2) * th2.cos().powi(2) * (p2 * (1.0 - t2 * t2) + q2 * t2);
            assert_abs_diff_eq!(grad2, scaled, epsilon = 1e-10);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = separable_box_region1_overlaps();
        let (th1, th2) = (0.42, -0.58);
        let d = 1e-6;
        let (g1, g2) = mass_gradient(&g, th1, th2);
        let fd1 = (region_mass(&g, th1 + d, th2) - region_mass(&g, th1 - d, th2)) / (2.0 * d);
        let fd2 = (region_mass(&g, th1, th2 + d) - region_mass(&g, th1, th2 - d)) / (2.0 * d);
        assert_abs_diff_eq!(g1, fd1, epsilon = 1e-8);
        assert_abs_diff_eq!(g2, fd2, epsilon = 1e-8);
    }

    #[test]
    fn separable_box_solves_to_quarter_pi() {
        let g = separable_box_region1_overlaps();
        let sols = solve_angles_2d(&g).unwrap();
        let best = &sols[0];
        assert_abs_diff_eq!(best.theta1, FRAC_PI_4, epsilon = 1e-8);
        assert_abs_diff_eq!(best.theta2, FRAC_PI_4, epsilon = 1e-8);
        assert!(best.residual <= 1e-10);
        // Mass = (1/2 + 4/(3 pi))^2 for the product construction.
        let axis = 0.5 + 4.0 / (3.0 * PI);
        assert_abs_diff_eq!(best.mass, axis * axis, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_overlaps_are_already_stationary() {
        let mut g = [[0.0; 4]; 4];
        for (i, v) in [0.9, 0.4, 0.3, 0.1].into_iter().enumerate() {
            g[i][i] = v;
        }
        let sols = solve_angles_2d(&g).unwrap();
        let best = &sols[0];
        assert_abs_diff_eq!(best.theta1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(best.theta2, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(best.mass, 0.9, epsilon = 1e-14);
    }

    #[test]
    fn hamiltonian_examples() {
        // Equal energies: scalar matrix for any angles.
        let e = [c64(1.5, 0.0); 4];
        let h = wannier_hamiltonian(e, 0.7, -0.4);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.5 } else { 0.0 };
                assert_abs_diff_eq!(h[(i, j)].re, want, epsilon = 1e-13);
            }
        }
        // Zero angles: diagonal.
        let e = [c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0), c64(4.0, 0.0)];
        let h = wannier_hamiltonian(e, 0.0, 0.0);
        for i in 0..4 {
            assert_abs_diff_eq!(h[(i, i)].re, (i + 1) as f64, epsilon = 1e-14);
        }
        // Closed-form H_w11.
        let (th1, th2) = (0.6, 1.1);
        let h = wannier_hamiltonian(e, th1, th2);
        let (a1, a2) = (th1.cos(), th1.sin());
        let (b1, b2) = (th2.cos(), th2.sin());
        let want =
            a1 * a1 * (b1 * b1 * 1.0 + b2 * b2 * 2.0) + a2 * a2 * (b1 * b1 * 3.0 + b2 * b2 * 4.0);
        assert_abs_diff_eq!(h[(0, 0)].re, want, epsilon = 1e-12);
        // Similarity: spectrum preserved.
        let dec = eig_small(&h).unwrap();
        let mut vals: Vec<f64> = dec.values().iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        for (got, want) in vals.iter().zip(&[1.0, 2.0, 3.0, 4.0]) {
            assert_abs_diff_eq!(*got, *want, epsilon = 1e-10);
        }
    }

    #[test]
    fn correction_term_examples() {
        // Constant angles: zero matrix.
        let z = dissipative_wannier_term(&[0.4, 0.4, 0.4], &[0.9, 0.9, 0.9], 1e-3).unwrap();
        assert!(z.max_abs() < 1e-12);

        // theta1 = omega t, theta2 = 0: -i omega (J (x) I).
        let om = 0.8;
        let dt = 1e-5;
        let th1 = [-om * dt, 0.0, om * dt];
        let term = dissipative_wannier_term(&th1, &[0.0; 3], dt).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let jj = [[0.0, 1.0], [-1.0, 0.0]];
                let want = if i % 2 == j % 2 && (i / 2 != j / 2 || i == j) {
                    // J (x) I: block structure over the first index.
                    if i % 2 == j % 2 && i / 2 != j / 2 {
                        jj[i / 2][j / 2]
                    } else {
                        0.0
                    }
                } else {
                    0.0
                };
                assert_abs_diff_eq!(term[(i, j)].im, -om * want, epsilon = 1e-6);
                assert_abs_diff_eq!(term[(i, j)].re, 0.0, epsilon = 1e-12);
            }
        }

        // (dW/dt) W^-1 is antisymmetric for real rotations: term_ij = -term_ji.
        let th1 = [0.2, 0.25, 0.3];
        let th2 = [-0.1, -0.05, 0.0];
        let term = dissipative_wannier_term(&th1, &th2, 1e-2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(term[(i, j)].im, -term[(j, i)].im, epsilon = 1e-10);
            }
        }

        assert!(matches!(
            dissipative_wannier_term(&[0.0, 0.1], &[0.0, 0.1], 0.1),
            Err(WannierError::NotEnoughSamples)
        ));
    }

    #[test]
    fn affine_fsm_zero_hamiltonian_is_static() {
        let h_w = [[0.0; 4]; 4];
        let m = affine_fsm_matrix(&h_w, [0.25; 4], [0.0; 4], 1e-9).unwrap();
        assert!(m.iter().flatten().all(|&x| x == 0.0));
        let b = affine_fsm_offset(&m);
        assert!(b.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn affine_fsm_diagonal_hamiltonian_oscillates() {
        // Diagonal H_w: eta constant, P_kre(t) = eta_k cos(xi_k(0) - E_k t).
        let e = [0.9, 0.4, 1.3, 0.2];
        let mut h_w = [[0.0; 4]; 4];
        for k in 0..4 {
            h_w[k][k] = e[k];
        }
        let eta = [0.4f64, 0.3, 0.2, 0.1];
        let xi0 = [0.3, 1.1, -0.4, 0.8];
        let c0: [Complex64; 4] =
            std::array::from_fn(|k| Complex64::from_polar(eta[k].sqrt(), xi0[k]));
        let report = verify_affine_fsm(&h_w, &c0, 2.0, 1e-3, 1e-9).unwrap();
        assert!(report.max_deviation < 1e-6, "dev {}", report.max_deviation);
        for (t, enc) in report.times.iter().zip(&report.encoded) {
            for k in 0..4 {
                assert_abs_diff_eq!(
                    enc[2 * k],
                    eta[k] * (xi0[k] - e[k] * t).cos(),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn affine_fsm_with_mixing_tracks_quantum_route() {
        let e = [c64(0.8, 0.0), c64(0.5, 0.0), c64(1.1, 0.0), c64(0.3, 0.0)];
        let hm = wannier_hamiltonian(e, 0.2, -0.3);
        let mut h_w = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                h_w[i][j] = hm[(i, j)].re;
            }
        }
        // Dominant stationary component keeps eta away from zero.
        let c0 = [c64(0.9, 0.1), c64(0.2, 0.15), c64(0.15, 0.2), c64(0.2, 0.1)];
        let norm: f64 = c0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let c0: [Complex64; 4] = std::array::from_fn(|k| c0[k] / norm);
        let report = verify_affine_fsm(&h_w, &c0, 1.0, 2e-4, 1e-9).unwrap();
        assert!(report.max_deviation < 1e-5, "dev {}", report.max_deviation);
    }

    #[test]
    fn shifted_view_and_renormalization() {
        // Dyadic values so the shift round-trips without rounding.
        let p = [0.25, -0.5, 0.125, 0.0, 0.375, -0.0625, 0.5, -0.25];
        let shifted: [f64; 8] = std::array::from_fn(|i| 1.0 + p[i]);
        // Shift identity is bookkeeping: exact by construction.
        for i in 0..8 {
            assert_eq!(shifted[i] - 1.0, p[i]);
            assert!(shifted[i] > 0.0 && shifted[i] < 2.0);
        }
        let renorm = renormalized_probabilities(&shifted);
        assert_abs_diff_eq!(renorm.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fsm_from_wannier_builds_sampled_matrices() {
        let h_w = [
            [0.5, 0.1, 0.0, 0.0],
            [0.1, 0.3, 0.0, 0.0],
            [0.0, 0.0, 0.2, 0.0],
            [0.0, 0.0, 0.0, 0.1],
        ];
        let times: Vec<f64> = (0..5).map(|i| i as f64 * 0.1).collect();
        let eta: Vec<[f64; 4]> = times
            .iter()
            .map(|t| [0.4 + 0.01 * t, 0.3 - 0.01 * t, 0.2, 0.1])
            .collect();
        let xi: Vec<[f64; 4]> = times.iter().map(|_| [0.0; 4]).collect();
        let fsm = fsm_from_wannier(&h_w, &eta, &xi, &times, 1e-9).unwrap();
        assert_eq!(fsm.matrices.len(), 5);
        // a_1 = (d eta_1/dt) / (2 eta_1) at the middle sample.
        let want = 0.01 / (2.0 * eta[2][0]);
        assert_abs_diff_eq!(fsm.matrices[2][0][0], want, epsilon = 1e-10);
        // eta below eps errors out.
        let bad: Vec<[f64; 4]> = times.iter().map(|_| [0.4, 0.0, 0.2, 0.1]).collect();
        assert!(matches!(
            fsm_from_wannier(&h_w, &bad, &xi, &times, 1e-9),
            Err(WannierError::EtaBelowEps { component: 1, .. })
        ));
    }
}
