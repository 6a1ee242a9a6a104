//! Eigen-decomposition for dense matrices of side 2..=8.
//!
//! Three paths, picked automatically:
//!   - 2x2 via the closed-form eigenvalues (trace/discriminant),
//!   - Hermitian via cyclic complex Jacobi sweeps,
//!   - everything else via the characteristic polynomial (Faddeev-LeVerrier),
//!     Durand-Kerner root finding and inverse-iteration eigenvectors.

use num_complex::Complex64;

use super::{LinalgError, Matrix, Result, MAX_EIG_SIZE};

/// One eigenvalue with its unit-norm eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub pairs: Vec<EigenPair>,
    /// Set when two eigenvalues are closer than 1e-10 (absolute, on the
    /// scale of the matrix). Mode-weight extraction refuses such inputs.
    pub degenerate: bool,
}

impl EigenDecomposition {
    pub fn values(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

/// Eigenvalues and unit-norm eigenvectors of a square matrix, 2 <= N <= 8,
/// sorted by ascending real part (imaginary part breaks ties).
pub fn eig_small(a: &Matrix) -> Result<EigenDecomposition> {
    let n = a.check_square()?;
    a.check_finite()?;
    if !(2..=MAX_EIG_SIZE).contains(&n) {
        return Err(LinalgError::UnsupportedSize(n));
    }

    let mut pairs = if n == 2 {
        eig_2x2(a)
    } else if a.is_hermitian() {
        jacobi_hermitian(a)?
    } else {
        eig_general(a)?
    };

    pairs.sort_by(|p, q| {
        p.value
            .re
            .total_cmp(&q.value.re)
            .then(p.value.im.total_cmp(&q.value.im))
    });

    let scale = a.max_abs().max(1.0);
    let mut degenerate = false;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if (pairs[i].value - pairs[j].value).norm() < 1e-10 * scale {
                degenerate = true;
            }
        }
    }
    Ok(EigenDecomposition { pairs, degenerate })
}

/// Closed-form 2x2 eigenvalues: (tr -+ sqrt((a11-a22)^2 + 4 a12 a21)) / 2.
fn eig_2x2(a: &Matrix) -> Vec<EigenPair> {
    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let disc = ((a11 - a22) * (a11 - a22) + a12 * a21 * 4.0).sqrt();
    let e1 = (a11 + a22 - disc) * 0.5;
    let e2 = (a11 + a22 + disc) * 0.5;

    let vector_for = |lambda: Complex64, prefer: usize| -> Vec<Complex64> {
        // Rows of (A - lambda I) give two null-vector candidates; take the
        // better-conditioned one, falling back to basis vectors for the
        // diagonal case (tie broken by `prefer` so a degenerate diagonal
        // still yields an orthogonal basis).
        let cand1 = [a12, lambda - a11];
        let cand2 = [lambda - a22, a21];
        let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
        let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
        let scale = a.max_abs().max(1.0);
        let mut v = if n1.max(n2) < (1e-14 * scale).powi(2) {
            let d1 = (lambda - a11).norm();
            let d2 = (lambda - a22).norm();
            let idx = if (d1 - d2).abs() <= 1e-14 * scale {
                prefer
            } else if d1 < d2 {
                0
            } else {
                1
            };
            let mut e = vec![Complex64::new(0.0, 0.0); 2];
            e[idx] = Complex64::new(1.0, 0.0);
            e
        } else if n1 >= n2 {
            cand1.to_vec()
        } else {
            cand2.to_vec()
        };
        normalize(&mut v);
        v
    };

    vec![
        EigenPair {
            value: e1,
            vector: vector_for(e1, 0),
        },
        EigenPair {
            value: e2,
            vector: vector_for(e2, 1),
        },
    ]
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    // Fix the overall phase so the largest component is real positive; keeps
    // decompositions deterministic across runs.
    let (idx, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .unwrap();
    let phase = v[idx] / v[idx].norm();
    if phase.norm() > 0.0 {
        for z in v.iter_mut() {
            *z /= phase;
        }
    }
}

/// Cyclic Jacobi sweeps with complex rotations; A must be Hermitian.
fn jacobi_hermitian(a: &Matrix) -> Result<Vec<EigenPair>> {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let phase = apq / apq.norm();
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns p, q of both M and V: right-multiplication by the
                // rotation J(p,q); rows of M by J^dagger.
                let gp = phase * s;
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c - miq * gp.conj();
                    m[(i, q)] = mip * gp + miq * c;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * gp.conj();
                    v[(i, q)] = vip * gp + viq * c;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c - mqj * gp;
                    m[(q, j)] = mpj * gp.conj() + mqj * c;
                }
            }
        }
    }

    Ok((0..n)
        .map(|k| {
            let mut vec: Vec<Complex64> = (0..n).map(|i| v[(i, k)]).collect();
            normalize(&mut vec);
            EigenPair {
                value: Complex64::new(m[(k, k)].re, 0.0),
                vector: vec,
            }
        })
        .collect())
}

/// Characteristic polynomial coefficients by Faddeev-LeVerrier:
/// p(x) = x^n + c[0] x^(n-1) + ... + c[n-1].
fn char_poly(a: &Matrix) -> Vec<Complex64> {
    let n = a.rows();
    let mut coeffs = Vec::with_capacity(n);
    let mut m = a.clone();
    for k in 1..=n {
        let ck = -m.trace() / k as f64;
        coeffs.push(ck);
        if k < n {
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[(i, i)] += ck;
            }
            m = a.mul(&shifted);
        }
    }
    coeffs
}

/// Durand-Kerner simultaneous root iteration on a monic polynomial.
fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len();
    let radius = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32 + 1) * radius / seed.norm())
        .collect();

    let eval = |x: Complex64| -> Complex64 {
        let mut p = Complex64::new(1.0, 0.0);
        for &c in coeffs {
            p = p * x + c;
        }
        p
    };

    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() < 1e-300 {
                denom = Complex64::new(1e-300, 0.0);
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step <= 1e-15 * radius {
            break;
        }
    }

    // Polish with a few Newton steps each.
    let dcoeffs: Vec<Complex64> = (0..n - 1).map(|k| coeffs[k] * (n - 1 - k) as f64).collect();
    let eval_d = |x: Complex64| -> Complex64 {
        let mut p = Complex64::new(n as f64, 0.0);
        for &c in &dcoeffs {
            p = p * x + c;
        }
        p
    };
    for zi in &mut z {
        for _ in 0..4 {
            let d = eval_d(*zi);
            if d.norm() < 1e-280 {
                break;
            }
            *zi -= eval(*zi) / d;
        }
    }
    Ok(z)
}

/// General small matrix: polynomial roots plus inverse-iteration vectors.
fn eig_general(a: &Matrix) -> Result<Vec<EigenPair>> {
    let n = a.rows();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let scaled = a.scale(Complex64::new(1.0 / scale, 0.0));
    let roots = poly_roots(&char_poly(&scaled))?;

    let mut pairs = Vec::with_capacity(n);
    for root in roots {
        let lambda = root * scale;
        let vector = inverse_iteration(a, lambda, scale)?;
        // Rayleigh refinement of the eigenvalue for the final residual.
        let av = a.mul_vec(&vector);
        let num: Complex64 = vector.iter().zip(&av).map(|(v, w)| v.conj() * w).sum();
        let lambda = num; // unit-norm vector
        let residual: f64 = av
            .iter()
            .zip(&vector)
            .map(|(w, v)| (w - lambda * v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > 1e-10 * scale {
            return Err(LinalgError::NoConvergence {
                residual: residual / scale,
            });
        }
        pairs.push(EigenPair {
            value: lambda,
            vector,
        });
    }
    Ok(pairs)
}

fn inverse_iteration(a: &Matrix, lambda: Complex64, scale: f64) -> Result<Vec<Complex64>> {
    let n = a.rows();
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    // Jitter the shift slightly; an exact eigenvalue makes the solve singular.
    for attempt in 0..4 {
        let jitter = scale * 1e-11 * (attempt + 1) as f64;
        let shift = lambda + Complex64::new(jitter, jitter * 0.5);
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + 0.3 * (i as f64 + attempt as f64), 0.1 * i as f64))
            .collect();
        normalize(&mut v);
        let mut ok = true;
        for _ in 0..6 {
            match shifted.solve(&v) {
                Ok(mut w) => {
                    normalize(&mut w);
                    v = w;
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let av = a.mul_vec(&v);
        let rq: Complex64 = v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
        let res: f64 = av
            .iter()
            .zip(&v)
            .map(|(w, x)| (w - rq * x).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if best.as_ref().is_none_or(|(b, _)| res < *b) {
            best = Some((res, v));
        }
        if let Some((b, _)) = &best {
            if *b <= 1e-12 * scale {
                break;
            }
        }
    }
    best.map(|(_, v)| v).ok_or(LinalgError::Singular)
}
