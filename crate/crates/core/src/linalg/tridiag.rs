//! Lowest eigenpairs of a real symmetric tridiagonal matrix by Sturm-sequence
//! bisection plus inverse iteration. This is the workhorse behind the 1D
//! finite-difference Schroedinger solver, where n can reach a few thousand.

use super::{LinalgError, Result};

#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// Eigenvectors with unit Euclidean norm, one per eigenvalue.
    pub vectors: Vec<Vec<f64>>,
}

/// Number of eigenvalues of (diag, off) strictly below x.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let denom = if q.abs() < 1e-300 {
            1e-300f64.copysign(if q >= 0.0 { 1.0 } else { -1.0 })
        } else {
            q
        };
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Tridiagonal solve (T - shift I) x = b with partial pivoting; two
/// superdiagonals of fill-in.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d: Vec<f64> = diag.iter().map(|&v| v - shift).collect();
    let mut e: Vec<f64> = off.to_vec(); // superdiag 1
    let mut f = vec![0.0f64; n]; // superdiag 2 (fill-in)
    let mut sub: Vec<f64> = off.to_vec(); // subdiag, consumed in elimination
    let mut x = b.to_vec();

    let scale = diag
        .iter()
        .chain(off.iter())
        .fold(1e-30f64, |m, &v| m.max(v.abs()));

    for k in 0..n - 1 {
        if sub[k].abs() > d[k].abs() {
            // Swap row k and k+1.
            x.swap(k, k + 1);
            let (dk, dk1) = (d[k], d[k + 1]);
            let ek = e[k];
            d[k] = sub[k];
            sub[k] = dk;
            d[k + 1] = ek;
            e[k] = dk1;
            if k + 1 < n - 1 {
                f[k] = e[k + 1];
                e[k + 1] = 0.0;
            }
        }
        if d[k].abs() < 1e-300 * scale {
            d[k] = 1e-300 * scale;
        }
        let m = sub[k] / d[k];
        d[k + 1] -= m * e[k];
        if k + 1 < n - 1 {
            e[k + 1] -= m * f[k];
        }
        x[k + 1] -= m * x[k];
    }
    if d[n - 1].abs() < 1e-300 * scale {
        d[n - 1] = 1e-300 * scale;
    }

    x[n - 1] /= d[n - 1];
    if n >= 2 {
        x[n - 2] = (x[n - 2] - e[n - 2] * x[n - 1]) / d[n - 2];
    }
    for k in (0..n.saturating_sub(2)).rev() {
        x[k] = (x[k] - e[k] * x[k + 1] - f[k] * x[k + 2]) / d[k];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::Singular);
    }
    Ok(x)
}

/// Lowest `k` eigenpairs, ascending.
pub fn tridiag_eigen_lowest(diag: &[f64], off: &[f64], k: usize) -> Result<TridiagEigen> {
    let n = diag.len();
    assert_eq!(off.len(), n - 1);
    assert!(k >= 1 && k <= n);

    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let span = (hi - lo).max(1e-30);

    let mut values = Vec::with_capacity(k);
    for idx in 0..k {
        let mut a = lo;
        let mut b = hi;
        // Bisection on the Sturm count: eigenvalue #idx (0-based) is the
        // smallest x with count(x) >= idx + 1.
        for _ in 0..120 {
            let mid = 0.5 * (a + b);
            if sturm_count(diag, off, mid) > idx {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 1e-15 * span {
                break;
            }
        }
        values.push(0.5 * (a + b));
    }

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (idx, &lambda) in values.iter().enumerate() {
        // Perturb the shift off the exact eigenvalue for a stable solve.
        let shift = lambda + span * 1e-13;
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i as f64 + 1.0) * 0.7548776662466927 + idx as f64;
                (t - t.floor()) - 0.5
            })
            .collect();
        norm_unit(&mut v);
        for _ in 0..4 {
            let mut w = shifted_solve(diag, off, shift, &v)?;
            // Re-orthogonalize inside near-degenerate clusters.
            for (j, prev) in vectors.iter().enumerate() {
                if (values[j] - lambda).abs() < 1e-6 * span {
                    let dot: f64 = w.iter().zip(prev).map(|(a, b)| a * b).sum();
                    for (wi, pi) in w.iter_mut().zip(prev) {
                        *wi -= dot * pi;
                    }
                }
            }
            norm_unit(&mut w);
            v = w;
        }
        // Sign convention: first appreciable component positive.
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-8) {
            if *first < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
        }
        vectors.push(v);
    }

    Ok(TridiagEigen { values, vectors })
}

fn norm_unit(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}
