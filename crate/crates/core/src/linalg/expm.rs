//! Matrix exponential by scaling-and-squaring with a Pade(13,13) approximant.

use num_complex::Complex64;

use super::{LinalgError, Matrix, Result};

// theta_13 from Higham's 2005 scaling analysis.
const THETA_13: f64 = 5.371920351148152;

// Pade(13) coefficients b_0..b_13.
const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// exp(A) for square A with finite entries.
///
/// Relative accuracy is near machine precision for ||A||_1 up to a few tens,
/// which covers every propagator this crate builds.
pub fn mat_exp(a: &Matrix) -> Result<Matrix> {
    let n = a.check_square()?;
    a.check_finite()?;
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    if n == 1 {
        let mut out = Matrix::zeros(1, 1);
        out[(0, 0)] = a[(0, 0)].exp();
        return Ok(out);
    }

    let norm = a.one_norm();
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = Complex64::new((0.5f64).powi(squarings as i32), 0.0);
    let a_s = a.scale(scale);

    let mut result = pade13(&a_s)?;
    for _ in 0..squarings {
        result = result.mul(&result);
    }
    Ok(result)
}

fn pade13(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let id = Matrix::identity(n);
    let a2 = a.mul(a);
    let a4 = a2.mul(&a2);
    let a6 = a2.mul(&a4);

    let cr = |x: f64| Complex64::new(x, 0.0);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let u_inner = a6
        .scale(cr(B[13]))
        .add(&a4.scale(cr(B[11])))
        .add(&a2.scale(cr(B[9])));
    let u = a.mul(
        &a6.mul(&u_inner)
            .add(&a6.scale(cr(B[7])))
            .add(&a4.scale(cr(B[5])))
            .add(&a2.scale(cr(B[3])))
            .add(&id.scale(cr(B[1]))),
    );

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let v_inner = a6
        .scale(cr(B[12]))
        .add(&a4.scale(cr(B[10])))
        .add(&a2.scale(cr(B[8])));
    let v = a6
        .mul(&v_inner)
        .add(&a6.scale(cr(B[6])))
        .add(&a4.scale(cr(B[4])))
        .add(&a2.scale(cr(B[2])))
        .add(&id.scale(cr(B[0])));

    // exp(A) ~ (V - U)^-1 (V + U)
    let denom = v.sub(&u);
    let numer = v.add(&u);
    let mut out = Matrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<Complex64> = (0..n).map(|i| numer[(i, j)]).collect();
        let x = denom.solve(&col).map_err(|_| LinalgError::Singular)?;
        for i in 0..n {
            out[(i, j)] = x[i];
        }
    }
    Ok(out)
}
