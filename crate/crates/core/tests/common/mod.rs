#![allow(dead_code)]

//! Shared oracles for the integration suites: a 4th-order fixed-step
//! integrator independent of the library's propagators, plus seeded
//! random-input helpers.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// RK4 on dx/dt = M x for a constant real matrix, returning x(t1).
pub fn rk4_linear(m: &[Vec<f64>], x0: &[f64], t1: f64, dt: f64) -> Vec<f64> {
    let n = x0.len();
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| m[i].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    };
    let steps = (t1 / dt).round() as usize;
    let dt = t1 / steps as f64;
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let k1 = apply(&x);
        let k2 = apply(&add(&x, &k1, dt / 2.0));
        let k3 = apply(&add(&x, &k2, dt / 2.0));
        let k4 = apply(&add(&x, &k3, dt));
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

fn add(x: &[f64], d: &[f64], h: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + h * b).collect()
}

pub fn random_generator_2x2(rng: &mut ChaCha8Rng, scale: f64) -> Vec<Vec<f64>> {
    vec![
        vec![rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)],
        vec![rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)],
    ]
}

/// Random normalized complex 4-vector.
pub fn random_pure_state(rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..4)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|z| z / norm).collect()
}
