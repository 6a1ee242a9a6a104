//! Two-level maximally localized pair: the localization ratio r, the mixing
//! angle gamma = arctan(r)/2, the localized pair itself, and the
//! tight-binding parameters the pair induces.

use num_complex::Complex64;

use super::{Grid1D, Result, WannierError};

/// The half-domain ratio r, or its signed-infinity marker when the
/// denominator integral vanishes (symmetric wells).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalizationRatio {
    Finite(f64),
    Infinite { sign: f64 },
}

impl LocalizationRatio {
    /// sin(arctan r): r / sqrt(1 + r^2), or +-1 at the marker.
    pub fn sin_atan(&self) -> f64 {
        match *self {
            LocalizationRatio::Finite(r) => r / (1.0 + r * r).sqrt(),
            LocalizationRatio::Infinite { sign } => sign,
        }
    }

    /// sin^2(arctan(r)/2) via (1 - cos(arctan r)) / 2.
    pub fn sin_sq_half(&self) -> f64 {
        (1.0 - self.cos_atan()) / 2.0
    }

    /// cos^2(arctan(r)/2).
    pub fn cos_sq_half(&self) -> f64 {
        (1.0 + self.cos_atan()) / 2.0
    }

    fn cos_atan(&self) -> f64 {
        match *self {
            LocalizationRatio::Finite(r) => 1.0 / (1.0 + r * r).sqrt(),
            LocalizationRatio::Infinite { .. } => 0.0,
        }
    }
}

/// r = int_{x<=0} (psi1 psi2 + psi2 psi1) / int_{x<=0} (psi1^2 - psi2^2),
/// trapezoid on the half grid. A vanishing denominator (each half carrying
/// the same mass) returns the signed-infinity marker.
pub fn localization_ratio(psi1: &[f64], psi2: &[f64], grid: &Grid1D) -> Result<LocalizationRatio> {
    if psi1.len() != grid.nodes() || psi2.len() != grid.nodes() {
        return Err(WannierError::LengthMismatch {
            got: psi1.len(),
            want: grid.nodes(),
        });
    }
    let cross: Vec<f64> = psi1.iter().zip(psi2).map(|(a, b)| 2.0 * a * b).collect();
    let diff: Vec<f64> = psi1.iter().zip(psi2).map(|(a, b)| a * a - b * b).collect();
    let num = grid.integrate_left(&cross);
    let den = grid.integrate_left(&diff);
    if den.abs() < 1e-12 {
        if num.abs() < 1e-12 {
            return Err(WannierError::UndefinedRatio);
        }
        return Ok(LocalizationRatio::Infinite { sign: num.signum() });
    }
    Ok(LocalizationRatio::Finite(num / den))
}

/// Principal mixing angle gamma = arctan(r) / 2; the infinity marker maps to
/// +-pi/4. Branch selection against the actual mass happens in
/// `localized_pair`.
pub fn mixing_angle(r: LocalizationRatio) -> f64 {
    match r {
        LocalizationRatio::Finite(x) => 0.5 * x.atan(),
        LocalizationRatio::Infinite { sign } => sign * std::f64::consts::FRAC_PI_4,
    }
}

/// w_L = cos(g) psi1 + sin(g) psi2, w_R = -sin(g) psi1 + cos(g) psi2.
pub fn build_wannier_pair(psi1: &[f64], psi2: &[f64], gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let (c, s) = (gamma.cos(), gamma.sin());
    let w_l = psi1.iter().zip(psi2).map(|(a, b)| c * a + s * b).collect();
    let w_r = psi1.iter().zip(psi2).map(|(a, b)| -s * a + c * b).collect();
    (w_l, w_r)
}

/// Mass of a function in the left half-domain.
pub fn half_domain_mass(w: &[f64], grid: &Grid1D) -> f64 {
    let sq: Vec<f64> = w.iter().map(|x| x * x).collect();
    grid.integrate_left(&sq)
}

/// The localized pair with the branch of gamma picked among
/// {g, g - pi/2, g + pi/2, g + pi} that maximizes the left mass of w_L.
#[derive(Debug, Clone)]
pub struct WannierPair {
    pub gamma: f64,
    pub r: LocalizationRatio,
    pub w_l: Vec<f64>,
    pub w_r: Vec<f64>,
    pub left_mass: f64,
}

pub fn localized_pair(psi1: &[f64], psi2: &[f64], grid: &Grid1D) -> Result<WannierPair> {
    let r = localization_ratio(psi1, psi2, grid)?;
    let g0 = mixing_angle(r);
    let mut best: Option<WannierPair> = None;
    for delta in [
        0.0,
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::PI,
    ] {
        let gamma = g0 + delta;
        let (w_l, w_r) = build_wannier_pair(psi1, psi2, gamma);
        let left_mass = half_domain_mass(&w_l, grid);
        if best.as_ref().is_none_or(|b| left_mass > b.left_mass) {
            best = Some(WannierPair {
                gamma,
                r,
                w_l,
                w_r,
                left_mass,
            });
        }
    }
    Ok(best.expect("four candidates evaluated"))
}

/// The four orthonormality integrals (<wL|wL> - 1, <wR|wR> - 1, <wR|wL>,
/// <wL|wR>) of a constructed pair.
pub fn orthonormality_residuals(pair: &WannierPair, grid: &Grid1D) -> [f64; 4] {
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        grid.integrate(&prod)
    };
    [
        dot(&pair.w_l, &pair.w_l) - 1.0,
        dot(&pair.w_r, &pair.w_r) - 1.0,
        dot(&pair.w_r, &pair.w_l),
        dot(&pair.w_l, &pair.w_r),
    ]
}

/// Tight-binding matrix induced by the localized pair:
///
/// ```text
/// [ E1 + sin^2(g)(E2 - E1)      (E2 - E1)/2 sin(arctan r) ]
/// [ (E2 - E1)/2 sin(arctan r)   E1 + cos^2(g)(E2 - E1)    ]
/// ```
///
/// with g = arctan(r)/2. Trace and determinant reproduce E1 + E2 and E1 E2,
/// so the spectrum is exactly {E1, E2}.
pub fn tb_params(e1: f64, e2: f64, r: LocalizationRatio) -> [[f64; 2]; 2] {
    let de = e2 - e1;
    let ts = 0.5 * de * r.sin_atan();
    [
        [e1 + r.sin_sq_half() * de, ts],
        [ts, e1 + r.cos_sq_half() * de],
    ]
}

/// Complex-energy variant: tb_params of the real parts plus i times
/// tb_params of the imaginary parts. Non-Hermitian whenever any imaginary
/// part is nonzero (the dissipative case); Hermitian otherwise.
pub fn tb_params_dissipative(
    e1: Complex64,
    e2: Complex64,
    r: LocalizationRatio,
) -> [[Complex64; 2]; 2] {
    let re = tb_params(e1.re, e2.re, r);
    let im = tb_params(e1.im, e2.im, r);
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = Complex64::new(re[i][j], im[i][j]);
        }
    }
    out
}

/// Occupancy amplitudes of the localized pair for the state
/// sqrt(p1) e^{i phi1} e^{-i E1 (t-t0)} |E1> + sqrt(p2) e^{i phi2} e^{-i E2 (t-t0)} |E2>
/// in the unit-norm Wannier convention, so |alpha|^2 + |beta|^2 = p1 + p2.
#[derive(Debug, Clone, Copy)]
pub struct WannierAmplitudes {
    pub alpha: Complex64,
    pub beta: Complex64,
}

#[allow(clippy::too_many_arguments)]
pub fn wannier_amplitudes(
    e1: Complex64,
    e2: Complex64,
    r: LocalizationRatio,
    p1: f64,
    p2: f64,
    phi1: f64,
    phi2: f64,
    t: f64,
    t0: f64,
) -> WannierAmplitudes {
    let gamma = mixing_angle(r);
    let (c, s) = (gamma.cos(), gamma.sin());
    let phase = |e: Complex64, phi: f64, p: f64| -> Complex64 {
        (Complex64::new(0.0, -1.0) * e * (t - t0)).exp()
            * Complex64::from_polar(1.0, phi)
            * p.sqrt()
    };
    let f1 = phase(e1, phi1, p1);
    let f2 = phase(e2, phi2, p2);
    WannierAmplitudes {
        alpha: f1 * c + f2 * s,
        beta: -f1 * s + f2 * c,
    }
}

/// The reduced ratio alpha/beta: (rho + tan(g) z) / (-tan(g) rho + z) with
/// rho = sqrt(p1/p2) and z = e^{-i (E2 - E1)(t - t0)} e^{i (phi2 - phi1)};
/// identical to the componentwise ratio wherever beta is nonzero.
#[allow(clippy::too_many_arguments)]
pub fn bloch_ratio(
    e1: Complex64,
    e2: Complex64,
    r: LocalizationRatio,
    p1: f64,
    p2: f64,
    phi1: f64,
    phi2: f64,
    t: f64,
    t0: f64,
) -> Result<Complex64> {
    if p2 <= 0.0 {
        return Err(WannierError::Domain(
            "p2 must be positive for the ratio".into(),
        ));
    }
    let gamma = mixing_angle(r);
    let tan = gamma.tan();
    let rho = (p1 / p2).sqrt();
    let z = (Complex64::new(0.0, -1.0) * (e2 - e1) * (t - t0)).exp()
        * Complex64::from_polar(1.0, phi2 - phi1);
    let den = -tan * rho + z;
    if den.norm() < 1e-14 {
        return Err(WannierError::SingularAmplitudeRatio);
    }
    Ok((rho + tan * z) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wannier::{double_well, solve_1d_eigen};
    use approx::assert_abs_diff_eq;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ratio_edge_cases() {
        let grid = Grid1D::symmetric(1.0, 128).unwrap();
        // psi2 zero on the left: numerator vanishes, r = 0.
        let psi1: Vec<f64> = (0..grid.nodes())
            .map(|i| if grid.x(i) <= 0.0 { 1.0 } else { 0.0 })
            .collect();
        let psi2: Vec<f64> = (0..grid.nodes())
            .map(|i| if grid.x(i) > 0.0 { 1.0 } else { 0.0 })
            .collect();
        match localization_ratio(&psi1, &psi2, &grid).unwrap() {
            LocalizationRatio::Finite(r) => assert!(r.abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }

        // Sign of r flips with psi2 -> -psi2.
        let pa: Vec<f64> = (0..grid.nodes()).map(|i| 1.0 + 0.3 * grid.x(i)).collect();
        let pb: Vec<f64> = (0..grid.nodes()).map(|i| 0.5 - 0.2 * grid.x(i)).collect();
        let nb: Vec<f64> = pb.iter().map(|x| -x).collect();
        let r1 = localization_ratio(&pa, &pb, &grid).unwrap();
        let r2 = localization_ratio(&pa, &nb, &grid).unwrap();
        match (r1, r2) {
            (LocalizationRatio::Finite(a), LocalizationRatio::Finite(b)) => {
                assert_abs_diff_eq!(a, -b, epsilon = 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symmetric_double_well_gives_quarter_pi_and_localized_left() {
        let pot = double_well(30.0, 1.0, 0.4);
        let half = pot.natural_half_width().unwrap();
        let grid = Grid1D::symmetric(half, 1024).unwrap();
        let report = solve_1d_eigen(|x| pot.evaluate(x), &grid, 2).unwrap();
        let (p1, p2) = (&report.pairs[0], &report.pairs[1]);
        // Parity makes the denominator integral vanish; numerically it is
        // either flagged infinite or a huge finite ratio.
        let r = localization_ratio(&p1.psi, &p2.psi, &grid).unwrap();
        match r {
            LocalizationRatio::Infinite { .. } => {}
            LocalizationRatio::Finite(x) => assert!(x.abs() > 1e4, "ratio {x} not near-singular"),
        }
        let pair = localized_pair(&p1.psi, &p2.psi, &grid).unwrap();
        assert_abs_diff_eq!(
            pair.gamma.rem_euclid(std::f64::consts::PI),
            std::f64::consts::FRAC_PI_4,
            epsilon = 1e-4
        );
        assert!(pair.left_mass >= 0.95, "left mass {}", pair.left_mass);
        for res in orthonormality_residuals(&pair, &grid) {
            assert!(res.abs() < 1e-8, "orthonormality residual {res}");
        }
        // Left mass is a local maximum in gamma.
        for delta in [-0.01, 0.01] {
            let (w_l, _) = build_wannier_pair(&p1.psi, &p2.psi, pair.gamma + delta);
            assert!(half_domain_mass(&w_l, &grid) < pair.left_mass);
        }
    }

    #[test]
    fn r_zero_keeps_psi1() {
        let grid = Grid1D::symmetric(1.0, 128).unwrap();
        // A pair with zero cross integral on the left and psi1 dominant there.
        let psi1: Vec<f64> = (0..grid.nodes())
            .map(|i| if grid.x(i) <= 0.0 { 1.2 } else { 0.1 })
            .collect();
        let psi2: Vec<f64> = (0..grid.nodes())
            .map(|i| if grid.x(i) > 0.0 { 1.2 } else { 0.0 })
            .collect();
        let pair = localized_pair(&psi1, &psi2, &grid).unwrap();
        assert_abs_diff_eq!(pair.gamma, 0.0, epsilon = 1e-12);
        assert_eq!(pair.w_l, psi1);
    }

    #[test]
    fn tb_params_examples() {
        // r = 0: diagonal.
        let m = tb_params(1.0, 3.0, LocalizationRatio::Finite(0.0));
        assert_abs_diff_eq!(m[0][0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1][1], 3.0, epsilon = 1e-15);
        assert_eq!(m[0][1], 0.0);

        // r -> infinity: degenerate sites, hopping (E2-E1)/2.
        let m = tb_params(1.0, 3.0, LocalizationRatio::Infinite { sign: 1.0 });
        assert_abs_diff_eq!(m[0][0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1][1], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[0][1], 1.0, epsilon = 1e-15);

        // Spectrum preservation: trace and determinant.
        for &r in &[-2.5, -0.3, 0.0, 0.7, 4.0] {
            let (e1, e2) = (-0.8, 1.7);
            let m = tb_params(e1, e2, LocalizationRatio::Finite(r));
            assert_abs_diff_eq!(m[0][0] + m[1][1], e1 + e2, epsilon = 1e-12);
            assert_abs_diff_eq!(
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
                e1 * e2,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn dissipative_params_examples() {
        // Zero imaginary parts reduce to the real form.
        let m = tb_params_dissipative(c64(1.0, 0.0), c64(2.0, 0.0), LocalizationRatio::Finite(0.5));
        let want = tb_params(1.0, 2.0, LocalizationRatio::Finite(0.5));
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(m[i][j].re, want[i][j], epsilon = 1e-15);
                assert_eq!(m[i][j].im, 0.0);
            }
        }
        // r = 0 with equal widths: diagonal complex energies verbatim.
        let m = tb_params_dissipative(
            c64(1.0, -0.1),
            c64(2.0, -0.1),
            LocalizationRatio::Finite(0.0),
        );
        assert_abs_diff_eq!(m[0][0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[0][0].im, -0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1][1].im, -0.1, epsilon = 1e-15);
        assert_eq!(m[0][1].norm(), 0.0);
    }

    #[test]
    fn amplitude_examples() {
        // Pure lower eigenstate, no mixing: alpha = e^{-i E1 t}, beta = 0.
        let a = wannier_amplitudes(
            c64(1.3, 0.0),
            c64(2.0, 0.0),
            LocalizationRatio::Finite(0.0),
            1.0,
            0.0,
            0.0,
            0.0,
            0.7,
            0.0,
        );
        let want = (Complex64::new(0.0, -1.3 * 0.7)).exp();
        assert!((a.alpha - want).norm() < 1e-14);
        assert!(a.beta.norm() < 1e-14);

        // Symmetric well, equal occupancies and phases: full Rabi swing.
        let (e1, e2) = (1.0, 1.5);
        for &t in &[0.0, 0.3, 1.1, 2.9] {
            let a = wannier_amplitudes(
                c64(e1, 0.0),
                c64(e2, 0.0),
                LocalizationRatio::Infinite { sign: 1.0 },
                0.5,
                0.5,
                0.0,
                0.0,
                t,
                0.0,
            );
            assert_abs_diff_eq!(
                a.alpha.norm_sqr(),
                ((e2 - e1) * t / 2.0).cos().powi(2),
                epsilon = 1e-12
            );
            // Unit-norm convention.
            assert_abs_diff_eq!(a.alpha.norm_sqr() + a.beta.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reduced_ratio_matches_componentwise() {
        let (e1, e2) = (c64(0.4, 0.0), c64(1.9, 0.0));
        let r = LocalizationRatio::Finite(0.8);
        let (p1, p2) = (0.3, 0.7);
        let (phi1, phi2) = (0.2, -0.9);
        for &t in &[0.0, 0.37, 1.42] {
            let a = wannier_amplitudes(e1, e2, r, p1, p2, phi1, phi2, t, 0.0);
            let reduced = bloch_ratio(e1, e2, r, p1, p2, phi1, phi2, t, 0.0).unwrap();
            let direct = a.alpha / a.beta;
            assert!((reduced - direct).norm() < 1e-12);
        }
    }
}
