//! Schroedinger <-> tight-binding equivalence through maximally localized
//! Wannier functions: a 1D finite-difference eigensolver, the two-level
//! localized pair with its mixing angle, tight-binding parameters as
//! functionals of the eigenenergies (real and complex), and the
//! four-region 2D transform with its stochastic-machine image.

mod localize;
mod solve1d;
mod twod;

pub use localize::{
    bloch_ratio, build_wannier_pair, half_domain_mass, localization_ratio, localized_pair,
    mixing_angle, orthonormality_residuals, tb_params, tb_params_dissipative, wannier_amplitudes,
    LocalizationRatio, WannierAmplitudes, WannierPair,
};
pub use solve1d::{
    crank_nicolson_evolve, double_well, solve_1d_eigen, EigenPair1D, Potential, SolveReport,
};
pub use twod::{
    affine_fsm_matrix, affine_fsm_offset, dissipative_wannier_term, fsm_from_wannier,
    renormalized_probabilities, separable_box_energies, separable_box_region1_overlaps,
    solve_angles_2d, verify_affine_fsm, wannier2d_transform, wannier_hamiltonian, AffineFsm,
    AffineFsmReport, AngleSolution, Wannier2d,
};

use thiserror::Error;

use crate::linalg;

#[derive(Debug, Error)]
pub enum WannierError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("grid needs at least 64 intervals, got {0}")]
    GridTooCoarse(usize),
    #[error("x = 0 must fall on a grid node (x_min = {x_min}, h = {h})")]
    OriginOffGrid { x_min: f64, h: f64 },
    #[error("grid bounds must satisfy x_min < 0 < x_max")]
    BadBounds,
    #[error("requested {requested} levels, grid supports at most {max}")]
    TooManyLevels { requested: usize, max: usize },
    #[error("wavefunction length {got} does not match grid ({want} nodes)")]
    LengthMismatch { got: usize, want: usize },
    #[error("denominator ratio is singular and no orientation is defined")]
    UndefinedRatio,
    #[error("beta_c vanishes at the requested time; ratio undefined")]
    SingularAmplitudeRatio,
    #[error("angle iteration did not converge within {iterations} steps (last = {last:?})")]
    NoAngleConvergence { iterations: usize, last: (f64, f64) },
    #[error("occupancy eta_{component} = {value:.3e} at or below eps")]
    EtaBelowEps { component: usize, value: f64 },
    #[error("need at least 3 samples around t for a centered difference")]
    NotEnoughSamples,
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, WannierError>;

/// Uniform grid on [x_min, x_max] with `n_points` intervals (so
/// `n_points + 1` nodes); x = 0 must land on a node, it is the boundary
/// between the two half-domains.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub h: f64,
    zero_node: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 64 {
            return Err(WannierError::GridTooCoarse(n_points));
        }
        if !(x_min < 0.0 && 0.0 < x_max) {
            return Err(WannierError::BadBounds);
        }
        let h = (x_max - x_min) / n_points as f64;
        let k = -x_min / h;
        let zero_node = k.round() as usize;
        if (k - zero_node as f64).abs() > 1e-9 {
            return Err(WannierError::OriginOffGrid { x_min, h });
        }
        Ok(Grid1D {
            x_min,
            x_max,
            n_points,
            h,
            zero_node,
        })
    }

    /// Symmetric grid [-half, +half].
    pub fn symmetric(half: f64, n_points: usize) -> Result<Self> {
        if !n_points.is_multiple_of(2) {
            return Err(WannierError::Domain(
                "symmetric grid needs an even interval count".into(),
            ));
        }
        Grid1D::new(-half, half, n_points)
    }

    pub fn nodes(&self) -> usize {
        self.n_points + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    /// Index of the node at x = 0.
    pub fn zero_node(&self) -> usize {
        self.zero_node
    }

    /// Trapezoid quadrature of a sampled function over the whole grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.nodes());
        let inner: f64 = f[1..f.len() - 1].iter().sum();
        self.h * (inner + 0.5 * (f[0] + f[f.len() - 1]))
    }

    /// Trapezoid quadrature over [x_min, 0].
    pub fn integrate_left(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.nodes());
        let m = self.zero_node;
        let inner: f64 = f[1..m].iter().sum();
        self.h * (inner + 0.5 * (f[0] + f[m]))
    }
}
