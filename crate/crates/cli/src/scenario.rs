//! Scenario payloads, one JSON schema per kind, and their runners.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qsfm_core::bridge;
use qsfm_core::fsm;
use qsfm_core::quantum;
use qsfm_core::verify;
use qsfm_core::wannier;

/// Failure classification for exit codes: 2 for validation, 3 for numerics.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    Fsm {
        generator: Vec<Vec<f64>>,
        p0: Vec<f64>,
        t0: f64,
        t1: f64,
        steps: usize,
    },
    Quantum {
        hamiltonian: quantum::HamiltonianSpec,
        /// Amplitudes as [re, im] pairs.
        psi0: Vec<[f64; 2]>,
        t0: f64,
        t1: f64,
        steps: usize,
    },
    MapQ2c {
        hamiltonian: quantum::HamiltonianSpec,
        psi0: Vec<[f64; 2]>,
        t1: f64,
        dt: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    MapC2q {
        generator: Vec<Vec<f64>>,
        p: Vec<f64>,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    #[serde(rename = "wannier-1d")]
    Wannier1d {
        potential: wannier::Potential,
        #[serde(default)]
        grid: Option<GridSpec>,
        #[serde(default = "default_levels")]
        n_levels: usize,
    },
    #[serde(rename = "wannier-2d")]
    Wannier2d {
        /// Either explicit region-one overlaps or the separable box default.
        #[serde(default)]
        gamma: Option<[[f64; 4]; 4]>,
        #[serde(default = "default_box_side")]
        box_side: f64,
    },
    Entropy {
        psi: Vec<[f64; 2]>,
        #[serde(default)]
        log_base: LogBase,
    },
    Verify {
        #[serde(default)]
        suite: Option<String>,
    },
}

fn default_eps() -> f64 {
    bridge::DEFAULT_EPS
}

fn default_levels() -> usize {
    2
}

fn default_box_side() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Runtime options from the command line.
pub struct RunOptions {
    pub out_dir: std::path::PathBuf,
    pub steps_override: Option<usize>,
    pub seed: u64,
    pub format: OutputFormat,
}

pub struct Outcome {
    pub summary: Value,
    /// Written files, for logging.
    pub artifacts: Vec<String>,
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!(
            "scenario does not validate: {e}; known kinds: fsm, quantum, map-q2c, map-c2q, \
             wannier-1d, wannier-2d, entropy, verify"
        ))
    })
}

fn parse_state(psi: &[[f64; 2]]) -> quantum::QuantumState {
    quantum::QuantumState::new(
        psi.iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect(),
    )
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<String> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(path.display().to_string())
}

pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Outcome> {
    let start = Instant::now();
    let inputs = serde_json::to_value(scenario).map_err(validation)?;
    let mut derived = BTreeMap::<String, Value>::new();
    let mut residuals = BTreeMap::<String, f64>::new();
    let mut artifacts = Vec::new();

    match scenario {
        Scenario::Fsm {
            generator,
            p0,
            t0,
            t1,
            steps,
        } => {
            let s = fsm::GeneratorMatrix::from_rows(generator).map_err(validation)?;
            let p0 = fsm::ClassicalState::new(p0.clone()).map_err(validation)?;
            let steps = opts.steps_override.unwrap_or(*steps);
            let traj = fsm::evolve(&s, &p0, *t0, *t1, steps).map_err(numerical)?;
            if let Some((t, idx)) = traj.first_negative {
                derived.insert("first_negative".into(), json!({"t": t, "component": idx}));
            }
            derived.insert(
                "final_state".into(),
                serde_json::to_value(traj.final_state()).map_err(validation)?,
            );
            match opts.format {
                OutputFormat::Csv => artifacts.push(write_artifact(
                    &opts.out_dir,
                    "trajectory.csv",
                    &traj.to_csv(),
                )?),
                OutputFormat::Json => {
                    let rows = json!({"times": traj.times, "states": traj.states});
                    artifacts.push(write_artifact(
                        &opts.out_dir,
                        "trajectory.json",
                        &serde_json::to_string_pretty(&rows).map_err(validation)?,
                    )?)
                }
            }
        }
        Scenario::Quantum {
            hamiltonian,
            psi0,
            t0,
            t1,
            steps,
        } => {
            let h = hamiltonian.build().map_err(validation)?;
            let psi0 = parse_state(psi0);
            let steps = opts.steps_override.unwrap_or(*steps);
            let traj = quantum::evolve_quantum(&h, &psi0, *t0, *t1, steps).map_err(numerical)?;
            derived.insert("dissipative".into(), json!(h.dissipative));
            let norm_drift = traj
                .states
                .iter()
                .map(|s| (s.norm_sq() - traj.states[0].norm_sq()).abs())
                .fold(0.0f64, f64::max);
            if !h.dissipative {
                residuals.insert("norm_drift".into(), norm_drift);
            }
            artifacts.push(write_artifact(
                &opts.out_dir,
                "trajectory.csv",
                &traj.to_csv().map_err(numerical)?,
            )?);
        }
        Scenario::MapQ2c {
            hamiltonian,
            psi0,
            t1,
            dt,
            eps,
        } => {
            let h = hamiltonian.build().map_err(validation)?;
            let psi0 = parse_state(psi0);
            let report =
                bridge::verify_two_route(&h.matrix, &psi0, *t1, *dt, *eps).map_err(numerical)?;
            residuals.insert("max_deviation".into(), report.max_deviation);
            derived.insert("steps".into(), json!(report.steps));
            derived.insert("dt".into(), json!(report.dt));
            artifacts.push(write_artifact(
                &opts.out_dir,
                "two_route.csv",
                &report.to_csv(),
            )?);
        }
        Scenario::MapC2q { generator, p, eps } => {
            let s = fsm::GeneratorMatrix::from_rows(generator).map_err(validation)?;
            let p = fsm::ClassicalState::new(p.clone()).map_err(validation)?;
            let (h, psi) = bridge::fsm_to_quantum(&s, &p, *eps).map_err(numerical)?;
            let (rows, _) = h.matrix.real_parts();
            let payload = json!({
                "classical_hamiltonian": rows,
                "sqrt_state": psi.amplitudes.iter().map(|z| z.re).collect::<Vec<f64>>(),
            });
            artifacts.push(write_artifact(
                &opts.out_dir,
                "classical_hamiltonian.json",
                &serde_json::to_string_pretty(&payload).map_err(validation)?,
            )?);
            derived.insert("dissipative_flag".into(), json!(h.dissipative));
        }
        Scenario::Wannier1d {
            potential,
            grid,
            n_levels,
        } => {
            let grid = match grid {
                Some(g) => {
                    wannier::Grid1D::new(g.x_min, g.x_max, g.n_points).map_err(validation)?
                }
                None => {
                    let half = potential.natural_half_width().ok_or_else(|| {
                        CliError::Validation("table potentials need an explicit grid".into())
                    })?;
                    wannier::Grid1D::symmetric(half, 1024).map_err(validation)?
                }
            };
            let report = wannier::solve_1d_eigen(|x| potential.evaluate(x), &grid, *n_levels)
                .map_err(numerical)?;
            let pair = wannier::localized_pair(&report.pairs[0].psi, &report.pairs[1].psi, &grid)
                .map_err(numerical)?;
            let (e1, e2) = (report.pairs[0].energy, report.pairs[1].energy);
            let tb = wannier::tb_params(e1, e2, pair.r);
            let ortho = wannier::orthonormality_residuals(&pair, &grid);
            let r_value = match pair.r {
                wannier::LocalizationRatio::Finite(x) => json!(x),
                wannier::LocalizationRatio::Infinite { sign } => {
                    json!(format!("{}inf", if sign >= 0.0 { "+" } else { "-" }))
                }
            };
            let payload = json!({
                "gamma": pair.gamma,
                "r": r_value,
                "E": report.pairs.iter().map(|p| p.energy).collect::<Vec<_>>(),
                "tb_matrix": tb,
                "left_mass": pair.left_mass,
                "orthonormality_residuals": ortho,
                "resolution_warning": report.resolution_warning,
            });
            artifacts.push(write_artifact(
                &opts.out_dir,
                "wannier_report.json",
                &serde_json::to_string_pretty(&payload).map_err(validation)?,
            )?);
            residuals.insert(
                "orthonormality".into(),
                ortho.iter().fold(0.0f64, |m, r| m.max(r.abs())),
            );
            derived.insert("left_mass".into(), json!(pair.left_mass));
        }
        Scenario::Wannier2d { gamma, box_side } => {
            let g = gamma.unwrap_or_else(wannier::separable_box_region1_overlaps);
            let sols = wannier::solve_angles_2d(&g).map_err(numerical)?;
            let best = sols[0];
            let energies = wannier::separable_box_energies(*box_side);
            let t = wannier::wannier2d_transform(best.theta1, best.theta2);
            let payload = json!({
                "theta1": best.theta1,
                "theta2": best.theta2,
                "mass": best.mass,
                "residual": best.residual,
                "u": t.u,
                "energies": energies,
                "candidates": sols
                    .iter()
                    .map(|s| json!({"theta1": s.theta1, "theta2": s.theta2, "mass": s.mass}))
                    .collect::<Vec<_>>(),
            });
            artifacts.push(write_artifact(
                &opts.out_dir,
                "wannier2d_report.json",
                &serde_json::to_string_pretty(&payload).map_err(validation)?,
            )?);
            residuals.insert("stationarity".into(), best.residual);
        }
        Scenario::Entropy { psi, log_base } => {
            let psi = parse_state(psi);
            let rho = quantum::density_matrix(&psi).map_err(numerical)?;
            let ra = quantum::reduce_a(&rho).map_err(numerical)?;
            let rb = quantum::reduce_b(&rho).map_err(numerical)?;
            let (sa, sb) = match log_base {
                LogBase::Nats => (
                    quantum::von_neumann_entropy(&ra).map_err(numerical)?,
                    quantum::von_neumann_entropy(&rb).map_err(numerical)?,
                ),
                LogBase::Bits => (
                    quantum::von_neumann_entropy_bits(&ra).map_err(numerical)?,
                    quantum::von_neumann_entropy_bits(&rb).map_err(numerical)?,
                ),
            };
            derived.insert("S_A".into(), json!(sa));
            derived.insert("S_B".into(), json!(sb));
            residuals.insert("entropy_asymmetry".into(), (sa - sb).abs());
        }
        Scenario::Verify { suite } => {
            let results = verify::run(suite.as_deref(), opts.seed)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let passed = verify::all_passed(&results);
            let worst = results
                .iter()
                .map(|r| r.residual / r.tolerance.max(1e-300))
                .fold(0.0f64, f64::max);
            artifacts.push(write_artifact(
                &opts.out_dir,
                "verify_report.json",
                &serde_json::to_string_pretty(&results).map_err(validation)?,
            )?);
            derived.insert("passed".into(), json!(passed));
            residuals.insert("worst_margin".into(), worst);
            if !passed {
                return Err(CliError::Numerical("invariant suite failed".into()));
            }
        }
    }

    let summary = json!({
        "inputs": inputs,
        "derived_parameters": derived,
        "max_residuals": residuals,
        "wall_time": start.elapsed().as_secs_f64(),
    });
    Ok(Outcome { summary, artifacts })
}
