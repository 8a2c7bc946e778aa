//! Scenario runner: configuration parsing, the two-pipeline verifier and
//! the report/CSV writers behind the command-line interface.
//!
//! Exit-code contract: 0 on success, 1 on a verification mismatch or a
//! failed suite criterion, 2 on input errors.

use crate::discretize::AnnulusGrid;
use crate::scenario::{assemble_path, assemble_psi, ScenarioKind, ScenarioSpec};
use crate::spectralflow::{spectral_flow, spectral_flow_with, FlowOptions, SpectralFlowResult};
use crate::topology::{chern_number, Scenario};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error(transparent)]
    Flow(#[from] crate::spectralflow::FlowError),
    #[error(transparent)]
    Topology(#[from] crate::topology::TopologyError),
    #[error(transparent)]
    Symbol(#[from] crate::symbol::SymbolError),
    #[error(transparent)]
    Boundary(#[from] crate::boundary::BoundaryError),
}

pub type Result<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// One scenario entry as written in a TOML config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// ab-flux | rotating-bc | direct-sum | custom-t-loop
    pub kind: String,
    #[serde(default)]
    pub target_chern: Option<i64>,
    #[serde(default)]
    pub bc_winding: Option<i64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// direct-sum only: the two summands.
    #[serde(default)]
    pub summand: Vec<SummandConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummandConfig {
    pub kind: String,
    #[serde(default)]
    pub target_chern: Option<i64>,
    #[serde(default)]
    pub bc_winding: Option<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub max_mode: usize,
    pub n_z: usize,
    pub n_t: usize,
    pub psi_nx: usize,
    pub psi_nt: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            max_mode: 32,
            n_z: 64,
            n_t: 64,
            psi_nx: 64,
            psi_nt: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ToleranceConfig {
    /// Counting window Λ; 0 means automatic (10% of the spectral bound).
    #[serde(default)]
    pub window: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// Command-line overrides applied on top of the file values.
#[derive(Debug, Clone, Copy, Default)]
pub struct GridOverrides {
    pub n_z: Option<usize>,
    pub max_mode: Option<usize>,
    pub n_t: Option<usize>,
    pub window: Option<f64>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
    }

    fn kind_of(kind: &str, chern: Option<i64>, winding: Option<i64>) -> Result<ScenarioKind> {
        match kind {
            "ab-flux" => Ok(ScenarioKind::AbFlux {
                flux: chern.unwrap_or(1),
            }),
            "rotating-bc" => Ok(ScenarioKind::RotatingBc {
                chern: chern.unwrap_or(1),
                bc_winding: winding.unwrap_or(1),
            }),
            "custom-t-loop" => Ok(ScenarioKind::CustomTLoop {
                chern: chern.unwrap_or(1),
            }),
            other => Err(CliError::Config(format!(
                "unknown scenario kind `{other}` (expected ab-flux, rotating-bc, direct-sum or custom-t-loop)"
            ))),
        }
    }

    pub fn to_spec(&self, overrides: &GridOverrides) -> Result<ScenarioSpec> {
        let kind = if self.kind == "direct-sum" {
            if self.summand.len() != 2 {
                return Err(CliError::Config(
                    "direct-sum needs exactly two [[summand]] tables".into(),
                ));
            }
            let left = Self::kind_of(
                &self.summand[0].kind,
                self.summand[0].target_chern,
                self.summand[0].bc_winding,
            )?;
            let right = Self::kind_of(
                &self.summand[1].kind,
                self.summand[1].target_chern,
                self.summand[1].bc_winding,
            )?;
            ScenarioKind::DirectSum {
                left: Box::new(left),
                right: Box::new(right),
            }
        } else {
            Self::kind_of(&self.kind, self.target_chern, self.bc_winding)?
        };
        let g = &self.grid;
        let max_mode = overrides.max_mode.unwrap_or(g.max_mode);
        let n_z = overrides.n_z.unwrap_or(g.n_z);
        if n_z < 8 {
            return Err(CliError::Config("n_z must be at least 8".into()));
        }
        if max_mode == 0 || max_mode > 512 {
            return Err(CliError::Config("max_mode must be in 1..=512".into()));
        }
        Ok(ScenarioSpec {
            kind,
            grid: AnnulusGrid::new(max_mode, n_z),
            nt: overrides.n_t.unwrap_or(g.n_t),
            psi_nx: g.psi_nx,
            psi_nt: g.psi_nt,
        })
    }
}

// ---------------------------------------------------------------------------
// Verification report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub name: String,
    pub raw: f64,
    pub rounded: i64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingReport {
    pub t_left: f64,
    pub t_right: f64,
    pub direction: i8,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub sf: i64,
    pub psi: i64,
    #[serde(rename = "match")]
    pub matches: bool,
    pub counting_level: f64,
    pub window: f64,
    pub subdivisions: usize,
    pub endpoint_defect: f64,
    pub crossings: Vec<CrossingReport>,
    pub psi_components: Vec<ComponentReport>,
    pub wall_ms: u128,
    pub version: String,
    pub config: ScenarioSpec,
}

/// Build the scenario in both pipelines and compare the integers.
pub fn run_verify(spec: &ScenarioSpec, window: Option<f64>) -> Result<VerificationReport> {
    let start = Instant::now();
    let path = assemble_path(spec)?;
    let endpoint_defect = path.endpoint_defect();
    let opts = FlowOptions::default();
    let sf = match window {
        Some(w) if w > 0.0 => spectral_flow_with(&path, w, opts)?,
        _ => spectral_flow(&path, opts)?,
    };
    let psi_scenario = assemble_psi(spec)?;
    let mut psi_components = Vec::new();
    let mut psi = 0i64;
    for (name, fam) in &psi_scenario.components {
        let c = chern_number(fam)?;
        psi += c.rounded;
        psi_components.push(ComponentReport {
            name: name.clone(),
            raw: c.raw,
            rounded: c.rounded,
            residual: c.residual,
        });
    }
    Ok(VerificationReport {
        scenario: spec.label(),
        sf: sf.value,
        psi,
        matches: sf.value == psi,
        counting_level: sf.level,
        window: sf.window,
        subdivisions: sf.subdivisions,
        endpoint_defect,
        crossings: sf
            .crossings
            .iter()
            .map(|c| CrossingReport {
                t_left: c.t_left,
                t_right: c.t_right,
                direction: c.direction,
            })
            .collect(),
        psi_components,
        wall_ms: start.elapsed().as_millis(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: spec.clone(),
    })
}

// ---------------------------------------------------------------------------
// CSV and report writers
// ---------------------------------------------------------------------------

pub fn write_report(report: &VerificationReport, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("report.json");
    let mut f = std::fs::File::create(&path)?;
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Config(format!("serialize: {e}")))?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(path)
}

/// Per-cell flux grid as CSV: x index, t index, flux.
pub fn write_flux_csv(scenario: &Scenario, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (idx, (name, fam)) in scenario.components.iter().enumerate() {
        let safe: String = name
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect();
        let path = dir.join(format!("flux_{idx}_{safe}.csv"));
        let mut f = std::fs::File::create(&path)?;
        writeln!(f, "x,t,flux")?;
        let grid = fam.flux_grid()?;
        for (x, row) in grid.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                writeln!(f, "{x},{t},{v:.12e}")?;
            }
        }
        written.push(path);
    }
    Ok(written)
}

/// Crossing report as CSV: t_left, t_right, direction.
pub fn write_crossings_csv(result: &SpectralFlowResult, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("crossings.csv");
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "t_left,t_right,direction")?;
    for c in &result.crossings {
        writeln!(f, "{:.6},{:.6},{}", c.t_left, c.t_right, c.direction)?;
    }
    Ok(path)
}

/// Eigenvalue traces as CSV: t, eigenvalue index, value. Structured layouts
/// trace the window (−width, width) only.
pub fn write_traces_csv(
    path_obj: &crate::spectralflow::OperatorPath,
    width: f64,
    dir: &Path,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("traces.csv");
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "t,index,value")?;
    let mut hints: Vec<f64> = Vec::new();
    for (t, m) in path_obj.samples() {
        let eigs = m
            .eigenvalues_in(-width, width, 1e-6 * width.max(1.0), &hints)
            .map_err(crate::spectralflow::FlowError::from)?;
        for (i, v) in eigs.iter().enumerate() {
            writeln!(f, "{t:.6},{i},{v:.12e}")?;
        }
        hints = eigs;
    }
    Ok(path)
}

// ---------------------------------------------------------------------------
// Small-input helpers for the symbol and boundary subcommands
// ---------------------------------------------------------------------------

/// A complex matrix in the config convention: rows of [re, im] pairs.
#[derive(Debug, Deserialize)]
pub struct MatrixInput {
    pub sigma1: Vec<Vec<[f64; 2]>>,
    pub sigma2: Vec<Vec<[f64; 2]>>,
}

pub fn parse_matrix(rows: &[Vec<[f64; 2]>]) -> Result<crate::CMatrix> {
    use num_complex::Complex64 as c64;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("matrix must be square".into()));
    }
    let mut m = crate::CMatrix::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = c64::new(re, im);
        }
    }
    Ok(m)
}

pub fn load_symbol_input(path: &Path) -> Result<(crate::CMatrix, crate::CMatrix)> {
    let text = std::fs::read_to_string(path)?;
    let input: MatrixInput =
        toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((parse_matrix(&input.sigma1)?, parse_matrix(&input.sigma2)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_overrides() {
        let text = r#"
kind = "rotating-bc"
target_chern = -2
bc_winding = 1

[grid]
max_mode = 16
n_z = 32
n_t = 24
psi_nx = 32
psi_nt = 32
"#;
        let cfg: ScenarioConfig = toml::from_str(text).unwrap();
        let spec = cfg.to_spec(&GridOverrides::default()).unwrap();
        assert_eq!(spec.grid.max_mode, 16);
        assert_eq!(
            spec.kind,
            ScenarioKind::RotatingBc {
                chern: -2,
                bc_winding: 1
            }
        );
        let spec2 = cfg
            .to_spec(&GridOverrides {
                n_z: Some(48),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(spec2.grid.n_z, 48);
    }

    #[test]
    fn direct_sum_config() {
        let text = r#"
kind = "direct-sum"

[[summand]]
kind = "ab-flux"
target_chern = 1

[[summand]]
kind = "ab-flux"
target_chern = -1
"#;
        let cfg: ScenarioConfig = toml::from_str(text).unwrap();
        let spec = cfg.to_spec(&GridOverrides::default()).unwrap();
        assert!(matches!(spec.kind, ScenarioKind::DirectSum { .. }));
    }

    #[test]
    fn bad_kind_is_a_config_error() {
        let text = "kind = \"nonsense\"\n";
        let cfg: ScenarioConfig = toml::from_str(text).unwrap();
        assert!(cfg.to_spec(&GridOverrides::default()).is_err());
    }

    #[test]
    fn matrix_input_parses_re_im_pairs() {
        let rows = vec![
            vec![[0.0, 0.0], [1.0, 0.0]],
            vec![[1.0, 0.0], [0.0, 0.0]],
        ];
        let m = parse_matrix(&rows).unwrap();
        assert_eq!(m[(0, 1)], num_complex::Complex64::new(1.0, 0.0));
    }

    #[test]
    fn verify_small_scenario_end_to_end() {
        let spec = ScenarioSpec {
            kind: ScenarioKind::AbFlux { flux: 1 },
            grid: AnnulusGrid::new(4, 16),
            nt: 8,
            psi_nx: 16,
            psi_nt: 16,
        };
        let report = run_verify(&spec, None).unwrap();
        assert!(report.matches);
        assert_eq!(report.sf, 1);
        assert_eq!(report.psi, 1);
        let dir = std::env::temp_dir().join("sflab_cli_test");
        let p = write_report(&report, &dir).unwrap();
        assert!(p.exists());
        let psi_scenario = assemble_psi(&spec).unwrap();
        let files = write_flux_csv(&psi_scenario, &dir).unwrap();
        assert_eq!(files.len(), 2);
    }
}
