//! JSON run configuration. Rates in the `params` block are ordinary
//! frequencies in MHz and are converted to rad/µs on load; times are in µs.

use std::path::{Path, PathBuf};

use cavity_memory::fields::{
    gaussian_envelope, mhz_to_rad_per_us, optimal_control_sech, sech_duration_for_coherence_time,
    sech_envelope, tabulated_envelope, ControlField, ModeGrid, PhysicalParams, PulseEnvelope,
    Table, TimeGrid, DEFAULT_LINE_LENGTH, DEFAULT_MODE_COUNT, DEFAULT_QUADRATURE_POINTS,
};
use cavity_memory::master::DEFAULT_M_MAX;
use cavity_memory::ode::StepControl;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const REQUIRED_UNITS: &str = "MHz,us";

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub units: String,
    #[serde(default)]
    pub params: ParamsBlock,
    pub pulse: PulseBlock,
    #[serde(default)]
    pub control: ControlBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub modes: ModesBlock,
    #[serde(default)]
    pub solver: SolverSelection,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default)]
    pub compare: CompareBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Rates in MHz (multiplied by 2π on load).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub g: f64,
    pub kappa: f64,
    pub kappa_loss: f64,
    pub gamma: f64,
    #[serde(default)]
    pub cavity_detuning: f64,
    #[serde(default)]
    pub two_photon_detuning: f64,
}

impl Default for ParamsBlock {
    fn default() -> Self {
        ParamsBlock {
            g: 4.9,
            kappa: 2.42,
            kappa_loss: 0.33,
            gamma: 3.03,
            cavity_detuning: 0.0,
            two_photon_detuning: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Sech,
    Gaussian,
    Tabulated,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PulseBlock {
    pub shape: ShapeKind,
    /// Sets the time scale of the window and the mode grid for every shape.
    pub coherence_time: f64,
    #[serde(default)]
    pub center: f64,
    /// CSV `t, Re E, [Im E]` for the tabulated shape; rescaled to each `n`.
    #[serde(default)]
    pub path: Option<PathBuf>,
    pub photons: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlBlock {
    #[default]
    OptimalSech,
    /// CSV `t, Re Ω, [Im Ω]` with Ω in rad/µs.
    Tabulated { path: PathBuf },
}

/// Window bounds in units of the coherence time.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub t1: f64,
    pub t2: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub quadrature_points: usize,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock {
            t1: -6.0,
            t2: 6.0,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            quadrature_points: DEFAULT_QUADRATURE_POINTS,
        }
    }
}

/// Line length in units of `c T_c`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModesBlock {
    pub count: usize,
    pub length: f64,
}

impl Default for ModesBlock {
    fn default() -> Self {
        ModesBlock {
            count: DEFAULT_MODE_COUNT,
            length: DEFAULT_LINE_LENGTH,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SolverSelection {
    Master,
    Ladder,
    #[default]
    Both,
}

impl SolverSelection {
    pub fn master(self) -> bool {
        matches!(self, SolverSelection::Master | SolverSelection::Both)
    }

    pub fn ladder(self) -> bool {
        matches!(self, SolverSelection::Ladder | SolverSelection::Both)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    pub photons: Vec<f64>,
    /// Mode counts for the η⁽²⁾ refinement table (same line length).
    pub mode_counts: Vec<usize>,
    pub tolerance: f64,
}

impl Default for CompareBlock {
    fn default() -> Self {
        CompareBlock {
            photons: vec![0.005, 0.01, 0.05, 0.1],
            mode_counts: vec![155, 311],
            tolerance: 0.02,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
    pub pulse_samples: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: PathBuf::from("out"),
            pulse_samples: 1201,
        }
    }
}

fn default_m_max() -> usize {
    DEFAULT_M_MAX
}

/// Validated configuration with all physical objects built.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub params: PhysicalParams,
    /// Pulse shape at unit photon number.
    pub envelope: PulseEnvelope,
    pub control: ControlField,
    pub control_table: Option<Table>,
    pub grid: TimeGrid,
    pub modes: ModeGrid,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.into(),
            source,
        })?;
        let file: ConfigFile = serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: path.into(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_file(file, base)
    }

    /// Relative paths inside the config resolve against `base`.
    pub fn from_file(mut file: ConfigFile, base: &Path) -> CliResult<Self> {
        if file.units != REQUIRED_UNITS {
            return Err(CliError::config(
                "units",
                format!("expected \"{REQUIRED_UNITS}\", got \"{}\"", file.units),
            ));
        }
        check_photons("pulse.photons", &file.pulse.photons)?;
        check_photons("compare.photons", &file.compare.photons)?;
        if file.compare.mode_counts.is_empty() {
            return Err(CliError::config("compare.mode_counts", "must not be empty"));
        }
        if file.m_max < 1 {
            return Err(CliError::config("m_max", "must be at least 1"));
        }
        if file.output.pulse_samples < 2 {
            return Err(CliError::config(
                "output.pulse_samples",
                "need at least two samples",
            ));
        }

        let p = &file.params;
        let params = PhysicalParams::from_mhz(p.g, p.kappa, p.kappa_loss, p.gamma)
            .map_err(|e| CliError::config("params", e.to_string()))?
            .with_detunings(
                mhz_to_rad_per_us(p.cavity_detuning),
                mhz_to_rad_per_us(p.two_photon_detuning),
            );

        let tc = file.pulse.coherence_time;
        if !(tc > 0.0 && tc.is_finite()) {
            return Err(CliError::config(
                "pulse.coherence_time",
                format!("must be positive, got {tc}"),
            ));
        }
        let g = &file.grid;
        let grid = TimeGrid::new(
            g.t1 * tc,
            g.t2 * tc,
            StepControl::Adaptive {
                rel_tol: g.rel_tol,
                abs_tol: g.abs_tol,
            },
        )
        .and_then(|grid| {
            let grid = grid.with_quadrature_points(g.quadrature_points);
            grid.validate()?;
            Ok(grid)
        })
        .map_err(|e| CliError::config("grid", e.to_string()))?;
        let modes = ModeGrid::new(file.modes.count, file.modes.length * tc, params.kappa)
            .map_err(|e| CliError::config("modes", e.to_string()))?;

        let duration = sech_duration_for_coherence_time(tc);
        let envelope = match file.pulse.shape {
            ShapeKind::Sech => sech_envelope(1.0, duration),
            ShapeKind::Gaussian => gaussian_envelope(1.0, tc, file.pulse.center),
            ShapeKind::Tabulated => {
                let path = resolve(base, file.pulse.path.as_ref(), "pulse.path")?;
                file.pulse.path = Some(path.clone());
                tabulated_envelope(read_table(&path, "pulse.path")?, 1.0)
            }
        }
        .map_err(|e| CliError::config("pulse", e.to_string()))?;

        let (control, control_table) = match &file.control {
            ControlBlock::OptimalSech => {
                if file.pulse.shape != ShapeKind::Sech {
                    return Err(CliError::config(
                        "control.kind",
                        "the closed-form optimal control only applies to sech pulses; supply a tabulated control",
                    ));
                }
                (
                    optimal_control_sech(&params, duration)
                        .map_err(|e| CliError::config("control", e.to_string()))?,
                    None,
                )
            }
            ControlBlock::Tabulated { path } => {
                let path = resolve(base, Some(path), "control.path")?;
                let table = read_table(&path, "control.path")?;
                file.control = ControlBlock::Tabulated { path };
                (ControlField::tabulated(table.clone()), Some(table))
            }
        };

        let output_dir = base.join(&file.output.dir);
        Ok(RunConfig {
            file,
            params,
            envelope,
            control,
            control_table,
            grid,
            modes,
            output_dir,
        })
    }

    pub fn photons(&self) -> &[f64] {
        &self.file.pulse.photons
    }

    pub fn coherence_time(&self) -> f64 {
        self.file.pulse.coherence_time
    }

    pub fn envelope_for(&self, photons: f64) -> CliResult<PulseEnvelope> {
        Ok(self.envelope.with_photons(photons)?)
    }
}

fn check_photons(field: &str, values: &[f64]) -> CliResult<()> {
    if values.is_empty() {
        return Err(CliError::config(field, "sweep list must not be empty"));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(CliError::config(
            field,
            format!("photon numbers must be finite and non-negative, got {v}"),
        ));
    }
    Ok(())
}

fn resolve(base: &Path, path: Option<&PathBuf>, field: &str) -> CliResult<PathBuf> {
    let path = path.ok_or_else(|| CliError::config(field, "required for tabulated input"))?;
    let full = if path.is_absolute() {
        path.clone()
    } else {
        base.join(path)
    };
    if !full.is_file() {
        return Err(CliError::config(
            field,
            format!("file not found: {}", full.display()),
        ));
    }
    Ok(full)
}

fn read_table(path: &Path, field: &str) -> CliResult<Table> {
    Table::read_csv(path).map_err(|e| CliError::config(field, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> serde_json::Value {
        serde_json::json!({
            "units": "MHz,us",
            "pulse": { "shape": "sech", "coherence_time": 0.5, "photons": [0.01, 1.0] }
        })
    }

    fn build(v: serde_json::Value) -> CliResult<RunConfig> {
        RunConfig::from_file(serde_json::from_value(v).unwrap(), Path::new("."))
    }

    #[test]
    fn defaults_reproduce_reference_setup() {
        let cfg = build(minimal()).unwrap();
        assert_eq!(cfg.params, PhysicalParams::reference());
        assert_eq!(cfg.grid.t1, -3.0);
        assert_eq!(cfg.modes.count(), 311);
        assert!((cfg.modes.flight_time() - 6.0).abs() < 1e-15);
        assert_eq!(cfg.file.solver, SolverSelection::Both);
    }

    #[test]
    fn units_field_is_checked() {
        let mut v = minimal();
        v["units"] = "GHz,ns".into();
        let err = build(v).unwrap_err().to_string();
        assert!(err.contains("units"), "{err}");
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let mut v = minimal();
        v["pulse"]["photons"] = serde_json::json!([]);
        assert!(build(v).unwrap_err().to_string().contains("pulse.photons"));
    }

    #[test]
    fn missing_control_file_names_the_field() {
        let mut v = minimal();
        v["control"] = serde_json::json!({ "kind": "tabulated", "path": "no/such/control.csv" });
        let err = build(v).unwrap_err().to_string();
        assert!(
            err.contains("control.path") && err.contains("not found"),
            "{err}"
        );
    }

    #[test]
    fn gaussian_needs_tabulated_control() {
        let mut v = minimal();
        v["pulse"]["shape"] = "gaussian".into();
        assert!(build(v).unwrap_err().to_string().contains("control.kind"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = minimal();
        v["extra"] = 1.into();
        assert!(serde_json::from_value::<ConfigFile>(v).is_err());
    }
}
