//! Input pulses, the discretized transmission line, and control fields.

mod control;
mod envelope;
mod grid;
mod modes;
mod params;
mod table;

pub use control::{optimal_control_sech, ControlField, ControlForm};
pub use envelope::{
    coherence_time, envelope_norm, gaussian_envelope, sech_duration_for_coherence_time,
    sech_envelope, tabulated_envelope, PulseEnvelope, PulseShape,
};
pub use grid::{trapezoid, TimeGrid, DEFAULT_QUADRATURE_POINTS};
pub use modes::{
    envelope_from_modes, mode_amplitudes, ModeAmplitudes, ModeGrid, BANDWIDTH_WARNING_FRACTION,
    DEFAULT_LINE_LENGTH, DEFAULT_MODE_COUNT,
};
pub use params::{mhz_to_rad_per_us, PhysicalParams};
pub use table::{Extrapolation, Table};

pub(crate) use grid::uniform;
