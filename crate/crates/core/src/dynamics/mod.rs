//! Radial partial-wave dynamics: mass operators, spectral propagation, Moeller
//! operators, S-matrix and phase shifts.

pub mod channel;
pub mod mass;
pub mod moeller;
pub mod packet;
pub mod potential;
pub mod special;
pub mod stationary;
pub mod tridiag;

pub use channel::RadialChannel;
pub use mass::{build_free_mass, build_interacting_mass, MassOperator};
pub use moeller::{
    commuting_hamiltonian_demo, difference_norms, doubling_schedule, intertwining_residual, moeller, s_matrix_time_dependent, s_phases, ConvergenceTrace,
    Direction, LimitOptions, LimitVerdict, MoellerRun, SMatrixRun, TracePoint,
};
pub use packet::{PacketSpec, RelativeWavePacket};
pub use potential::Potential;
pub use stationary::{phase_shifts_stationary, square_well_phase, square_well_s_wave, PhaseShiftTable};
