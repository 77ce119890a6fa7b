//! Fourier transforms of measures at integer frequencies, restricted sums and
//! decay-exponent estimation.

mod decay;
mod sums;
mod table;
mod transform;

pub use decay::{decay_profile, least_squares_slope, DecayProfile, Shell, DEFAULT_SHELL_BASE, PEAK_FLOOR};
pub use sums::{harmonic, restricted_sum, FrequencySet, Norm, RestrictedSum, Spectrum, SyntheticSpectrum};
pub use table::{for_each_in_box, FourierTable, TableDoc, TABLE_TOLERANCE};
pub use transform::{
    linear_form_frequency, linear_form_table, projection_groups, transform, transform_at, transform_atomic, transform_grid,
    unit_phase,
};
