//! Estimators: box-counting dimension, Riesz energies on both sides of the
//! Fourier identity, tube-condition exponents, and smallness exponents of
//! direction families.

pub mod boxdim;
pub mod energy;
pub mod fit;
pub mod smallness;
pub mod tubes;

pub use boxdim::{box_dimension_1d, box_dimension_grid, box_dimension_points, default_grid_levels, dyadic_scales, DimensionEstimate};
pub use energy::{energy_fourier_side, riesz_energy, riesz_energy_natural, FourierOptions, RieszEnergy, RieszOptions, SelfPairs};
pub use fit::{fit_log_log, ExponentProfile, LogLogFit};
pub use smallness::{smallness_profile, worst_case_smallness, WorstCase};
pub use tubes::{tube_exponent_profile, tube_mass, MassTree, TubeProfile, TubeSearch};
