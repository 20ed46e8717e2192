//! Spectral primitives shared by every module.

pub mod circle;
pub mod fft;
pub mod integrate;
pub mod modes;

pub use circle::{invert_monotone, CircleMap};
pub use integrate::{periodic_antiderivative, simplex_iterated_integral, PolyGrid};
pub use modes::{
    grid_to_modes, modes_to_grid, modes_to_grid_complex, sigma, spectral_derivative, ModeVector,
    Orientation, TrigInterpolant,
};
