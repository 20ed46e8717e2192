//! Classical closed bosonic string on a truncated mode phase space.
//!
//! The crate evaluates chiral fields, DDF modes and Pohlmeyer iterated
//! integrals. A Poisson bracket engine with forward-mode gradients checks that
//! these quantities commute with the Virasoro constraints.

#![no_std]

extern crate alloc;

pub mod ddf;
pub mod error;
pub mod numerics;
pub mod phase_space;
pub mod pohlmeyer;
pub mod poisson;
pub mod reparam;
pub mod scalar;

pub use ddf::{
    compute_r, ddf_invariant, ddf_modes, reconstruct_field, reconstruct_field_direct,
    strip_zero_mode, zero_mode_phase, DdfInvariantSpec, DdfModes,
};
pub use error::{Error, Result};
pub use phase_space::{
    com_momentum, eval_field, eval_position, field_reality_defect, random_state, virasoro_density,
    Chirality, FieldGrid, LightlikeFrame, Metric, RandomStateParams, StringState, DEFAULT_TENSION,
};
pub use pohlmeyer::{
    pohlmeyer_invariant, pohlmeyer_via_ddf, reparam_check, wilson_enumerated, wilson_loop,
    wilson_loop_ode, InvariantSpec, WilsonConfig, WilsonLoop,
};
pub use poisson::{
    bracket, chart, gradient, gradient_check, invariance_report, unchart, virasoro_mode,
    BracketMatrix, ChartLayout, Gradient, InvarianceReport, InvarianceRow, Observable,
};
pub use reparam::{pullback_weight_one, random_diffeo, ReparamMap};
pub use scalar::{Dual, Scalar};
