//! Pure-jump Lévy noise split into compensated small jumps on the unit ball
//! and a compound Poisson stream of big jumps outside it.

mod eventlog;
mod grid;
mod model;
mod realization;
mod sampler;
pub mod validate;

pub use eventlog::{read_event_log, write_event_log};
pub use grid::TimeGrid;
pub use model::{
    beta_moment, sphere_area, stable_density_constant, Atom, BetaMoment, LevyKind, LevyModel, RadialProfile,
    INNER_RADIUS,
};
pub use realization::{truncate_realization, NoiseRealization};
pub use sampler::{
    sample_big_jumps, sample_stable_increment, synthesize_small_jump_increments, BigJumpEvent, SmallJumpSampler,
};

pub(crate) use model::norm;
pub(crate) use sampler::poisson;
