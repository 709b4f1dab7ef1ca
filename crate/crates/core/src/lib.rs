//! Radial steady states and parabolic stability of the Hénon-Lane-Emden
//! system `-Δu = |x|^k v^p, -Δv = |x|^l u^q`.

pub mod asymptotics;
pub mod evolve;
pub mod grid;
pub mod io;
pub mod ode;
pub mod params;
pub mod profile;
pub mod shooter;
pub mod spectrum;

pub use grid::RadialGrid;
pub use params::{Exponents, SystemParams};
pub use profile::SteadyProfile;
pub use spectrum::SpectrumResult;
