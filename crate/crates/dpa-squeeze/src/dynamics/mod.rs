//! Time evolution: the integrator, the Lindblad solver and quantum jumps.

pub mod master;
pub mod ode;
pub mod series;
pub mod trajectory;

pub use master::mesolve;
pub use series::{Observable, SolverConfig, TimeGrid, TimeSeries};
pub use trajectory::mcsolve;
