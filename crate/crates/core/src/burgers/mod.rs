//! Bürgers equation: inviscid BFN sweeps along characteristics, the viscous
//! forward solver, the Cole–Hopf route for `K = 0`, and the coefficient
//! sequence that exposes the viscous one-step BFN's lack of solutions.

pub mod bn;
pub mod cole_hopf;
pub mod inviscid;
pub mod viscous;

pub use bn::{bn_sequence, inverse_square_coefficients, BnSequence, GrowthVerdict, LogComplex};
pub use cole_hopf::{cole_hopf, cole_hopf_reference, k0_wellposedness_check, ColeHopfDirection};
pub use inviscid::{
    observation_gradient_bound, observation_trajectory, proposition7_check, solve_inviscid_burgers,
    theorem6_bound_check, BoundSample, ObservationModel,
};
pub use viscous::solve_viscous_burgers_forward;
