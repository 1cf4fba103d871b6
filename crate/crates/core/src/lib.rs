//! Bound states of the 1D Schrödinger equation −ψ″ + Vψ = λ²ψ through the
//! pendulum transformation ψ = √ρ sin(α/2), with V = A² − A′.
//!
//! The angle obeys dα/dx = 2λ − 2A(x) sin α. Its winding number across the
//! domain is a nondecreasing step function of λ that jumps by one at every
//! eigenvalue, so eigenvalues are found by bisection on an integer
//! predicate. Independent checks come from the Zakharov-Shabat form of the
//! same problem ([`zs`]) and a finite-difference diagonalization ([`oracle`]).

pub mod constructor;
pub mod error;
pub mod forcefields;
pub mod interp;
pub mod ode;
pub mod oracle;
pub mod pendulum;
pub mod report;
pub mod spectrum;
pub mod zs;

pub use constructor::{construct, force_from_curve, predetermined_spectrum, solve_curve, CriticalCurve, CurveKind};
pub use error::{Error, Result};
pub use forcefields::{
    riccati_potential, BoundaryClass, Catalog, ForceFunction, ForceSpec, Partner, Potential, PotentialPair,
};
pub use pendulum::{fixed_points, symmetry_reduce, FixedPoints, IntegrationOptions, PendulumTrajectory, Terminal};
pub use spectrum::{
    count_bound_states, find_eigenvalues, isospectral_check, reconstruct_eigenfunction, winding_number, winding_scan,
    Eigenpair, EigenvalueSearch, Level, SpectrumOptions, WindingResult,
};
