//! Brute-force reference computations by explicit small-dimension linear
//! algebra. Nothing here reuses the closed forms it is meant to check.

mod multi_spin;
mod su2;

pub use multi_spin::{
    bath_hamiltonian, bath_propagator, initial_populations, multi_spin_brute_force, partial_trace,
    uhlmann_fidelity_dense, uhlmann_fidelity_factored, BathSubset, BruteForce, JointEvolution, JointObservables,
    JointState, MAX_BATH_SPINS,
};
pub use su2::{
    bloch_from_density, conditional_density, conditional_propagator, density_from_bloch, gamma_oracle,
    hermitian_eigen_2x2, initial_density, level_field, pauli, spin_half_operator, sqrt_psd_2x2, su2_exponential,
    uhlmann_fidelity, Complex2x2,
};
