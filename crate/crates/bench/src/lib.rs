//! Shared fixtures for the criterion benches.

use c1pg::problems::{example1, ConstantCoefficients};
use c1pg::{build_mesh, Mesh1D, MeshSpec, Problem};

pub const SEED: u64 = 2024;

pub fn perturbed_mesh(n: usize) -> Mesh1D {
    build_mesh(&MeshSpec::Perturbed {
        a: 0.0,
        b: 1.0,
        n,
        amplitude: 0.01,
        seed: SEED,
    })
    .expect("valid mesh")
}

pub fn default_problem() -> Problem {
    example1(ConstantCoefficients::default()).expect("registered problem")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(perturbed_mesh(16).n_elements(), 16);
        assert_eq!(default_problem().name(), "example1");
    }
}
