//! Shared fixtures for the benches in benches/.

use std::sync::Arc;

use ksim_core::constraint::{picard_regular_tuple, PicardOptions};
use ksim_core::seed::{make_seed, SeedData, SeedParams};
use ksim_core::tuple::RegularTuple;
use ksim_core::SphereGrid;

pub fn grid(n_theta: usize, n_phi: usize) -> Arc<SphereGrid> {
    SphereGrid::new(n_theta, n_phi).expect("valid grid")
}

pub fn seed(g: &Arc<SphereGrid>, epsilon: f64) -> SeedData {
    make_seed(g, &SeedParams { epsilon, ..SeedParams::default() }).expect("seed")
}

/// Converged tuple for an azimuthal seed at the given size.
pub fn tuple(g: &Arc<SphereGrid>, epsilon: f64) -> (SeedData, RegularTuple) {
    let s = seed(g, epsilon);
    let t = picard_regular_tuple(&s, &PicardOptions::default()).expect("picard");
    (s, t)
}
