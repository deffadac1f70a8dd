//! Nodal initial data.
//!
//! `uniform_random(lo, hi, seed)` draws one value per node in node order
//! from a ChaCha8 stream seeded with `seed`, mapped to `[lo, hi]` by
//! `rand`'s inclusive float range sampling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{InitialData, ModelKind, RunConfig};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::model::Transmission;

/// Bulk datum evaluated at every node.
pub fn bulk_datum(data: &InitialData, mesh: &Mesh) -> Vec<f64> {
    match *data {
        InitialData::StepX => mesh
            .nodes()
            .iter()
            .map(|&[x, _]| if x > 0.5 { 1.0 } else { -1.0 })
            .collect(),
        InitialData::SineProduct => mesh
            .nodes()
            .iter()
            .map(|&[x, y]| (4.0 * PI * x).sin() * (4.0 * PI * y).cos())
            .collect(),
        InitialData::UniformRandom { lo, hi, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..mesh.n_nodes()).map(|_| rng.random_range(lo..=hi)).collect()
        }
    }
}

/// Surface datum `V⁰ = H⁻¹(U⁰|_Γ)` with the inverse taken on the
/// transmission's interval.
pub fn surface_datum(u0: &[f64], mesh: &Mesh, transmission: &Transmission) -> Result<Vec<f64>> {
    mesh.boundary_nodes()
        .iter()
        .map(|&node| {
            transmission
                .inverse_on_interval(u0[node])
                .ok_or(Error::InverseOutOfRange { node, value: u0[node] })
        })
        .collect()
}

/// `(U⁰, V⁰)` for the configured model; `V⁰` is absent for the limit model.
pub fn make_initial_data(
    config: &RunConfig,
    mesh: &Mesh,
    transmission: &Transmission,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let u0 = bulk_datum(&config.initial_data, mesh);
    let v0 = match config.model {
        ModelKind::Robin => Some(surface_datum(&u0, mesh, transmission)?),
        ModelKind::Limit => None,
    };
    Ok((u0, v0))
}
