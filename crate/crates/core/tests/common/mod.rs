#![allow(dead_code)]

use gerber_core::ReturnMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tails {
    Gaussian,
    /// Student t with 3 degrees of freedom.
    Heavy,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub index: u64,
    pub returns: ReturnMatrix,
    pub c: f64,
    pub tails: Tails,
}

pub const FRACTIONS: [f64; 3] = [0.25, 0.5, 1.0];

/// Seeded instance `index`: T in 5..=50, K in 2..=10, Gaussian or t(3)
/// returns with random per-asset scale, c drawn from [`FRACTIONS`].
pub fn instance(seed: u64, index: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let periods = rng.random_range(5..=50);
    let assets = rng.random_range(2..=10);
    let c = FRACTIONS[rng.random_range(0..FRACTIONS.len())];
    let tails = if rng.random_bool(0.5) {
        Tails::Gaussian
    } else {
        Tails::Heavy
    };
    let t3 = StudentT::new(3.0).unwrap();
    let scales: Vec<f64> = (0..assets).map(|_| rng.random_range(0.01..3.0)).collect();
    // a shared factor gives the pairs some real co-movement
    let factor: Vec<f64> = (0..periods).map(|_| rng.sample(StandardNormal)).collect();
    let loadings: Vec<f64> = (0..assets).map(|_| rng.random_range(-1.0..1.0)).collect();
    let values = Array2::from_shape_fn((periods, assets), |(t, k)| {
        let noise: f64 = match tails {
            Tails::Gaussian => rng.sample(StandardNormal),
            Tails::Heavy => t3.sample(&mut rng),
        };
        scales[k] * (loadings[k] * factor[t] + noise)
    });
    Instance {
        index,
        returns: ReturnMatrix::from_values(values).unwrap(),
        c,
        tails,
    }
}

pub fn instances(seed: u64, count: u64) -> impl Iterator<Item = Instance> {
    (0..count).map(move |i| instance(seed, i))
}
