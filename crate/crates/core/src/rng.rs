//! Seeded randomness. Every random draw in the crate goes through
//! [`seeded`], which is ChaCha8 keyed by a 64-bit seed, so runs are
//! reproducible across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::tensor::{Label, PureState};
use crate::{Result, C64};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A vector of independent standard complex Gaussians.
pub fn complex_gaussians(rng: &mut Rng, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

/// Haar-random single-qudit state: normalized complex Gaussian vector.
pub fn haar_state(rng: &mut Rng, d: usize, label: impl Into<Label>) -> Result<PureState> {
    PureState::normalized(vec![label.into()], d, complex_gaussians(rng, d))
}

/// `count` Haar-random inputs drawn from `seed`.
pub fn haar_inputs(seed: u64, d: usize, count: usize) -> Result<Vec<PureState>> {
    let mut rng = seeded(seed);
    (0..count).map(|_| haar_state(&mut rng, d, "in")).collect()
}

/// Haar-random `d×d` unitary from the QR decomposition of a Ginibre matrix,
/// with the diagonal phases of `R` absorbed.
pub fn haar_unitary(rng: &mut Rng, d: usize) -> nalgebra::DMatrix<C64> {
    let g = nalgebra::DMatrix::from_vec(d, d, complex_gaussians(rng, d * d));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}
