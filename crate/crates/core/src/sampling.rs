//! Seeded sampling of base points and tangent vectors.
//!
//! Each sample index gets its own ChaCha stream, so a sweep produces the
//! same draws no matter how it is split across threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fiber::{BasePoint, TangentVec};

/// Real parts of `alpha_i(x)` are drawn from this interval.
pub const SIMPLE_ROOT_RE: (f64, f64) = (-2.0, -0.2);
/// Imaginary parts of `alpha_i(x)` are drawn from this interval.
pub const SIMPLE_ROOT_IM: (f64, f64) = (-2.8, 2.8);

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    fn uniform(&mut self, (lo, hi): (f64, f64)) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// A point with every simple root value in the convergence chamber, and
    /// hence `|e^alpha| <= e^-0.2` for every positive root.
    pub fn point(&mut self, rank: usize) -> BasePoint {
        let x = (0..rank)
            .map(|_| Complex64::new(self.uniform(SIMPLE_ROOT_RE), self.uniform(SIMPLE_ROOT_IM)))
            .collect();
        let s = Complex64::new(self.uniform((-1.0, 1.0)), self.uniform((-PI, PI)));
        BasePoint::new(x, s)
    }

    pub fn complex(&mut self) -> Complex64 {
        Complex64::new(self.uniform((-1.0, 1.0)), self.uniform((-1.0, 1.0)))
    }

    pub fn tangent(&mut self, rank: usize) -> TangentVec {
        let h = (0..rank).map(|_| self.complex()).collect();
        TangentVec::new(h, self.complex())
    }

    pub fn horizontal(&mut self, rank: usize) -> TangentVec {
        TangentVec::horizontal((0..rank).map(|_| self.complex()).collect())
    }
}
