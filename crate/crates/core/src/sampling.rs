//! Seeded sampling of chart points.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{Chart, Interval, Point};
use crate::error::Result;

/// Distance kept from every finite chart boundary.
pub const BOUNDARY_MARGIN: f64 = 1e-2;

/// Half-width used in place of an infinite chart endpoint.
pub const UNBOUNDED_HALF_WIDTH: f64 = 3.0;

/// Seed used by internal hypothesis checks that do not take one explicitly.
pub const DEFAULT_SEED: u64 = 0x5eed_ab1e;

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn normal_vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform(-1.0, 1.0)).collect()
    }

    /// Uniform sample from an interval shrunk by the boundary margin.
    pub fn in_interval(&mut self, b: &Interval) -> f64 {
        let (lo, hi) = sample_range(b);
        self.uniform(lo, hi)
    }

    pub fn point(&mut self, chart: &Arc<Chart>) -> Result<Point> {
        let coords = chart.bounds().iter().map(|b| self.in_interval(b)).collect();
        Point::new(chart, coords)
    }

    pub fn points(&mut self, chart: &Arc<Chart>, count: usize) -> Result<Vec<Point>> {
        (0..count).map(|_| self.point(chart)).collect()
    }
}

/// The closed range actually sampled for a chart interval.
pub fn sample_range(b: &Interval) -> (f64, f64) {
    let (lo, hi) = match (b.lo.is_finite(), b.hi.is_finite()) {
        (true, true) => (b.lo, b.hi),
        (true, false) => (b.lo, b.lo + 2.0 * UNBOUNDED_HALF_WIDTH),
        (false, true) => (b.hi - 2.0 * UNBOUNDED_HALF_WIDTH, b.hi),
        (false, false) => (-UNBOUNDED_HALF_WIDTH, UNBOUNDED_HALF_WIDTH),
    };
    let m = BOUNDARY_MARGIN.min(0.25 * (hi - lo));
    (lo + m, hi - m)
}
