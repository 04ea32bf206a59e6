//! Synthetic test measures: a smiley-face mask and point samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::moments::MaskGrid;

/// Geometry of a smiley face: a disk with two eye holes and a mouth band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Smiley {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Smiley {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        Self { center, radius }
    }

    fn local(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.center[0]) / self.radius, (y - self.center[1]) / self.radius)
    }

    fn in_eye(u: f64, v: f64) -> bool {
        let e = 0.18;
        (u - 0.35).powi(2) + (v - 0.3).powi(2) <= e * e || (u + 0.35).powi(2) + (v - 0.3).powi(2) <= e * e
    }

    fn in_mouth(u: f64, v: f64) -> bool {
        let d = (u * u + (v - 0.05).powi(2)).sqrt();
        (0.45..=0.62).contains(&d) && v < -0.1
    }

    /// Filled face minus eyes and mouth.
    pub fn contains_face(&self, x: f64, y: f64) -> bool {
        let (u, v) = self.local(x, y);
        u * u + v * v <= 1.0 && !Self::in_eye(u, v) && !Self::in_mouth(u, v)
    }

    /// Eyes and mouth only.
    pub fn contains_features(&self, x: f64, y: f64) -> bool {
        let (u, v) = self.local(x, y);
        Self::in_eye(u, v) || Self::in_mouth(u, v)
    }

    /// Face mask on a `res x res` grid covering the unit square.
    pub fn mask(&self, res: usize) -> MaskGrid {
        MaskGrid::from_predicate(res, res, [0.0, 0.0], [1.0, 1.0], |x, y| self.contains_face(x, y))
    }

    /// `n` points from the equal-weight mixture of the two eye disks and
    /// the mouth arc.
    pub fn sample_features(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let (u, v) = match rng.gen_range(0..3) {
                    k @ (0 | 1) => {
                        let cx = if k == 0 { -0.35 } else { 0.35 };
                        let rho = 0.18 * rng.gen::<f64>().sqrt();
                        let th = rng.gen::<f64>() * std::f64::consts::TAU;
                        (cx + rho * th.cos(), 0.3 + rho * th.sin())
                    }
                    _ => {
                        let th = -std::f64::consts::FRAC_PI_2 + rng.gen_range(-0.9..0.9);
                        (0.53 * th.cos(), 0.05 + 0.53 * th.sin())
                    }
                };
                vec![self.center[0] + self.radius * u, self.center[1] + self.radius * v]
            })
            .collect()
    }
}

/// Rotates points about `center` by `angle` radians.
pub fn rotate(points: &[Vec<f64>], center: [f64; 2], angle: f64) -> Vec<Vec<f64>> {
    let (s, c) = angle.sin_cos();
    points
        .iter()
        .map(|p| {
            let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
            vec![center[0] + c * dx - s * dy, center[1] + s * dx + c * dy]
        })
        .collect()
}
