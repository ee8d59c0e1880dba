//! Uniform grids, sampled wavefunctions and fields, deterministic sums.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Pairwise (tree) summation; deterministic regardless of parallel split.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub y0: f64,
    pub step: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(y0: f64, step: f64, n: usize) -> Self {
        assert!(n >= 2 && step > 0.0, "grid needs n >= 2 and positive step");
        Grid1D { y0, step, n }
    }

    /// Symmetric grid on [-half, half] with `n` samples.
    pub fn symmetric(half: f64, n: usize) -> Self {
        let step = 2.0 * half / (n - 1) as f64;
        Grid1D::new(-half, step, n)
    }

    pub fn point(&self, k: usize) -> f64 {
        self.y0 + k as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|k| self.point(k))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction1D {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
}

impl WaveFunction1D {
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        WaveFunction1D { grid, values }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        WaveFunction1D {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    /// Discrete L2 norm `sqrt(step * sum |v|^2)`.
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        (self.grid.step * pairwise_sum(&sq)).sqrt()
    }

    /// Discrete inner product `step * sum f conj(g)`.
    pub fn inner(&self, other: &WaveFunction1D) -> Complex64 {
        assert_eq!(self.grid, other.grid);
        let prods: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .collect();
        pairwise_sum_c(&prods) * self.grid.step
    }
}

/// Axis order is (x1, x2, x3); storage is x3 fastest, then x1, then x2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid3D {
    pub origin: [f64; 3],
    pub step: [f64; 3],
    pub n: [usize; 3],
}

impl Grid3D {
    pub fn new(origin: [f64; 3], step: [f64; 3], n: [usize; 3]) -> Self {
        assert!(n.iter().all(|&k| k >= 2), "grid needs >= 2 nodes per axis");
        assert!(step.iter().all(|&s| s > 0.0), "grid steps must be positive");
        Grid3D { origin, step, n }
    }

    /// Cube [-half, half]^3 with `n` samples per axis.
    pub fn cube(half: f64, n: usize) -> Self {
        let step = 2.0 * half / (n - 1) as f64;
        Grid3D::new([-half; 3], [step; 3], [n; 3])
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i2 * self.n[0] + i1) * self.n[2] + i3
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.step[axis]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field3D {
    pub grid: Grid3D,
    pub values: Vec<Complex64>,
}

impl Field3D {
    pub fn zeros(grid: Grid3D) -> Self {
        Field3D {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    pub fn at(&self, i1: usize, i2: usize, i3: usize) -> Complex64 {
        self.values[self.grid.index(i1, i2, i3)]
    }

    /// Discrete L2 norm over the interior, `margin` nodes from each face.
    pub fn interior_norm(&self, margin: usize) -> f64 {
        let g = &self.grid;
        let w = g.step[0] * g.step[1] * g.step[2];
        let mut sq = Vec::new();
        for i2 in margin..g.n[1].saturating_sub(margin) {
            for i1 in margin..g.n[0].saturating_sub(margin) {
                for i3 in margin..g.n[2].saturating_sub(margin) {
                    sq.push(self.at(i1, i2, i3).norm_sqr());
                }
            }
        }
        (w * pairwise_sum(&sq)).sqrt()
    }

    /// Largest magnitude on the boundary faces, relative to the field max.
    pub fn boundary_decay(&self) -> f64 {
        let g = &self.grid;
        let max = self
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i2 in 0..g.n[1] {
            for i1 in 0..g.n[0] {
                for i3 in 0..g.n[2] {
                    let on_face = i1 == 0
                        || i2 == 0
                        || i3 == 0
                        || i1 == g.n[0] - 1
                        || i2 == g.n[1] - 1
                        || i3 == g.n[2] - 1;
                    if on_face {
                        worst = worst.max(self.at(i1, i2, i3).norm());
                    }
                }
            }
        }
        worst / max
    }
}
