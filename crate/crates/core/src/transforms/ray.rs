use std::ops::Range;

use crate::geometry::{line_point, Direction, Point};

/// Quadrature nodes on the oriented line `(s, θ)`: `nodes` midpoints of
/// equal cells covering `[−half_length, half_length]`, placed symmetrically
/// about `t = 0` so that node `m` of `(s, θ)` coincides bitwise with node
/// `nodes−1−m` of `(−s, −θ)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Ray {
    s: f64,
    dir: Direction,
    step: f64,
    nodes: usize,
}

impl Ray {
    /// Cells no longer than `max_step`.
    pub fn new(s: f64, dir: Direction, half_length: f64, max_step: f64) -> Self {
        let nodes = ((2.0 * half_length / max_step).ceil() as usize).max(1);
        Ray {
            s,
            dir,
            step: 2.0 * half_length / nodes as f64,
            nodes,
        }
    }

    pub fn direction(&self) -> Direction {
        self.dir
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.nodes
    }

    #[inline]
    pub fn t(&self, m: usize) -> f64 {
        (m as f64 - (self.nodes - 1) as f64 / 2.0) * self.step
    }

    #[inline]
    pub fn node(&self, m: usize) -> Point {
        line_point(self.s, self.dir, self.t(m))
    }

    /// Nodes within distance `radius` of the origin; symmetric about the
    /// middle node.
    pub fn span(&self, radius: f64) -> Range<usize> {
        if radius <= self.s.abs() {
            return 0..0;
        }
        let half_chord = (radius * radius - self.s * self.s).sqrt();
        let mid = (self.nodes - 1) as f64 / 2.0;
        let lo = (mid - half_chord / self.step).ceil().max(0.0) as usize;
        if lo > self.nodes - 1 - lo {
            return 0..0;
        }
        lo..self.nodes - lo
    }
}
