//! Discretization of the flat torus Cⁿ/(Z+iZ)ⁿ.
//!
//! Real coordinates are (x₁, y₁, …, x_n, y_n) with z_j = x_j + i·y_j, each
//! axis periodic with period 1, grid points at {0, 1/N, …, (N−1)/N}. Values
//! are stored row-major in that axis order, last axis fastest. The background
//! Kähler metric is the identity in z-coordinates and the total volume is 1.

use serde::{Deserialize, Serialize};

use crate::error::FieldError;

/// Upper bound on the number of real axes (n ≤ 2 complex dimensions).
pub const MAX_AXES: usize = 4;

/// Grid geometry of the flat torus. Cheap to copy; all fields carry one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGeometry {
    n: usize,
    grid: usize,
}

impl TorusGeometry {
    /// Period of every real axis (fixed).
    pub const PERIOD: f64 = 1.0;
    /// Total measure of the torus (fixed).
    pub const VOLUME: f64 = 1.0;

    pub fn new(n: usize, grid: usize) -> Result<Self, FieldError> {
        if !(1..=2).contains(&n) {
            return Err(FieldError::BadDimension(n));
        }
        if !grid.is_power_of_two() || !(4..=8192).contains(&grid) {
            return Err(FieldError::BadGridSize(grid));
        }
        Ok(Self { n, grid })
    }

    /// Complex dimension (1 or 2).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid points per real axis.
    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Number of real axes, 2n.
    pub fn axes(&self) -> usize {
        2 * self.n
    }

    /// Total number of grid points, N^(2n).
    pub fn points(&self) -> usize {
        self.grid.pow(self.axes() as u32)
    }

    /// Grid spacing 1/N.
    pub fn spacing(&self) -> f64 {
        1.0 / self.grid as f64
    }

    /// Row-major stride of `axis` (last axis fastest).
    pub fn stride(&self, axis: usize) -> usize {
        debug_assert!(axis < self.axes());
        self.grid.pow((self.axes() - 1 - axis) as u32)
    }

    /// Axis index of the real part of complex coordinate j.
    pub fn x_axis(&self, j: usize) -> usize {
        2 * j
    }

    /// Axis index of the imaginary part of complex coordinate j.
    pub fn y_axis(&self, j: usize) -> usize {
        2 * j + 1
    }

    /// Multi-index of flat grid index `p` (only the first `axes()` entries
    /// are meaningful).
    pub fn decompose(&self, p: usize) -> [usize; MAX_AXES] {
        let mut idx = [0usize; MAX_AXES];
        let mut rest = p;
        for axis in (0..self.axes()).rev() {
            idx[axis] = rest % self.grid;
            rest /= self.grid;
        }
        idx
    }

    /// Real coordinates of grid point `p`.
    pub fn coords(&self, p: usize) -> [f64; MAX_AXES] {
        let idx = self.decompose(p);
        let mut c = [0.0; MAX_AXES];
        for axis in 0..self.axes() {
            c[axis] = idx[axis] as f64 * self.spacing();
        }
        c
    }

    /// Signed integer wavenumber of FFT bin `idx`: 0, 1, …, N/2−1, −N/2, …, −1.
    pub fn signed_wave(&self, idx: usize) -> i64 {
        if idx < self.grid / 2 {
            idx as i64
        } else {
            idx as i64 - self.grid as i64
        }
    }

    /// Whether FFT bin `idx` is the Nyquist bin.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx == self.grid / 2
    }
}
