use std::f64::consts::PI;

use crate::{Error, Result};

/// Uniform periodic transverse grid.
///
/// Samples sit at `x_i = (i - nx/2)·dx`, so the origin is the sample at
/// index `nx/2` and the domain spans `[-nx·dx/2, nx·dx/2)`. Reciprocal
/// coordinates follow the FFT ordering (non-negative frequencies first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        for (n, axis) in [(nx, "nx"), (ny, "ny")] {
            if n < Self::MIN_POINTS || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("{axis} = {n} must be even and at least {}", Self::MIN_POINTS)));
            }
        }
        for (d, axis) in [(dx, "dx"), (dy, "dy")] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidGrid(format!("{axis} = {d} must be positive")));
            }
        }
        Ok(Grid { nx, ny, dx, dy })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dy(&self) -> f64 {
        self.dy
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }
    pub fn extent_x(&self) -> f64 {
        self.nx as f64 * self.dx
    }
    pub fn extent_y(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    /// Reciprocal spacing `2π/(nx·dx)`.
    pub fn dkx(&self) -> f64 {
        2.0 * PI / (self.nx as f64 * self.dx)
    }
    pub fn dky(&self) -> f64 {
        2.0 * PI / (self.ny as f64 * self.dy)
    }
    /// Nyquist wavevector along x, `π/dx`.
    pub fn nyquist_x(&self) -> f64 {
        PI / self.dx
    }
    pub fn nyquist_y(&self) -> f64 {
        PI / self.dy
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx / 2) as f64) * self.dx
    }
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - (self.ny / 2) as f64) * self.dy
    }

    /// Signed FFT frequency index for position `i` of an `n`-point transform.
    #[inline]
    pub fn freq_index(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    #[inline]
    pub fn kx(&self, i: usize) -> f64 {
        Self::freq_index(i, self.nx) as f64 * self.dkx()
    }
    #[inline]
    pub fn ky(&self, j: usize) -> f64 {
        Self::freq_index(j, self.ny) as f64 * self.dky()
    }

    /// `|k⊥|²` for every spectral sample, row-major.
    pub fn k_squared(&self) -> Vec<f64> {
        let kx: Vec<f64> = (0..self.nx).map(|i| self.kx(i)).collect();
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            let ky = self.ky(j);
            out.extend(kx.iter().map(|k| k * k + ky * ky));
        }
        out
    }

    /// Whether a point lies inside `[-L/2, L/2)` along both axes.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let hx = self.extent_x() / 2.0;
        let hy = self.extent_y() / 2.0;
        x >= -hx && x < hx && y >= -hy && y < hy
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self == other
    }
}
