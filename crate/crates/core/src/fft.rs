//! Unitary 2D discrete Fourier transform on row-major buffers.
//!
//! Both directions carry a `1/√N` factor so that `Σ|f|² = Σ|f̂|²` holds to
//! rounding and a unit-modulus spectral multiplier is exactly norm
//! preserving.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::field::Grid;

pub struct Fft2 {
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    scale: f64,
    transposed: Vec<Complex64>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

/// Rows per parallel task; small enough to balance, large enough to amortise.
const ROW_CHUNK: usize = 16;

impl Fft2 {
    pub fn new(grid: &Grid) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut planner = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
            scale: 1.0 / ((nx * ny) as f64).sqrt(),
            transposed: vec![Complex64::new(0.0, 0.0); nx * ny],
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        let (row, col) = (self.row_fwd.clone(), self.col_fwd.clone());
        self.process(data, &*row, &*col);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let (row, col) = (self.row_inv.clone(), self.col_inv.clone());
        self.process(data, &*row, &*col);
    }

    fn process(&mut self, data: &mut [Complex64], row: &dyn Fft<f64>, col: &dyn Fft<f64>) {
        assert_eq!(data.len(), self.nx * self.ny, "buffer does not match grid");
        let (nx, ny) = (self.nx, self.ny);
        data.par_chunks_mut(nx * ROW_CHUNK).for_each(|rows| row.process(rows));
        transpose(data, &mut self.transposed, nx, ny);
        self.transposed.par_chunks_mut(ny * ROW_CHUNK).for_each(|cols| col.process(cols));
        transpose(&self.transposed, data, ny, nx);
        let s = self.scale;
        data.par_chunks_mut(nx * ROW_CHUNK).for_each(|c| c.iter_mut().for_each(|v| *v *= s));
    }
}

/// Transpose a `rows × cols` row-major matrix (`cols` = row length).
fn transpose(src: &[Complex64], dst: &mut [Complex64], cols: usize, rows: usize) {
    const B: usize = 32;
    for jb in (0..rows).step_by(B) {
        for ib in (0..cols).step_by(B) {
            for j in jb..(jb + B).min(rows) {
                for i in ib..(ib + B).min(cols) {
                    dst[i * rows + j] = src[j * cols + i];
                }
            }
        }
    }
}

/// One-shot forward transform of a copy.
pub fn spectrum(grid: &Grid, values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    Fft2::new(grid).forward(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn round_trip_and_parseval() {
        let g = Grid::new(32, 16, 1.0, 1.0).unwrap();
        let data: Vec<Complex64> =
            (0..g.len()).map(|n| Complex64::new((n as f64 * 0.37).sin(), (n as f64 * 0.11).cos())).collect();
        let mut buf = data.clone();
        let mut fft = Fft2::new(&g);
        fft.forward(&mut buf);
        let e0: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        let e1: f64 = buf.iter().map(|v| v.norm_sqr()).sum();
        assert!(((e0 - e1) / e0).abs() < 1e-13);
        fft.inverse(&mut buf);
        for (a, b) in data.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_lands_on_its_bin() {
        let g = Grid::new(16, 8, 1.0, 1.0).unwrap();
        let (mx, my) = (3usize, 2usize);
        let data: Vec<Complex64> = (0..g.len())
            .map(|n| {
                let (i, j) = (n % 16, n / 16);
                let ph = 2.0 * PI * (mx as f64 * i as f64 / 16.0 + my as f64 * j as f64 / 8.0);
                Complex64::from_polar(1.0, ph)
            })
            .collect();
        let s = spectrum(&g, &data);
        let peak = s.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap().0;
        assert_eq!(peak, g.index(mx, my));
        assert!((s[peak].norm() - (g.len() as f64).sqrt()).abs() < 1e-12);
    }
}
