use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fft::Fft2;
use crate::field::{Field2D, Grid};
use crate::{Error, Result};

/// Histogram of `I/⟨I⟩` with the second moment `g₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityStats {
    /// Bin centres in units of the mean intensity.
    pub bin_centers: Vec<f64>,
    /// Probability density per unit of `I/⟨I⟩`; samples above the last bin
    /// count towards the normalisation but not the histogram.
    pub pdf: Vec<f64>,
    pub mean: f64,
    pub g2: f64,
    /// Index and centre of the most populated bin.
    pub mode_bin: usize,
    pub mode: f64,
}

impl IntensityStats {
    /// `I,P` rows with `I` normalised to the mean.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("I,P\n");
        for (i, p) in self.bin_centers.iter().zip(&self.pdf) {
            let _ = writeln!(s, "{i:e},{p:e}");
        }
        s
    }
}

/// Pooled statistics of `|𝓔|²·factor` over every sample of every field.
pub fn intensity_statistics(fields: &[Field2D], n0: f64, bins: usize, max_ratio: f64) -> Result<IntensityStats> {
    if fields.is_empty() {
        return Err(Error::param("statistics.fields", "no fields given"));
    }
    if bins == 0 || !(max_ratio > 0.0) {
        return Err(Error::param("statistics.bins", "need at least one bin and a positive range"));
    }
    let samples: Vec<f64> = fields.iter().flat_map(|f| f.intensity(n0)).collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if !(mean > 0.0) {
        return Err(Error::Degenerate("zero mean intensity".into()));
    }
    let g2 = samples.iter().map(|i| i * i).sum::<f64>() / n / (mean * mean);
    let width = max_ratio / bins as f64;
    let mut counts = vec![0usize; bins];
    for i in &samples {
        let b = (i / mean / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        }
    }
    let pdf: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let mode_bin = (0..bins).max_by_key(|&b| (counts[b], std::cmp::Reverse(b))).unwrap_or(0);
    let bin_centers: Vec<f64> = (0..bins).map(|b| (b as f64 + 0.5) * width).collect();
    Ok(IntensityStats { mode: bin_centers[mode_bin], bin_centers, pdf, mean, g2, mode_bin })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G1Method {
    /// `ψ(r)` against its point reflection `ψ(-r)` about the grid centre,
    /// binned by the separation `Δr = 2|r|`.
    RotatePair,
    /// `⟨ψ(r)ψ*(r+Δr)⟩` over realisations and positions.
    Ensemble,
}

/// Radially binned `|g₁(Δr)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct G1Profile {
    pub dr: Vec<f64>,
    pub g1: Vec<f64>,
}

impl G1Profile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dr,g1\n");
        for (d, g) in self.dr.iter().zip(&self.g1) {
            let _ = writeln!(s, "{d:e},{g:e}");
        }
        s
    }
}

/// First-order coherence with `bins` radial bins of width `dx`.
///
/// Empty bins are dropped. Every value is in `[0, 1]` by construction.
pub fn coherence_g1(fields: &[Field2D], method: G1Method, bins: usize) -> Result<G1Profile> {
    let first = fields.first().ok_or_else(|| Error::param("coherence.fields", "no fields given"))?;
    let grid = *first.grid();
    for f in fields {
        first.check_same_grid(f)?;
    }
    if bins == 0 {
        return Err(Error::param("coherence.bins", "need at least one bin"));
    }
    let step = grid.dx();
    let mut cross = vec![Complex64::new(0.0, 0.0); bins];
    let mut norm_a = vec![0.0; bins];
    let mut norm_b = vec![0.0; bins];
    let mut dr_sum = vec![0.0; bins];
    let mut hits = vec![0usize; bins];
    let (nx, ny) = (grid.nx(), grid.ny());
    match method {
        G1Method::RotatePair => {
            for f in fields {
                for j in 0..ny {
                    for i in 0..nx {
                        let dr = 2.0 * grid.x(i).hypot(grid.y(j));
                        let b = (dr / step).floor() as usize;
                        if b >= bins {
                            continue;
                        }
                        let a = f.at(i, j);
                        let m = f.at((nx - i) % nx, (ny - j) % ny);
                        cross[b] += a * m.conj();
                        norm_a[b] += a.norm_sqr();
                        norm_b[b] += m.norm_sqr();
                        dr_sum[b] += dr;
                        hits[b] += 1;
                    }
                }
            }
        }
        G1Method::Ensemble => {
            if fields.len() < 2 {
                return Err(Error::param("coherence.method", "ensemble g1 needs at least two realisations"));
            }
            let corr = autocorrelation_sum(&grid, fields);
            let c0 = corr[0].re;
            if !(c0 > 0.0) {
                return Err(Error::Degenerate("zero field".into()));
            }
            for j in 0..ny {
                for i in 0..nx {
                    let dxs = Grid::freq_index(i, nx) as f64 * grid.dx();
                    let dys = Grid::freq_index(j, ny) as f64 * grid.dy();
                    let dr = dxs.hypot(dys);
                    let b = (dr / step).floor() as usize;
                    if b >= bins {
                        continue;
                    }
                    cross[b] += corr[grid.index(i, j)];
                    norm_a[b] += c0;
                    norm_b[b] += c0;
                    dr_sum[b] += dr;
                    hits[b] += 1;
                }
            }
        }
    }
    let mut out = G1Profile { dr: Vec::new(), g1: Vec::new() };
    for b in 0..bins {
        let d = (norm_a[b] * norm_b[b]).sqrt();
        if hits[b] == 0 || d == 0.0 {
            continue;
        }
        out.dr.push(dr_sum[b] / hits[b] as f64);
        out.g1.push((cross[b].norm() / d).min(1.0));
    }
    Ok(out)
}

/// `Σ_m Σ_r ψ_m*(r)ψ_m(r+Δ)` for every lattice shift `Δ`.
fn autocorrelation_sum(grid: &Grid, fields: &[Field2D]) -> Vec<Complex64> {
    let mut fft = Fft2::new(grid);
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for f in fields {
        let mut buf = f.values().to_vec();
        fft.forward(&mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += v.norm_sqr();
        }
    }
    fft.inverse(&mut acc);
    let scale = (grid.len() as f64).sqrt();
    acc.iter().map(|v| v * scale).collect()
}

/// Radially averaged static structure factor with per-bin standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFactor {
    /// Mean `|k|` of the modes in each bin.
    pub k: Vec<f64>,
    pub s: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl StructureFactor {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,S,stderr\n");
        for ((k, v), e) in self.k.iter().zip(&self.s).zip(&self.stderr) {
            let _ = writeln!(s, "{k:e},{v:e},{e:e}");
        }
        s
    }
}

/// Smallest ensemble accepted by [`structure_factor`].
pub const MIN_REALISATIONS: usize = 100;

/// `S(k) = ⟨|δρ̃(k)|²⟩_signal / ⟨|δρ̃(k)|²⟩_reference` on `bins` radial
/// bins up to the smaller Nyquist wavenumber. `δρ` is each member's
/// density minus the ensemble-mean density, pixel by pixel. The k = 0 mode
/// is excluded.
pub fn structure_factor(signal: &[Field2D], reference: &[Field2D], bins: usize) -> Result<StructureFactor> {
    if signal.len() < MIN_REALISATIONS || reference.len() < MIN_REALISATIONS {
        return Err(Error::param(
            "structure_factor.realisations",
            format!("need at least {MIN_REALISATIONS} realisations per ensemble"),
        ));
    }
    if bins == 0 {
        return Err(Error::param("structure_factor.bins", "need at least one bin"));
    }
    let grid = *signal[0].grid();
    for f in signal.iter().chain(reference) {
        if f.grid() != &grid {
            return Err(Error::GridMismatch("structure-factor ensembles must share one grid".into()));
        }
    }
    let k_max = grid.nyquist_x().min(grid.nyquist_y());
    let width = k_max / bins as f64;
    let k2 = grid.k_squared();
    let bin_of: Vec<Option<usize>> = k2
        .iter()
        .enumerate()
        .map(|(n, k)| {
            let b = (k.sqrt() / width).floor() as usize;
            (n != 0 && b < bins).then_some(b)
        })
        .collect();
    let mut k_mean = vec![0.0; bins];
    let mut modes = vec![0usize; bins];
    for (n, b) in bin_of.iter().enumerate() {
        if let Some(b) = b {
            k_mean[*b] += k2[n].sqrt();
            modes[*b] += 1;
        }
    }
    let sig = bin_powers(&grid, signal, &bin_of, bins);
    let refp = bin_powers(&grid, reference, &bin_of, bins);
    let mut out = StructureFactor { k: Vec::new(), s: Vec::new(), stderr: Vec::new() };
    for b in 0..bins {
        if modes[b] == 0 {
            continue;
        }
        let (ms, vs) = mean_var(sig.iter().map(|r| r[b]));
        let (mr, vr) = mean_var(refp.iter().map(|r| r[b]));
        if mr == 0.0 {
            return Err(Error::Degenerate(format!(
                "reference ensemble has no density fluctuations at k = {:e}",
                k_mean[b] / modes[b] as f64
            )));
        }
        let s = ms / mr;
        let sig_rel = if ms > 0.0 { vs / (signal.len() as f64 * ms * ms) } else { 0.0 };
        let rel2 = sig_rel + vr / (reference.len() as f64 * mr * mr);
        out.k.push(k_mean[b] / modes[b] as f64);
        out.s.push(s);
        out.stderr.push(s * rel2.sqrt());
    }
    Ok(out)
}

/// Per-member radial sums of `|δρ̃(k)|²`.
fn bin_powers(grid: &Grid, fields: &[Field2D], bin_of: &[Option<usize>], bins: usize) -> Vec<Vec<f64>> {
    let m = fields.len() as f64;
    let mut mean = vec![0.0; grid.len()];
    for f in fields {
        for (a, v) in mean.iter_mut().zip(f.values()) {
            *a += v.norm_sqr();
        }
    }
    mean.iter_mut().for_each(|v| *v /= m);
    fields
        .par_iter()
        .map_init(
            || Fft2::new(grid),
            |fft, f| {
                let mut buf: Vec<Complex64> =
                    f.values().iter().zip(&mean).map(|(v, r)| Complex64::new(v.norm_sqr() - r, 0.0)).collect();
                fft.forward(&mut buf);
                let mut sums = vec![0.0; bins];
                for (v, b) in buf.iter().zip(bin_of) {
                    if let Some(b) = b {
                        sums[*b] += v.norm_sqr();
                    }
                }
                sums
            },
        )
        .collect()
}

fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{speckle, UnitTag};

    fn flat(g: Grid) -> Field2D {
        Field2D::new(g, vec![Complex64::new(1.0, 0.0); g.len()], UnitTag::Dimensionless).unwrap()
    }

    #[test]
    fn plane_wave_statistics() {
        let g = Grid::new(16, 16, 1.0, 1.0).unwrap();
        let s = intensity_statistics(&[flat(g)], 1.0, 12, 6.0).unwrap();
        assert!((s.g2 - 1.0).abs() < 1e-15);
        assert_eq!(s.mode_bin, 2);
        assert!((s.pdf[2] * 0.5 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn speckle_is_exponential() {
        let g = Grid::new(128, 128, 1.0, 1.0).unwrap();
        let fields: Vec<Field2D> = (0..8).map(|s| speckle(&g, 3.0, 1.0, 1.0, s).unwrap()).collect();
        let s = intensity_statistics(&fields, 1.0, 24, 6.0).unwrap();
        assert!((s.g2 - 2.0).abs() < 0.1, "g2 = {}", s.g2);
        assert_eq!(s.mode_bin, 0);
        // P(I) = e^{-I} bin average
        let w = 0.25;
        for b in 0..8 {
            let expected = ((-(b as f64) * w).exp() - (-(b as f64 + 1.0) * w).exp()) / w;
            assert!((s.pdf[b] / expected - 1.0).abs() < 0.1, "bin {b}");
        }
    }

    #[test]
    fn coherent_field_has_unit_g1() {
        let g = Grid::new(32, 32, 1.0, 1.0).unwrap();
        let f =
            Field2D::from_fn(g, UnitTag::Dimensionless, |x, y| Complex64::new((-(x * x + y * y) / 100.0).exp(), 0.0))
                .unwrap();
        let p = coherence_g1(std::slice::from_ref(&f), G1Method::RotatePair, 20).unwrap();
        assert!(p.g1.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let q = coherence_g1(&[flat(g), flat(g)], G1Method::Ensemble, 10).unwrap();
        assert!(q.g1.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(coherence_g1(&[f], G1Method::Ensemble, 10).is_err());
    }

    #[test]
    fn speckle_coherence_is_gaussian() {
        let g = Grid::new(128, 128, 1.0, 1.0).unwrap();
        let ell = 4.0;
        let fields: Vec<Field2D> = (0..16).map(|s| speckle(&g, ell, 1.0, 1.0, 100 + s).unwrap()).collect();
        let p = coherence_g1(&fields, G1Method::Ensemble, 12).unwrap();
        for (d, v) in p.dr.iter().zip(&p.g1) {
            let oracle = (-(d * d) / (2.0 * ell * ell)).exp();
            assert!((v - oracle).abs() < 0.05, "dr {d}: {v} vs {oracle}");
        }
    }

    #[test]
    fn structure_factor_guards() {
        let g = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let same: Vec<Field2D> = (0..100).map(|_| flat(g)).collect();
        assert!(matches!(structure_factor(&same, &same, 4), Err(Error::Degenerate(_))));
        assert!(structure_factor(&same[..50], &same, 4).is_err());
    }
}
