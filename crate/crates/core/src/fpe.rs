//! Fractional power encoding: scalar values become powers of a random
//! phasor base vector, computed in the frequency domain.
//!
//! A base phasor has a unit-magnitude, conjugate-symmetric spectrum whose
//! independent phases are drawn from N(0, phase_std^2). Encoding value v
//! raises the spectrum to the power alpha*v (a pure phase multiplication),
//! so inner products between encodings realize a translation-invariant
//! similarity kernel K(delta) that approximates a Gaussian whose width
//! shrinks as phase_std grows. All vectors are real with norm sqrt(dim).

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::FactorSpace;
use crate::seeding::stream_rng;

/// A random phasor base vector, stored as its independent spectrum phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasePhasor {
    dim: usize,
    phase_std: f64,
    seed: u64,
    /// Phases of bins 1..dim/2; DC and Nyquist are pinned to 1 so that
    /// fractional powers stay real-spectrum-symmetric.
    phases: Vec<f64>,
}

impl BasePhasor {
    /// Draw a base phasor with i.i.d. N(0, phase_std^2) phases.
    pub fn sample(dim: usize, phase_std: f64, seed: u64) -> Result<Self> {
        if dim < 4 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidDim(dim));
        }
        if phase_std <= 0.0 || !phase_std.is_finite() {
            return Err(Error::InvalidPhaseStd(phase_std));
        }
        let mut rng = stream_rng(seed, &[0x7068_6173]);
        let phases = (0..dim / 2 - 1)
            .map(|_| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                z * phase_std
            })
            .collect();
        Ok(Self {
            dim,
            phase_std,
            seed,
            phases,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phase_std(&self) -> f64 {
        self.phase_std
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Full complex time-domain encoding of `value`; the imaginary parts
    /// are a numerical residue of the conjugate-symmetric spectrum and are
    /// exposed for verification.
    pub fn encode_complex(&self, value: f64, alpha: f64) -> Vec<Complex<f64>> {
        let n = self.dim;
        let exponent = alpha * value;
        let mut spectrum = vec![Complex::new(1.0, 0.0); n];
        for (k, &phase) in self.phases.iter().enumerate() {
            let rotated = Complex::from_polar(1.0, phase * exponent);
            spectrum[k + 1] = rotated;
            spectrum[n - 1 - k] = rotated.conj();
        }
        // spectrum[0] (DC) and spectrum[n/2] (Nyquist) stay 1 for all powers
        let mut planner = FftPlanner::new();
        let ifft = planner.plan_fft_inverse(n);
        ifft.process(&mut spectrum);
        // unitary normalization: unit-magnitude spectrum -> norm sqrt(dim)
        let scale = 1.0 / (n as f64).sqrt();
        for z in &mut spectrum {
            *z *= scale;
        }
        spectrum
    }

    /// Real-valued encoding of `value` with norm sqrt(dim).
    pub fn encode(&self, value: f64, alpha: f64) -> Vec<f64> {
        self.encode_complex(value, alpha)
            .into_iter()
            .map(|z| z.re)
            .collect()
    }
}

/// Binding: circular convolution scaled by 1/sqrt(dim).
///
/// The scale keeps norm-sqrt(dim) phasor encodings closed under binding, so
/// bind(encode(a), encode(b)) == encode(a+b) exactly.
pub fn bind(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    ifft.process(&mut fa);
    // raw ifft(fft*fft) carries a factor n * sqrt(n) relative to the bound encoding
    let scale = 1.0 / (n as f64 * (n as f64).sqrt());
    Ok(fa.into_iter().map(|z| z.re * scale).collect())
}

/// The similarity kernel sampled at the given value offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCurve {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
}

impl KernelCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,similarity\n");
        for (d, v) in self.deltas.iter().zip(&self.values) {
            out.push_str(&format!("{d},{v}\n"));
        }
        out
    }
}

/// K(delta) = <z(0), z(delta)> / dim for each delta.
pub fn kernel_profile(base: &BasePhasor, alpha: f64, deltas: &[f64]) -> KernelCurve {
    let origin = base.encode(0.0, alpha);
    let dim = base.dim() as f64;
    let values = deltas
        .iter()
        .map(|&d| {
            let z = base.encode(d, alpha);
            dot(&origin, &z) / dim
        })
        .collect();
    KernelCurve {
        deltas: deltas.to_vec(),
        values,
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares fit of exp(-delta^2 / (2 sigma^2)) to a kernel curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub sigma: f64,
    pub r_squared: f64,
}

/// Fit the one-parameter Gaussian by scanning s = 1/(2 sigma^2) on a log
/// grid and refining with golden-section search.
pub fn fit_gaussian(curve: &KernelCurve) -> Result<GaussianFit> {
    if !curve.deltas.contains(&0.0) {
        return Err(Error::MissingZeroDelta);
    }
    let mean = curve.values.iter().sum::<f64>() / curve.values.len() as f64;
    let ss_tot: f64 = curve.values.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateCurve);
    }
    let sse = |s: f64| -> f64 {
        curve
            .deltas
            .iter()
            .zip(&curve.values)
            .map(|(&d, &v)| {
                let model = (-s * d * d).exp();
                (v - model).powi(2)
            })
            .sum()
    };
    // coarse log-grid scan
    let mut best_s = 1.0;
    let mut best = f64::INFINITY;
    let grid = 600;
    for i in 0..=grid {
        let s = 10f64.powf(-6.0 + 12.0 * i as f64 / grid as f64);
        let e = sse(s);
        if e < best {
            best = e;
            best_s = s;
        }
    }
    // golden-section refinement around the best grid point
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_s / 10.0, best_s * 10.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = sse(x2);
        }
    }
    let s = (lo + hi) / 2.0;
    let sigma = 1.0 / (2.0 * s).sqrt();
    let r_squared = 1.0 - sse(s) / ss_tot;
    Ok(GaussianFit { sigma, r_squared })
}

/// Per-attribute FPE configuration (vectors are reconstructed from this).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeCodebookConfig {
    pub name: String,
    pub cardinality: usize,
    pub dim: usize,
    pub phase_std: f64,
    pub alpha: f64,
    pub seed: u64,
}

/// Encoded value vectors for one attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeCodebook {
    pub config: AttributeCodebookConfig,
    pub base: BasePhasor,
    rows: Vec<Vec<f64>>,
}

impl AttributeCodebook {
    pub fn new(config: AttributeCodebookConfig) -> Result<Self> {
        let base = BasePhasor::sample(config.dim, config.phase_std, config.seed)?;
        let rows = (0..config.cardinality)
            .map(|v| base.encode(v as f64, config.alpha))
            .collect();
        Ok(Self { config, base, rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, value: usize) -> &[f64] {
        &self.rows[value]
    }
}

/// Codebooks for every task-relevant attribute of a space.
///
/// Serialization stores configuration only; the matrices are rebuilt
/// deterministically from the seeds on load.
#[derive(Debug, Clone, PartialEq)]
pub struct FpeCodebook {
    attributes: Vec<AttributeCodebook>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FpeCodebookFile {
    attributes: Vec<AttributeCodebookConfig>,
}

impl FpeCodebook {
    pub fn new(configs: Vec<AttributeCodebookConfig>) -> Result<Self> {
        let attributes = configs
            .into_iter()
            .map(AttributeCodebook::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { attributes })
    }

    /// Uniform settings for every task-relevant factor of `space`;
    /// per-attribute seeds are derived from `seed`.
    pub fn for_space(
        space: &FactorSpace,
        dim: usize,
        phase_std: f64,
        alpha: f64,
        seed: u64,
    ) -> Result<Self> {
        let configs = space
            .task_relevant_indices()
            .iter()
            .map(|&f| {
                let spec = space.factor(f);
                AttributeCodebookConfig {
                    name: spec.name.clone(),
                    cardinality: spec.cardinality,
                    dim,
                    phase_std,
                    alpha,
                    seed: crate::seeding::derive_seed(seed, &[f as u64]),
                }
            })
            .collect();
        Self::new(configs)
    }

    pub fn attributes(&self) -> &[AttributeCodebook] {
        &self.attributes
    }

    pub fn attribute(&self, name: &str) -> Result<&AttributeCodebook> {
        self.attributes
            .iter()
            .find(|a| a.config.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn to_json(&self) -> String {
        let file = FpeCodebookFile {
            attributes: self.attributes.iter().map(|a| a.config.clone()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("codebook config serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FpeCodebookFile = serde_json::from_str(text)?;
        Self::new(file.attributes)
    }
}

/// Readout of a query vector against one attribute codebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    /// Argmax row (ties go to the lowest index).
    pub index: usize,
    pub similarities: Vec<f64>,
}

/// Cosine similarity of `query` against every codebook row.
pub fn cosine_readout(query: &[f64], book: &AttributeCodebook) -> Result<Readout> {
    if query.len() != book.config.dim {
        return Err(Error::DimMismatch {
            left: query.len(),
            right: book.config.dim,
        });
    }
    let qn = dot(query, query).sqrt();
    if qn == 0.0 {
        return Err(Error::ZeroNormQuery);
    }
    let similarities: Vec<f64> = book
        .rows()
        .iter()
        .map(|row| {
            let rn = dot(row, row).sqrt();
            dot(query, row) / (qn * rn)
        })
        .collect();
    Ok(Readout {
        index: argmax_lowest(&similarities),
        similarities,
    })
}

/// Index of the maximum; exact ties resolve to the lowest index.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut index = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[index] {
            index = i;
        }
    }
    index
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(dim: usize, std: f64, seed: u64) -> BasePhasor {
        BasePhasor::sample(dim, std, seed).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            BasePhasor::sample(3, 0.5, 0),
            Err(Error::InvalidDim(3))
        ));
        assert!(matches!(
            BasePhasor::sample(10, 0.0, 0),
            Err(Error::InvalidPhaseStd(_))
        ));
        assert!(BasePhasor::sample(4, 0.5, 0).is_ok());
    }

    #[test]
    fn encodings_are_real_and_norm_preserving() {
        let b = base(1024, 0.5, 3);
        for v in [-2.5, 0.0, 1.0, 3.75] {
            let residue = b
                .encode_complex(v, 1.0)
                .iter()
                .map(|z| z.im.abs())
                .fold(0.0f64, f64::max);
            assert!(residue < 1e-12, "imag residue {residue}");
            let z = b.encode(v, 1.0);
            let norm = dot(&z, &z).sqrt();
            assert!(
                (norm - 32.0).abs() / 32.0 < 1e-9,
                "norm {norm} for value {v}"
            );
        }
    }

    #[test]
    fn distinct_seeds_give_distinct_spectra() {
        let a = base(64, 0.5, 0);
        let b = base(64, 0.5, 1);
        assert_ne!(a.encode(1.0, 1.0), b.encode(1.0, 1.0));
    }

    #[test]
    fn value_zero_is_the_identity_vector() {
        let b = base(64, 0.7, 11);
        let z = b.encode(0.0, 1.0);
        assert!((z[0] - 8.0).abs() < 1e-12); // sqrt(64)
        for &x in &z[1..] {
            assert!(x.abs() < 1e-12);
        }
        // independent of base phases
        let c = base(64, 0.7, 99);
        let w = c.encode(0.0, 1.0);
        for (a, b) in z.iter().zip(&w) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn binding_adds_exponents() {
        let b = base(256, 0.5, 5);
        let bound = bind(&b.encode(1.0, 1.0), &b.encode(1.0, 1.0)).unwrap();
        let direct = b.encode(2.0, 1.0);
        for (x, y) in bound.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(matches!(
            bind(&[1.0; 8], &[1.0; 16]),
            Err(Error::DimMismatch { left: 8, right: 16 })
        ));
    }

    #[test]
    fn alpha_scales_the_exponent() {
        let b = base(128, 0.5, 6);
        assert_eq!(b.encode(1.0, 2.0), b.encode(2.0, 1.0));
    }

    #[test]
    fn kernel_is_normalized_symmetric_and_shift_invariant() {
        let b = base(512, 0.5, 8);
        let deltas: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
        let curve = kernel_profile(&b, 1.0, &deltas);
        let at = |d: f64| {
            curve
                .deltas
                .iter()
                .position(|&x| x == d)
                .map(|i| curve.values[i])
                .unwrap()
        };
        assert!((at(0.0) - 1.0).abs() < 1e-12);
        for i in 1..=20 {
            let d = i as f64 * 0.25;
            assert!((at(d) - at(-d)).abs() < 1e-12);
        }
        // shift invariance of the raw inner product
        let dim = 512.0;
        for (a, d) in [(0.5, 1.25), (-2.0, 3.0), (1.75, -0.5)] {
            let lhs = dot(&b.encode(a, 1.0), &b.encode(a + d, 1.0)) / dim;
            let rhs = dot(&b.encode(0.0, 1.0), &b.encode(d, 1.0)) / dim;
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_fit_recovers_exact_gaussians() {
        let deltas: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.1).collect();
        let sigma = 1.7;
        let values: Vec<f64> = deltas
            .iter()
            .map(|d| (-d * d / (2.0 * sigma * sigma)).exp())
            .collect();
        let fit = fit_gaussian(&KernelCurve { deltas, values }).unwrap();
        assert!((fit.sigma - sigma).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kernel_fit_is_gaussian_at_the_reference_settings() {
        let deltas: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.1).collect();
        let mut r2s = Vec::new();
        for seed in 0..10 {
            let b = base(1024, 0.5, seed);
            let fit = fit_gaussian(&kernel_profile(&b, 1.0, &deltas)).unwrap();
            r2s.push(fit.r_squared);
        }
        let mean = r2s.iter().sum::<f64>() / r2s.len() as f64;
        assert!(mean >= 0.95, "mean r2 = {mean}");
    }

    #[test]
    fn kernel_width_shrinks_as_phase_std_grows() {
        let deltas: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.1).collect();
        let mut widths = Vec::new();
        for &std in &[0.2, 0.5, 1.0] {
            let mut sigmas = Vec::new();
            for seed in 0..10 {
                let b = base(1024, std, seed);
                sigmas.push(
                    fit_gaussian(&kernel_profile(&b, 1.0, &deltas))
                        .unwrap()
                        .sigma,
                );
            }
            widths.push(sigmas.iter().sum::<f64>() / sigmas.len() as f64);
        }
        assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
    }

    #[test]
    fn noise_curve_fits_poorly() {
        let mut rng = stream_rng(0, &[0xbad]);
        let deltas: Vec<f64> = (-30..=30).map(|i| i as f64 * 0.2).collect();
        let values: Vec<f64> = deltas
            .iter()
            .map(|&d| {
                if d == 0.0 {
                    1.0
                } else {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    z * 0.3
                }
            })
            .collect();
        let fit = fit_gaussian(&KernelCurve { deltas, values }).unwrap();
        assert!(fit.r_squared < 0.5, "r2 = {}", fit.r_squared);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let curve = KernelCurve {
            deltas: vec![-1.0, 0.0, 1.0],
            values: vec![1.0, 1.0, 1.0],
        };
        assert!(matches!(fit_gaussian(&curve), Err(Error::DegenerateCurve)));
        let curve = KernelCurve {
            deltas: vec![1.0, 2.0],
            values: vec![0.5, 0.2],
        };
        assert!(matches!(fit_gaussian(&curve), Err(Error::MissingZeroDelta)));
    }

    fn small_book() -> AttributeCodebook {
        AttributeCodebook::new(AttributeCodebookConfig {
            name: "size".into(),
            cardinality: 8,
            dim: 512,
            phase_std: 0.5,
            alpha: 1.0,
            seed: 21,
        })
        .unwrap()
    }

    #[test]
    fn readout_recovers_codebook_rows() {
        let book = small_book();
        let out = cosine_readout(book.row(3), &book).unwrap();
        assert_eq!(out.index, 3);
        assert!((out.similarities[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn readout_of_half_integer_query_peaks_between_neighbors() {
        let book = small_book();
        let query = book.base.encode(3.5, 1.0);
        let out = cosine_readout(&query, &book).unwrap();
        assert!(out.index == 3 || out.index == 4, "index {}", out.index);
        // kernel shape: similarity decays with distance from 3.5
        assert!(out.similarities[3] > out.similarities[2]);
        assert!(out.similarities[4] > out.similarities[5]);
        // and matches the kernel evaluated at the offsets
        let curve = kernel_profile(&book.base, 1.0, &[0.5, 1.5]);
        assert!((out.similarities[3] - curve.values[0]).abs() < 1e-9);
        assert!((out.similarities[2] - curve.values[1]).abs() < 1e-9);
    }

    #[test]
    fn readout_rejects_zero_queries_and_handles_orthogonal_input() {
        let book = small_book();
        let zeros = vec![0.0; 512];
        assert!(matches!(
            cosine_readout(&zeros, &book),
            Err(Error::ZeroNormQuery)
        ));
        // Gram-Schmidt: remove the row span from a random vector, leaving
        // similarities at numerical zero; the argmax stays well-defined.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for row in book.rows() {
            let mut v = row.clone();
            for b in &basis {
                let proj = dot(&v, b);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
            let n = dot(&v, &v).sqrt();
            for x in &mut v {
                *x /= n;
            }
            basis.push(v);
        }
        let mut rng = stream_rng(3, &[0x71]);
        let mut q: Vec<f64> = (0..512)
            .map(|_| rng.sample(rand_distr::StandardNormal))
            .collect();
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(&q, b);
                for (x, y) in q.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
        }
        let out = cosine_readout(&q, &book).unwrap();
        assert!(out.similarities.iter().all(|s| s.abs() < 1e-10));
        assert!(out.index < 8);
        assert_eq!(out.index, cosine_readout(&q, &book).unwrap().index);
    }

    #[test]
    fn exact_ties_resolve_to_the_lowest_index() {
        assert_eq!(argmax_lowest(&[0.25, 0.5, 0.5, 0.1]), 1);
        assert_eq!(argmax_lowest(&[-1.0, -1.0]), 0);
        assert_eq!(argmax_lowest(&[0.0]), 0);
    }

    #[test]
    fn codebook_round_trips_through_config_json() {
        let book = FpeCodebook::for_space(
            &crate::factor::FactorSpace::new(vec![
                crate::factor::FactorSpec {
                    name: "shape".into(),
                    cardinality: 4,
                    task_relevant: true,
                    ordered: false,
                },
                crate::factor::FactorSpec {
                    name: "size".into(),
                    cardinality: 6,
                    task_relevant: true,
                    ordered: true,
                },
            ])
            .unwrap(),
            256,
            0.5,
            1.0,
            9,
        )
        .unwrap();
        let text = book.to_json();
        let back = FpeCodebook::from_json(&text).unwrap();
        assert_eq!(book, back);
        assert!(book.attribute("nope").is_err());
        assert_eq!(book.attribute("size").unwrap().rows().len(), 6);
    }
}
