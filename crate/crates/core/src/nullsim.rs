//! Monte-Carlo null distribution of the soft agreement rate.
//!
//! Each draw samples `subjects` independent description vectors whose bits
//! are i.i.d. Bernoulli(`p_one`) and records their Jaccard SAR. Draws are
//! binned into equal-width bins over `[0, 1]`; bins are half-open except the
//! last, which also holds exact 1.0.
//!
//! Iterations are split into fixed chunks of [`CHUNK_ITERATIONS`]. Chunk `c`
//! draws from ChaCha8 stream `c` of the run seed, so the output depends only
//! on the parameters, never on how many threads ran the chunks.

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{packed_sar, words_for, CompensatedSum, SimilarityKind};

pub const DEFAULT_BINS: usize = 100;
pub const CHUNK_ITERATIONS: u64 = 4096;

/// Offset applied before flooring so values sitting on a bin edge land in
/// the bin that edge opens, despite rounding in the SAR division.
const EDGE_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid null model parameters: {0}")]
    InvalidParams(String),
    #[error("threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("resource exhausted: {0}")]
    ResourceExhausted(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullModelParams {
    pub subjects: usize,
    pub dims: usize,
    pub p_one: f64,
    pub iterations: u64,
    pub bins: usize,
    pub seed: u64,
}

impl NullModelParams {
    pub fn new(subjects: usize, dims: usize, p_one: f64, iterations: u64, seed: u64) -> Self {
        Self {
            subjects,
            dims,
            p_one,
            iterations,
            bins: DEFAULT_BINS,
            seed,
        }
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = bins;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |m: String| Err(SimError::InvalidParams(m));
        if self.subjects < 2 {
            return fail(format!("subjects must be >= 2, got {}", self.subjects));
        }
        if self.dims < 1 {
            return fail("dims must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.p_one) {
            return fail(format!("p_one must lie in [0, 1], got {}", self.p_one));
        }
        if self.iterations < 1 {
            return fail("iterations must be >= 1".into());
        }
        if self.bins < 1 {
            return fail("bins must be >= 1".into());
        }
        Ok(())
    }
}

/// Reusable buffers for drawing one SAR sample.
struct NullSampler {
    subjects: usize,
    dims: usize,
    stride: usize,
    bit: Bernoulli,
    words: Vec<u64>,
    ones: Vec<u32>,
}

impl NullSampler {
    fn new(params: &NullModelParams) -> Result<Self, SimError> {
        params.validate()?;
        let stride = words_for(params.dims);
        let bit = Bernoulli::new(params.p_one).map_err(|e| SimError::InvalidParams(e.to_string()))?;
        Ok(Self {
            subjects: params.subjects,
            dims: params.dims,
            stride,
            bit,
            words: vec![0; stride * params.subjects],
            ones: vec![0; params.subjects],
        })
    }

    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        for k in 0..self.subjects {
            let row = &mut self.words[k * self.stride..(k + 1) * self.stride];
            row.fill(0);
            for i in 0..self.dims {
                if self.bit.sample(rng) {
                    row[i / 64] |= 1 << (i % 64);
                }
            }
            self.ones[k] = row.iter().map(|w| w.count_ones()).sum();
        }
        packed_sar(&self.words, self.stride, &self.ones, SimilarityKind::Jaccard)
    }
}

/// Draws one set of random description vectors and returns their SAR.
pub fn sample_null_sar<R: Rng + ?Sized>(params: &NullModelParams, rng: &mut R) -> Result<f64, SimError> {
    Ok(NullSampler::new(params)?.draw(rng))
}

/// Bin holding `value` among `bins` equal bins over `[0, 1]`.
pub fn bin_index(value: f64, bins: usize) -> usize {
    let raw = (value * bins as f64 + EDGE_EPSILON).floor();
    if raw <= 0.0 {
        0
    } else {
        (raw as usize).min(bins - 1)
    }
}

/// Knobs that affect how a simulation runs but never its result.
#[derive(Default)]
pub struct SimOptions<'a> {
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// Called after each completed chunk with (iterations done, total).
    pub progress: Option<&'a (dyn Fn(u64, u64) + Sync)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub params: NullModelParams,
    pub bin_counts: Vec<u64>,
    /// Mean of the raw (unbinned) samples.
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfCheckpoint {
    pub threshold: f64,
    /// Upper edge of the bin containing `threshold`; the whole bin counts.
    pub snapped_to: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeBin {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub params: NullModelParams,
    pub mean: f64,
    pub mode_bin: ModeBin,
    pub cdf_convention: String,
    pub cdf: Vec<CdfCheckpoint>,
}

impl NullDistribution {
    pub fn total(&self) -> u64 {
        self.bin_counts.iter().sum()
    }

    pub fn bins(&self) -> usize {
        self.bin_counts.len()
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let b = self.bins() as f64;
        (i as f64 / b, (i + 1) as f64 / b)
    }

    /// Probability mass per bin; sums to 1.
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.bin_counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Probability density per bin (mass divided by bin width).
    pub fn density(&self) -> Vec<f64> {
        let b = self.bins() as f64;
        self.normalized().into_iter().map(|m| m * b).collect()
    }

    /// `P(SAR <= threshold)` from the histogram. The bin containing
    /// `threshold` is counted in full, so the threshold effectively snaps up
    /// to that bin's upper edge.
    pub fn cdf(&self, threshold: f64) -> Result<f64, SimError> {
        self.cdf_checkpoint(threshold).map(|c| c.probability)
    }

    pub fn cdf_checkpoint(&self, threshold: f64) -> Result<CdfCheckpoint, SimError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(SimError::ThresholdOutOfRange(threshold));
        }
        let k = bin_index(threshold, self.bins());
        let below: u64 = self.bin_counts[..=k].iter().sum();
        Ok(CdfCheckpoint {
            threshold,
            snapped_to: self.bin_edges(k).1,
            probability: below as f64 / self.total() as f64,
        })
    }

    /// Most populated bin; the lowest one wins ties.
    pub fn mode_bin(&self) -> ModeBin {
        let mut index = 0;
        for (i, &c) in self.bin_counts.iter().enumerate() {
            if c > self.bin_counts[index] {
                index = i;
            }
        }
        let (lo, hi) = self.bin_edges(index);
        ModeBin {
            index,
            lo,
            hi,
            count: self.bin_counts[index],
        }
    }

    /// Writes `bin_lo,bin_hi,count,density` rows.
    pub fn write_histogram_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "count", "density"])?;
        for (i, (&count, density)) in self.bin_counts.iter().zip(self.density()).enumerate() {
            let (lo, hi) = self.bin_edges(i);
            w.write_record([lo.to_string(), hi.to_string(), count.to_string(), density.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self, checkpoints: &[f64]) -> Result<SimulationSummary, SimError> {
        Ok(SimulationSummary {
            params: self.params.clone(),
            mean: self.mean,
            mode_bin: self.mode_bin(),
            cdf_convention: "fraction of samples in every bin whose lower edge is <= threshold".into(),
            cdf: checkpoints
                .iter()
                .map(|&t| self.cdf_checkpoint(t))
                .collect::<Result<_, _>>()?,
        })
    }
}

/// Raw samples retained by [`simulate_exact`], sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    sorted: Vec<f64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sorted
    }

    /// Exact empirical `P(SAR <= threshold)`.
    pub fn cdf(&self, threshold: f64) -> Result<f64, SimError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(SimError::ThresholdOutOfRange(threshold));
        }
        let below = self.sorted.partition_point(|&x| x <= threshold);
        Ok(below as f64 / self.sorted.len() as f64)
    }
}

pub fn simulate(params: &NullModelParams) -> Result<NullDistribution, SimError> {
    simulate_with(params, &SimOptions::default())
}

pub fn simulate_with(params: &NullModelParams, opts: &SimOptions<'_>) -> Result<NullDistribution, SimError> {
    run(params, opts, false).map(|(dist, _)| dist)
}

/// Like [`simulate_with`], also keeping every raw sample. Meant for small
/// iteration counts.
pub fn simulate_exact(
    params: &NullModelParams,
    opts: &SimOptions<'_>,
) -> Result<(NullDistribution, SampleSet), SimError> {
    let (dist, samples) = run(params, opts, true)?;
    let mut sorted = samples.unwrap_or_default();
    sorted.sort_by(f64::total_cmp);
    Ok((dist, SampleSet { sorted }))
}

struct ChunkResult {
    index: u64,
    sum: f64,
    samples: Vec<f64>,
}

struct Partial {
    counts: Vec<u64>,
    chunks: Vec<ChunkResult>,
}

fn alloc_zeroed<T: Clone + Default>(len: usize, what: &str) -> Result<Vec<T>, SimError> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|e| SimError::ResourceExhausted(format!("{what} ({len} entries): {e}")))?;
    v.resize(len, T::default());
    Ok(v)
}

fn run(
    params: &NullModelParams,
    opts: &SimOptions<'_>,
    keep_samples: bool,
) -> Result<(NullDistribution, Option<Vec<f64>>), SimError> {
    params.validate()?;
    // Probe the largest allocations up front so failure surfaces as an error.
    drop(alloc_zeroed::<u64>(params.bins, "histogram")?);
    if keep_samples {
        let n = usize::try_from(params.iterations)
            .map_err(|_| SimError::ResourceExhausted("sample buffer exceeds address space".into()))?;
        drop(alloc_zeroed::<f64>(n, "sample buffer")?);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| SimError::ResourceExhausted(format!("thread pool: {e}")))?;

    let chunks = params.iterations.div_ceil(CHUNK_ITERATIONS);
    let done = AtomicU64::new(0);
    let bins = params.bins;

    let partial = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .try_fold(
                || Partial {
                    counts: vec![0; bins],
                    chunks: Vec::new(),
                },
                |mut acc, chunk| {
                    let start = chunk * CHUNK_ITERATIONS;
                    let len = CHUNK_ITERATIONS.min(params.iterations - start);
                    let mut sampler = NullSampler::new(params)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                    rng.set_stream(chunk);
                    let mut sum = CompensatedSum::default();
                    let mut samples = Vec::new();
                    if keep_samples {
                        samples.reserve_exact(len as usize);
                    }
                    for _ in 0..len {
                        let sar = sampler.draw(&mut rng);
                        acc.counts[bin_index(sar, bins)] += 1;
                        sum.add(sar);
                        if keep_samples {
                            samples.push(sar);
                        }
                    }
                    acc.chunks.push(ChunkResult {
                        index: chunk,
                        sum: sum.total(),
                        samples,
                    });
                    if let Some(progress) = opts.progress {
                        let finished = done.fetch_add(len, Ordering::Relaxed) + len;
                        progress(finished, params.iterations);
                    }
                    Ok::<_, SimError>(acc)
                },
            )
            .try_reduce_with(|mut a, b| {
                for (x, y) in a.counts.iter_mut().zip(&b.counts) {
                    *x += y;
                }
                a.chunks.extend(b.chunks);
                Ok(a)
            })
    });

    let mut partial = partial.expect("at least one chunk")?;
    partial.chunks.sort_by_key(|c| c.index);
    let mut mean = CompensatedSum::default();
    let mut samples = keep_samples.then(Vec::new);
    for c in partial.chunks {
        mean.add(c.sum);
        if let Some(s) = samples.as_mut() {
            s.extend(c.samples);
        }
    }

    Ok((
        NullDistribution {
            params: params.clone(),
            bin_counts: partial.counts,
            mean: mean.total() / params.iterations as f64,
        },
        samples,
    ))
}
