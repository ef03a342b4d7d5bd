//! Fixed scalar encoders designed by Lloyd-Max.
//!
//! Bins are indexed from 0. Bin `i` is `[tau_{i-1}, tau_i)` with the outer
//! bins extending to infinity, so a boundary point belongs to the bin on its
//! right.

use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, DistributionConfig, Interval};
use crate::error::{invalid, Error, Result};
use crate::mismatch::expected_distortion;
use crate::real::{count, lit, Real};

/// Largest supported bit depth.
pub const MAX_BITS: u32 = 16;

/// Interior boundaries of an `N = 2^bits` cell partition of the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    boundaries: Vec<T>,
}

impl<T: Real> Partition<T> {
    pub fn new(boundaries: Vec<T>) -> Result<Self> {
        let n = boundaries.len() + 1;
        if !n.is_power_of_two() || !(2..=1 << MAX_BITS).contains(&n) {
            return invalid(format!("{} boundaries do not define 2^b bins with 1 <= b <= {MAX_BITS}", n - 1));
        }
        if boundaries.iter().any(|t| !t.is_finite()) {
            return invalid("partition boundaries must be finite");
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("partition boundaries must be strictly increasing");
        }
        Ok(Self { boundaries })
    }

    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    pub fn bin_count(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn bits(&self) -> u32 {
        self.bin_count().trailing_zeros()
    }

    pub fn interval(&self, bin: usize) -> Interval<T> {
        let lo = if bin == 0 { T::neg_infinity() } else { self.boundaries[bin - 1] };
        let hi = self.boundaries.get(bin).copied().unwrap_or(T::infinity());
        Interval::new(lo, hi).expect("partition boundaries are strictly increasing")
    }

    pub fn intervals(&self) -> impl ExactSizeIterator<Item = Interval<T>> + '_ {
        (0..self.bin_count()).map(|i| self.interval(i))
    }

    /// Index of the bin containing `x`.
    pub fn encode(&self, x: T) -> usize {
        self.boundaries.partition_point(|&t| t <= x)
    }
}

/// One reconstruction value per bin (or per received index).
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T> {
    values: Vec<T>,
}

impl<T: Real> Codebook<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return invalid("codebook is empty");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("codebook values must be finite");
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> T {
        self.values[index]
    }

    pub fn is_sorted(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected, actual: self.len() })
        }
    }
}

/// Conditional means of `law` on every bin of `partition`.
pub fn centroid_codebook<T: Real>(partition: &Partition<T>, law: &Distribution<T>) -> Result<Codebook<T>> {
    let values = partition
        .intervals()
        .enumerate()
        .map(|(bin, iv)| law.bin_stats(&iv).map(|s| s.mean).map_err(|_| Error::ZeroMassBin { bin }))
        .collect::<Result<Vec<_>>>()?;
    Codebook::new(values)
}

/// A designed encoder together with the design-law reconstruction table.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer<T> {
    partition: Partition<T>,
    design_codebook: Codebook<T>,
    design_law: Distribution<T>,
}

impl<T: Real> Quantizer<T> {
    pub fn new(partition: Partition<T>, design_codebook: Codebook<T>, design_law: Distribution<T>) -> Result<Self> {
        design_codebook.check_len(partition.bin_count())?;
        Ok(Self { partition, design_codebook, design_law })
    }

    pub fn partition(&self) -> &Partition<T> {
        &self.partition
    }

    pub fn design_codebook(&self) -> &Codebook<T> {
        &self.design_codebook
    }

    pub fn design_law(&self) -> &Distribution<T> {
        &self.design_law
    }

    pub fn bits(&self) -> u32 {
        self.partition.bits()
    }

    pub fn encode(&self, x: T) -> usize {
        self.partition.encode(x)
    }

    pub fn decode(&self, index: usize) -> T {
        self.design_codebook.get(index)
    }

    /// Distortion of the design table under `law`.
    pub fn distortion(&self, law: &Distribution<T>) -> Result<T> {
        expected_distortion(&self.partition, &self.design_codebook, law)
    }

    pub fn to_record(&self) -> QuantizerRecord {
        let f = |v: &[T]| v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        QuantizerRecord {
            bits: self.bits(),
            boundaries: f(self.partition.boundaries()),
            codebook: f(self.design_codebook.values()),
            design_law: self.design_law.clone().into(),
        }
    }

    pub fn from_record(record: &QuantizerRecord) -> Result<Self> {
        let f = |v: &[f64]| v.iter().map(|&x| lit::<T>(x)).collect::<Vec<T>>();
        let partition = Partition::new(f(&record.boundaries))?;
        if partition.bits() != record.bits {
            return invalid(format!("record says {} bits but has {} bins", record.bits, partition.bin_count()));
        }
        Self::new(partition, Codebook::new(f(&record.codebook))?, record.design_law.clone().try_into()?)
    }
}

/// Serialized quantizer used for golden files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerRecord {
    pub bits: u32,
    pub boundaries: Vec<f64>,
    pub codebook: Vec<f64>,
    pub design_law: DistributionConfig,
}

/// Starting codebook for Lloyd-Max.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LloydInit<T> {
    /// Design-law quantiles at levels `(i + 0.5) / N`.
    #[default]
    Quantiles,
    /// Quantiles of the normalized `pdf^(1/3)` companding law; close to optimal at high rate.
    PointDensity,
    /// An explicit strictly increasing codebook.
    Codebook(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydConfig<T> {
    pub max_iters: usize,
    /// Stop once no codeword moves by more than this.
    pub tol: T,
    pub init: LloydInit<T>,
}

impl<T: Real> Default for LloydConfig<T> {
    fn default() -> Self {
        Self { max_iters: 10_000, tol: lit(T::SOLVER_TOL), init: LloydInit::Quantiles }
    }
}

impl<T: Real> LloydConfig<T> {
    pub fn with_init(mut self, init: LloydInit<T>) -> Self {
        self.init = init;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

/// Lloyd-Max result with its convergence history.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydTrace<T> {
    pub quantizer: Quantizer<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Design-law distortion after every centroid update.
    pub distortions: Vec<T>,
}

/// Lloyd-Max design under `law` at `bits` bits.
pub fn lloyd_max_design<T: Real>(law: &Distribution<T>, bits: u32, cfg: &LloydConfig<T>) -> Result<Quantizer<T>> {
    lloyd_max_trace(law, bits, cfg).map(|t| t.quantizer)
}

/// Lloyd-Max design that also returns the iteration history.
pub fn lloyd_max_trace<T: Real>(law: &Distribution<T>, bits: u32, cfg: &LloydConfig<T>) -> Result<LloydTrace<T>> {
    if !(1..=MAX_BITS).contains(&bits) {
        return invalid(format!("bits = {bits} outside 1..={MAX_BITS}"));
    }
    if !(cfg.tol > T::zero()) || cfg.max_iters == 0 {
        return invalid("Lloyd-Max needs tol > 0 and max_iters >= 1");
    }
    let n = 1usize << bits;
    let mut codebook = initial_codebook(law, n, &cfg.init)?;
    let mut distortions = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut partition = midpoint_partition(&codebook)?;
    while iterations < cfg.max_iters {
        iterations += 1;
        partition = midpoint_partition(&codebook)?;
        let stats = partition
            .intervals()
            .enumerate()
            .map(|(bin, iv)| law.bin_stats(&iv).map_err(|_| Error::DegenerateDesign { bin }))
            .collect::<Result<Vec<_>>>()?;
        let next: Vec<T> = stats.iter().map(|s| s.mean).collect();
        let movement = codebook.iter().zip(&next).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
        // with centroid reconstruction the distortion is the within-bin variance
        distortions.push(stats.iter().map(|s| s.mass * s.variance).sum());
        codebook = next;
        if movement < cfg.tol {
            converged = true;
            break;
        }
    }
    let quantizer = Quantizer::new(partition, Codebook::new(codebook)?, law.clone())?;
    Ok(LloydTrace { quantizer, iterations, converged, distortions })
}

fn midpoint_partition<T: Real>(codebook: &[T]) -> Result<Partition<T>> {
    Partition::new(codebook.windows(2).map(|w| (w[0] + w[1]) / lit(2.0)).collect())
        .map_err(|_| Error::DegenerateDesign { bin: 0 })
}

fn initial_codebook<T: Real>(law: &Distribution<T>, n: usize, init: &LloydInit<T>) -> Result<Vec<T>> {
    let levels = (0..n).map(|i| (count::<T>(i) + lit(0.5)) / count::<T>(n));
    match init {
        LloydInit::Quantiles => levels.map(|p| law.quantile(p)).collect(),
        LloydInit::PointDensity => match law.cube_root_law() {
            Some(c) => levels.map(|p| c.quantile(p)).collect(),
            None => Ok(CubeRootTable::new(law).quantiles(levels)),
        },
        LloydInit::Codebook(values) => {
            let c = Codebook::new(values.clone())?;
            c.check_len(n)?;
            if !c.is_sorted() {
                return invalid("initial codebook must be strictly increasing");
            }
            Ok(c.values)
        }
    }
}

/// Tabulated CDF of the normalized `pdf^(1/3)` law for laws without a closed form.
struct CubeRootTable<T> {
    grid: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Real> CubeRootTable<T> {
    const CELLS: usize = 1 << 15;

    fn new(law: &Distribution<T>) -> Self {
        let marks = law.landmarks();
        let spread = lit::<T>(3.0_f64.sqrt());
        let center = law.mean();
        let lo = marks.iter().map(|&m| center + (m - center) * spread).fold(T::infinity(), T::min);
        let hi = marks.iter().map(|&m| center + (m - center) * spread).fold(T::neg_infinity(), T::max);
        let step = (hi - lo) / count(Self::CELLS);
        let grid: Vec<T> = (0..=Self::CELLS).map(|i| lo + step * count(i)).collect();
        let third = lit::<T>(1.0 / 3.0);
        let dens: Vec<T> = grid.iter().map(|&x| (law.ln_pdf(x) * third).exp()).collect();
        let mut cumulative = Vec::with_capacity(grid.len());
        let mut acc = T::zero();
        cumulative.push(acc);
        for w in dens.windows(2) {
            acc = acc + (w[0] + w[1]) * step / lit(2.0);
            cumulative.push(acc);
        }
        for c in cumulative.iter_mut() {
            *c = *c / acc;
        }
        Self { grid, cumulative }
    }

    fn quantiles(&self, levels: impl Iterator<Item = T>) -> Vec<T> {
        levels
            .map(|p| {
                let j = self.cumulative.partition_point(|&c| c < p).clamp(1, self.grid.len() - 1);
                let (c0, c1) = (self.cumulative[j - 1], self.cumulative[j]);
                let t = if c1 > c0 { (p - c0) / (c1 - c0) } else { lit(0.5) };
                self.grid[j - 1] + t * (self.grid[j] - self.grid[j - 1])
            })
            .collect()
    }
}
