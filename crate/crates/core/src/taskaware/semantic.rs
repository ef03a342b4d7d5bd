//! MAP labeling of quantization bins for a labeled mixture source.

use crate::distributions::Distribution;
use crate::error::{invalid, Error, Result};
use crate::quantizer::{lloyd_max_design, LloydConfig, Partition};
use crate::real::{lit, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledClass<T> {
    pub label: usize,
    pub prior: T,
    pub law: Distribution<T>,
}

/// Class-conditional laws with priors summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSource<T> {
    classes: Vec<LabeledClass<T>>,
}

impl<T: Real> LabeledSource<T> {
    /// Classes are labeled by their position.
    pub fn new(classes: Vec<(T, Distribution<T>)>) -> Result<Self> {
        Self::from_classes(
            classes.into_iter().enumerate().map(|(label, (prior, law))| LabeledClass { label, prior, law }).collect(),
        )
    }

    fn from_classes(classes: Vec<LabeledClass<T>>) -> Result<Self> {
        if classes.is_empty() {
            return invalid("labeled source has no classes");
        }
        if classes.iter().any(|c| !(c.prior > T::zero())) {
            return invalid("class priors must be positive");
        }
        let total: T = classes.iter().map(|c| c.prior).sum();
        if (total - T::one()).abs() > lit(1e-9_f64.max(T::epsilon().to_f64().unwrap_or(0.0) * 16.0)) {
            return invalid(format!("class priors sum to {total}, not 1"));
        }
        Ok(Self { classes })
    }

    /// Equal-prior Gaussian classes.
    pub fn gaussian_classes(means: &[T], std: T) -> Result<Self> {
        let prior = T::one() / lit(means.len().max(1) as f64);
        Self::new(means.iter().map(|&m| Distribution::gaussian(m, std).map(|d| (prior, d))).collect::<Result<_>>()?)
    }

    pub fn classes(&self) -> &[LabeledClass<T>] {
        &self.classes
    }

    /// The sub-source on the given labels with renormalized priors.
    pub fn restrict(&self, labels: &[usize]) -> Result<Self> {
        let kept: Vec<_> = self.classes.iter().filter(|c| labels.contains(&c.label)).cloned().collect();
        let total: T = kept.iter().map(|c| c.prior).sum();
        Self::from_classes(kept.into_iter().map(|c| LabeledClass { prior: c.prior / total, ..c }).collect())
    }

    /// Unlabeled marginal law; requires Gaussian classes.
    pub fn marginal(&self) -> Result<Distribution<T>> {
        if let [only] = self.classes.as_slice() {
            return Ok(only.law.clone());
        }
        let triples = self
            .classes
            .iter()
            .map(|c| match &c.law {
                Distribution::Gaussian(g) => Ok((c.prior, g.mean(), g.std())),
                _ => invalid("marginal of a labeled source needs Gaussian classes"),
            })
            .collect::<Result<Vec<_>>>()?;
        Distribution::mixture(&triples)
    }

    fn joint(&self, partition: &Partition<T>, bin: usize) -> Vec<T> {
        let iv = partition.interval(bin);
        self.classes.iter().map(|c| c.prior * c.law.mass(&iv)).collect()
    }
}

fn argmax<T: Real>(scores: &[T]) -> usize {
    scores.iter().enumerate().fold(0, |best, (i, &s)| if s > scores[best] { i } else { best })
}

/// `argmax_y prior_y * P(bin | y)` for every bin; ties go to the lowest class index.
pub fn map_labels<T: Real>(partition: &Partition<T>, source: &LabeledSource<T>) -> Result<Vec<usize>> {
    (0..partition.bin_count())
        .map(|bin| {
            let joint = source.joint(partition, bin);
            if !(joint.iter().copied().sum::<T>() > T::zero()) {
                return Err(Error::ZeroMassBin { bin });
            }
            Ok(source.classes[argmax(&joint)].label)
        })
        .collect()
}

/// Labels for every bin; bins without mass get the first class.
fn lenient_labels<T: Real>(partition: &Partition<T>, source: &LabeledSource<T>) -> Vec<usize> {
    (0..partition.bin_count()).map(|bin| source.classes[argmax(&source.joint(partition, bin))].label).collect()
}

/// Probability that the bin label equals the true class under `source`.
pub fn accuracy<T: Real>(partition: &Partition<T>, labels: &[usize], source: &LabeledSource<T>) -> Result<T> {
    if labels.len() != partition.bin_count() {
        return Err(Error::LengthMismatch { expected: partition.bin_count(), actual: labels.len() });
    }
    Ok(labels
        .iter()
        .enumerate()
        .map(|(bin, &label)| {
            let iv = partition.interval(bin);
            source.classes.iter().filter(|c| c.label == label).map(|c| c.prior * c.law.mass(&iv)).sum::<T>()
        })
        .sum::<T>()
        .min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationReport<T> {
    /// Labels from the design source, scored under the true source.
    pub acc_fix: T,
    /// Labels re-estimated under the true source on the same partition.
    pub acc_gen: T,
    /// Labels on a partition redesigned for the true marginal.
    pub acc_ideal: T,
    /// Share of the ideal improvement recovered; `None` when there is none to recover.
    pub recovery_pct: Option<T>,
}

pub fn classification_report<T: Real>(
    partition: &Partition<T>,
    truth: &LabeledSource<T>,
    design: &LabeledSource<T>,
    cfg: &LloydConfig<T>,
) -> Result<ClassificationReport<T>> {
    let acc_fix = accuracy(partition, &lenient_labels(partition, design), truth)?;
    let acc_gen = accuracy(partition, &lenient_labels(partition, truth), truth)?;
    let ideal = lloyd_max_design(&truth.marginal()?, partition.bits(), cfg)?;
    let acc_ideal = accuracy(ideal.partition(), &lenient_labels(ideal.partition(), truth), truth)?;
    let gap = acc_ideal - acc_fix;
    let recovery_pct = (gap > lit(1e-9)).then(|| (acc_gen - acc_fix) / gap * lit(100.0));
    Ok(ClassificationReport { acc_fix, acc_gen, acc_ideal, recovery_pct })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_classes(p0: f64) -> LabeledSource<f64> {
        LabeledSource::new(vec![
            (p0, Distribution::gaussian(-1.0, 0.5).unwrap()),
            (1.0 - p0, Distribution::gaussian(1.0, 0.5).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn symmetric_classes_split_at_zero() {
        let p = Partition::new(vec![0.0]).unwrap();
        assert_eq!(map_labels(&p, &two_classes(0.5)).unwrap(), vec![0, 1]);
    }

    #[test]
    fn dominant_prior_takes_both_bins() {
        let p = Partition::new(vec![0.0]).unwrap();
        assert_eq!(map_labels(&p, &two_classes(0.99)).unwrap(), vec![0, 0]);
    }

    #[test]
    fn ties_go_to_the_lowest_label() {
        let same = Distribution::standard_normal();
        let src = LabeledSource::new(vec![(0.5, same.clone()), (0.5, same)]).unwrap();
        let p = Partition::new(vec![-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(map_labels(&p, &src).unwrap(), vec![0; 4]);
    }

    #[test]
    fn restriction_relabels_orphaned_bins() {
        let src = LabeledSource::gaussian_classes(&[-2.0, 0.0, 2.0], 0.5).unwrap();
        let p = Partition::new(vec![-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(map_labels(&p, &src).unwrap(), vec![0, 1, 1, 2]);
        let sub = src.restrict(&[0, 2]).unwrap();
        assert_eq!(map_labels(&p, &sub).unwrap(), vec![0, 0, 2, 2]);
    }

    #[test]
    fn single_class_is_always_right() {
        let src = LabeledSource::gaussian_classes(&[-2.0_f64, 0.0, 2.0], 0.5).unwrap();
        let design = lloyd_max_design(&src.marginal().unwrap(), 2, &LloydConfig::default()).unwrap();
        let r = classification_report(design.partition(), &src.restrict(&[1]).unwrap(), &src, &LloydConfig::default()).unwrap();
        assert!((r.acc_gen - 1.0).abs() < 1e-12);
        assert!(r.acc_gen >= r.acc_fix);
    }

    #[test]
    fn matched_sources_have_nothing_to_recover() {
        let src = LabeledSource::gaussian_classes(&[-2.0, 0.0, 2.0], 0.7).unwrap();
        let cfg = LloydConfig::default();
        let design = lloyd_max_design(&src.marginal().unwrap(), 2, &cfg).unwrap();
        let r = classification_report(design.partition(), &src, &src, &cfg).unwrap();
        assert_eq!(r.acc_fix, r.acc_gen);
        assert!(r.recovery_pct.is_none());
    }

    #[test]
    fn priors_must_sum_to_one() {
        let d = Distribution::<f64>::standard_normal();
        assert!(LabeledSource::new(vec![(0.5, d.clone()), (0.6, d)]).is_err());
    }
}
