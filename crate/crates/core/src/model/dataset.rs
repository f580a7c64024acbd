//! Time-labeled training data: feature vectors with class labels and
//! optional integer time stamps, grouped on demand into per-class
//! per-time subsamples.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// One observation: features, class label, and an optional time index.
/// `time == None` means the stamp is missing and must be recovered.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: DVector<f64>,
    pub class: usize,
    pub time: Option<usize>,
}

impl Sample {
    pub fn new(features: DVector<f64>, class: usize, time: Option<usize>) -> Self {
        Self {
            features,
            class,
            time,
        }
    }
}

/// A dataset over classes `0..c` and times `0..=T`.
#[derive(Debug, Clone)]
pub struct TimeLabeledDataset {
    samples: Vec<Sample>,
    dim: usize,
    num_classes: usize,
    horizon: usize,
}

impl TimeLabeledDataset {
    /// Builds a dataset, validating every sample against the declared
    /// dimension, class count, and horizon.
    pub fn new(
        samples: Vec<Sample>,
        dim: usize,
        num_classes: usize,
        horizon: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if num_classes == 0 {
            return Err(Error::InvalidArgument(
                "number of classes must be positive".into(),
            ));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != dim {
                return Err(Error::Dimension(format!(
                    "sample {i} has {} features, expected {dim}",
                    s.features.len()
                )));
            }
            if s.class >= num_classes {
                return Err(Error::InvalidArgument(format!(
                    "sample {i} has class {} outside 0..{num_classes}",
                    s.class
                )));
            }
            if let Some(t) = s.time {
                if t > horizon {
                    return Err(Error::InvalidArgument(format!(
                        "sample {i} has time {t} beyond horizon {horizon}"
                    )));
                }
            }
        }
        Ok(Self {
            samples,
            dim,
            num_classes,
            horizon,
        })
    }

    /// Builds a dataset inferring `c` and `T` from the samples (dimension
    /// from the first sample).
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty sample list".into()))?;
        let dim = first.features.len();
        let num_classes = samples.iter().map(|s| s.class).max().unwrap_or(0) + 1;
        let horizon = samples.iter().filter_map(|s| s.time).max().unwrap_or(0);
        Self::new(samples, dim, num_classes, horizon)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Per-class per-time sample counts, shape `(c, T+1)`. Samples with a
    /// missing time stamp are not counted here.
    pub fn counts(&self) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0usize; self.horizon + 1]; self.num_classes];
        for s in &self.samples {
            if let Some(t) = s.time {
                counts[s.class][t] += 1;
            }
        }
        counts
    }

    /// Time-stamped observations of class `j` grouped by time: element `k`
    /// holds the feature vectors observed at time `k`.
    pub fn class_observations(&self, class: usize) -> Vec<Vec<DVector<f64>>> {
        let mut grouped = vec![Vec::new(); self.horizon + 1];
        for s in &self.samples {
            if s.class == class {
                if let Some(t) = s.time {
                    grouped[t].push(s.features.clone());
                }
            }
        }
        grouped
    }

    /// All feature vectors of class `j`, ignoring time stamps (the input
    /// to time-label recovery).
    pub fn class_features(&self, class: usize) -> Vec<DVector<f64>> {
        self.samples
            .iter()
            .filter(|s| s.class == class)
            .map(|s| s.features.clone())
            .collect()
    }

    /// True iff every sample carries a time stamp.
    pub fn fully_time_labeled(&self) -> bool {
        self.samples.iter().all(|s| s.time.is_some())
    }

    /// Copy with every time stamp removed (keeps dimensions and horizon).
    pub fn without_time_labels(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample::new(s.features.clone(), s.class, None))
            .collect();
        Self {
            samples,
            dim: self.dim,
            num_classes: self.num_classes,
            horizon: self.horizon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn counts_sum_to_total() {
        let samples = vec![
            Sample::new(v(&[0.0, 1.0]), 0, Some(0)),
            Sample::new(v(&[1.0, 1.0]), 0, Some(2)),
            Sample::new(v(&[2.0, 1.0]), 1, Some(2)),
        ];
        let ds = TimeLabeledDataset::new(samples, 2, 2, 2).unwrap();
        let counts = ds.counts();
        let total: usize = counts.iter().flatten().sum();
        assert_eq!(total, ds.len());
        assert_eq!(counts[0][2], 1);
        assert_eq!(counts[1][2], 1);
    }

    #[test]
    fn rejects_bad_dimension_and_labels() {
        let bad_dim = vec![Sample::new(v(&[1.0]), 0, Some(0))];
        assert!(TimeLabeledDataset::new(bad_dim, 2, 1, 0).is_err());

        let bad_class = vec![Sample::new(v(&[1.0, 2.0]), 3, Some(0))];
        assert!(TimeLabeledDataset::new(bad_class, 2, 2, 0).is_err());

        let bad_time = vec![Sample::new(v(&[1.0, 2.0]), 0, Some(5))];
        assert!(TimeLabeledDataset::new(bad_time, 2, 2, 3).is_err());
    }

    #[test]
    fn missing_times_are_legal_and_uncounted() {
        let samples = vec![
            Sample::new(v(&[0.0]), 0, None),
            Sample::new(v(&[1.0]), 0, Some(1)),
        ];
        let ds = TimeLabeledDataset::new(samples, 1, 1, 1).unwrap();
        assert!(!ds.fully_time_labeled());
        let counts = ds.counts();
        assert_eq!(counts[0], vec![0, 1]);
        assert_eq!(ds.class_features(0).len(), 2);
        assert_eq!(ds.class_observations(0)[1].len(), 1);
    }
}
