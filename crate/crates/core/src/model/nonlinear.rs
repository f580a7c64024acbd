//! Nonlinear drift model: latent class centroids evolve through a
//! user-supplied transition map with known noise law; observations are the
//! centroid plus zero-mean Gaussian noise with known covariance.
//!
//! The transition, its noise sampler, and the densities are closures so a
//! model is an ordinary value; the parameter vector `theta` is passed to
//! every closure explicitly, which lets the particle-EM optimizer probe
//! alternative parameter values without rebuilding the closures.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::linalg::{check_psd, spd_inverse, symmetrize};
use crate::model::dataset::{Sample, TimeLabeledDataset};
use crate::model::LatentTrajectory;
use crate::rng::{substream, tag, GaussianSampler};

pub type TransitionFn =
    Arc<dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type NoiseSamplerFn = Arc<dyn Fn(&mut dyn RngCore, &DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type TransitionDensityFn =
    Arc<dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> f64 + Send + Sync>;
pub type InitialSamplerFn = Arc<dyn Fn(&mut dyn RngCore, &DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type InitialDensityFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync>;

/// A contiguous slice of `theta` that must stay a PSD matrix (row-major)
/// under optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaPsdBlock {
    pub offset: usize,
    pub side: usize,
}

/// One class of the nonlinear drift model.
#[derive(Clone)]
pub struct NonlinearClassModel {
    pub dim: usize,
    /// Flat parameter vector; empty when nothing is unknown.
    pub theta: DVector<f64>,
    /// Which `theta` slices are PSD matrix blocks.
    pub psd_blocks: Vec<ThetaPsdBlock>,
    /// `f(z_prev, w, theta) -> z_next`.
    pub transition: TransitionFn,
    /// Draws one transition noise vector `w`.
    pub sample_transition_noise: NoiseSamplerFn,
    /// `log p(z_next | z_prev; theta)`.
    pub transition_log_density: TransitionDensityFn,
    /// Whether `transition(z, 0, theta)` equals `E[z_next | z_prev = z]`.
    pub zero_noise_is_mean: bool,
    /// Known observation noise covariance `R`.
    pub observation_cov: DMatrix<f64>,
    /// Draws `z_0`.
    pub sample_initial: InitialSamplerFn,
    /// `log p(z_0; theta)`.
    pub initial_log_density: InitialDensityFn,
}

impl fmt::Debug for NonlinearClassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearClassModel")
            .field("dim", &self.dim)
            .field("theta", &self.theta)
            .field("psd_blocks", &self.psd_blocks)
            .finish_non_exhaustive()
    }
}

impl NonlinearClassModel {
    /// Validates the observation covariance and `psd_blocks` layout.
    pub fn validate(&self) -> Result<()> {
        check_psd(&self.observation_cov, self.dim, "R", 1e-10, 1e-10)?;
        for block in &self.psd_blocks {
            if block.offset + block.side * block.side > self.theta.len() {
                return Err(Error::InvalidArgument(format!(
                    "psd block at offset {} side {} exceeds theta length {}",
                    block.offset,
                    block.side,
                    self.theta.len()
                )));
            }
        }
        Ok(())
    }

    /// Copy with a replaced parameter vector.
    pub fn with_theta(&self, theta: DVector<f64>) -> Self {
        let mut out = self.clone();
        out.theta = theta;
        out
    }

    /// Conditional mean of the one-step predictive given `z_prev`: the
    /// zero-noise transition when the model declares it to be the mean,
    /// otherwise an average of `draws` propagated samples.
    pub fn predictive_characteristic(
        &self,
        z_prev: &DVector<f64>,
        draws: usize,
        rng: &mut dyn RngCore,
    ) -> DVector<f64> {
        if self.zero_noise_is_mean {
            let zero = DVector::zeros(self.dim);
            return (self.transition)(z_prev, &zero, &self.theta);
        }
        let mut acc = DVector::zeros(self.dim);
        for _ in 0..draws {
            let w = (self.sample_transition_noise)(rng, &self.theta);
            acc += (self.transition)(z_prev, &w, &self.theta);
        }
        acc / draws as f64
    }

    /// Wraps a [`super::LinearClassModel`] in the nonlinear interface
    /// (empty `theta`; used to cross-check the particle path against the
    /// Kalman smoother).
    pub fn from_linear(linear: &super::LinearClassModel) -> Self {
        let d = linear.dim();
        let a = linear.a.clone();
        let q = linear.q.clone();
        let mu0 = linear.mu0.clone();
        let k0 = linear.k0.clone();
        let process = GaussianSampler::new(DVector::zeros(d), &q);
        let init = GaussianSampler::new(mu0.clone(), &k0);
        let q_inv = spd_inverse(&q).ok().map(Arc::new);
        let k0_inv = spd_inverse(&k0).ok().map(Arc::new);

        let a_t = a.clone();
        let transition: TransitionFn = Arc::new(move |z, w, _| &a_t * z + w);
        let sample_transition_noise: NoiseSamplerFn =
            Arc::new(move |rng, _| process.sample(rng));
        let a_d = a.clone();
        let transition_log_density: TransitionDensityFn = Arc::new(move |next, prev, _| {
            let mean = &a_d * prev;
            match &q_inv {
                Some(inv) => crate::linalg::gaussian_log_density(next, &mean, inv),
                None => {
                    if (next - mean).amax() < 1e-12 {
                        0.0
                    } else {
                        f64::NEG_INFINITY
                    }
                }
            }
        });
        let sample_initial: InitialSamplerFn = Arc::new(move |rng, _| init.sample(rng));
        let mu0_d = mu0;
        let initial_log_density: InitialDensityFn = Arc::new(move |z, _| match &k0_inv {
            Some(inv) => crate::linalg::gaussian_log_density(z, &mu0_d, inv),
            None => {
                if (z - &mu0_d).amax() < 1e-12 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        });

        Self {
            dim: d,
            theta: DVector::zeros(0),
            psd_blocks: Vec::new(),
            transition,
            sample_transition_noise,
            transition_log_density,
            zero_noise_is_mean: true,
            observation_cov: linear.r.clone(),
            sample_initial,
            initial_log_density,
        }
    }

    /// Scalar drift `z' = theta[0] * z + w`, `w ~ N(0, q)`, with the
    /// initial state `N(mu0, k0)` and observation noise `r`; the drift
    /// coefficient is the single unknown parameter.
    pub fn scalar_drift(theta0: f64, q: f64, r: f64, mu0: f64, k0: f64) -> Self {
        let transition: TransitionFn = Arc::new(move |z, w, th| {
            DVector::from_element(1, th[0] * z[0] + w[0])
        });
        let sample_transition_noise: NoiseSamplerFn = Arc::new(move |rng, _| {
            let sampler = GaussianSampler::new(DVector::zeros(1), &DMatrix::from_element(1, 1, q));
            sampler.sample(rng)
        });
        let transition_log_density: TransitionDensityFn = Arc::new(move |next, prev, th| {
            let diff = next[0] - th[0] * prev[0];
            -0.5 * (crate::linalg::LN_2PI + q.ln() + diff * diff / q)
        });
        let sample_initial: InitialSamplerFn = Arc::new(move |rng, _| {
            let sampler =
                GaussianSampler::new(DVector::from_element(1, mu0), &DMatrix::from_element(1, 1, k0));
            sampler.sample(rng)
        });
        let initial_log_density: InitialDensityFn = Arc::new(move |z, _| {
            let diff = z[0] - mu0;
            -0.5 * (crate::linalg::LN_2PI + k0.ln() + diff * diff / k0)
        });
        Self {
            dim: 1,
            theta: DVector::from_element(1, theta0),
            psd_blocks: Vec::new(),
            transition,
            sample_transition_noise,
            transition_log_density,
            zero_noise_is_mean: true,
            observation_cov: DMatrix::from_element(1, 1, r),
            sample_initial,
            initial_log_density,
        }
    }

    /// Planar swirl drift: the state rotates about the origin by an angle
    /// that shrinks with squared radius, `angle / (1 + curvature*|z|^2)`,
    /// plus `N(0, q I)` noise. Curved class trajectories like this defeat
    /// pooled linear rules while remaining cheap to simulate.
    pub fn swirl(angle: f64, curvature: f64, q: f64, r: f64, mu0: DVector<f64>, k0: f64) -> Self {
        let swirl_map = move |z: &DVector<f64>| -> DVector<f64> {
            let reach = angle / (1.0 + curvature * z.norm_squared());
            let (s, c) = reach.sin_cos();
            DVector::from_vec(vec![c * z[0] - s * z[1], s * z[0] + c * z[1]])
        };
        let transition: TransitionFn = Arc::new(move |z, w, _| swirl_map(z) + w);
        let sample_transition_noise: NoiseSamplerFn = Arc::new(move |rng, _| {
            let sampler =
                GaussianSampler::new(DVector::zeros(2), &(DMatrix::identity(2, 2) * q));
            sampler.sample(rng)
        });
        let transition_log_density: TransitionDensityFn = Arc::new(move |next, prev, _| {
            let mean = swirl_map(prev);
            let dx = next[0] - mean[0];
            let dy = next[1] - mean[1];
            -(crate::linalg::LN_2PI + q.ln()) - 0.5 * (dx * dx + dy * dy) / q
        });
        let mu0_s = mu0.clone();
        let sample_initial: InitialSamplerFn = Arc::new(move |rng, _| {
            let sampler = GaussianSampler::new(mu0_s.clone(), &(DMatrix::identity(2, 2) * k0));
            sampler.sample(rng)
        });
        let initial_log_density: InitialDensityFn = Arc::new(move |z, _| {
            let dx = z[0] - mu0[0];
            let dy = z[1] - mu0[1];
            -(crate::linalg::LN_2PI + k0.ln()) - 0.5 * (dx * dx + dy * dy) / k0
        });
        Self {
            dim: 2,
            theta: DVector::zeros(0),
            psd_blocks: Vec::new(),
            transition,
            sample_transition_noise,
            transition_log_density,
            zero_noise_is_mean: true,
            observation_cov: DMatrix::identity(2, 2) * r,
            sample_initial,
            initial_log_density,
        }
    }
}

/// Multi-class nonlinear model.
#[derive(Debug, Clone)]
pub struct NonlinearModel {
    classes: Vec<NonlinearClassModel>,
}

impl NonlinearModel {
    pub fn new(classes: Vec<NonlinearClassModel>) -> Result<Self> {
        let first = classes
            .first()
            .ok_or_else(|| Error::InvalidArgument("model needs at least one class".into()))?;
        let d = first.dim;
        for (j, c) in classes.iter().enumerate() {
            if c.dim != d {
                return Err(Error::Dimension(format!(
                    "class {j} has dimension {}, expected {d}",
                    c.dim
                )));
            }
            c.validate()?;
        }
        Ok(Self { classes })
    }

    pub fn dim(&self) -> usize {
        self.classes[0].dim
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, j: usize) -> &NonlinearClassModel {
        &self.classes[j]
    }

    pub fn classes(&self) -> &[NonlinearClassModel] {
        &self.classes
    }
}

/// Simulates the nonlinear drift model; the observation layer adds
/// `N(0, R)` noise to the latent centroid. Seeding mirrors
/// [`super::simulate_linear`].
pub fn simulate_nonlinear(
    model: &NonlinearModel,
    counts: &[Vec<usize>],
    seed: u64,
) -> Result<(TimeLabeledDataset, Vec<LatentTrajectory>)> {
    if counts.len() != model.num_classes() {
        return Err(Error::InvalidArgument(format!(
            "counts has {} classes, model has {}",
            counts.len(),
            model.num_classes()
        )));
    }
    let width = counts
        .first()
        .map(|row| row.len())
        .filter(|&w| w > 0)
        .ok_or_else(|| Error::InvalidArgument("counts must cover at least time 0".into()))?;
    for (j, row) in counts.iter().enumerate() {
        if row.len() != width {
            return Err(Error::InvalidArgument(format!(
                "counts row {j} has length {}, expected {width}",
                row.len()
            )));
        }
    }
    let horizon = width - 1;
    let d = model.dim();

    let mut samples = Vec::new();
    let mut trajectories = Vec::with_capacity(model.num_classes());
    for (j, class_model) in model.classes().iter().enumerate() {
        let obs = GaussianSampler::new(DVector::zeros(d), &class_model.observation_cov);

        let mut latent_rng = substream(seed, &[tag::LATENT, j as u64]);
        let mut states = Vec::with_capacity(horizon + 1);
        states.push((class_model.sample_initial)(&mut latent_rng, &class_model.theta));
        for _ in 0..horizon {
            let w = (class_model.sample_transition_noise)(&mut latent_rng, &class_model.theta);
            let prev = states.last().expect("nonempty");
            states.push((class_model.transition)(prev, &w, &class_model.theta));
        }

        for (k, state) in states.iter().enumerate() {
            let mut obs_rng = substream(seed, &[tag::OBSERVATION, j as u64, k as u64]);
            for _ in 0..counts[j][k] {
                let x = state + obs.sample(&mut obs_rng);
                samples.push(Sample::new(x, j, Some(k)));
            }
        }
        trajectories.push(LatentTrajectory::new(states)?);
    }

    let dataset = TimeLabeledDataset::new(samples, d, model.num_classes(), horizon)?;
    Ok((dataset, trajectories))
}

/// Marginal observation-space moments of a nonlinear class at each time,
/// estimated by simulating `reps` independent latent trajectories (the
/// nonlinear analogue of [`super::LinearClassModel::theoretical_moments`];
/// used to draw fresh test data in the harness).
pub fn simulated_marginals(
    model: &NonlinearClassModel,
    horizon: usize,
    reps: usize,
    seed: u64,
) -> Vec<(DVector<f64>, DMatrix<f64>)> {
    let d = model.dim;
    let mut rng = substream(seed, &[tag::TEST_DATA]);
    let mut per_time: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(reps); horizon + 1];
    for _ in 0..reps {
        let mut z = (model.sample_initial)(&mut rng, &model.theta);
        per_time[0].push(z.clone());
        for k in 1..=horizon {
            let w = (model.sample_transition_noise)(&mut rng, &model.theta);
            z = (model.transition)(&z, &w, &model.theta);
            per_time[k].push(z.clone());
        }
    }
    per_time
        .iter()
        .map(|states| {
            let n = states.len() as f64;
            let mean = states.iter().fold(DVector::zeros(d), |acc, z| acc + z) / n;
            let mut cov = DMatrix::zeros(d, d);
            for z in states {
                let diff = z - &mean;
                cov += &diff * diff.transpose();
            }
            cov /= n - 1.0;
            cov += &model.observation_cov;
            (mean, symmetrize(&cov))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_transition_zero_noise_is_constant() {
        let transition: TransitionFn = Arc::new(|z, w, _| z + w);
        let sample_noise: NoiseSamplerFn = Arc::new(|_, _| DVector::zeros(1));
        let density: TransitionDensityFn = Arc::new(|_, _, _| 0.0);
        let init: InitialSamplerFn = Arc::new(|_, _| DVector::from_element(1, 2.5));
        let init_density: InitialDensityFn = Arc::new(|_, _| 0.0);
        let class = NonlinearClassModel {
            dim: 1,
            theta: DVector::zeros(0),
            psd_blocks: Vec::new(),
            transition,
            sample_transition_noise: sample_noise,
            transition_log_density: density,
            zero_noise_is_mean: true,
            observation_cov: DMatrix::zeros(1, 1),
            sample_initial: init,
            initial_log_density: init_density,
        };
        let model = NonlinearModel::new(vec![class]).unwrap();
        let (ds, traj) = simulate_nonlinear(&model, &[vec![1, 1, 1]], 3).unwrap();
        for s in ds.samples() {
            assert_relative_eq!(s.features[0], 2.5, epsilon = 1e-14);
        }
        for z in traj[0].states() {
            assert_relative_eq!(z[0], 2.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn linear_wrapper_matches_linear_simulator_distribution() {
        // Same per-time means within Monte Carlo error over many seeds.
        let linear = super::super::LinearClassModel::scalar(0.8, 0.1, 0.05, 2.0, 0.2).unwrap();
        let wrapped = NonlinearClassModel::from_linear(&linear);
        let model = NonlinearModel::new(vec![wrapped]).unwrap();

        let reps = 4000;
        let horizon = 3;
        let mut sums = vec![0.0; horizon + 1];
        for seed in 0..reps {
            let (_, traj) = simulate_nonlinear(&model, &[vec![0; horizon + 1]], seed).unwrap();
            for (k, z) in traj[0].states().iter().enumerate() {
                sums[k] += z[0];
            }
        }
        for k in 0..=horizon {
            let (mean, cov) = linear.theoretical_moments(k);
            let state_var = cov[(0, 0)] - 0.05;
            let se = (state_var / reps as f64).sqrt();
            let mc = sums[k] / reps as f64;
            assert!(
                (mc - mean[0]).abs() < 4.0 * se + 1e-9,
                "k={k}: mc={mc}, expected={}, se={se}",
                mean[0]
            );
        }
    }

    #[test]
    fn scalar_drift_density_normalizes() {
        // Monte Carlo check that the transition density integrates to 1.
        let model = NonlinearClassModel::scalar_drift(0.9, 0.5, 0.1, 0.0, 1.0);
        let prev = DVector::from_element(1, 1.3);
        let width = 8.0_f64;
        let mut rng = substream(5, &[]);
        let n = 200_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..n {
            let u: f64 = rand::Rng::gen::<f64>(&mut rng);
            let z = DVector::from_element(1, 0.9 * 1.3 - width / 2.0 + u * width);
            let p = (model.transition_log_density)(&z, &prev, &model.theta).exp() * width;
            acc += p;
            acc2 += p * p;
        }
        let mean = acc / n as f64;
        let se = ((acc2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "integral={mean}, se={se}");
    }
}
