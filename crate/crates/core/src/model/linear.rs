//! Linear-Gaussian drift model: per-class state dynamics
//! `z_{k+1} = A z_k + w`, observations `x = z_k + v`, together with the
//! simulator and the closed-form marginal moments.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{check_psd, symmetrize};
use crate::model::dataset::{Sample, TimeLabeledDataset};
use crate::model::LatentTrajectory;
use crate::rng::{substream, tag, GaussianSampler};

/// Symmetry/PSD tolerances for model covariance blocks.
const MODEL_SYM_TOL: f64 = 1e-10;
const MODEL_EIG_TOL: f64 = 1e-10;

/// Parameters of one class in the linear-Gaussian drift model: dynamics
/// `A`, process noise `Q`, observation noise `R`, and the initial state
/// law `N(mu0, k0)`. The observation matrix is fixed to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassModel {
    pub a: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub mu0: DVector<f64>,
    pub k0: DMatrix<f64>,
}

impl LinearClassModel {
    pub fn new(
        a: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        mu0: DVector<f64>,
        k0: DMatrix<f64>,
    ) -> Result<Self> {
        let d = mu0.len();
        if d == 0 {
            return Err(Error::InvalidArgument("state dimension must be positive".into()));
        }
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::Dimension(format!(
                "A must be {d}x{d}, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        check_psd(&q, d, "Q", MODEL_SYM_TOL, MODEL_EIG_TOL)?;
        check_psd(&r, d, "R", MODEL_SYM_TOL, MODEL_EIG_TOL)?;
        check_psd(&k0, d, "K0", MODEL_SYM_TOL, MODEL_EIG_TOL)?;
        Ok(Self { a, q, r, mu0, k0 })
    }

    /// Scalar (d = 1) convenience constructor.
    pub fn scalar(a: f64, q: f64, r: f64, mu0: f64, k0: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, q),
            DMatrix::from_element(1, 1, r),
            DVector::from_element(1, mu0),
            DMatrix::from_element(1, 1, k0),
        )
    }

    pub fn dim(&self) -> usize {
        self.mu0.len()
    }

    /// Marginal observation-space moments at time `k`:
    /// mean `A^k mu0` and covariance
    /// `A^k K0 (A^T)^k + sum_{i<k} A^i Q (A^T)^i + R`.
    pub fn theoretical_moments(&self, k: usize) -> (DVector<f64>, DMatrix<f64>) {
        let mut mean = self.mu0.clone();
        let mut state_cov = self.k0.clone();
        for _ in 0..k {
            mean = &self.a * mean;
            state_cov = &self.a * state_cov * self.a.transpose() + &self.q;
        }
        let cov = symmetrize(&(state_cov + &self.r));
        (mean, cov)
    }
}

/// The full multi-class model: one [`LinearClassModel`] per class, all
/// sharing the feature dimension.
#[derive(Debug, Clone)]
pub struct LinearGaussianModel {
    classes: Vec<LinearClassModel>,
}

impl LinearGaussianModel {
    pub fn new(classes: Vec<LinearClassModel>) -> Result<Self> {
        let first = classes
            .first()
            .ok_or_else(|| Error::InvalidArgument("model needs at least one class".into()))?;
        let d = first.dim();
        for (j, c) in classes.iter().enumerate() {
            if c.dim() != d {
                return Err(Error::Dimension(format!(
                    "class {j} has dimension {}, expected {d}",
                    c.dim()
                )));
            }
        }
        Ok(Self { classes })
    }

    pub fn dim(&self) -> usize {
        self.classes[0].dim()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, j: usize) -> &LinearClassModel {
        &self.classes[j]
    }

    pub fn classes(&self) -> &[LinearClassModel] {
        &self.classes
    }

    /// Marginal moments of class `j` at time `k`.
    pub fn theoretical_moments(&self, class: usize, k: usize) -> (DVector<f64>, DMatrix<f64>) {
        self.classes[class].theoretical_moments(k)
    }
}

/// Validates a `(c, T+1)` count table against the model.
fn validate_counts(model: &LinearGaussianModel, counts: &[Vec<usize>]) -> Result<usize> {
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
    Ok(width - 1)
}

/// Simulates the linear drift model.
///
/// Per class `j`: the latent trajectory starts at `z_0 ~ N(mu0, K0)` and
/// evolves through the dynamics, with `counts[j][k]` observations
/// `x = z_k + v` emitted at each time. Latent states are simulated at
/// every time even when the count is zero. Classes and per-class
/// per-time observation draws use independent seed substreams, so the
/// same seed reproduces the dataset bit-for-bit.
pub fn simulate_linear(
    model: &LinearGaussianModel,
    counts: &[Vec<usize>],
    seed: u64,
) -> Result<(TimeLabeledDataset, Vec<LatentTrajectory>)> {
    let horizon = validate_counts(model, counts)?;
    let d = model.dim();

    let mut samples = Vec::new();
    let mut trajectories = Vec::with_capacity(model.num_classes());
    for (j, class_model) in model.classes().iter().enumerate() {
        let init = GaussianSampler::new(class_model.mu0.clone(), &class_model.k0);
        let process = GaussianSampler::new(DVector::zeros(d), &class_model.q);
        let obs = GaussianSampler::new(DVector::zeros(d), &class_model.r);

        let mut latent_rng = substream(seed, &[tag::LATENT, j as u64]);
        let mut states = Vec::with_capacity(horizon + 1);
        states.push(init.sample(&mut latent_rng));
        for _ in 0..horizon {
            let prev = states.last().expect("nonempty");
            let next = &class_model.a * prev + process.sample(&mut latent_rng);
            states.push(next);
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

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn identity_model(d: usize, mu0: Vec<f64>) -> LinearGaussianModel {
        let c = LinearClassModel::new(
            DMatrix::identity(d, d),
            DMatrix::zeros(d, d),
            DMatrix::zeros(d, d),
            DVector::from_vec(mu0),
            DMatrix::zeros(d, d),
        )
        .unwrap();
        LinearGaussianModel::new(vec![c]).unwrap()
    }

    #[test]
    fn noise_free_identity_dynamics_replicates_mu0() {
        let model = identity_model(2, vec![1.0, 2.0]);
        let counts = vec![vec![1usize; 4]];
        let (ds, traj) = simulate_linear(&model, &counts, 9).unwrap();
        assert_eq!(ds.len(), 4);
        for s in ds.samples() {
            assert_relative_eq!(s.features[0], 1.0, epsilon = 1e-14);
            assert_relative_eq!(s.features[1], 2.0, epsilon = 1e-14);
        }
        for z in traj[0].states() {
            assert_relative_eq!(z[0], 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn deterministic_contraction_latent_path() {
        let c = LinearClassModel::scalar(0.9, 0.0, 0.0, 10.0, 0.0).unwrap();
        let model = LinearGaussianModel::new(vec![c]).unwrap();
        let counts = vec![vec![0usize; 4]];
        let (ds, traj) = simulate_linear(&model, &counts, 1).unwrap();
        assert!(ds.is_empty());
        let expect = [10.0, 9.0, 8.1, 7.29];
        for (z, e) in traj[0].states().iter().zip(expect) {
            assert_relative_eq!(z[0], e, epsilon = 1e-12);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let c = LinearClassModel::scalar(0.9, 0.3, 0.2, 1.0, 0.5).unwrap();
        let model = LinearGaussianModel::new(vec![c.clone(), c]).unwrap();
        let counts = vec![vec![3, 2, 0, 1], vec![1, 1, 1, 1]];
        let (a, ta) = simulate_linear(&model, &counts, 77).unwrap();
        let (b, tb) = simulate_linear(&model, &counts, 77).unwrap();
        assert_eq!(a.samples(), b.samples());
        for (x, y) in ta.iter().zip(&tb) {
            assert_eq!(x.states(), y.states());
        }
        let (cds, _) = simulate_linear(&model, &counts, 78).unwrap();
        assert_ne!(a.samples(), cds.samples());
    }

    #[test]
    fn theoretical_moments_match_closed_forms() {
        // k = 0 is the empty sum: (mu0, K0 + R).
        let c = LinearClassModel::scalar(0.9, 1.0, 1.0, 3.0, 1.0).unwrap();
        let (m0, c0) = c.theoretical_moments(0);
        assert_relative_eq!(m0[0], 3.0);
        assert_relative_eq!(c0[(0, 0)], 2.0);
        // k = 1: a^2*sigma^2 + q + r = 0.81 + 1 + 1.
        let (m1, c1) = c.theoretical_moments(1);
        assert_relative_eq!(m1[0], 2.7, epsilon = 1e-12);
        assert_relative_eq!(c1[(0, 0)], 2.81, epsilon = 1e-12);
    }

    #[test]
    fn identity_dynamics_accumulate_process_noise() {
        let q = 0.3;
        let c = LinearClassModel::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2) * q,
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let (_, cov) = c.theoretical_moments(5);
        assert_relative_eq!(cov[(0, 0)], 5.0 * q, epsilon = 1e-12);
        assert_relative_eq!(cov[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_psd_covariance_naming_block() {
        let bad = LinearClassModel::new(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::identity(2, 2),
        );
        match bad {
            Err(Error::NotPsd { name, .. }) => assert_eq!(name, "Q"),
            other => panic!("expected NotPsd(Q), got {other:?}"),
        }
    }
}
