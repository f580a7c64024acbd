//! Domain types and synthetic data generators: time-labeled datasets,
//! linear and nonlinear drift models, latent trajectories, and the
//! closed-form univariate example.

mod analytic;
mod dataset;
mod linear;
mod nonlinear;

pub use analytic::{example_errors, std_normal_cdf, UnivariateExample};
pub use dataset::{Sample, TimeLabeledDataset};
pub use linear::{simulate_linear, LinearClassModel, LinearGaussianModel};
pub use nonlinear::{
    simulate_nonlinear, simulated_marginals, InitialDensityFn, InitialSamplerFn, NoiseSamplerFn,
    NonlinearClassModel, NonlinearModel, ThetaPsdBlock, TransitionDensityFn, TransitionFn,
};

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Ground-truth latent states `z_0..z_T` of one class from a simulation
/// run.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTrajectory {
    states: Vec<DVector<f64>>,
}

impl LatentTrajectory {
    pub fn new(states: Vec<DVector<f64>>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidArgument(
                "latent trajectory needs at least the initial state".into(),
            ));
        }
        let d = states[0].len();
        if states.iter().any(|z| z.len() != d) {
            return Err(Error::Dimension(
                "latent states must share one dimension".into(),
            ));
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn state(&self, k: usize) -> &DVector<f64> {
        &self.states[k]
    }
}
