//! Plain time-domain fitting with a single network.

use alloc::vec::Vec;

use super::{
    train_checkpointed, Decomposition, Executor, FitModel, FitOptions, FitResult, Method, Part, PartOutputs,
    PartProblem, SampledSignal,
};
use crate::nn::DenseNetwork;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct VanillaModel {
    /// `None` when the signal is identically zero.
    pub network: Option<DenseNetwork>,
    pub scale: f64,
    pub x_start: f64,
    pub x_end: f64,
}

impl VanillaModel {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let u = 2.0 * (x - self.x_start) / (self.x_end - self.x_start) - 1.0;
        self.network.as_ref().map_or(Ok(0.0), |n| Ok(n.forward(u)? * self.scale))
    }
}

struct VanillaProblem {
    parts: Vec<PartProblem>,
}

impl Decomposition for VanillaProblem {
    fn method(&self) -> Method {
        Method::Vanilla
    }

    fn parts(&self) -> &[PartProblem] {
        &self.parts
    }

    fn reconstruct(&self, outputs: &[PartOutputs]) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        Ok((outputs[0].grid.clone(), outputs[0].test.clone()))
    }
}

/// Trains one network on `(normalized x_j, f_j / max|f|)` pairs.
pub fn fit_vanilla(signal: &SampledSignal, opts: &FitOptions, exec: &dyn Executor) -> Result<FitResult> {
    opts.validate()?;
    let spec = &signal.spec;
    let inputs: Vec<f64> = spec.grid().iter().map(|&x| signal.normalize_x(x)).collect();
    let test: Vec<f64> = spec.grid_shifted(0.5).iter().map(|&x| signal.normalize_x(x)).collect();
    let problem = VanillaProblem {
        parts: alloc::vec![PartProblem::new(0, Part::Re, inputs, &signal.samples, Some(test))?],
    };
    let trained = train_checkpointed(&problem, signal, opts, exec)?;
    let network = trained.networks.into_iter().next().flatten();
    Ok(FitResult {
        method: Method::Vanilla,
        delta_omega: None,
        plan: None,
        networks: network.is_some() as usize,
        reconstruction: trained.reconstruction,
        checkpoints: trained.checkpoints,
        model: FitModel::Vanilla(VanillaModel {
            network,
            scale: problem.parts[0].scale,
            x_start: spec.x_start,
            x_end: spec.x_end,
        }),
    })
}
