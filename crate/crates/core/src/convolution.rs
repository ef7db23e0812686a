use crate::error::{Error, Result};
use crate::family::PowerSeriesFamily;
use crate::instance::PsdInstance;

/// The independent summands of `S_n = X_1 + ... + X_n`, in a fixed order.
///
/// Every aggregate is reduced in index order so results do not depend on
/// how callers schedule the work.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionSpec {
    instances: Vec<PsdInstance>,
}

impl ConvolutionSpec {
    pub fn new(instances: Vec<PsdInstance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::EmptySpec);
        }
        Ok(Self { instances })
    }

    /// `n` copies of the same summand.
    pub fn iid(instance: PsdInstance, n: usize) -> Result<Self> {
        Self::new(vec![instance; n])
    }

    /// One summand per user-facing parameter (see [`PsdInstance::from_param`]).
    pub fn from_params(family: PowerSeriesFamily, params: &[f64]) -> Result<Self> {
        let instances = params
            .iter()
            .map(|&v| PsdInstance::from_param(family, v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(instances)
    }

    pub fn instances(&self) -> &[PsdInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// `E S_n`.
    pub fn mean(&self) -> f64 {
        self.instances.iter().map(PsdInstance::mean).sum()
    }

    /// `Var S_n`.
    pub fn variance(&self) -> f64 {
        self.instances.iter().map(PsdInstance::variance).sum()
    }

    /// The common family, if every summand shares one.
    pub fn common_family(&self) -> Option<PowerSeriesFamily> {
        let first = self.instances[0].family();
        self.instances
            .iter()
            .all(|i| i.family() == first)
            .then_some(first)
    }

    /// True when all summands are identical.
    pub fn is_iid(&self) -> bool {
        self.instances.iter().all(|i| *i == self.instances[0])
    }
}
