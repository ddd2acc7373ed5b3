use crate::config::TrainConfig;
use crate::data::CodebookSet;

/// Learned dictionaries plus the configuration and distortion history that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub codebooks: CodebookSet,
    pub config: TrainConfig,
    /// `(iteration, relative distortion)` measured after each assignment step.
    pub history: Vec<(usize, f64)>,
}

impl Model {
    pub fn new(codebooks: CodebookSet, config: TrainConfig) -> Self {
        Self {
            codebooks,
            config,
            history: Vec::new(),
        }
    }

    pub fn num_dicts(&self) -> usize {
        self.codebooks.num_dicts()
    }

    pub fn num_words(&self) -> usize {
        self.codebooks.num_words()
    }

    pub fn dims(&self) -> usize {
        self.codebooks.dims()
    }

    /// Relative distortion of the last recorded iteration.
    pub fn final_distortion(&self) -> Option<f64> {
        self.history.last().map(|&(_, d)| d)
    }
}
