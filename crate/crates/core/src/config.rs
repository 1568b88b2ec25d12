//! Resource limits and execution strategy shared by every computation.

/// How data-parallel loops are executed.
///
/// `Parallel` falls back to sequential execution when the crate is built
/// without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest group whose elements may be enumerated.
    pub max_elements: u64,
    /// Largest number of subgroups a listing may produce.
    pub max_subgroups: usize,
    /// Trial-division bound used when factoring displayed values.
    pub trial_bound: u64,
    /// Largest `n` accepted by the symbolic `P_T` family.
    pub max_pt_n: u64,
    pub exec: Execution,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_elements: 1_000_000,
            max_subgroups: 10_000,
            trial_bound: 1_000_000,
            max_pt_n: 8,
            exec: Execution::Parallel,
        }
    }
}

impl Limits {
    pub fn sequential() -> Self {
        Limits {
            exec: Execution::Sequential,
            ..Limits::default()
        }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }
}
