//! Execution backend for the data-parallel loops (chains, grid evaluation,
//! per-parameter diagnostics).
//!
//! Every parallel map in this crate computes each output element from its
//! index alone and collects in index order, so results are bit-identical
//! between [`Backend::Sequential`] and [`Backend::Parallel`].

/// How indexed work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Rayon thread pool when the `parallel` feature is enabled; falls back
    /// to sequential execution otherwise.
    #[default]
    Parallel,
}

impl Backend {
    /// Whether this backend actually runs on multiple threads in this build.
    pub fn is_threaded(self) -> bool {
        matches!(self, Backend::Parallel) && cfg!(feature = "parallel")
    }

    /// Evaluates `f(0..n)` and collects the results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Backend::Sequential => (0..n).map(f).collect(),
            Backend::Parallel => par_map(n, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backends_agree_and_preserve_order() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let seq = Backend::Sequential.map_indexed(1000, f);
        let par = Backend::Parallel.map_indexed(1000, f);
        assert_eq!(seq.len(), 1000);
        assert!(seq.iter().zip(&par).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn empty_range() {
        assert!(Backend::Parallel.map_indexed(0, |i| i).is_empty());
    }
}
