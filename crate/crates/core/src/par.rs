//! Data-parallel helpers over ξ₁-slabs.
//!
//! All reductions go through [`slab_map`], which returns per-slab results in
//! slab order; callers sum them sequentially, so results do not depend on the
//! number of worker threads. With the `parallel` feature disabled, every
//! policy runs sequentially.

/// Execution policy for grid loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecPolicy {
    #[default]
    Parallel,
    Sequential,
}

impl ExecPolicy {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecPolicy::Parallel
    }
}

/// Calls `f(slab_index, slab)` for every chunk of `slab_len` elements.
pub fn for_each_slab_mut<T, F>(policy: ExecPolicy, data: &mut [T], slab_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        use rayon::prelude::*;
        data.par_chunks_mut(slab_len)
            .enumerate()
            .for_each(|(i, s)| f(i, s));
        return;
    }
    let _ = policy;
    data.chunks_mut(slab_len)
        .enumerate()
        .for_each(|(i, s)| f(i, s));
}

/// Maps `f` over `0..n`, returning results in index order.
pub fn slab_map<R, F>(policy: ExecPolicy, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = policy;
    (0..n).map(f).collect()
}

/// Deterministic sum of per-slab contributions.
pub fn slab_sum<F>(policy: ExecPolicy, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    slab_map(policy, n, f).into_iter().sum()
}

/// Zips three equally sized slices element-wise, `out[i] = f(a[i], b[i])`.
pub fn zip_apply<F>(policy: ExecPolicy, out: &mut [[f64; 4]], a: &[[f64; 4]], b: &[[f64; 4]], f: F)
where
    F: Fn(&[f64; 4], &[f64; 4]) -> [f64; 4] + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        use rayon::prelude::*;
        out.par_iter_mut()
            .zip(a.par_iter().zip(b.par_iter()))
            .for_each(|(o, (x, y))| *o = f(x, y));
        return;
    }
    let _ = policy;
    out.iter_mut()
        .zip(a.iter().zip(b.iter()))
        .for_each(|(o, (x, y))| *o = f(x, y));
}

/// Builds a thread pool of the requested size and runs `f` inside it.
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_agree_across_policies() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
        let a = slab_sum(ExecPolicy::Parallel, 1000, f);
        let b = slab_sum(ExecPolicy::Sequential, 1000, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn slabs_are_indexed_in_order() {
        let mut data = vec![0usize; 12];
        for_each_slab_mut(ExecPolicy::Parallel, &mut data, 4, |i, s| {
            s.iter_mut().for_each(|x| *x = i)
        });
        assert_eq!(data, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
    }
}
