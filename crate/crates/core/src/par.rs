//! Data-parallel helpers. With the `parallel` feature (on by default) the
//! work is spread over the rayon thread pool; without it, or when calling
//! the `_seq` variants, it runs on the current thread in order. Results are
//! identical either way.

/// Maps `f` over `items` on the current thread.
pub fn map_seq<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    items.iter().map(f).collect()
}

/// Maps `f` over `items` in parallel, preserving order.
#[cfg(feature = "parallel")]
pub fn map_par<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Sequential stand-in when the `parallel` feature is off.
#[cfg(not(feature = "parallel"))]
pub fn map_par<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    map_seq(items, f)
}

/// The default mapping strategy of the crate.
pub fn map<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    map_par(items, f)
}

/// Fills `out` in chunks of `chunk` elements; `f` receives the chunk index.
pub(crate) fn fill_chunks<T, F>(out: &mut [T], chunk: usize, parallel: bool, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(k, c)| f(k, c));
        return;
    }
    let _ = parallel;
    for (k, c) in out.chunks_mut(chunk).enumerate() {
        f(k, c);
    }
}

/// Whether the crate was built with the `parallel` feature.
pub const fn enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let f = |x: &u64| x * x + 1;
        assert_eq!(map_seq(&xs, f), map_par(&xs, f));
        assert_eq!(map(&xs, f), map_seq(&xs, f));
    }

    #[test]
    fn chunks_are_filled_in_place() {
        for parallel in [false, true] {
            let mut v = vec![0usize; 12];
            fill_chunks(&mut v, 4, parallel, |k, c| c.iter_mut().for_each(|x| *x = k));
            assert_eq!(v, [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
        }
    }
}
