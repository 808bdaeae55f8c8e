//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon; without it they
//! run the same closures in order. Reductions always combine fixed-size chunk
//! partials left to right, so results are bit-identical across thread counts
//! and across the two builds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for deterministic reductions.
pub const REDUCE_CHUNK: usize = 4096;

/// `out[i] = f(i)` for every index.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Calls `f(i)` for every index in `0..count`, in no particular order.
pub fn for_each_index<F>(count: usize, f: F)
where
    F: Fn(usize) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().for_each(f);
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).for_each(f);
    }
}

/// As [`for_each_index`] with per-worker state from `init`, reused across
/// the indices that worker handles.
pub fn for_each_index_init<S, I, F>(count: usize, init: I, f: F)
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().for_each_init(init, f);
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut state = init();
        (0..count).for_each(|i| f(&mut state, i));
    }
}

/// Calls `f(chunk_index, chunk)` on consecutive mutable chunks of `chunk` elements.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
}

/// Calls `f(index, &mut item)` for every element.
pub fn for_each_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    for_each_chunk_mut(data, REDUCE_CHUNK, |ci, c| {
        let base = ci * REDUCE_CHUNK;
        for (j, x) in c.iter_mut().enumerate() {
            f(base + j, x);
        }
    });
}

/// Deterministic sum of `f(i)` over `0..len`.
pub fn sum_indexed<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = len.div_ceil(REDUCE_CHUNK);
    let partial = map_indexed(chunks, |c| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(len);
        let mut acc = Neumaier::default();
        for i in lo..hi {
            acc.add(f(i));
        }
        acc
    });
    let mut total = Neumaier::default();
    for p in partial {
        total.add(p.sum);
        total.add(p.comp);
    }
    total.value()
}

/// Compensated running sum; chunk boundaries are fixed, so the result does
/// not depend on the thread count.
#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Maximum of `f(i)` over `0..len` together with the lowest index attaining it.
/// Returns `(f64::NEG_INFINITY, 0)` for an empty range.
pub fn argmax_indexed<F>(len: usize, f: F) -> (f64, usize)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = len.div_ceil(REDUCE_CHUNK);
    let partial = map_indexed(chunks, |c| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(len);
        let mut best = (f64::NEG_INFINITY, lo);
        for i in lo..hi {
            let v = f(i);
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    });
    partial
        .into_iter()
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
}

/// Minimum of `f(i)` with the lowest index attaining it.
pub fn argmin_indexed<F>(len: usize, f: F) -> (f64, usize)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let (v, i) = argmax_indexed(len, |i| -f(i));
    (-v, i)
}

/// Runs `f` over `0..count` independent work items, preserving output order.
pub fn map_samples<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed(count, f)
}
