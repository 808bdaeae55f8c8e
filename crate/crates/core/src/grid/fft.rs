//! Multidimensional in-place FFT over the grid layout.
//!
//! Axes are handled in pairs. For each pair a tile of neighbouring columns is
//! gathered into a small buffer holding full `side × side` planes, both axes
//! are transformed there, and the result is scattered back. A 4D transform
//! therefore streams through memory twice and needs no full-size scratch.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::par;

/// Columns per tile on the outer axis pair.
const TILE: usize = 8;

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    // the planner caches plans internally
    let mut p = planner.lock().unwrap_or_else(|e| e.into_inner());
    p.plan_fft(len, direction)
}

#[derive(Clone, Copy)]
struct SharedMut(*mut C64);
// SAFETY: tasks built in `pair_pass` write pairwise disjoint index sets.
unsafe impl Send for SharedMut {}
unsafe impl Sync for SharedMut {}

/// Transforms two adjacent axes; the faster one has element stride `inner`.
/// Every output is multiplied by `scale`.
fn pair_pass(data: &mut [C64], fft: &Arc<dyn Fft<f64>>, side: usize, inner: usize, scale: f64) {
    let tile = TILE.min(inner);
    let plane = side * side;
    let block = plane * inner;
    let blocks = data.len() / block;
    let tiles = inner / tile;
    let ptr = SharedMut(data.as_mut_ptr());
    let zeros = |len| vec![C64::new(0.0, 0.0); len];
    let init = || {
        (
            zeros(tile * plane),
            zeros(tile * plane),
            zeros(fft.get_inplace_scratch_len()),
        )
    };
    par::for_each_index_init(blocks * tiles, init, |(buf, tr, scratch), task| {
        let base = (task / tiles) * block + (task % tiles) * tile;
        let p = ptr;
        // SAFETY: this task owns base + (r0*side + r1)*inner + j for r0, r1 <
        // side and j < tile; distinct tasks differ in block or column tile.
        unsafe {
            for r in 0..plane {
                let src = p.0.add(base + r * inner);
                for j in 0..tile {
                    buf[j * plane + r] = *src.add(j);
                }
            }
        }
        // fast axis: rows of buf; slow axis: rows of the per-plane transpose
        fft.process_with_scratch(buf, scratch);
        for j in 0..tile {
            let (b, t) = (
                &buf[j * plane..(j + 1) * plane],
                &mut tr[j * plane..(j + 1) * plane],
            );
            for r0 in 0..side {
                for r1 in 0..side {
                    t[r1 * side + r0] = b[r0 * side + r1];
                }
            }
        }
        fft.process_with_scratch(tr, scratch);
        unsafe {
            for r0 in 0..side {
                for r1 in 0..side {
                    let dst = p.0.add(base + (r0 * side + r1) * inner);
                    for j in 0..tile {
                        *dst.add(j) = tr[j * plane + r1 * side + r0] * scale;
                    }
                }
            }
        }
    });
}

fn transform(data: &mut [C64], side: usize, dims: usize, direction: FftDirection, scale: f64) {
    assert!(dims % 2 == 0 && side >= TILE && side.is_power_of_two());
    let fft = plan(side, direction);
    let pairs = dims / 2;
    for k in 0..pairs {
        let inner = side.pow((2 * k) as u32);
        let s = if k + 1 == pairs { scale } else { 1.0 };
        pair_pass(data, &fft, side, inner, s);
    }
}

/// Unnormalized forward DFT, `Σ f e^{-i k·x}`.
pub(crate) fn forward(data: &mut [C64], side: usize, dims: usize) {
    transform(data, side, dims, FftDirection::Forward, 1.0);
}

/// Inverse DFT normalized by the node count.
pub(crate) fn inverse(data: &mut [C64], side: usize, dims: usize) {
    let s = 1.0 / data.len() as f64;
    transform(data, side, dims, FftDirection::Inverse, s);
}
