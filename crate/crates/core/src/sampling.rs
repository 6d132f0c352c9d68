//! Seeded uniform entry states, reproducible independently of worker count.
//!
//! Samples are produced in fixed-size batches. Batch `b` draws from a
//! ChaCha8 generator seeded with `seed` on stream `b`, so the `i`-th sample
//! is a pure function of `(seed, i)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::billiard::EntryState;
use crate::exec::map_indexed;

pub const BATCH_SIZE: usize = 8192;

/// Uniform on `(-1/2, 1/2) × (-π/2, π/2)`; draws landing on the closed
/// boundary are redrawn.
pub fn draw_entry<R: Rng>(rng: &mut R) -> EntryState {
    loop {
        let x = rng.random::<f64>() - 0.5;
        let phi = (rng.random::<f64>() - 0.5) * PI;
        if let Ok(e) = EntryState::new(x, phi) {
            return e;
        }
    }
}

/// Entry states `[start, end)` of batch `batch`.
pub fn batch_entries(seed: u64, batch: usize, len: usize) -> Vec<EntryState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    (0..len).map(|_| draw_entry(&mut rng)).collect()
}

/// Maps `f` over the first `n` seeded samples, batch-parallel, returning the
/// per-batch outputs in batch order.
pub fn map_batches<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[EntryState]) -> T + Sync + Send,
{
    let batches = n.div_ceil(BATCH_SIZE);
    map_indexed(batches, |b| {
        let len = BATCH_SIZE.min(n - b * BATCH_SIZE);
        f(&batch_entries(seed, b, len))
    })
}
