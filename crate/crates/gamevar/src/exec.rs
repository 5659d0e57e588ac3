//! Deterministic execution helpers.
//!
//! Every stochastic operation derives an independent ChaCha8 stream from
//! `(master seed, domain, index)`, so results are identical no matter how the
//! work is scheduled. With the `parallel` feature (on by default) indexed maps
//! run on rayon; the sequential variants are always available and must agree
//! bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Namespaces for RNG streams so different uses of one master seed never
/// overlap.
#[derive(Clone, Copy, Debug)]
pub enum StreamDomain {
    Playthrough = 1,
    Imputation = 2,
    Bootstrap = 3,
    GameGen = 4,
    ProfileGen = 5,
    Fuzz = 6,
}

/// An independent ChaCha8 stream for `(seed, domain, index)`.
pub fn stream_rng(seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    assert!(index < 1 << 48, "stream index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 48) | index);
    rng
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
/// Output order is always index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Always-sequential counterpart of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
