//! Deterministic sampling helpers: Halton points, seeded direction pairs,
//! and order-independent parallel argmax/argmin reductions.

use rayon::prelude::*;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical-inverse (van der Corput) value of `index` in the given base.
pub fn halton(mut index: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= b;
        r += f * (index % base as u64) as f64;
        index /= base as u64;
    }
    r
}

/// SplitMix64 step; used to derive per-dimension scramble offsets from a seed.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Low-discrepancy sampler of direction pairs on the Euclidean sphere of
/// `R^dim`: Halton points with a seed-derived rotation, pushed through
/// Box-Muller and normalized. Deterministic for a fixed `(seed, index)`.
#[derive(Debug, Clone)]
pub struct DirectionPairs {
    dim: usize,
    offsets: Vec<f64>,
}

impl DirectionPairs {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        assert!(2 * dim <= PRIMES.len(), "direction sampler supports dim <= 8");
        let mut state = seed ^ 0xa076_1d64_78bd_642f;
        let gaussians = 2 * dim;
        // Box-Muller consumes uniforms two at a time.
        let offsets = (0..2 * gaussians.div_ceil(2))
            .map(|_| (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64)
            .collect();
        DirectionPairs { dim, offsets }
    }

    fn gaussians(&self, index: u64, count: usize, lane: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let mut k = 0;
        while out.len() < count {
            let slot = lane * count + 2 * k;
            let u1 = frac(halton(index + 1, PRIMES[(slot) % PRIMES.len()]) + self.offsets[slot % self.offsets.len()])
                .max(1e-16);
            let u2 = frac(
                halton(index + 1, PRIMES[(slot + 1) % PRIMES.len()])
                    + self.offsets[(slot + 1) % self.offsets.len()],
            );
            let r = (-2.0 * u1.ln()).sqrt();
            let angle = 2.0 * std::f64::consts::PI * u2;
            out.push(r * angle.cos());
            if out.len() < count {
                out.push(r * angle.sin());
            }
            k += 1;
        }
        out
    }

    /// The `index`-th direction pair, each Euclidean-normalized.
    pub fn pair(&self, index: u64) -> (Vec<f64>, Vec<f64>) {
        (self.direction(index, 0), self.direction(index, 1))
    }

    pub fn direction(&self, index: u64, lane: usize) -> Vec<f64> {
        let mut g = self.gaussians(index, self.dim, lane);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            g = vec![0.0; self.dim];
            g[0] = 1.0;
            return g;
        }
        g.iter_mut().for_each(|v| *v /= norm);
        g
    }
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Index and value of the maximum of `f` over `0..count`, evaluated in
/// parallel. Ties break toward the smaller index, so the result does not
/// depend on the execution order.
pub fn par_argmax<F>(count: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> Option<f64> + Sync,
{
    (0..count)
        .into_par_iter()
        .filter_map(|i| f(i).map(|v| (i, v)))
        .reduce_with(|a, b| pick_max(a, b))
}

/// Top `k` (index, value) entries of `f`, sorted by descending value with
/// index tie-breaks; deterministic under parallel execution.
pub fn par_top_k<F>(count: usize, k: usize, f: F) -> Vec<(usize, f64)>
where
    F: Fn(usize) -> Option<f64> + Sync,
{
    let mut entries: Vec<(usize, f64)> = (0..count)
        .into_par_iter()
        .filter_map(|i| f(i).map(|v| (i, v)))
        .collect();
    entries.sort_by(|a, b| {
        b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0))
    });
    entries.truncate(k);
    entries
}

fn pick_max(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_is_equidistributed_enough() {
        let n = 1000;
        let mean: f64 = (1..=n).map(|i| halton(i, 2)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn direction_pairs_are_unit_and_deterministic() {
        let s = DirectionPairs::new(3, 42);
        let (x, y) = s.pair(17);
        assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((y.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        let (x2, _) = DirectionPairs::new(3, 42).pair(17);
        assert_eq!(x, x2);
        let (x3, _) = DirectionPairs::new(3, 43).pair(17);
        assert_ne!(x, x3);
    }

    #[test]
    fn par_argmax_breaks_ties_deterministically() {
        let vals = [1.0, 5.0, 5.0, 2.0];
        let got = par_argmax(4, |i| Some(vals[i])).unwrap();
        assert_eq!(got, (1, 5.0));
    }
}
