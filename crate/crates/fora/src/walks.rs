//! Seeded random-walk engine with alpha-termination.
//!
//! Walk randomness is drawn from counter-based streams keyed by
//! `(seed, start node, walk index)`, so the stream for any given walk is
//! independent of the order walks are issued in. A query that replays walk
//! `j` from node `v` online produces exactly the terminal that an index
//! built from the same seed stored for `(v, j)`, which makes indexed and
//! online queries bit-identical.

use crate::graph::{Graph, NodeId};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic walk-stream factory. Identical seed plus identical call
/// sequence replays identical walks across platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkRng {
    seed: u64,
}

impl WalkRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream of draws for walk number `walk` starting at `node`.
    #[inline]
    pub fn stream(&self, node: NodeId, walk: u64) -> WalkStream {
        let mut k = self.seed;
        k = mix64(k ^ (node as u64).wrapping_mul(GOLDEN).wrapping_add(GOLDEN));
        k = mix64(
            k ^ walk
                .wrapping_mul(0xD1B5_4A32_D192_ED03)
                .wrapping_add(GOLDEN),
        );
        WalkStream { state: k }
    }
}

/// Per-walk draw sequence (SplitMix64 over the derived key).
#[derive(Debug, Clone)]
pub struct WalkStream {
    state: u64,
}

impl WalkStream {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [0, bound) without modulo bias (Lemire rejection).
    #[inline]
    pub fn next_below(&mut self, bound: u32) -> u32 {
        debug_assert!(bound > 0);
        let mut x = (self.next_u64() >> 32) as u32;
        let mut m = x as u64 * bound as u64;
        let mut low = m as u32;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                x = (self.next_u64() >> 32) as u32;
                m = x as u64 * bound as u64;
                low = m as u32;
            }
        }
        (m >> 32) as u32
    }
}

/// Runs an alpha-terminating random walk and returns the terminal node.
/// The walk stops at the current node with probability `alpha` per step and
/// otherwise moves to a uniformly random out-neighbor; a dangling node
/// terminates the walk immediately.
#[inline]
pub fn random_walk(g: &Graph, start: NodeId, alpha: f64, stream: &mut WalkStream) -> NodeId {
    walk_with_hops(g, start, alpha, stream).0
}

/// Walk variant that skips the zero-hop outcome: the first move to a random
/// out-neighbor is unconditional, and the walk proceeds normally from there.
/// A dangling start has no first move and returns itself.
#[inline]
pub fn random_walk_skip_zero_hop(
    g: &Graph,
    start: NodeId,
    alpha: f64,
    stream: &mut WalkStream,
) -> NodeId {
    let neighbors = g.out_neighbors(start);
    if neighbors.is_empty() {
        return start;
    }
    let first = neighbors[stream.next_below(neighbors.len() as u32) as usize];
    random_walk(g, first, alpha, stream)
}

/// Walk returning (terminal, hops traversed); used by the length tests.
pub(crate) fn walk_with_hops(
    g: &Graph,
    start: NodeId,
    alpha: f64,
    stream: &mut WalkStream,
) -> (NodeId, u32) {
    let mut cur = start;
    let mut hops = 0u32;
    loop {
        let neighbors = g.out_neighbors(cur);
        if neighbors.is_empty() || stream.next_f64() < alpha {
            return (cur, hops);
        }
        cur = neighbors[stream.next_below(neighbors.len() as u32) as usize];
        hops += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle() -> Graph {
        Graph::from_edges(&[(0, 1), (1, 0)], false).unwrap()
    }

    #[test]
    fn isolated_node_walk_terminates_at_start() {
        let g = Graph::from_edges(&[(1, 0)], false).unwrap(); // node 0 dangling
        let rng = WalkRng::new(7);
        for j in 0..100 {
            assert_eq!(random_walk(&g, 0, 0.2, &mut rng.stream(0, j)), 0);
        }
    }

    #[test]
    fn two_cycle_terminal_fraction_matches_closed_form() {
        // pi(0,0) = alpha / (1 - (1-alpha)^2) = 0.2/0.36 = 5/9
        let g = two_cycle();
        let rng = WalkRng::new(42);
        let walks = 100_000u64;
        let at_zero = (0..walks)
            .filter(|&j| random_walk(&g, 0, 0.2, &mut rng.stream(0, j)) == 0)
            .count();
        let frac = at_zero as f64 / walks as f64;
        assert!((frac - 5.0 / 9.0).abs() < 0.01, "frac = {frac}");
    }

    #[test]
    fn dangling_path_terminal_fraction() {
        // 0 -> 1 with 1 dangling: walk ends at 1 unless it stops immediately.
        let g = Graph::from_edges(&[(0, 1)], false).unwrap();
        let rng = WalkRng::new(3);
        let walks = 100_000u64;
        let at_one = (0..walks)
            .filter(|&j| random_walk(&g, 0, 0.2, &mut rng.stream(0, j)) == 1)
            .count();
        let frac = at_one as f64 / walks as f64;
        assert!((frac - 0.8).abs() < 0.01, "frac = {frac}");
    }

    #[test]
    fn skip_zero_hop_never_returns_start_with_outgoing_edges() {
        // Star 0 -> {1, 2} with dangling leaves: first hop decides the walk.
        let g = Graph::from_edges(&[(0, 1), (0, 2)], false).unwrap();
        let rng = WalkRng::new(11);
        let walks = 10_000u64;
        let mut counts = [0u64; 3];
        for j in 0..walks {
            let t = random_walk_skip_zero_hop(&g, 0, 0.2, &mut rng.stream(0, j));
            counts[t as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        let frac1 = counts[1] as f64 / walks as f64;
        assert!((frac1 - 0.5).abs() < 0.02, "frac1 = {frac1}");
    }

    #[test]
    fn skip_zero_hop_dangling_start_returns_start() {
        let g = Graph::from_edges(&[(1, 0)], false).unwrap();
        let mut stream = WalkRng::new(5).stream(0, 0);
        assert_eq!(random_walk_skip_zero_hop(&g, 0, 0.2, &mut stream), 0);
    }

    #[test]
    fn skip_zero_hop_estimates_one_plus_hop_mass() {
        // E[terminal == 0] over skip-zero-hop walks from 0 equals
        // (pi(0,0) - alpha) / (1 - alpha) = 4/9 on the 2-cycle.
        let g = two_cycle();
        let rng = WalkRng::new(19);
        let walks = 100_000u64;
        let at_zero = (0..walks)
            .filter(|&j| random_walk_skip_zero_hop(&g, 0, 0.2, &mut rng.stream(0, j)) == 0)
            .count();
        let frac = at_zero as f64 / walks as f64;
        let expected = (5.0 / 9.0 - 0.2) / 0.8;
        assert!((frac - expected).abs() < 0.01, "frac = {frac}");
    }

    #[test]
    fn identical_seeds_replay_identical_terminals() {
        let g = two_cycle();
        let a = WalkRng::new(99);
        let b = WalkRng::new(99);
        for j in 0..1000 {
            let ta = random_walk(&g, 0, 0.2, &mut a.stream(0, j));
            let tb = random_walk(&g, 0, 0.2, &mut b.stream(0, j));
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn streams_are_independent_of_issue_order() {
        let g = two_cycle();
        let rng = WalkRng::new(4);
        let forward: Vec<_> = (0..100)
            .map(|j| random_walk(&g, 1, 0.2, &mut rng.stream(1, j)))
            .collect();
        let mut backward: Vec<_> = (0..100)
            .rev()
            .map(|j| random_walk(&g, 1, 0.2, &mut rng.stream(1, j)))
            .collect();
        backward.reverse();
        assert_eq!(forward, backward);
    }

    #[test]
    fn mean_walk_hops_matches_geometric_law() {
        // Hops before termination are geometric: E = (1 - alpha)/alpha.
        let g = two_cycle();
        let alpha = 0.2;
        let rng = WalkRng::new(123);
        let walks = 100_000u64;
        let total: u64 = (0..walks)
            .map(|j| walk_with_hops(&g, 0, alpha, &mut rng.stream(0, j)).1 as u64)
            .sum();
        let mean = total as f64 / walks as f64;
        let expected = (1.0 - alpha) / alpha;
        assert!((mean - expected).abs() < 0.05 * expected, "mean = {mean}");
        // Total draws per walk (hops + final stop) stay below 1/alpha on average.
        assert!(mean + 1.0 <= 1.0 / alpha * 1.05);
    }

    #[test]
    fn bounded_draws_cover_range_uniformly() {
        let mut stream = WalkRng::new(77).stream(0, 0);
        let mut counts = [0u64; 7];
        for _ in 0..70_000 {
            counts[stream.next_below(7) as usize] += 1;
        }
        for &c in &counts {
            let frac = c as f64 / 70_000.0;
            assert!((frac - 1.0 / 7.0).abs() < 0.01, "frac = {frac}");
        }
    }
}
