//! Small deterministic graph families used by tests and the CLI.

use super::Graph;

pub fn empty(n: usize) -> Graph {
    Graph::new(n, []).expect("n >= 1")
}

pub fn complete(n: usize) -> Graph {
    Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("n >= 1")
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|v| (v - 1, v))).expect("n >= 1")
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    Graph::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("n >= 3")
}

/// Star with centre 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    Graph::new(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("n >= 1")
}

/// Two cliques on `n/2` vertices each joined by one bridge.
///
/// The left clique is `0..n/2`, the right clique `n/2..n`, and the bridge
/// joins `n/2 - 1` to `n/2`.
pub fn dumbbell(n: usize) -> Graph {
    assert!(
        n >= 2 && n.is_multiple_of(2),
        "dumbbell needs an even vertex count"
    );
    let h = n / 2;
    let left = (0..h).flat_map(move |u| (u + 1..h).map(move |v| (u, v)));
    let right = (h..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)));
    Graph::new(n, left.chain(right).chain([(h - 1, h)])).expect("valid dumbbell")
}
