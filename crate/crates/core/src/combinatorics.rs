//! Edge boundaries and exact cut ratios by exhaustive enumeration.
//!
//! Subsets are visited in reflected Gray-code order so that each step adds or
//! removes one vertex and the boundary is updated in O(1) from adjacency
//! bitmasks. With the default cap of 20 vertices this is about 10^6 subsets.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, GroundedSystem, VertexSet};

pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Hard limit imposed by the 64-bit subset masks.
const MASK_BITS: usize = 63;

/// Exact minimum of `|∂X| / |X|` and the lexicographically smallest minimiser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactRatio {
    #[serde(serialize_with = "serialize_ratio")]
    pub value: Ratio<u64>,
    pub set: VertexSet,
}

impl ExactRatio {
    pub fn to_f64(&self) -> f64 {
        *self.value.numer() as f64 / *self.value.denom() as f64
    }
}

pub(crate) fn serialize_ratio<S: serde::Serializer>(
    r: &Ratio<u64>,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Number of edges with exactly one endpoint in `set`.
pub fn edge_boundary(g: &Graph, set: &VertexSet) -> usize {
    let mask = set.mask(g.n());
    g.edges()
        .iter()
        .filter(|&&(u, v)| mask[u] != mask[v])
        .count()
}

/// `i(G) = min |∂A| / |A|` over nonempty `A` with `|A| <= n/2`.
pub fn isoperimetric_constant_exact(g: &Graph, cap: usize) -> Result<ExactRatio> {
    let n = g.n();
    if n > cap.min(MASK_BITS) {
        return Err(Error::CapExceeded {
            what: "isoperimetric constant (use the Monte Carlo checks for larger graphs)",
            size: n,
            cap: cap.min(MASK_BITS),
        });
    }
    if n < 2 {
        return Err(Error::InvalidInput(
            "isoperimetric constant needs at least 2 vertices".into(),
        ));
    }
    let masks = g.adjacency_masks().expect("n <= 63");
    let degrees: Vec<u64> = g.degrees().into_iter().map(|d| d as u64).collect();
    let (b, s, mask) = gray_min_ratio(&degrees, &masks, n / 2).expect("n >= 2 gives a candidate");
    Ok(ExactRatio {
        value: Ratio::new(b, s),
        set: mask_to_set(mask, |i| i),
    })
}

/// Minimum of `|∂X| / |X|` over nonempty `X ⊆ V∖S`, with `∂X` counted in the
/// full graph (edges into `S` included).
pub fn min_cut_ratio_exact(sys: &GroundedSystem, cap: usize) -> Result<ExactRatio> {
    let m = sys.floating_count();
    if m > cap.min(MASK_BITS) {
        return Err(Error::CapExceeded {
            what: "minimum cut ratio over floating subsets",
            size: m,
            cap: cap.min(MASK_BITS),
        });
    }
    let g = sys.graph();
    let floating = sys.floating();
    let degrees: Vec<u64> = floating.iter().map(|&v| g.degree(v) as u64).collect();
    let masks: Vec<u64> = floating
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter_map(|&w| sys.floating_index(w))
                .fold(0u64, |acc, j| acc | (1 << j))
        })
        .collect();
    let (b, s, mask) = gray_min_ratio(&degrees, &masks, m).expect("m >= 1 gives a candidate");
    Ok(ExactRatio {
        value: Ratio::new(b, s),
        set: mask_to_set(mask, |i| floating[i]),
    })
}

/// `|∂X| / |X|` for an arbitrary candidate set.
pub fn cut_ratio(g: &Graph, set: &VertexSet) -> Option<Ratio<u64>> {
    (!set.is_empty()).then(|| Ratio::new(edge_boundary(g, set) as u64, set.len() as u64))
}

fn mask_to_set(mask: u64, label: impl Fn(usize) -> usize) -> VertexSet {
    (0..64).filter(|&i| mask >> i & 1 == 1).map(label).collect()
}

/// Is the sorted member list of `a` lexicographically smaller than that of `b`?
///
/// Bit positions must be ordered like the labels they stand for.
fn lex_less(a: u64, b: u64) -> bool {
    if a == b {
        return false;
    }
    let i = (a ^ b).trailing_zeros();
    let above = !((1u64 << i) | ((1u64 << i) - 1));
    if a >> i & 1 == 1 {
        // a has i, b does not: b is smaller only if it has nothing beyond i
        b & above != 0
    } else {
        a & above == 0
    }
}

/// Gray-code walk over all nonempty subsets of `0..m` with size at most
/// `max_size`; returns `(boundary, size, mask)` of the minimum-ratio subset.
fn gray_min_ratio(degrees: &[u64], masks: &[u64], max_size: usize) -> Option<(u64, u64, u64)> {
    let m = degrees.len();
    let mut set = 0u64;
    let mut boundary: i64 = 0;
    let mut size: u64 = 0;
    let mut best: Option<(u64, u64, u64)> = None;
    for k in 1u64..(1u64 << m) {
        let bit = k.trailing_zeros() as usize;
        let flag = 1u64 << bit;
        let deg = degrees[bit] as i64;
        if set & flag == 0 {
            let inside = (masks[bit] & set).count_ones() as i64;
            boundary += deg - 2 * inside;
            set |= flag;
            size += 1;
        } else {
            set &= !flag;
            let inside = (masks[bit] & set).count_ones() as i64;
            boundary += 2 * inside - deg;
            size -= 1;
        }
        if size == 0 || size as usize > max_size {
            continue;
        }
        let b = boundary as u64;
        best = match best {
            None => Some((b, size, set)),
            Some((bb, bs, bm)) => {
                let lhs = b * bs;
                let rhs = bb * size;
                if lhs < rhs || (lhs == rhs && lex_less(set, bm)) {
                    Some((b, size, set))
                } else {
                    Some((bb, bs, bm))
                }
            }
        };
    }
    best
}
