//! Direct graph computations on a network, independent of the model.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use super::network::{Dir, NetworkSpec};

/// Oriented blocks one step ahead of an oriented block.
pub fn next_states(net: &NetworkSpec, block: usize, dir: Dir) -> Vec<(usize, Dir)> {
    let f = net.exit_frontier(block, dir);
    net.next[block][dir.index()]
        .iter()
        .map(|&b2| (b2, net.entry_dir(b2, f)))
        .collect()
}

/// Oriented blocks reachable in one step or more.
pub fn reachable(net: &NetworkSpec, block: usize, dir: Dir) -> BTreeSet<(usize, Dir)> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<_> = next_states(net, block, dir).into();
    while let Some(s) = queue.pop_front() {
        if seen.insert(s) {
            queue.extend(next_states(net, s.0, s.1));
        }
    }
    seen
}

/// Whether position 2 lies ahead of position 1 when travelling in `dir1`.
pub fn pos_afterwards(net: &NetworkSpec, dir1: Dir, block1: usize, abs1: i64, block2: usize, abs2: i64) -> bool {
    if block1 == block2 {
        return match dir1 {
            Dir::Up => abs1 <= abs2,
            Dir::Down => abs2 <= abs1,
        };
    }
    reachable(net, block1, dir1).iter().any(|&(b, _)| b == block2)
}

/// Shortest entry distance of every oriented block reachable from a
/// position, Dijkstra over (block, direction).
fn entry_distances(net: &NetworkSpec, block: usize, dir: Dir, abs: i64) -> BTreeMap<(usize, Dir), i64> {
    let len = net.blocks[block].len;
    let exit = match dir {
        Dir::Up => len - abs,
        Dir::Down => abs,
    };
    let mut best = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    for s in next_states(net, block, dir) {
        heap.push(Reverse((exit, s)));
    }
    while let Some(Reverse((e, s))) = heap.pop() {
        if best.contains_key(&s) {
            continue;
        }
        best.insert(s, e);
        let e2 = e + net.blocks[s.0].len;
        for t in next_states(net, s.0, s.1) {
            if !best.contains_key(&t) {
                heap.push(Reverse((e2, t)));
            }
        }
    }
    best
}

/// Shortest travel distance from a position to a later position.
pub fn min_distance(net: &NetworkSpec, dir: Dir, block: usize, abs: i64, block2: usize, abs2: i64) -> Option<i64> {
    if block == block2 && pos_afterwards(net, dir, block, abs, block2, abs2) {
        return Some((abs2 - abs).abs());
    }
    let len2 = net.blocks[block2].len;
    entry_distances(net, block, dir, abs)
        .into_iter()
        .filter(|((b, _), _)| *b == block2)
        .map(|((_, d), e)| match d {
            Dir::Up => e + abs2,
            Dir::Down => e + len2 - abs2,
        })
        .min()
}

/// Integer positions within `m` metres ahead of a position, as merged closed
/// intervals per block.
pub fn zone(net: &NetworkSpec, block: usize, dir: Dir, abs: i64, m: i64) -> BTreeMap<usize, Vec<(i64, i64)>> {
    let mut raw: BTreeMap<usize, Vec<(i64, i64)>> = BTreeMap::new();
    let len = net.blocks[block].len;
    let (lo, hi) = match dir {
        Dir::Up => (abs, abs + m),
        Dir::Down => (abs - m, abs),
    };
    raw.entry(block).or_default().push((lo.max(0), hi.min(len)));
    for ((b, d), e) in entry_distances(net, block, dir, abs) {
        if e > m {
            continue;
        }
        let len = net.blocks[b].len;
        let iv = match d {
            Dir::Up => (0, (m - e).min(len)),
            Dir::Down => ((len - (m - e)).max(0), len),
        };
        raw.entry(b).or_default().push(iv);
    }
    raw.into_iter()
        .filter_map(|(b, ivs)| {
            let merged = merge(ivs);
            (!merged.is_empty()).then_some((b, merged))
        })
        .collect()
}

fn merge(mut ivs: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    ivs.retain(|(lo, hi)| lo <= hi);
    ivs.sort();
    let mut out: Vec<(i64, i64)> = Vec::new();
    for (lo, hi) in ivs {
        match out.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::railway_model::network::{generate_network, GenParams};

    #[test]
    fn merging_intervals() {
        assert_eq!(merge(vec![(3, 5), (0, 2), (7, 6), (4, 9)]), vec![(0, 9)]);
        assert_eq!(merge(vec![(0, 1), (3, 4)]), vec![(0, 1), (3, 4)]);
    }

    #[test]
    fn linear_distances() {
        let net = generate_network(1, &GenParams::linear(3)).unwrap();
        let l0 = net.blocks[0].len;
        assert!(pos_afterwards(&net, Dir::Up, 0, 2, 2, 0));
        assert!(!pos_afterwards(&net, Dir::Down, 0, 2, 2, 0));
        assert_eq!(min_distance(&net, Dir::Up, 0, 1, 1, 2), Some(l0 - 1 + 2));
        assert_eq!(min_distance(&net, Dir::Down, 0, 1, 1, 2), None);
        let z = zone(&net, 0, Dir::Up, 1, 1000);
        assert_eq!(z[&0], vec![(1, l0)]);
        assert_eq!(z[&2], vec![(0, net.blocks[2].len)]);
    }
}
