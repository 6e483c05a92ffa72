//! Whole-relation closure and iteration over dense node ids.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::value::{relation_slice, Value};

struct Dense {
    nodes: Vec<Value>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Dense {
    /// `rel` must be a canonical relation (sorted pairs).
    fn new(rel: &[Value]) -> Dense {
        let mut nodes: Vec<Value> = Vec::with_capacity(rel.len() * 2);
        for p in rel {
            let (l, r) = p.as_pair().expect("relation of pairs");
            nodes.push(l.clone());
            nodes.push(r.clone());
        }
        nodes.sort_unstable();
        nodes.dedup();
        let id = |v: &Value| nodes.binary_search(v).expect("node") as u32;
        let mut offsets = vec![0usize; nodes.len() + 1];
        let mut targets = Vec::with_capacity(rel.len());
        for p in rel {
            let (l, r) = p.as_pair().expect("relation of pairs");
            offsets[id(l) as usize + 1] += 1;
            targets.push(id(r));
        }
        for i in 0..nodes.len() {
            offsets[i + 1] += offsets[i];
        }
        Dense {
            nodes,
            offsets,
            targets,
        }
    }

    fn succ(&self, n: u32) -> &[u32] {
        &self.targets[self.offsets[n as usize]..self.offsets[n as usize + 1]]
    }

    fn sources(&self) -> Vec<u32> {
        (0..self.nodes.len() as u32).filter(|n| !self.succ(*n).is_empty()).collect()
    }
}

/// Nodes reachable in one or more steps from `src`, ascending.
fn reach(d: &Dense, src: u32, seen: &mut [u32], stamp: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut stack: Vec<u32> = d.succ(src).to_vec();
    while let Some(n) = stack.pop() {
        if seen[n as usize] == stamp {
            continue;
        }
        seen[n as usize] = stamp;
        out.push(n);
        stack.extend(d.succ(n).iter().filter(|m| seen[**m as usize] != stamp));
    }
    out.sort_unstable();
    out
}

/// Transitive closure of a canonical relation, as a canonical relation.
/// Returns `Err(n)` once the result would exceed `limit` pairs, with `n` the
/// size reached.
pub fn closure1_dense(rel: &[Value], limit: usize) -> Result<Vec<Value>, usize> {
    let d = Dense::new(rel);
    let sources = d.sources();
    let per_source: Vec<Vec<u32>> = sources
        .par_chunks(64)
        .flat_map_iter(|chunk| {
            let mut seen = vec![u32::MAX; d.nodes.len()];
            chunk
                .iter()
                .enumerate()
                .map(|(i, s)| reach(&d, *s, &mut seen, i as u32))
                .collect::<Vec<_>>()
        })
        .collect();
    let total: usize = per_source.iter().map(Vec::len).sum();
    if total > limit {
        return Err(total);
    }
    let mut out = Vec::with_capacity(total);
    for (s, targets) in sources.iter().zip(per_source) {
        for t in targets {
            out.push(Value::pair(d.nodes[*s as usize].clone(), d.nodes[t as usize].clone()));
        }
    }
    Ok(out)
}

/// `n`-fold composition of a canonical relation; `n = 0` gives the identity
/// on its domain and range.
pub fn iterate_relation(rel: &[Value], n: u64, limit: usize) -> Result<Vec<Value>, usize> {
    let d = Dense::new(rel);
    if n == 0 {
        return Ok(d.nodes.iter().map(|v| Value::pair(v.clone(), v.clone())).collect());
    }
    let mut out = Vec::new();
    let mut mark = vec![u64::MAX; d.nodes.len()];
    let mut tick = 0u64;
    for s in d.sources() {
        let mut frontier = vec![s];
        for _ in 0..n {
            tick += 1;
            let mut next = Vec::new();
            for f in &frontier {
                for t in d.succ(*f) {
                    if mark[*t as usize] != tick {
                        mark[*t as usize] = tick;
                        next.push(*t);
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        frontier.sort_unstable();
        for t in frontier {
            out.push(Value::pair(d.nodes[s as usize].clone(), d.nodes[t as usize].clone()));
            if out.len() > limit {
                return Err(out.len());
            }
        }
    }
    Ok(out)
}

const LABELINGS: usize = 3;

/// Reachability queries on `closure1(rel)` without materializing it:
/// strongly connected components, then randomized post-order interval
/// labels on the condensation. A label not nested in the source's proves
/// unreachability; otherwise a depth-first search pruned by the labels
/// decides.
pub struct ReachIndex {
    nodes: Vec<Value>,
    comp: Vec<u32>,
    cyclic: Vec<bool>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    /// Per component and labeling: (lowest rank below, own rank).
    labels: Vec<[(u32, u32); LABELINGS]>,
}

impl ReachIndex {
    /// `rel` must be a canonical relation.
    pub fn new(rel: &[Value]) -> ReachIndex {
        let d = Dense::new(rel);
        let (comp, count) = components(&d);
        let mut cyclic = vec![false; count];
        let mut size = vec![0u32; count];
        for &c in &comp {
            size[c as usize] += 1;
        }
        let mut edges = Vec::new();
        for v in 0..d.nodes.len() as u32 {
            for &w in d.succ(v) {
                let (cv, cw) = (comp[v as usize], comp[w as usize]);
                if cv == cw {
                    cyclic[cv as usize] = true;
                } else {
                    edges.push((cv, cw));
                }
            }
        }
        for (c, &n) in size.iter().enumerate() {
            cyclic[c] |= n > 1;
        }
        edges.sort_unstable();
        edges.dedup();
        let mut offsets = vec![0usize; count + 1];
        for &(a, _) in &edges {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..count {
            offsets[i + 1] += offsets[i];
        }
        let targets = edges.iter().map(|&(_, b)| b).collect();
        let mut index = ReachIndex {
            nodes: d.nodes,
            comp,
            cyclic,
            offsets,
            targets,
            labels: vec![[(0, 0); LABELINGS]; count],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for k in 0..LABELINGS {
            index.label(k, &mut rng);
        }
        index
    }

    fn succ(&self, c: u32) -> &[u32] {
        &self.targets[self.offsets[c as usize]..self.offsets[c as usize + 1]]
    }

    fn label(&mut self, k: usize, rng: &mut ChaCha8Rng) {
        let count = self.cyclic.len();
        let mut roots: Vec<u32> = (0..count as u32).collect();
        roots.shuffle(rng);
        let mut seen = vec![false; count];
        let mut rank = 0u32;
        let mut stack: Vec<(u32, Vec<u32>, usize)> = Vec::new();
        for r in roots {
            if seen[r as usize] {
                continue;
            }
            seen[r as usize] = true;
            let mut ch = self.succ(r).to_vec();
            ch.shuffle(rng);
            stack.push((r, ch, 0));
            while let Some(top) = stack.last_mut() {
                if top.2 < top.1.len() {
                    let c = top.1[top.2];
                    top.2 += 1;
                    if !seen[c as usize] {
                        seen[c as usize] = true;
                        let mut ch = self.succ(c).to_vec();
                        ch.shuffle(rng);
                        stack.push((c, ch, 0));
                    }
                    continue;
                }
                let (v, ch, _) = stack.pop().expect("non-empty");
                let low = ch.iter().map(|&c| self.labels[c as usize][k].0).min().unwrap_or(rank).min(rank);
                self.labels[v as usize][k] = (low, rank);
                rank += 1;
            }
        }
    }

    fn nested(&self, inner: u32, outer: u32) -> bool {
        let (a, b) = (&self.labels[inner as usize], &self.labels[outer as usize]);
        (0..LABELINGS).all(|k| b[k].0 <= a[k].0 && a[k].1 <= b[k].1)
    }

    /// Whether `dst` is reachable from `src` in one step or more, and the
    /// number of components visited to decide it.
    pub fn reaches(&self, src: &Value, dst: &Value) -> (bool, usize) {
        let (Ok(s), Ok(t)) = (self.nodes.binary_search(src), self.nodes.binary_search(dst)) else {
            return (false, 0);
        };
        let (cs, ct) = (self.comp[s], self.comp[t]);
        if cs == ct {
            return (self.cyclic[cs as usize], 1);
        }
        if !self.nested(ct, cs) {
            return (false, 1);
        }
        let mut seen = HashSet::from([cs]);
        let mut stack = vec![cs];
        while let Some(c) = stack.pop() {
            for &n in self.succ(c) {
                if n == ct {
                    return (true, seen.len());
                }
                if self.nested(ct, n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        (false, seen.len())
    }
}

/// Tarjan's algorithm, iteratively. Returns the component of every node
/// and the number of components.
fn components(d: &Dense) -> (Vec<u32>, usize) {
    const NONE: u32 = u32::MAX;
    let n = d.nodes.len();
    let mut index = vec![NONE; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![NONE; n];
    let mut stack = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let (mut next, mut count) = (0u32, 0u32);
    for s in 0..n as u32 {
        if index[s as usize] != NONE {
            continue;
        }
        index[s as usize] = next;
        low[s as usize] = next;
        next += 1;
        stack.push(s);
        on_stack[s as usize] = true;
        call.push((s, 0));
        while let Some(&(v, i)) = call.last() {
            let succ = d.succ(v);
            if i < succ.len() {
                call.last_mut().expect("non-empty").1 += 1;
                let w = succ[i] as usize;
                if index[w] == NONE {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v as usize] = low[v as usize].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(p, _)) = call.last() {
                low[p as usize] = low[p as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("on stack");
                    on_stack[w as usize] = false;
                    comp[w as usize] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    (comp, count as usize)
}

/// Right components of the pairs of `rel` whose left component is `x`.
pub(crate) fn successors<'r>(rel: &'r [Value], x: &Value) -> impl Iterator<Item = Value> + 'r {
    relation_slice(rel, x).iter().map(|p| p.as_pair().expect("pair").1.clone())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;

    fn rel(pairs: &[(i64, i64)]) -> Vec<Value> {
        Value::set_from(pairs.iter().map(|(a, b)| Value::pair(Value::int(*a), Value::int(*b))).collect())
            .as_set()
            .unwrap()
            .to_vec()
    }

    #[test]
    fn closure_examples() {
        assert_eq!(closure1_dense(&rel(&[(1, 2), (2, 3)]), 100), Ok(rel(&[(1, 2), (2, 3), (1, 3)])));
        assert_eq!(
            closure1_dense(&rel(&[(1, 2), (2, 1)]), 100),
            Ok(rel(&[(1, 2), (2, 1), (1, 1), (2, 2)]))
        );
        assert_eq!(closure1_dense(&[], 100), Ok(vec![]));
        assert_eq!(closure1_dense(&rel(&[(1, 2), (2, 3)]), 2), Err(3));
    }

    #[test]
    fn iterate_examples() {
        let r = rel(&[(1, 2), (2, 3)]);
        assert_eq!(iterate_relation(&r, 1, 100), Ok(r.clone()));
        assert_eq!(iterate_relation(&r, 2, 100), Ok(rel(&[(1, 3)])));
        assert_eq!(iterate_relation(&r, 3, 100), Ok(vec![]));
        assert_eq!(iterate_relation(&r, 0, 100), Ok(rel(&[(1, 1), (2, 2), (3, 3)])));
    }

    #[test]
    fn reach_index_examples() {
        let r = rel(&[(1, 2), (2, 3), (3, 2), (4, 5), (6, 6)]);
        let ix = ReachIndex::new(&r);
        let q = |a: i64, b: i64| ix.reaches(&Value::int(a), &Value::int(b)).0;
        assert!(q(1, 2) && q(1, 3) && q(2, 2) && q(3, 3) && q(4, 5) && q(6, 6));
        assert!(!q(1, 1) && !q(2, 1) && !q(5, 4) && !q(1, 4) && !q(4, 4) && !q(7, 1));
    }

    fn bfs(pairs: &[(i64, i64)], from: i64) -> BTreeSet<i64> {
        let mut seen = BTreeSet::new();
        let mut queue: Vec<i64> = pairs.iter().filter(|p| p.0 == from).map(|p| p.1).collect();
        while let Some(x) = queue.pop() {
            if seen.insert(x) {
                queue.extend(pairs.iter().filter(|p| p.0 == x).map(|p| p.1));
            }
        }
        seen
    }

    proptest! {
        #[test]
        fn closure_matches_bfs(pairs in prop::collection::vec((0i64..30, 0i64..30), 0..80)) {
            let want: Vec<(i64, i64)> = (0..30)
                .flat_map(|a| bfs(&pairs, a).into_iter().map(move |b| (a, b)))
                .collect();
            prop_assert_eq!(closure1_dense(&rel(&pairs), usize::MAX), Ok(rel(&want)));
        }

        #[test]
        fn reach_index_matches_bfs(pairs in prop::collection::vec((0i64..40, 0i64..40), 0..120)) {
            let ix = ReachIndex::new(&rel(&pairs));
            for a in 0..40 {
                let want = bfs(&pairs, a);
                for b in 0..40 {
                    prop_assert_eq!(ix.reaches(&Value::int(a), &Value::int(b)).0, want.contains(&b), "{} -> {}", a, b);
                }
            }
        }

        #[test]
        fn iterate_is_repeated_composition(pairs in prop::collection::vec((0i64..12, 0i64..12), 0..30), n in 1u64..5) {
            let mut want: BTreeSet<(i64, i64)> = pairs.iter().copied().collect();
            for _ in 1..n {
                want = want
                    .iter()
                    .flat_map(|&(a, b)| pairs.iter().filter(move |p| p.0 == b).map(move |p| (a, p.1)))
                    .collect();
            }
            let want: Vec<_> = want.into_iter().collect();
            prop_assert_eq!(iterate_relation(&rel(&pairs), n, usize::MAX), Ok(rel(&want)));
        }
    }
}
