use std::collections::{HashMap, VecDeque};

use super::TorusGraph;
use crate::homology::Crossing;
use crate::scalar::Real;

/// Shortest simple directed cycle whose crossing sum is `target`, using only
/// positive-conductance edges between vertices accepted by `allowed`.
///
/// Breadth-first search in the universal cover from every admissible start;
/// ties go to the smallest start vertex.
pub fn shortest_cycle_in_class<T: Real>(
    g: &TorusGraph<T>,
    target: Crossing,
    allowed: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let nv = g.vertex_count();
    let mut best: Option<Vec<usize>> = None;
    for start in (0..nv).filter(|&v| allowed(v)) {
        let limit = best.as_ref().map_or(nv, |b| b.len() - 1);
        if let Some(cycle) = bfs_from(g, start, target, allowed, limit) {
            if is_simple(g, &cycle) {
                best = Some(cycle);
            }
        }
    }
    best
}

fn bfs_from<T: Real>(
    g: &TorusGraph<T>,
    start: usize,
    target: Crossing,
    allowed: &dyn Fn(usize) -> bool,
    max_len: usize,
) -> Option<Vec<usize>> {
    let mut parent: HashMap<(usize, Crossing), usize> = HashMap::new();
    let origin = (start, Crossing::ZERO);
    let mut depth = HashMap::from([(origin, 0usize)]);
    let mut queue = VecDeque::from([origin]);
    while let Some(state) = queue.pop_front() {
        let d = depth[&state];
        if d >= max_len {
            break;
        }
        for &e in g.rotation(state.0) {
            let edge = g.edge(e);
            if !(edge.conductance > T::zero()) || !allowed(edge.head) {
                continue;
            }
            let next = (edge.head, state.1 + edge.crossing);
            if depth.contains_key(&next) {
                continue;
            }
            depth.insert(next, d + 1);
            parent.insert(next, e);
            if next == (start, target) {
                let mut path = Vec::with_capacity(d + 1);
                let mut cur = next;
                while cur != origin {
                    let pe = parent[&cur];
                    path.push(pe);
                    let ed = g.edge(pe);
                    cur = (ed.tail, cur.1 - ed.crossing);
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(next);
        }
    }
    None
}

fn is_simple<T: Real>(g: &TorusGraph<T>, cycle: &[usize]) -> bool {
    let mut seen = vec![false; g.vertex_count()];
    cycle.iter().all(|&e| !std::mem::replace(&mut seen[g.edge(e).tail], true))
}
