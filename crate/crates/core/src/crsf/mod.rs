//! Oriented cycle-rooted spanning forests (CRSFs), stored as vector fields.
//!
//! A vector field picks one outgoing edge per vertex. Its functional graph
//! has exactly one cycle per component, so it is the same data as an
//! oriented CRSF. Incompressible means every root cycle winds around the
//! torus.

mod wilson;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use wilson::{mc_height_law, noncontractible_girth, wilson_sample, EmpiricalEntry, EmpiricalLaw};

use crate::error::{Error, Result};
use crate::graph::TorusGraph;
use crate::homology::HomologyClass;
use crate::scalar::Real;

/// Largest number of vector fields [`enumerate_vector_fields`] will visit.
pub const ENUMERATION_LIMIT: f64 = 1e7;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Crsf {
    choice: Vec<usize>,
    cycles: Vec<Vec<usize>>,
    classes: Vec<HomologyClass>,
}

impl Crsf {
    /// Builds the forest from one chosen outgoing edge per vertex.
    pub fn from_choice<T: Real>(g: &TorusGraph<T>, choice: Vec<usize>) -> Result<Self> {
        let nv = g.vertex_count();
        if choice.len() != nv {
            return Err(Error::Precondition(format!("expected {nv} choices, got {}", choice.len())));
        }
        for (v, &e) in choice.iter().enumerate() {
            if e >= g.edge_count() || g.edge(e).tail != v {
                return Err(Error::Precondition(format!("edge {e} does not leave vertex {v}")));
            }
            if !(g.edge(e).conductance > T::zero()) {
                return Err(Error::Precondition(format!("edge {e} chosen at vertex {v} has zero conductance")));
            }
        }
        let cycles = functional_cycles(nv, |v| g.edge(choice[v]).head, |v| choice[v]);
        let classes = cycles
            .iter()
            .map(|c| c.iter().map(|&e| g.edge(e).crossing).sum::<crate::homology::Crossing>().class())
            .collect();
        Ok(Crsf { choice, cycles, classes })
    }

    /// Chosen outgoing edge of each vertex.
    pub fn choice(&self) -> &[usize] {
        &self.choice
    }

    /// Root cycles as edge lists, each starting at its smallest vertex,
    /// ordered by that vertex.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn classes(&self) -> &[HomologyClass] {
        &self.classes
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    /// Sum of the oriented root-cycle classes.
    pub fn total_class(&self) -> HomologyClass {
        self.classes.iter().copied().sum()
    }

    pub fn is_incompressible(&self) -> bool {
        self.classes.iter().all(|c| !c.is_zero())
    }

    pub fn weight<T: Real>(&self, g: &TorusGraph<T>) -> T {
        self.choice.iter().fold(T::one(), |w, &e| w * g.edge(e).conductance)
    }

    /// `Y(v)` for every vertex.
    pub fn successors<T: Real>(&self, g: &TorusGraph<T>) -> Vec<usize> {
        self.choice.iter().map(|&e| g.edge(e).head).collect()
    }

    /// JSON form: `{"Y": [[v, Y(v)], ...], "edges": [...]}`. The edge ids
    /// disambiguate parallel edges.
    pub fn to_json<T: Real>(&self, g: &TorusGraph<T>) -> serde_json::Value {
        let y: Vec<[usize; 2]> = self.successors(g).into_iter().enumerate().map(|(v, w)| [v, w]).collect();
        serde_json::json!({ "Y": y, "edges": self.choice })
    }

    pub fn from_json<T: Real>(g: &TorusGraph<T>, text: &str) -> Result<Self> {
        #[derive(Deserialize, Serialize)]
        struct Raw {
            #[serde(rename = "Y")]
            y: Vec<[usize; 2]>,
            edges: Vec<usize>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let f = Crsf::from_choice(g, raw.edges)?;
        let expected: Vec<[usize; 2]> = f.successors(g).into_iter().enumerate().map(|(v, w)| [v, w]).collect();
        if expected != raw.y {
            return Err(Error::Precondition("`Y` map disagrees with the edge list".into()));
        }
        Ok(f)
    }
}

/// Cycles of the functional graph `v -> next(v)`, reported as `label(v)`
/// sequences starting at each cycle's smallest vertex.
fn functional_cycles(n: usize, next: impl Fn(usize) -> usize, label: impl Fn(usize) -> usize) -> Vec<Vec<usize>> {
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; n];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        let mut v = s;
        while state[v] == 0 {
            state[v] = 1;
            v = next(v);
        }
        if state[v] == 1 {
            // v lies on a new cycle; it is the first vertex of it reached from s
            let mut cyc = vec![v];
            let mut w = next(v);
            while w != v {
                cyc.push(w);
                w = next(w);
            }
            let k = (0..cyc.len()).min_by_key(|&i| cyc[i]).unwrap_or(0);
            cyc.rotate_left(k);
            cycles.push(cyc);
        }
        let mut v = s;
        while state[v] == 1 {
            state[v] = 2;
            v = next(v);
        }
    }
    cycles.sort_by_key(|c| c[0]);
    cycles.into_iter().map(|c| c.into_iter().map(&label).collect()).collect()
}

/// Number of vector fields supported on positive-conductance edges.
pub fn vector_field_count<T: Real>(g: &TorusGraph<T>) -> f64 {
    (0..g.vertex_count()).map(|v| positive_out_edges(g, v).len() as f64).product()
}

fn positive_out_edges<T: Real>(g: &TorusGraph<T>, v: usize) -> Vec<usize> {
    let mut out: Vec<usize> = g.rotation(v).iter().copied().filter(|&e| g.edge(e).conductance > T::zero()).collect();
    out.sort_unstable();
    out
}

/// Every vector field (oriented CRSF, contractible cycles included), in
/// lexicographic order of the chosen edge ids.
pub fn enumerate_vector_fields<T: Real>(g: &TorusGraph<T>) -> Result<Vec<Crsf>> {
    let count = vector_field_count(g);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!("{count} vector fields exceed the limit {ENUMERATION_LIMIT}")));
    }
    let options: Vec<Vec<usize>> = (0..g.vertex_count()).map(|v| positive_out_edges(g, v)).collect();
    let nv = options.len();
    let mut digits = vec![0usize; nv];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        let choice = (0..nv).map(|v| options[v][digits[v]]).collect();
        out.push(Crsf::from_choice(g, choice)?);
        // odometer with the last vertex fastest
        let mut k = nv;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < options[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// All oriented incompressible CRSFs of `g`.
pub fn enumerate_crsfs<T: Real>(g: &TorusGraph<T>) -> Result<Vec<Crsf>> {
    Ok(enumerate_vector_fields(g)?.into_iter().filter(Crsf::is_incompressible).collect())
}

/// The dual CRSF of an incompressible `f`: it uses exactly the dual edges
/// crossing primal edges not in `f`. Root cycle `i` (ordered by smallest dual
/// vertex) is oriented along the canonical sign of the primal class when
/// `orientations[i] == 1`, against it when `-1`.
pub fn dual_crsf<T: Real>(g: &TorusGraph<T>, dual: &TorusGraph<T>, f: &Crsf, orientations: &[i8]) -> Result<Crsf> {
    if !f.is_incompressible() {
        return Err(Error::Precondition("dual CRSF requires an incompressible forest".into()));
    }
    if orientations.len() != f.cycle_count() || orientations.iter().any(|&o| o != 1 && o != -1) {
        return Err(Error::Precondition(format!("need {} orientations, each +1 or -1", f.cycle_count())));
    }
    let ne = g.edge_count();
    let nf = dual.vertex_count();
    let mut used = vec![false; ne];
    for &e in f.choice() {
        used[e] = true;
        used[g.reverse(e)] = true;
    }
    // dual support as an undirected multigraph: (neighbour, dual edge leaving this vertex)
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nf];
    for e in 0..ne {
        if !used[e] {
            let d = dual.edge(e);
            adj[d.tail].push((d.head, e));
        }
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; nf];
    let mut choice = vec![usize::MAX; nf];
    let mut leaves: VecDeque<usize> = (0..nf).filter(|&x| degree[x] == 1).collect();
    while let Some(x) = leaves.pop_front() {
        if removed[x] || degree[x] != 1 {
            continue;
        }
        let &(y, e) = adj[x]
            .iter()
            .find(|&&(y, _)| !removed[y])
            .ok_or_else(|| Error::Invariant("leaf without a live neighbour".into()))?;
        choice[x] = e;
        removed[x] = true;
        degree[y] -= 1;
        if degree[y] == 1 {
            leaves.push_back(y);
        }
    }
    if let Some(x) = (0..nf).find(|&x| !removed[x] && degree[x] != 2) {
        return Err(Error::Invariant(format!(
            "dual complement is not a cycle-rooted forest at face {x} (degree {})",
            degree[x]
        )));
    }

    let target = f.classes()[0].canonical_sign();
    let mut cycle_index = 0;
    for start in 0..nf {
        if removed[start] {
            continue;
        }
        // walk the remaining cycle once, never reusing the undirected edge we came by
        let mut walk = Vec::new();
        let mut x = start;
        let mut came_by = usize::MAX;
        loop {
            let &(y, e) = adj[x]
                .iter()
                .find(|&&(y, e)| (!removed[y] || y == start) && e != came_by)
                .ok_or_else(|| Error::Invariant("broken dual cycle".into()))?;
            walk.push(e);
            removed[x] = true;
            came_by = g.reverse(e);
            x = y;
            if x == start {
                break;
            }
        }
        let class = walk.iter().map(|&e| dual.edge(e).crossing).sum::<crate::homology::Crossing>().class();
        if class != target && class != -target {
            return Err(Error::Invariant(format!("dual cycle class {class} is not parallel to {target}")));
        }
        let want = if orientations[cycle_index] == 1 { target } else { -target };
        if class != want {
            walk = walk.iter().rev().map(|&e| g.reverse(e)).collect();
        }
        for &e in &walk {
            choice[dual.edge(e).tail] = e;
        }
        cycle_index += 1;
    }
    if cycle_index != f.cycle_count() {
        return Err(Error::Invariant(format!(
            "primal forest has {} root cycles but its dual has {cycle_index}",
            f.cycle_count()
        )));
    }
    Crsf::from_choice(dual, choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ConductanceProfile;
    use crate::homology::Crossing;

    fn sq(n: usize, shift: (i64, i64)) -> TorusGraph<f64> {
        TorusGraph::square(n, shift, ConductanceProfile::Uniform).unwrap()
    }

    #[test]
    fn two_by_two_vector_field_count() {
        let g = sq(2, (0, 2));
        let all = enumerate_vector_fields(&g).unwrap();
        assert_eq!(all.len(), 256);
        let crsfs = enumerate_crsfs(&g).unwrap();
        assert!(crsfs.iter().all(Crsf::is_incompressible));
        assert!(!crsfs.is_empty() && crsfs.len() < 256);
    }

    #[test]
    fn face_cycle_is_compressible() {
        let g = sq(3, (0, 3));
        // vertices 0,1,4,3 around the lower-left face: east, north, west, south
        let mut choice: Vec<usize> = (0..9).map(|v| 4 * v).collect();
        choice[0] = 0; // 0 -> 1 east
        choice[1] = 4 + 1; // 1 -> 4 north
        choice[4] = 16 + 2; // 4 -> 3 west
        choice[3] = 12 + 3; // 3 -> 0 south
        let f = Crsf::from_choice(&g, choice).unwrap();
        assert!(!f.is_incompressible());
        assert!(f.classes().contains(&HomologyClass::ZERO));
    }

    #[test]
    fn horizontal_wrap_is_a_class() {
        let g = sq(3, (0, 3));
        let choice: Vec<usize> = (0..9).map(|v| 4 * v).collect();
        let f = Crsf::from_choice(&g, choice).unwrap();
        assert!(f.is_incompressible());
        assert_eq!(f.classes(), &[HomologyClass::A; 3]);
    }

    #[test]
    fn cycle_classes_are_parallel() {
        let g = sq(2, (1, 2));
        for f in enumerate_crsfs(&g).unwrap() {
            let c0 = f.classes()[0].canonical_sign();
            assert!(f.classes().iter().all(|c| c.canonical_sign() == c0));
        }
    }

    #[test]
    fn duals_cover_complement() {
        let g = sq(2, (0, 2));
        let d = g.dual().unwrap();
        for f in enumerate_crsfs(&g).unwrap() {
            let k = f.cycle_count();
            let mut supports = std::collections::HashSet::new();
            let mut distinct = std::collections::HashSet::new();
            for mask in 0..(1u32 << k) {
                let o: Vec<i8> = (0..k).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                let fd = dual_crsf(&g, &d, &f, &o).unwrap();
                assert_eq!(fd.cycle_count(), k);
                assert!(fd.is_incompressible());
                let mut support: Vec<usize> = fd.choice().iter().map(|&e| e.min(g.reverse(e))).collect();
                support.sort();
                supports.insert(support);
                distinct.insert(fd.choice().to_vec());
                // each undirected edge is crossed by exactly one of F, F*
                let mut cover = vec![0; g.edge_count()];
                for &e in f.choice().iter().chain(fd.choice()) {
                    cover[e.min(g.reverse(e))] += 1;
                }
                for e in 0..g.edge_count() {
                    if e < g.reverse(e) {
                        assert_eq!(cover[e], 1);
                    }
                }
            }
            assert_eq!(supports.len(), 1);
            assert_eq!(distinct.len(), 1 << k);
        }
    }

    #[test]
    fn dual_rejects_compressible_forest() {
        let g = sq(3, (0, 3));
        let d = g.dual().unwrap();
        let mut choice: Vec<usize> = (0..9).map(|v| 4 * v).collect();
        choice[1] = 5;
        choice[4] = 18;
        choice[3] = 15;
        let f = Crsf::from_choice(&g, choice).unwrap();
        assert!(dual_crsf(&g, &d, &f, &vec![1; f.cycle_count()]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = sq(2, (0, 2));
        let f = enumerate_crsfs(&g).unwrap().swap_remove(7);
        let text = f.to_json(&g).to_string();
        assert_eq!(Crsf::from_json(&g, &text).unwrap(), f);
    }

    #[test]
    fn class_from_path_summation_matches() {
        let g = sq(3, (1, 2));
        for f in enumerate_vector_fields(&g).unwrap().iter().step_by(97) {
            // follow Y from each cycle's first vertex and add crossings directly
            for (cyc, class) in f.cycles().iter().zip(f.classes()) {
                let start = g.edge(cyc[0]).tail;
                let mut v = start;
                let mut total = Crossing::ZERO;
                loop {
                    let e = f.choice()[v];
                    total += g.edge(e).crossing;
                    v = g.edge(e).head;
                    if v == start {
                        break;
                    }
                }
                assert_eq!(total.class(), *class);
            }
        }
    }
}
