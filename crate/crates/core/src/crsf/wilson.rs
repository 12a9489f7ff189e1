//! Cycle-popping sampler for oriented incompressible CRSFs and the Monte
//! Carlo height law built on it.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{dual_crsf, Crsf};
use crate::dimer::{class_of_pair, temperley_forward};
use crate::error::{Error, Result};
use crate::graph::{TemperleyanGraph, TorusGraph};
use crate::homology::{Crossing, HomologyClass};
use crate::scalar::Real;

const STEP_CAP: u64 = 1_000_000_000;

/// Samples an oriented incompressible CRSF with probability proportional to
/// the product of its conductances.
///
/// Vertices are processed in id order. Each walk erases loops with zero
/// homology class and freezes the first loop with a nonzero class as a root
/// cycle; it stops early when it runs into the forest built so far.
pub fn wilson_sample<T: Real>(g: &TorusGraph<T>, seed: u64) -> Result<Crsf> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Walker::new(g).sample(&mut rng)
}

struct Walker<'a, T> {
    g: &'a TorusGraph<T>,
    // positive out-edges and their cumulative conductances, per vertex
    steps: Vec<(Vec<usize>, Vec<f64>)>,
}

impl<'a, T: Real> Walker<'a, T> {
    fn new(g: &'a TorusGraph<T>) -> Self {
        let steps = (0..g.vertex_count())
            .map(|v| {
                let mut acc = 0.0;
                let (edges, cum) = g
                    .rotation(v)
                    .iter()
                    .filter(|&&e| g.edge(e).conductance > T::zero())
                    .map(|&e| {
                        acc += g.edge(e).conductance.as_f64();
                        (e, acc)
                    })
                    .unzip();
                (edges, cum)
            })
            .collect();
        Walker { g, steps }
    }

    fn step(&self, v: usize, rng: &mut ChaCha8Rng) -> usize {
        let (edges, cum) = &self.steps[v];
        let x = rng.gen::<f64>() * cum[cum.len() - 1];
        let k = cum.partition_point(|&c| c <= x).min(edges.len() - 1);
        edges[k]
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Crsf> {
        let g = self.g;
        let nv = g.vertex_count();
        let mut in_forest = vec![false; nv];
        let mut choice = vec![usize::MAX; nv];
        let mut position = vec![usize::MAX; nv];
        let mut steps = 0u64;

        for start in 0..nv {
            if in_forest[start] {
                continue;
            }
            // path[i] is a vertex, edges[i] leaves it, lift[i] is its crossing from start
            let mut path = vec![start];
            let mut edges: Vec<usize> = Vec::new();
            let mut lift = vec![Crossing::ZERO];
            position[start] = 0;
            loop {
                steps += 1;
                if steps > STEP_CAP {
                    return Err(Error::Invariant(format!("sampler exceeded {STEP_CAP} steps")));
                }
                let u = path[path.len() - 1];
                let e = self.step(u, rng);
                let w = g.edge(e).head;
                let reached = lift[lift.len() - 1] + g.edge(e).crossing;
                if in_forest[w] {
                    edges.push(e);
                    break;
                }
                let k = position[w];
                if k == usize::MAX {
                    position[w] = path.len();
                    path.push(w);
                    edges.push(e);
                    lift.push(reached);
                    continue;
                }
                if (reached - lift[k]).is_zero() {
                    // contractible loop: erase it
                    for &x in &path[k + 1..] {
                        position[x] = usize::MAX;
                    }
                    path.truncate(k + 1);
                    edges.truncate(k);
                    lift.truncate(k + 1);
                } else {
                    // noncontractible loop: freeze it as a root cycle
                    edges.push(e);
                    break;
                }
            }
            for (&x, &e) in path.iter().zip(&edges) {
                choice[x] = e;
                in_forest[x] = true;
                position[x] = usize::MAX;
            }
        }
        Crsf::from_choice(g, choice)
    }
}

/// Length of the shortest closed walk with nonzero homology class on
/// positive-conductance edges.
pub fn noncontractible_girth<T: Real>(g: &TorusGraph<T>) -> Option<usize> {
    let nv = g.vertex_count();
    let mut best: Option<usize> = None;
    for s in 0..nv {
        let mut depth = HashMap::from([((s, Crossing::ZERO), 0usize)]);
        let mut queue = VecDeque::from([(s, Crossing::ZERO)]);
        while let Some(state) = queue.pop_front() {
            let d = depth[&state];
            if best.is_some_and(|b| d + 1 >= b) || d >= nv {
                break;
            }
            for &e in g.rotation(state.0) {
                let edge = g.edge(e);
                if !(edge.conductance > T::zero()) {
                    continue;
                }
                let next = (edge.head, state.1 + edge.crossing);
                if next.0 == s && !next.1.is_zero() {
                    best = Some(d + 1);
                    break;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = depth.entry(next) {
                    e.insert(d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalEntry {
    pub r: i64,
    pub s: i64,
    pub p: f64,
    pub stderr: f64,
}

/// Empirical law of `[m]` with binomial standard errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalLaw {
    pub samples: usize,
    pub seed: u64,
    pub law: Vec<EmpiricalEntry>,
}

impl EmpiricalLaw {
    pub fn get(&self, c: HomologyClass) -> Option<&EmpiricalEntry> {
        self.law.iter().find(|e| e.r == c.r && e.s == c.s)
    }
}

/// Monte Carlo law of the height-change class.
///
/// Sample `i` uses stream `i` of the seeded generator, so the output does
/// not depend on the thread count. A forest with `k` root cycles has `2^k`
/// dual partners of equal weight, so forests are accepted with probability
/// `2^(k - K)` where `K` bounds the number of root cycles; the dual
/// orientations are then uniform.
pub fn mc_height_law<T: Real>(t: &TemperleyanGraph<T>, samples: usize, seed: u64) -> Result<EmpiricalLaw> {
    if samples < 100 {
        return Err(Error::Precondition(format!("need at least 100 samples, got {samples}")));
    }
    let g = t.primal();
    if !g.is_symmetric() {
        return Err(Error::Precondition("Monte Carlo law requires symmetric conductances".into()));
    }
    let girth = noncontractible_girth(g).ok_or_else(|| Error::NoAdmissibleCycle("no noncontractible cycle".into()))?;
    let max_cycles = (g.vertex_count() / girth) as i32;
    let walker = Walker::new(g);

    let classes: Vec<HomologyClass> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let f = loop {
                let f = walker.sample(&mut rng)?;
                let accept = 0.5f64.powi(max_cycles - f.cycle_count() as i32);
                if rng.gen::<f64>() < accept {
                    break f;
                }
            };
            let o: Vec<i8> = (0..f.cycle_count()).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            let fd = dual_crsf(g, t.dual(), &f, &o)?;
            debug_assert!(temperley_forward(t, &f, &fd).is_ok());
            class_of_pair(&f, &fd)
        })
        .collect::<Result<_>>()?;

    let mut counts: BTreeMap<HomologyClass, usize> = BTreeMap::new();
    for c in classes {
        *counts.entry(c).or_default() += 1;
    }
    let n = samples as f64;
    let law = counts
        .into_iter()
        .map(|(c, k)| {
            let p = k as f64 / n;
            EmpiricalEntry { r: c.r, s: c.s, p, stderr: (p * (1.0 - p) / n).sqrt() }
        })
        .collect();
    Ok(EmpiricalLaw { samples, seed, law })
}
