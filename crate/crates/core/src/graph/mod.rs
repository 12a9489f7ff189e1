//! Weighted directed graphs embedded on the torus `C/(Z + tau Z)`.
//!
//! Every directed edge carries the lattice translation (`Crossing`) by which
//! the head's representative must be moved to sit next to the tail in the
//! universal cover. Summing crossings along a closed walk gives its homology
//! class, so all topological bookkeeping is exact integer arithmetic.

mod cycles;
mod io;
mod temperleyan;

use std::collections::{HashMap, VecDeque};

use num_complex::Complex;

pub use cycles::shortest_cycle_in_class;
pub use io::{load_graph, parse_graph, write_graph};
pub use temperleyan::{Black, GEdge, Source, TemperleyanGraph};

use crate::error::{Error, Result};
use crate::homology::Crossing;
use crate::scalar::Real;

/// Torus modulus `tau` with `Im tau > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Modulus<T> {
    tau: Complex<T>,
}

impl<T: Real> Modulus<T> {
    pub fn new(tau: Complex<T>) -> Result<Self> {
        if !(tau.im > T::zero()) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::DegenerateTorus(format!("Im tau must be positive, got {tau}")));
        }
        Ok(Modulus { tau })
    }

    pub fn tau(&self) -> Complex<T> {
        self.tau
    }

    /// The lattice vector `a + b*tau`.
    pub fn translation(&self, c: Crossing) -> Complex<T> {
        Complex::new(T::lit(c.a as f64), T::zero()) + self.tau * T::lit(c.b as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub tail: usize,
    pub head: usize,
    pub conductance: T,
    pub crossing: Crossing,
}

/// Conductances for [`TorusGraph::square`].
#[derive(Clone, Debug)]
pub enum ConductanceProfile<T> {
    /// `1/4` on every directed edge (simple random walk).
    Uniform,
    /// One value per directed edge, in construction order
    /// (for each vertex `j*n + i`: east, north, west, south).
    PerEdge(Vec<T>),
}

/// Provenance tag of graphs produced by [`TorusGraph::square`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SquareLattice {
    pub n: usize,
    pub shift: (i64, i64),
    pub uniform: bool,
}

/// Validated cellular embedding of a directed weighted graph on a torus.
#[derive(Clone, Debug)]
pub struct TorusGraph<T> {
    modulus: Modulus<T>,
    positions: Vec<Complex<T>>,
    edges: Vec<Edge<T>>,
    reverse: Vec<usize>,
    rotation: Vec<Vec<usize>>,
    faces: Vec<Vec<usize>>,
    left_face: Vec<usize>,
    // lift of each edge's tail relative to the anchor of its left face
    face_offset: Vec<Crossing>,
    lattice: Option<SquareLattice>,
}

impl<T: Real> PartialEq for TorusGraph<T> {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.positions == other.positions && self.edges == other.edges
    }
}

impl<T: Real> TorusGraph<T> {
    /// Builds and validates a graph from raw parts.
    pub fn from_parts(modulus: Modulus<T>, positions: Vec<Complex<T>>, edges: Vec<Edge<T>>) -> Result<Self> {
        let nv = positions.len();
        if nv == 0 {
            return Err(Error::NonCellular("graph has no vertices".into()));
        }
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= nv || e.head >= nv {
                return Err(Error::Precondition(format!("edge {k} references a missing vertex")));
            }
            if !(e.conductance >= T::zero()) || !e.conductance.is_finite() {
                return Err(Error::Precondition(format!("edge {k} has invalid conductance {}", e.conductance)));
            }
            if e.tail == e.head {
                return Err(Error::NonCellular(format!("edge {k} is a self-loop")));
            }
        }

        let reverse = pair_reverses(&edges)?;
        let rotation = rotation_system(&modulus, &positions, &edges)?;
        let mut g = TorusGraph {
            modulus,
            positions,
            edges,
            reverse,
            rotation,
            faces: Vec::new(),
            left_face: Vec::new(),
            face_offset: Vec::new(),
            lattice: None,
        };
        g.trace_faces()?;
        g.check_irreducible()?;
        Ok(g)
    }

    /// Square lattice `(1/n) Z^2` modulo the lattice spanned by `1` and
    /// `(s_x + i s_y)/n`.
    pub fn square(n: usize, shift: (i64, i64), profile: ConductanceProfile<T>) -> Result<Self> {
        let (sx, sy) = shift;
        if sy <= 0 {
            return Err(Error::DegenerateTorus(format!("s_y must be positive, got {sy}")));
        }
        if n <= 1 {
            return Err(Error::DegenerateTorus(format!("need n >= 2, got {n}")));
        }
        let ni = n as i64;
        let nt = T::lit(n as f64);
        let tau = Complex::new(T::lit(sx as f64) / nt, T::lit(sy as f64) / nt);
        let modulus = Modulus::new(tau)?;
        let nv = n * sy as usize;
        let index = |i: i64, j: i64| (j * ni + i) as usize;
        let positions = (0..nv)
            .map(|v| {
                let (i, j) = ((v % n) as f64, (v / n) as f64);
                Complex::new(T::lit(i) / nt, T::lit(j) / nt)
            })
            .collect();
        // reduce an integer lattice point to its representative and lift
        let reduce = |x: i64, y: i64| {
            let b = y.div_euclid(sy);
            let xr = x - b * sx;
            let a = xr.div_euclid(ni);
            (index(xr - a * ni, y - b * sy), Crossing::new(a, b))
        };
        let conductances = match profile {
            ConductanceProfile::Uniform => vec![T::lit(0.25); 4 * nv],
            ConductanceProfile::PerEdge(c) => {
                if c.len() != 4 * nv {
                    return Err(Error::Precondition(format!(
                        "conductance table has {} entries, expected {}",
                        c.len(),
                        4 * nv
                    )));
                }
                c
            }
        };
        let uniform = conductances.iter().all(|&c| c == T::lit(0.25));
        let mut edges = Vec::with_capacity(4 * nv);
        for v in 0..nv {
            let (i, j) = ((v % n) as i64, (v / n) as i64);
            for (dx, dy) in [(1, 0), (0, 1), (-1, 0), (0, -1)] {
                let (head, crossing) = reduce(i + dx, j + dy);
                edges.push(Edge { tail: v, head, conductance: conductances[edges.len()], crossing });
            }
        }
        let mut g = Self::from_parts(modulus, positions, edges)?;
        g.lattice = Some(SquareLattice { n, shift, uniform });
        Ok(g)
    }

    /// Same embedding with new conductances (one per directed edge).
    pub fn with_conductances(&self, conductances: &[T]) -> Result<Self> {
        if conductances.len() != self.edges.len() {
            return Err(Error::Precondition("conductance table length mismatch".into()));
        }
        let edges = self.edges.iter().zip(conductances).map(|(e, &c)| Edge { conductance: c, ..e.clone() }).collect();
        let mut g = Self::from_parts(self.modulus, self.positions.clone(), edges)?;
        g.lattice =
            self.lattice.map(|l| SquareLattice { uniform: conductances.iter().all(|&c| c == T::lit(0.25)), ..l });
        Ok(g)
    }

    /// Dual graph: one vertex per face (at its barycenter), one dual edge per
    /// directed edge, all conductances 1.
    ///
    /// Dual edge `k` crosses primal edge `k` from its right face to its left
    /// face, so `(e, e*)` is a direct frame.
    pub fn dual(&self) -> Result<TorusGraph<T>> {
        let positions = (0..self.faces.len()).map(|f| self.face_barycenter(f)).collect();
        let edges = (0..self.edges.len())
            .map(|e| {
                let r = self.reverse[e];
                Edge {
                    tail: self.left_face[r],
                    head: self.left_face[e],
                    conductance: T::one(),
                    crossing: self.face_offset[r] - self.face_offset[e] - self.edges[e].crossing,
                }
            })
            .collect();
        TorusGraph::from_parts(self.modulus, positions, edges)
    }

    pub fn modulus(&self) -> &Modulus<T> {
        &self.modulus
    }

    pub fn tau(&self) -> Complex<T> {
        self.modulus.tau
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    /// Number of directed edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn positions(&self) -> &[Complex<T>] {
        &self.positions
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge<T> {
        &self.edges[e]
    }

    pub fn reverse(&self, e: usize) -> usize {
        self.reverse[e]
    }

    /// Outgoing edges of `v` in counterclockwise order.
    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v]
    }

    /// Face boundaries as counterclockwise directed-edge cycles.
    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    /// The face lying to the left of directed edge `e`.
    pub fn left_face(&self, e: usize) -> usize {
        self.left_face[e]
    }

    pub fn lattice(&self) -> Option<SquareLattice> {
        self.lattice
    }

    /// `Some((n, shift))` for uniform square lattices, enabling closed-form spectra.
    pub fn uniform_square(&self) -> Option<(usize, (i64, i64))> {
        self.lattice.filter(|l| l.uniform).map(|l| (l.n, l.shift))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.edges.len()).all(|e| self.edges[e].conductance == self.edges[self.reverse[e]].conductance)
    }

    /// Total outgoing conductance of `v`.
    pub fn out_conductance(&self, v: usize) -> T {
        self.rotation[v].iter().map(|&e| self.edges[e].conductance).sum()
    }

    /// Displacement of edge `e` in the plane.
    pub fn edge_vector(&self, e: usize) -> Complex<T> {
        let ed = &self.edges[e];
        self.positions[ed.head] + self.modulus.translation(ed.crossing) - self.positions[ed.tail]
    }

    /// Crossing sum of a closed walk given as consecutive directed edges.
    pub fn walk_crossing(&self, walk: &[usize]) -> Result<Crossing> {
        for w in walk.windows(2) {
            if self.edges[w[0]].head != self.edges[w[1]].tail {
                return Err(Error::Precondition("walk edges are not consecutive".into()));
            }
        }
        if let (Some(&f), Some(&l)) = (walk.first(), walk.last()) {
            if self.edges[l].head != self.edges[f].tail {
                return Err(Error::Precondition("walk is not closed".into()));
            }
        }
        Ok(walk.iter().map(|&e| self.edges[e].crossing).sum())
    }

    fn face_barycenter(&self, f: usize) -> Complex<T> {
        let face = &self.faces[f];
        let sum = face.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &e| {
            acc + self.positions[self.edges[e].tail] + self.modulus.translation(self.face_offset[e])
        });
        sum / T::lit(face.len() as f64)
    }

    fn trace_faces(&mut self) -> Result<()> {
        let ne = self.edges.len();
        let mut left_face = vec![usize::MAX; ne];
        let mut face_offset = vec![Crossing::ZERO; ne];
        let mut faces = Vec::new();
        // position of each edge inside its tail's rotation
        let mut slot = vec![0; ne];
        for rot in &self.rotation {
            for (k, &e) in rot.iter().enumerate() {
                slot[e] = k;
            }
        }
        for start in 0..ne {
            if left_face[start] != usize::MAX {
                continue;
            }
            let f = faces.len();
            let mut boundary = Vec::new();
            let mut offset = Crossing::ZERO;
            let mut e = start;
            loop {
                if left_face[e] != usize::MAX {
                    return Err(Error::NonCellular(format!("edge {e} borders face {f} twice on the left")));
                }
                left_face[e] = f;
                face_offset[e] = offset;
                boundary.push(e);
                offset += self.edges[e].crossing;
                // next edge: clockwise neighbour of the reverse edge at the head
                let r = self.reverse[e];
                let rot = &self.rotation[self.edges[e].head];
                let k = slot[r];
                e = rot[(k + rot.len() - 1) % rot.len()];
                if e == start {
                    break;
                }
            }
            if !offset.is_zero() {
                return Err(Error::NonContractibleFace { face: f, a: offset.a, b: offset.b });
            }
            faces.push(boundary);
        }
        self.faces = faces;
        self.left_face = left_face;
        self.face_offset = face_offset;

        for f in 0..self.faces.len() {
            let area = self.face_signed_area(f);
            if !(area > T::zero()) {
                return Err(Error::NonCellular(format!("face {f} is not a counterclockwise disk")));
            }
        }
        let chi = self.positions.len() as i64 - (ne / 2) as i64 + self.faces.len() as i64;
        if chi != 0 {
            return Err(Error::NonCellular(format!("Euler characteristic is {chi}, expected 0 on a torus")));
        }
        Ok(())
    }

    fn face_signed_area(&self, f: usize) -> T {
        let pts: Vec<Complex<T>> = self.faces[f]
            .iter()
            .map(|&e| self.positions[self.edges[e].tail] + self.modulus.translation(self.face_offset[e]))
            .collect();
        let n = pts.len();
        let twice = (0..n)
            .map(|k| {
                let (p, q) = (pts[k], pts[(k + 1) % n]);
                p.re * q.im - p.im * q.re
            })
            .sum::<T>();
        twice / T::lit(2.0)
    }

    fn check_irreducible(&self) -> Result<()> {
        let nv = self.positions.len();
        let positive = |e: usize| self.edges[e].conductance > T::zero();
        let mut forward = vec![false; nv];
        let mut backward = vec![false; nv];
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (k, e) in self.edges.iter().enumerate() {
            incoming[e.head].push(k);
        }
        for (seen, dir) in [(&mut forward, true), (&mut backward, false)] {
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                let adj = if dir { &self.rotation[v] } else { &incoming[v] };
                for &e in adj {
                    if !positive(e) {
                        continue;
                    }
                    let w = if dir { self.edges[e].head } else { self.edges[e].tail };
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        match (0..nv).find(|&v| !forward[v] || !backward[v]) {
            Some(v) => Err(Error::Reducible(v)),
            None => Ok(()),
        }
    }
}

fn pair_reverses<T: Real>(edges: &[Edge<T>]) -> Result<Vec<usize>> {
    let mut index = HashMap::with_capacity(edges.len());
    for (k, e) in edges.iter().enumerate() {
        if index.insert((e.tail, e.head, e.crossing), k).is_some() {
            return Err(Error::NonCellular(format!("edge {k} duplicates an earlier edge")));
        }
    }
    edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            index.get(&(e.head, e.tail, -e.crossing)).copied().ok_or_else(|| {
                Error::InconsistentCrossings(format!(
                    "edge {k} ({} -> {}, crossing ({},{})) has no reverse edge",
                    e.tail, e.head, e.crossing.a, e.crossing.b
                ))
            })
        })
        .collect()
}

fn rotation_system<T: Real>(
    modulus: &Modulus<T>,
    positions: &[Complex<T>],
    edges: &[Edge<T>],
) -> Result<Vec<Vec<usize>>> {
    let mut rotation: Vec<Vec<(T, usize)>> = vec![Vec::new(); positions.len()];
    for (k, e) in edges.iter().enumerate() {
        let d = positions[e.head] + modulus.translation(e.crossing) - positions[e.tail];
        if d.norm() == T::zero() {
            return Err(Error::NonCellular(format!("edge {k} has zero length")));
        }
        rotation[e.tail].push((d.arg(), k));
    }
    rotation
        .into_iter()
        .enumerate()
        .map(|(v, mut out)| {
            out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite angles"));
            for w in out.windows(2) {
                if (w[1].0 - w[0].0).abs() <= T::lit(1e-12) {
                    return Err(Error::NonCellular(format!("edges leaving vertex {v} overlap")));
                }
            }
            Ok(out.into_iter().map(|(_, k)| k).collect())
        })
        .collect()
}
