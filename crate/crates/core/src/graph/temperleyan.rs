use super::TorusGraph;
use crate::error::{Error, Result};
use crate::homology::Crossing;
use crate::scalar::Real;

/// Black vertex of the superposition graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Black {
    Primal(usize),
    Dual(usize),
}

/// Which half-edge an edge of the superposition graph comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    /// Primal directed edge `e`: joins `tail(e)` to the midpoint of `e`.
    Primal(usize),
    /// Dual directed edge `e*`: joins its tail face to the midpoint of `e`.
    Dual(usize),
}

/// Edge of the superposition graph, from a black vertex to a white one.
#[derive(Clone, Debug, PartialEq)]
pub struct GEdge<T> {
    pub black: usize,
    pub white: usize,
    pub weight: T,
    /// Lift of the white vertex relative to the black one.
    pub crossing: Crossing,
    pub source: Source,
}

/// The bipartite superposition of a torus graph and its dual.
///
/// Black ids: primal vertices `0..V`, then faces `V..V+F`. White ids index
/// undirected primal edges. Edge ids: primal directed edge `e` becomes edge
/// `e`, dual edge `e*` becomes edge `E + e`.
#[derive(Clone, Debug)]
pub struct TemperleyanGraph<T> {
    primal: TorusGraph<T>,
    dual: TorusGraph<T>,
    edges: Vec<GEdge<T>>,
    white_rep: Vec<usize>,
    white_of: Vec<usize>,
    white_edges: Vec<[usize; 4]>,
    dual_face_vertex: Vec<usize>,
}

impl<T: Real> TemperleyanGraph<T> {
    pub fn new(primal: &TorusGraph<T>) -> Result<Self> {
        let dual = primal.dual()?;
        let ne = primal.edge_count();
        let nv = primal.vertex_count();

        let mut white_of = vec![usize::MAX; ne];
        let mut white_rep = Vec::with_capacity(ne / 2);
        for e in 0..ne {
            if white_of[e] == usize::MAX {
                let w = white_rep.len();
                white_rep.push(e);
                white_of[e] = w;
                white_of[primal.reverse(e)] = w;
            }
        }
        // lift of the midpoint of e, seen from the tail of e, relative to the
        // white vertex's reference lift (midpoint of the representative)
        let mid = |e: usize| {
            if white_rep[white_of[e]] == e {
                Crossing::ZERO
            } else {
                primal.edge(e).crossing
            }
        };

        let mut edges = Vec::with_capacity(2 * ne);
        for e in 0..ne {
            edges.push(GEdge {
                black: primal.edge(e).tail,
                white: white_of[e],
                weight: primal.edge(e).conductance,
                crossing: mid(e),
                source: Source::Primal(e),
            });
        }
        for e in 0..ne {
            // e* leaves the face right of e, i.e. the face left of rev(e)
            let r = primal.reverse(e);
            edges.push(GEdge {
                black: nv + dual.edge(e).tail,
                white: white_of[e],
                weight: T::one(),
                crossing: primal.face_offset[r] + mid(r),
                source: Source::Dual(e),
            });
        }

        let mut white_edges = vec![[0; 4]; white_rep.len()];
        for (w, &e) in white_rep.iter().enumerate() {
            let r = primal.reverse(e);
            white_edges[w] = [e, ne + r, r, ne + e];
        }

        // the dual face left of e* contains tail(e)
        let mut dual_face_vertex = vec![usize::MAX; dual.faces().len()];
        for e in 0..ne {
            let f = dual.left_face(e);
            let v = primal.edge(e).tail;
            if dual_face_vertex[f] != usize::MAX && dual_face_vertex[f] != v {
                return Err(Error::NotDual(format!("dual face {f} surrounds two primal vertices")));
            }
            dual_face_vertex[f] = v;
        }
        if dual_face_vertex.len() != nv {
            return Err(Error::NotDual("dual faces do not match primal vertices".into()));
        }

        Ok(TemperleyanGraph { primal: primal.clone(), dual, edges, white_rep, white_of, white_edges, dual_face_vertex })
    }

    pub fn primal(&self) -> &TorusGraph<T> {
        &self.primal
    }

    pub fn dual(&self) -> &TorusGraph<T> {
        &self.dual
    }

    pub fn black_count(&self) -> usize {
        self.primal.vertex_count() + self.dual.vertex_count()
    }

    pub fn white_count(&self) -> usize {
        self.white_rep.len()
    }

    pub fn edges(&self) -> &[GEdge<T>] {
        &self.edges
    }

    pub fn edge(&self, g: usize) -> &GEdge<T> {
        &self.edges[g]
    }

    pub fn black(&self, id: usize) -> Black {
        let nv = self.primal.vertex_count();
        if id < nv {
            Black::Primal(id)
        } else {
            Black::Dual(id - nv)
        }
    }

    /// White vertex sitting on primal directed edge `e` (or its reverse).
    pub fn white_of_edge(&self, e: usize) -> usize {
        self.white_of[e]
    }

    /// Representative primal directed edge of white vertex `w`.
    pub fn white_rep(&self, w: usize) -> usize {
        self.white_rep[w]
    }

    /// The four edges at white `w`, counterclockwise: toward the tail of the
    /// representative edge, its left face, its head, its right face.
    pub fn white_edges(&self, w: usize) -> [usize; 4] {
        self.white_edges[w]
    }

    /// Edges at a black vertex in counterclockwise order.
    pub fn black_edges(&self, b: usize) -> Vec<usize> {
        let ne = self.primal.edge_count();
        match self.black(b) {
            Black::Primal(v) => self.primal.rotation(v).to_vec(),
            Black::Dual(f) => self.dual.rotation(f).iter().map(|&e| ne + e).collect(),
        }
    }

    /// Primal vertex enclosed by dual face `f`.
    pub fn dual_face_vertex(&self, f: usize) -> usize {
        self.dual_face_vertex[f]
    }
}
