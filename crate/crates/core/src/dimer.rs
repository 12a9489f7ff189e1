//! Perfect matchings of the superposition graph, their height 1-forms and
//! homology classes, and Temperley's bijection with CRSF pairs.

use std::collections::BTreeMap;

use crate::crsf::{dual_crsf, Crsf};
use crate::error::{Error, Result};
use crate::graph::{shortest_cycle_in_class, Black, TemperleyanGraph, TorusGraph};
use crate::homology::{Crossing, HomologyClass};
use crate::scalar::Real;

/// Largest number of white vertices accepted by [`enumerate_matchings`].
pub const MATCHING_WHITE_LIMIT: usize = 24;

/// A perfect matching, stored as the matched edge of each white vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    white: Vec<usize>,
}

impl Matching {
    /// Validates that `white[w]` is an edge at `w` and that every black
    /// vertex is covered exactly once.
    pub fn new<T: Real>(t: &TemperleyanGraph<T>, white: Vec<usize>) -> Result<Self> {
        if white.len() != t.white_count() {
            return Err(Error::NotDual(format!("{} whites matched, expected {}", white.len(), t.white_count())));
        }
        let mut covered = vec![false; t.black_count()];
        for (w, &g) in white.iter().enumerate() {
            if g >= t.edges().len() || t.edge(g).white != w {
                return Err(Error::NotDual(format!("edge {g} is not incident to white {w}")));
            }
            let b = t.edge(g).black;
            if std::mem::replace(&mut covered[b], true) {
                return Err(Error::NotDual(format!("black vertex {b} is matched twice")));
            }
        }
        Ok(Matching { white })
    }

    /// Matched edge of each white vertex.
    pub fn edges(&self) -> &[usize] {
        &self.white
    }

    pub fn contains<T: Real>(&self, t: &TemperleyanGraph<T>, g: usize) -> bool {
        self.white[t.edge(g).white] == g
    }

    pub fn weight<T: Real>(&self, t: &TemperleyanGraph<T>) -> T {
        self.white.iter().fold(T::one(), |w, &g| w * t.edge(g).weight)
    }

    /// JSON array of `[white, black]` pairs.
    pub fn to_json<T: Real>(&self, t: &TemperleyanGraph<T>) -> serde_json::Value {
        let pairs: Vec<[usize; 2]> = self.white.iter().enumerate().map(|(w, &g)| [w, t.edge(g).black]).collect();
        serde_json::json!(pairs)
    }

    pub fn from_json<T: Real>(t: &TemperleyanGraph<T>, text: &str) -> Result<Self> {
        let pairs: Vec<[usize; 2]> = serde_json::from_str(text)?;
        let mut white = vec![usize::MAX; t.white_count()];
        for [w, b] in pairs {
            if w >= white.len() {
                return Err(Error::NotDual(format!("white {w} out of range")));
            }
            let mut hits = t.white_edges(w).into_iter().filter(|&g| t.edge(g).black == b);
            let g = hits.next().ok_or_else(|| Error::NotDual(format!("white {w} and black {b} are not adjacent")))?;
            if hits.next().is_some() {
                return Err(Error::NotDual(format!("white {w} and black {b} are joined twice")));
            }
            white[w] = g;
        }
        Matching::new(t, white)
    }
}

/// All positive-weight perfect matchings, by backtracking over white
/// vertices in id order and their edges in id order.
pub fn enumerate_matchings<T: Real>(t: &TemperleyanGraph<T>) -> Result<Vec<Matching>> {
    if t.white_count() > MATCHING_WHITE_LIMIT {
        return Err(Error::TooLarge(format!(
            "{} white vertices exceed the enumeration limit {MATCHING_WHITE_LIMIT}",
            t.white_count()
        )));
    }
    let options: Vec<Vec<usize>> = (0..t.white_count())
        .map(|w| {
            let mut o: Vec<usize> = t.white_edges(w).into_iter().filter(|&g| t.edge(g).weight > T::zero()).collect();
            o.sort_unstable();
            o
        })
        .collect();
    let mut out = Vec::new();
    let mut used = vec![false; t.black_count()];
    let mut current = Vec::with_capacity(options.len());
    extend(t, &options, &mut used, &mut current, &mut out);
    Ok(out)
}

fn extend<T: Real>(
    t: &TemperleyanGraph<T>,
    options: &[Vec<usize>],
    used: &mut [bool],
    current: &mut Vec<usize>,
    out: &mut Vec<Matching>,
) {
    let w = current.len();
    if w == options.len() {
        out.push(Matching { white: current.clone() });
        return;
    }
    for &g in &options[w] {
        let b = t.edge(g).black;
        if !used[b] {
            used[b] = true;
            current.push(g);
            extend(t, options, used, current, out);
            current.pop();
            used[b] = false;
        }
    }
}

/// Orientation of the dual edge `(bw)*` that carries `+1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Frame {
    /// `((bw), (bw)*)` is a direct frame: `(bw)*` is `(bw)` turned a quarter
    /// turn counterclockwise.
    #[default]
    Direct,
    /// The opposite convention. Only useful to check that the consistency
    /// tests can fail.
    Reversed,
}

impl Frame {
    fn sign(self) -> i64 {
        match self {
            Frame::Direct => 1,
            Frame::Reversed => -1,
        }
    }
}

/// Height 1-form of a matching on the dual of the superposition graph.
///
/// `value(g)` is the value on the dual of edge `g` oriented so that it turns
/// counterclockwise around the black endpoint of `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightForm {
    values: Vec<i64>,
}

impl HeightForm {
    pub fn value(&self, g: usize) -> i64 {
        self.values[g]
    }

    /// Value on `(bw)*` traversed in the opposite direction.
    pub fn value_reversed(&self, g: usize) -> i64 {
        -self.values[g]
    }

    /// Exterior derivative on the face around black vertex `b`, traversed
    /// counterclockwise.
    pub fn d_black<T: Real>(&self, t: &TemperleyanGraph<T>, b: usize) -> i64 {
        t.black_edges(b).iter().map(|&g| self.values[g]).sum()
    }

    /// Exterior derivative on the face around white vertex `w`, traversed
    /// counterclockwise; each dual edge is then crossed clockwise around
    /// its black endpoint.
    pub fn d_white<T: Real>(&self, t: &TemperleyanGraph<T>, w: usize) -> i64 {
        t.white_edges(w).iter().map(|&g| -self.values[g]).sum()
    }
}

pub fn one_form<T: Real>(t: &TemperleyanGraph<T>, m: &Matching) -> HeightForm {
    one_form_with(t, m, Frame::Direct)
}

pub fn one_form_with<T: Real>(t: &TemperleyanGraph<T>, m: &Matching, frame: Frame) -> HeightForm {
    let mut values = vec![0; t.edges().len()];
    for &g in m.edges() {
        values[g] = frame.sign();
    }
    HeightForm { values }
}

/// Primal cycles representing `[A]` and `[B]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodCycles {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl PeriodCycles {
    /// Shortest positive-conductance simple cycles with crossings `(1,0)`
    /// and `(0,1)`.
    pub fn find<T: Real>(g: &TorusGraph<T>) -> Result<Self> {
        let all = |_: usize| true;
        let find = |c: Crossing| {
            shortest_cycle_in_class(g, c, &all).ok_or_else(|| {
                Error::NoAdmissibleCycle(format!(
                    "no positive-conductance simple cycle with crossing ({},{})",
                    c.a, c.b
                ))
            })
        };
        Ok(PeriodCycles { a: find(Crossing::new(1, 0))?, b: find(Crossing::new(0, 1))? })
    }
}

/// Integral of the height form along the dual path running immediately
/// to the left of the simple primal cycle `cycle`.
pub fn left_integral<T: Real>(t: &TemperleyanGraph<T>, form: &HeightForm, cycle: &[usize]) -> i64 {
    side_integral(t, form, cycle, true)
}

/// Same, along the dual path immediately to the right.
pub fn right_integral<T: Real>(t: &TemperleyanGraph<T>, form: &HeightForm, cycle: &[usize]) -> i64 {
    side_integral(t, form, cycle, false)
}

fn side_integral<T: Real>(t: &TemperleyanGraph<T>, form: &HeightForm, cycle: &[usize], left: bool) -> i64 {
    let g = t.primal();
    let ne = g.edge_count();
    let len = cycle.len();
    let mut total = 0;
    for i in 0..len {
        let e = cycle[i];
        let next = cycle[(i + 1) % len];
        let r = g.reverse(e);
        // the edge from the white vertex on e to the face on this side; the
        // path crosses it from its right to its left, i.e. counterclockwise
        // around the left face and clockwise around the right one
        total += if left { form.value(ne + r) } else { form.value_reversed(ne + e) };
        // edges from the shared vertex into this side's sector
        let rot = g.rotation(g.edge(e).head);
        let d = rot.len();
        let slot = |x: usize| rot.iter().position(|&y| y == x).expect("edge in rotation");
        let (p_out, p_in) = (slot(next), slot(r));
        let (from, to) = if left { (p_out, p_in) } else { (p_in, p_out) };
        let mut k = (from + 1) % d;
        while k != to {
            total += if left { form.value_reversed(rot[k]) } else { form.value(rot[k]) };
            k = (k + 1) % d;
        }
    }
    total
}

/// Homology class dual to the periods: `[m] . [A] = int_A w` and
/// `[m] . [B] = int_B w`.
pub fn periods<T: Real>(t: &TemperleyanGraph<T>, m: &Matching) -> Result<HomologyClass> {
    let cycles = PeriodCycles::find(t.primal())?;
    Ok(periods_with(t, m, &cycles, Frame::Direct))
}

pub fn periods_with<T: Real>(
    t: &TemperleyanGraph<T>,
    m: &Matching,
    cycles: &PeriodCycles,
    frame: Frame,
) -> HomologyClass {
    let form = one_form_with(t, m, frame);
    let on_a = left_integral(t, &form, &cycles.a);
    let on_b = left_integral(t, &form, &cycles.b);
    // (r tau + s) . [A] = -r and (r tau + s) . [B] = s
    HomologyClass::new(-on_a, on_b)
}

/// Inverse of Temperley's bijection: the primal and dual CRSFs read off
/// from the matched edges at primal vertices and at faces.
pub fn temperley_back<T: Real>(t: &TemperleyanGraph<T>, m: &Matching) -> Result<(Crsf, Crsf)> {
    let ne = t.primal().edge_count();
    let mut primal = vec![usize::MAX; t.primal().vertex_count()];
    let mut dual = vec![usize::MAX; t.dual().vertex_count()];
    for &g in m.edges() {
        match t.black(t.edge(g).black) {
            Black::Primal(v) => primal[v] = g,
            Black::Dual(f) => dual[f] = g - ne,
        }
    }
    let f = Crsf::from_choice(t.primal(), primal)?;
    let fd = Crsf::from_choice(t.dual(), dual)?;
    if !f.is_incompressible() || !fd.is_incompressible() || f.cycle_count() != fd.cycle_count() {
        return Err(Error::Invariant("matching does not decompose into dual incompressible CRSFs".into()));
    }
    Ok((f, fd))
}

/// Temperley's bijection: primal vertex `v` is matched along its chosen edge
/// and face `f` along its chosen dual edge.
pub fn temperley_forward<T: Real>(t: &TemperleyanGraph<T>, f: &Crsf, fd: &Crsf) -> Result<Matching> {
    let ne = t.primal().edge_count();
    let mut white = vec![usize::MAX; t.white_count()];
    let edges = f.choice().iter().copied().chain(fd.choice().iter().map(|&e| ne + e));
    for g in edges {
        let w = t.edge(g).white;
        if white[w] != usize::MAX {
            return Err(Error::NotDual(format!("white vertex {w} is covered twice")));
        }
        white[w] = g;
    }
    if let Some(w) = white.iter().position(|&g| g == usize::MAX) {
        return Err(Error::NotDual(format!("white vertex {w} is not covered")));
    }
    Matching::new(t, white)
}

/// `[m] = ([F] + [F*]) / 2` from the CRSF pair of the matching.
pub fn class_of<T: Real>(t: &TemperleyanGraph<T>, m: &Matching) -> Result<HomologyClass> {
    let (f, fd) = temperley_back(t, m)?;
    class_of_pair(&f, &fd)
}

pub fn class_of_pair(f: &Crsf, fd: &Crsf) -> Result<HomologyClass> {
    let total = f.total_class() + fd.total_class();
    total.halve().ok_or_else(|| Error::Invariant(format!("root-cycle classes sum to the odd class {total}")))
}

/// Law of `[m]` under the dimer measure, by exhaustive enumeration.
pub fn enumeration_law<T: Real>(t: &TemperleyanGraph<T>) -> Result<BTreeMap<HomologyClass, T>> {
    let mut law = BTreeMap::new();
    let mut total = T::zero();
    for m in enumerate_matchings(t)? {
        let w = m.weight(t);
        *law.entry(class_of(t, &m)?).or_insert(T::zero()) += w;
        total += w;
    }
    for p in law.values_mut() {
        *p /= total;
    }
    Ok(law)
}

/// Every oriented dual of `f`, one per choice of root-cycle orientations.
pub fn all_duals<T: Real>(t: &TemperleyanGraph<T>, f: &Crsf) -> Result<Vec<Crsf>> {
    let k = f.cycle_count();
    (0..1u64 << k)
        .map(|mask| {
            let o: Vec<i8> = (0..k).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            dual_crsf(t.primal(), t.dual(), f, &o)
        })
        .collect()
}
