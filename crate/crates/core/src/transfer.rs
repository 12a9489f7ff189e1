//! Twisted hitting (Poisson) operators between two disjoint cycles and the
//! transfer operator they compose to.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{shortest_cycle_in_class, TorusGraph};
use crate::homology::Crossing;
use crate::laplacian::{determinant, Character};
use crate::linalg::{log_det, solve, CMatrix, LogDet};
use crate::scalar::Real;

/// Two vertex-disjoint simple cycles, each with crossing `(1, 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclePair {
    pub gamma1: Vec<usize>,
    pub gamma2: Vec<usize>,
}

impl CyclePair {
    /// Vertices of `gamma1`, in cycle order.
    pub fn vertices1<T: Real>(&self, g: &TorusGraph<T>) -> Vec<usize> {
        self.gamma1.iter().map(|&e| g.edge(e).tail).collect()
    }

    pub fn vertices2<T: Real>(&self, g: &TorusGraph<T>) -> Vec<usize> {
        self.gamma2.iter().map(|&e| g.edge(e).tail).collect()
    }
}

/// Rows at heights `0` and about `Im tau / 2` for square lattices; shortest
/// cycles in horizontal strips around those heights otherwise.
pub fn choose_cycles<T: Real>(g: &TorusGraph<T>) -> Result<CyclePair> {
    let pair = match g.lattice() {
        Some(l) => {
            let n = l.n;
            let rows = l.shift.1 as usize;
            // east edges are the first edge of each vertex in construction order
            let row = |j: usize| (0..n).map(|i| 4 * (j * n + i)).collect::<Vec<_>>();
            let (j1, j2) = (0, (rows as f64 / 2.0).round() as usize % rows.max(1));
            if j1 == j2 {
                return Err(Error::NoAdmissibleCycle("the lattice has a single row".into()));
            }
            CyclePair { gamma1: row(j1), gamma2: row(j2) }
        }
        None => strip_cycles(g)?,
    };
    let a = Crossing::new(1, 0);
    for c in [&pair.gamma1, &pair.gamma2] {
        if g.walk_crossing(c)? != a || c.iter().any(|&e| !(g.edge(e).conductance > T::zero())) {
            return Err(Error::NoAdmissibleCycle("row is not a positive [A]-cycle".into()));
        }
    }
    Ok(pair)
}

fn strip_cycles<T: Real>(g: &TorusGraph<T>) -> Result<CyclePair> {
    let h = g.tau().im;
    let quarter = h / T::lit(4.0);
    let height = |v: usize| {
        let y = g.positions()[v].im;
        y - (y / h).floor() * h
    };
    // periodic distance from height y0
    let near = |v: usize, y0: T| {
        let d = (height(v) - y0).abs();
        d.min(h - d) <= quarter
    };
    let a = Crossing::new(1, 0);
    let none = || Error::NoAdmissibleCycle("no pair of disjoint [A]-cycles".into());
    let gamma1 = shortest_cycle_in_class(g, a, &|v| near(v, T::zero()))
        .or_else(|| shortest_cycle_in_class(g, a, &|_| true))
        .ok_or_else(none)?;
    let mut used = vec![false; g.vertex_count()];
    for &e in &gamma1 {
        used[g.edge(e).tail] = true;
    }
    let mid = h / T::lit(2.0);
    let gamma2 = shortest_cycle_in_class(g, a, &|v| !used[v] && near(v, mid))
        .or_else(|| shortest_cycle_in_class(g, a, &|v| !used[v]))
        .ok_or_else(none)?;
    Ok(CyclePair { gamma1, gamma2 })
}

#[derive(Clone, Debug)]
pub struct TransferMatrices<T> {
    /// From `gamma2` to the first hit of `gamma1`.
    pub r: CMatrix<T>,
    /// From `gamma1` to the first hit of `gamma2`.
    pub q: CMatrix<T>,
    /// `Q R`: from `gamma1` to `gamma2` and back to `gamma1`.
    pub s: CMatrix<T>,
}

/// Twisted harmonic measure of `target`, seen from every vertex in `rows`.
///
/// Entry `(x, y)` sums `chi(class of the walk) * probability` over walks
/// from `x` whose first visit to `target` is at `y`.
pub fn hitting_matrix<T: Real>(
    g: &TorusGraph<T>,
    chi: &Character<T>,
    target: &[usize],
    rows: &[usize],
) -> Result<CMatrix<T>> {
    let nv = g.vertex_count();
    let mut slot = vec![None; nv];
    for (k, &y) in target.iter().enumerate() {
        slot[y] = Some(k);
    }
    let interior: Vec<usize> = (0..nv).filter(|&v| slot[v].is_none()).collect();
    let mut index = vec![usize::MAX; nv];
    for (k, &v) in interior.iter().enumerate() {
        index[v] = k;
    }
    let ni = interior.len();
    let mut system = CMatrix::identity(ni);
    let mut rhs = CMatrix::zeros(ni, target.len());
    for (i, &x) in interior.iter().enumerate() {
        let cx = g.out_conductance(x);
        for &e in g.rotation(x) {
            let edge = g.edge(e);
            let p = chi.phase(edge.crossing) * (edge.conductance / cx);
            match slot[edge.head] {
                Some(k) => rhs[(i, k)] += p,
                None => system[(i, index[edge.head])] -= p,
            }
        }
    }
    let x = solve(system, &rhs)?;
    Ok(CMatrix::from_fn(rows.len(), target.len(), |i, k| {
        let r = rows[i];
        if index[r] == usize::MAX {
            Complex::new(T::nan(), T::nan())
        } else {
            x[(index[r], k)]
        }
    }))
}

pub fn poisson_matrices<T: Real>(g: &TorusGraph<T>, chi: &Character<T>, cp: &CyclePair) -> Result<TransferMatrices<T>> {
    let (v1, v2) = (cp.vertices1(g), cp.vertices2(g));
    if v1.iter().any(|v| v2.contains(v)) {
        return Err(Error::Precondition("cycles are not disjoint".into()));
    }
    let r = hitting_matrix(g, chi, &v1, &v2)?;
    let q = hitting_matrix(g, chi, &v2, &v1)?;
    let s = q.mul(&r);
    Ok(TransferMatrices { r, q, s })
}

/// `det(I - S)`.
pub fn fredholm_det<T: Real>(tm: &TransferMatrices<T>) -> LogDet<T> {
    let n = tm.s.rows();
    let one = Complex::new(T::one(), T::zero());
    log_det(CMatrix::from_fn(n, n, |i, j| if i == j { one - tm.s[(i, j)] } else { -tm.s[(i, j)] }))
}

/// Maximum absolute row sum of `S`.
pub fn op_norm_inf<T: Real>(tm: &TransferMatrices<T>) -> T {
    tm.s.norm_inf()
}

/// `sum_{k=1..K} Tr(S^k) / k`, the truncated series of `-ln det(I - S)`.
pub fn trace_series<T: Real>(s: &CMatrix<T>, terms: usize) -> Complex<T> {
    let mut power = s.clone();
    let mut total = Complex::new(T::zero(), T::zero());
    for k in 1..=terms {
        total += power.trace() / T::lit(k as f64);
        if k < terms {
            power = power.mul(s);
        }
    }
    total
}

/// Distance between `ln(det Delta_chi' / det Delta_chi)` and
/// `ln(det(I - S_chi') / det(I - S_chi))`, with the phase difference taken
/// modulo `2 pi`. The characters must agree on `[A]`.
pub fn verify_fred<T: Real>(
    g: &TorusGraph<T>,
    chi: &Character<T>,
    chi_prime: &Character<T>,
    cp: &CyclePair,
) -> Result<T> {
    if chi.is_trivial() || chi_prime.is_trivial() {
        return Err(Error::Precondition("both characters must be nontrivial".into()));
    }
    if (chi.v - chi_prime.v).abs() > T::lit(1e-14) {
        return Err(Error::Precondition(format!("characters differ on [A]: v = {} vs {}", chi.v, chi_prime.v)));
    }
    let d = determinant(g, chi_prime)?.ln_ratio(&determinant(g, chi)?);
    let f = fredholm_det(&poisson_matrices(g, chi_prime, cp)?).ln_ratio(&fredholm_det(&poisson_matrices(g, chi, cp)?));
    let pi = T::PI();
    let mut dphase = d.im - f.im;
    dphase = dphase - (dphase / (T::lit(2.0) * pi)).round() * T::lit(2.0) * pi;
    Ok(Complex::new(d.re - f.re, dphase).norm())
}

/// CSV rows `u,v,norm_inf,logdet_re,logdet_im,fred_residual`. The residual
/// compares each character with its shift by `1/2` in `u`, which agrees
/// with it on `[A]`.
pub fn transfer_csv<T: Real>(g: &TorusGraph<T>, cp: &CyclePair, chars: &[Character<T>]) -> Result<String> {
    let rows: Vec<(T, LogDet<T>, T)> = chars
        .par_iter()
        .map(|c| {
            let tm = poisson_matrices(g, c, cp)?;
            let residual = if c.is_trivial() || c.half_shift(true, false).is_trivial() {
                T::nan()
            } else {
                verify_fred(g, c, &c.half_shift(true, false), cp)?
            };
            Ok((op_norm_inf(&tm), fredholm_det(&tm), residual))
        })
        .collect::<Result<_>>()?;
    let mut out = String::from("u,v,norm_inf,logdet_re,logdet_im,fred_residual\n");
    for (c, (norm, det, res)) in chars.iter().zip(rows) {
        let ln = det.ln();
        let _ = writeln!(out, "{},{},{},{},{},{}", c.u, c.v, norm, ln.re, ln.im, res);
    }
    Ok(out)
}
