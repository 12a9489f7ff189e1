//! Character-twisted Laplacians and their determinants.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;

use crate::crsf::{enumerate_crsfs, Crsf};
use crate::error::{Error, Result};
use crate::graph::TorusGraph;
use crate::homology::{Crossing, HomologyClass};
use crate::linalg::{log_det, CMatrix, LogDet};
use crate::scalar::Real;

/// Largest vertex count for dense factorisation.
pub const DENSE_LIMIT: usize = 20_000;

/// Unitary character `chi(r tau + s) = exp(2 pi i (r u + s v))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Character<T> {
    pub u: T,
    pub v: T,
}

impl<T: Real> Character<T> {
    /// `(u, v)` reduced into `[0, 1)`.
    pub fn new(u: T, v: T) -> Self {
        Character { u: wrap(u), v: wrap(v) }
    }

    pub fn trivial() -> Self {
        Character { u: T::zero(), v: T::zero() }
    }

    pub fn is_trivial(&self) -> bool {
        self.u == T::zero() && self.v == T::zero()
    }

    pub fn eval(&self, c: HomologyClass) -> Complex<T> {
        let turns = T::lit(c.r as f64) * self.u + T::lit(c.s as f64) * self.v;
        Complex::from_polar(T::one(), T::TAU() * turns)
    }

    /// Phase picked up along an edge with the given crossing.
    pub fn phase(&self, c: Crossing) -> Complex<T> {
        self.eval(c.class())
    }

    pub fn conj(&self) -> Self {
        Character::new(-self.u, -self.v)
    }

    /// Multiplication by the sign character `eps` with `eps([B]) = (-1)^du`
    /// and `eps([A]) = (-1)^dv`.
    pub fn half_shift(&self, du: bool, dv: bool) -> Self {
        let half = T::lit(0.5);
        Character::new(self.u + if du { half } else { T::zero() }, self.v + if dv { half } else { T::zero() })
    }
}

fn wrap<T: Real>(x: T) -> T {
    let y = x - x.floor();
    if y >= T::one() {
        T::zero()
    } else {
        y
    }
}

/// Dense matrix of `Delta_chi`: diagonal `sum_y c(xy)`, off-diagonal
/// `-c(xy) chi(crossing)` summed over parallel edges.
pub fn assemble<T: Real>(g: &TorusGraph<T>, chi: &Character<T>) -> CMatrix<T> {
    let n = g.vertex_count();
    let mut m = CMatrix::zeros(n, n);
    for e in g.edges() {
        m[(e.tail, e.tail)] += Complex::new(e.conductance, T::zero());
        m[(e.tail, e.head)] -= chi.phase(e.crossing) * e.conductance;
    }
    m
}

/// `det Delta_chi` by LU factorisation.
pub fn determinant<T: Real>(g: &TorusGraph<T>, chi: &Character<T>) -> Result<LogDet<T>> {
    if g.vertex_count() > DENSE_LIMIT {
        return Err(Error::TooLarge(format!(
            "{} vertices exceed the dense limit {DENSE_LIMIT}; use the spectral path for square lattices",
            g.vertex_count()
        )));
    }
    Ok(log_det(assemble(g, chi)))
}

/// `det Delta_chi` on the uniform square lattice from its Fourier modes.
///
/// Eigenfunctions `exp(i(alpha x + beta y))` must pick up `chi(1)` under
/// `x -> x + 1` and `chi(tau)` under translation by `tau`, which leaves
/// `n * s_y` admissible frequency pairs.
pub fn det_spectral<T: Real>(n: usize, shift: (i64, i64), chi: &Character<T>) -> Result<LogDet<T>> {
    let (sx, sy) = shift;
    if n < 2 || sy < 1 {
        return Err(Error::DegenerateTorus(format!("n = {n}, s_y = {sy}")));
    }
    let nt = T::lit(n as f64);
    let two_pi = T::TAU();
    let half = T::lit(0.5);
    let mut log_modulus = T::zero();
    let mut negative = false;
    for k in 0..n {
        let alpha = two_pi * (chi.v + T::lit(k as f64));
        for m in 0..sy {
            let beta = (two_pi * (chi.u + T::lit(m as f64)) - alpha * T::lit(sx as f64) / nt) * nt / T::lit(sy as f64);
            let lambda = T::one() - half * (alpha / nt).cos() - half * (beta / nt).cos();
            if lambda.abs() <= T::lit(T::SINGULAR_TOL) {
                return Ok(LogDet::zero());
            }
            log_modulus += lambda.abs().ln();
            negative ^= lambda < T::zero();
        }
    }
    let sign = if negative { -T::one() } else { T::one() };
    Ok(LogDet { log_modulus, phase: Complex::new(sign, T::zero()), zero: false })
}

/// Spectral path for uniform square lattices, dense LU otherwise.
pub fn det_auto<T: Real>(g: &TorusGraph<T>, chi: &Character<T>) -> Result<LogDet<T>> {
    match g.uniform_square() {
        Some((n, shift)) => det_spectral(n, shift, chi),
        None => determinant(g, chi),
    }
}

/// `sum_F prod c(e) prod_cycles (1 - chi(gamma))` over oriented
/// incompressible CRSFs.
pub fn forman_sum<T: Real>(g: &TorusGraph<T>, chi: &Character<T>) -> Result<Complex<T>> {
    Ok(forman_sum_over(g, &enumerate_crsfs(g)?, chi))
}

pub fn forman_sum_over<T: Real>(g: &TorusGraph<T>, crsfs: &[Crsf], chi: &Character<T>) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    crsfs
        .iter()
        .map(|f| f.classes().iter().fold(Complex::new(f.weight(g), T::zero()), |acc, &c| acc * (one - chi.eval(c))))
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
}

/// CSV rows `u,v,log_modulus,phase_re,phase_im,zero_flag`, one per character.
pub fn det_csv<T: Real>(g: &TorusGraph<T>, chars: &[Character<T>]) -> Result<String> {
    let dets: Vec<LogDet<T>> = chars.par_iter().map(|c| det_auto(g, c)).collect::<Result<_>>()?;
    let mut out = String::from("u,v,log_modulus,phase_re,phase_im,zero_flag\n");
    for (c, d) in chars.iter().zip(dets) {
        let _ = writeln!(out, "{},{},{},{},{},{}", c.u, c.v, d.log_modulus, d.phase.re, d.phase.im, u8::from(d.zero));
    }
    Ok(out)
}
