//! Exact law of the height-change class from twisted determinants.
//!
//! `Zhat(chi) = -det(Delta_chi) + 1/2 sum_eps det(Delta_{eps chi})`, where
//! `eps` runs over the four sign characters, is the Fourier transform of
//! the dimer partition function split by class. Inverting it on a finite
//! character grid recovers the law.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ConductanceProfile, TorusGraph};
use crate::homology::HomologyClass;
use crate::laplacian::{det_auto, Character};
use crate::linalg::LogDet;
use crate::scalar::Real;
use crate::special::{discrete_gaussian, h_torsion};

/// Largest aliasing estimate accepted by [`height_law_exact`].
pub const ALIASING_LIMIT: f64 = 1e-6;
/// Negative probabilities above this are treated as rounding noise.
pub const NEGATIVE_DUST: f64 = 1e-10;

/// Probability law on `H_1(torus, Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightLaw<T> {
    pub tau: Complex<T>,
    /// Character grid size, for laws obtained by Fourier inversion.
    pub grid: Option<usize>,
    pub aliasing: Option<T>,
    pub probs: BTreeMap<HomologyClass, T>,
}

#[derive(Serialize, Deserialize)]
struct LawJson {
    tau: [f64; 2],
    #[serde(rename = "M")]
    m: Option<usize>,
    aliasing: Option<f64>,
    law: Vec<LawEntry>,
}

#[derive(Serialize, Deserialize)]
struct LawEntry {
    r: i64,
    s: i64,
    p: f64,
}

impl<T: Real> HeightLaw<T> {
    pub fn new(tau: Complex<T>, probs: BTreeMap<HomologyClass, T>) -> Self {
        HeightLaw { tau, grid: None, aliasing: None, probs }
    }

    pub fn prob(&self, c: HomologyClass) -> T {
        self.probs.get(&c).copied().unwrap_or(T::zero())
    }

    pub fn total(&self) -> T {
        self.probs.values().copied().sum()
    }

    /// Mass on classes with `|r|, |s| <= radius`.
    pub fn mass_within(&self, radius: i64) -> T {
        self.probs.iter().filter(|(c, _)| c.r.abs() <= radius && c.s.abs() <= radius).map(|(_, &p)| p).sum()
    }

    /// `E[chi([m])]`.
    pub fn char_fun(&self, chi: &Character<T>) -> Complex<T> {
        self.probs.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (&c, &p)| acc + chi.eval(c) * p)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = LawJson {
            tau: [self.tau.re.as_f64(), self.tau.im.as_f64()],
            m: self.grid,
            aliasing: self.aliasing.map(Real::as_f64),
            law: self.probs.iter().map(|(c, p)| LawEntry { r: c.r, s: c.s, p: p.as_f64() }).collect(),
        };
        serde_json::to_value(doc).expect("law serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LawJson = serde_json::from_str(text)?;
        let probs = doc.law.iter().map(|e| (HomologyClass::new(e.r, e.s), T::lit(e.p))).collect();
        Ok(HeightLaw {
            tau: Complex::new(T::lit(doc.tau[0]), T::lit(doc.tau[1])),
            grid: doc.m,
            aliasing: doc.aliasing.map(T::lit),
            probs,
        })
    }
}

/// `Zhat(chi)` in overflow-safe form.
pub fn zhat<T: Real>(g: &TorusGraph<T>, chi: &Character<T>) -> Result<LogDet<T>> {
    let half = T::lit(0.5);
    let mut terms = Vec::with_capacity(4);
    for (du, dv) in [(false, false), (true, false), (false, true), (true, true)] {
        let coeff = if du || dv { half } else { -half };
        terms.push((coeff, det_auto(g, &chi.half_shift(du, dv))?));
    }
    Ok(LogDet::combine(&terms))
}

/// `Zhat(1)`, checked to be a positive real.
pub fn zhat_trivial<T: Real>(g: &TorusGraph<T>) -> Result<LogDet<T>> {
    let z = zhat(g, &Character::trivial())?;
    if z.is_zero() || z.phase.re < T::one() - T::lit(1e-8) {
        return Err(Error::Invariant(format!("Zhat(1) = {z} is not a positive real")));
    }
    Ok(z)
}

/// Characteristic function `Zhat(chi) / Zhat(1)` of the class law.
pub fn char_fun<T: Real>(g: &TorusGraph<T>, chi: &Character<T>) -> Result<Complex<T>> {
    let norm = zhat_trivial(g)?;
    Ok(zhat(g, chi)?.ratio(&norm))
}

/// Inverts the characteristic function sampled on `(j/M, k/M)`.
fn invert_grid<T: Real>(g: &TorusGraph<T>, m: usize, norm: &LogDet<T>) -> Result<BTreeMap<HomologyClass, T>> {
    let mt = T::lit(m as f64);
    let values: Vec<Complex<T>> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let chi = Character::new(T::lit((idx / m) as f64) / mt, T::lit((idx % m) as f64) / mt);
            Ok(zhat(g, &chi)?.ratio(norm))
        })
        .collect::<Result<_>>()?;
    let half = (m as i64 - 1) / 2;
    let mut probs = BTreeMap::new();
    for r in -half..=half {
        for s in -half..=half {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..m {
                for k in 0..m {
                    let turns = ((r * j as i64 + s * k as i64).rem_euclid(m as i64)) as f64 / m as f64;
                    acc += values[j * m + k] * Complex::from_polar(T::one(), -T::TAU() * T::lit(turns));
                }
            }
            probs.insert(HomologyClass::new(r, s), acc.re / (mt * mt));
        }
    }
    Ok(probs)
}

/// Law of `[m]` on classes with `|r|, |s| <= (M - 1) / 2`.
///
/// The aliasing estimate is the total-variation distance between the
/// inversions on grids `M` and `M + 2`.
pub fn height_law_exact<T: Real>(g: &TorusGraph<T>, m: usize) -> Result<HeightLaw<T>> {
    if m < 5 || m.is_multiple_of(2) {
        return Err(Error::Precondition(format!("grid size must be odd and at least 5, got {m}")));
    }
    let norm = zhat_trivial(g)?;
    let coarse = clean(invert_grid(g, m, &norm)?)?;
    let fine = clean(invert_grid(g, m + 2, &norm)?)?;
    let aliasing = tv_maps(&coarse, &fine);
    if aliasing > T::lit(ALIASING_LIMIT) {
        return Err(Error::Aliasing { estimate: aliasing.as_f64(), limit: ALIASING_LIMIT });
    }
    Ok(HeightLaw { tau: g.tau(), grid: Some(m), aliasing: Some(aliasing), probs: coarse })
}

/// Clamps rounding-level negative entries and renormalises.
fn clean<T: Real>(mut probs: BTreeMap<HomologyClass, T>) -> Result<BTreeMap<HomologyClass, T>> {
    let worst = probs.values().copied().fold(T::zero(), T::min);
    if worst < -T::lit(NEGATIVE_DUST.max(ALIASING_LIMIT)) {
        return Err(Error::Invariant(format!("inverted law has probability {worst}")));
    }
    for p in probs.values_mut() {
        *p = p.max(T::zero());
    }
    let total: T = probs.values().copied().sum();
    for p in probs.values_mut() {
        *p /= total;
    }
    Ok(probs)
}

fn tv_maps<T: Real>(p: &BTreeMap<HomologyClass, T>, q: &BTreeMap<HomologyClass, T>) -> T {
    let mut sum = T::zero();
    for (c, &a) in p {
        sum += (a - q.get(c).copied().unwrap_or(T::zero())).abs();
    }
    for (c, &b) in q {
        if !p.contains_key(c) {
            sum += b.abs();
        }
    }
    sum / T::lit(2.0)
}

/// Total-variation distance over the union of supports.
pub fn tv_distance<T: Real>(p: &HeightLaw<T>, q: &HeightLaw<T>) -> T {
    tv_maps(&p.probs, &q.probs)
}

/// Large-mesh limit of the characteristic function: the determinant ratios
/// are replaced by ratios of `h(chi) = |exp(i pi v^2 tau) theta(u - v tau)|^2`.
pub fn limit_char_fun<T: Real>(chi: &Character<T>, tau: Complex<T>) -> Result<T> {
    let half = T::lit(0.5);
    let mut num = -half * h_torsion(chi, tau)?;
    let mut den = T::zero();
    for (du, dv) in [(true, false), (false, true), (true, true)] {
        num += half * h_torsion(&chi.half_shift(du, dv), tau)?;
        den += half * h_torsion(&Character::<T>::trivial().half_shift(du, dv), tau)?;
    }
    Ok(num / den)
}

/// `(round(n Re tau), round(n Im tau))`: the square-lattice shift whose
/// modulus best approximates `tau`.
pub fn shift_for<T: Real>(n: usize, tau: Complex<T>) -> (i64, i64) {
    let nt = T::lit(n as f64);
    let sx = (tau.re * nt).round().to_i64().unwrap_or(0);
    let sy = (tau.im * nt).round().to_i64().unwrap_or(1).max(1);
    (sx, sy)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub n: usize,
    pub tau: Complex<T>,
    pub m: usize,
    pub tv: T,
    pub aliasing: T,
    pub seconds: f64,
}

/// For each `n`, the exact law on the uniform `n`-lattice approximating
/// `tau` and its distance to the discrete Gaussian at the lattice modulus.
pub fn convergence_sweep<T: Real>(sizes: &[usize], tau: Complex<T>, m: usize) -> Result<Vec<SweepRow<T>>> {
    sizes
        .iter()
        .map(|&n| {
            let start = Instant::now();
            let g = TorusGraph::square(n, shift_for(n, tau), ConductanceProfile::Uniform)?;
            let law = height_law_exact(&g, m)?;
            let target = discrete_gaussian(g.tau())?.law();
            Ok(SweepRow {
                n,
                tau: g.tau(),
                m,
                tv: tv_distance(&law, &target),
                aliasing: law.aliasing.unwrap_or(T::zero()),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Checks `tv` is nonincreasing along the sweep, up to `slack`.
pub fn check_monotone<T: Real>(rows: &[SweepRow<T>], slack: T) -> Result<()> {
    for w in rows.windows(2) {
        if w[1].tv > w[0].tv + slack {
            return Err(Error::NotMonotone { n: w[1].n, prev: w[0].tv.as_f64(), next: w[1].tv.as_f64() });
        }
    }
    Ok(())
}

pub const SWEEP_HEADER: &str = "n,tau_re,tau_im,M,tv,aliasing,seconds";

pub fn sweep_csv<T: Real>(rows: &[SweepRow<T>]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", r.n, r.tau.re, r.tau.im, r.m, r.tv, r.aliasing, r.seconds);
    }
    out
}
