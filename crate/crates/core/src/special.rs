//! Odd Jacobi theta function, Dedekind eta, the analytic torsion of a flat
//! torus with a unitary character, and the discrete Gaussian law.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::distribution::HeightLaw;
use crate::error::{Error, Result};
use crate::homology::HomologyClass;
use crate::laplacian::Character;
use crate::scalar::Real;

// Gaussian tails are cut where exp(-x) drops below exp(-TAIL)
const TAIL: f64 = 45.0;

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

fn i_pi<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::PI())
}

fn check_tau<T: Real>(tau: Complex<T>) -> Result<()> {
    if tau.im > T::zero() {
        Ok(())
    } else {
        Err(Error::DegenerateTorus(format!("Im tau must be positive, got {tau}")))
    }
}

/// `theta(w | tau) = -i sum_n (-1)^n exp(i pi [tau (n + 1/2)^2 + (2n + 1) w])`.
pub fn theta_odd<T: Real>(w: Complex<T>, tau: Complex<T>) -> Result<Complex<T>> {
    check_tau(tau)?;
    let term = |n: i64| {
        let x = T::lit(n as f64) + T::lit(0.5);
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        (i_pi::<T>() * (tau * x * x + w * (x * T::lit(2.0)))).exp() * sign
    };
    // terms peak near n = -Im w / Im tau - 1/2 and decay like a Gaussian
    let peak = (-(w.im / tau.im) - T::lit(0.5)).round().to_i64().unwrap_or(0);
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut largest = T::zero();
    for dir in [1i64, -1] {
        let mut n = if dir == 1 { peak } else { peak - 1 };
        loop {
            let t = term(n);
            largest = largest.max(t.norm());
            sum += t;
            let beyond = (T::lit((n - peak) as f64) + T::lit(0.5)) * T::lit(dir as f64) > T::zero();
            if beyond && t.norm() <= T::lit(T::SERIES_TOL) * largest {
                break;
            }
            n += dir;
        }
    }
    Ok(sum * Complex::new(T::zero(), -T::one()))
}

/// Product form `q^(1/6) eta(tau) 2 sin(pi w) prod (1 - q^2n e^(2 pi i w)) (1 - q^2n e^(-2 pi i w))`
/// with `q = exp(i pi tau)`.
pub fn theta_odd_product<T: Real>(w: Complex<T>, tau: Complex<T>) -> Result<Complex<T>> {
    check_tau(tau)?;
    let q = (i_pi::<T>() * tau).exp();
    let z = (i_pi::<T>() * w * T::lit(2.0)).exp();
    let one = c::<T>(1.0, 0.0);
    let mut prod = one;
    let mut q2n = q * q;
    while q2n.norm() > T::lit(T::SERIES_TOL) * T::lit(1e-2) {
        prod *= (one - q2n * z) * (one - q2n / z);
        q2n *= q * q;
    }
    let sin = (w * T::PI()).sin() * T::lit(2.0);
    Ok((i_pi::<T>() * tau / T::lit(6.0)).exp() * dedekind_eta(tau)? * sin * prod)
}

/// `eta(tau) = q^(1/12) prod_{n >= 1} (1 - q^(2n))`, `q = exp(i pi tau)`.
pub fn dedekind_eta<T: Real>(tau: Complex<T>) -> Result<Complex<T>> {
    check_tau(tau)?;
    let q = (i_pi::<T>() * tau).exp();
    let one = c::<T>(1.0, 0.0);
    let mut prod = one;
    let mut q2n = q * q;
    while q2n.norm() > T::lit(T::SERIES_TOL) * T::lit(1e-2) {
        prod *= one - q2n;
        q2n *= q * q;
    }
    Ok((i_pi::<T>() * tau / T::lit(12.0)).exp() * prod)
}

/// `T(chi) = |eta(tau)^-1 exp(i pi v^2 tau) theta(u - v tau | tau)|`.
pub fn torsion_t<T: Real>(chi: &Character<T>, tau: Complex<T>) -> Result<T> {
    Ok((h_torsion(chi, tau)?.sqrt()) / dedekind_eta(tau)?.norm())
}

/// `|exp(i pi v^2 tau) theta(u - v tau | tau)|^2`, the theta factor of the
/// torsion.
pub fn h_torsion<T: Real>(chi: &Character<T>, tau: Complex<T>) -> Result<T> {
    let w = Complex::new(chi.u, T::zero()) - tau * chi.v;
    let f = (i_pi::<T>() * tau * (chi.v * chi.v)).exp() * theta_odd(w, tau)?;
    Ok(f.norm_sqr())
}

/// `|exp(i pi v^2 tau) theta(v - u tau | tau)|^2`, the same expression with
/// the roles of `u` and `v` exchanged inside theta. Kept for comparison; it
/// does not satisfy the Poisson identity below.
pub fn h_swapped<T: Real>(chi: &Character<T>, tau: Complex<T>) -> Result<T> {
    let w = Complex::new(chi.v, T::zero()) - tau * chi.u;
    let f = (i_pi::<T>() * tau * (chi.v * chi.v)).exp() * theta_odd(w, tau)?;
    Ok(f.norm_sqr())
}

/// Signed Gaussian lattice sum
/// `sum_{r,s} chi(r tau + s) (-1)^((s-1)(r-1)+1) (2 Im tau)^(-1/2) exp(-pi |r tau + s|^2 / (2 Im tau))`.
pub fn signed_gaussian_sum<T: Real>(chi: &Character<T>, tau: Complex<T>) -> Result<Complex<T>> {
    check_tau(tau)?;
    let two_im = tau.im * T::lit(2.0);
    let radius = (two_im * T::lit(TAIL) / T::PI()).sqrt();
    let mut sum = Complex::new(T::zero(), T::zero());
    for (r, s) in lattice_points(tau, radius) {
        let l = tau * T::lit(r as f64) + T::lit(s as f64);
        let parity = ((s - 1) * (r - 1) + 1).rem_euclid(2);
        let sign = if parity == 0 { T::one() } else { -T::one() };
        let weight = (-T::PI() * l.norm_sqr() / two_im).exp();
        sum += chi.eval(HomologyClass::new(r, s)) * (sign * weight);
    }
    Ok(sum / two_im.sqrt())
}

/// `|h(chi) - signed_gaussian_sum(chi)|` with `h` from [`h_torsion`].
pub fn poisson_identity_residual<T: Real>(chi: &Character<T>, tau: Complex<T>) -> Result<T> {
    Ok((signed_gaussian_sum(chi, tau)? - h_torsion(chi, tau)?).norm())
}

/// Same residual with `h` from [`h_swapped`].
pub fn poisson_identity_residual_swapped<T: Real>(chi: &Character<T>, tau: Complex<T>) -> Result<T> {
    Ok((signed_gaussian_sum(chi, tau)? - h_swapped(chi, tau)?).norm())
}

/// Integer pairs `(r, s)` with `|r tau + s| <= radius`.
fn lattice_points<T: Real>(tau: Complex<T>, radius: T) -> Vec<(i64, i64)> {
    let rmax = (radius / tau.im).floor().to_i64().unwrap_or(0);
    let mut out = Vec::new();
    for r in -rmax..=rmax {
        let x0 = tau.re * T::lit(r as f64);
        let y = tau.im * T::lit(r as f64);
        let half = (radius * radius - y * y).max(T::zero()).sqrt();
        let lo = (-x0 - half).ceil().to_i64().unwrap_or(0);
        let hi = (-x0 + half).floor().to_i64().unwrap_or(0);
        out.extend((lo..=hi).map(|s| (r, s)));
    }
    out
}

/// `sum_{l in Z + tau Z} chi(l) exp(-|l|^2 / 2t)`: direct sum for `t < 1`,
/// Poisson-dual sum otherwise.
fn theta_trace<T: Real>(chi: &Character<T>, tau: Complex<T>, t: T) -> Complex<T> {
    if t < T::one() {
        let radius = (T::lit(2.0 * TAIL) * t).sqrt();
        lattice_points(tau, radius)
            .into_iter()
            .map(|(r, s)| {
                let l = tau * T::lit(r as f64) + T::lit(s as f64);
                chi.eval(HomologyClass::new(r, s)) * (-l.norm_sqr() / (T::lit(2.0) * t)).exp()
            })
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    } else {
        // dual vectors xi - kappa = (p - v, (q - u - (p - v) Re tau) / Im tau)
        let k = T::lit(2.0) * T::PI() * T::PI() * t;
        let radius = (T::lit(TAIL) / k).sqrt();
        let pmax = radius.ceil().to_i64().unwrap_or(0) + 1;
        let mut sum = T::zero();
        for p in -pmax..=pmax {
            let x = T::lit(p as f64) - chi.v;
            if x.abs() > radius {
                continue;
            }
            let centre = chi.u + x * tau.re;
            let span = radius * tau.im;
            let lo = (centre - span).ceil().to_i64().unwrap_or(0);
            let hi = (centre + span).floor().to_i64().unwrap_or(0);
            for q in lo..=hi {
                let y = (T::lit(q as f64) - centre) / tau.im;
                sum += (-k * (x * x + y * y)).exp();
            }
        }
        Complex::new(sum * T::lit(2.0) * T::PI() * t / tau.im, T::zero())
    }
}

/// `-Im tau * int_0^inf (2 pi t^2)^-1 sum_l (chi'(l) - chi(l)) exp(-|l|^2 / 2t) dt`,
/// which equals `2 ln(T(chi') / T(chi))`.
///
/// Integrated with the trapezoid rule in `s = ln t`, halving the step until
/// two successive estimates agree.
pub fn torsion_heat_kernel_log_ratio<T: Real>(
    chi: &Character<T>,
    chi_prime: &Character<T>,
    tau: Complex<T>,
) -> Result<T> {
    check_tau(tau)?;
    if chi.is_trivial() || chi_prime.is_trivial() {
        return Err(Error::Precondition("both characters must be nontrivial".into()));
    }
    if chi == chi_prime {
        return Ok(T::zero());
    }
    let two_pi = T::lit(2.0) * T::PI();
    let integrand = |s: T| {
        let t = s.exp();
        ((theta_trace(chi_prime, tau, t) - theta_trace(chi, tau, t)) / (two_pi * t)).re
    };
    // shortest nonzero lattice vector bounds the small-t decay; distance of
    // the character from the dual lattice bounds the large-t decay
    let lmin = lattice_points(tau, T::lit(1.0) + tau.norm())
        .into_iter()
        .filter(|&p| p != (0, 0))
        .map(|(r, s)| (tau * T::lit(r as f64) + T::lit(s as f64)).norm())
        .fold(T::infinity(), T::min);
    let dmin = [chi, chi_prime].iter().map(|c| dual_distance(c, tau)).fold(T::infinity(), T::min);
    let lo = (lmin * lmin / T::lit(2.0 * TAIL)).ln();
    let hi = (T::lit(TAIL) / (T::lit(2.0) * T::PI() * T::PI() * dmin * dmin)).ln().max(lo + T::one());

    let mut h = T::lit(0.25);
    let mut nodes = ((hi - lo) / h).ceil().to_usize().unwrap_or(1);
    h = (hi - lo) / T::lit(nodes as f64);
    let mut sum = (0..=nodes).map(|k| integrand(lo + h * T::lit(k as f64))).sum::<T>();
    let mut estimate = sum * h;
    for _ in 0..14 {
        // add the midpoints of the current grid
        let mids = (0..nodes).map(|k| integrand(lo + h * (T::lit(k as f64) + T::lit(0.5)))).sum::<T>();
        sum += mids;
        nodes *= 2;
        h /= T::lit(2.0);
        let next = sum * h;
        if (next - estimate).abs() <= T::lit(1e-13) * (T::one() + next.abs()) {
            return Ok(-tau.im * next);
        }
        estimate = next;
    }
    Err(Error::Quadrature(format!("heat-kernel integral did not converge (last estimate {estimate})")))
}

/// Distance from the frequency of `chi` to the nearest dual lattice vector.
fn dual_distance<T: Real>(chi: &Character<T>, tau: Complex<T>) -> T {
    let mut best = T::infinity();
    for p in -1..=1i64 {
        let x = T::lit(p as f64) - chi.v;
        let centre = chi.u + x * tau.re;
        let q0 = centre.round().to_i64().unwrap_or(0);
        for q in q0 - 1..=q0 + 1 {
            let y = (T::lit(q as f64) - centre) / tau.im;
            best = best.min((x * x + y * y).sqrt());
        }
    }
    best
}

/// Discrete Gaussian law on `Z + tau Z`, mass proportional to
/// `exp(-pi |r tau + s|^2 / (2 Im tau))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteGaussian<T> {
    pub tau: Complex<T>,
    pub weights: BTreeMap<HomologyClass, T>,
    pub normalization: T,
}

impl<T: Real> DiscreteGaussian<T> {
    pub fn prob(&self, c: HomologyClass) -> T {
        self.weights.get(&c).copied().unwrap_or(T::zero())
    }

    pub fn law(&self) -> HeightLaw<T> {
        HeightLaw::new(self.tau, self.weights.clone())
    }
}

pub fn discrete_gaussian<T: Real>(tau: Complex<T>) -> Result<DiscreteGaussian<T>> {
    check_tau(tau)?;
    let two_im = tau.im * T::lit(2.0);
    let radius = (two_im * T::lit(TAIL) / T::PI()).sqrt();
    let mut weights = BTreeMap::new();
    for (r, s) in lattice_points(tau, radius) {
        let l = tau * T::lit(r as f64) + T::lit(s as f64);
        weights.insert(HomologyClass::new(r, s), (-T::PI() * l.norm_sqr() / two_im).exp());
    }
    let normalization: T = weights.values().copied().sum();
    for w in weights.values_mut() {
        *w /= normalization;
    }
    Ok(DiscreteGaussian { tau, weights, normalization })
}
