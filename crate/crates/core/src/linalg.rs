//! Dense complex matrices, LU factorization with partial pivoting and
//! overflow-safe determinants.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Maximum absolute row sum, the operator norm induced by `l^inf`.
    pub fn norm_inf(&self) -> T {
        (0..self.rows).map(|i| self.row(i).iter().map(|z| z.norm()).sum::<T>()).fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix<T>) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Determinant stored as `exp(log_modulus) * phase`, or an explicit zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet<T> {
    pub log_modulus: T,
    pub phase: Complex<T>,
    pub zero: bool,
}

impl<T: Real> LogDet<T> {
    pub fn zero() -> Self {
        LogDet { log_modulus: T::neg_infinity(), phase: Complex::new(T::zero(), T::zero()), zero: true }
    }

    pub fn one() -> Self {
        LogDet { log_modulus: T::zero(), phase: Complex::new(T::one(), T::zero()), zero: false }
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        let r = z.norm();
        if r == T::zero() || !r.is_finite() {
            return Self::zero();
        }
        LogDet { log_modulus: r.ln(), phase: z / r, zero: false }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// The value as a plain complex number (may overflow or underflow).
    pub fn value(&self) -> Complex<T> {
        if self.zero {
            Complex::new(T::zero(), T::zero())
        } else {
            self.phase * self.log_modulus.exp()
        }
    }

    /// Principal complex logarithm, `ln|z| + i arg z`.
    pub fn ln(&self) -> Complex<T> {
        Complex::new(self.log_modulus, self.phase.arg())
    }

    /// `ln(self / other)` with the phase difference in `(-pi, pi]`.
    pub fn ln_ratio(&self, other: &LogDet<T>) -> Complex<T> {
        if self.zero || other.zero {
            return Complex::new(T::nan(), T::nan());
        }
        Complex::new(self.log_modulus - other.log_modulus, (self.phase * other.phase.conj()).arg())
    }

    /// `self / other` as a plain complex number.
    pub fn ratio(&self, other: &LogDet<T>) -> Complex<T> {
        if self.zero {
            return Complex::new(T::zero(), T::zero());
        }
        let l = self.ln_ratio(other);
        Complex::from_polar(l.re.exp(), l.im)
    }

    pub fn mul(&self, other: &LogDet<T>) -> LogDet<T> {
        if self.zero || other.zero {
            return Self::zero();
        }
        let p = self.phase * other.phase;
        LogDet { log_modulus: self.log_modulus + other.log_modulus, phase: p / p.norm(), zero: false }
    }

    /// Linear combination `sum coeff_i * det_i`, evaluated relative to the
    /// largest modulus so that no intermediate overflows.
    pub fn combine(terms: &[(T, LogDet<T>)]) -> LogDet<T> {
        let scale = terms
            .iter()
            .filter(|(c, d)| !d.zero && *c != T::zero())
            .map(|(_, d)| d.log_modulus)
            .fold(T::neg_infinity(), T::max);
        if scale == T::neg_infinity() {
            return Self::zero();
        }
        let sum = terms.iter().filter(|(_, d)| !d.zero).fold(Complex::new(T::zero(), T::zero()), |acc, (c, d)| {
            acc + d.phase * (*c * (d.log_modulus - scale).exp())
        });
        let r = sum.norm();
        if r <= T::epsilon() * T::lit(16.0) {
            return Self::zero();
        }
        LogDet { log_modulus: scale + r.ln(), phase: sum / r, zero: false }
    }
}

impl<T: Real> fmt::Display for LogDet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            write!(f, "0")
        } else {
            write!(f, "exp({}) * ({} {:+}i)", self.log_modulus, self.phase.re, self.phase.im)
        }
    }
}

fn max_row_norm<T: Real>(a: &CMatrix<T>) -> T {
    a.norm_inf()
}

/// In-place LU factorization with partial row pivoting.
///
/// Returns the pivot permutation parity and `None` when a pivot falls below
/// `T::SINGULAR_TOL` relative to the largest row norm of the input.
fn lu_in_place<T: Real>(a: &mut CMatrix<T>, perm: &mut [usize]) -> Option<bool> {
    let n = a.rows;
    debug_assert_eq!(n, a.cols);
    let tol = T::lit(T::SINGULAR_TOL) * max_row_norm(a);
    let mut odd = false;
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    for k in 0..n {
        let mut piv = k;
        let mut best = a[(k, k)].norm();
        for i in k + 1..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if !(best > tol) {
            return None;
        }
        if piv != k {
            for j in 0..n {
                a.data.swap(k * n + j, piv * n + j);
            }
            perm.swap(k, piv);
            odd = !odd;
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let l = a[(i, k)] / pivot;
            if l.re == T::zero() && l.im == T::zero() {
                continue;
            }
            a[(i, k)] = l;
            for j in k + 1..n {
                let u = a[(k, j)];
                a[(i, j)] -= l * u;
            }
        }
    }
    Some(odd)
}

/// Determinant of a square matrix in log-modulus/phase form.
pub fn log_det<T: Real>(mut a: CMatrix<T>) -> LogDet<T> {
    assert_eq!(a.rows, a.cols, "determinant of a non-square matrix");
    let n = a.rows;
    if n == 0 {
        return LogDet::one();
    }
    let mut perm = vec![0; n];
    let Some(odd) = lu_in_place(&mut a, &mut perm) else {
        return LogDet::zero();
    };
    let mut log_modulus = T::zero();
    let mut phase = Complex::new(if odd { -T::one() } else { T::one() }, T::zero());
    for k in 0..n {
        let p = a[(k, k)];
        let r = p.norm();
        log_modulus += r.ln();
        phase *= p / r;
        // keep the phase on the unit circle
        phase = phase / phase.norm();
    }
    LogDet { log_modulus, phase, zero: false }
}

/// Solves `A X = B` for a square `A` and any number of right-hand sides.
pub fn solve<T: Real>(mut a: CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.rows;
    assert_eq!(n, a.cols, "solve with a non-square matrix");
    assert_eq!(n, b.rows, "right-hand side has the wrong number of rows");
    let mut perm = vec![0; n];
    lu_in_place(&mut a, &mut perm).ok_or(Error::Singular)?;
    let m = b.cols;
    let mut x = CMatrix::from_fn(n, m, |i, j| b[(perm[i], j)]);
    // forward substitution with unit lower factor
    for i in 0..n {
        for k in 0..i {
            let l = a[(i, k)];
            if l.re == T::zero() && l.im == T::zero() {
                continue;
            }
            for j in 0..m {
                let v = x[(k, j)];
                x[(i, j)] -= l * v;
            }
        }
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let u = a[(i, k)];
            if u.re == T::zero() && u.im == T::zero() {
                continue;
            }
            for j in 0..m {
                let v = x[(k, j)];
                x[(i, j)] -= u * v;
            }
        }
        let d = a[(i, i)];
        for j in 0..m {
            x[(i, j)] /= d;
        }
    }
    Ok(x)
}
