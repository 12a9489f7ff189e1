//! Integer homology bookkeeping on the torus `C/(Z + tau Z)`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Lattice translation `a + b*tau` picked up by a lifted path, i.e. the signed
/// number of times it crosses the cut dual to `[A]` (resp. `[B]`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Crossing {
    pub a: i64,
    pub b: i64,
}

impl Crossing {
    pub const ZERO: Crossing = Crossing { a: 0, b: 0 };

    pub const fn new(a: i64, b: i64) -> Self {
        Crossing { a, b }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn class(self) -> HomologyClass {
        HomologyClass { r: self.b, s: self.a }
    }
}

impl Add for Crossing {
    type Output = Crossing;
    fn add(self, o: Crossing) -> Crossing {
        Crossing::new(self.a + o.a, self.b + o.b)
    }
}

impl AddAssign for Crossing {
    fn add_assign(&mut self, o: Crossing) {
        self.a += o.a;
        self.b += o.b;
    }
}

impl Sub for Crossing {
    type Output = Crossing;
    fn sub(self, o: Crossing) -> Crossing {
        Crossing::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for Crossing {
    type Output = Crossing;
    fn neg(self) -> Crossing {
        Crossing::new(-self.a, -self.b)
    }
}

impl Sum for Crossing {
    fn sum<I: Iterator<Item = Crossing>>(iter: I) -> Crossing {
        iter.fold(Crossing::ZERO, Add::add)
    }
}

/// Element `r*tau + s` of `H_1(torus, Z)`, i.e. `s[A] + r[B]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HomologyClass {
    pub r: i64,
    pub s: i64,
}

impl HomologyClass {
    pub const ZERO: HomologyClass = HomologyClass { r: 0, s: 0 };
    /// `[A]`, the class of `t -> t`.
    pub const A: HomologyClass = HomologyClass { r: 0, s: 1 };
    /// `[B]`, the class of `t -> t*tau`.
    pub const B: HomologyClass = HomologyClass { r: 1, s: 0 };

    pub const fn new(r: i64, s: i64) -> Self {
        HomologyClass { r, s }
    }

    pub fn is_zero(self) -> bool {
        self.r == 0 && self.s == 0
    }

    pub fn crossing(self) -> Crossing {
        Crossing::new(self.s, self.r)
    }

    /// Intersection number, antisymmetric with `[A].[B] = 1`.
    pub fn intersect(self, o: HomologyClass) -> i64 {
        self.s * o.r - self.r * o.s
    }

    /// Both coordinates even.
    pub fn is_even(self) -> bool {
        self.r % 2 == 0 && self.s % 2 == 0
    }

    pub fn halve(self) -> Option<HomologyClass> {
        self.is_even().then(|| HomologyClass::new(self.r / 2, self.s / 2))
    }

    /// Representative of `{c, -c}` with `r > 0`, or `r == 0 && s > 0`.
    pub fn canonical_sign(self) -> HomologyClass {
        if self.r > 0 || (self.r == 0 && self.s > 0) {
            self
        } else {
            -self
        }
    }

    pub fn scale(self, k: i64) -> HomologyClass {
        HomologyClass::new(self.r * k, self.s * k)
    }
}

impl Add for HomologyClass {
    type Output = HomologyClass;
    fn add(self, o: HomologyClass) -> HomologyClass {
        HomologyClass::new(self.r + o.r, self.s + o.s)
    }
}

impl AddAssign for HomologyClass {
    fn add_assign(&mut self, o: HomologyClass) {
        self.r += o.r;
        self.s += o.s;
    }
}

impl Sub for HomologyClass {
    type Output = HomologyClass;
    fn sub(self, o: HomologyClass) -> HomologyClass {
        HomologyClass::new(self.r - o.r, self.s - o.s)
    }
}

impl Neg for HomologyClass {
    type Output = HomologyClass;
    fn neg(self) -> HomologyClass {
        HomologyClass::new(-self.r, -self.s)
    }
}

impl Sum for HomologyClass {
    fn sum<I: Iterator<Item = HomologyClass>>(iter: I) -> HomologyClass {
        iter.fold(HomologyClass::ZERO, Add::add)
    }
}

impl fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}τ{:+}", self.r, self.s)
    }
}
