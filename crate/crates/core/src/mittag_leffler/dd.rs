//! Double-double arithmetic (about 32 significant digits).
//!
//! Only what the extended series branch needs: the four operations, `exp`,
//! `ln`, a log-gamma on the positive axis and the reciprocal gamma function.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd {
    hi: 0.6931471805599453,
    lo: 2.3190468138462996e-17,
};
const HALF_LN_2PI: Dd = Dd {
    hi: 0.9189385332046728,
    lo: -3.8782941580672414e-17,
};

/// B_{2j} as (numerator, denominator), j = 1..=16.
const BERNOULLI: [(f64, f64); 16] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
    (-23749461029.0, 870.0),
    (8615841276005.0, 14322.0),
    (-7709321041217.0, 510.0),
];

/// Shift point for the Stirling series; 16 Bernoulli terms give ~1e-33 there.
const STIRLING_MIN: f64 = 20.0;

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn from_ratio(num: f64, den: f64) -> Dd {
        Dd::new(num) / Dd::new(den)
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    #[inline]
    fn scale_pow2(self, k: i32) -> Dd {
        Dd {
            hi: libm::scalbn(self.hi, k),
            lo: libm::scalbn(self.lo, k),
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.7 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).scale_pow2(-9);
        // expm1 by Taylor on |r| < 7e-4, then undo the 2^-9 scaling by doubling
        let mut term = r;
        let mut sum = r;
        for n in 2..=12 {
            term = (term * r) / Dd::new(n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..9 {
            sum = sum.mul_f64(2.0) + sum * sum;
        }
        (sum + Dd::ONE).scale_pow2(k as i32)
    }

    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive double-double");
        let x = Dd::new(self.hi.ln());
        // one Newton step on exp(y) = a doubles the precision
        x + self * (-x).exp() - Dd::ONE
    }

    /// log Γ(y) for y >= 20 by the Stirling series.
    fn ln_gamma_large(y: Dd) -> Dd {
        let inv = Dd::ONE / y;
        let inv2 = inv * inv;
        let mut corr = Dd::ZERO;
        let mut pow = inv;
        for (j, &(num, den)) in BERNOULLI.iter().enumerate() {
            let two_j = 2.0 * (j as f64 + 1.0);
            let coeff = Dd::from_ratio(num, den * two_j * (two_j - 1.0));
            corr = corr + coeff * pow;
            pow = pow * inv2;
        }
        (y - Dd::new(0.5)) * y.ln() - y + HALF_LN_2PI + corr
    }

    /// Returns (sign, log|Γ(y)|) via upward recurrence; `None` at poles.
    pub fn ln_abs_gamma(y: Dd) -> Option<(f64, Dd)> {
        if is_nonpositive_integer(y.to_f64()) {
            return None;
        }
        if y.hi >= STIRLING_MIN {
            return Some((1.0, Dd::ln_gamma_large(y)));
        }
        let shift = (STIRLING_MIN - y.hi).ceil().max(0.0) as usize;
        let mut prod = Dd::ONE;
        let mut cur = y;
        for _ in 0..shift {
            prod = prod * cur;
            cur = cur + Dd::ONE;
        }
        let sign = prod.hi.signum();
        Some((sign, Dd::ln_gamma_large(cur) - prod.abs().ln()))
    }
}

/// Pole test used by every reciprocal-gamma routine in the crate.
pub(crate) fn is_nonpositive_integer(y: f64) -> bool {
    if y > 0.5 {
        return false;
    }
    let r = y.round();
    (y - r).abs() <= 8.0 * f64::EPSILON * r.abs().max(1.0)
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Complex number with double-double parts.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    #[inline]
    pub fn new(re: f64, im: f64) -> Self {
        DdComplex {
            re: Dd::new(re),
            im: Dd::new(im),
        }
    }

    #[inline]
    pub fn mul(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    #[inline]
    pub fn scale(self, s: Dd) -> DdComplex {
        DdComplex {
            re: self.re * s,
            im: self.im * s,
        }
    }

    #[inline]
    pub fn add(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    #[inline]
    pub fn norm_f64(self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }
}
