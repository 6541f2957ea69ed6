//! Arbitrary-precision Mittag-Leffler reference values.
//!
//! Completely independent of the library: rational α = a/q and β = b/q,
//! `1/Γ` from the Kummer series of the lower incomplete gamma function plus
//! the recurrence, and the defining power series summed with a working
//! precision chosen from the size of the largest term.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

pub struct Oracle {
    cc: Consts,
}

fn big(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

/// Binary exponent, `i32::MIN` for zero.
fn expo(x: &BigFloat) -> i32 {
    if x.is_zero() {
        i32::MIN
    } else {
        x.exponent().unwrap_or(i32::MIN)
    }
}

fn int(n: i64, p: usize) -> BigFloat {
    BigFloat::from_i64(n, p)
}

impl Oracle {
    pub fn new() -> Self {
        Oracle {
            cc: Consts::new().expect("constants cache"),
        }
    }

    pub fn to_f64(&mut self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        let s = x.format(Radix::Dec, RM, &mut self.cc).expect("format");
        s.parse().unwrap_or_else(|_| panic!("unparsable {s}"))
    }

    /// Γ(c) for 0 < c <= 1 via γ(c, X); the neglected upper part is below
    /// e^{-X} and X is chosen so that this is beneath the working precision.
    fn gamma_unit(&mut self, c: &BigFloat, p: usize) -> BigFloat {
        let x = int((0.7 * p as f64) as i64 + 40, p);
        let mut term = int(1, p).div(c, p, RM);
        let mut sum = term.clone();
        let mut denom = c.clone();
        let eps_exp = -(p as i32) - 8;
        loop {
            denom = denom.add(&int(1, p), p, RM);
            term = term.mul(&x, p, RM).div(&denom, p, RM);
            sum = sum.add(&term, p, RM);
            let te = expo(&term);
            let se = expo(&sum);
            if te < se + eps_exp && denom.cmp(&x).unwrap_or(0) > 0 {
                break;
            }
        }
        // X^c e^{-X}
        let lnx = x.ln(p, RM, &mut self.cc);
        let pre = c.mul(&lnx, p, RM).sub(&x, p, RM).exp(p, RM, &mut self.cc);
        sum.mul(&pre, p, RM)
    }

    /// 1/Γ(num/den), exactly zero at the poles.
    pub fn rgamma_rational(&mut self, num: i64, den: i64, p: usize) -> BigFloat {
        assert!(den > 0);
        if num <= 0 && num % den == 0 {
            return int(0, p);
        }
        // shift to c in (0, 1]: num/den = c + s with integer s
        let s = if num > 0 { (num - 1) / den } else { -((-num) / den) - 1 };
        let c = int(num - s * den, p).div(&int(den, p), p, RM);
        let g = self.gamma_unit(&c, p);
        let y = int(num, p).div(&int(den, p), p, RM);
        if s >= 0 {
            // Γ(y) = Γ(c) c (c+1) ... (c+s-1)
            let mut prod = g;
            for i in 0..s {
                prod = prod.mul(&c.add(&int(i, p), p, RM), p, RM);
            }
            int(1, p).div(&prod, p, RM)
        } else {
            // 1/Γ(y) = y (y+1) ... (y-s-1) / Γ(c)
            let mut prod = int(1, p);
            for i in 0..(-s) {
                prod = prod.mul(&y.add(&int(i, p), p, RM), p, RM);
            }
            prod.div(&g, p, RM)
        }
    }

    /// E_{a/q, b/q}(z) rounded to double precision.
    pub fn ml(&mut self, a: i64, b: i64, q: i64, z: (f64, f64)) -> (f64, f64) {
        let modulus = z.0.hypot(z.1);
        let alpha = a as f64 / q as f64;
        // the largest term is about exp(|z|^{1/α}); cancellation can eat
        // that many bits on top of the target
        let scale = if modulus > 0.0 { modulus.powf(1.0 / alpha) } else { 0.0 };
        let p = (((scale * 1.45 + 256.0) / 64.0).ceil() as usize) * 64;

        let zr = big(z.0, p);
        let zi = big(z.1, p);
        let mut pr = int(1, p);
        let mut pi = int(0, p);
        let mut sr = int(0, p);
        let mut si = int(0, p);

        let mut rg: Vec<BigFloat> = Vec::new();
        let mut peak = i32::MIN;
        let mut k: i64 = 0;
        loop {
            let num = a * k + b;
            let r = if k >= q && (a * (k - q) + b) > 0 {
                // 1/Γ(y + a/q·q) = 1/Γ(y) / Π_{i<a} (y + i)
                let y = int(a * (k - q) + b, p).div(&int(q, p), p, RM);
                let mut prod = int(1, p);
                for i in 0..a {
                    prod = prod.mul(&y.add(&int(i, p), p, RM), p, RM);
                }
                rg[(k - q) as usize].div(&prod, p, RM)
            } else {
                self.rgamma_rational(num, q, p)
            };
            rg.push(r.clone());

            let tr = pr.mul(&r, p, RM);
            let ti = pi.mul(&r, p, RM);
            sr = sr.add(&tr, p, RM);
            si = si.add(&ti, p, RM);

            let e = expo(&tr).max(expo(&ti));
            if !(tr.is_zero() && ti.is_zero()) {
                peak = peak.max(e);
            }
            let past_peak = (num as f64 / q as f64) > scale + 2.0;
            if past_peak && (tr.is_zero() && ti.is_zero() || e < peak - p as i32 - 8) {
                break;
            }

            let nr = pr.mul(&zr, p, RM).sub(&pi.mul(&zi, p, RM), p, RM);
            let ni = pr.mul(&zi, p, RM).add(&pi.mul(&zr, p, RM), p, RM);
            pr = nr;
            pi = ni;
            k += 1;
        }
        (self.to_f64(&sr), self.to_f64(&si))
    }
}
