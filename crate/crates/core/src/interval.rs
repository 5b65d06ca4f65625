//! Certified enclosures with exact rational endpoints.
//!
//! Endpoints are `BigRational`s snapped outward onto a dyadic grid after
//! every operation, so sizes stay bounded while every enclosure remains a
//! true superset of the exact value.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Closed real interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// Largest multiple of `2^-bits` that is `<= x`.
pub fn round_down(x: &BigRational, bits: u32) -> BigRational {
    let scale = pow2(bits);
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.floor().to_integer(), scale)
}

/// Smallest multiple of `2^-bits` that is `>= x`.
pub fn round_up(x: &BigRational, bits: u32) -> BigRational {
    let scale = pow2(bits);
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.ceil().to_integer(), scale)
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Interval {
    pub fn point(x: BigRational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::point(rat(n))
    }

    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&BigRational::zero())
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn round(&self, bits: u32) -> Self {
        Interval {
            lo: round_down(&self.lo, bits),
            hi: round_up(&self.hi, bits),
        }
    }

    pub fn add(&self, other: &Interval) -> Self {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Interval) -> Self {
        Interval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn mul(&self, other: &Interval) -> Self {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().cloned().unwrap();
        let hi = products.iter().max().cloned().unwrap();
        Interval { lo, hi }
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    /// Reciprocal; `None` when the interval straddles zero.
    pub fn recip(&self) -> Option<Self> {
        if self.contains_zero() {
            return None;
        }
        Some(Interval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    /// Widens symmetrically by `r >= 0`.
    pub fn inflate(&self, r: &BigRational) -> Self {
        Interval {
            lo: &self.lo - r,
            hi: &self.hi + r,
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (rat_to_f64(&self.lo), rat_to_f64(&self.hi))
    }
}

pub fn rat_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Axis-aligned rectangle enclosing a complex number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexInterval {
    pub fn real(re: Interval) -> Self {
        ComplexInterval {
            re,
            im: Interval::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(Interval::from_int(n))
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexInterval {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexInterval {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn recip(&self) -> Option<Self> {
        let norm = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        let inv = norm.recip()?;
        Some(ComplexInterval {
            re: self.re.mul(&inv),
            im: self.im.neg().mul(&inv),
        })
    }

    pub fn round(&self, bits: u32) -> Self {
        ComplexInterval {
            re: self.re.round(bits),
            im: self.im.round(bits),
        }
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        self.re.overlaps(&o.re) && self.im.overlaps(&o.im)
    }

    pub fn contains(&self, re: &BigRational, im: &BigRational) -> bool {
        self.re.contains(re) && self.im.contains(im)
    }
}

/// Plain-number view used by the CLI and JSON output.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EnclosureSummary {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl From<&ComplexInterval> for EnclosureSummary {
    fn from(c: &ComplexInterval) -> Self {
        EnclosureSummary {
            re: c.re.to_f64_pair(),
            im: c.im.to_f64_pair(),
        }
    }
}

/// Evaluates an integer polynomial (coefficients lowest degree first) at a
/// rational point, exactly.
pub fn eval_int_poly(coeffs: &[i64], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + rat(*c);
    }
    acc
}

/// A real root of an integer polynomial, isolated in `[lo, hi]`.
///
/// Either `lo == hi` (the root is that rational) or the polynomial takes
/// strictly opposite signs at the two ends and has no other root inside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealRoot {
    poly: Vec<i64>,
    lo: BigRational,
    hi: BigRational,
}

impl RealRoot {
    pub fn exact(poly: Vec<i64>, x: BigRational) -> Self {
        RealRoot {
            poly,
            lo: x.clone(),
            hi: x,
        }
    }

    /// Builds an isolating interval. The caller guarantees uniqueness of the
    /// root inside; sign change (or an exact endpoint root) is checked.
    pub fn isolated(poly: Vec<i64>, lo: BigRational, hi: BigRational) -> Self {
        let flo = eval_int_poly(&poly, &lo);
        let fhi = eval_int_poly(&poly, &hi);
        if flo.is_zero() {
            return Self::exact(poly, lo);
        }
        if fhi.is_zero() {
            return Self::exact(poly, hi);
        }
        assert!(
            flo.signum() != fhi.signum(),
            "isolating interval without sign change"
        );
        RealRoot { poly, lo, hi }
    }

    pub fn poly(&self) -> &[i64] {
        &self.poly
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn enclosure(&self) -> Interval {
        Interval::new(self.lo.clone(), self.hi.clone())
    }

    /// Halves the isolating interval.
    pub fn bisect(&mut self) {
        if self.is_exact() {
            return;
        }
        let mid = (&self.lo + &self.hi) / rat(2);
        let fmid = eval_int_poly(&self.poly, &mid);
        if fmid.is_zero() {
            self.lo = mid.clone();
            self.hi = mid;
            return;
        }
        let flo = eval_int_poly(&self.poly, &self.lo);
        if flo.signum() == fmid.signum() {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
    }

    /// Refines until the width is at most `2^-bits`.
    pub fn refine_to(&mut self, bits: u32) {
        let target = BigRational::new(BigInt::one(), pow2(bits));
        while (&self.hi - &self.lo) > target {
            self.bisect();
        }
    }
}

/// `floor(n^(1/k))` for `n >= 0`.
pub fn integer_root(n: &BigInt, k: u32) -> BigInt {
    assert!(!n.is_negative() && k >= 1);
    if n.is_zero() || k == 1 {
        return n.clone();
    }
    let mut lo = BigInt::zero();
    let mut hi = BigInt::one();
    while num_traits::pow(hi.clone(), k as usize) <= *n {
        hi <<= 1usize;
    }
    // invariant lo^k <= n < hi^k
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1usize;
        if num_traits::pow(mid.clone(), k as usize) <= *n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Enclosure of pi at roughly `bits` bits, from Machin's formula.
pub fn pi_enclosure(bits: u32) -> Interval {
    // atan(1/x) as an alternating series; partial sums bracket the limit.
    fn atan_inv(x: i64, bits: u32) -> Interval {
        let x2 = rat(x * x);
        let eps = BigRational::new(BigInt::one(), pow2(bits + 8));
        let mut power = BigRational::new(BigInt::one(), BigInt::from(x));
        let mut sum = BigRational::zero();
        let mut n: i64 = 0;
        loop {
            let term = &power / rat(2 * n + 1);
            let next_sum = if n % 2 == 0 { &sum + &term } else { &sum - &term };
            let next_term = (&power / &x2) / rat(2 * n + 3);
            if next_term < eps {
                // the true value lies between next_sum and next_sum -/+ next_term
                let other = if n % 2 == 0 {
                    &next_sum - &next_term
                } else {
                    &next_sum + &next_term
                };
                let (lo, hi) = if other < next_sum {
                    (other, next_sum)
                } else {
                    (next_sum, other)
                };
                return Interval::new(lo, hi);
            }
            sum = next_sum;
            power = &power / &x2;
            n += 1;
        }
    }
    let a = atan_inv(5, bits + 4).scale(&rat(16));
    let b = atan_inv(239, bits + 4).scale(&rat(4));
    a.sub(&b).round(bits + 2)
}

/// Enclosures of `(cos x, sin x)` for an interval argument with `|x| <= 8`.
pub fn cos_sin(x: &Interval, bits: u32) -> (Interval, Interval) {
    let guard = bits + 24;
    let eps = BigRational::new(BigInt::one(), pow2(guard));
    let mag = {
        let a = x.lo.abs();
        let b = x.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    };
    let mut cos = Interval::zero();
    let mut sin = Interval::zero();
    let mut term = Interval::from_int(1); // x^n / n!
    let mut bound = BigRational::one(); // |x|^n / n!
    let mut n: i64 = 0;
    loop {
        match n % 4 {
            0 => cos = cos.add(&term),
            1 => sin = sin.add(&term),
            2 => cos = cos.sub(&term),
            _ => sin = sin.sub(&term),
        }
        n += 1;
        term = term.mul(x).scale(&BigRational::new(BigInt::one(), BigInt::from(n))).round(guard);
        bound = &bound * &mag / rat(n);
        if n > 8 && bound < eps {
            break;
        }
    }
    // Lagrange remainder: both tails bounded by |x|^n / n!.
    let tail = &bound + &eps;
    (
        cos.inflate(&tail).round(bits + 4),
        sin.inflate(&tail).round(bits + 4),
    )
}

pub fn sign_of(x: &BigRational) -> Ordering {
    x.cmp(&BigRational::zero())
}

/// `floor` of a rational as a `BigInt`.
pub fn floor_rat(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_roots() {
        assert_eq!(integer_root(&BigInt::from(8), 3), BigInt::from(2));
        assert_eq!(integer_root(&BigInt::from(9), 3), BigInt::from(2));
        assert_eq!(integer_root(&BigInt::from(80), 2), BigInt::from(8));
        assert_eq!(integer_root(&BigInt::from(81), 2), BigInt::from(9));
        assert_eq!(integer_root(&BigInt::from(1), 5), BigInt::from(1));
    }

    #[test]
    fn pi_is_bracketed() {
        let pi = pi_enclosure(80);
        let (lo, hi) = pi.to_f64_pair();
        assert!(lo <= std::f64::consts::PI && std::f64::consts::PI <= hi);
        assert!(rat_to_f64(&pi.width()) < 1e-20);
    }

    #[test]
    fn cos_sin_of_quarter_turn() {
        let pi = pi_enclosure(64);
        let half_pi = pi.scale(&BigRational::new(BigInt::one(), BigInt::from(2)));
        let (c, s) = cos_sin(&half_pi, 64);
        assert!(c.contains_zero());
        assert!(s.contains(&rat(1)));
        assert!(rat_to_f64(&c.width()) < 1e-15);
    }

    #[test]
    fn bisection_isolates_golden_conjugate() {
        // X^2 - 3X + 1 in (2, 3)
        let mut r = RealRoot::isolated(vec![1, -3, 1], rat(2), rat(3));
        r.refine_to(40);
        let (lo, hi) = r.enclosure().to_f64_pair();
        let exact = (3.0 + 5f64.sqrt()) / 2.0;
        assert!(lo <= exact + 1e-12 && exact - 1e-12 <= hi);
    }

    #[test]
    fn rounding_is_outward() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let i = Interval::point(third.clone()).round(10);
        assert!(i.contains(&third));
        assert!(i.lo < i.hi);
    }
}
