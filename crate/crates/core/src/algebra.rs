//! Exact arithmetic in Z[beta].
//!
//! A digit string represents `p(beta)` for a Laurent polynomial `p`. Two
//! strings represent the same number when their difference, shifted to clear
//! negative exponents, is a multiple of the defining polynomial `f`. Every
//! `f` produced by [`BaseSpec::defining_poly`] is primitive with nonzero
//! constant term, so divisibility over Q and over Z coincide and can be
//! decided by exact division from the constant term upward.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::digits::DigitString;
use crate::interval::{cos_sin, integer_root, pi_enclosure, rat, ComplexInterval, Interval, RealRoot};
use crate::system::{BaseFamily, BaseSpec};

/// Finite Laurent polynomial with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    lsd_exponent: i64,
    // lowest exponent first; normalized: no zeros at either end
    coeffs: Vec<BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly {
            lsd_exponent: 0,
            coeffs: Vec::new(),
        }
    }

    /// From lowest-exponent-first coefficients.
    pub fn from_low_first(lsd_exponent: i64, coeffs: Vec<BigInt>) -> Self {
        LaurentPoly {
            lsd_exponent,
            coeffs,
        }
        .normalized()
    }

    pub fn from_i64_low_first(lsd_exponent: i64, coeffs: &[i64]) -> Self {
        Self::from_low_first(lsd_exponent, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `c * X^e`.
    pub fn monomial(c: i64, e: i64) -> Self {
        Self::from_i64_low_first(e, &[c])
    }

    fn normalized(mut self) -> Self {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            return LaurentPoly::zero();
        }
        self.coeffs.drain(..lead);
        self.lsd_exponent += lead as i64;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn lsd_exponent(&self) -> i64 {
        self.lsd_exponent
    }

    /// Coefficients most significant first.
    pub fn coefficients(&self) -> Vec<BigInt> {
        self.coeffs.iter().rev().cloned().collect()
    }

    pub fn low_first(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        let i = e - self.lsd_exponent;
        if i < 0 || i as usize >= self.coeffs.len() {
            BigInt::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    pub fn max_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.lsd_exponent + self.coeffs.len() as i64 - 1)
        }
    }

    pub fn add(&self, q: &LaurentPoly) -> LaurentPoly {
        self.combine(q, |a, b| a + b)
    }

    pub fn sub(&self, q: &LaurentPoly) -> LaurentPoly {
        self.combine(q, |a, b| a - b)
    }

    fn combine(&self, q: &LaurentPoly, op: impl Fn(&BigInt, &BigInt) -> BigInt) -> LaurentPoly {
        if self.is_zero() && q.is_zero() {
            return LaurentPoly::zero();
        }
        let lo = match (self.is_zero(), q.is_zero()) {
            (true, _) => q.lsd_exponent,
            (_, true) => self.lsd_exponent,
            _ => self.lsd_exponent.min(q.lsd_exponent),
        };
        let hi = self.max_exponent().into_iter().chain(q.max_exponent()).max().unwrap();
        let coeffs = (lo..=hi).map(|e| op(&self.coeff(e), &q.coeff(e))).collect();
        LaurentPoly::from_low_first(lo, coeffs)
    }

    pub fn mul(&self, q: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || q.is_zero() {
            return LaurentPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + q.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in q.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        LaurentPoly::from_low_first(self.lsd_exponent + q.lsd_exponent, out)
    }

    /// Multiplies by `X^k`.
    pub fn shift(&self, k: i64) -> LaurentPoly {
        if self.is_zero() {
            return self.clone();
        }
        LaurentPoly {
            lsd_exponent: self.lsd_exponent + k,
            coeffs: self.coeffs.clone(),
        }
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let e = self.lsd_exponent + i as i64;
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one() && e != 0;
            if !unit {
                write!(f, "{mag}")?;
            }
            match e {
                0 => {}
                1 => f.write_str("X")?,
                _ => write!(f, "X^{e}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LaurentPoly", 2)?;
        st.serialize_field("lsd_exponent", &self.lsd_exponent)?;
        let c: Vec<String> = self.coefficients().iter().map(|c| c.to_string()).collect();
        st.serialize_field("coefficients", &c)?;
        st.end()
    }
}

/// Coefficient at exponent `j` is the digit at exponent `j`.
pub fn to_poly(ds: &DigitString) -> LaurentPoly {
    LaurentPoly::from_low_first(
        ds.lsd_exponent,
        ds.digits.iter().rev().map(|&d| BigInt::from(d)).collect(),
    )
}

pub fn sub(p: &LaurentPoly, q: &LaurentPoly) -> LaurentPoly {
    p.sub(q)
}

fn defining_big(base: &BaseSpec) -> Vec<BigInt> {
    base.defining_poly().into_iter().map(BigInt::from).collect()
}

/// Remainder of `X^s p` modulo the defining polynomial, where `s` clears
/// negative exponents. The rational remainder is scaled by the least common
/// denominator so the result has integer coefficients; it is zero exactly
/// when `X^s p` is a multiple of the defining polynomial.
pub fn reduce_mod_base(p: &LaurentPoly, base: &BaseSpec) -> LaurentPoly {
    if p.is_zero() {
        return LaurentPoly::zero();
    }
    let s = (-p.lsd_exponent).max(0);
    let shifted = p.shift(s);
    // dense, exponent 0 first
    let mut r: Vec<BigRational> = (0..=shifted.max_exponent().unwrap())
        .map(|e| BigRational::from_integer(shifted.coeff(e)))
        .collect();
    let f = defining_big(base);
    let df = f.len() - 1;
    let lead = BigRational::from_integer(f[df].clone());
    while r.len() > df {
        let top = r.len() - 1;
        let c = &r[top] / &lead;
        if !c.is_zero() {
            for (i, fi) in f.iter().enumerate() {
                let idx = top - df + i;
                r[idx] -= &c * BigRational::from_integer(fi.clone());
            }
        }
        r.pop();
    }
    let denom = r
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let coeffs = r
        .into_iter()
        .map(|c| (c * BigRational::from_integer(denom.clone())).to_integer())
        .collect();
    LaurentPoly::from_low_first(0, coeffs)
}

/// Bottom-up exact division of a dense polynomial (exponent 0 first) by `f`.
/// Returns the quotient when `f` divides it.
fn exact_divide_i128(p: &[i128], f: &[i128]) -> Option<Option<Vec<i128>>> {
    let df = f.len() - 1;
    if p.len() <= df {
        return Some(if p.iter().all(|&c| c == 0) { Some(Vec::new()) } else { None });
    }
    let n = p.len() - df;
    let mut rem: Vec<i128> = p.to_vec();
    let mut q = vec![0i128; n];
    for i in 0..n {
        let c = rem[i];
        if c % f[0] != 0 {
            return Some(None);
        }
        let qi = c / f[0];
        q[i] = qi;
        if qi != 0 {
            for (j, fj) in f.iter().enumerate() {
                let t = qi.checked_mul(*fj)?;
                rem[i + j] = rem[i + j].checked_sub(t)?;
            }
        }
    }
    Some(if rem[n..].iter().all(|&c| c == 0) { Some(q) } else { None })
}

fn exact_divide_big(p: &[BigInt], f: &[BigInt]) -> Option<Vec<BigInt>> {
    let df = f.len() - 1;
    if p.len() <= df {
        return if p.iter().all(Zero::is_zero) { Some(Vec::new()) } else { None };
    }
    let n = p.len() - df;
    let mut rem: Vec<BigInt> = p.to_vec();
    let mut q = vec![BigInt::zero(); n];
    for i in 0..n {
        let (qi, r) = rem[i].div_rem(&f[0]);
        if !r.is_zero() {
            return None;
        }
        if !qi.is_zero() {
            for (j, fj) in f.iter().enumerate() {
                rem[i + j] -= &qi * fj;
            }
        }
        q[i] = qi;
    }
    if rem[n..].iter().all(Zero::is_zero) {
        Some(q)
    } else {
        None
    }
}

/// If the defining polynomial divides `p` (after clearing negative
/// exponents), returns `q` with `p = f * q` as Laurent polynomials, where
/// `f` is taken at exponent 0.
pub fn exact_quotient(p: &LaurentPoly, base: &BaseSpec) -> Option<LaurentPoly> {
    if p.is_zero() {
        return Some(LaurentPoly::zero());
    }
    let f = base.defining_poly();
    let small: Option<Vec<i128>> = p.coeffs.iter().map(|c| c.to_i128()).collect();
    if let Some(small) = small {
        let f128: Vec<i128> = f.iter().map(|&c| c as i128).collect();
        if let Some(res) = exact_divide_i128(&small, &f128) {
            return res.map(|q| {
                LaurentPoly::from_low_first(p.lsd_exponent, q.into_iter().map(BigInt::from).collect())
            });
        }
    }
    let fb = defining_big(base);
    exact_divide_big(&p.coeffs, &fb).map(|q| LaurentPoly::from_low_first(p.lsd_exponent, q))
}

/// Whether the difference of two polynomials vanishes at beta.
pub fn poly_vanishes(p: &LaurentPoly, base: &BaseSpec) -> bool {
    exact_quotient(p, base).is_some()
}

/// Exact equality of represented values.
pub fn values_equal(x: &DigitString, y: &DigitString, base: &BaseSpec) -> bool {
    // Dense i64 difference without going through BigInt; falls back on overflow.
    let x = x.normalize();
    let y = y.normalize();
    if x == y {
        return true;
    }
    if x.is_empty() || y.is_empty() {
        let nz = if x.is_empty() { &y } else { &x };
        return poly_vanishes(&to_poly(nz), base);
    }
    let lo = x.lsd_exponent.min(y.lsd_exponent);
    let hi = x.msd_exponent().unwrap().max(y.msd_exponent().unwrap());
    let len = (hi - lo + 1) as usize;
    let mut diff = Vec::with_capacity(len);
    for e in lo..=hi {
        diff.push(x.digit_at(e) as i128 - y.digit_at(e) as i128);
    }
    let start = diff.iter().position(|&c| c != 0);
    let Some(start) = start else {
        return true;
    };
    let end = diff.iter().rposition(|&c| c != 0).unwrap();
    let f: Vec<i128> = base.defining_poly().iter().map(|&c| c as i128).collect();
    match exact_divide_i128(&diff[start..=end], &f) {
        Some(res) => res.is_some(),
        None => {
            let big: Vec<BigInt> = diff[start..=end].iter().map(|&c| BigInt::from(c)).collect();
            exact_divide_big(&big, &defining_big(base)).is_some()
        }
    }
}

/// Value of the digit string as an exact rational, for rational and integer
/// bases.
pub fn rational_value(ds: &DigitString, base: &BaseSpec) -> Option<BigRational> {
    let beta = match *base.family() {
        BaseFamily::Integer { b } => rat(b),
        BaseFamily::NegativeInteger { b } => rat(-b),
        BaseFamily::RationalPos { a, b } => BigRational::new(BigInt::from(a), BigInt::from(b)),
        BaseFamily::RationalNeg { a, b } => BigRational::new(BigInt::from(-a), BigInt::from(b)),
        BaseFamily::Root { b, k: 1, branch: 0 } => rat(b),
        BaseFamily::NegativeRoot { b, k: 1, branch: 0 } => rat(-b),
        _ => return None,
    };
    let ds = ds.normalize();
    if ds.is_empty() {
        return Some(BigRational::zero());
    }
    let mut acc = BigRational::zero();
    for &d in &ds.digits {
        acc = acc * &beta + rat(d);
    }
    Some(acc * pow_rat(&beta, ds.lsd_exponent))
}

fn pow_rat(x: &BigRational, e: i64) -> BigRational {
    let base = if e < 0 { x.recip() } else { x.clone() };
    num_traits::pow(base, e.unsigned_abs() as usize)
}

/// Certified enclosure of beta.
pub fn beta_enclosure(base: &BaseSpec, bits: u32) -> ComplexInterval {
    let bits = bits.max(16);
    if let Some(mut root) = base.real_interval() {
        root.refine_to(bits + 8);
        return ComplexInterval::real(root.enclosure());
    }
    let (b, k, angle_num, angle_den) = match *base.family() {
        // e^(2 pi i l / k)
        BaseFamily::Root { b, k, branch } => (b, k, 2 * branch as i64, k as i64),
        // e^(pi i (2l+1) / k)
        BaseFamily::NegativeRoot { b, k, branch } => (b, k, 2 * branch as i64 + 1, k as i64),
        _ => unreachable!("real bases have an isolating interval"),
    };
    let r = integer_root(&BigInt::from(b), k).to_i64().unwrap();
    let mut modulus = RealRoot::isolated(
        {
            let mut p = vec![0; k as usize + 1];
            p[0] = -b;
            p[k as usize] = 1;
            p
        },
        rat(r),
        rat(r + 1),
    );
    modulus.refine_to(bits + 8);
    // reduce the angle into (-pi, pi] so the Taylor series stays short
    let mut num = angle_num % (2 * angle_den);
    if num > angle_den {
        num -= 2 * angle_den;
    }
    let theta = pi_enclosure(bits + 16).scale(&BigRational::new(BigInt::from(num), BigInt::from(angle_den)));
    let (c, s) = cos_sin(&theta, bits + 8);
    let m = modulus.enclosure();
    ComplexInterval {
        re: m.mul(&c),
        im: m.mul(&s),
    }
    .round(bits + 8)
}

/// Certified enclosure of the value represented by `ds`.
pub fn eval_approx(ds: &DigitString, base: &BaseSpec, precision_bits: u32) -> ComplexInterval {
    let bits = precision_bits.max(16);
    let ds = ds.normalize();
    if ds.is_empty() {
        return ComplexInterval::from_int(0);
    }
    if let Some(v) = rational_value(&ds, base) {
        return ComplexInterval::real(Interval::point(v));
    }
    let beta = beta_enclosure(base, bits + 2 * ds.len() as u32);
    let guard = bits + 16 + 2 * ds.len() as u32;
    let mut acc = ComplexInterval::from_int(0);
    for &d in &ds.digits {
        acc = acc.mul(&beta).add(&ComplexInterval::from_int(d)).round(guard);
    }
    let e = ds.lsd_exponent;
    if e != 0 {
        let step = if e < 0 { beta.recip().expect("|beta| > 1") } else { beta };
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&step).round(guard);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::parse_digit_string;
    use proptest::prelude::*;

    fn p(text: &str) -> DigitString {
        parse_digit_string(text).unwrap()
    }

    fn neg2() -> BaseSpec {
        BaseSpec::negative_integer(2).unwrap()
    }

    #[test]
    fn poly_conversion() {
        assert_eq!(to_poly(&p("2 1 .")).to_string(), "2X + 1");
        assert!(to_poly(&p(".")).is_zero());
        assert_eq!(to_poly(&p("1 0 . 1")).to_string(), "X + X^-1");
    }

    #[test]
    fn subtraction() {
        let a = LaurentPoly::from_i64_low_first(0, &[1, 1, 1]);
        let three = LaurentPoly::monomial(3, 0);
        assert_eq!(a.sub(&three).to_string(), "X^2 + X - 2");
        assert!(a.sub(&a).is_zero());
        let d = to_poly(&p("2 1 .")).sub(&to_poly(&p("1 0 . 1")));
        assert_eq!(d.to_string(), "X + 1 - X^-1");
    }

    #[test]
    fn remainders() {
        let q = LaurentPoly::from_i64_low_first(0, &[-2, 1, 1]);
        assert!(reduce_mod_base(&q, &neg2()).is_zero());
        let q = LaurentPoly::from_i64_low_first(0, &[-1, 1]);
        assert_eq!(reduce_mod_base(&q, &neg2()), LaurentPoly::monomial(-3, 0));
        assert!(reduce_mod_base(&LaurentPoly::zero(), &neg2()).is_zero());
        // non-monic: 2X - 3 divides 4X^2 - 9
        let r32 = BaseSpec::rational(3, 2).unwrap();
        let q = LaurentPoly::from_i64_low_first(0, &[-9, 0, 4]);
        assert!(reduce_mod_base(&q, &r32).is_zero());
        assert!(!reduce_mod_base(&LaurentPoly::monomial(1, -2), &r32).is_zero());
    }

    #[test]
    fn equalities() {
        assert!(values_equal(&p("1 1 1 ."), &p("3 ."), &neg2()));
        let r32 = BaseSpec::rational(3, 2).unwrap();
        assert!(values_equal(&p("2 1 ."), &p("4 ."), &r32));
        assert!(!values_equal(&p("2 1 ."), &p("5 ."), &r32));
        let x = p("1 0 . 1");
        assert!(values_equal(&x, &x, &r32));
        let pm = BaseSpec::pisot_minus(3).unwrap();
        assert!(values_equal(&p("1 0 . 1"), &p("3 ."), &pm));
        assert!(values_equal(&p("1 1 . 1"), &p("4 ."), &pm));
        let pp = BaseSpec::pisot_plus(2).unwrap();
        assert!(values_equal(&p("1 1 . 1 1"), &p("4 ."), &pp));
        assert!(values_equal(&p("2 1 1 ."), &p("4 ."), &BaseSpec::negative_rational(3, 2).unwrap()));
    }

    #[test]
    fn quotient_recovers_factor() {
        let f = LaurentPoly::from_i64_low_first(0, &[2, 1]);
        let g = LaurentPoly::from_i64_low_first(-1, &[3, -1, 4]);
        let q = exact_quotient(&f.mul(&g), &neg2()).unwrap();
        assert_eq!(q, g);
    }

    #[test]
    fn enclosures() {
        let r32 = BaseSpec::rational(3, 2).unwrap();
        assert!(eval_approx(&p("2 1 ."), &r32, 32).contains(&rat(4), &rat(0)));
        let z = eval_approx(&p("."), &r32, 32);
        assert_eq!(z, ComplexInterval::from_int(0));
        let b = BaseSpec::minus_one_plus_i();
        let e = eval_approx(&p("1 0 ."), &b, 40);
        assert!(e.contains(&rat(-1), &rat(1)));
        let two_i = eval_approx(&p("1 0 ."), &BaseSpec::two_i(), 40);
        assert!(two_i.contains(&rat(0), &rat(2)));
        // 1+i on the first-quadrant branch
        let q1 = BaseSpec::new(BaseFamily::NegativeRoot { b: 4, k: 4, branch: 0 }).unwrap();
        assert!(eval_approx(&p("1 0 ."), &q1, 40).contains(&rat(1), &rat(1)));
        assert!(eval_approx(&p("1 ."), &b, 40).contains(&rat(1), &rat(0)));
        let pm = BaseSpec::pisot_minus(3).unwrap();
        let v = eval_approx(&p("1 0 . 1"), &pm, 40);
        assert!(v.contains(&rat(3), &rat(0)));
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
        (-3i64..3, proptest::collection::vec(-20i64..20, 0..8))
            .prop_map(|(e, c)| LaurentPoly::from_i64_low_first(e, &c))
    }

    fn catalog_bases() -> Vec<BaseSpec> {
        vec![
            neg2(),
            BaseSpec::integer(10).unwrap(),
            BaseSpec::rational(3, 2).unwrap(),
            BaseSpec::negative_rational(5, 3).unwrap(),
            BaseSpec::pisot_minus(4).unwrap(),
            BaseSpec::pisot_plus(2).unwrap(),
            BaseSpec::minus_one_plus_i(),
            BaseSpec::two_i(),
            BaseSpec::root(2, 3).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn ideal_membership(q in arb_poly(), which in 0usize..9) {
            let base = &catalog_bases()[which];
            let f = LaurentPoly::from_i64_low_first(0, &base.defining_poly());
            let m = f.mul(&q);
            prop_assert!(reduce_mod_base(&m, base).is_zero());
            prop_assert!(poly_vanishes(&m, base));
        }

        #[test]
        fn division_agrees_with_remainder(q in arb_poly(), which in 0usize..9) {
            let base = &catalog_bases()[which];
            prop_assert_eq!(reduce_mod_base(&q, base).is_zero(), poly_vanishes(&q, base));
        }

        #[test]
        fn equal_values_have_overlapping_enclosures(
            a in proptest::collection::vec(0i64..4, 0..6),
            b in proptest::collection::vec(0i64..4, 0..6),
            which in 0usize..9,
        ) {
            let base = &catalog_bases()[which];
            let x = DigitString::new(-1, a);
            let y = DigitString::new(0, b);
            if values_equal(&x, &y, base) {
                for bits in [16, 48] {
                    prop_assert!(eval_approx(&x, base, bits).overlaps(&eval_approx(&y, base, bits)));
                }
            }
            // shifting both sides by a multiple of f keeps equality
            let f = LaurentPoly::from_i64_low_first(0, &base.defining_poly());
            let sum = to_poly(&x).add(&f);
            prop_assert!(poly_vanishes(&sum.sub(&to_poly(&x)), base));
        }
    }
}
