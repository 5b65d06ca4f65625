//! Elements of Q(beta) for real bases beta > 1, with exact sign and floor.
//!
//! An element is a coefficient vector modulo the minimal polynomial. Since
//! the polynomial is irreducible, a nonzero vector is a nonzero number, so
//! interval refinement of beta always terminates when deciding a sign.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bounds::minimal_form;
use crate::interval::{floor_rat, rat, Interval, RealRoot};
use crate::system::{BaseFamily, BaseSpec};

/// Largest refinement tried before giving up on a sign decision.
pub const MAX_PRECISION_BITS: u32 = 1 << 14;

#[derive(Clone, Debug)]
pub struct RealField {
    // monic minimal polynomial, lowest degree first, length degree+1
    minpoly: Vec<BigRational>,
    beta: RealRoot,
}

pub type Elem = Vec<BigRational>;

impl RealField {
    /// The field generated by a real base beta > 1, or `None` for other
    /// bases. Root bases not in minimal form are reduced first.
    pub fn for_base(base: &BaseSpec) -> Option<RealField> {
        let reduced;
        let base = match *base.family() {
            BaseFamily::Root { b, k, branch: 0 } => match minimal_form(b, k).reduced {
                Some((c, k2)) => {
                    reduced = BaseSpec::root(c, k2).ok()?;
                    &reduced
                }
                None => base,
            },
            _ => base,
        };
        if !base.is_real_above_one() {
            return None;
        }
        let beta = base.real_interval()?;
        let poly = base.defining_poly();
        let lead = rat(*poly.last().unwrap());
        let minpoly = poly.iter().map(|&c| rat(c) / &lead).collect();
        Some(RealField { minpoly, beta })
    }

    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    pub fn from_rational(&self, x: BigRational) -> Elem {
        let mut e = vec![BigRational::zero(); self.degree()];
        e[0] = x;
        e
    }

    pub fn from_int(&self, n: i64) -> Elem {
        self.from_rational(rat(n))
    }

    /// beta itself.
    pub fn beta(&self) -> Elem {
        self.mul_beta(&self.from_int(1))
    }

    pub fn is_zero(e: &Elem) -> bool {
        e.iter().all(Zero::is_zero)
    }

    pub fn add(a: &Elem, b: &Elem) -> Elem {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn sub(a: &Elem, b: &Elem) -> Elem {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    pub fn scale(a: &Elem, k: &BigRational) -> Elem {
        a.iter().map(|x| x * k).collect()
    }

    pub fn add_int(&self, a: &Elem, n: i64) -> Elem {
        let mut out = a.clone();
        out[0] += rat(n);
        out
    }

    pub fn mul_beta(&self, a: &Elem) -> Elem {
        let d = self.degree();
        let top = a[d - 1].clone();
        let mut out = vec![BigRational::zero(); d];
        for i in (1..d).rev() {
            out[i] = a[i - 1].clone();
        }
        if !top.is_zero() {
            for (i, m) in self.minpoly[..d].iter().enumerate() {
                out[i] -= &top * m;
            }
        }
        out
    }

    pub fn div_beta(&self, a: &Elem) -> Elem {
        let d = self.degree();
        let mut out = vec![BigRational::zero(); d];
        out[..d - 1].clone_from_slice(&a[1..d]);
        // X^-1 = -(X^(d-1) + m_(d-1) X^(d-2) + ... + m_1) / m_0
        let e0 = &a[0];
        if !e0.is_zero() {
            let m0 = &self.minpoly[0];
            for i in 1..=d {
                out[i - 1] -= e0 * &self.minpoly[i] / m0;
            }
        }
        out
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let d = self.degree();
        let mut acc = vec![BigRational::zero(); d];
        // Horner over the coefficients of b
        for c in b.iter().rev() {
            acc = self.mul_beta(&acc);
            acc = RealField::add(&acc, &RealField::scale(a, c));
        }
        acc
    }

    /// Multiplicative inverse by solving the linear system `a * y = 1`.
    pub fn inverse(&self, a: &Elem) -> Option<Elem> {
        if RealField::is_zero(a) {
            return None;
        }
        let d = self.degree();
        // column j = a * beta^j
        let mut cols = Vec::with_capacity(d);
        let mut cur = a.clone();
        for _ in 0..d {
            cols.push(cur.clone());
            cur = self.mul_beta(&cur);
        }
        let mut m: Vec<Vec<BigRational>> = (0..d)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..d).map(|j| cols[j][i].clone()).collect();
                row.push(if i == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        for col in 0..d {
            let pivot = (col..d).find(|&r| !m[r][col].is_zero())?;
            m.swap(col, pivot);
            let p = m[col][col].clone();
            for v in m[col].iter_mut() {
                *v = &*v / &p;
            }
            for r in 0..d {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    let pivot_row = m[col].clone();
                    for (v, w) in m[r].iter_mut().zip(&pivot_row).skip(col) {
                        *v -= &f * w;
                    }
                }
            }
        }
        Some(m.into_iter().map(|row| row[d].clone()).collect())
    }

    /// Enclosure of the element's value with beta refined to `bits`.
    pub fn enclosure(&mut self, a: &Elem, bits: u32) -> Interval {
        self.beta.refine_to(bits);
        let b = self.beta.enclosure();
        let mut acc = Interval::zero();
        for c in a.iter().rev() {
            acc = acc.mul(&b).add(&Interval::point(c.clone())).round(bits + 8);
        }
        acc
    }

    pub fn sign(&mut self, a: &Elem) -> Result<Ordering, PrecisionExhausted> {
        if RealField::is_zero(a) {
            return Ok(Ordering::Equal);
        }
        let mut bits = 32;
        while bits <= MAX_PRECISION_BITS {
            let e = self.enclosure(a, bits);
            if e.lo.is_positive() {
                return Ok(Ordering::Greater);
            }
            if e.hi.is_negative() {
                return Ok(Ordering::Less);
            }
            bits *= 2;
        }
        Err(PrecisionExhausted)
    }

    pub fn cmp_int(&mut self, a: &Elem, n: i64) -> Result<Ordering, PrecisionExhausted> {
        self.sign(&self.add_int(a, -n))
    }

    pub fn floor(&mut self, a: &Elem) -> Result<BigInt, PrecisionExhausted> {
        let mut bits = 32;
        loop {
            let e = self.enclosure(a, bits);
            let lo = floor_rat(&e.lo);
            let hi = floor_rat(&e.hi);
            if lo == hi {
                return Ok(lo);
            }
            if &hi - &lo == BigInt::one() {
                let shifted = {
                    let mut s = a.clone();
                    s[0] -= BigRational::from_integer(hi.clone());
                    s
                };
                return Ok(if self.sign(&shifted)? == Ordering::Less { lo } else { hi });
            }
            bits *= 2;
            if bits > MAX_PRECISION_BITS {
                return Err(PrecisionExhausted);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionExhausted;
