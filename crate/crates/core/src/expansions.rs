//! Finite representations of numbers: greedy (Renyi), T_m, Akiyama-Scheicher
//! and the modified Euclidean recursion for integer and rational bases.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bounds::lower_bound_ceil;
use crate::digits::DigitString;
use crate::field::{Elem, PrecisionExhausted, RealField};
use crate::interval::rat;
use crate::system::{BaseFamily, BaseSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("{operation} expansion is not supported for base {base}")]
    UnsupportedBase { operation: &'static str, base: String },
    #[error("interval refinement could not decide a floor")]
    PrecisionExhausted,
    #[error("x cannot be scaled into the window of the transformation")]
    NotRepresentableInWindow,
    #[error("negative input {0} for a positive base")]
    NegativeInputForPositiveBase(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
}

impl From<PrecisionExhausted> for ExpansionError {
    fn from(_: PrecisionExhausted) -> Self {
        ExpansionError::PrecisionExhausted
    }
}

/// An expansion together with whether it terminated exactly. A non-exact
/// expansion is a truncated prefix of an infinite one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expansion {
    pub digits: DigitString,
    pub exact: bool,
}

/// How far to search for the scaling exponent before giving up.
const MAX_SCALE: i64 = 4096;

fn field_for(base: &BaseSpec, operation: &'static str) -> Result<RealField, ExpansionError> {
    RealField::for_base(base).ok_or_else(|| ExpansionError::UnsupportedBase {
        operation,
        base: base.mnemonic(),
    })
}

/// Finds `n` with `x * beta^-n` inside the window, trying `n = 0, 1, ...`
/// first and then `n = -1, -2, ...`.
fn scale_into(
    field: &mut RealField,
    x: &Elem,
    inside: &mut dyn FnMut(&mut RealField, &Elem) -> Result<bool, PrecisionExhausted>,
) -> Result<(i64, Elem), ExpansionError> {
    let mut y = x.clone();
    for n in 0..=MAX_SCALE {
        if inside(field, &y)? {
            return Ok((n, y));
        }
        y = field.div_beta(&y);
    }
    let mut y = field.mul_beta(x);
    for n in 1..=MAX_SCALE {
        if inside(field, &y)? {
            return Ok((-n, y));
        }
        y = field.mul_beta(&y);
    }
    Err(ExpansionError::NotRepresentableInWindow)
}

/// Iterates `y <- beta*y - D(y)` from exponent `n-1` downward.
fn run_transformation(
    field: &mut RealField,
    n: i64,
    mut y: Elem,
    max_digits: usize,
    digit: &mut dyn FnMut(&mut RealField, &Elem) -> Result<i64, PrecisionExhausted>,
) -> Result<Expansion, ExpansionError> {
    let mut out = Vec::new();
    while !RealField::is_zero(&y) && out.len() < max_digits {
        let by = field.mul_beta(&y);
        let d = digit(field, &by)?;
        out.push(d);
        y = field.add_int(&by, -d);
    }
    let exact = RealField::is_zero(&y);
    let lsd = n - out.len() as i64;
    Ok(Expansion {
        digits: DigitString::new(lsd, out).normalize(),
        exact,
    })
}

fn floor_i64(field: &mut RealField, e: &Elem) -> Result<i64, PrecisionExhausted> {
    Ok(field.floor(e)?.to_i64().expect("digit fits in i64"))
}

/// Renyi expansion of `x >= 0` on `{0, ..., ceil(beta)-1}`.
pub fn greedy_expansion(
    x: &BigRational,
    base: &BaseSpec,
    max_digits: usize,
) -> Result<Expansion, ExpansionError> {
    let mut field = field_for(base, "greedy")?;
    if x.is_negative() {
        return Err(ExpansionError::NegativeInputForPositiveBase(x.to_string()));
    }
    if x.is_zero() {
        return Ok(Expansion {
            digits: DigitString::zero(),
            exact: true,
        });
    }
    let x = field.from_rational(x.clone());
    let (n, y) = scale_into(&mut field, &x, &mut |f, y| {
        Ok(f.cmp_int(y, 1)? == Ordering::Less)
    })?;
    run_transformation(&mut field, n, y, max_digits, &mut |f, by| floor_i64(f, by))
}

/// Expansion by `T_m(x) = beta x - floor(beta x - m/(beta-1))` on
/// `{m, ..., m + ceil(beta) - 1}`. Requires `m <= 0 <= m + ceil(beta) - 1`.
pub fn tm_expansion(
    x: &BigRational,
    m: i64,
    base: &BaseSpec,
    max_digits: usize,
) -> Result<Expansion, ExpansionError> {
    let mut field = field_for(base, "T_m")?;
    let ceil = lower_bound_ceil(base).map_err(|_| ExpansionError::UnsupportedBase {
        operation: "T_m",
        base: base.mnemonic(),
    })?;
    if !(m <= 0 && 0 < m + ceil) {
        return Err(ExpansionError::ParameterOutOfRange(format!(
            "need m <= 0 <= m + {}, got m = {m}",
            ceil - 1
        )));
    }
    if x.is_zero() && m == 0 {
        return Ok(Expansion {
            digits: DigitString::zero(),
            exact: true,
        });
    }
    let beta = field.beta();
    let inv = field.inverse(&field.add_int(&beta, -1)).expect("beta != 1");
    // c = m / (beta - 1); J_m = [c, c + 1)
    let c = RealField::scale(&inv, &rat(m));
    let x = field.from_rational(x.clone());
    let (n, y) = scale_into(&mut field, &x, &mut |f, y| {
        let w = RealField::sub(y, &c);
        Ok(f.sign(&w)? != Ordering::Less && f.cmp_int(&w, 1)? == Ordering::Less)
    })?;
    run_transformation(&mut field, n, y, max_digits, &mut |f, by| {
        floor_i64(f, &RealField::sub(by, &c))
    })
}

/// Symmetric expansion by `S(x) = beta x - floor(beta x + 1/2)` on
/// `Z ∩ (-(beta+1)/2, (beta+1)/2)`.
pub fn akiyama_scheicher_expansion(
    x: &BigRational,
    base: &BaseSpec,
    max_digits: usize,
) -> Result<Expansion, ExpansionError> {
    akiyama_scheicher_traced(x, base, max_digits).map(|(e, _)| e)
}

/// Also reports whether some step landed exactly on a rounding tie
/// (`beta y + 1/2` an integer). Only then can the expansion of `-x` differ
/// from the digitwise negation, because the window `[-1/2, 1/2)` is
/// half-open.
pub(crate) fn akiyama_scheicher_traced(
    x: &BigRational,
    base: &BaseSpec,
    max_digits: usize,
) -> Result<(Expansion, bool), ExpansionError> {
    let mut field = field_for(base, "Akiyama-Scheicher")?;
    if x.is_zero() {
        return Ok((
            Expansion {
                digits: DigitString::zero(),
                exact: true,
            },
            false,
        ));
    }
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let x = field.from_rational(x.clone());
    let (n, y) = scale_into(&mut field, &x, &mut |f, y| {
        let shifted = RealField::add(y, &f.from_rational(half.clone()));
        Ok(f.sign(&shifted)? != Ordering::Less && f.cmp_int(&shifted, 1)? == Ordering::Less)
    })?;
    let mut tie = false;
    let e = run_transformation(&mut field, n, y, max_digits, &mut |f, by| {
        let shifted = RealField::add(by, &f.from_rational(half.clone()));
        let d = floor_i64(f, &shifted)?;
        if RealField::is_zero(&f.add_int(&shifted, -d)) {
            tie = true;
        }
        Ok(d)
    })?;
    Ok((e, tie))
}

/// Digits `{-k, ..., k}` used by the Akiyama-Scheicher expansion.
pub fn akiyama_scheicher_digit_bound(base: &BaseSpec) -> Result<i64, ExpansionError> {
    let mut field = field_for(base, "Akiyama-Scheicher")?;
    // largest integer k with k < (beta + 1)/2, i.e. 2k - 1 < beta
    let beta = field.beta();
    let mut k = 0;
    while field.cmp_int(&beta, 2 * (k + 1) - 1)? == Ordering::Greater {
        k += 1;
    }
    Ok(k)
}

/// Modified Euclidean division: `d = n mod a`, `next = +-b (n - d) / a`.
pub fn euclid_expansion(n: &BigInt, base: &BaseSpec) -> Result<DigitString, ExpansionError> {
    use BaseFamily::*;
    let (a, b, negative) = match *base.family() {
        Integer { b } => (b, 1, false),
        NegativeInteger { b } => (b, 1, true),
        Root { b, k: 1, branch: 0 } => (b, 1, false),
        NegativeRoot { b, k: 1, branch: 0 } => (b, 1, true),
        RationalPos { a, b } => (a, b, false),
        RationalNeg { a, b } => (a, b, true),
        _ => {
            return Err(ExpansionError::UnsupportedBase {
                operation: "Euclid",
                base: base.mnemonic(),
            })
        }
    };
    if !negative && n.is_negative() {
        return Err(ExpansionError::NegativeInputForPositiveBase(n.to_string()));
    }
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    let mut n = n.clone();
    let mut lsd_first = Vec::new();
    while !n.is_zero() {
        let d = n.mod_floor(&a);
        let q = (&n - &d) / &a * &b;
        lsd_first.push(d.to_i64().unwrap());
        n = if negative { -q } else { q };
        // |next| shrinks once |n| is large; short cycles would be a bug
        assert!(lsd_first.len() < 1 << 20, "Euclid recursion does not terminate");
    }
    Ok(DigitString::from_lsd_first(0, lsd_first).normalize())
}
