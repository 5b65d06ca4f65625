//! Lower bounds on the alphabet size needed for parallel addition, and the
//! minimal alphabets actually achieved by the rule catalog.

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::interval::integer_root;
use crate::system::{BaseFamily, BaseSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("{bound} bound not applicable to base {base}: {reason}")]
    NotApplicable {
        bound: &'static str,
        base: String,
        reason: &'static str,
    },
}

fn not_applicable(bound: &'static str, base: &BaseSpec, reason: &'static str) -> BoundsError {
    BoundsError::NotApplicable {
        bound,
        base: base.mnemonic(),
        reason,
    }
}

/// `ceil(beta)` for real `beta > 1`, or for the positive real conjugate `> 1`
/// of a positive root base.
pub fn lower_bound_ceil(base: &BaseSpec) -> Result<i64, BoundsError> {
    use BaseFamily::*;
    match *base.family() {
        Integer { b } => Ok(b),
        RationalPos { a, b } => Ok((a + b - 1) / b),
        // a-1 < beta < a
        PisotMinus { a } => Ok(a),
        // a < beta < a+1
        PisotPlus { a } => Ok(a + 1),
        Root { b, k, .. } => {
            let r = integer_root(&BigInt::from(b), k).to_i64().unwrap();
            if r.checked_pow(k).is_some_and(|p| p == b) {
                Ok(r)
            } else {
                Ok(r + 1)
            }
        }
        NegativeInteger { .. } | RationalNeg { .. } => Err(not_applicable(
            "ceil",
            base,
            "negative real base without a positive real conjugate",
        )),
        NegativeRoot { .. } => Err(not_applicable(
            "ceil",
            base,
            "no positive real conjugate",
        )),
    }
}

/// `|f(1)|` for the minimal polynomial `f`, and whether the `+2`
/// strengthening applies (a real conjugate greater than one).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct F1Bound {
    pub f1: i64,
    pub plus2: bool,
}

impl F1Bound {
    pub fn bound(&self) -> i64 {
        if self.plus2 {
            self.f1 + 2
        } else {
            self.f1
        }
    }
}

/// Result of the minimal-form test for `b^(1/k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalForm {
    pub minimal: bool,
    /// `(c, k'')` with `c^(k/k'') = b`, using the largest admissible divisor.
    pub reduced: Option<(i64, u32)>,
}

/// Exact `c` with `c^e = b`, if any.
fn exact_root(b: i64, e: u32) -> Option<i64> {
    let c = integer_root(&BigInt::from(b), e).to_i64()?;
    (c.checked_pow(e)? == b).then_some(c)
}

/// `b^(1/k)` is in minimal form when no divisor `k' >= 2` of `k` has `b` a
/// perfect `k'`-th power.
pub fn minimal_form(b: i64, k: u32) -> MinimalForm {
    let best = (2..=k)
        .rev()
        .filter(|d| k.is_multiple_of(*d))
        .find_map(|d| exact_root(b, d).map(|c| (c, k / d)));
    MinimalForm {
        minimal: best.is_none(),
        reduced: best,
    }
}

/// Minimal polynomial of beta as used by the bounds, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalPolynomial {
    pub coeffs: Vec<i64>,
    /// False when the polynomial is only assumed minimal.
    pub proven: bool,
}

impl MinimalPolynomial {
    pub fn at_one(&self) -> i64 {
        self.coeffs.iter().sum()
    }
}

pub fn minimal_polynomial(base: &BaseSpec) -> Result<MinimalPolynomial, BoundsError> {
    use BaseFamily::*;
    let proven = |coeffs: Vec<i64>| MinimalPolynomial {
        coeffs,
        proven: true,
    };
    match *base.family() {
        RationalPos { .. } | RationalNeg { .. } => Err(not_applicable(
            "minimal polynomial",
            base,
            "beta is not an algebraic integer",
        )),
        Integer { .. } | NegativeInteger { .. } | PisotMinus { .. } | PisotPlus { .. } => {
            Ok(proven(base.defining_poly()))
        }
        // X^4 + 4 = (X^2 + 2X + 2)(X^2 - 2X + 2); branches 1, 2 are -1 +- i
        NegativeRoot { b: 4, k: 4, branch } => Ok(proven(if branch == 1 || branch == 2 {
            vec![2, 2, 1]
        } else {
            vec![2, -2, 1]
        })),
        NegativeRoot { b: 4, k: 2, .. } => Ok(proven(vec![4, 0, 1])),
        NegativeRoot { b: 2, k: 2, .. } => Ok(proven(vec![2, 0, 1])),
        Root { b, k, .. } => {
            if minimal_form(b, k).minimal {
                Ok(proven(base.defining_poly()))
            } else {
                Err(not_applicable(
                    "minimal polynomial",
                    base,
                    "root not in minimal form; reduce first",
                ))
            }
        }
        NegativeRoot { b, k, .. } => {
            if minimal_form(b, k).minimal {
                Ok(MinimalPolynomial {
                    coeffs: base.defining_poly(),
                    proven: false,
                })
            } else {
                Err(not_applicable(
                    "minimal polynomial",
                    base,
                    "root not in minimal form; reduce first",
                ))
            }
        }
    }
}

fn has_real_conjugate_above_one(base: &BaseSpec) -> bool {
    use BaseFamily::*;
    matches!(
        base.family(),
        Integer { .. } | Root { .. } | PisotMinus { .. } | PisotPlus { .. }
    )
}

pub fn lower_bound_f1(base: &BaseSpec) -> Result<F1Bound, BoundsError> {
    let mp = minimal_polynomial(base)?;
    Ok(F1Bound {
        f1: mp.at_one().abs(),
        plus2: has_real_conjugate_above_one(base),
    })
}

/// Which alphabets of the minimal size the catalog supports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "shapes", rename_all = "kebab-case")]
pub enum SupportedAlphabets {
    AllShifts,
    ListedShapes(Vec<String>),
}

impl fmt::Display for SupportedAlphabets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportedAlphabets::AllShifts => f.write_str("all alphabets of the minimal size"),
            SupportedAlphabets::ListedShapes(s) => f.write_str(&s.join("; ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub base: BaseSpec,
    pub ceil_bound: Option<i64>,
    pub f1_bound: Option<i64>,
    pub f1_plus2_applicable: bool,
    pub rational_bound: Option<i64>,
    pub minimal_size: i64,
    pub supported_alphabets: SupportedAlphabets,
    pub minimal_polynomial: Option<Vec<i64>>,
    pub minimal_polynomial_proven: bool,
    pub notes: Vec<String>,
}

impl BoundReport {
    /// Largest applicable lower bound.
    pub fn best_lower_bound(&self) -> i64 {
        [self.ceil_bound, self.f1_bound, self.rational_bound]
            .into_iter()
            .flatten()
            .max()
            .unwrap_or(2)
    }

    /// `d` values for which `{-d, ..., K-1-d}` is supported.
    pub fn supported_shifts(&self) -> Vec<i64> {
        let k = self.minimal_size;
        match *self.base.family() {
            BaseFamily::RationalPos { a, b } => (0..k)
                .filter(|&d| d == 0 || d == k - 1 || (b <= d && d < a))
                .collect(),
            _ => (0..k).collect(),
        }
    }
}

pub fn minimal_alphabet_report(base: &BaseSpec) -> BoundReport {
    use BaseFamily::*;
    let (minimal_size, supported) = match *base.family() {
        Integer { b } | NegativeInteger { b } => (b + 1, SupportedAlphabets::AllShifts),
        Root { b, .. } | NegativeRoot { b, .. } => (b + 1, SupportedAlphabets::AllShifts),
        PisotMinus { a } => (a, SupportedAlphabets::AllShifts),
        PisotPlus { a } => (a + 2, SupportedAlphabets::AllShifts),
        RationalNeg { a, b } => (a + b, SupportedAlphabets::AllShifts),
        RationalPos { a, b } => (
            a + b,
            SupportedAlphabets::ListedShapes(vec![
                format!("{{0..{}}}", a + b - 1),
                format!("{{{}..0}}", -(a + b - 1)),
                format!("{{-d..{}-d}} for {b} <= d <= {}", a + b - 1, a - 1),
            ]),
        ),
    };
    let mp = minimal_polynomial(base);
    let f1 = lower_bound_f1(base).ok();
    let mut notes = Vec::new();
    if let Root { b, k, .. } | NegativeRoot { b, k, .. } = *base.family() {
        let mf = minimal_form(b, k);
        if let (Some((c, k2)), Err(_)) = (mf.reduced, &mp) {
            notes.push(format!("not in minimal form: reduce to b={c}, k={k2} first"));
        }
    }
    if let Ok(m) = &mp {
        if !m.proven {
            notes.push("minimal polynomial X^k+b assumed, not proven minimal".to_string());
        }
    }
    BoundReport {
        base: base.clone(),
        ceil_bound: lower_bound_ceil(base).ok(),
        f1_bound: f1.map(|f| f.bound()),
        f1_plus2_applicable: f1.is_some_and(|f| f.plus2),
        rational_bound: match *base.family() {
            RationalPos { a, b } | RationalNeg { a, b } => Some(a + b),
            _ => None,
        },
        minimal_size,
        supported_alphabets: supported,
        minimal_polynomial_proven: mp.as_ref().is_ok_and(|m| m.proven),
        minimal_polynomial: mp.ok().map(|m| m.coeffs),
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_bounds() {
        assert_eq!(lower_bound_ceil(&BaseSpec::rational(3, 2).unwrap()), Ok(2));
        assert_eq!(lower_bound_ceil(&BaseSpec::pisot_minus(3).unwrap()), Ok(3));
        assert_eq!(lower_bound_ceil(&BaseSpec::integer(10).unwrap()), Ok(10));
        assert_eq!(lower_bound_ceil(&BaseSpec::root(4, 2).unwrap()), Ok(2));
        assert_eq!(lower_bound_ceil(&BaseSpec::root(2, 2).unwrap()), Ok(2));
        assert!(lower_bound_ceil(&BaseSpec::two_i()).is_err());
    }

    #[test]
    fn f1_bounds() {
        let b = |s: &BaseSpec| lower_bound_f1(s).unwrap().bound();
        assert_eq!(b(&BaseSpec::minus_one_plus_i()), 5);
        assert_eq!(b(&BaseSpec::two_i()), 5);
        assert_eq!(b(&BaseSpec::i_sqrt2()), 3);
        for a in 3..9 {
            assert_eq!(b(&BaseSpec::pisot_minus(a).unwrap()), a);
        }
        for a in 2..9 {
            assert_eq!(b(&BaseSpec::pisot_plus(a).unwrap()), a + 2);
        }
        assert_eq!(b(&BaseSpec::negative_integer(2).unwrap()), 3);
        assert!(lower_bound_f1(&BaseSpec::rational(3, 2).unwrap()).is_err());
        assert!(lower_bound_f1(&BaseSpec::root(4, 4).unwrap()).is_err());
    }

    #[test]
    fn minimal_forms() {
        assert_eq!(minimal_form(8, 2), MinimalForm { minimal: true, reduced: None });
        assert_eq!(minimal_form(4, 4), MinimalForm { minimal: false, reduced: Some((2, 2)) });
        assert_eq!(minimal_form(64, 6), MinimalForm { minimal: false, reduced: Some((2, 1)) });
        for b in 2..50 {
            assert!(minimal_form(b, 1).minimal);
        }
        // b = c^(k/k'') checked arithmetically
        for b in 2..200i64 {
            for k in 1..7u32 {
                if let Some((c, k2)) = minimal_form(b, k).reduced {
                    assert_eq!(c.pow(k / k2), b);
                    assert_eq!(k % k2, 0);
                }
            }
        }
    }

    #[test]
    fn reports() {
        let r = minimal_alphabet_report(&BaseSpec::i_sqrt2());
        assert_eq!(r.minimal_size, 3);
        assert_eq!(r.supported_alphabets, SupportedAlphabets::AllShifts);
        let r = minimal_alphabet_report(&BaseSpec::rational(3, 2).unwrap());
        assert_eq!(r.minimal_size, 5);
        assert_eq!(r.supported_shifts(), vec![0, 2, 4]);
        let r = minimal_alphabet_report(&BaseSpec::negative_rational(3, 2).unwrap());
        assert_eq!(r.minimal_size, 5);
        assert_eq!(r.supported_shifts(), vec![0, 1, 2, 3, 4]);
        assert_eq!(minimal_alphabet_report(&BaseSpec::minus_one_plus_i()).minimal_size, 5);
    }

    #[test]
    fn minimal_size_dominates_bounds() {
        let bases = [
            BaseSpec::integer(2).unwrap(),
            BaseSpec::integer(10).unwrap(),
            BaseSpec::negative_integer(3).unwrap(),
            BaseSpec::root(3, 2).unwrap(),
            BaseSpec::negative_root(5, 3).unwrap(),
            BaseSpec::pisot_minus(5).unwrap(),
            BaseSpec::pisot_plus(4).unwrap(),
            BaseSpec::rational(7, 4).unwrap(),
            BaseSpec::negative_rational(5, 2).unwrap(),
            BaseSpec::minus_one_plus_i(),
            BaseSpec::two_i(),
            BaseSpec::i_sqrt2(),
        ];
        for base in bases {
            let r = minimal_alphabet_report(&base);
            assert!(r.minimal_size >= r.best_lower_bound(), "{base}");
        }
    }
}
