//! Catalog of carry-free conversion rules, one constructor per algorithm,
//! and the choice of rule pair for a given alphabet.
//!
//! Derived rules are cached per process; constructing the same rule twice
//! costs a hash lookup.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

use crate::bounds::minimal_alphabet_report;
use crate::engine::{
    derive_local_rule, fixed_letters, negate_rule, shift_alphabet, CarryRule, CarrySelector,
    EngineError, LocalRule,
};
use crate::system::{Alphabet, BaseFamily, BaseSpec, CoreError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RulesError {
    #[error(transparent)]
    Parameter(#[from] CoreError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("alphabet {alphabet} is too small for base {base}: parallel addition needs at least {needed} digits")]
    AlphabetTooSmall {
        base: String,
        alphabet: Alphabet,
        needed: i64,
    },
    #[error("alphabet {alphabet} is not supported for base {base}: {reason}")]
    AlphabetUnsupported {
        base: String,
        alphabet: Alphabet,
        reason: String,
    },
}

fn cache() -> &'static Mutex<HashMap<CarrySelector, LocalRule>> {
    static CACHE: OnceLock<Mutex<HashMap<CarrySelector, LocalRule>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn build(
    selector: CarrySelector,
    placement: Vec<(i64, i64)>,
    base: &BaseSpec,
    input: (i64, i64),
    output: (i64, i64),
    name: String,
) -> Result<LocalRule, RulesError> {
    if let Some(rule) = cache().lock().unwrap().get(&selector) {
        return Ok(rule.clone());
    }
    let rule = derive_local_rule(
        CarryRule::new(selector.clone(), placement),
        base,
        Alphabet::new(input.0, input.1)?,
        Alphabet::new(output.0, output.1)?,
    )?
    .with_name(name);
    cache().lock().unwrap().insert(selector, rule.clone());
    Ok(rule)
}

/// GDE for base `-b`: `{0..b+1} -> {0..b}`.
pub fn gde_negative_integer(b: i64) -> Result<LocalRule, RulesError> {
    let base = BaseSpec::negative_integer(b)?;
    build(
        CarrySelector::NegativeInteger { b },
        vec![(0, -b), (1, -1)],
        &base,
        (0, b + 1),
        (0, b),
        format!("GDE(-{b})"),
    )
}

/// GDE for `beta^k = b` (positive) or `beta^k = -b`: `{0..b+1} -> {0..b}`.
/// `k = 1` with the positive sign is the integer base `b`.
pub fn gde_root(b: i64, k: u32, positive: bool) -> Result<LocalRule, RulesError> {
    let (base, selector, gamma, name) = if positive {
        (
            BaseSpec::root(b, k)?,
            CarrySelector::PositiveRoot { b, k },
            1,
            format!("GDE(root {k} of {b})"),
        )
    } else {
        (
            BaseSpec::negative_root(b, k)?,
            CarrySelector::NegativeRoot { b, k },
            -1,
            format!("GDE(root {k} of -{b})"),
        )
    };
    build(selector, vec![(0, -b), (k as i64, gamma)], &base, (0, b + 1), (0, b), name)
}

/// Algorithm A for `beta^2 = a beta - 1`: `{0..2a-2} -> {0..a}`.
pub fn algorithm_a(a: i64) -> Result<LocalRule, RulesError> {
    let base = BaseSpec::pisot_minus(a)?;
    build(
        CarrySelector::AlgorithmA { a },
        vec![(0, -a), (-1, 1), (1, 1)],
        &base,
        (0, 2 * a - 2),
        (0, a),
        format!("A({a})"),
    )
}

/// GDE for `beta^2 = a beta - 1`: `{0..a} -> {0..a-1}`.
pub fn gde_pisot_minus(a: i64) -> Result<LocalRule, RulesError> {
    let base = BaseSpec::pisot_minus(a)?;
    build(
        CarrySelector::PisotMinus { a },
        vec![(0, -a), (-1, 1), (1, 1)],
        &base,
        (0, a),
        (0, a - 1),
        format!("GDE(pisot-:{a})"),
    )
}

/// GDE for `beta^2 = a beta + 1`: `{0..a+2} -> {0..a+1}`.
pub fn gde_pisot_plus(a: i64) -> Result<LocalRule, RulesError> {
    let base = BaseSpec::pisot_plus(a)?;
    build(
        CarrySelector::PisotPlus { a },
        vec![(0, -a), (-1, -1), (1, 1)],
        &base,
        (0, a + 2),
        (0, a + 1),
        format!("GDE(pisot+:{a})"),
    )
}

/// GDE for `beta = a/b`: `{0..a+b} -> {0..a+b-1}`.
pub fn gde_rational_pos(a: i64, b: i64) -> Result<LocalRule, RulesError> {
    let base = BaseSpec::rational(a, b)?;
    build(
        CarrySelector::RationalPos { a, b },
        vec![(0, -a), (1, b)],
        &base,
        (0, a + b),
        (0, a + b - 1),
        format!("GDE({a}/{b})"),
    )
}

/// GDE for `beta = -a/b`: `{0..a+b} -> {0..a+b-1}`.
pub fn gde_rational_neg(a: i64, b: i64) -> Result<LocalRule, RulesError> {
    let base = BaseSpec::negative_rational(a, b)?;
    build(
        CarrySelector::RationalNeg { a, b },
        vec![(0, -a), (1, -b)],
        &base,
        (0, a + b),
        (0, a + b - 1),
        format!("GDE(-{a}/{b})"),
    )
}

/// The catalog GDE on the canonical alphabet of the base.
pub fn gde_for_base(base: &BaseSpec) -> Result<LocalRule, RulesError> {
    use BaseFamily::*;
    match *base.family() {
        Integer { b } => gde_root(b, 1, true),
        NegativeInteger { b } => gde_negative_integer(b),
        Root { b, k, .. } => gde_root(b, k, true),
        NegativeRoot { b, k, .. } => gde_root(b, k, false),
        PisotMinus { a } => gde_pisot_minus(a),
        PisotPlus { a } => gde_pisot_plus(a),
        RationalPos { a, b } => gde_rational_pos(a, b),
        RationalNeg { a, b } => gde_rational_neg(a, b),
    }
}

/// Size of the alphabets the catalog GDE of `base` serves.
pub fn catalog_alphabet_size(base: &BaseSpec) -> i64 {
    minimal_alphabet_report(base).minimal_size
}

fn unsupported(base: &BaseSpec, alphabet: Alphabet, reason: impl Into<String>) -> RulesError {
    RulesError::AlphabetUnsupported {
        base: base.mnemonic(),
        alphabet,
        reason: reason.into(),
    }
}

fn check_size(base: &BaseSpec, alphabet: Alphabet) -> Result<i64, RulesError> {
    let k = catalog_alphabet_size(base);
    if alphabet.size() < k {
        return Err(RulesError::AlphabetTooSmall {
            base: base.mnemonic(),
            alphabet,
            needed: k,
        });
    }
    if alphabet.size() > k {
        return Err(unsupported(
            base,
            alphabet,
            format!("the catalog only covers alphabets of exactly {k} digits"),
        ));
    }
    Ok(k)
}

fn check_rational_shape(base: &BaseSpec, alphabet: Alphabet, d: i64) -> Result<(), RulesError> {
    if let BaseFamily::RationalPos { a, b } = *base.family() {
        if 1 <= d && d < b {
            return Err(unsupported(
                base,
                alphabet,
                format!(
                    "the largest digit exceeds {} while the smallest is above -{b}; \
                     no local addition exists for such alphabets",
                    a - 1
                ),
            ));
        }
        if a <= d && d <= a + b - 2 {
            return Err(unsupported(
                base,
                alphabet,
                format!(
                    "the largest digit is below {b} while the smallest is above -{}; \
                     no local addition exists for such alphabets",
                    a + b - 1
                ),
            ));
        }
    }
    Ok(())
}

fn licensed(gde: &LocalRule, h: i64, base: &BaseSpec, alphabet: Alphabet) -> Result<(), RulesError> {
    if fixed_letters(gde).contains(&h) {
        Ok(())
    } else {
        Err(unsupported(
            base,
            alphabet,
            format!("letter {h} is not fixed by {}", gde.name()),
        ))
    }
}

/// Smallest digit elimination `{m-1..M} -> {m..M}` for `A = {m..M}`: the
/// catalog GDE moved to the mirrored alphabet and negated.
pub fn sde_for_alphabet(base: &BaseSpec, alphabet: Alphabet) -> Result<LocalRule, RulesError> {
    let gde = gde_for_base(base)?;
    let k = check_size(base, alphabet)?;
    let d = -alphabet.min();
    let h = k - 1 - d;
    licensed(&gde, h, base, alphabet)?;
    let sde = negate_rule(&shift_alphabet(&gde, h)?);
    Ok(sde.with_name(format!("SDE[{alphabet}]")))
}

/// GDE `{m..M+1} -> {m..M}` and SDE `{m-1..M} -> {m..M}` for
/// `A = {m..M}`, each present only when that side of `A + A` overflows.
pub fn rule_for_alphabet(
    base: &BaseSpec,
    alphabet: Alphabet,
) -> Result<(Option<LocalRule>, Option<LocalRule>), RulesError> {
    let gde = gde_for_base(base)?;
    let k = check_size(base, alphabet)?;
    let d = -alphabet.min();
    check_rational_shape(base, alphabet, d)?;
    let up = if d < k - 1 {
        licensed(&gde, d, base, alphabet)?;
        Some(shift_alphabet(&gde, d)?.with_name(format!("GDE[{alphabet}]")))
    } else {
        None
    };
    let down = if d > 0 {
        Some(sde_for_alphabet(base, alphabet)?)
    } else {
        None
    };
    Ok((up, down))
}

/// Catalog rules at the parameters the default verification suite covers,
/// each paired with the base it is checked in.
pub fn catalog() -> Result<Vec<(BaseSpec, LocalRule)>, RulesError> {
    let mut out = Vec::new();
    for b in [2, 3, 5, 10] {
        out.push((BaseSpec::negative_integer(b)?, gde_negative_integer(b)?));
    }
    out.push((BaseSpec::integer(2)?, gde_root(2, 1, true)?));
    out.push((BaseSpec::i_sqrt2(), gde_root(2, 2, false)?));
    out.push((BaseSpec::two_i(), gde_root(4, 2, false)?));
    out.push((BaseSpec::minus_one_plus_i(), gde_root(4, 4, false)?));
    for a in [3, 4, 6] {
        out.push((BaseSpec::pisot_minus(a)?, algorithm_a(a)?));
        out.push((BaseSpec::pisot_minus(a)?, gde_pisot_minus(a)?));
    }
    for a in [2, 3, 5] {
        out.push((BaseSpec::pisot_plus(a)?, gde_pisot_plus(a)?));
    }
    for (a, b) in [(3, 2), (5, 2), (5, 3), (7, 4)] {
        out.push((BaseSpec::rational(a, b)?, gde_rational_pos(a, b)?));
        out.push((BaseSpec::negative_rational(a, b)?, gde_rational_neg(a, b)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::parse_digit_string;

    fn apply(rule: &LocalRule, s: &str) -> String {
        rule.apply(&parse_digit_string(s).unwrap()).unwrap().to_string()
    }

    #[test]
    fn worked_conversions() {
        assert_eq!(apply(&gde_negative_integer(2).unwrap(), "3 ."), "1 1 1 .");
        assert_eq!(apply(&gde_negative_integer(2).unwrap(), "."), ".");
        assert_eq!(apply(&algorithm_a(3).unwrap(), "4 ."), "1 1 . 1");
        assert_eq!(apply(&gde_pisot_minus(3).unwrap(), "3 ."), "1 0 . 1");
        assert_eq!(apply(&gde_pisot_plus(2).unwrap(), "4 ."), "1 1 . 1 1");
        assert_eq!(apply(&gde_rational_pos(3, 2).unwrap(), "5 ."), "2 2 .");
        assert_eq!(apply(&gde_rational_neg(3, 2).unwrap(), "5 ."), "2 1 2 .");
    }

    #[test]
    fn windows() {
        assert_eq!(gde_negative_integer(5).unwrap().window(), (0, 2));
        assert_eq!(algorithm_a(4).unwrap().window(), (2, 2));
        assert_eq!(gde_pisot_minus(4).unwrap().window(), (3, 3));
        assert_eq!(gde_pisot_plus(3).unwrap().window(), (2, 2));
        assert_eq!(gde_rational_pos(3, 2).unwrap().window(), (0, 1));
        assert_eq!(gde_rational_neg(3, 2).unwrap().window(), (0, 2));
        assert_eq!(gde_root(4, 4, false).unwrap().window(), (0, 8));
    }

    #[test]
    fn fixed_letter_sets() {
        assert_eq!(fixed_letters(&gde_negative_integer(2).unwrap()), vec![0, 1, 2]);
        assert_eq!(fixed_letters(&gde_pisot_minus(3).unwrap()), vec![0, 1]);
        assert_eq!(fixed_letters(&gde_pisot_plus(2).unwrap()), vec![0, 1, 2]);
        assert_eq!(fixed_letters(&gde_rational_pos(3, 2).unwrap()), vec![0, 1, 2]);
        assert_eq!(fixed_letters(&gde_rational_neg(3, 2).unwrap()), vec![0, 1, 2, 3, 4]);
        assert_eq!(fixed_letters(&gde_root(2, 1, true).unwrap()), vec![0, 1]);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(gde_negative_integer(1), Err(RulesError::Parameter(_))));
        assert!(matches!(
            gde_rational_pos(4, 2),
            Err(RulesError::Parameter(CoreError::NonCoprime { .. }))
        ));
        assert!(algorithm_a(2).is_err());
        assert!(gde_pisot_plus(1).is_err());
    }

    #[test]
    fn alphabet_selection() {
        let b = BaseSpec::negative_integer(2).unwrap();
        for d in 0..=2 {
            let alpha = Alphabet::new(-d, 2 - d).unwrap();
            let (g, s) = rule_for_alphabet(&b, alpha).unwrap();
            assert_eq!(g.is_some(), d < 2);
            assert_eq!(s.is_some(), d > 0);
            if let Some(g) = g {
                assert_eq!(g.output_alphabet(), alpha);
                assert_eq!(g.input_alphabet(), Alphabet::new(-d, 3 - d).unwrap());
            }
            if let Some(s) = s {
                assert_eq!(s.output_alphabet(), alpha);
                assert_eq!(s.input_alphabet(), Alphabet::new(-d - 1, 2 - d).unwrap());
            }
        }
        let sde = sde_for_alphabet(&b, Alphabet::new(0, 2).unwrap()).unwrap();
        assert_eq!(sde.input_alphabet(), Alphabet::new(-1, 2).unwrap());

        let r = BaseSpec::rational(3, 2).unwrap();
        let accepted: Vec<i64> = (0..5)
            .filter(|&d| rule_for_alphabet(&r, Alphabet::new(-d, 4 - d).unwrap()).is_ok())
            .collect();
        assert_eq!(accepted, vec![0, 2, 4]);
        assert!(matches!(
            rule_for_alphabet(&r, Alphabet::new(-1, 3).unwrap()),
            Err(RulesError::AlphabetUnsupported { .. })
        ));
        assert!(matches!(
            rule_for_alphabet(&r, Alphabet::new(0, 3).unwrap()),
            Err(RulesError::AlphabetTooSmall { needed: 5, .. })
        ));
        let n = BaseSpec::negative_rational(3, 2).unwrap();
        for d in 0..5 {
            assert!(rule_for_alphabet(&n, Alphabet::new(-d, 4 - d).unwrap()).is_ok());
        }
    }
}
