//! Bases, alphabets and numeration systems.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{integer_root, rat, RealRoot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("alphabet {min}..{max} does not contain 0")]
    AlphabetMissingZero { min: i64, max: i64 },
    #[error("alphabet {min}..{max} has fewer than two digits")]
    AlphabetTooSmall { min: i64, max: i64 },
    #[error("parameter out of range for {kind}: {detail}")]
    ParameterOutOfRange { kind: &'static str, detail: String },
    #[error("rational base parameters a={a}, b={b} are not coprime")]
    NonCoprime { a: i64, b: i64 },
    #[error("unrecognised base mnemonic `{0}`")]
    BadMnemonic(String),
    #[error("unrecognised alphabet `{0}` (expected m..M)")]
    BadAlphabet(String),
}

/// The family of a base together with its integer parameters.
///
/// Serialises as `{"kind": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum BaseFamily {
    /// beta = b
    Integer { b: i64 },
    /// beta = -b
    NegativeInteger { b: i64 },
    /// beta^k = b; `branch` l picks beta = b^(1/k) e^(2 pi i l / k).
    Root {
        b: i64,
        k: u32,
        #[serde(default)]
        branch: u32,
    },
    /// beta^k = -b; `branch` l picks beta = b^(1/k) e^(pi i (2l+1) / k).
    NegativeRoot {
        b: i64,
        k: u32,
        #[serde(default)]
        branch: u32,
    },
    /// beta > 1 with beta^2 = a beta - 1
    PisotMinus { a: i64 },
    /// beta > 1 with beta^2 = a beta + 1
    PisotPlus { a: i64 },
    /// beta = a/b
    RationalPos { a: i64, b: i64 },
    /// beta = -a/b
    RationalNeg { a: i64, b: i64 },
}

/// A validated base. The defining relation is derived from the family and
/// its parameters, never supplied directly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BaseFamily", into = "BaseFamily")]
pub struct BaseSpec {
    family: BaseFamily,
}

impl TryFrom<BaseFamily> for BaseSpec {
    type Error = CoreError;

    fn try_from(family: BaseFamily) -> Result<Self, Self::Error> {
        BaseSpec::new(family)
    }
}

impl From<BaseSpec> for BaseFamily {
    fn from(b: BaseSpec) -> Self {
        b.family
    }
}

fn out_of_range(kind: &'static str, detail: impl Into<String>) -> CoreError {
    CoreError::ParameterOutOfRange {
        kind,
        detail: detail.into(),
    }
}

impl BaseSpec {
    pub fn new(family: BaseFamily) -> Result<Self, CoreError> {
        use BaseFamily::*;
        match family {
            Integer { b } | NegativeInteger { b } => {
                if b < 2 {
                    return Err(out_of_range(family.kind_name(), format!("b={b} < 2")));
                }
            }
            Root { b, k, branch } | NegativeRoot { b, k, branch } => {
                if b < 2 {
                    return Err(out_of_range(family.kind_name(), format!("b={b} < 2")));
                }
                if k < 1 {
                    return Err(out_of_range(family.kind_name(), "k must be >= 1"));
                }
                if branch >= k {
                    return Err(out_of_range(
                        family.kind_name(),
                        format!("branch {branch} must be < k={k}"),
                    ));
                }
            }
            PisotMinus { a } => {
                if a < 3 {
                    return Err(out_of_range("pisot-minus", format!("a={a} < 3")));
                }
            }
            PisotPlus { a } => {
                if a < 2 {
                    return Err(out_of_range("pisot-plus", format!("a={a} < 2")));
                }
            }
            RationalPos { a, b } | RationalNeg { a, b } => {
                if !(a > b && b >= 1) {
                    return Err(out_of_range(
                        family.kind_name(),
                        format!("need a > b >= 1, got a={a}, b={b}"),
                    ));
                }
                if a.gcd(&b) != 1 {
                    return Err(CoreError::NonCoprime { a, b });
                }
            }
        }
        Ok(BaseSpec { family })
    }

    pub fn integer(b: i64) -> Result<Self, CoreError> {
        Self::new(BaseFamily::Integer { b })
    }

    pub fn negative_integer(b: i64) -> Result<Self, CoreError> {
        Self::new(BaseFamily::NegativeInteger { b })
    }

    pub fn root(b: i64, k: u32) -> Result<Self, CoreError> {
        Self::new(BaseFamily::Root { b, k, branch: 0 })
    }

    pub fn negative_root(b: i64, k: u32) -> Result<Self, CoreError> {
        Self::new(BaseFamily::NegativeRoot { b, k, branch: 0 })
    }

    pub fn pisot_minus(a: i64) -> Result<Self, CoreError> {
        Self::new(BaseFamily::PisotMinus { a })
    }

    pub fn pisot_plus(a: i64) -> Result<Self, CoreError> {
        Self::new(BaseFamily::PisotPlus { a })
    }

    pub fn rational(a: i64, b: i64) -> Result<Self, CoreError> {
        Self::new(BaseFamily::RationalPos { a, b })
    }

    pub fn negative_rational(a: i64, b: i64) -> Result<Self, CoreError> {
        Self::new(BaseFamily::RationalNeg { a, b })
    }

    /// -1+i, a root of X^4 + 4.
    pub fn minus_one_plus_i() -> Self {
        Self::new(BaseFamily::NegativeRoot { b: 4, k: 4, branch: 1 }).unwrap()
    }

    /// 2i, a root of X^2 + 4.
    pub fn two_i() -> Self {
        Self::new(BaseFamily::NegativeRoot { b: 4, k: 2, branch: 0 }).unwrap()
    }

    /// i*sqrt(2), a root of X^2 + 2.
    pub fn i_sqrt2() -> Self {
        Self::new(BaseFamily::NegativeRoot { b: 2, k: 2, branch: 0 }).unwrap()
    }

    pub fn family(&self) -> &BaseFamily {
        &self.family
    }

    pub fn kind_name(&self) -> &'static str {
        self.family.kind_name()
    }

    /// Integer polynomial vanishing at beta, lowest degree first.
    pub fn defining_poly(&self) -> Vec<i64> {
        use BaseFamily::*;
        match self.family {
            Integer { b } => vec![-b, 1],
            NegativeInteger { b } => vec![b, 1],
            Root { b, k, .. } => power_poly(k, -b),
            NegativeRoot { b, k, .. } => power_poly(k, b),
            PisotMinus { a } => vec![1, -a, 1],
            PisotPlus { a } => vec![-1, -a, 1],
            RationalPos { a, b } => vec![-a, b],
            RationalNeg { a, b } => vec![a, b],
        }
    }

    /// True when beta is an algebraic integer (monic defining relation).
    pub fn is_algebraic_integer(&self) -> bool {
        !matches!(
            self.family,
            BaseFamily::RationalPos { .. } | BaseFamily::RationalNeg { .. }
        )
    }

    pub fn is_real(&self) -> bool {
        use BaseFamily::*;
        match self.family {
            Root { k, branch, .. } => branch == 0 || 2 * branch == k,
            NegativeRoot { k, branch, .. } => 2 * branch + 1 == k,
            _ => true,
        }
    }

    /// True for real bases beta > 1.
    pub fn is_real_above_one(&self) -> bool {
        use BaseFamily::*;
        match self.family {
            Integer { .. } | PisotMinus { .. } | PisotPlus { .. } | RationalPos { .. } => true,
            Root { branch, .. } => branch == 0,
            _ => false,
        }
    }

    /// Isolating interval of beta when beta is real.
    pub fn real_interval(&self) -> Option<RealRoot> {
        use BaseFamily::*;
        let poly = self.defining_poly();
        match self.family {
            Integer { b } => Some(RealRoot::exact(poly, rat(b))),
            NegativeInteger { b } => Some(RealRoot::exact(poly, rat(-b))),
            RationalPos { a, b } => Some(RealRoot::exact(
                poly,
                BigRational::new(BigInt::from(a), BigInt::from(b)),
            )),
            RationalNeg { a, b } => Some(RealRoot::exact(
                poly,
                BigRational::new(BigInt::from(-a), BigInt::from(b)),
            )),
            PisotMinus { a } => Some(RealRoot::isolated(poly, rat(a - 1), rat(a))),
            PisotPlus { a } => Some(RealRoot::isolated(poly, rat(a), rat(a + 1))),
            Root { b, k, branch } => {
                let r = integer_root(&BigInt::from(b), k);
                let r = rat(i64::try_from(r).ok()?);
                if branch == 0 {
                    Some(RealRoot::isolated(poly, r.clone(), r + rat(1)))
                } else if 2 * branch == k {
                    Some(RealRoot::isolated(poly, -(r.clone() + rat(1)), -r))
                } else {
                    None
                }
            }
            NegativeRoot { b, k, branch } => {
                if 2 * branch + 1 != k {
                    return None;
                }
                let r = integer_root(&BigInt::from(b), k);
                let r = rat(i64::try_from(r).ok()?);
                Some(RealRoot::isolated(poly, -(r.clone() + rat(1)), -r))
            }
        }
    }

    /// Short text form accepted by [`BaseSpec::from_str`].
    pub fn mnemonic(&self) -> String {
        use BaseFamily::*;
        match self.family {
            Integer { b } => b.to_string(),
            NegativeInteger { b } => format!("-{b}"),
            RationalPos { a, b } => format!("{a}/{b}"),
            RationalNeg { a, b } => format!("-{a}/{b}"),
            PisotMinus { a } => format!("pisot-:{a}"),
            PisotPlus { a } => format!("pisot+:{a}"),
            NegativeRoot { b: 4, k: 4, branch: 1 } => "-1+i".into(),
            NegativeRoot { b: 4, k: 2, branch: 0 } => "2i".into(),
            NegativeRoot { b: 2, k: 2, branch: 0 } => "isqrt2".into(),
            Root { b, k, branch } => root_mnemonic(b, k, '+', branch),
            NegativeRoot { b, k, branch } => root_mnemonic(b, k, '-', branch),
        }
    }
}

fn root_mnemonic(b: i64, k: u32, sign: char, branch: u32) -> String {
    if branch == 0 {
        format!("root:{b},{k},{sign}")
    } else {
        format!("root:{b},{k},{sign},{branch}")
    }
}

fn power_poly(k: u32, constant: i64) -> Vec<i64> {
    let mut p = vec![0; k as usize + 1];
    p[0] = constant;
    p[k as usize] = 1;
    p
}

impl BaseFamily {
    pub fn kind_name(&self) -> &'static str {
        use BaseFamily::*;
        match self {
            Integer { .. } => "integer",
            NegativeInteger { .. } => "negative-integer",
            Root { .. } => "root",
            NegativeRoot { .. } => "negative-root",
            PisotMinus { .. } => "pisot-minus",
            PisotPlus { .. } => "pisot-plus",
            RationalPos { .. } => "rational-pos",
            RationalNeg { .. } => "rational-neg",
        }
    }
}

impl fmt::Display for BaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.mnemonic())
    }
}

impl FromStr for BaseSpec {
    type Err = CoreError;

    /// Mnemonics: `10`, `-2`, `3/2`, `-3/2`, `root:b,k,+`, `root:b,k,-[,branch]`,
    /// `pisot-:a`, `pisot+:a`, `-1+i`, `2i`, `isqrt2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CoreError::BadMnemonic(s.to_string());
        let s = s.trim();
        match s {
            "-1+i" => return Ok(Self::minus_one_plus_i()),
            "2i" => return Ok(Self::two_i()),
            "isqrt2" | "i*sqrt2" => return Ok(Self::i_sqrt2()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("pisot-:") {
            return Self::pisot_minus(rest.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = s.strip_prefix("pisot+:") {
            return Self::pisot_plus(rest.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = s.strip_prefix("root:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() < 3 || parts.len() > 4 {
                return Err(bad());
            }
            let b: i64 = parts[0].parse().map_err(|_| bad())?;
            let k: u32 = parts[1].parse().map_err(|_| bad())?;
            let branch: u32 = match parts.get(3) {
                Some(p) => p.parse().map_err(|_| bad())?,
                None => 0,
            };
            return match parts[2] {
                "+" => Self::new(BaseFamily::Root { b, k, branch }),
                "-" => Self::new(BaseFamily::NegativeRoot { b, k, branch }),
                _ => Err(bad()),
            };
        }
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        if let Some((a, b)) = body.split_once('/') {
            let a: i64 = a.parse().map_err(|_| bad())?;
            let b: i64 = b.parse().map_err(|_| bad())?;
            if b == 1 {
                return if negative {
                    Self::negative_integer(a)
                } else {
                    Self::integer(a)
                };
            }
            return if negative {
                Self::negative_rational(a, b)
            } else {
                Self::rational(a, b)
            };
        }
        let b: i64 = body.parse().map_err(|_| bad())?;
        if negative {
            Self::negative_integer(b)
        } else {
            Self::integer(b)
        }
    }
}

/// Contiguous digit set `{min, ..., max}` containing 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAlphabet")]
pub struct Alphabet {
    min: i64,
    max: i64,
}

#[derive(Deserialize)]
struct RawAlphabet {
    min: i64,
    max: i64,
}

impl TryFrom<RawAlphabet> for Alphabet {
    type Error = CoreError;

    fn try_from(raw: RawAlphabet) -> Result<Self, Self::Error> {
        Alphabet::new(raw.min, raw.max)
    }
}

impl Alphabet {
    pub fn new(min: i64, max: i64) -> Result<Self, CoreError> {
        if !(min <= 0 && 0 <= max) {
            return Err(CoreError::AlphabetMissingZero { min, max });
        }
        if max - min + 1 < 2 {
            return Err(CoreError::AlphabetTooSmall { min, max });
        }
        Ok(Alphabet { min, max })
    }

    /// `{0, ..., size-1}`.
    pub fn canonical(size: i64) -> Result<Self, CoreError> {
        Self::new(0, size - 1)
    }

    pub fn min(&self) -> i64 {
        self.min
    }

    pub fn max(&self) -> i64 {
        self.max
    }

    pub fn size(&self) -> i64 {
        self.max - self.min + 1
    }

    pub fn contains(&self, d: i64) -> bool {
        self.min <= d && d <= self.max
    }

    pub fn digits(&self) -> impl Iterator<Item = i64> {
        self.min..=self.max
    }

    /// `{d - h : d in self}`.
    pub fn shifted(&self, h: i64) -> Result<Self, CoreError> {
        Self::new(self.min - h, self.max - h)
    }

    pub fn negated(&self) -> Self {
        Alphabet {
            min: -self.max,
            max: -self.min,
        }
    }

    /// `A + A`.
    pub fn doubled(&self) -> Self {
        Alphabet {
            min: 2 * self.min,
            max: 2 * self.max,
        }
    }

    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        other.min <= self.min && self.max <= other.max
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.min, self.max)
    }
}

impl FromStr for Alphabet {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .trim()
            .split_once("..")
            .ok_or_else(|| CoreError::BadAlphabet(s.to_string()))?;
        let lo: i64 = lo.trim().parse().map_err(|_| CoreError::BadAlphabet(s.to_string()))?;
        let hi: i64 = hi
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| CoreError::BadAlphabet(s.to_string()))?;
        Alphabet::new(lo, hi)
    }
}

/// A base paired with an alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NumerationSystem {
    pub base: BaseSpec,
    pub alphabet: Alphabet,
    /// Whether the alphabet is at least as large as the known lower bound
    /// for parallel addition in this base. Informational only.
    pub meets_lower_bound: bool,
}

/// Validates a (base, alphabet) pair.
pub fn make_system(base: BaseSpec, alphabet: Alphabet) -> Result<NumerationSystem, CoreError> {
    if !alphabet.contains(0) {
        return Err(CoreError::AlphabetMissingZero {
            min: alphabet.min(),
            max: alphabet.max(),
        });
    }
    let report = crate::bounds::minimal_alphabet_report(&base);
    Ok(NumerationSystem {
        meets_lower_bound: alphabet.size() >= report.minimal_size,
        base,
        alphabet,
    })
}
