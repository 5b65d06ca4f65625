//! Parallel addition as a fixed number of digit-elimination passes.
//!
//! A pass splits each digit `z_j = z'_j + z''_j` with `z'_j` clamped into
//! the rule's input alphabet, converts `z'` and adds `z''` back. Each GDE
//! pass lowers the largest digit above `M` by one and each SDE pass raises
//! the smallest digit below `m` by one, so `max(M, -m)` rounds reach
//! `A = {m..M}` from anywhere in `A + A` or `A - A`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::digits::DigitString;
use crate::engine::{par_chunk, EngineError, LocalRule};
use crate::rules::{algorithm_a, gde_pisot_minus, rule_for_alphabet, RulesError};
use crate::system::{Alphabet, BaseFamily, BaseSpec, NumerationSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdderError {
    #[error(transparent)]
    Rules(#[from] RulesError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("digit {digit} is not in the alphabet {alphabet}")]
    DigitOutOfAlphabet { digit: i64, alphabet: Alphabet },
    #[error("digit {digit} is outside {lo}..{hi}, the range the pipeline reduces")]
    DigitOutOfRange { digit: i64, lo: i64, hi: i64 },
    #[error("alphabet {alphabet} does not contain -1, 0 and 1; subtraction is not parallel there")]
    AlphabetLacksNegatives { alphabet: Alphabet },
}

/// One step of a plan: a rule applied `passes` times.
#[derive(Clone, Debug)]
pub struct PlanStep {
    pub rule: LocalRule,
    pub passes: usize,
}

#[derive(Clone, Debug)]
pub struct AdderPipeline {
    pub system: NumerationSystem,
    pub gde: Option<LocalRule>,
    pub sde: Option<LocalRule>,
    pub plan: Vec<PlanStep>,
}

/// Serializable description of a pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineSummary {
    pub base: String,
    pub alphabet: Alphabet,
    pub plan: Vec<(String, usize)>,
    pub effective_window: (usize, usize),
}

/// What one pass did, for `--trace`.
#[derive(Clone, Debug, Serialize)]
pub struct PassTrace {
    pub rule: String,
    pub input: DigitString,
    /// `(exponent, q)` with `q != 0`
    pub carries: Option<Vec<(i64, i64)>>,
    pub output: DigitString,
}

/// Plan of digit-elimination rounds for any supported alphabet.
pub fn build_elimination_pipeline(system: &NumerationSystem) -> Result<AdderPipeline, AdderError> {
    let (gde, sde) = rule_for_alphabet(&system.base, system.alphabet)?;
    let (m, big_m) = (system.alphabet.min(), system.alphabet.max());
    let plan = match (&gde, &sde) {
        (Some(g), None) => vec![PlanStep {
            rule: g.clone(),
            passes: big_m as usize,
        }],
        (None, Some(s)) => vec![PlanStep {
            rule: s.clone(),
            passes: (-m) as usize,
        }],
        (Some(g), Some(s)) => {
            let rounds = big_m.max(-m) as usize;
            (0..rounds)
                .flat_map(|_| {
                    [
                        PlanStep { rule: g.clone(), passes: 1 },
                        PlanStep { rule: s.clone(), passes: 1 },
                    ]
                })
                .collect()
        }
        (None, None) => unreachable!("alphabets have at least two digits"),
    };
    Ok(AdderPipeline {
        system: system.clone(),
        gde,
        sde,
        plan,
    })
}

/// Like [`build_elimination_pipeline`], except that `beta^2 = a beta - 1`
/// on `{0..a-1}` uses Algorithm A followed by one GDE pass.
pub fn build_pipeline(system: &NumerationSystem) -> Result<AdderPipeline, AdderError> {
    if let BaseFamily::PisotMinus { a } = *system.base.family() {
        if system.alphabet.min() == 0 && system.alphabet.max() == a - 1 {
            let first = algorithm_a(a)?;
            let gde = gde_pisot_minus(a)?;
            return Ok(AdderPipeline {
                system: system.clone(),
                gde: Some(gde.clone()),
                sde: None,
                plan: vec![
                    PlanStep { rule: first, passes: 1 },
                    PlanStep { rule: gde, passes: 1 },
                ],
            });
        }
    }
    build_elimination_pipeline(system)
}

/// Per-exponent integer sum.
pub fn digitwise_sum(x: &DigitString, y: &DigitString) -> DigitString {
    if x.is_empty() {
        return y.normalize();
    }
    if y.is_empty() {
        return x.normalize();
    }
    let lo = x.lsd_exponent.min(y.lsd_exponent);
    let hi = x.msd_exponent().unwrap().max(y.msd_exponent().unwrap());
    let len = (hi - lo + 1) as usize;
    let a = x.dense_lsd_first(lo, len);
    let b = y.dense_lsd_first(lo, len);
    DigitString::from_lsd_first(lo, a.iter().zip(&b).map(|(u, v)| u + v).collect()).normalize()
}

// Dense least-significant-first digits with the exponent of index 0.
struct Dense {
    lsd: i64,
    digits: Vec<i64>,
}

impl Dense {
    fn from(ds: &DigitString) -> Dense {
        Dense {
            lsd: ds.lsd_exponent,
            digits: ds.to_lsd_first(),
        }
    }

    fn trim(&mut self) {
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
        let lead = self.digits.iter().take_while(|d| **d == 0).count();
        if lead == self.digits.len() {
            self.digits.clear();
            self.lsd = 0;
        } else if lead > 0 {
            self.digits.drain(..lead);
            self.lsd += lead as i64;
        }
    }

    fn at(&self, e: i64) -> i64 {
        let i = e - self.lsd;
        if i < 0 || i >= self.digits.len() as i64 {
            0
        } else {
            self.digits[i as usize]
        }
    }

    fn to_digit_string(&self) -> DigitString {
        DigitString::from_lsd_first(self.lsd, self.digits.clone()).normalize()
    }
}

fn run_pass(rule: &LocalRule, z: &Dense) -> Dense {
    let alpha = rule.input_alphabet();
    let low: Vec<i64> = z.digits.iter().map(|d| (*d).clamp(alpha.min(), alpha.max())).collect();
    let mut out = rule.apply_lsd_first(&low, false);
    let t = rule.t();
    for (o, (d, c)) in out[t..t + low.len()].iter_mut().zip(z.digits.iter().zip(&low)) {
        *o += d - c;
    }
    let mut next = Dense {
        lsd: z.lsd - t as i64,
        digits: out,
    };
    next.trim();
    next
}

impl AdderPipeline {
    pub fn base(&self) -> &BaseSpec {
        &self.system.base
    }

    pub fn alphabet(&self) -> Alphabet {
        self.system.alphabet
    }

    /// Digits the pipeline accepts: `A + A` together with `A - A`.
    pub fn input_range(&self) -> (i64, i64) {
        let a = self.system.alphabet;
        ((2 * a.min()).min(a.min() - a.max()), (2 * a.max()).max(a.max() - a.min()))
    }

    /// Componentwise sum of the windows of every pass.
    pub fn effective_window(&self) -> (usize, usize) {
        self.plan.iter().fold((0, 0), |(t, r), step| {
            (t + step.passes * step.rule.t(), r + step.passes * step.rule.r())
        })
    }

    pub fn pass_count(&self) -> usize {
        self.plan.iter().map(|s| s.passes).sum()
    }

    fn passes(&self) -> impl Iterator<Item = &LocalRule> {
        self.plan
            .iter()
            .flat_map(|s| std::iter::repeat_n(&s.rule, s.passes))
    }

    pub fn summary(&self) -> PipelineSummary {
        PipelineSummary {
            base: self.system.base.mnemonic(),
            alphabet: self.system.alphabet,
            plan: self
                .plan
                .iter()
                .map(|s| (s.rule.name().to_string(), s.passes))
                .collect(),
            effective_window: self.effective_window(),
        }
    }

    fn check_range(&self, z: &DigitString) -> Result<(), AdderError> {
        let (lo, hi) = self.input_range();
        match z.digits.iter().find(|d| !(lo..=hi).contains(*d)) {
            Some(&digit) => Err(AdderError::DigitOutOfRange { digit, lo, hi }),
            None => Ok(()),
        }
    }

    fn check_alphabet(&self, x: &DigitString) -> Result<(), AdderError> {
        let alphabet = self.system.alphabet;
        match x.digits.iter().find(|d| !alphabet.contains(**d)) {
            Some(&digit) => Err(AdderError::DigitOutOfAlphabet { digit, alphabet }),
            None => Ok(()),
        }
    }

    fn reduce_impl(&self, z: &DigitString, par: bool) -> Result<DigitString, AdderError> {
        self.check_range(z)?;
        let mut cur = Dense::from(z);
        cur.trim();
        if par {
            return Ok(self.reduce_blocks(&cur).to_digit_string());
        }
        for rule in self.passes() {
            cur = run_pass(rule, &cur);
        }
        Ok(cur.to_digit_string())
    }

    /// Output digits at exponents `lo..=hi`, from the input digits they
    /// depend on alone.
    fn reduce_block(&self, z: &Dense, lo: i64, hi: i64) -> Vec<i64> {
        let (t, r) = self.effective_window();
        let (from, to) = (lo - r as i64, hi + t as i64);
        let mut cur = Dense {
            lsd: from,
            digits: (from..=to).map(|e| z.at(e)).collect(),
        };
        for rule in self.passes() {
            cur = run_pass(rule, &cur);
        }
        (lo..=hi).map(|e| cur.at(e)).collect()
    }

    /// Splits the output into one contiguous block per worker. Each block
    /// runs all passes on its slice of the input widened by the effective
    /// window, so workers meet once per call instead of once per pass.
    fn reduce_blocks(&self, z: &Dense) -> Dense {
        if z.digits.is_empty() {
            return Dense { lsd: 0, digits: Vec::new() };
        }
        let (t, r) = self.effective_window();
        let lo = z.lsd - t as i64;
        let len = z.digits.len() + t + r;
        let chunk = par_chunk(len);
        let blocks: Vec<Vec<i64>> = (0..len.div_ceil(chunk))
            .into_par_iter()
            .map(|b| {
                let start = lo + (b * chunk) as i64;
                let end = (lo + ((b + 1) * chunk).min(len) as i64) - 1;
                self.reduce_block(z, start, end)
            })
            .collect();
        let mut out = Dense {
            lsd: lo,
            digits: blocks.concat(),
        };
        out.trim();
        out
    }

    /// Runs every pass on `z`, which may use any digit of [`Self::input_range`].
    pub fn reduce_to_alphabet(&self, z: &DigitString) -> Result<DigitString, AdderError> {
        self.reduce_impl(z, false)
    }

    /// [`Self::reduce_to_alphabet`] spread over the current rayon pool.
    pub fn reduce_parallel(&self, z: &DigitString) -> Result<DigitString, AdderError> {
        self.reduce_impl(z, true)
    }

    pub fn add(&self, x: &DigitString, y: &DigitString) -> Result<DigitString, AdderError> {
        self.check_alphabet(x)?;
        self.check_alphabet(y)?;
        self.reduce_impl(&digitwise_sum(x, y), false)
    }

    pub fn add_parallel(&self, x: &DigitString, y: &DigitString) -> Result<DigitString, AdderError> {
        self.check_alphabet(x)?;
        self.check_alphabet(y)?;
        self.reduce_impl(&digitwise_sum(x, y), true)
    }

    pub fn subtract(&self, x: &DigitString, y: &DigitString) -> Result<DigitString, AdderError> {
        let alphabet = self.system.alphabet;
        if !(alphabet.contains(-1) && alphabet.contains(1)) {
            return Err(AdderError::AlphabetLacksNegatives { alphabet });
        }
        self.check_alphabet(x)?;
        self.check_alphabet(y)?;
        self.reduce_impl(&digitwise_sum(x, &y.negate_digits()), false)
    }

    /// Every pass of `reduce_to_alphabet(z)` with its carries.
    pub fn trace(&self, z: &DigitString) -> Result<Vec<PassTrace>, AdderError> {
        self.check_range(z)?;
        let mut cur = Dense::from(z);
        cur.trim();
        let mut out = Vec::new();
        for rule in self.passes() {
            let input = cur.to_digit_string();
            let alpha = rule.input_alphabet();
            let clamped = DigitString::new(
                input.lsd_exponent,
                input.digits.iter().map(|d| (*d).clamp(alpha.min(), alpha.max())).collect(),
            );
            let carries = rule.carries(&clamped);
            cur = run_pass(rule, &cur);
            out.push(PassTrace {
                rule: rule.name().to_string(),
                input,
                carries,
                output: cur.to_digit_string(),
            });
        }
        Ok(out)
    }
}

pub fn add(x: &DigitString, y: &DigitString, system: &NumerationSystem) -> Result<DigitString, AdderError> {
    build_pipeline(system)?.add(x, y)
}

pub fn subtract(
    x: &DigitString,
    y: &DigitString,
    system: &NumerationSystem,
) -> Result<DigitString, AdderError> {
    build_pipeline(system)?.subtract(x, y)
}

/// One system per family at its smallest parameters, on `{0..K-1}`.
pub fn reference_systems() -> Vec<NumerationSystem> {
    let canonical = |base: BaseSpec, k: i64| {
        crate::system::make_system(base, Alphabet::canonical(k).unwrap()).unwrap()
    };
    vec![
        canonical(BaseSpec::negative_integer(2).unwrap(), 3),
        canonical(BaseSpec::pisot_minus(3).unwrap(), 3),
        canonical(BaseSpec::pisot_plus(2).unwrap(), 4),
        canonical(BaseSpec::rational(3, 2).unwrap(), 5),
        canonical(BaseSpec::negative_rational(3, 2).unwrap(), 5),
        canonical(BaseSpec::minus_one_plus_i(), 5),
        canonical(BaseSpec::two_i(), 5),
        canonical(BaseSpec::i_sqrt2(), 3),
    ]
}

/// `(p, q)` with `beta = p / q`, `q > 0`, for bases with a rational value.
pub fn rational_base(base: &BaseSpec) -> Option<(i64, i64)> {
    use BaseFamily::*;
    match *base.family() {
        Integer { b } => Some((b, 1)),
        NegativeInteger { b } => Some((-b, 1)),
        Root { b, k: 1, .. } => Some((b, 1)),
        NegativeRoot { b, k: 1, .. } => Some((-b, 1)),
        RationalPos { a, b } => Some((a, b)),
        RationalNeg { a, b } => Some((-a, b)),
        _ => None,
    }
}

/// Sequential carry propagation from the least significant digit up,
/// producing digits in `{0..|p|-1}`. `None` for irrational bases.
pub fn ripple_reference(z: &DigitString, base: &BaseSpec) -> Option<DigitString> {
    let (p, q) = rational_base(base)?;
    let modulus = p.abs();
    let mut out = Vec::with_capacity(z.len() + 64);
    let mut carry = 0i64;
    let digits = z.to_lsd_first();
    let mut i = 0;
    while i < digits.len() || carry != 0 {
        let s = digits.get(i).copied().unwrap_or(0) + q * carry;
        let d = s.rem_euclid(modulus);
        carry = (s - d) / p;
        out.push(d);
        i += 1;
    }
    Some(DigitString::from_lsd_first(z.lsd_exponent, out).normalize())
}
