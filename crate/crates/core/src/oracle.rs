//! Brute-force checks of conversions against exact arithmetic in Z[beta].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::adder::{digitwise_sum, AdderPipeline};
use crate::algebra::values_equal;
use crate::bounds::minimal_polynomial;
use crate::digits::DigitString;
use crate::engine::{for_each_window, LocalRule};
use crate::system::{Alphabet, BaseSpec};

/// Most failures kept in a report; the count keeps going.
pub const MAX_WITNESSES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{needed} strings exceed the enumeration budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("{check} does not apply to base {base}: {reason}")]
    NotApplicable {
        check: &'static str,
        base: String,
        reason: String,
    },
}

/// Anything that rewrites digit strings and claims to preserve value.
pub trait Conversion: Sync {
    fn id(&self) -> String;
    fn input_alphabet(&self) -> Alphabet;
    fn output_alphabet(&self) -> Alphabet;
    fn window(&self) -> (usize, usize);
    fn convert(&self, x: &DigitString) -> Result<DigitString, String>;
    /// Output digit for the bi-infinite constant string `c c c ...`.
    fn constant(&self, c: i64) -> i64;
    /// The alphabet whose extremes the boundary claims talk about.
    fn boundary_alphabet(&self) -> Alphabet {
        self.input_alphabet()
    }
    /// Whether this is a full adder `D + D -> D`.
    fn is_adder(&self) -> bool {
        false
    }
}

impl Conversion for LocalRule {
    fn id(&self) -> String {
        self.name().to_string()
    }

    fn input_alphabet(&self) -> Alphabet {
        LocalRule::input_alphabet(self)
    }

    fn output_alphabet(&self) -> Alphabet {
        LocalRule::output_alphabet(self)
    }

    fn window(&self) -> (usize, usize) {
        LocalRule::window(self)
    }

    fn convert(&self, x: &DigitString) -> Result<DigitString, String> {
        self.apply(x).map_err(|e| e.to_string())
    }

    fn constant(&self, c: i64) -> i64 {
        self.eval_constant(c)
    }
}

impl Conversion for AdderPipeline {
    fn id(&self) -> String {
        format!("add[{} on {}]", self.system.base.mnemonic(), self.system.alphabet)
    }

    fn input_alphabet(&self) -> Alphabet {
        self.system.alphabet.doubled()
    }

    fn output_alphabet(&self) -> Alphabet {
        self.system.alphabet
    }

    fn window(&self) -> (usize, usize) {
        self.effective_window()
    }

    fn convert(&self, x: &DigitString) -> Result<DigitString, String> {
        self.reduce_to_alphabet(x).map_err(|e| e.to_string())
    }

    fn constant(&self, c: i64) -> i64 {
        self.plan.iter().fold(c, |c, step| {
            (0..step.passes).fold(c, |c, _| {
                let a = step.rule.input_alphabet();
                let low = c.clamp(a.min(), a.max());
                step.rule.eval_constant(low) + c - low
            })
        })
    }

    fn boundary_alphabet(&self) -> Alphabet {
        self.system.alphabet
    }

    fn is_adder(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub input: String,
    pub output: String,
    pub property: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_len: usize,
    pub max_strings: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub id: String,
    pub check: String,
    pub instances_checked: u64,
    pub failure_count: u64,
    pub failures: Vec<Failure>,
    pub budget: Budget,
    /// Values computed along the way, e.g. `("Phi(3^7)", 2)`.
    pub values: Vec<(String, i64)>,
}

impl VerificationReport {
    fn new(id: String, check: &str, budget: Budget) -> Self {
        VerificationReport {
            id,
            check: check.to_string(),
            instances_checked: 0,
            failure_count: 0,
            failures: Vec::new(),
            budget,
            values: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    fn fail(&mut self, input: impl ToString, output: impl ToString, property: impl Into<String>) {
        self.failure_count += 1;
        let f = Failure {
            input: input.to_string(),
            output: output.to_string(),
            property: property.into(),
        };
        if self.failures.len() < MAX_WITNESSES && !self.failures.contains(&f) {
            self.failures.push(f);
        }
    }

    fn finish(mut self) -> Self {
        self.failures.sort_by(|a, b| (&a.property, &a.input).cmp(&(&b.property, &b.input)));
        self
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Every string up to this length is checked.
    pub max_len: usize,
    /// Largest number of enumerated strings allowed.
    pub budget: u64,
    /// Random strings checked beyond the exhaustive part.
    pub samples: usize,
    /// Length range of the random strings.
    pub sample_len: (usize, usize),
    /// Random strings used for the locality check.
    pub mutations: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_len: 6,
            budget: 10_000_000,
            samples: 100_000,
            sample_len: (7, 12),
            mutations: 2_000,
            seed: 1,
        }
    }
}

impl VerifyOptions {
    pub fn quick(max_len: usize) -> Self {
        VerifyOptions {
            max_len,
            samples: 2_000,
            mutations: 200,
            ..Default::default()
        }
    }
}

fn random_string(rng: &mut ChaCha8Rng, alpha: Alphabet, len: usize) -> DigitString {
    let lsd = -rng.gen_range(0..=2);
    DigitString::new(lsd, (0..len).map(|_| rng.gen_range(alpha.min()..=alpha.max())).collect())
}

fn check_one<C: Conversion + ?Sized>(
    conv: &C,
    base: &BaseSpec,
    x: &DigitString,
    report: &mut VerificationReport,
) -> Option<DigitString> {
    report.instances_checked += 1;
    let out_alpha = conv.output_alphabet();
    match conv.convert(x) {
        Err(e) => {
            report.fail(x, e, "conversion error");
            None
        }
        Ok(y) => {
            if let Some(d) = y.digits.iter().find(|d| !out_alpha.contains(**d)) {
                report.fail(x, &y, format!("digit {d} outside {out_alpha}"));
            } else if !values_equal(x, &y, base) {
                report.fail(x, &y, "value changed");
            }
            Some(y)
        }
    }
}

/// Runs `conv` on every string of length at most `max_len` over its input
/// alphabet (least significant exponent cycling through 0, -1, -2), on
/// random longer strings, and on paired mutations for locality.
pub fn verify_conversion<C: Conversion + ?Sized>(
    conv: &C,
    base: &BaseSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport, OracleError> {
    let alpha = conv.input_alphabet();
    let size = alpha.size() as u128;
    let needed: u128 = (1..=opts.max_len as u32).map(|l| size.pow(l)).sum();
    if needed > opts.budget as u128 {
        return Err(OracleError::BudgetExceeded {
            needed,
            budget: opts.budget,
        });
    }
    let mut report = VerificationReport::new(
        conv.id(),
        "conversion",
        Budget {
            max_len: opts.max_len,
            max_strings: opts.budget,
        },
    );

    match conv.convert(&DigitString::zero()) {
        Ok(z) if z.is_zero() => {}
        Ok(z) => report.fail(".", z, "zero not preserved"),
        Err(e) => report.fail(".", e, "conversion error"),
    }

    let mut counter = 0u64;
    for len in 1..=opts.max_len {
        for_each_window(&alpha, len, |w| {
            let x = DigitString::new(-((counter % 3) as i64), w.to_vec());
            counter += 1;
            check_one(conv, base, &x, &mut report);
            true
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..opts.samples {
        let len = rng.gen_range(opts.sample_len.0..=opts.sample_len.1);
        let x = random_string(&mut rng, alpha, len);
        let y = check_one(conv, base, &x, &mut report);
        // translation invariance
        if i < 200 {
            if let (Some(y), Ok(ys)) = (y, conv.convert(&x.shift_exponent(3))) {
                if ys != y.shift_exponent(3) {
                    report.fail(&x, &ys, "not translation invariant");
                }
            }
        }
    }

    let (t, r) = conv.window();
    for _ in 0..opts.mutations {
        let len = rng.gen_range(1..=opts.sample_len.1.max(t + r + 4));
        let x = random_string(&mut rng, alpha, len);
        let lsd = x.lsd_exponent;
        let j = rng.gen_range(lsd - r as i64..=lsd + len as i64 - 1 + t as i64);
        let mut x2 = x.clone();
        for (i, d) in x2.digits.iter_mut().enumerate() {
            let e = lsd + (len - 1 - i) as i64;
            if e < j - r as i64 || e > j + t as i64 {
                *d = rng.gen_range(alpha.min()..=alpha.max());
            }
        }
        report.instances_checked += 1;
        if let (Ok(y), Ok(y2)) = (conv.convert(&x), conv.convert(&x2)) {
            if y.digit_at(j) != y2.digit_at(j) {
                report.fail(
                    format!("{x} vs {x2}"),
                    format!("{y} vs {y2}"),
                    format!("output at exponent {j} depends on digits outside its window"),
                );
            }
        }
    }
    Ok(report.finish())
}

/// `Phi(x^p) = x mod |f(1)|` for every input letter `x`, with `f` the
/// minimal polynomial of beta.
pub fn verify_congruence<C: Conversion + ?Sized>(
    conv: &C,
    base: &BaseSpec,
) -> Result<VerificationReport, OracleError> {
    let mp = minimal_polynomial(base).map_err(|e| OracleError::NotApplicable {
        check: "congruence",
        base: base.mnemonic(),
        reason: e.to_string(),
    })?;
    let m = mp.at_one().abs();
    let (t, r) = conv.window();
    let p = t + r + 1;
    let mut report = VerificationReport::new(
        conv.id(),
        "congruence",
        Budget {
            max_len: p,
            max_strings: conv.input_alphabet().size() as u64,
        },
    );
    report.values.push(("|f(1)|".into(), m));
    for x in conv.input_alphabet().digits() {
        let y = conv.constant(x);
        report.instances_checked += 1;
        report.values.push((format!("Phi({x}^{p})"), y));
        if m != 0 && (x - y).rem_euclid(m) != 0 {
            report.fail(format!("{x}^{p}"), y, format!("not congruent to {x} mod {m}"));
        }
    }
    Ok(report.finish())
}

/// For real beta > 1 and `D` with extremes `lambda`, `Lambda`:
/// `Phi(Lambda^p)` is neither `lambda` nor `Lambda`, `Phi(lambda^p) !=
/// Lambda`, and for adders with `lambda != 0` also `Phi(lambda^p) !=
/// lambda`. The last one needs inputs `2 lambda`, so single rules skip it.
pub fn verify_boundary_claims<C: Conversion + ?Sized>(
    conv: &C,
    base: &BaseSpec,
) -> Result<VerificationReport, OracleError> {
    if !base.is_real_above_one() {
        return Err(OracleError::NotApplicable {
            check: "boundary claims",
            base: base.mnemonic(),
            reason: "beta is not a real number above 1".into(),
        });
    }
    let d = conv.boundary_alphabet();
    let (lo, hi) = (d.min(), d.max());
    let (t, r) = conv.window();
    let p = t + r + 1;
    let mut report = VerificationReport::new(
        conv.id(),
        "boundary",
        Budget {
            max_len: p,
            max_strings: 2,
        },
    );
    let top = conv.constant(hi);
    let bottom = conv.constant(lo);
    report.values.push((format!("Phi({hi}^{p})"), top));
    report.values.push((format!("Phi({lo}^{p})"), bottom));
    report.instances_checked = 2;
    if top == lo {
        report.fail(format!("{hi}^{p}"), top, "Phi(Lambda^p) = lambda");
    }
    if top == hi {
        report.fail(format!("{hi}^{p}"), top, "Phi(Lambda^p) = Lambda");
    }
    if bottom == hi {
        report.fail(format!("{lo}^{p}"), bottom, "Phi(lambda^p) = Lambda");
    }
    if conv.is_adder() && lo != 0 && bottom == lo {
        report.fail(format!("{lo}^{p}"), bottom, "Phi(lambda^p) = lambda");
    }
    Ok(report.finish())
}

/// The exact sum as a digit string over `A + A`.
pub fn reference_add(x: &DigitString, y: &DigitString) -> DigitString {
    digitwise_sum(x, y)
}

/// Adds `pairs` random pairs of length at most `max_len` plus every pair of
/// single digits, checking value and alphabet of each result.
pub fn verify_addition(
    pipeline: &AdderPipeline,
    pairs: usize,
    max_len: usize,
    seed: u64,
) -> VerificationReport {
    let alpha = pipeline.alphabet();
    let base = pipeline.base().clone();
    let mut report = VerificationReport::new(
        pipeline.id(),
        "addition",
        Budget {
            max_len,
            max_strings: pairs as u64,
        },
    );
    let check = |x: &DigitString, y: &DigitString, report: &mut VerificationReport| {
        report.instances_checked += 1;
        let witness = reference_add(x, y);
        match pipeline.add(x, y) {
            Err(e) => report.fail(format!("{x} + {y}"), e, "addition error"),
            Ok(s) => {
                if let Some(d) = s.digits.iter().find(|d| !alpha.contains(**d)) {
                    report.fail(format!("{x} + {y}"), &s, format!("digit {d} outside {alpha}"));
                } else if !values_equal(&s, &witness, &base) {
                    report.fail(format!("{x} + {y}"), &s, "sum has the wrong value");
                }
            }
        }
    };
    for a in alpha.digits() {
        for b in alpha.digits() {
            check(&DigitString::integer(vec![a]), &DigitString::integer(vec![b]), &mut report);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..pairs {
        let (lx, ly) = (rng.gen_range(1..=max_len), rng.gen_range(1..=max_len));
        let x = random_string(&mut rng, alpha, lx);
        let y = random_string(&mut rng, alpha, ly);
        check(&x, &y, &mut report);
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adder::build_pipeline;
    use crate::engine::WindowMap;
    use crate::rules::*;
    use crate::system::make_system;

    #[test]
    fn exhaustive_negative_two() {
        let rule = gde_negative_integer(2).unwrap();
        let opts = VerifyOptions {
            samples: 0,
            mutations: 0,
            ..Default::default()
        };
        let rep = verify_conversion(&rule, &BaseSpec::negative_integer(2).unwrap(), &opts).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        // 4 + 16 + ... + 4096
        assert_eq!(rep.instances_checked, 5460);
    }

    #[test]
    fn corrupted_table_is_caught() {
        let rule = gde_negative_integer(2).unwrap().materialize().unwrap();
        let WindowMap::Table { entries } = rule.map() else { panic!() };
        let mut bad = (**entries).clone();
        // window 3 0 0 should give 1
        let idx = 3 * 16;
        bad[idx] = 0;
        let broken = LocalRule::from_table(
            "broken",
            rule.input_alphabet(),
            rule.output_alphabet(),
            0,
            2,
            bad,
        )
        .unwrap();
        let rep = verify_conversion(&broken, &BaseSpec::negative_integer(2).unwrap(), &VerifyOptions::quick(3))
            .unwrap();
        assert!(!rep.passed());
        assert!(rep.failures.iter().any(|f| f.property == "value changed"));
    }

    #[test]
    fn budget_is_enforced() {
        let rule = gde_negative_integer(10).unwrap();
        let opts = VerifyOptions {
            max_len: 8,
            ..Default::default()
        };
        assert!(matches!(
            verify_conversion(&rule, &BaseSpec::negative_integer(10).unwrap(), &opts),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn claims() {
        let b = BaseSpec::negative_integer(2).unwrap();
        let rep = verify_congruence(&gde_negative_integer(2).unwrap(), &b).unwrap();
        assert!(rep.passed());
        assert!(rep.values.contains(&("Phi(3^3)".into(), 0)));
        let pp = BaseSpec::pisot_plus(3).unwrap();
        let rep = verify_congruence(&gde_pisot_plus(3).unwrap(), &pp).unwrap();
        assert!(rep.values.contains(&("Phi(5^5)".into(), 2)));
        let pm = BaseSpec::pisot_minus(3).unwrap();
        let rep = verify_boundary_claims(&gde_pisot_minus(3).unwrap(), &pm).unwrap();
        assert!(rep.passed());
        assert!(rep.values.contains(&("Phi(3^7)".into(), 2)));
        assert!(verify_boundary_claims(&gde_negative_integer(2).unwrap(), &b).is_err());
        assert!(verify_congruence(&gde_rational_pos(3, 2).unwrap(), &BaseSpec::rational(3, 2).unwrap()).is_err());
    }

    #[test]
    fn small_addition_run() {
        let sys = make_system(BaseSpec::negative_integer(2).unwrap(), Alphabet::new(-1, 1).unwrap()).unwrap();
        let rep = verify_addition(&build_pipeline(&sys).unwrap(), 300, 8, 3);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.instances_checked, 309);
        assert_eq!(reference_add(&DigitString::zero(), &DigitString::zero()), DigitString::zero());
    }
}
