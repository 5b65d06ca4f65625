//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use carryfree::adder::{build_elimination_pipeline, build_pipeline, reference_systems, AdderError};
use carryfree::bench::run_bench;
use carryfree::bounds::{lower_bound_f1, minimal_alphabet_report};
use carryfree::engine::{compose, fixed_letters, for_each_window, negate_rule_wrapped, same_window_map, shift_alphabet, LocalRule};
use carryfree::expansions::euclid_expansion;
use carryfree::oracle::{verify_addition, verify_boundary_claims, verify_congruence, verify_conversion, VerifyOptions};
use carryfree::rules::{
    algorithm_a, catalog, gde_negative_integer, gde_pisot_minus, gde_pisot_plus, rule_for_alphabet, RulesError,
};
use carryfree::{make_system, Alphabet, BaseFamily, BaseSpec, NumerationSystem};

type Criterion = (&'static str, fn(&mut Check) -> String);

/// Outcome of one criterion: failures are collected, not panicked on.
struct Check {
    problems: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { problems: Vec::new() }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.problems.push(what());
        }
    }
}

fn system(base: BaseSpec, lo: i64, hi: i64) -> NumerationSystem {
    make_system(base, Alphabet::new(lo, hi).unwrap()).unwrap()
}

fn locality_parameters(c: &mut Check) -> String {
    let start = Instant::now();
    let want = [
        (gde_negative_integer(2).unwrap(), (0, 2)),
        (algorithm_a(3).unwrap(), (2, 2)),
        (gde_pisot_minus(3).unwrap(), (3, 3)),
        (gde_pisot_plus(2).unwrap(), (2, 2)),
    ];
    for (rule, w) in &want {
        c.expect(rule.window() == *w, || format!("{} is {:?}, want {:?}", rule.name(), rule.window(), w));
    }
    let alg_i = build_pipeline(&system(BaseSpec::pisot_minus(3).unwrap(), 0, 2)).unwrap();
    let (t, r) = alg_i.effective_window();
    c.expect((t, r) == (5, 5) && t + r + 1 == 11, || format!("pisot-:3 adder is {:?}", (t, r)));
    for a in [3, 4, 5, 6] {
        let step = gde_pisot_minus(a).unwrap();
        let mut acc = step.clone();
        for _ in 1..a - 1 {
            acc = compose(&step, &acc).unwrap();
        }
        let k = 3 * a as usize - 3;
        c.expect(acc.window() == (k, k), || format!("{}-fold GDE(pisot-:{a}) is {:?}", a - 1, acc.window()));
    }
    let elim = build_elimination_pipeline(&system(BaseSpec::pisot_minus(3).unwrap(), 0, 2)).unwrap();
    c.expect(elim.effective_window() == (6, 6), || format!("elimination plan is {:?}", elim.effective_window()));
    let dt = start.elapsed();
    c.expect(dt < Duration::from_secs(1), || format!("took {dt:?}"));
    format!("{} windows checked in {:.0} ms", want.len() + 6, dt.as_secs_f64() * 1e3)
}

fn exhaustive_conversion(c: &mut Check) -> String {
    let start = Instant::now();
    let rules = catalog().unwrap();
    let mut instances = 0;
    for (base, rule) in &rules {
        let mut opts = VerifyOptions::default();
        if matches!(base.family(), BaseFamily::NegativeRoot { k: 4, .. } | BaseFamily::Root { k: 4, .. }) {
            opts.sample_len = (7, 18);
        }
        match verify_conversion(rule, base, &opts) {
            Ok(rep) => {
                instances += rep.instances_checked;
                c.expect(rep.passed(), || format!("{}: {} failures, e.g. {:?}", rule.name(), rep.failure_count, rep.failures.first()));
            }
            Err(e) => c.problems.push(format!("{}: {e}", rule.name())),
        }
    }
    let dt = start.elapsed();
    c.expect(dt < Duration::from_secs(300), || format!("took {dt:?}"));
    format!("{} rules, {instances} strings in {:.1} s", rules.len(), dt.as_secs_f64())
}

fn addition_closure(c: &mut Check, systems: &[NumerationSystem]) -> u64 {
    let mut instances = 0;
    for sys in systems {
        match build_pipeline(sys) {
            Ok(pipe) => {
                let rep = verify_addition(&pipe, 10_000, 8, 11);
                instances += rep.instances_checked;
                c.expect(rep.passed(), || format!("{}: {:?}", rep.id, rep.failures.first()));
            }
            Err(e) => c.problems.push(format!("{} on {}: {e}", sys.base.mnemonic(), sys.alphabet)),
        }
    }
    instances
}

fn end_to_end_addition(c: &mut Check) -> String {
    let systems = reference_systems();
    let n = addition_closure(c, &systems);
    let mut converted = 0;
    for sys in &systems {
        let pipe = build_pipeline(sys).unwrap();
        match verify_conversion(&pipe, &sys.base, &VerifyOptions::quick(6)) {
            Ok(rep) => {
                converted += rep.instances_checked;
                c.expect(rep.passed(), || format!("{}: {:?}", rep.id, rep.failures.first()));
            }
            Err(e) => c.problems.push(format!("{} on {}: {e}", sys.base.mnemonic(), sys.alphabet)),
        }
    }
    format!("{} systems, {n} sums, {converted} digitwise sums reduced", systems.len())
}

fn alphabet_families(c: &mut Check) -> String {
    let mut systems = Vec::new();
    for d in 0..3 {
        systems.push(system(BaseSpec::negative_integer(2).unwrap(), -d, 2 - d));
    }
    for d in 0..5 {
        systems.push(system(BaseSpec::negative_rational(3, 2).unwrap(), -d, 4 - d));
    }
    let n = addition_closure(c, &systems);
    let rational = BaseSpec::rational(3, 2).unwrap();
    let mut accepted = Vec::new();
    for d in 0..5 {
        let alpha = Alphabet::new(-d, 4 - d).unwrap();
        let rule = rule_for_alphabet(&rational, alpha);
        let pipe = build_pipeline(&make_system(rational.clone(), alpha).unwrap());
        match (d, rule, pipe) {
            (0 | 2 | 4, Ok(_), Ok(p)) => {
                accepted.push(d);
                let rep = verify_addition(&p, 10_000, 8, 11);
                c.expect(rep.passed(), || format!("3/2 on {alpha}: {:?}", rep.failures.first()));
            }
            (1 | 3, Err(RulesError::AlphabetUnsupported { .. }), Err(AdderError::Rules(RulesError::AlphabetUnsupported { .. }))) => {}
            (_, r, p) => c.problems.push(format!("3/2 on {alpha}: rule {:?}, pipeline {:?}", r.err(), p.err())),
        }
    }
    format!("{} systems, {n} sums; base 3/2 accepts d in {accepted:?}", systems.len())
}

fn bounds(c: &mut Check) -> String {
    let mut rows = Vec::new();
    let mut f1 = |base: BaseSpec, want: i64| {
        let got = lower_bound_f1(&base).map(|b| b.bound());
        rows.push(format!("{}={}", base.mnemonic(), got.as_ref().map_or(-1, |v| *v)));
        (base, got, want)
    };
    let mut checks = vec![
        f1(BaseSpec::minus_one_plus_i(), 5),
        f1(BaseSpec::two_i(), 5),
        f1(BaseSpec::i_sqrt2(), 3),
    ];
    for a in [3, 4, 5, 6] {
        checks.push(f1(BaseSpec::pisot_minus(a).unwrap(), a));
    }
    for a in [2, 3, 5] {
        checks.push(f1(BaseSpec::pisot_plus(a).unwrap(), a + 2));
    }
    for (base, got, want) in checks {
        c.expect(got.as_ref().ok() == Some(&want), || format!("{}: {got:?}, want {want}", base.mnemonic()));
    }
    for (a, b) in [(3, 2), (5, 2), (5, 3), (7, 4)] {
        for base in [BaseSpec::rational(a, b).unwrap(), BaseSpec::negative_rational(a, b).unwrap()] {
            let rep = minimal_alphabet_report(&base);
            c.expect(rep.minimal_size == a + b && rep.rational_bound == Some(a + b), || {
                format!("{}: minimal size {}", base.mnemonic(), rep.minimal_size)
            });
        }
    }
    rows.join(" ")
}

fn worked_expansion(c: &mut Check) -> String {
    let got = euclid_expansion(&BigInt::from(4), &BaseSpec::rational(3, 2).unwrap()).unwrap();
    c.expect(got.lsd_exponent == 0 && got.digits == vec![2, 1], || format!("got {got}"));
    format!("4 = {got} in base 3/2")
}

fn claims(c: &mut Check) -> String {
    let (mut congruence, mut boundary) = (0, 0);
    for (base, rule) in catalog().unwrap() {
        if let Ok(rep) = verify_congruence(&rule, &base) {
            congruence += 1;
            c.expect(rep.passed(), || format!("congruence {}: {:?}", rep.id, rep.failures));
        }
        if let Ok(rep) = verify_boundary_claims(&rule, &base) {
            boundary += 1;
            c.expect(rep.passed(), || format!("boundary {}: {:?}", rep.id, rep.failures));
        }
        let algebraic_integer = !matches!(
            base.family(),
            BaseFamily::RationalPos { .. } | BaseFamily::RationalNeg { .. }
        );
        c.expect(!algebraic_integer || verify_congruence(&rule, &base).is_ok(), || {
            format!("congruence not applicable to {}", rule.name())
        });
        c.expect(!base.is_real_above_one() || verify_boundary_claims(&rule, &base).is_ok(), || {
            format!("boundary claims not applicable to {}", rule.name())
        });
    }
    for sys in reference_systems() {
        let pipe = build_pipeline(&sys).unwrap();
        if let Ok(rep) = verify_congruence(&pipe, &sys.base) {
            congruence += 1;
            c.expect(rep.passed(), || format!("congruence {}: {:?}", rep.id, rep.failures));
        }
        if let Ok(rep) = verify_boundary_claims(&pipe, &sys.base) {
            boundary += 1;
            c.expect(rep.passed(), || format!("boundary {}: {:?}", rep.id, rep.failures));
        }
    }
    format!("{congruence} congruence and {boundary} boundary reports")
}

/// The shifted rule on `v` agrees window by window with the original rule
/// on `v + h`, for every string `v` of length at most 5 over the shifted
/// input alphabet.
fn shift_coherent(rule: &LocalRule, h: i64) -> Result<u64, String> {
    let shifted = shift_alphabet(rule, h).map_err(|e| e.to_string())?;
    let (t, r) = (rule.t() as i64, rule.r() as i64);
    let alpha = shifted.input_alphabet();
    let mut count = 0;
    let mut err = None;
    for len in 1..=5 {
        for_each_window(&alpha, len, |msd_first| {
            count += 1;
            let v = carryfree::DigitString::new(0, msd_first.to_vec());
            let got = match shifted.apply(&v) {
                Ok(g) => g,
                Err(e) => {
                    err = Some(e.to_string());
                    return false;
                }
            };
            for j in -t - 1..=len as i64 + r {
                let w: Vec<i64> = (j - r..=j + t).rev().map(|e| v.digit_at(e) + h).collect();
                if got.digit_at(j) != rule.eval(&w) - h {
                    err = Some(format!("{} shifted by {h} disagrees on {v} at {j}", rule.name()));
                    return false;
                }
            }
            true
        });
        if err.is_some() {
            break;
        }
    }
    err.map_or(Ok(count), Err)
}

fn shift_negation(c: &mut Check) -> String {
    let mut strings = 0;
    let mut letters = 0;
    for (_, rule) in catalog().unwrap() {
        for h in fixed_letters(&rule) {
            letters += 1;
            match shift_coherent(&rule, h) {
                Ok(n) => strings += n,
                Err(e) => c.problems.push(e),
            }
        }
        let twice = negate_rule_wrapped(&negate_rule_wrapped(&rule));
        c.expect(same_window_map(&twice, &rule, &rule.input_alphabet()), || {
            format!("negation is not an involution on {}", rule.name())
        });
    }
    format!("{letters} fixed letters, {strings} strings")
}

fn bench_gate(c: &mut Check) -> String {
    let mut out = Vec::new();
    for sys in [
        system(BaseSpec::negative_integer(2).unwrap(), 0, 2),
        system(BaseSpec::rational(3, 2).unwrap(), 0, 4),
    ] {
        let rep = run_bench(&sys, 1_000_000, &[1, 8], 9, 3).unwrap();
        c.expect(rep.identical, || format!("{}: parallel output differs", rep.base));
        c.expect(rep.ripple_value_equal != Some(false), || format!("{}: ripple value differs", rep.base));
        let (one, eight) = (rep.row(1).unwrap().millis, rep.row(8).unwrap().millis);
        c.expect(eight <= one, || format!("{}: 8 workers {eight:.1} ms > 1 worker {one:.1} ms", rep.base));
        out.push(format!("{} 1w {one:.1} ms 8w {eight:.1} ms", rep.base));
    }
    format!("{} ({} cpus)", out.join(", "), std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("locality parameters", locality_parameters),
        ("exhaustive conversion", exhaustive_conversion),
        ("end-to-end addition", end_to_end_addition),
        ("alphabet families", alphabet_families),
        ("bounds", bounds),
        ("worked expansion", worked_expansion),
        ("congruence and boundary claims", claims),
        ("shift and negation coherence", shift_negation),
        ("bench gate", bench_gate),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let mut c = Check::new();
        let detail = run(&mut c);
        let ok = c.problems.is_empty();
        println!("criterion {}: {} {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
        for p in c.problems.iter().take(10) {
            println!("    {p}");
        }
        failed += usize::from(!ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
