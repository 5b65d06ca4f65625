use carryfree::adder::build_pipeline;
use carryfree::algebra::values_equal;
use carryfree::engine::{compose, fixed_letters, negate_rule, negate_rule_wrapped, same_window_map, shift_alphabet, LocalRule};
use carryfree::rules::{algorithm_a, gde_negative_integer, gde_pisot_minus, gde_pisot_plus, gde_rational_neg, gde_rational_pos};
use carryfree::{make_system, Alphabet, BaseSpec, DigitString, NumerationSystem};
use proptest::prelude::*;

fn rules() -> Vec<(BaseSpec, LocalRule)> {
    vec![
        (BaseSpec::negative_integer(2).unwrap(), gde_negative_integer(2).unwrap()),
        (BaseSpec::pisot_minus(3).unwrap(), algorithm_a(3).unwrap()),
        (BaseSpec::pisot_minus(4).unwrap(), gde_pisot_minus(4).unwrap()),
        (BaseSpec::pisot_plus(2).unwrap(), gde_pisot_plus(2).unwrap()),
        (BaseSpec::rational(3, 2).unwrap(), gde_rational_pos(3, 2).unwrap()),
        (BaseSpec::negative_rational(3, 2).unwrap(), gde_rational_neg(3, 2).unwrap()),
    ]
}

fn systems() -> Vec<NumerationSystem> {
    let s = |b: BaseSpec, lo, hi| make_system(b, Alphabet::new(lo, hi).unwrap()).unwrap();
    vec![
        s(BaseSpec::negative_integer(2).unwrap(), -1, 1),
        s(BaseSpec::negative_integer(2).unwrap(), 0, 2),
        s(BaseSpec::pisot_minus(3).unwrap(), 0, 2),
        s(BaseSpec::pisot_plus(2).unwrap(), 0, 3),
        s(BaseSpec::rational(3, 2).unwrap(), 0, 4),
        s(BaseSpec::negative_rational(3, 2).unwrap(), -2, 2),
        s(BaseSpec::minus_one_plus_i(), 0, 4),
    ]
}

/// A digit string over `alpha` built from raw random words.
fn over(alpha: Alphabet, lsd: i64, raw: &[u32]) -> DigitString {
    let n = alpha.size() as u32;
    DigitString::new(lsd, raw.iter().map(|w| alpha.min() + (w % n) as i64).collect())
}

fn raw_digits(max_len: usize) -> impl Strategy<Value = (i64, Vec<u32>)> {
    (-3i64..3, proptest::collection::vec(any::<u32>(), 0..max_len))
}

/// Input digits at every exponent in `[lo, hi]`, padding with zeros.
fn pad(ds: &DigitString, lo: i64, hi: i64) -> DigitString {
    DigitString::from_lsd_first(lo, (lo..=hi).map(|e| ds.digit_at(e)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rule_preserves_value((lsd, raw) in raw_digits(14), which in 0usize..6) {
        let (base, rule) = &rules()[which];
        let x = over(rule.input_alphabet(), lsd, &raw);
        let y = rule.apply(&x).unwrap();
        prop_assert!(y.digits.iter().all(|d| rule.output_alphabet().contains(*d)));
        prop_assert!(values_equal(&x, &y, base));
        prop_assert_eq!(rule.apply_parallel(&x).unwrap(), y);
    }

    #[test]
    fn rule_commutes_with_exponent_shift((lsd, raw) in raw_digits(10), which in 0usize..6, k in -4i64..5) {
        let rule = &rules()[which].1;
        let x = over(rule.input_alphabet(), lsd, &raw);
        let y = rule.apply(&x).unwrap().normalize();
        let ys = rule.apply(&x.shift_exponent(k)).unwrap().normalize();
        prop_assert_eq!(ys, y.shift_exponent(k).normalize());
    }

    #[test]
    fn rule_is_local(
        (lsd, raw) in raw_digits(16),
        which in 0usize..6,
        pos in any::<u32>(),
        new in any::<u32>(),
    ) {
        let rule = &rules()[which].1;
        let alpha = rule.input_alphabet();
        let x = over(alpha, lsd, &raw);
        let (t, r) = (rule.t() as i64, rule.r() as i64);
        let (lo, hi) = (lsd - 2, lsd + raw.len() as i64 + 2);
        let x = pad(&x, lo, hi);
        let k = lo + (pos as i64).rem_euclid(hi - lo + 1);
        let mut y = x.to_lsd_first();
        y[(k - lo) as usize] = alpha.min() + (new % alpha.size() as u32) as i64;
        let y = DigitString::from_lsd_first(lo, y);
        let (fx, fy) = (rule.apply(&x).unwrap(), rule.apply(&y).unwrap());
        for j in lo - t - 1..=hi + r + 1 {
            if j < k - t || j > k + r {
                prop_assert_eq!(fx.digit_at(j), fy.digit_at(j), "exponent {} changed by mutation at {}", j, k);
            }
        }
    }

    #[test]
    fn shift_commutes_with_apply((lsd, raw) in raw_digits(10), which in 0usize..6) {
        let rule = &rules()[which].1;
        let (t, r) = (rule.t() as i64, rule.r() as i64);
        for h in fixed_letters(rule) {
            let shifted = shift_alphabet(rule, h).unwrap();
            // Zero padding in shifted digits is the fixed letter h in the original ones.
            let v = over(shifted.input_alphabet(), lsd, &raw);
            let got = shifted.apply(&v).unwrap();
            for j in lsd - t - 2..=lsd + raw.len() as i64 + r + 2 {
                let w: Vec<i64> = (j - r..=j + t).rev().map(|e| v.digit_at(e) + h).collect();
                prop_assert_eq!(got.digit_at(j), rule.eval(&w) - h);
            }
        }
    }

    #[test]
    fn negate_commutes_with_apply((lsd, raw) in raw_digits(12), which in 0usize..6) {
        let rule = &rules()[which].1;
        let x = over(rule.input_alphabet(), lsd, &raw);
        let neg = negate_rule(rule);
        let got = neg.apply(&x.negate_digits()).unwrap();
        prop_assert_eq!(got.normalize(), rule.apply(&x).unwrap().negate_digits().normalize());
        prop_assert_eq!(negate_rule(&neg).apply(&x).unwrap(), rule.apply(&x).unwrap());
    }

    #[test]
    fn compose_is_sequential_application((lsd, raw) in raw_digits(12), a in 3i64..6) {
        let (inner, outer) = (algorithm_a(a).unwrap(), gde_pisot_minus(a).unwrap());
        let both = compose(&outer, &inner).unwrap();
        prop_assert_eq!(both.window(), (inner.t() + outer.t(), inner.r() + outer.r()));
        let x = over(inner.input_alphabet(), lsd, &raw);
        let seq = outer.apply(&inner.apply(&x).unwrap()).unwrap();
        prop_assert_eq!(both.apply(&x).unwrap().normalize(), seq.normalize());
    }

    #[test]
    fn sum_is_closed_and_exact((l1, r1) in raw_digits(10), (l2, r2) in raw_digits(10), which in 0usize..7) {
        let sys = &systems()[which];
        let pipe = build_pipeline(sys).unwrap();
        let (x, y) = (over(sys.alphabet, l1, &r1), over(sys.alphabet, l2, &r2));
        let s = pipe.add(&x, &y).unwrap();
        prop_assert!(s.digits.iter().all(|d| sys.alphabet.contains(*d)));
        prop_assert!(values_equal(&s, &carryfree::adder::digitwise_sum(&x, &y), &sys.base));
        prop_assert_eq!(pipe.add_parallel(&x, &y).unwrap(), s);
    }

    #[test]
    fn sum_commutes_and_associates(
        (l1, r1) in raw_digits(8),
        (l2, r2) in raw_digits(8),
        (l3, r3) in raw_digits(8),
        which in 0usize..7,
    ) {
        let sys = &systems()[which];
        let pipe = build_pipeline(sys).unwrap();
        let a = sys.alphabet;
        let (x, y, z) = (over(a, l1, &r1), over(a, l2, &r2), over(a, l3, &r3));
        let add = |u: &DigitString, v: &DigitString| pipe.add(u, v).unwrap();
        prop_assert!(values_equal(&add(&x, &y), &add(&y, &x), &sys.base));
        prop_assert!(values_equal(&add(&add(&x, &y), &z), &add(&x, &add(&y, &z)), &sys.base));
        prop_assert!(values_equal(&add(&x, &DigitString::zero()), &x, &sys.base));
    }

    #[test]
    fn difference_is_exact((l1, r1) in raw_digits(10), (l2, r2) in raw_digits(10), which in 0usize..7) {
        let sys = &systems()[which];
        if sys.alphabet.min() > -1 {
            return Ok(());
        }
        let pipe = build_pipeline(sys).unwrap();
        let (x, y) = (over(sys.alphabet, l1, &r1), over(sys.alphabet, l2, &r2));
        let d = pipe.subtract(&x, &y).unwrap();
        prop_assert!(d.digits.iter().all(|v| sys.alphabet.contains(*v)));
        prop_assert!(values_equal(&pipe.add(&d, &y).unwrap(), &x, &sys.base));
    }

    #[test]
    fn sum_is_local(
        (l1, r1) in raw_digits(12),
        (l2, r2) in raw_digits(12),
        pos in any::<u32>(),
        new in any::<u32>(),
        which in 0usize..7,
    ) {
        let sys = &systems()[which];
        let pipe = build_pipeline(sys).unwrap();
        let (t, r) = pipe.effective_window();
        let (t, r) = (t as i64, r as i64);
        let a = sys.alphabet;
        let (x, y) = (over(a, l1, &r1), over(a, l2, &r2));
        let lo = x.lsd_exponent.min(y.lsd_exponent) - 1;
        let hi = lo + 16;
        let x = pad(&x, lo, hi);
        let k = lo + (pos as i64).rem_euclid(hi - lo + 1);
        let mut x2 = x.to_lsd_first();
        x2[(k - lo) as usize] = a.min() + (new % a.size() as u32) as i64;
        let x2 = DigitString::from_lsd_first(lo, x2);
        let (s1, s2) = (pipe.add(&x, &y).unwrap(), pipe.add(&x2, &y).unwrap());
        for j in lo - t - 1..=hi + r + 1 {
            if j < k - t || j > k + r {
                prop_assert_eq!(s1.digit_at(j), s2.digit_at(j));
            }
        }
    }
}

#[test]
fn negation_is_an_involution_on_window_maps() {
    for (_, rule) in rules() {
        let twice = negate_rule_wrapped(&negate_rule_wrapped(&rule));
        assert!(same_window_map(&twice, &rule, &rule.input_alphabet()), "{}", rule.name());
    }
}
