//! (t, r)-local digit maps.
//!
//! A rule maps the window `u_{j+t} ... u_{j-r}` (most significant first) to
//! the output digit at position `j`. Positions outside the support read as
//! zero, and `Phi(0^p) = 0` keeps outputs finite.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{poly_vanishes, LaurentPoly};
use crate::digits::DigitString;
use crate::system::{Alphabet, BaseSpec};

/// Windows enumerated exhaustively when deriving a rule.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;
/// Largest table kept in memory.
pub const TABLE_LIMIT: u64 = 100_000;
const CLOSURE_SAMPLES: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("carry pattern {pattern} is not a multiple of the defining polynomial of {base}")]
    ValuePatternNotMultiple { pattern: String, base: String },
    #[error("the selector does not map the zero window to 0")]
    ZeroWindowNotZero,
    #[error("window {window:?} produces {output}, outside the output alphabet {alphabet}")]
    OutputEscapesAlphabet {
        window: Vec<i64>,
        output: i64,
        alphabet: Alphabet,
    },
    #[error("digit {digit} at exponent {exponent} is outside the input alphabet {alphabet}")]
    DigitOutOfAlphabet {
        digit: i64,
        exponent: i64,
        alphabet: Alphabet,
    },
    #[error("letter {h} is not fixed by the rule")]
    LetterNotFixed { h: i64 },
    #[error("inner output alphabet {inner} is not contained in outer input alphabet {outer}")]
    AlphabetMismatch { inner: Alphabet, outer: Alphabet },
    #[error("invalid rule: {0}")]
    InvalidRule(String),
}

/// Carry selectors of the catalog algorithms, transcribed case by case.
/// The first matching case wins.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum CarrySelector {
    /// base -b, from {0..b+1} to {0..b}
    NegativeInteger { b: i64 },
    /// beta^k = b
    PositiveRoot { b: i64, k: u32 },
    /// beta^k = -b
    NegativeRoot { b: i64, k: u32 },
    /// beta^2 = a beta - 1, from {0..2a-2} to {0..a}
    AlgorithmA { a: i64 },
    /// beta^2 = a beta - 1, from {0..a} to {0..a-1}
    PisotMinus { a: i64 },
    /// beta^2 = a beta + 1, from {0..a+2} to {0..a+1}
    PisotPlus { a: i64 },
    /// beta = a/b, from {0..a+b} to {0..a+b-1}
    RationalPos { a: i64, b: i64 },
    /// beta = -a/b, from {0..a+b} to {0..a+b-1}
    RationalNeg { a: i64, b: i64 },
}

impl CarrySelector {
    /// `(t_q, r_q)`: the selector reads `z_{j+t_q} ... z_{j-r_q}`.
    pub fn window(&self) -> (usize, usize) {
        use CarrySelector::*;
        match *self {
            NegativeInteger { .. } | RationalNeg { .. } => (0, 1),
            PositiveRoot { k, .. } | NegativeRoot { k, .. } => (0, k as usize),
            AlgorithmA { .. } | PisotPlus { .. } => (1, 1),
            PisotMinus { .. } => (2, 2),
            RationalPos { .. } => (0, 0),
        }
    }

    /// Carry `q_j` for the window `w` (most significant first).
    pub fn select(&self, w: &[i64]) -> i64 {
        use CarrySelector::*;
        let tq = self.window().0 as i64;
        let z = |off: i64| w[(tq - off) as usize];
        let z0 = z(0);
        match *self {
            NegativeInteger { b } => {
                if z0 == b + 1 || (z0 == b && z(-1) == 0) {
                    1
                } else if z0 == 0 && z(-1) >= b {
                    -1
                } else {
                    0
                }
            }
            PositiveRoot { b, k } => {
                let zk = z(-(k as i64));
                if z0 == b + 1 || (z0 == b && zk >= b) {
                    1
                } else {
                    0
                }
            }
            NegativeRoot { b, k } => {
                let zk = z(-(k as i64));
                if z0 == b + 1 || (z0 == b && zk == 0) {
                    1
                } else if z0 == 0 && zk >= b {
                    -1
                } else {
                    0
                }
            }
            AlgorithmA { a } => {
                if z0 >= a || (z0 == a - 1 && z(1) >= a && z(-1) >= a) {
                    1
                } else {
                    0
                }
            }
            PisotMinus { a } => {
                let (z1, zm1, z2, zm2) = (z(1), z(-1), z(2), z(-2));
                let hit = z0 == a
                    || (z0 == a - 1 && (z1 >= a - 1 || zm1 >= a - 1))
                    || (z0 == a - 2 && z1 == a && zm1 == a)
                    || (z0 == a - 2 && z1 == a && zm1 == a - 1 && zm2 >= a - 1)
                    || (z0 == a - 2 && zm1 == a && z1 == a - 1 && z2 >= a - 1)
                    || (z0 == a - 2 && z1 == a - 1 && zm1 == a - 1 && z2 >= a - 1 && zm2 >= a - 1);
                hit as i64
            }
            PisotPlus { a } => {
                let (z1, zm1) = (z(1), z(-1));
                if z0 == a + 2
                    || (z0 == a + 1 && (z1 == 0 || zm1 > a))
                    || (z0 == a && z1 == 0 && zm1 > a)
                {
                    1
                } else if z0 == 0 && z1 > a && zm1 <= a {
                    -1
                } else {
                    0
                }
            }
            RationalPos { a, b } => (a <= z0 && z0 <= a + b) as i64,
            RationalNeg { a, b } => {
                let zm1 = z(-1);
                if z0 == a + b || (a <= z0 && z0 < a + b && 0 <= zm1 && zm1 < b) {
                    1
                } else if 0 <= z0 && z0 < b && a <= zm1 && zm1 <= a + b {
                    -1
                } else {
                    0
                }
            }
        }
    }
}

/// A selector plus the placement `z_j += sum gamma * q_{j - delta}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CarryRule {
    pub selector: CarrySelector,
    /// `(delta, gamma)` pairs
    pub placement: Vec<(i64, i64)>,
}

impl CarryRule {
    pub fn new(selector: CarrySelector, placement: Vec<(i64, i64)>) -> Self {
        CarryRule {
            selector,
            placement,
        }
    }

    /// `sum gamma X^delta`: a carry `q` at position `i` adds `q beta^i`
    /// times this polynomial at beta to the value, so it must vanish.
    pub fn pattern_poly(&self) -> LaurentPoly {
        self.placement
            .iter()
            .fold(LaurentPoly::zero(), |acc, &(d, g)| acc.add(&LaurentPoly::monomial(g, d)))
    }

    /// Derived `(t, r)`.
    pub fn window(&self) -> (usize, usize) {
        let (tq, rq) = self.selector.window();
        let t = self
            .placement
            .iter()
            .map(|&(d, _)| tq as i64 - d)
            .chain([tq as i64])
            .max()
            .unwrap()
            .max(0);
        let r = self
            .placement
            .iter()
            .map(|&(d, _)| rq as i64 + d)
            .chain([rq as i64])
            .max()
            .unwrap()
            .max(0);
        (t as usize, r as usize)
    }

    /// Output digit for a full window of the derived size.
    fn eval_window(&self, w: &[i64], t: usize) -> i64 {
        let (tq, rq) = self.selector.window();
        let mut z = w[t];
        for &(d, g) in &self.placement {
            // selector window centred at j - delta
            let start = (t as i64 + d - tq as i64) as usize;
            z += g * self.selector.select(&w[start..start + tq + rq + 1]);
        }
        z
    }
}

/// How a rule computes its output digit.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowMap {
    Identity,
    /// Indexed in mixed radix over the input alphabet, first window digit
    /// most significant.
    Table { entries: Arc<Vec<i64>> },
    Carry {
        carry: CarryRule,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Arc<Vec<i64>>>,
    },
    /// `Psi(x) = Phi(x + h) - h`
    Shift { h: i64, inner: Arc<LocalRule> },
    /// `Phi~(x) = -Phi(-x)`
    Negate { inner: Arc<LocalRule> },
    /// `outer` applied to the output of `inner`
    Compose {
        outer: Arc<LocalRule>,
        inner: Arc<LocalRule>,
    },
}

/// A (t, r)-local conversion between two alphabets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalRule {
    name: String,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
    t: usize,
    r: usize,
    map: WindowMap,
}

fn table_index(w: &[i64], alpha: &Alphabet) -> usize {
    let size = alpha.size();
    w.iter().fold(0i64, |acc, &d| acc * size + (d - alpha.min())) as usize
}

/// Number of windows of length `p` over the alphabet, if it fits in `u64`.
pub fn window_count(alpha: &Alphabet, p: usize) -> Option<u64> {
    (alpha.size() as u64).checked_pow(p as u32)
}

/// Calls `f` on every window of length `p` over the alphabet, in table
/// order. Stops early when `f` returns `false`.
pub fn for_each_window(alpha: &Alphabet, p: usize, mut f: impl FnMut(&[i64]) -> bool) {
    let mut w = vec![alpha.min(); p];
    loop {
        if !f(&w) {
            return;
        }
        let mut i = p;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if w[i] < alpha.max() {
                w[i] += 1;
                break;
            }
            w[i] = alpha.min();
        }
    }
}

/// One contiguous piece per worker of the current pool, never tiny.
pub(crate) fn par_chunk(len: usize) -> usize {
    len.div_ceil(rayon::current_num_threads()).max(4096)
}

fn map_range(len: usize, par: bool, f: impl Fn(usize) -> i64 + Sync + Send) -> Vec<i64> {
    if par {
        (0..len).into_par_iter().with_min_len(par_chunk(len)).map(f).collect()
    } else {
        (0..len).map(f).collect()
    }
}

impl LocalRule {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input_alphabet(&self) -> Alphabet {
        self.input_alphabet
    }

    pub fn output_alphabet(&self) -> Alphabet {
        self.output_alphabet
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `(t, r)`.
    pub fn window(&self) -> (usize, usize) {
        (self.t, self.r)
    }

    /// Window length `p = t + r + 1`.
    pub fn p(&self) -> usize {
        self.t + self.r + 1
    }

    pub fn map(&self) -> &WindowMap {
        &self.map
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The identity conversion on one alphabet.
    pub fn identity(alpha: Alphabet) -> Self {
        LocalRule {
            name: "identity".into(),
            input_alphabet: alpha,
            output_alphabet: alpha,
            t: 0,
            r: 0,
            map: WindowMap::Identity,
        }
    }

    /// A rule given by an explicit table, without any value check.
    pub fn from_table(
        name: impl Into<String>,
        input_alphabet: Alphabet,
        output_alphabet: Alphabet,
        t: usize,
        r: usize,
        entries: Vec<i64>,
    ) -> Result<Self, EngineError> {
        let rule = LocalRule {
            name: name.into(),
            input_alphabet,
            output_alphabet,
            t,
            r,
            map: WindowMap::Table {
                entries: Arc::new(entries),
            },
        };
        rule.validate()?;
        Ok(rule)
    }

    /// `Phi` on one window of length `p`, digits in the input alphabet.
    pub fn eval(&self, w: &[i64]) -> i64 {
        debug_assert_eq!(w.len(), self.p());
        match &self.map {
            WindowMap::Identity => w[0],
            WindowMap::Table { entries } => entries[table_index(w, &self.input_alphabet)],
            WindowMap::Carry { carry, table } => match table {
                Some(tab) => tab[table_index(w, &self.input_alphabet)],
                None => carry.eval_window(w, self.t),
            },
            WindowMap::Shift { h, inner } => {
                let shifted: Vec<i64> = w.iter().map(|d| d + h).collect();
                inner.eval(&shifted) - h
            }
            WindowMap::Negate { inner } => {
                let neg: Vec<i64> = w.iter().map(|d| -d).collect();
                -inner.eval(&neg)
            }
            WindowMap::Compose { outer, inner } => {
                let p2 = inner.p();
                let mid: Vec<i64> = (0..outer.p()).map(|i| inner.eval(&w[i..i + p2])).collect();
                outer.eval(&mid)
            }
        }
    }

    /// `Phi(h^p)`.
    pub fn eval_constant(&self, h: i64) -> i64 {
        self.eval(&vec![h; self.p()])
    }

    /// Applies the rule to a dense least-significant-first block that is
    /// padded on both sides by `pad` forever. Output index `i` is relative
    /// exponent `i - t`; length `x.len() + t + r`.
    fn apply_dense(&self, x: &[i64], pad: i64, par: bool) -> Vec<i64> {
        let n = x.len() as i64;
        let (t, r) = (self.t as i64, self.r as i64);
        let out_len = x.len() + self.t + self.r;
        let get = |e: i64| if e < 0 || e >= n { pad } else { x[e as usize] };
        match &self.map {
            WindowMap::Identity => x.to_vec(),
            WindowMap::Shift { h, inner } => {
                let xs: Vec<i64> = x.iter().map(|d| d + h).collect();
                let mut out = inner.apply_dense(&xs, pad + h, par);
                out.iter_mut().for_each(|d| *d -= h);
                out
            }
            WindowMap::Negate { inner } => {
                let xs: Vec<i64> = x.iter().map(|d| -d).collect();
                let mut out = inner.apply_dense(&xs, -pad, par);
                out.iter_mut().for_each(|d| *d = -*d);
                out
            }
            WindowMap::Compose { outer, inner } => {
                let mid = inner.apply_dense(x, pad, par);
                let mid_pad = inner.eval_constant(pad);
                outer.apply_dense(&mid, mid_pad, par)
            }
            WindowMap::Carry { carry, .. } => {
                let (tq, rq) = carry.selector.window();
                let (tq, rq) = (tq as i64, rq as i64);
                // carries at relative exponents c in [lo, hi]
                let dmin = carry.placement.iter().map(|p| p.0).min().unwrap_or(0);
                let dmax = carry.placement.iter().map(|p| p.0).max().unwrap_or(0);
                let lo = -t - dmax;
                let hi = n - 1 + r - dmin;
                let q = map_range((hi - lo + 1) as usize, par, |i| {
                    let c = lo + i as i64;
                    let mut w = [0i64; 32];
                    let len = (tq + rq + 1) as usize;
                    let w = if len <= 32 { &mut w[..len] } else { unreachable!() };
                    for (k, slot) in w.iter_mut().enumerate() {
                        *slot = get(c + tq - k as i64);
                    }
                    carry.selector.select(w)
                });
                map_range(out_len, par, |i| {
                    let j = i as i64 - t;
                    let mut z = get(j);
                    for &(d, g) in &carry.placement {
                        z += g * q[(j - d - lo) as usize];
                    }
                    z
                })
            }
            WindowMap::Table { .. } => {
                let p = self.p();
                map_range(out_len, par, |i| {
                    let j = i as i64 - t;
                    let w: Vec<i64> = (0..p as i64).map(|k| get(j + t - k)).collect();
                    self.eval(&w)
                })
            }
        }
    }

    /// Dense application without alphabet checks; see `apply_dense`.
    pub(crate) fn apply_lsd_first(&self, x: &[i64], par: bool) -> Vec<i64> {
        self.apply_dense(x, 0, par)
    }

    fn check_input(&self, ds: &DigitString) -> Result<(), EngineError> {
        for (i, &d) in ds.digits.iter().enumerate() {
            if !self.input_alphabet.contains(d) {
                return Err(EngineError::DigitOutOfAlphabet {
                    digit: d,
                    exponent: ds.lsd_exponent + (ds.digits.len() - 1 - i) as i64,
                    alphabet: self.input_alphabet,
                });
            }
        }
        Ok(())
    }

    fn apply_impl(&self, ds: &DigitString, par: bool) -> Result<DigitString, EngineError> {
        self.check_input(ds)?;
        if ds.is_empty() {
            return Ok(DigitString::zero());
        }
        let x = ds.to_lsd_first();
        let out = self.apply_dense(&x, 0, par);
        Ok(DigitString::from_lsd_first(ds.lsd_exponent - self.t as i64, out).normalize())
    }

    /// `v_j = Phi(u_{j+t} ... u_{j-r})` for every `j`.
    pub fn apply(&self, ds: &DigitString) -> Result<DigitString, EngineError> {
        self.apply_impl(ds, false)
    }

    /// Same result as [`LocalRule::apply`], positions evaluated on the
    /// current rayon pool.
    pub fn apply_parallel(&self, ds: &DigitString) -> Result<DigitString, EngineError> {
        self.apply_impl(ds, true)
    }

    /// Carries `q_j` the rule would place on `ds`, as `(exponent, q)` pairs
    /// with `q != 0`. `None` for rules without carry structure.
    pub fn carries(&self, ds: &DigitString) -> Option<Vec<(i64, i64)>> {
        let x = ds.to_lsd_first();
        let (lo, q) = self.carries_dense(&x, 0)?;
        let mut out: Vec<(i64, i64)> = q
            .into_iter()
            .enumerate()
            .filter(|(_, q)| *q != 0)
            .map(|(i, q)| (ds.lsd_exponent + lo + i as i64, q))
            .collect();
        out.sort_by_key(|c| std::cmp::Reverse(c.0));
        Some(out)
    }

    fn carries_dense(&self, x: &[i64], pad: i64) -> Option<(i64, Vec<i64>)> {
        match &self.map {
            WindowMap::Carry { carry, .. } => {
                let n = x.len() as i64;
                let (tq, rq) = carry.selector.window();
                let (tq, rq) = (tq as i64, rq as i64);
                let get = |e: i64| if e < 0 || e >= n { pad } else { x[e as usize] };
                let lo = -tq;
                let hi = n - 1 + rq;
                let q = (lo..=hi)
                    .map(|c| {
                        let w: Vec<i64> = (0..=(tq + rq)).map(|k| get(c + tq - k)).collect();
                        carry.selector.select(&w)
                    })
                    .collect();
                Some((lo, q))
            }
            WindowMap::Shift { h, inner } => {
                let xs: Vec<i64> = x.iter().map(|d| d + h).collect();
                inner.carries_dense(&xs, pad + h)
            }
            WindowMap::Negate { inner } => {
                let xs: Vec<i64> = x.iter().map(|d| -d).collect();
                let (lo, q) = inner.carries_dense(&xs, -pad)?;
                Some((lo, q.into_iter().map(|v| -v).collect()))
            }
            _ => None,
        }
    }

    /// Evaluates every window into a table when small enough.
    pub fn materialize(&self) -> Option<LocalRule> {
        let count = window_count(&self.input_alphabet, self.p())?;
        if count > TABLE_LIMIT {
            return None;
        }
        let mut entries = Vec::with_capacity(count as usize);
        for_each_window(&self.input_alphabet, self.p(), |w| {
            entries.push(self.eval(w));
            true
        });
        Some(LocalRule {
            name: self.name.clone(),
            input_alphabet: self.input_alphabet,
            output_alphabet: self.output_alphabet,
            t: self.t,
            r: self.r,
            map: WindowMap::Table {
                entries: Arc::new(entries),
            },
        })
    }

    pub fn has_table(&self) -> bool {
        matches!(
            self.map,
            WindowMap::Table { .. } | WindowMap::Carry { table: Some(_), .. }
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rules serialize")
    }

    /// Parses and structurally validates a rule. Value preservation is not
    /// checked here; that is the oracle's job.
    pub fn from_json(text: &str) -> Result<LocalRule, EngineError> {
        let rule: LocalRule =
            serde_json::from_str(text).map_err(|e| EngineError::InvalidRule(e.to_string()))?;
        rule.validate()?;
        Ok(rule)
    }

    fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidRule(m));
        let p = self.p();
        let check_table = |entries: &Vec<i64>| -> Result<(), EngineError> {
            let expected = window_count(&self.input_alphabet, p);
            if expected != Some(entries.len() as u64) {
                return Err(EngineError::InvalidRule(format!(
                    "table has {} entries, expected {:?}",
                    entries.len(),
                    expected
                )));
            }
            Ok(())
        };
        match &self.map {
            WindowMap::Identity => {
                if p != 1 || self.input_alphabet != self.output_alphabet {
                    return bad("identity must be 1-local on one alphabet".into());
                }
            }
            WindowMap::Table { entries } => check_table(entries)?,
            WindowMap::Carry { carry, table } => {
                if carry.window() != (self.t, self.r) {
                    return bad(format!(
                        "carry rule derives window {:?}, file says {:?}",
                        carry.window(),
                        (self.t, self.r)
                    ));
                }
                if let Some(tab) = table {
                    check_table(tab)?;
                    let mut mismatch = None;
                    for_each_window(&self.input_alphabet, p, |w| {
                        if tab[table_index(w, &self.input_alphabet)] != carry.eval_window(w, self.t) {
                            mismatch = Some(w.to_vec());
                            return false;
                        }
                        true
                    });
                    if let Some(w) = mismatch {
                        return bad(format!("table disagrees with carry rule at window {w:?}"));
                    }
                }
            }
            WindowMap::Shift { h, inner } => {
                inner.validate()?;
                if inner.window() != self.window() || inner.eval_constant(*h) != *h {
                    return bad("shift wrapper inconsistent with inner rule".into());
                }
            }
            WindowMap::Negate { inner } => {
                inner.validate()?;
                if inner.window() != self.window() {
                    return bad("negate wrapper window differs from inner rule".into());
                }
            }
            WindowMap::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
                if (self.t, self.r) != (outer.t + inner.t, outer.r + inner.r) {
                    return bad("composite window is not the sum of the parts".into());
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for LocalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} -> {}, (t, r) = ({}, {})",
            self.name, self.input_alphabet, self.output_alphabet, self.t, self.r
        )
    }
}

/// Builds the rule of a carry pattern and checks it: the pattern must vanish
/// at beta, the zero window must map to 0, and every window over the input
/// alphabet must land in the output alphabet (all windows when there are at
/// most `budget`, otherwise a fixed-seed random sample).
pub fn derive_local_rule_with_budget(
    cr: CarryRule,
    base: &BaseSpec,
    in_alpha: Alphabet,
    out_alpha: Alphabet,
    budget: u64,
) -> Result<LocalRule, EngineError> {
    let pattern = cr.pattern_poly();
    if !poly_vanishes(&pattern, base) {
        return Err(EngineError::ValuePatternNotMultiple {
            pattern: pattern.to_string(),
            base: base.mnemonic(),
        });
    }
    let (tq, rq) = cr.selector.window();
    if cr.selector.select(&vec![0; tq + rq + 1]) != 0 {
        return Err(EngineError::ZeroWindowNotZero);
    }
    let (t, r) = cr.window();
    let p = t + r + 1;
    let check = |w: &[i64]| -> Result<i64, EngineError> {
        let v = cr.eval_window(w, t);
        if out_alpha.contains(v) {
            Ok(v)
        } else {
            Err(EngineError::OutputEscapesAlphabet {
                window: w.to_vec(),
                output: v,
                alphabet: out_alpha,
            })
        }
    };
    let count = window_count(&in_alpha, p);
    let mut table = None;
    match count {
        Some(c) if c <= budget => {
            let mut err = None;
            let mut entries = Vec::new();
            let keep = c <= TABLE_LIMIT;
            for_each_window(&in_alpha, p, |w| match check(w) {
                Ok(v) => {
                    if keep {
                        entries.push(v);
                    }
                    true
                }
                Err(e) => {
                    err = Some(e);
                    false
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            if keep {
                table = Some(Arc::new(entries));
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let mut w = vec![0i64; p];
            for _ in 0..CLOSURE_SAMPLES {
                for d in w.iter_mut() {
                    *d = rng.gen_range(in_alpha.min()..=in_alpha.max());
                }
                check(&w)?;
            }
        }
    }
    if cr.eval_window(&vec![0; p], t) != 0 {
        return Err(EngineError::ZeroWindowNotZero);
    }
    let rule = LocalRule {
        name: format!("{:?}", cr.selector),
        input_alphabet: in_alpha,
        output_alphabet: out_alpha,
        t,
        r,
        map: WindowMap::Carry { carry: cr, table },
    };
    Ok(rule)
}

pub fn derive_local_rule(
    cr: CarryRule,
    base: &BaseSpec,
    in_alpha: Alphabet,
    out_alpha: Alphabet,
) -> Result<LocalRule, EngineError> {
    derive_local_rule_with_budget(cr, base, in_alpha, out_alpha, DEFAULT_ENUMERATION_BUDGET)
}

/// `outer` after `inner`, with `t = t1 + t2` and `r = r1 + r2`.
pub fn compose(outer: &LocalRule, inner: &LocalRule) -> Result<LocalRule, EngineError> {
    if !inner.output_alphabet.is_subset_of(&outer.input_alphabet) {
        return Err(EngineError::AlphabetMismatch {
            inner: inner.output_alphabet,
            outer: outer.input_alphabet,
        });
    }
    Ok(LocalRule {
        name: format!("{} . {}", outer.name, inner.name),
        input_alphabet: inner.input_alphabet,
        output_alphabet: outer.output_alphabet,
        t: outer.t + inner.t,
        r: outer.r + inner.r,
        map: WindowMap::Compose {
            outer: Arc::new(outer.clone()),
            inner: Arc::new(inner.clone()),
        },
    })
}

/// `{h in input alphabet : Phi(h^p) = h}`.
pub fn fixed_letters(rule: &LocalRule) -> Vec<i64> {
    rule.input_alphabet
        .digits()
        .filter(|&h| rule.eval_constant(h) == h)
        .collect()
}

/// Transports the rule to the alphabets shifted by `-h`.
pub fn shift_alphabet(rule: &LocalRule, h: i64) -> Result<LocalRule, EngineError> {
    if !rule.input_alphabet.contains(h) || rule.eval_constant(h) != h {
        return Err(EngineError::LetterNotFixed { h });
    }
    if h == 0 {
        return Ok(rule.clone());
    }
    let shift = |a: Alphabet| a.shifted(h).map_err(|_| EngineError::LetterNotFixed { h });
    Ok(LocalRule {
        name: format!("shift({}, {h})", rule.name),
        input_alphabet: shift(rule.input_alphabet)?,
        output_alphabet: shift(rule.output_alphabet)?,
        t: rule.t,
        r: rule.r,
        map: WindowMap::Shift {
            h,
            inner: Arc::new(rule.clone()),
        },
    })
}

/// The same conversion between the negated alphabets.
pub fn negate_rule(rule: &LocalRule) -> LocalRule {
    if let WindowMap::Negate { inner } = &rule.map {
        return (**inner).clone();
    }
    LocalRule {
        name: format!("negate({})", rule.name),
        input_alphabet: rule.input_alphabet.negated(),
        output_alphabet: rule.output_alphabet.negated(),
        t: rule.t,
        r: rule.r,
        map: WindowMap::Negate {
            inner: Arc::new(rule.clone()),
        },
    }
}

/// The negation wrapper itself, even when `rule` is already a negation.
/// Used to check that double negation is the identity window by window.
pub fn negate_rule_wrapped(rule: &LocalRule) -> LocalRule {
    LocalRule {
        name: format!("negate({})", rule.name),
        input_alphabet: rule.input_alphabet.negated(),
        output_alphabet: rule.output_alphabet.negated(),
        t: rule.t,
        r: rule.r,
        map: WindowMap::Negate {
            inner: Arc::new(rule.clone()),
        },
    }
}

/// Two rules agree on every window over `alpha`.
pub fn same_window_map(a: &LocalRule, b: &LocalRule, alpha: &Alphabet) -> bool {
    if a.window() != b.window() {
        return false;
    }
    let mut same = true;
    for_each_window(alpha, a.p(), |w| {
        same = a.eval(w) == b.eval(w);
        same
    });
    same
}
