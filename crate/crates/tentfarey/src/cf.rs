//! Continued fractions and their bridge to the binary coding of the Farey
//! map.
//!
//! A point of `[0, 1]` with continued fraction `[0; a₁, a₂, …]` has Farey
//! itinerary obtained by spelling each entry `a` as `a − 1` zeros followed by
//! a single one; a finite expansion (a rational point) is padded with zeros
//! forever once the orbit reaches the fixed point at the origin.  The module
//! provides
//!
//! * [`ContinuedFraction`] — finite, eventually periodic, and rule-generated
//!   expansions under one interface, with parsing and exact values;
//! * [`ConvergentTable`] — the classical `p/q` recurrence with the standard
//!   seed rows at indices `−1` and `0`;
//! * [`DigitStream`] and [`CodingWalk`] — the digit spelling and an
//!   incremental walk that carries the bookkeeping `(m, k, r)` of ones seen,
//!   last-one position, and trailing-zero run, together with the closed-form
//!   branch matrix assembled from convergents (see
//!   [`CodingWalk::branch_matrix`]);
//! * witness expansions with designed block structure, summability
//!   diagnostics, and the score [`s_score`] used by the convergence
//!   dichotomy at rational observation points.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{capacity, invalid, Error, Result};
use crate::mobius::Mobius;
use crate::num_util::{log_add_exp, ratio_to_f64};
use crate::surd::{ExactPoint, Surd};

/// Hard cap on the bit length of a materialized entry; rules with faster
/// growth must be consumed through logarithms.
const MAX_ENTRY_BITS: u64 = 1 << 22;

/// Safety cap for period detection in surd expansions and orbit walks.
const MAX_DETECTION_STEPS: u64 = 100_000;

/// An infinite-capable continued fraction `[0; a₁, a₂, …]` of a point in
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContinuedFraction {
    /// A finite expansion (a rational point); the empty list is `0`, and the
    /// canonical form ends in an entry `≥ 2` except for `[0; 1] = 1`.
    Finite(Vec<BigInt>),
    /// An eventually periodic expansion (a quadratic irrational).
    Periodic {
        /// Entries before the cycle starts.
        pre: Vec<BigInt>,
        /// The repeating block (nonempty).
        cycle: Vec<BigInt>,
    },
    /// Entries generated by a closed-form rule.
    Rule(EntryRule),
}

/// Closed-form entry generators for structured infinite expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryRule {
    /// `aᵢ = start + (i − 1)·step`.
    Increasing {
        /// First entry.
        start: u64,
        /// Common difference.
        step: u64,
    },
    /// Blocks of `2m` ones, each followed by a single `2` (`m = 1, 2, …`);
    /// the `2`s sit at the positions `m(m + 2)`.
    OnesBlocksLinear,
    /// Blocks of `2^m` ones, each followed by a single `2` (`m = 1, 2, …`);
    /// the `2`s sit at the positions `2^(m+1) + m − 2`.
    OnesBlocksGeometric,
    /// `aᵢ = 2^(2^i)`: doubly exponential growth, materializable only for
    /// small `i`.
    DoublyExponential,
}

impl EntryRule {
    /// The `i`-th entry (1-based).
    ///
    /// # Errors
    ///
    /// Fails with a capacity error when the entry is too large to
    /// materialize; use [`EntryRule::log_entry`] instead in that regime.
    pub fn entry(&self, i: u64) -> Result<BigInt> {
        assert!(i >= 1, "entries are 1-based");
        match self {
            EntryRule::Increasing { start, step } => {
                Ok(BigInt::from(*start) + BigInt::from(*step) * BigInt::from(i - 1))
            }
            EntryRule::OnesBlocksLinear | EntryRule::OnesBlocksGeometric => {
                Ok(BigInt::from(if self.is_marker_position(i) { 2u8 } else { 1 }))
            }
            EntryRule::DoublyExponential => {
                if i >= 64 || (1u64 << i) > MAX_ENTRY_BITS {
                    return Err(capacity(format!(
                        "entry 2^(2^{i}) exceeds {MAX_ENTRY_BITS} bits"
                    )));
                }
                Ok(BigInt::one() << (1u64 << i))
            }
        }
    }

    /// Natural log of the `i`-th entry, available for every index.
    #[must_use]
    pub fn log_entry(&self, i: u64) -> f64 {
        match self {
            EntryRule::Increasing { start, step } => {
                (*start as f64 + *step as f64 * (i - 1) as f64).ln()
            }
            EntryRule::OnesBlocksLinear | EntryRule::OnesBlocksGeometric => {
                if self.is_marker_position(i) {
                    2f64.ln()
                } else {
                    0.0
                }
            }
            EntryRule::DoublyExponential => (i as f64).exp2() * std::f64::consts::LN_2,
        }
    }

    /// Whether position `i` carries a block-terminating `2`.
    fn is_marker_position(&self, i: u64) -> bool {
        match self {
            EntryRule::OnesBlocksLinear => {
                // i = m(m + 2) ⟺ i + 1 = (m + 1)² for some m ≥ 1.
                let s = (i + 1).isqrt();
                s >= 2 && s * s == i + 1
            }
            EntryRule::OnesBlocksGeometric => {
                // Marker positions 2^(m+1) + m − 2 for m ≥ 1; walk the blocks.
                let mut pos = 0u64;
                let mut m = 1u64;
                while pos < i {
                    pos += (1u64 << m) + 1;
                    if pos == i {
                        return true;
                    }
                    m += 1;
                }
                false
            }
            _ => false,
        }
    }

    /// Largest entry when the rule is bounded.
    #[must_use]
    pub fn entry_bound(&self) -> Option<BigInt> {
        match self {
            EntryRule::Increasing { start, step: 0 } => Some(BigInt::from(*start)),
            EntryRule::OnesBlocksLinear | EntryRule::OnesBlocksGeometric => Some(BigInt::from(2)),
            _ => None,
        }
    }
}

impl ContinuedFraction {
    /// The expansion of an exactly represented point: Euclidean division for
    /// rationals, the exact Gauss map with period detection for surds.
    ///
    /// # Errors
    ///
    /// Fails with a capacity error if no period is found within the safety
    /// cap (not reachable for genuine quadratic irrationals of moderate
    /// height).
    pub fn expansion_of(point: &ExactPoint) -> Result<Self> {
        match point {
            ExactPoint::Rational(x) => Ok(ContinuedFraction::Finite(rational_entries(x))),
            ExactPoint::Quadratic(s) => {
                // Iterate x ↦ 1/x − ⌊1/x⌋ exactly; the complete quotients of
                // a quadratic irrational repeat, and the first repeat closes
                // the cycle.
                let mut seen: HashMap<Surd, usize> = HashMap::new();
                let mut entries: Vec<BigInt> = Vec::new();
                let mut x = s.clone();
                for _ in 0..MAX_DETECTION_STEPS {
                    if let Some(&start) = seen.get(&x) {
                        let cycle = entries.split_off(start);
                        return Ok(ContinuedFraction::Periodic { pre: entries, cycle });
                    }
                    seen.insert(x.clone(), entries.len());
                    let inv = x.inv();
                    let a = inv.floor();
                    entries.push(a.clone());
                    x = inv.sub(&Surd::from_rational(&BigRational::from(a)));
                }
                Err(capacity("no period within the detection cap"))
            }
        }
    }

    /// The `i`-th entry (1-based); `None` beyond the end of a finite
    /// expansion.
    ///
    /// # Errors
    ///
    /// Propagates the capacity limit of rule-generated entries.
    pub fn entry(&self, i: u64) -> Result<Option<BigInt>> {
        assert!(i >= 1, "entries are 1-based");
        match self {
            ContinuedFraction::Finite(v) => {
                Ok(usize::try_from(i - 1).ok().and_then(|k| v.get(k).cloned()))
            }
            ContinuedFraction::Periodic { pre, cycle } => {
                let idx = i - 1;
                let v = if idx < pre.len() as u64 {
                    pre[idx as usize].clone()
                } else {
                    cycle[((idx - pre.len() as u64) % cycle.len() as u64) as usize].clone()
                };
                Ok(Some(v))
            }
            ContinuedFraction::Rule(rule) => rule.entry(i).map(Some),
        }
    }

    /// The first `n` entries.
    ///
    /// # Errors
    ///
    /// Propagates entry capacity limits; finite expansions simply stop early.
    pub fn entries_prefix(&self, n: u64) -> Result<Vec<BigInt>> {
        let mut out = Vec::new();
        for i in 1..=n {
            match self.entry(i)? {
                Some(a) => out.push(a),
                None => break,
            }
        }
        Ok(out)
    }

    /// True when every entry is 1 or the expansion is empty — the values `0`,
    /// `1`, and the golden-ratio conjugate.
    #[must_use]
    pub fn is_all_ones(&self) -> bool {
        match self {
            ContinuedFraction::Finite(v) => v.iter().all(|a| a.is_one()),
            ContinuedFraction::Periodic { pre, cycle } => {
                pre.iter().chain(cycle).all(|a| a.is_one())
            }
            ContinuedFraction::Rule(_) => false,
        }
    }

    /// The exact value, available for finite and periodic expansions.
    ///
    /// # Errors
    ///
    /// Rule-generated expansions have no closed-form value
    /// ([`Error::Unsupported`]); periodic expansions whose cycle discriminant
    /// has a square-free part beyond `u64` hit a capacity limit.
    pub fn value_exact(&self) -> Result<ExactPoint> {
        match self {
            ContinuedFraction::Finite(v) => {
                let mut t = ConvergentTable::new();
                for a in v {
                    t.push(a.clone());
                }
                let n = v.len() as i64;
                ExactPoint::quadratic(Surd::from_rational(&BigRational::new(
                    t.p(n).clone(),
                    t.q(n).clone(),
                )))
            }
            ContinuedFraction::Periodic { pre, cycle } => {
                // The purely periodic tail y is fixed by its cycle matrix
                // (A B; C D): C·y² + (D − A)·y − B = 0, positive root.
                let mut m_cycle = ConvergentTable::new();
                for a in cycle {
                    m_cycle.push(a.clone());
                }
                let k = cycle.len() as i64;
                let (a, b) = (m_cycle.p(k - 1).clone(), m_cycle.p(k).clone());
                let (c, d) = (m_cycle.q(k - 1).clone(), m_cycle.q(k).clone());
                let disc = (&d - &a) * (&d - &a) + BigInt::from(4) * &b * &c;
                let (scale, radicand) = extract_square_part(&disc)?;
                // A square discriminant would mean a rational value, which a
                // genuinely periodic expansion cannot have; fold it anyway
                // rather than hand `Surd` a zero radicand with b ≠ 0.
                let y = if radicand == 0 {
                    Surd::new(&a - &d + scale, BigInt::zero(), BigInt::from(2) * &c, 0)
                } else {
                    Surd::new(&a - &d, scale, BigInt::from(2) * &c, radicand)
                };
                let mut m_pre = ConvergentTable::new();
                for e in pre {
                    m_pre.push(e.clone());
                }
                let j = pre.len() as i64;
                let pre_mat = Mobius::Big {
                    a: m_pre.p(j - 1).clone(),
                    b: m_pre.p(j).clone(),
                    c: m_pre.q(j - 1).clone(),
                    d: m_pre.q(j).clone(),
                };
                Ok(pre_mat.eval_exact(&ExactPoint::quadratic(y)?))
            }
            ContinuedFraction::Rule(_) => Err(Error::Unsupported(
                "rule-generated expansions have no closed-form value".into(),
            )),
        }
    }

    /// The value approximated through the convergent of the given depth.
    ///
    /// # Errors
    ///
    /// Propagates entry capacity limits.
    pub fn value_f64(&self, depth: u64) -> Result<f64> {
        let mut t = ConvergentTable::new();
        for a in self.entries_prefix(depth)? {
            t.push(a);
        }
        let n = t.len() as i64;
        Ok(ratio_to_f64(t.p(n), t.q(n)))
    }

    /// One step of the Farey map performed on the expansion itself: the
    /// leading entry is decremented, and a leading `1` is consumed by
    /// shifting.
    ///
    /// # Errors
    ///
    /// Unsupported for rule-generated expansions; invalid on the empty
    /// expansion (the origin is fixed and stays `[0;]`) — the caller gets
    /// `[0;]` back rather than an error, mirroring the map.
    pub fn farey_shift(&self) -> Result<ContinuedFraction> {
        let shift_list = |v: &[BigInt]| -> Vec<BigInt> {
            match v.split_first() {
                None => Vec::new(),
                Some((a, rest)) if a.is_one() => rest.to_vec(),
                Some((a, rest)) => {
                    let mut out = Vec::with_capacity(v.len());
                    out.push(a - BigInt::one());
                    out.extend_from_slice(rest);
                    out
                }
            }
        };
        match self {
            ContinuedFraction::Finite(v) => Ok(ContinuedFraction::Finite(shift_list(v))),
            ContinuedFraction::Periodic { pre, cycle } => {
                // Unroll one cycle turn when the pre-period is empty so the
                // leading entry is exposed for the shift.
                let head = if pre.is_empty() { shift_list(cycle) } else { shift_list(pre) };
                Ok(ContinuedFraction::Periodic { pre: head, cycle: cycle.clone() })
            }
            ContinuedFraction::Rule(_) => Err(Error::Unsupported(
                "cannot shift a rule-generated expansion in place".into(),
            )),
        }
    }

    /// Parses the textual forms accepted across the command-line surface:
    ///
    /// * `2/5`, `0.375`, `1` — rationals (expanded via Euclid);
    /// * `sqrt2-1`, `sqrt5-1/2` — `(√D ± a)/m`, expanded exactly;
    /// * `[0;2,2]`, `[0;1,(2,3)]`, `[0;(2)]` — explicit entries, with a
    ///   trailing parenthesized cycle;
    /// * `arith:start,step`, `ones-blocks-linear`, `ones-blocks-geometric`,
    ///   `doubly-exponential` — entry rules.
    ///
    /// # Errors
    ///
    /// Rejects malformed syntax, zero denominators, values outside `[0, 1]`,
    /// and square radicands.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(invalid("empty point specification"));
        }
        if let Some(rest) = s.strip_prefix("arith:") {
            let (start, step) = rest
                .split_once(',')
                .ok_or_else(|| invalid(format!("expected arith:start,step, got {s:?}")))?;
            let start: u64 = start.trim().parse().map_err(|_| invalid("bad arith start"))?;
            let step: u64 = step.trim().parse().map_err(|_| invalid("bad arith step"))?;
            if start == 0 {
                return Err(invalid("entries must be positive"));
            }
            return Ok(ContinuedFraction::Rule(EntryRule::Increasing { start, step }));
        }
        match s {
            "ones-blocks-linear" => return Ok(ContinuedFraction::Rule(EntryRule::OnesBlocksLinear)),
            "ones-blocks-geometric" => {
                return Ok(ContinuedFraction::Rule(EntryRule::OnesBlocksGeometric))
            }
            "doubly-exponential" => {
                return Ok(ContinuedFraction::Rule(EntryRule::DoublyExponential))
            }
            _ => {}
        }
        if s.starts_with('[') {
            return parse_bracket_form(s);
        }
        ContinuedFraction::expansion_of(&parse_exact_value(s)?)
    }
}

/// Parses a point given as a rational, decimal, or quadratic-surd literal.
///
/// # Errors
///
/// Rejects malformed numbers and values outside the unit interval.
pub fn parse_exact_value(s: &str) -> Result<ExactPoint> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("sqrt") {
        // sqrtD[±a][/m] ⇒ (√D ± a)/m.
        let split_at = rest.find(['+', '-']);
        let (d_str, tail) = match split_at {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        let d: u64 = d_str.parse().map_err(|_| invalid(format!("bad radicand in {s:?}")))?;
        let (offset_str, den_str) = match tail.split_once('/') {
            Some((o, m)) => (o, Some(m)),
            None => (tail, None),
        };
        let offset: i64 = if offset_str.is_empty() {
            0
        } else {
            offset_str.parse().map_err(|_| invalid(format!("bad offset in {s:?}")))?
        };
        let den: i64 = match den_str {
            Some(m) => m.parse().map_err(|_| invalid(format!("bad denominator in {s:?}")))?,
            None => 1,
        };
        if den == 0 {
            return Err(invalid("zero denominator"));
        }
        if d == 0 || d.isqrt().pow(2) == d {
            return Err(invalid(format!("radicand {d} is a perfect square; write the rational")));
        }
        return ExactPoint::quadratic(Surd::new(
            BigInt::from(offset),
            BigInt::one(),
            BigInt::from(den),
            d,
        ));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| invalid(format!("bad numerator in {s:?}")))?;
        let q: i64 = q.trim().parse().map_err(|_| invalid(format!("bad denominator in {s:?}")))?;
        return ExactPoint::rational(p, q);
    }
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return Err(invalid(format!("bad decimal {s:?}")));
        }
        let int: i64 = int.parse().map_err(|_| invalid(format!("bad decimal {s:?}")))?;
        let num: BigInt = frac.parse::<BigInt>().expect("digits parse");
        let den = BigInt::from(10u8).pow(frac.len() as u32);
        let r = BigRational::from(BigInt::from(int)) + BigRational::new(num, den);
        if r < BigRational::zero() || r > BigRational::one() {
            return Err(invalid(format!("{s} lies outside [0, 1]")));
        }
        return Ok(ExactPoint::Rational(r));
    }
    let n: i64 = s.parse().map_err(|_| invalid(format!("unrecognized point {s:?}")))?;
    ExactPoint::rational(n, 1)
}

fn parse_bracket_form(s: &str) -> Result<ContinuedFraction> {
    let inner = s
        .strip_prefix("[0;")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| invalid(format!("expected [0;…], got {s:?}")))?;
    let inner = inner.trim();
    let parse_list = |t: &str| -> Result<Vec<BigInt>> {
        if t.trim().is_empty() {
            return Ok(Vec::new());
        }
        t.split(',')
            .map(|e| {
                let a: BigInt =
                    e.trim().parse().map_err(|_| invalid(format!("bad entry {:?}", e.trim())))?;
                if a < BigInt::one() {
                    return Err(invalid("entries must be positive"));
                }
                Ok(a)
            })
            .collect()
    };
    match inner.find('(') {
        None => Ok(ContinuedFraction::Finite(parse_list(inner)?)),
        Some(open) => {
            let cycle_part = inner[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| invalid("unclosed cycle parenthesis"))?;
            let pre_part = inner[..open].trim_end_matches(',');
            let pre = parse_list(pre_part)?;
            let cycle = parse_list(cycle_part)?;
            if cycle.is_empty() {
                return Err(invalid("empty cycle"));
            }
            Ok(ContinuedFraction::Periodic { pre, cycle })
        }
    }
}

fn rational_entries(x: &BigRational) -> Vec<BigInt> {
    // [0; a₁, …, aₙ] with aₙ ≥ 2 (except [0;1] = 1): plain Euclid on
    // (denominator, numerator).
    let mut entries = Vec::new();
    let mut num = x.denom().clone();
    let mut den = x.numer().clone();
    while !den.is_zero() {
        let (q, r) = num.div_rem(&den);
        entries.push(q);
        num = den;
        den = r;
    }
    // The loop yields the expansion of 1/x shifted into ours; for x in (0,1]
    // the first quotient is a₁ already.  x = 0 gives an empty list.
    if let Some(last) = entries.last() {
        if last.is_one() && entries.len() > 1 {
            entries.pop();
            if let Some(tail) = entries.last_mut() {
                *tail += BigInt::one();
            }
        }
    }
    entries
}

/// Splits `n ≥ 0` as `s²·d` with `d` square-free (over small primes) and
/// returns `(s, d)`.
///
/// # Errors
///
/// Capacity error when the square-free part does not fit the surd radicand.
fn extract_square_part(n: &BigInt) -> Result<(BigInt, u64)> {
    assert!(!n.is_negative(), "discriminants of real quadratics are positive");
    let mut s = BigInt::one();
    let mut d = n.clone();
    // Remove small square factors; large squares would only appear through
    // deliberately adversarial cycles.
    for p in 2u64..1000 {
        let p2 = BigInt::from(p) * BigInt::from(p);
        while (&d % &p2).is_zero() {
            d /= &p2;
            s *= BigInt::from(p);
        }
        if d < p2 {
            break;
        }
    }
    let root = d.sqrt();
    if (&root * &root) == d {
        return Ok((s * root, 0));
    }
    match d.to_u64() {
        Some(d) => Ok((s, d)),
        None => Err(capacity("cycle discriminant exceeds the supported radicand range")),
    }
}

/// The convergent recurrence `pₙ = aₙpₙ₋₁ + pₙ₋₂`, `qₙ = aₙqₙ₋₁ + qₙ₋₂` with
/// seeds `(p₋₁, q₋₁) = (1, 0)` and `(p₀, q₀) = (0, 1)`.
#[derive(Debug, Clone, Default)]
pub struct ConvergentTable {
    // Index i holds the convergent of order i − 1, so orders −1 and 0 are the
    // seed rows.
    p: Vec<BigInt>,
    q: Vec<BigInt>,
}

impl ConvergentTable {
    /// A table holding only the seed rows.
    #[must_use]
    pub fn new() -> Self {
        ConvergentTable {
            p: vec![BigInt::one(), BigInt::zero()],
            q: vec![BigInt::zero(), BigInt::one()],
        }
    }

    /// Number of entries consumed so far.
    #[must_use]
    pub fn len(&self) -> u64 {
        (self.p.len() - 2) as u64
    }

    /// True before any entry has been pushed.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends the next entry and extends both recurrences.
    pub fn push(&mut self, a: BigInt) {
        let n = self.p.len();
        let p = &a * &self.p[n - 1] + &self.p[n - 2];
        let q = &a * &self.q[n - 1] + &self.q[n - 2];
        self.p.push(p);
        self.q.push(q);
    }

    /// Numerator of the convergent of order `n ≥ −1`.
    ///
    /// # Panics
    ///
    /// Panics if the table has consumed fewer than `n` entries.
    #[must_use]
    pub fn p(&self, n: i64) -> &BigInt {
        &self.p[usize::try_from(n + 1).expect("order ≥ −1")]
    }

    /// Denominator of the convergent of order `n ≥ −1`.
    ///
    /// # Panics
    ///
    /// Panics if the table has consumed fewer than `n` entries.
    #[must_use]
    pub fn q(&self, n: i64) -> &BigInt {
        &self.q[usize::try_from(n + 1).expect("order ≥ −1")]
    }

    /// The alternating two-by-two identity `pₙ₋₁qₙ − pₙqₙ₋₁ = (−1)ⁿ`,
    /// returned as the exact left-hand side for order `n`.
    #[must_use]
    pub fn cross_determinant(&self, n: i64) -> BigInt {
        self.p(n - 1) * self.q(n) - self.p(n) * self.q(n - 1)
    }
}

/// Bookkeeping of a binary itinerary prefix: after `n` digits, `m` ones have
/// appeared, the last at position `k` (`0` when none yet), leaving a run of
/// `r = n − k` trailing zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bookkeeping {
    /// Digits consumed.
    pub n: u64,
    /// Ones consumed.
    pub m: u64,
    /// Position of the last one (`0` when none).
    pub k: u64,
    /// Trailing-zero run length `n − k`.
    pub r: u64,
}

/// The digit spelling of a continued fraction: entry `a` becomes `a − 1`
/// zeros followed by a one; a finite expansion is padded with zeros forever.
#[derive(Debug, Clone)]
pub struct DigitStream {
    cf: ContinuedFraction,
    next_entry: u64,
    state: StreamState,
}

#[derive(Debug, Clone)]
enum StreamState {
    Zeros(BigInt),
    One,
    Exhausted,
}

impl DigitStream {
    /// Starts the spelling of the given expansion.
    ///
    /// # Errors
    ///
    /// Propagates entry capacity limits.
    pub fn new(cf: &ContinuedFraction) -> Result<Self> {
        let mut s = DigitStream {
            cf: cf.clone(),
            next_entry: 1,
            state: StreamState::Exhausted,
        };
        s.load_next_entry()?;
        Ok(s)
    }

    fn load_next_entry(&mut self) -> Result<()> {
        self.state = match self.cf.entry(self.next_entry)? {
            Some(a) => StreamState::Zeros(a - BigInt::one()),
            None => StreamState::Exhausted,
        };
        self.next_entry += 1;
        Ok(())
    }

    /// The next digit (never ends; zeros forever past a finite expansion).
    ///
    /// # Errors
    ///
    /// Propagates entry capacity limits.
    pub fn next_digit(&mut self) -> Result<u8> {
        match &mut self.state {
            StreamState::Zeros(z) if z.is_zero() => {
                self.state = StreamState::One;
                self.next_digit()
            }
            StreamState::Zeros(z) => {
                *z -= 1u8;
                Ok(0)
            }
            StreamState::One => {
                self.load_next_entry()?;
                Ok(1)
            }
            StreamState::Exhausted => Ok(0),
        }
    }

    /// The first `n` digits as a word.
    ///
    /// # Errors
    ///
    /// Propagates entry capacity limits.
    pub fn take_word(&mut self, n: u64) -> Result<Vec<u8>> {
        (0..n).map(|_| self.next_digit()).collect()
    }
}

/// An incremental walk along the digit spelling that maintains the
/// bookkeeping `(m, k, r)` and the convergents of the entries completed so
/// far, giving the closed-form branch matrix at every prefix length without
/// multiplying letter matrices.
#[derive(Debug, Clone)]
pub struct CodingWalk {
    cf: ContinuedFraction,
    table: ConvergentTable,
    book: Bookkeeping,
    pending: PendingEntry,
}

#[derive(Debug, Clone)]
enum PendingEntry {
    /// Zeros still to emit before this entry's closing one.
    Within { entry: BigInt, zeros_left: BigInt },
    /// Finite expansion exhausted: zeros forever.
    Exhausted,
}

impl CodingWalk {
    /// A walk positioned before the first digit.
    ///
    /// # Errors
    ///
    /// Propagates entry capacity limits.
    pub fn new(cf: &ContinuedFraction) -> Result<Self> {
        let mut w = CodingWalk {
            cf: cf.clone(),
            table: ConvergentTable::new(),
            book: Bookkeeping { n: 0, m: 0, k: 0, r: 0 },
            pending: PendingEntry::Exhausted,
        };
        w.pending = w.fetch(1)?;
        Ok(w)
    }

    fn fetch(&self, i: u64) -> Result<PendingEntry> {
        Ok(match self.cf.entry(i)? {
            Some(a) => PendingEntry::Within { zeros_left: &a - BigInt::one(), entry: a },
            None => PendingEntry::Exhausted,
        })
    }

    /// Consumes one digit and returns the updated bookkeeping.
    ///
    /// # Errors
    ///
    /// Propagates entry capacity limits.
    pub fn advance(&mut self) -> Result<Bookkeeping> {
        self.book.n += 1;
        let completed = match &mut self.pending {
            PendingEntry::Exhausted => {
                self.book.r += 1;
                None
            }
            PendingEntry::Within { entry, zeros_left } => {
                if zeros_left.is_zero() {
                    // The closing one of this entry.
                    Some(entry.clone())
                } else {
                    *zeros_left -= 1u8;
                    self.book.r += 1;
                    None
                }
            }
        };
        if let Some(done) = completed {
            self.book.m += 1;
            self.book.k = self.book.n;
            self.book.r = 0;
            self.table.push(done);
            self.pending = self.fetch(self.book.m + 1)?;
        }
        Ok(self.book)
    }

    /// Current bookkeeping.
    #[must_use]
    pub fn bookkeeping(&self) -> Bookkeeping {
        self.book
    }

    /// Convergents of the entries completed so far.
    #[must_use]
    pub fn convergents(&self) -> &ConvergentTable {
        &self.table
    }

    /// The matrix of the composed inverse branch along the first `n` digits,
    /// assembled from convergents: with `m` ones seen and a trailing run of
    /// `r` zeros it is `(r·pₘ + pₘ₋₁, pₘ; r·qₘ + qₘ₋₁, qₘ)`, of determinant
    /// `(−1)ᵐ`.
    #[must_use]
    pub fn branch_matrix(&self) -> Mobius {
        let m = self.book.m as i64;
        let r = BigInt::from(self.book.r);
        Mobius::Big {
            a: &r * self.table.p(m) + self.table.p(m - 1),
            b: self.table.p(m).clone(),
            c: &r * self.table.q(m) + self.table.q(m - 1),
            d: self.table.q(m).clone(),
        }
    }
}

/// The score `(a_{j+1})^α · ln(n) / q_j^{2(1−α)}` with `n = a₁ + … + a_j − k`
/// governing convergence at the rational observation point `1/k`; `None`
/// when the step count `n` has not yet reached `1`.
#[derive(Debug, Clone, Copy)]
pub struct SScore {
    /// The score itself (may underflow to zero for deep convergents).
    pub value: f64,
    /// Natural log of the score, stable at any depth.
    pub log_value: f64,
}

/// Computes the score at index `j ≥ 1` for the expansion and exponent given.
///
/// # Errors
///
/// Propagates entry capacity limits; indices past a finite expansion are
/// invalid.
pub fn s_score(cf: &ContinuedFraction, k: u64, j: u64, alpha: f64) -> Result<Option<SScore>> {
    let mut table = ConvergentTable::new();
    let mut partial = BigInt::zero();
    for i in 1..=j {
        let a = cf
            .entry(i)?
            .ok_or_else(|| invalid(format!("expansion ends before index {i}")))?;
        partial += &a;
        table.push(a);
    }
    let next = cf
        .entry(j + 1)?
        .ok_or_else(|| invalid(format!("expansion ends before index {}", j + 1)))?;
    let n = partial - BigInt::from(k);
    if n < BigInt::one() {
        return Ok(None);
    }
    let log_n = crate::num_util::log_abs_bigint(&n);
    // ln(ln n) is −∞ at n = 1, making the score an exact zero there.
    let log_log_n = if log_n > 0.0 { log_n.ln() } else { f64::NEG_INFINITY };
    let log_score = alpha * crate::num_util::log_abs_bigint(&next) + log_log_n
        - 2.0 * (1.0 - alpha) * crate::num_util::log_abs_bigint(table.q(j as i64));
    Ok(Some(SScore { value: log_score.exp(), log_value: log_score }))
}

/// Which argument settles the summability question for an expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SummabilityCertificate {
    /// Entries are bounded, so the tail weights decay geometrically for
    /// every exponent in `(0, 1)`.
    BoundedEntries,
    /// `α < 1/2` makes the inner exponent exceed one regardless of the
    /// expansion.
    SmallAlpha,
    /// No structural certificate applies; only numeric partial sums are
    /// reported.
    Inconclusive,
}

/// Summability diagnostic for the double series with terms
/// `(j·qₙ₋₁ + qₙ₋₂)^{−2(1−α)+ε}`, `1 ≤ j ≤ aₙ`.
#[derive(Debug, Clone)]
pub struct SummabilityReport {
    /// The exponent examined.
    pub alpha: f64,
    /// The structural argument found, if any.
    pub certificate: SummabilityCertificate,
    /// `Some(true)` when a certificate settles convergence; `None` when the
    /// numeric table is all the evidence there is.
    pub summable: Option<bool>,
    /// `(ε, partial sum over the first rows, rows used)` for a few margins.
    pub partial_sums: Vec<(f64, f64, u64)>,
}

/// Examines the double series that controls whether tails of exponent
/// `alpha` stay summable along the expansion.
///
/// # Errors
///
/// Rejects exponents outside `(0, 1)`.
pub fn summability_report(cf: &ContinuedFraction, alpha: f64) -> Result<SummabilityReport> {
    if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
        return Err(invalid(format!("exponent {alpha} outside (0, 1)")));
    }
    let bounded = match cf {
        ContinuedFraction::Finite(v) => v.iter().max().cloned(),
        ContinuedFraction::Periodic { pre, cycle } => pre.iter().chain(cycle).max().cloned(),
        ContinuedFraction::Rule(rule) => rule.entry_bound(),
    };
    let certificate = if bounded.is_some() {
        SummabilityCertificate::BoundedEntries
    } else if alpha < 0.5 {
        SummabilityCertificate::SmallAlpha
    } else {
        SummabilityCertificate::Inconclusive
    };
    let summable = match certificate {
        SummabilityCertificate::Inconclusive => None,
        _ => Some(true),
    };

    // Numeric partial sums in the log domain: the convergent denominators
    // are carried as logarithms so rules with enormous entries still work.
    let mut partial_sums = Vec::new();
    let base_exponent = 2.0 * (1.0 - alpha);
    for eps in [base_exponent / 4.0, base_exponent / 2.0] {
        let s = base_exponent - eps;
        let mut log_q_prev = 0.0; // ln q₀
        let mut log_q_prev2 = f64::NEG_INFINITY; // ln q₋₁ = ln 0
        let mut sum = 0.0f64;
        let mut rows = 0;
        for n in 1..=60u64 {
            let log_a = match cf {
                ContinuedFraction::Rule(rule) => rule.log_entry(n),
                _ => match cf.entry(n)? {
                    Some(a) => crate::num_util::log_abs_bigint(&a),
                    None => break,
                },
            };
            // Inner sum over j ≤ aₙ of (j·qₙ₋₁ + qₙ₋₂)^(−s): enumerate a
            // capped prefix and bound the rest by the integral comparison.
            let j_cap: u64 = 4096;
            let a_f = log_a.exp();
            let enumerated = a_f.min(j_cap as f64) as u64;
            for j in 1..=enumerated {
                let log_t = log_add_exp((j as f64).ln() + log_q_prev, log_q_prev2);
                sum += (-s * log_t).exp();
            }
            if a_f > j_cap as f64 && (s - 1.0).abs() > 1e-9 {
                // ∫_{cap}^{aₙ} (u·qₙ₋₁)^(−s) du in the log domain.
                let log_int = |log_u: f64| (1.0 - s) * log_u - (1.0 - s).abs().ln();
                let upper = log_int(log_a) - s * log_q_prev;
                let lower = log_int((j_cap as f64).ln()) - s * log_q_prev;
                sum += if s > 1.0 {
                    (lower.exp() - upper.exp()).max(0.0)
                } else {
                    (upper.exp() - lower.exp()).max(0.0)
                };
            }
            let log_q_next = log_a + log_q_prev + (log_q_prev2 - log_a - log_q_prev).exp().ln_1p();
            log_q_prev2 = log_q_prev;
            log_q_prev = log_q_next;
            rows = n;
        }
        partial_sums.push((eps, sum, rows));
    }
    Ok(SummabilityReport { alpha, certificate, summable, partial_sums })
}

/// Orbit structure of an exactly represented point under the Farey map.
#[derive(Debug, Clone)]
pub struct OrbitCycle {
    /// Steps before the cycle is entered.
    pub preperiod: u64,
    /// Cycle length.
    pub period: u64,
    /// The points of the cycle, in orbit order.
    pub cycle: Vec<ExactPoint>,
}

/// Detects the eventual cycle of the exact Farey orbit of a rational or
/// quadratic point (rationals end in the fixed origin; quadratic irrationals
/// close a genuine cycle).
///
/// # Errors
///
/// Capacity error when no cycle closes within the safety cap.
pub fn farey_orbit_cycle(point: &ExactPoint) -> Result<OrbitCycle> {
    let mut seen: HashMap<ExactPoint, u64> = HashMap::new();
    let mut orbit: Vec<ExactPoint> = Vec::new();
    let mut x = point.clone();
    for step in 0..MAX_DETECTION_STEPS {
        if let Some(&first) = seen.get(&x) {
            return Ok(OrbitCycle {
                preperiod: first,
                period: step - first,
                cycle: orbit[first as usize..].to_vec(),
            });
        }
        seen.insert(x.clone(), step);
        orbit.push(x.clone());
        x = x.farey_step();
    }
    Err(capacity("orbit did not close within the detection cap"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf_of(s: &str) -> ContinuedFraction {
        ContinuedFraction::parse(s).unwrap()
    }

    fn small_entries(cf: &ContinuedFraction, n: u64) -> Vec<u64> {
        cf.entries_prefix(n).unwrap().iter().map(|a| a.to_u64().unwrap()).collect()
    }

    #[test]
    fn rational_expansions_are_canonical() {
        assert_eq!(small_entries(&cf_of("2/3"), 10), vec![1, 2]);
        assert_eq!(small_entries(&cf_of("5/13"), 10), vec![2, 1, 1, 2]);
        assert_eq!(small_entries(&cf_of("1/2"), 10), vec![2]);
        assert_eq!(small_entries(&cf_of("1"), 10), vec![1]);
        assert_eq!(small_entries(&cf_of("0"), 10), Vec::<u64>::new());
        assert_eq!(small_entries(&cf_of("0.375"), 10), vec![2, 1, 2]); // 3/8
    }

    #[test]
    fn surd_expansions_close_their_periods() {
        match cf_of("sqrt2-1") {
            ContinuedFraction::Periodic { pre, cycle } => {
                assert!(pre.is_empty());
                assert_eq!(cycle, vec![BigInt::from(2)]);
            }
            other => panic!("expected periodic, got {other:?}"),
        }
        match cf_of("sqrt5-1/2") {
            ContinuedFraction::Periodic { pre, cycle } => {
                assert!(pre.is_empty());
                assert_eq!(cycle, vec![BigInt::one()]);
            }
            other => panic!("expected periodic, got {other:?}"),
        }
    }

    #[test]
    fn exact_values_round_trip_through_expansion() {
        for s in ["2/3", "5/13", "1/2", "1", "sqrt2-1", "sqrt5-1/2", "sqrt7-2"] {
            let point = parse_exact_value(s).unwrap();
            let cf = ContinuedFraction::expansion_of(&point).unwrap();
            assert_eq!(cf.value_exact().unwrap(), point, "{s}");
        }
    }

    #[test]
    fn bracket_forms_parse_and_evaluate() {
        let x = cf_of("[0;2,2]");
        assert_eq!(
            x.value_exact().unwrap(),
            ExactPoint::rational(2, 5).unwrap()
        );
        let y = cf_of("[0;(2)]");
        let sqrt2m1 = parse_exact_value("sqrt2-1").unwrap();
        assert_eq!(y.value_exact().unwrap(), sqrt2m1);
        let z = cf_of("[0;1,(2,3)]");
        let approx = z.value_f64(40).unwrap();
        assert!((z.value_exact().unwrap().to_f64() - approx).abs() < 1e-12);
    }

    #[test]
    fn digit_spelling_matches_known_itineraries() {
        let mut s = DigitStream::new(&cf_of("2/3")).unwrap();
        assert_eq!(s.take_word(6).unwrap(), vec![1, 0, 1, 0, 0, 0]);
        let mut s = DigitStream::new(&cf_of("1/2")).unwrap();
        assert_eq!(s.take_word(5).unwrap(), vec![0, 1, 0, 0, 0]);
        let mut s = DigitStream::new(&cf_of("[0;(2)]")).unwrap();
        assert_eq!(s.take_word(6).unwrap(), vec![0, 1, 0, 1, 0, 1]);
        let mut s = DigitStream::new(&cf_of("sqrt5-1/2")).unwrap();
        assert_eq!(s.take_word(4).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn golden_ratio_denominators_are_fibonacci() {
        let mut t = ConvergentTable::new();
        for _ in 0..10 {
            t.push(BigInt::one());
        }
        // qₙ runs through the Fibonacci numbers starting at F₂ = 1.
        let fib = [1u64, 2, 3, 5, 8, 13, 21, 34, 55, 89];
        for (i, f) in fib.iter().enumerate() {
            assert_eq!(t.q((i + 1) as i64), &BigInt::from(*f));
        }
    }

    #[test]
    fn cross_determinant_alternates_sign() {
        let mut t = ConvergentTable::new();
        for a in [1u64, 2, 3, 4, 5, 6] {
            t.push(BigInt::from(a));
        }
        for n in 1..=6i64 {
            let expected = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(t.cross_determinant(n), BigInt::from(expected), "order {n}");
        }
    }

    #[test]
    fn closed_form_matrix_equals_letterwise_product() {
        for spec in ["2/3", "5/13", "sqrt2-1", "sqrt5-1/2", "[0;1,(2,3)]"] {
            let cf = cf_of(spec);
            let mut walk = CodingWalk::new(&cf).unwrap();
            let mut digits = DigitStream::new(&cf).unwrap();
            let mut word = Vec::new();
            for n in 1..=40u64 {
                word.push(digits.next_digit().unwrap());
                walk.advance().unwrap();
                let direct = crate::map::word_matrix(1.0, &word);
                assert_eq!(
                    walk.branch_matrix().to_big(),
                    direct.to_big(),
                    "{spec} at depth {n}"
                );
            }
        }
    }

    #[test]
    fn bookkeeping_tracks_ones_and_runs() {
        // sqrt2−1 has digits 0,1,0,1,…: after 5 digits, two ones, last at 4.
        let mut walk = CodingWalk::new(&cf_of("sqrt2-1")).unwrap();
        for _ in 0..5 {
            walk.advance().unwrap();
        }
        let b = walk.bookkeeping();
        assert_eq!((b.n, b.m, b.k, b.r), (5, 2, 4, 1));
    }

    #[test]
    fn witness_marker_positions_match_their_designs() {
        let lin = cf_of("ones-blocks-linear");
        let lin_markers: Vec<u64> = (1..=30)
            .filter(|&i| lin.entry(i).unwrap().unwrap() == BigInt::from(2))
            .collect();
        assert_eq!(lin_markers, vec![3, 8, 15, 24]);
        let geo = cf_of("ones-blocks-geometric");
        let geo_markers: Vec<u64> = (1..=40)
            .filter(|&i| geo.entry(i).unwrap().unwrap() == BigInt::from(2))
            .collect();
        assert_eq!(geo_markers, vec![3, 8, 17, 34]);
    }

    #[test]
    fn score_reproduces_the_worked_example() {
        // [0;1,2,3,4,…], k = 1, j = 3: n = 1+2+3−1 = 5, q₃ = 10, next entry
        // 4, α = 1/2 ⇒ score = 2·ln5/10.
        let cf = cf_of("arith:1,1");
        let s = s_score(&cf, 1, 3, 0.5).unwrap().unwrap();
        let expected = 2.0 * 5f64.ln() / 10.0;
        assert!((s.value - expected).abs() < 1e-12);
        assert!((s.log_value - expected.ln()).abs() < 1e-12);
    }

    #[test]
    fn score_is_undefined_before_enough_steps() {
        // [0;1,1,1,…] with k = 2: partial sums 1, 2, 3 … minus 2 reaches 1
        // only at j = 3.
        let cf = cf_of("sqrt5-1/2");
        assert!(s_score(&cf, 2, 1, 0.5).unwrap().is_none());
        assert!(s_score(&cf, 2, 2, 0.5).unwrap().is_none());
        assert!(s_score(&cf, 2, 3, 0.5).unwrap().is_some());
    }

    #[test]
    fn summability_certificates_cover_the_three_regimes() {
        let periodic = summability_report(&cf_of("[0;(2)]"), 0.8).unwrap();
        assert_eq!(periodic.certificate, SummabilityCertificate::BoundedEntries);
        assert_eq!(periodic.summable, Some(true));
        let small = summability_report(&cf_of("arith:1,1"), 0.3).unwrap();
        assert_eq!(small.certificate, SummabilityCertificate::SmallAlpha);
        let open = summability_report(&cf_of("arith:1,1"), 0.8).unwrap();
        assert_eq!(open.certificate, SummabilityCertificate::Inconclusive);
        assert_eq!(open.summable, None);
        assert!(open.partial_sums.iter().all(|(_, s, _)| s.is_finite()));
    }

    #[test]
    fn shift_agrees_with_the_exact_orbit() {
        for spec in ["5/13", "sqrt2-1", "[0;1,(2,3)]"] {
            let mut cf = cf_of(spec);
            let mut x = cf.value_exact().unwrap();
            for _ in 0..8 {
                cf = cf.farey_shift().unwrap();
                x = x.farey_step();
                assert_eq!(cf.value_exact().unwrap(), x, "{spec}");
            }
        }
    }

    #[test]
    fn orbit_cycles_close_as_expected() {
        // Rationals fall into the fixed origin.
        let c = farey_orbit_cycle(&ExactPoint::rational(2, 3).unwrap()).unwrap();
        assert_eq!((c.preperiod, c.period), (3, 1));
        assert!(c.cycle[0].is_zero());
        // √2 − 1 is 2-periodic.
        let c = farey_orbit_cycle(&parse_exact_value("sqrt2-1").unwrap()).unwrap();
        assert_eq!((c.preperiod, c.period), (0, 2));
        // The golden-ratio conjugate is fixed.
        let c = farey_orbit_cycle(&parse_exact_value("sqrt5-1/2").unwrap()).unwrap();
        assert_eq!((c.preperiod, c.period), (0, 1));
    }
}
