//! Bell-type inequality left-hand sides as linear functionals over behaviors.
//!
//! An [`Expression`] is a sum of coefficient-weighted partial joint events
//! such as P(a1^0+, a2^1−). Correlator shorthands are expanded into
//! probability terms at construction time, so evaluation has a single path.
//! Partial events (terms that do not mention every party) are evaluated by
//! fixing the absent parties' settings to 0 and summing their outcomes; this
//! is only context-free on no-signaling behaviors, and evaluation refuses
//! signaling ones rather than silently picking a context.

use crate::error::{Error, Result};
use crate::scenario::{sign_bit, Behavior, Scenario, NUMERIC_TOL};

/// One party's contribution to a partial joint event.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Factor {
    pub party: usize,
    pub setting: u8,
    /// +1 or −1.
    pub sign: i8,
}

/// A coefficient times a partial joint event probability.
#[derive(Clone, Debug)]
pub struct Term {
    pub coefficient: f64,
    /// Factors sorted by party; parties are distinct and the list nonempty.
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug)]
pub struct Expression {
    name: String,
    scenario: Scenario,
    terms: Vec<Term>,
}

impl Expression {
    pub fn new(name: impl Into<String>, scenario: Scenario, terms: Vec<Term>) -> Result<Self> {
        let n = scenario.num_parties();
        let mut terms = terms;
        for t in &mut terms {
            if t.factors.is_empty() {
                return Err(Error::InvalidArgument("term with no factors".into()));
            }
            t.factors.sort_by_key(|f| f.party);
            for w in t.factors.windows(2) {
                if w[0].party == w[1].party {
                    return Err(Error::InvalidArgument(format!(
                        "party {} repeated within a term",
                        w[0].party + 1
                    )));
                }
            }
            for f in &t.factors {
                if f.party >= n {
                    return Err(Error::InvalidArgument(format!(
                        "party {} out of range for {n}-party scenario",
                        f.party + 1
                    )));
                }
                if f.setting > 1 {
                    return Err(Error::InvalidArgument("setting must be 0 or 1".into()));
                }
                if f.sign != 1 && f.sign != -1 {
                    return Err(Error::InvalidArgument("sign must be +1 or -1".into()));
                }
            }
        }
        Ok(Expression {
            name: name.into(),
            scenario,
            terms,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Re-embeds the expression into an `n`-party scenario (all referenced
    /// parties must fit).
    pub fn with_scenario(&self, n: usize) -> Result<Expression> {
        Expression::new(self.name.clone(), Scenario::new(n)?, self.terms.clone())
    }

    pub fn has_partial_terms(&self) -> bool {
        let n = self.scenario.num_parties();
        self.terms.iter().any(|t| t.factors.len() < n)
    }

    /// Sum of positive coefficients: no behavior can evaluate above this.
    pub fn algebraic_max(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient.max(0.0))
            .sum()
    }

    /// The expression as a dense linear functional over table entries
    /// (length 4^N), with absent parties' settings fixed to 0 and their
    /// outcomes summed.
    pub fn coefficient_vector(&self) -> Vec<f64> {
        let sc = self.scenario;
        let n = sc.num_parties();
        let full = (1usize << n) - 1;
        let mut coef = vec![0.0; sc.table_len()];
        for t in &self.terms {
            let mut settings = 0usize;
            let mut mask = 0usize;
            let mut fixed = 0usize;
            for f in &t.factors {
                settings |= (f.setting as usize) << f.party;
                mask |= 1 << f.party;
                fixed |= sign_bit(f.sign) << f.party;
            }
            let absent = full & !mask;
            let mut oc = absent;
            loop {
                coef[sc.index(settings, fixed | oc)] += t.coefficient;
                if oc == 0 {
                    break;
                }
                oc = (oc - 1) & absent;
            }
        }
        coef
    }

    /// Evaluates the functional on a behavior.
    pub fn evaluate(&self, behavior: &Behavior) -> Result<f64> {
        if behavior.scenario() != self.scenario {
            return Err(Error::ScenarioMismatch {
                expected: self.scenario.num_parties(),
                found: behavior.scenario().num_parties(),
            });
        }
        if self.has_partial_terms() {
            let report = behavior.no_signaling_report(NUMERIC_TOL);
            if !report.is_no_signaling {
                return Err(Error::Signaling { report });
            }
        }
        let coef = self.coefficient_vector();
        Ok(coef
            .iter()
            .zip(behavior.table())
            .map(|(c, p)| c * p)
            .sum())
    }
}

// ---------------------------------------------------------------------------
// Built-ins
// ---------------------------------------------------------------------------

fn probability_term(coefficient: f64, factors: &[(usize, u8, i8)]) -> Term {
    Term {
        coefficient,
        factors: factors
            .iter()
            .map(|&(party, setting, sign)| Factor {
                party,
                setting,
                sign,
            })
            .collect(),
    }
}

/// Expands coefficient·⟨∏ a_i^{x_i}⟩ over `parties` into probability terms.
fn correlator_terms(coefficient: f64, parties: &[(usize, u8)]) -> Vec<Term> {
    let k = parties.len();
    let mut out = Vec::with_capacity(1 << k);
    for bits in 0..(1usize << k) {
        let sign = if (bits.count_ones() & 1) == 0 { 1.0 } else { -1.0 };
        let factors = parties
            .iter()
            .enumerate()
            .map(|(i, &(party, setting))| Factor {
                party,
                setting,
                sign: if (bits >> i) & 1 == 0 { 1 } else { -1 },
            })
            .collect();
        out.push(Term {
            coefficient: coefficient * sign,
            factors,
        });
    }
    out
}

fn svetlichny_terms() -> Vec<Term> {
    // S3 = ⟨a0b0c0⟩ + ⟨a0b0c1⟩ + ⟨a0b1c0⟩ − ⟨a0b1c1⟩
    //    + ⟨a1b0c0⟩ − ⟨a1b0c1⟩ − ⟨a1b1c0⟩ − ⟨a1b1c1⟩
    let mut terms = Vec::new();
    for s in 0..8u8 {
        let (x, y, z) = (s & 1, (s >> 1) & 1, (s >> 2) & 1);
        let ones = x + y + z;
        let sign = if ones >= 2 { -1.0 } else { 1.0 };
        terms.extend(correlator_terms(
            sign,
            &[(0, x), (1, y), (2, z)],
        ));
    }
    terms
}

fn sprime_terms() -> Vec<Term> {
    vec![
        probability_term(1.0, &[(0, 0, 1), (1, 0, 1), (2, 0, 1)]),
        probability_term(1.0, &[(0, 0, -1), (1, 0, 1), (2, 0, 1)]),
        probability_term(1.0, &[(0, 1, 1), (1, 0, -1), (2, 0, -1)]),
        probability_term(1.0, &[(0, 1, -1), (1, 0, -1), (2, 0, -1)]),
    ]
}

/// R_N: one positive all-zero-settings all-plus event, minus the N events
/// with one setting flipped to 1 (all outcomes +), minus the N events with
/// one setting kept 0 (that party +, all others setting 1 outcome −).
fn rn_terms(n: usize) -> Vec<Term> {
    let mut terms = Vec::with_capacity(2 * n + 1);
    let all_zero_plus: Vec<(usize, u8, i8)> = (0..n).map(|i| (i, 0, 1)).collect();
    terms.push(probability_term(1.0, &all_zero_plus));
    for j in 0..n {
        let f: Vec<(usize, u8, i8)> = (0..n)
            .map(|i| (i, if i == j { 1 } else { 0 }, 1))
            .collect();
        terms.push(probability_term(-1.0, &f));
    }
    for j in 0..n {
        let f: Vec<(usize, u8, i8)> = (0..n)
            .map(|i| {
                if i == j {
                    (i, 0, 1)
                } else {
                    (i, 1, -1)
                }
            })
            .collect();
        terms.push(probability_term(-1.0, &f));
    }
    terms
}

fn t_terms() -> Vec<Term> {
    vec![
        probability_term(1.0, &[(0, 0, 1), (1, 0, 1)]),
        probability_term(1.0, &[(0, 0, -1), (1, 1, 1)]),
        probability_term(1.0, &[(0, 1, 1), (1, 0, -1)]),
        probability_term(1.0, &[(0, 1, -1), (1, 1, -1)]),
    ]
}

fn chsh_terms() -> Vec<Term> {
    let mut terms = Vec::new();
    for (x, y, sign) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)] {
        terms.extend(correlator_terms(sign, &[(0, x), (1, y)]));
    }
    terms
}

fn mermin3_terms() -> Vec<Term> {
    // ⟨a0b0c0⟩ − ⟨a0b1c1⟩ − ⟨a1b0c1⟩ − ⟨a1b1c0⟩
    let mut terms = correlator_terms(1.0, &[(0, 0), (1, 0), (2, 0)]);
    terms.extend(correlator_terms(-1.0, &[(0, 0), (1, 1), (2, 1)]));
    terms.extend(correlator_terms(-1.0, &[(0, 1), (1, 0), (2, 1)]));
    terms.extend(correlator_terms(-1.0, &[(0, 1), (1, 1), (2, 0)]));
    terms
}

/// Returns a named built-in inequality for an `n`-party scenario.
///
/// `S3`, `Sprime`, `I`, `R3` and `Mermin3` are tripartite; `RN` needs n ≥ 3;
/// `T` and `B` act on the first two parties and may be embedded in any
/// scenario with n ≥ 2.
pub fn builtin(name: &str, n: usize) -> Result<Expression> {
    let fixed3 = |terms: Vec<Term>| -> Result<Expression> {
        if n != 3 {
            return Err(Error::InvalidArity {
                name: name.into(),
                n,
            });
        }
        Expression::new(name, Scenario::new(3)?, terms)
    };
    match name {
        "S3" => fixed3(svetlichny_terms()),
        "Sprime" => fixed3(sprime_terms()),
        "I" => {
            let mut terms = svetlichny_terms();
            terms.extend(sprime_terms());
            fixed3(terms)
        }
        "R3" => fixed3(rn_terms(3)),
        "Mermin3" => fixed3(mermin3_terms()),
        "RN" => {
            if n < 3 {
                return Err(Error::InvalidArity {
                    name: name.into(),
                    n,
                });
            }
            Expression::new(name, Scenario::new(n)?, rn_terms(n))
        }
        "T" => Expression::new(name, Scenario::new(n)?, t_terms()),
        "B" => Expression::new(name, Scenario::new(n)?, chsh_terms()),
        _ => Err(Error::UnknownBuiltin(name.into())),
    }
}

pub const BUILTIN_NAMES: [&str; 8] = ["S3", "Sprime", "I", "R3", "RN", "T", "B", "Mermin3"];

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------
//
//   expr   := [sign] term (sign term)*
//   term   := [coeff ws ['*' ws]] atom
//   atom   := 'P(' factor (',' factor)* ')' | '<' cfac (ws cfac)* '>'
//   factor := 'a' int '^' ('0'|'1') ('+'|'-')
//   cfac   := 'a' int '^' ('0'|'1')
//
// Party indices are 1-based in the text. Correlator atoms expand to 2^k
// probability terms.

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {:?}", c as char))
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9') | Some(b'.')) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map_err(|_| Error::Parse {
                pos: start,
                msg: format!("invalid number {text:?}"),
            })
    }

    fn party(&mut self) -> Result<usize> {
        self.expect(b'a')?;
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a party index after 'a'");
        }
        let idx: usize = std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse {
                pos: start,
                msg: "party index overflow".into(),
            })?;
        if idx == 0 {
            return Err(Error::Parse {
                pos: start,
                msg: "party indices are 1-based".into(),
            });
        }
        Ok(idx - 1)
    }

    fn setting(&mut self) -> Result<u8> {
        self.expect(b'^')?;
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                Ok(0)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(1)
            }
            _ => self.err("expected setting 0 or 1"),
        }
    }

    fn sign(&mut self) -> Result<i8> {
        match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                Ok(1)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-1)
            }
            _ => self.err("expected outcome sign '+' or '-'"),
        }
    }

    fn check_distinct(&self, parties: &[usize], pos: usize) -> Result<()> {
        let mut seen = parties.to_vec();
        seen.sort_unstable();
        for w in seen.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Parse {
                    pos,
                    msg: format!("party a{} repeated within a term", w[0] + 1),
                });
            }
        }
        Ok(())
    }

    /// Parses one atom into terms with unit coefficient.
    fn atom(&mut self) -> Result<Vec<Term>> {
        let atom_pos = self.pos;
        match self.peek() {
            Some(b'P') => {
                self.pos += 1;
                self.expect(b'(')?;
                let mut factors = Vec::new();
                loop {
                    self.skip_ws();
                    let party = self.party()?;
                    let setting = self.setting()?;
                    let sign = self.sign()?;
                    factors.push(Factor {
                        party,
                        setting,
                        sign,
                    });
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            self.pos += 1;
                        }
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return self.err("expected ',' or ')'"),
                    }
                }
                let parties: Vec<usize> = factors.iter().map(|f| f.party).collect();
                self.check_distinct(&parties, atom_pos)?;
                Ok(vec![Term {
                    coefficient: 1.0,
                    factors,
                }])
            }
            Some(b'<') => {
                self.pos += 1;
                let mut parties = Vec::new();
                loop {
                    self.skip_ws();
                    if self.peek() == Some(b'>') {
                        self.pos += 1;
                        break;
                    }
                    let party = self.party()?;
                    let setting = self.setting()?;
                    parties.push((party, setting));
                }
                if parties.is_empty() {
                    return self.err("empty correlator");
                }
                let idx: Vec<usize> = parties.iter().map(|&(p, _)| p).collect();
                self.check_distinct(&idx, atom_pos)?;
                Ok(correlator_terms(1.0, &parties))
            }
            _ => self.err("expected 'P(' or '<'"),
        }
    }
}

/// Parses the expression text format. The scenario size is inferred from the
/// largest party index mentioned (at least 2 parties); use
/// [`Expression::with_scenario`] to embed into a larger scenario.
pub fn parse(text: &str) -> Result<Expression> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let mut terms: Vec<Term> = Vec::new();
    p.skip_ws();
    let mut sign = match p.peek() {
        Some(b'-') => {
            p.pos += 1;
            -1.0
        }
        Some(b'+') => {
            p.pos += 1;
            1.0
        }
        _ => 1.0,
    };
    loop {
        p.skip_ws();
        let coeff = if matches!(p.peek(), Some(b'0'..=b'9') | Some(b'.')) {
            let c = p.number()?;
            p.skip_ws();
            if p.peek() == Some(b'*') {
                p.pos += 1;
                p.skip_ws();
            }
            c
        } else {
            1.0
        };
        for mut t in p.atom()? {
            t.coefficient *= sign * coeff;
            terms.push(t);
        }
        p.skip_ws();
        match p.peek() {
            None => break,
            Some(b'+') => {
                p.pos += 1;
                sign = 1.0;
            }
            Some(b'-') => {
                p.pos += 1;
                sign = -1.0;
            }
            _ => return p.err("expected '+', '-' or end of input"),
        }
    }
    let n = terms
        .iter()
        .flat_map(|t| t.factors.iter().map(|f| f.party + 1))
        .max()
        .unwrap_or(0)
        .max(2);
    Expression::new("parsed", Scenario::new(n)?, terms)
}

/// Renders an expression in the text format (probability terms only, since
/// correlators are expanded at construction).
pub fn render(expr: &Expression) -> String {
    let mut out = String::new();
    for (i, t) in expr.terms().iter().enumerate() {
        let mag = t.coefficient.abs();
        if i == 0 {
            if t.coefficient < 0.0 {
                out.push_str("- ");
            }
        } else if t.coefficient < 0.0 {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if mag != 1.0 {
            out.push_str(&format!("{mag} "));
        }
        out.push_str("P(");
        for (k, f) in t.factors.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "a{}^{}{}",
                f.party + 1,
                f.setting,
                if f.sign > 0 { '+' } else { '-' }
            ));
        }
        out.push(')');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Behavior;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(n: usize) -> Behavior {
        Behavior::uniform(Scenario::new(n).unwrap())
    }

    /// A random normalized (generally signaling-free only by accident — so
    /// full-term expressions only) behavior.
    fn random_behavior(rng: &mut ChaCha8Rng, n: usize) -> Behavior {
        let sc = Scenario::new(n).unwrap();
        let mut table = vec![0.0; sc.table_len()];
        for s in 0..sc.num_settings() {
            let mut sum = 0.0;
            for o in 0..sc.num_outcomes() {
                let v: f64 = rng.gen();
                table[sc.index(s, o)] = v;
                sum += v;
            }
            for o in 0..sc.num_outcomes() {
                table[sc.index(s, o)] /= sum;
            }
        }
        Behavior::from_table(sc, table, NUMERIC_TOL).unwrap()
    }

    #[test]
    fn builtin_values_on_uniform() {
        let cases = [
            ("S3", 3, 0.0),
            ("Sprime", 3, 0.5),
            ("I", 3, 0.5),
            ("R3", 3, -0.625),
            ("T", 3, 1.0),
            ("B", 3, 0.0),
            ("Mermin3", 3, 0.0),
        ];
        for (name, n, expected) in cases {
            let e = builtin(name, n).unwrap();
            let v = e.evaluate(&uniform(n)).unwrap();
            assert!(
                (v - expected).abs() <= 1e-12,
                "{name} on uniform: {v} != {expected}"
            );
        }
    }

    #[test]
    fn r3_term_structure() {
        let e = builtin("R3", 3).unwrap();
        assert_eq!(e.terms().len(), 7);
        assert_eq!(e.terms()[0].coefficient, 1.0);
        assert!(e.terms()[1..].iter().all(|t| t.coefficient == -1.0));
        // RN at N=3 is R3 term-for-term.
        let rn = builtin("RN", 3).unwrap();
        assert_eq!(rn.terms().len(), 7);
        for (a, b) in e.terms().iter().zip(rn.terms()) {
            assert_eq!(a.coefficient, b.coefficient);
            assert_eq!(a.factors, b.factors);
        }
    }

    #[test]
    fn rn_has_2n_plus_1_terms() {
        for n in 3..=6 {
            assert_eq!(builtin("RN", n).unwrap().terms().len(), 2 * n + 1);
        }
    }

    #[test]
    fn builtin_arity_errors() {
        assert!(matches!(builtin("S3", 4), Err(Error::InvalidArity { .. })));
        assert!(matches!(builtin("RN", 2), Err(Error::InvalidArity { .. })));
        assert!(matches!(builtin("CHSH", 2), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn i_is_s3_plus_sprime() {
        let i = builtin("I", 3).unwrap();
        let s3 = builtin("S3", 3).unwrap();
        let sp = builtin("Sprime", 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let b = random_behavior(&mut rng, 3);
            // Full-party terms only in all three expressions, so no
            // no-signaling requirement applies here.
            let vi = i.evaluate(&b).unwrap();
            let vs = s3.evaluate(&b).unwrap() + sp.evaluate(&b).unwrap();
            assert!((vi - vs).abs() <= 1e-12);
        }
    }

    #[test]
    fn evaluate_linear_in_behavior() {
        let e = builtin("I", 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b1 = random_behavior(&mut rng, 3);
        let b2 = random_behavior(&mut rng, 3);
        for q in [0.0, 0.25, 0.5, 1.0] {
            let mixed = b1.mix(&b2, q).unwrap();
            let lhs = e.evaluate(&mixed).unwrap();
            let rhs = q * e.evaluate(&b1).unwrap() + (1.0 - q) * e.evaluate(&b2).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn partial_terms_on_signaling_behavior_error() {
        let sc = Scenario::new(2).unwrap();
        let mut table = vec![0.0; sc.table_len()];
        for x in 0..2usize {
            for y in 0..2usize {
                let o = if x == 0 { 0 } else { 0b10 };
                table[sc.index(x | (y << 1), o)] = 1.0;
            }
        }
        let signaling = Behavior::from_table(sc, table, 0.0).unwrap();
        let partial = parse("P(a1^0+)").unwrap();
        assert!(matches!(
            partial.evaluate(&signaling),
            Err(Error::Signaling { .. })
        ));
        // Full terms are fine on the same behavior.
        let full = parse("P(a1^0+,a2^0+)").unwrap();
        assert_eq!(full.evaluate(&signaling).unwrap(), 1.0);
    }

    #[test]
    fn parse_single_probability() {
        let e = parse("P(a1^0+,a2^0+)").unwrap();
        assert_eq!(e.terms().len(), 1);
        assert_eq!(e.terms()[0].coefficient, 1.0);
        assert_eq!(e.scenario().num_parties(), 2);
    }

    #[test]
    fn parse_correlator_expands() {
        let e = parse("<a1^0 a2^0 a3^0>").unwrap();
        assert_eq!(e.terms().len(), 8);
        assert!(e.terms().iter().all(|t| t.coefficient.abs() == 1.0));
        let plus: f64 = e.terms().iter().map(|t| t.coefficient).sum();
        assert_eq!(plus, 0.0);
    }

    #[test]
    fn parse_coefficients_and_signs() {
        let e = parse("2 P(a1^0+) - 0.5*P(a1^1-) + <a1^0 a2^1>").unwrap();
        assert_eq!(e.terms().len(), 2 + 4);
        assert_eq!(e.terms()[0].coefficient, 2.0);
        assert_eq!(e.terms()[1].coefficient, -0.5);
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse("P(a1^0+,a1^1-)") {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("repeated")),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse("P(a1^2+)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn render_round_trip_evaluates_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let e = builtin("I", 3).unwrap();
        let back = parse(&render(&e)).unwrap();
        for _ in 0..20 {
            let b = random_behavior(&mut rng, 3);
            let v1 = e.evaluate(&b).unwrap();
            let v2 = back.evaluate(&b).unwrap();
            assert!((v1 - v2).abs() <= 1e-12);
        }
    }

    #[test]
    fn algebraic_max_of_builtins() {
        assert_eq!(builtin("Sprime", 3).unwrap().algebraic_max(), 4.0);
        assert_eq!(builtin("R3", 3).unwrap().algebraic_max(), 1.0);
        assert_eq!(builtin("T", 3).unwrap().algebraic_max(), 4.0);
    }
}
