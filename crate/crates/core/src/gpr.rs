//! Gene–protein–reaction rules: boolean expression trees over genes, their text
//! form, evaluation, and conversion to a minimal disjunctive normal form.
//!
//! A reaction without a rule is spontaneous; that case is represented as
//! `Option::<GprExpr>::None` on the reaction so that "no rule" can never appear
//! below an operator.
//!
//! Text grammar (case-insensitive keywords, `and` binds tighter than `or`):
//!
//! ```text
//! expr   := term ("or" term)*
//! term   := factor ("and" factor)*
//! factor := GENE | "(" expr ")"
//! ```
//!
//! Rendering parenthesizes every compound operand, so `parse(render(e)) == e`
//! holds structurally for every expression whose operator nodes have at least
//! two operands.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ids::GeneId;

/// Default cap on the number of DNF disjuncts a single rule may expand into.
pub const DEFAULT_DNF_CAP: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GprExpr {
    Gene(GeneId),
    And(Vec<GprExpr>),
    Or(Vec<GprExpr>),
}

impl GprExpr {
    pub fn gene(id: impl Into<GeneId>) -> Self {
        GprExpr::Gene(id.into())
    }

    /// Evaluates the rule with `present` deciding whether each gene product exists.
    pub fn eval(&self, present: &impl Fn(&GeneId) -> bool) -> bool {
        match self {
            GprExpr::Gene(g) => present(g),
            GprExpr::And(xs) => xs.iter().all(|x| x.eval(present)),
            GprExpr::Or(xs) => xs.iter().any(|x| x.eval(present)),
        }
    }

    pub fn genes(&self) -> BTreeSet<GeneId> {
        let mut out = BTreeSet::new();
        self.collect_genes(&mut out);
        out
    }

    fn collect_genes(&self, out: &mut BTreeSet<GeneId>) {
        match self {
            GprExpr::Gene(g) => {
                out.insert(g.clone());
            }
            GprExpr::And(xs) | GprExpr::Or(xs) => xs.iter().for_each(|x| x.collect_genes(out)),
        }
    }

    /// Visits every operator node, yielding its operand count.
    pub(crate) fn operator_arities(&self, out: &mut Vec<usize>) {
        if let GprExpr::And(xs) | GprExpr::Or(xs) = self {
            out.push(xs.len());
            xs.iter().for_each(|x| x.operator_arities(out));
        }
    }

    fn is_compound(&self) -> bool {
        !matches!(self, GprExpr::Gene(_))
    }
}

impl fmt::Display for GprExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (xs, op) = match self {
            GprExpr::Gene(g) => return f.write_str(g.as_str()),
            GprExpr::And(xs) => (xs, " and "),
            GprExpr::Or(xs) => (xs, " or "),
        };
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                f.write_str(op)?;
            }
            if x.is_compound() {
                write!(f, "({x})")?;
            } else {
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GprParseError {
    #[error("empty gene rule")]
    Empty,
    #[error("unexpected token `{token}` at offset {offset}")]
    UnexpectedToken { token: String, offset: usize },
    #[error("unexpected end of gene rule")]
    UnexpectedEnd,
    #[error("unbalanced parenthesis at offset {0}")]
    Unbalanced(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token<'a> {
    Open,
    Close,
    And,
    Or,
    Gene(&'a str),
}

fn tokenize(s: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'(' {
            out.push((i, Token::Open));
            i += 1;
        } else if c == b')' {
            out.push((i, Token::Close));
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                i += 1;
            }
            let word = &s[start..i];
            let tok = if word.eq_ignore_ascii_case("and") {
                Token::And
            } else if word.eq_ignore_ascii_case("or") {
                Token::Or
            } else {
                Token::Gene(word)
            };
            out.push((start, tok));
        }
    }
    out
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn expr(&mut self) -> Result<GprExpr, GprParseError> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { GprExpr::Or(terms) })
    }

    fn term(&mut self) -> Result<GprExpr, GprParseError> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { GprExpr::And(factors) })
    }

    fn factor(&mut self) -> Result<GprExpr, GprParseError> {
        let Some((offset, tok)) = self.tokens.get(self.pos).cloned() else {
            return Err(GprParseError::UnexpectedEnd);
        };
        self.pos += 1;
        match tok {
            Token::Gene(g) => Ok(GprExpr::gene(g)),
            Token::Open => {
                let inner = self.expr()?;
                match self.tokens.get(self.pos) {
                    Some((_, Token::Close)) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(GprParseError::Unbalanced(offset)),
                }
            }
            other => Err(GprParseError::UnexpectedToken { token: token_text(&other), offset }),
        }
    }
}

fn token_text(t: &Token<'_>) -> String {
    match t {
        Token::Open => "(".into(),
        Token::Close => ")".into(),
        Token::And => "and".into(),
        Token::Or => "or".into(),
        Token::Gene(g) => (*g).into(),
    }
}

impl FromStr for GprExpr {
    type Err = GprParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(s);
        if tokens.is_empty() {
            return Err(GprParseError::Empty);
        }
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if let Some((offset, tok)) = p.tokens.get(p.pos) {
            return Err(GprParseError::UnexpectedToken { token: token_text(tok), offset: *offset });
        }
        Ok(e)
    }
}

impl Serialize for GprExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GprExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter mapping a missing rule to the empty string.
pub mod optional_rule {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<GprExpr>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(e) => s.collect_str(e),
            None => s.serialize_str(""),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<GprExpr>, D::Error> {
        let s = Option::<String>::deserialize(d)?.unwrap_or_default();
        if s.trim().is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(serde::de::Error::custom)
        }
    }
}

/// Minimal disjunctive normal form of a rule. Each disjunct is one isoenzyme;
/// its genes are the members of that complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dnf {
    /// The reaction has no rule and needs no enzyme.
    Spontaneous,
    Disjuncts(Vec<BTreeSet<GeneId>>),
}

impl Dnf {
    pub fn disjuncts(&self) -> &[BTreeSet<GeneId>] {
        match self {
            Dnf::Spontaneous => &[],
            Dnf::Disjuncts(d) => d,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("gene rule expands to more than {cap} disjuncts")]
pub struct DnfCapExceeded {
    pub cap: usize,
}

/// Expands a rule into minimal DNF: duplicates and supersets are absorbed and the
/// result is sorted by set size, then lexicographically.
pub fn gpr_to_dnf(expr: Option<&GprExpr>, cap: usize) -> Result<Dnf, DnfCapExceeded> {
    match expr {
        None => Ok(Dnf::Spontaneous),
        Some(e) => {
            let mut sets = expand(e, cap)?;
            sort_canonical(&mut sets);
            Ok(Dnf::Disjuncts(sets))
        }
    }
}

fn expand(e: &GprExpr, cap: usize) -> Result<Vec<BTreeSet<GeneId>>, DnfCapExceeded> {
    match e {
        GprExpr::Gene(g) => Ok(vec![BTreeSet::from([g.clone()])]),
        GprExpr::Or(xs) => {
            let mut acc = Vec::new();
            for x in xs {
                acc.extend(expand(x, cap)?);
                acc = absorb(acc);
                if acc.len() > cap {
                    return Err(DnfCapExceeded { cap });
                }
            }
            Ok(acc)
        }
        GprExpr::And(xs) => {
            let mut acc = vec![BTreeSet::new()];
            for x in xs {
                let rhs = expand(x, cap)?;
                if acc.len().saturating_mul(rhs.len()) > cap.saturating_mul(cap).max(cap) {
                    return Err(DnfCapExceeded { cap });
                }
                let mut next = Vec::with_capacity(acc.len() * rhs.len());
                for a in &acc {
                    for b in &rhs {
                        next.push(a.union(b).cloned().collect());
                    }
                }
                acc = absorb(next);
                if acc.len() > cap {
                    return Err(DnfCapExceeded { cap });
                }
            }
            Ok(acc)
        }
    }
}

fn sort_canonical(sets: &mut [BTreeSet<GeneId>]) {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
}

/// Removes duplicates and every set that is a superset of another.
fn absorb(mut sets: Vec<BTreeSet<GeneId>>) -> Vec<BTreeSet<GeneId>> {
    sort_canonical(&mut sets);
    sets.dedup();
    let mut kept: Vec<BTreeSet<GeneId>> = Vec::with_capacity(sets.len());
    for s in sets {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept
}
