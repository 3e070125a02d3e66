//! Signature bookkeeping for the double-null structure equations.
//!
//! s(∇₃ψ) = s(ψ) + 1, s(∇₄ψ) = s(ψ) − 1, angular operators and the Hodge
//! dual leave s unchanged, and s is additive over products. The corpus also
//! carries the tensor rank of every equation so that a mis-encoded term is
//! reported as a corpus bug rather than as a signature failure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CORPUS: &str = include_str!("../../data/signature_corpus.txt");

/// (name, signature, rank).
const SYMBOLS: &[(&str, i32, usize)] = &[
    ("trchi", -1, 0),
    ("hchi", -1, 2),
    ("chi", -1, 2),
    ("om", -1, 0),
    ("eta", 0, 1),
    ("etab", 0, 1),
    ("zeta", 0, 1),
    ("trchib", 1, 0),
    ("hchib", 1, 2),
    ("chib", 1, 2),
    ("omb", 1, 0),
    ("alpha", -2, 2),
    ("beta", -1, 1),
    ("rho", 0, 0),
    ("sigma", 0, 0),
    ("rhoc", 0, 0),
    ("sigmac", 0, 0),
    ("betab", 1, 1),
    ("alphab", 2, 2),
    ("K", 0, 0),
    ("Om", 0, 0),
    ("eps", 0, 2),
    ("phi", 0, 1),
];

pub fn symbol_signature(name: &str) -> Option<i32> {
    SYMBOLS.iter().find(|s| s.0 == name).map(|s| s.1)
}

fn symbol(name: &str) -> Option<(i32, usize)> {
    SYMBOLS.iter().find(|s| s.0 == name).map(|s| (s.1, s.2))
}

/// One symbol occurrence with the frame and angular derivatives applied to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub symbol: String,
    pub n3: u32,
    pub n4: u32,
    pub angular: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureTerm {
    pub text: String,
    pub factors: Vec<Factor>,
    pub signature: i32,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equation {
    pub label: String,
    pub rank: usize,
    /// Left-hand terms first; the first of them fixes the expected signature.
    pub lhs: Vec<SignatureTerm>,
    pub rhs: Vec<SignatureTerm>,
}

impl Equation {
    pub fn expected(&self) -> i32 {
        self.lhs[0].signature
    }

    pub fn terms(&self) -> impl Iterator<Item = &SignatureTerm> {
        self.lhs.iter().chain(self.rhs.iter())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquationCheck {
    pub label: String,
    pub expected: i32,
    pub pass: bool,
    /// Terms whose signature differs from the expected one.
    pub offending: Vec<(String, i32)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignatureReport {
    pub equations: Vec<EquationCheck>,
}

impl SignatureReport {
    pub fn all_pass(&self) -> bool {
        self.equations.iter().all(|e| e.pass)
    }

    pub fn n_pass(&self) -> usize {
        self.equations.iter().filter(|e| e.pass).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Op(&'static str),
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if cs[i..].starts_with(&['(', 'x', ')']) {
            out.push(Tok::Op("(x)"));
            i += 3;
        } else if c == '(' {
            out.push(Tok::Open);
            i += 1;
        } else if c == ')' {
            out.push(Tok::Close);
            i += 1;
        } else if c == '.' || c == ':' || c == '^' {
            out.push(Tok::Op(match c {
                '.' => ".",
                ':' => ":",
                _ => "^",
            }));
            i += 1;
        } else if c.is_alphanumeric() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Word(cs[st..i].iter().collect()));
        } else {
            return Err(Error::Corpus(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

const PREFIX: &[&str] = &["n3", "n4", "grad", "div", "curl", "dox", "star"];

/// (signature, rank) of a parsed subexpression, with its factors.
struct Val {
    sig: i32,
    rank: usize,
    factors: Vec<Factor>,
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    text: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Corpus(format!("{msg} in term {:?}", self.text))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    // product := chain+
    fn product(&mut self) -> Result<Val> {
        let mut acc = self.chain()?;
        while matches!(self.peek(), Some(Tok::Word(_)) | Some(Tok::Open)) {
            let v = self.chain()?;
            acc.sig += v.sig;
            acc.rank += v.rank;
            acc.factors.extend(v.factors);
        }
        Ok(acc)
    }

    // chain := unary (binop unary)*
    fn chain(&mut self) -> Result<Val> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(op)) = self.peek().cloned() {
            self.pos += 1;
            let v = self.unary()?;
            let rank = match op {
                "." if acc.rank >= 1 && v.rank >= 1 => acc.rank + v.rank - 2,
                ":" | "^" if acc.rank == v.rank && acc.rank >= 1 => 0,
                "(x)" if acc.rank == 1 && v.rank == 1 => 2,
                _ => return Err(self.err(&format!("operator {op} on ranks {} and {}", acc.rank, v.rank))),
            };
            acc.sig += v.sig;
            acc.rank = rank;
            acc.factors.extend(v.factors);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Val> {
        match self.peek().cloned() {
            Some(Tok::Word(w)) if PREFIX.contains(&w.as_str()) => {
                self.pos += 1;
                let mut v = self.unary()?;
                let (ds, rank) = match w.as_str() {
                    "n3" => (1, Some(v.rank)),
                    "n4" => (-1, Some(v.rank)),
                    "grad" => (0, Some(v.rank + 1)),
                    "div" => (0, v.rank.checked_sub(1)),
                    "curl" => (0, (v.rank == 1).then_some(0)),
                    "dox" => (0, (v.rank == 1).then_some(2)),
                    _ => (0, Some(v.rank)),
                };
                v.rank = rank.ok_or_else(|| self.err(&format!("{w} applied to rank {}", v.rank)))?;
                v.sig += ds;
                for f in &mut v.factors {
                    match w.as_str() {
                        "n3" => f.n3 += 1,
                        "n4" => f.n4 += 1,
                        "star" => {}
                        _ => f.angular += 1,
                    }
                }
                Ok(v)
            }
            Some(Tok::Word(w)) => {
                self.pos += 1;
                let (sig, rank) = symbol(&w).ok_or_else(|| self.err(&format!("unknown symbol {w}")))?;
                Ok(Val { sig, rank, factors: vec![Factor { symbol: w, n3: 0, n4: 0, angular: 0 }] })
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let v = self.product()?;
                if self.peek() != Some(&Tok::Close) {
                    return Err(self.err("unbalanced parenthesis"));
                }
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err("expected a factor")),
        }
    }
}

pub fn parse_term(text: &str) -> Result<SignatureTerm> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks: &toks, pos: 0, text };
    let v = p.product()?;
    if p.pos != toks.len() {
        return Err(p.err("trailing tokens"));
    }
    Ok(SignatureTerm { text: text.trim().to_string(), factors: v.factors, signature: v.sig, rank: v.rank })
}

fn parse_side(label: &str, rank: usize, s: &str) -> Result<Vec<SignatureTerm>> {
    let mut out = Vec::new();
    for t in s.split(';') {
        let term = parse_term(t)?;
        if term.rank != rank {
            return Err(Error::Corpus(format!(
                "{label}: term {:?} has rank {}, equation has rank {rank}",
                term.text, term.rank
            )));
        }
        out.push(term);
    }
    Ok(out)
}

pub fn parse_equation(line: &str) -> Result<Equation> {
    let bad = || Error::Corpus(format!("malformed record {line:?}"));
    let (head, body) = line.split_once(':').ok_or_else(bad)?;
    let (label, rank) = head.trim().split_once('[').ok_or_else(bad)?;
    let rank: usize = rank.trim().trim_end_matches(']').trim().parse().map_err(|_| bad())?;
    let label = label.trim().to_string();
    let (l, r) = body.split_once('=').ok_or_else(bad)?;
    Ok(Equation { lhs: parse_side(&label, rank, l)?, rhs: parse_side(&label, rank, r)?, label, rank })
}

pub fn parse_corpus(text: &str) -> Result<Vec<Equation>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_equation)
        .collect()
}

pub fn check_equation(eq: &Equation) -> EquationCheck {
    let expected = eq.expected();
    let offending: Vec<(String, i32)> =
        eq.terms().filter(|t| t.signature != expected).map(|t| (t.text.clone(), t.signature)).collect();
    EquationCheck { label: eq.label.clone(), expected, pass: offending.is_empty(), offending }
}

pub fn signature_check(corpus: &[Equation]) -> SignatureReport {
    SignatureReport { equations: corpus.iter().map(check_equation).collect() }
}

pub fn builtin_corpus() -> Vec<Equation> {
    parse_corpus(CORPUS).expect("built-in corpus parses")
}

/// Replaces whole-word occurrences of `from` by `to` in the named record.
pub fn corrupt(corpus_text: &str, label: &str, from: &str, to: &str) -> String {
    corpus_text
        .lines()
        .map(|l| {
            if l.split_whitespace().next() == Some(label) {
                let (head, body) = l.split_once(':').unwrap_or((l, ""));
                let body: Vec<String> = tokenize_words(body).into_iter().map(|w| if w == from { to.to_string() } else { w }).collect();
                format!("{head}:{}", body.concat())
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

// splits into alternating word and non-word runs, preserving the text
fn tokenize_words(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut in_word = false;
    for c in s.chars() {
        let w = c.is_alphanumeric() || c == '_';
        if w != in_word && !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
        in_word = w;
        cur.push(c);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let s = |n| symbol_signature(n).unwrap();
        assert_eq!((s("hchi"), s("trchi"), s("om")), (-1, -1, -1));
        assert_eq!((s("eta"), s("etab"), s("zeta")), (0, 0, 0));
        assert_eq!((s("hchib"), s("trchib"), s("omb")), (1, 1, 1));
        assert_eq!((s("alpha"), s("beta"), s("rho"), s("sigma"), s("betab"), s("alphab")), (-2, -1, 0, 0, 1, 2));
    }

    #[test]
    fn derivative_rules() {
        assert_eq!(parse_term("n4 trchi").unwrap().signature, -2);
        assert_eq!(parse_term("trchi trchi").unwrap().signature, -2);
        assert_eq!(parse_term("n3 alpha").unwrap().signature, -1);
        let t = parse_term("star grad (hchi^hchib)").unwrap();
        assert_eq!((t.signature, t.rank), (0, 1));
        assert_eq!(t.factors.iter().map(|f| f.angular).collect::<Vec<_>>(), vec![1, 1]);
    }

    #[test]
    fn corpus_is_homogeneous() {
        let c = builtin_corpus();
        assert_eq!(c.len(), 35);
        let r = signature_check(&c);
        let bad: Vec<_> = r.equations.iter().filter(|e| !e.pass).collect();
        assert!(bad.is_empty(), "{bad:?}");
        let find = |l: &str| c.iter().find(|e| e.label == l).unwrap().expected();
        assert_eq!(find("4trchi"), -2);
        assert_eq!(find("3alpha"), -1);
    }

    #[test]
    fn corruption_is_detected() {
        let text = corrupt(CORPUS, "4beta", "om", "omb");
        assert_ne!(text, CORPUS);
        let r = signature_check(&parse_corpus(&text).unwrap());
        let e = r.equations.iter().find(|e| e.label == "4beta").unwrap();
        assert!(!e.pass);
        assert_eq!(e.offending, vec![("omb beta".to_string(), 0)]);
        assert_eq!(r.n_pass(), 34);
    }

    #[test]
    fn rank_mismatch_is_a_corpus_error() {
        assert!(matches!(parse_equation("x [1] : n4 eta = rho"), Err(Error::Corpus(_))));
        assert!(matches!(parse_term("hchi:eta"), Err(Error::Corpus(_))));
        assert!(matches!(parse_term("curl hchi"), Err(Error::Corpus(_))));
    }
}
