//! ASCII concrete syntax for formulas and the matching pretty-printer.
//!
//! Precedence, tightest first: postfix `?`; prefix operators (`~ next wnext
//! prev wprev once sofar <> [] sfin fin dm bm sdiamond`); `U` (right
//! associative); `&`; `|`; `->` (right associative); `<->`. `&`, `|` and
//! `<->` associate to the left.

use std::fmt;

use thiserror::Error;

use crate::formula::{reserved_index, Formula};

/// Byte range into the parsed text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at {span}: {message}")]
pub struct SyntaxError {
    pub span: SourceSpan,
    pub message: String,
}

impl SyntaxError {
    /// Renders the input line with a caret marker under the span.
    pub fn render(&self, input: &str) -> String {
        let width = (self.span.end - self.span.start).max(1);
        format!(
            "{}\n{}\n{}{}",
            self,
            input,
            " ".repeat(input[..self.span.start].chars().count()),
            "^".repeat(width)
        )
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept `r<digits>` identifiers. Only used for reading back internal
    /// dumps; user input must never name dependent variables.
    pub allow_reserved: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Kw(Keyword),
    Tilde,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Diamond,
    BoxOp,
    Until,
    Question,
    LParen,
    RParen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Keyword {
    True,
    False,
    Next,
    WNext,
    Prev,
    WPrev,
    Once,
    SoFar,
    First,
    More,
    Empty,
    Skip,
    Finite,
    Inf,
    Sfin,
    Fin,
    Dm,
    Bm,
    SDiamond,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Keyword> {
        use Keyword::*;
        Some(match s {
            "true" => True,
            "false" => False,
            "next" => Next,
            "wnext" => WNext,
            "prev" => Prev,
            "wprev" => WPrev,
            "once" => Once,
            "sofar" => SoFar,
            "first" => First,
            "more" => More,
            "empty" => Empty,
            "skip" => Skip,
            "finite" => Finite,
            "inf" => Inf,
            "sfin" => Sfin,
            "fin" => Fin,
            "dm" => Dm,
            "bm" => Bm,
            "sdiamond" => SDiamond,
            _ => return None,
        })
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Kw(k) => write!(f, "keyword `{}`", format!("{k:?}").to_lowercase()),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::DArrow => f.write_str("`<->`"),
            Tok::Diamond => f.write_str("`<>`"),
            Tok::BoxOp => f.write_str("`[]`"),
            Tok::Until => f.write_str("`U`"),
            Tok::Question => f.write_str("`?`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::DArrow, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("<>") {
            (Tok::Diamond, 2)
        } else if rest.starts_with("[]") {
            (Tok::BoxOp, 2)
        } else if c == b'~' {
            (Tok::Tilde, 1)
        } else if c == b'&' {
            (Tok::Amp, 1)
        } else if c == b'|' {
            (Tok::Bar, 1)
        } else if c == b'?' {
            (Tok::Question, 1)
        } else if c == b'(' {
            (Tok::LParen, 1)
        } else if c == b')' {
            (Tok::RParen, 1)
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let len = rest
                .bytes()
                .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
                .count();
            let word = &rest[..len];
            let tok = if word == "U" {
                Tok::Until
            } else if let Some(k) = Keyword::from_ident(word) {
                Tok::Kw(k)
            } else {
                Tok::Ident(word.to_string())
            };
            (tok, len)
        } else {
            let ch = rest.chars().next().unwrap();
            return Err(SyntaxError {
                span: SourceSpan::new(start, start + ch.len_utf8()),
                message: format!("unexpected character `{ch}`"),
            });
        };
        out.push((tok, SourceSpan::new(start, start + len)));
        i += len;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    len: usize,
    open_parens: Vec<SourceSpan>,
    opts: ParseOptions,
    _text: &'a str,
}

/// Binary operators by binding strength (higher binds tighter).
fn binary_info(tok: &Tok) -> Option<(u8, bool)> {
    // (precedence, right associative)
    match tok {
        Tok::DArrow => Some((1, false)),
        Tok::Arrow => Some((2, true)),
        Tok::Bar => Some((3, false)),
        Tok::Amp => Some((4, false)),
        Tok::Until => Some((5, true)),
        _ => None,
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<(Tok, SourceSpan)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        match self.toks.get(self.pos) {
            Some((tok, span)) => SyntaxError {
                span: *span,
                message: format!("expected {expected}, found {tok}"),
            },
            None => {
                // Point at the innermost unclosed parenthesis when there is one.
                let span = self
                    .open_parens
                    .last()
                    .copied()
                    .unwrap_or(SourceSpan::new(self.len, self.len));
                SyntaxError {
                    span,
                    message: format!("expected {expected}, found end of input"),
                }
            }
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some((prec, right)) = self.peek().and_then(binary_info) {
            if prec < min_prec {
                break;
            }
            let (tok, _) = self.bump().unwrap();
            let rhs = self.expr(if right { prec } else { prec + 1 })?;
            lhs = match tok {
                Tok::DArrow => Formula::equiv(lhs, rhs),
                Tok::Arrow => Formula::implies(lhs, rhs),
                Tok::Bar => Formula::or(lhs, rhs),
                Tok::Amp => Formula::and(lhs, rhs),
                Tok::Until => Formula::until(lhs, rhs),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        use Keyword as K;
        let ctor: fn(Formula) -> Formula = match self.peek() {
            Some(Tok::Tilde) => Formula::not,
            Some(Tok::Diamond) => Formula::diamond,
            Some(Tok::BoxOp) => Formula::always,
            Some(Tok::Kw(k)) => match k {
                K::Next => Formula::next,
                K::WNext => Formula::wnext,
                K::Prev => Formula::prev,
                K::WPrev => Formula::wprev,
                K::Once => Formula::once,
                K::SoFar => Formula::so_far,
                K::Sfin => Formula::sfin,
                K::Fin => Formula::fin,
                K::Dm => Formula::dm,
                K::Bm => Formula::bm,
                K::SDiamond => Formula::sdiamond,
                _ => return self.postfix(),
            },
            _ => return self.postfix(),
        };
        self.bump();
        Ok(ctor(self.unary()?))
    }

    fn postfix(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.primary()?;
        while self.peek() == Some(&Tok::Question) {
            self.bump();
            f = Formula::test(f);
        }
        Ok(f)
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        use Keyword as K;
        let Some((tok, span)) = self.toks.get(self.pos).cloned() else {
            return Err(self.unexpected("a formula"));
        };
        let f = match tok {
            Tok::Ident(name) => {
                if !self.opts.allow_reserved && reserved_index(&name).is_some() {
                    return Err(SyntaxError {
                        span,
                        message: format!("`{name}` is reserved for generated dependent variables"),
                    });
                }
                Formula::Var(name)
            }
            Tok::Kw(K::True) => Formula::True,
            Tok::Kw(K::False) => Formula::False,
            Tok::Kw(K::First) => Formula::First,
            Tok::Kw(K::More) => Formula::More,
            Tok::Kw(K::Empty) => Formula::Empty,
            Tok::Kw(K::Skip) => Formula::Skip,
            Tok::Kw(K::Finite) => Formula::Finite,
            Tok::Kw(K::Inf) => Formula::Inf,
            Tok::LParen => {
                self.bump();
                self.open_parens.push(span);
                let inner = self.expr(0)?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.open_parens.pop();
                        self.bump();
                        return Ok(inner);
                    }
                    _ => return Err(self.unexpected("`)`")),
                }
            }
            _ => return Err(self.unexpected("a formula")),
        };
        self.bump();
        Ok(f)
    }
}

/// Parses user input. Reserved names `r<digits>` are rejected.
pub fn parse(text: &str) -> Result<Formula, SyntaxError> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, opts: ParseOptions) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        len: text.len(),
        open_parens: Vec::new(),
        opts,
        _text: text,
    };
    let f = p.expr(0)?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(f)
}

const PREC_UNARY: u8 = 6;
const PREC_POSTFIX: u8 = 7;
const PREC_ATOM: u8 = 8;

fn prec_of(f: &Formula) -> u8 {
    use Formula as F;
    match f {
        F::Equiv(..) => 1,
        F::Implies(..) => 2,
        F::Or(..) => 3,
        F::And(..) => 4,
        F::Until(..) => 5,
        F::Test(_) => PREC_POSTFIX,
        F::Var(_)
        | F::True
        | F::False
        | F::More
        | F::Empty
        | F::Skip
        | F::Finite
        | F::Inf
        | F::First => PREC_ATOM,
        _ => PREC_UNARY,
    }
}

/// Pretty-prints with the minimal parentheses needed for `parse` to
/// reproduce the same tree.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_child(f: &Formula, need_parens: bool, out: &mut String) {
    if need_parens {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    use Formula as F;
    let prefix = |kw: &str, a: &Formula, out: &mut String| {
        out.push_str(kw);
        write_child(a, prec_of(a) < PREC_UNARY, out);
    };
    match f {
        F::Var(v) => out.push_str(v),
        F::True => out.push_str("true"),
        F::False => out.push_str("false"),
        F::More => out.push_str("more"),
        F::Empty => out.push_str("empty"),
        F::Skip => out.push_str("skip"),
        F::Finite => out.push_str("finite"),
        F::Inf => out.push_str("inf"),
        F::First => out.push_str("first"),
        F::Not(a) => prefix("~", a, out),
        F::Next(a) => prefix("next ", a, out),
        F::WNext(a) => prefix("wnext ", a, out),
        F::Prev(a) => prefix("prev ", a, out),
        F::WPrev(a) => prefix("wprev ", a, out),
        F::Once(a) => prefix("once ", a, out),
        F::SoFar(a) => prefix("sofar ", a, out),
        F::Diamond(a) => prefix("<> ", a, out),
        F::Always(a) => prefix("[] ", a, out),
        F::SDiamond(a) => prefix("sdiamond ", a, out),
        F::Sfin(a) => prefix("sfin ", a, out),
        F::Fin(a) => prefix("fin ", a, out),
        F::Dm(a) => prefix("dm ", a, out),
        F::Bm(a) => prefix("bm ", a, out),
        F::Test(a) => {
            write_child(a, prec_of(a) < PREC_POSTFIX, out);
            out.push('?');
        }
        F::Or(a, b) | F::And(a, b) | F::Implies(a, b) | F::Equiv(a, b) | F::Until(a, b) => {
            let (op, right_assoc) = match f {
                F::Equiv(..) => (" <-> ", false),
                F::Implies(..) => (" -> ", true),
                F::Or(..) => (" | ", false),
                F::And(..) => (" & ", false),
                _ => (" U ", true),
            };
            let p = prec_of(f);
            let (lp, rp) = (prec_of(a), prec_of(b));
            let (left_parens, right_parens) = if right_assoc {
                (lp <= p, rp < p)
            } else {
                (lp < p, rp <= p)
            };
            write_child(a, left_parens, out);
            out.push_str(op);
            write_child(b, right_parens, out);
        }
    }
}
