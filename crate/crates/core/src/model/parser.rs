//! Line-oriented model-file parser.
//!
//! ```text
//! file     := header line*            header := "network" NAME
//! line     := "species:" NAME+ | "params:" (NAME "=" REAL)+
//!           | "init:" (NAME "=" INT)+ | "clamp_nonneg" | reaction
//! reaction := "reaction:" side "->" side ";" "rate" "=" expr
//! side     := ε | term ("+" term)*     term := [INT] NAME
//! expr     := arithmetic over REAL, NAME, + - * / ^, ( ), ln(expr),
//!             mass_action(expr)
//! ```
//!
//! `#` starts a comment. `^` binds tighter than unary minus and is right
//! associative; `*` and `/` bind tighter than `+` and `-`.

use thiserror::Error;

use super::expr::Expr;
use super::network::{ParamSet, Reaction, ReactionNetwork};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unresolved identifier `{0}`")]
    Unresolved(String),
    #[error("duplicate species `{0}`")]
    DuplicateSpecies(String),
    #[error("duplicate parameter `{0}`")]
    DuplicateParam(String),
    #[error("`{0}` is declared both as a species and as a parameter")]
    NameClash(String),
    #[error("reaction has an all-zero state change")]
    ZeroZeta,
    #[error("missing `network NAME` header")]
    MissingHeader,
    #[error("model declares no reactions")]
    NoReactions,
    #[error("model declares no species")]
    NoSpecies,
    #[error("mass_action is only allowed in reaction rates")]
    MassActionOutsideReaction,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64, bool),
    Colon,
    Eq,
    Arrow,
    Semi,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(v, _) => format!("`{v}`"),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn lex(line: &str, line_no: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: String| ParseError {
        line: line_no,
        column: col,
        kind: ParseErrorKind::Syntax(msg),
    };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut integral = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integral = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse::<f64>()
                .map_err(|_| err(col, format!("invalid number `{text}`")))?;
            out.push(Spanned {
                tok: Tok::Num(value, integral),
                col,
            });
            continue;
        }
        let tok = match c {
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            ';' => Tok::Semi,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    i += 1;
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            other => return Err(err(col, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned { tok, col });
        i += 1;
    }
    Ok(out)
}

/// Name tables an expression is resolved against.
struct Scope<'a> {
    species: &'a [String],
    params: &'a [String],
    /// Reactant multiset of the enclosing reaction, if any.
    reactants: Option<&'a [(usize, u32)]>,
}

struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    /// Column reported for errors at end of line.
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Spanned], line: usize, end_col: usize) -> Self {
        Cursor {
            toks,
            pos: 0,
            line,
            end_col,
        }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: self.col(),
            kind,
        }
    }

    fn syntax(&self, expected: &str) -> ParseError {
        let found = self
            .peek()
            .map_or_else(|| "end of line".to_string(), Tok::describe);
        self.error(ParseErrorKind::Syntax(format!("expected {expected}, found {found}")))
    }

    fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok((s.clone(), col))
            }
            _ => Err(self.syntax(what)),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.syntax("end of line"))
        }
    }

    fn expr(&mut self, scope: &Scope<'_>) -> Result<Expr, ParseError> {
        let mut lhs = self.term(scope)?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term(scope)?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term(scope)?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self, scope: &Scope<'_>) -> Result<Expr, ParseError> {
        let mut lhs = self.unary(scope)?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary(scope)?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary(scope)?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self, scope: &Scope<'_>) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary(scope)?)));
        }
        self.power(scope)
    }

    fn power(&mut self, scope: &Scope<'_>) -> Result<Expr, ParseError> {
        let base = self.atom(scope)?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exponent = self.unary(scope)?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self, scope: &Scope<'_>) -> Result<Expr, ParseError> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Num(v, _)) => {
                self.pos += 1;
                Ok(Expr::Const(*v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr(scope)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    return self.call(name, col, scope);
                }
                if let Some(i) = scope.species.iter().position(|s| s == name) {
                    Ok(Expr::Species(i))
                } else if let Some(p) = scope.params.iter().position(|s| s == name) {
                    Ok(Expr::Param(p))
                } else {
                    Err(ParseError {
                        line: self.line,
                        column: col,
                        kind: ParseErrorKind::Unresolved(name.clone()),
                    })
                }
            }
            _ => Err(self.syntax("expression")),
        }
    }

    fn call(&mut self, name: &str, col: usize, scope: &Scope<'_>) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let arg = self.expr(scope)?;
        self.expect(Tok::RParen, "`)`")?;
        match name {
            "ln" => Ok(Expr::Ln(Box::new(arg))),
            "mass_action" => match scope.reactants {
                Some(reactants) => Ok(Expr::MassAction {
                    coeff: Box::new(arg),
                    reactants: reactants.to_vec(),
                }),
                None => Err(ParseError {
                    line: self.line,
                    column: col,
                    kind: ParseErrorKind::MassActionOutsideReaction,
                }),
            },
            other => Err(ParseError {
                line: self.line,
                column: col,
                kind: ParseErrorKind::Syntax(format!("unknown function `{other}`")),
            }),
        }
    }

    /// `side := ε | [INT] NAME ("+" [INT] NAME)*`, stopping before `stop`.
    fn side(&mut self, species: &[String], stop: &Tok) -> Result<Vec<(usize, u32)>, ParseError> {
        let mut terms: Vec<(usize, u32)> = Vec::new();
        if self.peek() == Some(stop) {
            return Ok(terms);
        }
        loop {
            let mut coeff = 1u32;
            if let Some(Tok::Num(v, integral)) = self.peek() {
                if !*integral || *v < 0.0 || *v > u32::MAX as f64 {
                    return Err(self.syntax("integer stoichiometric coefficient"));
                }
                coeff = *v as u32;
                self.pos += 1;
            }
            let (name, col) = self.ident("species name")?;
            let idx = species.iter().position(|s| *s == name).ok_or(ParseError {
                line: self.line,
                column: col,
                kind: ParseErrorKind::Unresolved(name),
            })?;
            match terms.iter_mut().find(|(s, _)| *s == idx) {
                Some(entry) => entry.1 += coeff,
                None => terms.push((idx, coeff)),
            }
            if self.peek() == Some(&Tok::Plus) {
                self.pos += 1;
            } else {
                break;
            }
        }
        terms.retain(|&(_, n)| n > 0);
        Ok(terms)
    }
}

struct Line {
    number: usize,
    toks: Vec<Spanned>,
    end_col: usize,
}

impl Line {
    fn cursor(&self) -> Cursor<'_> {
        Cursor::new(&self.toks, self.number, self.end_col)
    }

    fn keyword(&self) -> Option<&str> {
        match self.toks.first().map(|s| &s.tok) {
            Some(Tok::Ident(s)) => Some(s.as_str()),
            _ => None,
        }
    }
}

/// Parses a model file into a resolved [`ReactionNetwork`].
pub fn parse_model(text: &str) -> Result<ReactionNetwork, ParseError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let toks = lex(raw, i + 1)?;
        if !toks.is_empty() {
            lines.push(Line {
                number: i + 1,
                toks,
                end_col: raw.chars().count() + 1,
            });
        }
    }

    let Some(first) = lines.first() else {
        return Err(ParseError {
            line: 1,
            column: 1,
            kind: ParseErrorKind::MissingHeader,
        });
    };
    if first.keyword() != Some("network") {
        return Err(ParseError {
            line: first.number,
            column: 1,
            kind: ParseErrorKind::MissingHeader,
        });
    }
    let mut cur = first.cursor();
    cur.bump();
    let (name, _) = cur.ident("network name")?;
    cur.finish()?;

    // Declarations first so that reactions may precede them in the file.
    let mut species: Vec<String> = Vec::new();
    let mut params: Vec<(String, f64)> = Vec::new();
    let mut clamp_nonneg = false;
    for line in &lines[1..] {
        let mut cur = line.cursor();
        match line.keyword() {
            Some("species") => {
                cur.bump();
                cur.expect(Tok::Colon, "`:`")?;
                if cur.at_end() {
                    return Err(cur.syntax("species name"));
                }
                while !cur.at_end() {
                    let (s, col) = cur.ident("species name")?;
                    if species.contains(&s) {
                        return Err(ParseError {
                            line: line.number,
                            column: col,
                            kind: ParseErrorKind::DuplicateSpecies(s),
                        });
                    }
                    species.push(s);
                }
            }
            Some("params") => {
                cur.bump();
                cur.expect(Tok::Colon, "`:`")?;
                if cur.at_end() {
                    return Err(cur.syntax("parameter name"));
                }
                while !cur.at_end() {
                    let (p, col) = cur.ident("parameter name")?;
                    cur.expect(Tok::Eq, "`=`")?;
                    let negative = if cur.peek() == Some(&Tok::Minus) {
                        cur.bump();
                        true
                    } else {
                        false
                    };
                    let value = match cur.peek() {
                        Some(Tok::Num(v, _)) => {
                            cur.bump();
                            if negative {
                                -*v
                            } else {
                                *v
                            }
                        }
                        _ => return Err(cur.syntax("real number")),
                    };
                    if params.iter().any(|(n, _)| *n == p) {
                        return Err(ParseError {
                            line: line.number,
                            column: col,
                            kind: ParseErrorKind::DuplicateParam(p),
                        });
                    }
                    params.push((p, value));
                }
            }
            Some("clamp_nonneg") => {
                cur.bump();
                cur.finish()?;
                clamp_nonneg = true;
            }
            Some("init") | Some("reaction") => {}
            _ => return Err(cur.syntax("`species:`, `params:`, `init:`, `reaction:` or `clamp_nonneg`")),
        }
    }
    if species.is_empty() {
        return Err(ParseError {
            line: first.number,
            column: 1,
            kind: ParseErrorKind::NoSpecies,
        });
    }
    if let Some((clash, _)) = params.iter().find(|(p, _)| species.contains(p)) {
        return Err(ParseError {
            line: first.number,
            column: 1,
            kind: ParseErrorKind::NameClash(clash.clone()),
        });
    }
    let param_names: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();

    let mut init = vec![0i64; species.len()];
    let mut reactions = Vec::new();
    for line in &lines[1..] {
        let mut cur = line.cursor();
        match line.keyword() {
            Some("init") => {
                cur.bump();
                cur.expect(Tok::Colon, "`:`")?;
                if cur.at_end() {
                    return Err(cur.syntax("species name"));
                }
                while !cur.at_end() {
                    let (s, col) = cur.ident("species name")?;
                    let idx = species.iter().position(|n| *n == s).ok_or(ParseError {
                        line: line.number,
                        column: col,
                        kind: ParseErrorKind::Unresolved(s),
                    })?;
                    cur.expect(Tok::Eq, "`=`")?;
                    match cur.peek() {
                        Some(Tok::Num(v, true)) => {
                            init[idx] = *v as i64;
                            cur.bump();
                        }
                        _ => return Err(cur.syntax("nonnegative integer")),
                    }
                }
            }
            Some("reaction") => {
                cur.bump();
                cur.expect(Tok::Colon, "`:`")?;
                let reactants = cur.side(&species, &Tok::Arrow)?;
                cur.expect(Tok::Arrow, "`->`")?;
                let products = cur.side(&species, &Tok::Semi)?;
                let semi_col = cur.col();
                cur.expect(Tok::Semi, "`;`")?;
                match cur.bump() {
                    Some(Tok::Ident(k)) if k == "rate" => {}
                    _ => {
                        cur.pos = cur.pos.saturating_sub(1);
                        return Err(cur.syntax("`rate`"));
                    }
                }
                cur.expect(Tok::Eq, "`=`")?;
                let scope = Scope {
                    species: &species,
                    params: &param_names,
                    reactants: Some(&reactants),
                };
                let rate = cur.expr(&scope)?;
                cur.finish()?;
                let mut zeta = vec![0i64; species.len()];
                for &(s, n) in &products {
                    zeta[s] += n as i64;
                }
                for &(s, n) in &reactants {
                    zeta[s] -= n as i64;
                }
                if zeta.iter().all(|&z| z == 0) {
                    return Err(ParseError {
                        line: line.number,
                        column: semi_col,
                        kind: ParseErrorKind::ZeroZeta,
                    });
                }
                reactions.push(Reaction {
                    reactants,
                    products,
                    zeta,
                    rate,
                });
            }
            _ => {}
        }
    }
    if reactions.is_empty() {
        return Err(ParseError {
            line: first.number,
            column: 1,
            kind: ParseErrorKind::NoReactions,
        });
    }

    Ok(ReactionNetwork {
        name,
        species,
        reactions,
        params: ParamSet::new(params),
        init,
        clamp_nonneg,
    })
}

pub(crate) fn parse_standalone_expr(
    text: &str,
    species: &[String],
    params: &[String],
) -> Result<Expr, ParseError> {
    let toks = lex(text, 1)?;
    let mut cur = Cursor::new(&toks, 1, text.chars().count() + 1);
    let scope = Scope {
        species,
        params,
        reactants: None,
    };
    let e = cur.expr(&scope)?;
    cur.finish()?;
    Ok(e)
}
