//! Text format for properties: a schema header declaring signals followed by
//! one formula. The grammar is documented in `docs/formula-grammar.ebnf` at
//! the repository root.

use thiserror::Error;

use super::formula::{Comparator, Formula, Interval};
use super::schema::{is_identifier, SignalKind, SignalSchema, RESERVED_NAMES};

#[derive(Debug, Error, PartialEq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

/// A parsed property file: declared signals plus the formula text resolved
/// against them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub schema: SignalSchema,
    pub formula: Formula,
}

/// Parses a complete property file: `#` comments, `real <name>` /
/// `bool <name>` schema lines, then the formula (which may span lines).
pub fn parse_spec_file(text: &str) -> Result<SpecFile, ParseError> {
    let mut signals: Vec<(String, SignalKind)> = Vec::new();
    let mut formula_start: Option<usize> = None; // 0-based line index

    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        let kind = match head {
            "real" => Some(SignalKind::Real),
            "bool" => Some(SignalKind::Bool),
            _ => None,
        };
        match kind {
            Some(kind) if formula_start.is_none() => {
                let name = words.next().ok_or_else(|| {
                    ParseError::new(lineno + 1, 1, format!("`{head}` needs a signal name"))
                })?;
                if words.next().is_some() {
                    return Err(ParseError::new(
                        lineno + 1,
                        1,
                        "one signal declaration per line",
                    ));
                }
                if !is_identifier(name) {
                    return Err(ParseError::new(
                        lineno + 1,
                        1,
                        format!("`{name}` is not a valid signal name"),
                    ));
                }
                if RESERVED_NAMES.contains(&name) {
                    return Err(ParseError::new(
                        lineno + 1,
                        1,
                        format!("`{name}` is reserved by the formula grammar"),
                    ));
                }
                if signals.iter().any(|(n, _)| n == name) {
                    return Err(ParseError::new(
                        lineno + 1,
                        1,
                        format!("duplicate signal `{name}`"),
                    ));
                }
                signals.push((name.to_string(), kind));
            }
            _ => {
                formula_start.get_or_insert(lineno);
            }
        }
    }

    let start = formula_start
        .ok_or_else(|| ParseError::new(text.lines().count().max(1), 1, "no formula found"))?;
    let schema = SignalSchema::new(signals)
        .map_err(|e| ParseError::new(1, 1, e.to_string()))?;

    // Re-lex the formula region with true line numbers so errors point into
    // the original file.
    let formula_text: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i >= start { strip_comment(l) } else { "" })
        .collect::<Vec<_>>()
        .join("\n");
    let formula = parse_formula(&formula_text, &schema)?;
    Ok(SpecFile { schema, formula })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(idx) => &line[..idx],
        None => line,
    }
}

/// Parses a bare formula against an existing schema. Comments are *not*
/// stripped here; strings come from code or from `parse_spec_file`.
pub fn parse_formula(text: &str, schema: &SignalSchema) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, schema };
    let f = parser.formula()?;
    parser.expect_end()?;
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Inf,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Cmp(Comparator),
    Op(char), // G F U S H O X P
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let here = |msg: String| ParseError::new(lineno + 1, col, msg);
            match c {
                ' ' | '\t' | '\r' => {
                    i += 1;
                    continue;
                }
                '(' => out.push(Spanned { tok: Tok::LParen, line: lineno + 1, column: col }),
                ')' => out.push(Spanned { tok: Tok::RParen, line: lineno + 1, column: col }),
                '[' => out.push(Spanned { tok: Tok::LBracket, line: lineno + 1, column: col }),
                ']' => out.push(Spanned { tok: Tok::RBracket, line: lineno + 1, column: col }),
                ',' => out.push(Spanned { tok: Tok::Comma, line: lineno + 1, column: col }),
                '!' => out.push(Spanned { tok: Tok::Bang, line: lineno + 1, column: col }),
                '&' => {
                    // Accept && as well; a doubled operator is common muscle
                    // memory and unambiguous.
                    if chars.get(i + 1) == Some(&'&') {
                        i += 1;
                    }
                    out.push(Spanned { tok: Tok::Amp, line: lineno + 1, column: col });
                }
                '|' => {
                    if chars.get(i + 1) == Some(&'|') {
                        i += 1;
                    }
                    out.push(Spanned { tok: Tok::Pipe, line: lineno + 1, column: col });
                }
                '-' => {
                    if chars.get(i + 1) == Some(&'>') {
                        out.push(Spanned { tok: Tok::Arrow, line: lineno + 1, column: col });
                        i += 1;
                    } else if chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                        let (tok, len) = lex_number(&chars[i..])
                            .map_err(|m| here(m))?;
                        out.push(Spanned { tok, line: lineno + 1, column: col });
                        i += len - 1;
                    } else {
                        return Err(here("expected `->` or a number after `-`".into()));
                    }
                }
                '<' | '>' => {
                    let strict_eq = chars.get(i + 1) == Some(&'=');
                    let cmp = match (c, strict_eq) {
                        ('<', true) => Comparator::Le,
                        ('<', false) => Comparator::Lt,
                        ('>', true) => Comparator::Ge,
                        ('>', false) => Comparator::Gt,
                        _ => unreachable!(),
                    };
                    if strict_eq {
                        i += 1;
                    }
                    out.push(Spanned { tok: Tok::Cmp(cmp), line: lineno + 1, column: col });
                }
                c if c.is_ascii_digit() => {
                    let (tok, len) = lex_number(&chars[i..]).map_err(|m| here(m))?;
                    out.push(Spanned { tok, line: lineno + 1, column: col });
                    i += len - 1;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut j = i + 1;
                    while j < chars.len()
                        && (chars[j].is_ascii_alphanumeric() || chars[j] == '_')
                    {
                        j += 1;
                    }
                    let word: String = chars[i..j].iter().collect();
                    let tok = match word.as_str() {
                        "inf" => Tok::Inf,
                        "G" | "F" | "U" | "S" | "H" | "O" | "X" | "P" => {
                            Tok::Op(word.chars().next().unwrap())
                        }
                        _ => Tok::Ident(word),
                    };
                    out.push(Spanned { tok, line: lineno + 1, column: col });
                    i = j - 1;
                }
                other => return Err(here(format!("unexpected character `{other}`"))),
            }
            i += 1;
        }
    }
    Ok(out)
}

fn lex_number(chars: &[char]) -> Result<(Tok, usize), String> {
    let mut j = 0;
    if chars[0] == '-' {
        j = 1;
    }
    let digits = |j: &mut usize| {
        while *j < chars.len() && chars[*j].is_ascii_digit() {
            *j += 1;
        }
    };
    digits(&mut j);
    if j < chars.len() && chars[j] == '.' {
        j += 1;
        let before = j;
        digits(&mut j);
        if j == before {
            return Err("expected digits after decimal point".into());
        }
    }
    if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
        j += 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        let before = j;
        digits(&mut j);
        if j == before {
            return Err("expected digits in exponent".into());
        }
    }
    let text: String = chars[..j].iter().collect();
    let value: f64 = text.parse().map_err(|_| format!("bad number `{text}`"))?;
    Ok((Tok::Number(value), j))
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    schema: &'a SignalSchema,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.tokens.get(self.pos).or_else(|| self.tokens.last()) {
            Some(s) => (s.line, s.column),
            None => (1, 1),
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError::new(line, column, msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    // formula := or ( "->" formula )?      (right-associative)
    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_expr()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.formula()?;
            Ok(lhs.implies(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_expr(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.and_expr()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until_expr()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.until_expr()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    // Left-associative binary temporal tier: a U[i] b S[i] c = (a U b) S c.
    fn until_expr(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(c @ ('U' | 'S'))) => *c,
                _ => break,
            };
            self.pos += 1;
            let interval = self.optional_interval()?;
            let rhs = self.unary()?;
            lhs = match op {
                'U' => lhs.until(interval, rhs),
                _ => lhs.since(interval, rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(self.unary()?.negate())
            }
            Some(Tok::Op(c @ ('G' | 'F' | 'H' | 'O'))) => {
                let c = *c;
                self.pos += 1;
                let interval = self.optional_interval()?;
                let inner = self.unary()?;
                Ok(match c {
                    'G' => inner.always(interval),
                    'F' => inner.eventually(interval),
                    'H' => inner.historically(interval),
                    _ => inner.once(interval),
                })
            }
            Some(Tok::Op(c @ ('X' | 'P'))) => {
                let c = *c;
                self.pos += 1;
                let inner = self.unary()?;
                Ok(if c == 'X' { inner.next() } else { inner.prev() })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(_)) => self.atom_from_ident(),
            Some(Tok::Number(_)) => self.atom_from_number(),
            Some(other) => Err(self.err(format!("expected a formula, found {other:?}"))),
            None => Err(self.err("expected a formula, found end of input")),
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        match self.tokens.get(self.pos) {
            Some(Spanned { tok: Tok::Ident(name), line, column }) => {
                let out = (name.clone(), *line, *column);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.err("expected a signal name")),
        }
    }

    fn resolve(&self, name: &str, line: usize, column: usize) -> Result<usize, ParseError> {
        self.schema.index_of(name).ok_or_else(|| {
            ParseError::new(line, column, format!("unknown signal `{name}`"))
        })
    }

    // IDENT | IDENT cmp NUMBER
    fn atom_from_ident(&mut self) -> Result<Formula, ParseError> {
        let (name, line, column) = self.ident()?;
        let index = self.resolve(&name, line, column)?;
        match self.peek() {
            Some(Tok::Cmp(cmp)) => {
                let cmp = *cmp;
                self.require_real(&name, index, line, column)?;
                self.pos += 1;
                let bound = self.number("a constant on the right of the comparison")?;
                Ok(Formula::cmp(&name, index, cmp, bound))
            }
            _ => {
                if self.schema.kind(index) != SignalKind::Bool {
                    return Err(ParseError::new(
                        line,
                        column,
                        format!("real signal `{name}` cannot stand alone; compare it to a constant"),
                    ));
                }
                Ok(Formula::prop(&name, index))
            }
        }
    }

    // NUMBER cmp IDENT, flipped into canonical IDENT-on-the-left form.
    fn atom_from_number(&mut self) -> Result<Formula, ParseError> {
        let bound = self.number("a number")?;
        let cmp = match self.peek() {
            Some(Tok::Cmp(cmp)) => {
                let cmp = *cmp;
                self.pos += 1;
                cmp
            }
            _ => return Err(self.err("expected a comparison after the constant")),
        };
        let (name, line, column) = self.ident()?;
        let index = self.resolve(&name, line, column)?;
        self.require_real(&name, index, line, column)?;
        let flipped = match cmp {
            Comparator::Lt => Comparator::Gt,
            Comparator::Le => Comparator::Ge,
            Comparator::Gt => Comparator::Lt,
            Comparator::Ge => Comparator::Le,
        };
        Ok(Formula::cmp(&name, index, flipped, bound))
    }

    fn require_real(
        &self,
        name: &str,
        index: usize,
        line: usize,
        column: usize,
    ) -> Result<(), ParseError> {
        if self.schema.kind(index) != SignalKind::Real {
            return Err(ParseError::new(
                line,
                column,
                format!("boolean signal `{name}` cannot be compared to a constant"),
            ));
        }
        Ok(())
    }

    fn number(&mut self, what: &str) -> Result<f64, ParseError> {
        match self.peek() {
            Some(Tok::Number(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn optional_interval(&mut self) -> Result<Interval, ParseError> {
        if self.peek() != Some(&Tok::LBracket) {
            return Ok(Interval::unbounded());
        }
        let (line, column) = self.here();
        self.pos += 1;
        let lo = self.bound()?;
        self.expect(Tok::Comma, "`,` between interval bounds")?;
        let hi = self.bound()?;
        self.expect(Tok::RBracket, "`]`")?;
        Interval::new(lo, hi).map_err(|e| ParseError::new(line, column, e.to_string()))
    }

    fn bound(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(Tok::Number(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Inf) => {
                self.pos += 1;
                Ok(f64::INFINITY)
            }
            _ => Err(self.err("expected an interval bound (number or `inf`)")),
        }
    }
}
