//! Reader for the clause syntax:
//!
//! ```text
//! % comment
//! :- dynamic animal/2.
//! animal(zebra, 3).
//! animal_exists(A, C) :- animal(A, C), C >= 1.
//! ```
//!
//! Comparison built-ins are written infix (`C >= 1`) or prefix
//! (`>=(C, 1)`). A bare `_` is an anonymous variable, renamed apart on read.

use std::iter::Peekable;
use std::str::CharIndices;

use super::error::LogicError;
use super::program::Program;
use super::term::{is_var_name, Clause, CmpOp, Goal, Number, Symbol, Term};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(String),
    Var(String),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    Comma,
    /// End-of-clause full stop.
    End,
    Neck,
    Slash,
    Op(String),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    src: &'a str,
    chars: Peekable<CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn error(pos: Pos, message: impl Into<String>) -> LogicError {
        LogicError::Syntax {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn number(&mut self, pos: Pos) -> Result<Tok, LogicError> {
        let start = self.offset();
        if self.peek() == Some('-') {
            self.bump();
        }
        let mut is_float = false;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') && matches!(self.peek2(), Some(c) if c.is_ascii_digit()) {
            is_float = true;
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mut look = self.chars.clone();
            look.next();
            let mut next = look.next().map(|(_, c)| c);
            if matches!(next, Some('+' | '-')) {
                next = look.next().map(|(_, c)| c);
            }
            if matches!(next, Some(c) if c.is_ascii_digit()) {
                is_float = true;
                self.bump();
                if matches!(self.peek(), Some('+' | '-')) {
                    self.bump();
                }
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        let end = self.offset();
        let text = &self.src[start..end];
        if is_float {
            let value: f64 = text
                .parse()
                .map_err(|_| Self::error(pos, format!("invalid number `{text}`")))?;
            if !value.is_finite() {
                return Err(Self::error(pos, format!("number `{text}` is not finite")));
            }
            Ok(Tok::Float(value))
        } else {
            text.parse()
                .map(Tok::Int)
                .map_err(|_| Self::error(pos, format!("integer `{text}` out of range")))
        }
    }

    fn next_token(&mut self) -> Result<(Tok, Pos), LogicError> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok((Tok::Eof, pos));
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::LParen
            }
            ')' => {
                self.bump();
                Tok::RParen
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '/' => {
                self.bump();
                Tok::Slash
            }
            '.' => {
                self.bump();
                match self.peek() {
                    None | Some('%') => Tok::End,
                    Some(c) if c.is_whitespace() => Tok::End,
                    Some(c) => return Err(Self::error(pos, format!("unexpected `.{c}`"))),
                }
            }
            '-' if matches!(self.peek2(), Some(d) if d.is_ascii_digit()) => self.number(pos)?,
            c if c.is_ascii_digit() => self.number(pos)?,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.offset();
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.bump();
                }
                let text = self.src[start..self.offset()].to_string();
                if c.is_ascii_lowercase() {
                    Tok::Atom(text)
                } else {
                    Tok::Var(text)
                }
            }
            ':' | '=' | '<' | '>' => {
                let start = self.offset();
                while matches!(self.peek(), Some(':' | '=' | '<' | '>' | '-')) {
                    self.bump();
                }
                let text = &self.src[start..self.offset()];
                match text {
                    ":-" => Tok::Neck,
                    ">=" | ">" | "=<" | "<" | "=:=" | "=" => Tok::Op(text.to_string()),
                    _ => return Err(Self::error(pos, format!("unknown operator `{text}`"))),
                }
            }
            other => {
                return Err(Self::error(pos, format!("unexpected character `{other}`")));
            }
        };
        Ok((tok, pos))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: Pos,
    anon: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, LogicError> {
        let mut lexer = Lexer::new(src);
        let (tok, pos) = lexer.next_token()?;
        Ok(Parser {
            lexer,
            tok,
            pos,
            anon: 0,
        })
    }

    fn advance(&mut self) -> Result<Tok, LogicError> {
        let (tok, pos) = self.lexer.next_token()?;
        self.pos = pos;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn error(&self, message: impl Into<String>) -> LogicError {
        Lexer::error(self.pos, message)
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Atom(a) => format!("`{a}`"),
            Tok::Var(v) => format!("`{v}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Float(f) => format!("`{f:?}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "`.`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Op(op) => format!("`{op}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), LogicError> {
        if self.tok == want {
            self.advance()?;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {}", Self::describe(&self.tok))))
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, LogicError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.term()?];
        while self.tok == Tok::Comma {
            self.advance()?;
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        match self.tok.clone() {
            Tok::Atom(name) => {
                self.advance()?;
                if self.tok == Tok::LParen {
                    Ok(Term::Compound(Symbol::from(name), self.args()?))
                } else {
                    Ok(Term::Atom(Symbol::from(name)))
                }
            }
            Tok::Var(name) => {
                self.advance()?;
                if name == "_" {
                    self.anon += 1;
                    Ok(Term::Var(Symbol::from(format!("_{}", self.anon))))
                } else {
                    debug_assert!(is_var_name(&name));
                    Ok(Term::Var(Symbol::from(name)))
                }
            }
            Tok::Int(i) => {
                self.advance()?;
                Ok(Term::Number(Number::Int(i)))
            }
            Tok::Float(f) => {
                self.advance()?;
                Ok(Term::Number(Number::Float(f)))
            }
            other => Err(self.error(format!("expected a term, found {}", Self::describe(&other)))),
        }
    }

    fn builtin(op: &str, lhs: Term, rhs: Term) -> Goal {
        match CmpOp::from_symbol(op) {
            Some(cmp) => Goal::Compare(cmp, lhs, rhs),
            None => Goal::Unify(lhs, rhs),
        }
    }

    fn goal(&mut self) -> Result<Goal, LogicError> {
        if let Tok::Op(op) = self.tok.clone() {
            let pos = self.pos;
            self.advance()?;
            let args = self.args()?;
            if args.len() != 2 {
                return Err(LogicError::Arity {
                    op,
                    arity: args.len(),
                    line: pos.line,
                    column: pos.column,
                });
            }
            let mut it = args.into_iter();
            let (lhs, rhs) = (it.next().unwrap(), it.next().unwrap());
            return Ok(Self::builtin(&op, lhs, rhs));
        }
        let pos = self.pos;
        let lhs = self.term()?;
        if let Tok::Op(op) = self.tok.clone() {
            self.advance()?;
            let rhs = self.term()?;
            return Ok(Self::builtin(&op, lhs, rhs));
        }
        match lhs {
            Term::Compound(..) => Ok(Goal::Call(lhs)),
            other => Err(Lexer::error(pos, format!("`{other}` is not a callable goal"))),
        }
    }

    fn body(&mut self) -> Result<Vec<Goal>, LogicError> {
        let mut goals = vec![self.goal()?];
        while self.tok == Tok::Comma {
            self.advance()?;
            goals.push(self.goal()?);
        }
        Ok(goals)
    }

    fn directive(&mut self, program: &mut Program) -> Result<(), LogicError> {
        match self.advance()? {
            Tok::Atom(a) if a == "dynamic" => {}
            other => {
                return Err(self.error(format!(
                    "only `dynamic` directives are supported, found {}",
                    Self::describe(&other)
                )))
            }
        }
        loop {
            let Tok::Atom(name) = self.tok.clone() else {
                return Err(self.error("expected a predicate name"));
            };
            self.advance()?;
            self.expect(Tok::Slash, "`/`")?;
            let Tok::Int(arity) = self.tok else {
                return Err(self.error("expected an arity"));
            };
            if arity < 1 {
                return Err(self.error("arity must be at least 1"));
            }
            self.advance()?;
            program.declare(&name, arity as usize);
            if self.tok == Tok::Comma {
                self.advance()?;
            } else {
                break;
            }
        }
        self.expect(Tok::End, "`.`")
    }

    fn clause(&mut self) -> Result<Clause, LogicError> {
        let pos = self.pos;
        let head = self.term()?;
        if !matches!(head, Term::Compound(..)) {
            return Err(Lexer::error(pos, format!("clause head `{head}` must be a compound term")));
        }
        let body = if self.tok == Tok::Neck {
            self.advance()?;
            self.body()?
        } else {
            Vec::new()
        };
        self.expect(Tok::End, "`.` at end of clause")?;
        Ok(Clause { head, body })
    }

    fn program(&mut self) -> Result<Program, LogicError> {
        let mut program = Program::new();
        while self.tok != Tok::Eof {
            if self.tok == Tok::Neck {
                self.advance()?;
                self.directive(&mut program)?;
                continue;
            }
            self.anon = 0;
            let clause = self.clause()?;
            program.push(clause)?;
        }
        Ok(program)
    }
}

/// Parses a program text into clauses in source order.
pub fn parse_program(text: &str) -> Result<Program, LogicError> {
    Parser::new(text)?.program()
}

/// Parses a comma-separated goal list such as `animal(A, C), C >= 1`.
/// A trailing full stop is optional.
pub fn parse_query(text: &str) -> Result<Vec<Goal>, LogicError> {
    let mut parser = Parser::new(text)?;
    let goals = parser.body()?;
    if parser.tok == Tok::End {
        parser.advance()?;
    }
    if parser.tok != Tok::Eof {
        return Err(parser.error(format!("unexpected {}", Parser::describe(&parser.tok))));
    }
    Ok(goals)
}

/// Parses a single term.
pub fn parse_term(text: &str) -> Result<Term, LogicError> {
    let mut parser = Parser::new(text)?;
    let term = parser.term()?;
    if parser.tok != Tok::Eof {
        return Err(parser.error(format!("unexpected {}", Parser::describe(&parser.tok))));
    }
    Ok(term)
}
