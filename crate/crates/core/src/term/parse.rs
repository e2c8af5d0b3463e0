//! S-expression reader for expressions.
//!
//! ```text
//! expr    := atom | var | "(" perm "." var ")" | "(lam" atom expr ")"
//!          | "(" funsym expr* ")" | "(letrec" binding* "in" expr ")"
//! binding := "(" atom expr ")" | envvar | "(" perm "." envvar ")"
//! perm    := "(" swap* ")"        swap := "(" atom atom ")"
//! ```
//!
//! Atoms start with a lowercase letter, variables with an uppercase one,
//! environment variables with `Env`. A bare numeral is a nullary function
//! symbol. Leading underscores are ignored for classification so that
//! generated names (`_X3`, `_a1`) read back.

use std::collections::BTreeMap;

use crate::error::TermError;
use crate::perm::Permutation;

use super::{Atom, Env, EnvItem, EnvVar, Expr, FunSym, Var};

/// Function symbol arities of one problem. Symbols that were not declared
/// are fixed at their first use.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArityTable {
    arities: BTreeMap<String, usize>,
}

impl ArityTable {
    pub fn new() -> ArityTable {
        ArityTable::default()
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> Result<(), TermError> {
        self.check(name, arity)
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }

    pub fn check(&mut self, name: &str, found: usize) -> Result<(), TermError> {
        match self.arities.get(name) {
            Some(&expected) if expected != found => {
                Err(TermError::Arity { name: name.to_string(), expected, found })
            }
            Some(_) => Ok(()),
            None => {
                self.arities.insert(name.to_string(), found);
                Ok(())
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.arities.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Dot,
    Sym(String),
    Ident(String),
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '-'
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, TermError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push((pos, Tok::Open));
            }
            ')' => {
                chars.next();
                out.push((pos, Tok::Close));
            }
            '.' => {
                chars.next();
                out.push((pos, Tok::Dot));
            }
            '=' | '#' => {
                chars.next();
                out.push((pos, Tok::Sym(c.to_string())));
            }
            '<' => {
                chars.next();
                match chars.next() {
                    Some((_, '=')) => out.push((pos, Tok::Sym("<=".into()))),
                    _ => return Err(TermError::Syntax { pos, msg: "expected `<=`".into() }),
                }
            }
            c if is_ident_char(c) => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                out.push((pos, Tok::Ident(s)));
            }
            _ => return Err(TermError::Syntax { pos, msg: format!("unexpected character `{c}`") }),
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NameKind {
    Atom,
    Var,
    Numeral,
}

fn classify(name: &str) -> Option<NameKind> {
    let c = name.trim_start_matches('_').chars().next()?;
    if c.is_lowercase() {
        Some(NameKind::Atom)
    } else if c.is_uppercase() {
        Some(NameKind::Var)
    } else if c.is_ascii_digit() {
        Some(NameKind::Numeral)
    } else {
        None
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "lam" | "letrec" | "in")
}

fn is_env_var(s: &str) -> bool {
    s.starts_with("Env")
}

/// Token-stream reader shared by the expression and problem-file parsers.
pub struct Parser<'t> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    arities: &'t mut ArityTable,
}

impl<'t> Parser<'t> {
    pub fn new(text: &str, arities: &'t mut ArityTable) -> Result<Parser<'t>, TermError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, end: text.len(), arities })
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TermError> {
        Err(TermError::Syntax { pos: self.here(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), TermError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn expect_end(&self) -> Result<(), TermError> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("trailing input")
        }
    }

    /// Consumes the symbol `=`, `<=` or `#`.
    pub fn expect_sym(&mut self, sym: &str) -> Result<(), TermError> {
        self.expect(Tok::Sym(sym.to_string()), &format!("`{sym}`"))
    }

    pub fn ident(&mut self) -> Result<String, TermError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                self.err("expected identifier")
            }
        }
    }

    pub fn atom(&mut self) -> Result<Atom, TermError> {
        let s = self.ident()?;
        if classify(&s) == Some(NameKind::Atom) && !is_keyword(&s) {
            Ok(Atom::new(&s))
        } else {
            self.pos -= 1;
            self.err(format!("`{s}` is not an atom"))
        }
    }

    pub fn var(&mut self) -> Result<Var, TermError> {
        let s = self.ident()?;
        if classify(&s) == Some(NameKind::Var) {
            Ok(Var::new(&s))
        } else {
            self.pos -= 1;
            self.err(format!("`{s}` is not a variable"))
        }
    }

    fn perm(&mut self) -> Result<Permutation, TermError> {
        self.expect(Tok::Open, "`(` opening a permutation")?;
        let mut swaps = Vec::new();
        while self.peek() == Some(&Tok::Open) {
            self.pos += 1;
            let a = self.atom()?;
            let b = self.atom()?;
            self.expect(Tok::Close, "`)` closing a swap")?;
            swaps.push((a, b));
        }
        self.expect(Tok::Close, "`)` closing a permutation")?;
        Ok(Permutation::from_swaps(swaps))
    }

    pub fn expr(&mut self) -> Result<Expr, TermError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                if is_keyword(&s) {
                    self.pos -= 1;
                    return self.err(format!("keyword `{s}` in expression position"));
                }
                match classify(&s) {
                    Some(NameKind::Atom) => Ok(Expr::Atom(Atom::new(&s))),
                    Some(NameKind::Var) => Ok(Expr::plain(Var::new(&s))),
                    Some(NameKind::Numeral) => {
                        self.arities.check(&s, 0)?;
                        Ok(Expr::App(FunSym::new(&s), Vec::new()))
                    }
                    None => {
                        self.pos -= 1;
                        self.err(format!("cannot classify `{s}`"))
                    }
                }
            }
            Some(Tok::Open) => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Open) => {
                        let p = self.perm()?;
                        self.expect(Tok::Dot, "`.` in suspension")?;
                        let v = self.var()?;
                        self.expect(Tok::Close, "`)` closing suspension")?;
                        Ok(Expr::Susp(p, v))
                    }
                    Some(Tok::Ident(s)) if s == "lam" => {
                        self.pos += 1;
                        let a = self.atom()?;
                        let body = self.expr()?;
                        self.expect(Tok::Close, "`)` closing lam")?;
                        Ok(Expr::Lam(a, Box::new(body)))
                    }
                    Some(Tok::Ident(s)) if s == "letrec" => {
                        self.pos += 1;
                        let start = self.here();
                        let mut items = Vec::new();
                        loop {
                            match self.peek() {
                                Some(Tok::Ident(s)) if s == "in" => {
                                    self.pos += 1;
                                    break;
                                }
                                None => return self.err("unterminated letrec"),
                                _ => items.push(self.binding()?),
                            }
                        }
                        let env = Env::new(items).map_err(|e| match e {
                            TermError::DuplicateBinder(a) => TermError::DuplicateBinder(a),
                            other => TermError::Syntax { pos: start, msg: other.to_string() },
                        })?;
                        let body = self.expr()?;
                        self.expect(Tok::Close, "`)` closing letrec")?;
                        Ok(Expr::Letrec(env, Box::new(body)))
                    }
                    Some(Tok::Ident(s)) if s == "in" => self.err("`in` outside letrec"),
                    Some(Tok::Ident(f)) => {
                        self.pos += 1;
                        let mut args = Vec::new();
                        while self.peek() != Some(&Tok::Close) {
                            if self.at_end() {
                                return self.err("unterminated application");
                            }
                            args.push(self.expr()?);
                        }
                        self.pos += 1;
                        self.arities.check(&f, args.len())?;
                        Ok(Expr::App(FunSym::new(&f), args))
                    }
                    _ => self.err("expected `lam`, `letrec`, a function symbol or a permutation"),
                }
            }
            _ => self.err("expected expression"),
        }
    }

    fn binding(&mut self) -> Result<EnvItem, TermError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if is_env_var(&s) => {
                self.pos += 1;
                Ok(EnvItem::Var(Permutation::identity(), EnvVar::new(&s)))
            }
            Some(Tok::Open) => {
                if self.peek2() == Some(&Tok::Open) {
                    self.pos += 1;
                    let p = self.perm()?;
                    self.expect(Tok::Dot, "`.` in environment suspension")?;
                    let s = self.ident()?;
                    if !is_env_var(&s) {
                        self.pos -= 1;
                        return self.err(format!("`{s}` is not an environment variable"));
                    }
                    self.expect(Tok::Close, "`)`")?;
                    Ok(EnvItem::Var(p, EnvVar::new(&s)))
                } else {
                    self.pos += 1;
                    let a = self.atom()?;
                    let e = self.expr()?;
                    self.expect(Tok::Close, "`)` closing binding")?;
                    Ok(EnvItem::Bind(a, e))
                }
            }
            _ => self.err("expected binding"),
        }
    }
}

/// Parses a single expression, checking arities against `arities` and
/// recording the arities of undeclared symbols.
pub fn parse_expression(text: &str, arities: &mut ArityTable) -> Result<Expr, TermError> {
    let mut p = Parser::new(text, arities)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Result<Expr, TermError> {
        parse_expression(s, &mut ArityTable::new())
    }

    #[test]
    fn lambda() {
        assert_eq!(p("(lam a a)").unwrap(), Expr::Lam(Atom::new("a"), Box::new(Expr::atom("a"))));
    }

    #[test]
    fn letrec_two_bindings() {
        let e = p("(letrec (a (pair a b)) (b (pair a b)) in b)").unwrap();
        let Expr::Letrec(env, body) = e else { panic!() };
        assert_eq!(env.len(), 2);
        assert_eq!(*body, Expr::atom("b"));
    }

    #[test]
    fn arity_mismatch() {
        let mut t = ArityTable::new();
        t.declare("f", 2).unwrap();
        assert!(matches!(parse_expression("(f a)", &mut t), Err(TermError::Arity { .. })));
        assert!(matches!(p("(f (f a b))"), Err(TermError::Arity { .. })));
    }

    #[test]
    fn duplicate_binders() {
        assert!(matches!(p("(letrec (a b) (a c) in a)"), Err(TermError::DuplicateBinder(_))));
    }

    #[test]
    fn suspension_and_env_vars() {
        let e = p("(letrec Env1 (((a b)) . Env2) (c X) in (((a b)(c d)) . Y))").unwrap();
        let Expr::Letrec(env, body) = e else { panic!() };
        assert_eq!(env.len(), 3);
        assert!(env.has_env_vars());
        assert!(matches!(*body, Expr::Susp(ref q, _) if q.domain_size() == 4));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match p("(lam a") {
            Err(TermError::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(p("(lam X a)").is_err());
        assert!(p("a b").is_err());
        assert!(p("()").is_err());
    }

    #[test]
    fn numerals_and_constants() {
        assert_eq!(p("0").unwrap(), Expr::constant("0"));
        assert_eq!(p("(True)").unwrap(), Expr::constant("True"));
        assert_eq!(p("(letrec in a)").unwrap(), Expr::Letrec(Env::empty(), Box::new(Expr::atom("a"))));
    }
}
