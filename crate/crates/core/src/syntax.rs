//! Concrete syntax.
//!
//! ```text
//! formula ::= disj ('->' formula)?
//! disj    ::= conj ('\/' conj)*
//! conj    ::= atom ('/\' atom)*
//! atom    ::= ident | 'T' | 'F' | '(' formula ')' | ('mu' | 'nu') ident '.' formula
//! ```
//!
//! A binder extends as far right as possible, so `a /\ mu x. b \/ x` reads
//! as `a /\ (mu x. (b \/ x))`.

use crate::error::{Error, Result};
use crate::formula::{classify, Formula, Kind, Sym, VarClass};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Top,
    Bot,
    And,
    Or,
    Imp,
    LParen,
    RParen,
    Dot,
    Mu,
    Nu,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'.' => out.push((Tok::Dot, start)),
            b'/' if bytes.get(i + 1) == Some(&b'\\') => {
                i += 1;
                out.push((Tok::And, start))
            }
            b'\\' if bytes.get(i + 1) == Some(&b'/') => {
                i += 1;
                out.push((Tok::Or, start))
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                out.push((Tok::Imp, start))
            }
            c if c.is_ascii_alphabetic() => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..=i];
                out.push((
                    match word {
                        "T" => Tok::Top,
                        "F" => Tok::Bot,
                        "mu" => Tok::Mu,
                        "nu" => Tok::Nu,
                        _ => Tok::Ident(word.to_owned()),
                    },
                    start,
                ));
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character '{ch}'"),
                });
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disj()?;
        if *self.peek() == Tok::Imp {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conj()?];
        while *self.peek() == Tok::Or {
            self.bump();
            parts.push(self.conj()?);
        }
        Ok(Formula::or(parts))
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut parts = vec![self.atom()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.atom()?);
        }
        Ok(Formula::and(parts))
    }

    fn atom(&mut self) -> Result<Formula> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(name) => Ok(Formula::var(&name)),
            Tok::Top => Ok(Formula::top()),
            Tok::Bot => Ok(Formula::bot()),
            Tok::LParen => {
                let f = self.formula()?;
                if *self.peek() != Tok::RParen {
                    return self.fail("expected ')'");
                }
                self.bump();
                Ok(f)
            }
            tok @ (Tok::Mu | Tok::Nu) => {
                let var = match self.bump() {
                    Tok::Ident(name) => Sym::new(&name),
                    _ => {
                        self.at -= 1;
                        return self.fail("expected a variable after binder");
                    }
                };
                if *self.peek() != Tok::Dot {
                    return self.fail("expected '.'");
                }
                self.bump();
                let body = self.formula()?;
                let binder = if tok == Tok::Mu { "mu" } else { "nu" };
                if classify(&body, var) == VarClass::NonPositive {
                    return Err(Error::Parse {
                        pos,
                        msg: format!("{var} is not positive under {binder}"),
                    });
                }
                if tok == Tok::Mu {
                    Formula::mu(var, body)
                } else {
                    Formula::nu(var, body)
                }
            }
            Tok::End => Err(Error::Parse {
                pos,
                msg: "unexpected end of input".into(),
            }),
            other => Err(Error::Parse {
                pos,
                msg: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Parses and canonicalizes a formula; binders are alpha-renamed apart.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.fail("trailing input");
    }
    Ok(f.alpha_normalize())
}

/// Prints a formula; `parse(print(f)) == f` for alpha-normal `f`.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out);
    out
}

// Precedence levels: 0 = implication, 1 = disjunction, 2 = conjunction, 3 = atom.
fn level(f: &Formula) -> u8 {
    match f.kind() {
        Kind::Imp(..) => 0,
        Kind::Or(_) => 1,
        Kind::And(_) => 2,
        Kind::Mu(..) | Kind::Nu(..) => 0,
        _ => 3,
    }
}

fn child(f: &Formula, min: u8, out: &mut String) {
    let binder = matches!(f.kind(), Kind::Mu(..) | Kind::Nu(..));
    if level(f) < min || binder {
        out.push('(');
        write(f, out);
        out.push(')');
    } else {
        write(f, out);
    }
}

fn write(f: &Formula, out: &mut String) {
    match f.kind() {
        Kind::Var(s) => out.push_str(s.name()),
        Kind::Top => out.push('T'),
        Kind::Bot => out.push('F'),
        Kind::And(cs) | Kind::Or(cs) => {
            let (sep, min) = if matches!(f.kind(), Kind::And(_)) {
                (" /\\ ", 3)
            } else {
                (" \\/ ", 2)
            };
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                child(c, min, out);
            }
        }
        Kind::Imp(a, b) => {
            child(a, 1, out);
            out.push_str(" -> ");
            child(b, 0, out);
        }
        Kind::Mu(x, b) | Kind::Nu(x, b) => {
            out.push_str(if matches!(f.kind(), Kind::Mu(..)) {
                "mu "
            } else {
                "nu "
            });
            out.push_str(x.name());
            out.push_str(". (");
            write(b, out);
            out.push(')');
        }
    }
}
