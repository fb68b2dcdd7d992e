//! S-expression reader for PDDL text. Comments (`;` to end of line) are
//! dropped while lexing.

use super::error::{PddlError, Pos, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Atom { text: String, pos: Pos },
    List { items: Vec<SExpr>, pos: Pos },
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom { pos, .. } | SExpr::List { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Atom { .. } => None,
        }
    }

    /// Lower-cased head atom of a list, if any.
    pub fn head(&self) -> Option<String> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(SExpr::as_atom)
            .map(str::to_ascii_lowercase)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open(Pos),
    Close(Pos),
    Atom(String, Pos),
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars().peekable();
    let mut atom = String::new();
    let mut atom_pos = Pos { line: 1, col: 1 };

    fn flush(atom: &mut String, pos: Pos, tokens: &mut Vec<Token>) {
        if !atom.is_empty() {
            tokens.push(Token::Atom(std::mem::take(atom), pos));
        }
    }

    while let Some(c) = chars.next() {
        col += 1;
        let pos = Pos { line, col };
        match c {
            '\n' => {
                flush(&mut atom, atom_pos, &mut tokens);
                line += 1;
                col = 0;
            }
            ';' => {
                flush(&mut atom, atom_pos, &mut tokens);
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                flush(&mut atom, atom_pos, &mut tokens);
                tokens.push(Token::Open(pos));
            }
            ')' => {
                flush(&mut atom, atom_pos, &mut tokens);
                tokens.push(Token::Close(pos));
            }
            c if c.is_whitespace() => flush(&mut atom, atom_pos, &mut tokens),
            c if c.is_ascii_graphic() => {
                if atom.is_empty() {
                    atom_pos = pos;
                }
                atom.push(c);
            }
            other => {
                return Err(PddlError::Lex {
                    pos,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    flush(&mut atom, atom_pos, &mut tokens);
    Ok(tokens)
}

/// Reads exactly one top-level expression; trailing content is an error.
pub fn read_one(text: &str) -> Result<SExpr> {
    let tokens = lex(text)?;
    let mut iter = tokens.into_iter().peekable();
    let expr = match iter.next() {
        Some(tok) => read_expr(tok, &mut iter)?,
        None => {
            return Err(PddlError::Syntax {
                pos: Pos { line: 1, col: 1 },
                msg: "empty input".into(),
            })
        }
    };
    if let Some(tok) = iter.next() {
        let pos = match tok {
            Token::Open(p) | Token::Close(p) | Token::Atom(_, p) => p,
        };
        return Err(PddlError::Syntax {
            pos,
            msg: "unexpected content after top-level expression".into(),
        });
    }
    Ok(expr)
}

fn read_expr(
    first: Token,
    rest: &mut std::iter::Peekable<std::vec::IntoIter<Token>>,
) -> Result<SExpr> {
    match first {
        Token::Atom(text, pos) => Ok(SExpr::Atom { text, pos }),
        Token::Close(pos) => Err(PddlError::Syntax {
            pos,
            msg: "unbalanced `)`".into(),
        }),
        Token::Open(pos) => {
            let mut items = Vec::new();
            loop {
                match rest.next() {
                    Some(Token::Close(_)) => return Ok(SExpr::List { items, pos }),
                    Some(tok) => items.push(read_expr(tok, rest)?),
                    None => {
                        return Err(PddlError::Syntax {
                            pos,
                            msg: "unclosed `(`".into(),
                        })
                    }
                }
            }
        }
    }
}
