//! S-expression serialization of terms.
//!
//! Variables print as `(v <index>)`, applications as
//! `(<symbol-name> <child>...)`. Symbol names are `med<k>` for odd medians,
//! `mnk:<n>:<k>` for order statistics and `oracle:<name>:<arity>` for oracle
//! references. `parse_term(print_term(t))` returns the identical canonical
//! node.

use super::{make_application, make_variable, Node, Symbol, Term};
use crate::error::{Error, Result};

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    // explicit stack: shared DAGs print as trees and can nest deeply
    enum Item<'a> {
        Term(&'a Term),
        Text(&'static str),
    }
    let mut stack = vec![Item::Term(t)];
    while let Some(item) = stack.pop() {
        match item {
            Item::Text(s) => out.push_str(s),
            Item::Term(t) => match t.node() {
                Node::Variable(i) => {
                    out.push_str("(v ");
                    out.push_str(&i.to_string());
                    out.push(')');
                }
                Node::Application(symbol, children) => {
                    out.push('(');
                    out.push_str(&symbol.name());
                    stack.push(Item::Text(")"));
                    for c in children.iter().rev() {
                        stack.push(Item::Term(c));
                        stack.push(Item::Text(" "));
                    }
                }
            },
        }
    }
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Open(usize),
    Close(usize),
    Atom(usize, &'a str),
}

fn tokenize(input: &str) -> Result<Vec<Token<'_>>> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                tokens.push(Token::Open(i));
                i += 1;
            }
            b')' => {
                tokens.push(Token::Close(i));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                {
                    i += 1;
                }
                // atoms are ASCII-delimited, so the slice stays on char
                // boundaries only if the input is ASCII; reject otherwise
                let atom = input.get(start..i).ok_or(Error::Parse {
                    offset: start,
                    message: "non-ASCII atom".into(),
                })?;
                if !atom.is_ascii() {
                    return Err(Error::Parse {
                        offset: start,
                        message: "non-ASCII atom".into(),
                    });
                }
                tokens.push(Token::Atom(start, atom));
            }
        }
    }
    Ok(tokens)
}

fn parse_symbol(name: &str, offset: usize) -> Result<Symbol> {
    let err = |message: String| Error::Parse { offset, message };
    if let Some(digits) = name.strip_prefix("med") {
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            let arity: usize = digits
                .parse()
                .map_err(|_| err(format!("arity out of range in `{name}`")))?;
            return Symbol::median(arity)
                .map_err(|_| err(format!("median arity must be odd in `{name}`")));
        }
    }
    if let Some(rest) = name.strip_prefix("mnk:") {
        let mut parts = rest.splitn(2, ':');
        let n = parts.next().unwrap_or("");
        let k = parts
            .next()
            .ok_or_else(|| err(format!("malformed `{name}`")))?;
        let arity: usize = n
            .parse()
            .map_err(|_| err(format!("bad arity in `{name}`")))?;
        let rank: usize = k
            .parse()
            .map_err(|_| err(format!("bad rank in `{name}`")))?;
        return Symbol::order_statistic(arity, rank)
            .map_err(|_| err(format!("rank out of range in `{name}`")));
    }
    if let Some(rest) = name.strip_prefix("oracle:") {
        let mut parts = rest.rsplitn(2, ':');
        let arity_part = parts.next().unwrap_or("");
        let oracle_name = parts
            .next()
            .ok_or_else(|| err(format!("malformed `{name}`")))?;
        let arity: usize = arity_part
            .parse()
            .map_err(|_| err(format!("bad arity in `{name}`")))?;
        return Symbol::oracle(oracle_name, arity)
            .map_err(|_| err(format!("bad oracle name in `{name}`")));
    }
    Err(err(format!("unknown symbol `{name}`")))
}

enum Frame {
    Variable {
        offset: usize,
        index: Option<usize>,
    },
    Application {
        offset: usize,
        symbol: Symbol,
        children: Vec<Term>,
    },
}

pub fn parse_term(input: &str) -> Result<Term> {
    let tokens = tokenize(input)?;
    let mut stack: Vec<Frame> = Vec::new();
    let mut result: Option<Term> = None;
    let mut iter = tokens.into_iter().peekable();
    while let Some(token) = iter.next() {
        if result.is_some() {
            let offset = match token {
                Token::Open(o) | Token::Close(o) | Token::Atom(o, _) => o,
            };
            return Err(Error::Parse {
                offset,
                message: "trailing input after term".into(),
            });
        }
        match token {
            Token::Open(offset) => match iter.next() {
                Some(Token::Atom(_, "v")) => {
                    stack.push(Frame::Variable {
                        offset,
                        index: None,
                    });
                }
                Some(Token::Atom(atom_offset, name)) => {
                    stack.push(Frame::Application {
                        offset,
                        symbol: parse_symbol(name, atom_offset)?,
                        children: Vec::new(),
                    });
                }
                Some(Token::Open(o)) | Some(Token::Close(o)) => {
                    return Err(Error::Parse {
                        offset: o,
                        message: "expected symbol name after `(`".into(),
                    })
                }
                None => {
                    return Err(Error::Parse {
                        offset,
                        message: "unclosed `(`".into(),
                    })
                }
            },
            Token::Atom(offset, text) => match stack.last_mut() {
                Some(Frame::Variable { index, .. }) => {
                    if index.is_some() {
                        return Err(Error::Parse {
                            offset,
                            message: "variable takes a single index".into(),
                        });
                    }
                    let i: usize = text.parse().map_err(|_| Error::Parse {
                        offset,
                        message: format!("bad variable index `{text}`"),
                    })?;
                    *index = Some(i);
                }
                _ => {
                    return Err(Error::Parse {
                        offset,
                        message: format!("unexpected atom `{text}`"),
                    })
                }
            },
            Token::Close(offset) => {
                let frame = stack.pop().ok_or(Error::Parse {
                    offset,
                    message: "unmatched `)`".into(),
                })?;
                let term = match frame {
                    Frame::Variable { offset, index } => {
                        let i = index.ok_or(Error::Parse {
                            offset,
                            message: "variable without index".into(),
                        })?;
                        make_variable(i)
                    }
                    Frame::Application {
                        offset,
                        symbol,
                        children,
                    } => make_application(symbol, children).map_err(|e| Error::Parse {
                        offset,
                        message: e.to_string(),
                    })?,
                };
                match stack.last_mut() {
                    Some(Frame::Application { children, .. }) => children.push(term),
                    Some(Frame::Variable { .. }) => {
                        return Err(Error::Parse {
                            offset,
                            message: "variable takes an index, not a term".into(),
                        })
                    }
                    None => result = Some(term),
                }
            }
        }
    }
    if let Some(frame) = stack.last() {
        let offset = match frame {
            Frame::Variable { offset, .. } | Frame::Application { offset, .. } => *offset,
        };
        return Err(Error::Parse {
            offset,
            message: "unclosed `(`".into(),
        });
    }
    result.ok_or(Error::Parse {
        offset: 0,
        message: "empty input".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests_support::arb_small_term;
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    #[test]
    fn prints_canonical_forms() {
        let t = make_application(
            Symbol::median(3).unwrap(),
            vec![make_variable(0), make_variable(0), make_variable(1)],
        )
        .unwrap();
        assert_eq!(print_term(&t), "(med3 (v 0) (v 0) (v 1))");
        let t = make_application(
            Symbol::order_statistic(4, 2).unwrap(),
            (0..4).map(make_variable).collect(),
        )
        .unwrap();
        assert_eq!(print_term(&t), "(mnk:4:2 (v 0) (v 1) (v 2) (v 3))");
        let t = make_application(
            Symbol::oracle("maj", 2).unwrap(),
            vec![make_variable(1), make_variable(0)],
        )
        .unwrap();
        assert_eq!(print_term(&t), "(oracle:maj:2 (v 1) (v 0))");
    }

    #[test]
    fn parses_with_arbitrary_whitespace() {
        let t = parse_term("  (med3\n(v 0)\t(v 1) (v 2)\n)  ").unwrap();
        assert_eq!(print_term(&t), "(med3 (v 0) (v 1) (v 2))");
    }

    #[test]
    fn round_trip_returns_identical_node() {
        let t = make_application(
            Symbol::median(3).unwrap(),
            vec![make_variable(0), make_variable(1), make_variable(2)],
        )
        .unwrap();
        let back = parse_term(&print_term(&t)).unwrap();
        assert_eq!(back.id(), t.id());
    }

    fn parse_err(input: &str) -> (usize, String) {
        match parse_term(input) {
            Err(Error::Parse { offset, message }) => (offset, message),
            other => panic!("expected parse error for `{input}`, got {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert_eq!(parse_err("").0, 0);
        parse_err("(med3 (v 0) (v 1)");
        parse_err("(med3 (v 0) (v 1) (v 2)) junk");
        parse_err("(med3 (v 0) (v 1) (v 2)) (v 0)");
        parse_err("(med4 (v 0) (v 1) (v 2) (v 3))"); // even median
        parse_err("(med3 (v 0) (v 1))"); // arity mismatch
        parse_err("(mnk:3:4 (v 0) (v 1) (v 2))"); // rank out of range
        parse_err("(mnk:3 (v 0) (v 1) (v 2))"); // missing rank
        parse_err("(v )");
        parse_err("(v x)");
        parse_err("(v 0 1)");
        parse_err("(v (v 0))");
        parse_err("(frob (v 0))"); // unknown symbol
        parse_err(")");
        parse_err("((v 0))");
        parse_err("(med3 (v 0) (v 1) (v \u{2603}))"); // non-ASCII atom
        parse_err("(oracle:a:b:0 (v 0))"); // bad trailing arity
    }

    #[test]
    fn error_offsets_point_at_the_problem() {
        let (offset, _) = parse_err("(med3 (v 0) (v 1) (v 2)) junk");
        assert_eq!(offset, 25);
        let (offset, message) = parse_err("(med3 (v 0) (v 1))");
        assert_eq!(offset, 0);
        assert!(message.contains("expects 3"), "{message}");
    }

    #[test]
    fn oracle_names_may_contain_dashes_and_digits() {
        let t = parse_term("(oracle:maj-v2:1 (v 0))").unwrap();
        assert_eq!(print_term(&t), "(oracle:maj-v2:1 (v 0))");
    }

    proptest! {
        #[test]
        fn round_trip_any_term(t in arb_small_term()) {
            let text = print_term(&t);
            let back = parse_term(&text).unwrap();
            prop_assert_eq!(back.id(), t.id());
            prop_assert_eq!(print_term(&back), text);
        }
    }
}
