//! Recursive-descent parser for the formula language, with sort
//! resolution.
//!
//! Connectives accept Unicode or ASCII spellings (`¬`/`!`, `∧`/`&`,
//! `∨`/`|`, `→`/`->`, `↔`/`<->`). Binders fix the sorts of bound
//! variables. Free names are sorted by, in order:
//!
//! 1. the naming convention — `a`/`b`/`c` arbitrary, `p`/`q`/`r`
//!    particular, `s`/`t`/`u` state, for bare family letters, letters with
//!    digit suffixes (`p1`, `t07`), and element labels containing `@`;
//! 2. the positions the name occurs in (`Val` slots fix all three sorts;
//!    equality propagates sorts between its sides);
//! 3. otherwise the particular sort, the sort of values.
//!
//! A name that ends up with two different sorts is a sort error.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Formula, Sort, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("sort error: {message}")]
    Sort { message: String },
}

fn syntax(pos: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        pos,
        message: message.into(),
    }
}

fn sort_error(message: impl Into<String>) -> ParseError {
    ParseError::Sort {
        message: message.into(),
    }
}

/// Parses and sort-checks a formula.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, index: 0 };
    let raw = parser.formula()?;
    if let Some((token, pos)) = parser.peek() {
        return Err(syntax(*pos, format!("unexpected trailing {}", token.describe())));
    }
    resolve_sorts(&raw)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    EqSign,
    NotOp,
    AndOp,
    OrOp,
    ImpliesOp,
    IffOp,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
            Token::Dot => "`.`".into(),
            Token::Colon => "`:`".into(),
            Token::EqSign => "`=`".into(),
            Token::NotOp => "negation".into(),
            Token::AndOp => "conjunction".into(),
            Token::OrOp => "disjunction".into(),
            Token::ImpliesOp => "implication".into(),
            Token::IffOp => "biconditional".into(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '@'
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                tokens.push((Token::LParen, pos));
            }
            ')' => {
                chars.next();
                tokens.push((Token::RParen, pos));
            }
            ',' => {
                chars.next();
                tokens.push((Token::Comma, pos));
            }
            '.' => {
                chars.next();
                tokens.push((Token::Dot, pos));
            }
            ':' => {
                chars.next();
                tokens.push((Token::Colon, pos));
            }
            '=' => {
                chars.next();
                tokens.push((Token::EqSign, pos));
            }
            '¬' | '!' => {
                chars.next();
                tokens.push((Token::NotOp, pos));
            }
            '∧' | '&' => {
                chars.next();
                tokens.push((Token::AndOp, pos));
            }
            '∨' | '|' => {
                chars.next();
                tokens.push((Token::OrOp, pos));
            }
            '→' => {
                chars.next();
                tokens.push((Token::ImpliesOp, pos));
            }
            '↔' => {
                chars.next();
                tokens.push((Token::IffOp, pos));
            }
            '-' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, '>')) => {
                        chars.next();
                        tokens.push((Token::ImpliesOp, pos));
                    }
                    _ => return Err(syntax(pos, "expected `->`")),
                }
            }
            '<' => {
                chars.next();
                let dash = matches!(chars.peek(), Some(&(_, '-')));
                if dash {
                    chars.next();
                    if matches!(chars.peek(), Some(&(_, '>'))) {
                        chars.next();
                        tokens.push((Token::IffOp, pos));
                        continue;
                    }
                }
                return Err(syntax(pos, "expected `<->`"));
            }
            c if is_ident_char(c) => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if is_ident_char(c) {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push((Token::Ident(name), pos));
            }
            other => return Err(syntax(pos, format!("unexpected character {other:?}"))),
        }
    }
    Ok(tokens)
}

// raw tree: terms are bare names; sorts are resolved in a second pass
#[derive(Debug, Clone)]
enum Raw {
    Val(RawTerm, RawTerm, RawTerm),
    Eq(RawTerm, RawTerm),
    IsSort(Sort, RawTerm),
    Not(Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Implies(Box<Raw>, Box<Raw>),
    Iff(Box<Raw>, Box<Raw>),
    Forall(String, Sort, Box<Raw>),
    Exists(String, Sort, Box<Raw>),
}

#[derive(Debug, Clone)]
struct RawTerm {
    name: String,
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    index: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.index)
    }

    fn next(&mut self) -> Option<(Token, usize)> {
        let token = self.tokens.get(self.index).cloned();
        self.index += 1;
        token
    }

    fn end_pos(&self) -> usize {
        self.tokens.last().map_or(0, |(_, p)| p + 1)
    }

    fn expect(&mut self, expected: Token) -> Result<usize, ParseError> {
        match self.next() {
            Some((token, pos)) if token == expected => Ok(pos),
            Some((token, pos)) => Err(syntax(
                pos,
                format!("expected {}, found {}", expected.describe(), token.describe()),
            )),
            None => Err(syntax(
                self.end_pos(),
                format!("expected {}, found end of input", expected.describe()),
            )),
        }
    }

    fn formula(&mut self) -> Result<Raw, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Raw, ParseError> {
        let mut left = self.implies()?;
        while matches!(self.peek(), Some((Token::IffOp, _))) {
            self.next();
            let right = self.implies()?;
            left = Raw::Iff(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn implies(&mut self) -> Result<Raw, ParseError> {
        let left = self.or()?;
        if matches!(self.peek(), Some((Token::ImpliesOp, _))) {
            self.next();
            let right = self.implies()?; // right-associative
            return Ok(Raw::Implies(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Raw, ParseError> {
        let mut left = self.and()?;
        while matches!(self.peek(), Some((Token::OrOp, _))) {
            self.next();
            let right = self.and()?;
            left = Raw::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Raw, ParseError> {
        let mut left = self.unary()?;
        while matches!(self.peek(), Some((Token::AndOp, _))) {
            self.next();
            let right = self.unary()?;
            left = Raw::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Raw, ParseError> {
        match self.peek() {
            Some((Token::NotOp, _)) => {
                self.next();
                Ok(Raw::Not(Box::new(self.unary()?)))
            }
            Some((Token::Ident(name), _)) if name == "forall" || name == "exists" => {
                self.quantifier()
            }
            _ => self.atom(),
        }
    }

    fn quantifier(&mut self) -> Result<Raw, ParseError> {
        let (token, pos) = self.next().expect("peeked");
        let universal = matches!(&token, Token::Ident(name) if name == "forall");
        let variable = match self.next() {
            Some((Token::Ident(name), _)) => name,
            Some((token, pos)) => {
                return Err(syntax(
                    pos,
                    format!("expected a variable after the quantifier, found {}", token.describe()),
                ))
            }
            None => return Err(syntax(pos, "expected a variable after the quantifier")),
        };
        self.expect(Token::Colon)?;
        let sort = match self.next() {
            Some((Token::Ident(name), pos)) => {
                let mut letters = name.chars();
                match (letters.next().and_then(Sort::from_letter), letters.next()) {
                    (Some(sort), None) => sort,
                    _ => return Err(syntax(pos, format!("unknown sort `{name}` (use P, A, or S)"))),
                }
            }
            Some((token, pos)) => {
                return Err(syntax(pos, format!("expected a sort, found {}", token.describe())))
            }
            None => return Err(syntax(self.end_pos(), "expected a sort")),
        };
        self.expect(Token::Dot)?;
        let body = self.formula()?; // the body extends as far right as possible
        Ok(if universal {
            Raw::Forall(variable, sort, Box::new(body))
        } else {
            Raw::Exists(variable, sort, Box::new(body))
        })
    }

    fn atom(&mut self) -> Result<Raw, ParseError> {
        match self.next() {
            Some((Token::LParen, _)) => {
                let inner = self.formula()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some((Token::Ident(name), _)) => {
                if name == "Val" {
                    self.expect(Token::LParen)?;
                    let a = self.term()?;
                    self.expect(Token::Comma)?;
                    let s = self.term()?;
                    self.expect(Token::Comma)?;
                    let p = self.term()?;
                    self.expect(Token::RParen)?;
                    return Ok(Raw::Val(a, s, p));
                }
                if let Some(sort) = single_letter_sort(&name) {
                    if matches!(self.peek(), Some((Token::LParen, _))) {
                        self.next();
                        let t = self.term()?;
                        self.expect(Token::RParen)?;
                        return Ok(Raw::IsSort(sort, t));
                    }
                }
                // otherwise the identifier is the left side of an equality
                let left = RawTerm { name };
                self.expect(Token::EqSign)?;
                let right = self.term()?;
                Ok(Raw::Eq(left, right))
            }
            Some((token, pos)) => Err(syntax(
                pos,
                format!("expected a formula, found {}", token.describe()),
            )),
            None => Err(syntax(self.end_pos(), "expected a formula, found end of input")),
        }
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        match self.next() {
            Some((Token::Ident(name), _)) => Ok(RawTerm { name }),
            Some((token, pos)) => Err(syntax(
                pos,
                format!("expected a term, found {}", token.describe()),
            )),
            None => Err(syntax(self.end_pos(), "expected a term, found end of input")),
        }
    }
}

fn single_letter_sort(name: &str) -> Option<Sort> {
    let mut chars = name.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Sort::from_letter(c),
        _ => None,
    }
}

/// The sort a free name carries by convention, if any: family letter plus
/// an all-digit suffix, or an element label containing `@`.
fn conventional_sort(name: &str) -> Option<Sort> {
    let mut chars = name.chars();
    let family = match chars.next()? {
        'a' | 'b' | 'c' => Sort::Arbitrary,
        'p' | 'q' | 'r' => Sort::Particular,
        's' | 't' | 'u' => Sort::State,
        _ => return None,
    };
    let rest: &str = &name[1..];
    if rest.is_empty() || rest.chars().all(|c| c.is_ascii_digit()) || name.contains('@') {
        Some(family)
    } else {
        None
    }
}

// sort resolution over the raw tree

#[derive(Debug, Clone, PartialEq, Eq)]
enum LinkEnd {
    Fixed(Sort),
    Free(String),
}

#[derive(Default)]
struct SortState {
    free: BTreeMap<String, Option<Sort>>,
    links: Vec<(LinkEnd, LinkEnd)>,
}

impl SortState {
    fn constrain(&mut self, name: &str, sort: Sort, where_: &str) -> Result<(), ParseError> {
        let entry = self
            .free
            .entry(name.to_string())
            .or_insert_with(|| conventional_sort(name));
        match entry {
            Some(existing) if *existing != sort => Err(sort_error(format!(
                "`{name}` has sort {existing} but is used at sort {sort} {where_}"
            ))),
            Some(_) => Ok(()),
            None => {
                *entry = Some(sort);
                Ok(())
            }
        }
    }

    fn mention(&mut self, name: &str) {
        self.free
            .entry(name.to_string())
            .or_insert_with(|| conventional_sort(name));
    }
}

fn bound_sort(bound: &[(String, Sort)], name: &str) -> Option<Sort> {
    bound
        .iter()
        .rev()
        .find(|(bound_name, _)| bound_name == name)
        .map(|(_, sort)| *sort)
}

fn collect_constraints(
    raw: &Raw,
    bound: &mut Vec<(String, Sort)>,
    state: &mut SortState,
) -> Result<(), ParseError> {
    let slot = |term: &RawTerm,
                    expected: Sort,
                    where_: &str,
                    bound: &Vec<(String, Sort)>,
                    state: &mut SortState|
     -> Result<(), ParseError> {
        match bound_sort(bound, &term.name) {
            Some(sort) if sort != expected => Err(sort_error(format!(
                "bound variable `{}` has sort {sort} but is used at sort {expected} {where_}",
                term.name
            ))),
            Some(_) => Ok(()),
            None => state.constrain(&term.name, expected, where_),
        }
    };
    match raw {
        Raw::Val(a, s, p) => {
            slot(a, Sort::Arbitrary, "as the first argument of Val", bound, state)?;
            slot(s, Sort::State, "as the second argument of Val", bound, state)?;
            slot(p, Sort::Particular, "as the third argument of Val", bound, state)?;
        }
        Raw::Eq(l, r) => {
            let end = |term: &RawTerm, bound: &Vec<(String, Sort)>, state: &mut SortState| {
                match bound_sort(bound, &term.name) {
                    Some(sort) => LinkEnd::Fixed(sort),
                    None => {
                        state.mention(&term.name);
                        LinkEnd::Free(term.name.clone())
                    }
                }
            };
            let left = end(l, bound, state);
            let right = end(r, bound, state);
            state.links.push((left, right));
        }
        Raw::IsSort(_, t) => {
            if bound_sort(bound, &t.name).is_none() {
                state.mention(&t.name);
            }
        }
        Raw::Not(inner) => collect_constraints(inner, bound, state)?,
        Raw::And(l, r) | Raw::Or(l, r) | Raw::Implies(l, r) | Raw::Iff(l, r) => {
            collect_constraints(l, bound, state)?;
            collect_constraints(r, bound, state)?;
        }
        Raw::Forall(v, sort, body) | Raw::Exists(v, sort, body) => {
            bound.push((v.clone(), *sort));
            collect_constraints(body, bound, state)?;
            bound.pop();
        }
    }
    Ok(())
}

fn settle_links(state: &mut SortState) -> Result<(), ParseError> {
    loop {
        let mut changed = false;
        for (left, right) in state.links.clone() {
            let sort_of = |end: &LinkEnd, state: &SortState| match end {
                LinkEnd::Fixed(sort) => Some(*sort),
                LinkEnd::Free(name) => state.free.get(name).copied().flatten(),
            };
            let (ls, rs) = (sort_of(&left, state), sort_of(&right, state));
            match (ls, rs) {
                (Some(a), Some(b)) if a != b => {
                    return Err(sort_error(format!(
                        "equality between different sorts ({a} and {b})"
                    )))
                }
                (Some(sort), None) => {
                    if let LinkEnd::Free(name) = &right {
                        state.free.insert(name.clone(), Some(sort));
                        changed = true;
                    }
                }
                (None, Some(sort)) => {
                    if let LinkEnd::Free(name) = &left {
                        state.free.insert(name.clone(), Some(sort));
                        changed = true;
                    }
                }
                _ => {}
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

fn resolve_sorts(raw: &Raw) -> Result<Formula, ParseError> {
    let mut state = SortState::default();
    let mut bound = Vec::new();
    collect_constraints(raw, &mut bound, &mut state)?;
    settle_links(&mut state)?;
    // names free of any convention or positional constraint denote values
    for sort in state.free.values_mut() {
        sort.get_or_insert(Sort::Particular);
    }
    settle_links(&mut state)?;
    let mut bound = Vec::new();
    Ok(rebuild(raw, &mut bound, &state))
}

fn rebuild(raw: &Raw, bound: &mut Vec<(String, Sort)>, state: &SortState) -> Formula {
    let term = |t: &RawTerm, bound: &Vec<(String, Sort)>| -> Term {
        let sort = bound_sort(bound, &t.name)
            .or_else(|| state.free.get(&t.name).copied().flatten())
            .expect("all names resolved");
        Term::new(t.name.clone(), sort)
    };
    match raw {
        Raw::Val(a, s, p) => Formula::Val(term(a, bound), term(s, bound), term(p, bound)),
        Raw::Eq(l, r) => Formula::Eq(term(l, bound), term(r, bound)),
        Raw::IsSort(sort, t) => Formula::IsSort(*sort, term(t, bound)),
        Raw::Not(inner) => Formula::Not(Box::new(rebuild(inner, bound, state))),
        Raw::And(l, r) => Formula::And(
            Box::new(rebuild(l, bound, state)),
            Box::new(rebuild(r, bound, state)),
        ),
        Raw::Or(l, r) => Formula::Or(
            Box::new(rebuild(l, bound, state)),
            Box::new(rebuild(r, bound, state)),
        ),
        Raw::Implies(l, r) => Formula::Implies(
            Box::new(rebuild(l, bound, state)),
            Box::new(rebuild(r, bound, state)),
        ),
        Raw::Iff(l, r) => Formula::Iff(
            Box::new(rebuild(l, bound, state)),
            Box::new(rebuild(r, bound, state)),
        ),
        Raw::Forall(v, sort, body) => {
            bound.push((v.clone(), *sort));
            let body = rebuild(body, bound, state);
            bound.pop();
            Formula::Forall(v.clone(), *sort, Box::new(body))
        }
        Raw::Exists(v, sort, body) => {
            bound.push((v.clone(), *sort));
            let body = rebuild(body, bound, state);
            bound.pop();
            Formula::Exists(v.clone(), *sort, Box::new(body))
        }
    }
}
