use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::PolicyError;

/// Monotone boolean formula over attribute names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AccessPolicy {
    Attr(String),
    And(Box<AccessPolicy>, Box<AccessPolicy>),
    Or(Box<AccessPolicy>, Box<AccessPolicy>),
}

impl AccessPolicy {
    pub fn attr(name: impl Into<String>) -> Self {
        AccessPolicy::Attr(name.into())
    }

    pub fn and(l: AccessPolicy, r: AccessPolicy) -> Self {
        AccessPolicy::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: AccessPolicy, r: AccessPolicy) -> Self {
        AccessPolicy::Or(Box::new(l), Box::new(r))
    }

    /// Left-nested conjunction of every name, in order.
    pub fn all_of<I, S>(names: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        names
            .into_iter()
            .map(|n| AccessPolicy::Attr(n.into()))
            .reduce(AccessPolicy::and)
    }

    pub fn satisfied_by<S: AsRef<str> + Ord>(&self, attrs: &BTreeSet<S>) -> bool {
        match self {
            AccessPolicy::Attr(a) => attrs.iter().any(|x| x.as_ref() == a),
            AccessPolicy::And(l, r) => l.satisfied_by(attrs) && r.satisfied_by(attrs),
            AccessPolicy::Or(l, r) => l.satisfied_by(attrs) || r.satisfied_by(attrs),
        }
    }

    /// Attribute leaves, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            AccessPolicy::Attr(a) => out.push(a),
            AccessPolicy::And(l, r) | AccessPolicy::Or(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    pub fn check_universe<S: AsRef<str>>(&self, universe: &[S]) -> Result<(), PolicyError> {
        for leaf in self.leaves() {
            if !universe.iter().any(|u| u.as_ref() == leaf) {
                return Err(PolicyError::UnknownAttribute(leaf.to_string()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for AccessPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccessPolicy::Attr(a) => f.write_str(a),
            AccessPolicy::And(l, r) => write!(f, "({l} and {r})"),
            AccessPolicy::Or(l, r) => write!(f, "({l} or {r})"),
        }
    }
}

impl FromStr for AccessPolicy {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, PolicyError> {
        let tokens = tokenize(s)?;
        if tokens.is_empty() {
            return Err(PolicyError::Empty);
        }
        let mut p = Parser { tokens, pos: 0 };
        let policy = p.or_expr()?;
        if p.pos != p.tokens.len() {
            return Err(PolicyError::Syntax(format!(
                "unexpected {:?} at token {}",
                p.tokens[p.pos], p.pos
            )));
        }
        Ok(policy)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    And,
    Or,
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Token>, PolicyError> {
    let mut tokens = Vec::new();
    let mut chars = s.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut end = i;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        end = j + c.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let word = &s[i..end];
                tokens.push(match word.to_ascii_lowercase().as_str() {
                    "and" => Token::And,
                    "or" => Token::Or,
                    _ => Token::Ident(word.to_string()),
                });
            }
            other => {
                return Err(PolicyError::Syntax(format!(
                    "unexpected character {other:?} at offset {i}"
                )))
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn or_expr(&mut self) -> Result<AccessPolicy, PolicyError> {
        let mut left = self.and_expr()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            let right = self.and_expr()?;
            left = AccessPolicy::or(left, right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<AccessPolicy, PolicyError> {
        let mut left = self.atom()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            let right = self.atom()?;
            left = AccessPolicy::and(left, right);
        }
        Ok(left)
    }

    fn atom(&mut self) -> Result<AccessPolicy, PolicyError> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok(AccessPolicy::Attr(name))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.or_expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(PolicyError::Syntax("missing ')'".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(t) => Err(PolicyError::Syntax(format!("unexpected {t:?}"))),
            None => Err(PolicyError::Syntax("unexpected end of policy".into())),
        }
    }
}
