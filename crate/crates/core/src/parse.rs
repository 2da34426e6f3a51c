//! Text format for trees.
//!
//! ```text
//! tree := NAME | NAME '(' tree (',' tree)* ')'
//! NAME := [A-Za-z0-9_]+
//! ```
//!
//! Whitespace between tokens is ignored on input and never emitted on output
//! (see the `Display` impl of [`Tree`]). Dataset files hold one tree per line;
//! blank lines and lines starting with `#` are skipped.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tree::{is_name_byte, RankedAlphabet, Symbol, Tree, TreeLanguage, TreeMode};

/// Parses one tree. With an alphabet, every `(name, arity)` used must be
/// declared in it; without one, the alphabet is whatever the text uses.
pub fn parse_tree(text: &str, alphabet: Option<&RankedAlphabet>) -> Result<Tree> {
    Parser::new(text, alphabet).parse()
}

/// Serializes a tree in compact form; the inverse of [`parse_tree`].
pub fn serialize_tree(tree: &Tree) -> String {
    tree.to_string()
}

/// Parses a dataset file body: one tree per line, `#` comments and blank
/// lines ignored. Errors carry the 1-based line number.
pub fn parse_trees(text: &str, alphabet: Option<&RankedAlphabet>) -> Result<Vec<Tree>> {
    let mut trees = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        trees.push(parse_tree(line, alphabet).map_err(|e| e.at_line(i + 1))?);
    }
    Ok(trees)
}

/// Parses a dataset file body into a language. Duplicate members (after
/// canonicalization for `mode`) are an error.
pub fn parse_language(text: &str, mode: TreeMode) -> Result<TreeLanguage> {
    let mut language = TreeLanguage::new(mode);
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tree = parse_tree(line, None).map_err(|e| e.at_line(i + 1))?;
        language.push(tree).map_err(|e| e.at_line(i + 1))?;
    }
    Ok(language)
}

struct Frame {
    name: Arc<str>,
    offset: usize,
    children: Vec<Tree>,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    alphabet: Option<&'a RankedAlphabet>,
    names: HashMap<&'a str, Arc<str>>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, alphabet: Option<&'a RankedAlphabet>) -> Self {
        Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
            alphabet,
            names: HashMap::new(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn name(&mut self) -> Result<(Arc<str>, usize)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && is_name_byte(self.bytes[self.pos]) {
            self.pos += 1;
        }
        if start == self.pos {
            let message = match self.peek() {
                None => "unexpected end of input, expected a symbol name".to_string(),
                Some(b) => format!("expected a symbol name, found `{}`", b as char),
            };
            return Err(Error::syntax(start, message));
        }
        let name = &self.text[start..self.pos];
        let interned = self
            .names
            .entry(name)
            .or_insert_with(|| Arc::from(name))
            .clone();
        Ok((interned, start))
    }

    fn make(&self, name: Arc<str>, offset: usize, children: Vec<Tree>) -> Result<Tree> {
        let arity = children.len();
        if let Some(alphabet) = self.alphabet {
            if !alphabet.contains_pair(&name, arity) {
                return Err(Error::Arity {
                    name: name.to_string(),
                    arity,
                    offset,
                });
            }
        }
        Ok(Tree::from_valid(Symbol::from_parts(name, arity), children))
    }

    // Iterative so nesting depth is bounded by memory, not the call stack.
    fn parse(mut self) -> Result<Tree> {
        let mut stack: Vec<Frame> = Vec::new();
        'tree: loop {
            let (name, offset) = self.name()?;
            self.skip_ws();
            if self.peek() == Some(b'(') {
                self.pos += 1;
                stack.push(Frame {
                    name,
                    offset,
                    children: Vec::new(),
                });
                continue 'tree;
            }
            let mut current = self.make(name, offset, Vec::new())?;
            loop {
                self.skip_ws();
                let Some(frame) = stack.last_mut() else {
                    if self.pos < self.bytes.len() {
                        return Err(Error::syntax(self.pos, "trailing input after tree"));
                    }
                    return Ok(current);
                };
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                        frame.children.push(current);
                        continue 'tree;
                    }
                    Some(b')') => {
                        self.pos += 1;
                        frame.children.push(current);
                        let frame = stack.pop().expect("frame present");
                        current = self.make(frame.name, frame.offset, frame.children)?;
                    }
                    None => {
                        return Err(Error::syntax(
                            self.pos,
                            "unexpected end of input, expected `,` or `)`",
                        ))
                    }
                    Some(b) => {
                        return Err(Error::syntax(
                            self.pos,
                            format!("expected `,` or `)`, found `{}`", b as char),
                        ))
                    }
                }
            }
        }
    }
}
