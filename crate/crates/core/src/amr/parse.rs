//! Recursive-descent PENMAN parser.
//!
//! ```text
//! node     := "(" var "/" concept relation* ")"
//! relation := role (node | var | constant | quoted-string)
//! ```
//!
//! Parsing happens in two passes: the text is first read into a raw tree, then
//! variables are resolved so that references may precede their binding.

use std::collections::HashMap;

use super::{
    deinvert_role, is_inverse_role, is_symbol_char, looks_like_variable, AmrEdge, AmrError,
    AmrGraph, AmrNode, NodeId, Position,
};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    Slash,
    Role(String),
    Quoted(String),
    Symbol(String),
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::Slash => "'/'".into(),
            Token::Role(r) => format!("role {r:?}"),
            Token::Quoted(s) => format!("string {s:?}"),
            Token::Symbol(s) => format!("symbol {s:?}"),
            Token::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    at_line_start: bool,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            pos: 0,
            at_line_start: true,
        }
    }

    fn error(&self, offset: usize, expected: &str, found: String) -> AmrError {
        AmrError::Syntax {
            position: Position::locate(self.text, offset),
            expected: expected.into(),
            found,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek_char() {
            if c == '\n' {
                self.at_line_start = true;
                self.pos += 1;
            } else if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else if c == '#' && self.at_line_start {
                let rest = &self.text[self.pos..];
                self.pos += rest.find('\n').unwrap_or(rest.len());
            } else {
                break;
            }
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek_char() {
            if !pred(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.text[start..self.pos]
    }

    /// Next token and the byte offset where it starts.
    fn next(&mut self) -> Result<(Token, usize), AmrError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(c) = self.peek_char() else {
            return Ok((Token::Eof, start));
        };
        self.at_line_start = false;
        let token = match c {
            '(' => {
                self.pos += 1;
                Token::LParen
            }
            ')' => {
                self.pos += 1;
                Token::RParen
            }
            '/' => {
                self.pos += 1;
                Token::Slash
            }
            ':' => {
                self.pos += 1;
                let name = self.take_while(is_symbol_char);
                if name.is_empty() {
                    let found = self
                        .peek_char()
                        .map_or("end of input".to_string(), |c| format!("{c:?}"));
                    return Err(self.error(self.pos, "role name after ':'", found));
                }
                Token::Role(format!(":{name}"))
            }
            '"' => {
                self.pos += 1;
                let mut value = String::new();
                loop {
                    let Some(c) = self.peek_char() else {
                        return Err(self.error(start, "closing '\"'", "end of input".into()));
                    };
                    self.pos += c.len_utf8();
                    match c {
                        '"' => break,
                        '\\' => {
                            let Some(escaped) = self.peek_char() else {
                                return Err(self.error(start, "closing '\"'", "end of input".into()));
                            };
                            self.pos += escaped.len_utf8();
                            value.push(escaped);
                        }
                        _ => value.push(c),
                    }
                }
                Token::Quoted(value)
            }
            _ => Token::Symbol(self.take_while(is_symbol_char).to_string()),
        };
        Ok((token, start))
    }
}

#[derive(Debug)]
struct RawNode {
    variable: String,
    variable_at: usize,
    concept: String,
    relations: Vec<RawRelation>,
}

#[derive(Debug)]
struct RawRelation {
    role: String,
    role_at: usize,
    target: RawTarget,
}

#[derive(Debug)]
enum RawTarget {
    Node(RawNode),
    Symbol(String, usize),
    Quoted(String),
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    lookahead: Option<(Token, usize)>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<&(Token, usize), AmrError> {
        if self.lookahead.is_none() {
            self.lookahead = Some(self.lexer.next()?);
        }
        Ok(self.lookahead.as_ref().expect("filled above"))
    }

    fn bump(&mut self) -> Result<(Token, usize), AmrError> {
        self.peek()?;
        Ok(self.lookahead.take().expect("filled above"))
    }

    fn unexpected(&self, token: &Token, at: usize, expected: &str) -> AmrError {
        self.lexer.error(at, expected, token.describe())
    }

    fn expect_symbol(&mut self, expected: &str) -> Result<(String, usize), AmrError> {
        match self.bump()? {
            (Token::Symbol(s), at) => Ok((s, at)),
            (other, at) => Err(self.unexpected(&other, at, expected)),
        }
    }

    fn node(&mut self) -> Result<RawNode, AmrError> {
        match self.bump()? {
            (Token::LParen, _) => {}
            (other, at) => return Err(self.unexpected(&other, at, "'('")),
        }
        let (variable, variable_at) = self.expect_symbol("variable")?;
        match self.bump()? {
            (Token::Slash, _) => {}
            (other, at) => return Err(self.unexpected(&other, at, "'/'")),
        }
        let (concept, _) = self.expect_symbol("concept")?;
        let mut relations = Vec::new();
        loop {
            match self.bump()? {
                (Token::RParen, _) => break,
                (Token::Role(role), role_at) => {
                    let target = match self.peek()? {
                        (Token::LParen, _) => RawTarget::Node(self.node()?),
                        _ => match self.bump()? {
                            (Token::Symbol(s), at) => RawTarget::Symbol(s, at),
                            (Token::Quoted(s), _) => RawTarget::Quoted(s),
                            (other, at) => {
                                return Err(self.unexpected(
                                    &other,
                                    at,
                                    "node, variable, or constant after role",
                                ))
                            }
                        },
                    };
                    relations.push(RawRelation {
                        role,
                        role_at,
                        target,
                    });
                }
                (other, at) => return Err(self.unexpected(&other, at, "role or ')'")),
            }
        }
        Ok(RawNode {
            variable,
            variable_at,
            concept,
            relations,
        })
    }
}

struct Resolver<'a> {
    text: &'a str,
    bindings: HashMap<String, String>,
    ids: HashMap<String, NodeId>,
    nodes: Vec<AmrNode>,
    edges: Vec<AmrEdge>,
}

impl<'a> Resolver<'a> {
    fn collect_bindings(&mut self, node: &RawNode) -> Result<(), AmrError> {
        if let Some(first) = self.bindings.get(&node.variable) {
            return Err(AmrError::DuplicateConcept {
                variable: node.variable.clone(),
                first: first.clone(),
                second: node.concept.clone(),
                position: Position::locate(self.text, node.variable_at),
            });
        }
        self.bindings
            .insert(node.variable.clone(), node.concept.clone());
        for rel in &node.relations {
            if let RawTarget::Node(child) = &rel.target {
                self.collect_bindings(child)?;
            }
        }
        Ok(())
    }

    fn concept_id(&mut self, variable: &str) -> NodeId {
        if let Some(&id) = self.ids.get(variable) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes
            .push(AmrNode::concept(variable, self.bindings[variable].clone()));
        self.ids.insert(variable.to_string(), id);
        id
    }

    fn resolve(&mut self, node: &RawNode) -> Result<NodeId, AmrError> {
        let this = self.concept_id(&node.variable);
        for rel in &node.relations {
            let other = match &rel.target {
                RawTarget::Node(child) => self.concept_id(&child.variable),
                RawTarget::Symbol(s, at) => {
                    if self.bindings.contains_key(s) {
                        self.concept_id(s)
                    } else if looks_like_variable(s) {
                        return Err(AmrError::UnboundVariable {
                            name: s.clone(),
                            position: Position::locate(self.text, *at),
                        });
                    } else {
                        self.nodes.push(AmrNode::constant(s.clone(), false));
                        self.nodes.len() - 1
                    }
                }
                RawTarget::Quoted(s) => {
                    self.nodes.push(AmrNode::constant(s.clone(), true));
                    self.nodes.len() - 1
                }
            };
            let edge = if is_inverse_role(&rel.role) {
                let forward = deinvert_role(&rel.role);
                if is_inverse_role(forward) {
                    return Err(AmrError::Syntax {
                        position: Position::locate(self.text, rel.role_at),
                        expected: "a role with at most one inverse suffix".into(),
                        found: format!("role {:?}", rel.role),
                    });
                }
                AmrEdge {
                    source: other,
                    role: forward.to_string(),
                    target: this,
                    inverted: true,
                }
            } else {
                AmrEdge::new(this, rel.role.clone(), other)
            };
            self.edges.push(edge);
            if let RawTarget::Node(child) = &rel.target {
                self.resolve(child)?;
            }
        }
        Ok(this)
    }
}

/// Parses one complete PENMAN expression. Lines starting with `#` are
/// treated as comments.
pub fn parse_penman(text: &str) -> Result<AmrGraph, AmrError> {
    let mut parser = Parser {
        lexer: Lexer::new(text),
        lookahead: None,
    };
    let raw = parser.node()?;
    match parser.bump()? {
        (Token::Eof, _) => {}
        (other, at) => return Err(parser.unexpected(&other, at, "end of input")),
    }

    let mut resolver = Resolver {
        text,
        bindings: HashMap::new(),
        ids: HashMap::new(),
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    resolver.collect_bindings(&raw)?;
    let root = resolver.resolve(&raw)?;
    Ok(AmrGraph::assemble(resolver.nodes, resolver.edges, root))
}
