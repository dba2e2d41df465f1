//! PROV-N text for the supported subset: `document`/`endDocument`, `prefix`
//! declarations, the three node statements and the six relation statements.
//!
//! Output is canonical: prefixes sorted, nodes sorted by id, relations sorted
//! by kind and then endpoints. Equal documents always serialize to identical
//! bytes.

use std::fmt::Write as _;

use thiserror::Error;

use super::model::{
    Attribute, Decimal, Literal, NodeKind, ProvDocument, ProvError, ProvNode, ProvRelation, QualifiedName, RelationKind,
};
use crate::time::Timestamp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown prefix `{prefix}` at {line}:{column}")]
    UnknownPrefix { prefix: String, line: usize, column: usize },
    #[error("line {line}: {source}")]
    Model {
        line: usize,
        #[source]
        source: ProvError,
    },
}

const INDENT: &str = "  ";

pub fn serialize_provn(doc: &ProvDocument) -> Result<String, ProvError> {
    doc.validate()?;
    let mut out = String::from("document\n");
    for (prefix, uri) in doc.namespaces() {
        let _ = writeln!(out, "{INDENT}prefix {prefix} <{uri}>");
    }
    for node in doc.nodes() {
        out.push_str(INDENT);
        write_node(&mut out, node);
        out.push('\n');
    }
    for rel in doc.sorted_relations() {
        out.push_str(INDENT);
        write_relation(&mut out, rel);
        out.push('\n');
    }
    out.push_str("endDocument\n");
    Ok(out)
}

fn write_time(out: &mut String, t: Option<Timestamp>) {
    match t {
        Some(t) => {
            let _ = write!(out, "{t}");
        }
        None => out.push('-'),
    }
}

fn write_node(out: &mut String, node: &ProvNode) {
    let _ = write!(out, "{}({}", node.kind.keyword(), node.id);
    if node.kind == NodeKind::Activity && (node.start_time.is_some() || node.end_time.is_some()) {
        out.push_str(", ");
        write_time(out, node.start_time);
        out.push_str(", ");
        write_time(out, node.end_time);
    }
    write_attrs(out, node.attrs.iter());
    out.push(')');
}

fn write_relation(out: &mut String, rel: &ProvRelation) {
    let _ = write!(out, "{}({}, {}", rel.kind.keyword(), rel.source, rel.target);
    match rel.kind {
        RelationKind::Used | RelationKind::WasGeneratedBy => {
            out.push_str(", ");
            write_time(out, rel.time);
        }
        // plan slot
        RelationKind::WasAssociatedWith => out.push_str(", -"),
        _ => {}
    }
    write_attrs(out, rel.attrs.iter());
    out.push(')');
}

fn write_attrs<'a>(out: &mut String, attrs: impl Iterator<Item = &'a Attribute>) {
    let mut first = true;
    for attr in attrs {
        out.push_str(if first { ", [" } else { ", " });
        first = false;
        let _ = write!(out, "{}=", attr.key);
        write_literal(out, &attr.value);
    }
    if !first {
        out.push(']');
    }
}

pub(crate) fn write_literal(out: &mut String, value: &Literal) {
    match value {
        Literal::String(s) => write_string(out, s),
        Literal::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Literal::Decimal(d) => {
            write_string(out, &d.to_string());
            out.push_str(" %% xsd:decimal");
        }
        Literal::Time(t) => {
            write_string(out, &t.to_string());
            out.push_str(" %% xsd:dateTime");
        }
        Literal::QName(q) => {
            let _ = write!(out, "'{q}'");
        }
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Str(String),
    QLit(String),
    Iri(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Eq,
    Semi,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_delim(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | ',' | '=' | ';' | '"' | '\'' | '<' | '>')
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '/' && chars.get(i + 1) == Some(&'/') {
                break;
            }
            let simple = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '[' => Some(Tok::LBrack),
                ']' => Some(Tok::RBrack),
                ',' => Some(Tok::Comma),
                '=' => Some(Tok::Eq),
                ';' => Some(Tok::Semi),
                _ => None,
            };
            if let Some(tok) = simple {
                tokens.push(Token {
                    tok,
                    line: line_no,
                    column,
                });
                i += 1;
                continue;
            }
            match c {
                '"' => {
                    let mut s = String::new();
                    i += 1;
                    loop {
                        match chars.get(i) {
                            None => return Err(syntax(line_no, column, "unterminated string")),
                            Some('"') => break,
                            Some('\\') => {
                                let esc = match chars.get(i + 1) {
                                    Some('n') => '\n',
                                    Some('r') => '\r',
                                    Some('t') => '\t',
                                    Some('"') => '"',
                                    Some('\\') => '\\',
                                    _ => return Err(syntax(line_no, i + 1, "invalid escape")),
                                };
                                s.push(esc);
                                i += 2;
                            }
                            Some(&ch) => {
                                s.push(ch);
                                i += 1;
                            }
                        }
                    }
                    i += 1;
                    tokens.push(Token {
                        tok: Tok::Str(s),
                        line: line_no,
                        column,
                    });
                }
                '\'' | '<' => {
                    let close = if c == '\'' { '\'' } else { '>' };
                    let start = i + 1;
                    let end = chars[start..]
                        .iter()
                        .position(|&ch| ch == close)
                        .map(|p| start + p)
                        .ok_or_else(|| syntax(line_no, column, format!("missing closing {close}")))?;
                    let body: String = chars[start..end].iter().collect();
                    let tok = if c == '\'' { Tok::QLit(body) } else { Tok::Iri(body) };
                    tokens.push(Token {
                        tok,
                        line: line_no,
                        column,
                    });
                    i = end + 1;
                }
                '>' => return Err(syntax(line_no, column, "unexpected `>`")),
                _ => {
                    let start = i;
                    while i < chars.len() && !is_delim(chars[i]) {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    tokens.push(Token {
                        tok: Tok::Word(word),
                        line: line_no,
                        column,
                    });
                }
            }
        }
    }
    Ok(tokens)
}

/// A positional argument inside a statement.
#[derive(Debug)]
enum Arg {
    Word(String, usize, usize),
    Attrs(Vec<Attribute>),
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    doc: ProvDocument,
    end_line: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<&'a Token, ParseError> {
        let tok = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| syntax(self.end_line, 1, "unexpected end of input"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<&'a Token, ParseError> {
        let tok = self.next()?;
        if tok.tok != want {
            return Err(syntax(tok.line, tok.column, format!("expected {what}")));
        }
        Ok(tok)
    }

    fn word(&mut self, what: &str) -> Result<(String, usize, usize), ParseError> {
        let tok = self.next()?;
        match &tok.tok {
            Tok::Word(w) => Ok((w.clone(), tok.line, tok.column)),
            _ => Err(syntax(tok.line, tok.column, format!("expected {what}"))),
        }
    }

    fn qname(&self, text: &str, line: usize, column: usize) -> Result<QualifiedName, ParseError> {
        let name: QualifiedName = text
            .parse()
            .map_err(|_| syntax(line, column, format!("`{text}` is not a qualified name")))?;
        if !self.doc.has_prefix(name.prefix()) {
            return Err(ParseError::UnknownPrefix {
                prefix: name.prefix().to_string(),
                line,
                column,
            });
        }
        Ok(name)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let tok = self.next()?;
        match &tok.tok {
            Tok::QLit(text) => Ok(Literal::QName(self.qname(text, tok.line, tok.column)?)),
            Tok::Word(w) => w
                .parse::<i64>()
                .map(Literal::Int)
                .map_err(|_| syntax(tok.line, tok.column, format!("`{w}` is not a literal"))),
            Tok::Str(s) => {
                let is_typed = matches!(self.peek(), Some(Token { tok: Tok::Word(w), .. }) if w == "%%");
                if !is_typed {
                    return Ok(Literal::String(s.clone()));
                }
                self.next()?;
                let (ty, line, column) = self.word("a datatype")?;
                let bad = || syntax(tok.line, tok.column, format!("`{s}` is not a valid {ty}"));
                match ty.as_str() {
                    "xsd:string" => Ok(Literal::String(s.clone())),
                    "xsd:integer" | "xsd:int" | "xsd:long" => s.parse().map(Literal::Int).map_err(|_| bad()),
                    "xsd:decimal" | "xsd:double" | "xsd:float" => s
                        .parse::<f64>()
                        .ok()
                        .and_then(Decimal::new)
                        .map(Literal::Decimal)
                        .ok_or_else(bad),
                    "xsd:dateTime" => s.parse().map(Literal::Time).map_err(|_| bad()),
                    "xsd:QName" | "prov:QUALIFIED_NAME" => Ok(Literal::QName(self.qname(s, tok.line, tok.column)?)),
                    _ => Err(syntax(line, column, format!("unsupported datatype `{ty}`"))),
                }
            }
            _ => Err(syntax(tok.line, tok.column, "expected a literal")),
        }
    }

    fn attributes(&mut self) -> Result<Vec<Attribute>, ParseError> {
        let mut attrs = Vec::new();
        if matches!(self.peek(), Some(Token { tok: Tok::RBrack, .. })) {
            self.next()?;
            return Ok(attrs);
        }
        loop {
            let (key, line, column) = self.word("an attribute name")?;
            let key = self.qname(&key, line, column)?;
            self.expect(Tok::Eq, "`=`")?;
            let value = self.literal()?;
            attrs.push(Attribute::new(key, value));
            let tok = self.next()?;
            match tok.tok {
                Tok::Comma => continue,
                Tok::RBrack => break,
                _ => return Err(syntax(tok.line, tok.column, "expected `,` or `]`")),
            }
        }
        Ok(attrs)
    }

    fn arguments(&mut self) -> Result<Vec<Arg>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        loop {
            let tok = self.next()?;
            match &tok.tok {
                Tok::Word(w) => args.push(Arg::Word(w.clone(), tok.line, tok.column)),
                Tok::LBrack => args.push(Arg::Attrs(self.attributes()?)),
                Tok::Semi => return Err(syntax(tok.line, tok.column, "statement identifiers are not supported")),
                _ => return Err(syntax(tok.line, tok.column, "expected an identifier or `[`")),
            }
            let tok = self.next()?;
            match tok.tok {
                Tok::Comma => continue,
                Tok::RParen => break,
                Tok::Semi => return Err(syntax(tok.line, tok.column, "statement identifiers are not supported")),
                _ => return Err(syntax(tok.line, tok.column, "expected `,` or `)`")),
            }
        }
        if args.iter().rev().skip(1).any(|a| matches!(a, Arg::Attrs(_))) {
            let (line, column) = (self.tokens[self.pos - 1].line, self.tokens[self.pos - 1].column);
            return Err(syntax(line, column, "attribute list must come last"));
        }
        Ok(args)
    }
}

fn split_args(args: Vec<Arg>) -> (Vec<(String, usize, usize)>, Vec<Attribute>) {
    let mut words = Vec::new();
    let mut attrs = Vec::new();
    for arg in args {
        match arg {
            Arg::Word(w, l, c) => words.push((w, l, c)),
            Arg::Attrs(a) => attrs = a,
        }
    }
    (words, attrs)
}

fn optional_time(word: &(String, usize, usize)) -> Result<Option<Timestamp>, ParseError> {
    let (w, line, column) = word;
    if w == "-" {
        return Ok(None);
    }
    w.parse()
        .map(Some)
        .map_err(|_| syntax(*line, *column, format!("`{w}` is not a time or `-`")))
}

pub fn parse_provn(text: &str) -> Result<ProvDocument, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        doc: ProvDocument::new(),
        end_line: text.lines().count().max(1),
    };
    let (head, line, column) = p.word("`document`")?;
    if head != "document" {
        return Err(syntax(line, column, "expected `document`"));
    }
    let mut relations: Vec<(ProvRelation, usize)> = Vec::new();
    loop {
        let (keyword, line, column) = p.word("a statement or `endDocument`")?;
        match keyword.as_str() {
            "endDocument" => break,
            "prefix" => {
                let (prefix, pl, pc) = p.word("a prefix name")?;
                let tok = p.next()?;
                let Tok::Iri(uri) = &tok.tok else {
                    return Err(syntax(tok.line, tok.column, "expected `<IRI>`"));
                };
                p.doc
                    .add_namespace(prefix, uri.clone())
                    .map_err(|source| match source {
                        ProvError::InvalidName(_) => syntax(pl, pc, "invalid prefix name"),
                        source => ParseError::Model { line, source },
                    })?;
            }
            "entity" | "agent" | "activity" => {
                let kind = match keyword.as_str() {
                    "entity" => NodeKind::Entity,
                    "agent" => NodeKind::Agent,
                    _ => NodeKind::Activity,
                };
                let (words, attrs) = split_args(p.arguments()?);
                let (id, start, end) = match (kind, words.as_slice()) {
                    (_, [id]) => (id, None, None),
                    (NodeKind::Activity, [id, start, end]) => (id, optional_time(start)?, optional_time(end)?),
                    _ => return Err(syntax(line, column, format!("wrong arguments for {keyword}"))),
                };
                let mut node = ProvNode::new(kind, p.qname(&id.0, id.1, id.2)?).with_times(start, end);
                node.attrs.extend(attrs);
                p.doc
                    .add_node(node)
                    .map_err(|source| ParseError::Model { line, source })?;
            }
            other => {
                let Some(kind) = RelationKind::from_keyword(other) else {
                    return Err(syntax(line, column, format!("unknown statement `{other}`")));
                };
                let (words, attrs) = split_args(p.arguments()?);
                let (source, target, rest) = match words.as_slice() {
                    [s, t, rest @ ..] => (s, t, rest),
                    _ => return Err(syntax(line, column, format!("{other} needs two identifiers"))),
                };
                let mut rel = ProvRelation::new(
                    kind,
                    p.qname(&source.0, source.1, source.2)?,
                    p.qname(&target.0, target.1, target.2)?,
                );
                match (kind, rest) {
                    (_, []) => {}
                    (RelationKind::Used | RelationKind::WasGeneratedBy, [time]) => {
                        rel.time = optional_time(time)?;
                    }
                    (RelationKind::WasAssociatedWith, [(plan, pl, pc)]) => {
                        if plan != "-" {
                            return Err(syntax(*pl, *pc, "plans are not supported"));
                        }
                    }
                    _ => return Err(syntax(line, column, format!("too many arguments for {other}"))),
                }
                rel.attrs.extend(attrs);
                relations.push((rel, line));
            }
        }
    }
    if let Some(tok) = p.peek() {
        return Err(syntax(tok.line, tok.column, "content after `endDocument`"));
    }
    let mut doc = p.doc;
    for (rel, line) in relations {
        doc.add_relation(rel)
            .map_err(|source| ParseError::Model { line, source })?;
    }
    Ok(doc)
}
