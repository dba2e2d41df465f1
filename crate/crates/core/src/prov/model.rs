use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::time::Timestamp;

/// Prefixes every document understands without a `prefix` declaration.
pub const BUILTIN_PREFIXES: [(&str, &str); 2] = [
    ("prov", "http://www.w3.org/ns/prov#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
];

pub fn is_builtin_prefix(prefix: &str) -> bool {
    BUILTIN_PREFIXES.iter().any(|(p, _)| *p == prefix)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProvError {
    #[error("identifier conflict on {id}: {reason}")]
    IdConflict { id: QualifiedName, reason: String },
    #[error("{relation} refers to {id}, which is not declared in the document")]
    DanglingEndpoint { relation: RelationKind, id: QualifiedName },
    #[error("{relation} expects {role} to be an {expected}, but {id} is an {found}")]
    KindMismatch {
        relation: RelationKind,
        role: &'static str,
        id: QualifiedName,
        expected: NodeKind,
        found: NodeKind,
    },
    #[error("prefix `{0}` is not declared")]
    UnknownPrefix(String),
    #[error("prefix `{prefix}` is bound to both <{first}> and <{second}>")]
    NamespaceConflict {
        prefix: String,
        first: String,
        second: String,
    },
    #[error("invalid qualified name `{0}`")]
    InvalidName(String),
    #[error("{id} carries more than one value for single-valued attribute {key}")]
    DuplicateAttribute { id: QualifiedName, key: QualifiedName },
    #[error("activity {0} ends before it starts")]
    InvalidInterval(QualifiedName),
    #[error("{0} statements carry no time")]
    TimeNotAllowed(RelationKind),
    #[error("{0} is not an activity and cannot carry start/end times")]
    TimesOnNonActivity(QualifiedName),
}

/// `prefix:local` identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QualifiedName {
    prefix: String,
    local: String,
}

fn valid_prefix(prefix: &str) -> bool {
    let mut chars = prefix.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn valid_local(local: &str) -> bool {
    !local.is_empty()
        && !local.contains("%%")
        && local.chars().all(|c| {
            !c.is_whitespace() && !matches!(c, '(' | ')' | '[' | ']' | ',' | ';' | '=' | '"' | '\'' | '<' | '>')
        })
}

impl QualifiedName {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Result<Self, ProvError> {
        let prefix = prefix.into();
        let local = local.into();
        if !valid_prefix(&prefix) || !valid_local(&local) {
            return Err(ProvError::InvalidName(format!("{prefix}:{local}")));
        }
        Ok(Self { prefix, local })
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn local(&self) -> &str {
        &self.local
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

impl FromStr for QualifiedName {
    type Err = ProvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prefix, local) = s.split_once(':').ok_or_else(|| ProvError::InvalidName(s.to_string()))?;
        Self::new(prefix, local)
    }
}

impl Serialize for QualifiedName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QualifiedName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Finite decimal value with a total order.
#[derive(Debug, Clone, Copy)]
pub struct Decimal(f64);

impl Decimal {
    pub fn new(value: f64) -> Option<Self> {
        // -0.0 and 0.0 must compare (and hash) equal
        value.is_finite().then_some(Self(value + 0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Decimal {}

impl std::hash::Hash for Decimal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // shortest representation that parses back to the same f64
        write!(f, "{}", self.0)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse::<f64>()
            .ok()
            .and_then(Decimal::new)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid decimal `{s}`")))
    }
}

/// Typed literal used for attribute values, binding values and bus payloads.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Literal {
    String(String),
    Int(i64),
    Decimal(Decimal),
    Time(Timestamp),
    #[serde(rename = "qname")]
    QName(QualifiedName),
}

impl Literal {
    pub fn str(value: impl Into<String>) -> Self {
        Literal::String(value.into())
    }

    pub fn as_qname(&self) -> Option<&QualifiedName> {
        match self {
            Literal::QName(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Literal::String(s) => Some(s),
            _ => None,
        }
    }

    /// Plain rendering without PROV-N quoting, for human-facing text.
    pub fn display_value(&self) -> String {
        match self {
            Literal::String(s) => s.clone(),
            Literal::Int(i) => i.to_string(),
            Literal::Decimal(d) => d.to_string(),
            Literal::Time(t) => t.to_string(),
            Literal::QName(q) => q.to_string(),
        }
    }
}

impl From<QualifiedName> for Literal {
    fn from(q: QualifiedName) -> Self {
        Literal::QName(q)
    }
}

impl From<&str> for Literal {
    fn from(s: &str) -> Self {
        Literal::String(s.to_string())
    }
}

impl From<String> for Literal {
    fn from(s: String) -> Self {
        Literal::String(s)
    }
}

impl From<i64> for Literal {
    fn from(i: i64) -> Self {
        Literal::Int(i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Attribute {
    pub key: QualifiedName,
    pub value: Literal,
}

impl Attribute {
    pub fn new(key: QualifiedName, value: Literal) -> Self {
        Self { key, value }
    }
}

pub fn prov_type() -> QualifiedName {
    QualifiedName::new("prov", "type").expect("static name")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Entity,
    Activity,
    Agent,
}

impl NodeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            NodeKind::Entity => "entity",
            NodeKind::Activity => "activity",
            NodeKind::Agent => "agent",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvNode {
    pub id: QualifiedName,
    pub kind: NodeKind,
    pub attrs: BTreeSet<Attribute>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub start_time: Option<Timestamp>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub end_time: Option<Timestamp>,
}

impl ProvNode {
    pub fn new(kind: NodeKind, id: QualifiedName) -> Self {
        Self {
            id,
            kind,
            attrs: BTreeSet::new(),
            start_time: None,
            end_time: None,
        }
    }

    pub fn entity(id: QualifiedName) -> Self {
        Self::new(NodeKind::Entity, id)
    }

    pub fn activity(id: QualifiedName) -> Self {
        Self::new(NodeKind::Activity, id)
    }

    pub fn agent(id: QualifiedName) -> Self {
        Self::new(NodeKind::Agent, id)
    }

    pub fn with_attr(mut self, key: QualifiedName, value: impl Into<Literal>) -> Self {
        self.attrs.insert(Attribute::new(key, value.into()));
        self
    }

    pub fn with_type(self, ty: QualifiedName) -> Self {
        self.with_attr(prov_type(), Literal::QName(ty))
    }

    pub fn with_times(mut self, start: Option<Timestamp>, end: Option<Timestamp>) -> Self {
        self.start_time = start;
        self.end_time = end;
        self
    }

    pub fn has_type(&self, ty: &QualifiedName) -> bool {
        let key = prov_type();
        self.attrs
            .iter()
            .any(|a| a.key == key && a.value.as_qname() == Some(ty))
    }

    /// First value of a single-valued attribute.
    pub fn attr(&self, key: &QualifiedName) -> Option<&Literal> {
        self.attrs.iter().find(|a| &a.key == key).map(|a| &a.value)
    }

    pub fn validate(&self) -> Result<(), ProvError> {
        let type_key = prov_type();
        let mut seen = BTreeSet::new();
        for attr in &self.attrs {
            if attr.key != type_key && !seen.insert(&attr.key) {
                return Err(ProvError::DuplicateAttribute {
                    id: self.id.clone(),
                    key: attr.key.clone(),
                });
            }
        }
        if self.kind != NodeKind::Activity && (self.start_time.is_some() || self.end_time.is_some()) {
            return Err(ProvError::TimesOnNonActivity(self.id.clone()));
        }
        if let (Some(start), Some(end)) = (self.start_time, self.end_time) {
            if start > end {
                return Err(ProvError::InvalidInterval(self.id.clone()));
            }
        }
        Ok(())
    }

    /// Union of two descriptions of the same node.
    fn unify(&self, other: &ProvNode) -> Result<ProvNode, ProvError> {
        let conflict = |reason: String| ProvError::IdConflict {
            id: self.id.clone(),
            reason,
        };
        if self.kind != other.kind {
            return Err(conflict(format!("declared as both {} and {}", self.kind, other.kind)));
        }
        let pick = |a: Option<Timestamp>, b: Option<Timestamp>, what: &str| match (a, b) {
            (Some(x), Some(y)) if x != y => Err(conflict(format!("{what} time {x} vs {y}"))),
            (x, y) => Ok(x.or(y)),
        };
        let mut merged = self.clone();
        merged.start_time = pick(self.start_time, other.start_time, "start")?;
        merged.end_time = pick(self.end_time, other.end_time, "end")?;
        merged.attrs.extend(other.attrs.iter().cloned());
        merged.validate().map_err(|e| match e {
            ProvError::DuplicateAttribute { key, .. } => conflict(format!("conflicting values for {key}")),
            other => other,
        })?;
        Ok(merged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    Used,
    WasGeneratedBy,
    WasAssociatedWith,
    WasAttributedTo,
    WasDerivedFrom,
    WasInformedBy,
}

impl RelationKind {
    pub const ALL: [RelationKind; 6] = [
        RelationKind::Used,
        RelationKind::WasGeneratedBy,
        RelationKind::WasAssociatedWith,
        RelationKind::WasAttributedTo,
        RelationKind::WasDerivedFrom,
        RelationKind::WasInformedBy,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            RelationKind::Used => "used",
            RelationKind::WasGeneratedBy => "wasGeneratedBy",
            RelationKind::WasAssociatedWith => "wasAssociatedWith",
            RelationKind::WasAttributedTo => "wasAttributedTo",
            RelationKind::WasDerivedFrom => "wasDerivedFrom",
            RelationKind::WasInformedBy => "wasInformedBy",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    /// Required (source, target) node kinds.
    pub fn endpoint_kinds(self) -> (NodeKind, NodeKind) {
        use NodeKind::*;
        match self {
            RelationKind::Used => (Activity, Entity),
            RelationKind::WasGeneratedBy => (Entity, Activity),
            RelationKind::WasAssociatedWith => (Activity, Agent),
            RelationKind::WasAttributedTo => (Entity, Agent),
            RelationKind::WasDerivedFrom => (Entity, Entity),
            RelationKind::WasInformedBy => (Activity, Activity),
        }
    }

    /// Only usage and generation have a time slot in PROV-N.
    pub fn has_time(self) -> bool {
        matches!(self, RelationKind::Used | RelationKind::WasGeneratedBy)
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProvRelation {
    pub kind: RelationKind,
    pub source: QualifiedName,
    pub target: QualifiedName,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub time: Option<Timestamp>,
    #[serde(skip_serializing_if = "BTreeSet::is_empty", default)]
    pub attrs: BTreeSet<Attribute>,
}

impl ProvRelation {
    pub fn new(kind: RelationKind, source: QualifiedName, target: QualifiedName) -> Self {
        Self {
            kind,
            source,
            target,
            time: None,
            attrs: BTreeSet::new(),
        }
    }

    pub fn with_time(mut self, time: Timestamp) -> Self {
        self.time = Some(time);
        self
    }

    pub fn with_attr(mut self, key: QualifiedName, value: impl Into<Literal>) -> Self {
        self.attrs.insert(Attribute::new(key, value.into()));
        self
    }
}

/// A provenance graph: namespaces, nodes keyed by id, and a multiset of relations.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ProvDocument {
    namespaces: BTreeMap<String, String>,
    nodes: BTreeMap<QualifiedName, ProvNode>,
    relations: Vec<ProvRelation>,
}

impl PartialEq for ProvDocument {
    fn eq(&self, other: &Self) -> bool {
        self.namespaces == other.namespaces
            && self.nodes == other.nodes
            && self.sorted_relations() == other.sorted_relations()
    }
}

impl Eq for ProvDocument {}

impl ProvDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.relations.is_empty()
    }

    pub fn namespaces(&self) -> &BTreeMap<String, String> {
        &self.namespaces
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ProvNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: &QualifiedName) -> Option<&ProvNode> {
        self.nodes.get(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn relations(&self) -> &[ProvRelation] {
        &self.relations
    }

    /// Nodes plus relations; prefix declarations are not statements.
    pub fn statement_count(&self) -> usize {
        self.nodes.len() + self.relations.len()
    }

    pub fn sorted_relations(&self) -> Vec<&ProvRelation> {
        let mut rels: Vec<_> = self.relations.iter().collect();
        rels.sort();
        rels
    }

    pub fn add_namespace(&mut self, prefix: impl Into<String>, uri: impl Into<String>) -> Result<(), ProvError> {
        let prefix = prefix.into();
        let uri = uri.into();
        if !valid_prefix(&prefix) {
            return Err(ProvError::InvalidName(prefix));
        }
        if let Some((_, builtin)) = BUILTIN_PREFIXES.iter().find(|(p, _)| *p == prefix) {
            if *builtin != uri {
                return Err(ProvError::NamespaceConflict {
                    prefix,
                    first: builtin.to_string(),
                    second: uri,
                });
            }
            return Ok(());
        }
        match self.namespaces.get(&prefix) {
            Some(existing) if *existing != uri => Err(ProvError::NamespaceConflict {
                prefix,
                first: existing.clone(),
                second: uri,
            }),
            Some(_) => Ok(()),
            None => {
                self.namespaces.insert(prefix, uri);
                Ok(())
            }
        }
    }

    pub fn remove_namespace(&mut self, prefix: &str) -> Option<String> {
        self.namespaces.remove(prefix)
    }

    pub fn has_prefix(&self, prefix: &str) -> bool {
        is_builtin_prefix(prefix) || self.namespaces.contains_key(prefix)
    }

    /// Inserts a node. Re-adding a compatible description of an existing id
    /// unions its attributes; a different kind or a clashing single-valued
    /// attribute is an [`ProvError::IdConflict`].
    pub fn add_node(&mut self, node: ProvNode) -> Result<(), ProvError> {
        node.validate()?;
        let merged = match self.nodes.get(&node.id) {
            Some(existing) => existing.unify(&node)?,
            None => node,
        };
        self.nodes.insert(merged.id.clone(), merged);
        Ok(())
    }

    fn check_relation(&self, rel: &ProvRelation) -> Result<(), ProvError> {
        if rel.time.is_some() && !rel.kind.has_time() {
            return Err(ProvError::TimeNotAllowed(rel.kind));
        }
        let (source_kind, target_kind) = rel.kind.endpoint_kinds();
        for (role, id, expected) in [
            ("source", &rel.source, source_kind),
            ("target", &rel.target, target_kind),
        ] {
            let node = self.nodes.get(id).ok_or_else(|| ProvError::DanglingEndpoint {
                relation: rel.kind,
                id: id.clone(),
            })?;
            if node.kind != expected {
                return Err(ProvError::KindMismatch {
                    relation: rel.kind,
                    role,
                    id: id.clone(),
                    expected,
                    found: node.kind,
                });
            }
        }
        Ok(())
    }

    pub fn add_relation(&mut self, rel: ProvRelation) -> Result<(), ProvError> {
        self.check_relation(&rel)?;
        self.relations.push(rel);
        Ok(())
    }

    /// Every qualified name appearing anywhere in the document.
    pub fn qualified_names(&self) -> Vec<&QualifiedName> {
        fn push_attrs<'a>(attrs: &'a BTreeSet<Attribute>, out: &mut Vec<&'a QualifiedName>) {
            for a in attrs {
                out.push(&a.key);
                out.extend(a.value.as_qname());
            }
        }
        let mut out = Vec::new();
        for node in self.nodes.values() {
            out.push(&node.id);
            push_attrs(&node.attrs, &mut out);
        }
        for rel in &self.relations {
            out.push(&rel.source);
            out.push(&rel.target);
            push_attrs(&rel.attrs, &mut out);
        }
        out
    }

    /// Checks every document invariant.
    pub fn validate(&self) -> Result<(), ProvError> {
        for node in self.nodes.values() {
            node.validate()?;
        }
        for rel in &self.relations {
            self.check_relation(rel)?;
        }
        if let Some(name) = self
            .qualified_names()
            .into_iter()
            .find(|q| !self.has_prefix(q.prefix()))
        {
            return Err(ProvError::UnknownPrefix(name.prefix().to_string()));
        }
        Ok(())
    }

    /// Union of two documents. Nodes with the same id are unified; relations
    /// are combined as a multiset union (maximum multiplicity), so merging a
    /// document with itself is a no-op.
    pub fn merge(&self, other: &ProvDocument) -> Result<ProvDocument, ProvError> {
        let mut out = self.clone();
        out.absorb(other)?;
        Ok(out)
    }

    /// In-place [`merge`](Self::merge). On error `self` is left unchanged.
    pub fn absorb(&mut self, other: &ProvDocument) -> Result<(), ProvError> {
        let mut scratch = ProvDocument {
            namespaces: self.namespaces.clone(),
            ..ProvDocument::default()
        };
        for (prefix, uri) in &other.namespaces {
            scratch.add_namespace(prefix.clone(), uri.clone())?;
        }
        let mut unified = Vec::with_capacity(other.nodes.len());
        for node in other.nodes.values() {
            node.validate()?;
            unified.push(match self.nodes.get(&node.id) {
                Some(existing) => existing.unify(node)?,
                None => node.clone(),
            });
        }

        let mut wanted: BTreeMap<&ProvRelation, (usize, usize)> = BTreeMap::new();
        for rel in &other.relations {
            wanted.entry(rel).or_default().0 += 1;
        }
        for rel in &self.relations {
            if let Some((_, have)) = wanted.get_mut(rel) {
                *have += 1;
            }
        }
        self.namespaces = scratch.namespaces;
        for node in unified {
            self.nodes.insert(node.id.clone(), node);
        }
        for (rel, (want, have)) in wanted {
            for _ in have..want {
                self.relations.push(rel.clone());
            }
        }
        Ok(())
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &ProvNode> {
        self.nodes.values().filter(move |n| n.kind == kind)
    }

    pub fn relations_of_kind(&self, kind: RelationKind) -> impl Iterator<Item = &ProvRelation> {
        self.relations.iter().filter(move |r| r.kind == kind)
    }
}
