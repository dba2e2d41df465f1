//! Provenance templates: documents with `var:` placeholders that binding rows
//! logged at runtime fill in.

mod catalogue;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids;
use crate::prov::{
    parse_provn, Attribute, Literal, NodeKind, ParseError, ProvDocument, ProvError, ProvNode, ProvRelation,
    QualifiedName,
};
use crate::time::Timestamp;

pub use catalogue::{TemplateCatalogue, CANONICAL_TEMPLATE_IDS};

pub const SKILL_INVOCATION: &str = "skill_invocation";
pub const SA_RESPONSE: &str = "sa_response";
pub const INTENT_MATCHING: &str = "intent_matching";
pub const USER_DATAPOINT: &str = "user_datapoint";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("template uses `var:` names without declaring the var prefix")]
    MissingVarNamespace,
    #[error("attribute keys cannot be variables ({0})")]
    VariableKey(QualifiedName),
    #[error("template `{0}` is already registered")]
    DuplicateTemplate(String),
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("row is for template `{row}`, not `{template}`")]
    TemplateMismatch { template: String, row: String },
    #[error("no template `{0}` in the catalogue")]
    UnknownTemplate(String),
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("variable `{variable}` is in identifier position but bound to {value:?}")]
    TypeMismatch { variable: String, value: Literal },
    #[error("variable `{0}` is bound to another variable")]
    VariableInBinding(String),
    #[error(transparent)]
    Prov(#[from] ProvError),
}

/// Where a variable occurs in a template body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarPosition {
    /// Node id or relation endpoint; must bind to a qualified name.
    Identifier,
    /// Attribute value; binds to any literal.
    AttributeValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    id: String,
    body: ProvDocument,
    variables: BTreeMap<String, VarPosition>,
}

fn var_name(q: &QualifiedName) -> Option<&str> {
    (q.prefix() == ids::VAR.0).then(|| q.local())
}

fn attribute_vars<'a>(
    attrs: &'a BTreeSet<Attribute>,
    out: &mut Vec<(&'a QualifiedName, VarPosition)>,
) -> Result<(), TemplateError> {
    for attr in attrs {
        if var_name(&attr.key).is_some() {
            return Err(TemplateError::VariableKey(attr.key.clone()));
        }
        if let Some(q) = attr.value.as_qname() {
            out.push((q, VarPosition::AttributeValue));
        }
    }
    Ok(())
}

fn is_var_namespace_error(err: &ParseError) -> bool {
    matches!(err, ParseError::UnknownPrefix { prefix, .. } if prefix == ids::VAR.0)
}

impl Template {
    /// Parses a template from PROV-N text.
    pub fn load(id: impl Into<String>, text: &str) -> Result<Self, TemplateError> {
        let body = parse_provn(text).map_err(|e| {
            if is_var_namespace_error(&e) {
                TemplateError::MissingVarNamespace
            } else {
                TemplateError::Syntax(e)
            }
        })?;
        Self::from_body(id, body)
    }

    pub fn from_body(id: impl Into<String>, body: ProvDocument) -> Result<Self, TemplateError> {
        let mut occurrences = Vec::new();
        for node in body.nodes() {
            occurrences.push((&node.id, VarPosition::Identifier));
            attribute_vars(&node.attrs, &mut occurrences)?;
        }
        for rel in body.relations() {
            occurrences.push((&rel.source, VarPosition::Identifier));
            occurrences.push((&rel.target, VarPosition::Identifier));
            attribute_vars(&rel.attrs, &mut occurrences)?;
        }
        let mut variables = BTreeMap::new();
        for (q, pos) in occurrences {
            if let Some(name) = var_name(q) {
                let slot = variables.entry(name.to_string()).or_insert(pos);
                *slot = (*slot).min(pos);
            }
        }
        Ok(Self {
            id: id.into(),
            body,
            variables,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn body(&self) -> &ProvDocument {
        &self.body
    }

    pub fn variables(&self) -> &BTreeMap<String, VarPosition> {
        &self.variables
    }

    pub fn variable_names(&self) -> impl Iterator<Item = &str> {
        self.variables.keys().map(String::as_str)
    }

    /// Checks coverage and identifier typing without expanding.
    pub fn check_row(&self, row: &BindingRow) -> Result<(), ExpandError> {
        if row.template_id != self.id {
            return Err(ExpandError::TemplateMismatch {
                template: self.id.clone(),
                row: row.template_id.clone(),
            });
        }
        for (name, pos) in &self.variables {
            let value = row
                .values
                .get(name)
                .ok_or_else(|| ExpandError::UnboundVariable(name.clone()))?;
            match (pos, value) {
                (_, Literal::QName(q)) if var_name(q).is_some() => {
                    return Err(ExpandError::VariableInBinding(name.clone()))
                }
                (VarPosition::Identifier, Literal::QName(_)) | (VarPosition::AttributeValue, _) => {}
                (VarPosition::Identifier, other) => {
                    return Err(ExpandError::TypeMismatch {
                        variable: name.clone(),
                        value: other.clone(),
                    })
                }
            }
        }
        Ok(())
    }

    /// Instantiates the template with one binding row.
    ///
    /// Activities whose id is a variable and which have no start time in the
    /// template take the row's timestamp as their start time.
    pub fn expand(&self, row: &BindingRow) -> Result<ProvDocument, ExpandError> {
        self.check_row(row)?;
        let subst_id = |q: &QualifiedName| -> QualifiedName {
            match var_name(q) {
                Some(name) => row.values[name]
                    .as_qname()
                    .expect("identifier bindings checked")
                    .clone(),
                None => q.clone(),
            }
        };
        let subst_value = |v: &Literal| -> Literal {
            match v.as_qname().and_then(var_name) {
                Some(name) => row.values[name].clone(),
                None => v.clone(),
            }
        };
        let subst_attrs = |attrs: &BTreeSet<Attribute>| {
            attrs
                .iter()
                .map(|a| Attribute::new(a.key.clone(), subst_value(&a.value)))
                .collect()
        };

        let mut out = ProvDocument::new();
        for (prefix, uri) in self.body.namespaces() {
            if prefix != ids::VAR.0 {
                out.add_namespace(prefix.clone(), uri.clone())?;
            }
        }
        for node in self.body.nodes() {
            let mut expanded = ProvNode::new(node.kind, subst_id(&node.id)).with_times(node.start_time, node.end_time);
            expanded.attrs = subst_attrs(&node.attrs);
            if node.kind == NodeKind::Activity && var_name(&node.id).is_some() && expanded.start_time.is_none() {
                expanded.start_time = Some(row.timestamp);
            }
            out.add_node(expanded)?;
        }
        for rel in self.body.relations() {
            let mut expanded = ProvRelation::new(rel.kind, subst_id(&rel.source), subst_id(&rel.target));
            expanded.time = rel.time;
            expanded.attrs = subst_attrs(&rel.attrs);
            out.add_relation(expanded)?;
        }
        out.validate()?;
        Ok(out)
    }
}

/// One runtime record of variable assignments for a template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingRow {
    pub template_id: String,
    pub trace_id: String,
    pub timestamp: Timestamp,
    #[serde(default)]
    pub seq: u64,
    pub values: BTreeMap<String, Literal>,
}

impl BindingRow {
    pub fn new(template_id: impl Into<String>, trace_id: impl Into<String>, timestamp: Timestamp) -> Self {
        Self {
            template_id: template_id.into(),
            trace_id: trace_id.into(),
            timestamp,
            seq: 0,
            values: BTreeMap::new(),
        }
    }

    pub fn bind(mut self, variable: impl Into<String>, value: impl Into<Literal>) -> Self {
        self.values.insert(variable.into(), value.into());
        self
    }

    pub fn value(&self, variable: &str) -> Option<&Literal> {
        self.values.get(variable)
    }
}

/// Failure while expanding a batch of rows. Indices refer to the input list.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("row {index}{}: {source}", .conflicts_with.map(|i| format!(" (conflicts with row {i})")).unwrap_or_default())]
pub struct ExpandAllError {
    pub index: usize,
    pub conflicts_with: Option<usize>,
    #[source]
    pub source: ExpandError,
}

/// Expands every row and merges the results, processing rows in
/// `(timestamp, trace_id)` order.
pub fn expand_all(catalogue: &TemplateCatalogue, rows: &[BindingRow]) -> Result<ProvDocument, ExpandAllError> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&rows[a], &rows[b]);
        (ra.timestamp, &ra.trace_id, ra.seq, a).cmp(&(rb.timestamp, &rb.trace_id, rb.seq, b))
    });
    let mut doc = ProvDocument::new();
    let mut origin: BTreeMap<QualifiedName, usize> = BTreeMap::new();
    for index in order {
        let row = &rows[index];
        let fail = |source: ExpandError, conflicts_with: Option<usize>| ExpandAllError {
            index,
            conflicts_with,
            source,
        };
        let template = catalogue
            .get(&row.template_id)
            .ok_or_else(|| fail(ExpandError::UnknownTemplate(row.template_id.clone()), None))?;
        let expanded = template.expand(row).map_err(|e| fail(e, None))?;
        if let Err(err) = doc.absorb(&expanded) {
            let other = match &err {
                ProvError::IdConflict { id, .. } => origin.get(id).copied(),
                _ => None,
            };
            return Err(fail(err.into(), other));
        }
        for node in expanded.nodes() {
            origin.entry(node.id.clone()).or_insert(index);
        }
    }
    Ok(doc)
}
