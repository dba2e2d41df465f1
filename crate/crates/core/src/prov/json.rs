//! Diagnostic JSON-lines view of a document: one object per statement.

use serde_json::{json, Value};

use super::model::ProvDocument;

pub fn to_json_lines(doc: &ProvDocument) -> String {
    let mut out = String::new();
    let mut push = |v: Value| {
        out.push_str(&v.to_string());
        out.push('\n');
    };
    for (prefix, uri) in doc.namespaces() {
        push(json!({ "statement": "prefix", "prefix": prefix, "uri": uri }));
    }
    for node in doc.nodes() {
        let mut v = serde_json::to_value(node).expect("node serializes");
        v["statement"] = json!(node.kind.keyword());
        push(v);
    }
    for rel in doc.sorted_relations() {
        let mut v = serde_json::to_value(rel).expect("relation serializes");
        v["statement"] = json!(rel.kind.keyword());
        push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prov::{ProvNode, QualifiedName};

    #[test]
    fn one_line_per_statement() {
        let mut doc = ProvDocument::new();
        doc.add_namespace("ex", "http://e/").unwrap();
        let id: QualifiedName = "ex:a".parse().unwrap();
        doc.add_node(ProvNode::entity(id)).unwrap();
        let text = to_json_lines(&doc);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let node: Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(node["statement"], "entity");
        assert_eq!(node["id"], "ex:a");
    }
}
