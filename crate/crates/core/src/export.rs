//! GraphML, DOT and CSV writers. Output is a pure function of the input so
//! repeated runs produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::coactivity::CoordinationResult;
use crate::ingest::UserRecord;
use crate::pathways::PrecedenceGraph;

/// Minimal CSV builder with RFC 4180 quoting.
#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut c = Csv::default();
        c.row(header);
        c
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line: Vec<String> = fields.iter().map(|f| quote(f.as_ref())).collect();
        self.buf.push_str(&line.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

struct NodeAttrs<'a> {
    id: &'a str,
    stance: &'static str,
    centrality: f64,
    subcluster: usize,
}

fn node_attrs<'a>(
    result: &'a CoordinationResult,
    users: &BTreeMap<String, UserRecord>,
) -> Vec<NodeAttrs<'a>> {
    result
        .subgraph
        .nodes()
        .iter()
        .map(|id| NodeAttrs {
            id,
            stance: users
                .get(id)
                .map(|u| u.stance.as_str())
                .unwrap_or("unlabeled"),
            centrality: result.centrality.get(id).copied().unwrap_or(0.0),
            subcluster: result.subcluster_of(id).unwrap_or(0),
        })
        .collect()
}

/// The coordinated subgraph as GraphML.
pub fn coordinated_graphml(
    result: &CoordinationResult,
    users: &BTreeMap<String, UserRecord>,
) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (id, name, ty) in [
        ("d0", "stance", "string"),
        ("d1", "centrality", "double"),
        ("d2", "coordinated", "boolean"),
        ("d3", "subcluster", "int"),
    ] {
        let _ = writeln!(
            s,
            "  <key id=\"{id}\" for=\"node\" attr.name=\"{name}\" attr.type=\"{ty}\"/>"
        );
    }
    s.push_str("  <key id=\"d4\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    s.push_str("  <graph id=\"coordinated\" edgedefault=\"undirected\">\n");
    for n in node_attrs(result, users) {
        let _ = writeln!(
            s,
            "    <node id=\"{}\"><data key=\"d0\">{}</data><data key=\"d1\">{}</data><data key=\"d2\">true</data><data key=\"d3\">{}</data></node>",
            xml_escape(n.id),
            n.stance,
            num(n.centrality),
            n.subcluster
        );
    }
    let g = &result.subgraph;
    for (a, b, w) in g.edges() {
        let _ = writeln!(
            s,
            "    <edge source=\"{}\" target=\"{}\"><data key=\"d4\">{}</data></edge>",
            xml_escape(&g.nodes()[a]),
            xml_escape(&g.nodes()[b]),
            num(w)
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

/// The coordinated subgraph in DOT.
pub fn coordinated_dot(
    result: &CoordinationResult,
    users: &BTreeMap<String, UserRecord>,
) -> String {
    let mut s = String::from("graph coordinated {\n");
    for n in node_attrs(result, users) {
        let _ = writeln!(
            s,
            "  {} [stance=\"{}\", centrality={}, coordinated=true, subcluster={}];",
            dot_id(n.id),
            n.stance,
            num(n.centrality),
            n.subcluster
        );
    }
    let g = &result.subgraph;
    for (a, b, w) in g.edges() {
        let _ = writeln!(
            s,
            "  {} -- {} [weight={}];",
            dot_id(&g.nodes()[a]),
            dot_id(&g.nodes()[b]),
            num(w)
        );
    }
    s.push_str("}\n");
    s
}

/// Directed precedence graph with row-normalized percentage labels.
pub fn precedence_dot(graph: &PrecedenceGraph) -> String {
    let mut s = String::from("digraph precedence {\n");
    for c in graph.classes {
        let _ = writeln!(s, "  {};", c.as_str());
    }
    for a in graph.classes {
        for b in graph.classes {
            let raw = graph.raw[a.index()][b.index()];
            if a == b || raw == 0 {
                continue;
            }
            let pct = graph.normalized[a.index()][b.index()];
            let _ = writeln!(
                s,
                "  {} -> {} [label=\"{pct:.1}%\", weight={raw}];",
                a.as_str(),
                b.as_str()
            );
        }
    }
    s.push_str("}\n");
    s
}
