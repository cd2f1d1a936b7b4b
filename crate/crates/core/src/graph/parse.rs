use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{EdgeRecord, GraphError, MultiGraph, Objective, ProblemInstance, UpgradeEdge, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("`{directive}` expects {expected}")]
    Arity { directive: &'static str, expected: &'static str },
    #[error("negative number `{0}`")]
    Negative(String),
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("`{0}` given more than once")]
    Repeated(&'static str),
    #[error("both budget and demand given")]
    ConflictingObjective,
    #[error("missing `{0}` directive")]
    Missing(&'static str),
    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(String),
    #[error("edge {0} is a self-loop")]
    SelfLoop(String),
    #[error("vertex {vertex} out of range for a {n}-vertex graph")]
    VertexOutOfRange { vertex: VertexId, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number, when the error belongs to a single line.
    pub line: Option<usize>,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

fn at(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line: Some(line), kind }
}

fn number(tok: &str, line: usize) -> Result<u64, ParseError> {
    if tok.starts_with('-') && tok.len() > 1 {
        return Err(at(line, ParseErrorKind::Negative(tok.to_string())));
    }
    if !tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(at(line, ParseErrorKind::BadNumber(tok.to_string())));
    }
    tok.parse().map_err(|_| at(line, ParseErrorKind::BadNumber(tok.to_string())))
}

fn vertex(tok: &str, line: usize) -> Result<VertexId, ParseError> {
    let v = number(tok, line)?;
    usize::try_from(v).map_err(|_| at(line, ParseErrorKind::BadNumber(tok.to_string())))
}

fn once<T>(slot: &mut Option<(T, usize)>, value: T, line: usize, name: &'static str) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(at(line, ParseErrorKind::Repeated(name)));
    }
    *slot = Some((value, line));
    Ok(())
}

/// Parses the line-oriented instance format.
///
/// ```text
/// graph <n>
/// terminals <a> <b>          # optional
/// source <s>
/// sink <t>
/// edge <id> <u> <v> <cost> <capacity>
/// upedge <id> <u> <v> <k> <c1> <u1> ... <ck> <uk>
/// budget <B> | demand <D>
/// ```
pub fn parse_instance(text: &str) -> Result<ProblemInstance, ParseError> {
    let mut n = None;
    let mut terminals = None;
    let mut source = None;
    let mut sink = None;
    let mut objective: Option<(Objective, usize)> = None;
    let mut edges: Vec<(EdgeRecord, usize)> = Vec::new();
    let mut upgrades: Vec<(UpgradeEdge, usize)> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, args)) = toks.split_first() else {
            continue;
        };
        let arity = |want: usize, directive: &'static str, expected: &'static str| {
            if args.len() == want {
                Ok(())
            } else {
                Err(at(line, ParseErrorKind::Arity { directive, expected }))
            }
        };
        match head {
            "graph" => {
                arity(1, "graph", "one vertex count")?;
                once(&mut n, vertex(args[0], line)?, line, "graph")?;
            }
            "terminals" => {
                arity(2, "terminals", "two vertices")?;
                let pair = (vertex(args[0], line)?, vertex(args[1], line)?);
                once(&mut terminals, pair, line, "terminals")?;
            }
            "source" => {
                arity(1, "source", "one vertex")?;
                once(&mut source, vertex(args[0], line)?, line, "source")?;
            }
            "sink" => {
                arity(1, "sink", "one vertex")?;
                once(&mut sink, vertex(args[0], line)?, line, "sink")?;
            }
            "budget" | "demand" => {
                arity(1, if head == "budget" { "budget" } else { "demand" }, "one number")?;
                let value = number(args[0], line)?;
                if objective.is_some() {
                    return Err(at(line, ParseErrorKind::ConflictingObjective));
                }
                let obj = if head == "budget" { Objective::Budget(value) } else { Objective::Demand(value) };
                objective = Some((obj, line));
            }
            "edge" => {
                arity(5, "edge", "<id> <u> <v> <cost> <capacity>")?;
                let id = args[0].to_string();
                let (u, v) = (vertex(args[1], line)?, vertex(args[2], line)?);
                let (cost, capacity) = (number(args[3], line)?, number(args[4], line)?);
                if u == v {
                    return Err(at(line, ParseErrorKind::SelfLoop(id)));
                }
                if ids.insert(id.clone(), line).is_some() {
                    return Err(at(line, ParseErrorKind::DuplicateEdgeId(id)));
                }
                edges.push((EdgeRecord { id, u, v, cost, capacity }, line));
            }
            "upedge" => {
                if args.len() < 4 {
                    return Err(at(
                        line,
                        ParseErrorKind::Arity {
                            directive: "upedge",
                            expected: "<id> <u> <v> <k> followed by k cost/capacity pairs",
                        },
                    ));
                }
                let id = args[0].to_string();
                let (u, v) = (vertex(args[1], line)?, vertex(args[2], line)?);
                let k = vertex(args[3], line)?;
                if args.len() != 4 + 2 * k {
                    return Err(at(
                        line,
                        ParseErrorKind::Arity { directive: "upedge", expected: "exactly k cost/capacity pairs" },
                    ));
                }
                let mut choices = Vec::with_capacity(k);
                for pair in args[4..].chunks(2) {
                    choices.push((number(pair[0], line)?, number(pair[1], line)?));
                }
                if u == v {
                    return Err(at(line, ParseErrorKind::SelfLoop(id)));
                }
                if ids.insert(id.clone(), line).is_some() {
                    return Err(at(line, ParseErrorKind::DuplicateEdgeId(id)));
                }
                upgrades.push((UpgradeEdge { id, u, v, choices }, line));
            }
            other => return Err(at(line, ParseErrorKind::UnknownDirective(other.to_string()))),
        }
    }

    let missing = |what| ParseError { line: None, kind: ParseErrorKind::Missing(what) };
    let (n, _) = n.ok_or_else(|| missing("graph"))?;
    let (source, source_line) = source.ok_or_else(|| missing("source"))?;
    let (sink, sink_line) = sink.ok_or_else(|| missing("sink"))?;
    let (objective, _) = objective.ok_or_else(|| missing("budget or demand"))?;

    let check = |v: VertexId, line: usize| {
        if v < n {
            Ok(())
        } else {
            Err(at(line, ParseErrorKind::VertexOutOfRange { vertex: v, n }))
        }
    };
    check(source, source_line)?;
    check(sink, sink_line)?;
    if let Some(((a, b), line)) = terminals {
        check(a, line)?;
        check(b, line)?;
    }
    for (e, line) in &edges {
        check(e.u, *line)?;
        check(e.v, *line)?;
    }
    for (up, line) in &upgrades {
        check(up.u, *line)?;
        check(up.v, *line)?;
    }
    if source == sink {
        return Err(at(sink_line, GraphError::SourceEqualsSink(source).into()));
    }

    let graph =
        MultiGraph::new(n, edges.into_iter().map(|(e, _)| e).collect(), source, sink, terminals.map(|(t, _)| t))
            .map_err(|e| ParseError { line: None, kind: e.into() })?;
    Ok(ProblemInstance { graph, objective, upgrades: upgrades.into_iter().map(|(u, _)| u).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_instance() {
        let inst = parse_instance("graph 2\nsource 0\nsink 1\nedge e1 0 1 5 7\nbudget 5\n").unwrap();
        assert_eq!(inst.graph.vertex_count(), 2);
        assert_eq!(inst.graph.edges(), &[EdgeRecord::new("e1", 0, 1, 5, 7)]);
        assert_eq!(inst.objective, Objective::Budget(5));
        assert!(inst.upgrades.is_empty());
    }

    #[test]
    fn self_loop_is_rejected_with_line() {
        let err = parse_instance("graph 2\nsource 0\nsink 1\nedge e1 0 0 5 7\nbudget 5\n").unwrap_err();
        assert_eq!(err.line, Some(4));
        assert_eq!(err.kind, ParseErrorKind::SelfLoop("e1".into()));
    }

    #[test]
    fn diamond_with_comments() {
        let text =
            "# diamond\ngraph 3\nsource 0 # s\nsink 2\n\nedge e1 0 1 1 2\nedge e2 1 2 1 2\nedge e3 0 2 3 1\ndemand 1\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.graph.edge_count(), 3);
        assert_eq!(inst.objective, Objective::Demand(1));
    }

    #[test]
    fn error_cases() {
        let base = "graph 2\nsource 0\nsink 1\n";
        let cases = [
            (format!("{base}edge a 0 1 1 1\nedge a 0 1 1 1\nbudget 1"), Some(5)),
            (format!("{base}edge a 0 1 -1 1\nbudget 1"), Some(4)),
            (format!("{base}edge a 0 1 x 1\nbudget 1"), Some(4)),
            (format!("{base}edge a 0 1 1\nbudget 1"), Some(4)),
            (format!("{base}frob 1\nbudget 1"), Some(4)),
            (format!("{base}budget 1\ndemand 1"), Some(5)),
            (format!("{base}edge a 0 5 1 1\nbudget 1"), Some(4)),
            (format!("{base}edge a 0 1 1 1"), None),
            ("graph 2\nsink 1\nbudget 1".to_string(), None),
            ("graph 2\nsource 0\nsink 0\nbudget 1".to_string(), Some(3)),
        ];
        for (text, line) in cases {
            let err = parse_instance(&text).unwrap_err();
            assert_eq!(err.line, line, "{text}: {err}");
        }
        let err = parse_instance(&format!("{base}edge a 0 1 -3 1\nbudget 1")).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Negative("-3".into()));
        let err = parse_instance("graph 2\nsink 1\nbudget 1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Missing("source"));
    }

    #[test]
    fn upgrade_edges() {
        let text = "graph 2\nsource 0\nsink 1\nupedge u 0 1 2 4 10 7 20\ndemand 5\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.upgrades[0].choices, vec![(4, 10), (7, 20)]);
        assert!(parse_instance("graph 2\nsource 0\nsink 1\nupedge u 0 1 2 4 10\ndemand 5\n").is_err());
    }

    #[test]
    fn display_round_trips() {
        let text = "graph 3\nterminals 0 2\nsource 1\nsink 2\nedge e1 0 1 1 2\nedge e2 1 2 1 2\nupedge u 0 2 1 3 4\nbudget 9\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.to_string(), text);
        assert_eq!(parse_instance(&inst.to_string()).unwrap(), inst);
    }
}
