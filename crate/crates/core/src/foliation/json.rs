//! Versioned JSON schema for foliation graphs. Numeric parameters that may
//! be infinite are encoded as numbers or the string sentinels
//! `"-inf"`/`"+inf"`, intervals as two-element arrays.

use super::{Edge, EdgeKind, FoliationGraph, VertexKind};
use crate::error::{Error, Result};
use crate::geometry::Side;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

fn num(v: f64) -> Value {
    if v == f64::INFINITY {
        json!("+inf")
    } else if v == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(v)
    }
}

fn parse_num(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Schema(format!("bad number {n}"))),
        Value::String(s) => match s.as_str() {
            "+inf" | "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(Error::Schema(format!("bad numeric sentinel `{other}`"))),
        },
        other => Err(Error::Schema(format!("expected number, got {other}"))),
    }
}

fn side_str(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn parse_side(v: &Value) -> Result<Side> {
    match v.as_str() {
        Some("left") => Ok(Side::Left),
        Some("right") => Ok(Side::Right),
        other => Err(Error::Schema(format!("bad side {other:?}"))),
    }
}

fn arcs_json(arcs: &[(f64, f64)]) -> Value {
    Value::Array(
        arcs.iter()
            .map(|&(l, r)| json!([num(l), num(r)]))
            .collect(),
    )
}

fn parse_arcs(v: &Value) -> Result<Vec<(f64, f64)>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Schema("arcs must be an array".into()))?;
    arr.iter()
        .map(|pair| {
            let p = pair
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Schema("arc must be [lo, hi]".into()))?;
            Ok((parse_num(&p[0])?, parse_num(&p[1])?))
        })
        .collect()
}

fn vertex_json(vk: &VertexKind) -> Value {
    match vk {
        VertexKind::Angle { u } => json!({"kind": "angle", "u": num(*u)}),
        VertexKind::Trolleybus { side, a, b } => {
            json!({"kind": "trolleybus", "side": side_str(*side), "a": num(*a), "b": num(*b)})
        }
        VertexKind::Birdie { a, b } => json!({"kind": "birdie", "a": num(*a), "b": num(*b)}),
        VertexKind::Multicup { arcs } => json!({"kind": "multicup", "arcs": arcs_json(arcs)}),
        VertexKind::Multitrolleybus { side, arcs } => {
            json!({"kind": "multitrolleybus", "side": side_str(*side), "arcs": arcs_json(arcs)})
        }
        VertexKind::Multibirdie { arcs } => {
            json!({"kind": "multibirdie", "arcs": arcs_json(arcs)})
        }
        VertexKind::ClosedMulticup { arcs } => {
            json!({"kind": "closed-multicup", "arcs": arcs_json(arcs)})
        }
        VertexKind::LongChord { a, b } => {
            json!({"kind": "long-chord", "a": num(*a), "b": num(*b)})
        }
        VertexKind::CupOrigin { c } => json!({"kind": "cup-origin", "c": num(*c)}),
        VertexKind::PastedChord { a, b } => {
            json!({"kind": "pasted-chord", "a": num(*a), "b": num(*b)})
        }
        VertexKind::Infinity { sign } => {
            json!({"kind": "infinity", "sign": if *sign < 0 { -1 } else { 1 }})
        }
        VertexKind::SingleTangent { side, u } => {
            json!({"kind": "single-tangent", "side": side_str(*side), "u": num(*u)})
        }
    }
}

fn parse_vertex(v: &Value) -> Result<VertexKind> {
    let kind = v["kind"]
        .as_str()
        .ok_or_else(|| Error::Schema("vertex missing kind".into()))?;
    Ok(match kind {
        "angle" => VertexKind::Angle {
            u: parse_num(&v["u"])?,
        },
        "trolleybus" => VertexKind::Trolleybus {
            side: parse_side(&v["side"])?,
            a: parse_num(&v["a"])?,
            b: parse_num(&v["b"])?,
        },
        "birdie" => VertexKind::Birdie {
            a: parse_num(&v["a"])?,
            b: parse_num(&v["b"])?,
        },
        "multicup" => VertexKind::Multicup {
            arcs: parse_arcs(&v["arcs"])?,
        },
        "multitrolleybus" => VertexKind::Multitrolleybus {
            side: parse_side(&v["side"])?,
            arcs: parse_arcs(&v["arcs"])?,
        },
        "multibirdie" => VertexKind::Multibirdie {
            arcs: parse_arcs(&v["arcs"])?,
        },
        "closed-multicup" => VertexKind::ClosedMulticup {
            arcs: parse_arcs(&v["arcs"])?,
        },
        "long-chord" => VertexKind::LongChord {
            a: parse_num(&v["a"])?,
            b: parse_num(&v["b"])?,
        },
        "cup-origin" => VertexKind::CupOrigin {
            c: parse_num(&v["c"])?,
        },
        "pasted-chord" => VertexKind::PastedChord {
            a: parse_num(&v["a"])?,
            b: parse_num(&v["b"])?,
        },
        "infinity" => VertexKind::Infinity {
            sign: if v["sign"].as_i64().unwrap_or(1) < 0 { -1 } else { 1 },
        },
        "single-tangent" => VertexKind::SingleTangent {
            side: parse_side(&v["side"])?,
            u: parse_num(&v["u"])?,
        },
        other => return Err(Error::Schema(format!("unknown vertex kind `{other}`"))),
    })
}

fn edge_json(e: &Edge) -> Value {
    match &e.kind {
        EdgeKind::Tangent { side, lo, hi } => json!({
            "kind": "tangent",
            "side": side_str(*side),
            "from": e.from,
            "to": e.to,
            "interval": [num(*lo), num(*hi)],
        }),
        EdgeKind::Chordal { top, bottom } => json!({
            "kind": "chordal",
            "from": e.from,
            "to": e.to,
            "top": [num(top.0), num(top.1)],
            "bottom": [num(bottom.0), num(bottom.1)],
        }),
    }
}

fn parse_edge(v: &Value) -> Result<Edge> {
    let kind = v["kind"]
        .as_str()
        .ok_or_else(|| Error::Schema("edge missing kind".into()))?;
    let from = v["from"]
        .as_u64()
        .ok_or_else(|| Error::Schema("edge missing from".into()))? as usize;
    let to = v["to"]
        .as_u64()
        .ok_or_else(|| Error::Schema("edge missing to".into()))? as usize;
    let pair = |key: &str| -> Result<(f64, f64)> {
        let arr = v[key]
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::Schema(format!("edge missing {key}")))?;
        Ok((parse_num(&arr[0])?, parse_num(&arr[1])?))
    };
    let kind = match kind {
        "tangent" => {
            let (lo, hi) = pair("interval")?;
            EdgeKind::Tangent {
                side: parse_side(&v["side"])?,
                lo,
                hi,
            }
        }
        "chordal" => EdgeKind::Chordal {
            top: pair("top")?,
            bottom: pair("bottom")?,
        },
        other => return Err(Error::Schema(format!("unknown edge kind `{other}`"))),
    };
    Ok(Edge { from, to, kind })
}

/// Serialize a graph to its JSON schema.
pub fn export_graph(graph: &FoliationGraph) -> Value {
    json!({
        "version": SCHEMA_VERSION,
        "eps": graph.eps,
        "vertices": graph.vertices.iter().map(vertex_json).collect::<Vec<_>>(),
        "edges": graph.edges.iter().map(edge_json).collect::<Vec<_>>(),
    })
}

/// Parse a graph from its JSON schema.
pub fn import_graph(v: &Value) -> Result<FoliationGraph> {
    let version = v["version"]
        .as_u64()
        .ok_or_else(|| Error::Schema("missing version".into()))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(Error::Schema(format!(
            "schema version mismatch: file has {version}, expected {SCHEMA_VERSION}"
        )));
    }
    let eps = v["eps"]
        .as_f64()
        .ok_or_else(|| Error::Schema("missing eps".into()))?;
    let vertices = v["vertices"]
        .as_array()
        .ok_or_else(|| Error::Schema("missing vertices".into()))?
        .iter()
        .map(parse_vertex)
        .collect::<Result<Vec<_>>>()?;
    let edges = v["edges"]
        .as_array()
        .ok_or_else(|| Error::Schema("missing edges".into()))?
        .iter()
        .map(parse_edge)
        .collect::<Result<Vec<_>>>()?;
    let graph = FoliationGraph {
        eps,
        vertices,
        edges,
    };
    graph.validate_structure()?;
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_graph() -> FoliationGraph {
        FoliationGraph {
            eps: 0.3,
            vertices: vec![
                VertexKind::Infinity { sign: 1 },
                VertexKind::Infinity { sign: -1 },
            ],
            edges: vec![Edge {
                from: 0,
                to: 1,
                kind: EdgeKind::Tangent {
                    side: Side::Left,
                    lo: f64::NEG_INFINITY,
                    hi: f64::INFINITY,
                },
            }],
        }
    }

    #[test]
    fn round_trip_identity() {
        let g = simple_graph();
        let v = export_graph(&g);
        let g2 = import_graph(&v).unwrap();
        assert_eq!(g, g2);
        // Sentinels survive the trip.
        assert_eq!(v["edges"][0]["interval"][0], "-inf");
    }

    #[test]
    fn version_mismatch_rejected() {
        let mut v = export_graph(&simple_graph());
        v["version"] = serde_json::json!(99);
        assert!(matches!(import_graph(&v), Err(Error::Schema(_))));
    }

    #[test]
    fn empty_graph_rejected() {
        let v = serde_json::json!({
            "version": SCHEMA_VERSION, "eps": 0.1, "vertices": [], "edges": [],
        });
        assert!(import_graph(&v).is_err());
    }
}
