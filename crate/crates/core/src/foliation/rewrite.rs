//! Graph rewrites at critical points of the evolution: the composition
//! rules that merge figures across vanishing edges, and the disintegrations
//! that split multifigures at the start of a step.

use super::{Edge, EdgeKind, EdgeId, FoliationGraph, VertexId, VertexKind};
use crate::error::{Error, Result};
use crate::geometry::Side;

/// A crash event identified by the evolution driver.
#[derive(Debug, Clone, PartialEq)]
pub enum CrashEvent {
    /// A tangent edge's interval shrank to a point: merge its endpoints
    /// (angle + long chord = trolleybus, angle + multicup = multitrolleybus,
    /// angle + multitrolleybus = multibirdie, long chord + multitrolleybus =
    /// multicup, long chord + multibirdie = multitrolleybus, trolleybus +
    /// angle = birdie).
    ZeroTangentEdge { edge: EdgeId },
    /// A trolleybus base shrank to a point at an essential root: it becomes
    /// a fictitious single tangent there.
    ZeroWidthTrolleybus { vertex: VertexId },
    /// A chordal edge with coinciding top and bottom chords between a closed
    /// multicup and a trolleybus/birdie: merge (closed multicup + trolleybus
    /// = multitrolleybus, closed multicup + birdie = multibirdie).
    DegenerateChordalEdge { edge: EdgeId },
    /// Split a multitrolleybus into its trolleybus parade.
    DisintegrateMultitrolleybus { vertex: VertexId },
    /// Split a multibirdie at arc index `j`.
    DisintegrateMultibirdie { vertex: VertexId, j: usize },
    /// Split a birdie into an angle and a trolleybus (angle on the right
    /// when `angle_right`).
    DisintegrateBirdie { vertex: VertexId, angle_right: bool },
}

/// Remove `removed` vertices, add `added`, remap edges, drop edges listed in
/// `drop_edges`, and reattach any edge touching a removed vertex to
/// `replacement`.
fn surgery(
    graph: &FoliationGraph,
    removed: &[VertexId],
    replacement_kind: VertexKind,
    drop_edges: &[EdgeId],
) -> FoliationGraph {
    let mut vertices = Vec::new();
    let mut map = vec![usize::MAX; graph.vertices.len()];
    for (i, vk) in graph.vertices.iter().enumerate() {
        if removed.contains(&i) {
            continue;
        }
        map[i] = vertices.len();
        vertices.push(vk.clone());
    }
    let replacement = vertices.len();
    vertices.push(replacement_kind);
    for &r in removed {
        map[r] = replacement;
    }
    let edges = graph
        .edges
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop_edges.contains(i))
        .map(|(_, e)| Edge {
            from: map[e.from],
            to: map[e.to],
            kind: e.kind.clone(),
        })
        .collect();
    FoliationGraph {
        eps: graph.eps,
        vertices,
        edges,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-7 * (1.0 + a.abs().max(b.abs()))
}

/// Composition across a vanished tangent edge.
fn merge_pair(p: &VertexKind, q: &VertexKind, at: f64) -> Result<VertexKind> {
    use VertexKind::*;
    // Normalize order: handle (p, q) and (q, p) the same.
    let pairs = [(p, q), (q, p)];
    for (x, y) in pairs {
        match (x, y) {
            (Angle { u }, LongChord { a, b }) | (Angle { u }, PastedChord { a, b }) => {
                if close(*u, *a) {
                    return Ok(Trolleybus {
                        side: Side::Right,
                        a: *a,
                        b: *b,
                    });
                }
                if close(*u, *b) {
                    return Ok(Trolleybus {
                        side: Side::Left,
                        a: *a,
                        b: *b,
                    });
                }
            }
            (Angle { u }, Trolleybus { side, a, b }) => {
                // trolleybus + angle = birdie (the angle adjoins on the
                // outgoing side of the trolleybus).
                match side {
                    Side::Right if close(*u, *b) => {
                        return Ok(Birdie { a: *a, b: *b });
                    }
                    Side::Left if close(*u, *a) => {
                        return Ok(Birdie { a: *a, b: *b });
                    }
                    _ => {}
                }
            }
            (Angle { u }, Multicup { arcs }) => {
                if close(*u, arcs.first().unwrap().0) {
                    return Ok(Multitrolleybus {
                        side: Side::Right,
                        arcs: arcs.clone(),
                    });
                }
                if close(*u, arcs.last().unwrap().1) {
                    return Ok(Multitrolleybus {
                        side: Side::Left,
                        arcs: arcs.clone(),
                    });
                }
            }
            (Angle { u }, Multitrolleybus { side, arcs }) => match side {
                Side::Right if close(*u, arcs.last().unwrap().1) => {
                    return Ok(Multibirdie { arcs: arcs.clone() });
                }
                Side::Left if close(*u, arcs.first().unwrap().0) => {
                    return Ok(Multibirdie { arcs: arcs.clone() });
                }
                _ => {}
            },
            (LongChord { a, b }, Multibirdie { arcs })
            | (PastedChord { a, b }, Multibirdie { arcs }) => {
                if close(*b, arcs.first().unwrap().0) {
                    let mut new_arcs = vec![(*a, *a)];
                    new_arcs.extend_from_slice(arcs);
                    return Ok(Multitrolleybus {
                        side: Side::Left,
                        arcs: new_arcs,
                    });
                }
                if close(*a, arcs.last().unwrap().1) {
                    let mut new_arcs = arcs.clone();
                    new_arcs.push((*b, *b));
                    return Ok(Multitrolleybus {
                        side: Side::Right,
                        arcs: new_arcs,
                    });
                }
            }
            (LongChord { a, b }, Multitrolleybus { side, arcs })
            | (PastedChord { a, b }, Multitrolleybus { side, arcs }) => match side {
                Side::Right if close(*b, arcs.first().unwrap().0) => {
                    let mut new_arcs = vec![(*a, *a)];
                    new_arcs.extend_from_slice(arcs);
                    return Ok(Multicup { arcs: new_arcs });
                }
                Side::Left if close(*a, arcs.last().unwrap().1) => {
                    let mut new_arcs = arcs.clone();
                    new_arcs.push((*b, *b));
                    return Ok(Multicup { arcs: new_arcs });
                }
                _ => {}
            },
            (SingleTangent { u, .. }, other) => {
                // A fifth-type vertex is a zero-width trolleybus; merging it
                // across a zero edge behaves like an angle merge only for
                // chords (used when a cup's long chord hits the root).
                if let LongChord { a, b } = other {
                    if close(*u, *a) {
                        return Ok(Trolleybus {
                            side: Side::Right,
                            a: *a,
                            b: *b,
                        });
                    }
                    if close(*u, *b) {
                        return Ok(Trolleybus {
                            side: Side::Left,
                            a: *a,
                            b: *b,
                        });
                    }
                }
            }
            _ => {}
        }
    }
    Err(Error::NoRewrite {
        op: "graph_rewrite",
        msg: format!("no composition rule for {p:?} + {q:?} at t = {at}"),
    })
}

/// Apply a rewrite rule for the event, producing a structurally valid graph.
pub fn graph_rewrite(graph: &FoliationGraph, event: &CrashEvent) -> Result<FoliationGraph> {
    use VertexKind::*;
    let out = match event {
        CrashEvent::ZeroTangentEdge { edge } => {
            let e = graph.edges.get(*edge).ok_or(Error::NoRewrite {
                op: "graph_rewrite",
                msg: format!("no such edge {edge}"),
            })?;
            let EdgeKind::Tangent { lo, hi, .. } = e.kind else {
                return Err(Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: "event names a chordal edge as a zero tangent edge".into(),
                });
            };
            if !close(lo, hi) {
                return Err(Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: format!("tangent edge [{lo}, {hi}] has positive length"),
                });
            }
            let merged = merge_pair(&graph.vertices[e.from], &graph.vertices[e.to], lo)?;
            surgery(graph, &[e.from, e.to], merged, &[*edge])
        }
        CrashEvent::ZeroWidthTrolleybus { vertex } => {
            let Trolleybus { side, a, b } = &graph.vertices[*vertex] else {
                return Err(Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: format!("vertex {vertex} is not a trolleybus"),
                });
            };
            if !close(*a, *b) {
                return Err(Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: format!("trolleybus base ({a}, {b}) has positive width"),
                });
            }
            let u = 0.5 * (a + b);
            let side = *side;
            // Drop the outgoing chordal edge and the cup origin below it.
            let mut drop_edges = vec![];
            let mut removed = vec![*vertex];
            for (i, e) in graph.edges.iter().enumerate() {
                if e.from == *vertex {
                    if let EdgeKind::Chordal { .. } = e.kind {
                        drop_edges.push(i);
                        if matches!(graph.vertices[e.to], CupOrigin { .. }) {
                            removed.push(e.to);
                        }
                    }
                }
            }
            surgery(graph, &removed, SingleTangent { side, u }, &drop_edges)
        }
        CrashEvent::DegenerateChordalEdge { edge } => {
            let e = graph.edges.get(*edge).ok_or(Error::NoRewrite {
                op: "graph_rewrite",
                msg: format!("no such edge {edge}"),
            })?;
            let EdgeKind::Chordal { top, bottom } = e.kind else {
                return Err(Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: "event names a tangent edge as a degenerate chordal edge".into(),
                });
            };
            if !(close(top.0, bottom.0) && close(top.1, bottom.1)) {
                return Err(Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: "chordal edge is not degenerate".into(),
                });
            }
            let (p, q) = (&graph.vertices[e.from], &graph.vertices[e.to]);
            let merged = match (p, q) {
                (Trolleybus { side, .. }, ClosedMulticup { arcs })
                | (ClosedMulticup { arcs }, Trolleybus { side, .. }) => Multitrolleybus {
                    side: *side,
                    arcs: arcs.clone(),
                },
                (Birdie { .. }, ClosedMulticup { arcs })
                | (ClosedMulticup { arcs }, Birdie { .. }) => Multibirdie { arcs: arcs.clone() },
                other => {
                    return Err(Error::NoRewrite {
                        op: "graph_rewrite",
                        msg: format!("no composition for {other:?} across a degenerate chord"),
                    })
                }
            };
            surgery(graph, &[e.from, e.to], merged, &[*edge])
        }
        CrashEvent::DisintegrateMultitrolleybus { vertex } => {
            let Multitrolleybus { side, arcs } = &graph.vertices[*vertex] else {
                return Err(Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: format!("vertex {vertex} is not a multitrolleybus"),
                });
            };
            disintegrate_multitrolleybus(graph, *vertex, *side, arcs.clone())?
        }
        CrashEvent::DisintegrateMultibirdie { vertex, j } => {
            let Multibirdie { arcs } = &graph.vertices[*vertex] else {
                return Err(Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: format!("vertex {vertex} is not a multibirdie"),
                });
            };
            disintegrate_multibirdie(graph, *vertex, arcs.clone(), *j)?
        }
        CrashEvent::DisintegrateBirdie {
            vertex,
            angle_right,
        } => {
            let Birdie { a, b } = &graph.vertices[*vertex] else {
                return Err(Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: format!("vertex {vertex} is not a birdie"),
                });
            };
            let (a, b) = (*a, *b);
            disintegrate_birdie(graph, *vertex, a, b, *angle_right)?
        }
    };
    out.validate_structure()?;
    Ok(out)
}

/// Replace one vertex with a chain of new vertices joined by fresh tangent
/// edges, reattaching existing edges by a caller-supplied rule.
struct ChainBuilder {
    vertices: Vec<VertexKind>,
    edges: Vec<Edge>,
}

fn rebuild_without(graph: &FoliationGraph, vertex: VertexId) -> (ChainBuilder, Vec<usize>) {
    let mut vertices = Vec::new();
    let mut map = vec![usize::MAX; graph.vertices.len()];
    for (i, vk) in graph.vertices.iter().enumerate() {
        if i == vertex {
            continue;
        }
        map[i] = vertices.len();
        vertices.push(vk.clone());
    }
    (
        ChainBuilder {
            vertices,
            edges: vec![],
        },
        map,
    )
}

fn disintegrate_multitrolleybus(
    graph: &FoliationGraph,
    vertex: VertexId,
    side: Side,
    arcs: Vec<(f64, f64)>,
) -> Result<FoliationGraph> {
    let (mut cb, map) = rebuild_without(graph, vertex);
    // Parade members: one single-arc multitrolleybus (or single tangent for
    // a point arc) per arc, one trolleybus per inter-arc chord.
    let k = arcs.len();
    let mut arc_member: Vec<VertexId> = Vec::with_capacity(k);
    for &(l, r) in &arcs {
        let vk = if close(l, r) {
            VertexKind::SingleTangent { side, u: l }
        } else {
            VertexKind::Multitrolleybus {
                side,
                arcs: vec![(l, r)],
            }
        };
        arc_member.push(cb.vertices.len());
        cb.vertices.push(vk);
    }
    let mut chord_member: Vec<VertexId> = Vec::with_capacity(k.saturating_sub(1));
    for i in 0..k - 1 {
        let (a, b) = (arcs[i].1, arcs[i + 1].0);
        chord_member.push(cb.vertices.len());
        cb.vertices.push(VertexKind::Trolleybus { side, a, b });
        // Zero-length tangent edges joining the parade.
        let (from1, to1, from2, to2) = match side {
            // Right edges run left to right.
            Side::Right => (
                arc_member[i],
                chord_member[i],
                chord_member[i],
                arc_member[i + 1],
            ),
            Side::Left => (
                arc_member[i + 1],
                chord_member[i],
                chord_member[i],
                arc_member[i],
            ),
        };
        cb.edges.push(Edge {
            from: from1,
            to: to1,
            kind: EdgeKind::Tangent { side, lo: a, hi: a },
        });
        cb.edges.push(Edge {
            from: from2,
            to: to2,
            kind: EdgeKind::Tangent { side, lo: b, hi: b },
        });
    }
    // Reattach the old edges.
    for e in &graph.edges {
        let (from, to) = (e.from, e.to);
        if from != vertex && to != vertex {
            cb.edges.push(Edge {
                from: map[from],
                to: map[to],
                kind: e.kind.clone(),
            });
            continue;
        }
        let kind = e.kind.clone();
        let attach = match &kind {
            EdgeKind::Chordal { top, .. } => {
                // An outgoing chordal edge hangs under the matching chord
                // trolleybus of the parade.
                let mut who = None;
                for (i, &cm) in chord_member.iter().enumerate() {
                    let (a, b) = (arcs[i].1, arcs[i + 1].0);
                    if close(top.0, a) && close(top.1, b) {
                        who = Some(cm);
                        break;
                    }
                }
                who.ok_or_else(|| Error::NoRewrite {
                    op: "graph_rewrite",
                    msg: format!("no parade member owns the chord {top:?}"),
                })?
            }
            EdgeKind::Tangent { lo, hi, .. } => {
                // Border tangent edges attach to the end arc members.
                let endpoint = if e.from == vertex || e.to == vertex {
                    // Parameter of the shared endpoint.
                    let (l, r) = (arcs[0].0, arcs[k - 1].1);
                    if close(*lo, r) || close(*hi, r) {
                        arc_member[k - 1]
                    } else if close(*lo, l) || close(*hi, l) {
                        arc_member[0]
                    } else {
                        return Err(Error::NoRewrite {
                            op: "graph_rewrite",
                            msg: format!("tangent edge [{lo}, {hi}] does not touch the arcs"),
                        });
                    }
                } else {
                    unreachable!()
                };
                endpoint
            }
        };
        let (nf, nt) = if from == vertex {
            (attach, map[to])
        } else {
            (map[from], attach)
        };
        cb.edges.push(Edge {
            from: nf,
            to: nt,
            kind,
        });
    }
    Ok(FoliationGraph {
        eps: graph.eps,
        vertices: cb.vertices,
        edges: cb.edges,
    })
}

fn disintegrate_multibirdie(
    graph: &FoliationGraph,
    vertex: VertexId,
    arcs: Vec<(f64, f64)>,
    j: usize,
) -> Result<FoliationGraph> {
    let k = arcs.len();
    if j >= k {
        return Err(Error::NoRewrite {
            op: "graph_rewrite",
            msg: format!("multibirdie split index {j} out of range (k = {k})"),
        });
    }
    let (mut cb, map) = rebuild_without(graph, vertex);
    let (jl, jr) = arcs[j];
    // Left part: right multitrolleybus on arcs[..j] plus the point jl.
    let mut left_arcs: Vec<(f64, f64)> = arcs[..j].to_vec();
    left_arcs.push((jl, jl));
    // Right part: left multitrolleybus on the point jr plus arcs[j+1..].
    let mut right_arcs: Vec<(f64, f64)> = vec![(jr, jr)];
    right_arcs.extend_from_slice(&arcs[j + 1..]);
    let center = cb.vertices.len();
    cb.vertices.push(if close(jl, jr) {
        VertexKind::Angle { u: jl }
    } else {
        VertexKind::Multibirdie {
            arcs: vec![(jl, jr)],
        }
    });
    let left_v = if j > 0 {
        let v = cb.vertices.len();
        cb.vertices.push(VertexKind::Multitrolleybus {
            side: Side::Right,
            arcs: left_arcs.clone(),
        });
        cb.edges.push(Edge {
            from: v,
            to: center,
            kind: EdgeKind::Tangent {
                side: Side::Right,
                lo: jl,
                hi: jl,
            },
        });
        Some(v)
    } else {
        None
    };
    let right_v = if j + 1 < k {
        let v = cb.vertices.len();
        cb.vertices.push(VertexKind::Multitrolleybus {
            side: Side::Left,
            arcs: right_arcs.clone(),
        });
        cb.edges.push(Edge {
            from: v,
            to: center,
            kind: EdgeKind::Tangent {
                side: Side::Left,
                lo: jr,
                hi: jr,
            },
        });
        Some(v)
    } else {
        None
    };
    for e in &graph.edges {
        if e.from != vertex && e.to != vertex {
            cb.edges.push(Edge {
                from: map[e.from],
                to: map[e.to],
                kind: e.kind.clone(),
            });
            continue;
        }
        let attach = match &e.kind {
            EdgeKind::Chordal { top, .. } => {
                // Chords left of arc j belong to the left multitrolleybus.
                if top.1 <= jl + 1e-9 {
                    left_v.ok_or_else(|| Error::NoRewrite {
                        op: "graph_rewrite",
                        msg: "chordal edge left of the split but no left part".into(),
                    })?
                } else {
                    right_v.ok_or_else(|| Error::NoRewrite {
                        op: "graph_rewrite",
                        msg: "chordal edge right of the split but no right part".into(),
                    })?
                }
            }
            EdgeKind::Tangent { lo, hi, .. } => {
                let l_end = arcs[0].0;
                let r_end = arcs[k - 1].1;
                if close(*lo, r_end) || close(*hi, r_end) {
                    right_v.unwrap_or(center)
                } else if close(*lo, l_end) || close(*hi, l_end) {
                    left_v.unwrap_or(center)
                } else {
                    return Err(Error::NoRewrite {
                        op: "graph_rewrite",
                        msg: format!("tangent edge [{lo}, {hi}] does not touch the arcs"),
                    });
                }
            }
        };
        let (nf, nt) = if e.from == vertex {
            (attach, map[e.to])
        } else {
            (map[e.from], attach)
        };
        cb.edges.push(Edge {
            from: nf,
            to: nt,
            kind: e.kind.clone(),
        });
    }
    Ok(FoliationGraph {
        eps: graph.eps,
        vertices: cb.vertices,
        edges: cb.edges,
    })
}

fn disintegrate_birdie(
    graph: &FoliationGraph,
    vertex: VertexId,
    a: f64,
    b: f64,
    angle_right: bool,
) -> Result<FoliationGraph> {
    let (mut cb, map) = rebuild_without(graph, vertex);
    let (angle_u, tr_side, join_side, join_at) = if angle_right {
        (b, Side::Right, Side::Right, b)
    } else {
        (a, Side::Left, Side::Left, a)
    };
    let tr = cb.vertices.len();
    cb.vertices.push(VertexKind::Trolleybus {
        side: tr_side,
        a,
        b,
    });
    let ang = cb.vertices.len();
    cb.vertices.push(VertexKind::Angle { u: angle_u });
    cb.edges.push(Edge {
        from: tr,
        to: ang,
        kind: EdgeKind::Tangent {
            side: join_side,
            lo: join_at,
            hi: join_at,
        },
    });
    for e in &graph.edges {
        if e.from != vertex && e.to != vertex {
            cb.edges.push(Edge {
                from: map[e.from],
                to: map[e.to],
                kind: e.kind.clone(),
            });
            continue;
        }
        let attach = match &e.kind {
            EdgeKind::Chordal { .. } => tr,
            EdgeKind::Tangent { lo, hi, .. } => {
                // The incoming tangent at the angle's side goes to the
                // angle; the opposite one to the trolleybus.
                if close(*lo, angle_u) || close(*hi, angle_u) {
                    ang
                } else {
                    tr
                }
            }
        };
        let (nf, nt) = if e.from == vertex {
            (attach, map[e.to])
        } else {
            (map[e.from], attach)
        };
        cb.edges.push(Edge {
            from: nf,
            to: nt,
            kind: e.kind.clone(),
        });
    }
    Ok(FoliationGraph {
        eps: graph.eps,
        vertices: cb.vertices,
        edges: cb.edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// cup + long chord + two angles joined by tangent edges, with outer
    /// infinities: the generic single-cup picture.
    fn cup_with_angles() -> FoliationGraph {
        FoliationGraph {
            eps: 0.3,
            vertices: vec![
                VertexKind::Infinity { sign: -1 },          // 0
                VertexKind::Angle { u: -1.0 },              // 1
                VertexKind::LongChord { a: -0.3, b: 0.3 },  // 2
                VertexKind::CupOrigin { c: 0.0 },           // 3
                VertexKind::Angle { u: 1.0 },               // 4
                VertexKind::Infinity { sign: 1 },           // 5
            ],
            edges: vec![
                Edge {
                    from: 0,
                    to: 1,
                    kind: EdgeKind::Tangent {
                        side: Side::Right,
                        lo: f64::NEG_INFINITY,
                        hi: -1.0,
                    },
                },
                Edge {
                    from: 2,
                    to: 1,
                    kind: EdgeKind::Tangent {
                        side: Side::Left,
                        lo: -1.0,
                        hi: -0.3,
                    },
                },
                Edge {
                    from: 2,
                    to: 3,
                    kind: EdgeKind::Chordal {
                        top: (-0.3, 0.3),
                        bottom: (0.0, 0.0),
                    },
                },
                Edge {
                    from: 2,
                    to: 4,
                    kind: EdgeKind::Tangent {
                        side: Side::Right,
                        lo: 0.3,
                        hi: 1.0,
                    },
                },
                Edge {
                    from: 5,
                    to: 4,
                    kind: EdgeKind::Tangent {
                        side: Side::Left,
                        lo: 1.0,
                        hi: f64::INFINITY,
                    },
                },
            ],
        }
    }

    #[test]
    fn angle_plus_long_chord_becomes_trolleybus() {
        // Shrink the left tangent edge to zero: angle at a = -0.3.
        let mut g = cup_with_angles();
        g.vertices[1] = VertexKind::Angle { u: -0.3 };
        g.edges[1] = Edge {
            from: 2,
            to: 1,
            kind: EdgeKind::Tangent {
                side: Side::Left,
                lo: -0.3,
                hi: -0.3,
            },
        };
        let out = graph_rewrite(&g, &CrashEvent::ZeroTangentEdge { edge: 1 }).unwrap();
        assert!(out
            .vertices
            .iter()
            .any(|v| matches!(v, VertexKind::Trolleybus { side: Side::Right, a, b }
                if (*a + 0.3).abs() < 1e-12 && (*b - 0.3).abs() < 1e-12)));
        assert_eq!(out.edges.len(), 4);
        out.validate_structure().unwrap();
    }

    #[test]
    fn zero_width_trolleybus_becomes_single_tangent() {
        let g = FoliationGraph {
            eps: 0.3,
            vertices: vec![
                VertexKind::Infinity { sign: -1 },
                VertexKind::Trolleybus {
                    side: Side::Right,
                    a: 0.5,
                    b: 0.5,
                },
                VertexKind::CupOrigin { c: 0.5 },
                VertexKind::Infinity { sign: 1 },
            ],
            edges: vec![
                Edge {
                    from: 0,
                    to: 1,
                    kind: EdgeKind::Tangent {
                        side: Side::Right,
                        lo: f64::NEG_INFINITY,
                        hi: 0.5,
                    },
                },
                Edge {
                    from: 1,
                    to: 2,
                    kind: EdgeKind::Chordal {
                        top: (0.5, 0.5),
                        bottom: (0.5, 0.5),
                    },
                },
                Edge {
                    from: 1,
                    to: 3,
                    kind: EdgeKind::Tangent {
                        side: Side::Right,
                        lo: 0.5,
                        hi: f64::INFINITY,
                    },
                },
            ],
        };
        let out = graph_rewrite(&g, &CrashEvent::ZeroWidthTrolleybus { vertex: 1 }).unwrap();
        assert!(out
            .vertices
            .iter()
            .any(|v| matches!(v, VertexKind::SingleTangent { u, .. } if (*u - 0.5).abs() < 1e-12)));
        assert!(!out
            .vertices
            .iter()
            .any(|v| matches!(v, VertexKind::CupOrigin { .. })));
        out.validate_structure().unwrap();
    }

    #[test]
    fn multibirdie_splits_into_trolleybuses_and_angle() {
        let g = FoliationGraph {
            eps: 0.3,
            vertices: vec![
                VertexKind::Infinity { sign: -1 },
                VertexKind::Multibirdie {
                    arcs: vec![(-2.0, -1.5), (0.0, 0.0), (1.0, 1.5)],
                },
                VertexKind::CupOrigin { c: -1.0 },
                VertexKind::CupOrigin { c: 0.5 },
                VertexKind::Infinity { sign: 1 },
            ],
            edges: vec![
                Edge {
                    from: 0,
                    to: 1,
                    kind: EdgeKind::Tangent {
                        side: Side::Right,
                        lo: f64::NEG_INFINITY,
                        hi: -2.0,
                    },
                },
                Edge {
                    from: 1,
                    to: 2,
                    kind: EdgeKind::Chordal {
                        top: (-1.5, 0.0),
                        bottom: (-1.0, -1.0),
                    },
                },
                Edge {
                    from: 1,
                    to: 3,
                    kind: EdgeKind::Chordal {
                        top: (0.0, 1.0),
                        bottom: (0.5, 0.5),
                    },
                },
                Edge {
                    from: 4,
                    to: 1,
                    kind: EdgeKind::Tangent {
                        side: Side::Left,
                        lo: 1.5,
                        hi: f64::INFINITY,
                    },
                },
            ],
        };
        let out =
            graph_rewrite(&g, &CrashEvent::DisintegrateMultibirdie { vertex: 1, j: 1 }).unwrap();
        out.validate_structure().unwrap();
        // j = 1 is the point arc (0,0): the center becomes an angle there.
        assert!(out
            .vertices
            .iter()
            .any(|v| matches!(v, VertexKind::Angle { u } if u.abs() < 1e-12)));
        assert!(out.vertices.iter().any(
            |v| matches!(v, VertexKind::Multitrolleybus { side: Side::Right, .. })
        ));
        assert!(out.vertices.iter().any(
            |v| matches!(v, VertexKind::Multitrolleybus { side: Side::Left, .. })
        ));
    }

    #[test]
    fn birdie_splits_both_ways() {
        let g = FoliationGraph {
            eps: 0.3,
            vertices: vec![
                VertexKind::Infinity { sign: -1 },
                VertexKind::Birdie { a: -0.5, b: 0.5 },
                VertexKind::CupOrigin { c: 0.0 },
                VertexKind::Infinity { sign: 1 },
            ],
            edges: vec![
                Edge {
                    from: 0,
                    to: 1,
                    kind: EdgeKind::Tangent {
                        side: Side::Right,
                        lo: f64::NEG_INFINITY,
                        hi: -0.5,
                    },
                },
                Edge {
                    from: 1,
                    to: 2,
                    kind: EdgeKind::Chordal {
                        top: (-0.5, 0.5),
                        bottom: (0.0, 0.0),
                    },
                },
                Edge {
                    from: 3,
                    to: 1,
                    kind: EdgeKind::Tangent {
                        side: Side::Left,
                        lo: 0.5,
                        hi: f64::INFINITY,
                    },
                },
            ],
        };
        for angle_right in [true, false] {
            let out = graph_rewrite(
                &g,
                &CrashEvent::DisintegrateBirdie {
                    vertex: 1,
                    angle_right,
                },
            )
            .unwrap();
            out.validate_structure().unwrap();
            assert!(out
                .vertices
                .iter()
                .any(|v| matches!(v, VertexKind::Trolleybus { .. })));
            assert!(out
                .vertices
                .iter()
                .any(|v| matches!(v, VertexKind::Angle { .. })));
        }
    }

    #[test]
    fn no_rule_reports_configuration() {
        let g = cup_with_angles();
        // Edge 3 has positive length: not a zero-edge event.
        let err = graph_rewrite(&g, &CrashEvent::ZeroTangentEdge { edge: 3 });
        assert!(matches!(err, Err(Error::NoRewrite { .. })));
    }
}
