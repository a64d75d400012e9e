"""JSON forms of graphs and run results (see docs/formats.md)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .driver import LocalResult
from .graph import GraphError, Mark, MixedGraph, Pag


def edge_records(g: MixedGraph) -> list[dict[str, str]]:
    return [
        {"a": a, "b": b, "mark_at_a": ma.value, "mark_at_b": mb.value}
        for a, b, ma, mb in g.edges()
    ]


def graph_to_json(g: MixedGraph) -> dict[str, Any]:
    return {"nodes": list(g.nodes), "edges": edge_records(g)}


def graph_from_json(obj: dict[str, Any]) -> Pag:
    try:
        g = Pag(obj.get("nodes", ()))
        for e in obj["edges"]:
            for v in (e["a"], e["b"]):
                g.ensure_node(v)
            g.add_edge(e["a"], e["b"], Mark(e["mark_at_a"]), Mark(e["mark_at_b"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, GraphError):
            raise
        raise GraphError(f"malformed graph JSON: {exc}") from None
    return g


def result_to_json(r: LocalResult) -> dict[str, Any]:
    return {
        "target": r.target,
        "nodes": list(r.p.nodes),
        "edges": edge_records(r.p),
        "parents": r.parents,
        "children": r.children,
        "bidirected": r.spouses_or_confounded,
        "ambiguous": r.ambiguous,
        "stop_rule": r.stop_rule,
        "n_tests": r.n_tests,
        "trace": r.trace,
        "mmb": {k: list(v) for k, v in r.mmbs.items()},
        "events": r.events,
    }


def write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
