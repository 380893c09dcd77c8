"""JSON serialization of BMSheaf and a checksummed on-disk cache."""

from __future__ import annotations

import hashlib
import json
import logging
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bmsheaf import BMSheaf, build_bm
from .coxeter import Ball, system_from_json, interval_graph
from .gradedlin import GradedMultiset, PolyMap

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def _coeffs(c) -> list[str]:
    return [str(a) for a in c.coeffs]


def dumps(obj) -> str:
    """Canonical JSON text; byte-identical for equal inputs."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def sheaf_to_json(sheaf: BMSheaf) -> dict:
    g = sheaf.graph
    return {
        "schema": SCHEMA_VERSION,
        "code_version": __version__,
        "system": sheaf.ball.system.to_json(),
        "x": sheaf.ball.word(sheaf.x),
        "cap_margin": sheaf.cap_margin,
        "vertices": [g.word(v) for v in range(len(g.vertices))],
        "edges": [{"lower": e.lower, "upper": e.upper, "label": [_coeffs(c) for c in e.label]}
                  for e in g.edges],
        "stalks": [list(s.degrees) for s in sheaf.stalks],
        "defects": [list(s.degrees) for s in sheaf.defects],
        "rho": [sheaf.rho_up[k].to_json() for k in range(len(g.edges))],
        "defect_inclusions": [p.to_json() for p in sheaf.defect_inclusions],
        "cap_report": [sheaf.cap_report.get(v, {}) for v in range(len(g.vertices))],
    }


def _polymap_from_json(spec, r: int, data: dict, annihilator=None) -> PolyMap:
    entries = {}
    for ent in data["entries"]:
        poly = {tuple(m): spec.from_coeffs([Fraction(a) for a in c]) for m, c in ent["terms"]}
        entries[(ent["i"], ent["j"])] = poly
    return PolyMap(spec, r, data["source"], data["target"], entries, annihilator)


def sheaf_from_json(data: dict) -> BMSheaf:
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"schema {data.get('schema')} != {SCHEMA_VERSION}")
    system = system_from_json(data["system"])
    word = system.parse_word(data["x"])
    ball = Ball(system, len(word))
    x = ball.find_word(word)
    graph = interval_graph(ball, x)
    if [graph.word(v) for v in range(len(graph.vertices))] != data["vertices"]:
        raise ValueError("stored vertex order does not match the rebuilt interval")
    stored_edges = [(e["lower"], e["upper"], e["label"]) for e in data["edges"]]
    rebuilt = [(e.lower, e.upper, [_coeffs(c) for c in e.label]) for e in graph.edges]
    if stored_edges != rebuilt:
        raise ValueError("stored edges do not match the rebuilt moment graph")
    sheaf = BMSheaf(ball, x, graph, data["cap_margin"],
                    [GradedMultiset(tuple(s)) for s in data["stalks"]], {})
    spec, r = system.field, system.rank
    for k, pm in enumerate(data["rho"]):
        sheaf.rho_up[k] = _polymap_from_json(spec, r, pm, sheaf.annihilators[k])
    sheaf.defects = [GradedMultiset(tuple(s)) for s in data["defects"]]
    sheaf.defect_inclusions = [_polymap_from_json(spec, r, pm) for pm in data["defect_inclusions"]]
    sheaf.cap_report = {v: rep for v, rep in enumerate(data["cap_report"]) if rep}
    return sheaf


def sheaf_equal(a: BMSheaf, b: BMSheaf) -> bool:
    """Structural equality: degrees, edge labels and every map coefficient, exactly."""
    return dumps(sheaf_to_json(a)) == dumps(sheaf_to_json(b))


def cache_key(ball: Ball, x, cap_margin: int) -> str:
    ident = {
        "system": ball.system.to_json(),
        "x": ball.word(ball.idx(x)),
        "cap_margin": cap_margin,
        "schema": SCHEMA_VERSION,
        "code_version": __version__,
    }
    return hashlib.sha256(dumps(ident).encode()).hexdigest()


class SheafCache:
    """One file per sheaf; a payload checksum guards against truncated or edited files."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def store(self, sheaf: BMSheaf) -> Path:
        payload = dumps(sheaf_to_json(sheaf))
        doc = {"checksum": hashlib.sha256(payload.encode()).hexdigest(), "payload": payload}
        p = self.path(cache_key(sheaf.ball, sheaf.x, sheaf.cap_margin))
        tmp = p.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc))
        tmp.replace(p)
        return p

    def load(self, ball: Ball, x, cap_margin: int) -> BMSheaf | None:
        p = self.path(cache_key(ball, x, cap_margin))
        if not p.exists():
            return None
        try:
            doc = json.loads(p.read_text())
            payload = doc["payload"]
            if hashlib.sha256(payload.encode()).hexdigest() != doc["checksum"]:
                raise ValueError("checksum mismatch")
            return sheaf_from_json(json.loads(payload))
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("discarding cache entry %s: %s", p.name, exc)
            return None

    def get_or_build(self, ball: Ball, x, cap_margin: int = 4) -> BMSheaf:
        hit = self.load(ball, x, cap_margin)
        if hit is not None:
            return hit
        sheaf = build_bm(ball, x, cap_margin)
        self.store(sheaf)
        return sheaf
