"""Command-line front end: enumerate, graph, kl, sheaf, character, check, report.

JSON is the canonical output; text and DOT are renderings of the same document.
Exit status: 0 ok, 1 usage or validation error, 2 if any verdict is "fails".
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field

from .bmsheaf import BMSheaf, build_bm, check_bm_axioms, graded_character
from .conjectures import (
    FAILS,
    check_dcon,
    check_klcon,
    check_pcon,
    check_pcon_all,
    check_pdimone_hl,
    genmaps_sample,
    interval_line,
)
from .coxeter import Ball, CoxeterSystem, interval_graph, load_system
from .exactfield import CoxeterMatrixError
from .hecke import kl_basis, kl_table_json
from .store import SheafCache, dumps

log = logging.getLogger("bmlab")

COMMANDS = ("enumerate", "graph", "kl", "sheaf", "character", "check", "report")
CHECKS = ("dcon", "klcon", "pcon", "pdimone", "hl", "genmaps")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    matrix: str | None = None
    check: str | None = None
    x: list[str] = field(default_factory=list)
    y: str | None = None
    max_length: int | None = None
    cap_margin: int = 4
    center: str = "shifted"
    line_seed: int = 0
    trials: int = 2000
    m: int | None = None
    l: int = 2
    ks: list[int] = field(default_factory=lambda: [1, 2])
    variables: int = 2
    box: int = 50
    fmt: str = "json"
    cache_dir: str | None = None

    def __post_init__(self):
        if self.cap_margin < 0:
            raise UsageError("--cap-margin must be >= 0")
        if self.m is not None and self.m < 1:
            raise UsageError("--m must be >= 1")
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bmlab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("check", nargs="?", choices=CHECKS, help="which check (with 'check')")
    p.add_argument("--matrix", help="Coxeter matrix JSON file")
    p.add_argument("--x", action="append", default=[], help="apex word (repeatable)")
    p.add_argument("--y", help="restrict checks to this lower vertex")
    p.add_argument("--max-length", type=int)
    p.add_argument("--cap-margin", type=int, default=4)
    p.add_argument("--center", choices=("literal", "shifted", "both"), default="shifted")
    p.add_argument("--line-seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--m", type=int)
    p.add_argument("--l", type=int, default=2, help="genmaps: base degree")
    p.add_argument("--ks", type=int, nargs="+", default=[1, 2], help="genmaps: shifts k_i")
    p.add_argument("--variables", type=int, default=2, help="genmaps: number of variables")
    p.add_argument("--box", type=int, default=50, help="genmaps: coefficient box [-box, box]")
    p.add_argument("--format", dest="fmt", choices=("text", "json", "dot"), default="json")
    p.add_argument("--cache-dir")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_config(argv) -> tuple[RunConfig, bool]:
    ns = build_parser().parse_args(argv)
    verbose = ns.verbose
    d = vars(ns)
    del d["verbose"]
    if ns.command == "check" and ns.check is None:
        raise UsageError("'check' needs one of " + ", ".join(CHECKS))
    if ns.command != "check" and ns.check is not None:
        raise UsageError(f"unexpected argument {ns.check!r}")
    if ns.fmt == "dot" and ns.command != "graph":
        raise UsageError("--format dot is only available for 'graph'")
    needs_matrix = not (ns.command == "check" and ns.check == "genmaps")
    if needs_matrix and not ns.matrix:
        raise UsageError("--matrix is required")
    return RunConfig(**d), verbose


# -- helpers ------------------------------------------------------------------------

@dataclass
class Context:
    cfg: RunConfig
    system: CoxeterSystem
    ball: Ball
    apexes: list[int]
    cache: SheafCache | None

    def sheaf(self, x: int) -> BMSheaf:
        if self.cache is not None:
            return self.cache.get_or_build(self.ball, x, self.cfg.cap_margin)
        return build_bm(self.ball, x, self.cfg.cap_margin)


def make_context(cfg: RunConfig, require_x: bool = False) -> Context:
    try:
        system = load_system(cfg.matrix)
    except (OSError, ValueError, KeyError, CoxeterMatrixError) as exc:
        raise UsageError(f"cannot load {cfg.matrix}: {exc}") from None
    words = []
    for text in cfg.x:
        try:
            words.append(system.parse_word(text))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if require_x and not words:
        raise UsageError("--x is required")
    if not words and cfg.max_length is None:
        raise UsageError("give --x or --max-length")
    radius = max([len(w) for w in words] + [cfg.max_length or 0])
    ball = Ball(system, radius)
    apexes = []
    for text, w in zip(cfg.x, words):
        i = ball.find_word(w)
        if ball.lengths[i] != len(w):
            log.warning("word %r is not reduced; using %r", text, ball.word(i))
        apexes.append(i)
    if not words:
        apexes = list(range(len(ball)))
    cache = SheafCache(cfg.cache_dir) if cfg.cache_dir else None
    return Context(cfg, system, ball, apexes, cache)


def _laurent(p) -> dict:
    lo, coeffs = p.coeff_list()
    return {"low": lo, "coeffs": coeffs}


def _lower_vertices(sheaf: BMSheaf, y_word: str | None) -> list[int]:
    g = sheaf.graph
    if y_word is None:
        return [v for v in range(len(g.vertices)) if v != sheaf.top]
    try:
        yi = sheaf.ball.parse(y_word)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    v = g.position.get(yi)
    if v is None or v == sheaf.top:
        raise UsageError(f"{y_word!r} is not strictly below {g.word(sheaf.top)}")
    return [v]


# -- commands -----------------------------------------------------------------------

def cmd_enumerate(ctx: Context) -> dict:
    b = ctx.ball
    return {"system": ctx.system.to_json(), "max_length": b.radius, "count": len(b),
            "elements": [{"word": b.word(i), "length": b.lengths[i]} for i in range(len(b))]}


def cmd_graph(ctx: Context) -> dict:
    out = []
    for x in ctx.apexes:
        g = interval_graph(ctx.ball, x)
        out.append({
            "x": ctx.ball.word(x),
            "vertices": [{"word": g.word(v), "length": g.length(v)} for v in range(len(g.vertices))],
            "edges": [{"lower": g.word(e.lower), "upper": g.word(e.upper),
                       "label": [str(c) for c in e.label]} for e in g.edges],
            "dot": g.to_dot(),
        })
    return {"graphs": out}


def cmd_kl(ctx: Context) -> dict:
    return {"tables": [kl_table_json(ctx.ball, x) for x in ctx.apexes]}


def cmd_sheaf(ctx: Context) -> dict:
    out = []
    for x in ctx.apexes:
        sh = ctx.sheaf(x)
        g = sh.graph
        verts = []
        for v in range(len(g.vertices)):
            rep = sh.cap_report.get(v, {})
            verts.append({"y": g.word(v), "length": g.length(v), "stalk": list(sh.stalks[v].degrees),
                          "defect": list(sh.defects[v].degrees),
                          "flags": rep.get("stalk_flags", []) + rep.get("defect_flags", [])})
        out.append({"x": ctx.ball.word(x), "cap_margin": sh.cap_margin, "vertices": verts,
                    "axioms": check_bm_axioms(sh)})
    return {"sheaves": out}


def cmd_character(ctx: Context) -> dict:
    out = []
    for x in ctx.apexes:
        sh = ctx.sheaf(x)
        ch = graded_character(sh)
        kl = kl_basis(ctx.ball, x).element.to_Tt()
        ys = sorted(set(ch.coeffs) | set(kl.coeffs), key=lambda i: (ctx.ball.lengths[i], i))
        out.append({
            "x": ctx.ball.word(x),
            "character": {ctx.ball.word(y): _laurent(ch[y]) for y in ys},
            "kl": {ctx.ball.word(y): _laurent(kl[y]) for y in ys},
            "equal": ch == kl,
        })
    return {"characters": out}


def _reports_for(ctx: Context, sheaf: BMSheaf, kind: str) -> list:
    cfg = ctx.cfg
    if kind == "dcon":
        lower = set(_lower_vertices(sheaf, cfg.y))
        return [r for r in check_dcon(sheaf) if sheaf.vertex(r.y) in lower]
    if kind == "klcon":
        return [check_klcon(sheaf)]
    if kind == "pcon":
        out = []
        for y in _lower_vertices(sheaf, cfg.y):
            out += [check_pcon(sheaf, y, cfg.m)] if cfg.m else check_pcon_all(sheaf, y)
        return out
    out = []
    line = interval_line(sheaf, cfg.line_seed)
    for y in _lower_vertices(sheaf, cfg.y):
        res = check_pdimone_hl(sheaf, y, line, centers=cfg.center)
        out += [r for r in res.reports if kind in ("all", r.conjecture)]
    return out


def cmd_check(ctx: Context | None, cfg: RunConfig) -> dict:
    if cfg.check == "genmaps":
        rep = genmaps_sample(cfg.l, cfg.ks, cfg.trials, cfg.line_seed, cfg.box, cfg.variables)
        return {"genmaps": rep.to_json()}
    reports = []
    for x in ctx.apexes:
        reports += [r.to_json() for r in _reports_for(ctx, ctx.sheaf(x), cfg.check)]
    return {"reports": reports}


def cmd_report(ctx: Context) -> dict:
    reports = []
    for x in ctx.apexes:
        sh = ctx.sheaf(x)
        for kind in ("dcon", "klcon", "pcon", "all"):
            reports += [r.to_json() for r in _reports_for(ctx, sh, kind)]
    summary: dict = {}
    for r in reports:
        row = summary.setdefault(r["conjecture"], {})
        row[r["verdict"]] = row.get(r["verdict"], 0) + 1
    return {"summary": summary, "reports": reports}


# -- rendering ----------------------------------------------------------------------

def _render_text(doc: dict) -> str:
    lines = []
    if "elements" in doc:
        lines += [f"{e['length']}  {e['word']}" for e in doc["elements"]]
        lines.append(f"{doc['count']} elements")
    for g in doc.get("graphs", []):
        lines.append(f"[e, {g['x']}]: {len(g['vertices'])} vertices, {len(g['edges'])} edges")
        lines += [f"  {e['lower']} -> {e['upper']}  ({', '.join(e['label'])})" for e in g["edges"]]
    for t in doc.get("tables", []):
        lines.append(f"x = {t['x']}")
        for y, row in t["h"].items():
            lines.append(f"  {y:<20} low={row['low']:<3} coeffs={row['coeffs']}  P={row['P']}")
    for s in doc.get("sheaves", []):
        lines.append(f"B({s['x']})  axioms ok: {s['axioms']['ok']}")
        for v in s["vertices"]:
            flag = f"  flagged {v['flags']}" if v["flags"] else ""
            lines.append(f"  {v['y']:<20} stalk {v['stalk']}  defect {v['defect']}{flag}")
    for c in doc.get("characters", []):
        lines.append(f"x = {c['x']}  equal: {c['equal']}")
        for y, p in c["character"].items():
            lines.append(f"  {y:<20} low={p['low']:<3} coeffs={p['coeffs']}")
    if "genmaps" in doc:
        g = doc["genmaps"]
        lines.append(f"genmaps l={g['l']} ks={g['ks']}: {g['satisfied']}/{g['trials']} = {g['fraction']:.4f}")
    if "summary" in doc:
        for k, row in sorted(doc["summary"].items()):
            lines.append(f"{k:<8} " + "  ".join(f"{v}: {n}" for v, n in sorted(row.items())))
    for r in doc.get("reports", []) if "summary" not in doc else []:
        p = " ".join(f"{k}={v}" for k, v in sorted(r["params"].items()) if k != "line")
        lines.append(f"{r['conjecture']:<8} x={r['x']:<16} y={str(r['y']):<16} {r['verdict']:<16} {p}")
    return "\n".join(lines) + "\n"


def render(doc: dict, fmt: str) -> str:
    if fmt == "dot":
        return "".join(g["dot"] for g in doc["graphs"])
    if fmt == "text":
        return _render_text(doc)
    return dumps(doc)


def _has_failure(doc: dict) -> bool:
    return any(r["verdict"] == FAILS for r in doc.get("reports", []))


def dispatch(argv, out=None) -> int:
    out = out or sys.stdout
    try:
        cfg, verbose = parse_config(argv)
        logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if cfg.command == "check" and cfg.check == "genmaps":
            doc = cmd_check(None, cfg)
        else:
            ctx = make_context(cfg, require_x=cfg.command == "graph")
            if cfg.command == "check":
                doc = cmd_check(ctx, cfg)
            else:
                doc = globals()[f"cmd_{cfg.command}"](ctx)
    except UsageError as exc:
        print(f"bmlab: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse
        return int(exc.code or 0) and 1
    out.write(render(doc, cfg.fmt))
    return 2 if _has_failure(doc) else 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
