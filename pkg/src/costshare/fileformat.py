"""JSON instance and report files. Rationals are strings ("3", "7/2"), +inf is "inf"."""

from __future__ import annotations

import hashlib
import json
import re
from fractions import Fraction

from .costs import CostTable, GameInstance, Perturbation, Player
from .errors import BadInput, IoFailure
from .graph import Edge, Graph
from .rat import INF, format_rat, parse_rat, to_decimal_str

INSTANCE_VERSION = "costshare-instance/1"
# tables up to this size are written out in full; larger ones keep prefix + slope
DENSE_LIMIT = 64
REPORT_VERSION = "costshare-report/1"


def _rat_in(x):
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise BadInput(f"expected a rational string, got {x!r}")
    try:
        return parse_rat(x) if isinstance(x, str) else Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise BadInput(f"bad rational {x!r}") from exc


def cost_to_json(c: CostTable):
    if c.tail_slope is None or c.n_max <= DENSE_LIMIT:
        return [format_rat(c(l)) for l in range(c.n_max + 1)]
    vals = [format_rat(v) for v in c.values]
    return {"prefix": vals, "tail_slope": format_rat(c.tail_slope)}


def cost_from_json(obj, n_max: int) -> CostTable:
    if isinstance(obj, list):
        return CostTable(tuple(_rat_in(v) for v in obj), n_max)
    if isinstance(obj, dict) and set(obj) == {"prefix", "tail_slope"}:
        return CostTable(tuple(_rat_in(v) for v in obj["prefix"]), n_max, _rat_in(obj["tail_slope"]))
    raise BadInput(f"bad cost table {obj!r}")


def instance_to_dict(inst: GameInstance) -> dict:
    g = inst.graph
    out = {
        "version": INSTANCE_VERSION,
        "vertices": list(g.vertices),
        "edges": [{"id": e.id, "tail": e.tail, "head": e.head, "cost": cost_to_json(c)}
                  for e, c in zip(g.edges, inst.costs)],
        "players": [{"id": p.id, "source": p.source, "sink": p.sink} for p in inst.players],
        "n_max": inst.n_max,
    }
    if g.source is not None or g.sink is not None:
        out["terminals"] = {"source": g.source, "sink": g.sink}
    if inst.sp_tree is not None:
        out["sp_tree"] = inst.sp_tree.root.to_description()
    if inst.protocol is not None:
        out["protocol"] = inst.protocol
    if inst.metadata:
        out["metadata"] = inst.metadata
    if inst.perturbation is not None:
        rec = inst.perturbation
        out["perturbation"] = {"r": rec.r, "K": rec.K, "W": rec.W,
                               "original": [cost_to_json(c) for c in rec.original]}
    return out


def instance_from_dict(d: dict) -> GameInstance:
    from .sptree import parse_sp_tree

    if not isinstance(d, dict):
        raise BadInput("instance must be a JSON object")
    if d.get("version") != INSTANCE_VERSION:
        raise BadInput(f"unsupported version {d.get('version')!r}")
    try:
        n_max = d["n_max"]
        terms = d.get("terminals") or {}
        edges = [Edge(e["id"], e["tail"], e["head"]) for e in d["edges"]]
        g = Graph(tuple(d["vertices"]), tuple(edges), terms.get("source"), terms.get("sink"))
        costs = [cost_from_json(e["cost"], n_max) for e in d["edges"]]
        players = [Player(p.get("id", i), p["source"], p["sink"]) for i, p in enumerate(d["players"])]
        pert = None
        if "perturbation" in d:
            p = d["perturbation"]
            pert = Perturbation(p["r"], p["K"], p["W"],
                                tuple(cost_from_json(c, n_max) for c in p["original"]))
    except (KeyError, TypeError, AttributeError) as exc:
        raise BadInput(f"malformed instance: {exc}") from exc
    tree = parse_sp_tree(g, d["sp_tree"]) if d.get("sp_tree") is not None else None
    return GameInstance(g, costs, players, n_max, sp_tree=tree, protocol=d.get("protocol"),
                        metadata=d.get("metadata") or {}, perturbation=pert)


_FLAT = re.compile(r"\[\s*([^\[\]{}]*?)\s*\]")


def dumps(obj) -> str:
    """Indented JSON with innermost arrays kept on one line."""
    text = json.dumps(obj, indent=2)
    text = _FLAT.sub(lambda m: "[" + re.sub(r",\s+", ", ", m.group(1)) + "]", text)
    return text + "\n"


def instance_to_json(inst: GameInstance) -> str:
    return dumps(instance_to_dict(inst))


def instance_from_json(text: str) -> GameInstance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadInput(f"invalid JSON: {exc}") from exc
    return instance_from_dict(d)


def digest(inst: GameInstance) -> str:
    canon = json.dumps(instance_to_dict(inst), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def read_instance(path) -> GameInstance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return instance_from_json(text)


def write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def rat_or_none(x):
    return None if x is None else format_rat(x)


def _json_safe(v):
    if isinstance(v, Fraction) or v is INF:
        return format_rat(v)
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def poa_json(poa):
    if poa is None:
        return None
    return {"exact": format_rat(poa, always_ratio=True), "decimal": to_decimal_str(poa)}


def report_to_dict(report, inst: GameInstance, proto, caps: dict) -> dict:
    """Serialise an AnalysisReport; the field order is fixed for byte-stable output."""
    return {
        "version": REPORT_VERSION,
        "instance_digest": digest(inst),
        "protocol": _json_safe(proto.describe()),
        "mode": "enumerate",
        "caps": caps,
        "profiles_evaluated": report.profiles_evaluated,
        "pne_count": len(report.pne),
        "pne": [[list(p) for p in prof] for prof in report.pne],
        "cost_basis": report.cost_basis,
        "costs": {"worst_eq": rat_or_none(report.worst_eq_cost),
                  "best_eq": rat_or_none(report.best_eq_cost),
                  "opt": rat_or_none(report.opt_cost)},
        "opt_profile": [list(p) for p in report.opt_profile],
        "poa": poa_json(report.poa),
        "no_equilibrium": report.no_equilibrium,
        "eps_accounting": _json_safe(report.eps_accounting),
        "tie_detector_hits": report.tie_detector_hits,
    }
