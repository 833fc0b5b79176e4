"""JSON interchange for fans, divisors, generating systems and certificates.

All rationals are serialized as [numerator, denominator] pairs, never as
decimals.  Emission is canonical (sorted keys, fixed separators, trailing
newline) so identical inputs produce byte-identical output; parse/emit
round-trips are stable on canonical forms.
"""

from __future__ import annotations

import json
from fractions import Fraction

from . import bondal, gensys
from .divisors import qdivisor
from .fan import Fan, validate_fan


class SchemaError(ValueError):
    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")
        self.where = where


def _expect(cond, where, message):
    if not cond:
        raise SchemaError(where, message)


def rat_to_json(x):
    x = Fraction(x)
    return [x.numerator, x.denominator]


def rat_from_json(v, where="rational"):
    _expect(isinstance(v, list) and len(v) == 2 and all(isinstance(t, int) for t in v), where, "expected [num, den]")
    _expect(v[1] != 0, where, "zero denominator")
    return Fraction(v[0], v[1])


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# Fans


def fan_to_json(f: Fan) -> dict:
    return {
        "rank": f.rank,
        "rays": [list(v) for v in f.rays],
        "max_cones": [list(c) for c in f.max_cones],
    }


def fan_from_json(obj, where="fan") -> Fan:
    _expect(isinstance(obj, dict), where, "expected an object")
    for key in ("rank", "rays", "max_cones"):
        _expect(key in obj, where, f"missing field {key!r}")
    _expect(isinstance(obj["rank"], int), f"{where}.rank", "expected an integer")
    _expect(isinstance(obj["rays"], list), f"{where}.rays", "expected a list")
    _expect(isinstance(obj["max_cones"], list), f"{where}.max_cones", "expected a list")
    for i, v in enumerate(obj["rays"]):
        _expect(isinstance(v, list) and all(isinstance(x, int) for x in v), f"{where}.rays[{i}]", "expected a list of integers")
    for i, c in enumerate(obj["max_cones"]):
        _expect(isinstance(c, list) and all(isinstance(x, int) for x in c), f"{where}.max_cones[{i}]", "expected a list of ray indices")
    f = Fan.make(obj["rank"], obj["rays"], obj["max_cones"])
    violations = validate_fan(f)
    if violations:
        raise SchemaError(where, "; ".join(violations))
    return f


# ---------------------------------------------------------------------------
# Q-divisors


def qdivisor_to_json(d) -> dict:
    return {"coeffs": {str(i): rat_to_json(c) for i, c in sorted(qdivisor(d).items())}}


def qdivisor_from_json(obj, where="qdivisor") -> dict:
    _expect(isinstance(obj, dict) and "coeffs" in obj, where, "expected an object with a 'coeffs' field")
    _expect(isinstance(obj["coeffs"], dict), f"{where}.coeffs", "expected an object")
    out = {}
    for key, v in obj["coeffs"].items():
        _expect(key.isdigit(), f"{where}.coeffs[{key!r}]", "key must be a ray index")
        out[int(key)] = rat_from_json(v, f"{where}.coeffs[{key!r}]")
    return qdivisor(out)


# ---------------------------------------------------------------------------
# Generating systems


def system_to_json(gs: gensys.GeneratingSystem) -> dict:
    return {
        "dim": gs.dim,
        "wplus": list(gs.wplus.normal),
        "items": [
            {"normal": list(item.half.normal), "primes": sorted(str(p) for p in item.primes)}
            for item in gs.items
        ],
    }


def system_from_json(obj, where="system") -> gensys.GeneratingSystem:
    _expect(isinstance(obj, dict), where, "expected an object")
    for key in ("dim", "wplus", "items"):
        _expect(key in obj, where, f"missing field {key!r}")
    _expect(isinstance(obj["dim"], int), f"{where}.dim", "expected an integer")
    _expect(isinstance(obj["wplus"], list) and all(isinstance(x, int) for x in obj["wplus"]), f"{where}.wplus", "expected a list of integers")
    items = []
    for i, it in enumerate(obj["items"]):
        w = f"{where}.items[{i}]"
        _expect(isinstance(it, dict) and "normal" in it and "primes" in it, w, "expected an object with 'normal' and 'primes'")
        _expect(isinstance(it["normal"], list) and all(isinstance(x, int) for x in it["normal"]), f"{w}.normal", "expected a list of integers")
        _expect(isinstance(it["primes"], list) and all(isinstance(p, str) for p in it["primes"]), f"{w}.primes", "expected a list of names")
        items.append((it["normal"], it["primes"]))
    gs = gensys.GeneratingSystem.make(obj["dim"], obj["wplus"], items)
    violations = gensys.validate_system(gs)
    if violations:
        raise SchemaError(where, "; ".join(violations))
    return gs


# ---------------------------------------------------------------------------
# Certificates


_SIGN_CHARS = {1: "+", 0: "0", -1: "-"}
_CHAR_SIGNS = {v: k for k, v in _SIGN_CHARS.items()}


def _formal_to_json(s: gensys.FormalSum) -> dict:
    return {str(p): c for p, c in s.terms}


def _formal_from_json(obj, where) -> gensys.FormalSum:
    _expect(isinstance(obj, dict) and all(isinstance(c, int) for c in obj.values()), where, "expected an object of integer coefficients")
    return gensys.FormalSum.of(obj)


def certificate_to_json(cert: gensys.GenerationCertificate) -> dict:
    nodes = []
    for nid in sorted(cert.nodes):
        node = cert.nodes[nid]
        if isinstance(node, gensys.Leaf):
            nodes.append({
                "id": nid,
                "kind": "leaf",
                "target": _formal_to_json(node.target),
                "chamber": "".join(_SIGN_CHARS[s] for s in node.signs),
            })
        else:
            nodes.append({
                "id": nid,
                "kind": "koszul",
                "target": _formal_to_json(node.target),
                "d": _formal_to_json(node.d),
                "e": _formal_to_json(node.e),
                "children": list(node.children),
            })
    return {"root": cert.root, "nodes": nodes}


def certificate_from_json(obj, where="certificate") -> gensys.GenerationCertificate:
    _expect(isinstance(obj, dict) and "root" in obj and "nodes" in obj, where, "expected an object with 'root' and 'nodes'")
    _expect(isinstance(obj["root"], int), f"{where}.root", "expected an integer id")
    nodes = {}
    for k, n in enumerate(obj["nodes"]):
        w = f"{where}.nodes[{k}]"
        _expect(isinstance(n, dict) and isinstance(n.get("id"), int), w, "expected an object with an integer 'id'")
        nid = n["id"]
        _expect(nid not in nodes, w, f"duplicate node id {nid}")
        target = _formal_from_json(n.get("target", {}), f"{w}.target")
        if n.get("kind") == "leaf":
            chamber = n.get("chamber", "")
            _expect(isinstance(chamber, str) and all(c in _CHAR_SIGNS for c in chamber), f"{w}.chamber", "expected a string over +, 0, -")
            nodes[nid] = gensys.Leaf(target, tuple(_CHAR_SIGNS[c] for c in chamber))
        elif n.get("kind") == "koszul":
            children = n.get("children")
            _expect(isinstance(children, list) and len(children) == 3 and all(isinstance(c, int) for c in children), f"{w}.children", "expected three child ids")
            nodes[nid] = gensys.Koszul(
                target,
                _formal_from_json(n.get("d", {}), f"{w}.d"),
                _formal_from_json(n.get("e", {}), f"{w}.e"),
                tuple(children),
            )
        else:
            raise SchemaError(w, "kind must be 'leaf' or 'koszul'")
    _expect(obj["root"] in nodes, f"{where}.root", "root id is not a node")
    return gensys.GenerationCertificate(obj["root"], nodes)


# ---------------------------------------------------------------------------
# Blow-up instances and reports


def instance_from_json(obj, where="instance") -> bondal.BondalInstance:
    _expect(isinstance(obj, dict), where, "expected an object")
    for key in ("fan", "sigma", "c0", "c"):
        _expect(key in obj, where, f"missing field {key!r}")
    fan = fan_from_json(obj["fan"], f"{where}.fan")
    _expect(isinstance(obj["sigma"], list) and all(isinstance(i, int) for i in obj["sigma"]), f"{where}.sigma", "expected a list of ray indices")
    c0 = rat_from_json(obj["c0"], f"{where}.c0")
    c = qdivisor_from_json(obj["c"], f"{where}.c")
    return bondal.BondalInstance(fan, tuple(sorted(set(obj["sigma"]))), c0, c)


def instance_to_json(inst: bondal.BondalInstance) -> dict:
    return {
        "fan": fan_to_json(inst.fan),
        "sigma": list(inst.sigma),
        "c0": rat_to_json(inst.c0),
        "c": qdivisor_to_json(inst.c),
    }


def _vector_to_json(u):
    return [rat_to_json(x) for x in u]


def divisor_to_json(d) -> dict:
    return {str(i): c for i, c in sorted(d.items())}


def report_to_json(report: bondal.BondalReport) -> dict:
    return {
        "instance": instance_to_json(report.instance),
        "grid_denominator": report.grid_denominator,
        "eq1": {"total": report.eq1_total, "failures": [_vector_to_json(u) for u in report.eq1_failures]},
        "claim2": [
            {
                "u": _vector_to_json(r.u),
                "d": r.d_value,
                "ok": r.checks.ok,
                "certificate": certificate_to_json(r.certificate),
                "violations": list(r.checks.certificate_violations),
            }
            for r in report.claim2_records
        ],
        "d_values": sorted(report.d_values),
        "d_window_expected": sorted(report.d_window_expected),
        "d_window_ok": report.d_window_ok,
        "restriction": [
            {
                "u1": _vector_to_json(r.u1),
                "ok": r.ok,
                "restricted_classes": sorted(str(c) for c in r.restricted_classes),
                "collection_classes": sorted(str(c) for c in r.collection_classes),
            }
            for r in report.restriction_records
        ],
        "ok": report.ok,
    }


def load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(obj))
