"""Generating systems, chamber enumeration, and Koszul generation certificates.

A generating system is a reference open half-space W+ together with item
half-spaces, each carrying a set of prime-divisor names.  Every ray class
[w] in W+ determines a divisor (the primes of the items whose half-space
contains w); a generation certificate is a DAG of twisted Koszul steps
whose leaves are such chamber divisors and whose root witnesses the
structural sheaf.

All geometry is exact: half-space normals are primitive integer vectors,
witnesses are rational points, and 2-dimensional angular comparisons are
cross products.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, replace
from fractions import Fraction

from . import feasible
from .lattice import dot, mat_from_columns, primitive_part, solve_rational, smith_normal_form, mat_columns


class DegenerateSlice(ValueError):
    """An item's restriction coincides with the restricted reference half-space."""


@dataclass(frozen=True)
class HalfSpace:
    """The open set {w : (normal, w) > 0}; normals are primitive, so equal
    half-spaces have equal normals."""

    normal: tuple[int, ...]

    @staticmethod
    def make(v) -> "HalfSpace":
        prim, _ = primitive_part(v)
        return HalfSpace(prim)

    def opposite(self) -> "HalfSpace":
        return HalfSpace(tuple(-x for x in self.normal))

    def side(self, w) -> int:
        p = dot(self.normal, w)
        return (p > 0) - (p < 0)


@dataclass(frozen=True)
class Item:
    half: HalfSpace
    primes: frozenset


@dataclass(frozen=True)
class GeneratingSystem:
    dim: int
    wplus: HalfSpace
    items: tuple[Item, ...]

    @staticmethod
    def make(dim, wplus, items) -> "GeneratingSystem":
        return GeneratingSystem(
            dim,
            HalfSpace.make(wplus),
            tuple(Item(HalfSpace.make(h), frozenset(p)) for h, p in items),
        )


def validate_system(gs: GeneratingSystem) -> list[str]:
    errors = []
    if gs.dim < 2:
        errors.append("dimension must be at least 2")
    if len(gs.wplus.normal) != gs.dim:
        errors.append("reference normal has wrong dimension")
    for k, item in enumerate(gs.items):
        if len(item.half.normal) != gs.dim:
            errors.append(f"item {k} normal has wrong dimension")
        if item.half == gs.wplus:
            errors.append(f"item {k} coincides with the reference half-space")
        if not item.primes:
            errors.append(f"item {k} has no prime divisors")
    for a, b in itertools.combinations(range(len(gs.items)), 2):
        if gs.items[a].half == gs.items[b].half:
            errors.append(f"items {a} and {b} have equal half-spaces")
        if gs.items[a].primes & gs.items[b].primes:
            errors.append(f"items {a} and {b} share prime divisors")
    return errors


# ---------------------------------------------------------------------------
# Formal divisors


@dataclass(frozen=True)
class FormalSum:
    """Integer-coefficient formal sum of prime names, normalized and sorted."""

    terms: tuple[tuple[str, int], ...]

    @staticmethod
    def of(mapping) -> "FormalSum":
        return FormalSum(tuple(sorted((p, c) for p, c in mapping.items() if c != 0)))

    @staticmethod
    def of_primes(names) -> "FormalSum":
        return FormalSum(tuple((p, 1) for p in sorted(names)))

    def as_dict(self):
        return dict(self.terms)

    def add(self, other) -> "FormalSum":
        out = self.as_dict()
        for p, c in other.terms:
            out[p] = out.get(p, 0) + c
        return FormalSum.of(out)

    def neg(self) -> "FormalSum":
        return FormalSum(tuple((p, -c) for p, c in self.terms))

    def sub(self, other) -> "FormalSum":
        return self.add(other.neg())

    def is_zero(self) -> bool:
        return not self.terms

    def is_reduced_effective(self) -> bool:
        return bool(self.terms) and all(c == 1 for _, c in self.terms)

    @property
    def primes(self) -> frozenset:
        return frozenset(p for p, _ in self.terms)


ZERO = FormalSum(())


# ---------------------------------------------------------------------------
# Chambers


@dataclass(frozen=True)
class Chamber:
    signs: tuple[int, ...]  # one of +1, 0, -1 per item
    witness: tuple[Fraction, ...]


def _divisor_at(gs: GeneratingSystem, w) -> FormalSum:
    names = set()
    for item in gs.items:
        if item.half.side(w) > 0:
            names |= item.primes
    return FormalSum.of_primes(names)


def _signs_at(gs: GeneratingSystem, w):
    return tuple(item.half.side(w) for item in gs.items)


def chamber_at(gs: GeneratingSystem, w) -> tuple[Chamber, FormalSum]:
    """Chamber data of an explicit point of the open reference half-space."""
    if dot(gs.wplus.normal, w) <= 0:
        raise ValueError("point is not in the open reference half-space")
    return Chamber(_signs_at(gs, w), tuple(Fraction(x) for x in w)), _divisor_at(gs, w)


def _rot(v):
    return (-v[1], v[0])


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _wall_direction(wplus: HalfSpace, half: HalfSpace):
    d = _rot(half.normal)
    p = dot(wplus.normal, d)
    if p == 0:
        raise ValueError("item boundary equals the reference boundary")
    return d if p > 0 else tuple(-x for x in d)


def _chambers_2d(gs: GeneratingSystem):
    wp = gs.wplus.normal
    b_ccw = _rot(wp)  # boundary direction at the counterclockwise end
    b_cw = tuple(-x for x in b_ccw)
    dirs = []
    for item in gs.items:
        if item.half == gs.wplus.opposite():
            continue  # constantly negative on the open half-plane, no wall
        d = _wall_direction(gs.wplus, item.half)
        if d not in dirs:
            dirs.append(d)
    dirs.sort(key=functools.cmp_to_key(lambda a, b: -1 if _cross(a, b) < 0 else 1))
    witnesses = []
    if not dirs:
        witnesses.append(wp)
    else:
        witnesses.append(tuple(x + y for x, y in zip(b_ccw, dirs[0])))
        for k, d in enumerate(dirs):
            witnesses.append(d)
            nxt = dirs[k + 1] if k + 1 < len(dirs) else b_cw
            witnesses.append(tuple(x + y for x, y in zip(d, nxt)))
    return [chamber_at(gs, w) for w in witnesses]


_SIGN_ORDER = (1, 0, -1)


def _constraint(normal, sign):
    if sign > 0:
        return (normal, feasible.GT)
    if sign < 0:
        return (tuple(-x for x in normal), feasible.GT)
    return (normal, feasible.EQ)


def _chambers_nd(gs: GeneratingSystem):
    # Direct sign-vector enumeration with exact feasibility pruning.
    base = [(gs.wplus.normal, feasible.GT)]
    out = []

    def rec(k, signs, constraints):
        point = feasible.find_solution(constraints, gs.dim)
        if point is None:
            return
        if k == len(gs.items):
            out.append(chamber_at(gs, point))
            return
        normal = gs.items[k].half.normal
        for s in _SIGN_ORDER:
            rec(k + 1, signs + (s,), constraints + [_constraint(normal, s)])

    rec(0, (), base)
    return out


def chambers(gs: GeneratingSystem):
    """All realizable chambers of the open reference half-space, walls included.

    Each entry is (Chamber, divisor).  For dim 2 the list is ordered
    clockwise (decreasing wall angle); otherwise sign-vector lexicographic
    with + before 0 before -.
    """
    errs = validate_system(gs)
    if errs:
        raise ValueError("; ".join(errs))
    if gs.dim == 2:
        return _chambers_2d(gs)
    return _chambers_nd(gs)


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class Leaf:
    target: FormalSum
    signs: tuple[int, ...]
    witness: tuple[Fraction, ...] | None = None


@dataclass(frozen=True)
class Koszul:
    target: FormalSum
    d: FormalSum
    e: FormalSum
    children: tuple[int, int, int]  # prove target-d, target-e, target-d-e


@dataclass(frozen=True)
class GenerationCertificate:
    root: int
    nodes: dict


class _Builder:
    def __init__(self):
        self.nodes = {}
        self._next = 0

    def add(self, node) -> int:
        nid = self._next
        self._next += 1
        self.nodes[nid] = node
        return nid

    def merge(self, cert: GenerationCertificate, twist: FormalSum = ZERO, leaf_swap=None) -> int:
        """Copy a certificate in, twisting every target and optionally
        replacing leaves; returns the new root id.

        leaf_swap(leaf_after_twist) may return a node id (graft) or a Leaf.
        """
        mapping = {}

        def walk(nid):
            if nid in mapping:
                return mapping[nid]
            node = cert.nodes[nid]
            if isinstance(node, Leaf):
                new_leaf = replace(node, target=node.target.add(twist))
                swapped = leaf_swap(new_leaf) if leaf_swap else new_leaf
                out = swapped if isinstance(swapped, int) else self.add(swapped)
            else:
                kids = tuple(walk(c) for c in node.children)
                out = self.add(Koszul(node.target.add(twist), node.d, node.e, kids))
            mapping[nid] = out
            return out

        return walk(cert.root)

    def done(self, root: int) -> GenerationCertificate:
        return GenerationCertificate(root, dict(self.nodes))


def _single_leaf(chamber: Chamber, divisor: FormalSum) -> GenerationCertificate:
    b = _Builder()
    root = b.add(Leaf(divisor.neg(), chamber.signs, chamber.witness))
    return b.done(root)


def _chamber_by_divisor(chs, divisor: FormalSum):
    for ch, d in chs:
        if d == divisor:
            return ch
    return None


def _resolve_2d(gs: GeneratingSystem) -> GenerationCertificate:
    chs = _chambers_2d(gs)
    for ch, d in chs:
        if d.is_zero():
            return _single_leaf(ch, d)
    # Items with walls exist and no chamber divisor is empty.  Work at the
    # wall with the largest angle (first in clockwise order).
    walled = [it for it in gs.items if it.half != gs.wplus.opposite()]
    first_wall = _wall_direction(gs.wplus, walled[0].half)
    for item in walled[1:]:
        d = _wall_direction(gs.wplus, item.half)
        if _cross(d, first_wall) < 0:
            first_wall = d
    b_ccw = _rot(gs.wplus.normal)
    at_wall = [it for it in walled if _wall_direction(gs.wplus, it.half) == first_wall]
    minus = [it for it in at_wall if dot(it.half.normal, b_ccw) > 0]

    builder = _Builder()
    if minus:
        reduced = replace(gs, items=tuple(it for it in gs.items if it is not minus[0]))
        sub = _resolve_2d(reduced)
        root = builder.merge(sub, leaf_swap=lambda leaf: _relocate(leaf, chs))
        return builder.done(root)

    plus = next(it for it in at_wall if dot(it.half.normal, b_ccw) < 0)
    d1 = FormalSum.of_primes(plus.primes)
    reduced = replace(gs, items=tuple(it for it in gs.items if it is not plus))
    sub = _resolve_2d(reduced)
    e1 = _chambers_2d(reduced)[0][1]
    assert not e1.is_zero()
    child_d = builder.merge(sub, twist=d1.neg(), leaf_swap=lambda leaf: _relocate(leaf, chs))
    ch_e = _chamber_by_divisor(chs, e1)
    ch_de = _chamber_by_divisor(chs, e1.add(d1))
    assert ch_e is not None and ch_de is not None
    child_e = builder.add(Leaf(e1.neg(), ch_e.signs, ch_e.witness))
    child_de = builder.add(Leaf(e1.add(d1).neg(), ch_de.signs, ch_de.witness))
    root = builder.add(Koszul(ZERO, d1, e1, (child_d, child_e, child_de)))
    return builder.done(root)


def _relocate(leaf: Leaf, chs) -> Leaf:
    # Re-anchor a lifted leaf at a chamber of the enclosing system whose
    # divisor matches the (already twisted) target.
    ch = _chamber_by_divisor(chs, leaf.target.neg())
    assert ch is not None, "sub-system chamber divisor missing from the full system"
    return Leaf(leaf.target, ch.signs, ch.witness)


def _span_coefficients(f_plus, f1, normal):
    # Solve alpha * f_plus + beta * f1 = normal, or None.
    return solve_rational(mat_from_columns([f_plus, f1]), normal)


def _kernel_basis(rows):
    # Integer basis of {x : rows . x = 0}.
    snf = smith_normal_form(rows)
    ncols = len(rows[0])
    nonzero = sum(1 for d in snf.diagonal if d != 0)
    return mat_columns(snf.v_inv)[nonzero:] if nonzero < ncols else []


def _slice_data(gs: GeneratingSystem, u_basis, x0):
    """Induced system on the hyperplane spanned by x0 and u_basis.

    Items whose boundary contains the whole of u_basis's span are excluded;
    restrictions that coincide are merged by uniting prime sets.
    """
    if dot(gs.wplus.normal, x0) <= 0:
        raise ValueError("slice witness must lie in the open reference half-space")
    basis = [tuple(Fraction(x) for x in x0)] + [tuple(Fraction(x) for x in u) for u in u_basis]
    wp_restricted = HalfSpace.make([dot(gs.wplus.normal, v) for v in basis])
    merged: dict[HalfSpace, set] = {}
    for item in gs.items:
        if all(dot(item.half.normal, u) == 0 for u in u_basis):
            continue  # boundary contains the slicing subspace
        coords = [dot(item.half.normal, v) for v in basis]
        half = HalfSpace.make(coords)
        if half in (wp_restricted, wp_restricted.opposite()):
            raise DegenerateSlice(f"item with primes {sorted(item.primes)} restricts to the reference half-space")
        merged.setdefault(half, set()).update(item.primes)
    items = tuple(Item(h, frozenset(p)) for h, p in merged.items())
    return GeneratingSystem(len(basis), wp_restricted, items), basis


def slice_system(gs: GeneratingSystem, u_basis, x0) -> GeneratingSystem:
    """The generating system induced on the hyperplane through x0 containing
    the span of u_basis (coordinates: x0 first, then u_basis)."""
    return _slice_data(gs, u_basis, x0)[0]


def _lift_point(basis, coords):
    out = [Fraction(0)] * len(basis[0])
    for c, v in zip(coords, basis, strict=True):
        out = [a + c * b for a, b in zip(out, v)]
    return tuple(out)


def _resolve_high(gs: GeneratingSystem) -> GenerationCertificate:
    chs = chambers(gs)
    for ch, d in chs:
        if d.is_zero():
            return _single_leaf(ch, d)

    f_plus = gs.wplus.normal
    # The pivot item must have a genuine wall (boundary distinct from the
    # reference boundary); an all-opposite system has an empty chamber and
    # never reaches this point.
    f1 = next(it.half.normal for it in gs.items if it.half not in (gs.wplus, gs.wplus.opposite()))
    u_basis = _kernel_basis((f_plus, f1))
    quot_items = []
    rest = []
    for item in gs.items:
        coeffs = _span_coefficients(f_plus, f1, item.half.normal)
        if coeffs is not None:
            quot_items.append((coeffs, item.primes))
        else:
            rest.append(item)
    quotient = GeneratingSystem.make(2, (1, 0), [(c, p) for c, p in quot_items])
    assert not validate_system(quotient)
    cert_q = _resolve_2d(quotient)

    builder = _Builder()
    grafts = {}  # quotient chamber signs -> node id of the twisted slice certificate

    def graft_for(q_signs):
        if q_signs in grafts:
            return grafts[q_signs]
        qch, q_div = next((c, d) for c, d in chambers(quotient) if c.signs == q_signs)
        a, bcoord = qch.witness
        assert a > 0
        x0 = solve_rational((f_plus, f1), (a, bcoord))
        slice_gs, basis = _slice_data(replace(gs, items=tuple(rest)), u_basis, x0)
        sub = resolve(slice_gs)

        def lift_leaf(leaf: Leaf) -> Leaf:
            w = _lift_point(basis, leaf.witness)
            signs = _signs_at(gs, w)
            assert _divisor_at(gs, w) == leaf.target.neg()
            return Leaf(leaf.target, signs, w)

        grafts[q_signs] = builder.merge(sub, twist=q_div.neg(), leaf_swap=lift_leaf)
        return grafts[q_signs]

    root = builder.merge(cert_q, leaf_swap=lambda leaf: graft_for(leaf.signs))
    return builder.done(root)


def resolve(gs: GeneratingSystem) -> GenerationCertificate:
    """Certificate with root target 0 whose leaves are chambers of gs."""
    errs = validate_system(gs)
    if errs:
        raise ValueError("; ".join(errs))
    if gs.dim == 2:
        return _resolve_2d(gs)
    return _resolve_high(gs)


# ---------------------------------------------------------------------------
# Verification


def _name_disjoint(p, q):
    return p != q


def verify_certificate(cert: GenerationCertificate, gs: GeneratingSystem, disjoint=None) -> list[str]:
    """Independent check of a certificate against a system.

    Returns the list of violations (empty means accepted).  `disjoint` is
    the oracle deciding whether two distinct primes have disjoint support;
    by default distinct names are taken to be disjoint.
    """
    disjoint = disjoint or _name_disjoint
    violations = []
    if cert.root not in cert.nodes:
        return [f"root {cert.root} is not a node"]
    if not cert.nodes[cert.root].target.is_zero():
        violations.append(f"root {cert.root} target is not zero")

    state = {}

    def acyclic(nid):
        if state.get(nid) == "done":
            return True
        if state.get(nid) == "open":
            return False
        state[nid] = "open"
        node = cert.nodes.get(nid)
        if isinstance(node, Koszul):
            for c in node.children:
                if c not in cert.nodes:
                    violations.append(f"node {nid} references missing child {c}")
                elif not acyclic(c):
                    violations.append(f"cycle through node {nid}")
        state[nid] = "done"
        return True

    acyclic(cert.root)

    chs = chambers(gs)
    by_signs = {}
    for ch, d in chs:
        by_signs.setdefault(ch.signs, d)

    for nid, node in cert.nodes.items():
        if isinstance(node, Leaf):
            if len(node.signs) != len(gs.items):
                violations.append(f"leaf {nid} has a sign vector of wrong length")
                continue
            if node.signs not in by_signs:
                violations.append(f"leaf {nid} references an unrealizable chamber {node.signs}")
                continue
            if node.target != by_signs[node.signs].neg():
                violations.append(f"leaf {nid} target does not match its chamber divisor")
        elif isinstance(node, Koszul):
            if not node.d.is_reduced_effective() or not node.e.is_reduced_effective():
                violations.append(f"koszul node {nid} needs nonempty reduced effective divisors")
                continue
            for p in node.d.primes:
                for q in node.e.primes:
                    if not disjoint(p, q):
                        violations.append(f"koszul node {nid}: primes {p} and {q} are not disjoint")
            if any(c not in cert.nodes for c in node.children):
                continue
            expected = (
                node.target.sub(node.d),
                node.target.sub(node.e),
                node.target.sub(node.d).sub(node.e),
            )
            for c, want in zip(node.children, expected, strict=True):
                if cert.nodes[c].target != want:
                    violations.append(f"koszul node {nid}: child {c} proves the wrong target")
        else:
            violations.append(f"node {nid} has unknown kind")
    return violations


def certificate_leaves(cert: GenerationCertificate):
    return [(nid, node) for nid, node in cert.nodes.items() if isinstance(node, Leaf)]
