"""The blow-up twist pipeline: coordinate normalization, tracked stellar
subdivision, removal of deep strata, floor-formula divisors on the blow-up,
symbolic-epsilon perturbation identities, and generation certificates for
the perturbed twists.

Conventions.  An instance is given in normalized coordinates: the blow-up
center sigma is spanned by the first l standard basis vectors, its
coefficients vanish, and all fractional coefficients lie in [0, 1).  Every
divisor on the blown-up fan is keyed by blown-fan ray ids; the exceptional
ray id is len(original rays).  For a vector v we write v1 for its first l
coordinates and v2 for the rest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import gensys
from .divisors import ClassGroup, class_group, div_add, div_sub, divisor, qdivisor
from .fan import (
    Cone,
    Fan,
    Subdivision,
    Subfan,
    divisors_intersect,
    has_codim_ge2_strata,
    is_smooth,
    orbit_closure_fan,
    remove_star,
    star,
    stellar_subdivision,
)
from .lattice import (
    complete_to_basis,
    dot,
    floor_rat,
    identity_matrix,
    lcm,
    mat_mul,
    mat_vec,
    solve_rational,
)
from .thomsen import divisor_floor, thomsen_collection


class PreconditionViolated(ValueError):
    pass


class DisjointnessFailure(RuntimeError):
    """The fan-backed prime disjointness check failed; signals a pipeline bug."""


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class BondalInstance:
    fan: Fan
    sigma: Cone
    c0: Fraction
    c: dict  # QDivisor on the original rays

    @property
    def l(self) -> int:
        return len(self.sigma)


def validate_instance(inst: BondalInstance) -> list[str]:
    errors = []
    f, sigma = inst.fan, inst.sigma
    if not is_smooth(f):
        errors.append("fan is not smooth")
    if len(sigma) < 2:
        errors.append("center must have dimension >= 2")
    if not f.has_cone(sigma):
        errors.append("center is not a cone of the fan")
        return errors
    basis = {tuple(1 if j == k else 0 for j in range(f.rank)) for k in range(len(sigma))}
    if {f.rays[i] for i in sigma} != basis:
        errors.append("center generators are not the first standard basis vectors")
    if not 0 <= inst.c0 < 1:
        errors.append("exceptional coefficient must lie in [0, 1)")
    for i, ci in inst.c.items():
        if i in sigma and ci != 0:
            errors.append(f"coefficient on center ray {i} must vanish")
        if not 0 <= ci < 1:
            errors.append(f"coefficient on ray {i} must lie in [0, 1)")
    return errors


def _v1(v, l):
    return tuple(v[:l])


def _v2(v, l):
    return tuple(v[l:])


# ---------------------------------------------------------------------------
# Coordinate normalization


def _int_inverse(m):
    n = len(m)
    cols = []
    for j in range(n):
        e = tuple(1 if i == j else 0 for i in range(n))
        cols.append(tuple(int(x) for x in solve_rational(m, e)))
    return tuple(zip(*cols))


def _shear_candidates(dim, cap=50):
    if dim == 0:
        yield ()
        return
    for m in range(cap + 1):
        shell = [t for t in itertools.product(range(-m, m + 1), repeat=dim) if max(map(abs, t), default=0) == m]
        shell.sort(key=lambda t: tuple((abs(x), 0 if x >= 0 else 1) for x in t))
        yield from shell
    raise RuntimeError("shear search cap exceeded")


def _diagonal_positive(p):
    return len(set(p)) == 1 and p[0] > 0


def claim1_normalize(f: Fan, sigma: Cone):
    """Unimodular change of basis sending the center's generators to the
    first standard basis vectors such that, afterwards, no ray projects onto
    a positive multiple of the diagonal in the first l coordinates
    (projections 0 and negative multiples are allowed).

    The shear applied to coordinate 1 is the first integer tuple, in
    increasing max-norm order (positive entries before negative at equal
    absolute value), making the first two coordinates differ on every ray
    with nonzero tail part.
    """
    sigma = tuple(sorted(set(sigma)))
    l = len(sigma)
    gens = [f.rays[i] for i in sigma]
    basis = complete_to_basis(gens, f.rank)
    binv = _int_inverse(basis)
    aligned = [mat_vec(binv, v) for v in f.rays]
    for k in _shear_candidates(f.rank - l):
        sheared = [(w[0] + sum(a * b for a, b in zip(k, w[l:])),) + tuple(w[1:]) for w in aligned]
        if any(any(x != 0 for x in w[l:]) and w[0] == w[1] for w in sheared):
            continue
        if any(_diagonal_positive(_v1(w, l)) for w in sheared):
            continue
        shear = [list(row) for row in identity_matrix(f.rank)]
        for j, kj in enumerate(k):
            shear[0][l + j] = kj
        return mat_mul(tuple(tuple(row) for row in shear), binv)
    raise AssertionError("unreachable")


def normalize_instance(f: Fan, sigma: Cone, c0, c):
    """Apply claim1_normalize and reduce coefficients into [0, 1).

    Returns (instance, basis change, integral shifts dropped from c0/c).
    """
    sigma = tuple(sorted(set(sigma)))
    m = claim1_normalize(f, sigma)
    nf = Fan.make(f.rank, [mat_vec(m, v) for v in f.rays], f.max_cones)
    c0 = Fraction(c0)
    shifts = {"c0": floor_rat(c0)}
    c_out = {}
    for i, ci in qdivisor(c).items():
        shifts[i] = floor_rat(ci)
        if ci != floor_rat(ci):
            c_out[i] = ci - floor_rat(ci)
    for i in sigma:
        c_out.pop(i, None)
    inst = BondalInstance(nf, sigma, c0 - shifts["c0"], c_out)
    return inst, m, shifts


# ---------------------------------------------------------------------------
# Blow-up, deep-stratum removal


@dataclass(frozen=True)
class BlowupData:
    original: Fan
    blown: Fan
    exceptional_ray: int
    strict: dict  # original ray id -> blown ray id


def blowup_tracked(inst: BondalInstance) -> BlowupData:
    sub = stellar_subdivision(inst.fan, inst.sigma)
    return BlowupData(inst.fan, sub.fan, sub.new_ray_id, sub.ray_map)


def _outside_pairs(f: Fan, outside):
    return [c for c in f.cones() if len(c) == 2 and set(c) <= outside]


def z_removal(bd: BlowupData, sigma: Cone) -> tuple[Subfan, Subfan]:
    """Open subfans with the deep outside strata removed.

    Removes every cone of dimension >= 2 spanned entirely by rays outside
    the center (never the exceptional ray); removing the 2-dimensional ones
    removes all of them.
    """
    sigma = set(sigma)
    outside = set(range(len(bd.original.rays))) - sigma
    xo = remove_star(bd.original, _outside_pairs(bd.original, outside))
    blown_outside = {bd.strict[i] for i in outside}
    xto = remove_star(bd.blown, _outside_pairs(bd.blown, blown_outside))
    center = tuple(sorted(xo.ray_map[i] for i in sigma))
    assert not has_codim_ge2_strata(orbit_closure_fan(xo.fan, center).fan)
    for j, jp in itertools.combinations(sorted(blown_outside), 2):
        assert not divisors_intersect(xto.fan, xto.ray_map[j], xto.ray_map[jp])
    return xo, xto


# ---------------------------------------------------------------------------
# Floor divisors on the blow-up


def tilde_divisor_floor(inst: BondalInstance, bd: BlowupData, u) -> dict:
    """Floor-formula divisor on the blown-up fan: the exceptional ray gets
    floor(u_1 + ... + u_l + c0), ray i gets floor((v_i, u) + c_i)."""
    if len(u) != inst.fan.rank:
        raise ValueError("u must have the fan's rank")
    out = {bd.strict[i]: floor_rat(dot(v, u) + inst.c.get(i, 0)) for i, v in enumerate(inst.fan.rays)}
    out[bd.exceptional_ray] = floor_rat(sum(_v1(u, inst.l)) + inst.c0)
    return divisor(out)


def pullback_divisor(bd: BlowupData, sigma: Cone, d) -> dict:
    """Pullback along the blow-down: coefficients are preserved on strict
    transforms; the exceptional coefficient is the support function's value
    at the exceptional generator, i.e. the sum of the center coefficients."""
    out = {bd.strict[i]: c for i, c in d.items()}
    out[bd.exceptional_ray] = sum(d.get(i, 0) for i in sigma)
    return divisor(out)


def verify_eq1(inst: BondalInstance, bd: BlowupData, u) -> bool:
    """The blow-up floor identity: the floor divisor upstairs equals the
    pullback of the floor divisor downstairs plus floor(sum u_i + c0) times
    the exceptional divisor."""
    if any(not 0 <= ui < 1 for ui in _v1(u, inst.l)):
        raise PreconditionViolated("the first l coordinates of u must lie in [0, 1)")
    down = divisor_floor(inst.fan, u, inst.c)
    rhs = div_add(
        pullback_divisor(bd, inst.sigma, down),
        {bd.exceptional_ray: floor_rat(sum(_v1(u, inst.l)) + inst.c0)},
    )
    return tilde_divisor_floor(inst, bd, u) == rhs


# ---------------------------------------------------------------------------
# Symbolic perturbation


def _floor_values_and_slopes(inst: BondalInstance, bd: BlowupData, u, w):
    """(ray id, floor argument, perturbation slope) per blown-fan ray; the
    slope is the pairing of the ray's first-l part with w."""
    l = inst.l
    rows = []
    for i, v in enumerate(inst.fan.rays):
        rows.append((bd.strict[i], dot(v, u) + inst.c.get(i, 0), dot(_v1(v, l), w)))
    rows.append((bd.exceptional_ray, sum(_v1(u, l)) + inst.c0, sum(w)))
    return rows


def perturb_symbolic(inst: BondalInstance, bd: BlowupData, u, w) -> dict:
    """Exact one-sided limit of the blown-up floor divisor under an
    infinitesimal move of u against w (padded by zeros): floor(x - eps*g)
    is floor(x) unless x is an integer and g > 0, in which case x - 1."""
    if sum(w) <= 0:
        raise PreconditionViolated("w must pair positively with (1,...,1)")
    out = {}
    for rid, x, g in _floor_values_and_slopes(inst, bd, u, w):
        fx = floor_rat(x)
        out[rid] = fx - 1 if x == fx and g > 0 else fx
    return divisor(out)


def concrete_epsilon(inst: BondalInstance, bd: BlowupData, u, w) -> Fraction:
    """A rational eps > 0 small enough that no floor argument crosses an
    integer strictly between the perturbed and unperturbed values."""
    rows = _floor_values_and_slopes(inst, bd, u, w)
    margins = [min(x - floor_rat(x), floor_rat(x) + 1 - x) for _, x, _ in rows if x != floor_rat(x)]
    slope = max(max((abs(g) for _, _, g in rows), default=0), 1)
    return min(margins, default=Fraction(1)) / (2 * slope)


def perturbed_point(inst: BondalInstance, u, w, eps):
    pad = tuple(w) + (0,) * (inst.fan.rank - inst.l)
    return tuple(Fraction(a) - eps * b for a, b in zip(u, pad))


# ---------------------------------------------------------------------------
# Generating systems for the perturbed twists


def claim2_system(inst: BondalInstance, bd: BlowupData, u, xto: Subfan | None = None) -> gensys.GeneratingSystem:
    """The generating system on R^l controlling which floor coefficients
    drop under perturbation: one item per positive-scaling class of nonzero
    first-l ray parts among the rays whose floor argument is integral,
    with the corresponding prime divisors (= blown-fan ray ids)."""
    l = inst.l
    if (sum(_v1(u, l)) + inst.c0).denominator != 1:
        raise PreconditionViolated("sum of the first l coordinates plus c0 must be integral")
    if any(not 0 < ui < 1 for ui in _v1(u, l)):
        raise PreconditionViolated("the first l coordinates of u must lie strictly in (0, 1)")
    xto = xto or z_removal(bd, inst.sigma)[1]
    items: dict[gensys.HalfSpace, set] = {}
    for i, v in enumerate(inst.fan.rays):
        if (dot(v, u) + Fraction(inst.c.get(i, 0))).denominator != 1:
            continue
        p1 = _v1(v, l)
        if all(x == 0 for x in p1):
            continue
        items.setdefault(gensys.HalfSpace.make(p1), set()).add(bd.strict[i])
    wplus = gensys.HalfSpace((1,) * l)
    if wplus in items:
        raise DisjointnessFailure("an item coincides with the reference half-space; normalization failed")
    primes = sorted(p for ps in items.values() for p in ps)
    for a, b in itertools.combinations(primes, 2):
        if divisors_intersect(xto.fan, xto.ray_map[a], xto.ray_map[b]):
            raise DisjointnessFailure(f"prime divisors {a} and {b} intersect after stratum removal")
    return gensys.GeneratingSystem(l, wplus, tuple(gensys.Item(h, frozenset(p)) for h, p in sorted(items.items(), key=lambda kv: kv[0].normal)))


@dataclass(frozen=True)
class Claim2Checks:
    certificate_violations: tuple
    eq2_failures: tuple  # chamber sign vectors where the symbolic identity broke
    epsilon_failures: tuple  # chambers where the concrete-eps cross-check broke
    leaf_failures: tuple  # chambers whose perturbed divisor class left the collection

    @property
    def ok(self) -> bool:
        return not (self.certificate_violations or self.eq2_failures or self.epsilon_failures or self.leaf_failures)


def verify_claim2(inst: BondalInstance, bd: BlowupData, u, xto: Subfan | None = None, collection=None, group: ClassGroup | None = None):
    """Resolve the perturbation system at u and verify everything checkable:
    the certificate itself, the symbolic perturbation identity on every
    chamber, a concrete-epsilon cross-check, and membership of every leaf
    divisor in the stabilized floor-class collection of the blown fan."""
    xto = xto or z_removal(bd, inst.sigma)[1]
    gs = claim2_system(inst, bd, u, xto)
    cert = gensys.resolve(gs)

    def disjoint(p, q):
        return p != q and not divisors_intersect(xto.fan, xto.ray_map[p], xto.ray_map[q])

    violations = tuple(gensys.verify_certificate(cert, gs, disjoint=disjoint))

    g = group or class_group(xto.fan)
    if collection is None:
        tilde_d = qdivisor({bd.strict[i]: ci for i, ci in inst.c.items()} | {bd.exceptional_ray: inst.c0})
        collection = thomsen_collection(xto.fan, tilde_d, group=g)

    du = tilde_divisor_floor(inst, bd, u)
    exc = {bd.exceptional_ray: 1}
    eq2_bad, eps_bad, leaf_bad = [], [], []
    for ch, formal in gensys.chambers(gs):
        d_w = {xto_id: 1 for xto_id in formal.primes}
        expected = div_sub(div_sub(du, d_w), exc)
        perturbed = perturb_symbolic(inst, bd, u, ch.witness)
        if perturbed != expected:
            eq2_bad.append(ch.signs)
        eps = concrete_epsilon(inst, bd, u, ch.witness)
        u_prime = perturbed_point(inst, u, ch.witness, eps)
        if tilde_divisor_floor(inst, bd, u_prime) != perturbed:
            eps_bad.append(ch.signs)
        if g.class_of(perturbed) not in collection.classes:
            leaf_bad.append(ch.signs)
    checks = Claim2Checks(violations, tuple(eq2_bad), tuple(eps_bad), tuple(leaf_bad))
    return cert, checks


# ---------------------------------------------------------------------------
# Single-perturbation witnesses on stratum-free fans


def _bezout(a, b):
    # (g, s, t) with s*a + t*b = g = gcd(a, b), g >= 0.
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _integral_pairing_vector(v):
    # Integer u0 with (v, u0) = 1 for primitive v, by extended-gcd folding.
    g, coeffs = 0, []
    for x in v:
        ng, a, b = _bezout(g, x)
        coeffs = [a * c for c in coeffs]
        coeffs.append(b)
        g = ng
    assert g == 1
    return tuple(coeffs)


def _kernel_vectors(v):
    return gensys._kernel_basis((v,))


def prop45_witnesses(f: Fan, d=None, denominator_budget: int = 16):
    """For each ray of a fan without cones of dimension >= 2, a rational u
    whose floor argument is integral exactly on that ray (and possibly its
    negative), together with the perturbation dropping that one coefficient.

    Candidates walk the solution hyperplane of (v_i, u) = -c_i with offsets
    of increasing denominator; the search is deterministic.
    """
    d = qdivisor(d)
    if has_codim_ge2_strata(f):
        raise PreconditionViolated("fan must have no cone of dimension >= 2")
    if not is_smooth(f):
        raise PreconditionViolated("fan must be smooth")
    out = []
    for i, vi in enumerate(f.rays):
        u0 = _integral_pairing_vector(vi)
        u_p = tuple(-Fraction(d.get(i, 0)) * x for x in u0)
        kernel = _kernel_vectors(vi)

        def pattern_ok(u):
            for j, vj in enumerate(f.rays):
                val = dot(vj, u) + Fraction(d.get(j, 0))
                integral = val.denominator == 1
                if vj == vi or vj == tuple(-x for x in vi):
                    if vj == vi and not integral:
                        return False
                elif integral:
                    return False
            return True

        found = None
        candidates = itertools.chain(
            [u_p],
            (
                tuple(a + Fraction(num, m) * b for a, b in zip(u_p, offset))
                for m in range(2, denominator_budget + 1)
                for offset in kernel
                for num in range(1, m)
            ),
        )
        for u in candidates:
            if pattern_ok(u):
                found = u
                break
        if found is None:
            raise SearchBudgetExceeded(f"no admissible u for ray {i} within denominator {denominator_budget}")

        du = divisor_floor(f, found, d)
        # Perturb against a direction pairing to +1 with v_i: only the i-th
        # coefficient can drop, and it does.
        rows = [(j, dot(vj, found) + Fraction(d.get(j, 0)), dot(vj, u0)) for j, vj in enumerate(f.rays)]
        margins = [min(x - floor_rat(x), floor_rat(x) + 1 - x) for _, x, _ in rows if x != floor_rat(x)]
        slope = max(max((abs(g) for _, _, g in rows), default=0), 1)
        eps = min(margins, default=Fraction(1)) / (2 * slope)
        u_prime = tuple(a - eps * b for a, b in zip(found, u0))
        du_prime = divisor_floor(f, u_prime, d)
        assert du_prime == div_sub(du, {i: 1})
        out.append((i, found, u_prime, du, du_prime))
    return out


# ---------------------------------------------------------------------------
# Restriction to the center's orbit closure


def restrict_class_to_orbit(f: Fan, sigma: Cone, d) -> dict:
    """Push a divisor to the orbit closure of sigma: first subtract the
    principal divisors of the dual basis vectors to clear the center
    coefficients, then keep coefficients on the star's other rays."""
    sigma = tuple(sorted(set(sigma)))
    adjusted = dict(d)
    for k in sigma:
        ck = adjusted.get(k, 0)
        if ck:
            # div(e_k*) has coefficient (v_j)_k on ray j.
            adjusted = div_sub(adjusted, {j: ck * f.rays[j][k] for j in range(len(f.rays))})
    assert all(adjusted.get(k, 0) == 0 for k in sigma)
    oc = orbit_closure_fan(f, sigma)
    star_rays = {i for c in star(f, sigma) for i in c} - set(sigma)
    out: dict[int, object] = {}
    for i in star_rays:
        q = oc.ray_map[i]
        out[q] = out.get(q, 0) + adjusted.get(i, 0)
    return divisor(out)


def induced_qdivisor(inst: BondalInstance, u1) -> dict:
    """Fractional coefficients on the orbit closure's fan induced by a fixed
    first-l block u1: c'_i = (v_i1, u1) + c_i."""
    l = inst.l
    oc = orbit_closure_fan(inst.fan, inst.sigma)
    star_rays = {i for c in star(inst.fan, inst.sigma) for i in c} - set(inst.sigma)
    out = {}
    for i in star_rays:
        q = oc.ray_map[i]
        cq = dot(_v1(inst.fan.rays[i], l), u1) + Fraction(inst.c.get(i, 0))
        assert out.setdefault(q, cq) == cq
    return qdivisor(out)


# ---------------------------------------------------------------------------
# Full pipeline


@dataclass(frozen=True)
class Claim2Record:
    u: tuple
    d_value: int
    certificate: gensys.GenerationCertificate
    checks: Claim2Checks


@dataclass(frozen=True)
class RestrictionRecord:
    u1: tuple
    restricted_classes: frozenset
    collection_classes: frozenset

    @property
    def ok(self) -> bool:
        return self.restricted_classes == self.collection_classes


@dataclass(frozen=True)
class BondalReport:
    instance: BondalInstance
    grid_denominator: int
    eq1_total: int
    eq1_failures: tuple
    claim2_records: tuple
    d_values: frozenset
    d_window_expected: frozenset
    restriction_records: tuple

    @property
    def d_window_ok(self) -> bool:
        return self.d_values == self.d_window_expected

    @property
    def ok(self) -> bool:
        return (
            not self.eq1_failures
            and all(r.checks.ok for r in self.claim2_records)
            and self.d_window_ok
            and all(r.ok for r in self.restriction_records)
        )


def _grid(q, dim):
    return itertools.product([Fraction(k, q) for k in range(q)], repeat=dim)


def bondal_pipeline(inst: BondalInstance, grid_denominator: int) -> BondalReport:
    """Run every checkable identity of the blow-up twist argument over the
    rational grid with the given denominator."""
    errs = validate_instance(inst)
    if errs:
        raise PreconditionViolated("; ".join(errs))
    l, n, q = inst.l, inst.fan.rank, grid_denominator
    bd = blowup_tracked(inst)
    xo, xto = z_removal(bd, inst.sigma)

    group = class_group(xto.fan)
    tilde_d = qdivisor({bd.strict[i]: ci for i, ci in inst.c.items()} | {bd.exceptional_ray: inst.c0})
    collection = thomsen_collection(xto.fan, tilde_d, group=group)

    eq1_failures = []
    eq1_total = 0
    d_values = set()
    claim2_records = []
    for u in _grid(q, n):
        eq1_total += 1
        if not verify_eq1(inst, bd, u):
            eq1_failures.append(u)
        head = sum(_v1(u, l)) + inst.c0
        if head.denominator == 1:
            d_values.add(floor_rat(head))
            if all(0 < ui < 1 for ui in _v1(u, l)):
                cert, checks = verify_claim2(inst, bd, u, xto=xto, collection=collection, group=group)
                claim2_records.append(Claim2Record(u, floor_rat(head), cert, checks))

    expected = frozenset(range(l)) if inst.c0 == 0 else frozenset(range(1, l + 1))

    oc = orbit_closure_fan(inst.fan, inst.sigma)
    oc_group = class_group(oc.fan)
    restriction_records = []
    for u1 in _grid(q, l):
        if (sum(u1) + inst.c0).denominator != 1:
            continue
        induced = induced_qdivisor(inst, u1)
        coll = thomsen_collection(oc.fan, induced, group=oc_group)
        denom = lcm(q, coll.stabilization_evidence[-1])
        restricted = frozenset(
            oc_group.class_of(restrict_class_to_orbit(inst.fan, inst.sigma, divisor_floor(inst.fan, u1 + u2, inst.c)))
            for u2 in _grid(denom, n - l)
        )
        restriction_records.append(RestrictionRecord(u1, restricted, frozenset(coll.classes)))

    return BondalReport(
        instance=inst,
        grid_denominator=q,
        eq1_total=eq1_total,
        eq1_failures=tuple(eq1_failures),
        claim2_records=tuple(claim2_records),
        d_values=frozenset(d_values),
        d_window_expected=expected,
        restriction_records=tuple(restriction_records),
    )
