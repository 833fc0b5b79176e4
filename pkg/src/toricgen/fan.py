"""Fans of strictly convex rational polyhedral cones (simplicial only).

A Fan stores the lattice rank, the primitive ray generators (ray ids are
positions in the tuple) and the maximal cones as sorted ray-id tuples.
Only simplicial fans are accepted: every cone's generators must be
linearly independent, which makes faces plain subsets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import feasible
from .lattice import (
    NotCompletable,
    complete_to_basis,
    is_primitive,
    mat_from_columns,
    mat_rank,
    mat_vec,
    primitive_part,
    smith_normal_form,
    solve_rational,
    vec_add,
)


class UnknownCone(ValueError):
    pass


class UnknownRay(ValueError):
    pass


class CenterTooSmall(ValueError):
    """Stellar subdivision needs a center of dimension >= 2."""


class NonSmoothCenter(ValueError):
    pass


Cone = tuple[int, ...]  # sorted ray ids


def cone(*ray_ids: int) -> Cone:
    return tuple(sorted(set(ray_ids)))


@dataclass(frozen=True)
class Fan:
    rank: int
    rays: tuple[tuple[int, ...], ...]
    max_cones: tuple[Cone, ...]

    @staticmethod
    def make(rank, rays, max_cones) -> "Fan":
        rays = tuple(tuple(int(x) for x in v) for v in rays)
        cones = tuple(sorted(tuple(sorted(set(c))) for c in max_cones))
        return Fan(rank, rays, cones)

    def ray_matrix(self):
        """Rays as columns (rank x r)."""
        return mat_from_columns(list(self.rays))

    def cones(self):
        """All cones of the fan (face closure of the maximal cones)."""
        seen = set()
        for c in self.max_cones:
            for k in range(len(c) + 1):
                seen.update(itertools.combinations(c, k))
        return seen

    def has_cone(self, c: Cone) -> bool:
        c = tuple(sorted(set(c)))
        return any(set(c) <= set(mc) for mc in self.max_cones)


def validate_fan(f: Fan) -> list[str]:
    """Empty list iff all fan invariants hold; otherwise named violations."""
    errors = []
    seen = {}
    for i, v in enumerate(f.rays):
        if len(v) != f.rank:
            errors.append(f"ray {i} has dimension {len(v)}, expected {f.rank}")
            continue
        if not is_primitive(v):
            errors.append(f"ray {i} = {v} is not primitive")
        if v in seen:
            errors.append(f"ray {i} duplicates ray {seen[v]}")
        seen[v] = i
    if errors:
        return errors
    for c in f.max_cones:
        if any(i < 0 or i >= len(f.rays) for i in c):
            errors.append(f"cone {c} references unknown rays")
            continue
        gens = [f.rays[i] for i in c]
        if gens and mat_rank(mat_from_columns(gens)) < len(gens):
            errors.append(f"cone {c} is not strictly convex: generators are linearly dependent")
    if errors:
        return errors
    for a, b in itertools.combinations(f.max_cones, 2):
        if set(a) <= set(b) or set(b) <= set(a):
            errors.append(f"cone {a} and cone {b} are nested; both listed as maximal")
    for a, b in itertools.combinations(f.max_cones, 2):
        common = set(a) & set(b)
        if not _separable(f, a, b, common):
            errors.append(f"cones {a} and {b} do not intersect in a common face")
    return errors


def _separable(f: Fan, a: Cone, b: Cone, common) -> bool:
    # A linear functional vanishing on the shared rays, positive on the rest
    # of `a` and negative on the rest of `b`, witnesses that the two cones
    # meet exactly in the face spanned by the shared rays.
    constraints = []
    for i in common:
        constraints.append((f.rays[i], feasible.EQ))
    for i in a:
        if i not in common:
            constraints.append((f.rays[i], feasible.GT))
    for i in b:
        if i not in common:
            constraints.append((tuple(-x for x in f.rays[i]), feasible.GT))
    return feasible.feasible(constraints, f.rank)


def faces(c: Cone) -> set[Cone]:
    return {sub for k in range(len(c) + 1) for sub in itertools.combinations(c, k)}


def star(f: Fan, sigma: Cone) -> set[Cone]:
    """All cones of the fan admitting sigma as a face."""
    sigma = tuple(sorted(set(sigma)))
    if not f.has_cone(sigma):
        raise UnknownCone(f"{sigma} is not a cone of the fan")
    return {c for c in f.cones() if set(sigma) <= set(c)}


def is_smooth(f: Fan) -> bool:
    """Every maximal cone's generators extend to a lattice basis."""
    for c in f.max_cones:
        if not c:
            continue
        gens = [f.rays[i] for i in c]
        diag = smith_normal_form(mat_from_columns(gens)).diagonal
        if len([d for d in diag if d != 0]) < len(gens) or any(d not in (0, 1) for d in diag):
            return False
    return True


def is_complete(f: Fan) -> bool:
    """Support equals the whole space (ridge-pairing criterion)."""
    if not f.max_cones:
        return False
    if f.rank == 0:
        return True
    if any(len(c) != f.rank for c in f.max_cones):
        return False
    ridge_count = {}
    for c in f.max_cones:
        for ridge in itertools.combinations(c, f.rank - 1):
            ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
    return all(n == 2 for n in ridge_count.values())


@dataclass(frozen=True)
class OrbitClosure:
    fan: Fan
    ray_map: dict  # old ray id -> quotient ray id (rays of star(sigma) \ sigma)
    scales: dict  # old ray id -> positive scale factor of the projection


def orbit_closure_fan(f: Fan, sigma: Cone) -> OrbitClosure:
    """Fan of the orbit closure: star(sigma) projected to the quotient lattice."""
    sigma = tuple(sorted(set(sigma)))
    if not f.has_cone(sigma):
        raise UnknownCone(f"{sigma} is not a cone of the fan")
    gens = [f.rays[i] for i in sigma]
    try:
        basis = complete_to_basis(gens, f.rank)
    except NotCompletable as exc:
        raise NonSmoothCenter(str(exc)) from exc
    binv = _unimodular_inverse(basis)
    l = len(sigma)

    def project(v):
        w = mat_vec(binv, v)
        return w[l:]

    star_max = [c for c in f.max_cones if set(sigma) <= set(c)]
    quot_rays = []
    ray_map = {}
    scales = {}
    for c in star_max:
        for i in c:
            if i in sigma or i in ray_map:
                continue
            prim, scale = primitive_part(project(f.rays[i]))
            assert scale.denominator == 1
            if prim in quot_rays:
                ray_map[i] = quot_rays.index(prim)
            else:
                ray_map[i] = len(quot_rays)
                quot_rays.append(prim)
            scales[i] = int(scale)
    quot_cones = sorted({tuple(sorted(ray_map[i] for i in c if i not in sigma)) for c in star_max})
    qf = Fan.make(f.rank - l, quot_rays, quot_cones)
    return OrbitClosure(qf, ray_map, scales)


def _unimodular_inverse(m):
    n = len(m)
    inv = []
    for j in range(n):
        e = tuple(1 if i == j else 0 for i in range(n))
        col = solve_rational(m, e)
        inv.append(tuple(int(x) for x in col))
    return mat_from_columns(inv)


@dataclass(frozen=True)
class Subdivision:
    fan: Fan
    new_ray_id: int
    ray_map: dict  # old ray id -> ray id in the new fan (always identical here)


def stellar_subdivision(f: Fan, sigma: Cone) -> Subdivision:
    """Blow up along the orbit closure of sigma: insert the ray sum(sigma)."""
    sigma = tuple(sorted(set(sigma)))
    if len(sigma) < 2:
        raise CenterTooSmall("stellar subdivision center must have dimension >= 2")
    if not f.has_cone(sigma):
        raise UnknownCone(f"{sigma} is not a cone of the fan")
    gens = [f.rays[i] for i in sigma]
    try:
        complete_to_basis(gens, f.rank)
    except NotCompletable as exc:
        raise NonSmoothCenter(str(exc)) from exc
    if not is_smooth(f):
        raise NonSmoothCenter("ambient fan is not smooth")
    v0 = gens[0]
    for g in gens[1:]:
        v0 = vec_add(v0, g)
    assert is_primitive(v0)
    new_id = len(f.rays)
    new_cones = []
    for c in f.max_cones:
        if set(sigma) <= set(c):
            for dropped in sigma:
                new_cones.append(tuple(sorted((set(c) - {dropped}) | {new_id})))
        else:
            new_cones.append(c)
    nf = Fan.make(f.rank, f.rays + (v0,), new_cones)
    return Subdivision(nf, new_id, {i: i for i in range(len(f.rays))})


@dataclass(frozen=True)
class Subfan:
    fan: Fan
    ray_map: dict  # surviving old ray id -> new ray id


def remove_star(f: Fan, cones_to_remove) -> Subfan:
    """Subfan of all cones not admitting any listed cone as a face."""
    removed = [tuple(sorted(set(c))) for c in cones_to_remove]
    kept = [c for c in f.cones() if not any(set(rc) <= set(c) for rc in removed)]
    kept_max = [c for c in kept if not any(set(c) < set(d) for d in kept)]
    surviving = sorted({i for c in kept for i in c})
    ray_map = {old: new for new, old in enumerate(surviving)}
    new_cones = sorted({tuple(sorted(ray_map[i] for i in c)) for c in kept_max})
    nf = Fan.make(f.rank, [f.rays[i] for i in surviving], new_cones)
    assert not validate_fan(nf)
    return Subfan(nf, ray_map)


def has_codim_ge2_strata(f: Fan) -> bool:
    return any(len(c) >= 2 for c in f.max_cones)


def divisors_intersect(f: Fan, i: int, j: int) -> bool:
    """True iff the divisors of rays i and j meet, i.e. {i, j} spans a cone."""
    for k in (i, j):
        if k < 0 or k >= len(f.rays):
            raise UnknownRay(f"no ray with id {k}")
    if i == j:
        raise ValueError("expected two distinct rays")
    return f.has_cone((i, j))
