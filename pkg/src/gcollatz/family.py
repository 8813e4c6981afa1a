"""The two-power triplet family and its cycle registry.

For p >= q >= 0 the family member is (2^p + 2^q, 2^p + 2^(q+1), 2^p) with the
plus sign.  Every member has an analytically known trivial cycle; eight (p, q)
pairs additionally carry exceptional cycles, kept in a JSON registry as
(seed, length) pairs and regenerated by iteration on first use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from gcollatz.core import DomainError, Triplet, step, validate_triplet


class VerificationError(RuntimeError):
    """An analytically constructed or registered cycle failed its iteration check."""


@dataclass(frozen=True)
class Cycle:
    """A finite orbit in canonical form: members in orbit order, minimum first."""

    triplet: Triplet
    members: tuple[int, ...]

    @property
    def omega(self) -> int:
        return self.members[0]

    @property
    def length(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class AttractorSet:
    """The conjectured complete cycle set of a triplet."""

    triplet: Triplet
    cycles: tuple[Cycle, ...]

    @property
    def minima(self) -> frozenset[int]:
        return frozenset(c.omega for c in self.cycles)


def canonical_cycle(t: Triplet, members_in_orbit_order: list[int]) -> Cycle:
    """Rotate an orbit-ordered member list so the minimum comes first."""
    i = members_in_orbit_order.index(min(members_in_orbit_order))
    rotated = tuple(members_in_orbit_order[i:] + members_in_orbit_order[:i])
    return Cycle(t, rotated)


def make_pq(p: int, q: int) -> Triplet:
    """Family member (2^p + 2^q, 2^p + 2^(q+1), 2^p)+ for 0 <= q <= p."""
    if q < 0 or p < q:
        raise DomainError("q_gt_p", f"need 0 <= q <= p, got p={p}, q={q}")
    return validate_triplet(2**p + 2**q, 2**p + 2 ** (q + 1), 2**p)


def make_equal(p: int) -> Triplet:
    """The p = q member (2^(p+1), 3*2^p, 2^p)+."""
    return make_pq(p, p)


def identify_pq(t: Triplet) -> tuple[int, int] | None:
    """Recover (p, q) when t is a two-power family member, else None."""
    if t.kappa0 != 1:
        return None
    beta = t.beta
    twoq = t.d - beta
    if beta < 1 or twoq < 1:
        return None
    if beta & (beta - 1) or twoq & (twoq - 1):  # not powers of two
        return None
    p = beta.bit_length() - 1
    q = twoq.bit_length() - 1
    if q > p or t.alpha != t.d + twoq:
        return None
    return p, q


def _verified_cycle(t: Triplet, analytic_members) -> Cycle:
    """Materialize an analytic member sequence, checking it against iteration."""
    it = iter(analytic_members)
    first = next(it)
    members = [first]
    v = first
    for expected in it:
        v = step(t, v)
        if v != expected:
            raise VerificationError(
                f"{t.label}: iteration gives {v} where the analytic cycle has {expected}"
            )
        members.append(v)
    if step(t, v) != first:
        raise VerificationError(f"{t.label}: analytic cycle does not close at {first}")
    return Cycle(t, tuple(members))


def trivial_cycle_general(dprime: int, q: int) -> Cycle:
    """Trivial cycle of (d, d+2^q, d-2^q)+ where d = 2^q * dprime, dprime >= 2.

    For q >= 1 the members are beta/2^q, ..., beta/2, beta, 2*beta, ...,
    dprime*beta (length dprime + q); for q = 0 they are beta, 2*beta, ...,
    d*beta (length d).  Built analytically and verified by iteration.
    """
    if dprime < 2 or q < 0:
        raise DomainError("bad_shape", f"need dprime >= 2 and q >= 0, got {dprime}, {q}")
    d = (1 << q) * dprime
    t = validate_triplet(d, d + (1 << q), d - (1 << q))
    beta = t.beta

    def analytic():
        for i in range(q, 0, -1):
            yield beta >> i
        for m in range(1, dprime + 1):
            yield m * beta

    return _verified_cycle(t, analytic())


def trivial_cycle_pq(p: int, q: int) -> Cycle:
    """Trivial cycle of the (p, q) member: 2^(p-q) doubling up to 2^p, then
    multiples of 2^p up to (2^(p-q)+1)*2^p; length 2^(p-q) + q + 1."""
    if q < 0 or p < q:
        raise DomainError("q_gt_p", f"need 0 <= q <= p, got p={p}, q={q}")
    c = trivial_cycle_general(2 ** (p - q) + 1, q)
    assert c.triplet == make_pq(p, q)
    return c


def _regenerate(t: Triplet, seed: int, expected_length: int) -> Cycle:
    """Iterate from a registry seed until first return; check the length."""
    members = [seed]
    v = step(t, seed)
    while v != seed:
        members.append(v)
        if len(members) > expected_length:
            raise VerificationError(
                f"{t.label}: orbit of {seed} did not close within {expected_length} steps"
            )
        v = step(t, v)
    if len(members) != expected_length:
        raise VerificationError(
            f"{t.label}: cycle of {seed} has length {len(members)}, registry says {expected_length}"
        )
    if min(members) != seed:
        raise VerificationError(f"{t.label}: registry seed {seed} is not its cycle minimum")
    return Cycle(t, tuple(members))


@lru_cache(maxsize=1)
def _registry_document() -> dict:
    text = resources.files("gcollatz").joinpath("data/exceptional_cycles.json").read_text()
    doc = json.loads(text)
    if doc.get("version") != 1:
        raise VerificationError(f"unsupported registry version {doc.get('version')!r}")
    return doc


@lru_cache(maxsize=1)
def exceptional_registry() -> dict[tuple[int, int], tuple[Cycle, ...]]:
    """Exceptional cycles keyed by (p, q), regenerated and length-checked."""
    out = {}
    for entry in _registry_document()["entries"]:
        p, q = entry["p"], entry["q"]
        t = make_pq(p, q)
        out[(p, q)] = tuple(
            _regenerate(t, c["seed"], c["length"]) for c in entry["cycles"]
        )
    return out


def registry_diagnostics() -> list[str]:
    return list(_registry_document().get("diagnostics", []))


def attractor_minima(p: int, q: int) -> frozenset[int]:
    """Cycle minima of the (p, q) member without materializing the trivial cycle."""
    if q < 0 or p < q:
        raise DomainError("q_gt_p", f"need 0 <= q <= p, got p={p}, q={q}")
    seeds = {2 ** (p - q)}
    for c in exceptional_registry().get((p, q), ()):
        seeds.add(c.omega)
    return frozenset(seeds)


def attractor_set(p: int, q: int) -> AttractorSet:
    """Trivial cycle plus any registered exceptional cycles of the (p, q) member."""
    cycles = (trivial_cycle_pq(p, q),) + exceptional_registry().get((p, q), ())
    return AttractorSet(cycles[0].triplet, cycles)
