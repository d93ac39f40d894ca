"""Evaluation points and dual generalized Reed-Solomon coefficients.

The retrieval scheme hinges on one algebraic fact: with distinct nonzero
points beta_1..beta_n and

    v_i = 1 / prod_{j != i} (beta_i - beta_j)

the sums  sum_i v_i * beta_i**j  vanish for every j in 0..n-2. These v_i
are the multipliers of the dual of a generalized Reed-Solomon code with
unit column multipliers; annihilator_check verifies the identity directly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FieldTooSmall, InsufficientPoints
from .field import FieldElement, PrimeField, next_prime, is_prime
from .storage import StoragePattern


@dataclass(frozen=True)
class EvaluationPoints:
    """Distinct nonzero points beta_n, one per server, admissible for a
    block length L: beta_n + l != 0 for every l in 1..L."""

    field: PrimeField
    beta: tuple[FieldElement, ...]
    block_length: int

    def __post_init__(self):
        if self.block_length < 1:
            raise ValueError("block length must be positive")
        seen = set()
        for b in self.beta:
            if b.is_zero():
                raise ValueError("evaluation points must be nonzero")
            if b.value in seen:
                raise ValueError("evaluation points must be distinct")
            seen.add(b.value)
            for ell in range(1, self.block_length + 1):
                if (b.value + ell) % self.field.q == 0:
                    raise ValueError(
                        f"beta={b.value} collides with -{ell} in F_{self.field.q}"
                    )

    def beta_of(self, n: int) -> FieldElement:
        """Point assigned to server n (1-based)."""
        return self.beta[n - 1]


def choose_field(n_servers: int, block_length: int, user_q: int | None = None) -> PrimeField:
    """Smallest prime field with q > N + L, or a validated user override."""
    floor = n_servers + block_length
    if user_q is not None:
        if user_q <= floor:
            raise FieldTooSmall(f"q={user_q} must exceed N+L={floor}")
        if not is_prime(user_q):
            raise FieldTooSmall(f"q={user_q} is not prime")
        return PrimeField(user_q)
    return PrimeField(next_prime(floor))


def admissible_points(field: PrimeField, block_length: int) -> list[FieldElement]:
    """All nonzero points with beta + l != 0 for l in 1..L, ascending."""
    q = field.q
    banned = {(-ell) % q for ell in range(1, block_length + 1)}
    return [field.element(v) for v in range(1, q) if v not in banned]

def choose_points(field: PrimeField, n_servers: int, block_length: int) -> EvaluationPoints:
    """Deterministic point selection: scan 1, 2, ... and keep the first N
    admissible values. Same (q, N, L) always yields the same points."""
    if block_length < 1:
        raise ValueError("block length must be positive")
    pool = admissible_points(field, block_length)
    if len(pool) < n_servers:
        raise InsufficientPoints(
            f"F_{field.q} has only {len(pool)} admissible points, need {n_servers}"
        )
    return EvaluationPoints(field, tuple(pool[:n_servers]), block_length)


@dataclass(frozen=True)
class GrsCoefficients:
    """v_{m,n} for every message set m and every server n in its
    replication tuple."""

    by_set: dict[int, dict[int, FieldElement]]

    def of(self, m: int, n: int) -> FieldElement:
        return self.by_set[m][n]


def _beta_list(points) -> tuple[FieldElement, ...]:
    if isinstance(points, EvaluationPoints):
        return points.beta
    return tuple(points)


def dual_grs_coeffs(points, pattern: StoragePattern) -> GrsCoefficients:
    """v_{m,n} = inverse of prod over n' in R_m \\ {n} of (beta_n - beta_n').

    A singleton replication tuple gets the empty product, v = 1. Distinct
    points guarantee every factor (hence every v) is nonzero.
    """
    beta = _beta_list(points)
    by_set: dict[int, dict[int, FieldElement]] = {}
    for m in pattern.message_indices():
        servers = pattern.servers_of(m)
        per_server = {}
        for n in servers:
            prod = beta[0].field.one()
            for other in servers:
                if other != n:
                    prod = prod * (beta[n - 1] - beta[other - 1])
            per_server[n] = prod.inv()
        by_set[m] = per_server
    return GrsCoefficients(by_set)


def annihilator_check(points, coeffs: GrsCoefficients, m: int) -> bool:
    """True iff sum over n in R_m of v_{m,n} * beta_n**j is zero for every
    j in 0..rho_m-2. Vacuously true for singleton replication."""
    beta = _beta_list(points)
    per_server = coeffs.by_set[m]
    rho = len(per_server)
    field = beta[0].field
    for j in range(rho - 1):
        total = field.zero()
        for n, v in per_server.items():
            total = total + v * (beta[n - 1] ** j)
        if not total.is_zero():
            return False
    return True
