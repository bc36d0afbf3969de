"""Zero-error eavesdropping strategies and the security analysis they imply.

Eve sits on a lossless substitute channel and, per pulse of known photon
number n, may block the pulse, forward all photons, store k photons in a
quantum memory and forward the rest, or run an unambiguous-discrimination
measurement on the whole pulse and resend one fresh photon on a
conclusive outcome (IRUD).  None of these actions creates errors; the
only constraint is that Bob's expected detection rate must match what
the lossy fiber would have produced.

The best mixture of actions for a given attenuation is a linear program:
maximize Eve's information per pulse subject to the rate constraint and
one probability simplex per photon number.  Because the objective and
constraint are separable over photon numbers, the optimum is found
exactly by a greedy sweep over the concave per-n envelopes, filling the
rate budget in order of information gained per unit of detection rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import ChannelParams, poisson_pmf, raw_rate_exact
from .protocol import ProtocolKind
from .quantum import (
    FOUR_STATE_CYCLE,
    LinearDependenceError,
    build_usd_povm,
    overlap,
    protocol_product_states,
    qubit_state,
)

RATE_MATCH_TOL = 1e-12
BISECT_TOL_DB = 1e-4
DENSE_USD_MAX_PHOTONS = 6


@dataclass(frozen=True)
class EveAction:
    """One of Eve's per-pulse actions; ``kept`` is used by storage only."""

    kind: str
    kept: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("block", "forward", "store", "irud"):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind == "store" and self.kept < 1:
            raise ValueError("storage must keep at least one photon")
        if self.kind != "store" and self.kept:
            raise ValueError("only storage actions keep photons")

    @property
    def label(self) -> str:
        return f"store{self.kept}" if self.kind == "store" else self.kind


BLOCK = EveAction("block")
FORWARD = EveAction("forward")
IRUD = EveAction("irud")


def store(kept: int) -> EveAction:
    return EveAction("store", kept)


def admissible_actions(n: int) -> list[EveAction]:
    """Actions available on an n-photon pulse (storage needs n >= 2, IRUD n >= 3)."""
    if n < 1:
        raise ValueError("pulses with photons only")
    actions = [BLOCK, FORWARD]
    actions.extend(store(k) for k in range(1, n))
    if n >= 3:
        actions.append(IRUD)
    return actions


def binary_entropy(p: float) -> float:
    """Entropy of a {p, 1-p} coin in bits, with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def storage_info(k: int, chi: float) -> float:
    """Eve's information per sifted bit from k stored photons.

    After the pair announcement Eve must discriminate two states of
    overlap chi^k; the best information is 1 - H(P) with
    P = (1 + sqrt(1 - chi^{2k}))/2.  For chi = 0 the states are
    orthogonal and she learns the full bit.
    """
    if k < 1:
        raise ValueError("storage requires at least one photon")
    if not 0.0 <= chi < 1.0:
        raise ValueError(f"overlap chi must be in [0, 1), got {chi}")
    p = 0.5 * (1.0 + math.sqrt(1.0 - chi ** (2 * k)))
    return 1.0 - binary_entropy(p)


@lru_cache(maxsize=None)
def _cycle_overlaps() -> tuple[float, ...]:
    """Single-photon overlaps between consecutive states of the four-cycle."""
    kets = [qubit_state(label) for label in FOUR_STATE_CYCLE]
    return tuple(
        float(overlap(kets[i], kets[(i + 1) % 4]).real) for i in range(4)
    )


@lru_cache(maxsize=None)
def _usd_success(n: int) -> float:
    """Equal-success USD probability for the four n-photon product states.

    Up to six photons the full POVM is constructed and validated; beyond
    that the 4x4 Gram matrix is obtained from the single-photon overlaps
    raised to the n-th power (tensor products multiply overlaps), which
    gives the same smallest eigenvalue without dense 2^n matrices.
    """
    if n < 1:
        return 0.0
    if n <= DENSE_USD_MAX_PHOTONS:
        try:
            _, p_ok = build_usd_povm(protocol_product_states(n))
        except LinearDependenceError:
            return 0.0
        return p_ok
    gram = np.eye(4)
    edges = _cycle_overlaps()
    for i in range(4):
        j = (i + 1) % 4
        gram[i, j] = gram[j, i] = edges[i] ** n
    return float(np.linalg.eigvalsh(gram)[0])


def irud_success(n: int, protocol: ProtocolKind) -> float:
    """Probability that the n-photon USD measurement is conclusive.

    Both protocols use the same four states, so the value does not
    depend on the protocol; it is zero for n <= 2 where the product
    states are linearly dependent.
    """
    del protocol
    return _usd_success(n)


def detection_share(n: int, action: EveAction, eta_det: float, p_ok: float) -> float:
    """Probability that Bob's detector fires when Eve takes this action.

    Eve's substitute channel is lossless, so forwarded photons only face
    the detector; a conclusive IRUD resends one fresh photon right at
    Bob's lab.
    """
    if action.kind == "block":
        return 0.0
    if action.kind == "forward":
        return 1.0 - (1.0 - eta_det) ** n
    if action.kind == "store":
        if not 1 <= action.kept <= n - 1:
            raise ValueError(f"cannot keep {action.kept} of {n} photons")
        return 1.0 - (1.0 - eta_det) ** (n - action.kept)
    return p_ok * eta_det


def eve_info_per_action(n: int, action: EveAction, protocol: ProtocolKind, chi: float) -> float:
    """Eve's information in bits per detection she lets through.

    Forwarded pulses are untouched (0 bits).  Stored photons give the
    full bit under basis announcements (BB84) and storage_info(k, chi)
    under pair announcements.  A conclusive IRUD identifies the state
    exactly.  Blocked pulses produce no detections; the value is
    undefined and requesting it is an error.
    """
    if action not in admissible_actions(n):
        raise ValueError(f"action {action.label} not admissible for n={n}")
    if action.kind == "block":
        raise ValueError("blocked pulses yield no detections")
    if action.kind == "forward":
        return 0.0
    if action.kind == "store":
        return 1.0 if protocol is ProtocolKind.BB84 else storage_info(action.kept, chi)
    return 1.0


@dataclass(frozen=True)
class AttackPolicy:
    """Per-photon-number probability distribution over Eve's actions."""

    rows: dict[int, dict[EveAction, float]]

    def validate(self) -> None:
        for n, row in self.rows.items():
            total = 0.0
            admissible = admissible_actions(n)
            for action, weight in row.items():
                if action not in admissible:
                    raise ValueError(f"action {action.label} not admissible for n={n}")
                if weight < -1e-12:
                    raise ValueError(f"negative weight {weight} for n={n}")
                total += weight
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"weights for n={n} sum to {total}, expected 1")

    def weight(self, n: int, action: EveAction) -> float:
        return self.rows.get(n, {}).get(action, 0.0)


@dataclass(frozen=True)
class CurvePoint:
    """One sample of the information-versus-attenuation curve."""

    delta_db: float
    eve_info: float
    policy: AttackPolicy
    feasible: bool
    dominant_action: str


@dataclass(frozen=True)
class CriticalAttenuationReport:
    delta_c_db: float
    length_km: float
    method: str
    delta_c_db_approx: float | None = None


def pure_storage_policy(n_max: int) -> AttackPolicy:
    """Block single-photon pulses, keep one photon from every other pulse."""
    rows: dict[int, dict[EveAction, float]] = {1: {BLOCK: 1.0}}
    for n in range(2, n_max + 1):
        rows[n] = {store(1): 1.0}
    return AttackPolicy(rows)


def bob_rate_under_policy(policy: AttackPolicy, params: ChannelParams) -> float:
    """Bob's expected detection probability per pulse under Eve's policy."""
    policy.validate()
    total = 0.0
    for n, row in policy.rows.items():
        p_n = poisson_pmf(params.mu, n)
        p_ok = _usd_success(n)
        for action, weight in row.items():
            total += p_n * weight * detection_share(n, action, params.eta_det, p_ok)
    return total


def _row_points(n: int, params: ChannelParams, protocol: ProtocolKind):
    """Attainable (detection share, share * info) points for one photon number."""
    p_ok = _usd_success(n)
    points = [(0.0, 0.0, BLOCK)]
    for action in admissible_actions(n):
        if action.kind == "block":
            continue
        d = detection_share(n, action, params.eta_det, p_ok)
        info = eve_info_per_action(n, action, protocol, params.chi)
        points.append((d, d * info, action))
    return points


def _upper_hull(points):
    """Upper convex hull of (x, v) points, x >= 0, as a vertex list."""
    best: dict[float, tuple[float, EveAction]] = {}
    for x, v, action in points:
        if x not in best or v > best[x][0]:
            best[x] = (v, action)
    pts = sorted((x, v, a) for x, (v, a) in best.items())
    hull: list[tuple[float, float, EveAction]] = []
    for p in pts:
        while len(hull) >= 2:
            x1, v1, _ = hull[-2]
            x2, v2, _ = hull[-1]
            # drop the middle point unless it lies strictly above the chord
            if (v2 - v1) * (p[0] - x1) <= (p[1] - v1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def optimal_attack_at_rate(
    params: ChannelParams, protocol: ProtocolKind, target_rate: float
) -> tuple[float, AttackPolicy]:
    """Exact maximum of Eve's information at a fixed detection rate.

    Returns (information in bits per pulse, optimal policy).  The
    feasible region is one rate-equality constraint over independent
    per-n simplices, so walking the per-n concave envelopes in order of
    decreasing slope fills the budget optimally; at most one photon
    number ends up mixing two actions.
    """
    pmf = [poisson_pmf(params.mu, n) for n in range(params.n_max + 1)]
    hulls = {n: _upper_hull(_row_points(n, params, protocol)) for n in range(1, params.n_max + 1)}

    segments = []
    for n, hull in hulls.items():
        for j in range(len(hull) - 1):
            x1, v1, _ = hull[j]
            x2, v2, _ = hull[j + 1]
            width = pmf[n] * (x2 - x1)
            gain = pmf[n] * (v2 - v1)
            segments.append((gain / width if width > 0 else 0.0, n, j, width, gain))
    segments.sort(key=lambda s: (-s[0], s[1], s[2]))

    capacity = sum(s[3] for s in segments)
    if target_rate > capacity + RATE_MATCH_TOL * max(1.0, capacity):
        raise ValueError(
            f"rate {target_rate} exceeds the all-forward capacity {capacity}"
        )

    progress = {n: 0 for n in hulls}  # index of the last hull vertex reached
    fraction: dict[int, tuple[int, float]] = {}
    objective = 0.0
    remaining = target_rate
    for slope, n, j, width, gain in segments:
        if remaining <= RATE_MATCH_TOL * max(1.0, target_rate):
            break
        if width >= remaining:
            frac = remaining / width
            objective += frac * gain
            if frac < 1.0:
                fraction[n] = (j, frac)
            else:
                progress[n] = j + 1
            remaining = 0.0
            break
        objective += gain
        progress[n] = j + 1
        remaining -= width

    rows: dict[int, dict[EveAction, float]] = {}
    for n, hull in hulls.items():
        if n in fraction:
            j, frac = fraction[n]
            rows[n] = {hull[j][2]: 1.0 - frac, hull[j + 1][2]: frac}
        else:
            rows[n] = {hull[progress[n]][2]: 1.0}
    policy = AttackPolicy(rows)
    policy.validate()
    return objective, policy


def _dominant_action(policy: AttackPolicy, params: ChannelParams, protocol: ProtocolKind) -> str:
    """Action carrying the largest share of Eve's information (rate as tiebreak)."""
    info_share: dict[str, float] = {}
    rate_share: dict[str, float] = {}
    for n, row in policy.rows.items():
        p_n = poisson_pmf(params.mu, n)
        p_ok = _usd_success(n)
        for action, weight in row.items():
            d = detection_share(n, action, params.eta_det, p_ok)
            rate_share[action.label] = rate_share.get(action.label, 0.0) + p_n * weight * d
            if action.kind != "block":
                info = eve_info_per_action(n, action, protocol, params.chi)
                info_share[action.label] = info_share.get(action.label, 0.0) + p_n * weight * d * info
    for share in (info_share, rate_share):
        if share and max(share.values()) > 0.0:
            return max(sorted(share), key=lambda k: share[k])
    return BLOCK.label


def optimize_policy(params: ChannelParams, protocol: ProtocolKind, delta_db: float) -> CurvePoint:
    """Best zero-error attack when Bob expects the rate of a delta_db line."""
    target = raw_rate_exact(params.at_delta(delta_db))
    objective, policy = optimal_attack_at_rate(params, protocol, target)
    eve_info = objective / target if target > 0 else 0.0
    eve_info = min(1.0, max(0.0, eve_info))
    return CurvePoint(
        delta_db=delta_db,
        eve_info=eve_info,
        policy=policy,
        feasible=True,
        dominant_action=_dominant_action(policy, params, protocol),
    )


def sweep_curve(
    params: ChannelParams, protocol: ProtocolKind, deltas_db
) -> list[CurvePoint]:
    """Evaluate the optimal attack over a grid of attenuations."""
    return [optimize_policy(params, protocol, float(d)) for d in deltas_db]


def _bisect_delta(rate: float, params: ChannelParams, hi_db: float = 200.0) -> float:
    """Attenuation at which the expected raw rate equals the given rate."""
    if rate <= 0.0:
        return math.inf
    lo, hi = 0.0, hi_db
    if raw_rate_exact(params.at_delta(lo)) < rate:
        raise ValueError("target rate exceeds the zero-attenuation raw rate")
    while hi - lo > BISECT_TOL_DB:
        mid = 0.5 * (lo + hi)
        if raw_rate_exact(params.at_delta(mid)) >= rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_attenuation_bb84(params: ChannelParams) -> CriticalAttenuationReport:
    """Attenuation beyond which the storage attack matches Bob's rate.

    Exact form: the expected raw rate equals the rate of blocking
    single-photon pulses and keeping one photon of every multi-photon
    pulse.  The approximate form eta_delta * mu = p_2(mu) is reported
    alongside.
    """
    storage_rate = bob_rate_under_policy(pure_storage_policy(params.n_max), params)
    delta_c = _bisect_delta(storage_rate, params)
    approx = -10.0 * math.log10(poisson_pmf(params.mu, 2) / params.mu)
    return CriticalAttenuationReport(
        delta_c_db=delta_c,
        length_km=delta_c / params.alpha_db_per_km,
        method="bb84-storage",
        delta_c_db_approx=approx,
    )


def critical_attenuation_sarg(params: ChannelParams) -> CriticalAttenuationReport:
    """Attenuation beyond which the IRUD attack matches Bob's rate.

    Closed form of eta_delta * mu = p_ok * p_3(mu) with the conclusive
    probability of the three-photon USD measurement.
    """
    p_ok = irud_success(3, ProtocolKind.SARG)
    delta_c = -10.0 * math.log10(p_ok * poisson_pmf(params.mu, 3) / params.mu)
    return CriticalAttenuationReport(
        delta_c_db=delta_c,
        length_km=delta_c / params.alpha_db_per_km,
        method="sarg-irud",
    )


def critical_attenuation_generic(
    mu_bb84: float, chi: float, p_ok: float, params: ChannelParams
) -> CriticalAttenuationReport:
    """Rough critical attenuation for a pair protocol of overlap chi.

    The source intensity is boosted to mu/(1-chi) to compensate the
    filter losses, and full information requires blocking everything
    below three photons plus a conclusive discrimination, so the rate
    match reads raw_rate(delta_c) = eta_det * p_ok * p_3(mu/(1-chi))
    with both sides at the boosted intensity.
    """
    if not 0.0 <= chi < 1.0:
        raise ValueError(f"overlap chi must be in [0, 1), got {chi}")
    if not 0.0 < p_ok <= 1.0:
        raise ValueError(f"success probability must be in (0, 1], got {p_ok}")
    mu_eff = mu_bb84 / (1.0 - chi)
    boosted = ChannelParams(
        mu=mu_eff,
        eta_det=params.eta_det,
        chi=chi,
        alpha_db_per_km=params.alpha_db_per_km,
        n_max=params.n_max,
    )
    rate = params.eta_det * p_ok * poisson_pmf(mu_eff, 3)
    delta_c = _bisect_delta(rate, boosted)
    return CriticalAttenuationReport(
        delta_c_db=delta_c,
        length_km=delta_c / params.alpha_db_per_km,
        method="generic-estimate",
    )


def delta_1(params: ChannelParams) -> float:
    """Attenuation at which Eve can always keep one photon (exact rate match)."""
    storage_rate = bob_rate_under_policy(pure_storage_policy(params.n_max), params)
    return _bisect_delta(storage_rate, params)


def delta_1_approx(params: ChannelParams) -> float:
    """Two-photon-dominated approximation eta_delta * mu = p_2(mu)."""
    return -10.0 * math.log10(poisson_pmf(params.mu, 2) / params.mu)
