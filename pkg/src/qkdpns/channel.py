"""Source, fiber and detector models for weak-laser-pulse key distribution.

A phase-averaged weak laser pulse of mean photon number mu is a Poisson
mixture of Fock states, p_n = e^{-mu} mu^n / n!.  The fiber attenuates by
delta = alpha * length dB, i.e. a per-photon transmittance of
10^{-delta/10}, and the detector is a threshold detector of quantum
efficiency eta_det that fires if at least one photon survives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

POISSON_TAIL_TOL = 1e-12

DEFAULT_ALPHA_DB_PER_KM = 0.25
DEFAULT_N_MAX = 20


def poisson_pmf(mu: float, n: int) -> float:
    """Probability of n photons in a pulse of mean photon number mu."""
    if n < 0:
        raise ValueError("photon count must be nonnegative")
    if mu < 0:
        raise ValueError("mean photon number must be nonnegative")
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    # log-space evaluation stays finite for large n
    return math.exp(-mu + n * math.log(mu) - math.lgamma(n + 1))


def transmittance(delta_db: float) -> float:
    """Per-photon fiber transmittance 10^{-delta/10} for delta_db >= 0."""
    if delta_db < 0:
        raise ValueError("attenuation must be nonnegative")
    return 10.0 ** (-delta_db / 10.0)


def delta_from_length(length_km: float, alpha_db_per_km: float = DEFAULT_ALPHA_DB_PER_KM) -> float:
    """Line attenuation in dB for a fiber of the given length."""
    if length_km < 0 or alpha_db_per_km < 0:
        raise ValueError("length and loss coefficient must be nonnegative")
    return alpha_db_per_km * length_km


def length_from_delta(delta_db: float, alpha_db_per_km: float = DEFAULT_ALPHA_DB_PER_KM) -> float:
    """Fiber length in km corresponding to the given attenuation."""
    if delta_db < 0 or alpha_db_per_km <= 0:
        raise ValueError("attenuation must be nonnegative and loss coefficient positive")
    return delta_db / alpha_db_per_km


@dataclass(frozen=True)
class ChannelParams:
    """Full experiment configuration of source, fiber and detector.

    mu: mean photon number per pulse.
    eta_det: detector quantum efficiency in (0, 1].
    delta_db: line attenuation in dB.
    chi: overlap of the non-orthogonal encoding pairs, in [0, 1).
    alpha_db_per_km: fiber loss coefficient, used for km conversions.
    n_max: Poisson truncation order; the tail beyond it must be < 1e-12.
    """

    mu: float
    eta_det: float = 0.1
    delta_db: float = 0.0
    chi: float = 1.0 / math.sqrt(2.0)
    alpha_db_per_km: float = DEFAULT_ALPHA_DB_PER_KM
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError("mean photon number must be positive")
        if not 0 < self.eta_det <= 1:
            raise ValueError("detector efficiency must be in (0, 1]")
        if self.delta_db < 0:
            raise ValueError("attenuation must be nonnegative")
        if not 0 <= self.chi < 1:
            raise ValueError("overlap chi must be in [0, 1)")
        if self.alpha_db_per_km <= 0:
            raise ValueError("loss coefficient must be positive")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        tail = 1.0 - sum(poisson_pmf(self.mu, n) for n in range(self.n_max + 1))
        if tail > POISSON_TAIL_TOL:
            raise ValueError(
                f"Poisson tail beyond n_max={self.n_max} is {tail:.2e} (> {POISSON_TAIL_TOL})"
            )

    @property
    def eta_delta(self) -> float:
        return transmittance(self.delta_db)

    @property
    def length_km(self) -> float:
        return length_from_delta(self.delta_db, self.alpha_db_per_km)

    def at_delta(self, delta_db: float) -> "ChannelParams":
        return replace(self, delta_db=delta_db)

    def pmf_vector(self) -> np.ndarray:
        """Poisson probabilities for n = 0..n_max."""
        return np.array([poisson_pmf(self.mu, n) for n in range(self.n_max + 1)])


def raw_rate_exact(params: ChannelParams) -> float:
    """Probability per pulse that the detector fires, summed to n_max.

    Each photon independently survives fiber and detector with
    probability eta_det * eta_delta; the pulse is detected if any
    photon survives.
    """
    q = params.eta_det * params.eta_delta
    return float(
        sum(
            poisson_pmf(params.mu, n) * (1.0 - (1.0 - q) ** n)
            for n in range(1, params.n_max + 1)
        )
    )


def raw_rate_approx(params: ChannelParams) -> float:
    """First-order detection rate eta_det * eta_delta * mu."""
    return params.eta_det * params.eta_delta * params.mu


def sample_photon_number(mu: float, rng: np.random.Generator, n_max: int = DEFAULT_N_MAX) -> int:
    """Draw a photon number by Poisson inverse-CDF sampling, truncated at n_max."""
    u = rng.random()
    return int(photon_numbers_from_uniform(np.array([u]), mu, n_max)[0])


def photon_numbers_from_uniform(u: np.ndarray, mu: float, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """Vectorized Poisson inverse CDF: maps uniforms in [0,1) to photon counts."""
    cdf = np.cumsum([poisson_pmf(mu, n) for n in range(n_max + 1)])
    return np.searchsorted(cdf, u, side="right").clip(max=n_max)


def detection_probability(n_photons: int | np.ndarray, eta: float) -> float | np.ndarray:
    """Probability that a threshold detector fires on n identical photons."""
    return 1.0 - (1.0 - eta) ** np.asarray(n_photons, dtype=float)


def sample_detection(n_photons: int, eta: float, rng: np.random.Generator) -> bool:
    """Draw whether a pulse of n photons triggers the detector."""
    if n_photons == 0:
        return False
    return bool(rng.random() < detection_probability(n_photons, eta))
