"""BB84 and SARG key-distribution protocols as executable state machines.

Both protocols share the same quantum layer: Alice sends one of the four
states |+x>, |-x>, |+z>, |-z>, Bob measures sigma_x or sigma_z uniformly
at random.  They differ only in the classical sifting step.  BB84
announces the preparation basis and keeps the events where Bob measured
in it.  SARG announces one of the four non-orthogonal pairs
{|omega x>, |omega' z>} containing the sent state; Bob's result is kept
only when his outcome is orthogonal to one member of the pair, which
identifies the other member.

Bit conventions: BB84 encodes 0 on the + states and 1 on the - states;
SARG encodes 0 on the x states and 1 on the z states.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, photon_numbers_from_uniform
from .quantum import StateLabel, born_probability_plus, qubit_state

WORDS_PER_PULSE = 8  # two Philox blocks, so chunk boundaries stay block-aligned
DEFAULT_CHUNK_SIZE = 1 << 16

# fixed label order used by the vectorized session
_LABELS = (StateLabel.PLUS_X, StateLabel.MINUS_X, StateLabel.PLUS_Z, StateLabel.MINUS_Z)
_AXIS_CODE = np.array([0, 0, 1, 1])  # 0 = x, 1 = z
_SIGN = np.array([+1, -1, +1, -1])


class ProtocolKind(enum.Enum):
    BB84 = "bb84"
    SARG = "sarg"


@dataclass(frozen=True)
class SetAnnouncement:
    """The announced non-orthogonal pair {|omega x>, |omega_prime z>}."""

    omega: int
    omega_prime: int

    def __post_init__(self) -> None:
        if self.omega not in (-1, +1) or self.omega_prime not in (-1, +1):
            raise ValueError("announcement signs must be +1 or -1")

    def contains(self, label: StateLabel) -> bool:
        sign = self.omega if label.axis == "x" else self.omega_prime
        return label.sign == sign


# A sift outcome is the conclusive bit (0 or 1) or None for a discarded item.
SiftOutcome = int | None


def alice_prepare(protocol: ProtocolKind, rng: np.random.Generator):
    """Draw Alice's state and announcement for one pulse.

    Returns (bit, label, announcement) where the announcement is the
    basis string "x"/"z" for BB84 and a SetAnnouncement for SARG.  The
    four states are equiprobable; the SARG partner sign is uniform over
    the two pairs containing the sent state.
    """
    label = _LABELS[int(rng.integers(4))]
    if protocol is ProtocolKind.BB84:
        return label.basis_bit, label, label.axis
    partner = +1 if rng.random() < 0.5 else -1
    if label.axis == "x":
        announcement = SetAnnouncement(omega=label.sign, omega_prime=partner)
    else:
        announcement = SetAnnouncement(omega=partner, omega_prime=label.sign)
    return label.pair_bit, label, announcement


def sift_bb84(alice_basis: str, bob_basis: str, bob_outcome: int) -> SiftOutcome:
    """Keep the item iff the bases agree; outcome +1 gives bit 0, -1 bit 1."""
    if bob_outcome not in (-1, +1):
        raise ValueError("measurement outcome must be +1 or -1")
    if alice_basis != bob_basis:
        return None
    return 0 if bob_outcome == +1 else 1


def sift_sarg(announcement: SetAnnouncement, bob_axis: str, bob_outcome: int) -> SiftOutcome:
    """Sifting rule for the announced pair {|omega x>, |omega' z>}.

    Measuring sigma_z with outcome -omega' rules out |omega' z>, so the
    state was |omega x> and the bit is 0.  Measuring sigma_x with
    outcome -omega identifies |omega' z>, bit 1.  Every other outcome is
    compatible with both pair members and is discarded.
    """
    if bob_outcome not in (-1, +1):
        raise ValueError("measurement outcome must be +1 or -1")
    if bob_axis == "z" and bob_outcome == -announcement.omega_prime:
        return 0
    if bob_axis == "x" and bob_outcome == -announcement.omega:
        return 1
    return None


def sift_ratio_analytic(protocol: ProtocolKind) -> float:
    """Fraction of detected pulses surviving sifting: 1/2 BB84, 1/4 SARG."""
    return 0.5 if protocol is ProtocolKind.BB84 else 0.25


@dataclass(frozen=True)
class SessionStats:
    pulses_sent: int
    bob_detections: int
    sifted_bits: int
    qber: float
    sift_ratio: float
    net_key_rate: float

    def __post_init__(self) -> None:
        if not self.sifted_bits <= self.bob_detections <= self.pulses_sent:
            raise ValueError("inconsistent session counters")
        if not 0.0 <= self.qber <= 1.0:
            raise ValueError("QBER out of range")


def _born_plus_table() -> np.ndarray:
    """P(outcome +1) for each (state label, measurement axis) pair."""
    table = np.empty((4, 2))
    for i, label in enumerate(_LABELS):
        state = qubit_state(label)
        table[i, 0] = born_probability_plus(state, "x")
        table[i, 1] = born_probability_plus(state, "z")
    return table


def _pulse_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniform samples for pulses [start, start+count), chunk-invariant.

    Pulse i always consumes words [8i, 8i+8) of the Philox stream keyed
    by the seed, so any partition into chunks reproduces the same
    per-pulse randomness.
    """
    bit_gen = np.random.Philox(key=seed)
    bit_gen.advance(start * (WORDS_PER_PULSE // 4))  # advance counts 4-word blocks
    return np.random.Generator(bit_gen).random((count, WORDS_PER_PULSE))


def run_session(
    params: ChannelParams,
    protocol: ProtocolKind,
    pulses: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> SessionStats:
    """Simulate a key-distribution session without an eavesdropper.

    Pulse by pulse: Poisson photon number, threshold detection with
    per-photon survival eta_det * eta_delta (all photons of a pulse carry
    the same state), Bob's uniform axis choice, Born-rule measurement,
    and the protocol's sifting rule.  Results are deterministic for a
    given seed and independent of chunk_size.
    """
    if pulses < 1:
        raise ValueError("session needs at least one pulse")
    born = _born_plus_table()
    q = params.eta_det * params.eta_delta
    detections = 0
    sifted = 0
    errors = 0
    for start in range(0, pulses, chunk_size):
        count = min(chunk_size, pulses - start)
        u = _pulse_uniforms(seed, start, count)
        n_photons = photon_numbers_from_uniform(u[:, 0], params.mu, params.n_max)
        label_idx = np.minimum((u[:, 1] * 4).astype(np.int64), 3)
        detected = u[:, 3] < 1.0 - (1.0 - q) ** n_photons
        bob_axis = (u[:, 4] >= 0.5).astype(np.int64)  # 0 = x, 1 = z
        outcome = np.where(u[:, 5] < born[label_idx, bob_axis], +1, -1)

        if protocol is ProtocolKind.BB84:
            conclusive = _AXIS_CODE[label_idx] == bob_axis
            bob_bit = (outcome == -1).astype(np.int64)
            alice_bit = (_SIGN[label_idx] == -1).astype(np.int64)
        else:
            partner = np.where(u[:, 2] < 0.5, +1, -1)
            sent_sign = _SIGN[label_idx]
            is_x = _AXIS_CODE[label_idx] == 0
            omega = np.where(is_x, sent_sign, partner)
            omega_prime = np.where(is_x, partner, sent_sign)
            keep0 = (bob_axis == 1) & (outcome == -omega_prime)
            keep1 = (bob_axis == 0) & (outcome == -omega)
            conclusive = keep0 | keep1
            bob_bit = keep1.astype(np.int64)
            alice_bit = _AXIS_CODE[label_idx]

        kept = detected & conclusive
        detections += int(np.count_nonzero(detected))
        sifted += int(np.count_nonzero(kept))
        errors += int(np.count_nonzero(kept & (bob_bit != alice_bit)))

    return SessionStats(
        pulses_sent=pulses,
        bob_detections=detections,
        sifted_bits=sifted,
        qber=errors / sifted if sifted else 0.0,
        sift_ratio=sifted / detections if detections else 0.0,
        net_key_rate=sifted / pulses,
    )
