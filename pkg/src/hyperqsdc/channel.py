"""Lossy, noisy quantum channel for the traveling photon.

Only photon A ever travels, so loss and noise act on its side of the pair
alone.  Each transit applies, in this fixed order: a loss draw, the
adversary's interception hook, then independent per-DOF Pauli noise
(probability p split evenly over X, Y and Z).  A lost photon ends the
pair's life; the parties discard the position by classical announcement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import adversary as adv
from .hyperstate import Dof, HyperState, apply_pauli_a


@dataclass(frozen=True)
class ChannelParams:
    """loss_prob in [0, 1); pauli probabilities per DOF in [0, 1]."""

    loss_prob: float = 0.0
    pauli_p_pol: float = 0.0
    pauli_p_spa: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.loss_prob < 1.0:
            raise ValueError(f"loss_prob must be in [0, 1), got {self.loss_prob}")
        for name in ("pauli_p_pol", "pauli_p_spa"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class TransmitResult:
    """Outcome of one transit; state/meta are None exactly when not delivered."""

    delivered: bool
    state: HyperState | None = None
    meta: adv.SignalMeta | None = None
    eve_record: adv.EveRecord | None = None
    trojan_inserted: bool = False


_LOST = TransmitResult(delivered=False)

_PAULIS = ("X", "Y", "Z")


def transmit(
    state: HyperState,
    meta: adv.SignalMeta,
    params: ChannelParams,
    eve: adv.EveStrategy,
    rng: np.random.Generator,
    filter_tolerance: float = adv.DEFAULT_FILTER_TOLERANCE,
) -> TransmitResult:
    """Send photon A through the channel once.

    ``filter_tolerance`` is what Eve believes the receiver's filter window
    to be; it only matters for the invisible-wavelength Trojan.
    """
    if params.loss_prob > 0.0 and rng.random() < params.loss_prob:
        return _LOST
    record = None
    trojan = False
    if eve.kind is adv.EveKind.INTERCEPT_RESEND:
        state, record = adv.intercept_resend(state, eve, rng)
    elif eve.kind in adv.TROJAN_KINDS:
        meta = adv.craft_trojan(eve.kind, rng, filter_tolerance)
        trojan = True
    for dof, p in ((Dof.POL, params.pauli_p_pol), (Dof.SPA, params.pauli_p_spa)):
        if p > 0.0 and rng.random() < p:
            state = apply_pauli_a(state, dof, _PAULIS[rng.integers(3)])
    return TransmitResult(True, state, meta, record, trojan)
