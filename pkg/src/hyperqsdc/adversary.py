"""Eavesdropper models and the receiver-side countermeasures.

Two attack families are modeled.  Intercept-resend touches the quantum
state: Eve measures chosen DOFs of the traveling photon and forwards a
fresh photon prepared in her outcome state.  Trojan-horse attacks leave
the state alone and instead perturb the classical metadata of the optical
signal (extra probe photons, an off-band wavelength, a delayed copy);
they are countered by a wavelength filter and a photon-number splitter
at the receiving party, not by the correlation checks.

Strategies are stateless: every random decision comes from the generator
handed in, so records and reproducibility belong to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .hyperstate import Basis, Dof, EncodingOp, HyperState, Photon, measure_photon_dof


class EveKind(Enum):
    """Adversary families; NONE disables the interception hook."""

    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    TROJAN_MULTIPHOTON = "trojan_multiphoton"
    TROJAN_INVISIBLE = "trojan_invisible"
    TROJAN_DELAY = "trojan_delay"


TROJAN_KINDS = frozenset(
    {EveKind.TROJAN_MULTIPHOTON, EveKind.TROJAN_INVISIBLE, EveKind.TROJAN_DELAY}
)


class BasisPolicy(Enum):
    """How intercept-resend picks its measurement basis per DOF."""

    UNIFORM_ZX = "uniform"
    FIXED_Z = "fixed_z"
    FIXED_X = "fixed_x"


class PnsKind(Enum):
    """Photon-number splitter models."""

    IDEAL = "ideal"
    BEAMSPLITTER_5050 = "beamsplitter5050"


class DefenseVerdict(Enum):
    CLEAN = "clean"
    FILTERED_OUT = "filtered_out"
    PNS_ALARM = "pns_alarm"


# Tolerance shared by the default filter and by Eve when she tunes her
# invisible probe to sit just outside it.
DEFAULT_FILTER_TOLERANCE = 0.05


@dataclass(frozen=True)
class EveStrategy:
    """Attack configuration: family, attacked DOFs and basis policy."""

    kind: EveKind = EveKind.NONE
    dof_mask: frozenset = frozenset({Dof.POL, Dof.SPA})
    basis_policy: BasisPolicy = BasisPolicy.UNIFORM_ZX

    def __post_init__(self) -> None:
        mask = frozenset(self.dof_mask)
        object.__setattr__(self, "dof_mask", mask)
        if not mask <= {Dof.POL, Dof.SPA}:
            raise ValueError(f"unknown DOF in mask: {mask}")
        if self.kind is EveKind.INTERCEPT_RESEND and not mask:
            raise ValueError("intercept-resend needs a nonempty dof_mask")


@dataclass(frozen=True)
class SignalMeta:
    """Classical metadata of one optical signal as seen by detectors."""

    photon_count: int = 1
    wavelength_offset: float = 0.0
    delayed: bool = False

    def __post_init__(self) -> None:
        if self.photon_count < 1:
            raise ValueError(f"photon_count must be >= 1, got {self.photon_count}")

    @staticmethod
    def legitimate() -> "SignalMeta":
        """Meta of an unmolested signal: one on-band, on-time photon."""
        return SignalMeta(1, 0.0, False)


@dataclass(frozen=True)
class DefenseConfig:
    """Receiver-side countermeasures applied before the encoder."""

    filter_enabled: bool = False
    filter_tolerance: float = DEFAULT_FILTER_TOLERANCE
    pns_enabled: bool = False
    pns_kind: PnsKind = PnsKind.IDEAL

    def __post_init__(self) -> None:
        if not self.filter_tolerance > 0.0:
            raise ValueError(f"filter_tolerance must be > 0, got {self.filter_tolerance}")


@dataclass(frozen=True)
class EveRecord:
    """What Eve wrote down about one intercepted photon (None = DOF untouched)."""

    pol_basis: Basis | None = None
    pol_outcome: int | None = None
    spa_basis: Basis | None = None
    spa_outcome: int | None = None


def _pick_basis(policy: BasisPolicy, rng: np.random.Generator) -> Basis:
    if policy is BasisPolicy.FIXED_Z:
        return Basis.Z
    if policy is BasisPolicy.FIXED_X:
        return Basis.X
    return Basis.X if rng.random() < 0.5 else Basis.Z


def intercept_resend(
    state: HyperState, strategy: EveStrategy, rng: np.random.Generator
) -> tuple[HyperState, EveRecord]:
    """Measure the masked DOFs of the in-flight photon A and resend the outcome.

    The projective collapse already leaves photon A in exactly the state Eve
    forwards, so the returned pair state doubles as the resent signal.
    """
    if strategy.kind is not EveKind.INTERCEPT_RESEND:
        raise ValueError(f"strategy kind is {strategy.kind}, not intercept-resend")
    fields: dict = {}
    # fixed DOF order keeps the generator stream reproducible
    for dof, b_key, o_key in ((Dof.POL, "pol_basis", "pol_outcome"),
                              (Dof.SPA, "spa_basis", "spa_outcome")):
        if dof not in strategy.dof_mask:
            continue
        basis = _pick_basis(strategy.basis_policy, rng)
        bit, state = measure_photon_dof(state, Photon.A, dof, basis, rng)
        fields[b_key] = basis
        fields[o_key] = bit
    return state, EveRecord(**fields)


def craft_trojan(
    kind: EveKind,
    rng: np.random.Generator,
    filter_tolerance: float = DEFAULT_FILTER_TOLERANCE,
) -> SignalMeta:
    """Signal metadata after Eve attaches her probe to a legitimate photon."""
    if kind is EveKind.TROJAN_MULTIPHOTON:
        return SignalMeta(photon_count=2, wavelength_offset=0.0, delayed=False)
    if kind is EveKind.TROJAN_INVISIBLE:
        # drawn strictly outside the filter window Eve assumes the receiver has
        magnitude = filter_tolerance * (1.0 + rng.random())
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return SignalMeta(photon_count=2, wavelength_offset=sign * magnitude, delayed=False)
    if kind is EveKind.TROJAN_DELAY:
        return SignalMeta(photon_count=2, wavelength_offset=0.0, delayed=True)
    raise ValueError(f"not a Trojan kind: {kind}")


def apply_defenses(
    meta: SignalMeta, config: DefenseConfig, rng: np.random.Generator
) -> DefenseVerdict:
    """Filter first, then photon-number check; CLEAN means nothing tripped.

    The ideal splitter flags every multi-photon signal.  The 50/50 model
    flags one only when its n photons do not all exit the same port, which
    happens with probability 1 - 2**(1-n).
    """
    if config.filter_enabled and abs(meta.wavelength_offset) > config.filter_tolerance:
        return DefenseVerdict.FILTERED_OUT
    if config.pns_enabled and meta.photon_count >= 2:
        if config.pns_kind is PnsKind.IDEAL:
            return DefenseVerdict.PNS_ALARM
        if rng.random() < 1.0 - 2.0 ** (1 - meta.photon_count):
            return DefenseVerdict.PNS_ALARM
    return DefenseVerdict.CLEAN


def guess_encoding_op(
    forward: EveRecord | None,
    back: EveRecord | None,
    rng: np.random.Generator,
) -> EncodingOp:
    """Eve's best guess of the op applied between her two interceptions.

    Matching bases across the passes expose one bit of the per-DOF op: the
    outcome XOR equals the flip bit when she measured Z twice and the phase
    bit when she measured X twice.  Unknown bits are guessed uniformly.
    """
    indices = []
    for b_attr, o_attr in (("pol_basis", "pol_outcome"), ("spa_basis", "spa_outcome")):
        flip = phase = None
        if forward is not None and back is not None:
            b1, b2 = getattr(forward, b_attr), getattr(back, b_attr)
            if b1 is not None and b1 == b2:
                xor = getattr(forward, o_attr) ^ getattr(back, o_attr)
                if b1 is Basis.Z:
                    flip = xor
                else:
                    phase = xor
        if flip is None:
            flip = int(rng.random() < 0.5)
        if phase is None:
            phase = int(rng.random() < 0.5)
        indices.append({(0, 0): 1, (0, 1): 2, (1, 0): 3, (1, 1): 4}[(flip, phase)])
    return EncodingOp(indices[0], indices[1])
