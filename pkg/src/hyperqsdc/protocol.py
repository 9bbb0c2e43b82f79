"""Direct-communication session: block preparation, two checks, coding, readout.

One session moves a block of hyperentangled pairs through a fixed phase
order.  Bob keeps photon B of every pair and sends the photon A sequence
to Alice (first transit).  The parties burn a random sample of delivered
pairs on a correlation check in randomly chosen Z/X bases (first check).
If the error rate is acceptable, Alice writes her message into the
surviving pairs with the 16 local unitaries, hides a second random sample
behind random unitaries, and returns the photon A sequence (second
transit).  Bob reads every pair with the complete hyper-Bell analyzer,
compares the hidden sample against the ops Alice announces (second
check), and only then decodes the message, 4 bits per pair.

Phases move strictly forward; only the two checks may abort.  A session
is single-owner mutable state: ops mutate the ``SessionState`` they are
given and return it (or a report), and all randomness flows through the
explicit generator arguments.  Every op appends one event to the
session's transcript with a stable field order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import channel as chn
from .adversary import (
    DefenseConfig,
    DefenseVerdict,
    EveKind,
    EveRecord,
    EveStrategy,
    SignalMeta,
    apply_defenses,
)
from .hyperstate import (
    Basis,
    BellIndex,
    EncodingOp,
    HyperState,
    MeasBasis,
    Photon,
    SourceParams,
    apply_encoding,
    bell_from_op,
    chbsa,
    measure_photon,
    op_from_bell,
    source_state,
)


class Phase(Enum):
    PREPARED = "Prepared"
    SA_IN_FLIGHT_1 = "SAInFlight1"
    FIRST_CHECK = "FirstCheck"
    ENCODING = "Encoding"
    SA_IN_FLIGHT_2 = "SAInFlight2"
    DECODING = "Decoding"
    SECOND_CHECK = "SecondCheck"
    ACCEPTED = "Accepted"
    ABORTED = "Aborted"


class PairFate(Enum):
    """Where each position of the block ended up."""

    ACTIVE = "active"
    LOST_FORWARD = "lost_forward"
    CONSUMED_CHECK = "consumed_check"
    LOST_RETURN = "lost_return"


class Verdict(Enum):
    PASS = "Pass"
    FAIL = "Fail"


class ConfigError(ValueError):
    """A protocol parameter violates its documented bound."""


class PhaseError(RuntimeError):
    """An operation was called outside its phase."""


class MessageSizeError(ValueError):
    """The message does not match the block's bit capacity."""


class BlockDepleted(RuntimeError):
    """Channel loss left too few pairs to run the protocol on."""


def normative_bits_mapping() -> dict[EncodingOp, str]:
    """Default op <-> bits table: (i-1) as the high two bits, (j-1) as the low."""
    return {
        EncodingOp(i, j): f"{i - 1:02b}{j - 1:02b}" for i in (1, 2, 3, 4) for j in (1, 2, 3, 4)
    }


def _sample_count(fraction: float, base: int) -> int:
    # round half up, never below one sample
    return max(1, math.floor(fraction * base + 0.5))


@dataclass(frozen=True)
class ProtocolConfig:
    """Session parameters; validation happens at construction."""

    n_pairs: int = 64
    sample_fraction_first: float = 0.1
    sample_fraction_second: float = 0.1
    error_threshold: float = 0.05
    bits_mapping: dict = field(default_factory=normative_bits_mapping)

    def __post_init__(self) -> None:
        if not isinstance(self.n_pairs, (int, np.integer)) or self.n_pairs < 4:
            raise ConfigError(f"n_pairs must be an integer >= 4, got {self.n_pairs}")
        for name in ("sample_fraction_first", "sample_fraction_second"):
            f = getattr(self, name)
            if not 0.0 < f < 1.0:
                raise ConfigError(f"{name} must be strictly between 0 and 1, got {f}")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ConfigError(
                f"error_threshold must be in [0, 1], got {self.error_threshold}"
            )
        if len(self.bits_mapping) != 16 or len(set(self.bits_mapping.values())) != 16:
            raise ConfigError("bits_mapping must map the 16 ops to 16 distinct chunks")
        for op, bits in self.bits_mapping.items():
            if len(bits) != 4 or set(bits) - {"0", "1"}:
                raise ConfigError(f"bits_mapping chunk for {op} is not a 4-bit string: {bits!r}")
        n1 = _sample_count(self.sample_fraction_first, self.n_pairs)
        n2 = _sample_count(self.sample_fraction_second, self.n_pairs)
        if n1 + n2 > self.n_pairs - 1:
            raise ConfigError(
                f"sample fractions leave no message pairs: {n1} + {n2} samples of {self.n_pairs}"
            )


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one eavesdropping check."""

    n_checked: int
    n_pol_errors: int
    n_spa_errors: int
    n_mismatched_samples: int
    error_rate_pol: float
    error_rate_spa: float
    verdict: Verdict

    @staticmethod
    def build(n_checked: int, n_pol: int, n_spa: int, n_mism: int, threshold: float) -> "CheckReport":
        rate_pol = n_pol / n_checked
        rate_spa = n_spa / n_checked
        verdict = Verdict.FAIL if max(rate_pol, rate_spa) > threshold else Verdict.PASS
        return CheckReport(n_checked, n_pol, n_spa, n_mism, rate_pol, rate_spa, verdict)


@dataclass
class SessionState:
    """Mutable state of one session; create it with ``prepare_block``.

    Row k of ``states`` is the joint 16-amplitude state of pair k; the row
    index doubles as the position of photon A in Bob's outgoing sequence
    and of photon B in the sequence he keeps.
    """

    n_pairs: int
    phase: Phase
    states: np.ndarray
    metas: list
    fate: list
    first_sample_positions: list = field(default_factory=list)
    second_sample_positions: list = field(default_factory=list)
    second_sample_ops: dict = field(default_factory=dict)
    message_positions: list = field(default_factory=list)
    applied_ops: dict = field(default_factory=dict)
    eve_records_forward: dict = field(default_factory=dict)
    eve_records_return: dict = field(default_factory=dict)
    trojan_positions: list = field(default_factory=list)
    filtered_positions: list = field(default_factory=list)
    alarmed_positions: list = field(default_factory=list)
    transcript: list = field(default_factory=list)
    first_report: Optional[CheckReport] = None
    second_report: Optional[CheckReport] = None
    decoded_message: Optional[str] = None
    surviving_message_positions: list = field(default_factory=list)

    def positions(self, fate: PairFate) -> list[int]:
        return [k for k, f in enumerate(self.fate) if f is fate]

    def state_of(self, pos: int) -> HyperState:
        return HyperState(self.states[pos], _trusted=True)


def _require_phase(session: SessionState, expected: Phase) -> None:
    if session.phase is not expected:
        raise PhaseError(
            f"operation requires phase {expected.value}, session is in {session.phase.value}"
        )


def _log(session: SessionState, **fields) -> None:
    session.transcript.append(dict(fields))


def _draw_basis(rng: np.random.Generator) -> Basis:
    return Basis.X if rng.random() < 0.5 else Basis.Z


def _bit_str(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def prepare_block(cfg: ProtocolConfig, source: SourceParams) -> SessionState:
    """Bob's source emits n_pairs identical pair states; bookkeeping starts clean."""
    emitted = source_state(source)
    states = np.tile(emitted.amps, (cfg.n_pairs, 1))
    session = SessionState(
        n_pairs=cfg.n_pairs,
        phase=Phase.PREPARED,
        states=states,
        metas=[SignalMeta.legitimate()] * cfg.n_pairs,
        fate=[PairFate.ACTIVE] * cfg.n_pairs,
    )
    _log(
        session,
        event="prepare",
        phase=Phase.PREPARED.value,
        n_pairs=cfg.n_pairs,
        source_r=float(source.r),
        source_phi=float(source.phi),
    )
    return session


def _transit(
    session: SessionState,
    params: chn.ChannelParams,
    rng: np.random.Generator,
    eve: EveStrategy,
    defense: Optional[DefenseConfig],
    direction: str,
    in_flight: Phase,
    arrival: Phase,
    lost_fate: PairFate,
) -> None:
    session.phase = in_flight
    records = session.eve_records_forward if direction == "forward" else session.eve_records_return
    filter_tol = defense.filter_tolerance if defense is not None else None
    lost: list[int] = []
    intercepted: list[int] = []
    trojan: list[int] = []
    filtered: list[int] = []
    alarmed: list[int] = []
    for pos in session.positions(PairFate.ACTIVE):
        res = chn.transmit(
            session.state_of(pos),
            session.metas[pos],
            params,
            eve,
            rng,
            **({} if filter_tol is None else {"filter_tolerance": filter_tol}),
        )
        if not res.delivered:
            session.fate[pos] = lost_fate
            lost.append(pos)
            continue
        session.states[pos] = res.state.amps
        session.metas[pos] = res.meta
        if res.eve_record is not None:
            records[pos] = res.eve_record
            intercepted.append(pos)
        if res.trojan_inserted:
            trojan.append(pos)
        if defense is not None and (defense.filter_enabled or defense.pns_enabled):
            verdict = apply_defenses(res.meta, defense, rng)
            if verdict is not DefenseVerdict.CLEAN:
                # probe caught and stripped; the legitimate photon continues
                session.metas[pos] = SignalMeta.legitimate()
                (filtered if verdict is DefenseVerdict.FILTERED_OUT else alarmed).append(pos)
    session.trojan_positions.extend(trojan)
    session.filtered_positions.extend(filtered)
    session.alarmed_positions.extend(alarmed)
    recs = [records[p] for p in intercepted]
    _log(
        session,
        event="transit",
        phase=in_flight.value,
        to_phase=arrival.value,
        direction=direction,
        lost_positions=lost,
        intercepted_positions=intercepted,
        eve_pol_bases="".join("-" if r.pol_basis is None else r.pol_basis.value for r in recs),
        eve_pol_outcomes="".join("-" if r.pol_outcome is None else str(r.pol_outcome) for r in recs),
        eve_spa_bases="".join("-" if r.spa_basis is None else r.spa_basis.value for r in recs),
        eve_spa_outcomes="".join("-" if r.spa_outcome is None else str(r.spa_outcome) for r in recs),
        trojan_positions=trojan,
        filtered_positions=filtered,
        alarmed_positions=alarmed,
    )
    session.phase = arrival


def transmit_forward(
    session: SessionState,
    params: chn.ChannelParams,
    rng: np.random.Generator,
    eve: Optional[EveStrategy] = None,
    defense: Optional[DefenseConfig] = None,
) -> SessionState:
    """Send every active photon A from Bob to Alice; defenses act on arrival."""
    _require_phase(session, Phase.PREPARED)
    _transit(
        session,
        params,
        rng,
        eve if eve is not None else EveStrategy(),
        defense if defense is not None else DefenseConfig(),
        direction="forward",
        in_flight=Phase.SA_IN_FLIGHT_1,
        arrival=Phase.FIRST_CHECK,
        lost_fate=PairFate.LOST_FORWARD,
    )
    return session


def transmit_return(
    session: SessionState,
    params: chn.ChannelParams,
    rng: np.random.Generator,
    eve: Optional[EveStrategy] = None,
) -> SessionState:
    """Send the encoded photons back from Alice to Bob (no receiver defenses)."""
    _require_phase(session, Phase.SA_IN_FLIGHT_2)
    _transit(
        session,
        params,
        rng,
        eve if eve is not None else EveStrategy(),
        None,
        direction="return",
        in_flight=Phase.SA_IN_FLIGHT_2,
        arrival=Phase.DECODING,
        lost_fate=PairFate.LOST_RETURN,
    )
    return session


def first_check(session: SessionState, rng: np.random.Generator, cfg: ProtocolConfig) -> CheckReport:
    """Correlation check on a random sample of delivered pairs.

    Alice draws the sample and a uniform Z/X basis per DOF for each pair,
    measures her photon, announces everything, and Bob measures his photon
    in the same bases.  Checked pairs are consumed either way.
    """
    _require_phase(session, Phase.FIRST_CHECK)
    delivered = session.positions(PairFate.ACTIVE)
    if len(delivered) < 3:
        raise BlockDepleted(
            f"only {len(delivered)} pairs delivered; need 3 to check, sample and encode"
        )
    n_check = min(_sample_count(cfg.sample_fraction_first, len(delivered)), len(delivered) - 2)
    positions = sorted(int(p) for p in rng.choice(delivered, size=n_check, replace=False))
    pol_bases: list[Basis] = []
    spa_bases: list[Basis] = []
    alice_pol: list[int] = []
    alice_spa: list[int] = []
    bob_pol: list[int] = []
    bob_spa: list[int] = []
    n_pol = n_spa = n_mism = 0
    for pos in positions:
        basis = MeasBasis(_draw_basis(rng), _draw_basis(rng))
        state = session.state_of(pos)
        (a_pol, a_spa), state = measure_photon(state, Photon.A, basis, rng)
        (b_pol, b_spa), state = measure_photon(state, Photon.B, basis, rng)
        session.states[pos] = state.amps
        session.fate[pos] = PairFate.CONSUMED_CHECK
        pol_bases.append(basis.pol)
        spa_bases.append(basis.spa)
        alice_pol.append(a_pol)
        alice_spa.append(a_spa)
        bob_pol.append(b_pol)
        bob_spa.append(b_spa)
        pol_err = a_pol != b_pol
        spa_err = a_spa != b_spa
        n_pol += pol_err
        n_spa += spa_err
        n_mism += pol_err or spa_err
    report = CheckReport.build(n_check, n_pol, n_spa, n_mism, cfg.error_threshold)
    session.first_sample_positions = positions
    session.first_report = report
    next_phase = Phase.ENCODING if report.verdict is Verdict.PASS else Phase.ABORTED
    _log(
        session,
        event="first_check",
        phase=Phase.FIRST_CHECK.value,
        to_phase=next_phase.value,
        positions=positions,
        pol_bases="".join(b.value for b in pol_bases),
        spa_bases="".join(b.value for b in spa_bases),
        alice_pol=_bit_str(alice_pol),
        alice_spa=_bit_str(alice_spa),
        bob_pol=_bit_str(bob_pol),
        bob_spa=_bit_str(bob_spa),
        n_checked=report.n_checked,
        n_pol_errors=report.n_pol_errors,
        n_spa_errors=report.n_spa_errors,
        n_mismatched_samples=report.n_mismatched_samples,
        error_rate_pol=report.error_rate_pol,
        error_rate_spa=report.error_rate_spa,
        verdict=report.verdict.value,
    )
    session.phase = next_phase
    if next_phase is Phase.ABORTED:
        _log(session, event="result", phase=Phase.ABORTED.value, message=None)
    return report


def message_capacity(session: SessionState, cfg: ProtocolConfig) -> int:
    """Bits the block can carry once the second-check sample is set aside."""
    _require_phase(session, Phase.ENCODING)
    eligible = session.positions(PairFate.ACTIVE)
    base = len(eligible) + len(session.first_sample_positions)
    n_second = min(_sample_count(cfg.sample_fraction_second, base), len(eligible) - 1)
    return 4 * (len(eligible) - n_second)


def encode_message(
    session: SessionState, message: str, rng: np.random.Generator, cfg: ProtocolConfig
) -> SessionState:
    """Alice writes the message and hides the second-check sample.

    Message pairs get the op named by the next 4-bit chunk of the message;
    sample pairs get an op drawn uniformly from all 16, recorded for the
    comparison after readout.
    """
    _require_phase(session, Phase.ENCODING)
    if set(message) - {"0", "1"}:
        raise ValueError("message must be a string of 0s and 1s")
    eligible = session.positions(PairFate.ACTIVE)
    if len(eligible) < 2:
        raise BlockDepleted(f"only {len(eligible)} pairs left; need 2 to sample and encode")
    base = len(eligible) + len(session.first_sample_positions)
    n_second = min(_sample_count(cfg.sample_fraction_second, base), len(eligible) - 1)
    expected = 4 * (len(eligible) - n_second)
    if len(message) != expected:
        raise MessageSizeError(
            f"message length must be exactly {expected} bits for this block, got {len(message)}"
        )
    second = sorted(int(p) for p in rng.choice(eligible, size=n_second, replace=False))
    second_set = set(second)
    msg_positions = [p for p in eligible if p not in second_set]
    inverse = {bits: op for op, bits in cfg.bits_mapping.items()}
    for k, pos in enumerate(msg_positions):
        op = inverse[message[4 * k : 4 * k + 4]]
        session.states[pos] = apply_encoding(session.state_of(pos), op).amps
        session.applied_ops[pos] = op
    for pos in second:
        op = EncodingOp(int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        session.states[pos] = apply_encoding(session.state_of(pos), op).amps
        session.second_sample_ops[pos] = op
        session.applied_ops[pos] = op
    session.second_sample_positions = second
    session.message_positions = msg_positions
    _log(
        session,
        event="encode",
        phase=Phase.ENCODING.value,
        to_phase=Phase.SA_IN_FLIGHT_2.value,
        message_positions=msg_positions,
        message_ops=[f"{session.applied_ops[p].i}{session.applied_ops[p].j}" for p in msg_positions],
        sample_positions=second,
        sample_ops=[f"{session.second_sample_ops[p].i}{session.second_sample_ops[p].j}" for p in second],
    )
    session.phase = Phase.SA_IN_FLIGHT_2
    return session


def decode_and_second_check(
    session: SessionState, rng: np.random.Generator, cfg: ProtocolConfig
) -> tuple[Optional[str], CheckReport]:
    """Bob reads every returned pair, verifies the hidden sample, then decodes.

    Readout is a complete hyper-Bell analysis per pair.  Alice announces
    the sample positions and ops; a Bell label differing from the recorded
    op's image counts one error per disagreeing DOF.  Only a passing block
    releases the message; a failing one is withheld entirely.
    """
    _require_phase(session, Phase.DECODING)
    surviving = session.positions(PairFate.ACTIVE)
    measured: dict[int, BellIndex] = {}
    for pos in surviving:
        measured[pos] = chbsa(session.state_of(pos), rng)
    session.phase = Phase.SECOND_CHECK
    sample_positions = [p for p in session.second_sample_positions if p in measured]
    if not sample_positions:
        raise BlockDepleted("no second-check samples survived the return transit")
    n_pol = n_spa = n_mism = 0
    for pos in sample_positions:
        expected = bell_from_op(session.second_sample_ops[pos])
        got = measured[pos]
        pol_err = got.p != expected.p
        spa_err = got.s != expected.s
        n_pol += pol_err
        n_spa += spa_err
        n_mism += pol_err or spa_err
    report = CheckReport.build(len(sample_positions), n_pol, n_spa, n_mism, cfg.error_threshold)
    session.second_report = report
    message: Optional[str] = None
    if report.verdict is Verdict.PASS:
        kept = [p for p in session.message_positions if p in measured]
        message = "".join(cfg.bits_mapping[op_from_bell(measured[p])] for p in kept)
        session.decoded_message = message
        session.surviving_message_positions = kept
        next_phase = Phase.ACCEPTED
    else:
        next_phase = Phase.ABORTED
    _log(
        session,
        event="second_check",
        phase=Phase.SECOND_CHECK.value,
        to_phase=next_phase.value,
        positions=surviving,
        bell_pol=_bit_str(int(measured[p].p) for p in surviving),
        bell_spa=_bit_str(int(measured[p].s) for p in surviving),
        sample_positions=sample_positions,
        expected_ops=[
            f"{session.second_sample_ops[p].i}{session.second_sample_ops[p].j}"
            for p in sample_positions
        ],
        n_checked=report.n_checked,
        n_pol_errors=report.n_pol_errors,
        n_spa_errors=report.n_spa_errors,
        n_mismatched_samples=report.n_mismatched_samples,
        error_rate_pol=report.error_rate_pol,
        error_rate_spa=report.error_rate_spa,
        verdict=report.verdict.value,
    )
    session.phase = next_phase
    _log(session, event="result", phase=next_phase.value, message=message)
    return message, report
