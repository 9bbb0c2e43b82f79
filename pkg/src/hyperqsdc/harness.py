"""Run orchestration: config files, seeded session batches, sweeps, reports.

A run executes N independent sessions.  Session k draws every random
decision from ``numpy.random.default_rng([master_seed, k])``, the
documented counter-based stream split: sessions can be distributed or
reordered without changing any outcome, and a (config, seed) pair pins
the whole run byte for byte.

The config file is INI text with sections mirroring the component
configs; see ``EXAMPLE_CONFIG``.  Stats serialize as a JSON document with
a fixed key order and no timing information, so identical (config, seed)
runs produce identical bytes.  Wall time lives only on the in-memory
stats object.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .adversary import (
    BasisPolicy,
    DefenseConfig,
    EveKind,
    EveStrategy,
    PnsKind,
    guess_encoding_op,
)
from .channel import ChannelParams
from .hyperstate import (
    Basis,
    Dof,
    MeasBasis,
    SourceParams,
    correlation_error_probs,
    source_fidelity,
    source_state,
)
from .protocol import (
    BlockDepleted,
    ConfigError,
    PairFate,
    Phase,
    ProtocolConfig,
    SessionState,
    Verdict,
    decode_and_second_check,
    encode_message,
    first_check,
    message_capacity,
    prepare_block,
    transmit_forward,
    transmit_return,
)

EXAMPLE_CONFIG = """\
[run]
sessions = 100
seed = 0

[source]
r = 1.0
phi = 0.0

[protocol]
n_pairs = 112
sample_fraction_first = 0.05
sample_fraction_second = 0.05
error_threshold = 0.05

[channel]
loss_prob = 0.0
pauli_p_pol = 0.0
pauli_p_spa = 0.0

[adversary]
kind = none
dofs = pol,spa
basis_policy = uniform
passes = both

[defense]
filter_enabled = false
filter_tolerance = 0.05
pns_enabled = false
pns_kind = ideal
"""


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs except the master seed."""

    sessions: int = 100
    seed: int = 0
    source: SourceParams = field(default_factory=lambda: SourceParams(1.0, 0.0))
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    eve: EveStrategy = field(default_factory=EveStrategy)
    eve_passes: str = "both"  # both | forward | return
    defense: DefenseConfig = field(default_factory=DefenseConfig)

    def __post_init__(self) -> None:
        if not isinstance(self.sessions, int) or self.sessions < 1:
            raise ConfigError(f"sessions must be a positive integer, got {self.sessions}")
        if self.eve_passes not in ("both", "forward", "return"):
            raise ConfigError(f"passes must be both, forward or return, got {self.eve_passes}")


@dataclass
class CheckStats:
    n_checked: int = 0
    n_pol_errors: int = 0
    n_spa_errors: int = 0
    n_mismatched: int = 0

    def absorb(self, report) -> None:
        self.n_checked += report.n_checked
        self.n_pol_errors += report.n_pol_errors
        self.n_spa_errors += report.n_spa_errors
        self.n_mismatched += report.n_mismatched_samples

    def rates(self) -> dict:
        n = self.n_checked
        return {
            "n_checked": n,
            "error_rate_pol": self.n_pol_errors / n if n else None,
            "error_rate_spa": self.n_spa_errors / n if n else None,
            "detection_rate": self.n_mismatched / n if n else None,
        }


@dataclass
class RunStats:
    """Pooled outcome of one run; ``wall_time`` never reaches the stats file."""

    sessions: int = 0
    accepted: int = 0
    aborted: int = 0
    depleted: int = 0
    first_check: CheckStats = field(default_factory=CheckStats)
    second_check: CheckStats = field(default_factory=CheckStats)
    message_bits_delivered: int = 0
    message_bits_wrong: int = 0
    message_pairs_encoded: int = 0
    lost_forward: int = 0
    lost_return: int = 0
    trojan_signals: int = 0
    trojan_filtered: int = 0
    pns_alarms: int = 0
    eve_guesses: int = 0
    eve_guesses_correct: int = 0
    adversary_present: bool = False
    wall_time: float = 0.0

    @property
    def message_bit_error_rate(self) -> Optional[float]:
        if self.message_bits_delivered == 0:
            return None
        return self.message_bits_wrong / self.message_bits_delivered

    @property
    def bits_per_photon_transit(self) -> Optional[float]:
        if self.message_pairs_encoded == 0:
            return None
        return self.message_bits_delivered / (2.0 * self.message_pairs_encoded)

    @property
    def eve_bell_guess_accuracy(self) -> Optional[float]:
        if not self.adversary_present or self.eve_guesses == 0:
            return None
        return self.eve_guesses_correct / self.eve_guesses

    def to_document(self) -> dict:
        return {
            "sessions": self.sessions,
            "accepted": self.accepted,
            "aborted": self.aborted,
            "depleted": self.depleted,
            "first_check": self.first_check.rates(),
            "second_check": self.second_check.rates(),
            "message_bit_error_rate": self.message_bit_error_rate,
            "bits_per_photon_transit": self.bits_per_photon_transit,
            "eve_bell_guess_accuracy": self.eve_bell_guess_accuracy,
            "losses": {"forward": self.lost_forward, "return": self.lost_return},
            "trojan": {
                "signals": self.trojan_signals,
                "filtered": self.trojan_filtered,
                "pns_alarms": self.pns_alarms,
            },
        }


# ---------------------------------------------------------------------------
# config file handling
# ---------------------------------------------------------------------------

_SCHEMA = {
    "run": {"sessions", "seed"},
    "source": {"r", "phi"},
    "protocol": {"n_pairs", "sample_fraction_first", "sample_fraction_second", "error_threshold"},
    "channel": {"loss_prob", "pauli_p_pol", "pauli_p_spa"},
    "adversary": {"kind", "dofs", "basis_policy", "passes"},
    "defense": {"filter_enabled", "filter_tolerance", "pns_enabled", "pns_kind"},
}

_EVE_KINDS = {k.value: k for k in EveKind}
_POLICIES = {p.value: p for p in BasisPolicy}
_PNS_KINDS = {k.value: k for k in PnsKind}
_DOF_NAMES = {"pol": Dof.POL, "spa": Dof.SPA}


def _get(parser, section, key, conv, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ConfigError:
        raise
    except (ValueError, AttributeError):
        raise ConfigError(f"config field [{section}] {key}: cannot parse {raw!r}") from None


def _to_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(raw)


def _choice(table: dict, what: str):
    def conv(raw: str):
        key = raw.strip().lower()
        if key not in table:
            raise ConfigError(f"{what} must be one of {sorted(table)}, got {raw!r}")
        return table[key]

    return conv


def _parse_dofs(raw: str) -> frozenset:
    names = [part.strip().lower() for part in raw.split(",") if part.strip()]
    try:
        return frozenset(_DOF_NAMES[n] for n in names)
    except KeyError as e:
        raise ConfigError(f"unknown DOF name {e.args[0]!r}; use pol, spa") from None


def parse_run_config(text: str) -> RunConfig:
    """Build a RunConfig from INI text, rejecting unknown sections and keys."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"config is not valid INI text: {e}") from None
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config field [{section}] {key}")
    kind = _get(parser, "adversary", "kind", _choice(_EVE_KINDS, "adversary kind"), EveKind.NONE)
    dofs = _get(parser, "adversary", "dofs", _parse_dofs, frozenset({Dof.POL, Dof.SPA}))
    policy = _get(
        parser, "adversary", "basis_policy", _choice(_POLICIES, "basis_policy"), BasisPolicy.UNIFORM_ZX
    )
    passes = _get(parser, "adversary", "passes", lambda s: s.strip().lower(), "both")
    try:
        return _build_run_config(parser, kind, dofs, policy, passes)
    except ConfigError:
        raise
    except ValueError as e:
        # component validators (range checks etc.) speak in field names already
        raise ConfigError(f"invalid config value: {e}") from None


def _build_run_config(parser, kind, dofs, policy, passes) -> RunConfig:
    return RunConfig(
        sessions=_get(parser, "run", "sessions", int, 100),
        seed=_get(parser, "run", "seed", int, 0),
        source=SourceParams(
            r=_get(parser, "source", "r", float, 1.0),
            phi=_get(parser, "source", "phi", float, 0.0),
        ),
        protocol=ProtocolConfig(
            n_pairs=_get(parser, "protocol", "n_pairs", int, 112),
            sample_fraction_first=_get(parser, "protocol", "sample_fraction_first", float, 0.05),
            sample_fraction_second=_get(parser, "protocol", "sample_fraction_second", float, 0.05),
            error_threshold=_get(parser, "protocol", "error_threshold", float, 0.05),
        ),
        channel=ChannelParams(
            loss_prob=_get(parser, "channel", "loss_prob", float, 0.0),
            pauli_p_pol=_get(parser, "channel", "pauli_p_pol", float, 0.0),
            pauli_p_spa=_get(parser, "channel", "pauli_p_spa", float, 0.0),
        ),
        eve=EveStrategy(kind=kind, dof_mask=dofs, basis_policy=policy),
        eve_passes=passes,
        defense=DefenseConfig(
            filter_enabled=_get(parser, "defense", "filter_enabled", _to_bool, False),
            filter_tolerance=_get(parser, "defense", "filter_tolerance", float, 0.05),
            pns_enabled=_get(parser, "defense", "pns_enabled", _to_bool, False),
            pns_kind=_get(parser, "defense", "pns_kind", _choice(_PNS_KINDS, "pns_kind"), PnsKind.IDEAL),
        ),
    )


def load_run_config(path: str) -> RunConfig:
    """Read and parse a config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_run_config(fh.read())


def config_document(rc: RunConfig, seed: int) -> dict:
    """Normalized config echo embedded in stats files (fixed key order)."""
    return {
        "seed": seed,
        "sessions": rc.sessions,
        "source": {"r": rc.source.r, "phi": rc.source.phi},
        "protocol": {
            "n_pairs": rc.protocol.n_pairs,
            "sample_fraction_first": rc.protocol.sample_fraction_first,
            "sample_fraction_second": rc.protocol.sample_fraction_second,
            "error_threshold": rc.protocol.error_threshold,
        },
        "channel": {
            "loss_prob": rc.channel.loss_prob,
            "pauli_p_pol": rc.channel.pauli_p_pol,
            "pauli_p_spa": rc.channel.pauli_p_spa,
        },
        "adversary": {
            "kind": rc.eve.kind.value,
            "dofs": sorted(d.value for d in rc.eve.dof_mask),
            "basis_policy": rc.eve.basis_policy.value,
            "passes": rc.eve_passes,
        },
        "defense": {
            "filter_enabled": rc.defense.filter_enabled,
            "filter_tolerance": rc.defense.filter_tolerance,
            "pns_enabled": rc.defense.pns_enabled,
            "pns_kind": rc.defense.pns_kind.value,
        },
    }


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def _random_bits(n: int, rng: np.random.Generator) -> str:
    return "".join("1" if b else "0" for b in rng.integers(0, 2, size=n))


def run_one_session(rc: RunConfig, master_seed: int, index: int) -> tuple[SessionState, Optional[str]]:
    """Execute session ``index`` of a run; returns (final state, sent message)."""
    rng = np.random.default_rng([master_seed, index])
    eve_fwd = rc.eve if rc.eve_passes in ("both", "forward") else None
    eve_ret = rc.eve if rc.eve_passes in ("both", "return") else None
    session = prepare_block(rc.protocol, rc.source)
    transmit_forward(session, rc.channel, rng, eve=eve_fwd, defense=rc.defense)
    report = first_check(session, rng, rc.protocol)
    if report.verdict is Verdict.FAIL:
        return session, None
    message = _random_bits(message_capacity(session, rc.protocol), rng)
    encode_message(session, message, rng, rc.protocol)
    transmit_return(session, rc.channel, rng, eve=eve_ret)
    decode_and_second_check(session, rng, rc.protocol)
    return session, message


def _absorb_session(stats: RunStats, rc: RunConfig, session: SessionState, sent: Optional[str],
                    guess_rng: np.random.Generator) -> None:
    stats.sessions += 1
    if session.phase is Phase.ACCEPTED:
        stats.accepted += 1
    else:
        stats.aborted += 1
    if session.first_report is not None:
        stats.first_check.absorb(session.first_report)
    if session.second_report is not None:
        stats.second_check.absorb(session.second_report)
    stats.lost_forward += sum(f is PairFate.LOST_FORWARD for f in session.fate)
    stats.lost_return += sum(f is PairFate.LOST_RETURN for f in session.fate)
    stats.trojan_signals += len(session.trojan_positions)
    stats.trojan_filtered += len(session.filtered_positions)
    stats.pns_alarms += len(session.alarmed_positions)
    if session.phase is Phase.ACCEPTED and sent is not None:
        decoded = session.decoded_message
        stats.message_bits_delivered += len(decoded)
        stats.message_pairs_encoded += len(session.message_positions)
        index = {pos: k for k, pos in enumerate(session.message_positions)}
        for k, pos in enumerate(session.surviving_message_positions):
            want = sent[4 * index[pos] : 4 * index[pos] + 4]
            got = decoded[4 * k : 4 * k + 4]
            stats.message_bits_wrong += sum(a != b for a, b in zip(want, got))
    if rc.eve.kind is EveKind.INTERCEPT_RESEND and session.applied_ops:
        for pos, op in sorted(session.applied_ops.items()):
            guess = guess_encoding_op(
                session.eve_records_forward.get(pos),
                session.eve_records_return.get(pos),
                guess_rng,
            )
            stats.eve_guesses += 1
            stats.eve_guesses_correct += guess == op


def run(rc: RunConfig, master_seed: Optional[int] = None,
        collect_transcripts: bool = False) -> tuple[RunStats, Optional[list]]:
    """Run all sessions; returns (stats, transcripts or None)."""
    seed = rc.seed if master_seed is None else master_seed
    stats = RunStats(adversary_present=rc.eve.kind is not EveKind.NONE)
    transcripts = [] if collect_transcripts else None
    started = time.perf_counter()
    for k in range(rc.sessions):
        guess_rng = np.random.default_rng([seed, k, 0xE7E])
        try:
            session, sent = run_one_session(rc, seed, k)
        except BlockDepleted:
            stats.sessions += 1
            stats.aborted += 1
            stats.depleted += 1
            continue
        _absorb_session(stats, rc, session, sent, guess_rng)
        if transcripts is not None:
            for event in session.transcript:
                transcripts.append({"session": k, **event})
    stats.wall_time = time.perf_counter() - started
    return stats, transcripts


def stats_text(rc: RunConfig, seed: int, stats: RunStats) -> str:
    """The byte-stable stats document (config echo + pooled results)."""
    doc = {"config": config_document(rc, seed), "results": stats.to_document()}
    return json.dumps(doc, indent=2) + "\n"


def write_stats(path: str, rc: RunConfig, seed: int, stats: RunStats) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(stats_text(rc, seed, stats))


def write_transcripts(path: str, transcripts: list) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in transcripts:
            fh.write(json.dumps(event) + "\n")


# ---------------------------------------------------------------------------
# sweeps and scans
# ---------------------------------------------------------------------------

SWEEP_AXES = (
    "loss_prob",
    "pauli_p_pol",
    "pauli_p_spa",
    "pauli_p",
    "n_pairs",
    "sample_fraction_first",
    "sample_fraction_second",
    "error_threshold",
    "sessions",
    "strategy",
)


def _override(rc: RunConfig, axis: str, value):
    if axis == "loss_prob":
        return replace(rc, channel=replace(rc.channel, loss_prob=float(value)))
    if axis == "pauli_p_pol":
        return replace(rc, channel=replace(rc.channel, pauli_p_pol=float(value)))
    if axis == "pauli_p_spa":
        return replace(rc, channel=replace(rc.channel, pauli_p_spa=float(value)))
    if axis == "pauli_p":
        v = float(value)
        return replace(rc, channel=replace(rc.channel, pauli_p_pol=v, pauli_p_spa=v))
    if axis == "n_pairs":
        return replace(rc, protocol=replace(rc.protocol, n_pairs=int(value)))
    if axis == "sample_fraction_first":
        return replace(rc, protocol=replace(rc.protocol, sample_fraction_first=float(value)))
    if axis == "sample_fraction_second":
        return replace(rc, protocol=replace(rc.protocol, sample_fraction_second=float(value)))
    if axis == "error_threshold":
        return replace(rc, protocol=replace(rc.protocol, error_threshold=float(value)))
    if axis == "sessions":
        return replace(rc, sessions=int(value))
    if axis == "strategy":
        kind = _choice(_EVE_KINDS, "strategy")(str(value))
        return replace(rc, eve=replace(rc.eve, kind=kind))
    raise ConfigError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")


SWEEP_COLUMNS = (
    "axis",
    "value",
    "sessions",
    "accepted",
    "aborted",
    "depleted",
    "first_error_pol",
    "first_error_spa",
    "first_detection",
    "second_error_pol",
    "second_error_spa",
    "second_detection",
    "message_bit_error_rate",
    "bits_per_photon_transit",
    "eve_bell_guess_accuracy",
    "trojan_signals",
    "trojan_filtered",
    "pns_alarms",
)


def attack_sweep(rc: RunConfig, axis: str, values: list) -> list[tuple]:
    """One run per axis value (same master seed each); returns (value, stats) rows."""
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    rows = []
    for value in values:
        point = _override(rc, axis, value)
        stats, _ = run(point)
        rows.append((value, stats))
    return rows


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def sweep_csv(axis: str, rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for value, s in rows:
        first = s.first_check.rates()
        second = s.second_check.rates()
        writer.writerow(
            [
                axis,
                _cell(value),
                s.sessions,
                s.accepted,
                s.aborted,
                s.depleted,
                _cell(first["error_rate_pol"]),
                _cell(first["error_rate_spa"]),
                _cell(first["detection_rate"]),
                _cell(second["error_rate_pol"]),
                _cell(second["error_rate_spa"]),
                _cell(second["detection_rate"]),
                _cell(s.message_bit_error_rate),
                _cell(s.bits_per_photon_transit),
                _cell(s.eve_bell_guess_accuracy),
                s.trojan_signals,
                s.trojan_filtered,
                s.pns_alarms,
            ]
        )
    return buf.getvalue()


SCAN_COLUMNS = ("r", "phi", "fidelity", "err_pol_z", "err_pol_x", "err_spa_z", "err_spa_x")


def source_fidelity_scan(r_values: list, phi_values: list) -> list[tuple]:
    """Exact fidelity and noiseless first-check error rates over an (r, phi) grid."""
    if not r_values or not phi_values:
        raise ConfigError("source scan needs at least one r and one phi value")
    rows = []
    for r in r_values:
        for phi in phi_values:
            params = SourceParams(float(r), float(phi))
            state = source_state(params)
            pol_z, spa_z = correlation_error_probs(state, MeasBasis(Basis.Z, Basis.Z))
            pol_x, spa_x = correlation_error_probs(state, MeasBasis(Basis.X, Basis.X))
            rows.append(
                (float(r), float(phi), source_fidelity(params), pol_z, pol_x, spa_z, spa_x)
            )
    return rows


def scan_csv(rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()
