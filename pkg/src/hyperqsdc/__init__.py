"""Desk-scale simulator of a two-way direct-communication protocol that
carries 4 bits per round trip on polarization and spatial-mode entangled
photon pairs, with eavesdropping checks on both passes."""

from .adversary import (
    BasisPolicy,
    DefenseConfig,
    DefenseVerdict,
    EveKind,
    EveRecord,
    EveStrategy,
    PnsKind,
    SignalMeta,
    apply_defenses,
    craft_trojan,
    guess_encoding_op,
    intercept_resend,
)
from .channel import ChannelParams, TransmitResult, transmit
from .harness import (
    RunConfig,
    RunStats,
    attack_sweep,
    load_run_config,
    parse_run_config,
    run,
    run_one_session,
    scan_csv,
    source_fidelity_scan,
    stats_text,
    sweep_csv,
    write_stats,
    write_transcripts,
)
from .hyperstate import (
    BELL_BASIS,
    DIM,
    Basis,
    Bell,
    BellIndex,
    Dof,
    EncodingOp,
    HyperState,
    MeasBasis,
    Photon,
    Pol,
    SourceParams,
    SpatialMode,
    apply_encoding,
    apply_hadamard,
    apply_pauli_a,
    bell_from_op,
    chbsa,
    correlation_error_probs,
    ket_index,
    make_hyper_bell,
    measure_photon,
    measure_photon_dof,
    op_from_bell,
    source_fidelity,
    source_state,
)
from .protocol import (
    BlockDepleted,
    CheckReport,
    ConfigError,
    MessageSizeError,
    PairFate,
    Phase,
    PhaseError,
    ProtocolConfig,
    SessionState,
    Verdict,
    decode_and_second_check,
    encode_message,
    first_check,
    message_capacity,
    normative_bits_mapping,
    prepare_block,
    transmit_forward,
    transmit_return,
)

__version__ = "0.1.0"
