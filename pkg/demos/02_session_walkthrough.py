"""One full session, narrated from the transcript."""

import numpy as np

from hyperqsdc import (
    ChannelParams,
    ProtocolConfig,
    SourceParams,
    decode_and_second_check,
    encode_message,
    first_check,
    message_capacity,
    prepare_block,
    transmit_forward,
    transmit_return,
)

rng = np.random.default_rng(42)
cfg = ProtocolConfig(n_pairs=24, sample_fraction_first=0.2, sample_fraction_second=0.2)
channel = ChannelParams()  # quiet line, no loss

session = prepare_block(cfg, SourceParams(1.0, 0.0))
transmit_forward(session, channel, rng)
report = first_check(session, rng, cfg)
print(f"first check: {report.n_checked} pairs sampled, "
      f"pol rate {report.error_rate_pol:.2f}, spa rate {report.error_rate_spa:.2f} "
      f"-> {report.verdict.value}")

capacity = message_capacity(session, cfg)
message = "".join(str(b) for b in rng.integers(0, 2, capacity))
print(f"capacity after sampling: {capacity} bits")
encode_message(session, message, rng, cfg)
transmit_return(session, channel, rng)
decoded, second = decode_and_second_check(session, rng, cfg)
print(f"second check: {second.n_checked} hidden samples -> {second.verdict.value}")
print(f"message intact: {decoded == message}")

print("\ntranscript:")
for event in session.transcript:
    keys = [k for k in event if k not in ("event", "phase", "to_phase")]
    print(f"  {event['phase']:>12} {event['event']:<12} carries {', '.join(keys)}")
