"""Python bindings for the dnsveil DNS tunnel classification toolkit."""

from ._dnsveil import (
    DnsveilError,
    __version__,
    decode_dns,
    encode_dns,
    evaluate,
    extract,
    feature_rows,
    friedman,
    run_cli,
    shannon_entropy,
    significance,
    synth,
)

__all__ = [
    "DnsveilError",
    "__version__",
    "decode_dns",
    "encode_dns",
    "evaluate",
    "extract",
    "feature_rows",
    "friedman",
    "run_cli",
    "shannon_entropy",
    "significance",
    "synth",
]
