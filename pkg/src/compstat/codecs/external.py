"""Adapter for user-supplied compressor commands.

The template is split with :func:`shlex.split`.  If any argument contains
``{input}`` the data is written to a temporary file whose path is substituted;
otherwise it is piped to standard input.  The compressed size is the number
of bytes on standard output, times 8.
"""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile

import numpy as np

from compstat.codecs.sequence import Sequence
from compstat.errors import BackendError, DomainError


def to_bytes(seq: Sequence) -> bytes:
    """Raw bytes for a sequence.

    Byte-valued alphabets map to their values, single characters to UTF-8,
    anything else to symbol indices (1 byte if |A| <= 256, else 2 big-endian).
    """
    syms = seq.alphabet.symbols
    if all(isinstance(s, int) and 0 <= s < 256 for s in syms):
        return np.asarray(syms, dtype=np.uint8)[seq.data].tobytes()
    if all(isinstance(s, str) and len(s) == 1 for s in syms):
        return "".join(syms[i] for i in seq.data).encode("utf-8")
    if len(syms) <= 256:
        return seq.data.astype(np.uint8).tobytes()
    return seq.data.astype(">u2").tobytes()


def run_command(template: str, payload: bytes, timeout: float | None = 300) -> int:
    """Run the compressor on ``payload``; return output size in bytes."""
    args = shlex.split(template)
    if not args:
        raise DomainError("empty external command template")
    tmp_path = None
    try:
        if any("{input}" in a for a in args):
            fd, tmp_path = tempfile.mkstemp(prefix="compstat-")
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            args = [a.replace("{input}", tmp_path) for a in args]
            stdin = None
        else:
            stdin = payload
        try:
            proc = subprocess.run(args, input=stdin, capture_output=True, timeout=timeout, check=False)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise BackendError(f"external compressor {args[0]!r} could not run: {exc}") from exc
        if proc.returncode != 0:
            stderr = proc.stderr.decode("utf-8", "replace")
            raise BackendError(
                f"external compressor {args[0]!r} exited with status {proc.returncode}: {stderr.strip()}",
                returncode=proc.returncode,
                stderr=stderr,
            )
        return len(proc.stdout)
    finally:
        if tmp_path is not None:
            os.unlink(tmp_path)


def code_bits(template: str, seq: Sequence) -> float:
    return 8.0 * run_command(template, to_bytes(seq))
