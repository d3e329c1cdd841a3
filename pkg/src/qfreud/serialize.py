"""Machine-readable emission: CSV and JSON tables with full-precision
decimal-string numbers and reproducible metadata headers."""

from __future__ import annotations

import json
from pathlib import Path

from mpmath import mp, mpf, mpc

from .context import QContext


def fmt(x, dps: int) -> str:
    """Decimal-string form of a number at ``dps`` significant digits.

    mpf/mpc only (plus int/str passthrough); binary floats are rejected so
    full-precision values never silently degrade on the way out.
    """
    if isinstance(x, str):
        return x
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, mpc):
        return f"{fmt(x.real, dps)}{'+' if x.imag >= 0 else '-'}{fmt(abs(x.imag), dps)}j"
    if isinstance(x, mpf):
        return mp.nstr(x, dps, strip_zeros=True)
    raise TypeError(f"refusing to serialise {type(x).__name__}; convert to mpf first")


def meta_block(ctx: QContext, command: str, version: str, extra: dict | None = None) -> dict:
    dps = mp.prec_to_dps(ctx.precision_bits)
    meta = {
        "command": command,
        "version": version,
        "q": fmt(ctx.q, dps),
        "precision_bits": ctx.precision_bits,
        "trunc_tol": fmt(ctx.trunc_tol, dps),
        "lattice_cutoff_pos": ctx.kpos,
        "lattice_cutoff_neg": ctx.kneg,
    }
    if extra:
        meta.update(extra)
    return meta


def write_csv(path, meta: dict, header, rows, dps: int):
    """UTF-8, LF line endings; '#'-prefixed meta lines, then header + data."""
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(x, dps) for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_json(path, meta: dict, rows, dps: int):
    def conv(obj):
        if isinstance(obj, (mpf, mpc)):
            return fmt(obj, dps)
        if isinstance(obj, dict):
            return {k: conv(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [conv(v) for v in obj]
        return obj

    payload = {"meta": conv(meta), "rows": conv(rows)}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n",
                          encoding="utf-8", newline="\n")


def seq_payload(seq, dps: int):
    """JSON-ready dict for a polynomial family (decimal-string coefficients)."""
    return {
        "shift_c": fmt(seq.c, dps),
        "n_max": seq.n_max,
        "precision_bits": seq.precision_bits,
        "coeffs": [[fmt(cj, dps) for cj in row] for row in seq.coeffs],
        "gamma": [fmt(g, dps) for g in seq.gamma],
        "alpha": [fmt(a, dps) for a in seq.alpha],
    }


def series_payload(series, dps: int):
    return {
        "name": series.name,
        "kind": series.kind,
        "parity": series.parity,
        "order": series.order,
        "q": fmt(series.q, dps),
        "validity": series.validity,
        "coeffs": [fmt(c, dps) for c in series.coeffs],
    }
