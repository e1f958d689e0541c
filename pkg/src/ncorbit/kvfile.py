"""Flat key-value text files: `key = value`, `#` comments, one pair per line.

Used for the constants override file, observation records, and CLI configs.
"""

from __future__ import annotations

import os

from .errors import ValidationError


def parse_kv_text(text: str, origin: str = "<string>") -> dict[str, str]:
    """Parse flat key-value text into an ordered dict of raw strings."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(
                f"{origin}:{lineno}: expected 'key = value', got {raw!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        # strip trailing inline comment
        value = value.split("#", 1)[0].strip()
        if not key:
            raise ValidationError(f"{origin}:{lineno}: empty key")
        if key in out:
            raise ValidationError(f"{origin}:{lineno}: duplicate key '{key}'")
        out[key] = value
    return out


def parse_kv_file(path: str | os.PathLike) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    return parse_kv_text(text, origin=str(path))


def as_float(pairs: dict[str, str], key: str, origin: str = "input") -> float:
    """Fetch a required numeric key, with a diagnostic naming the key."""
    if key not in pairs:
        raise ValidationError(f"{origin}: missing required key '{key}'")
    try:
        return float(pairs[key])
    except ValueError as exc:
        raise ValidationError(
            f"{origin}: key '{key}' is not a number: {pairs[key]!r}"
        ) from exc


def as_float_opt(
    pairs: dict[str, str], key: str, default: float, origin: str = "input"
) -> float:
    """Like `as_float` but with a default for a missing key."""
    if key not in pairs:
        return default
    return as_float(pairs, key, origin)


def reject_unknown(pairs: dict[str, str], allowed: set[str], origin: str) -> None:
    for key in pairs:
        if key not in allowed:
            raise ValidationError(f"{origin}: unknown key '{key}'")
