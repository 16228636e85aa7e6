"""ISSN formatting and check-character validation.

An ISSN is eight characters printed as NNNN-NNNC: seven digits and a final
check character computed with the standard mod-11 scheme (weights 8 down
to 2; remainder 10 is written 'X').
"""

from __future__ import annotations

import re

ISSN_PATTERN = re.compile(r"^\d{4}-\d{3}[\dX]$")


def check_character(digits7: str) -> str:
    """Check character for the first seven digits (hyphen not included)."""
    if len(digits7) != 7 or not digits7.isdigit():
        raise ValueError(f"expected 7 digits, got {digits7!r}")
    total = sum(int(d) * w for d, w in zip(digits7, range(8, 1, -1)))
    rem = (11 - total % 11) % 11
    return "X" if rem == 10 else str(rem)


def is_well_formed(issn: str) -> bool:
    return bool(ISSN_PATTERN.match(issn))


def is_valid(issn: str) -> bool:
    """Well formed and the check character matches the mod-11 rule."""
    if not is_well_formed(issn):
        return False
    digits = issn.replace("-", "")
    return digits[7] == check_character(digits[:7])


def make(digits7: str) -> str:
    """Build a formatted, valid ISSN from its seven leading digits."""
    return f"{digits7[:4]}-{digits7[4:]}{check_character(digits7)}"
