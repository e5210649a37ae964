"""
Test-vector specifications.

Grammar (one line):
    fock <m>              number state e_m
    coherent <re>,<im>    truncated coherent state |alpha>
    geometric <q>         c_n = sqrt(1 - q^2) q^n, 0 < q < 1 (slow-tail test vector)
    file <path>           one coefficient per line as "re im"
"""

import math
import re
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..core.errors import RejectedInputError, StudyConfigError
from ..core.fock import FockVector, coherent_coefficients

_SPEC_PATTERN = re.compile(r"^\s*(fock|coherent|geometric|file)\s+(\S.*?)\s*$")


def _split(text: str) -> Tuple[str, str]:
    match = _SPEC_PATTERN.match(text or "")
    if not match:
        raise StudyConfigError(
            f"Vector spec must be 'fock <m>', 'coherent <re>,<im>', 'geometric <q>' "
            f"or 'file <path>', got {text!r}")
    return match.group(1), match.group(2)


def _parse_mode(arg: str) -> int:
    try:
        m = int(arg)
    except ValueError:
        raise StudyConfigError(f"fock needs an integer mode, got {arg!r}") from None
    if m < 0:
        raise StudyConfigError(f"fock mode must be nonnegative, got {m}")
    return m


def _parse_amplitude(arg: str) -> complex:
    parts = arg.split(",")
    if len(parts) != 2:
        raise StudyConfigError(f"coherent needs '<re>,<im>', got {arg!r}")
    try:
        re_part, im_part = float(parts[0]), float(parts[1])
    except ValueError:
        raise StudyConfigError(f"coherent amplitude must be numeric, got {arg!r}") from None
    if not (math.isfinite(re_part) and math.isfinite(im_part)):
        raise StudyConfigError(f"coherent amplitude must be finite, got {arg!r}")
    return complex(re_part, im_part)


def _parse_ratio(arg: str) -> float:
    try:
        q = float(arg)
    except ValueError:
        raise StudyConfigError(f"geometric needs a numeric ratio, got {arg!r}") from None
    if not 0.0 < q < 1.0:
        raise StudyConfigError(f"geometric ratio must satisfy 0 < q < 1, got {q}")
    return q


def validate_vector_spec(text: str) -> None:
    """Grammar and parameter-range check without building the vector."""
    kind, arg = _split(text)
    if kind == "fock":
        _parse_mode(arg)
    elif kind == "coherent":
        _parse_amplitude(arg)
    elif kind == "geometric":
        _parse_ratio(arg)


def _read_coefficients(path: Path) -> np.ndarray:
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise StudyConfigError(f"Cannot read vector file {path}: {e}") from e
    coeffs = []
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 2:
            raise StudyConfigError(f"{path}:{number}: expected 're im', got {line!r}")
        try:
            coeffs.append(complex(float(fields[0]), float(fields[1])))
        except ValueError:
            raise StudyConfigError(f"{path}:{number}: non-numeric coefficient {line!r}") from None
    return np.array(coeffs, dtype=complex)


def parse_vector_spec(text: str, dim: int, base_dir: Optional[str] = None) -> FockVector:
    """Build the dimension-dim Fock vector a spec describes."""
    if int(dim) != dim or dim < 1:
        raise StudyConfigError(f"dim must be a positive integer, got {dim}")
    kind, arg = _split(text)
    try:
        if kind == "fock":
            m = _parse_mode(arg)
            if m >= dim:
                raise StudyConfigError(f"fock {m} does not fit in dim {dim}")
            return FockVector.basis(m, dim)
        if kind == "coherent":
            return coherent_coefficients(_parse_amplitude(arg), dim)
        if kind == "geometric":
            q = _parse_ratio(arg)
            n = np.arange(dim)
            return FockVector(math.sqrt(1.0 - q * q) * q ** n)

        path = Path(arg)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        coeffs = _read_coefficients(path)
        if coeffs.size > dim:
            raise StudyConfigError(f"Vector file {path} has {coeffs.size} coefficients, dim is {dim}")
        vector = FockVector(np.concatenate((coeffs, np.zeros(dim - coeffs.size, dtype=complex))))
    except RejectedInputError as e:
        raise StudyConfigError(f"Invalid vector spec {text!r}: {e}") from e
    if vector.norm_sq() == 0.0:
        raise StudyConfigError(f"Vector file {path} describes the zero vector")
    return vector


def vector_label(text: str) -> str:
    """Report label; the geometric vector is marked as an added test case."""
    kind, arg = _split(text)
    label = f"{kind} {arg}"
    if kind == "geometric":
        label += " (slow-tail test vector)"
    return label
