"""Reading and writing tensor files and completion reports.

File format (UTF-8 text):

    # optional comment lines
    dims n1 n2 n3 [symmetric]
    i j k value
    ...

Indices are 1-based in files and 0-based in memory. An order-4 file has a
`dims n1 n2 n3 n4` header and `i j k l value` lines.
"""

import json
import logging
import math
from pathlib import Path
from typing import TYPE_CHECKING, Iterator, Union

from r1tc.errors import TensorFormatError
from r1tc.tensors.models import CompletionResult, HigherTensor, PartialTensor, values_agree
from r1tc.tensors.tensor_model import symmetric_closure
from r1tc.utils.file_utils import read_text_safe

if TYPE_CHECKING:
    from r1tc.methods.higher_order import Order4Result

logger = logging.getLogger(__name__)

SYMMETRIC_TOKEN = "symmetric"


def parse_tensor(text: str, symmetric: bool = False) -> PartialTensor:
    """Parse a cubic tensor file.

    Args:
        text: File contents
        symmetric: Force the symmetric flag even without the header token

    Returns:
        PartialTensor (permutation-closed when symmetric, with the file's
        indices kept as `listed`)

    Raises:
        TensorFormatError: malformed content
    """
    lines = _content_lines(text)
    dims, is_symmetric = _parse_header(lines, order=3)
    entries = _parse_entries(lines, dims)
    listed = frozenset(entries)

    if is_symmetric or symmetric:
        if len(set(dims)) != 1:
            raise TensorFormatError(f"symmetric tensor needs equal dims, got {_fmt(dims)}")
        try:
            entries = symmetric_closure(entries)
        except ValueError as e:
            raise TensorFormatError(str(e)) from e

    return PartialTensor(dims, entries, symmetric=is_symmetric or symmetric, listed=listed)


def parse_higher_tensor(text: str, ordering: str = "col_major") -> HigherTensor:
    """Parse an order-4 tensor file."""
    lines = _content_lines(text)
    dims, is_symmetric = _parse_header(lines, order=4)
    if is_symmetric:
        raise TensorFormatError("symmetric order-4 tensors are not supported")
    return HigherTensor(dims, _parse_entries(lines, dims), ordering=ordering)


def serialize_tensor(tensor: PartialTensor) -> str:
    """Serialize a cubic tensor; parse_tensor(serialize_tensor(T)) == T.

    Symmetric tensors write their listed indices only; parsing closes them again.
    """
    header = "dims " + " ".join(str(n) for n in tensor.dims)
    if tensor.symmetric:
        header += f" {SYMMETRIC_TOKEN}"
    return _serialize(header, tensor.listed_omega, tensor.entries)


def serialize_higher_tensor(tensor: HigherTensor) -> str:
    header = "dims " + " ".join(str(n) for n in tensor.dims)
    return _serialize(header, tensor.omega, tensor.entries)


def load_tensor_file(
    path: Path, symmetric: bool = False, ordering: str = "col_major"
) -> Union[PartialTensor, HigherTensor]:
    """Load a tensor file, choosing cubic or order-4 from the header.

    Args:
        path: Tensor file
        symmetric: Force the symmetric flag (cubic files only)
        ordering: Flattening convention for order-4 files

    Returns:
        PartialTensor or HigherTensor
    """
    text = read_text_safe(path)
    lines = _content_lines(text)
    order = _header_order(lines)
    logger.debug(f"Loading order-{order} tensor from {path}")
    if order == 4:
        if symmetric:
            raise TensorFormatError("--symmetric applies to cubic tensors only")
        return parse_higher_tensor(text, ordering=ordering)
    return parse_tensor(text, symmetric=symmetric)


def result_to_json(result: Union[CompletionResult, "Order4Result"]) -> str:
    """Render a completion result (cubic or order-4) as a JSON document."""
    return json.dumps(result.to_dict(), indent=2)


# ─── Internals ──────────────────────────────────────────────────────


def _content_lines(text: str) -> list[tuple[int, list[str]]]:
    """Non-blank, non-comment lines as (line number, tokens)."""
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        lines.append((number, stripped.split()))
    return lines


def _header_order(lines: list[tuple[int, list[str]]]) -> int:
    if not lines or lines[0][1][0] != "dims":
        number = lines[0][0] if lines else None
        raise TensorFormatError("expected header 'dims n1 n2 n3 [symmetric]'", number)
    tokens = [t for t in lines[0][1][1:] if t != SYMMETRIC_TOKEN]
    return len(tokens)


def _parse_header(lines: list[tuple[int, list[str]]], order: int) -> tuple[tuple[int, ...], bool]:
    found = _header_order(lines)
    number, tokens = lines[0]
    if found != order:
        raise TensorFormatError(f"expected {order} dimensions, got {found}", number)

    is_symmetric = tokens[-1] == SYMMETRIC_TOKEN
    if SYMMETRIC_TOKEN in tokens[1:-1]:
        raise TensorFormatError(f"'{SYMMETRIC_TOKEN}' must be the last header token", number)

    dims = []
    for token in tokens[1 : 1 + order]:
        try:
            n = int(token)
        except ValueError:
            raise TensorFormatError(f"invalid dimension '{token}'", number) from None
        if n < 1:
            raise TensorFormatError(f"dimension must be positive, got {n}", number)
        dims.append(n)
    return tuple(dims), is_symmetric


def _parse_entries(lines: list[tuple[int, list[str]]], dims: tuple[int, ...]) -> dict:
    order = len(dims)
    entries: dict[tuple[int, ...], float] = {}
    for number, tokens in lines[1:]:
        if len(tokens) != order + 1:
            raise TensorFormatError(f"expected {order} indices and a value, got {len(tokens)} fields", number)
        try:
            index = tuple(int(t) - 1 for t in tokens[:order])
            value = float(tokens[order])
        except ValueError:
            raise TensorFormatError(f"malformed entry '{' '.join(tokens)}'", number) from None
        if not math.isfinite(value):
            raise TensorFormatError(f"non-finite value '{tokens[order]}'", number)
        if any(not 0 <= x < n for x, n in zip(index, dims)):
            raise TensorFormatError(f"index {_fmt(x + 1 for x in index)} out of range for dims {_fmt(dims)}", number)
        if index in entries and not values_agree(entries[index], value):
            raise TensorFormatError(
                f"duplicate index {_fmt(x + 1 for x in index)} with conflicting values "
                f"{entries[index]} and {value}",
                number,
            )
        entries[index] = value
    return entries


def _serialize(header: str, omega: list, entries: dict) -> str:
    return "\n".join([header, *_entry_lines(omega, entries)]) + "\n"


def _entry_lines(omega: list, entries: dict) -> Iterator[str]:
    for index in omega:
        yield " ".join(str(x + 1) for x in index) + f" {entries[index]!r}"


def _fmt(values) -> str:
    return "(" + ", ".join(str(v) for v in values) + ")"
