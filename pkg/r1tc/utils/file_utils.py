"""File reading and writing utilities."""

import hashlib
import logging
from pathlib import Path

logger = logging.getLogger(__name__)

# File name patterns accepted by the experiment report writer
REPORT_SUFFIXES = {".md", ".markdown"}


def ensure_dir(path: Path) -> Path:
    """Ensure directory exists, create if necessary.

    Args:
        path: Directory path

    Returns:
        The path (for chaining)
    """
    path.mkdir(parents=True, exist_ok=True)
    return path


def read_text_safe(path: Path, encoding: str = "utf-8") -> str:
    """Read a tensor file, tolerating a byte-order mark and stray bytes.

    Args:
        path: File path
        encoding: Primary encoding to try

    Returns:
        File contents as string
    """
    try:
        return path.read_text(encoding=encoding).lstrip("\ufeff")
    except UnicodeDecodeError:
        logger.warning(f"Failed to read {path} with {encoding}, retrying with errors='ignore'")
        return path.read_text(encoding="utf-8", errors="ignore").lstrip("\ufeff")


def write_text(path: Path, text: str) -> Path:
    """Write text, creating parent directories."""
    ensure_dir(path.parent)
    path.write_text(text, encoding="utf-8")
    logger.debug(f"Wrote {path} ({len(text)} chars)")
    return path


def content_digest(text: str) -> str:
    """SHA256 of a text payload; used to name dumped SDP problems."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
