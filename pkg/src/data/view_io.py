# view_io.py
import logging
import re
from pathlib import Path
from typing import List, Tuple

import numpy as np

from optimizer.exceptions import ParseError

logger = logging.getLogger(__name__)

_DELIMITERS = re.compile(r"[,\s]+")


def _read_rows(path: Path) -> List[Tuple[int, List[str]]]:
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read file: {e}", path=str(path))

    rows = []
    width = None
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = [tok for tok in _DELIMITERS.split(stripped) if tok]
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise ParseError(f"expected {width} values, found {len(tokens)}", path=str(path),
                             line_number=line_number)
        rows.append((line_number, tokens))
    if not rows:
        raise ParseError("file holds no data rows", path=str(path))
    return rows


def load_view(path) -> np.ndarray:
    """Read one view as an n x d_t matrix; row i is sample i"""
    path = Path(path)
    rows = _read_rows(path)
    matrix = np.empty((len(rows), len(rows[0][1])))
    for i, (line_number, tokens) in enumerate(rows):
        try:
            matrix[i] = [float(tok) for tok in tokens]
        except ValueError:
            bad = next(tok for tok in tokens if not _is_number(tok))
            raise ParseError(f"non-numeric token '{bad}'", path=str(path), line_number=line_number)
    if not np.all(np.isfinite(matrix)):
        raise ParseError("view holds NaN or Inf values", path=str(path))
    logger.debug(f"Loaded view {path} with shape {matrix.shape}")
    return matrix


def load_labels(path) -> np.ndarray:
    """One integer class id per line"""
    path = Path(path)
    rows = _read_rows(path)
    labels = []
    for line_number, tokens in rows:
        if len(tokens) != 1:
            raise ParseError("expected one label per line", path=str(path), line_number=line_number)
        try:
            labels.append(int(tokens[0]))
        except ValueError:
            raise ParseError(f"non-integer label '{tokens[0]}'", path=str(path), line_number=line_number)
    return np.asarray(labels, dtype=int)


def export_view(matrix, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.asarray(matrix, dtype=float), fmt="%.17g", delimiter=" ")
    return path


def export_labels(labels, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.asarray(labels, dtype=int), fmt="%d")
    return path


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False
