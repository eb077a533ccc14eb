"""
Reading complex matrix files and building their JSON documents.

Two formats:
    cmplx-json v1   {"rows": n, "cols": m, "data": [[re, im], ...]}, row-major
    plain text      first line "n m", then n·m lines "re im", row-major;
                    blank lines and lines starting with '#' are skipped

The format is picked by content: a leading '{' means JSON.
"""

import json
import math
import re
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from models import ComplexMatrix, InputError


class MatrixParser:
    """
    Parser for complex matrix files.
    """

    # "re im" with optional sign, decimals and exponent; '.' separator only
    NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?(?:inf|nan)"
    ENTRY_LINE = re.compile(rf"^\s*({NUMBER})\s+({NUMBER})\s*$", re.IGNORECASE)
    HEADER_LINE = re.compile(r"^\s*(\d+)\s+(\d+)\s*$")

    def read(self, path: Union[str, Path]) -> ComplexMatrix:
        """
        Read a matrix file in either format.

        Raises:
            InputError: If the file is unreadable or malformed
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise InputError(f"Cannot read {path}: {e}")
        return self.parse(text)

    def parse(self, text: str) -> ComplexMatrix:
        """Parse file contents, sniffing the format."""
        if text.lstrip().startswith("{"):
            return self.parse_json(text)
        return self.parse_text(text)

    def parse_json(self, text: str) -> ComplexMatrix:
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"Invalid JSON: {e}")
        return self.from_document(document)

    def from_document(self, document: Any) -> ComplexMatrix:
        """Matrix from a decoded cmplx-json v1 object."""
        if not isinstance(document, dict):
            raise InputError("cmplx-json must be an object")

        for key in ("rows", "cols", "data"):
            if key not in document:
                raise InputError(f"cmplx-json is missing '{key}'")

        rows, cols = document["rows"], document["cols"]
        if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
            raise InputError(f"Invalid shape {rows!r}x{cols!r}")

        data = document["data"]
        if not isinstance(data, list) or len(data) != rows * cols:
            raise InputError(
                f"Expected {rows * cols} entries, got "
                f"{len(data) if isinstance(data, list) else type(data).__name__}"
            )

        values = []
        for k, entry in enumerate(data):
            if not (isinstance(entry, list) and len(entry) == 2):
                raise InputError(f"Entry {k} must be [re, im]")
            try:
                re_part, im_part = float(entry[0]), float(entry[1])
            except (TypeError, ValueError):
                raise InputError(f"Entry {k} is not numeric")
            values.append(complex(re_part, im_part))

        return self._finish(values, rows, cols)

    def parse_text(self, text: str) -> ComplexMatrix:
        lines = [line for line in text.splitlines()
                 if line.strip() and not line.lstrip().startswith("#")]
        if not lines:
            raise InputError("Empty matrix file")

        header = self.HEADER_LINE.match(lines[0])
        if not header:
            raise InputError(f"First line must be 'rows cols', got {lines[0]!r}")
        rows, cols = int(header.group(1)), int(header.group(2))
        if rows < 1 or cols < 1:
            raise InputError(f"Invalid shape {rows}x{cols}")

        body = lines[1:]
        if len(body) != rows * cols:
            raise InputError(f"Expected {rows * cols} entry lines, got {len(body)}")

        values = []
        for k, line in enumerate(body):
            match = self.ENTRY_LINE.match(line)
            if not match:
                raise InputError(f"Entry {k + 1} must be 're im', got {line!r}")
            values.append(complex(float(match.group(1)), float(match.group(2))))

        return self._finish(values, rows, cols)

    @staticmethod
    def _finish(values: List[complex], rows: int, cols: int) -> ComplexMatrix:
        if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in values):
            raise InputError("Entries must be finite")
        return np.array(values, dtype=complex).reshape(rows, cols)

    # ------------------------------------------------------------------
    # Writing
    # ------------------------------------------------------------------

    @staticmethod
    def to_document(A: ComplexMatrix) -> Dict[str, Any]:
        """cmplx-json v1 object for a matrix."""
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        rows, cols = A.shape
        return {
            "rows": rows,
            "cols": cols,
            "data": [[float(z.real), float(z.imag)] for z in A.ravel()],
        }
