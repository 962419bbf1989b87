"""CSV loading that keeps the raw field strings.

Plot routines parse floats as needed, but --dump-points must echo the input
bytes untouched, so the table holds every cell exactly as it appeared.
"""

import csv

import numpy as np


class SchemaError(Exception):
    """Input file does not match the expected column schema."""


class Table:
    def __init__(self, path: str, columns: list, rows: list):
        self.path = path
        self.columns = columns
        self.rows = rows  # list of raw string lists, one per data row
        self._index = {name: k for k, name in enumerate(columns)}

    def __len__(self) -> int:
        return len(self.rows)

    def has(self, *names: str) -> bool:
        return all(n in self._index for n in names)

    def require(self, *names: str):
        for name in names:
            if name not in self._index:
                raise SchemaError(f"missing column '{name}' in {self.path}")

    def raw(self, name: str) -> list:
        k = self._index[name]
        return [row[k] for row in self.rows]

    def floats(self, name: str) -> np.ndarray:
        return np.array([float(v) for v in self.raw(name)], dtype=np.float64)

    def ints(self, name: str) -> np.ndarray:
        return np.array([int(v) for v in self.raw(name)], dtype=np.int64)


def load_table(path: str) -> Table:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path} is empty (no header row)") from None
            rows = [row for row in reader if row]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc
    width = len(header)
    for k, row in enumerate(rows):
        if len(row) != width:
            raise SchemaError(f"{path} row {k + 1} has {len(row)} fields, "
                              f"header has {width}")
    return Table(path, header, rows)
