"""Prime-field arithmetic and dense linear algebra over F_q.

Elements are canonical integers ``0..q-1``.  Matrices are stored as
immutable tuples of row tuples so they can be hashed, shared between
threads and used as dictionary keys during ensemble enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class FieldError(ValueError):
    """Raised for invalid field parameters or elements."""


class DimensionError(ValueError):
    """Raised when matrix/vector shapes do not chain."""


class MatrixFormatError(ValueError):
    """Raised when a matrix text file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    k = 3
    while k * k <= q:
        if q % k == 0:
            return False
        k += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The prime field F_q."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise FieldError(f"field size must be an integer, got {self.q!r}")
        if not is_prime(int(self.q)):
            raise FieldError(
                f"q={self.q} is not prime; only prime fields F_q are supported "
                "(extension fields GF(p^k), k>1, are not implemented)"
            )
        object.__setattr__(self, "q", int(self.q))

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise FieldError(f"element {a} not in F_{self.q}")
        return int(a)

    def add(self, a: int, b: int) -> int:
        return (self.check(a) + self.check(b)) % self.q

    def sub(self, a: int, b: int) -> int:
        return (self.check(a) - self.check(b)) % self.q

    def neg(self, a: int) -> int:
        return (-self.check(a)) % self.q

    def mul(self, a: int, b: int) -> int:
        return (self.check(a) * self.check(b)) % self.q

    def inv(self, a: int) -> int:
        if self.check(a) == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.q}")
        return pow(a, self.q - 2, self.q)

    @property
    def elements(self) -> range:
        return range(self.q)

    @property
    def nonzero(self) -> range:
        return range(1, self.q)


def _as_spec(q: int | FieldSpec) -> FieldSpec:
    return q if isinstance(q, FieldSpec) else FieldSpec(q)


@dataclass(frozen=True)
class FieldMatrix:
    """An ``rows x cols`` matrix over F_q with entries in ``[0, q)``."""

    spec: FieldSpec
    entries: tuple[tuple[int, ...], ...]
    cols: int

    def __init__(self, q: int | FieldSpec, entries: Iterable[Sequence[int]], cols: int | None = None):
        spec = _as_spec(q)
        rows = tuple(tuple(int(e) for e in row) for row in entries)
        if cols is None:
            if not rows:
                raise DimensionError("cannot infer column count of an empty matrix")
            cols = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != cols:
                raise DimensionError(f"row {i} has {len(row)} entries, expected {cols}")
            for e in row:
                if not 0 <= e < spec.q:
                    raise FieldError(f"entry {e} in row {i} outside [0, {spec.q})")
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "cols", int(cols))

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @classmethod
    def zeros(cls, q, rows: int, cols: int) -> "FieldMatrix":
        return cls(q, [[0] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, q, n: int) -> "FieldMatrix":
        return cls(q, [[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_array(cls, q, arr) -> "FieldMatrix":
        arr = np.asarray(arr, dtype=np.int64)
        if arr.ndim != 2:
            raise DimensionError("expected a 2-d array")
        return cls(q, arr.tolist(), arr.shape[1])

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.rows, self.cols)

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        return mat_mul(self, other)

    def column_weights(self) -> list[int]:
        return [sum(1 for row in self.entries if row[j]) for j in range(self.cols)]

    def row_weights(self) -> list[int]:
        return [sum(1 for e in row if e) for row in self.entries]


def mat_vec(A: FieldMatrix, x: Sequence[int]) -> tuple[int, ...]:
    """Return ``A @ x`` reduced mod q."""
    if len(x) != A.cols:
        raise DimensionError(f"vector length {len(x)} != matrix cols {A.cols}")
    q = A.q
    for v in x:
        if not 0 <= v < q:
            raise FieldError(f"vector entry {v} outside [0, {q})")
    return tuple(sum(a * v for a, v in zip(row, x)) % q for row in A.entries)


def mat_mul(A: FieldMatrix, B: FieldMatrix) -> FieldMatrix:
    if A.q != B.q:
        raise FieldError(f"field mismatch: F_{A.q} vs F_{B.q}")
    if A.cols != B.rows:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    q = A.q
    bcols = list(zip(*B.entries)) if B.rows else [()] * B.cols
    out = [[sum(a * b for a, b in zip(row, col)) % q for col in bcols] for row in A.entries]
    return FieldMatrix(A.spec, out, B.cols)


def row_echelon(A: FieldMatrix) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form by Gauss-Jordan elimination mod q.

    Returns the reduced rows and the list of pivot columns.
    """
    q = A.q
    R = [list(row) for row in A.entries]
    m, n = A.rows, A.cols
    pivots: list[int] = []
    r = 0
    for col in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if R[i][col]), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = pow(R[r][col], q - 2, q)
        R[r] = [(e * inv) % q for e in R[r]]
        for i in range(m):
            if i != r and R[i][col]:
                f = R[i][col]
                R[i] = [(a - f * b) % q for a, b in zip(R[i], R[r])]
        pivots.append(col)
        r += 1
    return R, pivots


def rank(A: FieldMatrix) -> int:
    return len(row_echelon(A)[1])


# -- text format ------------------------------------------------------------

def parse_matrix(text: str) -> FieldMatrix:
    """Parse the ``q m n`` header + ``m`` rows text format."""
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MatrixFormatError("empty matrix file", 1)
    hdr_no, hdr = lines[0]
    try:
        q, m, n = (int(t) for t in hdr.split())
    except ValueError:
        raise MatrixFormatError(f"header must be 'q m n', got {hdr!r}", hdr_no) from None
    try:
        spec = FieldSpec(q)
    except FieldError as exc:
        raise MatrixFormatError(str(exc), hdr_no) from None
    if m < 0 or n < 0:
        raise MatrixFormatError("negative dimensions", hdr_no)
    body = lines[1:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else (body[-1][0] if body else hdr_no)
        raise MatrixFormatError(f"expected {m} rows, found {len(body)}", where)
    rows = []
    for line_no, ln in body:
        try:
            row = [int(t) for t in ln.split()]
        except ValueError:
            raise MatrixFormatError(f"non-integer entry in {ln!r}", line_no) from None
        if len(row) != n:
            raise MatrixFormatError(f"expected {n} entries, found {len(row)}", line_no)
        bad = [e for e in row if not 0 <= e < q]
        if bad:
            raise MatrixFormatError(f"entry {bad[0]} outside [0, {q})", line_no)
        rows.append(row)
    return FieldMatrix(spec, rows, n)


def format_matrix(A: FieldMatrix) -> str:
    out = [f"{A.q} {A.rows} {A.cols}"]
    out += [" ".join(str(e) for e in row) for row in A.entries]
    return "\n".join(out) + "\n"


def batch_rank(A: np.ndarray, q: int) -> np.ndarray:
    """Ranks of a stack of matrices ``A[t]`` over F_q (vectorized elimination)."""
    R = np.array(A, dtype=np.int64) % q
    if R.ndim != 3:
        raise DimensionError("expected a (T, m, n) array")
    T, m, n = R.shape
    inv = np.array([0] + [pow(a, q - 2, q) for a in range(1, q)], dtype=np.int64)
    r = np.zeros(T, dtype=np.int64)
    rows = np.arange(m)
    tt = np.arange(T)
    for col in range(n):
        cand = (R[:, :, col] != 0) & (rows[None, :] >= r[:, None])
        has = cand.any(axis=1) & (r < m)
        if not has.any():
            continue
        t = tt[has]
        piv = cand[t].argmax(axis=1)
        rt = r[t]
        top, other = R[t, rt].copy(), R[t, piv].copy()
        R[t, rt], R[t, piv] = other, top
        R[t, rt] = (R[t, rt] * inv[R[t, rt, col]][:, None]) % q
        f = R[t, :, col].copy()
        f[np.arange(len(t)), rt] = 0
        R[t] = (R[t] - f[:, :, None] * R[t, rt][:, None, :]) % q
        r[t] += 1
    return r
