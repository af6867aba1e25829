"""Cosets of Gamma(m) in SL(2, Z) as matrices mod m, and subsets of them.

A coset subset M selects the Farey fractions a/q whose matrix
[[q1, a1], [-q, -a]] (a1/q1 the successor in F(Q)) reduces into M.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable

import numpy as np

from .farey import FareyPairState

# codes ((e11*m + e12)*m + e21)*m + e22 must fit in int64
MAX_MODULUS = 50_000


class SubsetError(ValueError):
    """Invalid coset subset or residue-pair set."""


class ClosureError(SubsetError):
    """Subset not closed under left multiplication by [[1, -1], [0, 1]]."""


def prime_factors(m: int) -> list[int]:
    out, p = [], 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out.append(m)
    return out


def index_gamma(m: int) -> int:
    """[SL(2,Z) : Gamma(m)] = m^3 prod_{p | m} (1 - 1/p^2)."""
    if m < 1:
        raise ValueError("modulus must be positive")
    num, den = m**3, 1
    for p in prime_factors(m):
        num *= p * p - 1
        den *= p * p
    return num // den


@dataclass(frozen=True, order=True)
class ModMatrix:
    m: int
    e11: int
    e12: int
    e21: int
    e22: int

    def __post_init__(self):
        m = self.m
        if m < 1:
            raise SubsetError("modulus must be positive")
        for name in ("e11", "e12", "e21", "e22"):
            object.__setattr__(self, name, getattr(self, name) % m)
        if (self.e11 * self.e22 - self.e12 * self.e21 - 1) % m:
            raise SubsetError(f"determinant of {self.rows} is not 1 mod {m}")

    @classmethod
    def identity(cls, m: int) -> "ModMatrix":
        return cls(m, 1, 0, 0, 1)

    @property
    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return (self.e11, self.e12), (self.e21, self.e22)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return self.e11, self.e12, self.e21, self.e22

    @property
    def code(self) -> int:
        m = self.m
        return ((self.e11 * m + self.e12) * m + self.e21) * m + self.e22

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        return mat_mul(self, other)


def mat_mul(X: ModMatrix, Y: ModMatrix) -> ModMatrix:
    if X.m != Y.m:
        raise SubsetError(f"modulus mismatch: {X.m} vs {Y.m}")
    return ModMatrix(
        X.m,
        X.e11 * Y.e11 + X.e12 * Y.e21,
        X.e11 * Y.e12 + X.e12 * Y.e22,
        X.e21 * Y.e11 + X.e22 * Y.e21,
        X.e21 * Y.e12 + X.e22 * Y.e22,
    )


def u_inverse(m: int) -> ModMatrix:
    return ModMatrix(m, 1, -1, 0, 1)


def w_matrix(s: FareyPairState, m: int) -> ModMatrix:
    """[[q1, a1], [-q, -a]] mod m for the pair a/q < a1/q1."""
    return ModMatrix(m, s.q1, s.a1, -s.q, -s.a)


def _top_rows(m: int, c: int, d: int) -> list[tuple[int, int]]:
    """All (x, y) mod m with x*d - y*c = 1 mod m."""
    x, y = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    ok = (x * d - y * c) % m == 1 % m
    return list(zip(x[ok].tolist(), y[ok].tolist()))


def sl2_mod(m: int) -> list[ModMatrix]:
    """Every element of SL(2, Z/m), by exhaustion."""
    out = []
    for c, d in product(range(m), repeat=2):
        if math.gcd(math.gcd(c, d), m) == 1:
            out.extend(ModMatrix(m, x, y, c, d) for x, y in _top_rows(m, c, d))
    return out


@dataclass(frozen=True)
class ResiduePairSet:
    m: int
    pairs: frozenset

    def __init__(self, m: int, pairs: Iterable[tuple[int, int]]):
        if m < 1:
            raise SubsetError("modulus must be positive")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "pairs", frozenset((n1 % m, n2 % m) for n1, n2 in pairs))

    def primitive(self) -> list[tuple[int, int]]:
        m = self.m
        return sorted(p for p in self.pairs if math.gcd(math.gcd(*p), m) == 1)

    def validate(self) -> None:
        if not self.primitive():
            raise SubsetError(f"no pair in A has gcd(n1, n2, {self.m}) = 1")


@dataclass(frozen=True)
class CosetSubset:
    m: int
    mats: tuple[ModMatrix, ...]
    label: str = ""

    def __init__(self, m: int, mats: Iterable[ModMatrix], label: str = ""):
        mats = tuple(sorted(set(mats)))
        if not mats:
            raise SubsetError("coset subset is empty")
        if m > MAX_MODULUS:
            raise OverflowError(f"modulus {m} exceeds {MAX_MODULUS}")
        if any(X.m != m for X in mats):
            raise SubsetError("all matrices must share the subset modulus")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "mats", mats)
        object.__setattr__(self, "label", label)

    def __len__(self) -> int:
        return len(self.mats)

    def __contains__(self, X: ModMatrix) -> bool:
        return X.code in self._code_set

    @cached_property
    def _code_set(self) -> frozenset:
        return frozenset(X.code for X in self.mats)

    @cached_property
    def codes(self) -> np.ndarray:
        """Sorted int64 codes, the form kernels search."""
        return np.array(sorted(self._code_set), dtype=np.int64)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([X.entries for X in self.mats], dtype=np.int64).reshape(-1, 4)


def coset_count(M: CosetSubset) -> int:
    return len(M)


def check_closure(M: CosetSubset) -> bool:
    U = u_inverse(M.m)
    return all(mat_mul(U, X) in M for X in M.mats)


def from_matrices(m: int, mats: Iterable[ModMatrix], label: str = "") -> CosetSubset:
    M = CosetSubset(m, mats, label)
    if not check_closure(M):
        raise ClosureError("matrix set is not closed under left multiplication by [[1,-1],[0,1]]")
    return M


def from_residue_pairs(A: ResiduePairSet, label: str = "") -> CosetSubset:
    """Cosets with bottom row (-n2, -n1) for (n1, n2) in A.

    Non-primitive pairs match no coset and are dropped.
    """
    A.validate()
    m = A.m
    mats = []
    for n1, n2 in A.primitive():
        c, d = -n2 % m, -n1 % m
        mats.extend(ModMatrix(m, x, y, c, d) for x, y in _top_rows(m, c, d))
    return CosetSubset(m, mats, label)


def membership(s: FareyPairState, M: CosetSubset) -> bool:
    return w_matrix(s, M.m) in M


# ------------------------------------------------------------- named subsets


def den_congruent(m: int, r: int) -> CosetSubset:
    """Fractions a/q with q = r mod m."""
    return from_residue_pairs(ResiduePairSet(m, [(a, r) for a in range(m)]), f"den≡{r % m}")


def num_not_congruent(m: int, r: int = 0) -> CosetSubset:
    """Fractions a/q with a != r mod m."""
    pairs = [(n1, n2) for n1, n2 in product(range(m), repeat=2) if n1 != r % m]
    return from_residue_pairs(ResiduePairSet(m, pairs), f"num≢{r % m}")


def all_cosets(m: int) -> CosetSubset:
    return CosetSubset(m, sl2_mod(m), "all")


def is_den_one_family(M: CosetSubset) -> bool:
    return M.mats == den_congruent(M.m, 1).mats


def parse_subset(text: str, m: int | None = None) -> CosetSubset:
    """Build M from a CLI description.

    Accepted forms: ``den≡r`` (or ``den=r``), ``num≢r`` (or ``num!=r``),
    ``all``, ``m:n1,n2;n1,n2;...``, or a path to a matrix file.
    """
    text = text.strip()
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            M = read_matrix_file(fh.read())
        if m is not None and M.m != m:
            raise SubsetError(f"file modulus {M.m} differs from --m {m}")
        return M
    if ":" in text:
        head, body = text.split(":", 1)
        mm = int(head)
        if m is not None and mm != m:
            raise SubsetError(f"subset modulus {mm} differs from --m {m}")
        pairs = []
        for chunk in filter(None, (c.strip() for c in body.split(";"))):
            n1, n2 = (int(v) for v in chunk.split(","))
            pairs.append((n1, n2))
        return from_residue_pairs(ResiduePairSet(mm, pairs), text)
    if m is None:
        raise SubsetError(f"subset {text!r} needs a modulus")
    norm = text.replace(" ", "")
    if norm == "all":
        return all_cosets(m)
    for prefix in ("den≡", "den==", "den="):
        if norm.startswith(prefix):
            return den_congruent(m, int(norm[len(prefix):]))
    for prefix in ("num≢", "num!="):
        if norm.startswith(prefix):
            return num_not_congruent(m, int(norm[len(prefix):]))
    raise SubsetError(f"cannot parse subset {text!r}")


def read_matrix_file(text: str) -> CosetSubset:
    m = None
    mats = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("m="):
            m = int(line[2:])
            continue
        if m is None:
            raise SubsetError("matrix file must start with an m=<modulus> header")
        vals = [int(v) for v in line.split()]
        if len(vals) != 4:
            raise SubsetError(f"expected 4 entries per line, got {line!r}")
        mats.append(ModMatrix(m, *vals))
    if m is None:
        raise SubsetError("matrix file has no m=<modulus> header")
    return from_matrices(m, mats, "file")


def write_matrix_file(M: CosetSubset) -> str:
    lines = [f"m={M.m}"]
    lines += [" ".join(str(v) for v in X.entries) for X in M.mats]
    return "\n".join(lines) + "\n"
