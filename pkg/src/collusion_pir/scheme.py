"""Finite decomposable PIR schemes and their exact evaluation.

Messages are L-tuples over Z_x. Each server answer is a tuple of elements of
a finite abelian group Y; position i of the answer is the group sum over
messages k of a component function applied to W_k. Components are either
linear forms (when Y = Z_x) or explicit lookup tables over X^L.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, Mapping, Sequence, Union

from .errors import (
    BadParams,
    IncommensurableAlphabets,
    NotDecomposable,
    TooLarge,
    UnknownQuery,
    ZeroDownload,
)

NULL = "NULL"
STATE_CAP = 2 ** 24

Element = tuple[int, ...]
Message = tuple[int, ...]


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Z_{q_1} x ... x Z_{q_r} with componentwise addition."""

    factors: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(int(q) for q in self.factors))
        if not self.factors or any(q < 2 for q in self.factors):
            raise BadParams("group factors must be moduli >= 2")

    @property
    def order(self) -> int:
        out = 1
        for q in self.factors:
            out *= q
        return out

    @property
    def identity(self) -> Element:
        return (0,) * len(self.factors)

    def add(self, a: Element, b: Element) -> Element:
        return tuple((x + y) % q for x, y, q in zip(a, b, self.factors))

    def neg(self, a: Element) -> Element:
        return tuple((-x) % q for x, q in zip(a, self.factors))

    def elements(self) -> Iterator[Element]:
        return product(*(range(q) for q in self.factors))

    def contains(self, a) -> bool:
        return (
            isinstance(a, tuple)
            and len(a) == len(self.factors)
            and all(isinstance(x, int) and 0 <= x < q for x, q in zip(a, self.factors))
        )


@dataclass(frozen=True)
class LinearComponent:
    """W_k -> sum_j coeffs[j] * W_k[j] mod q, for X = Y = Z_q."""

    coeffs: tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.coeffs)


@dataclass(frozen=True)
class TableComponent:
    """Explicit map X^L -> Y; ``values[i]`` is the image of the i-th message in lexicographic order."""

    values: tuple[Element, ...]


Component = Union[LinearComponent, TableComponent]


@dataclass(frozen=True)
class AnswerMatrix:
    """K x ell table of component functions: row k acts on W_k, column i is answer position i."""

    rows: tuple[tuple[Component, ...], ...]

    @property
    def length(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def n_messages(self) -> int:
        return len(self.rows)


def zero_component(x_size: int, L: int, group: FiniteAbelianGroup) -> Component:
    if group.factors == (x_size,):
        return LinearComponent((0,) * L)
    return TableComponent((group.identity,) * (x_size ** L))


def linear_matrix(coeff_rows: Sequence[Sequence[Sequence[int]]]) -> AnswerMatrix:
    """Build an all-linear matrix from ``coeff_rows[k][i]`` = coefficient tuple."""
    return AnswerMatrix(tuple(tuple(LinearComponent(tuple(c)) for c in row) for row in coeff_rows))


def empty_matrix(K: int) -> AnswerMatrix:
    return AnswerMatrix(((),) * K)


def linear_label(matrix: AnswerMatrix) -> str:
    """Canonical query label for a linear matrix; ``NULL`` when it has no columns."""
    if matrix.length == 0:
        return NULL
    return json.dumps([[list(c.coeffs) for c in row] for row in matrix.rows], separators=(",", ":"))


@dataclass(frozen=True)
class Key:
    """One value of the client's private key: its probability and the query labels sent.

    ``queries[k][n]`` is the label sent to server n when message k is wanted.
    """

    prob: Fraction
    queries: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class PirScheme:
    n_servers: int
    K: int
    L: int
    x_size: int
    group: FiniteAbelianGroup
    keys: tuple[Key, ...]
    matrices: Mapping[tuple[int, str], AnswerMatrix] = field(hash=False)

    def __post_init__(self):
        if self.n_servers < 1 or self.K < 1 or self.L < 1 or self.x_size < 2:
            raise BadParams("need N >= 1, K >= 1, L >= 1 and |X| >= 2")
        keys = tuple(Key(Fraction(k.prob), tuple(tuple(q) for q in k.queries)) for k in self.keys)
        object.__setattr__(self, "keys", keys)
        if not keys:
            raise BadParams("scheme needs at least one key value")
        if any(k.prob < 0 for k in keys) or sum(k.prob for k in keys) != 1:
            raise BadParams("key probabilities must be non-negative and sum to 1")
        for key in keys:
            if len(key.queries) != self.K or any(len(q) != self.n_servers for q in key.queries):
                raise BadParams("each key needs K query tuples of length N")
            for qs in key.queries:
                for n, label in enumerate(qs):
                    if (n, label) not in self.matrices:
                        raise UnknownQuery(f"server {n} has no matrix for query {label!r}")
        n_states = (self.x_size ** (self.L * self.K)) * len(keys)
        if n_states > STATE_CAP:
            raise TooLarge(f"{n_states} (message, key) states exceed the cap {STATE_CAP}")
        for (n, label), mat in self.matrices.items():
            self._check_matrix(n, label, mat)
        object.__setattr__(self, "matrices", dict(self.matrices))

    def _check_matrix(self, n: int, label: str, mat: AnswerMatrix):
        where = f"matrix ({n}, {label!r})"
        if not 0 <= n < self.n_servers:
            raise BadParams(f"{where}: server out of range")
        if not isinstance(mat, AnswerMatrix):
            raise NotDecomposable(f"{where}: answers must be given as component matrices")
        if mat.n_messages != self.K or len({len(r) for r in mat.rows}) > 1:
            raise BadParams(f"{where}: needs K rows of equal length")
        for row in mat.rows:
            for comp in row:
                if isinstance(comp, LinearComponent):
                    if self.group.factors != (self.x_size,):
                        raise BadParams(f"{where}: linear components need Y = Z_|X|")
                    if len(comp.coeffs) != self.L or any(not 0 <= c < self.x_size for c in comp.coeffs):
                        raise BadParams(f"{where}: bad coefficient tuple {comp.coeffs}")
                elif isinstance(comp, TableComponent):
                    if len(comp.values) != self.x_size ** self.L:
                        raise BadParams(f"{where}: table needs |X|^L entries")
                    if not all(self.group.contains(v) for v in comp.values):
                        raise BadParams(f"{where}: table value outside Y")
                else:
                    raise NotDecomposable(f"{where}: unknown component {comp!r}")

    @property
    def message_alphabet(self) -> list[Message]:
        return list(product(range(self.x_size), repeat=self.L))

    def message_assignments(self) -> Iterator[tuple[Message, ...]]:
        return product(self.message_alphabet, repeat=self.K)

    def matrix(self, n: int, label: str) -> AnswerMatrix:
        try:
            return self.matrices[(n, label)]
        except KeyError:
            raise UnknownQuery(f"server {n} has no query {label!r}") from None

    def length(self, n: int, label: str) -> int:
        return self.matrix(n, label).length


def _message_index(w: Message, x_size: int) -> int:
    idx = 0
    for v in w:
        idx = idx * x_size + v
    return idx


def eval_component(comp: Component, w: Message, x_size: int, group: FiniteAbelianGroup) -> Element:
    if isinstance(comp, LinearComponent):
        return (sum(c * v for c, v in zip(comp.coeffs, w)) % x_size,)
    return comp.values[_message_index(w, x_size)]


def component_is_constant(comp: Component) -> bool:
    if isinstance(comp, LinearComponent):
        return comp.is_zero()
    return len(set(comp.values)) == 1


def eval_matrix(scheme: PirScheme, mat: AnswerMatrix, w: Sequence[Message]) -> tuple[Element, ...]:
    g = scheme.group
    out = []
    for i in range(mat.length):
        acc = g.identity
        for k in range(scheme.K):
            acc = g.add(acc, eval_component(mat.rows[k][i], w[k], scheme.x_size, g))
        out.append(acc)
    return tuple(out)


def answer(scheme: PirScheme, n: int, label: str, w: Sequence[Message]) -> tuple[Element, ...]:
    """Server n's response to query ``label`` when the library is ``w``."""
    return eval_matrix(scheme, scheme.matrix(n, label), w)


@dataclass(frozen=True)
class ResidualSplit:
    """An answer matrix split into the desired-message part and the rest.

    ``signal`` keeps only row k, ``residual`` keeps every row but k; the
    answer is their position-wise group sum.
    """

    k: int
    signal: AnswerMatrix
    residual: AnswerMatrix


def split(scheme: PirScheme, n: int, label: str, k: int) -> ResidualSplit:
    if not 0 <= k < scheme.K:
        raise BadParams(f"desired index {k} not in [0, {scheme.K - 1}]")
    mat = scheme.matrix(n, label)
    zero = zero_component(scheme.x_size, scheme.L, scheme.group)
    blank = tuple(zero for _ in range(mat.length))
    signal = tuple(row if j == k else blank for j, row in enumerate(mat.rows))
    residual = tuple(blank if j == k else row for j, row in enumerate(mat.rows))
    return ResidualSplit(k, AnswerMatrix(signal), AnswerMatrix(residual))


def realizations(scheme: PirScheme, k: int) -> list[tuple[Fraction, tuple[str, ...]]]:
    """Distinct positive-probability query tuples for desired index k, in key order."""
    acc: dict[tuple[str, ...], Fraction] = {}
    for key in scheme.keys:
        if key.prob > 0:
            q = key.queries[k]
            acc[q] = acc.get(q, Fraction(0)) + key.prob
    return [(p, q) for q, p in acc.items()]


def expected_download(scheme: PirScheme, k: int) -> Fraction:
    """E[sum_n ell_n(Q_n)] in Y-symbols for desired index k."""
    return sum(
        (p * sum(scheme.length(n, label) for n, label in enumerate(q)) for p, q in realizations(scheme, k)),
        Fraction(0),
    )


def _perfect_power(v: int) -> tuple[int, int]:
    """(b, e) with v = b**e and b as small as possible."""
    for e in range(v.bit_length(), 1, -1):
        b = round(v ** (1 / e))
        for cand in (b - 1, b, b + 1):
            if cand >= 2 and cand ** e == v:
                return cand, e
    return v, 1


def log_ratio(x_size: int, y_size: int) -> Fraction:
    """log|X| / log|Y| as an exact rational; both must be powers of a common base."""
    bx, ex = _perfect_power(x_size)
    by, ey = _perfect_power(y_size)
    if bx != by:
        raise IncommensurableAlphabets(f"log {x_size} / log {y_size} is irrational")
    return Fraction(ex, ey)


def message_size_in_symbols(scheme: PirScheme) -> Fraction:
    """L log|X| / log|Y|: the message size measured in Y-symbols."""
    return scheme.L * log_ratio(scheme.x_size, scheme.group.order)


def rate(scheme: PirScheme, k: int | None = None) -> Fraction:
    """Message size over expected download.

    With ``k=None`` the largest expected download over desired indices is
    used; a private scheme has the same value for every k.
    """
    if k is None:
        download = max(expected_download(scheme, j) for j in range(scheme.K))
    else:
        download = expected_download(scheme, k)
    if download == 0:
        raise ZeroDownload("expected download is zero")
    return message_size_in_symbols(scheme) / download


# JSON ---------------------------------------------------------------------

def _component_to_json(comp: Component):
    if isinstance(comp, LinearComponent):
        return list(comp.coeffs)
    return {"table": [list(v) for v in comp.values]}


def _component_from_json(obj) -> Component:
    if isinstance(obj, list):
        return LinearComponent(tuple(int(c) for c in obj))
    if isinstance(obj, dict) and "table" in obj:
        return TableComponent(tuple(tuple(int(x) for x in v) for v in obj["table"]))
    raise NotDecomposable(f"cannot read component {obj!r}")


def scheme_to_json(scheme: PirScheme) -> dict:
    keys = []
    for key in scheme.keys:
        keys.append({
            "p": f"{key.prob.numerator}/{key.prob.denominator}",
            "queries": {f"k{k}": list(q) for k, q in enumerate(key.queries)},
        })
    matrices = {}
    for (n, label) in sorted(scheme.matrices, key=lambda t: (t[0], t[1])):
        mat = scheme.matrices[(n, label)]
        matrices[f"{n}:{label}"] = [[_component_to_json(c) for c in row] for row in mat.rows]
    return {
        "n": scheme.n_servers,
        "K": scheme.K,
        "L": scheme.L,
        "x": scheme.x_size,
        "y_factors": list(scheme.group.factors),
        "keys": keys,
        "matrices": matrices,
    }


def scheme_from_json(obj: dict | str) -> PirScheme:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        K = int(obj["K"])
        keys = []
        for entry in obj["keys"]:
            queries = tuple(tuple(entry["queries"][f"k{k}"]) for k in range(K))
            keys.append(Key(Fraction(entry["p"]), queries))
        if "matrices" not in obj:
            raise NotDecomposable("scheme JSON has no component matrices")
        matrices = {}
        for name, rows in obj["matrices"].items():
            n, label = name.split(":", 1)
            matrices[(int(n), label)] = AnswerMatrix(
                tuple(tuple(_component_from_json(c) for c in row) for row in rows)
            )
        return PirScheme(
            n_servers=int(obj["n"]),
            K=K,
            L=int(obj["L"]),
            x_size=int(obj["x"]),
            group=FiniteAbelianGroup(tuple(obj["y_factors"])),
            keys=tuple(keys),
            matrices=matrices,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, BadParams):
            raise
        raise BadParams(f"malformed scheme JSON: {exc!r}") from None
