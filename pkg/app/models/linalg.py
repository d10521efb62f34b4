"""
Линейная алгебра малых размерностей над Fraction и float.
Матрицы и векторы хранятся кортежами, чтобы значения оставались неизменяемыми и хешируемыми.
"""
from typing import Sequence, Tuple

from app.models.numeric import Scalar

Vector = Tuple[Scalar, ...]
Matrix = Tuple[Tuple[Scalar, ...], ...]


def identity_matrix(d: int, one=1, zero=0) -> Matrix:
    return tuple(tuple(one if i == j else zero for j in range(d)) for i in range(d))


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(m: Matrix, v: Sequence[Scalar]) -> Vector:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in m)


def vec_add(a: Sequence[Scalar], b: Sequence[Scalar]) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: Sequence[Scalar], b: Sequence[Scalar]) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(s: Scalar, v: Sequence[Scalar]) -> Vector:
    return tuple(s * x for x in v)


def dot(a: Sequence[Scalar], b: Sequence[Scalar]) -> Scalar:
    return sum(x * y for x, y in zip(a, b))


def norm2(v: Sequence[Scalar]) -> Scalar:
    return dot(v, v)


def block_diag(a: Matrix, b: Matrix, zero=0) -> Matrix:
    n, m = len(a), len(b)
    top = tuple(tuple(row) + (zero,) * m for row in a)
    bottom = tuple((zero,) * n + tuple(row) for row in b)
    return top + bottom


def sub_matrix(m: Matrix, rows: Sequence[int], cols: Sequence[int]) -> Matrix:
    return tuple(tuple(m[r][c] for c in cols) for r in rows)
