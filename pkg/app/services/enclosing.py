"""
Объемлющие шары и общие точки семейств шаров.

Float: шар Велцля по центрам уточняется субградиентным спуском функции
max_k(|c − c_k| + r_k). Exact: середина самой дальней пары центров с рациональной
верхней оценкой радиуса (не обязательно минимальный шар).
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.models.ball import ProductBall, contains_point
from app.models.blocks import BlockStructure
from app.models.linalg import Vector, norm2, vec_add, vec_scale, vec_sub
from app.models.numeric import EXACT, Numeric, Scalar


@dataclass(frozen=True)
class Sphere:
    center: Vector
    radius: Scalar


# ---------- Велцль по точкам (float) ----------

def _circumsphere(points: np.ndarray) -> Tuple[np.ndarray, float]:
    """Описанная сфера 1..d+1 точек в аффинной оболочке, (центр, квадрат радиуса)."""
    base = points[0]
    if len(points) == 1:
        return base.copy(), 0.0
    u = points[1:] - base
    gram = u @ u.T
    rhs = np.sum(u ** 2, axis=1) / 2
    coeffs = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    center = base + coeffs @ u
    return center, float(np.sum((center - base) ** 2))


def welzl(points: np.ndarray, seed: int = 0) -> Tuple[np.ndarray, float]:
    """
    Наименьший объемлющий шар точек, рекурсивный алгоритм Велцля.
    Возвращает центр и квадрат радиуса.
    """
    pts = np.asarray(points, dtype=float)
    order = np.random.default_rng(seed).permutation(len(pts))
    pts = pts[order]
    dim = pts.shape[1]
    eps = 1e-12

    def inside(ball, p):
        return np.sum((p - ball[0]) ** 2) <= ball[1] + eps

    def solve(count: int, boundary: List[np.ndarray]):
        if len(boundary) == dim + 1 or count == 0:
            if not boundary:
                return pts[0].copy(), 0.0
            return _circumsphere(np.array(boundary))
        ball = solve(count - 1, boundary)
        p = pts[count - 1]
        if inside(ball, p):
            return ball
        return solve(count - 1, boundary + [p])

    return solve(len(pts), [])


def _refine_enclosing(centers: np.ndarray, radii: np.ndarray, start: np.ndarray, iterations: int) -> np.ndarray:
    """Субградиентный спуск для max_k(|c − c_k| + r_k)."""
    best = start.copy()
    best_value = np.max(np.linalg.norm(centers - best, axis=1) + radii)
    current = start.copy()
    scale = float(np.max(radii)) if len(radii) else 1.0
    for step in range(1, iterations + 1):
        distances = np.linalg.norm(centers - current, axis=1)
        k = int(np.argmax(distances + radii))
        if distances[k] == 0:
            break
        current = current + (scale / step) * (centers[k] - current) / distances[k]
        value = np.max(np.linalg.norm(centers - current, axis=1) + radii)
        if value < best_value:
            best, best_value = current.copy(), value
    return best


def _block_enclosing_float(centers: Sequence[Vector], radii: Sequence[Scalar], num: Numeric,
                           iterations: int) -> Sphere:
    c = np.array(centers, dtype=float)
    r = np.array(radii, dtype=float)
    start, _ = welzl(c)
    center = _refine_enclosing(c, r, start, iterations)
    radius = float(np.max(np.linalg.norm(c - center, axis=1) + r)) + num.tolerance
    return Sphere(tuple(float(v) for v in center), radius)


def _block_enclosing_exact(centers: Sequence[Vector], radii: Sequence[Scalar]) -> Sphere:
    if len(centers) == 1:
        return Sphere(tuple(centers[0]), radii[0])
    a, b = max(
        combinations(range(len(centers)), 2),
        key=lambda pair: (norm2(vec_sub(centers[pair[0]], centers[pair[1]])), -pair[0], -pair[1]),
    )
    middle = vec_scale(Fraction(1, 2), vec_add(centers[a], centers[b]))
    radius = max(_sqrt_exact_or_upper(norm2(vec_sub(middle, c))) + r for c, r in zip(centers, radii))
    return Sphere(middle, radius)


def _sqrt_exact_or_upper(value: Fraction) -> Fraction:
    root, _ = EXACT.sqrt(value)
    return root


def enclosing_ball(balls: Sequence[ProductBall], num: Numeric, iterations: Optional[int] = None) -> ProductBall:
    """Произведение шаров, содержащее все данные произведения шаров (поблочно)."""
    if iterations is None:
        from app import config
        iterations = config.SUBGRADIENT_ITERATIONS
    blocks: BlockStructure = balls[0].blocks
    center: List[Scalar] = [num.zero] * blocks.dimension
    radii = []
    for j, axes in enumerate(blocks.coarse):
        block_centers = [ball.block_center(j) for ball in balls]
        block_radii = [ball.radii[j] for ball in balls]
        if num.exact:
            sphere = _block_enclosing_exact(block_centers, block_radii)
        else:
            sphere = _block_enclosing_float(block_centers, block_radii, num, iterations)
        for axis, value in zip(axes, sphere.center):
            center[axis] = value
        radii.append(sphere.radius)
    return ProductBall(blocks, tuple(center), tuple(radii))


# ---------- Общая точка открытых шаров ----------

def _subgradient_point(centers: np.ndarray, radii: np.ndarray, iterations: int) -> np.ndarray:
    """Минимизация max_k(|p − c_k| − r_k) из центроида."""
    current = centers.mean(axis=0)
    best = current.copy()
    best_value = np.max(np.linalg.norm(centers - best, axis=1) - radii)
    scale = float(np.min(radii))
    for step in range(1, iterations + 1):
        distances = np.linalg.norm(centers - current, axis=1)
        k = int(np.argmax(distances - radii))
        if distances[k] == 0:
            break
        current = current + (scale / step) * (centers[k] - current) / distances[k]
        value = np.max(np.linalg.norm(centers - current, axis=1) - radii)
        if value < best_value:
            best, best_value = current.copy(), value
    return best


def _candidates(centers: Sequence[Vector], radii: Sequence[Scalar], num: Numeric, iterations: int) -> List[Vector]:
    found: List[Vector] = list(centers)
    half = num.one / 2
    for a, b in combinations(range(len(centers)), 2):
        ca, cb = centers[a], centers[b]
        found.append(vec_scale(half, vec_add(ca, cb)))
        d2 = norm2(vec_sub(cb, ca))
        if d2 != 0:
            # точка радикальной гиперплоскости на прямой центров
            t = (d2 + radii[a] ** 2 - radii[b] ** 2) / (2 * d2)
            found.append(vec_add(ca, vec_scale(t, vec_sub(cb, ca))))
    point = _subgradient_point(np.array(centers, dtype=float), np.array(radii, dtype=float), iterations)
    if num.exact:
        found.append(tuple(Fraction(float(v)).limit_denominator(1 << 40) for v in point))
    else:
        found.append(tuple(float(v) for v in point))
    return found


def _block_common_point(centers: Sequence[Vector], radii: Sequence[Scalar], num: Numeric,
                        iterations: int) -> Optional[Vector]:
    if len(centers[0]) == 1:
        # на прямой пересечение интервалов проверяется точно
        low = max(c[0] - r for c, r in zip(centers, radii))
        high = min(c[0] + r for c, r in zip(centers, radii))
        if not num.lt(low, high):
            return None
        return ((low + high) / 2,)
    for point in _candidates(centers, radii, num, iterations):
        if all(num.lt(norm2(vec_sub(point, c)), r * r) for c, r in zip(centers, radii)):
            return point
    return None


def common_point(balls: Sequence[ProductBall], num: Numeric, iterations: Optional[int] = None) -> Optional[Vector]:
    """
    Сертификат непустоты пересечения открытых произведений шаров: точка, лежащая
    во всех шарах, или None, если кандидаты не подошли.
    """
    if iterations is None:
        from app import config
        iterations = config.SUBGRADIENT_ITERATIONS
    blocks = balls[0].blocks
    point: List[Scalar] = [num.zero] * blocks.dimension
    for j, axes in enumerate(blocks.coarse):
        found = _block_common_point([b.block_center(j) for b in balls], [b.radii[j] for b in balls],
                                    num, iterations)
        if found is None:
            return None
        for axis, value in zip(axes, found):
            point[axis] = value
    result = tuple(point)
    if not all(contains_point(ball, result, num) for ball in balls):
        return None
    return result
