"""SVG-проекции конфигураций на пару осей одного грубого блока."""
from typing import Optional, Sequence, Tuple

import drawsvg as draw

from app.exceptions import SceneError
from app.models.ball import ProductBall, map_image
from app.services.scene_io import Scene

CANVAS = 400
MARGIN = 20
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _round(value) -> float:
    return round(float(value), 6)


def _resolve_axes(domain: ProductBall, axes: Sequence[int]) -> Tuple[int, int, Optional[int]]:
    """Номер грубого блока и пара осей; для одномерного блока вторая ось отсутствует."""
    if len(axes) != 2:
        raise SceneError("нужны ровно две оси проекции", ("axes",))
    a, b = axes
    owner = domain.blocks.coarse_of_axis
    for axis in (a, b):
        if axis not in owner:
            raise SceneError(f"ось {axis} вне 0..{domain.blocks.dimension - 1}", ("axes",))
    block = owner[a]
    if owner[b] != block:
        raise SceneError(f"оси {a} и {b} лежат в разных грубых блоках", ("axes",))
    if a == b:
        if len(domain.blocks.coarse[block]) != 1:
            raise SceneError("одинаковые оси допустимы только для одномерного блока", ("axes",))
        return block, a, None
    return block, a, b


class SvgRenderer:
    """Рисует область и образы компонент; масштаб нормирован на радиус области."""

    def __init__(self, domain: ProductBall, axes: Sequence[int]):
        self.domain = domain
        self.block, self.x_axis, self.y_axis = _resolve_axes(domain, axes)
        self.radius = float(domain.radii[self.block])
        self.scale = (CANVAS / 2 - MARGIN) / self.radius
        self.origin = (float(domain.center[self.x_axis]),
                       float(domain.center[self.y_axis]) if self.y_axis is not None else 0.0)

    def _point(self, ball: ProductBall) -> Tuple[float, float]:
        x = float(ball.center[self.x_axis]) - self.origin[0]
        y = float(ball.center[self.y_axis]) - self.origin[1] if self.y_axis is not None else 0.0
        # ось y в SVG направлена вниз
        return _round(x * self.scale), _round(-y * self.scale)

    def circle(self, ball: ProductBall, element_id: str, color: str, dashed: bool = False) -> draw.Circle:
        cx, cy = self._point(ball)
        attributes = dict(fill="none", stroke=color, stroke_width=1.5, id=element_id)
        if dashed:
            attributes.update(stroke_dasharray="6,4", stroke_width=1)
        else:
            attributes.update(fill=color, fill_opacity=0.15)
        return draw.Circle(cx, cy, _round(float(ball.radii[self.block]) * self.scale), **attributes)

    def render(self, scene: Scene, config_names: Sequence[str], enlarged: bool = False) -> draw.Drawing:
        d = draw.Drawing(CANVAS, CANVAS, origin="center")
        d.append(self.circle(self.domain, "domain", "#333333", dashed=False))
        for n, name in enumerate(config_names):
            x = scene.config(name)
            color = PALETTE[n % len(PALETTE)]
            for k, f in enumerate(x.maps):
                image = map_image(f, x.domain)
                d.append(self.circle(image, f"{name}-{k + 1}", color))
                cx, cy = self._point(image)
                d.append(draw.Text(str(k + 1), 12, cx, cy, text_anchor="middle", fill=color,
                                   id=f"{name}-{k + 1}-label"))
                if enlarged:
                    big = map_image(f.then_scaled(scene.separation_constant), x.domain)
                    d.append(self.circle(big, f"{name}-{k + 1}-enlarged", color, dashed=True))
        return d


def render_svg(scene: Scene, config_names: Sequence[str], axes: Sequence[int] = (0, 1),
               enlarged: bool = False, domain: Optional[str] = None) -> bytes:
    """
    Детерминированный SVG: круг области, по кругу на компоненту и, при enlarged,
    пунктирные круги образов C·B.
    """
    if domain is not None:
        if domain not in scene.domains:
            raise SceneError(f"область {domain!r} не найдена", ("domains", domain))
        ball = scene.domains[domain]
    elif config_names:
        ball = scene.config(config_names[0]).domain
    elif scene.domains:
        ball = next(iter(scene.domains.values()))
    else:
        raise SceneError("в сцене нет областей для отрисовки")
    for name in config_names:
        if scene.config(name).domain.blocks != ball.blocks:
            raise SceneError(f"конфигурация {name!r} задана над другой областью", ("configs", name))
    drawing = SvgRenderer(ball, axes).render(scene, config_names, enlarged)
    return drawing.as_svg().encode("utf-8")
