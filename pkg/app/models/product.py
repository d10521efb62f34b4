"""
Произведение конфигураций над V×W: (p_i × q_j) в лексикографическом порядке,
вложения i_V, i_W и проекции pr_V, pr_W.
"""
from typing import Optional, Tuple

from app.exceptions import BlockMismatchError
from app.models.ball import ProductBall
from app.models.dilation import DilationMap
from app.models.group import GroupRep
from app.models.operad import Config

LEFT = 0
RIGHT = 1


def product_config(p: Config, q: Config) -> Config:
    """(p_i × q_j), индекс (i, j) имеет номер i·|q| + j."""
    maps = [f.product(g) for f in p.maps for g in q.maps]
    return Config(tuple(maps), p.domain.product(q.domain), GroupRep.product(p.group, q.group), p.numeric)


def include_left(x: Config, w_domain: ProductBall, w_group: Optional[GroupRep] = None) -> Config:
    """i_V(x) = (x_i × id_W)."""
    w_group = w_group or GroupRep.trivial(w_domain.blocks, x.numeric)
    unit = Config((DilationMap.identity(w_domain.blocks, x.numeric),), w_domain, w_group, x.numeric)
    return product_config(x, unit)


def include_right(y: Config, v_domain: ProductBall, v_group: Optional[GroupRep] = None) -> Config:
    """i_W(y) = (id_V × y_j)."""
    v_group = v_group or GroupRep.trivial(v_domain.blocks, y.numeric)
    unit = Config((DilationMap.identity(v_domain.blocks, y.numeric),), v_domain, v_group, y.numeric)
    return product_config(unit, y)


def project(w: Config, side: int) -> Config:
    """pr_V (side=0) или pr_W (side=1) покомпонентно."""
    blocks = w.domain.blocks
    if not blocks.is_product:
        raise BlockMismatchError("проекция определена только для конфигураций над произведением")
    if w.group.factors:
        group = w.group.project(side)
    elif w.group.order == 1:
        group = GroupRep.trivial(blocks.factors[side], w.numeric)
    else:
        raise BlockMismatchError("группа конфигурации не является произведением групп сомножителей")
    return Config(tuple(f.project(side) for f in w.maps), w.domain.project(side), group, w.numeric)


def tau_permutation(n: int, m: int) -> Tuple[int, ...]:
    """
    τ_{n,m}: переводит порядок «сначала W» (индекс j·n + i) в лексикографический
    порядок «сначала V» (индекс i·m + j).
    """
    return tuple(i * m + j for j in range(m) for i in range(n))
