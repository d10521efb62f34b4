from app.models.numeric import EXACT, FLOAT, Numeric, NumericMode, Scalar, format_scalar, parse_scalar
from app.models.blocks import BlockStructure
from app.models.dilation import DilationMap, map_compose, map_invert, validate_map
from app.models.ball import BallRelation, ProductBall, ball_relations, map_image
from app.models.group import GroupRep, conjugate, validate_group
from app.models.operad import (
    Config,
    MembershipLevel,
    StructureMap,
    ValidationReport,
    Violation,
    act,
    compose_blocks,
    configs_equal,
    operad_compose,
    subconfig,
    validate,
)
from app.models.product import include_left, include_right, product_config, project, tau_permutation
