import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from app.models.ball import ProductBall
from app.models.blocks import BlockStructure
from app.models.numeric import EXACT, FLOAT

# Генераторы конфигураций работают отбраковкой, поэтому отключаем дедлайн
settings.register_profile(
    "diskop",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile("ci", parent=settings.get_profile("diskop"), max_examples=200)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "diskop"))

SCENES = Path(__file__).resolve().parent.parent / "scenes"


@pytest.fixture
def scenes_dir() -> Path:
    return SCENES


@pytest.fixture
def exact():
    return EXACT


@pytest.fixture
def floating():
    return FLOAT


@pytest.fixture
def plane():
    return BlockStructure.trivial(2)


@pytest.fixture
def unit_disk(plane):
    return ProductBall.centered(plane, 1, EXACT)
