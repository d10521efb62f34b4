import os
from fractions import Fraction
from dotenv import load_dotenv

# Явно указываем путь к .env
load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), '..', '.env'))

"""
Конфигурационный файл для приложения.
Содержит числовые настройки, константы лемм и параметры проверки.
"""
from app.utils.logger import get_logger

# Инициализируем логгер
logger = get_logger()


def _fraction_env(name: str, default: str) -> Fraction:
    raw = os.getenv(name, default)
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        logger.warning(f"⚠️ Некорректное значение {name}={raw!r}, используется {default}")
        return Fraction(default)


# ===== Numeric Configuration =====
NUMERIC_MODE = os.getenv("DISKOP_NUMERIC_MODE", "exact").strip().lower()
if NUMERIC_MODE not in ("exact", "float"):
    logger.warning(f"⚠️ Неизвестный DISKOP_NUMERIC_MODE={NUMERIC_MODE!r}, используется exact")
    NUMERIC_MODE = "exact"
TOLERANCE = float(os.getenv("DISKOP_TOLERANCE", "1e-9"))

logger.info(f"Numeric mode: {NUMERIC_MODE}", context={"tolerance": TOLERANCE})

# ===== Lemma Constants =====
# Множитель увеличения дисков в разделённых конфигурациях
SEPARATION_CONSTANT = _fraction_env("DISKOP_SEPARATION_CONSTANT", "5")
# Коэффициент сжатия класса D и ширина окна потока (1 - 1/50, 1)
SHRINK_FACTOR = _fraction_env("DISKOP_SHRINK_FACTOR", "1/50")
CORE_STEP_CAP = int(os.getenv("DISKOP_CORE_STEP_CAP", "64"))
SUBGRADIENT_ITERATIONS = int(os.getenv("DISKOP_SUBGRADIENT_ITERATIONS", "200"))

if SEPARATION_CONSTANT <= 1:
    logger.warning("⚠️ DISKOP_SEPARATION_CONSTANT должен быть больше 1, используется 5")
    SEPARATION_CONSTANT = Fraction(5)
if not 0 < SHRINK_FACTOR < 1:
    logger.warning("⚠️ DISKOP_SHRINK_FACTOR должен лежать в (0, 1), используется 1/50")
    SHRINK_FACTOR = Fraction(1, 50)

# ===== Verification Configuration =====
STARVATION_LIMIT = int(os.getenv("DISKOP_STARVATION_LIMIT", "100000"))
VERIFY_WORKERS = int(os.getenv("DISKOP_VERIFY_WORKERS", "4"))

logger.info("✅ Конфигурация загружена", context={
    "separation_constant": str(SEPARATION_CONSTANT),
    "shrink_factor": str(SHRINK_FACTOR),
    "core_step_cap": CORE_STEP_CAP,
    "starvation_limit": STARVATION_LIMIT,
    "verify_workers": VERIFY_WORKERS,
})
