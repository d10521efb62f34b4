import sys
import os

# Корневой каталог в пути поиска модулей для запуска `python main.py`
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, BASE_DIR)

from app.handlers.commands import run_command
from app.utils.logger import get_logger

# Инициализируем логгер
logger = get_logger()


def main() -> int:
    logger.debug("🚀 Запуск diskop", context={"argv": sys.argv[1:]})
    return run_command(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
