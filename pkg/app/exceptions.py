"""
Исключения приложения. Все ошибки предметной области наследуются от DiskopError,
CLI превращает их в код выхода 1.
"""
from typing import Optional, Sequence, Union


class DiskopError(Exception):
    """Базовая ошибка предметной области."""


class BlockMismatchError(DiskopError):
    """Объекты заданы над разными блочными структурами."""


class InvariantError(DiskopError):
    """Нарушен инвариант типа (ортогональность, положительность масштабов и т.п.)."""


class ArityError(DiskopError):
    """Несогласованные арности при композиции, подконфигурации или действии."""


class DivisionError(DiskopError):
    """x не делит y вдоль заданного структурного отображения."""


class HypothesisError(DiskopError):
    """Нарушено условие леммы (например, индекс без соответствия)."""


class TreeError(DiskopError):
    """Дерево в суперпозиции не является корректным."""


class CoreFormError(DiskopError):
    """Конфигурация не допускает нормальной формы ядра."""


class FlowError(DiskopError):
    """Некорректный параметр потока или исчерпан лимит шагов."""


class StarvationError(DiskopError):
    """Генератор не смог построить допустимый экземпляр."""


class SceneError(DiskopError):
    """Ошибка схемы или инварианта в документе сцены."""

    def __init__(self, message: str, path: Optional[Sequence[Union[str, int]]] = None):
        self.path = tuple(path or ())
        location = "/".join(str(p) for p in self.path)
        super().__init__(f"{location}: {message}" if location else message)
