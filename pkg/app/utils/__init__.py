"""
Пакет с утилитами: логирование с контекстом и доменными уровнями.
"""

from app.utils.logger import (
    EnhancedLogger,
    LogLevel,
    get_logger
)

__all__ = [
    'EnhancedLogger',
    'LogLevel',
    'get_logger'
]
