"""
Модуль для логирования с поддержкой дедупликации, контекста и доменных уровней.
"""
import os
import sys
import json
import logging
from datetime import datetime
from typing import Dict, Optional, Set


class LogLevel:
    DEBUG = 'DEBUG'
    INFO = 'INFO'
    WARNING = 'WARNING'
    ERROR = 'ERROR'
    COMMAND = 'COMMAND'  # Для логирования вызовов CLI
    VERIFY = 'VERIFY'    # Для логирования прогресса проверки лемм
    SCENE = 'SCENE'      # Для логирования загрузки и сохранения сцен


# Доменные уровни пишутся как INFO
_DOMAIN_LEVELS = {
    LogLevel.COMMAND: logging.INFO,
    LogLevel.VERIFY: logging.INFO,
    LogLevel.SCENE: logging.INFO,
}

# Глобальный экземпляр логгера
_global_logger = None


class _ContextFilter(logging.Filter):
    """Подставляет пустой контекст в записи сторонних вызовов logging."""

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, 'context'):
            record.context = '{}'
        return True


class EnhancedLogger:
    """Расширенный логгер с выводом в stderr, опциональным файлом и дедупликацией."""

    def __init__(self, app_name: str = "diskop", log_dir: Optional[str] = None,
                 console_level: str = 'WARNING'):
        self.app_name = app_name
        self.log_dir = log_dir

        # Настраиваем логгер
        self.logger = logging.getLogger(app_name)
        self.logger.setLevel(logging.DEBUG)  # Уровень DEBUG для захвата всех логов
        self.logger.propagate = False

        formatter = logging.Formatter(
            '%(asctime)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s | context=%(context)s'
        )

        if not self.logger.handlers:
            # stdout занят выводом команд, поэтому консольный хендлер пишет в stderr
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(getattr(logging, console_level.upper(), logging.WARNING))
            console_handler.setFormatter(formatter)
            console_handler.addFilter(_ContextFilter())
            self.logger.addHandler(console_handler)

            if log_dir:
                os.makedirs(log_dir, exist_ok=True)
                log_file = os.path.join(log_dir, f"{app_name}_{datetime.now().strftime('%Y%m%d')}.log")
                file_handler = logging.FileHandler(log_file, encoding='utf-8')
                file_handler.setLevel(logging.DEBUG)
                file_handler.setFormatter(formatter)
                file_handler.addFilter(_ContextFilter())
                self.logger.addHandler(file_handler)

        self.seen_messages: Set[str] = set()
        self._setup_logging_methods()

    def _setup_logging_methods(self):
        """Настраивает методы логирования для совместимости со стандартным логгером."""
        self.debug = lambda msg, *args, **kwargs: self.log(msg, LogLevel.DEBUG, *args, **kwargs)
        self.info = lambda msg, *args, **kwargs: self.log(msg, LogLevel.INFO, *args, **kwargs)
        self.warning = lambda msg, *args, **kwargs: self.log(msg, LogLevel.WARNING, *args, **kwargs)
        self.error = lambda msg, *args, **kwargs: self.log(msg, LogLevel.ERROR, *args, **kwargs)
        self.command = lambda msg, *args, **kwargs: self.log(msg, LogLevel.COMMAND, *args, **kwargs)
        self.verify = lambda msg, *args, **kwargs: self.log(msg, LogLevel.VERIFY, *args, **kwargs)
        self.scene = lambda msg, *args, **kwargs: self.log(msg, LogLevel.SCENE, *args, **kwargs)
        self.critical = self.error

    def log(self, message: str, level: str = LogLevel.INFO, deduplicate: bool = True, context: Dict = None) -> None:
        """
        Логирует сообщение с указанным уровнем и контекстом.

        Args:
            message: Сообщение для логирования
            level: Уровень логирования
            deduplicate: Убирать ли дубликаты. Повтор определяется по уровню и тексту
                без контекста, поэтому для диагностики по попыткам передаётся False
            context: Дополнительный контекст для логирования
        """
        if deduplicate:
            message_hash = f"{level}:{message}"
            if message_hash in self.seen_messages:
                return
            self.seen_messages.add(message_hash)

        # Преобразуем контекст в строку JSON
        context_str = json.dumps(context, ensure_ascii=False, default=str) if context else "{}"
        extra = {'context': context_str}

        log_level = _DOMAIN_LEVELS.get(level) or getattr(logging, level.upper())
        self.logger.log(log_level, message, extra=extra)

    def log_command(self, command: str, arguments: Dict, exit_code: int = None):
        """Логирует вызов подкоманды CLI"""
        context = {
            'command': command,
            'arguments': arguments,
            'exit_code': exit_code,
        }
        self.command(f"📥 Команда: {command}", deduplicate=False, context=context)

    def log_suite(self, suite: str, trials: int, failures: int, elapsed: float):
        """Логирует итог одного набора проверки"""
        context = {
            'suite': suite,
            'trials': trials,
            'failures': failures,
            'elapsed': round(elapsed, 3),
        }
        marker = "✅" if failures == 0 else "❌"
        self.verify(f"{marker} Набор {suite}: {failures} ошибок из {trials}", deduplicate=False, context=context)

    def log_scene(self, operation: str, source: str, details: Dict = None):
        """Логирует операцию со сценой"""
        context = {
            'operation': operation,
            'source': source,
            'details': details,
        }
        self.scene(f"📁 Операция со сценой ({operation}): {source}", deduplicate=False, context=context)


def get_logger(log_dir: Optional[str] = None, app_name: str = 'diskop',
               console_level: Optional[str] = None) -> EnhancedLogger:
    """
    Получает глобальный экземпляр логгера.
    Создает новый, если еще не создан.

    Args:
        log_dir: Директория для файла логов (по умолчанию DISKOP_LOG_DIR)
        app_name: Имя приложения для логгера
        console_level: Порог вывода в stderr (по умолчанию DISKOP_LOG_LEVEL)

    Returns:
        EnhancedLogger: Экземпляр логгера
    """
    global _global_logger
    if _global_logger is None:
        if log_dir is None:
            log_dir = os.getenv("DISKOP_LOG_DIR") or None
        if console_level is None:
            console_level = os.getenv("DISKOP_LOG_LEVEL", "WARNING")
        _global_logger = EnhancedLogger(app_name, log_dir=log_dir, console_level=console_level)
    return _global_logger
