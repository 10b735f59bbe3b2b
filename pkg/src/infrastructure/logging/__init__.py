from src.infrastructure.logging.logger import Logger, get_logger

__all__ = ["Logger", "get_logger"]
