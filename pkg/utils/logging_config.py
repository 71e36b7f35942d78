"""
LSBuck - Logging Configuration

Sets up consistent logging across all modules with:
- File handler for persistent solver logs
- Console handler for real-time feedback
- Configurable log level from config.yaml
"""

import logging
from pathlib import Path

import yaml

DEFAULT_LOG_CONFIG = {
    'level': 'INFO',
    'file': 'logs/lsbuck.log',
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
}


def setup_logging(config_path='config.yaml', log_file=None):
    """
    Setup logging from configuration file.

    Args:
        config_path: Path to config.yaml (relative to project root or absolute)
        log_file: Optional override for the log file location

    Returns:
        logging.Logger: Configured logger for 'lsbuck' namespace
    """
    project_root = Path(__file__).parent.parent
    config_file = Path(config_path)
    if not config_file.is_absolute():
        config_file = project_root / config_path

    log_config = dict(DEFAULT_LOG_CONFIG)
    if config_file.exists():
        with open(config_file, 'r') as f:
            config = yaml.safe_load(f) or {}
        log_config.update(config.get('logging', {}) or {})

    log_level_str = str(log_config.get('level', 'INFO'))
    log_level = getattr(logging, log_level_str.upper(), logging.INFO)
    log_path = Path(log_file) if log_file else project_root / log_config['file']
    log_format = log_config['format']

    log_path.parent.mkdir(parents=True, exist_ok=True)

    formatter = logging.Formatter(log_format)

    logger = logging.getLogger('lsbuck')
    logger.setLevel(log_level)

    # Re-running setup (tests, repeated CLI calls) must not stack handlers
    for handler in list(logger.handlers):
        handler.close()
    logger.handlers.clear()

    file_handler = logging.FileHandler(log_path)
    file_handler.setLevel(log_level)
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    logger.propagate = False

    logger.info(f"Logging initialized: level={log_level_str}, file={log_path}")
    return logger


def get_logger(name='lsbuck'):
    """
    Get a logger instance.

    Args:
        name: Logger name (will be prefixed with 'lsbuck.' if not already)

    Returns:
        logging.Logger: Logger instance
    """
    if not name.startswith('lsbuck'):
        name = f'lsbuck.{name}'
    return logging.getLogger(name)
