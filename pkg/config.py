"""
Configuration management for the simulator.
"""

import os
from typing import Optional
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    """Base configuration class."""

    # Application settings
    APP_NAME = os.getenv('APP_NAME', 'ipstab')
    APP_VERSION = '1.0.0'
    DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'

    # Logging settings
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')
    LOG_FORMAT = os.getenv('LOG_FORMAT', '%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # Oracle settings
    ENUMERATION_CAP = int(os.getenv('ENUMERATION_CAP', '16'))

    # Engine settings
    MAX_MOVES_FACTOR = int(os.getenv('MAX_MOVES_FACTOR', '10'))
    REVISIT_NODE_LIMIT = int(os.getenv('REVISIT_NODE_LIMIT', '20'))
    DEFAULT_SCHEDULER = os.getenv('DEFAULT_SCHEDULER', 'distributed-random-subset')
    DEFAULT_SEED = int(os.getenv('DEFAULT_SEED', '0'))

    # Sweep settings
    SWEEP_WORKERS = int(os.getenv('SWEEP_WORKERS', '4'))

    # Output settings
    OUTPUT_DIR = os.getenv('OUTPUT_DIR', 'out')


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True
    TESTING = False


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False
    TESTING = False


class TestingConfig(Config):
    """Testing configuration."""
    DEBUG = True
    TESTING = True
    SWEEP_WORKERS = 2
    ENUMERATION_CAP = 12


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(env: Optional[str] = None) -> Config:
    """
    Get configuration based on environment.

    Args:
        env: Environment name (development, production, testing)

    Returns:
        Configuration class
    """
    env = env or os.getenv('IPSTAB_ENV', 'development')
    return config.get(env, config['default'])
