"""
    Config.py

    Settings read from config.ini.
"""
import configparser
import os
from pathlib import Path

cfg = configparser.ConfigParser()
# Prefer config.ini located alongside this module; fallback to CWD
module_config = Path(__file__).with_name('config.ini')
if module_config.exists():
    cfg.read(module_config)
else:
    cfg.read('config.ini')

MAX_NAME_RANK = cfg.getint('names', 'max_rank', fallback=3)

POWER_MAX_RANK = cfg.getint('forcing', 'power_max_rank', fallback=2)
POWER_MAX_CONDITIONS = cfg.getint('forcing', 'power_max_conditions', fallback=3)
CORPUS_MAX_CONDITIONS = cfg.getint('forcing', 'corpus_max_conditions', fallback=5)

MAX_GROUP_ORDER = cfg.getint('groups', 'max_order', fallback=24)
SUPPORT_POLICY = cfg.get('groups', 'support_policy', fallback='countable')

ORACLE_MAX_ORDER = cfg.getint('filters', 'oracle_max_order', fallback=8)

PAIRS_DEPTH = cfg.getint('pairs', 'depth', fallback=1)
PAIRS_PREFIX = cfg.getint('pairs', 'prefix', fallback=3)
WITNESS_SAMPLES = cfg.getint('pairs', 'witness_samples', fallback=50)

SCHEMA_VERSION = cfg.getint('report', 'schema_version', fallback=1)
LOG_FILE = cfg.get('report', 'log_file', fallback='sfw.log')

DEFAULT_JOBS = cfg.getint('run', 'jobs', fallback=1)


def seed() -> int:
    """SFW_SEED wins over the configured seed."""
    value = os.environ.get("SFW_SEED")
    if value:
        try:
            return int(value)
        except ValueError:
            pass
    return cfg.getint('run', 'seed', fallback=0)
