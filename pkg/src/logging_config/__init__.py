from pathlib import Path

LOGGING_CONFIG = Path(__file__).parent / "config.json"
