from pathlib import Path

SCHEMA = Path(__file__).parent
EXPERIMENT_SCHEMA = SCHEMA / "experiment_schema.json"
