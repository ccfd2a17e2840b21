from pathlib import Path

PRESENTATIONS = Path(__file__).parent
