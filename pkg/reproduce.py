# reproduce.py
# Runs the default sweep with a pinned clock so manifest.json is byte-identical across machines.

import sys

from freezegun import freeze_time

from app.core.logging import configure_logging
from app.tasks.experiment import run_experiment
from app.utils.config_file import load_config

if __name__ == "__main__":
    configure_logging()
    config = load_config(sys.argv[1] if len(sys.argv) > 1 else None)
    with freeze_time("2025-01-01"):
        print("⏳ Freezing time at:", __import__("datetime").date.today())
        manifest = run_experiment(config)
    print("✅ Done:", manifest.config_hash)
