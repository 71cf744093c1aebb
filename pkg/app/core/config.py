# app/core/config.py

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


class Settings:
    OUT_DIR = os.getenv("FEMTONET_OUT_DIR", "results")
    DATABASE_URL = os.getenv("FEMTONET_DATABASE_URL")
    LOG_LEVEL = os.getenv("FEMTONET_LOG_LEVEL", "INFO")

    def database_url_for(self, out_dir: Path) -> str | None:
        """
        Results-store URL for a run writing into out_dir.
        Unset means a sqlite file next to the CSVs; "none" disables the store.
        """
        if self.DATABASE_URL is None:
            return f"sqlite:///{Path(out_dir) / 'results.db'}"
        if self.DATABASE_URL.strip().lower() == "none":
            return None
        return self.DATABASE_URL


settings = Settings()
