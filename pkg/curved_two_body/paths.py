from pathlib import Path
import os

import dotenv

DATA_PATH_VARIABLE = "DATA_PATH"
DEFAULT_DATA_FOLDER = "data"


def load_project_dir() -> Path:
    return Path(__file__).resolve().parents[1]


def load_data_path() -> Path:
    """``$DATA_PATH`` (also read from ``.env``) when it is a directory, else ``<project>/data``."""
    dotenv.load_dotenv()
    data_path = os.getenv(DATA_PATH_VARIABLE)
    if data_path is not None and Path(data_path).is_dir():
        return Path(data_path)
    return load_project_dir() / DEFAULT_DATA_FOLDER


def load_output_dir(subfolder: str) -> Path:
    """Default output folder of a CLI subcommand; created on demand."""
    output_dir = load_data_path() / subfolder
    output_dir.mkdir(parents=True, exist_ok=True)
    return output_dir
