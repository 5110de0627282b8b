"""
Escritura de CSV con precisión completa (17 cifras significativas) y una línea de
cabecera versionada, para que los datos de las figuras sean reproducibles bit a bit.
"""

import logging
import os

import pandas as pd

logger = logging.getLogger(__name__)

TOOL_VERSION = "1.0.0"
CSV_FORMAT_VERSION = 1


def header_line(kind: str) -> str:
    return f"# contract-auction {TOOL_VERSION} format_version={CSV_FORMAT_VERSION} {kind}\n"


def write_csv(frame: pd.DataFrame, path: str, kind: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(header_line(kind))
        frame.to_csv(handle, index=False, float_format="%.17g", lineterminator="\n")
    logger.info(f"  -> [CSV] {len(frame)} filas ({kind}) en {path}")
    return path


def read_csv(path: str) -> pd.DataFrame:
    """Lee un CSV escrito por write_csv saltando la línea de cabecera."""
    return pd.read_csv(path, comment="#")
