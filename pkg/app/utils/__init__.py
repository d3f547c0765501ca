"""
Utilities Package for the Colander Toolkit
File formats, figures, logging setup and reproducible random streams
"""

from .io_utils import read_anchors_csv, write_anchors_csv, write_json
from .logging_setup import configure_logging
from .seeding import stream

__all__ = [
    "read_anchors_csv",
    "write_anchors_csv",
    "write_json",
    "configure_logging",
    "stream",
]
