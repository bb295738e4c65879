# src/realizability/strainreal/storage/local_filesystem.py
import os

from ..utils.helpers import ensure_dir, to_json_text
from .storage_interface import StorageInterface


class LocalStorage(StorageInterface):
    def __init__(self, base="./artifacts"):
        self.base = base

    def save_text(self, path: str, text: str) -> str:
        full = os.path.join(self.base, path)
        ensure_dir(os.path.dirname(full))
        with open(full, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        return full

    def save_json(self, path: str, data: dict) -> str:
        """Sorted keys, indent 2, non-finite numbers as null, trailing newline"""
        return self.save_text(path, to_json_text(data))
