# src/realizability/strainreal/storage/storage_interface.py
# abstractmethod forces every backend to implement both writers
from abc import ABC, abstractmethod


class StorageInterface(ABC):
    @abstractmethod
    def save_json(self, path: str, data: dict) -> str:
        """Save a dictionary as a JSON artifact, returns where it went"""
        pass

    @abstractmethod
    def save_text(self, path: str, text: str) -> str:
        """Save a text artifact (CSV, gnuplot data), returns where it went"""
        pass
