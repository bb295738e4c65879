# src/realizability/strainreal/storage/s3_storage.py
import boto3

from ..utils.helpers import to_json_text
from .storage_interface import StorageInterface


class S3Storage(StorageInterface):
    def __init__(self, bucket_name, prefix="strainreal", client=None):
        self.s3 = client or boto3.client("s3")
        self.bucket = bucket_name
        self.prefix = prefix

    def key(self, path: str) -> str:
        return f"{self.prefix}/{path}" if self.prefix else path  # "strainreal/realize-local/mu.csv"

    def _put(self, path: str, body: str, content_type: str) -> str:
        s3_key = self.key(path)
        self.s3.put_object(
            Bucket=self.bucket,
            Key=s3_key,
            Body=body.encode("utf-8"),
            ContentType=content_type,
        )
        return f"s3://{self.bucket}/{s3_key}"

    def save_json(self, path: str, data: dict) -> str:
        return self._put(path, to_json_text(data), "application/json")

    def save_text(self, path: str, text: str) -> str:
        content_type = "text/csv" if path.endswith(".csv") else "text/plain"
        return self._put(path, text, content_type)
