import json
import logging
from typing import Optional

from utilities.filesystem_client import FilesystemClient
from utilities.time import now_for_logs


class LoggerClient:
    def __init__(self, output_file_path: Optional[str] = None, name: str = "rstmrf"):
        self.output_file_path = output_file_path
        self.logger = logging.getLogger(name)

    def log(self, message, level: int = logging.INFO):
        if not isinstance(message, str):
            message = json.dumps(message, default=str, sort_keys=True)
        self.logger.log(level, message)
        if self.output_file_path:
            FilesystemClient.write_to_file(self.output_file_path, f"[{now_for_logs()}] {message}\n")

    def warning(self, message):
        self.log(message, logging.WARNING)
