import csv
import os
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from utilities.constants import FOREST_COMPONENTS_KEY, SAMPLE_DUMP_MAGIC
from utilities.errors import InvalidArgumentError


class FilesystemClient:

    @staticmethod
    def write_to_file(path, content):
        FilesystemClient.ensure_parent(path)
        with open(path, 'a') as f:
            f.write(content)

    @staticmethod
    def ensure_parent(path):
        parent = os.path.dirname(os.fspath(path))
        if parent:
            os.makedirs(parent, exist_ok=True)

    # PGM

    @staticmethod
    def write_pgm(path, image: np.ndarray, bit_depth: int = 16,
                  value_range: Optional[Tuple[float, float]] = None) -> None:
        """
        Writes a 2-D array as a binary (P5) PGM, linearly mapping value_range to [0, maxval].
        :param image: 2-D array
        :param bit_depth: 8 or 16
        :param value_range: (low, high); defaults to the image min and max
        """
        if image.ndim != 2:
            raise InvalidArgumentError(f"PGM export needs a 2-D image, got shape {image.shape}")
        if bit_depth not in (8, 16):
            raise InvalidArgumentError(f"PGM bit depth must be 8 or 16, got {bit_depth}")
        maxval = 255 if bit_depth == 8 else 65535
        low, high = value_range if value_range is not None else (float(image.min()), float(image.max()))
        if high > low:
            scaled = np.clip((image - low) / (high - low), 0.0, 1.0)
        else:
            scaled = np.zeros_like(image, dtype=np.float64)
        pixels = np.rint(scaled * maxval).astype(">u1" if bit_depth == 8 else ">u2")
        height, width = image.shape
        FilesystemClient.ensure_parent(path)
        with open(path, "wb") as f:
            f.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
            f.write(pixels.tobytes())

    @staticmethod
    def read_pgm(path) -> np.ndarray:
        """Reads an 8- or 16-bit binary PGM into floats in [0, 1]."""
        with open(path, "rb") as f:
            content = f.read()
        tokens = []
        position = 0
        while len(tokens) < 4:
            while content[position:position + 1].isspace():
                position += 1
            if content[position:position + 1] == b"#":
                position = content.index(b"\n", position) + 1
                continue
            start = position
            while not content[position:position + 1].isspace():
                position += 1
            tokens.append(content[start:position])
        position += 1  # single whitespace before the raster
        if tokens[0] != b"P5":
            raise InvalidArgumentError(f"{path} is not a binary PGM")
        width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
        dtype = ">u1" if maxval < 256 else ">u2"
        pixels = np.frombuffer(content, dtype=dtype, count=width * height, offset=position)
        return pixels.reshape(height, width).astype(np.float64) / maxval

    # CSV

    @staticmethod
    def write_image_csv(path, image: np.ndarray) -> None:
        """Row-major flat CSV with header line `height,width`."""
        height, width = image.shape
        FilesystemClient.ensure_parent(path)
        with open(path, "w", newline="") as f:
            f.write(f"{height},{width}\n")
            for value in image.reshape(-1):
                f.write(f"{float(value)!r}\n")

    @staticmethod
    def read_image_csv(path) -> np.ndarray:
        with open(path) as f:
            height, width = (int(v) for v in f.readline().strip().split(","))
            values = np.array([float(line) for line in f if line.strip()])
        if values.size != height * width:
            raise InvalidArgumentError(f"{path} holds {values.size} values, header says {height}x{width}")
        return values.reshape(height, width)

    @staticmethod
    def write_rows_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
        FilesystemClient.ensure_parent(path)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)

    @staticmethod
    def write_forest_csv(path, forest) -> None:
        """Header `components,<k>` followed by the included edge indices, one per line."""
        FilesystemClient.ensure_parent(path)
        with open(path, "w", newline="") as f:
            f.write(f"{FOREST_COMPONENTS_KEY},{forest.component_count}\n")
            for edge_id in forest.included_edges:
                f.write(f"{int(edge_id)}\n")

    @staticmethod
    def read_forest_csv(path) -> Tuple[np.ndarray, int]:
        with open(path) as f:
            key, components = f.readline().strip().split(",")
            if key != FOREST_COMPONENTS_KEY:
                raise InvalidArgumentError(f"{path} is not a forest file")
            edge_ids = [int(line) for line in f if line.strip()]
        return np.array(edge_ids, dtype=np.int64), int(components)

    # SAMPLE DUMP

    @staticmethod
    def write_sample_dump(path, samples: List[np.ndarray], height: int, width: int) -> None:
        """
        Binary dump: magic, then little-endian uint32 (height, width, count), then float32
        images in row-major order, one record per sample.
        """
        FilesystemClient.ensure_parent(path)
        with open(path, "wb") as f:
            f.write(SAMPLE_DUMP_MAGIC)
            f.write(np.array([height, width, len(samples)], dtype="<u4").tobytes())
            for sample in samples:
                f.write(np.asarray(sample, dtype="<f4").reshape(-1).tobytes())

    @staticmethod
    def read_sample_dump(path) -> np.ndarray:
        with open(path, "rb") as f:
            if f.read(len(SAMPLE_DUMP_MAGIC)) != SAMPLE_DUMP_MAGIC:
                raise InvalidArgumentError(f"{path} is not a sample dump")
            height, width, count = np.frombuffer(f.read(12), dtype="<u4")
            data = np.frombuffer(f.read(), dtype="<f4")
        return data.reshape(int(count), int(height), int(width))
