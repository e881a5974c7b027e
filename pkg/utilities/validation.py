import math

from utilities.collections import neutralize_str
from utilities.errors import InvalidArgumentError


class InputValidation:

    @staticmethod
    def accepted_value(value: str, expected_values: list) -> bool:
        return neutralize_str(value) in list(map(neutralize_str, expected_values))

    @staticmethod
    def positive(name: str, value: float) -> float:
        if not (math.isfinite(value) and value > 0):
            raise InvalidArgumentError(f"{name} must be a positive finite number, got {value}")
        return value

    @staticmethod
    def non_negative(name: str, value: float) -> float:
        if not (math.isfinite(value) and value >= 0):
            raise InvalidArgumentError(f"{name} must be a non-negative finite number, got {value}")
        return value

    @staticmethod
    def positive_int(name: str, value: int) -> int:
        if int(value) != value or value < 1:
            raise InvalidArgumentError(f"{name} must be a positive integer, got {value}")
        return int(value)

    @staticmethod
    def same_length(name: str, length: int, expected: int) -> None:
        if length != expected:
            raise InvalidArgumentError(f"{name} has length {length}, expected {expected}")
