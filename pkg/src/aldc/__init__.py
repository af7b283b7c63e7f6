"""Amortized locally decodable codes for Hamming and insertion/deletion errors."""

from .errors import DecodeFailure, InvalidInput, QueryRangeError
from .oracle import CorruptedOracle, QueryLog, open_oracle

__all__ = ["DecodeFailure", "InvalidInput", "QueryRangeError", "CorruptedOracle", "QueryLog", "open_oracle"]
__version__ = "0.1.0"
