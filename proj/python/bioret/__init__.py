# Copyright 2026 The bioret Authors.
# SPDX-License-Identifier: Apache-2.0
"""Python bindings for the bioret retrieval toolkit."""

from bioret._core import *  # noqa: F401,F403
from bioret._core import (  # noqa: F401
    ConfigError,
    DataError,
    Error,
    LookupError,
    ParseError,
    StageError,
    ValidationError,
)

__version__ = "0.1.0"
