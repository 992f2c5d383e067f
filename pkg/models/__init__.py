"""Shared domain models for points and analysis reports."""

from models.geometry import BasePoint
from models.reports import (
    CharacterTable,
    ClassificationReport,
    IdentityReport,
    ResidualFamily,
    VerificationReport,
)

__all__ = [
    "BasePoint",
    "CharacterTable",
    "ClassificationReport",
    "IdentityReport",
    "ResidualFamily",
    "VerificationReport",
]
