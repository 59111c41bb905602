"""Flat-array access to the clothccd collision engine."""

from ._clothccd import (
    ClothCcdError,
    ccd_loss_flat,
    contact_loss_flat,
    detect_flat,
    postprocess_flat,
)

__all__ = [
    "ClothCcdError",
    "ccd_loss_flat",
    "contact_loss_flat",
    "detect_flat",
    "postprocess_flat",
]
