"""
Core smoother abstractions
"""

from .base import (
    BaseSmoother,
    SmootherRegistry,
    smoother_registry
)

__all__ = [
    'BaseSmoother',
    'SmootherRegistry',
    'smoother_registry'
]
