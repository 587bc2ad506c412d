"""Automated specification feedback for step-list controllers.

Language-model step lists become finite-state controllers, which are
checked against LTL driving rules (formally, on a product with a world
model, or empirically, in a seeded simulator). The resulting scores rank
responses into preference pairs for fine-tuning.
"""

from __future__ import annotations

from .errors import SpecFeedbackError

__version__ = "0.1.0"

__all__ = ["SpecFeedbackError", "__version__"]
