"""
Configuration Management
"""

import os
from typing import List, Tuple


def _floats(raw: str) -> List[float]:
    return [float(x) for x in raw.split() if x.strip()]


def _box(raw: str) -> Tuple[float, float]:
    values = _floats(raw)
    if len(values) != 2:
        raise ValueError(f"A box needs exactly two numbers, got {raw!r}")
    return values[0], values[1]


class Config:
    # Sampling
    SAMPLES = int(os.getenv("DERIV_SAMPLES", "100"))
    SEED = int(os.getenv("DERIV_SEED", str(0xD1FF)), 0)
    BOX = _box(os.getenv("DERIV_BOX", "-10 10"))
    IMAG_BOX = _box(os.getenv("DERIV_IMAG_BOX", "-2 2"))
    MIN_ACCEPTED = int(os.getenv("DERIV_MIN_ACCEPTED", "10"))
    OVERSAMPLING = int(os.getenv("DERIV_OVERSAMPLING", "100"))

    # Tolerances
    H_SCHEDULE = _floats(os.getenv("DERIV_H_SCHEDULE", "1e-2 1e-3 1e-4 1e-5"))
    CLOSE_TOL = float(os.getenv("DERIV_CLOSE_TOL", "1e-4"))
    CONT_MODULUS = float(os.getenv("DERIV_CONT_MODULUS", "1e-3"))
    NOT_CLOSE_GAP = float(os.getenv("DERIV_NOT_CLOSE_GAP", "0.5"))
    IMAGE_GAP = float(os.getenv("DERIV_IMAGE_GAP", "1e-9"))

    # Execution
    WORKERS = int(os.getenv("DERIV_WORKERS", "1"))

    # Logging
    LOG_LEVEL = os.getenv("DERIV_LOG_LEVEL", "WARNING").upper()
    LOG_FILE = os.getenv("DERIV_LOG_FILE") or None

    @classmethod
    def validate(cls):
        """Validate configuration"""
        problems = []

        for field in ["SAMPLES", "MIN_ACCEPTED", "OVERSAMPLING", "WORKERS"]:
            if getattr(cls, field) < 1:
                problems.append(f"{field} must be positive")

        for field in ["CLOSE_TOL", "CONT_MODULUS", "NOT_CLOSE_GAP", "IMAGE_GAP"]:
            if not getattr(cls, field) > 0:
                problems.append(f"{field} must be positive")

        schedule = cls.H_SCHEDULE
        if not schedule or any(h <= 0 for h in schedule):
            problems.append("H_SCHEDULE must be a non-empty list of positive steps")
        elif any(a <= b for a, b in zip(schedule, schedule[1:])):
            problems.append("H_SCHEDULE must be strictly decreasing")

        for field in ["BOX", "IMAG_BOX"]:
            lo, hi = getattr(cls, field)
            if lo > hi:
                problems.append(f"{field} lower bound exceeds upper bound")

        if cls.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            problems.append(f"Unknown LOG_LEVEL {cls.LOG_LEVEL!r}")

        if problems:
            raise ValueError(f"Invalid configuration: {', '.join(problems)}")

# Validate configuration on import
Config.validate()
