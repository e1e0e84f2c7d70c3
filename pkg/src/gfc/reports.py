"""Residual reports shared by the certifier and the verification suites."""

from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ResidualReport", "fingerprint_digest"]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (str, bool)) or obj is None:
        return obj
    return repr(obj)


def fingerprint_digest(config: dict) -> str:
    text = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class ResidualReport:
    """Per-point residuals of a numerical identity and the verdict.

    The verdict is ``"pass"`` when the sup-norm over the conclusive points is
    within tolerance, and ``"fail"`` otherwise (including the degenerate
    case with no conclusive point at all).
    """

    identity: str
    grid: tuple[float, ...]
    residuals: tuple[float, ...]
    sup_norm: float
    tolerance: float
    verdict: str
    inconclusive: tuple[int, ...] = ()
    config: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        identity: str,
        grid: Sequence[float],
        residuals: Sequence[float],
        tolerance: float,
        inconclusive: Sequence[bool] | None = None,
        config: dict | None = None,
        details: dict | None = None,
    ) -> ResidualReport:
        res = np.asarray(residuals, dtype=float)
        bad = np.zeros(res.shape, dtype=bool) if inconclusive is None else np.asarray(inconclusive, bool)
        bad = bad | ~np.isfinite(res)
        conclusive = np.abs(res[~bad])
        sup = float(conclusive.max()) if conclusive.size else math.nan
        verdict = "pass" if conclusive.size and sup <= tolerance else "fail"
        return cls(
            identity=identity,
            grid=tuple(float(x) for x in grid),
            residuals=tuple(float(r) for r in res),
            sup_norm=sup,
            tolerance=float(tolerance),
            verdict=verdict,
            inconclusive=tuple(int(i) for i in np.nonzero(bad)[0]),
            config=dict(config or {}),
            details=dict(details or {}),
        )

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def fingerprint(self) -> str:
        return fingerprint_digest(self.config)

    def to_dict(self) -> dict:
        return _jsonable({
            "identity": self.identity,
            "verdict": self.verdict,
            "sup_norm": self.sup_norm,
            "tolerance": self.tolerance,
            "fingerprint": self.fingerprint,
            "config": self.config,
            "details": self.details,
            "grid": list(self.grid),
            "residuals": list(self.residuals),
            "inconclusive": list(self.inconclusive),
        })

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def summary(self) -> str:
        return (f"{self.identity:<40s} {self.verdict.upper():<5s} sup|r| = {self.sup_norm:.3e} "
                f"(tol {self.tolerance:.1e}, {len(self.grid)} pts, "
                f"{len(self.inconclusive)} inconclusive)")

    def to_table(self) -> str:
        lines = [self.summary(), f"{'x':>24s} {'residual':>24s}"]
        bad = set(self.inconclusive)
        for i, (x, r) in enumerate(zip(self.grid, self.residuals)):
            flag = "  (inconclusive)" if i in bad else ""
            lines.append(f"{x:24.17g} {r:24.17g}{flag}")
        return "\n".join(lines)


def reports_table(reports: Sequence[ResidualReport]) -> str:
    return "\n".join(r.summary() for r in reports)
