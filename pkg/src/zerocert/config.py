"""Library-wide numerical defaults.

Every solver takes its tolerances as explicit arguments; these are only the
values used when a caller does not pass one. ``using(tol)`` swaps the active
record for a block of code (the CLI applies ``--tol`` overrides this way).
"""

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    lp_feasibility: float = 1e-8
    lp_pivot: float = 1e-9
    lp_optimality: float = 1e-9
    lp_complementarity: float = 1e-6
    lp_stall: int = 50
    lp_reinvert: int = 100
    fw_gap: float = 1e-10
    convex_slack: float = 1e-6
    hull: float = 1e-9
    interpolation: float = 1e-8
    power_rtol: float = 1e-10
    power_maxiter: int = 100_000
    fd_step: float = 1e-5
    containment: float = 1e-12

    def override(self, **kw):
        """Return a copy with the named fields replaced (values coerced to the field type)."""
        types = {f.name: f.type for f in fields(self)}
        clean = {}
        for k, v in kw.items():
            if k not in types:
                raise KeyError(f"unknown tolerance {k!r}")
            clean[k] = int(v) if types[k] in (int, "int") else float(v)
        return replace(self, **clean)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULTS = Tolerances()
_ACTIVE = ContextVar("zerocert_tolerances", default=DEFAULTS)


def current() -> Tolerances:
    """The tolerance record in effect (``DEFAULTS`` unless overridden)."""
    return _ACTIVE.get()


@contextmanager
def using(tol: Tolerances):
    token = _ACTIVE.set(tol)
    try:
        yield tol
    finally:
        _ACTIVE.reset(token)
