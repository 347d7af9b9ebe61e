"""Flow laws: the speed-dependent coefficient in front of the curvature term.

Both evolutions drive the normal acceleration of the surface by g(V^2) * H,
where V is the normal speed and H the mean curvature (unit sphere with
outward normal: H = -2).  Two coefficient functions are supported:

* ``constant``: g(s) = 1, the melting-freezing wave model,
* ``lefloch``:  g(s) = 1 + s/2, the energy-conserving variant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FlowLaw:
    kind: str

    def __post_init__(self):
        if self.kind not in ("constant", "lefloch"):
            raise ValueError(f"unknown flow law kind: {self.kind!r}")

    def evaluate(self, s):
        """Evaluate g at the squared speed s (scalar or array, s >= 0)."""
        arr = np.asarray(s, dtype=float)
        out = np.ones_like(arr) if self.kind == "constant" else 1.0 + 0.5 * arr
        return float(out) if out.ndim == 0 else out


CONSTANT = FlowLaw("constant")
LEFLOCH = FlowLaw("lefloch")

# Config / CLI names.  "gurtin" selects g = 1.
_LAW_NAMES = {"gurtin": CONSTANT, "constant": CONSTANT, "lefloch": LEFLOCH}


def law_from_name(name: str) -> FlowLaw:
    try:
        return _LAW_NAMES[name.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown law {name!r} (expected 'gurtin' or 'lefloch')"
        ) from None
