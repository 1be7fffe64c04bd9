"""Lattice dispersion relations, their symmetries, and discretization policy."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import UnsupportedDiscretization
from .problem import (
    AdvectionLeft,
    AdvectionRight,
    BCKind,
    Heat,
    LinearSchrodinger,
    ProblemSpec,
    Side,
    StencilKind as S,
)


@dataclass(frozen=True)
class DispersionModel:
    """Rate ``W(k)`` attached to the lattice mode ``exp(i k n h)``.

    A solution component ``exp(i k n h - W(k) t)`` solves the semidiscrete
    equation away from boundaries. ``symmetries`` are maps ``nu`` with
    ``W(nu(k)) = W(k)``.
    """

    equation: object
    stencil: S
    h: float
    W: Callable
    symmetries: Tuple[Callable, ...]
    continuum: Callable

    def __call__(self, k):
        return self.W(np.asarray(k, dtype=complex))


def _sqrt_cut_positive_real(z):
    # square root with its branch cut on the positive real axis:
    # arg(z) taken in [0, 2*pi), so the result has Im >= 0
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    theta = np.mod(np.angle(z), 2 * np.pi)
    return np.sqrt(r) * np.exp(0.5j * theta)


def make_dispersion(equation, stencil: S, h: float) -> DispersionModel:
    """Dispersion model for a supported (equation, stencil) pair."""
    eq = equation
    ident = lambda k: np.asarray(k, dtype=complex)
    neg = lambda k: -np.asarray(k, dtype=complex)

    if isinstance(eq, (AdvectionRight, AdvectionLeft)):
        c = eq.c
        # AdvectionLeft with backward stencils is the mirror image of
        # AdvectionRight with forward stencils; x -> L - x maps k -> -k.
        sgn = 1.0 if isinstance(eq, AdvectionRight) else -1.0
        fwd = {S.FORWARD_O1: S.FORWARD_O1, S.FORWARD_O2: S.FORWARD_O2}
        bwd = {S.BACKWARD_O1: S.FORWARD_O1, S.BACKWARD_O2: S.FORWARD_O2}
        table = fwd if sgn > 0 else bwd
        if stencil not in table:
            raise UnsupportedDiscretization(f"{stencil.value} is not implemented for {eq.name}")
        base = table[stencil]

        if base is S.FORWARD_O1:

            def W(k):
                return -c * np.expm1(1j * sgn * np.asarray(k, dtype=complex) * h) / h

            syms = (ident,)
        else:

            def W(k):
                # 3 - 4z + z^2 = (1 - z)(3 - z), factored to avoid cancellation
                ikh = 1j * sgn * np.asarray(k, dtype=complex) * h
                return -c * np.expm1(ikh) * (3 - np.exp(ikh)) / (2 * h)

            def nu1(k):
                z = np.exp(1j * sgn * np.asarray(k, dtype=complex) * h)
                return sgn * np.log(4 - z) / (1j * h)

            syms = (ident, nu1)
        cont = lambda k: -sgn * c * 1j * np.asarray(k, dtype=complex)
        return DispersionModel(eq, stencil, h, W, syms, cont)

    if isinstance(eq, (Heat, LinearSchrodinger)):
        alpha = 1.0 if isinstance(eq, Heat) else 0.5j
        if stencil is S.CENTERED_O2:

            def W(k):
                s = np.sin(0.5 * np.asarray(k, dtype=complex) * h)
                return alpha * 4 * s * s / h**2

            syms = (ident, neg)
        elif stencil is S.CENTERED_O4 and isinstance(eq, Heat):

            def W(k):
                # (z^-2 - 16 z^-1 + 30 - 16 z + z^2)/12 written in s = sin(kh/2)
                s2 = np.sin(0.5 * np.asarray(k, dtype=complex) * h) ** 2
                return 4 * s2 * (3 + s2) / (3 * h**2)

            def _nu(sign):
                def nu(k):
                    z = np.exp(1j * np.asarray(k, dtype=complex) * h)
                    a = 16 * z - z * z - 1
                    root = _sqrt_cut_positive_real(a * a - 4 * z * z)
                    # the two roots multiply to one; take the well-conditioned
                    # one directly and the other as its reciprocal
                    mine, other = a + sign * root, a - sign * root
                    y = np.where(
                        np.abs(mine) >= np.abs(other),
                        0.5 * mine / z,
                        2 * z / np.where(other == 0, 1, other),
                    )
                    return (1j / h) * np.log(y)

                return nu

            syms = (ident, neg, _nu(+1), _nu(-1))
        else:
            raise UnsupportedDiscretization(f"{stencil.value} is not implemented for {eq.name}")
        cont = lambda k: alpha * np.asarray(k, dtype=complex) ** 2
        return DispersionModel(eq, stencil, h, W, syms, cont)

    raise UnsupportedDiscretization(f"unknown equation {eq!r}")


def growth_region_sign(model: DispersionModel, k) -> np.ndarray:
    """Sign of ``Re(-W(k))``: negative or zero where ``exp(-W T)`` stays bounded."""
    return np.sign(np.real(-model(k)))


# ---------------------------------------------------------------------------
# discretization policy


@dataclass(frozen=True)
class ValidationReport:
    accepted: bool
    reason: str
    message: str = ""

    def to_dict(self):
        return {"accepted": self.accepted, "reason": self.reason, "message": self.message}


_FORWARD = (S.FORWARD_O1, S.FORWARD_O2)
_BACKWARD = (S.BACKWARD_O1, S.BACKWARD_O2)


def validate_discretization(spec: ProblemSpec) -> ValidationReport:
    """Check that the stencil/boundary pairing admits a closed solution.

    Never raises; rejection is reported with a reason code.
    """
    eq, st = spec.equation, spec.stencil
    kinds = {b.side: b.kind for b in spec.bcs}
    if len(kinds) != len(spec.bcs):
        return ValidationReport(False, "duplicate-boundary", "two conditions on one side")

    if isinstance(eq, (AdvectionRight, AdvectionLeft)):
        inflow = Side.RIGHT if isinstance(eq, AdvectionRight) else Side.LEFT
        natural = _FORWARD if isinstance(eq, AdvectionRight) else _BACKWARD
        if st in (S.CENTERED_O2, S.CENTERED_O4):
            return ValidationReport(
                False,
                "no-closing-relation",
                "centered advection on a finite interval leaves more unknown boundary "
                "transforms than the global relation can remove",
            )
        if st not in natural:
            return ValidationReport(
                False, "unnatural-stencil", "stencil must point into the inflow boundary"
            )
        if kinds != {inflow: BCKind.DIRICHLET}:
            return ValidationReport(
                False,
                "inflow-boundary-mismatch",
                f"advection needs exactly one Dirichlet condition at the {inflow.value} end",
            )
        return ValidationReport(True, "ok")

    if isinstance(eq, (Heat, LinearSchrodinger)):
        ok_stencils = (S.CENTERED_O2, S.CENTERED_O4) if isinstance(eq, Heat) else (S.CENTERED_O2,)
        if st not in ok_stencils:
            return ValidationReport(
                False, "unsupported-discretization", f"{st.value} not available for {eq.name}"
            )
        pair = (kinds.get(Side.LEFT), kinds.get(Side.RIGHT))
        if pair == (BCKind.DIRICHLET, BCKind.DIRICHLET):
            return ValidationReport(True, "ok")
        if pair == (BCKind.NEUMANN, BCKind.NEUMANN):
            return ValidationReport(True, "ok")
        return ValidationReport(
            False, "boundary-pair-mismatch", "need Dirichlet or Neumann data at both ends"
        )

    return ValidationReport(False, "unsupported-discretization", f"unknown equation {eq!r}")


def require_valid(spec: ProblemSpec) -> None:
    rep = validate_discretization(spec)
    if not rep.accepted:
        raise UnsupportedDiscretization(rep.message or rep.reason, code=rep.reason)
