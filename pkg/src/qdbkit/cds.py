"""Two-Kraus cyclic channel family on ``C^d`` built from a reflection.

Given a dimension ``d``, a reflection offset ``a0`` (``s(a) = a0 - a`` mod
``d``), phases ``eta_a`` and interior parameters ``x``, the family consists
of the channel with Kraus operators

* ``V1 = sum_a sqrt(p_a) e_(a+1) e_a^H`` and
* ``V2 = j^(-1)(V1^H)``,

where ``J = K sum_a eta_a e_(s(a-1)) e_a^H`` and ``K`` is either complex
conjugation (anti-unitary case) or the identity (unitary case).  The
probabilities ``p`` are fixed by ``x`` through the parametrisation in
:func:`build_p`.  Every member is unital with the maximally mixed state as
invariant state and maps ``e_a e_b^H`` to ``C_ab e_(a-1) e_(b-1)^H``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .channel import QuantumChannel
from .errors import BadParameters, PhaseExtractionFailed, SingularCase, UnknownPreset
from .symmetry import SymmetryOp, extract_eta


def root_of_unity(d: int, k: float) -> complex:
    """``exp(2 pi i k / d)``; ``k`` may be fractional."""
    return complex(np.exp(2j * np.pi * k / d))


def interior_size(d: int, a0: int) -> int:
    """Number of free interior parameters for ``(d, a0)``."""
    if d % 2 == 1:
        return (d - 1) // 2
    if a0 % 2 == 0:
        if d == 2:
            raise SingularCase("d = 2 with even a0 has no admissible parameters")
        return (d - 2) // 2
    return d // 2


def build_p(d: int, a0: int, x: Sequence[float]) -> np.ndarray:
    """Probabilities ``p_a`` from interior parameters ``x_1..x_m``.

    Pairs of indices symmetric about a centre get ``x_k^2`` and
    ``1 - x_k^2``; the centres (one when ``d`` is odd, two when ``d`` and
    ``a0`` are even, none otherwise) get ``1/2``.

    Raises
    ------
    BadParameters
        If ``x`` has the wrong length or leaves ``[0, 1]``.
    SingularCase
        For ``d = 2`` with even ``a0``.
    """
    if d < 2:
        raise BadParameters("dimension must be at least 2")
    a0 = a0 % d
    m = interior_size(d, a0)
    x = np.asarray(x, dtype=float)
    if x.shape != (m,):
        raise BadParameters(f"expected {m} interior parameters for d={d}, a0={a0}, got {x.size}")
    if np.any(x < 0) or np.any(x > 1):
        raise BadParameters("interior parameters must lie in [0, 1]")
    p = np.full(d, np.nan)
    x2 = x**2
    if d % 2 == 1:
        centre = (a0 + d) // 2 if a0 % 2 == 1 else a0 // 2
        p[centre % d] = 0.5
        for k in range(1, m + 1):
            p[(centre + k) % d] = x2[k - 1]
            p[(centre - k) % d] = 1.0 - x2[k - 1]
    elif a0 % 2 == 0:
        c1, c2 = a0 // 2, (a0 + d) // 2
        p[c1 % d] = 0.5
        p[c2 % d] = 0.5
        for k in range(1, m + 1):
            p[(c1 + k) % d] = x2[k - 1]
            p[(c1 - k) % d] = 1.0 - x2[k - 1]
    else:
        lo, hi = (a0 - 1) // 2, (a0 + 1) // 2
        for k in range(1, m + 1):
            p[(lo + k) % d] = x2[k - 1]
            p[(hi - k) % d] = 1.0 - x2[k - 1]
    assert not np.any(np.isnan(p))
    return p


@dataclass(frozen=True)
class CdsParams:
    """Parameters of a family member.

    Attributes
    ----------
    d : int
        Dimension.
    a0 : int
        Reflection offset.
    x : tuple of float
        Interior parameters.
    eta : tuple of complex
        Phases ``eta_0 .. eta_(d-1)`` of unit modulus.
    antiunitary_K : bool
        Whether ``K`` is complex conjugation.
    """

    d: int
    a0: int
    x: tuple
    eta: tuple
    antiunitary_K: bool = True

    def __post_init__(self):
        object.__setattr__(self, "a0", int(self.a0) % int(self.d))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "eta", tuple(complex(v) for v in self.eta))
        if len(self.eta) != self.d:
            raise BadParameters(f"expected {self.d} phases, got {len(self.eta)}")
        if any(abs(abs(v) - 1.0) > 1e-12 for v in self.eta):
            raise BadParameters("phases must have unit modulus")
        build_p(self.d, self.a0, self.x)

    @property
    def p(self) -> np.ndarray:
        return build_p(self.d, self.a0, self.x)

    def reflect(self, a: int) -> int:
        return (self.a0 - a) % self.d


def symmetry(params: CdsParams) -> SymmetryOp:
    """The symmetry ``J = K sum_a eta_a e_(s(a-1)) e_a^H``."""
    d = params.d
    W = np.zeros((d, d), dtype=np.complex128)
    for a in range(d):
        W[params.reflect(a - 1), a] = params.eta[a]
    if params.antiunitary_K:
        return SymmetryOp(np.conj(W), True)
    return SymmetryOp(W, False)


def kraus_pair(params: CdsParams) -> tuple[np.ndarray, np.ndarray]:
    """The two Kraus operators ``V1`` and ``V2 = j^(-1)(V1^H)``."""
    d = params.d
    V1 = np.zeros((d, d), dtype=np.complex128)
    for a, pa in enumerate(params.p):
        V1[(a + 1) % d, a] = np.sqrt(pa)
    V2 = symmetry(params).inverse_morphism(V1.conj().T)
    return V1, V2


def build(params: CdsParams) -> QuantumChannel:
    """The channel with Kraus operators ``V1, V2``."""
    V1, V2 = kraus_pair(params)
    return QuantumChannel([V1, V2])


def coefficient(params: CdsParams, a: int, b: int) -> complex:
    """Closed-form ``C_ab`` with ``Phi(e_a e_b^H) = C_ab e_(a-1) e_(b-1)^H``.

    ``C_ab = sqrt(p_(a-1) p_(b-1)) + g_a conj(g_b) sqrt(p_s(a-1) p_s(b-1))``
    with ``g_a = eta_a conj(eta_(a-1))``; the phase factor is the same for
    unitary and anti-unitary ``K``.
    """
    d = params.d
    p, eta = params.p, params.eta
    g_a = eta[a % d] * np.conj(eta[(a - 1) % d])
    g_b = eta[b % d] * np.conj(eta[(b - 1) % d])
    phase = g_a * np.conj(g_b)
    sa, sb = params.reflect(a - 1), params.reflect(b - 1)
    return complex(np.sqrt(p[(a - 1) % d] * p[(b - 1) % d]) + phase * np.sqrt(p[sa] * p[sb]))


def phimat(params: CdsParams) -> np.ndarray:
    """Matrix of coefficients ``C_ab``."""
    d = params.d
    return np.array([[coefficient(params, a, b) for b in range(d)] for a in range(d)])


class QdbPrediction(NamedTuple):
    """Closed-form detailed-balance prediction.

    ``theta[a] = eta#_(s(a-1)) eta_a`` are the diagonal entries of ``J^2``;
    detailed balance holds exactly when ``theta[a] = zeta * eta^a`` with
    ``eta^d = 1``, and then ``Phi(J^2) = eta J^2``.
    """

    holds: bool
    eta: complex | None
    zeta: complex | None
    theta: np.ndarray


def predicted_qdb(params: CdsParams, tol: float = 1e-9) -> QdbPrediction:
    """Detailed-balance prediction from the phases alone."""
    d = params.d
    sharp = np.conj if params.antiunitary_K else (lambda z: z)
    theta = np.array([sharp(params.eta[params.reflect(a - 1)]) * params.eta[a] for a in range(d)])
    try:
        eta, zeta = extract_eta(theta, d, tol)
    except PhaseExtractionFailed:
        return QdbPrediction(False, None, None, theta)
    return QdbPrediction(True, eta, zeta, theta)


# ----------------------------------------------------------------------------
# presets


def _tilted_phases(d: int, split: int, b: int) -> tuple:
    """``eta_a = 1`` for ``a <= split`` and ``exp(2 pi i 3b(a+1/2)/d)`` above."""
    return tuple(1.0 if a <= split else root_of_unity(d, 3 * b * (a + 0.5)) for a in range(d))


def _check_x(x, m: int, default: Sequence[float]) -> tuple:
    if x is None:
        return tuple(default)
    x = tuple(float(v) for v in x)
    if len(x) != m:
        raise BadParameters(f"preset needs {m} interior parameters, got {len(x)}")
    return x


def preset(name: str, x: Sequence[float] | None = None, **kw) -> CdsParams:
    """Named family members.

    ``fig2a``
        ``d=5, a0=3``, trivial phases, anti-unitary; detailed balance with
        ``eta = 1``.
    ``fig2b``
        ``d=6, a0=4``, phases tilted above the centre (keyword ``b``,
        default 1), anti-unitary; ``eta = exp(2 pi i 3b/6)``.
    ``table1``
        ``d = 3p`` (keyword ``p``, even, default 4), ``a0 = d - 2``, tilted
        phases with ``b = 1``, anti-unitary, boundary probabilities set by
        keyword ``s`` (default 0.3); ``eta = exp(2 pi i 3/d)``.
    ``fig5``
        ``table1`` with ``p = 4``.
    ``fig4a``
        ``d=6, a0=5``, phases ``(1, xi, xi^2, xi^3, xi^2, xi)``,
        anti-unitary; ``J^2 = 1``.
    ``fig4b``
        ``d=6, a0=5``, phases ``(1, i, 1, i, 1, i)``, unitary; ``eta = -1``.
    ``counterexample``
        ``fig4b`` with ``p_0 = 0`` and ``p_a = 2^(-a)`` on the lower half,
        see :func:`counterexample_params`.

    Parameters
    ----------
    name : str
        Preset name.
    x : sequence of float, optional
        Interior parameters overriding the preset defaults.
    """
    if name == "fig2a":
        d, a0 = 5, 3
        return CdsParams(d, a0, _check_x(x, 2, (0.6, 0.8)), (1.0,) * d, True)
    if name == "fig2b":
        d, a0, b = 6, 4, int(kw.get("b", 1))
        return CdsParams(d, a0, _check_x(x, 2, (0.6, 0.8)), _tilted_phases(d, 2, b), True)
    if name in ("table1", "fig5"):
        p = 4 if name == "fig5" else int(kw.get("p", 4))
        s = float(kw.get("s", 0.3))
        if p < 2 or p % 2:
            raise BadParameters("table1 needs an even p >= 2")
        if not 0.0 <= s <= 1.0:
            raise BadParameters("s must lie in [0, 1]")
        d = 3 * p
        a0 = d - 2
        dhat = (d - 2) // 2
        default = (0.0,) * (dhat - 1) + (float(np.sqrt(1.0 - s)),)
        return CdsParams(d, a0, _check_x(x, dhat, default), _tilted_phases(d, dhat, 1), True)
    if name == "fig4a":
        d = 6
        xi = root_of_unity(6, 1)
        eta = (1.0, xi, xi**2, xi**3, xi**2, xi)
        return CdsParams(d, 5, _check_x(x, 3, (0.5, 0.6, 0.8)), eta, True)
    if name == "fig4b":
        d = 6
        eta = (1.0, 1j, 1.0, 1j, 1.0, 1j)
        return CdsParams(d, 5, _check_x(x, 3, (0.5, 0.6, 0.8)), eta, False)
    if name == "counterexample":
        # a0 = 5 is odd, d even: p_(2+k) = x_k^2, p_(3-k) = 1 - x_k^2
        # p_0 = 0 -> x_3 = 1, p_1 = 1/2 -> x_2^2 = 1/2, p_2 = 1/4 -> x_1^2 = 3/4
        default = (float(np.sqrt(0.75)), float(np.sqrt(0.5)), 1.0)
        return preset("fig4b", x=_check_x(x, 3, default))
    raise UnknownPreset(f"unknown preset {name!r}")


PRESETS = ("fig2a", "fig2b", "table1", "fig5", "fig4a", "fig4b", "counterexample")


def counterexample_params(d: int = 6) -> CdsParams:
    """Unitary member with ``p_0 = 0`` and ``p_a = 2^(-a)`` on the lower half.

    Uses the ``fig4b`` phases (``d = 6``, ``a0 = 5``); it satisfies detailed
    balance for a unitary ``J`` with ``eta = -1`` and for no unitary ``J``
    with ``eta = 1``.
    """
    if d != 6:
        raise BadParameters("only d = 6 is provided")
    return preset("counterexample")
