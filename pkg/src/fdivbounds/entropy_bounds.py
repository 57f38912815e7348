"""Global-entropy minimax lower bounds.

A bound here needs only two functions of the problem: a packing lower bound
eta -> N(eta) for the parameter space in the loss metric, and a covering
upper bound eps -> M(eps) for the model class measured in (the square root
of) a divergence.  For a point (eta, eps) inside the profile's validity
region the risk bound is loss(eta/2) * (1 - star) with star depending on the
divergence kind; the final bound is the grid supremum over (eta, eps).

Analytic models (Gaussian location, uniform scale/shift, the d-dimensional
Gaussian ball, and support-function estimation) ship with their closed-form
divergences and entropy profiles.  Constants the source analysis leaves
symbolic must be supplied; omitted ones default to 1.0 and are flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .report import BoundReport

ENTROPY_KINDS = ("kl", "chi2", "power_l")
PROFILE_MODELS = (
    "gaussian_1d",
    "uniform_scale",
    "uniform_shift",
    "gaussian_ball",
    "support_function",
)


@dataclass(frozen=True)
class LossSpec:
    """A nondecreasing loss of the metric distance, checked on a grid."""

    fn: Callable[[float], float]
    name: str = "loss"

    def __post_init__(self):
        grid = np.linspace(0.0, 8.0, 65)
        vals = [self.fn(float(g)) for g in grid]
        if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
            raise ValueError(f"loss {self.name!r} is not nondecreasing")
        if any(v < 0 for v in vals):
            raise ValueError(f"loss {self.name!r} takes negative values")

    def __call__(self, x: float) -> float:
        return float(self.fn(x))


def power_loss(exponent: float = 2.0) -> LossSpec:
    return LossSpec(lambda x: x**exponent, name=f"power{exponent:g}")


IDENTITY_LOSS = power_loss(1.0)
SQUARED_LOSS = power_loss(2.0)


@dataclass(frozen=True)
class EntropyProfile:
    """Packing/covering bounds with their validity regions.

    ``packing_lower`` maps eta to N(eta) >= 1 on (0, eta_max];
    ``covering_upper`` maps eps to M(eps) >= 1 where ``covering_valid``
    holds.  ``kind`` records which divergence the covering is measured in.
    ``defaulted`` lists constants that silently fell back to 1.0.
    """

    packing_lower: Callable[[float], float]
    eta_max: float
    covering_upper: Callable[[float], float]
    covering_valid: Callable[[float], bool]
    kind: str
    constants: dict = field(default_factory=dict)
    defaulted: tuple[str, ...] = ()

    def packing(self, eta: float) -> float:
        if not 0.0 < eta <= self.eta_max:
            raise ValueError(f"eta={eta!r} outside (0, {self.eta_max}]")
        return float(self.packing_lower(eta))

    def covering(self, eps: float) -> float:
        if eps <= 0.0 or not self.covering_valid(eps):
            raise ValueError(f"eps={eps!r} outside the covering validity range")
        return float(self.covering_upper(eps))


def entropy_risk_bound(
    kind: str,
    profile: EntropyProfile,
    loss: LossSpec,
    eta: float,
    eps: float,
    l: Optional[float] = None,
) -> float:
    """loss(eta/2) * (1 - star) at a single grid point, clamped at 0.

    star per kind, with N = N(eta), M = M(eps):
        kl       (log 2 + log M + eps^2) / log N        (needs N > 1)
        chi2     1/N + sqrt((1 + eps^2) M / N)
        power_l  ((1 + (1 + eps^2) M^(l-1)) / N^(l-1))^(1/l)
    """
    n = profile.packing(eta)
    m = profile.covering(eps)
    if n < 1.0 or m < 1.0:
        raise ValueError("profile produced a count below 1")
    if kind == "kl":
        if n <= 1.0:
            raise ValueError("kl kind needs N(eta) > 1")
        star = (math.log(2.0) + math.log(m) + eps**2) / math.log(n)
    elif kind == "chi2":
        star = 1.0 / n + math.sqrt((1.0 + eps**2) * m / n)
    elif kind == "power_l":
        if l is None or l <= 1.0 or l == 2.0:
            raise ValueError("power_l kind needs l > 1, l != 2")
        star = (
            1.0 / n ** (l - 1.0)
            + (1.0 + eps**2) * m ** (l - 1.0) / n ** (l - 1.0)
        ) ** (1.0 / l)
    else:
        raise ValueError(f"unknown kind {kind!r}; choose from {ENTROPY_KINDS}")
    return loss(eta / 2.0) * max(0.0, 1.0 - star)


def entropy_bound_factor(
    kind: str,
    profile: EntropyProfile,
    eta: float,
    eps: float,
    l: Optional[float] = None,
) -> float:
    """The unclamped parenthetical factor (1 - star); negative means the
    grid point is vacuous.  Useful for diagnosing rate behavior."""
    n = profile.packing(eta)
    m = profile.covering(eps)
    if kind == "kl":
        if n <= 1.0:
            raise ValueError("kl kind needs N(eta) > 1")
        return 1.0 - (math.log(2.0) + math.log(m) + eps**2) / math.log(n)
    if kind == "chi2":
        return 1.0 - (1.0 / n + math.sqrt((1.0 + eps**2) * m / n))
    if kind == "power_l":
        if l is None or l <= 1.0 or l == 2.0:
            raise ValueError("power_l kind needs l > 1, l != 2")
        star = (
            1.0 / n ** (l - 1.0)
            + (1.0 + eps**2) * m ** (l - 1.0) / n ** (l - 1.0)
        ) ** (1.0 / l)
        return 1.0 - star
    raise ValueError(f"unknown kind {kind!r}; choose from {ENTROPY_KINDS}")


def optimize_entropy_bound(
    kind: str,
    profile: EntropyProfile,
    loss: LossSpec,
    eta_grid,
    eps_grid,
    l: Optional[float] = None,
) -> BoundReport:
    """Grid supremum of :func:`entropy_risk_bound`.

    Grid points outside the profile validity are skipped; ties break to the
    smallest (eta, eps) so reports are deterministic.
    """
    best = -1.0
    witness = None
    feasible = 0
    for eta in sorted(float(e) for e in eta_grid):
        if not 0.0 < eta <= profile.eta_max:
            continue
        for eps in sorted(float(e) for e in eps_grid):
            if eps <= 0.0 or not profile.covering_valid(eps):
                continue
            try:
                value = entropy_risk_bound(kind, profile, loss, eta, eps, l=l)
            except ValueError:
                continue
            feasible += 1
            if value > best:
                best = value
                witness = (eta, eps)
    if feasible == 0:
        raise ValueError("no grid point lies inside the profile validity region")
    vacuous = best <= 0.0
    inter = {
        "eta": witness[0],
        "eps": witness[1],
        "packing": profile.packing(witness[0]),
        "covering": profile.covering(witness[1]),
        "factor": entropy_bound_factor(kind, profile, witness[0], witness[1], l=l),
        "feasible_grid_points": feasible,
    }
    notes = ()
    if profile.defaulted:
        notes = (
            "profile constants defaulted to 1.0: " + ", ".join(profile.defaulted),
        )
    return BoundReport(
        family=f"entropy_{kind}",
        lower_bound=max(best, 0.0),
        inputs={"kind": kind, "loss": loss.name, "l": l, **profile.constants},
        intermediates=inter,
        vacuous=vacuous,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# Analytic models
# ---------------------------------------------------------------------------


class AnalyticDivergence(NamedTuple):
    kl: Optional[float]
    chi2: float


ANALYTIC_MODELS = ("gaussian_location", "uniform_scale", "uniform_shift")


def analytic_divergence(
    model: str, theta0: float, theta1: float, n: int, sigma: float = 1.0
) -> AnalyticDivergence:
    """Closed-form divergences between n-fold products of the scalar models.

    gaussian_location: unit-variance-sigma normals at theta0, theta1;
        KL = n (theta0-theta1)^2 / (2 sigma^2),
        chi2 = exp(n (theta0-theta1)^2 / sigma^2) - 1.
    uniform_scale: uniforms on [0, theta]; chi2 = (theta1/theta0)^n - 1 for
        theta0 <= theta1 and +inf otherwise; KL = n log(theta1/theta0) on
        the same domain.
    uniform_shift: uniforms on [theta, theta+1].  Any two distinct shifts
        are mutually non-absolutely-continuous, so both divergences between
        members are +inf.  What is finite is the divergence to a widened
        candidate anchored at theta1 <= theta0: the candidate uniform on
        [theta1, theta1 + 1 + 2 e'] with e' = theta0 - theta1 gives
        chi2 = (1 + 2 e')^n - 1 and KL = n log(1 + 2 e'), and those are the
        values returned.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if model == "gaussian_location":
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        gap_sq = (theta0 - theta1) ** 2 / sigma**2
        return AnalyticDivergence(kl=n * gap_sq / 2.0, chi2=math.expm1(n * gap_sq))
    if model == "uniform_scale":
        if theta0 <= 0 or theta1 <= 0:
            raise ValueError("uniform_scale needs positive endpoints")
        if theta0 > theta1:
            return AnalyticDivergence(kl=math.inf, chi2=math.inf)
        ratio = theta1 / theta0
        return AnalyticDivergence(kl=n * math.log(ratio), chi2=ratio**n - 1.0)
    if model == "uniform_shift":
        if theta0 == theta1:
            return AnalyticDivergence(kl=0.0, chi2=0.0)
        widening = theta0 - theta1
        if widening < 0:
            raise ValueError(
                "uniform_shift candidate anchor must sit at or below theta"
            )
        return AnalyticDivergence(
            kl=n * math.log1p(2.0 * widening),
            chi2=(1.0 + 2.0 * widening) ** n - 1.0,
        )
    raise ValueError(f"unknown model {model!r}; choose from {ANALYTIC_MODELS}")


def _pull_constants(params: dict, needed: tuple[str, ...]) -> tuple[dict, tuple]:
    values = {}
    defaulted = []
    for key in needed:
        if key in params:
            values[key] = float(params[key])
        else:
            values[key] = 1.0
            defaulted.append(key)
    extras = set(params) - set(needed)
    if extras:
        raise ValueError(f"unexpected profile parameters: {sorted(extras)}")
    return values, tuple(defaulted)


def builtin_profile(model: str, kind: str = "chi2", **params) -> EntropyProfile:
    """Entropy profiles for the analytic models.

    gaussian_1d(c1, c2, eta0, eps0, n): packing c1/eta for eta <= eta0;
        covering c2 sqrt(n)/eps (kl kind) or c2 sqrt(n)/sqrt(log(1+eps^2))
        (chi2 kind) for eps <= eps0.
    uniform_scale(c1, c3, eta0, eps0, n): covering c3 n / log(1+eps^2).
    uniform_shift(c1, c2, eta0, eps0, n): covering c2/((1+eps^2)^(1/n) - 1).
    gaussian_ball(gamma, sigma, d): fully explicit; packing (gamma/eta)^d,
        covering (3 gamma / (sigma sqrt(log(1+eps^2))))^d valid while
        sigma sqrt(log(1+eps^2)) <= gamma.
    support_function(c_prime, c_dprime, gamma, sigma, eta0, eps0, n, d):
        log-packing c' (gamma/eta)^((d-1)/2); log-covering
        c'' (gamma sqrt(n) / (sigma sqrt(log(1+eps^2))))^((d-1)/2) valid
        while log(1+eps^2) <= n eps0^2 / sigma^2.

    Constants the analysis leaves unnamed default to 1.0 and are recorded in
    ``defaulted`` so reports can flag them.
    """
    if model == "gaussian_1d":
        consts, defaulted = _pull_constants(params, ("c1", "c2", "eta0", "eps0", "n"))
        c1, c2, eta0, eps0, n = (
            consts["c1"],
            consts["c2"],
            consts["eta0"],
            consts["eps0"],
            consts["n"],
        )
        if kind == "kl":
            covering = lambda eps: c2 * math.sqrt(n) / eps
        elif kind == "chi2":
            covering = lambda eps: c2 * math.sqrt(n) / math.sqrt(math.log1p(eps**2))
        else:
            raise ValueError("gaussian_1d profiles exist for kl and chi2 kinds")
        return EntropyProfile(
            packing_lower=lambda eta: c1 / eta,
            eta_max=min(eta0, c1),
            covering_upper=covering,
            covering_valid=lambda eps: eps <= eps0,
            kind=kind,
            constants={"model": model, **consts},
            defaulted=defaulted,
        )
    if model == "uniform_scale":
        consts, defaulted = _pull_constants(params, ("c1", "c3", "eta0", "eps0", "n"))
        c1, c3, eta0, eps0, n = (
            consts["c1"],
            consts["c3"],
            consts["eta0"],
            consts["eps0"],
            consts["n"],
        )
        if kind != "chi2":
            raise ValueError("uniform_scale profile is chi2-kind")
        return EntropyProfile(
            packing_lower=lambda eta: c1 / eta,
            eta_max=min(eta0, c1),
            covering_upper=lambda eps: c3 * n / math.log1p(eps**2),
            covering_valid=lambda eps: eps <= eps0,
            kind="chi2",
            constants={"model": model, **consts},
            defaulted=defaulted,
        )
    if model == "uniform_shift":
        consts, defaulted = _pull_constants(params, ("c1", "c2", "eta0", "eps0", "n"))
        c1, c2, eta0, eps0, n = (
            consts["c1"],
            consts["c2"],
            consts["eta0"],
            consts["eps0"],
            consts["n"],
        )
        if kind != "chi2":
            raise ValueError("uniform_shift profile is chi2-kind")
        return EntropyProfile(
            packing_lower=lambda eta: c1 / eta,
            eta_max=min(eta0, c1),
            covering_upper=lambda eps: c2 / ((1.0 + eps**2) ** (1.0 / n) - 1.0),
            covering_valid=lambda eps: eps <= eps0,
            kind="chi2",
            constants={"model": model, **consts},
            defaulted=defaulted,
        )
    if model == "gaussian_ball":
        consts, defaulted = _pull_constants(params, ("gamma", "sigma", "d"))
        gamma, sigma, d = consts["gamma"], consts["sigma"], consts["d"]
        if gamma <= 0 or sigma <= 0 or d < 1:
            raise ValueError("gaussian_ball needs gamma > 0, sigma > 0, d >= 1")
        if kind != "chi2":
            raise ValueError("gaussian_ball profile is chi2-kind")
        return EntropyProfile(
            packing_lower=lambda eta: (gamma / eta) ** d,
            eta_max=gamma,
            covering_upper=lambda eps: (
                3.0 * gamma / (sigma * math.sqrt(math.log1p(eps**2)))
            )
            ** d,
            covering_valid=lambda eps: sigma * math.sqrt(math.log1p(eps**2))
            <= gamma,
            kind="chi2",
            constants={"model": model, **consts},
            defaulted=defaulted,
        )
    if model == "support_function":
        consts, defaulted = _pull_constants(
            params, ("c_prime", "c_dprime", "gamma", "sigma", "eta0", "eps0", "n", "d")
        )
        cp, cpp = consts["c_prime"], consts["c_dprime"]
        gamma, sigma = consts["gamma"], consts["sigma"]
        eta0, eps0, n, d = consts["eta0"], consts["eps0"], consts["n"], consts["d"]
        if kind != "chi2":
            raise ValueError("support_function profile is chi2-kind")
        half = (d - 1.0) / 2.0
        return EntropyProfile(
            packing_lower=lambda eta: math.exp(cp * (gamma / eta) ** half),
            eta_max=eta0,
            covering_upper=lambda eps: math.exp(
                cpp
                * (gamma * math.sqrt(n) / (sigma * math.sqrt(math.log1p(eps**2))))
                ** half
            ),
            covering_valid=lambda eps: math.log1p(eps**2)
            <= n * eps0**2 / sigma**2,
            kind="chi2",
            constants={"model": model, **consts},
            defaulted=defaulted,
        )
    raise ValueError(f"unknown profile model {model!r}; choose from {PROFILE_MODELS}")


def profile_from_table(
    packing: list, covering: list, kind: str = "chi2"
) -> EntropyProfile:
    """Profile from tabulated [[eta, N], ...] and [[eps, M], ...] pairs with
    log-linear interpolation; validity is the tabulated range."""
    pack = sorted((float(a), float(b)) for a, b in packing)
    cover = sorted((float(a), float(b)) for a, b in covering)
    if not pack or not cover:
        raise ValueError("packing and covering tables must be nonempty")
    if any(a <= 0 or b < 1 for a, b in pack) or any(a <= 0 or b < 1 for a, b in cover):
        raise ValueError("table entries need positive radii and counts >= 1")
    px = np.log([a for a, _ in pack])
    py = np.log([b for _, b in pack])
    cx = np.log([a for a, _ in cover])
    cy = np.log([b for _, b in cover])

    def pack_fn(eta: float) -> float:
        return float(np.exp(np.interp(math.log(eta), px, py)))

    def cover_fn(eps: float) -> float:
        return float(np.exp(np.interp(math.log(eps), cx, cy)))

    return EntropyProfile(
        packing_lower=pack_fn,
        eta_max=pack[-1][0],
        covering_upper=cover_fn,
        covering_valid=lambda eps: cover[0][0] <= eps <= cover[-1][0],
        kind=kind,
        constants={"model": "table"},
    )


class SupportFunctionSchedule(NamedTuple):
    eta: float
    u: float
    eps: float
    c: float


def support_function_schedule(
    n: int, d: int, c_prime: float, c_dprime: float, gamma: float, sigma: float
) -> SupportFunctionSchedule:
    """The (eta, u, eps) schedule for support-function estimation at sample
    size n: eta(n) = c sigma^(4/(d+3)) gamma^((d-1)/(d+3)) n^(-2/(d+3)) with
    c fixed by c^((d-1)/2) = c'/(2 + 2c''), u(n) = (gamma sqrt(n)/sigma)
    ^((d-1)/(d+3)), and eps(n) from log(1+eps^2) = u^2.  No claim is made
    about the risk value itself; the schedule feeds the chi2 entropy bound.
    """
    if d < 2:
        raise ValueError("support-function schedule needs d >= 2")
    if min(n, c_prime, c_dprime, gamma, sigma) <= 0:
        raise ValueError("all schedule parameters must be positive")
    c = (c_prime / (2.0 + 2.0 * c_dprime)) ** (2.0 / (d - 1.0))
    eta = (
        c
        * sigma ** (4.0 / (d + 3.0))
        * gamma ** ((d - 1.0) / (d + 3.0))
        * n ** (-2.0 / (d + 3.0))
    )
    u = (gamma * math.sqrt(n) / sigma) ** ((d - 1.0) / (d + 3.0))
    eps = math.sqrt(math.expm1(u**2))
    return SupportFunctionSchedule(eta=eta, u=u, eps=eps, c=c)
