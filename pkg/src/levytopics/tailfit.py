"""Heavy-tailed fits of topic similarity spectra with AIC / Akaike-weight selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from .lwtg import Topic
from .simgraph import KnnGraph

FAMILIES = ("exponentiated-weibull", "rayleigh", "weibull", "lognormal", "pareto", "power-law")
N_PARAMS = {
    "exponentiated-weibull": 3,
    "rayleigh": 1,
    "weibull": 2,
    "lognormal": 2,
    "pareto": 1,
    "power-law": 1,
}
MIN_SAMPLES = 5
N_RESTARTS = 8
XTOL = 1e-6


class FitError(ValueError):
    pass


@dataclass
class FitResult:
    family: str
    params: dict[str, float]
    loglik: float
    aic: float
    akaike_weight: float = float("nan")
    n: int = 0
    degenerate: bool = False


@dataclass
class BestFit:
    ranked: list[FitResult]
    excluded: dict[str, str] = field(default_factory=dict)
    low_confidence: bool = False
    degenerate: bool = False

    @property
    def best(self) -> FitResult | None:
        return self.ranked[0] if self.ranked else None


@dataclass(frozen=True)
class SimilaritySpectrum:
    topic_id: int
    values: np.ndarray
    inter_values: np.ndarray


def spectrum(topic: Topic | Iterable[int], graph: KnnGraph, topic_id: int = 0) -> SimilaritySpectrum:
    """Affinities touching a topic: intra (both ends inside) and inter (one end)."""
    members = topic.members if isinstance(topic, Topic) else tuple(topic)
    inside = np.zeros(graph.n, dtype=bool)
    inside[list(members)] = True
    src, dst, w = graph.edge_arrays()
    a, b = inside[src], inside[dst]
    keep = w > 0
    intra = np.sort(w[a & b & keep])[::-1]
    inter = np.sort(w[(a ^ b) & keep])[::-1]
    return SimilaritySpectrum(topic_id, intra, inter)


# -- log densities ----------------------------------------------------------

def _weibull_logpdf(x, k, lam):
    z = x / lam
    return math.log(k) - math.log(lam) + (k - 1.0) * np.log(z) - z**k


def _expweibull_logpdf(x, alpha, k, lam):
    z = (x / lam) ** k
    return math.log(alpha) + _weibull_logpdf(x, k, lam) + (alpha - 1.0) * np.log(-np.expm1(-z))


def loglik(family: str, x, params: dict[str, float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    p = params
    if family == "rayleigh":
        s2 = p["sigma"] ** 2
        return float(np.sum(np.log(x / s2) - x**2 / (2 * s2)))
    if family == "lognormal":
        lx = np.log(x)
        s = p["sigma"]
        return float(np.sum(-lx - math.log(s * math.sqrt(2 * math.pi)) - (lx - p["mu"]) ** 2 / (2 * s * s)))
    if family in ("pareto", "power-law"):
        al, a = p["alpha"], p["a"]
        if np.any(x < a):
            return -math.inf
        return float(np.sum(math.log(al) + al * math.log(a) - (al + 1) * np.log(x)))
    if family == "weibull":
        return float(np.sum(_weibull_logpdf(x, p["k"], p["lambda"])))
    if family == "exponentiated-weibull":
        return float(np.sum(_expweibull_logpdf(x, p["alpha"], p["k"], p["lambda"])))
    raise FitError(f"unknown family {family!r}")


# -- parameter boxes for the numerical families ------------------------------

@dataclass(frozen=True)
class Box:
    names: tuple[str, ...]
    lo: np.ndarray
    hi: np.ndarray
    log: tuple[bool, ...]

    def to_params(self, u) -> dict[str, float]:
        out = {}
        for name, ui, lo, hi, lg in zip(self.names, u, self.lo, self.hi, self.log):
            ui = min(max(float(ui), 0.0), 1.0)
            out[name] = math.exp(math.log(lo) + ui * (math.log(hi) - math.log(lo))) if lg else lo + ui * (hi - lo)
        return out


def param_box(family: str, x) -> Box:
    """Search box for the numerically fitted families.

    Weibull keeps its shape below 1; the exponentiated Weibull keeps alpha >= 1.
    The scale range spans three decades either side of the data.
    """
    x = np.asarray(x, dtype=np.float64)
    lam_lo, lam_hi = float(x.min()) * 1e-3, float(x.max()) * 1e3
    if family == "weibull":
        return Box(("k", "lambda"), np.array([0.02, lam_lo]), np.array([1.0 - 1e-6, lam_hi]), (True, True))
    if family == "exponentiated-weibull":
        return Box(
            ("alpha", "k", "lambda"),
            np.array([1.0, 0.02, lam_lo]),
            np.array([100.0, 20.0, lam_hi]),
            (True, True, True),
        )
    raise FitError(f"{family} has no numerical box")


def _maximize(nll: Callable[[np.ndarray], float], dim: int) -> np.ndarray:
    # coarse screen, then Nelder-Mead from the best distinct screen points
    screen = qmc.Halton(d=dim, scramble=False).random(64 * dim + 1)[1:]
    vals = np.array([nll(u) for u in screen])
    starts = screen[np.argsort(vals, kind="stable")[:N_RESTARTS]]
    bounds = [(0.0, 1.0)] * dim
    best_u, best_v = None, math.inf
    for u0 in starts:
        res = optimize.minimize(
            nll,
            u0,
            method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": XTOL, "fatol": XTOL, "maxiter": 600 * dim, "initial_simplex": _simplex(u0)},
        )
        if res.fun < best_v:
            best_u, best_v = res.x, res.fun
    return np.clip(best_u, 0.0, 1.0)


def _simplex(u0, step=0.05):
    dim = u0.size
    pts = [u0.copy()]
    for i in range(dim):
        p = u0.copy()
        p[i] = p[i] + step if p[i] + step <= 1.0 else p[i] - step
        pts.append(p)
    return np.array(pts)


def _check(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size < MIN_SAMPLES:
        raise FitError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise FitError("samples must be finite and > 0")
    return x


def fit_mle(samples, family: str) -> FitResult:
    """Maximum-likelihood fit of one family.

    Rayleigh, lognormal, Pareto and power law (fitted as Pareto with ``a`` at
    the sample minimum) are closed form. Weibull and exponentiated Weibull
    are maximised numerically inside :func:`param_box`.
    """
    x = _check(samples)
    n = x.size
    p = N_PARAMS.get(family)
    if p is None:
        raise FitError(f"unknown family {family!r}")
    degenerate = False
    if family == "rayleigh":
        params = {"sigma": math.sqrt(float(np.sum(x * x)) / (2 * n))}
    elif family == "lognormal":
        lx = np.log(x)
        mu = float(np.mean(lx))
        sigma = math.sqrt(float(np.mean((lx - mu) ** 2)))
        params = {"mu": mu, "sigma": sigma}
        if sigma <= 1e-12 * max(1.0, abs(mu)):
            degenerate = True
    elif family in ("pareto", "power-law"):
        a = float(x.min())
        s = float(np.sum(np.log(x / a)))
        if s <= 0:
            raise FitError(f"{family}: constraint 0 < a <= min(x) leaves no finite alpha (all samples equal a)")
        params = {"alpha": n / s, "a": a}
    else:
        box = param_box(family, x)

        def nll(u):
            v = loglik(family, x, box.to_params(u))
            return -v if np.isfinite(v) else 1e300

        params = box.to_params(_maximize(nll, len(box.names)))
    if degenerate:
        ll = math.inf
    else:
        ll = loglik(family, x, params)
    return FitResult(family, params, ll, 2 * p - 2 * ll, n=n, degenerate=degenerate)


def akaike_weights(aics: Sequence[float]) -> np.ndarray:
    """w_i = exp(-delta_i / 2) / sum_j exp(-delta_j / 2), delta_i = AIC_i - min AIC."""
    a = np.asarray(aics, dtype=np.float64)
    if a.size == 0 or not np.all(np.isfinite(a)):
        raise FitError("need at least one finite AIC")
    rel = np.exp(-(a - a.min()) / 2.0)
    return rel / rel.sum()


def best_fit(samples, families: Sequence[str] = FAMILIES) -> BestFit:
    """Fit every family, weight the feasible ones jointly and rank by weight."""
    x = _check(samples)
    fits: list[FitResult] = []
    excluded: dict[str, str] = {}
    degenerate = bool(np.ptp(x) == 0)
    for fam in families:
        try:
            r = fit_mle(x, fam)
        except FitError as exc:
            excluded[fam] = str(exc)
            continue
        if r.degenerate or not math.isfinite(r.aic):
            excluded[fam] = "degenerate fit"
            degenerate = True
            continue
        fits.append(r)
    if fits:
        for r, w in zip(fits, akaike_weights([r.aic for r in fits])):
            r.akaike_weight = float(w)
    order = {f: i for i, f in enumerate(families)}
    fits.sort(key=lambda r: (-r.akaike_weight, order[r.family]))
    return BestFit(fits, excluded, low_confidence=len(fits) < 2, degenerate=degenerate)


def grid_scan(samples, family: str, n_points: int = 10_000) -> tuple[float, dict[str, float]]:
    """Best log-likelihood over a regular grid of ``param_box`` (reference check)."""
    x = _check(samples)
    box = param_box(family, x)
    dim = len(box.names)
    per = max(2, int(round(n_points ** (1.0 / dim))))
    axes = np.meshgrid(*[np.linspace(0, 1, per)] * dim, indexing="ij")
    pts = np.stack([a.ravel() for a in axes], axis=1)
    best, best_p = -math.inf, {}
    for u in pts:
        prm = box.to_params(u)
        v = loglik(family, x, prm)
        if v > best:
            best, best_p = v, prm
    return best, best_p
