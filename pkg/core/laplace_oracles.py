"""
Formules fermées dans le domaine de Laplace et comparateurs numériques

Chaque loi exacte ou limite est confrontée ici à sa transformée de
Laplace (double, en t puis en l'inclinaison β) calculée en forme fermée.
"""

import logging
import math
from typing import Callable, Dict, List, NamedTuple, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field

from core.limit_laws import y_law
from core.params import TelegraphParams, V0
from core.special_fn import QuadSpec, integrate
from core.telegraph_laws import _phi, hitting_law, offset_law, origin_law, phi, phi_integral_oracle
from utils.helpers import log_performance
from utils.validators import ChoiceValidator, DomainError, FloatValidator, validate_params

logger = logging.getLogger(__name__)

_ORIENTED = (V0.PLUS, V0.MINUS)


class TransformPoint(BaseModel):
    """Point (s, β) de la double transformée, avec s̃ = s + β"""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    s: float = Field(gt=0)
    beta: float = 0.0

    @computed_field
    @property
    def s_tilde(self) -> float:
        return self.s + self.beta

    def require_positive_tilde(self):
        if self.s_tilde <= 0:
            raise DomainError(f"s̃ = s + β doit être > 0 (reçu {self.s_tilde})", field="beta")

    @property
    def decay_rate(self) -> float:
        """Taux de décroissance garanti de e^{-st} E[e^{-β·}]"""
        return min(self.s, self.s_tilde)


class Lemma33Result(NamedTuple):
    lhs_A: float
    rhs_A: float
    lhs_B: float
    rhs_B: float


class VerificationCheck(BaseModel):
    """Ligne du rapport de vérification"""

    model_config = ConfigDict(populate_by_name=True)

    check: str
    params: Dict[str, float | str]
    lhs: float
    rhs: float
    abs_err: float
    tol: float
    passed: bool = Field(alias="pass")

    @classmethod
    def compare(cls, check: str, params: Dict, lhs: float, rhs: float, tol: float) -> "VerificationCheck":
        err = abs(lhs - rhs)
        return cls(check=check, params=params, lhs=lhs, rhs=rhs, abs_err=err, tol=tol,
                   passed=bool(err <= tol))


def _oriented(v0: V0):
    if v0 not in _ORIENTED:
        raise DomainError("Vitesse initiale + ou - attendue", field="v0")


@validate_params(s=FloatValidator(min_value=0.0, strict_min=True),
                 lambda_T=FloatValidator(min_value=0.0, strict_min=True))
def kappa(s: float, lambda_T: float) -> float:
    """κ(s) = sqrt(s(s + 2λT))"""
    return math.sqrt(s * (s + 2.0 * lambda_T))


def w_origin(tp: TransformPoint, lambda_T: float, v0: V0) -> float:
    """Double transformée de η±_T(0)"""
    tp.require_positive_tilde()
    _oriented(v0)
    s, st = tp.s, tp.s_tilde
    k, kt = kappa(s, lambda_T), kappa(st, lambda_T)
    shared = 2.0 * lambda_T / ((k + s) * (kt + st))
    if v0 is V0.PLUS:
        return 2.0 / (kt + st) + shared
    return 2.0 / (k + s) + shared


def w_offset(xi: float, tp: TransformPoint, lambda_T: float, v0: V0) -> float:
    """
    Double transformée de η±_T(cTξ)

    Args:
        xi: Position réduite ξ = x/(cT)
        tp: Point de transformée
        lambda_T: Produit λ·T
        v0: Signe de la vitesse initiale

    Returns:
        Branche ξ <= 0 ou ξ >= 0 de la solution explicite
    """
    tp.require_positive_tilde()
    _oriented(v0)
    s, beta, st = tp.s, tp.beta, tp.s_tilde
    k, kt = kappa(s, lambda_T), kappa(st, lambda_T)
    denom = s * kt + st * k
    sign = 1.0 if v0 is V0.PLUS else -1.0

    if xi <= 0:
        return -math.exp(k * xi) * (beta / s) / denom * (k + sign * s) + 1.0 / s
    return math.exp(-kt * xi) * (beta / st) / denom * (kt - sign * st) + 1.0 / st


def hitting_laplace(tp: TransformPoint, lambda_T: float, xi: float, v0: V0 = V0.PLUS) -> float:
    """
    Transformée de la densité d'atteinte, T∫e^{-st} Q±(Tt) dt

    Le départ + exclut l'atome balistique; le départ - se déduit du premier
    renversement: E e^{-sT-} = e^{ξκ} λT / (λT + s + κ).
    """
    if tp.beta != 0:
        raise DomainError("hitting_laplace attend β = 0", field="beta")
    if not xi < 0:
        raise DomainError(f"hitting_laplace attend ξ < 0 (reçu {xi})", field="xi")
    _oriented(v0)
    k = kappa(tp.s, lambda_T)
    if v0 is V0.PLUS:
        return math.exp(xi * k) - math.exp((tp.s + lambda_T) * xi)
    return math.exp(xi * k) * lambda_T / (lambda_T + tp.s + k)


def _horizon(rate: float, spec: QuadSpec) -> float:
    """t_max tel que e^{-rate·t_max} = abs_tol·rate"""
    return -math.log(spec.abs_tol * rate) / rate


def _laplace_numeric(expectation: Callable[[float], float], s: float, t_max: float,
                     spec: QuadSpec, breakpoints: Sequence[float] = ()) -> float:
    """∫_0^{t_max} e^{-st} E(t) dt, découpée aux points de rupture"""
    cuts = [0.0] + sorted(b for b in breakpoints if 0.0 < b < t_max) + [t_max]
    return sum(
        integrate(lambda t: math.exp(-s * t) * expectation(t), lo, hi, spec)
        for lo, hi in zip(cuts[:-1], cuts[1:])
    )


def lemma33_check(s: float, beta: float, lambda_T: float, spec: QuadSpec = None) -> Lemma33Result:
    """Transformées de φ_T et de la convolution inclinée, numériques et fermées"""
    spec = spec or QuadSpec()
    tp = TransformPoint(s=s, beta=beta)
    tp.require_positive_tilde()
    k, kt = kappa(s, lambda_T), kappa(tp.s_tilde, lambda_T)
    t_max = _horizon(tp.decay_rate, spec)

    lhs_a = integrate(lambda t: math.exp(-s * t) * _phi(lambda_T * t), 0.0, t_max, spec)

    def tilted_convolution(t):
        return integrate(
            lambda y: np.exp(-beta * y) * _phi(lambda_T * y) * _phi(lambda_T * (t - y)),
            0.0, t, spec,
        )

    lhs_b = _laplace_numeric(tilted_convolution, s, t_max, spec)
    rhs_a = 1.0 / (k + s)
    rhs_b = 1.0 / ((k + s) * (kt + tp.s_tilde))
    return Lemma33Result(float(lhs_a), rhs_a, float(lhs_b), rhs_b)


def lemma41_rhs(a: float, tp: TransformPoint, which: str = "eta") -> float:
    """Double transformée fermée de Y_a(t) (ou de son complément t - Y_a(t))"""
    if a < 0:
        raise DomainError(f"lemma41_rhs attend a >= 0 (reçu {a})", field="a")
    tp.require_positive_tilde()
    s, st = tp.s, tp.s_tilde
    if which == "eta":
        return math.exp(-a * math.sqrt(2.0 * s)) * (1.0 / math.sqrt(s * st) - 1.0 / s) + 1.0 / s
    if which == "complement":
        return math.exp(-a * math.sqrt(2.0 * st)) * (1.0 / math.sqrt(s * st) - 1.0 / st) + 1.0 / st
    raise DomainError(f"Branche inconnue {which}", field="which")


def lemma41_lhs_numeric(a: float, tp: TransformPoint, spec: QuadSpec = None, which: str = "eta",
                        grid_size: int = None) -> float:
    """
    ∫_0^∞ e^{-st} E[e^{-βY_a(t)}] dt par quadrature sur y_law

    Y_a(t) a la loi de t·Y_{a/sqrt t}: l'espérance au temps t est lue sur
    y_law(a/sqrt t), variable dilatée par t. La branche `complement`
    transforme t - Y_a(t).
    """
    if a < 0:
        raise DomainError(f"lemma41_lhs_numeric attend a >= 0 (reçu {a})", field="a")
    if which not in ("eta", "complement"):
        raise DomainError(f"Branche inconnue {which}", field="which")
    spec = spec or QuadSpec()
    tp.require_positive_tilde()
    beta = tp.beta
    complement = which == "complement"
    level_zero = y_law(0.0, grid_size) if a == 0 else None

    def expectation(t: float) -> float:
        law = level_zero if level_zero is not None else y_law(a / math.sqrt(t), grid_size)
        if complement:
            return law.expectation(lambda y: np.exp(-beta * t * (1.0 - y)))
        return law.expectation(lambda y: np.exp(-beta * t * y))

    return float(_laplace_numeric(expectation, tp.s, _horizon(tp.decay_rate, spec), spec))


def origin_transform_numeric(tp: TransformPoint, lambda_T: float, v0: V0, spec: QuadSpec = None,
                             grid_size: int = 128) -> float:
    """Transformée numérique de la loi de η±_{Tt}(0), la loi étant reconstruite à chaque t"""
    _oriented(v0)
    tp.require_positive_tilde()
    spec = spec or QuadSpec()
    beta = tp.beta

    def expectation(t: float) -> float:
        law = origin_law(TelegraphParams(lam=lambda_T, c=1.0, T=t, v0=v0), grid_size)
        return law.expectation(lambda y: np.exp(-beta * t * y))

    return float(_laplace_numeric(expectation, tp.s, _horizon(tp.decay_rate, spec), spec))


def offset_transform_numeric(xi: float, tp: TransformPoint, lambda_T: float, v0: V0,
                             spec: QuadSpec = None, grid_size: int = 64) -> float:
    """Transformée numérique de la loi de η±_{Tt}(cTξ) (unités réduites c = T = 1)"""
    _oriented(v0)
    tp.require_positive_tilde()
    if xi == 0:
        return origin_transform_numeric(tp, lambda_T, v0, spec, grid_size)
    spec = spec or QuadSpec(abs_tol=1e-8, rel_tol=1e-6)
    law_spec = spec.loosened(0.01).model_copy(update={"max_subdivisions": 2000})
    beta = tp.beta

    def expectation(t: float) -> float:
        law = offset_law(TelegraphParams(lam=lambda_T, c=1.0, T=t, v0=v0), xi, grid_size, law_spec)
        return law.expectation(lambda y: np.exp(-beta * t * y))

    return float(_laplace_numeric(expectation, tp.s, _horizon(tp.decay_rate, spec), spec,
                                  breakpoints=(abs(xi),)))


def hitting_transform_numeric(tp: TransformPoint, lambda_T: float, xi: float, v0: V0,
                              spec: QuadSpec = None) -> float:
    """∫ e^{-su} Q±(u) du pour λ = λT, c = T = 1 et x = ξ"""
    spec = spec or QuadSpec()
    law = hitting_law(TelegraphParams(lam=lambda_T, c=1.0, T=1.0, v0=v0), xi)
    t_end = law.t0 + _horizon(tp.s, spec)
    return float(integrate(lambda u: math.exp(-tp.s * u) * law.density(u), law.t0, t_end, spec,
                           singular_endpoints=(True, False)))


# Suites de vérification

SUITES = ("phi", "lemma33", "hitting", "lemma41", "collapse", "origin", "offset")


def _suite_phi(spec: QuadSpec) -> List[VerificationCheck]:
    checks = []
    for lambda_T in (0.1, 1.0, 10.0, 1000.0):
        for t in (0.1, 0.5, 1.0):
            checks.append(VerificationCheck.compare(
                "phi_integral", {"lambda_T": lambda_T, "t": t},
                phi_integral_oracle(lambda_T, t, spec), phi(lambda_T, t), 1e-8,
            ))
    return checks


def _suite_lemma33(spec: QuadSpec) -> List[VerificationCheck]:
    checks = []
    for s, beta, lambda_T in ((1.0, 0.0, 1.0), (1.0, 1.0, 1.0), (0.5, 2.0, 2.0), (2.0, -0.5, 10.0)):
        result = lemma33_check(s, beta, lambda_T, spec)
        params = {"s": s, "beta": beta, "lambda_T": lambda_T}
        checks.append(VerificationCheck.compare("phi_transform", params, result.lhs_A, result.rhs_A, 1e-5))
        checks.append(VerificationCheck.compare("tilted_convolution_transform", params,
                                                result.lhs_B, result.rhs_B, 1e-5))
    return checks


def _suite_hitting(spec: QuadSpec) -> List[VerificationCheck]:
    checks = []
    for lambda_T, xi, s in ((1.0, -1.0, 1.0), (2.0, -0.5, 0.5), (5.0, -0.2, 2.0)):
        tp = TransformPoint(s=s)
        for v0 in _ORIENTED:
            checks.append(VerificationCheck.compare(
                "hitting_transform", {"lambda_T": lambda_T, "xi": xi, "s": s, "v0": v0.value},
                hitting_transform_numeric(tp, lambda_T, xi, v0, spec),
                hitting_laplace(tp, lambda_T, xi, v0), 1e-6,
            ))
    return checks


def _suite_lemma41(spec: QuadSpec) -> List[VerificationCheck]:
    checks = []
    for a in (0.0, 0.5, 1.0):
        for beta in (0.5, 2.0):
            for s in (0.5, 1.0, 3.0):
                tp = TransformPoint(s=s, beta=beta)
                checks.append(VerificationCheck.compare(
                    "limit_transform", {"a": a, "beta": beta, "s": s},
                    lemma41_lhs_numeric(a, tp, spec), lemma41_rhs(a, tp), 1e-5,
                ))
    tp = TransformPoint(s=1.0, beta=1.0)
    checks.append(VerificationCheck.compare(
        "limit_transform_complement", {"a": 1.0, "beta": 1.0, "s": 1.0},
        lemma41_lhs_numeric(1.0, tp, spec, "complement"), lemma41_rhs(1.0, tp, "complement"), 1e-5,
    ))
    return checks


def _suite_collapse(spec: QuadSpec) -> List[VerificationCheck]:
    checks = []
    for s in (0.5, 1.7):
        tp = TransformPoint(s=s, beta=0.0)
        for lambda_T in (1.0, 12.0):
            for v0 in _ORIENTED:
                params = {"s": s, "lambda_T": lambda_T, "v0": v0.value}
                checks.append(VerificationCheck.compare(
                    "beta0_origin", params, w_origin(tp, lambda_T, v0), 1.0 / s, 1e-12))
                for xi in (-1.0, 0.0, 1.0):
                    checks.append(VerificationCheck.compare(
                        "beta0_offset", {**params, "xi": xi}, w_offset(xi, tp, lambda_T, v0), 1.0 / s, 1e-12))
    return checks


def _suite_origin(spec: QuadSpec) -> List[VerificationCheck]:
    checks = []
    for lambda_T in (0.5, 2.0):
        for beta in (0.5, 2.0):
            for s in (0.5, 1.0):
                tp = TransformPoint(s=s, beta=beta)
                for v0 in _ORIENTED:
                    checks.append(VerificationCheck.compare(
                        "origin_round_trip", {"lambda_T": lambda_T, "beta": beta, "s": s, "v0": v0.value},
                        origin_transform_numeric(tp, lambda_T, v0, spec),
                        w_origin(tp, lambda_T, v0), 1e-5,
                    ))
    return checks


def _suite_offset(spec: QuadSpec) -> List[VerificationCheck]:
    tp = TransformPoint(s=1.0, beta=1.0)
    xi, lambda_T = -0.25, 2.0
    outer = QuadSpec(abs_tol=1e-8, rel_tol=1e-6, max_subdivisions=spec.max_subdivisions)
    return [
        VerificationCheck.compare(
            "offset_round_trip", {"xi": xi, "lambda_T": lambda_T, "s": 1.0, "beta": 1.0, "v0": v0.value},
            offset_transform_numeric(xi, tp, lambda_T, v0, outer),
            w_offset(xi, tp, lambda_T, v0), 1e-4,
        )
        for v0 in _ORIENTED
    ]


_RUNNERS = {
    "phi": _suite_phi,
    "lemma33": _suite_lemma33,
    "hitting": _suite_hitting,
    "lemma41": _suite_lemma41,
    "collapse": _suite_collapse,
    "origin": _suite_origin,
    "offset": _suite_offset,
}


@log_performance
@validate_params(suite=ChoiceValidator(("all", *SUITES)))
def run_verification(suite: str = "all", spec: QuadSpec = None) -> List[VerificationCheck]:
    """
    Exécuter une suite d'identités de Laplace

    Args:
        suite: Nom de suite ou "all"
        spec: Tolérances des quadratures

    Returns:
        Liste des contrôles, dans l'ordre d'exécution
    """
    spec = spec or QuadSpec()
    names = SUITES if suite == "all" else (suite,)

    checks: List[VerificationCheck] = []
    for name in names:
        logger.info(f"🔍 Suite de vérification {name}")
        results = _RUNNERS[name](spec)
        failed = [c for c in results if not c.passed]
        if failed:
            logger.warning(f"⚠️ {name}: {len(failed)}/{len(results)} contrôles en échec")
        checks.extend(results)
    return checks
