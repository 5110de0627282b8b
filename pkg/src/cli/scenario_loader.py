"""
Carga y validación de ficheros de escenario (JSON, format_version 1).

La forma del fichero se valida con modelos pydantic; después se comprueban las
referencias cruzadas (dimensiones, posteriores, preservación de la media). Todos los
errores se acumulan con la ruta del campo afectado, por ejemplo
`experts[1].technologies[0].support`.

Esquema:
{
  "format_version": 1,
  "name": "dos expertos",
  "outcomes": 2,
  "prior": [0.5, 0.5],
  "curve": {"kind": "quadratic"} | {"kind": "action_set", "actions": [[1, 0], [0, 1]]},
  "experts": [
    {"id": "A", "technologies": [
      {"name": "mu1", "cost": 0.2,
       "support": [{"posterior": [0.9, 0.1], "weight": 0.5},
                   {"posterior": [0.1, 0.9], "weight": 0.5}]}]}
  ],
  "reserve": 0.0,
  "risk_limits": {"phi_p": null, "phi_e": 0.5},
  "seed": 20240501,
  "samples": 100000
}
"""

import json
import logging
import math
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from auction.scenario import DEFAULT_SAMPLES, Scenario
from core.errors import MechanismError, ScenarioParseError, ScenarioValidationError
from core.simplex import make_posterior, make_prior
from core.technology import make_technology, validate_technology
from curves.preference_curve import CurveFactory
from experts.expert import make_expert
from maxrisk.limits import RiskLimits

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAX_SEED = 2 ** 64 - 1


class SupportPointModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    posterior: List[float]
    weight: float


class TechnologyModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = ""
    cost: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    support: List[SupportPointModel] = Field(min_length=1)


class ExpertModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    technologies: List[TechnologyModel] = Field(default_factory=list)


class CurveModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["quadratic", "action_set", "negated_quadratic"]
    actions: Optional[List[List[float]]] = None


class RiskLimitsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    phi_p: Optional[float] = Field(default=None, ge=0.0)
    phi_e: Optional[float] = Field(default=None, ge=0.0)


class ScenarioModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format_version: Literal[1]
    name: str = ""
    outcomes: int = Field(ge=2)
    prior: List[float]
    curve: CurveModel
    experts: List[ExpertModel] = Field(min_length=1)
    reserve: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    risk_limits: Optional[RiskLimitsModel] = None
    seed: int = Field(ge=0, le=MAX_SEED)
    samples: int = Field(default=DEFAULT_SAMPLES, ge=1)


def format_location(loc: Sequence[Union[str, int]]) -> str:
    """('experts', 1, 'technologies', 0, 'support') -> experts[1].technologies[0].support"""
    text = ""
    for part in loc:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text += ("." if text else "") + str(part)
    return text or "<raíz>"


def _limit(value: Optional[float]) -> float:
    return math.inf if value is None else float(value)


def build_scenario(raw: Dict[str, Any]) -> Scenario:
    """Valida un diccionario ya parseado y construye el Scenario."""
    try:
        model = ScenarioModel.model_validate(raw)
    except ValidationError as exc:
        errors = [(format_location(e["loc"]), e["msg"]) for e in exc.errors()]
        raise ScenarioValidationError(errors) from exc

    errors: List[Tuple[str, str]] = []
    prior = None
    if len(model.prior) != model.outcomes:
        errors.append(("prior", f"tiene {len(model.prior)} entradas y outcomes = {model.outcomes}"))
    else:
        try:
            prior = make_prior(model.prior)
        except MechanismError as exc:
            errors.append(("prior", str(exc)))
    if prior is None:
        raise ScenarioValidationError(errors)

    curve_spec = model.curve.model_dump(exclude_none=True)
    curve = None
    try:
        curve = CurveFactory.build(curve_spec, prior)
    except MechanismError as exc:
        errors.append(("curve", str(exc)))

    experts = []
    seen_ids = set()
    for i, expert_model in enumerate(model.experts):
        if expert_model.id in seen_ids:
            errors.append((f"experts[{i}].id", f"identificador repetido: {expert_model.id}"))
        seen_ids.add(expert_model.id)
        technologies = []
        for j, tech_model in enumerate(expert_model.technologies):
            location = f"experts[{i}].technologies[{j}]"
            support = []
            for s, point in enumerate(tech_model.support):
                if len(point.posterior) != prior.n:
                    errors.append((f"{location}.support[{s}].posterior",
                                   f"tiene {len(point.posterior)} entradas y outcomes = {prior.n}"))
                    continue
                try:
                    support.append((make_posterior(point.posterior), point.weight))
                except MechanismError as exc:
                    errors.append((f"{location}.support[{s}].posterior", str(exc)))
            if len(support) != len(tech_model.support):
                continue
            name = tech_model.name or f"{expert_model.id}.mu{j + 1}"
            technology = make_technology(support, tech_model.cost, name)
            report = validate_technology(technology, prior)
            if not report.passed:
                for violation in report.violations:
                    errors.append((f"{location}.support", f"tecnología '{name}': {violation}"))
                continue
            technologies.append(technology)
        if len(technologies) == len(expert_model.technologies):
            experts.append(make_expert(expert_model.id, technologies, prior))

    if errors:
        raise ScenarioValidationError(errors)

    limits = None
    if model.risk_limits is not None:
        limits = RiskLimits(_limit(model.risk_limits.phi_p), _limit(model.risk_limits.phi_e))

    scenario = Scenario(
        prior=prior,
        curve=curve,
        experts=tuple(experts),
        seed=model.seed,
        reserve=model.reserve,
        risk_limits=limits,
        samples=model.samples,
        curve_spec=curve_spec,
        name=model.name,
    )
    logger.info(f"[ESCENARIO] '{scenario.name}': n={prior.n}, {len(experts)} expertos, curva {curve_spec['kind']}")
    return scenario


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except FileNotFoundError as exc:
        raise ScenarioParseError(f"No existe el fichero de escenario: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"JSON no válido en {path}: línea {exc.lineno}, columna {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ScenarioParseError(f"El escenario {path} debe ser un objeto JSON")
    return build_scenario(raw)
