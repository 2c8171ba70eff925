"""Stateless HTTP facade over the analysis engine, plus a small scenario store.

Every successful response is built by a payload function shared with the CLI
and rendered through the same JSON writer, so the two front ends emit
byte-identical output for identical inputs. Responses always carry
engine_version and inputs_echo; errors are structured {"error", "detail"}
with 400 for validation, 404 for missing scenarios and 422 for infeasible
requests. Valid inputs never produce a 500.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from fastapi import FastAPI, Request, Response
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import __version__
from .advisor import (
    PrivacyFirstAnswers,
    ReliabilityTarget,
    RiskTarget,
    privacy_first,
    utility_first,
)
from .attacksim import (
    AdjacentScenario,
    lr_attack,
    scenario_from_dict,
    thresholds_for_alphas,
)
from .errors import ConfigurationError, DomainError, EngineError, InfeasibleError
from .risk import DEFAULT_ALPHA0_GRID, posterior_curve, risk_profile
from .serialize import json_text, parse_grid
from .tradeoff import MechanismSpec, mechanism_from_dict, tradeoff_curve
from .utility import UtilityModel, power_function, power_roc, utility_model_from_dict

MAX_SERVICE_TRIALS = 2_000_000

_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


class TooManyTrialsError(InfeasibleError):
    code = "too-many-trials"


class ScenarioNotFoundError(EngineError):
    code = "not-found"


# ---------------------------------------------------------------------------
# payload builders (shared with the CLI)
# ---------------------------------------------------------------------------


def curve_payload(mech: MechanismSpec, alphas: Sequence[float]) -> dict:
    curve = tradeoff_curve(mech, grid=alphas)
    assert curve.points is not None
    return {
        "engine_version": __version__,
        "inputs_echo": {"mech": mech.to_dict(), "alphas": [float(a) for a in alphas]},
        "f_at_zero": curve.f_at_zero,
        "convex": curve.convex,
        "risk_bounded": curve.risk_bounded.to_dict(),
        "points": [[a, b] for a, b in curve.points],
    }


def risk_payload(
    mech: MechanismSpec, alpha0_grid: Sequence[float] = DEFAULT_ALPHA0_GRID
) -> dict:
    profile = risk_profile(tradeoff_curve(mech), alpha0_grid)
    payload = {
        "engine_version": __version__,
        "inputs_echo": {
            "mech": mech.to_dict(),
            "alpha0_grid": [float(a) for a in alpha0_grid],
        },
    }
    payload.update(profile.to_dict())
    return payload


def posterior_payload(
    mech: MechanismSpec, p_prior: float, alphas: Sequence[float]
) -> dict:
    updates = posterior_curve(tradeoff_curve(mech), p_prior, alphas)
    return {
        "engine_version": __version__,
        "inputs_echo": {
            "mech": mech.to_dict(),
            "p_prior": p_prior,
            "alphas": [float(a) for a in alphas],
        },
        "points": [[u.alpha, u.p_posterior] for u in updates],
    }


def power_payload(model: UtilityModel, view: str, grid: Sequence[float]) -> dict:
    if view == "function":
        points = power_function(model, grid)
    elif view == "roc":
        points = power_roc(model, grid)
    else:
        raise DomainError(f"view must be 'function' or 'roc', got {view!r}")
    return {
        "engine_version": __version__,
        "inputs_echo": {
            "model": model.to_dict(),
            "view": view,
            "grid": [float(g) for g in grid],
        },
        "points": [[x, y] for x, y in points],
    }


def privacy_first_payload(
    answers: PrivacyFirstAnswers, sensitivity: float = 1.0, n: Optional[int] = None
) -> dict:
    rec = privacy_first(answers, sensitivity=sensitivity, n=n)
    payload = {"engine_version": __version__, "inputs_echo": rec.inputs}
    payload.update(rec.to_dict())
    return payload


def utility_first_payload(
    model: UtilityModel, reliability: ReliabilityTarget, mech_kind: str = "gaussian"
) -> dict:
    rec = utility_first(model, reliability, mech_kind)
    payload = {"engine_version": __version__, "inputs_echo": rec.inputs}
    payload.update(rec.to_dict())
    return payload


def simulate_payload(
    scenario: AdjacentScenario,
    trials: int,
    seed: int,
    thresholds: Optional[Sequence[float]] = None,
    alphas: Optional[Sequence[float]] = None,
) -> dict:
    if (thresholds is None) == (alphas is None):
        raise ConfigurationError("give exactly one of thresholds / alphas")
    if thresholds is None:
        thresholds = thresholds_for_alphas(scenario, alphas)
    run = lr_attack(scenario, trials, thresholds, seed)
    payload = {
        "engine_version": __version__,
        "inputs_echo": {
            "scenario": scenario.to_dict(),
            "trials": trials,
            "seed": seed,
            "thresholds": list(run.thresholds),
        },
    }
    payload.update(run.to_dict())
    return payload


# ---------------------------------------------------------------------------
# request parsing
# ---------------------------------------------------------------------------


def _parse_float(raw: str, name: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DomainError(f"parameter {name!r} must be a number, got {raw!r}")
    if math.isnan(value):
        raise DomainError(f"parameter {name!r} must not be NaN")
    return value


def _parse_int(raw: str, name: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"parameter {name!r} must be an integer, got {raw!r}")


_MECH_PARAMS = ("kind", "mu", "sensitivity", "n", "epsilon", "delta")


def _mech_from_params(params) -> MechanismSpec:
    data: dict = {}
    if "kind" in params:
        data["kind"] = params["kind"]
    for name in ("mu", "sensitivity", "epsilon", "delta"):
        if name in params:
            data[name] = _parse_float(params[name], name)
    if "n" in params:
        data["n"] = _parse_int(params["n"], "n")
    return mechanism_from_dict(data)


def _alphas_from_params(params, default: Optional[Sequence[float]] = None):
    repeated = params.getlist("alpha")
    grid = params.get("grid")
    if repeated and grid is not None:
        raise DomainError("give either repeated 'alpha' parameters or 'grid', not both")
    if repeated:
        return tuple(_parse_float(a, "alpha") for a in repeated)
    if grid is not None:
        return parse_grid(grid)
    if default is not None:
        return tuple(default)
    raise DomainError("missing 'alpha' or 'grid' parameter")


def _reject_unknown_params(params, allowed) -> None:
    unknown = set(params.keys()) - set(allowed)
    if unknown:
        raise DomainError(f"unknown parameters: {sorted(unknown)}")


def _require_object(data, name: str) -> dict:
    if not isinstance(data, dict):
        raise ConfigurationError(f"{name} must be a JSON object")
    return data


def _optional_number(data: dict, name: str) -> Optional[float]:
    value = data.get(name)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"field {name!r} must be a number")
    return float(value)


def _parse_answers(data: dict) -> PrivacyFirstAnswers:
    data = _require_object(data, "answers")
    allowed = {"allow_blatant", "allow_arbitrary_confidence", "risk_target", "prefer_kind"}
    extra = set(data) - allowed
    if extra:
        raise ConfigurationError(f"unknown answer fields: {sorted(extra)}")
    for name in ("allow_blatant", "allow_arbitrary_confidence"):
        if not isinstance(data.get(name), bool):
            raise ConfigurationError(f"answer {name!r} must be a boolean")
    target_data = _require_object(data.get("risk_target"), "risk_target")
    extra = set(target_data) - {"max_relative_risk", "max_power", "at_alpha0"}
    if extra:
        raise ConfigurationError(f"unknown risk_target fields: {sorted(extra)}")
    target = RiskTarget(
        max_relative_risk=_optional_number(target_data, "max_relative_risk"),
        max_power=_optional_number(target_data, "max_power"),
        at_alpha0=_optional_number(target_data, "at_alpha0"),
    )
    prefer = data.get("prefer_kind")
    if prefer is not None and not isinstance(prefer, str):
        raise ConfigurationError("prefer_kind must be a string")
    return PrivacyFirstAnswers(
        allow_blatant=data["allow_blatant"],
        allow_arbitrary_confidence=data["allow_arbitrary_confidence"],
        risk_target=target,
        prefer_kind=prefer,
    )


def parse_privacy_first_request(body: dict) -> dict:
    """Validate the privacy-first request body into builder keyword arguments."""
    body = _require_object(body, "request body")
    allowed = {"mode", "answers", "sensitivity", "n"}
    extra = set(body) - allowed
    if extra:
        raise ConfigurationError(f"unknown request fields: {sorted(extra)}")
    if body.get("mode") not in (None, "privacy-first"):
        raise ConfigurationError("mode must be 'privacy-first' for this endpoint")
    if "answers" not in body:
        raise ConfigurationError("request requires 'answers'")
    answers = _parse_answers(body["answers"])
    sensitivity = _optional_number(body, "sensitivity")
    n = body.get("n")
    if n is not None and (isinstance(n, bool) or not isinstance(n, int)):
        raise ConfigurationError("field 'n' must be an integer")
    kwargs: dict = {"answers": answers, "n": n}
    if sensitivity is not None:
        kwargs["sensitivity"] = sensitivity
    return kwargs


def parse_utility_first_request(body: dict) -> dict:
    body = _require_object(body, "request body")
    allowed = {"mode", "model", "reliability", "mech_kind"}
    extra = set(body) - allowed
    if extra:
        raise ConfigurationError(f"unknown request fields: {sorted(extra)}")
    if body.get("mode") not in (None, "utility-first"):
        raise ConfigurationError("mode must be 'utility-first' for this endpoint")
    if "model" not in body or "reliability" not in body:
        raise ConfigurationError("request requires 'model' and 'reliability'")
    model = utility_model_from_dict(body["model"])
    rel_data = _require_object(body["reliability"], "reliability")
    extra = set(rel_data) - {"rel_beta_tol", "power_floor"}
    if extra:
        raise ConfigurationError(f"unknown reliability fields: {sorted(extra)}")
    reliability = ReliabilityTarget(
        rel_beta_tol=_optional_number(rel_data, "rel_beta_tol"),
        power_floor=_optional_number(rel_data, "power_floor"),
    )
    mech_kind = body.get("mech_kind", "gaussian")
    if not isinstance(mech_kind, str):
        raise ConfigurationError("mech_kind must be a string")
    return {"model": model, "reliability": reliability, "mech_kind": mech_kind}


def parse_simulate_request(body: dict, max_trials: Optional[int] = None) -> dict:
    body = _require_object(body, "request body")
    allowed = {"scenario", "trials", "seed", "thresholds", "alphas"}
    extra = set(body) - allowed
    if extra:
        raise ConfigurationError(f"unknown request fields: {sorted(extra)}")
    if "scenario" not in body:
        raise ConfigurationError("request requires 'scenario'")
    scenario = scenario_from_dict(body["scenario"])
    trials = body.get("trials")
    if isinstance(trials, bool) or not isinstance(trials, int):
        raise ConfigurationError("field 'trials' must be an integer")
    if max_trials is not None and trials > max_trials:
        raise TooManyTrialsError(
            f"trials = {trials} exceeds the service cap of {max_trials}; run the CLI "
            f"instead: dptradeoff simulate --input scenario.json --trials {trials}"
        )
    seed = body.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigurationError("field 'seed' must be an integer")

    def number_list(name: str):
        values = body.get(name)
        if values is None:
            return None
        if not isinstance(values, (list, tuple)) or not values:
            raise ConfigurationError(f"field {name!r} must be a non-empty array of numbers")
        out = []
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigurationError(f"field {name!r} must contain only numbers")
            out.append(float(v))
        return tuple(out)

    return {
        "scenario": scenario,
        "trials": trials,
        "seed": seed,
        "thresholds": number_list("thresholds"),
        "alphas": number_list("alphas"),
    }


# ---------------------------------------------------------------------------
# scenario store
# ---------------------------------------------------------------------------


class ScenarioStore:
    """One JSON file per scenario id; writes are serialized and atomic."""

    def __init__(self, root: Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, scenario_id: str) -> Path:
        return self.root / f"{scenario_id}.json"

    def put(self, payload: dict, scenario_id: Optional[str] = None) -> dict:
        if scenario_id is None:
            digest = hashlib.sha256(json_text({"payload": payload}).encode()).hexdigest()
            scenario_id = digest[:16]
        elif not _ID_PATTERN.match(scenario_id):
            raise ConfigurationError(
                "scenario id must match [A-Za-z0-9_-]{1,64}"
            )
        entry = {
            "id": scenario_id,
            "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "payload": payload,
        }
        with self._lock:
            tmp = self._path(scenario_id).with_suffix(".tmp")
            tmp.write_text(json_text(entry))
            os.replace(tmp, self._path(scenario_id))
        return entry

    def get(self, scenario_id: str) -> dict:
        if not _ID_PATTERN.match(scenario_id):
            raise ConfigurationError("scenario id must match [A-Za-z0-9_-]{1,64}")
        path = self._path(scenario_id)
        if not path.exists():
            raise ScenarioNotFoundError(f"no scenario stored under id {scenario_id!r}")
        return json.loads(path.read_text())


# ---------------------------------------------------------------------------
# app factory
# ---------------------------------------------------------------------------

def _status_for(exc: EngineError) -> int:
    if isinstance(exc, ScenarioNotFoundError):
        return 404
    if isinstance(exc, InfeasibleError):
        return 422
    return 400


def create_app(
    store_path: Optional[str] = None, static_dir: Optional[str] = None
) -> FastAPI:
    """Build the service. Environment fallbacks: STORE_PATH, STATIC_DIR."""
    store_path = store_path or os.environ.get("STORE_PATH") or "scenario-store"
    static_dir = static_dir or os.environ.get("STATIC_DIR")
    app = FastAPI(title="dptradeoff", version=__version__, openapi_url=None)
    store = ScenarioStore(Path(store_path))

    def respond(payload: dict) -> Response:
        return Response(content=json_text(payload), media_type="application/json")

    def error_response(status: int, code: str, detail: str) -> Response:
        return Response(
            content=json_text({"error": code, "detail": detail}),
            media_type="application/json",
            status_code=status,
        )

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        return error_response(_status_for(exc), exc.code, str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(request: Request, exc: StarletteHTTPException):
        code = "not-found" if exc.status_code == 404 else "http-error"
        return error_response(exc.status_code, code, str(exc.detail))

    @app.exception_handler(Exception)
    async def fallback_handler(request: Request, exc: Exception):
        return error_response(500, "internal", f"{type(exc).__name__}: {exc}")

    async def read_json(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ConfigurationError("request body must be valid JSON")
        return _require_object(body, "request body")

    @app.get("/api/tradeoff")
    async def api_tradeoff(request: Request):
        params = request.query_params
        _reject_unknown_params(params, _MECH_PARAMS + ("alpha", "grid"))
        mech = _mech_from_params(params)
        alphas = _alphas_from_params(params)
        return respond(curve_payload(mech, alphas))

    @app.get("/api/risk")
    async def api_risk(request: Request):
        params = request.query_params
        _reject_unknown_params(params, _MECH_PARAMS + ("alpha0_grid",))
        mech = _mech_from_params(params)
        grid = DEFAULT_ALPHA0_GRID
        if "alpha0_grid" in params:
            grid = parse_grid(params["alpha0_grid"])
        return respond(risk_payload(mech, grid))

    @app.get("/api/posterior")
    async def api_posterior(request: Request):
        params = request.query_params
        _reject_unknown_params(params, _MECH_PARAMS + ("p_prior", "alpha", "grid"))
        mech = _mech_from_params(params)
        if "p_prior" not in params:
            raise DomainError("missing 'p_prior' parameter")
        p_prior = _parse_float(params["p_prior"], "p_prior")
        alphas = _alphas_from_params(params)
        return respond(posterior_payload(mech, p_prior, alphas))

    @app.get("/api/utility/power")
    async def api_power(request: Request):
        params = request.query_params
        model_params = ("n", "sigma", "delta_q", "m0", "m", "alpha0", "mu")
        _reject_unknown_params(params, model_params + ("view", "grid"))
        data: dict = {}
        for name in ("sigma", "delta_q", "m0", "m", "alpha0"):
            if name in params:
                data[name] = _parse_float(params[name], name)
        if "n" in params:
            data["n"] = _parse_int(params["n"], "n")
        if "mu" in params:
            raw = params["mu"]
            data["mu"] = raw if raw == "unprotected" else _parse_float(raw, "mu")
        model = utility_model_from_dict(data)
        view = params.get("view", "function")
        if "grid" in params:
            grid = parse_grid(params["grid"])
        elif view == "function":
            grid = (model.m,)
        else:
            raise DomainError("roc view requires a 'grid' parameter")
        return respond(power_payload(model, view, grid))

    @app.post("/api/advise/privacy-first")
    async def api_privacy_first(request: Request):
        kwargs = parse_privacy_first_request(await read_json(request))
        return respond(privacy_first_payload(**kwargs))

    @app.post("/api/advise/utility-first")
    async def api_utility_first(request: Request):
        kwargs = parse_utility_first_request(await read_json(request))
        return respond(utility_first_payload(**kwargs))

    @app.post("/api/simulate")
    async def api_simulate(request: Request):
        kwargs = parse_simulate_request(
            await read_json(request), max_trials=MAX_SERVICE_TRIALS
        )
        return respond(simulate_payload(**kwargs))

    @app.post("/api/scenario")
    async def api_scenario_put(request: Request):
        body = await read_json(request)
        extra = set(body) - {"id", "payload"}
        if extra:
            raise ConfigurationError(f"unknown request fields: {sorted(extra)}")
        if "payload" not in body:
            raise ConfigurationError("request requires 'payload'")
        scenario_id = body.get("id")
        if scenario_id is not None and not isinstance(scenario_id, str):
            raise ConfigurationError("field 'id' must be a string")
        entry = store.put(body["payload"], scenario_id)
        return respond(
            {
                "engine_version": __version__,
                "inputs_echo": {"id": scenario_id},
                "id": entry["id"],
                "created_at": entry["created_at"],
            }
        )

    @app.get("/api/scenario/{scenario_id}")
    async def api_scenario_get(scenario_id: str):
        entry = store.get(scenario_id)
        return respond(
            {
                "engine_version": __version__,
                "inputs_echo": {"id": scenario_id},
                **entry,
            }
        )

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:

        @app.get("/")
        async def index():
            return respond(
                {
                    "engine_version": __version__,
                    "inputs_echo": {},
                    "detail": "UI build not found; set STATIC_DIR to serve it",
                    "endpoints": [
                        "/api/tradeoff",
                        "/api/risk",
                        "/api/posterior",
                        "/api/utility/power",
                        "/api/advise/privacy-first",
                        "/api/advise/utility-first",
                        "/api/simulate",
                        "/api/scenario",
                    ],
                }
            )

    return app
