"""HTTP analysis service for the editor console.

All shared state (model, index, lexicon) is loaded once at startup and
never mutated by requests. Responses use the same rendering code path
as the CLI, so identical inputs produce byte-identical report JSON over
either surface. Errors are returned in a uniform envelope
``{"error": {"code", "message", "detail"}}``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .classify.model import TrainedModel, load_model
from .extraction import LlmClientConfig, LlmExtractor, RuleBasedExtractor
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .markers import MARKER_NAMES
from .report import generate_report, render_json, severity
from .retrieve import EvidenceIndex, RetrieveError, load_index, search

DEFAULT_BODY_LIMIT = 1_000_000  # bytes

CONFIG_ENV_VAR = "REVIEWSCOPE_CONFIG"


@dataclass
class ServiceConfig:
    model_path: str
    index_path: str | None = None
    lexicon_path: str | None = None
    encoder: dict = field(default_factory=lambda: {"kind": "builtin"})
    llm: dict | None = None  # {"endpoint", "model", "credential_env"}
    host: str = "127.0.0.1"
    port: int = 8000
    body_limit: int = DEFAULT_BODY_LIMIT

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            model_path=doc["model_path"],
            index_path=doc.get("index_path"),
            lexicon_path=doc.get("lexicon_path"),
            encoder=doc.get("encoder", {"kind": "builtin"}),
            llm=doc.get("llm"),
            host=doc.get("host", "127.0.0.1"),
            port=int(doc.get("port", 8000)),
            body_limit=int(doc.get("body_limit", DEFAULT_BODY_LIMIT)),
        )


def _error(status: int, code: str, message: str, detail: str = "") -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": {"code": code, "message": message, "detail": detail}},
    )


@dataclass
class _State:
    model: TrainedModel
    index: EvidenceIndex | None
    lexicon: Lexicon
    llm_config: LlmClientConfig | None


def _load_state(config: ServiceConfig) -> _State:
    model = load_model(config.model_path)
    index = load_index(config.index_path) if config.index_path else None
    lexicon = load_lexicon(config.lexicon_path) if config.lexicon_path else default_lexicon()
    llm_config = None
    if config.llm:
        llm_config = LlmClientConfig(
            endpoint=config.llm["endpoint"],
            model=config.llm["model"],
            credential_env=config.llm.get("credential_env", "REVIEWSCOPE_LLM_API_KEY"),
        )
    return _State(model=model, index=index, lexicon=lexicon, llm_config=llm_config)


def create_app(
    config: ServiceConfig,
    model: TrainedModel | None = None,
    index: EvidenceIndex | None = None,
    lexicon: Lexicon | None = None,
) -> FastAPI:
    """Build the service app; pre-loaded artifacts may be passed directly."""
    if model is None:
        state = _load_state(config)
    else:
        state = _State(
            model=model,
            index=index,
            lexicon=lexicon if lexicon is not None else default_lexicon(),
            llm_config=None,
        )

    app = FastAPI(title="reviewscope", docs_url=None, redoc_url=None)

    def pick_extractor(preference: str):
        if preference == "rule":
            return RuleBasedExtractor(state.lexicon)
        if preference == "llm":
            if state.llm_config is None:
                return None
            return LlmExtractor(state.llm_config)
        if preference == "auto":
            if state.llm_config is not None:
                return LlmExtractor(state.llm_config)
            return RuleBasedExtractor(state.lexicon)
        raise ValueError(f"unknown extractor preference {preference!r}")

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        length = request.headers.get("content-length")
        if length is not None and int(length) > config.body_limit:
            return _error(413, "body_too_large", f"request body exceeds {config.body_limit} bytes")
        return await call_next(request)

    async def read_json_body(request: Request) -> dict:
        raw = await request.body()
        if len(raw) > config.body_limit:
            raise _BodyTooLarge()
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise _BadRequest(f"invalid JSON body: {exc}") from exc
        if not isinstance(doc, dict):
            raise _BadRequest("request body must be a JSON object")
        return doc

    class _BadRequest(Exception):
        def __init__(self, message: str):
            self.message = message

    class _BodyTooLarge(Exception):
        pass

    @app.exception_handler(_BadRequest)
    async def bad_request_handler(request: Request, exc: _BadRequest):
        return _error(400, "bad_request", exc.message)

    @app.exception_handler(_BodyTooLarge)
    async def body_too_large_handler(request: Request, exc: _BodyTooLarge):
        return _error(413, "body_too_large", f"request body exceeds {config.body_limit} bytes")

    @app.get("/api/health")
    async def health():
        return {
            "status": "ok",
            "model_version": state.model.version,
            "index_size": len(state.index) if state.index is not None else 0,
        }

    @app.get("/api/model-info")
    async def model_info():
        return {
            "kind": state.model.kind,
            "hyperparameters": state.model.hyperparameters,
            "class_weight": state.model.class_weight,
            "seed": state.model.seed,
            "feature_names": list(state.model.feature_names),
            "version": state.model.version,
            "metadata": state.model.metadata,
        }

    @app.post("/api/analyze")
    async def analyze(request: Request):
        doc = await read_json_body(request)
        text = doc.get("review_text", "")
        if not isinstance(text, str) or not text.strip():
            raise _BadRequest("review_text must be a non-empty string")
        preference = doc.get("extractor", "auto")
        if preference not in ("auto", "rule", "llm"):
            raise _BadRequest("extractor must be one of auto, rule, llm")
        extractor = pick_extractor(preference)
        if extractor is None:
            raise _BadRequest("llm extractor requested but not configured")
        k = doc.get("evidence_k", 3)
        if not isinstance(k, int) or k < 1:
            raise _BadRequest("evidence_k must be a positive integer")
        report = generate_report(
            text, state.model, state.index,
            extractor=extractor, lexicon=state.lexicon, evidence_k=k,
        )
        return Response(content=render_json(report), media_type="application/json")

    @app.post("/api/retrieve")
    async def retrieve(request: Request):
        doc = await read_json_body(request)
        text = doc.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise _BadRequest("text must be a non-empty string")
        k = doc.get("K", 5)
        if not isinstance(k, int) or k < 1:
            raise _BadRequest("K must be a positive integer")
        if state.index is None:
            return _error(409, "no_index", "no evidence index is loaded")
        try:
            result = search(state.index, text, K=k)
        except RetrieveError as exc:
            return _error(409, "retrieval_failed", str(exc))
        return result.to_dict()

    @app.post("/api/markers")
    async def markers_endpoint(request: Request):
        doc = await read_json_body(request)
        text = doc.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise _BadRequest("text must be a non-empty string")
        preference = doc.get("extractor", "rule")
        if preference not in ("auto", "rule", "llm"):
            raise _BadRequest("extractor must be one of auto, rule, llm")
        extractor = pick_extractor(preference)
        if extractor is None:
            raise _BadRequest("llm extractor requested but not configured")
        vector = extractor.score_text(text)
        return {
            "markers": [
                {"name": name, "score": score, "severity": severity(score)}
                for name, score in zip(MARKER_NAMES, vector.as_tuple())
            ],
            "extractor": extractor.name,
        }

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted; raises on an unusable port."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


def resolve_config_path(explicit: str | None) -> str | None:
    return explicit if explicit else os.environ.get(CONFIG_ENV_VAR)
