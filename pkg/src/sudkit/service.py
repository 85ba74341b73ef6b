"""HTTP JSON API for the workbench and scripted clients.

Wraps the library behind a small set of endpoints: classification with
optional masking previews, inventory listings, record pagination, and
asynchronous experiment launch with polling. Responses mirror the
in-process results field for field; the request/response schemas are
shipped as versioned JSON artifacts (see the schemas package directory
and GET /schemas).

The service holds no accounts and applies no rate limiting: it is a
single-user research workbench. Bind it to loopback (the default)
unless you know what you are exposing.
"""

from __future__ import annotations

import threading
from importlib import resources
from typing import Literal, Mapping

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .backends import StubBackend, create_backend, load_backend_configs
from .corpus import Corpus
from .entailment import BackendError, EntailmentError, classify
from .experiments import ExperimentError, ExperimentRunner, ExperimentSpec
from .masking import DEFAULT_MASK_SYMBOL, EmbeddingTable, MaskingPolicy, mask_text
from .templates import (
    CandidateLabelSet,
    HypothesisTemplate,
    TemplateError,
    builtin_templates,
    validate_template,
)

API_VERSION = "1"


# --- wire models (mirrors of the shipped JSON schema artifacts) -----------


class MaskingOptions(BaseModel):
    mode: Literal["threshold", "top_k"] = "threshold"
    tau: float = 0.4
    k: int = Field(default=0, ge=0)
    max_fraction: float = Field(default=0.5, gt=0.0, le=1.0)


class ClassifyRequest(BaseModel):
    text: str
    labels: list[str] = Field(min_length=1)
    template_pattern: str
    backend_id: str = "stub"
    surface_forms: dict[str, str] = Field(default_factory=dict)
    normalization: Literal["softmax", "independent"] = "softmax"
    masking: MaskingOptions | None = None


class DistributionModel(BaseModel):
    labels: list[str]
    probabilities: list[float]
    predicted: str
    raw_entailment: list[float]


class TokenSimilarity(BaseModel):
    token: str
    similarity: float | None


class ClassifyResponse(BaseModel):
    distribution: DistributionModel
    predicted: str
    masked_text: str | None = None
    per_token_similarity: list[TokenSimilarity] | None = None


class TemplateInfo(BaseModel):
    template_id: str
    pattern: str
    description: str = ""


class TemplatesResponse(BaseModel):
    templates: list[TemplateInfo]


class DatasetInfo(BaseModel):
    dataset_id: str
    label_set: list[str]
    record_count: int


class DatasetsResponse(BaseModel):
    datasets: list[DatasetInfo]


class BackendInfo(BaseModel):
    backend_id: str
    adapter: str
    ready: bool
    mask_symbol: str


class BackendsResponse(BaseModel):
    backends: list[BackendInfo]


class RecordInfo(BaseModel):
    id: str
    text: str
    gold_label: str


class RecordsPage(BaseModel):
    dataset_id: str
    total: int
    offset: int
    records: list[RecordInfo]


class ExperimentRequest(BaseModel):
    spec: dict


class ExperimentHandle(BaseModel):
    handle: str


class CellValue(BaseModel):
    row: str
    col: str
    value: float | None


class TableModel(BaseModel):
    kind: str
    row_axis: str
    col_axis: str
    rows: list[str]
    cols: list[str]
    cells: list[list[float | None]]
    meta: dict = Field(default_factory=dict)


class ExperimentStatus(BaseModel):
    handle: str
    status: Literal["running", "done", "failed"]
    cells: list[CellValue]
    table: TableModel | None = None
    error: str | None = None


class HealthResponse(BaseModel):
    status: str
    version: str


SCHEMA_MODELS: dict[str, type[BaseModel]] = {
    "classify_request": ClassifyRequest,
    "classify_response": ClassifyResponse,
    "templates_response": TemplatesResponse,
    "datasets_response": DatasetsResponse,
    "backends_response": BackendsResponse,
    "records_page": RecordsPage,
    "experiment_request": ExperimentRequest,
    "experiment_handle": ExperimentHandle,
    "experiment_status": ExperimentStatus,
    "health_response": HealthResponse,
}


class _ExperimentState:
    def __init__(self, handle: str):
        self.handle = handle
        self.status: str = "running"
        self.cells: list[CellValue] = []
        self.table: dict | None = None
        self.error: str | None = None


class ApiSession:
    """Mutable server-side state: backends, datasets, embeddings, runs.

    Model loading happens in background threads so request handlers never
    block on it; readiness is queryable per backend.
    """

    def __init__(
        self,
        backends: Mapping[str, object] | None = None,
        datasets: Mapping[str, Corpus] | None = None,
        embeddings: EmbeddingTable | None = None,
        extra_templates: list[HypothesisTemplate] | None = None,
    ):
        self.lock = threading.RLock()
        self.backends: dict[str, object] = {"stub": StubBackend(seed=0)}
        self.backends.update(backends or {})
        self.backend_configs = load_backend_configs()
        self.datasets: dict[str, Corpus] = dict(datasets or {})
        self.embeddings = embeddings
        self.templates: list[HypothesisTemplate] = list(builtin_templates()) + list(
            extra_templates or []
        )
        self.experiments: dict[str, _ExperimentState] = {}
        self._loading: dict[str, threading.Thread] = {}

    # -- backends ---------------------------------------------------------

    def known_backend_ids(self) -> list[str]:
        with self.lock:
            ids = set(self.backends) | set(self.backend_configs)
        return sorted(ids)

    def backend_infos(self) -> list[BackendInfo]:
        infos = []
        for backend_id in self.known_backend_ids():
            with self.lock:
                instance = self.backends.get(backend_id)
                config = self.backend_configs.get(backend_id)
            if instance is not None:
                infos.append(
                    BackendInfo(
                        backend_id=backend_id,
                        adapter=config.adapter if config else "injected",
                        ready=bool(getattr(instance, "ready", True)),
                        mask_symbol=getattr(
                            instance, "mask_symbol", DEFAULT_MASK_SYMBOL
                        ),
                    )
                )
            else:
                infos.append(
                    BackendInfo(
                        backend_id=backend_id,
                        adapter=config.adapter,
                        ready=False,
                        mask_symbol=config.mask_symbol,
                    )
                )
        return infos

    def acquire_backend(self, backend_id: str):
        """Return a ready backend, or raise 404/503 HTTP errors.

        Unready in-process model backends start loading in the background;
        callers poll until ready.
        """
        with self.lock:
            instance = self.backends.get(backend_id)
            if instance is None:
                config = self.backend_configs.get(backend_id)
                if config is None:
                    raise HTTPException(404, f"unknown backend {backend_id!r}")
                instance = create_backend(config)
                self.backends[backend_id] = instance
        if getattr(instance, "ready", True):
            return instance
        self._start_loading(backend_id, instance)
        raise HTTPException(503, f"backend {backend_id!r} is loading; retry shortly")

    def _start_loading(self, backend_id: str, instance) -> None:
        with self.lock:
            thread = self._loading.get(backend_id)
            if thread is not None and thread.is_alive():
                return

            def load():
                try:
                    instance.load()
                except Exception:
                    pass  # readiness stays false; next request reports 503

            thread = threading.Thread(
                target=load, name=f"load-{backend_id}", daemon=True
            )
            self._loading[backend_id] = thread
            thread.start()

    # -- experiments -------------------------------------------------------

    def submit_experiment(self, spec: ExperimentSpec) -> str:
        handle = spec.fingerprint()
        with self.lock:
            if handle in self.experiments:
                return handle
            state = _ExperimentState(handle)
            self.experiments[handle] = state

        def on_cell(row: str, col: str, value: float | None) -> None:
            with self.lock:
                state.cells.append(CellValue(row=row, col=col, value=value))

        def run():
            try:
                runner = ExperimentRunner(
                    spec,
                    backends=dict(self.backends),
                    datasets=dict(self.datasets),
                    embeddings=self.embeddings,
                    on_cell=on_cell,
                )
                table = runner.run()
                with self.lock:
                    state.table = table.to_dict()
                    state.status = "done"
            except Exception as exc:
                with self.lock:
                    state.error = str(exc)
                    state.status = "failed"

        threading.Thread(target=run, name=f"experiment-{handle}", daemon=True).start()
        return handle

    def experiment_status(self, handle: str) -> ExperimentStatus:
        with self.lock:
            state = self.experiments.get(handle)
            if state is None:
                raise HTTPException(404, f"unknown experiment handle {handle!r}")
            return ExperimentStatus(
                handle=handle,
                status=state.status,  # type: ignore[arg-type]
                cells=list(state.cells),
                table=TableModel(**state.table) if state.table else None,
                error=state.error,
            )


def create_app(session: ApiSession | None = None) -> FastAPI:
    session = session or ApiSession()
    app = FastAPI(title="sud workbench service", version=API_VERSION)
    app.state.session = session

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(status="ok", version=API_VERSION)

    @app.post("/classify", response_model=ClassifyResponse)
    def classify_endpoint(request: ClassifyRequest):
        backend = session.acquire_backend(request.backend_id)
        diagnostic = validate_template(request.template_pattern)
        if diagnostic is not None:
            raise HTTPException(422, diagnostic)
        if not request.text.strip():
            raise HTTPException(422, "text must be non-empty")
        try:
            labels = CandidateLabelSet(
                labels=tuple(request.labels), surface_forms=request.surface_forms
            )
        except TemplateError as exc:
            raise HTTPException(422, str(exc)) from None

        masker = None
        policy = None
        if request.masking is not None:
            if session.embeddings is None:
                raise HTTPException(422, "masking requested but no embeddings loaded")
            policy = MaskingPolicy(
                mode=request.masking.mode,
                tau=request.masking.tau,
                k=request.masking.k,
                max_fraction=request.masking.max_fraction,
                mask_symbol=getattr(backend, "mask_symbol", DEFAULT_MASK_SYMBOL),
            )

            def masker(premise: str, surface: str) -> str:
                return mask_text(premise, surface, session.embeddings, policy).masked_text

        try:
            distribution = classify(
                backend,
                request.text,
                request.template_pattern,
                labels,
                normalization=request.normalization,
                masker=masker,
            )
        except BackendError as exc:
            raise HTTPException(503, str(exc)) from None
        except (EntailmentError, TemplateError) as exc:
            raise HTTPException(422, str(exc)) from None

        masked_text = None
        per_token = None
        if request.masking is not None:
            # Preview of the predicted label's masking, with the literal
            # mask symbol rather than the backend's special token.
            preview_policy = MaskingPolicy(
                mode=policy.mode,
                tau=policy.tau,
                k=policy.k,
                max_fraction=policy.max_fraction,
                mask_symbol=DEFAULT_MASK_SYMBOL,
            )
            preview = mask_text(
                request.text,
                labels.surface(distribution.predicted),
                session.embeddings,
                preview_policy,
            )
            masked_text = preview.masked_text
            per_token = [
                TokenSimilarity(token=token, similarity=sim)
                for token, sim in zip(preview.tokens, preview.similarities)
            ]
        return ClassifyResponse(
            distribution=DistributionModel(**distribution.to_dict()),
            predicted=distribution.predicted,
            masked_text=masked_text,
            per_token_similarity=per_token,
        )

    @app.get("/templates", response_model=TemplatesResponse)
    def templates_endpoint():
        return TemplatesResponse(
            templates=[
                TemplateInfo(
                    template_id=t.template_id,
                    pattern=t.pattern,
                    description=t.description,
                )
                for t in session.templates
            ]
        )

    @app.get("/datasets", response_model=DatasetsResponse)
    def datasets_endpoint():
        with session.lock:
            items = sorted(session.datasets.items())
        return DatasetsResponse(
            datasets=[
                DatasetInfo(
                    dataset_id=dataset_id,
                    label_set=list(corpus.schema.label_set),
                    record_count=len(corpus),
                )
                for dataset_id, corpus in items
            ]
        )

    @app.get("/datasets/{dataset_id}/records", response_model=RecordsPage)
    def records_endpoint(dataset_id: str, offset: int = 0, limit: int = 20):
        with session.lock:
            corpus = session.datasets.get(dataset_id)
        if corpus is None:
            raise HTTPException(404, f"unknown dataset {dataset_id!r}")
        offset = max(0, offset)
        limit = max(1, min(limit, 500))
        page = corpus.records[offset : offset + limit]
        return RecordsPage(
            dataset_id=dataset_id,
            total=len(corpus),
            offset=offset,
            records=[
                RecordInfo(id=r.id, text=r.text, gold_label=r.gold_label)
                for r in page
            ],
        )

    @app.get("/backends", response_model=BackendsResponse)
    def backends_endpoint():
        return BackendsResponse(backends=session.backend_infos())

    @app.post("/experiments", response_model=ExperimentHandle)
    def submit_experiment(request: ExperimentRequest):
        try:
            spec = ExperimentSpec.from_dict(request.spec)
        except (ExperimentError, TypeError, ValueError) as exc:
            raise HTTPException(422, f"invalid experiment spec: {exc}") from None
        return ExperimentHandle(handle=session.submit_experiment(spec))

    @app.get("/experiments/{handle}", response_model=ExperimentStatus)
    def experiment_status(handle: str):
        return session.experiment_status(handle)

    @app.get("/schemas")
    def schemas_index():
        return {"schemas": sorted(SCHEMA_MODELS)}

    @app.get("/schemas/{name}")
    def schema_by_name(name: str):
        if name not in SCHEMA_MODELS:
            raise HTTPException(404, f"unknown schema {name!r}")
        import json

        text = (
            resources.files("sudkit")
            .joinpath("schemas", f"{name}.json")
            .read_text("utf-8")
        )
        return json.loads(text)

    return app


def generate_schema_artifacts(target_dir) -> list[str]:
    """Write the JSON schema files for every wire model; returns the names."""
    import json
    from pathlib import Path

    target = Path(target_dir)
    target.mkdir(parents=True, exist_ok=True)
    names = []
    for name, model in sorted(SCHEMA_MODELS.items()):
        schema = model.model_json_schema()
        (target / f"{name}.json").write_text(
            json.dumps(schema, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        names.append(name)
    return names
