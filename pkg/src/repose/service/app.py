"""HTTP session API for the editor client.

Sessions are stateful server-side; requests carry images as base64 PNG.
Previews never touch the denoiser. Commits are deterministic given the
seed in the spec, serialized per session (409 on overlap), and watermarked
when configured.
"""

from __future__ import annotations

import json
from importlib import resources

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..backends.registry import BackendBundle
from ..config import Config
from ..errors import InputError, ReposeError, SessionBusyError, UnknownSessionError
from ..generate.executors import PromptSet
from ..pipeline import session as session_ops
from ..pipeline.session import Session
from ..preprocess.geometry import RepositionSpec
from .codec import b64_to_image, b64_to_mask, image_to_b64, mask_to_b64, quantize
from .store import SessionStore


class CreateSessionRequest(BaseModel):
    image: str = Field(description="base64 PNG or JPEG")


class SelectRequest(BaseModel):
    point: tuple[float, float] | None = None
    box: tuple[float, float, float, float] | None = None
    text: str | None = None


class PreviewRequest(BaseModel):
    displacement: tuple[int, int]


class CommitRequest(BaseModel):
    displacement: tuple[int, int]
    preserve_occlusion: bool = False
    preserve_perspective: bool = False
    use_matting: bool = False
    completion_mask: str | None = None
    apply_harmonization: bool = False
    shadow_mode: str = "none"
    shadow_region: str | None = None
    seed: int = 0
    debug_stages: bool = False

    def to_spec(self) -> RepositionSpec:
        return RepositionSpec(
            displacement=tuple(self.displacement),
            preserve_occlusion=self.preserve_occlusion,
            preserve_perspective=self.preserve_perspective,
            use_matting=self.use_matting,
            completion_mask=b64_to_mask(self.completion_mask) if self.completion_mask else None,
            apply_harmonization=self.apply_harmonization,
            shadow_mode=self.shadow_mode,
            shadow_region=b64_to_mask(self.shadow_region) if self.shadow_region else None,
            seed=self.seed,
        )


def reposition_spec_schema() -> dict:
    ref = resources.files("repose.service") / "schemas" / "reposition_spec.schema.json"
    return json.loads(ref.read_text())


def create_app(
    config: Config,
    backends: BackendBundle | None = None,
    prompts: PromptSet | None = None,
) -> FastAPI:
    backends = backends if backends is not None else config.build_backends()
    prompts = prompts if prompts is not None else config.load_prompts()
    store = SessionStore(config.service.get("store_dir"))
    sessions: dict[str, Session] = store.load_all()
    sampler_cfg = config.sampler_config()
    watermark = bool(config.service.get("watermark"))

    app = FastAPI(title="repose", version="0.1.0")

    @app.exception_handler(ReposeError)
    async def repose_error_handler(_request: Request, exc: ReposeError):
        if isinstance(exc, UnknownSessionError):
            return JSONResponse(status_code=404, content={"error": str(exc)})
        if isinstance(exc, SessionBusyError):
            return JSONResponse(status_code=409, content={"error": str(exc)})
        if isinstance(exc, InputError):
            return JSONResponse(
                status_code=422, content={"error": str(exc), "field": exc.field, "hint": exc.hint}
            )
        return JSONResponse(status_code=500, content={"error": str(exc)})

    def get_session(session_id: str) -> Session:
        if session_id not in sessions:
            raise UnknownSessionError(f"unknown session {session_id}")
        return sessions[session_id]

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "backends": backends.fingerprints(),
            "prompts": {
                task: getattr(prompts, task).digest()[:16] if getattr(prompts, task) else None
                for task in ("remove", "complete", "harmonize")
            },
            "adapter": prompts.adapter is not None,
            "watermark": watermark,
            "sessions": len(sessions),
        }

    @app.get("/schema/reposition-spec")
    def schema():
        return reposition_spec_schema()

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest):
        image = quantize(b64_to_image(body.image, source_id="upload"))
        session = session_ops.create_session(image)
        sessions[session.session_id] = session
        store.record_create(session)
        return {"session_id": session.session_id, "height": image.height, "width": image.width}

    @app.post("/sessions/{session_id}/select")
    def select(session_id: str, body: SelectRequest):
        session = get_session(session_id)
        provided = [q for q in (body.point, body.box, body.text) if q is not None]
        if len(provided) != 1:
            raise InputError("provide exactly one of point, box, or text", field="query")
        selection = session_ops.select(session, provided[0], backends)
        return {
            "mask": mask_to_b64(selection.mask),
            "bbox": list(selection.bbox),
            "confidence": selection.confidence,
        }

    @app.post("/sessions/{session_id}/preview")
    def preview(session_id: str, body: PreviewRequest):
        session = get_session(session_id)
        composite = session_ops.preview(session, body.displacement)
        return {"image": image_to_b64(composite)}

    @app.post("/sessions/{session_id}/commit")
    def commit(session_id: str, body: CommitRequest):
        session = get_session(session_id)
        spec = body.to_spec()
        result = session_ops.commit(
            session, spec, prompts, backends, sampler_cfg, debug_stages=body.debug_stages
        )
        result.output = quantize(result.output)
        session.images[session.cursor] = result.output
        store.record_commit(session, body.model_dump(exclude={"completion_mask", "shadow_region"}))
        return {
            "image": image_to_b64(result.output, watermark=watermark),
            "plan": result.summary(),
            "trace_ids": [t.prompt_digest for t in result.traces],
        }

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        session = get_session(session_id)
        current = session_ops.undo(session)
        store.record_undo(session)
        return {"image": image_to_b64(current)}

    return app
