"""Interactive session state: selection, instant previews, commits with an
append-only history, and undo. One in-flight commit per session."""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

import numpy as np

from ..backends.registry import BackendBundle
from ..errors import InputError, SessionBusyError
from ..generate.executors import PromptSet
from ..generate.sampler import SamplerConfig
from ..inversion.datagen import translate_mask
from ..preprocess.geometry import RepositionSpec
from ..preprocess.selection import SubjectSelection, identify_subject
from ..types import Image
from .reposition import RepositionResult, reposition


@dataclass
class Session:
    """History is append-only; the cursor tracks the current image and undo
    just moves it back without mutating stored results."""

    source: Image
    session_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    selection: SubjectSelection | None = None
    results: list[RepositionResult] = field(default_factory=list)
    images: list[Image] = field(default_factory=list)
    cursor: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if not self.images:
            self.images = [self.source]

    @property
    def current(self) -> Image:
        return self.images[self.cursor]


def create_session(image: Image) -> Session:
    return Session(source=image)


def select(session: Session, query, backends: BackendBundle) -> SubjectSelection:
    selection = identify_subject(session.current, query, backends.segmenter, backends.text)
    session.selection = selection
    return selection


def preview(session: Session, displacement: tuple[int, int]) -> Image:
    """Translation-only composite for live dragging: zero denoiser calls."""
    if session.selection is None:
        raise InputError("select a subject before previewing", field="selection")
    dx, dy = int(displacement[0]), int(displacement[1])
    base = session.current
    if dx == 0 and dy == 0:
        return base
    mask = session.selection.mask.bool().astype(np.uint8)
    footprint = translate_mask(mask, dx, dy)
    out = base.pixels.copy()
    ys, xs = np.nonzero(footprint)
    out[ys, xs] = base.pixels[ys - dy, xs - dx]
    return base.with_pixels(out)


def commit(
    session: Session,
    spec: RepositionSpec,
    prompts: PromptSet,
    backends: BackendBundle,
    cfg: SamplerConfig,
    debug_stages: bool = False,
) -> RepositionResult:
    """Run the full reposition and append the result; one commit at a time."""
    if session.selection is None:
        raise InputError("select a subject before committing", field="selection")
    if not session.lock.acquire(blocking=False):
        raise SessionBusyError(f"session {session.session_id} has a commit in flight")
    try:
        result = reposition(
            session.current,
            session.selection,
            spec,
            prompts,
            backends,
            cfg.replace(seed=spec.seed),
            debug_stages=debug_stages,
        )
        session.results.append(result)
        session.images.append(result.output)
        session.cursor = len(session.images) - 1
        return result
    finally:
        session.lock.release()


def undo(session: Session) -> Image:
    if session.cursor == 0:
        raise InputError("nothing to undo", field="history")
    session.cursor -= 1
    return session.current
