"""Session persistence: an append-only JSONL event log per session with
numbered PNG snapshots. Replaying the log reconstructs the session
byte-identically (pixels are canonically uint8-quantized on the way in)."""

from __future__ import annotations

import json
from pathlib import Path

from ..pipeline.session import Session
from ..types import Image
from .codec import decode_image, encode_image_png


class SessionStore:
    """Disk-backed when given a root directory, otherwise a no-op."""

    def __init__(self, root: str | Path | None):
        self.root = Path(root) if root else None
        if self.root:
            self.root.mkdir(parents=True, exist_ok=True)

    def _dir(self, session_id: str) -> Path:
        d = self.root / session_id
        d.mkdir(exist_ok=True)
        return d

    def _append(self, session_id: str, event: dict) -> None:
        with open(self._dir(session_id) / "log.jsonl", "a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _save_image(self, session_id: str, index: int, image: Image) -> str:
        name = f"{index:04d}.png"
        (self._dir(session_id) / name).write_bytes(encode_image_png(image))
        return name

    def record_create(self, session: Session) -> None:
        if not self.root:
            return
        name = self._save_image(session.session_id, 0, session.source)
        self._append(session.session_id, {"event": "create", "image": name})

    def record_commit(self, session: Session, spec_payload: dict) -> None:
        if not self.root:
            return
        index = len(session.images) - 1
        name = self._save_image(session.session_id, index, session.images[index])
        self._append(session.session_id, {"event": "commit", "image": name, "spec": spec_payload})

    def record_undo(self, session: Session) -> None:
        if not self.root:
            return
        self._append(session.session_id, {"event": "undo", "cursor": session.cursor})

    def load_all(self) -> dict[str, Session]:
        """Rebuild every persisted session from its event log."""
        sessions: dict[str, Session] = {}
        if not self.root:
            return sessions
        for session_dir in sorted(p for p in self.root.iterdir() if p.is_dir()):
            log = session_dir / "log.jsonl"
            if not log.exists():
                continue
            images: list[Image] = []
            cursor = 0
            for line in log.read_text().splitlines():
                event = json.loads(line)
                if event["event"] in ("create", "commit"):
                    data = (session_dir / event["image"]).read_bytes()
                    images.append(decode_image(data, source_id=f"{session_dir.name}:{event['image']}"))
                    cursor = len(images) - 1
                elif event["event"] == "undo":
                    cursor = int(event["cursor"])
            if images:
                session = Session(source=images[0], session_id=session_dir.name, images=images, cursor=cursor)
                sessions[session.session_id] = session
        return sessions
