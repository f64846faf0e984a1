import json
import uuid
from datetime import datetime, timezone
from pathlib import Path

from .config import data_dir


def journal_file() -> Path:
    return data_dir() / "nmkdv_journal.jsonl"


# --- THE WRITER (Append-Only) ---
def append_event(event_type: str, payload: dict):
    """
    Appends a run record to the immutable journal. Output payloads never carry
    these timestamps, so they stay reproducible.
    """
    event = {
        "event_id": str(uuid.uuid4()),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "event_type": event_type,
        "payload": payload,
    }
    path = journal_file()
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a") as f:
        f.write(json.dumps(event, default=str) + "\n")


# --- THE REDUCER ---
def load_runs() -> list[dict]:
    """Replays the journal in order and returns one summary dict per recorded run."""
    path = journal_file()
    if not path.exists():
        return []

    runs = []
    with path.open("r") as f:
        for line in f:
            if not line.strip():
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError:
                continue
            if event.get("event_type") != "RUN_RECORDED":
                continue
            data = event["payload"]
            runs.append({
                "event_id": event["event_id"],
                "timestamp": event["timestamp"],
                "command": data.get("command", "?"),
                "exit_code": data.get("exit_code", 0),
                "outputs": data.get("outputs", []),
                "summary": data.get("summary", {}),
            })
    return runs
