"""Line-delimited JSON records for trial logs."""
import json
from collections import defaultdict
from dataclasses import asdict
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Tuple, Type, TypeVar, Union

import dacite

from socialmuse.data.records import FollowEdge, IdeaRecord, Participant, Rating, TrialLog
from socialmuse.utils.errors import SchemaError

T = TypeVar("T")

IDEAS_FILE = "ideas.jsonl"
EDGES_FILE = "edges.jsonl"
PARTICIPANTS_FILE = "participants.jsonl"
RATINGS_FILE = "ratings.jsonl"
RECOMMENDATIONS_FILE = "recommendations.jsonl"

_DACITE = dacite.Config(strict=True, cast=[tuple], type_hooks={float: float})


def write_jsonl(path: Union[str, Path], records: Iterable) -> None:
    with open(path, "w") as f:
        for record in records:
            if not isinstance(record, dict):
                record = asdict(record)
            f.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path: Union[str, Path]) -> Iterator[Tuple[int, dict]]:
    with open(path, "r") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"invalid JSON ({e.msg})", str(path), line_number) from None
            if not isinstance(record, dict):
                raise SchemaError("record is not an object", str(path), line_number)
            yield line_number, record


def read_records(path: Union[str, Path], cls: Type[T]) -> List[T]:
    records = []
    for line_number, raw in read_jsonl(path):
        try:
            records.append(dacite.from_dict(data_class=cls, data=raw, config=_DACITE))
        except dacite.DaciteError as e:
            raise SchemaError(f"does not match {cls.__name__}: {e}", str(path), line_number) from None
    return records


def write_trial_logs(directory: Union[str, Path], logs: Iterable[TrialLog]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    logs = list(logs)
    write_jsonl(directory / PARTICIPANTS_FILE, (p for log in logs for p in log.participants))
    write_jsonl(directory / IDEAS_FILE, (i for log in logs for i in log.ideas))
    write_jsonl(directory / EDGES_FILE, (e for log in logs for e in log.edges))
    write_jsonl(directory / RATINGS_FILE, (r for log in logs for r in log.ratings))
    write_jsonl(directory / RECOMMENDATIONS_FILE, (r for log in logs for r in log.recommendations))


def read_trial_logs(directory: Union[str, Path]) -> List[TrialLog]:
    """Group the record files of a log directory back into one TrialLog per (trial, condition).

    The ratings and recommendations files are optional.
    """
    directory = Path(directory)
    logs: Dict[Tuple[str, str], TrialLog] = {}

    def log_for(trial: str, condition: str) -> TrialLog:
        key = (trial, condition)
        if key not in logs:
            logs[key] = TrialLog(trial=trial, condition=condition)
        return logs[key]

    for p in read_records(directory / PARTICIPANTS_FILE, Participant):
        log_for(p.trial, p.condition).participants.append(p)
    for i in read_records(directory / IDEAS_FILE, IdeaRecord):
        log_for(i.trial, i.condition).ideas.append(i)
    for e in read_records(directory / EDGES_FILE, FollowEdge):
        log_for(e.trial, e.condition).edges.append(e)
    if (directory / RATINGS_FILE).exists():
        for r in read_records(directory / RATINGS_FILE, Rating):
            log_for(r.trial, r.condition).ratings.append(r)
    if (directory / RECOMMENDATIONS_FILE).exists():
        by_key = defaultdict(list)
        for _, raw in read_jsonl(directory / RECOMMENDATIONS_FILE):
            by_key[(raw.get("trial"), raw.get("condition"))].append(raw)
        for (trial, condition), records in by_key.items():
            log_for(trial, condition).recommendations.extend(records)
    return [logs[k] for k in sorted(logs)]
