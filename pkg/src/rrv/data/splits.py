"""Subject-wise train/test protocols."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from ..errors import InvalidParams, UnknownSubjects
from .samples import natural_key

ALIASES = {
    "cs": "cross_subject",
    "cross_subject": "cross_subject",
    "cs-twofold": "cross_subject_twofold",
    "cross_subject_twofold": "cross_subject_twofold",
    "cv-all": "cross_validation_all_splits",
    "cross_validation_all_splits": "cross_validation_all_splits",
    "losubo": "leave_one_subject_out",
    "leave_one_subject_out": "leave_one_subject_out",
}


@dataclass(frozen=True)
class SplitPlan:
    protocol: str
    train: tuple[str, ...]
    test: tuple[str, ...]
    index: int = 0


def _subject_number(s: str) -> int | None:
    m = re.search(r"(\d+)$", s)
    return int(m.group(1)) if m else None


def _odd_subjects(subjects: list[str]) -> list[str]:
    numbers = [_subject_number(s) for s in subjects]
    if all(n is not None for n in numbers):
        return [s for s, n in zip(subjects, numbers) if n % 2 == 1]
    # non-numeric ids: 1st, 3rd, 5th ... in natural order
    return subjects[0::2]


def make_splits(samples_or_subjects, protocol: str, train_subjects=None) -> list[SplitPlan]:
    """Subject splits for ``cs``, ``cs-twofold``, ``cv-all`` or ``losubo``.

    ``cs`` trains on ``train_subjects`` if given, else on odd-numbered
    subjects. ``cs-twofold`` emits two plans over the natural subject order:
    every second subject starting from the second, then every second subject
    starting from the first, each capped at ``n // 2`` subjects (nine subjects
    give four-versus-five splits). ``cv-all`` enumerates every choice of
    ``n // 2`` training subjects, ``losubo`` holds out one subject at a time.
    """
    subjects = set()
    for item in samples_or_subjects:
        subjects.add(str(getattr(item, "subject", item)))
    universe = sorted(subjects, key=natural_key)
    if not universe:
        raise UnknownSubjects("no subjects")
    name = ALIASES.get(protocol)
    if name is None:
        raise InvalidParams(f"unknown protocol {protocol!r}")

    def plan(train, index=0):
        train = tuple(sorted(set(train), key=natural_key))
        test = tuple(s for s in universe if s not in train)
        return SplitPlan(name, train, test, index)

    if name == "cross_subject":
        if train_subjects is not None:
            train_subjects = [str(s) for s in train_subjects]
            unknown = sorted(set(train_subjects) - set(universe))
            if unknown:
                raise UnknownSubjects(f"unknown training subjects {unknown}")
            return [plan(train_subjects)]
        return [plan(_odd_subjects(universe))]
    if name == "cross_subject_twofold":
        half = len(universe) // 2
        return [plan(universe[1::2][:half], 0), plan(universe[0::2][:half], 1)]
    if name == "cross_validation_all_splits":
        k = len(universe) // 2
        return [plan(c, i) for i, c in enumerate(itertools.combinations(universe, k))]
    return [plan([s for s in universe if s != held], i) for i, held in enumerate(universe)]
