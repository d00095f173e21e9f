"""Policy data model, input validation and covariate encoding.

A policies file is a CSV with one row per state adoption::

    policy_id,policy_name,category,state_code,adoption_year,national_year

``national_year`` is left empty for policies that never reached national
action.  A traits file is a JSON document describing the state-level tables
used to build the 40 binary covariates (see ``data/traits.json``).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

N_STATES = 50
MIN_YEAR, MAX_YEAR = 1776, 2100

STATES = frozenset(
    "AK AL AR AZ CA CO CT DE FL GA HI IA ID IL IN KS KY LA MA MD ME MI MN MO MS "
    "MT NC ND NE NH NJ NM NV NY OH OK OR PA RI SC SD TN TX UT VA VT WA WI WV WY".split()
)

CATEGORIES = (
    "administration",
    "civil rights",
    "conservation",
    "corrections",
    "education",
    "elections",
    "health",
    "labor",
    "planning",
    "professional",
    "taxes",
    "welfare",
    "other",
)

REGIONS = ("Northeast", "Midwest", "South", "West")
N_ERAS = 11

TOP5_KEYS = (
    "liberal",
    "conservative",
    "ideology_extreme",
    "urbanization",
    "wealth",
    "population_largest",
    "population_smallest",
    "professional_legislature",
)

POLICY_COLUMNS = (
    "policy_id",
    "policy_name",
    "category",
    "state_code",
    "adoption_year",
    "national_year",
)


class CorpusError(ValueError):
    """Raised when an input file or record breaks a data rule."""

    def __init__(self, message, *, line=None, policy_id=None, rule=None):
        self.line = line
        self.policy_id = policy_id
        self.rule = rule
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True, order=True)
class AdoptionEvent:
    year: int
    state: str


@dataclass(frozen=True)
class PolicyRecord:
    id: str
    name: str
    category: str
    adoptions: tuple[AdoptionEvent, ...]
    national_year: int | None = None

    @property
    def first_year(self) -> int:
        return self.adoptions[0].year

    @property
    def first_state(self) -> str:
        return self.adoptions[0].state

    @property
    def years(self) -> list[int]:
        return [a.year for a in self.adoptions]

    @property
    def is_top_down(self) -> bool:
        return self.national_year is not None and self.national_year <= self.first_year


def make_record(policy_id, name, category, adoptions, national_year=None) -> PolicyRecord:
    """Build a record from ``(state, year)`` pairs, sorting events by year."""
    events = tuple(sorted(AdoptionEvent(int(y), s) for s, y in adoptions))
    record = PolicyRecord(policy_id, name, category, events, national_year)
    validate_record(record, allow_top_down=True)
    return record


def validate_record(record: PolicyRecord, allow_top_down: bool = False) -> None:
    def fail(rule, msg):
        raise CorpusError(f"policy {record.id!r}: {msg}", policy_id=record.id, rule=rule)

    if not record.adoptions:
        fail("non-empty", "no adoption events")
    if record.category not in CATEGORIES:
        fail("category", f"unknown category {record.category!r}")
    seen = set()
    for ev in record.adoptions:
        _check_state(ev.state, record.id)
        _check_year(ev.year, record.id)
        if ev.state in seen:
            fail("one-adoption-per-state", f"state {ev.state} adopts more than once")
        seen.add(ev.state)
    if list(record.adoptions) != sorted(record.adoptions):
        fail("ordered", "adoptions are not ordered by year")
    if record.national_year is not None:
        _check_year(record.national_year, record.id)
        if record.is_top_down and not allow_top_down:
            fail(
                "bottom-up",
                f"national action in {record.national_year} does not follow the first "
                f"state adoption in {record.first_year} (top-down policy)",
            )


def _check_state(code, policy_id=None, line=None):
    if code == "DC":
        raise CorpusError(
            "District of Columbia rows are excluded from all analyses",
            line=line, policy_id=policy_id, rule="no-dc",
        )
    if code not in STATES:
        raise CorpusError(f"unknown state code {code!r}", line=line, policy_id=policy_id, rule="state")


def _check_year(year, policy_id=None, line=None):
    if not MIN_YEAR <= year <= MAX_YEAR:
        raise CorpusError(
            f"year {year} outside [{MIN_YEAR}, {MAX_YEAR}]", line=line, policy_id=policy_id, rule="year"
        )


@dataclass(frozen=True)
class StateTraitTables:
    top5: dict[str, frozenset[str]]
    innovators_well_known: frozenset[str]
    innovators_quantitative: frozenset[str]
    regions: dict[str, str]
    eras: tuple[tuple[str, int], ...]

    def __post_init__(self):
        missing = set(TOP5_KEYS) - set(self.top5)
        if missing:
            raise CorpusError(f"traits: missing top-5 sets {sorted(missing)}", rule="traits")
        named = dict(self.top5)
        named["innovators.well_known"] = self.innovators_well_known
        named["innovators.quantitative"] = self.innovators_quantitative
        for key, members in named.items():
            if len(members) != 5:
                raise CorpusError(f"traits: {key} must list exactly 5 states", rule="traits")
            for s in members:
                _check_state(s)
        if set(self.regions) != STATES:
            raise CorpusError("traits: region map must cover exactly the 50 states", rule="traits")
        bad = {r for r in self.regions.values() if r not in REGIONS}
        if bad:
            raise CorpusError(f"traits: unknown census regions {sorted(bad)}", rule="traits")
        if len(self.eras) != N_ERAS:
            raise CorpusError(f"traits: expected {N_ERAS} eras, got {len(self.eras)}", rule="traits")
        starts = [s for _, s in self.eras]
        if starts != sorted(set(starts)):
            raise CorpusError("traits: era start years must be strictly increasing", rule="traits")

    def era_of(self, year: int) -> str:
        """Era containing ``year``; years before the first era map to the first era."""
        label = self.eras[0][0]
        for name, start in self.eras:
            if year >= start:
                label = name
        return label

    def to_dict(self) -> dict:
        return {
            "top5": {k: sorted(v) for k, v in self.top5.items()},
            "innovators": {
                "well_known": sorted(self.innovators_well_known),
                "quantitative": sorted(self.innovators_quantitative),
            },
            "regions": dict(sorted(self.regions.items())),
            "eras": [{"label": n, "start": s} for n, s in self.eras],
        }

    @classmethod
    def from_dict(cls, d: dict) -> StateTraitTables:
        try:
            return cls(
                top5={k: frozenset(v) for k, v in d["top5"].items()},
                innovators_well_known=frozenset(d["innovators"]["well_known"]),
                innovators_quantitative=frozenset(d["innovators"]["quantitative"]),
                regions=dict(d["regions"]),
                eras=tuple((e["label"], int(e["start"])) for e in d["eras"]),
            )
        except (KeyError, TypeError) as exc:
            raise CorpusError(f"traits: malformed document ({exc!r})", rule="traits") from exc


def default_traits() -> StateTraitTables:
    text = resources.files("policycast").joinpath("data/traits.json").read_text()
    return StateTraitTables.from_dict(json.loads(text))


def load_traits(path) -> StateTraitTables:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"traits: {exc.msg}", line=exc.lineno, rule="parse") from exc
    return StateTraitTables.from_dict(d)


@dataclass(frozen=True)
class Corpus:
    policies: tuple[PolicyRecord, ...]
    trait_tables: StateTraitTables
    excluded: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        ids = [p.id for p in self.policies]
        if len(ids) != len(set(ids)):
            raise CorpusError("duplicate policy ids", rule="unique-id")
        for p in self.policies:
            validate_record(p)

    def get(self, policy_id: str) -> PolicyRecord:
        for p in self.policies:
            if p.id == policy_id:
                return p
        raise KeyError(policy_id)


def parse_policies(text: str, *, filter_top_down: bool = False):
    """Parse policies CSV text into records.

    Returns ``(records, excluded)`` where ``excluded`` lists ``(policy_id, reason)``
    for top-down policies dropped under ``filter_top_down``.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise CorpusError("empty policies file", line=1, rule="parse") from None
    if tuple(header) != POLICY_COLUMNS:
        raise CorpusError(f"header must be {','.join(POLICY_COLUMNS)}", line=1, rule="parse")

    rows: dict[str, dict] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(POLICY_COLUMNS):
            raise CorpusError(f"expected {len(POLICY_COLUMNS)} fields, got {len(row)}", line=line, rule="parse")
        pid, name, category, state, year, national = (c.strip() for c in row)
        if not pid:
            raise CorpusError("empty policy_id", line=line, rule="parse")
        try:
            year = int(year)
            national = int(national) if national else None
        except ValueError:
            raise CorpusError("adoption_year/national_year must be integers", line=line,
                              policy_id=pid, rule="parse") from None
        _check_state(state, pid, line)
        _check_year(year, pid, line)
        if national is not None:
            _check_year(national, pid, line)
        entry = rows.setdefault(pid, {"name": name, "category": category, "national": national,
                                      "events": {}, "line": line})
        if (entry["name"], entry["category"], entry["national"]) != (name, category, national):
            raise CorpusError(f"policy {pid!r}: name/category/national_year differ between rows",
                              line=line, policy_id=pid, rule="consistent")
        if state in entry["events"]:
            raise CorpusError(f"policy {pid!r}: state {state} adopts more than once", line=line,
                              policy_id=pid, rule="one-adoption-per-state")
        entry["events"][state] = year

    records, excluded = [], []
    for pid, e in rows.items():
        try:
            rec = make_record(pid, e["name"], e["category"], e["events"].items(), e["national"])
        except CorpusError as exc:
            exc.line = exc.line or e["line"]
            raise
        if rec.is_top_down:
            if filter_top_down:
                excluded.append((pid, "top-down"))
                continue
            validate_record(rec)
        records.append(rec)
    return records, excluded


def load_corpus(policies_path, traits_path=None, *, filter_top_down: bool = False) -> Corpus:
    """Load and validate a corpus; ``traits_path=None`` uses the bundled tables."""
    traits = default_traits() if traits_path is None else load_traits(traits_path)
    text = Path(policies_path).read_text(encoding="utf-8")
    records, excluded = parse_policies(text, filter_top_down=filter_top_down)
    return Corpus(tuple(records), traits, tuple(excluded))


def format_policies(records) -> str:
    """Serialise records to the policies CSV format."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(POLICY_COLUMNS)
    for r in records:
        nat = "" if r.national_year is None else str(r.national_year)
        for ev in r.adoptions:
            w.writerow([r.id, r.name, r.category, ev.state, ev.year, nat])
    return buf.getvalue()


def dumps_corpus(corpus: Corpus) -> str:
    doc = {
        "policies": [
            {
                "id": p.id,
                "name": p.name,
                "category": p.category,
                "national_year": p.national_year,
                "adoptions": [[a.state, a.year] for a in p.adoptions],
            }
            for p in corpus.policies
        ],
        "traits": corpus.trait_tables.to_dict(),
        "excluded": [list(e) for e in corpus.excluded],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def loads_corpus(text: str) -> Corpus:
    doc = json.loads(text)
    policies = tuple(
        PolicyRecord(
            p["id"], p["name"], p["category"],
            tuple(AdoptionEvent(int(y), s) for s, y in p["adoptions"]),
            p["national_year"],
        )
        for p in doc["policies"]
    )
    return Corpus(policies, StateTraitTables.from_dict(doc["traits"]),
                  tuple(tuple(e) for e in doc.get("excluded", ())))


# -- covariates --------------------------------------------------------------

STATE_FLAGS = (
    ("first_state_liberal", "liberal"),
    ("first_state_conservative", "conservative"),
    ("first_state_ideology_extreme", "ideology_extreme"),
    ("first_state_urban", "urbanization"),
    ("first_state_wealthy", "wealth"),
    ("first_state_population_largest", "population_largest"),
    ("first_state_population_smallest", "population_smallest"),
    ("first_state_professional_legislature", "professional_legislature"),
)

INITIATOR_FLAGS = (
    "first_state_well_known_innovator",
    "first_state_quantitative_innovator",
    "first_five_well_known_innovator",
    "first_five_quantitative_innovator",
)


def feature_names(tables: StateTraitTables) -> tuple[str, ...]:
    names = [f"category={c}" for c in CATEGORIES]
    names += [f"era={label}" for label, _ in tables.eras]
    names += [f"region={r}" for r in REGIONS]
    names += [n for n, _ in STATE_FLAGS]
    names += list(INITIATOR_FLAGS)
    return tuple(names)


@dataclass(frozen=True)
class CovariateVector:
    names: tuple[str, ...]
    values: tuple[int, ...]

    def __len__(self):
        return len(self.values)

    def __getitem__(self, name: str) -> int:
        return self.values[self.names.index(name)]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


def encode_covariates(record: PolicyRecord, tables: StateTraitTables) -> CovariateVector:
    first = record.first_state
    first_five = {a.state for a in record.adoptions[:5]}
    era = tables.era_of(record.first_year)
    values = [int(record.category == c) for c in CATEGORIES]
    values += [int(era == label) for label, _ in tables.eras]
    values += [int(tables.regions[first] == r) for r in REGIONS]
    values += [int(first in tables.top5[key]) for _, key in STATE_FLAGS]
    values += [
        int(first in tables.innovators_well_known),
        int(first in tables.innovators_quantitative),
        int(bool(first_five & tables.innovators_well_known)),
        int(bool(first_five & tables.innovators_quantitative)),
    ]
    return CovariateVector(feature_names(tables), tuple(values))


# -- trajectories and thresholds ----------------------------------------------

def adoption_trajectory(record: PolicyRecord) -> list[tuple[int, float]]:
    """Cumulative fraction of the 50 states that had adopted, per distinct year."""
    out: list[tuple[int, float]] = []
    for k, ev in enumerate(record.adoptions, start=1):
        if out and out[-1][0] == ev.year:
            out[-1] = (ev.year, k / N_STATES)
        else:
            out.append((ev.year, k / N_STATES))
    return out


def national_threshold(record: PolicyRecord) -> int:
    """Number of states that adopted in a calendar year before national action."""
    if record.national_year is None:
        raise ValueError(f"policy {record.id!r} has no national action")
    return sum(1 for a in record.adoptions if a.year < record.national_year)
