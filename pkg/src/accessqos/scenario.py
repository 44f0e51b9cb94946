"""Scenario description and its line-oriented text format.

A scenario file has five sections. ``[topology]``, ``[discipline]`` and
``[run]`` hold ``key = value`` lines; ``[subscribers]`` and ``[sources]``
hold one record per line, a leading name followed by ``key=value`` fields::

    [subscribers]
    group1 count=4 token_rate=2.5e6 bucket=1e6 queue=1e6

    [sources]
    group1 cbr packet=1000 period=0.0005 start=0
    group4[0] burst bytes=10e6 packet=1000 start=2

A source bound to a bare group name is replicated for every member.
Comments start with ``#``.
"""
from dataclasses import dataclass, field, replace
import hashlib
import re

from .core import DEFAULT_MAX_PACKET, SubscriberContract
from .schedulers import DISCIPLINES


class ScenarioError(ValueError):
    """Validation failure; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class Topology:
    backbone_rate_bps: float = 10e9
    access_rate_bps: float = 100e6
    access_delay_s: float = 0.0
    uni_rate_bps: float = 100e6
    rtt_s: float = 0.010
    max_packet: int = DEFAULT_MAX_PACKET


@dataclass
class SubscriberGroup:
    name: str
    count: int
    token_rate_bps: float
    bucket_bytes: int
    queue_bytes: int


@dataclass
class SourceBinding:
    target: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class DisciplineConfig:
    name: str = "drr_tbm"
    k: float = 0.1
    k_alpha: float = 0.2
    fifo_bytes: int = 16_000_000
    threshold_bytes: int = 64_000


@dataclass
class RunConfig:
    horizon: float = 1.0
    repetitions: int = 1
    seed: int = 1
    jitter: float = 0.0
    bin_width: float = 1.0


@dataclass
class Scenario:
    name: str = "scenario"
    topology: Topology = field(default_factory=Topology)
    groups: list = field(default_factory=list)
    sources: list = field(default_factory=list)
    discipline: DisciplineConfig = field(default_factory=DisciplineConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def contracts(self):
        return [SubscriberContract(g.token_rate_bps, g.bucket_bytes, g.queue_bytes)
                for g in self.groups for _ in range(g.count)]

    def subscriber_groups(self):
        """Group name of every subscriber, in subscriber-id order."""
        return [g.name for g in self.groups for _ in range(g.count)]

    def group_members(self):
        out, base = {}, 0
        for g in self.groups:
            out[g.name] = list(range(base, base + g.count))
            base += g.count
        return out

    def bindings(self):
        """Expand source bindings to ``(subscriber_id, SourceBinding)`` pairs."""
        members = self.group_members()
        out = []
        for b in self.sources:
            name, idx = _split_target(b.target)
            ids = members[name] if idx is None else [members[name][idx]]
            out.extend((i, b) for i in ids)
        return out

    def with_overrides(self, discipline=None, horizon=None, repetitions=None, seed=None,
                       bin_width=None):
        d = self.discipline if discipline is None else replace(self.discipline, name=discipline)
        r = self.run
        if horizon is not None:
            r = replace(r, horizon=horizon)
        if repetitions is not None:
            r = replace(r, repetitions=repetitions)
        if seed is not None:
            r = replace(r, seed=seed)
        if bin_width is not None:
            r = replace(r, bin_width=bin_width)
        return replace(self, discipline=d, run=r)

    def digest(self):
        return hashlib.sha256(serialize_scenario(self).encode()).hexdigest()


_TARGET = re.compile(r"^([A-Za-z_][\w\-]*)(?:\[(\d+)\])?$")

TOPOLOGY_KEYS = {
    "backbone_rate": ("backbone_rate_bps", float),
    "access_rate": ("access_rate_bps", float),
    "access_delay": ("access_delay_s", float),
    "uni_rate": ("uni_rate_bps", float),
    "rtt": ("rtt_s", float),
    "max_packet": ("max_packet", int),
}
DISCIPLINE_KEYS = {
    "name": ("name", str),
    "k": ("k", float),
    "k_alpha": ("k_alpha", float),
    "fifo": ("fifo_bytes", int),
    "threshold": ("threshold_bytes", int),
}
RUN_KEYS = {
    "horizon": ("horizon", float),
    "repetitions": ("repetitions", int),
    "seed": ("seed", int),
    "jitter": ("jitter", float),
    "bin_width": ("bin_width", float),
}
GROUP_KEYS = {
    "count": ("count", int),
    "token_rate": ("token_rate_bps", float),
    "bucket": ("bucket_bytes", int),
    "queue": ("queue_bytes", int),
}
SOURCE_KEYS = {
    "cbr": {"packet": int, "period": float, "rate": float, "start": float, "stop": float},
    "burst": {"bytes": int, "packet": int, "start": float, "injection_rate": float},
    "tcp": {"mss": int, "start": float},
}
SOURCE_REQUIRED = {
    "cbr": ("packet",),
    "burst": ("bytes", "packet", "start"),
    "tcp": (),
}
SECTIONS = ("topology", "subscribers", "sources", "discipline", "run")


def _split_target(target):
    m = _TARGET.match(target)
    if not m:
        raise ValueError(f"bad source target {target!r}")
    return m.group(1), None if m.group(2) is None else int(m.group(2))


def _number(text, kind):
    if kind is str:
        return text
    value = float(text)
    if kind is int:
        if value != int(value):
            raise ValueError(f"expected an integer, got {text!r}")
        return int(value)
    return value


def parse_scenario(text, name="scenario"):
    """Parse and validate scenario text; raise ScenarioError listing all problems."""
    errors = []
    seen = set()
    section = None
    topo, disc, run = {}, {}, {}
    groups, sources = [], []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            section = m.group(1)
            if section not in SECTIONS:
                errors.append(f"{where}: unknown section [{section}]")
            seen.add(section)
            continue
        if section is None:
            errors.append(f"{where}: content outside of any section")
            continue
        if section in ("topology", "discipline", "run"):
            table, target = {"topology": (TOPOLOGY_KEYS, topo),
                             "discipline": (DISCIPLINE_KEYS, disc),
                             "run": (RUN_KEYS, run)}[section]
            if "=" not in line:
                errors.append(f"{where}: expected 'key = value'")
                continue
            key, value = (p.strip() for p in line.split("=", 1))
            if key not in table:
                errors.append(f"{where}: unknown key {key!r} in [{section}]")
                continue
            attr, kind = table[key]
            try:
                target[attr] = _number(value, kind)
            except ValueError as exc:
                errors.append(f"{where}: {key}: {exc}")
        elif section == "subscribers":
            head, *items = line.split()
            vals = {}
            for item in items:
                key, _, value = item.partition("=")
                if key not in GROUP_KEYS:
                    errors.append(f"{where}: unknown subscriber field {key!r}")
                    continue
                attr, kind = GROUP_KEYS[key]
                try:
                    vals[attr] = _number(value, kind)
                except ValueError as exc:
                    errors.append(f"{where}: {key}: {exc}")
            missing = [k for k, (a, _) in GROUP_KEYS.items() if a not in vals]
            if missing:
                errors.append(f"{where}: group {head!r} missing {', '.join(missing)}")
                continue
            groups.append((lineno, SubscriberGroup(head, **vals)))
        elif section == "sources":
            parts = line.split()
            if len(parts) < 2:
                errors.append(f"{where}: expected '<target> <kind> key=value ...'")
                continue
            target, kind, items = parts[0], parts[1], parts[2:]
            if kind not in SOURCE_KEYS:
                errors.append(f"{where}: unknown source kind {kind!r}")
                continue
            params = {}
            for item in items:
                key, _, value = item.partition("=")
                if key not in SOURCE_KEYS[kind]:
                    errors.append(f"{where}: unknown {kind} field {key!r}")
                    continue
                try:
                    params[key] = _number(value, SOURCE_KEYS[kind][key])
                except ValueError as exc:
                    errors.append(f"{where}: {key}: {exc}")
            sources.append((lineno, SourceBinding(target, kind, params)))

    for required in ("subscribers", "run"):
        if required not in seen:
            errors.append(f"missing required section [{required}]")
    if "run" in seen and "horizon" not in run:
        errors.append("[run]: missing required key 'horizon'")

    scenario = Scenario(
        name=name,
        topology=Topology(**topo),
        groups=[g for _, g in groups],
        sources=[s for _, s in sources],
        discipline=DisciplineConfig(**disc),
        run=RunConfig(**run),
    )
    errors.extend(validate_scenario(scenario, dict(groups), dict(sources)))
    if errors:
        raise ScenarioError(errors)
    return scenario


def validate_scenario(s, group_lines=None, source_lines=None):
    """Return the list of validation errors of a scenario (empty if valid)."""
    errors = []
    glines = {id(g): n for n, g in (group_lines or {}).items()}
    slines = {id(b): n for n, b in (source_lines or {}).items()}

    def at(obj, lines):
        n = lines.get(id(obj))
        return f"line {n}: " if n else ""

    t = s.topology
    for attr in ("backbone_rate_bps", "access_rate_bps", "uni_rate_bps", "max_packet"):
        if not getattr(t, attr) > 0:
            errors.append(f"[topology]: {attr} must be positive")
    if t.rtt_s < 0 or t.access_delay_s < 0:
        errors.append("[topology]: delays must be non-negative")
    if t.access_delay_s > t.rtt_s / 2:
        errors.append("[topology]: access_delay exceeds half the round-trip time")
    names = set()
    for g in s.groups:
        where = at(g, glines)
        if g.name in names:
            errors.append(f"{where}duplicate subscriber group {g.name!r}")
        names.add(g.name)
        if g.count <= 0:
            errors.append(f"{where}group {g.name!r}: count must be positive")
        if not g.token_rate_bps > 0:
            errors.append(f"{where}group {g.name!r}: token_rate must be positive")
        if g.bucket_bytes < t.max_packet:
            errors.append(f"{where}group {g.name!r}: bucket smaller than max_packet")
        if g.queue_bytes < t.max_packet:
            errors.append(f"{where}group {g.name!r}: queue smaller than max_packet")
    if not s.groups:
        errors.append("[subscribers]: at least one subscriber group is required")
    counts = {g.name: g.count for g in s.groups}
    tcp_bound = set()
    for b in s.sources:
        where = at(b, slines)
        try:
            name, idx = _split_target(b.target)
        except ValueError as exc:
            errors.append(f"{where}{exc}")
            continue
        if name not in counts:
            errors.append(f"{where}source bound to undeclared subscriber group {name!r}")
            continue
        if idx is not None and idx >= counts[name]:
            errors.append(f"{where}{b.target}: index out of range")
            continue
        for key in SOURCE_REQUIRED[b.kind]:
            if key not in b.params:
                errors.append(f"{where}{b.kind} source missing {key!r}")
        p = b.params
        if b.kind == "cbr":
            if ("period" in p) == ("rate" in p):
                errors.append(f"{where}cbr source needs exactly one of 'period' or 'rate'")
            elif not p.get("period", p.get("rate", 0)) > 0:
                errors.append(f"{where}cbr period/rate must be positive")
        if "packet" in p and not 0 < p["packet"] <= t.max_packet:
            errors.append(f"{where}packet size must be in (0, max_packet]")
        if "mss" in p and not 0 < p["mss"] <= t.max_packet:
            errors.append(f"{where}mss must be in (0, max_packet]")
        if "injection_rate" in p and not p["injection_rate"] > 0:
            errors.append(f"{where}injection_rate must be positive")
        if "bytes" in p and not p["bytes"] > 0:
            errors.append(f"{where}burst bytes must be positive")
        if b.kind == "tcp":
            ids = range(counts[name]) if idx is None else [idx]
            for k in ids:
                if (name, k) in tcp_bound:
                    errors.append(f"{where}subscriber {name}[{k}] has two tcp sources")
                tcp_bound.add((name, k))
    d = s.discipline
    if d.name not in DISCIPLINES:
        errors.append(f"[discipline]: unknown discipline {d.name!r}; choose from {', '.join(DISCIPLINES)}")
    if d.k < 0 or d.k_alpha <= 0:
        errors.append("[discipline]: k must be >= 0 and k_alpha > 0")
    if d.fifo_bytes < t.max_packet or d.threshold_bytes <= 0:
        errors.append("[discipline]: fifo and threshold must be positive")
    r = s.run
    if not r.horizon > 0:
        errors.append("[run]: horizon must be positive")
    if r.repetitions < 1:
        errors.append("[run]: repetitions must be at least 1")
    if r.jitter < 0 or not r.bin_width > 0:
        errors.append("[run]: jitter must be >= 0 and bin_width > 0")
    return errors


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_scenario(s):
    """Canonical text form; ``parse_scenario`` of it gives back ``s``."""
    lines = [f"# scenario {s.name}", "[topology]"]
    for key, (attr, _) in TOPOLOGY_KEYS.items():
        lines.append(f"{key} = {_fmt(getattr(s.topology, attr))}")
    lines += ["", "[subscribers]"]
    for g in s.groups:
        lines.append(" ".join([g.name] + [f"{k}={_fmt(getattr(g, a))}"
                                          for k, (a, _) in GROUP_KEYS.items()]))
    lines += ["", "[sources]"]
    for b in s.sources:
        lines.append(" ".join([b.target, b.kind] + [f"{k}={_fmt(v)}" for k, v in b.params.items()]))
    lines += ["", "[discipline]"]
    for key, (attr, _) in DISCIPLINE_KEYS.items():
        lines.append(f"{key} = {_fmt(getattr(s.discipline, attr))}")
    lines += ["", "[run]"]
    for key, (attr, _) in RUN_KEYS.items():
        lines.append(f"{key} = {_fmt(getattr(s.run, attr))}")
    return "\n".join(lines) + "\n"


def load_scenario(path):
    from pathlib import Path
    path = Path(path)
    return parse_scenario(path.read_text(), name=path.stem)


def bundled_scenario(name):
    """Load one of the scenarios shipped with the package (``experiment1`` ...)."""
    from importlib.resources import files
    text = files("accessqos").joinpath("scenarios", f"{name}.scenario").read_text()
    return parse_scenario(text, name=name)


__all__ = ["Scenario", "Topology", "SubscriberGroup", "SourceBinding",
           "DisciplineConfig", "RunConfig", "ScenarioError", "parse_scenario",
           "serialize_scenario", "validate_scenario", "load_scenario",
           "bundled_scenario"]
