"""Flat sectioned key-value run configurations.

Matrices are written as rows of 0/1 digits, roof values as `word = value`
lines, and per-stage overrides live in `[stage N]` sections.  The parser
keeps line numbers for diagnostics and the renderer emits a canonical form
that reparses to an identical configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .construction import Target, next_params, plan_initial_params
from .errors import ConfigError
from .measures import MetricConfig
from .spectral import RoofFunction, parry_measure
from .words import VertexShift, from_forbidden_words, full_shift


@dataclass
class StageOverride:
    index: int
    word_length: int = None
    overlap_length: int = None
    delta: float = None
    kappa: float = None
    radius: float = None
    block_depth: int = None
    entropy_target: float = None

    FLOATS = ("delta", "kappa", "radius", "entropy_target")
    INTS = ("word_length", "overlap_length", "block_depth")


@dataclass
class RunConfig:
    alphabet: int = None
    matrix_rows: tuple = None  # tuple of digit strings
    forbidden: tuple = None  # tuple of digit strings
    block: int = None
    roof_depth: int = 1
    roof_values: tuple = ()  # ((word_string, value), ...)
    roof_constant: float = None
    c: float = None
    c_fraction: float = None
    stages: int = 1
    seed: int = 0
    metric_depth: int = 2
    samples: int = 32
    out: str = None
    stage_overrides: tuple = ()

    def build_shift(self):
        if self.alphabet is None:
            raise ConfigError("missing [shift] alphabet", field="alphabet")
        if self.matrix_rows is not None:
            rows = [[int(ch) for ch in r] for r in self.matrix_rows]
            if len(rows) != self.alphabet or any(len(r) != self.alphabet for r in rows):
                raise ConfigError(
                    f"matrix must be {self.alphabet} rows of {self.alphabet} digits",
                    field="matrix",
                )
            return VertexShift(rows)
        if self.forbidden is not None:
            words = [tuple(int(ch) for ch in w) for w in self.forbidden]
            return from_forbidden_words(self.alphabet, words, block=self.block)
        return full_shift(self.alphabet)

    def build_roof(self, shift):
        size = shift.ambient_size
        if self.roof_constant is not None:
            return RoofFunction.constant(self.roof_constant, size)
        if not self.roof_values:
            raise ConfigError("roof needs `constant` or word values", field="roof")
        values = {
            tuple(int(ch) for ch in w): v for w, v in self.roof_values
        }
        return RoofFunction(self.roof_depth, values)

    def build_target(self, shift=None):
        shift = shift or self.build_shift()
        rho = self.build_roof(shift)
        mu = parry_measure(shift)
        from .spectral import abramov, markov_entropy, roof_integral

        hstar = abramov(markov_entropy(mu), roof_integral(mu, rho))
        if self.c is not None:
            c = self.c
        elif self.c_fraction is not None:
            c = self.c_fraction * hstar
        else:
            raise ConfigError("target needs `c` or `c_fraction`", field="target")
        return Target(c=c, rho=rho, base=shift, base_measure=mu)

    def build_schedule(self, target):
        overrides = {o.index: o for o in self.stage_overrides}
        metric = MetricConfig(self.metric_depth)
        schedule = []
        for i in range(1, self.stages + 1):
            if i == 1:
                params = plan_initial_params(target, metric=metric)
            else:
                params = next_params(schedule[-1])
            o = overrides.get(i)
            if o is not None:
                from dataclasses import replace

                kw = {}
                for name in StageOverride.FLOATS + StageOverride.INTS:
                    v = getattr(o, name)
                    if v is not None:
                        kw[name] = v
                params = replace(params, **kw)
            schedule.append(params)
        return schedule


def _parse_scalar(value, kind, line, key):
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
    except ValueError:
        raise ConfigError(f"expected {kind.__name__}, got {value!r}", line=line, field=key)
    return value


def parse_config(text):
    """Parse the sectioned key-value format into a RunConfig."""
    rc = RunConfig()
    roof_values = []
    matrix_rows = None
    forbidden = None
    overrides = {}
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("unterminated section header", line=ln)
            section = line[1:-1].strip().lower()
            if section.startswith("stage"):
                parts = section.split()
                if len(parts) != 2 or not parts[1].isdigit():
                    raise ConfigError("stage sections are `[stage N]`", line=ln)
                idx = int(parts[1])
                overrides.setdefault(idx, StageOverride(index=idx))
            elif section not in ("shift", "roof", "target", "run"):
                raise ConfigError(f"unknown section [{section}]", line=ln)
            continue
        if "=" not in line:
            raise ConfigError("expected `key = value`", line=ln)
        key, _, value = line.partition("=")
        key, value = key.strip().lower(), value.strip()
        if section is None:
            raise ConfigError("key outside any section", line=ln, field=key)
        if section == "shift":
            if key == "alphabet":
                rc.alphabet = _parse_scalar(value, int, ln, key)
            elif key == "matrix":
                matrix_rows = tuple(value.split())
                if any(not r.isdigit() for r in matrix_rows):
                    raise ConfigError("matrix rows must be digit strings", line=ln, field=key)
            elif key == "forbidden":
                forbidden = tuple(value.split())
            elif key == "block":
                rc.block = _parse_scalar(value, int, ln, key)
            else:
                raise ConfigError(f"unknown shift key {key!r}", line=ln, field=key)
        elif section == "roof":
            if key == "depth":
                rc.roof_depth = _parse_scalar(value, int, ln, key)
            elif key == "constant":
                rc.roof_constant = _parse_scalar(value, float, ln, key)
            elif key.isdigit():
                roof_values.append((key, _parse_scalar(value, float, ln, key)))
            else:
                raise ConfigError(f"unknown roof key {key!r}", line=ln, field=key)
        elif section == "target":
            if key == "c":
                rc.c = _parse_scalar(value, float, ln, key)
            elif key == "c_fraction":
                rc.c_fraction = _parse_scalar(value, float, ln, key)
            else:
                raise ConfigError(f"unknown target key {key!r}", line=ln, field=key)
        elif section == "run":
            if key == "stages":
                rc.stages = _parse_scalar(value, int, ln, key)
            elif key == "seed":
                rc.seed = _parse_scalar(value, int, ln, key)
            elif key == "metric_depth":
                rc.metric_depth = _parse_scalar(value, int, ln, key)
            elif key == "samples":
                rc.samples = _parse_scalar(value, int, ln, key)
            elif key == "out":
                rc.out = value
            else:
                raise ConfigError(f"unknown run key {key!r}", line=ln, field=key)
        else:  # stage N
            idx = int(section.split()[1])
            o = overrides[idx]
            if key in StageOverride.INTS:
                setattr(o, key, _parse_scalar(value, int, ln, key))
            elif key in StageOverride.FLOATS:
                setattr(o, key, _parse_scalar(value, float, ln, key))
            else:
                raise ConfigError(f"unknown stage key {key!r}", line=ln, field=key)
    rc.matrix_rows = matrix_rows
    rc.forbidden = forbidden
    rc.roof_values = tuple(roof_values)
    rc.stage_overrides = tuple(overrides[i] for i in sorted(overrides))
    return rc


def render_config(rc):
    """Canonical text form; parse_config(render_config(rc)) == rc."""
    lines = ["[shift]", f"alphabet = {rc.alphabet}"]
    if rc.matrix_rows is not None:
        lines.append("matrix = " + " ".join(rc.matrix_rows))
    if rc.forbidden is not None:
        lines.append("forbidden = " + " ".join(rc.forbidden))
    if rc.block is not None:
        lines.append(f"block = {rc.block}")
    lines.append("")
    lines.append("[roof]")
    if rc.roof_constant is not None:
        lines.append(f"constant = {rc.roof_constant!r}")
    else:
        lines.append(f"depth = {rc.roof_depth}")
        for w, v in rc.roof_values:
            lines.append(f"{w} = {v!r}")
    lines.append("")
    lines.append("[target]")
    if rc.c is not None:
        lines.append(f"c = {rc.c!r}")
    if rc.c_fraction is not None:
        lines.append(f"c_fraction = {rc.c_fraction!r}")
    lines.append("")
    lines.append("[run]")
    lines.append(f"stages = {rc.stages}")
    lines.append(f"seed = {rc.seed}")
    lines.append(f"metric_depth = {rc.metric_depth}")
    lines.append(f"samples = {rc.samples}")
    if rc.out is not None:
        lines.append(f"out = {rc.out}")
    for o in rc.stage_overrides:
        lines.append("")
        lines.append(f"[stage {o.index}]")
        for name in StageOverride.INTS + StageOverride.FLOATS:
            v = getattr(o, name)
            if v is not None:
                lines.append(f"{name} = {v!r}")
    return "\n".join(lines) + "\n"
