"""
Spectrum documents: TOML parsing and serialisation

A document holds ``[[primitive]]`` tables describing σ(A), and optionally
``[[model]]`` tables (operator models for the index check) and ``[[probe]]``
tables (continuity probes).
"""

import json
import math
import re
import logging
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from spectrum.spectrum import SpectrumSpec
from utils.errors import SpecSemanticError, SpecSyntaxError

try:
    import tomllib as _tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as _tomllib


logger = logging.getLogger(__name__)

_POSITION = re.compile(r"\(at line (\d+), column (\d+)\)")
_PATTERN = re.compile(r"^(n|2n|const:\d+)$")

TOP_LEVEL_KEYS = {"name", "primitive", "model", "probe"}


class ModelDecl(BaseModel):
    """Operator model declaration"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["toeplitz", "multiplication", "direct_sum"]
    poly: Optional[Tuple[Union[float, Tuple[float, float]], ...]] = None
    trig: Optional[Tuple[Union[float, Tuple[float, float]], ...]] = None
    trig_offset: int = 0
    parts: Tuple['ModelDecl', ...] = ()
    level: Optional[int] = Field(default=None, ge=0)
    description: str = ""

    @model_validator(mode="after")
    def _validate(self):
        if self.kind == "toeplitz":
            if (self.poly is None) == (self.trig is None):
                raise ValueError("toeplitz model needs exactly one of poly= or trig=")
            coefficients = self.coefficients()
            if not coefficients or all(c == 0 for c in coefficients):
                raise ValueError("toeplitz symbol must have a non-zero coefficient")
        elif self.poly is not None or self.trig is not None:
            raise ValueError(f"{self.kind} model takes no symbol coefficients")
        if self.kind == "direct_sum" and not self.parts:
            raise ValueError("direct_sum model needs parts=")
        if self.kind != "direct_sum" and self.parts:
            raise ValueError("only direct_sum models take parts=")
        return self

    def coefficients(self) -> List[complex]:
        raw = self.poly if self.poly is not None else self.trig
        return [complex(c[0], c[1]) if isinstance(c, tuple) else complex(c) for c in raw or ()]


ModelDecl.model_rebuild()


class ProbeDecl(BaseModel):
    """Continuity probe declaration: generator patterns, explicit lists or dyadic times"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    L: Optional[Union[str, Tuple[int, ...]]] = None
    S: Optional[Union[str, Tuple[int, ...]]] = None
    times: Optional[Tuple[str, ...]] = None
    epsilon: float = Field(gt=0)
    n0: int = Field(default=1, ge=1)
    label: Optional[str] = None

    @model_validator(mode="after")
    def _validate(self):
        if self.times is not None:
            if self.L is not None or self.S is not None:
                raise ValueError("probe takes either times= or L=/S=, not both")
            return self
        if self.L is None or self.S is None:
            raise ValueError("probe needs L= and S= (or times=)")
        for name in ("L", "S"):
            value = getattr(self, name)
            if isinstance(value, str) and not _PATTERN.match(value):
                raise ValueError(f"{name} pattern must be 'n', '2n' or 'const:c', got {value!r}")
        if isinstance(self.L, tuple) and isinstance(self.S, tuple) and len(self.L) != len(self.S):
            raise ValueError("explicit L and S lists must have equal length")
        return self


class SpectrumDocument(BaseModel):
    model_config = ConfigDict(frozen=True)

    spec: SpectrumSpec
    models: Tuple[ModelDecl, ...] = ()
    probes: Tuple[ProbeDecl, ...] = ()


def _load_toml(text: str) -> Dict[str, Any]:
    try:
        return _tomllib.loads(text)
    except _tomllib.TOMLDecodeError as e:
        line = getattr(e, 'lineno', None)
        column = getattr(e, 'colno', None)
        if line is None:
            match = _POSITION.search(str(e))
            if match:
                line, column = int(match.group(1)), int(match.group(2))
        message = getattr(e, 'msg', None) or _POSITION.sub("", str(e)).strip()
        raise SpecSyntaxError(message, line, column) from e


def _times_to_strings(probe: Dict[str, Any]) -> Dict[str, Any]:
    if 'times' in probe and isinstance(probe['times'], list):
        probe = dict(probe)
        probe['times'] = [t if isinstance(t, str) else repr(float(t)) for t in probe['times']]
    return probe


def parse_document(text: str) -> SpectrumDocument:
    """Parse a full document (spectrum, models, probes)"""
    data = _load_toml(text)

    unknown = set(data) - TOP_LEVEL_KEYS
    if unknown:
        raise SpecSemanticError(f"Unknown top-level keys: {sorted(unknown)}")

    primitives = data.get('primitive', [])
    if not isinstance(primitives, list) or not primitives:
        raise SpecSemanticError("Document declares no [[primitive]] tables")

    try:
        spec = SpectrumSpec(primitives=primitives, name=data.get('name'))
        models = tuple(ModelDecl.model_validate(m) for m in data.get('model', []))
        probes = tuple(ProbeDecl.model_validate(_times_to_strings(p)) for p in data.get('probe', []))
    except ValidationError as e:
        raise SpecSemanticError(_describe_validation(e)) from e

    logger.info(
        f"Parsed document '{spec.name or 'unnamed'}': {len(spec.primitives)} primitives, "
        f"{len(models)} models, {len(probes)} probes"
    )
    return SpectrumDocument(spec=spec, models=models, probes=probes)


def parse_spec(text: str) -> SpectrumSpec:
    """Parse and validate the spectrum part of a document"""
    return parse_document(text).spec


def _describe_validation(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item.get('loc', ()))
        parts.append(f"{location}: {item.get('msg')}")
    return "; ".join(parts)


# Serialisation

def _toml_value(value: Any) -> str:
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(item) for item in value) + "]"
    if isinstance(value, Mapping):
        items = [f"{key} = {_toml_value(item)}" for key, item in value.items()]
        return "{ " + ", ".join(items) + " }"
    raise ValueError(f"Unsupported TOML value type: {type(value).__name__}")


def serialize_spec(spec: SpectrumSpec) -> str:
    """Render a spectrum as a document that parses back to an equal SpectrumSpec"""
    lines: List[str] = []
    if spec.name is not None:
        lines.append(f"name = {_toml_value(spec.name)}")
    for primitive in spec.primitives:
        if lines:
            lines.append("")
        lines.append("[[primitive]]")
        for key, value in primitive.model_dump().items():
            lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"
