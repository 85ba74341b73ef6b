"""Hypothesis templates: a prefix pattern with one label slot.

A template like ``"this text contains {} speech."`` is instantiated once
per candidate label; the premise/hypothesis pairs then go to an NLI
backend. Candidate labels may carry a display surface form, e.g. the
``neither`` class is phrased as ``neutral`` inside hypotheses while gold
labels keep the original spelling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import yaml

SLOT = "{}"


class TemplateError(ValueError):
    """Invalid template pattern or label set."""


def validate_template(pattern: str) -> str | None:
    """Return None when the pattern is usable, else a diagnostic string."""
    n = pattern.count(SLOT)
    if n == 0:
        return "missing slot: pattern must contain the marker {} exactly once"
    if n > 1:
        return f"multiple slots: found {n} occurrences of {{}}, expected exactly one"
    return None


def instantiate(template: "HypothesisTemplate | str", label: str) -> str:
    """Fill the template slot with a label (or label surface form)."""
    pattern = template.pattern if isinstance(template, HypothesisTemplate) else template
    diagnostic = validate_template(pattern)
    if diagnostic is not None:
        raise TemplateError(diagnostic)
    if not label:
        raise TemplateError("label must be non-empty")
    return pattern.replace(SLOT, label)


@dataclass(frozen=True)
class HypothesisTemplate:
    template_id: str
    pattern: str
    description: str = ""

    def __post_init__(self):
        diagnostic = validate_template(self.pattern)
        if diagnostic is not None:
            raise TemplateError(f"template {self.template_id!r}: {diagnostic}")
        if not self.pattern.replace(SLOT, "").strip():
            raise TemplateError(
                f"template {self.template_id!r}: pattern is empty outside the slot"
            )

    def instantiate(self, label: str) -> str:
        return instantiate(self.pattern, label)


@dataclass(frozen=True)
class CandidateLabelSet:
    """Ordered candidate labels plus optional display phrases per label.

    Order matters: prediction ties are broken by first position.
    """

    labels: tuple[str, ...]
    surface_forms: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.labels:
            raise TemplateError("candidate label set must be non-empty")
        object.__setattr__(self, "labels", tuple(self.labels))
        surfaced = [self.surface(label) for label in self.labels]
        if len(set(surfaced)) != len(surfaced):
            raise TemplateError(
                f"surface forms collide: {surfaced!r} contains duplicates"
            )

    def surface(self, label: str) -> str:
        return self.surface_forms.get(label, label)

    def hypotheses(self, template: HypothesisTemplate | str) -> list[str]:
        return [instantiate(template, self.surface(label)) for label in self.labels]


# Verbs of the built-in sweep patterns, in fixed presentation order.
_BUILTIN_VERBS = (
    "contains",
    "conveys",
    "reflects",
    "shows",
    "implies",
    "reveals",
    "exhibits",
    "portrays",
    "discusses",
    "addresses",
    "illustrates",
    "expresses",
    "articulates",
    "suggests",
    "narrates",
    "questions",
    "demonstrates",
    "supports",
    "has",
)

_BUILTINS = tuple(
    HypothesisTemplate(
        template_id=verb,
        pattern=f"this text {verb} {{}} speech.",
        description=f'built-in sweep pattern with active verb "{verb}"',
    )
    for verb in _BUILTIN_VERBS
)

# Template used by the worked classification example in the docs.
EXAMPLE_TEMPLATE = HypothesisTemplate(
    template_id="example-is",
    pattern="This example is {}.",
    description="minimal copula pattern used in the worked example",
)


def builtin_templates() -> tuple[HypothesisTemplate, ...]:
    """The 19 immutable built-in sweep templates, in fixed order."""
    return _BUILTINS


def get_template(template_id: str) -> HypothesisTemplate:
    for template in _BUILTINS + (EXAMPLE_TEMPLATE,):
        if template.template_id == template_id:
            return template
    raise TemplateError(f"unknown template id {template_id!r}")


def resolve_template(id_or_pattern: str) -> HypothesisTemplate:
    """Accept either a known template id or a raw single-slot pattern."""
    if SLOT in id_or_pattern:
        return HypothesisTemplate(template_id="custom", pattern=id_or_pattern)
    return get_template(id_or_pattern)


def load_templates(path: str | Path) -> list[HypothesisTemplate]:
    """Read user templates from a YAML or JSON config file.

    Expected shape: a list of entries with keys ``id``, ``pattern`` and an
    optional ``description``.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    entries = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    if not isinstance(entries, list):
        raise TemplateError(f"{path}: expected a list of template entries")
    templates = []
    for i, entry in enumerate(entries):
        try:
            templates.append(
                HypothesisTemplate(
                    template_id=str(entry["id"]),
                    pattern=str(entry["pattern"]),
                    description=str(entry.get("description", "")),
                )
            )
        except KeyError as exc:
            raise TemplateError(f"{path}: entry {i} is missing key {exc}") from None
    return templates
